use super::{check_cap, Circuit, GateOp, StateVector};
use crate::bayesnet::{joint_of_values, topological_sort, BayesianNetwork, TopologicalOrder};
use crate::error::Result;

/// Output of [`encode_network`]: the state-preparation circuit, the prepared
/// state `O|0⟩`, and the variable order used for qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedNetwork {
    pub circuit: Circuit,
    pub state: StateVector,
    pub order: TopologicalOrder,
}

impl EncodedNetwork {
    /// Largest `| |amp(x)|² - P(x) |` over all full assignments of `net`.
    pub fn max_joint_error(&self, net: &BayesianNetwork) -> f64 {
        let n = net.n_vars();
        let mut values = vec![0u8; n];
        let mut worst = 0.0f64;
        for x in 0..1usize << n {
            for (i, v) in values.iter_mut().enumerate() {
                *v = ((x >> i) & 1) as u8;
            }
            let amp = self.state.amplitudes()[self.circuit.basis_index(&values)];
            worst = worst.max((amp.norm_sqr() - joint_of_values(net, &values)).abs());
        }
        worst
    }
}

fn angle(p0: f64) -> f64 {
    2.0 * p0.clamp(0.0, 1.0).sqrt().acos()
}

/// Builds the circuit that loads the joint distribution of `net` into
/// amplitudes, so `|amp(x)|² = P(x)` for every full assignment.
///
/// Qubit `k` holds the variable at topological position `k`. A root gets one
/// `RY(2 acos √P(X=0))`; a node with `m` parents gets one multi-controlled
/// `RY` per parent assignment.
pub fn encode_network(net: &BayesianNetwork, cap: usize) -> Result<EncodedNetwork> {
    let order = topological_sort(net)?;
    let n = net.n_vars();
    check_cap(n, cap)?;
    let pos = order.positions();
    let mut ops = Vec::new();
    for (k, &node) in order.nodes().iter().enumerate() {
        let cpt = net.cpt(node);
        if cpt.parents().is_empty() {
            ops.push(GateOp::Ry {
                target: k,
                theta: angle(cpt.rows()[0][0]),
            });
            continue;
        }
        for (r, row) in cpt.rows().iter().enumerate() {
            let controls = cpt
                .parents()
                .iter()
                .enumerate()
                .map(|(b, p)| (pos[p.0], ((r >> b) & 1) as u8))
                .collect();
            ops.push(GateOp::Cry {
                controls,
                target: k,
                theta: angle(row[0]),
            });
        }
    }
    let circuit = Circuit::new(n, ops, order.nodes().to_vec())?;
    let mut state = StateVector::zero(n, cap)?;
    circuit.apply(&mut state)?;
    Ok(EncodedNetwork {
        circuit,
        state,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{Cpt, NodeId};
    use crate::qsim::DEFAULT_QUBIT_CAP;

    #[test]
    fn single_node() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.64)]).unwrap();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        let a = enc.state.amplitudes();
        assert!((a[0].re - 0.8).abs() < 1e-12 && (a[1].re - 0.6).abs() < 1e-12);
    }

    #[test]
    fn copy_chain() {
        let net =
            BayesianNetwork::new(vec![Cpt::root(0.5), Cpt::child(NodeId(0), 1.0, 0.0)]).unwrap();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, want) in [h, 0.0, 0.0, h].iter().enumerate() {
            assert!((enc.state.amplitudes()[i].re - want).abs() < 1e-12);
        }
        assert!(enc.max_joint_error(&net) < 1e-15);
    }

    #[test]
    fn qubits_follow_topological_order() {
        // Node 1 is the root, so it sits on qubit 0.
        let net =
            BayesianNetwork::new(vec![Cpt::child(NodeId(1), 0.2, 0.7), Cpt::root(0.9)]).unwrap();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(enc.circuit.layout(), &[NodeId(1), NodeId(0)]);
        assert_eq!(enc.circuit.qubit_of(NodeId(0)), Some(1));
        let p = |x0: u8, x1: u8| crate::bayesnet::joint_of_values(&net, &[x0, x1]);
        for (x0, x1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let i = enc.circuit.basis_index(&[x0, x1]);
            assert!((enc.state.amplitudes()[i].norm_sqr() - p(x0, x1)).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.5); 3]).unwrap();
        assert!(encode_network(&net, 2).is_err());
    }
}
