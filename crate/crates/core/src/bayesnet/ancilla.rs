use super::{validate_dag, BayesianNetwork, NodeId};

const DECOMPOSITION_TOLERANCE: f64 = 1e-9;

/// Checks that inserting `ancillas` between `node` and its original parents
/// leaves `P(node | pa(node))` unchanged.
///
/// For every assignment of the original parents, the augmented network must
/// satisfy `Σ_A P(node | A, ..) ∏_l P(A_l | pa(A_l)) = P(node | pa(node))`,
/// and every ancilla row must be a distribution. Original variables keep
/// their ids in `augmented`; ancilla parents may only be original parents of
/// `node` or other ancillas.
pub fn verify_ancilla_decomposition(
    original: &BayesianNetwork,
    augmented: &BayesianNetwork,
    node: NodeId,
    ancillas: &[NodeId],
) -> bool {
    let n_aug = augmented.n_vars();
    if node.0 >= original.n_vars() || n_aug < original.n_vars() || validate_dag(augmented).is_err()
    {
        return false;
    }
    let mut is_ancilla = vec![false; n_aug];
    for a in ancillas {
        if a.0 >= n_aug || a.0 < original.n_vars() || is_ancilla[a.0] {
            return false;
        }
        is_ancilla[a.0] = true;
    }
    let orig_parents = original.parents(node);
    let allowed = |p: &NodeId| is_ancilla[p.0] || orig_parents.contains(p);
    if !augmented.parents(node).iter().all(allowed) {
        return false;
    }
    for a in ancillas {
        if !augmented.parents(*a).iter().all(allowed) {
            return false;
        }
        let rows_ok = augmented.cpt(*a).rows().iter().all(|r| {
            r.iter().all(|p| *p >= 0.0) && (r[0] + r[1] - 1.0).abs() <= DECOMPOSITION_TOLERANCE
        });
        if !rows_ok {
            return false;
        }
    }

    let target = original.cpt(node);
    let mut values = vec![0u8; n_aug];
    for (r, row) in target.rows().iter().enumerate() {
        for (b, p) in orig_parents.iter().enumerate() {
            values[p.0] = ((r >> b) & 1) as u8;
        }
        let mut mixed = [0.0f64; 2];
        for alpha in 0..1usize << ancillas.len() {
            for (l, a) in ancillas.iter().enumerate() {
                values[a.0] = ((alpha >> l) & 1) as u8;
            }
            let weight: f64 = ancillas
                .iter()
                .map(|a| augmented.cpt(*a).prob(values[a.0], &values))
                .product();
            for (v, m) in mixed.iter_mut().enumerate() {
                *m += weight * augmented.cpt(node).prob(v as u8, &values);
            }
        }
        if (0..2).any(|v| (mixed[v] - row[v]).abs() > DECOMPOSITION_TOLERANCE) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::Cpt;

    fn original() -> BayesianNetwork {
        BayesianNetwork::new(vec![Cpt::root(0.4), Cpt::child(NodeId(0), 0.8, 0.3)]).unwrap()
    }

    #[test]
    fn identity_decomposition() {
        let net = original();
        assert!(verify_ancilla_decomposition(&net, &net, NodeId(1), &[]));
    }

    #[test]
    fn copying_ancilla() {
        // X0 -> A2 (copy) -> X1 with the original row moved onto the ancilla.
        let aug = BayesianNetwork::new(vec![
            Cpt::root(0.4),
            Cpt::child(NodeId(2), 0.8, 0.3),
            Cpt::child(NodeId(0), 1.0, 0.0),
        ])
        .unwrap();
        assert!(verify_ancilla_decomposition(
            &original(),
            &aug,
            NodeId(1),
            &[NodeId(2)]
        ));
    }

    #[test]
    fn noisy_ancilla_changes_the_conditional() {
        let aug = BayesianNetwork::new(vec![
            Cpt::root(0.4),
            Cpt::child(NodeId(2), 0.8, 0.3),
            Cpt::child(NodeId(0), 0.9, 0.1),
        ])
        .unwrap();
        assert!(!verify_ancilla_decomposition(
            &original(),
            &aug,
            NodeId(1),
            &[NodeId(2)]
        ));
    }

    #[test]
    fn ancilla_row_not_summing_to_one() {
        let aug = BayesianNetwork::from_raw(
            [(NodeId(0), NodeId(2)), (NodeId(2), NodeId(1))],
            vec![
                Cpt::root(0.4),
                Cpt::child(NodeId(2), 0.8, 0.3),
                Cpt::new(vec![NodeId(0)], vec![[0.9, 0.0], [0.0, 1.0]]),
            ],
        );
        assert!(!verify_ancilla_decomposition(
            &original(),
            &aug,
            NodeId(1),
            &[NodeId(2)]
        ));
    }

    #[test]
    fn ancilla_replaces_one_parent() {
        // Two-parent table routed through an ancilla that copies X0.
        let p = |a: usize, b: usize| 0.1 + 0.3 * a as f64 + 0.5 * b as f64;
        let orig = BayesianNetwork::new(vec![
            Cpt::root(0.5),
            Cpt::root(0.3),
            Cpt::new(
                vec![NodeId(0), NodeId(1)],
                (0..4)
                    .map(|r| [p(r & 1, r >> 1), 1.0 - p(r & 1, r >> 1)])
                    .collect(),
            ),
        ])
        .unwrap();
        let aug = BayesianNetwork::new(vec![
            Cpt::root(0.5),
            Cpt::root(0.3),
            Cpt::new(
                vec![NodeId(3), NodeId(1)],
                (0..4)
                    .map(|r| [p(r & 1, r >> 1), 1.0 - p(r & 1, r >> 1)])
                    .collect(),
            ),
            Cpt::child(NodeId(0), 1.0, 0.0),
        ])
        .unwrap();
        assert!(verify_ancilla_decomposition(
            &orig,
            &aug,
            NodeId(2),
            &[NodeId(3)]
        ));
    }
}
