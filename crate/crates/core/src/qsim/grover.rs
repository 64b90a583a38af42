use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Circuit, EvidencePattern, StateVector};
use crate::error::Result;

/// Applies one Grover iterate `G = -O S_0 O† S_x` built from the encoder `O`
/// and the evidence pattern `x`, optionally controlled by qubit `control`.
///
/// With `a = ⟨ψ|P|ψ⟩` for `ψ = O|0⟩`, `G` rotates span{ψ, Pψ} by `2θ` with
/// `sin²θ = a`, so its eigenvalues there are `e^{±2iθ}`. The leading sign is
/// what makes that hold; it becomes a relative phase once `G` is controlled.
/// `S_0` acts on the encoder's qubits only; higher qubits are left alone.
pub fn grover_apply(
    encoder: &Circuit,
    pattern: &EvidencePattern,
    s: &mut StateVector,
    control: Option<usize>,
) -> Result<()> {
    apply_with_inverse(encoder, &encoder.inverse(), pattern, s, control)
}

/// [`grover_apply`] with `O†` supplied, for callers that iterate.
pub(crate) fn apply_with_inverse(
    encoder: &Circuit,
    inverse: &Circuit,
    pattern: &EvidencePattern,
    s: &mut StateVector,
    control: Option<usize>,
) -> Result<()> {
    pattern.check(encoder.n_qubits())?;
    let (cmask, cvalue) = control.map_or((0, 0), |c| (1usize << c, 1usize << c));
    let (pm, pv) = pattern.mask_value();
    s.negate_masked(pm | cmask, pv | cvalue);
    inverse.apply_controlled(s, control)?;
    let data = (1usize << encoder.n_qubits()) - 1;
    s.negate_masked(data | cmask, cvalue);
    encoder.apply_controlled(s, control)?;
    s.negate_masked(cmask, cvalue);
    Ok(())
}

/// Spectrum of `G` on the two-dimensional subspace containing `O|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverSubspace {
    /// `θ ∈ [0, π/2]` with `sin²θ = a`.
    pub theta: f64,
}

impl GroverSubspace {
    pub fn from_amplitude(a: f64) -> Self {
        GroverSubspace {
            theta: a.clamp(0.0, 1.0).sqrt().asin(),
        }
    }

    /// Eigenphases of `G` in turns (`λ = e^{2πiφ}`) paired with the weight of
    /// `O|0⟩` on each eigenvector.
    pub fn eigenphases(&self) -> [(f64, f64); 2] {
        let phi = self.theta / PI;
        [(phi, 0.5), (1.0 - phi, 0.5)]
    }

    /// Eigenvalues of `G` restricted to span{ψ, Gψ}, computed from the
    /// simulator rather than the closed form. Returns one value when ψ is an
    /// eigenvector.
    pub fn numeric_eigenvalues(
        encoder: &Circuit,
        pattern: &EvidencePattern,
        psi: &StateVector,
    ) -> Result<Vec<Complex64>> {
        let mut g = psi.clone();
        grover_apply(encoder, pattern, &mut g, None)?;
        let c = psi.inner(&g);
        let resid: Vec<Complex64> = g
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(x, y)| x - c * y)
            .collect();
        let rn = resid.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if rn < 1e-12 {
            return Ok(vec![c]);
        }
        let e2 = StateVector::from_amplitudes(resid.into_iter().map(|a| a / rn).collect())?;
        let mut ge2 = e2.clone();
        grover_apply(encoder, pattern, &mut ge2, None)?;
        let m = [[c, psi.inner(&ge2)], [e2.inner(&g), e2.inner(&ge2)]];
        let half_tr = (m[0][0] + m[1][1]) / 2.0;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (half_tr * half_tr - det).sqrt();
        Ok(vec![half_tr + disc, half_tr - disc])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{BayesianNetwork, Cpt, NodeId};
    use crate::qsim::{encode_network, DEFAULT_QUBIT_CAP};

    fn chain() -> BayesianNetwork {
        BayesianNetwork::new(vec![
            Cpt::root(0.7),
            Cpt::child(NodeId(0), 0.4, 0.85),
            Cpt::child(NodeId(1), 0.1, 0.6),
        ])
        .unwrap()
    }

    #[test]
    fn spectrum_matches_rotation_angle() {
        let net = chain();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        for ev in [vec![(NodeId(2), 1)], vec![(NodeId(0), 0), (NodeId(2), 0)]] {
            let p = enc.circuit.pattern_for(&ev).unwrap();
            let a = enc.state.measure_amplitude(&p).unwrap();
            let theta = GroverSubspace::from_amplitude(a).theta;
            let mut got: Vec<f64> =
                GroverSubspace::numeric_eigenvalues(&enc.circuit, &p, &enc.state)
                    .unwrap()
                    .iter()
                    .map(|l| {
                        assert!((l.norm() - 1.0).abs() < 1e-8);
                        l.arg()
                    })
                    .collect();
            got.sort_by(f64::total_cmp);
            assert!((got[0] + 2.0 * theta).abs() < 1e-8, "{got:?} vs {theta}");
            assert!((got[1] - 2.0 * theta).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_amplitude_is_fixed_point() {
        let net =
            BayesianNetwork::new(vec![Cpt::root(1.0), Cpt::child(NodeId(0), 0.5, 0.5)]).unwrap();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        let p = enc.circuit.pattern_for(&[(NodeId(0), 1)]).unwrap();
        let mut g = enc.state.clone();
        grover_apply(&enc.circuit, &p, &mut g, None).unwrap();
        assert!((enc.state.inner(&g).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preserves_norm_and_respects_control() {
        let net = chain();
        let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
        let p = enc.circuit.pattern_for(&[(NodeId(1), 1)]).unwrap();
        let mut s = enc.state.extended(1, DEFAULT_QUBIT_CAP).unwrap();
        let before = s.clone();
        grover_apply(&enc.circuit, &p, &mut s, Some(3)).unwrap();
        assert_eq!(s, before);
        s.apply_hadamard(3).unwrap();
        grover_apply(&enc.circuit, &p, &mut s, Some(3)).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
