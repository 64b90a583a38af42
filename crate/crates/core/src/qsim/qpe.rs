use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grover::apply_with_inverse;
use super::{check_cap, Circuit, EvidencePattern, GateOp, GroverSubspace, StateVector};
use crate::error::{Error, Result};

/// How the phase-estimation outcome distribution is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpeMode {
    /// Simulate the full register, applying `G` `2^k` times under ancilla `k`.
    Circuit,
    /// Use the closed-form spectrum of `G` on its invariant plane. Exact up to
    /// rounding and independent of the ancilla count's cost.
    #[default]
    Subspace,
}

/// One phase-estimation readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpeOutcome {
    /// Measured ancilla register value in `0..2^T`.
    pub y: u64,
    /// `θ̃ = π y / 2^T`.
    pub theta: f64,
}

/// Maps an ancilla readout to `θ̃ = π y / 2^T`. The eigenvalue `e^{2iθ}` puts
/// the register peak at `y ≈ 2^T θ / π`, so `sin²θ̃` estimates the amplitude.
pub fn outcome_to_angle(y: u64, t: u32) -> f64 {
    PI * y as f64 / (1u64 << t) as f64
}

/// The phase-estimation circuit on `n + t` qubits, ancillas above the data.
/// The first op loads `O|0⟩` as a marker; execution starts from that state.
pub fn qpe_circuit(encoder: &Circuit, t: u32) -> Result<Circuit> {
    let n = encoder.n_qubits();
    let anc: Vec<usize> = (n..n + t as usize).collect();
    let mut ops: Vec<GateOp> = encoder.ops().to_vec();
    ops.extend(anc.iter().map(|&q| GateOp::Hadamard { qubit: q }));
    ops.extend(
        anc.iter()
            .enumerate()
            .map(|(k, &q)| GateOp::ControlledGroverPower {
                control: q,
                power: 1 << k,
            }),
    );
    ops.push(GateOp::InvQft { qubits: anc });
    Circuit::new(n + t as usize, ops, encoder.layout().to_vec())
}

/// Outcome distribution over `0..2^t` by simulating the full register.
pub fn qpe_distribution_circuit(
    encoder: &Circuit,
    pattern: &EvidencePattern,
    t: u32,
    cap: usize,
) -> Result<Vec<f64>> {
    let n = encoder.n_qubits();
    check_cap(n + t as usize, cap)?;
    pattern.check(n)?;
    let inverse = encoder.inverse();
    let full = qpe_circuit(encoder, t)?;
    let mut s = StateVector::zero(n + t as usize, cap)?;
    for op in full.ops() {
        match op {
            GateOp::ControlledGroverPower { control, power } => {
                for _ in 0..*power {
                    apply_with_inverse(encoder, &inverse, pattern, &mut s, Some(*control))?;
                }
            }
            other => other.apply(&mut s, None)?,
        }
    }
    let mut dist = vec![0.0; 1 << t];
    for (i, a) in s.amplitudes().iter().enumerate() {
        dist[i >> n] += a.norm_sqr();
    }
    Ok(dist)
}

/// `|M^{-1} Σ_k e^{2πikΔ/M}|²`, with exact values at integer `Δ`.
fn fejer(delta: f64, m: f64) -> f64 {
    let d = delta.rem_euclid(m);
    let k = d.round();
    if (d - k).abs() < 1e-9 {
        return if k == 0.0 || k == m { 1.0 } else { 0.0 };
    }
    let num = (PI * d).sin();
    let den = m * (PI * d / m).sin();
    (num * num) / (den * den)
}

/// Outcome distribution over `0..2^t` from the amplitude `a = ⟨ψ|P|ψ⟩` alone.
pub fn qpe_distribution_subspace(a: f64, t: u32) -> Vec<f64> {
    let m = (1u64 << t) as f64;
    let phases = GroverSubspace::from_amplitude(a).eigenphases();
    (0..1u64 << t)
        .map(|y| {
            phases
                .iter()
                .map(|&(phi, w)| w * fejer(m * phi - y as f64, m))
                .sum()
        })
        .collect()
}

/// Outcome distribution via the chosen path. Both paths refuse `n + t` above
/// `cap` so that switching modes never changes which inputs are accepted.
pub fn qpe_distribution(
    encoder: &Circuit,
    pattern: &EvidencePattern,
    t: u32,
    mode: QpeMode,
    cap: usize,
) -> Result<Vec<f64>> {
    match mode {
        QpeMode::Circuit => qpe_distribution_circuit(encoder, pattern, t, cap),
        QpeMode::Subspace => {
            check_cap(encoder.n_qubits() + t as usize, cap)?;
            let mut psi = StateVector::zero(encoder.n_qubits(), cap)?;
            encoder.apply(&mut psi)?;
            Ok(qpe_distribution_subspace(
                psi.measure_amplitude(pattern)?,
                t,
            ))
        }
    }
}

/// Samples a register value from `dist` using one uniform draw.
pub fn measure_register<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> u64 {
    let total: f64 = dist.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (y, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return y as u64;
        }
    }
    // Rounding left `u` past the last bucket: take the last one with mass.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64
}

/// Runs phase estimation once with a seeded generator and returns `θ̃`.
pub fn qpe_estimate(
    encoder: &Circuit,
    pattern: &EvidencePattern,
    t: u32,
    seed: u64,
    mode: QpeMode,
    cap: usize,
) -> Result<QpeOutcome> {
    if t == 0 || t >= 63 {
        return Err(Error::InvalidConfig(format!("ancilla count {t}")));
    }
    let dist = qpe_distribution(encoder, pattern, t, mode, cap)?;
    let y = measure_register(&dist, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok(QpeOutcome {
        y,
        theta: outcome_to_angle(y, t),
    })
}
