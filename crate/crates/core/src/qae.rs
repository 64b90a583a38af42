//! Amplitude estimation with a chosen relative error and failure probability:
//! pick the Grover power from `(ε, a_min)`, repeat phase estimation `J` times
//! with independent seeded streams, and average `sin²θ̃`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};

use crate::error::{Error, Result};
use crate::qsim::{
    measure_register, outcome_to_angle, qpe_distribution, qpe_distribution_circuit,
    qpe_distribution_subspace, Circuit, EvidencePattern, QpeMode, StateVector,
};

/// Inputs to [`estimate_amplitude`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaeConfig {
    /// Relative error target, in `(0, 1/3)`.
    pub epsilon: f64,
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Lower bound on the amplitude being estimated, in `(0, 1]`.
    pub a_min: f64,
    /// Ancilla count to use instead of `⌈log2(m+1)⌉`.
    #[serde(default)]
    pub t_override: Option<u32>,
    #[serde(default)]
    pub mode: QpeMode,
}

impl QaeConfig {
    pub fn new(epsilon: f64, delta: f64, a_min: f64) -> Result<Self> {
        let cfg = QaeConfig {
            epsilon,
            delta,
            a_min,
            t_override: None,
            mode: QpeMode::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 3.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside (0, 1/3)",
                self.epsilon
            )));
        }
        check_delta(self.delta)?;
        if !(self.a_min > 0.0 && self.a_min <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "a_min {} outside (0, 1]",
                self.a_min
            )));
        }
        if let Some(t) = self.t_override {
            if t == 0 || t > 40 {
                return Err(Error::InvalidConfig(format!("ancilla count {t}")));
            }
        }
        Ok(())
    }

    /// Ancilla count actually used.
    pub fn ancillas(&self) -> Result<u32> {
        Ok(match self.t_override {
            Some(t) => t,
            None => ancillas_for(grover_power(self)?),
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "delta {delta} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Result of [`estimate_amplitude`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEstimate {
    /// Mean of the per-run estimates.
    pub a_hat: f64,
    /// Per-run `sin²θ̃_j`, in run order.
    pub runs: Vec<f64>,
    /// `m`, the Grover power the precision target asks for.
    pub grover_power: u64,
    /// `T`, the ancilla count used.
    pub ancillas: u32,
    pub total_grover_calls: u64,
}

/// `m = 2⌈π / (√a_min ε)⌉`, even so that `a = 1` is read exactly.
pub fn grover_power(cfg: &QaeConfig) -> Result<u64> {
    cfg.validate()?;
    Ok(2 * (PI / (cfg.a_min.sqrt() * cfg.epsilon)).ceil() as u64)
}

/// Smallest `T` with `2^T ≥ m + 1`.
pub fn ancillas_for(m: u64) -> u32 {
    (m + 1).next_power_of_two().trailing_zeros()
}

/// Inverse error function on `(-1, 1)`: the library's rational approximation
/// followed by two Newton steps on `erf(x) = y`.
pub fn erfinv(y: f64) -> f64 {
    let mut x = erf_inv(y);
    if !x.is_finite() {
        return x;
    }
    for _ in 0..2 {
        let slope = 2.0 / PI.sqrt() * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        x -= (erf(x) - y) / slope;
    }
    x
}

/// `J = max(1, ⌈2(π² − 8) erfinv(1 − δ)² / π²⌉)`.
pub fn repetitions(delta: f64) -> Result<u32> {
    check_delta(delta)?;
    let e = erfinv(1.0 - delta);
    let j = (2.0 * (PI * PI - 8.0) * e * e / (PI * PI)).ceil();
    Ok(j.max(1.0) as u32)
}

/// `sin²θ̃` for readout `y`. The two eigenphases `±θ` land on `y` and `2^T - y`;
/// both are mapped to the smaller one so mirrored readouts agree bit for bit.
pub fn amplitude_from_outcome(y: u64, t: u32) -> f64 {
    let y = y.min((1u64 << t) - y);
    outcome_to_angle(y, t).sin().powi(2)
}

/// Generator for run `j` of a seeded estimate.
pub fn run_rng(seed: u64, j: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    rng
}

/// Estimates `a = ⟨ψ|P|ψ⟩` for `ψ = O|0⟩`.
///
/// Each of the `J` runs is one phase estimation with `T` ancillas; the
/// estimate is the arithmetic mean of `sin²θ̃_j`, summed in run order.
pub fn estimate_amplitude(
    encoder: &Circuit,
    pattern: &EvidencePattern,
    cfg: &QaeConfig,
    seed: u64,
    cap: usize,
) -> Result<AmplitudeEstimate> {
    let t = cfg.ancillas()?;
    let dist = qpe_distribution(encoder, pattern, t, cfg.mode, cap)?;
    from_distribution(&dist, cfg, seed)
}

/// [`estimate_amplitude`] for a caller that already holds `ψ = O|0⟩`,
/// avoiding re-running the encoder for every pattern.
pub fn estimate_amplitude_prepared(
    encoder: &Circuit,
    psi: &StateVector,
    pattern: &EvidencePattern,
    cfg: &QaeConfig,
    seed: u64,
    cap: usize,
) -> Result<AmplitudeEstimate> {
    let t = cfg.ancillas()?;
    let dist = match cfg.mode {
        QpeMode::Circuit => qpe_distribution_circuit(encoder, pattern, t, cap)?,
        QpeMode::Subspace => {
            if encoder.n_qubits() + t as usize > cap {
                return Err(Error::TooManyQubits {
                    requested: encoder.n_qubits() + t as usize,
                    cap,
                });
            }
            qpe_distribution_subspace(psi.measure_amplitude(pattern)?, t)
        }
    };
    from_distribution(&dist, cfg, seed)
}

fn from_distribution(dist: &[f64], cfg: &QaeConfig, seed: u64) -> Result<AmplitudeEstimate> {
    let m = grover_power(cfg)?;
    let t = cfg.ancillas()?;
    let j = repetitions(cfg.delta)?;
    let runs: Vec<f64> = (0..j)
        .map(|r| {
            let y = measure_register(dist, &mut run_rng(seed, r));
            amplitude_from_outcome(y, t)
        })
        .collect();
    let a_hat = (runs.iter().sum::<f64>() / j as f64).clamp(0.0, 1.0);
    Ok(AmplitudeEstimate {
        a_hat,
        runs,
        grover_power: m,
        ancillas: t,
        total_grover_calls: j as u64 * ((1u64 << t) - 1),
    })
}

/// Grover-operator applications spent by an estimate.
pub fn query_count(est: &AmplitudeEstimate) -> u64 {
    est.total_grover_calls
}

/// Grover calls [`estimate_amplitude`] would spend for `cfg`.
pub fn predicted_query_count(cfg: &QaeConfig) -> Result<u64> {
    let t = cfg.ancillas()?;
    Ok(repetitions(cfg.delta)? as u64 * ((1u64 << t) - 1))
}
