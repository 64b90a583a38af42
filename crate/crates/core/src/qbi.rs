//! Posterior estimation `P(Y | X = x)` from an encoded network: one amplitude
//! estimate for the evidence and one per target assignment, each run at
//! `(ε/3, δ/2)`, with entries reported as their ratio.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{Assignment, NodeId, Posterior};
use crate::error::{Error, Result};
use crate::qae::{estimate_amplitude, predicted_query_count, AmplitudeEstimate, QaeConfig};
use crate::qsim::{Circuit, EvidencePattern, QpeMode};

/// Inputs to [`infer_posterior`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceRequest {
    pub evidence: Vec<(NodeId, u8)>,
    pub targets: Vec<NodeId>,
    pub epsilon: f64,
    pub delta: f64,
    /// Lower bound on `P(X = x)`.
    pub a_min_evidence: f64,
    pub seed: u64,
    #[serde(default)]
    pub mode: QpeMode,
}

impl InferenceRequest {
    pub fn validate(&self) -> Result<()> {
        for t in &self.targets {
            if self.evidence.iter().any(|(e, _)| e == t) {
                return Err(Error::OverlappingVariables(*t));
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            if self.targets[..i].contains(t) {
                return Err(Error::OverlappingVariables(*t));
            }
        }
        if self.targets.len() > 16 {
            return Err(Error::InvalidConfig(format!(
                "{} targets is too many to enumerate",
                self.targets.len()
            )));
        }
        self.evidence_config()?;
        self.numerator_config()?;
        Ok(())
    }

    fn split(&self, a_min: f64) -> Result<QaeConfig> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 3.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside (0, 1/3)",
                self.epsilon
            )));
        }
        let mut cfg = QaeConfig::new(self.epsilon / 3.0, self.delta / 2.0, a_min)?;
        cfg.mode = self.mode;
        Ok(cfg)
    }

    /// Configuration of the evidence (denominator) estimate.
    pub fn evidence_config(&self) -> Result<QaeConfig> {
        self.split(self.a_min_evidence)
    }

    /// Configuration of each joint (numerator) estimate, using the worst-case
    /// bound `P(Y = y, X = x) ≥ a_min_evidence · 2^{-|Y|}`.
    pub fn numerator_config(&self) -> Result<QaeConfig> {
        self.split(self.a_min_evidence * 0.5f64.powi(self.targets.len() as i32))
    }
}

/// Per-entry numerator and denominator estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDiagnostics {
    pub target_values: Vec<u8>,
    pub numerator: f64,
    pub denominator: f64,
    pub grover_calls: u64,
}

/// Output of [`infer_posterior`]. Entries are ratios of independent estimates
/// and are not renormalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedPosterior {
    pub posterior: Posterior,
    pub denominator: AmplitudeEstimate,
    pub entries: Vec<EntryDiagnostics>,
    pub total_grover_calls: u64,
}

impl EstimatedPosterior {
    /// Entries scaled to sum to one, for display.
    pub fn normalized(&self) -> Vec<f64> {
        let z: f64 = self.posterior.probs.iter().sum();
        self.posterior
            .probs
            .iter()
            .map(|p| if z > 0.0 { p / z } else { 0.0 })
            .collect()
    }
}

/// Qubit pattern for the observed entries of `evidence`; missing variables
/// are left out, which sums the amplitude over them.
pub fn restrict_missing(encoder: &Circuit, evidence: &Assignment) -> Result<EvidencePattern> {
    if evidence.len() != encoder.layout().len() {
        return Err(Error::DimensionMismatch {
            expected: encoder.layout().len(),
            found: evidence.len(),
        });
    }
    encoder.pattern_for(&evidence.observed_pairs())
}

/// Estimates `P(targets | evidence)` on the network loaded by `encoder`.
///
/// With no targets the result is the single entry 1 and only the evidence
/// probability is estimated.
pub fn infer_posterior(
    encoder: &Circuit,
    req: &InferenceRequest,
    cap: usize,
) -> Result<EstimatedPosterior> {
    req.validate()?;
    let ev_pattern = encoder.pattern_for(&req.evidence)?;
    let mut seeds = ChaCha8Rng::seed_from_u64(req.seed);
    let denominator = estimate_amplitude(
        encoder,
        &ev_pattern,
        &req.evidence_config()?,
        seeds.next_u64(),
        cap,
    )?;
    if denominator.a_hat == 0.0 {
        return Err(Error::ZeroEvidenceProbability);
    }
    let mut total = denominator.total_grover_calls;
    let k = req.targets.len();
    if k == 0 {
        return Ok(EstimatedPosterior {
            posterior: Posterior {
                targets: vec![],
                probs: vec![1.0],
            },
            denominator,
            entries: vec![],
            total_grover_calls: total,
        });
    }
    let num_cfg = req.numerator_config()?;
    let mut probs = Vec::with_capacity(1 << k);
    let mut entries = Vec::with_capacity(1 << k);
    for y in 0..1usize << k {
        let values: Vec<u8> = (0..k).map(|b| ((y >> b) & 1) as u8).collect();
        let pairs: Vec<(NodeId, u8)> = req.targets.iter().copied().zip(values.clone()).collect();
        let pattern = ev_pattern.join(&encoder.pattern_for(&pairs)?)?;
        let num = estimate_amplitude(encoder, &pattern, &num_cfg, seeds.next_u64(), cap)?;
        total += num.total_grover_calls;
        probs.push(num.a_hat / denominator.a_hat);
        entries.push(EntryDiagnostics {
            target_values: values,
            numerator: num.a_hat,
            denominator: denominator.a_hat,
            grover_calls: num.total_grover_calls,
        });
    }
    Ok(EstimatedPosterior {
        posterior: Posterior {
            targets: req.targets.clone(),
            probs,
        },
        denominator,
        entries,
        total_grover_calls: total,
    })
}

/// Grover calls [`infer_posterior`] will spend on `req`.
pub fn posterior_cost(req: &InferenceRequest) -> Result<u64> {
    req.validate()?;
    let den = predicted_query_count(&req.evidence_config()?)?;
    if req.targets.is_empty() {
        return Ok(den);
    }
    let num = predicted_query_count(&req.numerator_config()?)?;
    Ok(den + (1u64 << req.targets.len()) * num)
}
