use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{topological_sort, Assignment, BayesianNetwork, NodeId, Posterior};
use crate::error::{Error, Result};

/// Counters from a rejection-sampling run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleStats {
    pub attempts: u64,
    pub accepted: u64,
}

/// Draws one full assignment by ancestral sampling along `order`.
pub fn sample_assignment<R: Rng + ?Sized>(
    net: &BayesianNetwork,
    order: &[NodeId],
    rng: &mut R,
    values: &mut [u8],
) {
    for &node in order {
        let p1 = net.cpt(node).prob(1, values);
        values[node.0] = u8::from(rng.gen::<f64>() < p1);
    }
}

/// Estimates `P(targets | evidence)` by ancestral sampling with rejection.
///
/// Samples are drawn in topological order; an attempt is rejected as soon as
/// an evidence variable takes the wrong value. Stops after `n_accepted`
/// accepted samples, or fails with `BudgetExceeded` past `max_attempts`.
pub fn forward_sample_posterior(
    net: &BayesianNetwork,
    evidence: &Assignment,
    targets: &[NodeId],
    n_accepted: u64,
    seed: u64,
    max_attempts: u64,
) -> Result<(Posterior, SampleStats)> {
    for t in targets {
        if evidence.get(*t).is_some() {
            return Err(Error::OverlappingVariables(*t));
        }
    }
    let order = topological_sort(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0u8; net.n_vars()];
    let mut counts = vec![0u64; 1usize << targets.len()];
    let mut stats = SampleStats {
        attempts: 0,
        accepted: 0,
    };
    while stats.accepted < n_accepted {
        if stats.attempts >= max_attempts {
            return Err(Error::BudgetExceeded(max_attempts));
        }
        stats.attempts += 1;
        let mut consistent = true;
        for &node in order.nodes() {
            let p1 = net.cpt(node).prob(1, &values);
            let v = u8::from(rng.gen::<f64>() < p1);
            values[node.0] = v;
            if evidence.get(node).is_some_and(|e| e != v) {
                consistent = false;
                break;
            }
        }
        if consistent {
            stats.accepted += 1;
            let k = targets
                .iter()
                .enumerate()
                .fold(0usize, |acc, (b, t)| acc | ((values[t.0] as usize) << b));
            counts[k] += 1;
        }
    }
    let total = stats.accepted.max(1) as f64;
    let probs = counts.iter().map(|&c| c as f64 / total).collect();
    Ok((
        Posterior {
            targets: targets.to_vec(),
            probs,
        },
        stats,
    ))
}
