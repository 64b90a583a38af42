//! Query-count comparison between amplitude estimation, classical rejection
//! sampling, and amplitude amplification followed by sampling, on a two-node
//! network whose evidence probability is set directly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bayesnet::{forward_sample_posterior, Assignment, BayesianNetwork, Cpt, NodeId};
use crate::error::{Error, Result};
use crate::qae::{estimate_amplitude, repetitions, QaeConfig};
use crate::qsim::encode_network;

/// Least-squares slope of `ys` against `xs`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `X0 → X1` with `P(X0 = 1) = a` and `X1` a fair coin either way; the
/// evidence `X0 = 1` has probability exactly `a`.
pub fn bench_network(a: f64) -> Result<BayesianNetwork> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "bench amplitude {a} outside (0, 1]"
        )));
    }
    BayesianNetwork::new(vec![Cpt::root(1.0 - a), Cpt::child(NodeId(0), 0.5, 0.5)])
}

/// One row of the benchmark table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub a_true: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "J")]
    pub j: u32,
    pub a_hat: f64,
    pub rel_err: f64,
    pub grover_calls: u64,
    pub classical_attempts_baseline: u64,
    pub prior_work_calls: u64,
}

/// Accepted samples the rejection sampler needs for a posterior over `k`
/// binary targets at relative error `ε` with confidence `1 - δ`: the
/// multiplicative Chernoff count `3 ln(2/δ) / (ε² p)` at the worst-case entry
/// `p = 2^{-k}`.
pub fn classical_accepted_target(epsilon: f64, delta: f64, k: u32) -> u64 {
    (3.0 * (1u64 << k) as f64 * (2.0 / delta).ln() / (epsilon * epsilon)).ceil() as u64
}

/// Grover calls for amplifying the evidence before each draw and then
/// sampling: `⌈π/(4√a)⌉` per draw times `⌈ln(2/δ)/(ε² p_min²)⌉` draws with
/// `p_min = 1/2`.
pub fn prior_work_calls(a: f64, epsilon: f64, delta: f64) -> u64 {
    let per_draw = (PI / (4.0 * a.sqrt())).ceil() as u64;
    let draws = ((2.0 / delta).ln() / (epsilon * epsilon * 0.25)).ceil() as u64;
    per_draw * draws
}

/// Measures one grid point: a seeded amplitude estimate of the evidence
/// probability with `a_min = a`, and a seeded rejection-sampling run for the
/// posterior of `X1` given the same evidence.
pub fn bench_point(a: f64, epsilon: f64, delta: f64, seed: u64, cap: usize) -> Result<BenchRow> {
    let net = bench_network(a)?;
    let enc = encode_network(&net, cap)?;
    let pattern = enc.circuit.pattern_for(&[(NodeId(0), 1)])?;
    let cfg = QaeConfig::new(epsilon, delta, a)?;
    let est = estimate_amplitude(&enc.circuit, &pattern, &cfg, seed, cap)?;
    let evidence = Assignment::observed(2, &[(NodeId(0), 1)]);
    let (_, stats) = forward_sample_posterior(
        &net,
        &evidence,
        &[NodeId(1)],
        classical_accepted_target(epsilon, delta, 1),
        seed,
        u64::MAX,
    )?;
    Ok(BenchRow {
        a_true: a,
        epsilon,
        delta,
        m: est.grover_power,
        t: est.ancillas,
        j: repetitions(delta)?,
        a_hat: est.a_hat,
        rel_err: (est.a_hat - a).abs() / a,
        grover_calls: est.total_grover_calls,
        classical_attempts_baseline: stats.attempts,
        prior_work_calls: prior_work_calls(a, epsilon, delta),
    })
}

/// Log-log slopes of each cost column against a grid variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slopes {
    pub quantum: f64,
    pub classical: f64,
    pub prior_work: f64,
}

fn slopes_against(rows: &[BenchRow], x: impl Fn(&BenchRow) -> f64) -> Slopes {
    let xs: Vec<f64> = rows.iter().map(|r| x(r).ln()).collect();
    let fit = |y: fn(&BenchRow) -> u64| {
        let ys: Vec<f64> = rows.iter().map(|r| (y(r) as f64).ln()).collect();
        log_log_slope(&xs, &ys)
    };
    Slopes {
        quantum: fit(|r| r.grover_calls),
        classical: fit(|r| r.classical_attempts_baseline),
        prior_work: fit(|r| r.prior_work_calls),
    }
}

/// Slopes of the cost columns against `a`.
pub fn slopes_vs_a(rows: &[BenchRow]) -> Slopes {
    slopes_against(rows, |r| r.a_true)
}

/// Slopes of the cost columns against `1/ε`.
pub fn slopes_vs_inverse_epsilon(rows: &[BenchRow]) -> Slopes {
    slopes_against(rows, |r| 1.0 / r.epsilon)
}

/// Runs every `(a, ε)` pair of the grid with one `δ` and seed.
pub fn run_grid(
    amplitudes: &[f64],
    epsilons: &[f64],
    delta: f64,
    seed: u64,
    cap: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(amplitudes.len() * epsilons.len());
    for &a in amplitudes {
        for &e in epsilons {
            rows.push(bench_point(a, e, delta, seed, cap)?);
        }
    }
    Ok(rows)
}

/// CSV with one header line and one line per row.
pub fn to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    if rows.is_empty() {
        return Ok(String::new());
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::DEFAULT_QUBIT_CAP;

    #[test]
    fn slope_of_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, -3.0, -5.0];
        assert!((log_log_slope(&xs, &ys) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_gives_one_row() {
        let rows = run_grid(&[0.25], &[0.1], 0.1, 1, DEFAULT_QUBIT_CAP).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].grover_calls, 127);
        assert_eq!((rows[0].m, rows[0].t, rows[0].j), (126, 7, 1));
        let text = to_csv(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "a_true,epsilon,delta,m,T,J,a_hat,rel_err,grover_calls,\
             classical_attempts_baseline,prior_work_calls"
        );
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn prior_work_formula() {
        // ⌈π/2⌉ = 2 calls per draw, ⌈4 ln 20 / 0.01⌉ = 1199 draws.
        assert_eq!(prior_work_calls(0.25, 0.1, 0.1), 2 * 1199);
    }

    #[test]
    fn bad_amplitude_is_rejected() {
        assert!(bench_network(0.0).is_err());
        assert!(bench_point(0.25, 0.5, 0.1, 0, DEFAULT_QUBIT_CAP).is_err());
    }
}
