//! Synthetic stand-in for the labeled wafer dataset: one tree network per
//! defect class over a `g × g` grid of cells, with marginals drawn from a
//! class-specific intensity map and mild coupling along a random spanning
//! tree of the grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{sample_assignment, topological_sort, BayesianNetwork, Cpt, NodeId};
use crate::chowliu::{orient_edges, SpanningTree};
use crate::error::{Error, Result};
use crate::wbm::{DefectLabel, FlatSample};

/// Generator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Grid side; the networks have `side²` variables.
    pub side: usize,
    /// Weight `ρ` of the parent in `P(X = 1 | u) = (1 - ρ) p + ρ u`.
    pub coupling: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            side: 8,
            coupling: 0.2,
            seed: 2024,
        }
    }
}

const LOW: f64 = 0.03;
const HIGH: f64 = 0.95;

/// Defect probability of the cell centred at `(x, y) ∈ [0, 1]²` for `label`.
pub fn intensity(label: DefectLabel, x: f64, y: f64) -> f64 {
    let (dx, dy) = (x - 0.5, y - 0.5);
    let r = dx.hypot(dy);
    let cheb = dx.abs().max(dy.abs());
    let on = |hit: bool| if hit { HIGH } else { LOW };
    match label {
        DefectLabel::Normal => LOW,
        DefectLabel::Center => on(r < 0.22),
        DefectLabel::Doughnut => on((0.25..0.42).contains(&r) && cheb < 0.42),
        DefectLabel::EdgeLoc => on(cheb > 0.3 && x < 0.5 && y > 0.4),
        DefectLabel::EdgeRing => on(cheb > 0.3),
        DefectLabel::Loc => on((x - 0.65).hypot(y - 0.3) < 0.2),
        DefectLabel::NearFull => 0.92,
        DefectLabel::Scratch => on((x - y).abs() < 0.13 && r > 0.1),
        DefectLabel::Random => 0.45,
    }
}

/// Cell intensities in row-major order.
pub fn intensity_map(label: DefectLabel, side: usize) -> Vec<f64> {
    let c = |k: usize| (k as f64 + 0.5) / side as f64;
    (0..side * side)
        .map(|i| intensity(label, c(i % side), c(i / side)))
        .collect()
}

/// Random spanning tree of the grid graph (Kruskal on random edge weights).
pub fn random_grid_tree(side: usize, rng: &mut impl Rng) -> SpanningTree {
    let n = side * side;
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        let (r, c) = (i / side, i % side);
        if c + 1 < side {
            edges.push((rng.gen(), i, i + 1));
        }
        if r + 1 < side {
            edges.push((rng.gen(), i, i + side));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (_, a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            tree.push((a.min(b), a.max(b)));
        }
    }
    SpanningTree { n, edges: tree }
}

/// The nine generator networks in `DefectLabel::ALL` order.
pub fn class_generators(cfg: &SyntheticConfig) -> Result<Vec<BayesianNetwork>> {
    if cfg.side == 0 || !(0.0..1.0).contains(&cfg.coupling) {
        return Err(Error::InvalidConfig(format!(
            "side {} / coupling {} not usable",
            cfg.side, cfg.coupling
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    DefectLabel::ALL
        .iter()
        .map(|&label| {
            let p = intensity_map(label, cfg.side);
            let tree = random_grid_tree(cfg.side, &mut rng);
            let edges = orient_edges(&tree, NodeId(0));
            let mut cpts: Vec<Cpt> = p.iter().map(|&pi| Cpt::root(1.0 - pi)).collect();
            for (from, to) in edges {
                let pi = p[to.0];
                let p1 = |u: f64| (1.0 - cfg.coupling) * pi + cfg.coupling * u;
                cpts[to.0] = Cpt::child(from, 1.0 - p1(0.0), 1.0 - p1(1.0));
            }
            BayesianNetwork::new(cpts)
        })
        .collect()
}

/// `per_class` labeled samples from each generator, classes in order.
pub fn sample_dataset(
    generators: &[BayesianNetwork],
    per_class: usize,
    seed: u64,
) -> Result<Vec<FlatSample>> {
    let mut out = Vec::with_capacity(generators.len() * per_class);
    for (k, net) in generators.iter().enumerate() {
        let label = *DefectLabel::ALL
            .get(k)
            .ok_or_else(|| Error::InvalidConfig("more generators than classes".into()))?;
        let order = topological_sort(net)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        for _ in 0..per_class {
            let mut values = vec![0u8; net.n_vars()];
            sample_assignment(net, order.nodes(), &mut rng, &mut values);
            out.push(FlatSample::new(values, Some(label)));
        }
    }
    Ok(out)
}

/// `P(X_i = 1)` for every variable, propagated down the topological order.
/// Only valid for networks with indegree at most one.
pub fn marginals(net: &BayesianNetwork) -> Result<Vec<f64>> {
    if net.max_indegree() > 1 {
        return Err(Error::InvalidConfig("marginals need a tree network".into()));
    }
    let order = topological_sort(net)?;
    let mut m = vec![0.0; net.n_vars()];
    for &node in order.nodes() {
        let cpt = net.cpt(node);
        m[node.0] = match cpt.parents().first() {
            None => cpt.rows()[0][1],
            Some(p) => (1.0 - m[p.0]) * cpt.rows()[0][1] + m[p.0] * cpt.rows()[1][1],
        };
    }
    Ok(m)
}

/// Exact total-variation distance by enumerating all assignments.
pub fn exact_total_variation(a: &BayesianNetwork, b: &BayesianNetwork) -> Result<f64> {
    let n = a.n_vars();
    if b.n_vars() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.n_vars(),
        });
    }
    if n > 24 {
        return Err(Error::InvalidConfig(format!(
            "{n} variables is too many to enumerate"
        )));
    }
    let mut values = vec![0u8; n];
    let mut total = 0.0;
    for x in 0..1usize << n {
        for (i, v) in values.iter_mut().enumerate() {
            *v = ((x >> i) & 1) as u8;
        }
        total += (crate::bayesnet::joint_of_values(a, &values)
            - crate::bayesnet::joint_of_values(b, &values))
        .abs();
    }
    Ok(total / 2.0)
}

/// Lower bound on total variation from single-variable marginals.
pub fn total_variation_lower_bound(a: &BayesianNetwork, b: &BayesianNetwork) -> Result<f64> {
    let (ma, mb) = (marginals(a)?, marginals(b)?);
    if ma.len() != mb.len() {
        return Err(Error::DimensionMismatch {
            expected: ma.len(),
            found: mb.len(),
        });
    }
    Ok(ma
        .iter()
        .zip(&mb)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Smallest pairwise separation: exact for up to 16 variables, otherwise the
/// marginal lower bound.
pub fn min_pairwise_separation(generators: &[BayesianNetwork]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            let (a, b) = (&generators[i], &generators[j]);
            let tv = if a.n_vars() <= 16 {
                exact_total_variation(a, b)?
            } else {
                total_variation_lower_bound(a, b)?
            };
            best = best.min(tv);
        }
    }
    Ok(best)
}
