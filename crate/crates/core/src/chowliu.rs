//! Chow-Liu tree learning over binary samples.
//!
//! Pairwise dependence is scored with the correlation-based mutual
//! information `I(X,Y) = -½ ln(1 - Corr(X,Y)²)`; the maximum-weight spanning
//! tree of that score is oriented away from a root by depth-first search and
//! the CPTs are fitted with additive smoothing.

use rayon::prelude::*;

use crate::bayesnet::{BayesianNetwork, Cpt, NodeId};
use crate::error::{Error, Result};

/// Upper clamp on `Corr²` so perfectly dependent pairs keep a finite score.
pub const CORR_SQ_CLAMP: f64 = 1.0 - 1e-12;

/// Rows of equal length over `n_vars` binary variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSet {
    n_vars: usize,
    samples: Vec<Vec<u8>>,
}

impl SampleSet {
    pub fn new(n_vars: usize, samples: Vec<Vec<u8>>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.len() != n_vars) {
            return Err(Error::DimensionMismatch {
                expected: n_vars,
                found: bad.len(),
            });
        }
        Ok(SampleSet { n_vars, samples })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.samples
    }

    fn mean(&self, i: usize) -> f64 {
        self.samples.iter().map(|s| s[i] as f64).sum::<f64>() / self.samples.len() as f64
    }

    fn mean_product(&self, i: usize, j: usize) -> f64 {
        self.samples
            .iter()
            .filter(|s| s[i] == 1 && s[j] == 1)
            .count() as f64
            / self.samples.len() as f64
    }
}

/// Empirical Pearson correlation; 0 when either column is constant.
pub fn correlation(s: &SampleSet, i: usize, j: usize) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let (ex, ey) = (s.mean(i), s.mean(j));
    corr_from_moments(ex, ey, s.mean_product(i, j))
}

fn corr_from_moments(ex: f64, ey: f64, exy: f64) -> f64 {
    // binary columns: E(X²) = E(X)
    let (dx, dy) = (ex - ex * ex, ey - ey * ey);
    if dx <= 0.0 || dy <= 0.0 {
        return 0.0;
    }
    ((exy - ex * ey) / (dx * dy).sqrt()).clamp(-1.0, 1.0)
}

/// `-½ ln(1 - c²)` with `c²` clamped below one.
pub fn mutual_information_from_corr(c: f64) -> f64 {
    -0.5 * (1.0 - (c * c).min(CORR_SQ_CLAMP)).ln()
}

/// Symmetric matrix of pairwise scores with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct MutualInfoMatrix {
    n: usize,
    m: Vec<f64>,
}

impl MutualInfoMatrix {
    /// Builds a matrix from explicit weights (row-major `n×n`). The diagonal
    /// is zeroed and the upper triangle mirrored.
    pub fn from_weights(n: usize, weights: &[f64]) -> Self {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                m[i * n + j] = weights[i * n + j];
                m[j * n + i] = weights[i * n + j];
            }
        }
        MutualInfoMatrix { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i * self.n + j]
    }
}

pub fn mutual_information_matrix(s: &SampleSet) -> MutualInfoMatrix {
    let n = s.n_vars();
    if s.is_empty() {
        return MutualInfoMatrix {
            n,
            m: vec![0.0; n * n],
        };
    }
    let total = s.len() as f64;
    let means: Vec<f64> = (0..n).map(|i| s.mean(i)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            let mut counts = vec![0u32; n];
            for sample in s.rows().iter().filter(|r| r[i] == 1) {
                for (c, &b) in counts.iter_mut().zip(sample) {
                    *c += b as u32;
                }
            }
            for j in 0..n {
                if j != i {
                    let c = corr_from_moments(means[i], means[j], counts[j] as f64 / total);
                    row[j] = mutual_information_from_corr(c);
                }
            }
            row
        })
        .collect();
    MutualInfoMatrix {
        n,
        m: rows.concat(),
    }
}

/// Undirected spanning tree as `(min, max)` index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SpanningTree {
    pub fn weight(&self, m: &MutualInfoMatrix) -> f64 {
        self.edges.iter().map(|&(i, j)| m.get(i, j)).sum()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Kruskal's algorithm on descending weight; equal weights keep ascending
/// `(i, j)` order.
pub fn maximum_spanning_tree(m: &MutualInfoMatrix) -> SpanningTree {
    let n = m.n();
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    candidates.sort_by(|a, b| m.get(b.0, b.1).total_cmp(&m.get(a.0, a.1)));
    let mut sets = DisjointSet::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for (i, j) in candidates {
        if sets.union(i, j) {
            edges.push((i, j));
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    SpanningTree { n, edges }
}

/// Directs every edge away from `root` following a depth-first traversal;
/// each non-root node gets its DFS predecessor as sole parent.
pub fn orient_edges(t: &SpanningTree, root: NodeId) -> Vec<(NodeId, NodeId)> {
    let mut adj = vec![Vec::new(); t.n];
    for &(i, j) in &t.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut visited = vec![false; t.n];
    let mut directed = Vec::with_capacity(t.edges.len());
    let mut starts: Vec<usize> = vec![root.0];
    starts.extend((0..t.n).filter(|&i| i != root.0));
    for start in starts {
        if start >= t.n || visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack = vec![(start, 0usize)];
        while let Some((node, next)) = stack.last_mut() {
            let node = *node;
            if let Some(&nb) = adj[node].get(*next) {
                *next += 1;
                if !visited[nb] {
                    visited[nb] = true;
                    directed.push((NodeId(node), NodeId(nb)));
                    stack.push((nb, 0));
                }
            } else {
                stack.pop();
            }
        }
    }
    directed
}

/// Fits one CPT per node given a max-indegree-1 edge set:
/// `P(X=v | pa=u) = (count(v,u) + α) / (count(·,u) + 2α)`. Contexts with no
/// observations and `α = 0` fall back to a uniform row.
pub fn fit_cpts(
    n_vars: usize,
    edges: &[(NodeId, NodeId)],
    s: &SampleSet,
    alpha: f64,
) -> Result<BayesianNetwork> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "smoothing {alpha} must be >= 0"
        )));
    }
    if s.n_vars() != n_vars {
        return Err(Error::DimensionMismatch {
            expected: n_vars,
            found: s.n_vars(),
        });
    }
    let mut parent: Vec<Option<NodeId>> = vec![None; n_vars];
    for &(from, to) in edges {
        if parent[to.0].replace(from).is_some() {
            return Err(Error::InvalidConfig(format!("node {to} has two parents")));
        }
    }
    let row = |ones: usize, total: usize| {
        let denom = total as f64 + 2.0 * alpha;
        if denom <= 0.0 {
            return [0.5, 0.5];
        }
        let p1 = (ones as f64 + alpha) / denom;
        [1.0 - p1, p1]
    };
    let cpts = (0..n_vars)
        .map(|i| match parent[i] {
            None => {
                let ones = s.rows().iter().filter(|r| r[i] == 1).count();
                Cpt::new(Vec::new(), vec![row(ones, s.len())])
            }
            Some(p) => {
                let mut counts = [[0usize; 2]; 2];
                for r in s.rows() {
                    counts[r[p.0] as usize][r[i] as usize] += 1;
                }
                let rows = counts.iter().map(|c| row(c[1], c[0] + c[1])).collect();
                Cpt::new(vec![p], rows)
            }
        })
        .collect();
    BayesianNetwork::new(cpts)
}

/// Structure-dependent part of the KL divergence: `-Σ_(i,j)∈T I(X_i;X_j)`.
pub fn kl_gap_terms(net: &BayesianNetwork, s: &SampleSet) -> f64 {
    -net.edges()
        .iter()
        .map(|(a, b)| mutual_information_from_corr(correlation(s, a.0, b.0)))
        .sum::<f64>()
}

/// Complete pipeline: score matrix, spanning tree, orientation and CPTs.
pub fn learn_tree(s: &SampleSet, alpha: f64, root: NodeId) -> Result<BayesianNetwork> {
    if s.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if s.n_vars() > 0 && root.0 >= s.n_vars() {
        return Err(Error::IndexOutOfRange {
            index: root.0,
            size: s.n_vars(),
        });
    }
    let mi = mutual_information_matrix(s);
    let tree = maximum_spanning_tree(&mi);
    let edges = orient_edges(&tree, root);
    fit_cpts(s.n_vars(), &edges, s, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(x: &[u8], y: &[u8]) -> SampleSet {
        SampleSet::new(2, x.iter().zip(y).map(|(&a, &b)| vec![a, b]).collect()).unwrap()
    }

    #[test]
    fn uncorrelated_pair() {
        let s = pair(&[0, 0, 1, 1], &[0, 1, 0, 1]);
        assert_eq!(correlation(&s, 0, 1), 0.0);
        assert_eq!(mutual_information_matrix(&s).get(0, 1), 0.0);
    }

    #[test]
    fn self_correlation_is_one() {
        let s = pair(&[0, 1, 1, 0, 1], &[0, 1, 1, 0, 1]);
        assert!((correlation(&s, 0, 1) - 1.0).abs() < 1e-12);
        let clamped = -0.5 * (1e-12f64).ln();
        let mi = mutual_information_matrix(&s).get(0, 1);
        assert!((mi - clamped).abs() < 1e-3, "{mi}");
        assert!((clamped - 13.8155).abs() < 1e-4);
    }

    #[test]
    fn hand_computed_correlation() {
        // E(XY)=0.5, E(X)=0.5, E(Y)=0.75, D(X)=0.25, D(Y)=0.1875
        let s = pair(&[0, 0, 1, 1], &[0, 1, 1, 1]);
        let expected = 0.125 / (0.25f64 * 0.1875).sqrt();
        assert!((correlation(&s, 0, 1) - 0.577350).abs() < 1e-6);
        assert!((correlation(&s, 0, 1) - expected).abs() < 1e-12);
        let mi = mutual_information_matrix(&s);
        assert!((mi.get(0, 1) - 0.202733).abs() < 1e-6);
        assert_eq!(mi.get(0, 0), 0.0);
        assert_eq!(mi.get(1, 0), mi.get(0, 1));
    }

    #[test]
    fn constant_column_has_zero_correlation() {
        let s = pair(&[1, 1, 1, 1], &[0, 1, 1, 0]);
        assert_eq!(correlation(&s, 0, 1), 0.0);
    }

    #[test]
    fn two_nodes_single_edge() {
        let m = MutualInfoMatrix::from_weights(2, &[0.0, 0.3, 0.3, 0.0]);
        assert_eq!(maximum_spanning_tree(&m).edges, vec![(0, 1)]);
    }

    #[test]
    fn three_node_tree() {
        let w = [0.0, 0.5, 0.4, 0.5, 0.0, 0.1, 0.4, 0.1, 0.0];
        let m = MutualInfoMatrix::from_weights(3, &w);
        let t = maximum_spanning_tree(&m);
        assert_eq!(t.edges, vec![(0, 1), (0, 2)]);
        assert!((t.weight(&m) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn ties_follow_pair_order() {
        let m = MutualInfoMatrix::from_weights(3, &[0.0; 9]);
        assert_eq!(maximum_spanning_tree(&m).edges, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn orient_path() {
        let t = SpanningTree {
            n: 3,
            edges: vec![(0, 1), (1, 2)],
        };
        assert_eq!(
            orient_edges(&t, NodeId(0)),
            vec![(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))]
        );
    }

    #[test]
    fn orient_star_from_leaf() {
        let t = SpanningTree {
            n: 4,
            edges: vec![(0, 1), (1, 2), (1, 3)],
        };
        assert_eq!(
            orient_edges(&t, NodeId(0)),
            vec![
                (NodeId(0), NodeId(1)),
                (NodeId(1), NodeId(2)),
                (NodeId(1), NodeId(3))
            ]
        );
    }

    #[test]
    fn mle_on_constant_data() {
        let s = SampleSet::new(3, vec![vec![0, 0, 0]; 5]).unwrap();
        let net = learn_tree(&s, 0.0, NodeId(0)).unwrap();
        assert_eq!(net.cpt(NodeId(0)).rows()[0], [1.0, 0.0]);
    }

    #[test]
    fn laplace_on_unseen_context() {
        let s = SampleSet::new(2, vec![vec![0, 1], vec![0, 0]]).unwrap();
        let net = fit_cpts(2, &[(NodeId(0), NodeId(1))], &s, 1.0).unwrap();
        // parent never 1
        assert_eq!(net.cpt(NodeId(1)).rows()[1], [0.5, 0.5]);
        let mle = fit_cpts(2, &[(NodeId(0), NodeId(1))], &s, 0.0).unwrap();
        assert_eq!(mle.cpt(NodeId(1)).rows()[1], [0.5, 0.5]);
    }

    #[test]
    fn hand_counted_chain() {
        // (A,B): (0,0) (0,1) (1,1) (1,1)
        let s = SampleSet::new(2, vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 1]]).unwrap();
        let net = fit_cpts(2, &[(NodeId(0), NodeId(1))], &s, 0.0).unwrap();
        assert_eq!(net.cpt(NodeId(0)).rows()[0], [0.5, 0.5]);
        assert_eq!(net.cpt(NodeId(1)).rows()[0], [0.5, 0.5]);
        assert_eq!(net.cpt(NodeId(1)).rows()[1], [0.0, 1.0]);
        let smoothed = fit_cpts(2, &[(NodeId(0), NodeId(1))], &s, 1.0).unwrap();
        assert_eq!(smoothed.cpt(NodeId(1)).rows()[1], [0.25, 0.75]);
    }

    #[test]
    fn empty_sample_set() {
        let s = SampleSet::new(2, vec![]).unwrap();
        assert_eq!(
            fit_cpts(2, &[], &s, 1.0).unwrap_err(),
            Error::EmptySampleSet
        );
    }

    #[test]
    fn kl_terms() {
        let s = pair(&[0, 0, 1, 1], &[0, 1, 1, 1]);
        let empty = BayesianNetwork::new(vec![Cpt::root(0.5), Cpt::root(0.5)]).unwrap();
        assert_eq!(kl_gap_terms(&empty, &s), 0.0);
        let net = learn_tree(&s, 1.0, NodeId(0)).unwrap();
        let m = mutual_information_matrix(&s);
        assert!((kl_gap_terms(&net, &s) + m.get(0, 1)).abs() < 1e-15);
    }

    #[test]
    fn single_variable() {
        let s = SampleSet::new(1, vec![vec![1], vec![0]]).unwrap();
        let net = learn_tree(&s, 0.0, NodeId(0)).unwrap();
        assert_eq!(net.n_vars(), 1);
        assert!(net.edges().is_empty());
    }
}
