//! Binary Bayesian networks: data model, topological ordering, joint
//! evaluation and the classical reference routines (variable elimination and
//! rejection sampling) that the quantum routines are checked against.

mod ancilla;
mod infer;
mod json;
mod sample;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ancilla::verify_ancilla_decomposition;
pub use infer::{evidence_probability, exact_posterior, Factor};
pub use json::NetworkDocument;
pub use sample::{forward_sample_posterior, sample_assignment, SampleStats};

/// Maximum deviation of a CPT row sum from one.
pub const ROW_TOLERANCE: f64 = 1e-12;

/// Dense index of a variable, `0..n_vars`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Conditional probability table of a binary variable.
///
/// Row `r` holds `[P(X=0 | pa), P(X=1 | pa)]` for the parent assignment in
/// which bit `b` of `r` is the value of `parents[b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    parents: Vec<NodeId>,
    rows: Vec<[f64; 2]>,
}

impl Cpt {
    /// Builds a table without checking it; `BayesianNetwork::new` validates.
    pub fn new(parents: Vec<NodeId>, rows: Vec<[f64; 2]>) -> Self {
        Cpt { parents, rows }
    }

    /// Parentless variable with `P(X=0) = p0`.
    pub fn root(p0: f64) -> Self {
        Cpt::new(Vec::new(), vec![[p0, 1.0 - p0]])
    }

    /// Single-parent variable given `P(X=0 | parent=0)` and `P(X=0 | parent=1)`.
    pub fn child(parent: NodeId, p0_given_0: f64, p0_given_1: f64) -> Self {
        Cpt::new(
            vec![parent],
            vec![
                [p0_given_0, 1.0 - p0_given_0],
                [p0_given_1, 1.0 - p0_given_1],
            ],
        )
    }

    pub fn parents(&self) -> &[NodeId] {
        &self.parents
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    /// Row index selected by a full assignment of the network's variables.
    #[inline]
    pub fn row_index(&self, values: &[u8]) -> usize {
        self.parents
            .iter()
            .enumerate()
            .fold(0, |acc, (b, p)| acc | ((values[p.0] as usize & 1) << b))
    }

    /// `P(X = value | parents as in values)`.
    #[inline]
    pub fn prob(&self, value: u8, values: &[u8]) -> f64 {
        self.rows[self.row_index(values)][value as usize]
    }
}

/// A directed acyclic graph over binary variables with one CPT per node.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianNetwork {
    cpts: Vec<Cpt>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl BayesianNetwork {
    /// Builds and fully validates a network; edges are derived from the
    /// parent lists.
    pub fn new(cpts: Vec<Cpt>) -> Result<Self> {
        let edges = cpts
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.parents.iter().map(move |&p| (p, NodeId(i))))
            .collect();
        let net = BayesianNetwork { cpts, edges };
        validate_dag(&net)?;
        net.check_rows()?;
        Ok(net)
    }

    /// Assembles a network without any validation.
    pub fn from_raw(edges: impl IntoIterator<Item = (NodeId, NodeId)>, cpts: Vec<Cpt>) -> Self {
        BayesianNetwork {
            cpts,
            edges: edges.into_iter().collect(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.cpts.len()
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, node: NodeId) -> &Cpt {
        &self.cpts[node.0]
    }

    pub fn parents(&self, node: NodeId) -> &[NodeId] {
        &self.cpts[node.0].parents
    }

    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    /// Maximum number of parents of any node.
    pub fn max_indegree(&self) -> usize {
        self.cpts.iter().map(|c| c.parents.len()).max().unwrap_or(0)
    }

    /// Child lists in ascending order, derived from the edge set.
    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.n_vars()];
        for &(from, to) in &self.edges {
            if from.0 < ch.len() {
                ch[from.0].push(to);
            }
        }
        ch
    }

    fn check_rows(&self) -> Result<()> {
        for (i, cpt) in self.cpts.iter().enumerate() {
            for row in &cpt.rows {
                let ok = row.iter().all(|p| p.is_finite() && (0.0..=1.0).contains(p))
                    && (row[0] + row[1] - 1.0).abs() <= ROW_TOLERANCE;
                if !ok {
                    return Err(Error::InvalidCpt {
                        node: NodeId(i),
                        reason: format!("row {row:?} is not a distribution"),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Checks that the edge set is acyclic and agrees with every CPT's shape.
pub fn validate_dag(net: &BayesianNetwork) -> Result<()> {
    let n = net.n_vars();
    for (i, cpt) in net.cpts.iter().enumerate() {
        let node = NodeId(i);
        let mut seen = BTreeSet::new();
        let parents_ok = cpt
            .parents
            .iter()
            .all(|p| p.0 < n && *p != node && seen.insert(*p));
        if !parents_ok || cpt.rows.len() != 1usize << cpt.parents.len() {
            return Err(Error::CptShapeMismatch(node));
        }
    }
    for &(from, to) in &net.edges {
        if from.0 >= n || to.0 >= n || !net.cpts[to.0].parents.contains(&from) {
            return Err(Error::CptShapeMismatch(to));
        }
    }
    let declared: usize = net.cpts.iter().map(|c| c.parents.len()).sum();
    if declared != net.edges.len() {
        let node = net
            .cpts
            .iter()
            .enumerate()
            .find(|(i, c)| {
                c.parents
                    .iter()
                    .any(|p| !net.edges.contains(&(*p, NodeId(*i))))
            })
            .map(|(i, _)| NodeId(i))
            .unwrap_or(NodeId(0));
        return Err(Error::CptShapeMismatch(node));
    }
    topological_sort(net).map(|_| ())
}

/// Ordering of the nodes in which every parent precedes its children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologicalOrder(Vec<NodeId>);

impl TopologicalOrder {
    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    /// Position of every node, indexed by node id.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (k, n) in self.0.iter().enumerate() {
            pos[n.0] = k;
        }
        pos
    }

    /// True when every node's parents occur strictly before it.
    pub fn is_valid_for(&self, net: &BayesianNetwork) -> bool {
        if self.0.len() != net.n_vars() {
            return false;
        }
        let mut pos = vec![usize::MAX; net.n_vars()];
        for (k, n) in self.0.iter().enumerate() {
            if n.0 >= pos.len() || pos[n.0] != usize::MAX {
                return false;
            }
            pos[n.0] = k;
        }
        self.0
            .iter()
            .enumerate()
            .all(|(k, n)| net.parents(*n).iter().all(|p| pos[p.0] < k))
    }
}

/// Kahn's algorithm; the ready set is drained in ascending node id.
pub fn topological_sort(net: &BayesianNetwork) -> Result<TopologicalOrder> {
    let n = net.n_vars();
    let children = net.children();
    let mut indegree: Vec<usize> = vec![0; n];
    for &(_, to) in &net.edges {
        indegree[to.0] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(NodeId(i));
        for c in &children[i] {
            indegree[c.0] -= 1;
            if indegree[c.0] == 0 {
                ready.push(Reverse(c.0));
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).filter(|&i| indegree[i] > 0).map(NodeId).collect();
        return Err(Error::CycleDetected(stuck));
    }
    Ok(TopologicalOrder(order))
}

/// Values of all variables, with an optional missing mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<u8>,
    missing: Vec<bool>,
}

impl Assignment {
    pub fn full(values: Vec<u8>) -> Self {
        let missing = vec![false; values.len()];
        Assignment { values, missing }
    }

    /// Builds an assignment from optional values; `None` marks a missing entry.
    pub fn partial(values: &[Option<u8>]) -> Self {
        Assignment {
            values: values.iter().map(|v| v.unwrap_or(0)).collect(),
            missing: values.iter().map(Option::is_none).collect(),
        }
    }

    /// Assignment of length `n` where only the listed nodes are observed.
    pub fn observed(n: usize, pairs: &[(NodeId, u8)]) -> Self {
        let mut a = Assignment {
            values: vec![0; n],
            missing: vec![true; n],
        };
        for &(node, v) in pairs {
            a.values[node.0] = v;
            a.missing[node.0] = false;
        }
        a
    }

    /// Masks the entries where `mask` is true.
    pub fn with_missing(values: Vec<u8>, mask: Vec<bool>) -> Self {
        assert_eq!(values.len(), mask.len(), "mask and values differ in length");
        Assignment {
            values,
            missing: mask,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn get(&self, node: NodeId) -> Option<u8> {
        (!self.missing[node.0]).then_some(self.values[node.0])
    }

    pub fn is_full(&self) -> bool {
        !self.missing.iter().any(|&m| m)
    }

    /// Observed `(node, value)` pairs in ascending node order.
    pub fn observed_pairs(&self) -> Vec<(NodeId, u8)> {
        (0..self.values.len())
            .filter(|&i| !self.missing[i])
            .map(|i| (NodeId(i), self.values[i]))
            .collect()
    }
}

/// Distribution over the joint values of a list of target variables.
///
/// Entry `k` of `probs` belongs to the assignment in which bit `b` of `k`
/// is the value of `targets[b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    pub targets: Vec<NodeId>,
    pub probs: Vec<f64>,
}

impl Posterior {
    pub fn get(&self, values: &[u8]) -> f64 {
        let idx = values
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &v)| acc | ((v as usize & 1) << b));
        self.probs[idx]
    }

    /// Total-variation distance to another posterior over the same targets.
    pub fn total_variation(&self, other: &Posterior) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// `∏ P(X_i = a_i | pa(X_i))` for a fully observed assignment.
pub fn joint_probability(net: &BayesianNetwork, a: &Assignment) -> Result<f64> {
    if !a.is_full() {
        return Err(Error::MissingValue);
    }
    if a.len() != net.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: net.n_vars(),
            found: a.len(),
        });
    }
    Ok(joint_of_values(net, a.values()))
}

/// Joint probability of raw 0/1 values; no checks.
pub fn joint_of_values(net: &BayesianNetwork, values: &[u8]) -> f64 {
    net.cpts
        .iter()
        .enumerate()
        .map(|(i, c)| c.prob(values[i], values))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(p_a0: f64, b0_given_a0: f64, b0_given_a1: f64) -> BayesianNetwork {
        BayesianNetwork::new(vec![
            Cpt::root(p_a0),
            Cpt::child(NodeId(0), b0_given_a0, b0_given_a1),
        ])
        .unwrap()
    }

    #[test]
    fn empty_network_is_valid() {
        let net = BayesianNetwork::new(vec![]).unwrap();
        assert!(validate_dag(&net).is_ok());
        assert!(topological_sort(&net).unwrap().nodes().is_empty());
    }

    #[test]
    fn two_node_chain_is_valid() {
        assert!(validate_dag(&chain(0.3, 0.9, 0.2)).is_ok());
    }

    #[test]
    fn two_cycle_is_detected() {
        let net = BayesianNetwork::from_raw(
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))],
            vec![
                Cpt::child(NodeId(1), 0.5, 0.5),
                Cpt::child(NodeId(0), 0.5, 0.5),
            ],
        );
        assert!(matches!(validate_dag(&net), Err(Error::CycleDetected(_))));
        assert!(matches!(
            topological_sort(&net),
            Err(Error::CycleDetected(_))
        ));
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let net = BayesianNetwork::from_raw(
            [(NodeId(0), NodeId(1))],
            vec![Cpt::root(0.5), Cpt::new(vec![NodeId(0)], vec![[0.5, 0.5]])],
        );
        assert_eq!(validate_dag(&net), Err(Error::CptShapeMismatch(NodeId(1))));
        let dangling = BayesianNetwork::from_raw(
            [(NodeId(1), NodeId(0))],
            vec![Cpt::root(0.5), Cpt::root(0.5)],
        );
        assert_eq!(
            validate_dag(&dangling),
            Err(Error::CptShapeMismatch(NodeId(0)))
        );
    }

    #[test]
    fn bad_row_rejected() {
        let err = BayesianNetwork::new(vec![Cpt::new(vec![], vec![[0.5, 0.4]])]).unwrap_err();
        assert!(matches!(err, Error::InvalidCpt { .. }));
    }

    #[test]
    fn single_node_sort() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.5)]).unwrap();
        assert_eq!(topological_sort(&net).unwrap().nodes(), &[NodeId(0)]);
    }

    #[test]
    fn reversed_chain_sort() {
        // 2 -> 1 -> 0
        let net = BayesianNetwork::new(vec![
            Cpt::child(NodeId(1), 0.5, 0.5),
            Cpt::child(NodeId(2), 0.5, 0.5),
            Cpt::root(0.5),
        ])
        .unwrap();
        let order = topological_sort(&net).unwrap();
        assert_eq!(order.nodes(), &[NodeId(2), NodeId(1), NodeId(0)]);
    }

    #[test]
    fn diamond_sort() {
        let two = |a: usize, b: usize| Cpt::new(vec![NodeId(a), NodeId(b)], vec![[0.5, 0.5]; 4]);
        let net = BayesianNetwork::new(vec![
            Cpt::root(0.5),
            Cpt::child(NodeId(0), 0.5, 0.5),
            Cpt::child(NodeId(0), 0.5, 0.5),
            two(1, 2),
        ])
        .unwrap();
        let order = topological_sort(&net).unwrap();
        assert_eq!(order.nodes(), &[NodeId(0), NodeId(1), NodeId(2), NodeId(3)]);
        // brute-force predicate over every position pair
        let nodes = order.nodes();
        for (k, n) in nodes.iter().enumerate() {
            for p in net.parents(*n) {
                let pk = nodes.iter().position(|x| x == p).unwrap();
                assert!(pk < k);
            }
        }
        assert!(order.is_valid_for(&net));
    }

    #[test]
    fn joint_of_independent_pair() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.5), Cpt::root(0.5)]).unwrap();
        let p = joint_probability(&net, &Assignment::full(vec![0, 0])).unwrap();
        assert_eq!(p, 0.25);
    }

    #[test]
    fn joint_of_deterministic_chain() {
        let net = chain(0.5, 1.0, 0.0);
        let p = joint_probability(&net, &Assignment::full(vec![0, 1])).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn joint_rejects_missing() {
        let net = chain(0.5, 1.0, 0.0);
        let a = Assignment::partial(&[Some(0), None]);
        assert_eq!(joint_probability(&net, &a), Err(Error::MissingValue));
    }

    #[test]
    fn cpt_row_index_uses_parent_order() {
        let cpt = Cpt::new(
            vec![NodeId(2), NodeId(0)],
            vec![[1.0, 0.0], [0.9, 0.1], [0.8, 0.2], [0.7, 0.3]],
        );
        // parents[0] = X2 = 1, parents[1] = X0 = 0 -> row 1
        assert_eq!(cpt.row_index(&[0, 0, 1]), 1);
        assert_eq!(cpt.row_index(&[1, 0, 0]), 2);
        assert_eq!(cpt.prob(1, &[1, 0, 1]), 0.3);
    }
}
