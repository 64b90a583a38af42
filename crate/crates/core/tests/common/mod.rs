//! Random networks and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use qbayes_core::bayesnet::joint_of_values;
use qbayes_core::{BayesianNetwork, Cpt, NodeId};
use rand::seq::SliceRandom;
use rand::Rng;

fn random_row(rng: &mut impl Rng) -> [f64; 2] {
    // Occasionally deterministic so the zero-probability paths get exercised.
    let p0 = match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    };
    [p0, 1.0 - p0]
}

/// Random DAG on `n` nodes where each node draws up to `max_parents` parents
/// from the nodes before it in a shuffled order.
pub fn random_dag(rng: &mut impl Rng, n: usize, max_parents: usize) -> BayesianNetwork {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cpts = vec![Cpt::root(0.5); n];
    for (pos, &node) in order.iter().enumerate() {
        let k = rng.gen_range(0..=max_parents.min(pos));
        let mut parents: Vec<NodeId> = order[..pos]
            .choose_multiple(rng, k)
            .map(|&p| NodeId(p))
            .collect();
        parents.sort();
        let rows = (0..1usize << parents.len())
            .map(|_| random_row(rng))
            .collect();
        cpts[node] = Cpt::new(parents, rows);
    }
    BayesianNetwork::new(cpts).unwrap()
}

/// Random tree-structured (indegree ≤ 1) network on `n` nodes.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> BayesianNetwork {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut cpts = vec![Cpt::root(0.5); n];
    for (pos, &node) in order.iter().enumerate() {
        cpts[node] = if pos == 0 {
            Cpt::new(vec![], vec![random_row(rng)])
        } else {
            let parent = NodeId(order[rng.gen_range(0..pos)]);
            Cpt::new(vec![parent], vec![random_row(rng), random_row(rng)])
        };
    }
    BayesianNetwork::new(cpts).unwrap()
}

/// Values of the `n` variables encoded in the bits of `x`.
pub fn bits_of(x: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((x >> i) & 1) as u8).collect()
}

/// `Σ` of the joint over all completions of the `None` entries.
pub fn brute_marginal(net: &BayesianNetwork, partial: &[Option<u8>]) -> f64 {
    let free: Vec<usize> = (0..partial.len())
        .filter(|&i| partial[i].is_none())
        .collect();
    let mut values: Vec<u8> = partial.iter().map(|v| v.unwrap_or(0)).collect();
    let mut total = 0.0;
    for x in 0..1usize << free.len() {
        for (b, &i) in free.iter().enumerate() {
            values[i] = ((x >> b) & 1) as u8;
        }
        total += joint_of_values(net, &values);
    }
    total
}

/// Every labeled spanning tree on `n ≥ 2` nodes, decoded from Prüfer sequences.
pub fn all_spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 2 {
        return vec![vec![(0, 1)]];
    }
    let len = n - 2;
    let mut out = Vec::new();
    for code in 0..n.pow(len as u32) {
        let seq: Vec<usize> = (0..len).map(|k| code / n.pow(k as u32) % n).collect();
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(n - 1);
        for &s in &seq {
            let leaf = (0..n).find(|&i| degree[i] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(edges);
    }
    out
}
