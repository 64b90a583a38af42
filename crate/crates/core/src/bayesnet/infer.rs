use super::{topological_sort, Assignment, BayesianNetwork, NodeId, Posterior};
use crate::error::{Error, Result};

/// Non-negative table over a sorted set of binary variables.
///
/// Entry `k` belongs to the assignment in which bit `b` of `k` is the value
/// of `vars[b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor {
            vars: Vec::new(),
            table: vec![value],
        }
    }

    /// The CPT of `node` as a factor over the node and its parents.
    pub fn from_cpt(net: &BayesianNetwork, node: NodeId) -> Self {
        let cpt = net.cpt(node);
        let mut vars: Vec<usize> = cpt.parents().iter().map(|p| p.0).collect();
        vars.push(node.0);
        vars.sort_unstable();
        let size = 1usize << vars.len();
        let mut values = vec![0u8; net.n_vars()];
        let table = (0..size)
            .map(|k| {
                for (b, &v) in vars.iter().enumerate() {
                    values[v] = ((k >> b) & 1) as u8;
                }
                cpt.prob(values[node.0], &values)
            })
            .collect();
        Factor { vars, table }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.binary_search(&var).is_ok()
    }

    /// Fixes `var` to `value`, dropping it from the scope.
    pub fn reduce(&self, var: usize, value: u8) -> Factor {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let low = (1usize << pos) - 1;
        let size = self.table.len() / 2;
        let table = (0..size)
            .map(|k| {
                let full = (k & low) | ((k & !low) << 1) | ((value as usize) << pos);
                self.table[full]
            })
            .collect();
        let mut vars = self.vars.clone();
        vars.remove(pos);
        Factor { vars, table }
    }

    /// Sums `var` out of the factor.
    pub fn sum_out(&self, var: usize) -> Factor {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let low = (1usize << pos) - 1;
        let size = self.table.len() / 2;
        let table = (0..size)
            .map(|k| {
                let base = (k & low) | ((k & !low) << 1);
                self.table[base] + self.table[base | (1 << pos)]
            })
            .collect();
        let mut vars = self.vars.clone();
        vars.remove(pos);
        Factor { vars, table }
    }

    /// Pointwise product over the union of both scopes.
    pub fn product(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let a_map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).unwrap())
            .collect();
        let b_map: Vec<usize> = other
            .vars
            .iter()
            .map(|v| vars.binary_search(v).unwrap())
            .collect();
        let project = |k: usize, map: &[usize]| {
            map.iter()
                .enumerate()
                .fold(0usize, |acc, (b, &pos)| acc | (((k >> pos) & 1) << b))
        };
        let table = (0..1usize << vars.len())
            .map(|k| self.table[project(k, &a_map)] * other.table[project(k, &b_map)])
            .collect();
        Factor { vars, table }
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }
}

/// Runs variable elimination and returns the unnormalized factor over
/// `targets` (restricted to evidence). Non-evidence, non-target variables are
/// eliminated in reverse topological order.
fn eliminate(net: &BayesianNetwork, evidence: &Assignment, targets: &[NodeId]) -> Result<Factor> {
    if evidence.len() != net.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: net.n_vars(),
            found: evidence.len(),
        });
    }
    let mut is_target = vec![false; net.n_vars()];
    for t in targets {
        if t.0 >= net.n_vars() {
            return Err(Error::IndexOutOfRange {
                index: t.0,
                size: net.n_vars(),
            });
        }
        if evidence.get(*t).is_some() {
            return Err(Error::OverlappingVariables(*t));
        }
        is_target[t.0] = true;
    }
    let order = topological_sort(net)?;
    let mut factors: Vec<Factor> = (0..net.n_vars())
        .map(|i| {
            let mut f = Factor::from_cpt(net, NodeId(i));
            for &v in f.vars.clone().iter() {
                if let Some(x) = evidence.get(NodeId(v)) {
                    f = f.reduce(v, x);
                }
            }
            f
        })
        .collect();
    for node in order.nodes().iter().rev() {
        let v = node.0;
        if is_target[v] || evidence.get(*node).is_some() {
            continue;
        }
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if let Some(first) = touching.first() {
            let prod = touching[1..]
                .iter()
                .fold(first.clone(), |acc, f| acc.product(f));
            factors.push(prod.sum_out(v));
        }
    }
    // Multiply scalars first to keep intermediate scopes small.
    factors.sort_by_key(|f| f.vars.len());
    Ok(factors
        .iter()
        .fold(Factor::scalar(1.0), |acc, f| acc.product(f)))
}

/// `P(evidence)`: the probability that every observed entry takes its value.
pub fn evidence_probability(net: &BayesianNetwork, evidence: &Assignment) -> Result<f64> {
    Ok(eliminate(net, evidence, &[])?.total())
}

/// Exact `P(targets | evidence)` by variable elimination.
pub fn exact_posterior(
    net: &BayesianNetwork,
    evidence: &Assignment,
    targets: &[NodeId],
) -> Result<Posterior> {
    let joint = eliminate(net, evidence, targets)?;
    let z = joint.total();
    if z <= 0.0 {
        return Err(Error::ZeroEvidenceProbability);
    }
    // Reindex from the factor's sorted scope into the caller's target order.
    let pos: Vec<usize> = targets
        .iter()
        .map(|t| joint.vars.binary_search(&t.0).expect("target in scope"))
        .collect();
    let probs = (0..1usize << targets.len())
        .map(|k| {
            let f = pos
                .iter()
                .enumerate()
                .fold(0usize, |acc, (b, &p)| acc | (((k >> b) & 1) << p));
            joint.table[f] / z
        })
        .collect();
    Ok(Posterior {
        targets: targets.to_vec(),
        probs,
    })
}
