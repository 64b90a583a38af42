//! BN-JSON v1 serialization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BayesianNetwork, Cpt, NodeId};
use crate::error::{Error, Result};

/// On-disk form of a network: `n_vars`, `edges` as `[from, to]` pairs and one
/// CPT per node whose `rows` map a parent bit-string (character `k` is the
/// value of `parents[k]`) to `[p0, p1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub n_vars: usize,
    pub edges: Vec<[usize; 2]>,
    pub cpts: Vec<CptDocument>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CptDocument {
    pub parents: Vec<usize>,
    pub rows: BTreeMap<String, [f64; 2]>,
}

fn row_key(row: usize, n_parents: usize) -> String {
    (0..n_parents)
        .map(|b| if (row >> b) & 1 == 1 { '1' } else { '0' })
        .collect()
}

impl From<&BayesianNetwork> for NetworkDocument {
    fn from(net: &BayesianNetwork) -> Self {
        NetworkDocument {
            n_vars: net.n_vars(),
            edges: net.edges().iter().map(|(a, b)| [a.0, b.0]).collect(),
            cpts: net
                .cpts()
                .iter()
                .map(|c| CptDocument {
                    parents: c.parents().iter().map(|p| p.0).collect(),
                    rows: c
                        .rows()
                        .iter()
                        .enumerate()
                        .map(|(r, row)| (row_key(r, c.parents().len()), *row))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl NetworkDocument {
    /// Validates the document and builds the network.
    pub fn into_network(self) -> Result<BayesianNetwork> {
        if self.cpts.len() != self.n_vars {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars,
                found: self.cpts.len(),
            });
        }
        let mut cpts = Vec::with_capacity(self.n_vars);
        for (i, doc) in self.cpts.into_iter().enumerate() {
            let k = doc.parents.len();
            if k >= usize::BITS as usize || doc.rows.len() != 1usize << k {
                return Err(Error::CptShapeMismatch(NodeId(i)));
            }
            let rows = (0..1usize << k)
                .map(|r| {
                    doc.rows
                        .get(&row_key(r, k))
                        .copied()
                        .ok_or(Error::CptShapeMismatch(NodeId(i)))
                })
                .collect::<Result<Vec<_>>>()?;
            cpts.push(Cpt::new(
                doc.parents.into_iter().map(NodeId).collect(),
                rows,
            ));
        }
        let declared = BayesianNetwork::new(cpts)?;
        let edges: Vec<(NodeId, NodeId)> = self
            .edges
            .iter()
            .map(|[a, b]| (NodeId(*a), NodeId(*b)))
            .collect();
        if edges.len() != declared.edges().len()
            || edges.iter().any(|e| !declared.edges().contains(e))
        {
            return Err(Error::Format("edge list disagrees with CPT parents".into()));
        }
        Ok(declared)
    }
}

impl BayesianNetwork {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NetworkDocument::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<NetworkDocument>(text)?.into_network()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_stable() {
        let net = BayesianNetwork::new(vec![
            Cpt::root(0.25),
            Cpt::child(NodeId(0), 0.6, 0.125),
            Cpt::new(
                vec![NodeId(1), NodeId(0)],
                vec![[0.1, 0.9], [0.2, 0.8], [0.3, 0.7], [0.4, 0.6]],
            ),
        ])
        .unwrap();
        let text = net.to_json();
        let back = BayesianNetwork::from_json(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rows_keyed_by_parent_bits() {
        let net = BayesianNetwork::new(vec![
            Cpt::root(0.5),
            Cpt::root(0.5),
            Cpt::new(
                vec![NodeId(1), NodeId(0)],
                vec![[0.1, 0.9], [0.2, 0.8], [0.3, 0.7], [0.4, 0.6]],
            ),
        ])
        .unwrap();
        let doc = NetworkDocument::from(&net);
        // row 1 = parents[0] (X1) is 1, parents[1] (X0) is 0
        assert_eq!(doc.cpts[2].rows["10"], [0.2, 0.8]);
        assert_eq!(doc.cpts[0].rows[""], [0.5, 0.5]);
        assert_eq!(doc.edges, vec![[0, 2], [1, 2]]);
    }

    #[test]
    fn inconsistent_edges_rejected() {
        let text = r#"{"n_vars":2,"edges":[],"cpts":[
            {"parents":[],"rows":{"":[0.5,0.5]}},
            {"parents":[0],"rows":{"0":[0.5,0.5],"1":[0.5,0.5]}}]}"#;
        assert!(BayesianNetwork::from_json(text).is_err());
    }

    #[test]
    fn missing_row_rejected() {
        let text = r#"{"n_vars":1,"edges":[],"cpts":[{"parents":[],"rows":{"0":[0.5,0.5]}}]}"#;
        assert_eq!(
            BayesianNetwork::from_json(text).unwrap_err(),
            Error::CptShapeMismatch(NodeId(0))
        );
    }
}
