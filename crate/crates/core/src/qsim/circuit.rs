use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{EvidencePattern, StateVector};
use crate::bayesnet::NodeId;
use crate::error::{Error, Result};

/// One circuit operation. Controls are `(qubit, polarity)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GateOp {
    #[serde(rename = "RY")]
    Ry {
        target: usize,
        theta: f64,
    },
    #[serde(rename = "CRY")]
    Cry {
        controls: Vec<(usize, u8)>,
        target: usize,
        theta: f64,
    },
    /// `I - 2|0⟩⟨0|` restricted to `qubits`.
    ReflectZero {
        qubits: Vec<usize>,
    },
    /// `I - 2P` for the projector onto the pattern.
    ReflectPattern {
        pattern: Vec<(usize, u8)>,
    },
    Hadamard {
        qubit: usize,
    },
    /// `G^power` on the data register, applied where `control` is 1.
    ControlledGroverPower {
        control: usize,
        power: u64,
    },
    #[serde(rename = "QFT")]
    Qft {
        qubits: Vec<usize>,
    },
    #[serde(rename = "InvQFT")]
    InvQft {
        qubits: Vec<usize>,
    },
}

impl GateOp {
    fn qubits(&self) -> Vec<usize> {
        match self {
            GateOp::Ry { target, .. } => vec![*target],
            GateOp::Cry {
                controls, target, ..
            } => controls
                .iter()
                .map(|c| c.0)
                .chain(std::iter::once(*target))
                .collect(),
            GateOp::ReflectZero { qubits } | GateOp::Qft { qubits } | GateOp::InvQft { qubits } => {
                qubits.clone()
            }
            GateOp::ReflectPattern { pattern } => pattern.iter().map(|p| p.0).collect(),
            GateOp::Hadamard { qubit } => vec![*qubit],
            GateOp::ControlledGroverPower { control, .. } => vec![*control],
        }
    }

    /// Checks that qubits are distinct and below `n`, and angles finite.
    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        let mut seen = vec![false; n];
        for q in qs {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, size: n });
            }
            if seen[q] {
                return Err(Error::DuplicateQubit(q));
            }
            seen[q] = true;
        }
        match self {
            GateOp::Ry { theta, .. } | GateOp::Cry { theta, .. } if !theta.is_finite() => {
                Err(Error::InvalidConfig(format!("angle {theta}")))
            }
            GateOp::Cry { controls, .. } | GateOp::ReflectPattern { pattern: controls }
                if controls.iter().any(|c| c.1 > 1) =>
            {
                Err(Error::InvalidConfig("polarity must be 0 or 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// The inverse operation.
    pub fn inverse(&self) -> GateOp {
        match self {
            GateOp::Ry { target, theta } => GateOp::Ry {
                target: *target,
                theta: -theta,
            },
            GateOp::Cry {
                controls,
                target,
                theta,
            } => GateOp::Cry {
                controls: controls.clone(),
                target: *target,
                theta: -theta,
            },
            GateOp::Qft { qubits } => GateOp::InvQft {
                qubits: qubits.clone(),
            },
            GateOp::InvQft { qubits } => GateOp::Qft {
                qubits: qubits.clone(),
            },
            // Reflections and H are involutions. A Grover power is only ever
            // emitted inside phase estimation and is never inverted.
            other => other.clone(),
        }
    }

    /// Applies the op, optionally conditioned on one extra qubit being 1.
    /// `ControlledGroverPower` needs an oracle and is rejected here.
    pub(crate) fn apply(&self, s: &mut StateVector, extra: Option<usize>) -> Result<()> {
        let (emask, evalue) = extra.map_or((0, 0), |c| (1usize << c, 1usize << c));
        match self {
            GateOp::Ry { target, theta } => s.ry_masked(*target, *theta, emask, evalue),
            GateOp::Cry {
                controls,
                target,
                theta,
            } => {
                let (m, v) = EvidencePattern::new(controls.clone())?.mask_value();
                s.ry_masked(*target, *theta, m | emask, v | evalue);
            }
            GateOp::ReflectZero { qubits } => {
                let m = qubits.iter().fold(0usize, |m, q| m | (1 << q));
                s.negate_masked(m | emask, evalue);
            }
            GateOp::ReflectPattern { pattern } => {
                let (m, v) = EvidencePattern::new(pattern.clone())?.mask_value();
                s.negate_masked(m | emask, v | evalue);
            }
            GateOp::Hadamard { qubit } if extra.is_none() => s.apply_hadamard(*qubit)?,
            GateOp::Qft { qubits } if extra.is_none() => qft(s, qubits)?,
            GateOp::InvQft { qubits } if extra.is_none() => inverse_qft(s, qubits)?,
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "cannot apply {self:?} in this context"
                )))
            }
        }
        Ok(())
    }
}

fn check_register(s: &StateVector, qubits: &[usize]) -> Result<()> {
    let mut seen = vec![false; s.n_qubits()];
    for &q in qubits {
        if q >= s.n_qubits() {
            return Err(Error::IndexOutOfRange {
                index: q,
                size: s.n_qubits(),
            });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// `|x⟩ → M^{-1/2} Σ_y e^{2πi xy/M} |y⟩` on the register `qubits`, where
/// `qubits[k]` carries bit `k` of `x`.
pub fn qft(s: &mut StateVector, qubits: &[usize]) -> Result<()> {
    check_register(s, qubits)?;
    let t = qubits.len();
    for j in (0..t).rev() {
        s.apply_hadamard(qubits[j])?;
        for k in (0..j).rev() {
            s.cphase(qubits[k], qubits[j], PI / (1u64 << (j - k)) as f64);
        }
    }
    for i in 0..t / 2 {
        s.swap(qubits[i], qubits[t - 1 - i]);
    }
    Ok(())
}

/// Exact inverse of [`qft`].
pub fn inverse_qft(s: &mut StateVector, qubits: &[usize]) -> Result<()> {
    check_register(s, qubits)?;
    let t = qubits.len();
    for i in 0..t / 2 {
        s.swap(qubits[i], qubits[t - 1 - i]);
    }
    for j in 0..t {
        for k in 0..j {
            s.cphase(qubits[k], qubits[j], -PI / (1u64 << (j - k)) as f64);
        }
        s.apply_hadamard(qubits[j])?;
    }
    Ok(())
}

/// An ordered list of operations on `n_qubits` qubits.
///
/// `layout[k]`, when present, is the network variable held by qubit `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    layout: Vec<NodeId>,
}

impl Circuit {
    pub fn new(n_qubits: usize, ops: Vec<GateOp>, layout: Vec<NodeId>) -> Result<Self> {
        for op in &ops {
            op.validate(n_qubits)?;
        }
        if layout.len() > n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: layout.len(),
            });
        }
        Ok(Circuit {
            n_qubits,
            ops,
            layout,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn gate_count(&self) -> usize {
        self.ops.len()
    }

    pub fn layout(&self) -> &[NodeId] {
        &self.layout
    }

    /// Qubit holding `node`, if the layout covers it.
    pub fn qubit_of(&self, node: NodeId) -> Option<usize> {
        self.layout.iter().position(|&n| n == node)
    }

    /// Translates `(node, value)` evidence into a qubit pattern.
    pub fn pattern_for(&self, pairs: &[(NodeId, u8)]) -> Result<EvidencePattern> {
        let qs = pairs
            .iter()
            .map(|&(n, v)| {
                self.qubit_of(n)
                    .map(|q| (q, v))
                    .ok_or(Error::IndexOutOfRange {
                        index: n.0,
                        size: self.layout.len(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        EvidencePattern::new(qs)
    }

    /// Basis index of a full assignment given by node values.
    pub fn basis_index(&self, values: &[u8]) -> usize {
        self.layout
            .iter()
            .enumerate()
            .fold(0, |acc, (q, n)| acc | ((values[n.0] as usize) << q))
    }

    /// Runs every op on `s` (which may carry extra high qubits).
    pub fn apply(&self, s: &mut StateVector) -> Result<()> {
        self.apply_controlled(s, None)
    }

    /// Runs every op conditioned on `control` being 1.
    pub fn apply_controlled(&self, s: &mut StateVector, control: Option<usize>) -> Result<()> {
        if s.n_qubits() < self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        self.ops.iter().try_for_each(|op| op.apply(s, control))
    }

    /// Reversed op list with each op inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            ops: self.ops.iter().rev().map(GateOp::inverse).collect(),
            layout: self.layout.clone(),
        }
    }

    pub fn to_document(&self) -> CircuitDocument {
        CircuitDocument {
            format: "QC-JSON".into(),
            version: 1,
            n_qubits: self.n_qubits,
            gate_count: self.gate_count(),
            layout: self.layout.iter().map(|n| n.0).collect(),
            ops: self.ops.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitDocument = serde_json::from_str(text)?;
        if doc.format != "QC-JSON" || doc.version != 1 {
            return Err(Error::Format(format!(
                "expected QC-JSON v1, found {} v{}",
                doc.format, doc.version
            )));
        }
        if doc.gate_count != doc.ops.len() {
            return Err(Error::Format("gate_count does not match ops".into()));
        }
        Circuit::new(
            doc.n_qubits,
            doc.ops,
            doc.layout.into_iter().map(NodeId).collect(),
        )
    }
}

/// Serialized circuit ("QC-JSON v1").
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub format: String,
    pub version: u32,
    pub n_qubits: usize,
    pub gate_count: usize,
    #[serde(default)]
    pub layout: Vec<usize>,
    pub ops: Vec<GateOp>,
}
