//! Dense statevector simulator with the gates needed for amplitude encoding
//! and amplitude estimation.
//!
//! Qubit `k` is bit `k` of the basis index (little-endian). Gates mutate the
//! state in place; a state is never shared between threads while mutated.

mod circuit;
mod encode;
mod grover;
mod qpe;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use circuit::{inverse_qft, qft, Circuit, CircuitDocument, GateOp};
pub use encode::{encode_network, EncodedNetwork};
pub use grover::{grover_apply, GroverSubspace};
pub use qpe::{
    measure_register, outcome_to_angle, qpe_circuit, qpe_distribution, qpe_distribution_circuit,
    qpe_distribution_subspace, qpe_estimate, QpeMode, QpeOutcome,
};

/// Default limit on simulated qubits (2^26 amplitudes ≈ 1 GiB of complex f64).
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Norm tolerance for a valid state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Required bit values on a set of qubits: `(qubit, bit)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvidencePattern {
    pairs: Vec<(usize, u8)>,
}

impl EvidencePattern {
    pub fn new(pairs: Vec<(usize, u8)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &(q, b) in &pairs {
            if !seen.insert(q) {
                return Err(Error::DuplicateQubit(q));
            }
            if b > 1 {
                return Err(Error::InvalidConfig(format!(
                    "pattern bit {b} on qubit {q}"
                )));
            }
        }
        Ok(EvidencePattern { pairs })
    }

    /// The pattern that every basis state matches.
    pub fn empty() -> Self {
        EvidencePattern::default()
    }

    pub fn pairs(&self) -> &[(usize, u8)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(mask, value)` such that index `i` matches iff `i & mask == value`.
    pub fn mask_value(&self) -> (usize, usize) {
        self.pairs.iter().fold((0, 0), |(m, v), &(q, b)| {
            (m | (1 << q), v | ((b as usize) << q))
        })
    }

    /// Union with another pattern on disjoint qubits.
    pub fn join(&self, other: &EvidencePattern) -> Result<Self> {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        EvidencePattern::new(pairs)
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        match self.pairs.iter().find(|(q, _)| *q >= n_qubits) {
            Some(&(q, _)) => Err(Error::IndexOutOfRange {
                index: q,
                size: n_qubits,
            }),
            None => Ok(()),
        }
    }
}

/// Normalized amplitudes over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n >= usize::BITS as usize {
        return Err(Error::TooManyQubits { requested: n, cap });
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits, refusing more than `cap`.
    pub fn zero(n: usize, cap: usize) -> Result<Self> {
        check_cap(n, cap)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Wraps explicit amplitudes; the length must be a power of two and the
    /// norm one.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        let s = StateVector { n_qubits, amps };
        if (s.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "state norm² {} != 1",
                s.norm_sqr()
            )));
        }
        Ok(s)
    }

    /// Embeds the state into a larger register whose extra (high) qubits are `|0⟩`.
    pub fn extended(&self, extra: usize, cap: usize) -> Result<Self> {
        let n = self.n_qubits + extra;
        check_cap(n, cap)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange {
                index: q,
                size: self.n_qubits,
            });
        }
        Ok(())
    }

    /// `RY(θ) = exp(-iθσ_y/2)` on qubit `q`.
    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<()> {
        self.apply_controlled_ry(&[], q, theta)
    }

    /// `RY(θ)` on `target` wherever every `(qubit, polarity)` control matches.
    pub fn apply_controlled_ry(
        &mut self,
        controls: &[(usize, u8)],
        target: usize,
        theta: f64,
    ) -> Result<()> {
        self.check_qubit(target)?;
        let ctrl = EvidencePattern::new(controls.to_vec())?;
        ctrl.check(self.n_qubits)?;
        if controls.iter().any(|&(q, _)| q == target) {
            return Err(Error::DuplicateQubit(target));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidConfig(format!("angle {theta}")));
        }
        let (mask, value) = ctrl.mask_value();
        self.ry_masked(target, theta, mask, value);
        Ok(())
    }

    pub(crate) fn ry_masked(&mut self, target: usize, theta: f64, mask: usize, value: usize) {
        let (s, c) = (theta / 2.0).sin_cos();
        let t = 1usize << target;
        for base in (0..self.amps.len()).step_by(2 * t) {
            for i in base..base + t {
                if i & mask == value {
                    let (a0, a1) = (self.amps[i], self.amps[i | t]);
                    self.amps[i] = a0 * c - a1 * s;
                    self.amps[i | t] = a0 * s + a1 * c;
                }
            }
        }
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let t = 1usize << q;
        for base in (0..self.amps.len()).step_by(2 * t) {
            for i in base..base + t {
                let (a0, a1) = (self.amps[i], self.amps[i | t]);
                self.amps[i] = (a0 + a1) * FRAC_1_SQRT_2;
                self.amps[i | t] = (a0 - a1) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Multiplies by `e^{iφ}` the amplitudes where both qubits are 1.
    pub(crate) fn cphase(&mut self, a: usize, b: usize, phi: f64) {
        let mask = (1usize << a) | (1usize << b);
        let f = Complex64::from_polar(1.0, phi);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= f;
            }
        }
    }

    pub(crate) fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb == 0 {
                self.amps.swap(i, (i & !ma) | mb);
            }
        }
    }

    /// Negates amplitudes with `i & mask == value`.
    pub(crate) fn negate_masked(&mut self, mask: usize, value: usize) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == value {
                *amp = -*amp;
            }
        }
    }

    /// `S_0 = I - 2|0⟩⟨0|` on the whole register.
    pub fn reflect_zero(&mut self) {
        self.amps[0] = -self.amps[0];
    }

    /// `V = I - 2P`: negates every amplitude matching the pattern.
    pub fn reflect_pattern(&mut self, p: &EvidencePattern) -> Result<()> {
        p.check(self.n_qubits)?;
        let (mask, value) = p.mask_value();
        self.negate_masked(mask, value);
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`: total probability of the basis states matching the pattern.
    pub fn measure_amplitude(&self, p: &EvidencePattern) -> Result<f64> {
        p.check(self.n_qubits)?;
        let (mask, value) = p.mask_value();
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == value)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// CSV dump with header `index,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, a) in self.amps.iter().enumerate() {
            out.push_str(&format!("{i},{:e},{:e}\n", a.re, a.im));
        }
        out
    }
}
