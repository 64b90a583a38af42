//! Nine-class generative classifier: one tree network per defect class,
//! scored by log prior plus log likelihood of the sample.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{evidence_probability, Assignment, BayesianNetwork, NetworkDocument, NodeId};
use crate::chowliu::{learn_tree, SampleSet};
use crate::error::{Error, Result};
use crate::qae::{estimate_amplitude_prepared, QaeConfig};
use crate::qbi::restrict_missing;
use crate::qsim::{encode_network, EncodedNetwork};
use crate::wbm::{DefectLabel, FlatSample};

const N_CLASSES: usize = DefectLabel::ALL.len();

/// Tolerance on the sum of priors.
pub const PRIOR_TOLERANCE: f64 = 1e-12;

/// How class priors are set at training time.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorsMode {
    Uniform,
    /// Class frequencies in the training data.
    Empirical,
    /// Given in `DefectLabel::ALL` order.
    Explicit(Vec<f64>),
}

/// Training settings and counts kept with a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub alpha: f64,
    pub n_features: usize,
    /// Training samples per class in `DefectLabel::ALL` order.
    pub class_counts: Vec<usize>,
}

/// One network and prior per class, in `DefectLabel::ALL` order.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierModel {
    networks: Vec<BayesianNetwork>,
    priors: Vec<f64>,
    meta: TrainMeta,
}

/// Predicted label with the per-class scores it was chosen from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: DefectLabel,
    /// `ln P(C_i) + ln P(X | C_i)` per class; `-∞` for zero probability.
    pub scores: Vec<f64>,
}

/// Scoring backend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Backend {
    Exact,
    Quantum {
        cfg: QaeConfig,
        seed: u64,
        cap: usize,
    },
}

fn validate_priors(priors: &[f64]) -> Result<()> {
    if priors.len() != N_CLASSES {
        return Err(Error::DimensionMismatch {
            expected: N_CLASSES,
            found: priors.len(),
        });
    }
    if priors.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::InvalidConfig("priors must be non-negative".into()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > PRIOR_TOLERANCE {
        return Err(Error::InvalidConfig(format!(
            "priors sum to {total}, not 1"
        )));
    }
    Ok(())
}

fn feature_count(data: &[FlatSample]) -> Result<usize> {
    let n = data.first().ok_or(Error::EmptySampleSet)?.bits.len();
    for s in data {
        if s.bits.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.bits.len(),
            });
        }
    }
    Ok(n)
}

/// Learns one Chow-Liu network per class (rooted at feature 0) and sets the
/// priors.
pub fn train(data: &[FlatSample], alpha: f64, priors: &PriorsMode) -> Result<ClassifierModel> {
    let n_features = feature_count(data)?;
    let mut by_class: Vec<Vec<Vec<u8>>> = vec![Vec::new(); N_CLASSES];
    for (i, s) in data.iter().enumerate() {
        let label = s
            .label
            .ok_or_else(|| Error::InvalidConfig(format!("sample {i} has no label")))?;
        by_class[label.index()].push(s.bits.clone());
    }
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let priors = match priors {
        PriorsMode::Uniform => vec![1.0 / N_CLASSES as f64; N_CLASSES],
        PriorsMode::Empirical => {
            if let Some(k) = counts.iter().position(|&c| c == 0) {
                return Err(Error::MissingClass(DefectLabel::ALL[k].to_string()));
            }
            counts
                .iter()
                .map(|&c| c as f64 / data.len() as f64)
                .collect()
        }
        PriorsMode::Explicit(p) => p.clone(),
    };
    validate_priors(&priors)?;
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(DefectLabel::ALL[k].to_string()));
    }
    let networks = by_class
        .into_par_iter()
        .map(|rows| learn_tree(&SampleSet::new(n_features, rows)?, alpha, NodeId(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifierModel {
        networks,
        priors,
        meta: TrainMeta {
            alpha,
            n_features,
            class_counts: counts,
        },
    })
}

/// Samples whose bit value is `missing` on the masked positions.
fn assignment(bits: &[u8], mask: Option<&[bool]>) -> Assignment {
    match mask {
        Some(m) => Assignment::with_missing(bits.to_vec(), m.to_vec()),
        None => Assignment::full(bits.to_vec()),
    }
}

fn ln_or_sentinel(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Index of the largest score; equal scores go to the class whose name sorts
/// first.
pub fn argmax_with_ties(scores: &[f64]) -> DefectLabel {
    let mut best = 0;
    for k in 1..scores.len() {
        let better = match scores[k].total_cmp(&scores[best]) {
            Ordering::Greater => true,
            Ordering::Equal => DefectLabel::ALL[k].name() < DefectLabel::ALL[best].name(),
            Ordering::Less => false,
        };
        if better {
            best = k;
        }
    }
    DefectLabel::ALL[best]
}

impl ClassifierModel {
    pub fn from_parts(
        networks: Vec<BayesianNetwork>,
        priors: Vec<f64>,
        meta: TrainMeta,
    ) -> Result<Self> {
        if networks.len() != N_CLASSES {
            return Err(Error::DimensionMismatch {
                expected: N_CLASSES,
                found: networks.len(),
            });
        }
        validate_priors(&priors)?;
        for net in &networks {
            if net.n_vars() != meta.n_features {
                return Err(Error::DimensionMismatch {
                    expected: meta.n_features,
                    found: net.n_vars(),
                });
            }
            if net.max_indegree() > 1 {
                return Err(Error::InvalidConfig("class network is not a tree".into()));
            }
        }
        Ok(ClassifierModel {
            networks,
            priors,
            meta,
        })
    }

    pub fn networks(&self) -> &[BayesianNetwork] {
        &self.networks
    }

    pub fn network(&self, label: DefectLabel) -> &BayesianNetwork {
        &self.networks[label.index()]
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn n_features(&self) -> usize {
        self.meta.n_features
    }

    fn check_len(&self, bits: &[u8], mask: Option<&[bool]>) -> Result<()> {
        let n = self.meta.n_features;
        for len in std::iter::once(bits.len()).chain(mask.map(<[bool]>::len)) {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        Ok(())
    }

    /// `ln P(X | C)` with masked positions summed out; `-∞` when the sample
    /// has probability zero.
    pub fn log_likelihood(
        &self,
        label: DefectLabel,
        bits: &[u8],
        mask: Option<&[bool]>,
    ) -> Result<f64> {
        self.check_len(bits, mask)?;
        let net = self.network(label);
        if mask.is_some_and(|m| m.iter().any(|&x| x)) {
            return Ok(ln_or_sentinel(evidence_probability(
                net,
                &assignment(bits, mask),
            )?));
        }
        let mut total = 0.0;
        for (i, cpt) in net.cpts().iter().enumerate() {
            let p = cpt.prob(bits[i], bits);
            if p <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            total += p.ln();
        }
        Ok(total)
    }

    fn ln_prior(&self, k: usize) -> f64 {
        ln_or_sentinel(self.priors[k])
    }

    /// Exact-backend prediction.
    pub fn classify(&self, bits: &[u8], mask: Option<&[bool]>) -> Result<Prediction> {
        let scores = DefectLabel::ALL
            .iter()
            .map(|&l| Ok(self.ln_prior(l.index()) + self.log_likelihood(l, bits, mask)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Prediction {
            label: argmax_with_ties(&scores),
            scores,
        })
    }

    /// Prediction from externally supplied likelihoods `P(X | C_i)`.
    pub fn classify_from_likelihoods(&self, likelihoods: &[f64]) -> Prediction {
        let scores: Vec<f64> = likelihoods
            .iter()
            .enumerate()
            .map(|(k, &p)| self.ln_prior(k) + ln_or_sentinel(p))
            .collect();
        Prediction {
            label: argmax_with_ties(&scores),
            scores,
        }
    }

    /// Encodes every class network once for quantum scoring.
    pub fn quantum_scorer(&self, cap: usize) -> Result<QuantumScorer<'_>> {
        let encoded = self
            .networks
            .iter()
            .map(|n| encode_network(n, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantumScorer {
            model: self,
            encoded,
        })
    }

    /// Prediction with the chosen backend.
    pub fn predict(
        &self,
        bits: &[u8],
        mask: Option<&[bool]>,
        backend: &Backend,
    ) -> Result<Prediction> {
        match backend {
            Backend::Exact => self.classify(bits, mask),
            Backend::Quantum { cfg, seed, cap } => self
                .quantum_scorer(*cap)?
                .classify(bits, mask, cfg, *seed, *cap),
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format: "MODEL-JSON".into(),
            version: 1,
            classes: DefectLabel::ALL
                .iter()
                .map(|&l| ClassEntry {
                    label: l,
                    prior: self.priors[l.index()],
                    network: NetworkDocument::from(self.network(l)),
                })
                .collect(),
            meta: self.meta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != "MODEL-JSON" || doc.version != 1 {
            return Err(Error::Format(format!(
                "expected MODEL-JSON v1, found {} v{}",
                doc.format, doc.version
            )));
        }
        let mut slots: Vec<Option<ClassEntry>> = vec![None; N_CLASSES];
        for entry in doc.classes {
            let k = entry.label.index();
            if slots[k].replace(entry).is_some() {
                return Err(Error::Format(format!(
                    "class {} listed twice",
                    DefectLabel::ALL[k]
                )));
            }
        }
        let mut networks = Vec::with_capacity(N_CLASSES);
        let mut priors = Vec::with_capacity(N_CLASSES);
        for (k, slot) in slots.into_iter().enumerate() {
            let entry = slot.ok_or_else(|| Error::MissingClass(DefectLabel::ALL[k].to_string()))?;
            priors.push(entry.prior);
            networks.push(entry.network.into_network()?);
        }
        ClassifierModel::from_parts(networks, priors, doc.meta)
    }
}

/// Class networks encoded once, scored by amplitude estimation.
pub struct QuantumScorer<'a> {
    model: &'a ClassifierModel,
    encoded: Vec<EncodedNetwork>,
}

impl QuantumScorer<'_> {
    /// Estimated `P(X | C_i)` for every class; class `i` uses the generator
    /// stream `(seed, i)` so results do not depend on evaluation order.
    pub fn likelihoods(
        &self,
        bits: &[u8],
        mask: Option<&[bool]>,
        cfg: &QaeConfig,
        seed: u64,
        cap: usize,
    ) -> Result<Vec<f64>> {
        self.model.check_len(bits, mask)?;
        let ev = assignment(bits, mask);
        self.encoded
            .iter()
            .enumerate()
            .map(|(k, enc)| {
                let pattern = restrict_missing(&enc.circuit, &ev)?;
                let class_seed = seed.wrapping_mul(N_CLASSES as u64).wrapping_add(k as u64);
                let est = estimate_amplitude_prepared(
                    &enc.circuit,
                    &enc.state,
                    &pattern,
                    cfg,
                    class_seed,
                    cap,
                )?;
                Ok(est.a_hat)
            })
            .collect()
    }

    pub fn classify(
        &self,
        bits: &[u8],
        mask: Option<&[bool]>,
        cfg: &QaeConfig,
        seed: u64,
        cap: usize,
    ) -> Result<Prediction> {
        let l = self.likelihoods(bits, mask, cfg, seed, cap)?;
        Ok(self.model.classify_from_likelihoods(&l))
    }
}

/// One class in a serialized model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassEntry {
    pub label: DefectLabel,
    pub prior: f64,
    pub network: NetworkDocument,
}

/// Serialized model ("MODEL-JSON v1").
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub classes: Vec<ClassEntry>,
    pub meta: TrainMeta,
}

/// Counts of (true, predicted) pairs, rows indexed by the true class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn record(&mut self, truth: DefectLabel, predicted: DefectLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..N_CLASSES).map(|k| self.counts[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    /// Per-class recall; `None` for classes with no samples.
    pub fn recall(&self) -> Vec<Option<f64>> {
        (0..N_CLASSES)
            .map(|k| {
                let row: u64 = self.counts[k].iter().sum();
                (row > 0).then(|| self.counts[k][k] as f64 / row as f64)
            })
            .collect()
    }

    /// Per-class precision; `None` for classes never predicted.
    pub fn precision(&self) -> Vec<Option<f64>> {
        (0..N_CLASSES)
            .map(|k| {
                let col: u64 = (0..N_CLASSES).map(|r| self.counts[r][k]).sum();
                (col > 0).then(|| self.counts[k][k] as f64 / col as f64)
            })
            .collect()
    }

    /// CSV with a `true\predicted` header row and one row per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in DefectLabel::ALL {
            out.push(',');
            out.push_str(l.name());
        }
        out.push('\n');
        for l in DefectLabel::ALL {
            out.push_str(l.name());
            for c in self.counts[l.index()] {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Summary of an evaluation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Vec<Option<f64>>,
    pub recall: Vec<Option<f64>>,
    pub n_samples: usize,
}

/// Classifies every labeled sample and tallies the confusion matrix.
pub fn evaluate(
    model: &ClassifierModel,
    data: &[FlatSample],
    backend: &Backend,
) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let scorer = match backend {
        Backend::Quantum { cap, .. } => Some(model.quantum_scorer(*cap)?),
        Backend::Exact => None,
    };
    let predicted = data
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let truth = s
                .label
                .ok_or_else(|| Error::InvalidConfig(format!("sample {i} has no label")))?;
            let p = match (backend, &scorer) {
                (Backend::Quantum { cfg, seed, cap }, Some(sc)) => {
                    sc.classify(&s.bits, None, cfg, seed.wrapping_add(i as u64), *cap)?
                }
                _ => model.classify(&s.bits, None)?,
            };
            Ok((truth, p.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = ConfusionMatrix::default();
    for (t, p) in predicted {
        confusion.record(t, p);
    }
    Ok(Evaluation {
        accuracy: confusion.accuracy(),
        precision: confusion.precision(),
        recall: confusion.recall(),
        n_samples: data.len(),
        confusion,
    })
}

/// Splits labeled samples per class: each class is shuffled with a seeded
/// generator and its first `round(n · train_fraction)` samples go to training.
/// Returns the training and held-out indices, each in increasing order.
pub fn stratified_split_indices(
    data: &[FlatSample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidConfig(format!(
            "split fraction {train_fraction} outside [0, 1]"
        )));
    }
    if let Some(i) = data.iter().position(|s| s.label.is_none()) {
        return Err(Error::InvalidConfig(format!("sample {i} has no label")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; data.len()];
    for label in DefectLabel::ALL {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data[i].label == Some(label))
            .collect();
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * train_fraction).round() as usize;
        for &i in &idx[..k] {
            in_train[i] = true;
        }
    }
    Ok((0..data.len()).partition(|&i| in_train[i]))
}

/// [`stratified_split_indices`] materialized as sample lists; relative order
/// within each fold follows the input order.
pub fn stratified_split(
    data: &[FlatSample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<FlatSample>, Vec<FlatSample>)> {
    let (train, test) = stratified_split_indices(data, train_fraction, seed)?;
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| data[i].clone()).collect();
    Ok((pick(train), pick(test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::Cpt;

    fn tiny_model(networks: Vec<BayesianNetwork>) -> ClassifierModel {
        let n = networks[0].n_vars();
        ClassifierModel::from_parts(
            networks,
            vec![1.0 / 9.0; 9],
            TrainMeta {
                alpha: 1.0,
                n_features: n,
                class_counts: vec![0; 9],
            },
        )
        .unwrap()
    }

    fn labeled(bits: Vec<u8>, l: DefectLabel) -> FlatSample {
        FlatSample::new(bits, Some(l))
    }

    #[test]
    fn uniform_priors() {
        let data: Vec<FlatSample> = DefectLabel::ALL
            .iter()
            .flat_map(|&l| [labeled(vec![0, 1], l), labeled(vec![1, 1], l)])
            .collect();
        let m = train(&data, 1.0, &PriorsMode::Uniform).unwrap();
        assert!(m.priors().iter().all(|&p| p == 1.0 / 9.0));
        assert!(m.networks().iter().all(|n| n.max_indegree() <= 1));
    }

    #[test]
    fn empirical_priors_need_every_class() {
        let data = vec![labeled(vec![0, 1], DefectLabel::Center)];
        assert_eq!(
            train(&data, 1.0, &PriorsMode::Empirical).unwrap_err(),
            Error::MissingClass("Normal".into())
        );
        assert_eq!(
            train(&data, 1.0, &PriorsMode::Uniform).unwrap_err(),
            Error::EmptyClass("Normal".into())
        );
    }

    #[test]
    fn explicit_priors_are_checked() {
        let data: Vec<FlatSample> = DefectLabel::ALL
            .iter()
            .map(|&l| labeled(vec![0, 1], l))
            .collect();
        assert!(train(&data, 1.0, &PriorsMode::Explicit(vec![0.2; 9])).is_err());
        let mut p = vec![0.0; 9];
        p[3] = 1.0;
        let m = train(&data, 1.0, &PriorsMode::Explicit(p)).unwrap();
        assert_eq!(
            m.classify(&[0, 1], None).unwrap().label,
            DefectLabel::EdgeLoc
        );
    }

    #[test]
    fn ties_follow_class_names() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.5), Cpt::root(0.5)]).unwrap();
        let m = tiny_model(vec![net; 9]);
        assert_eq!(
            m.classify(&[1, 0], None).unwrap().label,
            DefectLabel::Center
        );
        let scores = [f64::NEG_INFINITY; 9];
        assert_eq!(argmax_with_ties(&scores), DefectLabel::Center);
    }

    #[test]
    fn zero_probability_is_sentinel() {
        let mut nets = vec![BayesianNetwork::new(vec![Cpt::root(0.5)]).unwrap(); 9];
        nets[0] = BayesianNetwork::new(vec![Cpt::root(1.0)]).unwrap();
        let m = tiny_model(nets);
        assert_eq!(
            m.log_likelihood(DefectLabel::Normal, &[1], None).unwrap(),
            f64::NEG_INFINITY
        );
        assert_ne!(m.classify(&[1], None).unwrap().label, DefectLabel::Normal);
    }

    #[test]
    fn fully_missing_sample_scores_zero() {
        let net =
            BayesianNetwork::new(vec![Cpt::root(0.3), Cpt::child(NodeId(0), 0.2, 0.9)]).unwrap();
        let m = tiny_model(vec![net; 9]);
        for l in DefectLabel::ALL {
            let ll = m.log_likelihood(l, &[1, 0], Some(&[true, true])).unwrap();
            assert!(ll.abs() < 1e-15);
        }
    }

    #[test]
    fn modal_samples_classify_to_their_class() {
        // Class k puts near-certain mass on the one-hot pattern with bit k set.
        let nets: Vec<BayesianNetwork> = (0..9)
            .map(|k| {
                BayesianNetwork::new(
                    (0..9)
                        .map(|i| Cpt::root(if i == k { 0.05 } else { 0.95 }))
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let m = tiny_model(nets);
        let data: Vec<FlatSample> = (0..9)
            .map(|k| {
                let mut bits = vec![0u8; 9];
                bits[k] = 1;
                labeled(bits, DefectLabel::ALL[k])
            })
            .collect();
        let ev = evaluate(&m, &data, &Backend::Exact).unwrap();
        assert_eq!(ev.accuracy, 1.0);
        for k in 0..9 {
            assert_eq!(ev.confusion.counts[k].iter().sum::<u64>(), 1);
            assert_eq!(ev.confusion.counts[k][k], 1);
        }
        let one = evaluate(&m, &data[2..3], &Backend::Exact).unwrap();
        assert_eq!(one.accuracy, 1.0);
    }

    #[test]
    fn quantum_backend_refuses_wide_models() {
        let net = BayesianNetwork::new(vec![Cpt::root(0.5); 30]).unwrap();
        let m = tiny_model(vec![net; 9]);
        let backend = Backend::Quantum {
            cfg: QaeConfig::new(0.1, 0.05, 1.0 / 256.0).unwrap(),
            seed: 0,
            cap: 26,
        };
        assert!(matches!(
            m.predict(&[0; 30], None, &backend),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn model_json_round_trip() {
        let data: Vec<FlatSample> = DefectLabel::ALL
            .iter()
            .flat_map(|&l| [labeled(vec![0, 1, 1], l), labeled(vec![1, 1, 0], l)])
            .collect();
        let m = train(&data, 0.5, &PriorsMode::Empirical).unwrap();
        let text = m.to_json();
        assert!(text.contains("\"MODEL-JSON\""));
        assert_eq!(ClassifierModel::from_json(&text).unwrap(), m);
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let data: Vec<FlatSample> = DefectLabel::ALL
            .iter()
            .flat_map(|&l| (0..100).map(move |i| labeled(vec![(i % 2) as u8], l)))
            .collect();
        let (train_a, test_a) = stratified_split(&data, 0.8, 7).unwrap();
        let (train_b, _) = stratified_split(&data, 0.8, 7).unwrap();
        assert_eq!(train_a, train_b);
        for l in DefectLabel::ALL {
            assert_eq!(train_a.iter().filter(|s| s.label == Some(l)).count(), 80);
            assert_eq!(test_a.iter().filter(|s| s.label == Some(l)).count(), 20);
        }
        let (all, none) = stratified_split(&data, 1.0, 7).unwrap();
        assert_eq!((all.len(), none.len()), (900, 0));
    }

    #[test]
    fn confusion_csv_layout() {
        let mut c = ConfusionMatrix::default();
        c.record(DefectLabel::Loc, DefectLabel::Scratch);
        let csv = c.to_csv();
        let row = csv.lines().find(|l| l.starts_with("Loc,")).unwrap();
        assert_eq!(row, "Loc,0,0,0,0,0,0,0,1,0");
        assert_eq!(c.precision()[7], Some(0.0));
        assert_eq!(c.recall()[0], None);
    }
}
