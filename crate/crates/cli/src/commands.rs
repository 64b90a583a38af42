use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qbayes_core::bayesnet::{evidence_probability, exact_posterior};
use qbayes_core::classifier::{
    evaluate as evaluate_model, stratified_split_indices, train as train_model, Backend,
    ClassifierModel, PriorsMode,
};
use qbayes_core::qae::QaeConfig;
use qbayes_core::qbi::{infer_posterior, InferenceRequest};
use qbayes_core::qsim::encode_network;
use qbayes_core::speedup::{run_grid, slopes_vs_a, slopes_vs_inverse_epsilon, to_csv, BenchRow};
use qbayes_core::synth::{
    class_generators, min_pairwise_separation, sample_dataset, SyntheticConfig,
};
use qbayes_core::wbm::{
    ingest as ingest_maps, parse_flat_csv, parse_wbm_txt, to_flat_csv, IngestSummary, FEATURES,
};
use qbayes_core::{Assignment, BayesianNetwork, Cpt, DefectLabel, Error, FlatSample, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::report::{artifact, emit, read, write};
use crate::{BackendKind, GlobalArgs, QpeModeArg};

/// Largest acceptable `| |amp|² - P | ` in `encode-verify`.
const ENCODE_TOLERANCE: f64 = 1e-10;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QaeArgs {
    /// Relative error target of each amplitude estimate.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Failure probability of each amplitude estimate.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Lower bound on the estimated probability; required by the quantum backend.
    #[arg(long)]
    pub a_min: Option<f64>,
    /// Phase-estimation simulator.
    #[arg(long, value_enum, default_value_t = QpeModeArg::Subspace)]
    pub qpe_mode: QpeModeArg,
}

impl QaeArgs {
    fn config(&self) -> Result<QaeConfig, CliError> {
        let a_min = self
            .a_min
            .ok_or_else(|| invalid("--a-min is required for the quantum backend"))?;
        let mut cfg = QaeConfig::new(self.epsilon, self.delta, a_min)?;
        cfg.mode = self.qpe_mode.into();
        Ok(cfg)
    }

    fn backend(&self, kind: BackendKind, g: &GlobalArgs) -> Result<Backend, CliError> {
        Ok(match kind {
            BackendKind::Exact => Backend::Exact,
            BackendKind::Quantum => Backend::Quantum {
                cfg: self.config()?,
                seed: g.seed,
                cap: g.qubit_cap,
            },
        })
    }
}

/// Reads FLAT-CSV, taking the feature count from the first record.
fn read_flat(path: &Path) -> Result<Vec<FlatSample>, CliError> {
    let text = read(path)?;
    let width = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .find(|l| !l.is_empty())
        .map_or(FEATURES, |l| l.split(',').count().saturating_sub(1));
    Ok(parse_flat_csv(&text, width)?)
}

fn read_model(path: &Path) -> Result<ClassifierModel, CliError> {
    Ok(ClassifierModel::from_json(&read(path)?)?)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| invalid(format!("bad {what} {s:?}"))))
        .collect()
}

fn parse_evidence(text: &str, n: usize) -> Result<Vec<(NodeId, u8)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (idx, bit) = item
                .split_once('=')
                .ok_or_else(|| invalid(format!("evidence item {item:?} is not idx=bit")))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|_| invalid(format!("bad evidence index {idx:?}")))?;
            let bit: u8 = match bit.trim() {
                "0" => 0,
                "1" => 1,
                b => return Err(invalid(format!("evidence bit {b:?} is not 0 or 1"))),
            };
            check_index(idx, n)?;
            Ok((NodeId(idx), bit))
        })
        .collect()
}

fn check_index(idx: usize, n: usize) -> Result<(), CliError> {
    if idx >= n {
        return Err(invalid(format!(
            "variable {idx} out of range for {n} variables"
        )));
    }
    Ok(())
}

fn parse_mask(text: Option<&str>, n: usize) -> Result<Option<Vec<bool>>, CliError> {
    let Some(text) = text else { return Ok(None) };
    let mut mask = vec![false; n];
    for idx in parse_list::<usize>(text, "mask index")? {
        check_index(idx, n)?;
        mask[idx] = true;
    }
    Ok(Some(mask))
}

fn parse_priors(text: &str) -> Result<PriorsMode, CliError> {
    Ok(match text {
        "uniform" => PriorsMode::Uniform,
        "empirical" => PriorsMode::Empirical,
        list => PriorsMode::Explicit(parse_list(list, "prior")?),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    WbmTxt,
    FlatCsv,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IngestArgs {
    /// Input files, concatenated in order.
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::WbmTxt)]
    pub format: InputFormat,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "flat.csv")]
    pub out: String,
}

pub fn ingest(g: &GlobalArgs, a: &IngestArgs) -> Result<(), CliError> {
    let mut samples = Vec::new();
    let mut summary = IngestSummary::default();
    for path in &a.inputs {
        let text = read(path)?;
        let wrap = |e: Error| invalid(format!("{}: {e}", path.display()));
        let (part, s) = match a.format {
            InputFormat::WbmTxt => ingest_maps(&parse_wbm_txt(&text).map_err(wrap)?),
            InputFormat::FlatCsv => {
                let rows = parse_flat_csv(&text, FEATURES).map_err(wrap)?;
                let s = flat_summary(&rows);
                (rows, s)
            }
        };
        summary.total += s.total;
        summary.without_defect_cells += s.without_defect_cells;
        for (k, v) in s.per_class {
            *summary.per_class.entry(k).or_default() += v;
        }
        samples.extend(part);
    }
    if summary.per_class.is_empty() {
        summary.per_class = DefectLabel::ALL
            .iter()
            .map(|l| (l.name().to_string(), 0))
            .collect();
    }
    let out = artifact(g, &a.out);
    write(&out, &to_flat_csv(&samples)?)?;
    emit(
        g,
        "ingest",
        a,
        &json!({ "output": out, "summary": summary }),
    )?;
    Ok(())
}

/// Counts for rows that are already flat; rows with no set bit count as
/// defect-free.
fn flat_summary(rows: &[FlatSample]) -> IngestSummary {
    let mut s = IngestSummary {
        per_class: DefectLabel::ALL
            .iter()
            .map(|l| (l.name().to_string(), 0))
            .collect(),
        ..IngestSummary::default()
    };
    for r in rows {
        s.total += 1;
        if let Some(l) = r.label {
            *s.per_class.entry(l.name().to_string()).or_default() += 1;
        }
        s.without_defect_cells += usize::from(r.bits.iter().all(|&b| b == 0));
    }
    s
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TrainArgs {
    /// Labeled FLAT-CSV samples.
    #[arg(long)]
    pub data: PathBuf,
    /// Additive smoothing of the conditional tables.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// `uniform`, `empirical`, or nine comma-separated probabilities.
    #[arg(long, default_value = "uniform")]
    pub priors: String,
    /// Fraction of each class kept for training.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    /// Seed of the stratified split; defaults to --seed.
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long, default_value = "model.json")]
    pub model_out: String,
    #[arg(long, default_value = "heldout.csv")]
    pub heldout_out: String,
}

#[derive(Serialize)]
struct SplitManifest<'a> {
    data: &'a Path,
    fraction: f64,
    seed: u64,
    per_class: BTreeMap<&'static str, [usize; 2]>,
    train: Vec<usize>,
    test: Vec<usize>,
}

pub fn train(g: &GlobalArgs, a: &TrainArgs) -> Result<(), CliError> {
    if !(a.alpha >= 0.0 && a.alpha.is_finite()) {
        return Err(invalid(format!(
            "alpha {} must be a finite non-negative number",
            a.alpha
        )));
    }
    let priors = parse_priors(&a.priors)?;
    let data = read_flat(&a.data)?;
    let seed = a.split_seed.unwrap_or(g.seed);
    let (train_idx, test_idx) = stratified_split_indices(&data, a.split, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    let (train_set, test_set) = (pick(&train_idx), pick(&test_idx));
    let model = train_model(&train_set, a.alpha, &priors)?;

    let model_path = artifact(g, &a.model_out);
    write(&model_path, &model.to_json())?;
    let heldout = if a.split < 1.0 {
        let p = artifact(g, &a.heldout_out);
        write(&p, &to_flat_csv(&test_set)?)?;
        Some(p)
    } else {
        None
    };
    let per_class = DefectLabel::ALL
        .iter()
        .map(|&l| {
            let count = |s: &[FlatSample]| s.iter().filter(|x| x.label == Some(l)).count();
            (l.name(), [count(&train_set), count(&test_set)])
        })
        .collect();
    let manifest = SplitManifest {
        data: &a.data,
        fraction: a.split,
        seed,
        per_class,
        train: train_idx,
        test: test_idx,
    };
    let manifest_path = artifact(g, "split_manifest.json");
    write(
        &manifest_path,
        &format!("{}\n", serde_json::to_string_pretty(&manifest)?),
    )?;

    let config = json!({ "args": a, "split_seed": seed });
    let result = json!({
        "model": model_path,
        "heldout": heldout,
        "manifest": manifest_path,
        "n_train": train_set.len(),
        "n_test": test_set.len(),
        "priors": model.priors(),
        "meta": model.meta(),
    });
    emit(g, "train", &config, &result)?;
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// FLAT-CSV samples; labels are echoed next to predictions.
    #[arg(long)]
    pub data: PathBuf,
    /// Feature indices treated as missing in every sample, "idx,...".
    #[arg(long)]
    pub missing: Option<String>,
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    pub backend: BackendKind,
    #[command(flatten)]
    pub qae: QaeArgs,
    #[arg(long, default_value = "predictions.csv")]
    pub out: String,
}

pub fn classify(g: &GlobalArgs, a: &ClassifyArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let data = read_flat(&a.data)?;
    let mask = parse_mask(a.missing.as_deref(), model.n_features())?;
    let backend = a.qae.backend(a.backend, g)?;
    let scorer = match backend {
        Backend::Quantum { cap, .. } => Some(model.quantum_scorer(cap)?),
        Backend::Exact => None,
    };
    let predictions = data
        .par_iter()
        .enumerate()
        .map(|(i, s)| match (&backend, &scorer) {
            (Backend::Quantum { cfg, seed, cap }, Some(sc)) => sc.classify(
                &s.bits,
                mask.as_deref(),
                cfg,
                seed.wrapping_add(i as u64),
                *cap,
            ),
            _ => model.classify(&s.bits, mask.as_deref()),
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut csv = String::from("index,label,predicted\n");
    let mut counts: BTreeMap<&str, usize> =
        DefectLabel::ALL.iter().map(|l| (l.name(), 0)).collect();
    let mut agree = 0;
    for (i, (s, p)) in data.iter().zip(&predictions).enumerate() {
        let label = s.label.map_or("", DefectLabel::name);
        csv.push_str(&format!("{i},{label},{}\n", p.label));
        *counts.entry(p.label.name()).or_default() += 1;
        agree += usize::from(s.label == Some(p.label));
    }
    let out = artifact(g, &a.out);
    write(&out, &csv)?;
    let result = json!({
        "predictions": out,
        "n_samples": data.len(),
        "predicted_counts": counts,
        "matches_label": agree,
    });
    emit(g, "classify", a, &result)?;
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct InferArgs {
    /// BN-JSON network.
    #[arg(long)]
    pub network: PathBuf,
    /// Observed values, "idx=bit,...".
    #[arg(long, default_value = "")]
    pub evidence: String,
    /// Query variables, "idx,...".
    #[arg(long, default_value = "")]
    pub targets: String,
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    pub backend: BackendKind,
    #[command(flatten)]
    pub qae: QaeArgs,
}

pub fn infer(g: &GlobalArgs, a: &InferArgs) -> Result<(), CliError> {
    let net = BayesianNetwork::from_json(&read(&a.network)?)?;
    let n = net.n_vars();
    let evidence = parse_evidence(&a.evidence, n)?;
    let targets: Vec<NodeId> = parse_list::<usize>(&a.targets, "target")?
        .into_iter()
        .map(|t| check_index(t, n).map(|()| NodeId(t)))
        .collect::<Result<_, _>>()?;
    let assignment = Assignment::observed(n, &evidence);
    let result = match a.backend {
        BackendKind::Exact => {
            let post = exact_posterior(&net, &assignment, &targets)?;
            json!({
                "backend": "exact",
                "evidence_probability": evidence_probability(&net, &assignment)?,
                "posterior": post,
            })
        }
        BackendKind::Quantum => {
            let cfg = a.qae.config()?;
            let req = InferenceRequest {
                evidence: evidence.clone(),
                targets: targets.clone(),
                epsilon: cfg.epsilon,
                delta: cfg.delta,
                a_min_evidence: cfg.a_min,
                seed: g.seed,
                mode: cfg.mode,
            };
            req.validate()?;
            let enc = encode_network(&net, g.qubit_cap)?;
            let est = infer_posterior(&enc.circuit, &req, g.qubit_cap)?;
            let exact = exact_posterior(&net, &assignment, &targets).ok();
            json!({
                "backend": "quantum",
                "posterior": est.posterior,
                "normalized": est.normalized(),
                "denominator": est.denominator,
                "entries": est.entries,
                "total_grover_calls": est.total_grover_calls,
                "exact_reference": exact,
            })
        }
    };
    emit(g, "infer", a, &result)?;
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled FLAT-CSV samples.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    pub backend: BackendKind,
    #[command(flatten)]
    pub qae: QaeArgs,
    #[arg(long, default_value = "confusion.csv")]
    pub confusion_out: String,
}

pub fn evaluate(g: &GlobalArgs, a: &EvaluateArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let data = read_flat(&a.data)?;
    let backend = a.qae.backend(a.backend, g)?;
    let ev = evaluate_model(&model, &data, &backend)?;
    let out = artifact(g, &a.confusion_out);
    write(&out, &ev.confusion.to_csv())?;
    let per_class = |v: &[Option<f64>]| -> BTreeMap<&str, Option<f64>> {
        DefectLabel::ALL
            .iter()
            .map(|l| l.name())
            .zip(v.iter().copied())
            .collect()
    };
    let result = json!({
        "confusion": out,
        "n_samples": ev.n_samples,
        "accuracy": ev.accuracy,
        "precision": per_class(&ev.precision),
        "recall": per_class(&ev.recall),
    });
    emit(g, "evaluate", a, &result)?;
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct QaeBenchArgs {
    /// True amplitudes, "a,...".
    #[arg(long, default_value = "0.25,0.0625,0.015625")]
    pub a_grid: String,
    /// Relative error targets, "ε,...".
    #[arg(long, default_value = "0.1")]
    pub eps_grid: String,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value = "qae_bench.csv")]
    pub out: String,
}

pub fn qae_bench(g: &GlobalArgs, a: &QaeBenchArgs) -> Result<(), CliError> {
    let amps: Vec<f64> = parse_list(&a.a_grid, "amplitude")?;
    let eps: Vec<f64> = parse_list(&a.eps_grid, "epsilon")?;
    if amps.is_empty() || eps.is_empty() {
        return Err(invalid("both grids need at least one value"));
    }
    if let Some(bad) = amps.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(invalid(format!("amplitude {bad} outside (0, 1]")));
    }
    let rows = run_grid(&amps, &eps, a.delta, g.seed, g.qubit_cap)?;
    let out = artifact(g, &a.out);
    write(&out, &to_csv(&rows)?)?;

    let slice = |keep: &dyn Fn(&BenchRow) -> bool| -> Vec<BenchRow> {
        rows.iter().filter(|r| keep(r)).cloned().collect()
    };
    let vs_a: Vec<_> = if amps.len() >= 2 {
        eps.iter()
            .map(|&e| json!({ "epsilon": e, "slopes": slopes_vs_a(&slice(&|r| r.epsilon == e)) }))
            .collect()
    } else {
        Vec::new()
    };
    let vs_eps: Vec<_> = if eps.len() >= 2 {
        amps.iter()
            .map(|&x| {
                json!({ "a": x, "slopes": slopes_vs_inverse_epsilon(&slice(&|r| r.a_true == x)) })
            })
            .collect()
    } else {
        Vec::new()
    };
    let result = json!({
        "table": out,
        "rows": rows.len(),
        "slopes_vs_a": vs_a,
        "slopes_vs_inverse_epsilon": vs_eps,
    });
    emit(g, "qae-bench", a, &result)?;
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EncodeVerifyArgs {
    /// BN-JSON network to check.
    #[arg(long, conflicts_with = "random")]
    pub network: Option<PathBuf>,
    /// Check this many random trees with 1..=max-n variables instead.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// Largest network accepted.
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
}

/// Random tree over `n` nodes: each node after the first picks an earlier
/// parent. About one row in ten is deterministic.
fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Result<BayesianNetwork, Error> {
    let p = |rng: &mut ChaCha8Rng| match rng.gen_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    };
    let mut cpts = vec![Cpt::root(p(rng))];
    for i in 1..n {
        let parent = NodeId(rng.gen_range(0..i));
        let (p0, p1) = (p(rng), p(rng));
        cpts.push(Cpt::child(parent, p0, p1));
    }
    BayesianNetwork::new(cpts)
}

pub fn encode_verify(g: &GlobalArgs, a: &EncodeVerifyArgs) -> Result<(), CliError> {
    if a.max_n > g.qubit_cap {
        return Err(Error::TooManyQubits {
            requested: a.max_n,
            cap: g.qubit_cap,
        }
        .into());
    }
    let nets: Vec<(String, BayesianNetwork)> = match (&a.network, a.random) {
        (Some(path), _) => vec![(
            path.display().to_string(),
            BayesianNetwork::from_json(&read(path)?)?,
        )],
        (None, 0) => return Err(invalid("give --network or --random")),
        (None, k) => {
            if a.max_n == 0 {
                return Err(invalid("--max-n must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            (0..k)
                .map(|i| {
                    let n = rng.gen_range(1..=a.max_n);
                    Ok((format!("random-{i}"), random_tree(&mut rng, n)?))
                })
                .collect::<Result<_, Error>>()?
        }
    };
    let mut checks = Vec::with_capacity(nets.len());
    for (source, net) in &nets {
        if net.n_vars() > a.max_n {
            return Err(Error::TooManyQubits {
                requested: net.n_vars(),
                cap: a.max_n,
            }
            .into());
        }
        let err = encode_network(net, g.qubit_cap)?.max_joint_error(net);
        checks.push(json!({
            "source": source,
            "n_vars": net.n_vars(),
            "max_error": err,
            "pass": err <= ENCODE_TOLERANCE,
        }));
    }
    let worst = checks
        .iter()
        .filter_map(|c| c["max_error"].as_f64())
        .fold(0.0, f64::max);
    let pass = worst <= ENCODE_TOLERANCE;
    let result = json!({
        "tolerance": ENCODE_TOLERANCE,
        "max_error": worst,
        "pass": pass,
        "networks": checks,
    });
    emit(g, "encode-verify", a, &result)?;
    if !pass {
        return Err(CliError::Runtime(format!(
            "encoding error {worst:e} exceeds {ENCODE_TOLERANCE:e}"
        )));
    }
    Ok(())
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SynthArgs {
    /// Samples drawn from each class generator.
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    /// Grid side; samples have side² features.
    #[arg(long, default_value_t = 8)]
    pub side: usize,
    /// Parent weight in each conditional table.
    #[arg(long, default_value_t = 0.2)]
    pub coupling: f64,
    /// Seed of the generator networks; defaults to --seed.
    #[arg(long)]
    pub generator_seed: Option<u64>,
    #[arg(long, default_value = "synthetic.csv")]
    pub out: String,
}

pub fn synth(g: &GlobalArgs, a: &SynthArgs) -> Result<(), CliError> {
    let cfg = SyntheticConfig {
        side: a.side,
        coupling: a.coupling,
        seed: a.generator_seed.unwrap_or(g.seed),
    };
    let gens = class_generators(&cfg)?;
    let data = sample_dataset(&gens, a.per_class, g.seed)?;
    let out = artifact(g, &a.out);
    write(&out, &to_flat_csv(&data)?)?;
    let result = json!({
        "output": out,
        "n_samples": data.len(),
        "n_features": a.side * a.side,
        "min_pairwise_separation": min_pairwise_separation(&gens)?,
    });
    emit(g, "synth", &json!({ "args": a, "generator": cfg }), &result)?;
    Ok(())
}
