//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use noise_sieve::eval::{compare, f_measure, CompareConfig, FilterMode};
use noise_sieve::fixtures::{table1, TABLE1_ATTRIBUTES, TABLE1_ROWS};
use noise_sieve::nbc::{laplace, NaiveBayesModel, SmoothingPolicy};
use noise_sieve::noise::{detect_noise, detect_noise_baseline, NoiseConfig};
use noise_sieve::synth::{evaluate_detection, generate, inject_noise, AttributeSpec, GeneratorConfig, Rule};
use noise_sieve::tree::{entropy, split_scores};

type Q = Ratio<i128>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let model = NaiveBayesModel::fit(&table1()).unwrap();
    let reject = model.prior_ratio("Reject").unwrap();
    let accept = model.prior_ratio("Accept").unwrap();
    outcome(
        reject == (5, 9) && accept == (4, 9),
        format!("P(Reject)={}/{} P(Accept)={}/{}", reject.0, reject.1, accept.0, accept.1),
    )
}

// Expected conditional ratios over the Table 1 fixture, listed by hand.
const TABLE3: [(&str, &str, &str, u64, u64); 28] = [
    ("DayTime", "Fri[S1]", "Reject", 3, 5),
    ("DayTime", "Fri[S1]", "Accept", 1, 4),
    ("DayTime", "Fri[S2]", "Reject", 0, 5),
    ("DayTime", "Fri[S2]", "Accept", 1, 4),
    ("DayTime", "Wed[S1]", "Reject", 2, 5),
    ("DayTime", "Wed[S1]", "Accept", 1, 4),
    ("DayTime", "Wed[S2]", "Reject", 0, 5),
    ("DayTime", "Wed[S2]", "Accept", 1, 4),
    ("Location", "Office", "Reject", 5, 5),
    ("Location", "Office", "Accept", 2, 4),
    ("Location", "Home", "Reject", 0, 5),
    ("Location", "Home", "Accept", 2, 4),
    ("Situation", "Meeting", "Reject", 3, 5),
    ("Situation", "Meeting", "Accept", 1, 4),
    ("Situation", "Seminar", "Reject", 2, 5),
    ("Situation", "Seminar", "Accept", 1, 4),
    ("Situation", "Dinner", "Reject", 0, 5),
    ("Situation", "Dinner", "Accept", 2, 4),
    ("Relationship", "Friend", "Reject", 2, 5),
    ("Relationship", "Friend", "Accept", 1, 4),
    ("Relationship", "Colleague", "Reject", 2, 5),
    ("Relationship", "Colleague", "Accept", 0, 4),
    ("Relationship", "Boss", "Reject", 0, 5),
    ("Relationship", "Boss", "Accept", 1, 4),
    ("Relationship", "Mother", "Reject", 0, 5),
    ("Relationship", "Mother", "Accept", 1, 4),
    ("Relationship", "Unknown", "Reject", 1, 5),
    ("Relationship", "Unknown", "Accept", 1, 4),
];

fn criterion_2() -> Outcome {
    let model = NaiveBayesModel::fit(&table1()).unwrap();
    let wrong: Vec<String> = TABLE3
        .iter()
        .filter(|(a, v, l, n, d)| model.conditional_ratio(a, v, l).unwrap() != (*n, *d))
        .map(|(a, v, l, _, _)| format!("{a}={v}|{l}"))
        .collect();
    outcome(wrong.is_empty(), format!("{}/28 match {wrong:?}", 28 - wrong.len()))
}

fn criterion_3() -> Outcome {
    let got: Vec<f64> = [0, 990, 10].iter().map(|&c| laplace(c, 1000, 3, 1.0).unwrap()).collect();
    let want = [0.001, 0.988, 0.011];
    let pass = got.iter().zip(want).all(|(g, w)| (g - w).abs() < 0.0005);
    outcome(pass, format!("{:.3} {:.3} {:.3}", got[0], got[1], got[2]))
}

/// Exact recomputation of the dynamic-threshold result from raw rows.
fn table1_oracle() -> (BTreeSet<usize>, Q, BTreeSet<usize>) {
    let labels = ["Reject", "Accept"];
    let rows: Vec<(usize, &[&str; 5])> = TABLE1_ROWS.iter().enumerate().map(|(i, r)| (i + 1, r)).collect();
    let class_n = |l: &str| rows.iter().filter(|(_, r)| r[4] == l).count() as i128;
    let count = |a: usize, v: &str, l: &str| rows.iter().filter(|(_, r)| r[a] == v && r[4] == l).count() as i128;
    let card = |a: usize| rows.iter().map(|(_, r)| r[a]).collect::<BTreeSet<_>>().len() as i128;
    let n = rows.len() as i128;

    let mut pure = Vec::new();
    let mut mis = Vec::new();
    for (id, r) in &rows {
        let smooth = labels
            .iter()
            .any(|l| (0..TABLE1_ATTRIBUTES.len()).any(|a| count(a, r[a], l) == 0));
        let like = |l: &str| -> Q {
            (0..TABLE1_ATTRIBUTES.len())
                .map(|a| {
                    if smooth {
                        Q::new(count(a, r[a], l) + 1, class_n(l) + card(a))
                    } else {
                        Q::new(count(a, r[a], l), class_n(l))
                    }
                })
                .product()
        };
        let best = labels
            .iter()
            .copied()
            .max_by(|x, y| {
                let sx = like(x) * Q::new(class_n(x), n);
                let sy = like(y) * Q::new(class_n(y), n);
                // Earlier label wins ties.
                sx.cmp(&sy).then(std::cmp::Ordering::Greater)
            })
            .unwrap();
        if best == r[4] {
            pure.push(like(r[4]));
        } else {
            mis.push((*id, like(r[4])));
        }
    }
    let threshold = pure.into_iter().min().unwrap();
    let mis_ids = mis.iter().map(|(id, _)| *id).collect();
    let noise = mis.iter().filter(|(_, l)| *l < threshold).map(|(id, _)| *id).collect();
    (mis_ids, threshold, noise)
}

fn criterion_4() -> Outcome {
    let (oracle_mis, oracle_t, oracle_noise) = table1_oracle();
    let report = detect_noise(&table1(), SmoothingPolicy::default()).unwrap();
    let mis: BTreeSet<usize> = report.partition.mis_ids().collect();
    let noise: BTreeSet<usize> = report.noise_ids.iter().copied().collect();
    let t = report.threshold.unwrap_or(f64::NAN);
    let oracle_t = *oracle_t.numer() as f64 / *oracle_t.denom() as f64;
    let expected = BTreeSet::from([3, 8]);
    let pass = mis == expected
        && noise == expected
        && oracle_mis == expected
        && oracle_noise == expected
        && (t - 1.1905e-2).abs() <= 1e-6
        && (t - oracle_t).abs() <= 1e-15;
    outcome(
        pass,
        format!("mis={mis:?} threshold={t:.6e} (oracle {oracle_t:.6e}) noise={noise:?}"),
    )
}

fn criterion_5() -> Outcome {
    let f = f_measure(0.91, 0.30);
    outcome((f - 0.45).abs() <= 0.005, format!("F={f:.4}"))
}

fn random_config(rng: &mut ChaCha8Rng, seed: u64) -> GeneratorConfig {
    let attributes: Vec<AttributeSpec> = (0..rng.gen_range(2..=5))
        .map(|a| AttributeSpec {
            name: format!("A{a}"),
            values: (0..rng.gen_range(2..=6)).map(|v| format!("v{v}")).collect(),
        })
        .collect();
    let labels = ["L0", "L1", "L2"];
    let n_labels = rng.gen_range(2..=3);
    let rules = (0..rng.gen_range(1..=4))
        .map(|_| {
            let a = &attributes[rng.gen_range(0..attributes.len())];
            Rule {
                conditions: [(a.name.clone(), a.values[rng.gen_range(0..a.values.len())].clone())].into(),
                label: labels[rng.gen_range(0..n_labels)].to_string(),
            }
        })
        .collect();
    GeneratorConfig {
        attributes,
        rules,
        default_label: labels[0].to_string(),
        n: rng.gen_range(20..=500),
        seed,
        labels: Some(labels[..n_labels].iter().map(|s| s.to_string()).collect()),
        class_attribute: "Class".into(),
    }
}

fn criterion_6() -> Outcome {
    let trials = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut pure_flagged = 0;
    for trial in 0..trials {
        let config = random_config(&mut rng, trial);
        let rate = rng.gen_range(0.0..=0.3);
        let (noisy, _) = inject_noise(&generate(&config).unwrap(), rate, trial).unwrap();
        let dynamic = detect_noise(&noisy, NoiseConfig::default()).unwrap();
        let baseline = detect_noise_baseline(&noisy, NoiseConfig::default()).unwrap();
        let base: BTreeSet<usize> = baseline.noise_ids.iter().copied().collect();
        let pure: BTreeSet<usize> = dynamic.partition.pure_ids().collect();
        if !dynamic.noise_ids.iter().all(|id| base.contains(id)) {
            violations += 1;
        }
        if dynamic.noise_ids.iter().any(|id| pure.contains(id)) {
            pure_flagged += 1;
        }
    }
    outcome(
        violations == 0 && pure_flagged == 0,
        format!("{trials} datasets, {violations} subset violations, {pure_flagged} with pure rows flagged"),
    )
}

fn call_rules() -> GeneratorConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/call_rules.json");
    GeneratorConfig::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn seeded_noisy(seed: u64) -> (noise_sieve::dataset::Dataset, noise_sieve::synth::NoiseInjection) {
    let mut config = call_rules();
    config.n = 500;
    config.seed = 1000 + seed;
    inject_noise(&generate(&config).unwrap(), 0.1, 7 + seed).unwrap()
}

fn criterion_7() -> Outcome {
    let mut wins = 0;
    let (mut rd, mut rb, mut pd, mut pb) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..20 {
        let (noisy, injection) = seeded_noisy(seed);
        let d = evaluate_detection(&detect_noise(&noisy, NoiseConfig::default()).unwrap(), &injection).unwrap();
        let b = evaluate_detection(&detect_noise_baseline(&noisy, NoiseConfig::default()).unwrap(), &injection).unwrap();
        if d.precision >= b.precision {
            wins += 1;
        }
        pd += d.precision / 20.0;
        pb += b.precision / 20.0;
        rd += d.recall / 20.0;
        rb += b.recall / 20.0;
    }
    outcome(
        wins > 10,
        format!(
            "dynamic precision >= baseline in {wins}/20; mean precision {pd:.3} vs {pb:.3}; mean recall {rd:.3} vs {rb:.3}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut wins = 0;
    let (mut fd, mut fn_) = (0.0, 0.0);
    for seed in 0..20 {
        let (noisy, _) = seeded_noisy(seed);
        let report = compare(
            &noisy,
            &CompareConfig {
                seed,
                ..CompareConfig::default()
            },
        )
        .unwrap();
        let dynamic = report.per_method[&FilterMode::Dynamic].averaged.f_measure;
        let none = report.per_method[&FilterMode::None].averaged.f_measure;
        if dynamic >= none {
            wins += 1;
        }
        fd += dynamic / 20.0;
        fn_ += none / 20.0;
    }
    outcome(
        wins >= 15,
        format!("dynamic F >= no filter in {wins}/20; mean F {fd:.4} vs {fn_:.4}"),
    )
}

fn criterion_9() -> Outcome {
    let ds = table1();
    let h = entropy(&[5, 4]).unwrap();
    let s = split_scores(&ds, "Location").unwrap();
    let model = NaiveBayesModel::fit(&ds).unwrap();
    let mut worst: f64 = 0.0;
    for attr in TABLE1_ATTRIBUTES {
        for label in ["Reject", "Accept"] {
            let total: f64 = model
                .values(attr)
                .unwrap()
                .map(|v| model.conditional(attr, v, label, SmoothingPolicy::laplace_always()).unwrap())
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    let pass = (h - 0.9911).abs() <= 1e-4
        && (s.info_gain - 0.3198).abs() <= 1e-4
        && (s.gain_ratio - 0.4185).abs() <= 1e-4
        && worst <= 1e-12;
    outcome(
        pass,
        format!(
            "entropy={h:.4} info_gain={:.4} gain_ratio={:.4} max |sum-1|={worst:.1e}",
            s.info_gain, s.gain_ratio
        ),
    )
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_noise-sieve");
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("synthetic.csv");
    let truth = dir.path().join("truth.json");
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/call_rules.json");
    let synth = Command::new(bin)
        .args(["synth", "--noise-rate", "0.1", "--seed", "7", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&data)
        .arg("--truth")
        .arg(&truth)
        .status()
        .unwrap();
    if !synth.success() {
        return outcome(false, "synth failed");
    }
    let run = || {
        Command::new(bin)
            .args(["compare", "--folds", "10", "--seed", "42", "--input"])
            .arg(&data)
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let pass = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(pass, format!("{} bytes, identical={}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("priors", criterion_1, Duration::from_secs(1)),
        ("conditionals", criterion_2, Duration::from_secs(1)),
        ("laplace example", criterion_3, Duration::from_secs(1)),
        ("dynamic threshold end to end", criterion_4, Duration::from_secs(60)),
        ("f-measure", criterion_5, Duration::from_secs(60)),
        ("subset property", criterion_6, Duration::from_secs(60)),
        ("oracle detection", criterion_7, Duration::from_secs(120)),
        ("downstream benefit", criterion_8, Duration::from_secs(600)),
        ("numerical checks", criterion_9, Duration::from_secs(60)),
        ("determinism", criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2}s / {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
