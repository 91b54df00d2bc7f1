//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, TAU};
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use qkstrat::clustering::{spectral_cluster, SpectralConfig};
use qkstrat::encoding::{build_feature_map, Family, FeatureMapConfig, FeatureMatrix};
use qkstrat::kernels::{gram_exact, gram_rbf, gram_sampled, RbfConfig};
use qkstrat::metrics::{
    ami, entropy, expected_mi, mutual_information, silhouette, DistanceMatrix, Partition,
};
use qkstrat::pipeline::{
    make_blobs, run_noise_comparison, run_sample_complexity, Dataset, ExperimentRecord, FeatureFamily,
    SampleSize, SweepConfig,
};
use qkstrat::seed;
use qkstrat::sim::{circuit_stats, Circuit, NoiseConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const BETAS: [f64; 5] = [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2, PI, TAU];

fn uniform(n: usize, d: usize, hi: f64, seed: u64) -> FeatureMatrix {
    let mut rng = seed::rng(seed);
    FeatureMatrix::from_fn(n, d, |_, _| rng.random_range(0.0..=hi))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant, detail: String, ok: bool) -> Outcome {
    let took = start.elapsed();
    let detail = format!(
        "{detail}; {:.2}s (limit {:.0}s)",
        took.as_secs_f64(),
        limit.as_secs_f64()
    );
    check(ok && took < limit, detail)
}

fn closed_form_kernel() -> Outcome {
    let start = Instant::now();
    let x = uniform(100, 4, TAU, 1);
    let config = FeatureMapConfig::new(Family::Z, 4, TAU).with_reps(1);
    let k = gram_exact(&config, &x).map_err(|e| e.to_string())?;
    let mut rng = seed::rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (i, j) = (rng.random_range(0..100), rng.random_range(0..100));
        let expected: f64 = (0..4).map(|q| (x[(i, q)] - x[(j, q)]).cos().powi(2)).product();
        worst = worst.max((k.get(i, j) - expected).abs());
    }
    within(
        Duration::from_secs(1),
        start,
        format!("max deviation {worst:.2e} (tol 1e-10)"),
        worst <= 1e-10,
    )
}

fn gram_validity() -> Outcome {
    let start = Instant::now();
    let mut worst_eig = f64::INFINITY;
    let mut failures = Vec::new();
    for (fi, family) in Family::ALL.into_iter().enumerate() {
        for (bi, &beta) in BETAS.iter().enumerate() {
            let x = uniform(30, 4, beta, 100 + (fi * 10 + bi) as u64);
            let k = gram_exact(&FeatureMapConfig::new(family, 4, beta), &x).map_err(|e| e.to_string())?;
            let m = k.entries();
            let symmetric = m == &m.transpose();
            let unit_diag = (0..30).all(|i| m[(i, i)] == 1.0);
            let in_range = m.iter().all(|v| (0.0..=1.0).contains(v));
            let eig = k.min_eigenvalue();
            worst_eig = worst_eig.min(eig);
            if !(symmetric && unit_diag && in_range && eig >= -1e-8) {
                failures.push(format!("{family} beta={beta:.3}"));
            }
        }
    }
    within(
        Duration::from_secs(30),
        start,
        format!("15 Grams, min eigenvalue {worst_eig:.2e}, failing: {failures:?}"),
        failures.is_empty(),
    )
}

/// Plug-in MI straight from the joint label frequencies.
fn direct_mi(u: &[usize], v: &[usize]) -> f64 {
    let n = u.len() as f64;
    let mut joint = std::collections::HashMap::new();
    let mut pu = std::collections::HashMap::new();
    let mut pv = std::collections::HashMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *joint.entry((a, b)).or_insert(0.0) += 1.0 / n;
        *pu.entry(a).or_insert(0.0) += 1.0 / n;
        *pv.entry(b).or_insert(0.0) += 1.0 / n;
    }
    joint
        .iter()
        .map(|(&(a, b), &p)| p * (p / (pu[&a] * pv[&b])).ln())
        .sum()
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = seed::rng(3);
    let instances: Vec<(Vec<usize>, Vec<usize>)> = vec![
        (vec![0, 0, 1, 1], vec![0, 1, 1, 2]),
        (
            (0..10).map(|_| rng.random_range(0..3)).collect(),
            (0..10).map(|_| rng.random_range(0..4)).collect(),
        ),
        (
            (0..20).map(|_| rng.random_range(0..4)).collect(),
            (0..20).map(|_| rng.random_range(0..3)).collect(),
        ),
    ];
    let perms = 100_000;
    let mut details = Vec::new();
    let mut ok = true;
    for (u, v) in &instances {
        let (pu, pv) = (Partition::new(u), Partition::new(v));
        let mi = mutual_information(&pu, &pv).map_err(|e| e.to_string())?;
        ok &= (mi - direct_mi(u, v)).abs() <= 1e-12;
        let mut shuffled = v.clone();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..perms {
            shuffled.shuffle(&mut rng);
            let s = direct_mi(u, &shuffled);
            sum += s;
            sum_sq += s * s;
        }
        let mean = sum / perms as f64;
        let se = ((sum_sq / perms as f64 - mean * mean).max(0.0) / perms as f64).sqrt();
        let emi = expected_mi(&pu, &pv).map_err(|e| e.to_string())?;
        let h = entropy(&pu).max(entropy(&pv));
        let ami_mc = (mi - mean) / (h - mean);
        let ami_se = (h - mi).abs() / (h - mean).powi(2) * se;
        let a = ami(&pu, &pv).map_err(|e| e.to_string())?;
        let emi_ok = (emi - mean).abs() <= 3.0 * se + 1e-12;
        let ami_ok = (a - ami_mc).abs() <= 3.0 * ami_se + 1e-12;
        ok &= emi_ok && ami_ok;
        details.push(format!(
            "N={} EMI {emi:.5} vs {mean:.5}±{se:.1e}, AMI {a:.4} vs {ami_mc:.4}±{ami_se:.1e}",
            u.len()
        ));
    }
    let u: Vec<usize> = (0..500).map(|_| rng.random_range(0..5)).collect();
    let self_ami = ami(&Partition::new(&u), &Partition::new(&u)).map_err(|e| e.to_string())?;
    ok &= self_ami == 1.0;
    let mut total = 0.0;
    for _ in 0..50 {
        let a: Vec<usize> = (0..500).map(|_| rng.random_range(0..5)).collect();
        let b: Vec<usize> = (0..500).map(|_| rng.random_range(0..5)).collect();
        total += ami(&Partition::new(&a), &Partition::new(&b))
            .map_err(|e| e.to_string())?
            .abs();
    }
    let mean_abs = total / 50.0;
    ok &= mean_abs <= 0.02;
    details.push(format!("AMI(U,U)={self_ami}, mean |AMI(random)|={mean_abs:.4}"));
    within(Duration::from_secs(120), start, details.join("; "), ok)
}

fn brute_silhouette(d: &DistanceMatrix, labels: &[usize]) -> f64 {
    let n = labels.len();
    let clusters: std::collections::BTreeSet<usize> = labels.iter().copied().collect();
    let mut total = 0.0;
    for i in 0..n {
        let mean_to = |c: usize| {
            let members: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == c).collect();
            members.iter().map(|&j| d.get(i, j)).sum::<f64>() / members.len() as f64
        };
        if labels.iter().filter(|&&l| l == labels[i]).count() == 1 {
            continue;
        }
        let a = mean_to(labels[i]);
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| mean_to(c))
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

fn euclidean(points: &[Vec<f64>]) -> DistanceMatrix {
    let n = points.len();
    DistanceMatrix::from_entries(FeatureMatrix::from_fn(n, n, |i, j| {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }))
    .expect("valid distances")
}

fn silhouette_oracle() -> Outcome {
    let line = euclidean(&[vec![0.0], vec![1.0], vec![4.0], vec![5.0]]);
    let four = silhouette(&line, &Partition::new(&[0, 0, 1, 1]))
        .map_err(|e| e.to_string())?
        .sc;
    let mut ok = (four - 47.0 / 63.0).abs() <= 1e-15;
    let mut rng = seed::rng(4);
    let pts: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
        .collect();
    let labels = [0, 1, 2, 0, 1, 2, 0, 1, 2, 2];
    let d = euclidean(&pts);
    let ten = silhouette(&d, &Partition::new(&labels))
        .map_err(|e| e.to_string())?
        .sc;
    let ten_ref = brute_silhouette(&d, &labels);
    ok &= (ten - ten_ref).abs() <= 1e-15;
    let mut out_of_range = 0;
    for t in 0..100 {
        let n = rng.random_range(3..40);
        let k = rng.random_range(2..=n.min(6));
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..2).map(|_| rng.random::<f64>()).collect())
            .collect();
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        labels.shuffle(&mut rng);
        let sc = silhouette(&euclidean(&pts), &Partition::new(&labels))
            .map_err(|e| format!("instance {t}: {e}"))?
            .sc;
        if !(-1.0..=1.0).contains(&sc) {
            out_of_range += 1;
        }
    }
    ok &= out_of_range == 0;
    check(
        ok,
        format!("4-point {four:.15} (exact 47/63), 10-point {ten:.15} vs {ten_ref:.15}, {out_of_range}/100 outside [-1,1]"),
    )
}

fn clustering_recovery() -> Outcome {
    let start = Instant::now();
    let mut amis = Vec::new();
    for s in 0..5 {
        let (data, planted) = make_blobs(100, 3, 4, 10.0, 1.0, s).map_err(|e| e.to_string())?;
        let k = gram_rbf(&data.features, &RbfConfig::default()).map_err(|e| e.to_string())?;
        let labels = spectral_cluster(&k, &SpectralConfig::new(3, s)).map_err(|e| e.to_string())?;
        amis.push(ami(&labels.partition(), &planted).map_err(|e| e.to_string())?);
    }
    let worst = amis.iter().copied().fold(f64::INFINITY, f64::min);
    within(
        Duration::from_secs(10),
        start,
        format!("AMI per seed {amis:.3?}"),
        worst >= 0.95,
    )
}

fn shot_convergence() -> Outcome {
    let start = Instant::now();
    let config = FeatureMapConfig::new(Family::ZZFull, 4, FRAC_PI_2);
    let x = uniform(20, 4, FRAC_PI_2, 6);
    let exact = gram_exact(&config, &x).map_err(|e| e.to_string())?;
    let shots = [2048u32, 8192, 32768];
    let mut errors = Vec::new();
    for &s in &shots {
        let mut total = 0.0;
        let reps = 4;
        for r in 0..reps {
            let k = gram_sampled(&config, &x, &NoiseConfig::noiseless(s), r).map_err(|e| e.to_string())?;
            total += (k.entries() - exact.entries()).abs().sum() / (20.0 * 19.0);
        }
        errors.push(total / reps as f64);
    }
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let ok = ratios.iter().all(|r| (1.6..=2.5).contains(r));
    within(
        Duration::from_secs(300),
        start,
        format!(
            "mean |error| {:.2e}/{:.2e}/{:.2e} at shots {shots:?}, ratios {ratios:.3?}",
            errors[0], errors[1], errors[2]
        ),
        ok,
    )
}

fn blob_dataset(n: usize, seed: u64) -> Result<Dataset, String> {
    let per = n.div_ceil(3);
    let (data, _) = make_blobs(per, 3, 4, 10.0, 1.0, seed).map_err(|e| e.to_string())?;
    let rows: Vec<usize> = (0..n).collect();
    Ok(Dataset {
        ids: data.ids[..n].to_vec(),
        features: data.features.select_rows(&rows),
    })
}

fn mean_by_family(
    records: &[ExperimentRecord],
    family: FeatureFamily,
    pick: fn(&ExperimentRecord) -> Option<f64>,
) -> Option<f64> {
    let vals: Vec<f64> = records
        .iter()
        .filter(|r| r.feature_map == family)
        .filter_map(pick)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

fn noise_ordering() -> Outcome {
    let start = Instant::now();
    let data = blob_dataset(50, 7)?;
    let config = SweepConfig {
        feature_families: Family::ALL.iter().map(|&f| FeatureFamily::Quantum(f)).collect(),
        seeds: vec![0, 1, 2],
        noise: Some(NoiseConfig {
            p2: 0.01,
            shots: 8192,
            ..NoiseConfig::default()
        }),
        noise_subset_size: 50,
        ..SweepConfig::default()
    };
    let out = run_noise_comparison(&data, &config).map_err(|e| e.to_string())?;
    let mean =
        |f| mean_by_family(&out.records, FeatureFamily::Quantum(f), |r| r.ami_vs_ideal).unwrap_or(f64::NAN);
    let (z, lin, full) = (mean(Family::Z), mean(Family::ZZLinear), mean(Family::ZZFull));
    let detail = format!(
        "mean AMI(noisy, ideal) Z {z:.4}, ZZLinear {lin:.4}, ZZFull {full:.4}; {} records, {} failures; {:.1}s",
        out.records.len(),
        out.failures.len(),
        start.elapsed().as_secs_f64()
    );
    check(z >= lin && z >= full && out.failures.is_empty(), detail)
}

fn sample_complexity() -> Outcome {
    let start = Instant::now();
    let data = blob_dataset(1000, 8)?;
    let config = SweepConfig {
        feature_families: vec![FeatureFamily::Rbf, FeatureFamily::Quantum(Family::Z)],
        sample_sizes: vec![SampleSize::Count(250)],
        ..SweepConfig::default()
    };
    let out = run_sample_complexity(&data, &config, None).map_err(|e| e.to_string())?;
    let rbf = mean_by_family(&out.records, FeatureFamily::Rbf, |r| r.ami_vs_full);
    let z = mean_by_family(&out.records, FeatureFamily::Quantum(Family::Z), |r| r.ami_vs_full);
    let ok = rbf.is_some_and(|a| a >= 0.8) && z.is_some_and(|a| a >= 0.8);
    let detail = format!(
        "mean AMI at N'=250: RBF {rbf:.4?}, Z {z:.4?}; {} records over configurations with SC >= 0.3; {:.1}s",
        out.records.len(),
        start.elapsed().as_secs_f64()
    );
    check(ok, detail)
}

fn circuit_statistics() -> Outcome {
    let zero = [0.0; 4];
    let mut ok = true;
    let mut lines = Vec::new();
    for reps in 1..=3 {
        let mut depths = Vec::new();
        for (family, per_rep) in [(Family::Z, 0), (Family::ZZLinear, 6), (Family::ZZFull, 12)] {
            let u = build_feature_map(&FeatureMapConfig::new(family, 4, PI).with_reps(reps), &zero)
                .map_err(|e| e.to_string())?;
            let single = circuit_stats(&u);
            let pair = circuit_stats(&Circuit::overlap(&u, &u).map_err(|e| e.to_string())?);
            ok &= single.two_qubit_count == per_rep * reps && pair.two_qubit_count == 2 * per_rep * reps;
            depths.push(single.depth);
            lines.push(format!(
                "{family} r{reps}: CX {}/{}",
                single.two_qubit_count, pair.two_qubit_count
            ));
        }
        ok &= depths[0] < depths[1] && depths[1] < depths[2];
    }
    check(ok, lines.join(", "))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("qkstrat-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    let bin = env!("CARGO_BIN_EXE_qkstrat");
    let run = |args: &[&str]| -> Result<(), String> {
        let status = Command::new(bin)
            .args(args)
            .env("RUST_LOG", "warn")
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() {
            Ok(())
        } else {
            Err(format!("qkstrat {args:?} exited with {status}"))
        }
    };
    let d = dir.to_str().ok_or("non-UTF-8 temp dir")?;
    run(&[
        "gen-blobs",
        "--out",
        &format!("{d}/data"),
        "--seed",
        "11",
        "--n-per-cluster",
        "20",
    ])?;
    fs::write(dir.join("config.json"), r#"{"k_range": [2, 6], "seeds": [3]}"#).map_err(|e| e.to_string())?;
    for out in ["a", "b"] {
        run(&[
            "sweep",
            "--input",
            &format!("{d}/data/blobs.csv"),
            "--config",
            &format!("{d}/config.json"),
            "--out",
            &format!("{d}/{out}"),
            "--seed",
            "5",
        ])?;
    }
    let a = fs::read(dir.join("a/records.csv")).map_err(|e| e.to_string())?;
    let b = fs::read(dir.join("b/records.csv")).map_err(|e| e.to_string())?;
    let rows = a.iter().filter(|&&c| c == b'\n').count().saturating_sub(1);
    let _ = fs::remove_dir_all(&dir);
    check(
        a == b && rows == 16 * 5,
        format!("{rows} rows, {} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed-form Z kernel", closed_form_kernel),
        ("Gram validity", gram_validity),
        ("metric oracles", metric_oracles),
        ("silhouette oracle", silhouette_oracle),
        ("clustering recovery", clustering_recovery),
        ("shot convergence", shot_convergence),
        ("noise-susceptibility ordering", noise_ordering),
        ("sample-complexity plateau", sample_complexity),
        ("circuit statistics", circuit_statistics),
        ("sweep determinism", determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
