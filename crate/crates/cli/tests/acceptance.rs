//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every line is printed. Exits nonzero
//! if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use offd_cli::config::ExperimentConfig;
use offd_cli::pipeline::{run_experiment, run_sweep, score};
use offd_core::corpus::{Label, LabeledCorpus, Split, TweetRecord};
use offd_core::dmd::{build_snapshots, compute_dmd, predict_state, DmdDecomposition, HodmdConfig, C64};
use offd_core::embed::EmbeddingSequence;
use offd_core::eval::{format_percent, MetricsReport};
use offd_core::learn::{
    logistic_gradient, logistic_objective, svm_objective, train_linear_svm, train_rlsc, ClassifierSpec,
    FeatureMatrix, LinearHyper, LinearModel, Model,
};
use offd_core::rks::{gaussian_kernel, median_heuristic_sigma, RksMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("degenerate-row reproduction", degenerate_row),
        ("RKS kernel approximation", kernel_approximation),
        ("RKS exactness invariants", rks_exactness),
        ("DMD oracle", dmd_oracle),
        ("HODMD necessity witness", hodmd_witness),
        ("solver oracles", solver_oracles),
        ("XOR lift", xor_lift),
        ("determinism", determinism),
        ("trend reproduction", trend),
        ("end-to-end smoke", smoke),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mini_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

// 1 -------------------------------------------------------------------------

fn constant_not_report(off: usize, not: usize) -> MetricsReport {
    let records: Vec<TweetRecord> = (0..off + not)
        .map(|i| TweetRecord {
            id: i.to_string(),
            text: String::new(),
            label: Some(if i < off { Label::Off } else { Label::Not }),
        })
        .collect();
    let corpus = LabeledCorpus {
        records,
        split: Split::Test,
    };
    let mut features = FeatureMatrix::new(1);
    for r in &corpus.records {
        features.push_row(r.id.clone(), &[0.0]).unwrap();
    }
    let model = Model::Linear(LinearModel {
        weights: vec![0.0],
        bias: -1.0,
        hyper: LinearHyper::Rlsc { lambda: 1.0 },
        rks: None,
    });
    score(&model, &features, &corpus).unwrap()
}

fn degenerate_row() -> Check {
    let start = Instant::now();
    // the 860-tweet test set: 620 NOT and 240 OFF
    let r = constant_not_report(240, 620);
    let elapsed = start.elapsed();
    let got = [r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1];
    let want = [72.09, 36.05, 50.00, 41.89];
    for ((g, w), name) in got.iter().zip(want).zip(["acc", "prec", "recall", "f1"]) {
        ensure((g - w).abs() <= 0.01 && format_percent(*g) == format!("{w:.2}"), || {
            format!("{name} {g} vs {w}")
        })?;
    }
    within(elapsed, Duration::from_secs(1))?;
    let alt = constant_not_report(280, 620);
    Ok(format!(
        "620 NOT / 240 OFF -> {} / {} / {} / {} (a 620/280 split would give {} / {} / {} / {})",
        format_percent(r.accuracy),
        format_percent(r.macro_precision),
        format_percent(r.macro_recall),
        format_percent(r.macro_f1),
        format_percent(alt.accuracy),
        format_percent(alt.macro_precision),
        format_percent(alt.macro_recall),
        format_percent(alt.macro_f1),
    ))
}

// 2 -------------------------------------------------------------------------

fn kernel_approximation() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..100).map(|_| (normal_vec(&mut rng, 50), normal_vec(&mut rng, 50))).collect();
    let sample: Vec<&[f64]> = pairs.iter().flat_map(|(x, y)| [x.as_slice(), y.as_slice()]).collect();
    let sigma = median_heuristic_sigma(&sample, 0).map_err(|e| e.to_string())?;
    let mean_error = |dim: usize, seed: u64| {
        let map = RksMap::sample(50, dim, sigma, seed).unwrap();
        pairs
            .iter()
            .map(|(x, y)| (map.approx_kernel(x, y).unwrap() - gaussian_kernel(x, y, sigma)).abs())
            .sum::<f64>()
            / pairs.len() as f64
    };
    let seeds = 0..10u64;
    let coarse = seeds.clone().map(|s| mean_error(400, s)).sum::<f64>() / 10.0;
    let fine = seeds.map(|s| mean_error(4000, s)).sum::<f64>() / 10.0;
    let elapsed = start.elapsed();
    ensure(fine <= 0.05, || format!("mean error {fine:.4} at D = 4000"))?;
    ensure(fine <= coarse, || format!("D = 4000 error {fine:.4} above D = 400 error {coarse:.4}"))?;
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("sigma {sigma:.3}, mean error {coarse:.4} at D = 400, {fine:.4} at D = 4000"))
}

// 3 -------------------------------------------------------------------------

fn rks_exactness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let map = RksMap::sample(7, 256, 1.3, 11).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let scale = 10f64.powi(i % 7 - 3);
        let x: Vec<f64> = normal_vec(&mut rng, 7).iter().map(|v| v * scale).collect();
        let z = map.transform(&x).unwrap();
        worst = worst.max((dot(&z, &z).sqrt() - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("norm deviation {worst:e}"))?;
    let z0 = map.transform(&[0.0; 7]).unwrap();
    let k = map.frequencies();
    let closed: Vec<f64> = (0..2 * k).map(|j| if j < k { (1.0 / k as f64).sqrt() } else { 0.0 }).collect();
    let diff = z0.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(diff <= 1e-15, || format!("Z(0) differs from closed form by {diff:e}"))?;
    Ok(format!("max | |Z(x)| - 1 | = {worst:.1e} over 1000 points, Z(0) exact"))
}

// 4, 5 ----------------------------------------------------------------------

/// Orthonormal basis from Gram-Schmidt on random vectors.
fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < n {
        let mut v = normal_vec(rng, n);
        for b in &basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn decompose(states: &[Vec<f64>], order: usize) -> (DmdDecomposition, usize) {
    let seq = EmbeddingSequence::from_columns(states[0].len(), states).unwrap();
    let snap = build_snapshots(&seq, order).unwrap();
    let len = snap.len();
    (compute_dmd(&snap, &HodmdConfig::with_order(order)).unwrap(), len)
}

/// Largest distance between the leading block of the reconstructed stacked
/// state and the observed state, with the largest state norm.
fn reconstruction_error(states: &[Vec<f64>], order: usize) -> (f64, f64) {
    let (dec, len) = decompose(states, order);
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (k, x) in states.iter().enumerate().take(len + 1) {
        let est = predict_state(&dec, k);
        let d: f64 = x.iter().enumerate().map(|(i, v)| (est[i] - C64::from(*v)).norm_sqr()).sum();
        err = err.max(d.sqrt());
        scale = scale.max(dot(x, x).sqrt());
    }
    (err, scale)
}

fn dmd_oracle() -> Check {
    let start = Instant::now();
    let spectrum = [0.9, 0.7, 0.5, 0.3, 0.1];
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let q = random_rotation(&mut rng, 5);
    // A = sum_j lambda_j q_j q_j'
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; 5];
        for (lambda, qj) in spectrum.iter().zip(&q) {
            let c = lambda * dot(qj, x);
            out.iter_mut().zip(qj).for_each(|(o, v)| *o += c * v);
        }
        out
    };
    let mut states = vec![normal_vec(&mut rng, 5)];
    while states.len() < 12 {
        let next = apply(states.last().unwrap());
        states.push(next);
    }
    let (dec, _) = decompose(&states, 1);
    let mut eig: Vec<C64> = dec.eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re));
    ensure(eig.len() == 5, || format!("rank {}", eig.len()))?;
    let eig_err = eig.iter().zip(spectrum).map(|(g, w)| (g - C64::from(w)).norm()).fold(0.0, f64::max);
    ensure(eig_err < 1e-8, || format!("eigenvalue error {eig_err:e}"))?;
    let (err, scale) = reconstruction_error(&states, 1);
    ensure(err <= 1e-6 * scale, || format!("reconstruction error {err:e} vs scale {scale:.3}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("eigenvalue error {eig_err:.1e}, reconstruction {:.1e} of scale", err / scale))
}

fn hodmd_witness() -> Check {
    let states: Vec<Vec<f64>> = (0..10).map(|k| vec![if k % 2 == 0 { 1.0 } else { 3.0 }]).collect();
    let (err2, scale) = reconstruction_error(&states, 2);
    let (err1, _) = reconstruction_error(&states, 1);
    ensure(err2 < 1e-6, || format!("d = 2 error {err2:e}"))?;
    ensure(err1 >= 0.1 * scale, || format!("d = 1 error {err1:.3} below 0.1 x {scale}"))?;
    Ok(format!("d = 2 error {err2:.1e}, d = 1 error {:.2} of scale", err1 / scale))
}

// 6 -------------------------------------------------------------------------

fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Projected gradient ascent on the SVM dual, then the best bias for the
/// recovered weights. Returns the primal objective and the dual value.
fn reference_svm(rows: &[Vec<f64>], y: &[f64], c: f64) -> (Vec<f64>, f64, f64) {
    let n = rows.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * dot(&rows[i], &rows[j])).collect()).collect();
    let step = 1.0 / (0..n).map(|i| q[i][i]).sum::<f64>();
    let project = |v: &[f64]| -> Vec<f64> {
        let clip = |tau: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - tau * yi).clamp(0.0, c)).collect() };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dot(&clip(mid), y) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        clip(0.5 * (lo + hi))
    };
    let mut alpha = vec![0.0; n];
    for _ in 0..200_000 {
        let moved: Vec<f64> = (0..n).map(|i| alpha[i] + step * (1.0 - dot(&q[i], &alpha))).collect();
        let next = project(&moved);
        let change = next.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        alpha = next;
        if change < 1e-13 {
            break;
        }
    }
    let dual = alpha.iter().sum::<f64>() - 0.5 * (0..n).map(|i| alpha[i] * dot(&q[i], &alpha)).sum::<f64>();
    let mut w = vec![0.0; rows[0].len()];
    for i in 0..n {
        w.iter_mut().zip(&rows[i]).for_each(|(wk, x)| *wk += alpha[i] * y[i] * x);
    }
    let hinge = |b: f64| rows.iter().zip(y).map(|(r, yi)| (1.0 - yi * (dot(r, &w) + b)).max(0.0)).sum::<f64>();
    let b = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| yi - dot(r, &w))
        .min_by(|a, b| hinge(*a).total_cmp(&hinge(*b)))
        .unwrap();
    (w, b, dual)
}

fn solver_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    // RLSC against the normal equations with a bias column
    let rows: Vec<Vec<f64>> = (0..20).map(|_| normal_vec(&mut rng, 5)).collect();
    let labels: Vec<Label> = (0..20).map(|i| if i % 3 == 0 { Label::Off } else { Label::Not }).collect();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let lambda = 0.1;
    let f = FeatureMatrix::from_rows(5, &rows).unwrap();
    let model = train_rlsc(&f, &labels, lambda).map_err(|e| e.to_string())?;
    let aug: Vec<Vec<f64>> = rows.iter().map(|r| [r.as_slice(), &[1.0]].concat()).collect();
    let mut gram = vec![vec![0.0; 6]; 6];
    let mut rhs = vec![0.0; 6];
    for (r, t) in aug.iter().zip(&y) {
        for i in 0..6 {
            rhs[i] += r[i] * t;
            for j in 0..6 {
                gram[i][j] += r[i] * r[j];
            }
        }
    }
    (0..6).for_each(|i| gram[i][i] += lambda);
    let oracle = dense_solve(gram, rhs);
    let rlsc_err = model
        .weights
        .iter()
        .chain([&model.bias])
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(rlsc_err <= 1e-8, || format!("RLSC weights off by {rlsc_err:e}"))?;

    // logistic gradient against central differences
    let h = 1e-5;
    let mut grad_err: f64 = 0.0;
    for _ in 0..10 {
        let params = normal_vec(&mut rng, 6);
        let grad = logistic_gradient(&f, &labels, &params, 0.05);
        let fd: Vec<f64> = (0..6)
            .map(|j| {
                let mut p = params.clone();
                p[j] += h;
                let up = logistic_objective(&f, &labels, &p, 0.05);
                p[j] -= 2.0 * h;
                (up - logistic_objective(&f, &labels, &p, 0.05)) / (2.0 * h)
            })
            .collect();
        let num: f64 = grad.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        grad_err = grad_err.max(num / dot(&fd, &fd).sqrt());
    }
    ensure(grad_err <= 1e-5, || format!("logistic gradient relative error {grad_err:e}"))?;

    // SVM objective against a converged dual solver
    let mut pts = Vec::new();
    let mut svm_labels = Vec::new();
    for i in 0..50 {
        let label = if i % 2 == 0 { Label::Off } else { Label::Not };
        let s = 0.8 * label.sign();
        pts.push(vec![s + rng.sample::<f64, _>(StandardNormal), 0.5 * s + rng.sample::<f64, _>(StandardNormal)]);
        svm_labels.push(label);
    }
    let ys: Vec<f64> = svm_labels.iter().map(|l| l.sign()).collect();
    let fs = FeatureMatrix::from_rows(2, &pts).unwrap();
    let mut worst_ratio: f64 = 0.0;
    for c in [0.1, 1.0] {
        let (w, b, dual) = reference_svm(&pts, &ys, c);
        let reference = svm_objective(&fs, &svm_labels, &w, b, c);
        ensure((reference - dual) / reference < 1e-6, || format!("reference not converged at C = {c}"))?;
        let m = train_linear_svm(&fs, &svm_labels, c, 2000, 7).map_err(|e| e.to_string())?;
        let got = svm_objective(&fs, &svm_labels, &m.weights, m.bias, c);
        worst_ratio = worst_ratio.max(got / reference);
    }
    ensure(worst_ratio <= 1.01, || format!("SVM objective ratio {worst_ratio:.5}"))?;
    Ok(format!(
        "RLSC {rlsc_err:.1e}, logistic gradient {grad_err:.1e}, SVM objective ratio {worst_ratio:.6}"
    ))
}

// 7 -------------------------------------------------------------------------

fn xor_lift() -> Check {
    let f = FeatureMatrix::from_rows(2, &[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
    let labels = [Label::Not, Label::Not, Label::Off, Label::Off];
    let accuracy = |spec: &ClassifierSpec, map: Option<RksMap>| {
        let model = spec.train_lifted(&f, &labels, map).unwrap();
        let preds = model.predict(&f).unwrap();
        preds.iter().zip(&labels).filter(|(p, l)| p.label == **l).count() as f64 / 4.0
    };
    let raw = [
        ClassifierSpec::Rlsc { lambda: 1e-3 },
        ClassifierSpec::Svm { c: 1000.0, epochs: 200, seed: 1 },
        ClassifierSpec::Logreg { lr: 0.1, epochs: 500, l2: 1e-4, seed: 1 },
    ];
    let mut raw_best: f64 = 0.0;
    for spec in &raw {
        let acc = accuracy(spec, None);
        ensure(acc <= 0.75, || format!("raw {} reaches {acc}", spec.name()))?;
        raw_best = raw_best.max(acc);
    }
    let rows: Vec<&[f64]> = f.row_iter().collect();
    let sigma = median_heuristic_sigma(&rows, 0).map_err(|e| e.to_string())?;
    let rlsc = ClassifierSpec::Rlsc { lambda: 1e-3 };
    for dim in [100, 1000] {
        for seed in 0..10 {
            let map = RksMap::sample(2, dim, sigma, seed).unwrap();
            let acc = accuracy(&rlsc, Some(map));
            ensure(acc == 1.0, || format!("D = {dim}, seed {seed}: {acc}"))?;
        }
    }
    Ok(format!("raw linear models at most {:.0}%, RLSC on RKS 100% for 10/10 seeds at D = 100 and 1000", 100.0 * raw_best))
}

// 8 -------------------------------------------------------------------------

fn mini_config(dir: &Path, name: &str, body: &str) -> ExperimentConfig {
    let mini = mini_dir();
    let text = format!(
        "train = {0}/train.tsv\ntest = {0}/test.tsv\ntest_labels = {0}/test_labels.csv\nvectors = {0}/toy.vec\nprecomputed = {0}/encoder.txt\nout = {1}\n{body}",
        mini.display(),
        dir.join(name).display()
    );
    let path = dir.join(format!("{name}.conf"));
    fs::write(&path, text).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bodies = [
        "feature = hodmd(2)\nrks_dim = 200\nrks_seed = 5\nclassifier = svm\nseed = 9\n",
        "feature = precomputed\nrks_dim = 100\nclassifier = logreg\nseed = 2\n",
    ];
    let files = ["report.tsv", "report.txt", "manifest.txt", "model.offd", "sweep_C.csv"];
    for (i, body) in bodies.iter().enumerate() {
        let a = mini_config(tmp.path(), &format!("a{i}"), body);
        let b = mini_config(tmp.path(), &format!("b{i}"), body);
        run_experiment(&a, Some(&[0.1, 1.0, 1000.0])).map_err(|e| e.to_string())?;
        run_experiment(&b, Some(&[0.1, 1.0, 1000.0])).map_err(|e| e.to_string())?;
        for name in files {
            let x = fs::read(a.out.join(name)).map_err(|e| e.to_string())?;
            let y = fs::read(b.out.join(name)).map_err(|e| e.to_string())?;
            ensure(x == y, || format!("{name} differs between runs of config {i}"))?;
        }
    }
    Ok(format!("2 configs x 2 runs, {} files byte-identical", files.len()))
}

// 9 -------------------------------------------------------------------------

/// Two informative coordinates with a periodic product boundary, padded
/// with uniform nuisance coordinates and balanced at the median score.
/// Written as an OLID corpus with precomputed sentence vectors.
fn checker_corpus(dir: &Path, n: usize, n_train: usize, dim: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let score = |p: &[f64]| (3.0 * p[0]).sin() * (3.0 * p[1]).sin();
    let mut sorted: Vec<f64> = points.iter().map(|p| score(p)).collect();
    sorted.sort_by(f64::total_cmp);
    let threshold = 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    let mut train = String::from("id\ttweet\tsubtask_a\n");
    let mut test = String::from("id\ttweet\n");
    let mut labels = String::new();
    let mut vectors = String::new();
    for (i, p) in points.iter().enumerate() {
        let label = if score(p) > threshold { "OFF" } else { "NOT" };
        let id = format!("s{i}");
        if i < n_train {
            train.push_str(&format!("{id}\tpoint {i}\t{label}\n"));
        } else {
            test.push_str(&format!("{id}\tpoint {i}\n"));
            labels.push_str(&format!("{id},{label}\n"));
        }
        let values: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        vectors.push_str(&format!("{id} {}\n", values.join(" ")));
    }
    fs::write(dir.join("train.tsv"), train).unwrap();
    fs::write(dir.join("test.tsv"), test).unwrap();
    fs::write(dir.join("test_labels.csv"), labels).unwrap();
    fs::write(dir.join("vectors.txt"), vectors).unwrap();
    dir.to_path_buf()
}

fn trend() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = checker_corpus(tmp.path(), 2000, 1500, 6, 99);
    let mut rows = Vec::new();
    for rks_seed in 1..=3 {
        let config = dir.join(format!("trend{rks_seed}.conf"));
        fs::write(
            &config,
            format!(
                "train = train.tsv\ntest = test.tsv\ntest_labels = test_labels.csv\nprecomputed = vectors.txt\n\
                 feature = precomputed\nrks_dim = 100\nrks_seed = {rks_seed}\nclassifier = rlsc\nlambda = 10\n\
                 out = out{rks_seed}\n"
            ),
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&config).map_err(|e| e.to_string())?;
        let outcome = run_sweep(&cfg, None, Some(&[100, 1000])).map_err(|e| e.to_string())?;
        let dims = outcome.dims.ok_or("no dimension sweep")?;
        let (small, large) = (dims[0].1.accuracy, dims[1].1.accuracy);
        ensure(large - small >= 2.0, || {
            format!("RKS seed {rks_seed}: accuracy {small:.2} at D = 100, {large:.2} at D = 1000")
        })?;
        rows.push(format!("{} -> {}", format_percent(small), format_percent(large)));
    }
    Ok(format!("test accuracy D = 100 -> D = 1000 for RKS seeds 1..3: {}", rows.join(", ")))
}

// 10 ------------------------------------------------------------------------

fn check_report(text: &str) -> Result<(), String> {
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.len() == 2 && lines[0] == "name\tacc\tprec\trecall\tf1", || format!("bad report {text:?}"))?;
    let fields: Vec<&str> = lines[1].split('\t').collect();
    ensure(fields.len() == 5, || format!("row {:?}", lines[1]))?;
    for v in &fields[1..] {
        let x: f64 = v.parse().map_err(|_| format!("value {v:?}"))?;
        ensure((0.0..=100.0).contains(&x) && v.split('.').nth(1).map(str::len) == Some(2), || format!("value {v:?}"))?;
    }
    Ok(())
}

fn smoke() -> Check {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut accuracies = Vec::new();
    for feature in ["avg", "dmd", "hodmd(2)", "precomputed"] {
        for classifier in ["rlsc", "svm", "logreg", "gnb"] {
            let name = format!("{}-{classifier}", feature.replace(['(', ')'], ""));
            let cfg = mini_config(tmp.path(), &name, &format!("feature = {feature}\nclassifier = {classifier}\n"));
            let outcome = run_experiment(&cfg, None).map_err(|e| format!("{name}: {e}"))?;
            let report = fs::read_to_string(cfg.out.join("report.tsv")).map_err(|e| e.to_string())?;
            check_report(&report).map_err(|e| format!("{name}: {e}"))?;
            accuracies.push(outcome.report.accuracy);
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    let lo = accuracies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = accuracies.iter().copied().fold(0.0, f64::max);
    Ok(format!("16 runs, accuracy {} to {}", format_percent(lo), format_percent(hi)))
}
