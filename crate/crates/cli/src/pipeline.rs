//! Loading, featurizing, training, evaluating and writing run artifacts.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use offd_core::corpus::{load_olid_tsv, tokenize_clean, LabeledCorpus, Split, Stopwords};
use offd_core::embed::{load_precomputed, load_vec_table, PrecomputedTable, WordVectorTable};
use offd_core::eval::{
    macro_metrics, render_report, sweep_control_parameter, sweep_csv, ConfusionMatrix, MetricsReport,
    SweepPoint,
};
use offd_core::features::{FeatureKind, Featurize, Featurizer};
use offd_core::learn::{save_model, FeatureMatrix, Model};
use offd_core::rks::{median_heuristic_sigma, RksMap, PRNG_ALGORITHM};
use sha2::{Digest, Sha256};

use crate::config::{Bandwidth, ExperimentConfig, RksConfig};
use crate::error::{CliError, CoreContext};

pub const REPORT_TSV: &str = "report.tsv";
pub const REPORT_TXT: &str = "report.txt";
pub const MODEL_FILE: &str = "model.offd";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SWEEP_C_FILE: &str = "sweep_C.csv";
pub const SWEEP_DIM_TSV: &str = "sweep_dim.tsv";
pub const SWEEP_DIM_TXT: &str = "sweep_dim.txt";
pub const SWEEP_MANIFEST_FILE: &str = "sweep_manifest.txt";

/// A loaded input file.
#[derive(Debug, Clone)]
pub struct InputFile {
    pub key: &'static str,
    pub path: PathBuf,
    pub sha256: String,
}

/// Corpora and tables referenced by a config, read once and checksummed.
#[derive(Debug)]
pub struct Inputs {
    pub train: LabeledCorpus,
    pub test: LabeledCorpus,
    pub stopwords: Stopwords,
    pub vectors: Option<WordVectorTable>,
    pub precomputed: Option<PrecomputedTable>,
    pub files: Vec<InputFile>,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let mut files = Vec::new();
        let mut bytes = std::collections::HashMap::new();
        for (key, path) in cfg.inputs() {
            let data = fs::read(path).map_err(|e| CliError::io(path, e))?;
            let path = fs::canonicalize(path).map_err(|e| CliError::io(path, e))?;
            let sha256 = hex::encode(Sha256::digest(&data));
            if let Some(expected) = cfg.checksums.get(key) {
                if *expected != sha256 {
                    return Err(CliError::Checksum {
                        path,
                        expected: expected.clone(),
                        found: sha256,
                    });
                }
            }
            bytes.insert(key, data);
            files.push(InputFile { key, path, sha256 });
        }
        let path_of = |key: &str| {
            files
                .iter()
                .find(|f| f.key == key)
                .map(|f| f.path.display().to_string())
                .unwrap_or_default()
        };

        let stopwords = match bytes.get("stopwords") {
            Some(data) => Stopwords::from_reader(&data[..]).during(path_of("stopwords"))?,
            None => Stopwords::english(),
        };
        let train = load_olid_tsv(&bytes["train"][..], None::<&[u8]>, Split::Train).during(path_of("train"))?;
        let test = load_olid_tsv(
            &bytes["test"][..],
            bytes.get("test_labels").map(|b| &b[..]),
            Split::Test,
        )
        .during(format!("{} with labels {}", path_of("test"), path_of("test_labels")))?;

        let vectors = match (cfg.feature, bytes.get("vectors")) {
            (FeatureKind::Average | FeatureKind::Dmd(_), Some(data)) => {
                let vocabulary: HashSet<String> = train
                    .records
                    .iter()
                    .chain(&test.records)
                    .flat_map(|r| tokenize_clean(&r.text, &stopwords).tokens)
                    .collect();
                Some(load_vec_table(&data[..], Some(&vocabulary)).during(path_of("vectors"))?)
            }
            _ => None,
        };
        let precomputed = match (cfg.feature, bytes.get("precomputed")) {
            (FeatureKind::Precomputed, Some(data)) => {
                Some(load_precomputed(&data[..]).during(path_of("precomputed"))?)
            }
            _ => None,
        };
        Ok(Inputs {
            train,
            test,
            stopwords,
            vectors,
            precomputed,
            files,
        })
    }

    pub fn featurizer(&self, kind: FeatureKind) -> Featurizer<'_> {
        Featurizer {
            kind,
            stopwords: &self.stopwords,
            vectors: self.vectors.as_ref(),
            precomputed: self.precomputed.as_ref(),
        }
    }

    pub fn corpus(&self, split: Split) -> &LabeledCorpus {
        match split {
            Split::Test => &self.test,
            _ => &self.train,
        }
    }
}

/// Resolves the kernel bandwidth, drawing the median heuristic from
/// training features only, and samples the map.
pub fn fit_rks(rks: &RksConfig, train: &FeatureMatrix) -> Result<RksMap, CliError> {
    let sigma = resolve_sigma(rks, train)?;
    RksMap::sample(train.cols(), rks.dim, sigma, rks.seed).during("sampling kitchen sink map")
}

fn resolve_sigma(rks: &RksConfig, train: &FeatureMatrix) -> Result<f64, CliError> {
    match rks.sigma {
        Bandwidth::Fixed(s) => Ok(s),
        Bandwidth::Median => {
            let rows: Vec<&[f64]> = train.row_iter().collect();
            median_heuristic_sigma(&rows, rks.seed).during("median heuristic on training features")
        }
    }
}

/// Scores already-featurized test rows against gold labels.
pub fn score(model: &Model, features: &FeatureMatrix, corpus: &LabeledCorpus) -> Result<MetricsReport, CliError> {
    let gold = corpus.labels().during("test labels")?;
    let predicted = model.predict(features).during("predicting test corpus")?;
    let cm = ConfusionMatrix::from_pairs(gold, predicted.iter().map(|p| p.label)).during("scoring")?;
    macro_metrics(&cm).during("scoring test corpus")
}

pub fn run_name(cfg: &ExperimentConfig) -> String {
    let mut name = format!("{}+{}", cfg.feature, cfg.classifier.as_str());
    if let Some(rks) = &cfg.rks {
        let _ = write!(name, "+rks({})", rks.dim);
    }
    name
}

/// What a run produced, with the files it wrote.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: String,
    pub report: MetricsReport,
    pub rendered: String,
    pub sweep: Option<Vec<SweepPoint>>,
    pub written: Vec<PathBuf>,
}

/// Runs one experiment end to end. Artifacts are written only after every
/// stage has succeeded.
pub fn run_experiment(cfg: &ExperimentConfig, sweep_c: Option<&[f64]>) -> Result<RunOutcome, CliError> {
    let inputs = Inputs::load(cfg)?;
    let featurizer = inputs.featurizer(cfg.feature);
    let train_x = featurizer.featurize(&inputs.train).during("featurizing training corpus")?;
    let labels = inputs.train.labels().during("training labels")?;
    let map = cfg.rks.as_ref().map(|rks| fit_rks(rks, &train_x)).transpose()?;
    let spec = cfg.classifier_spec();
    let model = spec
        .train_lifted(&train_x, &labels, map.clone())
        .during(format!("training {}", spec.name()))?;

    let test_x = featurizer.featurize(&inputs.test).during("featurizing test corpus")?;
    let report = score(&model, &test_x, &inputs.test)?;
    let name = run_name(cfg);
    let rendered = render_report(&[(name.clone(), report)]);

    let sweep = match sweep_c {
        Some(values) => Some(
            sweep_control_parameter(
                &inputs.train,
                &inputs.test,
                &featurizer,
                values,
                cfg.hyper.svm_epochs,
                cfg.hyper.seed,
                map.as_ref(),
            )
            .during("sweeping C")?,
        ),
        None => None,
    };

    let mut model_bytes = Vec::new();
    save_model(&model, &mut model_bytes).during("encoding model")?;
    let mut extra = Vec::new();
    if let Some(values) = sweep_c {
        extra.push(("info.sweep_C".to_string(), join(values)));
    }
    let manifest = manifest(cfg, &inputs, train_x.cols(), map.as_ref(), &extra);

    let mut files = vec![
        (REPORT_TSV, rendered.tsv.into_bytes()),
        (REPORT_TXT, rendered.text.clone().into_bytes()),
        (MODEL_FILE, model_bytes),
        (MANIFEST_FILE, manifest.into_bytes()),
    ];
    if let Some(points) = &sweep {
        files.push((SWEEP_C_FILE, sweep_csv(points).into_bytes()));
    }
    let written = write_atomically(&cfg.out, &files)?;
    Ok(RunOutcome {
        name,
        report,
        rendered: rendered.text,
        sweep,
        written,
    })
}

/// Results of `C` and kitchen-sink dimension sweeps.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub c: Option<Vec<SweepPoint>>,
    pub dims: Option<Vec<(usize, MetricsReport)>>,
    pub written: Vec<PathBuf>,
}

/// Trains the configured classifier once per kitchen-sink dimension, with
/// the bandwidth and seed fixed across dimensions.
pub fn sweep_dimensions(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    dims: &[usize],
) -> Result<Vec<(usize, MetricsReport)>, CliError> {
    let featurizer = inputs.featurizer(cfg.feature);
    let train_x = featurizer.featurize(&inputs.train).during("featurizing training corpus")?;
    let labels = inputs.train.labels().during("training labels")?;
    let base = sweep_rks(cfg);
    let sigma = resolve_sigma(&base, &train_x)?;
    let spec = cfg.classifier_spec();
    let test_x = featurizer.featurize(&inputs.test).during("featurizing test corpus")?;
    dims.iter()
        .map(|&dim| {
            if dim % 2 != 0 {
                return Err(CliError::Usage(format!("--sweep-dim: {dim} is odd")));
            }
            let map = RksMap::sample(train_x.cols(), dim, sigma, base.seed).during("sampling kitchen sink map")?;
            let model = spec
                .train_lifted(&train_x, &labels, Some(map))
                .during(format!("training {} at D = {dim}", spec.name()))?;
            Ok((dim, score(&model, &test_x, &inputs.test)?))
        })
        .collect()
}

fn sweep_rks(cfg: &ExperimentConfig) -> RksConfig {
    cfg.rks.unwrap_or(RksConfig {
        dim: 0,
        sigma: Bandwidth::Median,
        seed: 0,
    })
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    c_values: Option<&[f64]>,
    dims: Option<&[usize]>,
) -> Result<SweepOutcome, CliError> {
    if c_values.is_none() && dims.is_none() {
        return Err(CliError::Usage("sweep needs --sweep-C and/or --sweep-dim".into()));
    }
    let inputs = Inputs::load(cfg)?;
    let featurizer = inputs.featurizer(cfg.feature);
    let train_x = featurizer.featurize(&inputs.train).during("featurizing training corpus")?;
    let rks = sweep_rks(cfg);
    let sigma = match cfg.rks.is_some() || dims.is_some() {
        true => Some(resolve_sigma(&rks, &train_x)?),
        false => None,
    };
    let mut files = Vec::new();
    let mut extra = Vec::new();

    let c = match c_values {
        Some(values) => {
            let map = match (&cfg.rks, sigma) {
                (Some(rks), Some(sigma)) => Some(
                    RksMap::sample(train_x.cols(), rks.dim, sigma, rks.seed).during("sampling kitchen sink map")?,
                ),
                _ => None,
            };
            let points = sweep_control_parameter(
                &inputs.train,
                &inputs.test,
                &featurizer,
                values,
                cfg.hyper.svm_epochs,
                cfg.hyper.seed,
                map.as_ref(),
            )
            .during("sweeping C")?;
            files.push((SWEEP_C_FILE, sweep_csv(&points).into_bytes()));
            extra.push(("info.sweep_C".to_string(), join(values)));
            Some(points)
        }
        None => None,
    };

    let dim_results = match dims {
        Some(dims) => {
            let results = sweep_dimensions(cfg, &inputs, dims)?;
            let rows: Vec<(String, MetricsReport)> =
                results.iter().map(|(d, r)| (format!("D={d}"), *r)).collect();
            let rendered = render_report(&rows);
            files.push((SWEEP_DIM_TSV, rendered.tsv.into_bytes()));
            files.push((SWEEP_DIM_TXT, rendered.text.into_bytes()));
            extra.push(("info.sweep_dim".to_string(), join(dims)));
            Some(results)
        }
        None => None,
    };

    let mut manifest_cfg = cfg.clone();
    if let (None, Some(dims)) = (cfg.rks, dims) {
        // the dimension list stands in for a single D
        manifest_cfg.rks = Some(RksConfig { dim: dims[0], ..rks });
    }
    let manifest = manifest_text(&manifest_cfg, &inputs, train_x.cols(), sigma, &extra);
    files.push((SWEEP_MANIFEST_FILE, manifest.into_bytes()));
    let written = write_atomically(&cfg.out, &files)?;
    Ok(SweepOutcome {
        c,
        dims: dim_results,
        written,
    })
}

/// Writes one `id v1 ... v_dim` line per tweet of `split`, in corpus order.
pub fn export_features<W: Write>(cfg: &ExperimentConfig, split: Split, sink: &mut W) -> Result<usize, CliError> {
    let inputs = Inputs::load(cfg)?;
    let features = inputs
        .featurizer(cfg.feature)
        .featurize(inputs.corpus(split))
        .during(format!("featurizing {split} corpus"))?;
    let text = feature_lines(&features);
    sink.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<feature sink>"), e))?;
    Ok(features.rows())
}

/// Shortest round-trip decimal text, so the dump reloads exactly.
pub fn feature_lines(features: &FeatureMatrix) -> String {
    let mut out = String::new();
    for (id, row) in features.ids().iter().zip(features.row_iter()) {
        out.push_str(id);
        for v in row {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

fn manifest(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    input_dim: usize,
    map: Option<&RksMap>,
    extra: &[(String, String)],
) -> String {
    manifest_text(cfg, inputs, input_dim, map.map(RksMap::sigma), extra)
}

/// Config-format record of a run: every seed, hyperparameter, resolved
/// bandwidth and input checksum. Contains no timestamps or output paths.
fn manifest_text(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
    input_dim: usize,
    sigma: Option<f64>,
    extra: &[(String, String)],
) -> String {
    let mut resolved = cfg.clone();
    if let (Some(rks), Some(s)) = (resolved.rks.as_mut(), sigma) {
        rks.sigma = Bandwidth::Fixed(s);
    }
    let mut info = vec![
        ("info.version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("info.input_dim".to_string(), input_dim.to_string()),
    ];
    if let FeatureKind::Dmd(d) = cfg.feature {
        info.push(("info.d".into(), d.order.to_string()));
    }
    if let Some(rks) = &cfg.rks {
        info.push(("info.D".into(), rks.dim.to_string()));
        info.push(("info.rks_sigma_source".into(), rks.sigma.to_string()));
        info.push(("info.prng".into(), PRNG_ALGORITHM.to_string()));
    }
    for (corpus, tag) in [(&inputs.train, "train"), (&inputs.test, "test")] {
        let (off, not) = corpus.label_counts();
        info.push((format!("info.{tag}_size"), corpus.len().to_string()));
        info.push((format!("info.{tag}_off"), off.to_string()));
        info.push((format!("info.{tag}_not"), not.to_string()));
    }
    info.extend_from_slice(extra);

    let mut out = String::from("# offd manifest\n");
    for (k, v) in &info {
        let _ = writeln!(out, "{k} = {v}");
    }
    for (k, v) in resolved.entries() {
        let value = match inputs.files.iter().find(|f| f.key == k) {
            Some(file) => file.path.display().to_string(),
            None => v,
        };
        let _ = writeln!(out, "{k} = {value}");
        if let Some(file) = inputs.files.iter().find(|f| f.key == k) {
            let _ = writeln!(out, "sha256.{k} = {}", file.sha256);
        }
    }
    out
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Stages every file next to its destination, then renames them into
/// place. On failure the staged files are removed and nothing is renamed.
pub fn write_atomically(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    for (name, data) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, data) {
            let _ = fs::remove_file(&tmp);
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(CliError::io(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::new();
    for (tmp, dest) in staged {
        fs::rename(&tmp, &dest).map_err(|e| CliError::io(&dest, e))?;
        written.push(dest);
    }
    Ok(written)
}
