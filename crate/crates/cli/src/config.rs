//! Flat `key = value` experiment configuration.
//!
//! One experiment per file. Blank lines and lines starting with `#` are
//! skipped. Relative paths resolve against the directory holding the file.
//! Keys prefixed `info.` are ignored and keys prefixed `sha256.` pin the
//! checksum of the named input file, so a run manifest is itself a valid
//! config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use offd_core::dmd::HodmdConfig;
use offd_core::features::FeatureKind;
use offd_core::learn::ClassifierSpec;

use crate::error::CliError;

/// Input files a config may reference, in manifest order.
pub const PATH_KEYS: [&str; 6] = ["train", "test", "test_labels", "vectors", "precomputed", "stopwords"];

const KNOWN_KEYS: [&str; 16] = [
    "feature",
    "dmd_r_max",
    "dmd_sv_rel_tol",
    "rks_dim",
    "rks_sigma",
    "rks_seed",
    "classifier",
    "lambda",
    "C",
    "svm_epochs",
    "lr",
    "epochs",
    "l2",
    "var_floor",
    "seed",
    "out",
];

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_C: f64 = 1000.0;
pub const DEFAULT_SVM_EPOCHS: usize = 20;
pub const DEFAULT_LR: f64 = 0.1;
pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Median,
    Fixed(f64),
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Median => f.write_str("median"),
            Bandwidth::Fixed(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RksConfig {
    pub dim: usize,
    pub sigma: Bandwidth,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Rlsc,
    Svm,
    Logreg,
    Gnb,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Rlsc => "rlsc",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Gnb => "gnb",
        }
    }
}

/// Every classifier hyperparameter; only those of the chosen kind are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub lambda: f64,
    pub c: f64,
    pub svm_epochs: usize,
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub var_floor: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            lambda: DEFAULT_LAMBDA,
            c: DEFAULT_C,
            svm_epochs: DEFAULT_SVM_EPOCHS,
            lr: DEFAULT_LR,
            epochs: DEFAULT_EPOCHS,
            l2: DEFAULT_L2,
            var_floor: DEFAULT_VAR_FLOOR,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub test_labels: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub precomputed: Option<PathBuf>,
    /// Bundled English list when absent.
    pub stopwords: Option<PathBuf>,
    pub feature: FeatureKind,
    pub rks: Option<RksConfig>,
    pub classifier: ClassifierKind,
    pub hyper: Hyperparameters,
    pub out: PathBuf,
    /// Expected sha256 digests by path key.
    pub checksums: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: 0,
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Config { line, msg, .. } => CliError::Config {
                path: path.to_path_buf(),
                line,
                msg,
            },
            other => other,
        })
    }

    /// Parses config text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
        let mut checksums = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(lineno, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.starts_with("info.") {
                continue;
            }
            if let Some(target) = key.strip_prefix("sha256.") {
                if !PATH_KEYS.contains(&target) {
                    return Err(config_err(lineno, format!("checksum for unknown input `{target}`")));
                }
                checksums.insert(target.to_string(), value.to_ascii_lowercase());
                continue;
            }
            if !KNOWN_KEYS.contains(&key) && !PATH_KEYS.contains(&key) {
                return Err(config_err(lineno, format!("unknown key `{key}`")));
            }
            if raw.insert(key.to_string(), (lineno, value.to_string())).is_some() {
                return Err(config_err(lineno, format!("duplicate key `{key}`")));
            }
        }
        let keys = Keys { raw };

        let path = |keys: &Keys, key: &str| keys.take(key).map(|(_, v)| base.join(v));
        let train = path(&keys, "train").ok_or_else(|| config_err(0, "missing key `train`"))?;
        let test = path(&keys, "test").ok_or_else(|| config_err(0, "missing key `test`"))?;
        let test_labels = path(&keys, "test_labels");
        let vectors = path(&keys, "vectors");
        let precomputed = path(&keys, "precomputed");
        let stopwords = path(&keys, "stopwords");
        let out = path(&keys, "out").unwrap_or_else(|| base.join("out"));

        let (fline, fvalue) = keys.take("feature").ok_or_else(|| config_err(0, "missing key `feature`"))?;
        let order = parse_feature(&fvalue).ok_or_else(|| {
            config_err(fline, format!("feature must be avg, dmd, hodmd(d) or precomputed, got `{fvalue}`"))
        })?;
        let mut dmd = HodmdConfig::default();
        if let Some(v) = keys.parse::<usize>("dmd_r_max")? {
            dmd.max_rank = v;
        }
        if let Some(v) = keys.parse::<f64>("dmd_sv_rel_tol")? {
            dmd.sv_rel_tol = v;
        }
        let feature = match order {
            FeatureOrder::Average => FeatureKind::Average,
            FeatureOrder::Precomputed => FeatureKind::Precomputed,
            FeatureOrder::Dmd(order) => {
                dmd.order = order;
                dmd.validate().map_err(|e| config_err(fline, e.to_string()))?;
                FeatureKind::Dmd(dmd)
            }
        };
        match feature {
            FeatureKind::Precomputed if precomputed.is_none() => {
                return Err(config_err(fline, "feature `precomputed` needs key `precomputed`"))
            }
            FeatureKind::Average | FeatureKind::Dmd(_) if vectors.is_none() => {
                return Err(config_err(fline, format!("feature `{feature}` needs key `vectors`")))
            }
            _ => {}
        }

        let rks_dim = keys.parse::<usize>("rks_dim")?;
        let rks_sigma = keys.take("rks_sigma");
        let rks_seed = keys.parse::<u64>("rks_seed")?;
        let rks = match rks_dim {
            Some(dim) => {
                if dim == 0 || dim % 2 != 0 {
                    let line = keys.line("rks_dim");
                    return Err(config_err(line, format!("rks_dim must be even and positive, got {dim}")));
                }
                let sigma = match rks_sigma {
                    None => Bandwidth::Median,
                    Some((_, v)) if v == "median" => Bandwidth::Median,
                    Some((line, v)) => match v.parse::<f64>() {
                        Ok(s) if s > 0.0 && s.is_finite() => Bandwidth::Fixed(s),
                        _ => return Err(config_err(line, format!("rks_sigma must be `median` or positive, got `{v}`"))),
                    },
                };
                Some(RksConfig {
                    dim,
                    sigma,
                    seed: rks_seed.unwrap_or(0),
                })
            }
            None => {
                if let Some((line, _)) = rks_sigma {
                    return Err(config_err(line, "rks_sigma given without rks_dim"));
                }
                None
            }
        };

        let (cline, cvalue) = keys
            .take("classifier")
            .ok_or_else(|| config_err(0, "missing key `classifier`"))?;
        let classifier = match cvalue.as_str() {
            "rlsc" => ClassifierKind::Rlsc,
            "svm" => ClassifierKind::Svm,
            "logreg" => ClassifierKind::Logreg,
            "gnb" => ClassifierKind::Gnb,
            other => {
                return Err(config_err(cline, format!("classifier must be rlsc, svm, logreg or gnb, got `{other}`")))
            }
        };

        let mut hyper = Hyperparameters::default();
        macro_rules! set {
            ($field:ident, $key:literal, $ty:ty) => {
                if let Some(v) = keys.parse::<$ty>($key)? {
                    hyper.$field = v;
                }
            };
        }
        set!(lambda, "lambda", f64);
        set!(c, "C", f64);
        set!(svm_epochs, "svm_epochs", usize);
        set!(lr, "lr", f64);
        set!(epochs, "epochs", usize);
        set!(l2, "l2", f64);
        set!(var_floor, "var_floor", f64);
        set!(seed, "seed", u64);
        for (key, value) in [("lambda", hyper.lambda), ("C", hyper.c), ("lr", hyper.lr), ("var_floor", hyper.var_floor)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(config_err(keys.line(key), format!("{key} must be positive, got {value}")));
            }
        }
        if !(hyper.l2 >= 0.0 && hyper.l2.is_finite()) {
            return Err(config_err(keys.line("l2"), format!("l2 must be non-negative, got {}", hyper.l2)));
        }
        for (key, value) in [("svm_epochs", hyper.svm_epochs), ("epochs", hyper.epochs)] {
            if value == 0 {
                return Err(config_err(keys.line(key), format!("{key} must be positive")));
            }
        }

        for key in checksums.keys() {
            let present = match key.as_str() {
                "train" | "test" => true,
                "test_labels" => test_labels.is_some(),
                "vectors" => vectors.is_some(),
                "precomputed" => precomputed.is_some(),
                _ => stopwords.is_some(),
            };
            if !present {
                return Err(config_err(0, format!("checksum given for absent input `{key}`")));
            }
        }

        Ok(ExperimentConfig {
            train,
            test,
            test_labels,
            vectors,
            precomputed,
            stopwords,
            feature,
            rks,
            classifier,
            hyper,
            out,
            checksums,
        })
    }

    pub fn classifier_spec(&self) -> ClassifierSpec {
        let h = &self.hyper;
        match self.classifier {
            ClassifierKind::Rlsc => ClassifierSpec::Rlsc { lambda: h.lambda },
            ClassifierKind::Svm => ClassifierSpec::Svm {
                c: h.c,
                epochs: h.svm_epochs,
                seed: h.seed,
            },
            ClassifierKind::Logreg => ClassifierSpec::Logreg {
                lr: h.lr,
                epochs: h.epochs,
                l2: h.l2,
                seed: h.seed,
            },
            ClassifierKind::Gnb => ClassifierSpec::Gnb {
                var_floor: h.var_floor,
            },
        }
    }

    /// Input files in manifest order, with their keys.
    pub fn inputs(&self) -> Vec<(&'static str, &Path)> {
        let optional = [
            ("test_labels", &self.test_labels),
            ("vectors", &self.vectors),
            ("precomputed", &self.precomputed),
            ("stopwords", &self.stopwords),
        ];
        let mut out = vec![("train", self.train.as_path()), ("test", self.test.as_path())];
        out.extend(optional.into_iter().filter_map(|(k, p)| p.as_deref().map(|p| (k, p))));
        out
    }

    /// Config keys and values, in a fixed order, for the chosen feature and
    /// classifier only. Paths are written as given.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .inputs()
            .into_iter()
            .map(|(k, p)| (k.to_string(), p.display().to_string()))
            .collect();
        let mut push = |k: &str, v: String| out.push((k.to_string(), v));
        push("feature", self.feature.to_string());
        if let FeatureKind::Dmd(cfg) = self.feature {
            push("dmd_r_max", cfg.max_rank.to_string());
            push("dmd_sv_rel_tol", cfg.sv_rel_tol.to_string());
        }
        if let Some(rks) = &self.rks {
            push("rks_dim", rks.dim.to_string());
            push("rks_sigma", rks.sigma.to_string());
            push("rks_seed", rks.seed.to_string());
        }
        let h = &self.hyper;
        push("classifier", self.classifier.as_str().to_string());
        match self.classifier {
            ClassifierKind::Rlsc => push("lambda", h.lambda.to_string()),
            ClassifierKind::Svm => {
                push("C", h.c.to_string());
                push("svm_epochs", h.svm_epochs.to_string());
            }
            ClassifierKind::Logreg => {
                push("lr", h.lr.to_string());
                push("epochs", h.epochs.to_string());
                push("l2", h.l2.to_string());
            }
            ClassifierKind::Gnb => push("var_floor", h.var_floor.to_string()),
        }
        push("seed", h.seed.to_string());
        out
    }
}

enum FeatureOrder {
    Average,
    Precomputed,
    Dmd(usize),
}

fn parse_feature(value: &str) -> Option<FeatureOrder> {
    match value {
        "avg" => Some(FeatureOrder::Average),
        "precomputed" => Some(FeatureOrder::Precomputed),
        "dmd" => Some(FeatureOrder::Dmd(1)),
        _ => {
            let inner = value.strip_prefix("hodmd(")?.strip_suffix(')')?;
            inner.trim().parse().ok().filter(|d| *d >= 1).map(FeatureOrder::Dmd)
        }
    }
}

fn config_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config {
        path: PathBuf::new(),
        line,
        msg: msg.into(),
    }
}

struct Keys {
    raw: BTreeMap<String, (usize, String)>,
}

impl Keys {
    fn take(&self, key: &str) -> Option<(usize, String)> {
        self.raw.get(key).cloned()
    }

    fn line(&self, key: &str) -> usize {
        self.raw.get(key).map_or(0, |(l, _)| *l)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(line, format!("invalid value `{v}` for `{key}`"))),
        }
    }
}

/// Parses a comma-separated list of positive numbers.
pub fn parse_list<T>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T: std::str::FromStr + PartialOrd + Default + Copy,
{
    let values: Vec<T> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .ok()
                .filter(|v| *v > T::default())
                .ok_or_else(|| CliError::Usage(format!("{what}: `{}` is not a positive number", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what}: empty list")));
    }
    Ok(values)
}
