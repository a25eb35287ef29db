//! Run configuration: defaults, key=value files, and the JSON run report.
//!
//! A config file is flat `key = value` text, one pair per line, `#` starts
//! a comment. The recognized keys are exactly the fields of [`RunConfig`].
//! Command-line flags override file values, which override the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationReport;
use crate::error::{Error, Result};
use crate::loss::Loss;
use crate::mlp::Architecture;
use crate::trainer::{BatchSize, EpochStats, RunSummary, TrainConfig};

/// Every tunable of a training run.
///
/// `t` and `M` only matter when `loss = "square"`. `hidden` is the list of
/// hidden-layer widths; empty means a linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub loss: String,
    pub t: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub bins_k: usize,
    pub standardize: bool,
    pub shuffle: bool,
}

impl Default for RunConfig {
    /// Defaults sized for small tabular problems: a 64-128-64 network
    /// under SGD with learning rate 0.01 and weight decay 5e-4 for 400
    /// epochs, full batch up to 5000 samples.
    fn default() -> Self {
        RunConfig {
            loss: "squentropy".into(),
            t: 1.0,
            m: 1.0,
            lr: 0.01,
            weight_decay: 5e-4,
            epochs: 400,
            batch_size: BatchSize::Auto,
            seed: 0,
            hidden: vec![64, 128, 64],
            bins_k: 15,
            standardize: true,
            shuffle: true,
        }
    }
}

/// Parses `"64,128,64"` into widths; `"none"` or the empty string mean no
/// hidden layers.
pub fn parse_hidden(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() || s == "none" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::InvalidArgument(format!(
                    "hidden widths must be positive integers, got \"{part}\""
                ))),
                Ok(w) => Ok(w),
            }
        })
        .collect()
}

impl RunConfig {
    /// The documented spiral protocol: three hidden layers of 12 units
    /// under SGD, learning rate 0.005, no weight decay, minibatches of
    /// 16, 1000 epochs, standardized coordinates.
    ///
    /// On the noise-free spiral drawn with data seed 1, this protocol
    /// with run seed 2 reaches 100% train and test accuracy for all
    /// three losses. Larger learning rates tend to kill the small ReLU
    /// network on this task (it collapses to predicting one class), and
    /// noise makes perfect training accuracy unattainable because the
    /// two arms meet at the origin.
    pub fn spiral_defaults() -> Self {
        RunConfig {
            lr: 0.005,
            weight_decay: 0.0,
            epochs: 1000,
            batch_size: BatchSize::Size(16),
            hidden: vec![12, 12, 12],
            ..RunConfig::default()
        }
    }

    /// Applies one `key = value` pair. Unknown keys and unparsable values
    /// are config errors.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |key: &str, value: &str, want: &str| {
            Error::Config(format!("key \"{key}\": cannot parse \"{value}\" as {want}"))
        };
        match key {
            "loss" => self.loss = value.to_string(),
            "t" => self.t = value.parse().map_err(|_| bad(key, value, "a number"))?,
            "M" => self.m = value.parse().map_err(|_| bad(key, value, "a number"))?,
            "lr" => self.lr = value.parse().map_err(|_| bad(key, value, "a number"))?,
            "weight_decay" => {
                self.weight_decay = value.parse().map_err(|_| bad(key, value, "a number"))?
            }
            "epochs" => self.epochs = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "batch_size" => {
                self.batch_size =
                    BatchSize::parse(value).map_err(|e| Error::Config(e.to_string()))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "hidden" => self.hidden = parse_hidden(value).map_err(|e| Error::Config(e.to_string()))?,
            "bins_k" => self.bins_k = value.parse().map_err(|_| bad(key, value, "an integer"))?,
            "standardize" => {
                self.standardize = value.parse().map_err(|_| bad(key, value, "true or false"))?
            }
            "shuffle" => {
                self.shuffle = value.parse().map_err(|_| bad(key, value, "true or false"))?
            }
            other => {
                return Err(Error::Config(format!("unknown key \"{other}\"")));
            }
        }
        Ok(())
    }

    /// Reads a config file on top of `self`.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected key = value, got \"{line}\"",
                    path.display(),
                    idx + 1
                ))
            })?;
            self.apply_kv(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("{}:{}: {e}", path.display(), idx + 1))
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = RunConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    /// Sanity checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        Loss::from_name(&self.loss, self.t, self.m)?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "lr must be positive and finite, got {}",
                self.lr
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight_decay must be non-negative and finite, got {}",
                self.weight_decay
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.bins_k == 0 {
            return Err(Error::Config("bins_k must be at least 1".into()));
        }
        Ok(())
    }

    /// Builds the trainer-facing config for a dataset with `input_dim`
    /// features and `classes` classes.
    pub fn to_train_config(&self, input_dim: usize, classes: usize) -> Result<TrainConfig> {
        self.validate()?;
        Ok(TrainConfig {
            arch: Architecture::new(input_dim, self.hidden.clone(), classes)?,
            loss: Loss::from_name(&self.loss, self.t, self.m)?,
            learning_rate: self.lr,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            shuffle: self.shuffle,
        })
    }

    /// Copy with `batch_size` pinned to what `n` samples resolve it to,
    /// for echoing into reports.
    pub fn resolved_for(&self, n: usize) -> RunConfig {
        RunConfig {
            batch_size: self.batch_size.resolve(n),
            ..self.clone()
        }
    }
}

/// Full record of one training run, written as `report.json`.
///
/// `runtime_seconds` is optional and off by default: with it omitted,
/// rerunning the same config on the same data produces byte-identical
/// reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub history: Vec<EpochStats>,
    pub test_accuracy: f64,
    pub calibration_report: CalibrationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

/// Record of a seed sweep, written as `sweep_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: RunConfig,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        RunConfig::spiral_defaults().validate().unwrap();
    }

    #[test]
    fn kv_parsing_covers_every_key() {
        let mut c = RunConfig::default();
        for (k, v) in [
            ("loss", "square"),
            ("t", "15"),
            ("M", "30"),
            ("lr", "0.2"),
            ("weight_decay", "0"),
            ("epochs", "10"),
            ("batch_size", "64"),
            ("seed", "9"),
            ("hidden", "4,4"),
            ("bins_k", "10"),
            ("standardize", "false"),
            ("shuffle", "false"),
        ] {
            c.apply_kv(k, v).unwrap();
        }
        assert_eq!(c.loss, "square");
        assert_eq!(c.t, 15.0);
        assert_eq!(c.m, 30.0);
        assert_eq!(c.batch_size, BatchSize::Size(64));
        assert_eq!(c.hidden, vec![4, 4]);
        assert!(!c.standardize);
        assert!(!c.shuffle);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut c = RunConfig::default();
        let e = c.apply_kv("momentum", "0.9").unwrap_err();
        assert!(e.to_string().contains("momentum"), "got {e}");
    }

    #[test]
    fn config_file_round_trip_with_comments() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            "# spiral protocol\nloss = cross-entropy\nlr = 0.05   # step size\n\nepochs = 1000\nbatch_size = full\nhidden = 12,12,12\n"
        )
        .unwrap();
        let c = RunConfig::from_file(f.path()).unwrap();
        assert_eq!(c.loss, "cross-entropy");
        assert_eq!(c.lr, 0.05);
        assert_eq!(c.epochs, 1000);
        assert_eq!(c.batch_size, BatchSize::Full);
        assert_eq!(c.hidden, vec![12, 12, 12]);
        assert_eq!(c.weight_decay, 5e-4, "untouched keys keep their defaults");
    }

    #[test]
    fn config_file_errors_name_the_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "lr = 0.1\nnot a pair\n").unwrap();
        let e = RunConfig::from_file(f.path()).unwrap_err();
        assert!(e.to_string().contains(":2:"), "got {e}");
    }

    #[test]
    fn hidden_list_parsing() {
        assert_eq!(parse_hidden("64,128,64").unwrap(), vec![64, 128, 64]);
        assert_eq!(parse_hidden(" 12 , 12 ").unwrap(), vec![12, 12]);
        assert_eq!(parse_hidden("none").unwrap(), Vec::<usize>::new());
        assert_eq!(parse_hidden("").unwrap(), Vec::<usize>::new());
        assert!(parse_hidden("12,0").is_err());
        assert!(parse_hidden("12,x").is_err());
    }

    #[test]
    fn validate_rejects_nonsense() {
        let mut c = RunConfig::default();
        c.lr = -1.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.loss = "hinge".into();
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.loss = "square".into();
        c.t = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.bins_k = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_echo_uses_documented_key_names() {
        let c = RunConfig {
            loss: "square".into(),
            t: 1.0,
            m: 5.0,
            batch_size: BatchSize::Full,
            ..RunConfig::default()
        };
        let json = serde_json::to_value(&c).unwrap();
        let obj = json.as_object().unwrap();
        for key in [
            "loss",
            "t",
            "M",
            "lr",
            "weight_decay",
            "epochs",
            "batch_size",
            "seed",
            "hidden",
            "bins_k",
            "standardize",
            "shuffle",
        ] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
        assert_eq!(obj.len(), 12, "exactly the documented keys");
        assert_eq!(obj["M"], 5.0);
        assert_eq!(obj["batch_size"], "full");
        let back: RunConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn auto_batch_resolves_in_the_echo() {
        let c = RunConfig::default();
        assert_eq!(c.resolved_for(1000).batch_size, BatchSize::Full);
        assert_eq!(c.resolved_for(60_000).batch_size, BatchSize::Size(128));
        let json = serde_json::to_value(c.resolved_for(60_000)).unwrap();
        assert_eq!(json["batch_size"], 128);
    }
}
