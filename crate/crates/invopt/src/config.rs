//! Run configuration: a TOML file with nested sections, every key
//! overridable by a command-line flag (flags win).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{Day, DayRange};
use crate::trainer::HyperGrid;
use crate::{Error, Result};

/// Model parameters shared by every command.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Demand-forecast clip multiplier.
    pub n_c: f64,
    /// Residual clip multiplier.
    pub n_u: f64,
    /// Buffer added to the lead time for the initial sampling window.
    pub b_usw: i64,
    /// Minimum initial sampling-window length in days.
    pub l_min_usw: i64,
    /// Realizations per lifting iteration.
    pub n_realizations: u32,
    /// Realizations in the order-simulation step.
    pub n_os: u32,
    /// Days between reorder-parameter recomputations.
    pub frequency: i64,
    /// Lifting iteration cap.
    pub max_iterations: u32,
    /// Reporting percentile over realizations (0.5 = median).
    pub aggregation_percentile: f64,
}

impl Default for ModelParams {
    fn default() -> ModelParams {
        ModelParams {
            n_c: 5.0,
            n_u: 1.0,
            b_usw: 14,
            l_min_usw: 30,
            n_realizations: 100,
            n_os: 10,
            frequency: 30,
            max_iterations: 10,
            aggregation_percentile: 0.5,
        }
    }
}

/// Which SKUs a command touches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkuSelection {
    All,
    Listed(Vec<String>),
}

impl SkuSelection {
    pub fn parse(raw: &str) -> SkuSelection {
        if raw.trim().eq_ignore_ascii_case("all") {
            SkuSelection::All
        } else {
            SkuSelection::Listed(
                raw.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
            )
        }
    }

    pub fn includes(&self, sku: &str) -> bool {
        match self {
            SkuSelection::All => true,
            SkuSelection::Listed(list) => list.iter().any(|s| s == sku),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_root: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub skus: SkuSelection,
    pub training: Option<DayRange>,
    pub validation: Option<DayRange>,
    pub operation_date: Option<Day>,
    pub grid: HyperGrid,
    pub model: ModelParams,
    /// Fleet parallelism bound; 0 = one worker per core.
    pub jobs: usize,
    pub dump_uncertainties: bool,
    pub dump_kiter: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if let (Some(t), Some(v)) = (self.training, self.validation) {
            if t.end > v.start {
                return Err(Error::Config(format!(
                    "training period {t} must precede the validation period {v}"
                )));
            }
        }
        if let (Some(v), Some(op)) = (self.validation, self.operation_date) {
            if op < v.end - 1 {
                return Err(Error::Config(format!(
                    "operation date {op} precedes the validation period end {}",
                    v.end
                )));
            }
        }
        for (name, range) in [("training", self.training), ("validation", self.validation)] {
            if let Some(r) = range {
                if r.is_empty() {
                    return Err(Error::Config(format!("{name} period {r} is empty")));
                }
            }
        }
        Ok(())
    }

    pub fn training_period(&self) -> Result<DayRange> {
        self.training
            .ok_or_else(|| Error::Config("no training period configured".into()))
    }

    pub fn validation_period(&self) -> Result<DayRange> {
        self.validation
            .ok_or_else(|| Error::Config("no validation period configured".into()))
    }
}

// --- raw TOML shape -----------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub run: RunSection,
    pub periods: PeriodsSection,
    pub grid: GridSection,
    pub model: ModelParams,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub skus: Option<String>,
    pub jobs: Option<usize>,
    pub dump_uncertainties: Option<bool>,
    pub dump_kiter: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodsSection {
    pub training_start: Option<String>,
    pub training_end: Option<String>,
    pub validation_start: Option<String>,
    pub validation_end: Option<String>,
    pub operation_date: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// SLP candidates as fractions in [0,1].
    pub slp: Option<Vec<f64>>,
    /// STP candidates as fractions in [0,1].
    pub stp: Option<Vec<f64>>,
}

impl FileConfig {
    /// Parse a TOML config file; parse errors carry line/column positions.
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Parse an optional half-open period from optional ISO date strings.
pub fn parse_period(
    name: &str,
    start: Option<&str>,
    end: Option<&str>,
) -> Result<Option<DayRange>> {
    match (start, end) {
        (Some(s), Some(e)) => {
            let range = DayRange::new(Day::from_iso(s)?, Day::from_iso(e)?);
            if range.is_empty() {
                return Err(Error::Config(format!("{name} period {range} is empty")));
            }
            Ok(Some(range))
        }
        (None, None) => Ok(None),
        _ => Err(Error::Config(format!(
            "{name} period needs both a start and an end date"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_with_all_sections() {
        let text = r#"
[run]
data = "data"
out = "out"
seed = 7
skus = "SKU-001,SKU-002"
jobs = 2

[periods]
training_start = "2018-06-01"
training_end = "2020-03-01"
validation_start = "2020-04-01"
validation_end = "2020-10-01"
operation_date = "2020-10-01"

[grid]
slp = [0.5, 0.7, 0.9, 0.925, 0.95]
stp = [0.0]

[model]
n_c = 5.0
n_u = 1.0
b_usw = 14
l_min_usw = 30
n_realizations = 100
n_os = 10
frequency = 30
max_iterations = 10
aggregation_percentile = 0.5
"#;
        let cfg: FileConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.run.seed, Some(7));
        assert_eq!(cfg.model.frequency, 30);
        assert_eq!(cfg.grid.slp.unwrap().len(), 5);
        assert_eq!(cfg.periods.training_start.as_deref(), Some("2018-06-01"));
    }

    #[test]
    fn parse_errors_cite_position() {
        let err = toml::from_str::<FileConfig>("[model]\nn_c = \"oops\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "no position in: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[model]\ntypo_key = 1\n").is_err());
    }

    #[test]
    fn sku_selection_parsing() {
        assert_eq!(SkuSelection::parse("all"), SkuSelection::All);
        assert_eq!(SkuSelection::parse("ALL"), SkuSelection::All);
        let listed = SkuSelection::parse("a, b,,c");
        assert_eq!(
            listed,
            SkuSelection::Listed(vec!["a".into(), "b".into(), "c".into()])
        );
        assert!(listed.includes("b"));
        assert!(!listed.includes("d"));
    }

    #[test]
    fn period_ordering_is_validated() {
        let mk = |t: (i64, i64), v: (i64, i64)| RunConfig {
            data_root: "d".into(),
            output_dir: "o".into(),
            seed: 1,
            skus: SkuSelection::All,
            training: Some(DayRange::new(Day(t.0), Day(t.1))),
            validation: Some(DayRange::new(Day(v.0), Day(v.1))),
            operation_date: None,
            grid: HyperGrid::default_slp(),
            model: ModelParams::default(),
            jobs: 0,
            dump_uncertainties: false,
            dump_kiter: false,
        };
        assert!(mk((0, 100), (100, 200)).validate().is_ok());
        assert!(mk((0, 150), (100, 200)).validate().is_err());
    }

    #[test]
    fn partial_period_is_an_error() {
        assert!(parse_period("training", Some("2020-01-01"), None).is_err());
        assert!(parse_period("training", None, None).unwrap().is_none());
        let r = parse_period("training", Some("2020-01-01"), Some("2020-02-01"))
            .unwrap()
            .unwrap();
        assert_eq!(r.len(), 31);
    }
}
