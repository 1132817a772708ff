//! Declarative run configuration: one JSON file pins an entire experiment
//! (schedule, rate, series control, seeds, sample sizes, output).
//! Validation collects every violation before reporting.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::SeriesParams;
use crate::rng::RngSpec;
use crate::schedule::{AlphaSchedule, Rate};
use crate::{Error, Result};

/// Sample size below which statistical subcommands refuse to run: the
/// harness thresholds are calibrated for large-sample asymptotics.
pub const MIN_STATISTICAL_N: usize = 1_000;

fn default_lambda() -> f64 {
    1.0
}

fn default_t() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    std::env::var("GSFPP_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n: 100_000,
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    /// Output path; standard output when absent.
    pub path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: OutputFormat,
}

fn default_format() -> OutputFormat {
    OutputFormat::Csv
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            path: None,
            format: OutputFormat::Csv,
        }
    }
}

/// Complete experiment description. `segments` are `(duration, alpha)`
/// pairs laid end to end from time zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub segments: Vec<(f64, f64)>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub series: SeriesParams,
    #[serde(default = "default_rng")]
    pub rng: RngSpec,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_rng() -> RngSpec {
    RngSpec::new(42)
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            segments: vec![(0.5, 0.6), (0.5, 0.9)],
            lambda: default_lambda(),
            t: default_t(),
            series: SeriesParams::default(),
            rng: default_rng(),
            mc: McConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks every invariant and returns all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.segments.is_empty() {
            violations.push("segments: at least one (duration, alpha) pair required".into());
        }
        for (i, &(d, a)) in self.segments.iter().enumerate() {
            if !(d > 0.0) {
                violations.push(format!("segments[{i}]: duration must be positive, got {d}"));
            }
            if !(a > 0.0 && a <= 1.0) {
                violations.push(format!("segments[{i}]: alpha must lie in (0, 1], got {a}"));
            }
        }
        if !(self.lambda > 0.0) {
            violations.push(format!("lambda: must be positive, got {}", self.lambda));
        }
        if !(self.t >= 0.0) {
            violations.push(format!("t: must be nonnegative, got {}", self.t));
        }
        if self.series.r_max < 1 {
            violations.push("series.r_max: must be at least 1".into());
        }
        if !(self.series.tol > 0.0) {
            violations.push(format!("series.tol: must be positive, got {}", self.series.tol));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations))
        }
    }

    /// Extra guard for subcommands whose thresholds assume large samples.
    pub fn validate_statistical(&self) -> Result<()> {
        self.validate()?;
        if self.mc.n < MIN_STATISTICAL_N {
            return Err(Error::Validation(vec![format!(
                "mc.n: statistical checks need at least {MIN_STATISTICAL_N} samples, got {}",
                self.mc.n
            )]));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<AlphaSchedule> {
        AlphaSchedule::from_segments(&self.segments)
    }

    pub fn rate(&self) -> Result<Rate> {
        Rate::new(self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate_statistical().unwrap();
    }

    #[test]
    fn validation_aggregates_all_violations() {
        let cfg = RunConfig {
            segments: vec![(-1.0, 2.0)],
            lambda: 0.0,
            t: -1.0,
            ..RunConfig::default()
        };
        match cfg.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("expected aggregated validation error, got {other:?}"),
        }
    }

    #[test]
    fn underpowered_mc_is_refused() {
        let cfg = RunConfig {
            mc: McConfig { n: 10, workers: 1 },
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_ok());
        assert!(cfg.validate_statistical().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.segments, cfg.segments);
        assert_eq!(back.rng, cfg.rng);
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"segments": [[1.0, 0.5]], "mc": {"n": 5000}}"#).unwrap();
        assert_eq!(cfg.lambda, 1.0);
        assert_eq!(cfg.series.r_max, 60);
        assert_eq!(cfg.rng.seed, 42);
        assert_eq!(cfg.mc.n, 5000);
    }
}
