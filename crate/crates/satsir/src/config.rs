//! JSON run configuration for the command-line front end.
//!
//! The schema mirrors the library types field-for-field; unknown keys are
//! rejected so a typo cannot silently fall back to a default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlPair, ModelParams, SirState};
use crate::error::{Error, Result};
use crate::numerics::TimeGrid;
use crate::optctl::{CostWeights, OcOptions, Strategy};

/// Either a fixed control pair or a named optimization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSpec {
    Fixed(ControlPair),
    Strategy(Strategy),
}

impl ControlSpec {
    /// The constant controls to use for plain simulation.
    pub fn fixed_or_zero(&self) -> ControlPair {
        match self {
            ControlSpec::Fixed(u) => *u,
            ControlSpec::Strategy(_) => ControlPair::zero(),
        }
    }

    pub fn strategy_or(&self, fallback: Strategy) -> Strategy {
        match self {
            ControlSpec::Strategy(s) => *s,
            ControlSpec::Fixed(_) => fallback,
        }
    }
}

/// Grid of reproduction numbers for the bifurcation scan command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub r0_start: f64,
    pub r0_stop: f64,
    pub samples: usize,
}

impl ScanSpec {
    // The negated comparisons also reject NaN bounds.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.r0_start > 0.0) || !(self.r0_stop > self.r0_start) {
            return Err(Error::Config(format!(
                "scan: need 0 < r0_start < r0_stop, got [{}, {}]",
                self.r0_start, self.r0_stop
            )));
        }
        if self.samples < 2 {
            return Err(Error::Config("scan.samples: need at least 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.samples)
            .map(|k| {
                self.r0_start
                    + (self.r0_stop - self.r0_start) * k as f64 / (self.samples - 1) as f64
            })
            .collect()
    }
}

/// A fully validated run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub weights: CostWeights,
    pub initial: SirState,
    pub grid: TimeGrid,
    pub controls: ControlSpec,
    #[serde(default = "default_oc_options")]
    pub oc_options: OcOptions,
    #[serde(default)]
    pub out_prefix: Option<String>,
    #[serde(default)]
    pub scan: Option<ScanSpec>,
}

fn default_oc_options() -> OcOptions {
    OcOptions::default()
}

impl RunConfig {
    /// Enforces every nested invariant; error messages name the offending
    /// field.
    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(format!("params: {e}")))?;
        self.weights
            .validate()
            .map_err(|e| Error::Config(format!("weights: {e}")))?;
        self.initial
            .validate()
            .map_err(|e| Error::Config(format!("initial: {e}")))?;
        self.grid.validate().map_err(|e| {
            Error::Config(format!(
                "grid: {e} (Simpson's 1/3 rule requires an even interval count)"
            ))
        })?;
        if let ControlSpec::Fixed(u) = &self.controls {
            u.validate()
                .map_err(|e| Error::Config(format!("controls: {e}")))?;
        }
        self.oc_options
            .validate()
            .map_err(|e| Error::Config(format!("oc_options: {e}")))?;
        if let Some(scan) = &self.scan {
            scan.validate()?;
        }
        Ok(())
    }
}

/// Loads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
    config.validate()?;
    Ok(config)
}
