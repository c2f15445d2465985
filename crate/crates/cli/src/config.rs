//! Run configuration: a JSON document whose keys can be overridden by flags.

use std::path::Path;

use ratetip::tracking::{ConfirmConfig, RefineConfig};
use ratetip::{GapMode, IntegratorConfig, NonautonomousSpec, PullbackRunConfig, RosslerParams, ShiftProfile, State};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemSection,
    pub shift: ShiftProfile,
    pub rate: RateSection,
    pub run: RunSection,
    pub integrate: IntegratorConfig,
    pub refine: RefineConfig<f64>,
    pub confirm: ConfirmConfig<f64>,
    pub gap_mode: GapModeChoice,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemSection::default(),
            shift: ShiftProfile::tanh(-0.2, 0.2, 1e-3),
            rate: RateSection::default(),
            run: RunSection::default(),
            integrate: IntegratorConfig::default(),
            refine: RefineConfig::default(),
            confirm: ConfirmConfig::default(),
            gap_mode: GapModeChoice::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    /// Only read by the frozen-system commands.
    pub a: Option<f64>,
    pub b: f64,
    pub c: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self { a: None, b: 0.2, c: 5.7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateSection {
    pub r: Option<f64>,
    pub scan: ScanSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { r_min: 0.9, r_max: 1.0, samples: 201 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub z_init: ZInit,
    pub t_start: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        let run = PullbackRunConfig::default();
        Self { z_init: ZInit::Point(run.z_init.to_array()), t_start: run.t_start, horizon: run.horizon }
    }
}

/// Initial point of a pullback run: explicit, or the past equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZInit {
    Auto,
    Point([f64; 3]),
}

impl ZInit {
    pub fn source(self) -> &'static str {
        match self {
            ZInit::Auto => "auto",
            ZInit::Point(_) => "config",
        }
    }
}

impl std::str::FromStr for ZInit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "auto" {
            return Ok(ZInit::Auto);
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad z_init component {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        <[f64; 3]>::try_from(parts).map(ZInit::Point).map_err(|p| format!("z_init needs 3 components, got {}", p.len()))
    }
}

impl<'de> Deserialize<'de> for ZInit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Keyword(String),
            Point([f64; 3]),
        }
        match Raw::deserialize(d)? {
            Raw::Point(p) => Ok(ZInit::Point(p)),
            Raw::Keyword(k) if k == "auto" => Ok(ZInit::Auto),
            Raw::Keyword(k) => {
                Err(serde::de::Error::custom(format!("z_init must be [x, y, z] or \"auto\", got {k:?}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GapModeChoice {
    #[default]
    UnstableCoefficient,
    PaperProjection,
    Both,
}

impl GapModeChoice {
    pub fn modes(self) -> Vec<GapMode> {
        match self {
            GapModeChoice::UnstableCoefficient => vec![GapMode::UnstableCoefficient],
            GapModeChoice::PaperProjection => vec![GapMode::PaperProjection],
            GapModeChoice::Both => GapMode::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GapModeChoice::UnstableCoefficient => "unstable_coefficient",
            GapModeChoice::PaperProjection => "paper_projection",
            GapModeChoice::Both => "both",
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn spec(&self, rate: f64) -> NonautonomousSpec {
        NonautonomousSpec::new(self.system.b, self.system.c, self.shift, rate)
    }

    /// Pullback run with `z_init = auto` resolved against the past limit.
    pub fn pullback_run(&self, spec: &NonautonomousSpec) -> Result<PullbackRunConfig, CliError> {
        let z_init = match self.run.z_init {
            ZInit::Point([x, y, z]) => State::new(x, y, z),
            ZInit::Auto => PullbackRunConfig::auto_z_init(spec)?,
        };
        let run =
            PullbackRunConfig { z_init, t_start: self.run.t_start, horizon: self.run.horizon, integ: self.integrate };
        run.validate()?;
        Ok(run)
    }

    /// Frozen parameters at `a`, falling back to `fallback` when `system.a`
    /// is unset.
    pub fn frozen_params(&self, fallback: f64) -> RosslerParams {
        RosslerParams::new(self.system.a.unwrap_or(fallback), self.system.b, self.system.c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.shift.validate()?;
        self.integrate.validate()?;
        if !(self.refine.tol_r > 0.0 && self.refine.tol_eta > 0.0) {
            return Err(CliError::Config("refine tolerances must be positive".into()));
        }
        if !(self.confirm.tube_eps > 0.0) {
            return Err(CliError::Config("confirm.tube_eps must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.run.z_init, ZInit::Point([-0.007, 0.035, -0.035]));
        assert_eq!(cfg.run.horizon, 150.0);
        assert_eq!(cfg.rate.scan, ScanSection { r_min: 0.9, r_max: 1.0, samples: 201 });
    }

    #[test]
    fn full_document_parses() {
        let cfg = RunConfig::from_json(
            r#"{
                "system": {"a": -0.2, "b": 0.2, "c": 5.7},
                "shift": {"kind": "piecewise_linear", "lambda_minus": -0.1, "lambda_plus": 0.2, "delta": 0.01},
                "rate": {"r": 0.95, "scan": {"r_min": 0.5, "r_max": 0.6, "samples": 11}},
                "run": {"z_init": "auto", "t_start": -60, "T": 125},
                "integrate": {"rtol": 1e-10, "atol": 1e-10, "h_max": 0.05, "max_steps": 1000000},
                "refine": {"tol_r": 1e-8, "tol_eta": 1e-5, "max_iter": 60},
                "confirm": {"shadow_periods": 4, "tube_eps": 0.1},
                "gap_mode": "both"
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.system.a, Some(-0.2));
        assert_eq!(cfg.run.z_init, ZInit::Auto);
        assert_eq!(cfg.run.horizon, 125.0);
        assert_eq!(cfg.rate.r, Some(0.95));
        assert_eq!(cfg.integrate.h_max, 0.05);
        assert_eq!(cfg.confirm.shadow_periods, 4);
        assert_eq!(cfg.gap_mode, GapModeChoice::Both);
    }

    #[test]
    fn unknown_keys_are_named() {
        for (doc, key) in [
            (r#"{"bogus": 1}"#, "bogus"),
            (r#"{"run": {"horizon": 100}}"#, "horizon"),
            (r#"{"integrate": {"rtl": 1e-9}}"#, "rtl"),
            (r#"{"rate": {"scan": {"rmin": 0.1}}}"#, "rmin"),
        ] {
            let err = RunConfig::from_json(doc).unwrap_err().to_string();
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn z_init_forms() {
        assert_eq!("auto".parse::<ZInit>().unwrap(), ZInit::Auto);
        assert_eq!("1, 2,3".parse::<ZInit>().unwrap(), ZInit::Point([1.0, 2.0, 3.0]));
        assert!("1,2".parse::<ZInit>().is_err());
        assert!("x,1,2".parse::<ZInit>().is_err());
        assert!(RunConfig::from_json(r#"{"run": {"z_init": "equilibrium"}}"#).is_err());
    }

    #[test]
    fn auto_z_init_is_the_past_equilibrium() {
        let mut cfg = RunConfig::default();
        cfg.run.z_init = ZInit::Auto;
        let spec = cfg.spec(0.9);
        let run = cfg.pullback_run(&spec).unwrap();
        let f = spec.past_params().vector_field(&run.z_init.to_array());
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }
}
