//! Run configuration: a single JSON document with every knob of a run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nsm_core::{
    standard_ic, FamilyOptions, Field3, Grid, InitialCondition, StepSize,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum System {
    Nsm,
    Mhd,
    Sweep,
    ScalingCheck,
    ResidualCheck,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Nsm => "nsm",
            Self::Mhd => "mhd",
            Self::Sweep => "sweep",
            Self::ScalingCheck => "scaling-check",
            Self::ResidualCheck => "residual-check",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for System {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| HarnessError::Config(format!("unknown system `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DtKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// Time step: a number or `"auto"` for the CFL rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSpec {
    Fixed(f64),
    Keyword(DtKeyword),
}

impl DtSpec {
    pub const AUTO: DtSpec = DtSpec::Keyword(DtKeyword::Auto);

    pub fn step_size(&self) -> StepSize {
        match *self {
            Self::Fixed(dt) => StepSize::Fixed(dt),
            Self::Keyword(DtKeyword::Auto) => StepSize::Auto,
        }
    }

    pub fn fixed(&self) -> Option<f64> {
        match *self {
            Self::Fixed(dt) => Some(dt),
            Self::Keyword(_) => None,
        }
    }
}

impl FromStr for DtSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::AUTO);
        }
        s.parse::<f64>()
            .map(Self::Fixed)
            .map_err(|_| HarnessError::Config(format!("dt must be a number or `auto`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcConfig {
    pub name: String,
    /// Scale of `u₀` (and of `B₀` unless `magnetic_amplitude` is set).
    pub amplitude: f64,
    pub magnetic_amplitude: Option<f64>,
    pub seed: u64,
    /// Spectral decay of `random-smooth`.
    pub decay: f64,
}

impl Default for IcConfig {
    fn default() -> Self {
        Self {
            name: "taylor-green-mhd".into(),
            amplitude: 1.0,
            magnetic_amplitude: None,
            seed: 0,
            decay: 3.0,
        }
    }
}

impl IcConfig {
    pub fn kind(&self) -> Result<InitialCondition> {
        InitialCondition::from_name(&self.name, self.seed, self.decay).map_err(|_| {
            HarnessError::Config(format!(
                "unknown initial condition `{}` (expected one of {})",
                self.name,
                InitialCondition::NAMES.join(", ")
            ))
        })
    }

    /// Unmollified `(u₀, B₀)` on `grid`.
    pub fn fields(&self, grid: &Grid) -> Result<(Field3, Field3)> {
        let (u, b) = standard_ic(&self.kind()?, grid, 1.0)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let mb = self.magnetic_amplitude.unwrap_or(self.amplitude);
        Ok((u.scale(self.amplitude), b.scale(mb)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: System,
    pub n: usize,
    pub t_end: f64,
    pub dt: DtSpec,
    /// Steps between diagnostic samples.
    pub sample_every: usize,
    pub ic: IcConfig,
    pub eps: Option<f64>,
    pub eps_list: Option<Vec<f64>>,
    /// Mollification radius; `n/3` when absent.
    pub cutoff: Option<f64>,
    pub nu: f64,
    pub mu: f64,
    /// Reference constant `C` of the smallness condition.
    pub threshold: f64,
    pub output_dir: Option<PathBuf>,
    /// Samples between snapshots; absent means the final state only.
    pub snapshot_every: Option<usize>,
    /// Worker threads of a sweep; absent means one per core.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: System::Nsm,
            n: 64,
            t_end: 1.0,
            dt: DtSpec::Fixed(1e-3),
            sample_every: 10,
            ic: IcConfig::default(),
            eps: None,
            eps_list: None,
            cutoff: None,
            nu: 1.0,
            mu: 1.0,
            threshold: 1.0,
            output_dir: None,
            snapshot_every: None,
            threads: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} = {v} must be positive and finite")))
    }
}

impl RunConfig {
    /// The demo sweep: Taylor–Green data, `n = 64`, `t_end = 1`,
    /// `ε ∈ {1e-1, 1e-2, 1e-3, 1e-4}`.
    pub fn demo_sweep() -> Self {
        Self {
            system: System::Sweep,
            eps_list: Some(vec![1e-1, 1e-2, 1e-3, 1e-4]),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn family_options(&self) -> Result<FamilyOptions> {
        let g = self.grid()?;
        Ok(FamilyOptions {
            cutoff: self.cutoff.unwrap_or(FamilyOptions::for_grid(&g).cutoff),
            mu: self.mu,
            nu: self.nu,
            threshold: self.threshold,
        })
    }

    /// The single `ε` of the run.
    pub fn single_eps(&self) -> Result<f64> {
        self.eps
            .ok_or_else(|| HarnessError::Config(format!("system `{}` needs `eps`", self.system)))
    }

    /// The `ε` values of a sweep; a lone `eps` counts as a one-entry list.
    pub fn sweep_eps(&self) -> Result<Vec<f64>> {
        match (&self.eps_list, self.eps) {
            (Some(l), _) => Ok(l.clone()),
            (None, Some(e)) => Ok(vec![e]),
            (None, None) => Err(HarnessError::Config("sweep needs `eps_list`".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(HarnessError::Config(format!("t_end = {} must be >= 0", self.t_end)));
        }
        if let Some(dt) = self.dt.fixed() {
            positive("dt", dt)?;
        }
        if self.sample_every == 0 {
            return Err(HarnessError::Config("sample_every must be >= 1".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(HarnessError::Config("snapshot_every must be >= 1".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be >= 1".into()));
        }
        self.ic.kind()?;
        if !self.ic.amplitude.is_finite() || !self.ic.magnetic_amplitude.unwrap_or(0.0).is_finite() {
            return Err(HarnessError::Config("amplitudes must be finite".into()));
        }
        if !(self.ic.decay >= 0.0 && self.ic.decay.is_finite()) {
            return Err(HarnessError::Config(format!("decay = {} must be >= 0", self.ic.decay)));
        }
        if let Some(e) = self.eps {
            positive("eps", e)?;
        }
        if let Some(l) = &self.eps_list {
            if l.is_empty() {
                return Err(HarnessError::Config("eps_list is empty".into()));
            }
            for &e in l {
                positive("eps", e)?;
            }
            if l.windows(2).any(|w| w[1] >= w[0]) {
                return Err(HarnessError::Config("eps_list must be strictly decreasing".into()));
            }
        }
        if let Some(c) = self.cutoff {
            let limit = self.n as f64 / 3.0;
            if !(c >= 0.0 && c <= limit) {
                return Err(HarnessError::Config(format!(
                    "cutoff = {c} must lie in [0, n/3 = {limit}]"
                )));
            }
        }
        positive("threshold", self.threshold)?;
        for (name, v) in [("nu", self.nu), ("mu", self.mu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(HarnessError::Config(format!("{name} = {v} must be >= 0")));
            }
        }
        match self.system {
            System::Nsm | System::ResidualCheck => {
                self.single_eps()?;
            }
            System::Sweep => {
                self.sweep_eps()?;
            }
            System::ScalingCheck => {
                if self.eps.is_none() && self.eps_list.is_none() {
                    return Err(HarnessError::Config("scaling-check needs `eps` or `eps_list`".into()));
                }
            }
            System::Mhd => {}
        }
        if self.system == System::ResidualCheck && self.dt.fixed().is_none() {
            return Err(HarnessError::Config("residual-check needs a fixed dt".into()));
        }
        Ok(())
    }

    /// Deterministic directory name for this run.
    pub fn run_name(&self) -> String {
        let mut s = format!("{}-{}-n{}", self.system, self.ic.name, self.n);
        if let (System::Nsm | System::ResidualCheck, Some(e)) = (self.system, self.eps) {
            s.push_str(&format!("-eps{e:e}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document() {
        let c = RunConfig::from_json(r#"{"system": "mhd"}"#).unwrap();
        assert_eq!(c.system, System::Mhd);
        assert_eq!(c.n, 64);
        assert_eq!(c.dt, DtSpec::Fixed(1e-3));
        c.validate().unwrap();
    }

    #[test]
    fn dt_accepts_auto() {
        let c = RunConfig::from_json(r#"{"system": "mhd", "dt": "auto"}"#).unwrap();
        assert_eq!(c.dt.step_size(), StepSize::Auto);
        let back = RunConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(RunConfig::from_json(r#"{"dt": "fast"}"#).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_json(r#"{"system": "nsm", "epsilon": 0.1}"#).unwrap_err();
        assert!(matches!(e, HarnessError::Config(_)));
        assert!(RunConfig::from_json(r#"{"ic": {"nme": "x"}}"#).is_err());
    }

    #[test]
    fn validation() {
        let base = RunConfig {
            eps: Some(0.1),
            ..RunConfig::default()
        };
        base.validate().unwrap();
        let bad = [
            RunConfig { n: 9, ..base.clone() },
            RunConfig { n: 6, ..base.clone() },
            RunConfig { t_end: -1.0, ..base.clone() },
            RunConfig { dt: DtSpec::Fixed(0.0), ..base.clone() },
            RunConfig { sample_every: 0, ..base.clone() },
            RunConfig { eps: None, ..base.clone() },
            RunConfig { eps: Some(-1.0), ..base.clone() },
            RunConfig { cutoff: Some(30.0), ..base.clone() },
            RunConfig { eps_list: Some(vec![0.1, 0.1]), system: System::Sweep, ..base.clone() },
            RunConfig { eps_list: Some(vec![]), system: System::Sweep, ..base.clone() },
            RunConfig {
                ic: IcConfig { name: "vortex".into(), ..IcConfig::default() },
                ..base.clone()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(HarnessError::Config(_))), "{c:?}");
        }
        RunConfig { t_end: 0.0, ..base }.validate().unwrap();
    }

    #[test]
    fn magnetic_amplitude_scales_b_only() {
        let g = Grid::new(16).unwrap();
        let ic = IcConfig {
            amplitude: 2.0,
            magnetic_amplitude: Some(0.0),
            ..IcConfig::default()
        };
        let (u, b) = ic.fields(&g).unwrap();
        assert!((u.linf_norm() - 2.0).abs() < 1e-12);
        assert_eq!(b.l2_norm(), 0.0);
    }

    #[test]
    fn system_names_round_trip() {
        for s in [System::Nsm, System::Mhd, System::Sweep, System::ScalingCheck, System::ResidualCheck] {
            assert_eq!(s.name().parse::<System>().unwrap(), s);
        }
        assert!("maxwell".parse::<System>().is_err());
    }
}
