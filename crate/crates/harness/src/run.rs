//! Single NSM or MHD runs.

use std::path::{Path, PathBuf};

use nsm_core::diagnostics::{energy_balance_from_reports, integrated_balance, max_c_hat, Slack};
use nsm_core::{
    check_lemma_e1, check_lemma_e2, energy_report, initial_data_residual, mhd_energy_report, mollify,
    prepare_family, run_mhd, run_nsm, EnergyReport, IntervalStatus, MhdState, NsmState,
    SmallnessCheck, TestFunctions, Trajectory,
};
use serde::Serialize;
use serde_json::Value;

use crate::config::{RunConfig, System};
use crate::error::{HarnessError, Result};
use crate::output::{create_dir, report_json, write_json, write_reports};
use crate::snapshot::Snapshot;

/// Interval counts of the first-order energy inequality, and the largest
/// implied constant of the second-order one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LemmaStats {
    pub holds: usize,
    pub violated: usize,
    pub not_applicable: usize,
    /// Largest `lhs − slack` over applicable intervals.
    pub worst_excess: Option<f64>,
    pub max_c_hat: f64,
}

impl LemmaStats {
    /// Needs at least two reports; otherwise all counts are zero.
    pub fn from_reports(reports: &[EnergyReport], c: f64) -> Result<Self> {
        let mut st = Self::default();
        if reports.len() < 2 {
            return Ok(st);
        }
        for i in check_lemma_e1(reports, c, Slack::default())? {
            match i.status {
                IntervalStatus::Holds => st.holds += 1,
                IntervalStatus::Violated => st.violated += 1,
                IntervalStatus::NotApplicable => st.not_applicable += 1,
            }
            if i.status != IntervalStatus::NotApplicable {
                let x = i.lhs - i.slack;
                st.worst_excess = Some(st.worst_excess.map_or(x, |w: f64| w.max(x)));
            }
        }
        st.max_c_hat = max_c_hat(&check_lemma_e2(reports, c)?);
        Ok(st)
    }
}

/// Everything a single run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub system: System,
    pub reports: Vec<EnergyReport>,
    pub dts: Vec<f64>,
    pub abort: Option<nsm_core::Error>,
    /// `(sample index, snapshot)` pairs.
    pub snapshots: Vec<(usize, Snapshot)>,
    pub initial_residual: Option<f64>,
    pub smallness: Option<SmallnessCheck>,
}

fn pick_snapshots<S>(samples: &[S], every: Option<usize>, snap: impl Fn(&S) -> Snapshot) -> Vec<(usize, Snapshot)> {
    let last = samples.len() - 1;
    (0..samples.len())
        .filter(|&i| i == last || every.is_some_and(|k| i % k == 0))
        .map(|i| (i, snap(&samples[i])))
        .collect()
}

pub(crate) fn nsm_reports(samples: &[NsmState], c: f64) -> Result<Vec<EnergyReport>> {
    let tf = TestFunctions::standard(samples[0].grid());
    Ok(samples
        .iter()
        .map(|s| energy_report(s, c, &tf))
        .collect::<nsm_core::Result<_>>()?)
}

/// Well-prepared NSM data of `cfg` for each `ε` in `eps`.
pub(crate) fn prepared(cfg: &RunConfig, eps: &[f64]) -> Result<nsm_core::PreparedFamily> {
    let g = cfg.grid()?;
    let (u, b) = cfg.ic.fields(&g)?;
    prepare_family(&u, &b, eps, &cfg.family_options()?).map_err(|e| HarnessError::Config(e.to_string()))
}

/// The well-prepared NSM state of `cfg` for its single `ε`.
pub fn prepared_state(cfg: &RunConfig) -> Result<NsmState> {
    Ok(prepared(cfg, &[cfg.single_eps()?])?.states.remove(0))
}

/// Mollified MHD data of `cfg`.
pub(crate) fn mhd_initial(cfg: &RunConfig) -> Result<MhdState> {
    let g = cfg.grid()?;
    let (u, b) = cfg.ic.fields(&g)?;
    let cutoff = cfg.family_options()?.cutoff;
    let (u, b) = (mollify(&u, cutoff)?, mollify(&b, cutoff)?);
    MhdState::new(u, b, cfg.nu, cfg.mu).map_err(|e| HarnessError::Config(e.to_string()))
}

fn finish<S>(traj: &Trajectory<S>) -> (Vec<f64>, Option<nsm_core::Error>) {
    (traj.dts.clone(), traj.abort.clone())
}

/// Runs the `nsm` or `mhd` system of `cfg` in memory.
pub fn execute_single(cfg: &RunConfig) -> Result<SingleRun> {
    cfg.validate()?;
    let step = cfg.dt.step_size();
    match cfg.system {
        System::Nsm => {
            let fam = prepared(cfg, &[cfg.single_eps()?])?;
            let s0 = &fam.states[0];
            let traj = run_nsm(s0, cfg.t_end, step, cfg.sample_every)?;
            let (dts, abort) = finish(&traj);
            Ok(SingleRun {
                system: System::Nsm,
                reports: nsm_reports(&traj.samples, cfg.threshold)?,
                dts,
                abort,
                snapshots: pick_snapshots(&traj.samples, cfg.snapshot_every, Snapshot::from_nsm),
                initial_residual: Some(initial_data_residual(s0, cfg.mu)?),
                smallness: Some(fam.checks[0]),
            })
        }
        System::Mhd => {
            let s0 = mhd_initial(cfg)?;
            let traj = run_mhd(&s0, cfg.t_end, step, cfg.sample_every)?;
            let (dts, abort) = finish(&traj);
            Ok(SingleRun {
                system: System::Mhd,
                reports: traj.samples.iter().map(mhd_energy_report).collect(),
                dts,
                abort,
                snapshots: pick_snapshots(&traj.samples, cfg.snapshot_every, Snapshot::from_mhd),
                initial_residual: None,
                smallness: None,
            })
        }
        other => Err(HarnessError::Config(format!("`{other}` is not a single-run system"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub system: System,
    pub status: &'static str,
    pub error: Option<String>,
    pub samples: usize,
    pub steps: usize,
    pub t_final: f64,
    pub dts: Vec<f64>,
    pub initial: Value,
    #[serde(rename = "final")]
    pub last: Value,
    pub lemma: LemmaStats,
    /// `∑|r|·Δt` of the classical energy equality (NSM only).
    pub integrated_balance: Option<f64>,
    pub initial_data_residual: Option<f64>,
    pub smallness_holds: Option<bool>,
    pub snapshots: Vec<String>,
}

impl SingleRun {
    pub fn summary(&self, threshold: f64, snapshot_names: Vec<String>) -> Result<RunSummary> {
        let balance = match self.system {
            System::Nsm if self.reports.len() >= 2 => {
                Some(integrated_balance(&energy_balance_from_reports(&self.reports)?))
            }
            _ => None,
        };
        Ok(RunSummary {
            system: self.system,
            status: if self.abort.is_some() { "aborted" } else { "completed" },
            error: self.abort.as_ref().map(|e| e.to_string()),
            samples: self.reports.len(),
            steps: self.dts.len(),
            t_final: self.reports.last().map_or(0.0, |r| r.t),
            dts: self.dts.clone(),
            initial: report_json(&self.reports[0]),
            last: report_json(self.reports.last().unwrap()),
            lemma: LemmaStats::from_reports(&self.reports, threshold)?,
            integrated_balance: balance,
            initial_data_residual: self.initial_residual,
            smallness_holds: self.smallness.map(|c| c.holds()),
            snapshots: snapshot_names,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: RunSummary,
}

impl RunOutcome {
    pub fn aborted(&self) -> bool {
        self.summary.error.is_some()
    }
}

/// Writes `config.json`, `diagnostics.csv`, the snapshots and `summary.json`
/// of `run` into `dir`.
pub fn write_single(cfg: &RunConfig, run: &SingleRun, dir: &Path) -> Result<RunSummary> {
    create_dir(dir)?;
    write_json(&dir.join("config.json"), cfg)?;
    write_reports(&dir.join("diagnostics.csv"), &run.reports)?;
    let mut names = Vec::new();
    for (i, snap) in &run.snapshots {
        let name = format!("snapshot-{i:06}.bin");
        snap.write(&dir.join(&name))?;
        names.push(name);
    }
    let summary = run.summary(cfg.threshold, names)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Runs the `nsm` or `mhd` system of `cfg` and writes its outputs to `dir`.
/// A solver abort still writes everything up to the last good sample.
pub fn run_single(cfg: &RunConfig, dir: &Path) -> Result<RunOutcome> {
    let run = execute_single(cfg)?;
    let summary = write_single(cfg, &run, dir)?;
    Ok(RunOutcome {
        dir: dir.to_path_buf(),
        summary,
    })
}
