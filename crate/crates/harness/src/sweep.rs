//! `ε`-sweeps: one MHD reference run and one NSM run per `ε`, compared
//! sample by sample.

use std::path::{Path, PathBuf};

use nsm_core::diagnostics::{fit_log_slope, vanishing_from_reports, ConvergenceOrder};
use nsm_core::{
    fit_convergence_order, initial_data_residual, mhd_energy_report, run_mhd, run_nsm,
    ConvergenceRecord, EnergyReport, MhdState, NsmState, SmallnessCheck,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::output::{create_dir, write_csv, write_json, write_reports};
use crate::run::{nsm_reports, prepared, LemmaStats};
use crate::snapshot::Snapshot;

/// One NSM member of a sweep.
#[derive(Debug, Clone)]
pub struct EpsRun {
    pub eps: f64,
    pub reports: Vec<EnergyReport>,
    pub dts: Vec<f64>,
    pub record: Option<ConvergenceRecord>,
    pub error: Option<String>,
    pub lemma: LemmaStats,
    pub initial_residual: f64,
    pub smallness: SmallnessCheck,
    pub last: Option<Snapshot>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub mhd_reports: Vec<EnergyReport>,
    pub mhd_last: Snapshot,
    /// Sorted by decreasing `ε`.
    pub runs: Vec<EpsRun>,
    pub order: std::result::Result<ConvergenceOrder, String>,
    /// Slopes of both vanishing terms against `ε`.
    pub vanishing_slopes: std::result::Result<(f64, f64), String>,
}

impl SweepResult {
    pub fn records(&self) -> Vec<ConvergenceRecord> {
        self.runs.iter().filter_map(|r| r.record).collect()
    }

    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Column names of `convergence.csv`.
pub const CONVERGENCE_COLUMNS: [&str; 7] = [
    "eps",
    "sup_h1_u",
    "sup_h1_b",
    "l2_final_u",
    "l2_final_b",
    "vanishing_1",
    "vanishing_2",
];

fn record_row(r: &ConvergenceRecord) -> [f64; 7] {
    [
        r.eps,
        r.sup_h1_u,
        r.sup_h1_b,
        r.l2_final_u,
        r.l2_final_b,
        r.vanishing_1,
        r.vanishing_2,
    ]
}

fn run_member(cfg: &RunConfig, s0: &NsmState, check: SmallnessCheck, mhd: &[MhdState]) -> Result<EpsRun> {
    let traj = run_nsm(s0, cfg.t_end, cfg.dt.step_size(), cfg.sample_every)?;
    let reports = nsm_reports(&traj.samples, cfg.threshold)?;
    let mut error = traj.abort.as_ref().map(|e| e.to_string());
    let mut record = None;
    if error.is_none() {
        match ConvergenceRecord::from_runs(s0.eps, &traj.samples, mhd, vanishing_from_reports(&reports)) {
            Ok(r) => record = Some(r),
            Err(e) => error = Some(e.to_string()),
        }
    }
    Ok(EpsRun {
        eps: s0.eps,
        lemma: LemmaStats::from_reports(&reports, cfg.threshold)?,
        reports,
        dts: traj.dts,
        record,
        error,
        initial_residual: initial_data_residual(s0, cfg.mu)?,
        smallness: check,
        last: traj.samples.last().map(Snapshot::from_nsm),
    })
}

/// Runs the sweep of `cfg` in memory. NSM members run concurrently on
/// `cfg.threads` workers; a failing member is recorded and the others go on.
pub fn execute_sweep(cfg: &RunConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut eps = cfg.sweep_eps()?;
    eps.sort_by(|a, b| b.total_cmp(a));
    let fam = prepared(cfg, &eps)?;
    let m0 = MhdState::new(fam.states[0].u.clone(), fam.states[0].b.clone(), cfg.nu, cfg.mu)
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mhd = run_mhd(&m0, cfg.t_end, cfg.dt.step_size(), cfg.sample_every)?.into_result()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let runs: Vec<EpsRun> = pool.install(|| {
        fam.states
            .par_iter()
            .zip(fam.checks.par_iter())
            .map(|(s, c)| {
                run_member(cfg, s, *c, &mhd.samples).or_else(|e| {
                    Ok(EpsRun {
                        eps: s.eps,
                        reports: Vec::new(),
                        dts: Vec::new(),
                        record: None,
                        error: Some(e.to_string()),
                        lemma: LemmaStats::default(),
                        initial_residual: initial_data_residual(s, cfg.mu)?,
                        smallness: *c,
                        last: None,
                    })
                })
            })
            .collect::<Result<_>>()
    })?;

    let records: Vec<ConvergenceRecord> = runs.iter().filter_map(|r| r.record).collect();
    let order = fit_convergence_order(&records).map_err(|e| e.to_string());
    let vanishing_slopes = {
        let e: Vec<f64> = records.iter().map(|r| r.eps).collect();
        let v1: Vec<f64> = records.iter().map(|r| r.vanishing_1).collect();
        let v2: Vec<f64> = records.iter().map(|r| r.vanishing_2).collect();
        fit_log_slope(&e, &v1)
            .and_then(|a| Ok((a, fit_log_slope(&e, &v2)?)))
            .map_err(|e| e.to_string())
    };
    Ok(SweepResult {
        mhd_reports: mhd.samples.iter().map(mhd_energy_report).collect(),
        mhd_last: Snapshot::from_mhd(mhd.last()),
        runs,
        order,
        vanishing_slopes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberSummary {
    pub eps: f64,
    pub status: &'static str,
    pub error: Option<String>,
    pub samples: usize,
    pub steps: usize,
    pub initial_data_residual: f64,
    pub linf_sum: f64,
    pub smallness_threshold: f64,
    pub smallness_holds: bool,
    pub lemma: LemmaStats,
    pub max_third_comp: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub u: Option<f64>,
    pub b: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub eps: Vec<f64>,
    pub failures: usize,
    pub order: FitSummary,
    pub vanishing_slopes: FitSummary,
    /// `ε` values whose data exceed the smallness threshold.
    pub smallness_warnings: Vec<f64>,
    pub members: Vec<MemberSummary>,
}

impl SweepResult {
    pub fn summary(&self) -> SweepSummary {
        let fit = |r: std::result::Result<(f64, f64), String>| match r {
            Ok((u, b)) => FitSummary {
                u: Some(u),
                b: Some(b),
                note: None,
            },
            Err(e) => FitSummary {
                u: None,
                b: None,
                note: Some(e),
            },
        };
        SweepSummary {
            eps: self.runs.iter().map(|r| r.eps).collect(),
            failures: self.failures(),
            order: fit(self.order.as_ref().map(|o| (o.u, o.b)).map_err(Clone::clone)),
            vanishing_slopes: fit(self.vanishing_slopes.clone()),
            smallness_warnings: self
                .runs
                .iter()
                .filter(|r| !r.smallness.holds())
                .map(|r| r.eps)
                .collect(),
            members: self
                .runs
                .iter()
                .map(|r| MemberSummary {
                    eps: r.eps,
                    status: if r.error.is_some() { "failed" } else { "completed" },
                    error: r.error.clone(),
                    samples: r.reports.len(),
                    steps: r.dts.len(),
                    initial_data_residual: r.initial_residual,
                    linf_sum: r.smallness.linf_sum,
                    smallness_threshold: r.smallness.threshold,
                    smallness_holds: r.smallness.holds(),
                    lemma: r.lemma,
                    max_third_comp: r.reports.iter().map(|x| x.third_comp).fold(0.0, f64::max),
                })
                .collect(),
        }
    }
}

/// Directory name of one sweep member.
pub fn member_dir_name(eps: f64) -> String {
    format!("eps-{eps:e}")
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub dir: PathBuf,
    pub result: SweepResult,
    pub summary: SweepSummary,
}

/// Runs the sweep and writes `config.json`, `mhd/`, one `eps-*/` directory
/// per member, `convergence.csv` and `summary.json` into `dir`.
pub fn run_sweep(cfg: &RunConfig, dir: &Path) -> Result<SweepOutcome> {
    let result = execute_sweep(cfg)?;
    create_dir(dir)?;
    write_json(&dir.join("config.json"), cfg)?;
    let mhd_dir = dir.join("mhd");
    create_dir(&mhd_dir)?;
    write_reports(&mhd_dir.join("diagnostics.csv"), &result.mhd_reports)?;
    result.mhd_last.write(&mhd_dir.join("final.bin"))?;
    for r in &result.runs {
        let d = dir.join(member_dir_name(r.eps));
        create_dir(&d)?;
        write_reports(&d.join("diagnostics.csv"), &r.reports)?;
        if let Some(s) = &r.last {
            s.write(&d.join("final.bin"))?;
        }
    }
    write_csv(
        &dir.join("convergence.csv"),
        &CONVERGENCE_COLUMNS,
        result.records().iter().map(record_row),
    )?;
    let summary = result.summary();
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(SweepOutcome {
        dir: dir.to_path_buf(),
        result,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DtSpec, System};

    fn small(eps: Vec<f64>) -> RunConfig {
        RunConfig {
            system: System::Sweep,
            n: 16,
            t_end: 0.04,
            dt: DtSpec::Fixed(1e-2),
            sample_every: 2,
            eps_list: Some(eps),
            threads: Some(2),
            ..RunConfig::default()
        }
    }

    #[test]
    fn members_are_sorted_and_fitted() {
        let res = execute_sweep(&small(vec![1e-1, 1e-2, 1e-3])).unwrap();
        let eps: Vec<f64> = res.runs.iter().map(|r| r.eps).collect();
        assert_eq!(eps, vec![1e-1, 1e-2, 1e-3]);
        assert_eq!(res.failures(), 0);
        assert_eq!(res.records().len(), 3);
        assert!(res.order.is_ok());
        assert_eq!(res.mhd_reports.len(), res.runs[0].reports.len());
    }

    #[test]
    fn single_member_has_no_fit() {
        let res = execute_sweep(&small(vec![1e-2])).unwrap();
        assert_eq!(res.records().len(), 1);
        assert!(res.order.is_err());
        assert!(res.summary().order.u.is_none());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let a = execute_sweep(&small(vec![1e-1, 1e-2])).unwrap();
        let b = execute_sweep(&RunConfig {
            threads: Some(1),
            ..small(vec![1e-1, 1e-2])
        })
        .unwrap();
        assert_eq!(a.records(), b.records());
    }
}
