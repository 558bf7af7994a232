//! Equation-level checks: the diffusive-scaling map on manufactured fields,
//! and the defects of computed NSM trajectories.

use std::path::Path;

use nsm_core::{
    check_scaling, manufactured_frames, residual_nsm, run_nsm, scaling_index, NsmFields,
    NsmResidual, StepSize,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::output::{create_dir, write_csv, write_json};
use crate::run::prepared;

/// Pass tolerance of the scaling check.
pub const SCALING_TOL: f64 = 1e-9;

/// Time spacing of the manufactured frames.
const FRAME_SPACING: f64 = 1e-2;
const FRAME_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub eps: f64,
    pub m: usize,
    /// Largest wavenumber of the manufactured fields.
    pub band: i64,
    pub max_defect: f64,
    pub pass: bool,
}

/// Band of the manufactured fields for index `m`: products of the scaled
/// fields must stay inside the dealiased band, so `6·m·band ≤ n`.
pub fn scaling_band(n: usize, m: usize) -> Result<i64> {
    let band = (n / (6 * m)).min(4) as i64;
    if band < 1 {
        return Err(HarnessError::Config(format!(
            "n = {n} is too small for the scaling with m = {m} (need n >= {})",
            6 * m
        )));
    }
    Ok(band)
}

/// Scaling check for every `ε` of the config (`eps`, then `eps_list`).
pub fn scaling_check(cfg: &RunConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    let g = cfg.grid()?;
    let eps: Vec<f64> = cfg.eps.iter().chain(cfg.eps_list.iter().flatten()).copied().collect();
    eps.iter()
        .map(|&e| {
            let m = scaling_index(e).map_err(|err| HarnessError::Config(err.to_string()))?;
            let band = scaling_band(g.n(), m)?;
            let frames = manufactured_frames(&g, band, cfg.ic.seed, 0.0, FRAME_SPACING, FRAME_COUNT)?;
            let rep = check_scaling(&frames, e, cfg.nu)?;
            Ok(ScalingRow {
                eps: e,
                m,
                band,
                max_defect: rep.max_defect,
                pass: rep.passes(SCALING_TOL),
            })
        })
        .collect()
}

/// Runs [`scaling_check`] and writes `scaling.json`.
pub fn run_scaling_check(cfg: &RunConfig, dir: &Path) -> Result<Vec<ScalingRow>> {
    let rows = scaling_check(cfg)?;
    create_dir(dir)?;
    write_json(&dir.join("config.json"), cfg)?;
    write_json(&dir.join("scaling.json"), &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ResidualCheck {
    pub eps: f64,
    pub dt: f64,
    /// Per-anchor defects with step `dt`.
    pub coarse: Vec<NsmResidual>,
    /// Per-anchor defects with step `dt/2`.
    pub fine: Vec<NsmResidual>,
    pub max_coarse: [f64; 6],
    pub max_fine: [f64; 6],
    /// `log₂(max_coarse/max_fine)`, absent where both are at round-off level.
    pub order: [Option<f64>; 6],
}

fn elementwise_max(rs: &[NsmResidual]) -> [f64; 6] {
    rs.iter().fold([0.0; 6], |mut acc, r| {
        for (a, v) in acc.iter_mut().zip(r.values()) {
            *a = a.max(v);
        }
        acc
    })
}

/// Equation defects of the computed NSM solution. From every sample of the
/// run, two further steps of size `h` give three frames whose centred
/// differences yield the defect at the middle one; `h = dt` and `h = dt/2`
/// are compared.
pub fn residual_check(cfg: &RunConfig) -> Result<ResidualCheck> {
    cfg.validate()?;
    let eps = cfg.single_eps()?;
    let dt = cfg.dt.fixed().expect("validated");
    let fam = prepared(cfg, &[eps])?;
    let traj = run_nsm(&fam.states[0], cfg.t_end, StepSize::Fixed(dt), cfg.sample_every)?.into_result()?;
    let defects = |h: f64| -> Result<Vec<NsmResidual>> {
        traj.samples
            .iter()
            .map(|s| {
                let local = run_nsm(s, 2.0 * h, StepSize::Fixed(h), 1)?.into_result()?;
                let frames: Vec<NsmFields> = local.samples.iter().map(NsmFields::from).collect();
                Ok(residual_nsm(&frames, eps, cfg.nu)?[0])
            })
            .collect()
    };
    let coarse = defects(dt)?;
    let fine = defects(0.5 * dt)?;
    let (mc, mf) = (elementwise_max(&coarse), elementwise_max(&fine));
    let mut order = [None; 6];
    for i in 0..6 {
        if mc[i] > 1e-12 && mf[i] > 1e-12 {
            order[i] = Some((mc[i] / mf[i]).log2());
        }
    }
    Ok(ResidualCheck {
        eps,
        dt,
        coarse,
        fine,
        max_coarse: mc,
        max_fine: mf,
        order,
    })
}

/// Runs [`residual_check`] and writes `residual.csv` and `summary.json`.
pub fn run_residual_check(cfg: &RunConfig, dir: &Path) -> Result<ResidualCheck> {
    let rc = residual_check(cfg)?;
    create_dir(dir)?;
    write_json(&dir.join("config.json"), cfg)?;
    let header = ["t", "h", "momentum", "ampere", "faraday", "div_u", "div_b", "ohm"];
    let rows = [(rc.dt, &rc.coarse), (0.5 * rc.dt, &rc.fine)]
        .into_iter()
        .flat_map(|(h, rs)| {
            rs.iter().map(move |r| {
                let v = r.values();
                [r.t, h, v[0], v[1], v[2], v[3], v[4], v[5]]
            })
        });
    write_csv(&dir.join("residual.csv"), &header, rows)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        eps: f64,
        dt: f64,
        equations: [&'a str; 6],
        max_coarse: [f64; 6],
        max_fine: [f64; 6],
        order: [Option<f64>; 6],
    }
    write_json(
        &dir.join("summary.json"),
        &Summary {
            eps: rc.eps,
            dt: rc.dt,
            equations: NsmResidual::NAMES,
            max_coarse: rc.max_coarse,
            max_fine: rc.max_fine,
            order: rc.order,
        },
    )?;
    Ok(rc)
}
