//! Energy functionals, the differential-inequality monitors and the
//! convergence metrics of the `ε → 0` study.
//!
//! All time derivatives inside the functionals come from the equations
//! ([`derived_fields`], [`nsm_rhs`]), so every functional is an
//! instantaneous function of the state. Only the monitors difference in time.

use crate::error::{Error, Result};
use crate::field::{curl25, divergence, Field3};
use crate::mhd::MhdState;
use crate::nsm::{derived_fields, nsm_rhs, DerivedFields, NsmState};
use crate::spectral::{Grid, ScalarField2D};

/// Velocity and magnetic field of a solver state.
pub trait FlowState {
    fn velocity(&self) -> &Field3;
    fn magnetic(&self) -> &Field3;
    fn time(&self) -> f64;
}

impl FlowState for NsmState {
    fn velocity(&self) -> &Field3 {
        &self.u
    }
    fn magnetic(&self) -> &Field3 {
        &self.b
    }
    fn time(&self) -> f64 {
        self.t
    }
}

impl FlowState for MhdState {
    fn velocity(&self) -> &Field3 {
        &self.u
    }
    fn magnetic(&self) -> &Field3 {
        &self.b
    }
    fn time(&self) -> f64 {
        self.t
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// `(𝓔₁, 𝓓₁, 𝓔₂, 𝓓₂)` of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Functionals {
    pub e1: f64,
    pub d1: f64,
    pub e2: f64,
    pub d2: f64,
}

/// `𝓔₁ = ∫ |u|²/2 + |B + 2ε∂ₜB|²/2 + 3ε|∇B|² + ε²|∂ₜB|² + ε|E|²/2` with
/// `∂ₜB` from `d` and the weight `eps` (which may be 0).
pub fn functional_e1_weighted(s: &NsmState, d: &DerivedFields, eps: f64) -> Result<f64> {
    let shifted = s.b.axpy(2.0 * eps, &d.dtb)?;
    Ok(0.5 * sq(s.u.l2_norm())
        + 0.5 * sq(shifted.l2_norm())
        + 3.0 * eps * s.b.grad_norm_sqr()
        + sq(eps) * sq(d.dtb.l2_norm())
        + 0.5 * eps * sq(s.e.l2_norm()))
}

/// `𝓓₁ = ∫ ε²|∂ₜE|² + |∇u|²/2 + |∇B|²/2 + ε|∂ₜB|²`.
pub fn functional_d1_weighted(s: &NsmState, d: &DerivedFields, eps: f64) -> f64 {
    sq(eps) * sq(d.dte.l2_norm())
        + 0.5 * s.u.grad_norm_sqr()
        + 0.5 * s.b.grad_norm_sqr()
        + eps * sq(d.dtb.l2_norm())
}

pub fn functional_e1(s: &NsmState) -> Result<f64> {
    functional_e1_weighted(s, &derived_fields(s)?, s.eps)
}

pub fn functional_d1(s: &NsmState) -> Result<f64> {
    Ok(functional_d1_weighted(s, &derived_fields(s)?, s.eps))
}

/// `𝓔₂ = ∫ |∇u|²/2 + ε|Δu|²/2 + |∇B + 2ε∂ₜ∇B|²/2 + 3ε|ΔB|² + ε²|∂ₜ∇B|² + ε|∇E|²/2`.
fn e2_from(s: &NsmState, d: &DerivedFields) -> Result<f64> {
    let eps = s.eps;
    let shifted = s.b.axpy(2.0 * eps, &d.dtb)?;
    Ok(0.5 * s.u.grad_norm_sqr()
        + 0.5 * eps * sq(s.u.laplacian().l2_norm())
        + 0.5 * shifted.grad_norm_sqr()
        + 3.0 * eps * sq(s.b.laplacian().l2_norm())
        + sq(eps) * d.dtb.grad_norm_sqr()
        + 0.5 * eps * s.e.grad_norm_sqr())
}

/// `𝓓₂ = ¼ ∫ |Δu|² + |ΔB|² + ε|∂ₜ∇u|² + ε²|∂ₜ∇E|²`, with `∂ₜu` the
/// projected (pressure-free) tendency.
fn d2_from(s: &NsmState, d: &DerivedFields, du: &Field3) -> f64 {
    let eps = s.eps;
    0.25 * (sq(s.u.laplacian().l2_norm())
        + sq(s.b.laplacian().l2_norm())
        + eps * du.grad_norm_sqr()
        + sq(eps) * d.dte.grad_norm_sqr())
}

pub fn functional_e2(s: &NsmState) -> Result<f64> {
    e2_from(s, &derived_fields(s)?)
}

pub fn functional_d2(s: &NsmState) -> Result<f64> {
    let (du, _, _) = nsm_rhs(s)?;
    Ok(d2_from(s, &derived_fields(s)?, &du))
}

pub fn functionals(s: &NsmState) -> Result<Functionals> {
    let d = derived_fields(s)?;
    let (du, _, _) = nsm_rhs(s)?;
    Ok(Functionals {
        e1: functional_e1_weighted(s, &d, s.eps)?,
        d1: functional_d1_weighted(s, &d, s.eps),
        e2: e2_from(s, &d)?,
        d2: d2_from(s, &d, &du),
    })
}

/// Fixed test fields for the singular terms `ε∬(∂ₜE×B)·φ` and `ε∬∂ₜ²B·ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctions {
    pub phi: Field3,
    pub psi: Field3,
}

impl TestFunctions {
    /// `φ = (−∂₂χ, ∂₁χ, 0)` with `χ = sin x₁ sin x₂`, and
    /// `ψ = p·(1, 1, 0)` with `p = sin x₁ sin x₂`.
    pub fn standard(g: &Grid) -> Self {
        let chi = ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin());
        let p = ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin());
        Self {
            phi: Field3::from_stream_function(&chi),
            psi: Field3::new(p.clone(), p, ScalarField2D::zeros(g)).expect("shared grid"),
        }
    }
}

/// Instantaneous `(ε∫(∂ₜE×B)·φ, ε∫∂ₜ²B·ψ)`.
pub fn vanishing_integrands(s: &NsmState, d: &DerivedFields, tf: &TestFunctions) -> Result<(f64, f64)> {
    let a = crate::field::cross(&d.dte, &s.b)?.inner(&tf.phi)?;
    let b = d.dttb.inner(&tf.psi)?;
    Ok((s.eps * a, s.eps * b))
}

/// One time sample of every diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// `ε`; 0 for MHD states.
    pub eps: f64,
    /// `∫ |u|² + |B|² + ε|E|²`.
    pub e_classical: f64,
    /// `2∫ ν|∇u|² + |j|²`.
    pub d_classical: f64,
    pub e1: f64,
    pub d1: f64,
    pub e2: f64,
    pub d2: f64,
    pub linf_u: f64,
    pub linf_b: f64,
    /// `C/√ε − (‖u‖∞ + ‖B‖∞)`.
    pub smallness_margin: f64,
    pub div_u_l2: f64,
    pub div_b_l2: f64,
    /// `‖u₃‖₂ + ‖B₃‖₂`.
    pub third_comp: f64,
    /// `‖curl B − j‖₂`.
    pub ampere_residual: f64,
    pub mean_e: [f64; 3],
    pub vanishing_1: f64,
    pub vanishing_2: f64,
}

impl EnergyReport {
    /// Column names in the order of [`EnergyReport::values`].
    pub const COLUMNS: [&'static str; 21] = [
        "t",
        "eps",
        "e_classical",
        "d_classical",
        "e1",
        "d1",
        "e2",
        "d2",
        "linf_u",
        "linf_b",
        "smallness_margin",
        "div_u_l2",
        "div_b_l2",
        "third_comp",
        "ampere_residual",
        "mean_e1",
        "mean_e2",
        "mean_e3",
        "vanishing_1",
        "vanishing_2",
        "linf_sum",
    ];

    pub fn values(&self) -> [f64; 21] {
        [
            self.t,
            self.eps,
            self.e_classical,
            self.d_classical,
            self.e1,
            self.d1,
            self.e2,
            self.d2,
            self.linf_u,
            self.linf_b,
            self.smallness_margin,
            self.div_u_l2,
            self.div_b_l2,
            self.third_comp,
            self.ampere_residual,
            self.mean_e[0],
            self.mean_e[1],
            self.mean_e[2],
            self.vanishing_1,
            self.vanishing_2,
            self.linf_u + self.linf_b,
        ]
    }

    pub fn is_finite(&self) -> bool {
        // the margin is +∞ for MHD states
        self.values()
            .iter()
            .enumerate()
            .all(|(i, v)| v.is_finite() || (i == 10 && *v == f64::INFINITY))
    }
}

/// Diagnostics of an NSM state; `c` is the reference smallness constant.
pub fn energy_report(s: &NsmState, c: f64, tf: &TestFunctions) -> Result<EnergyReport> {
    let d = derived_fields(s)?;
    let (du, _, _) = nsm_rhs(s)?;
    let (v1, v2) = vanishing_integrands(s, &d, tf)?;
    let linf_u = s.u.linf_norm();
    let linf_b = s.b.linf_norm();
    Ok(EnergyReport {
        t: s.t,
        eps: s.eps,
        e_classical: s.classical_energy(),
        d_classical: 2.0 * (s.nu * s.u.grad_norm_sqr() + sq(d.j.l2_norm())),
        e1: functional_e1_weighted(s, &d, s.eps)?,
        d1: functional_d1_weighted(s, &d, s.eps),
        e2: e2_from(s, &d)?,
        d2: d2_from(s, &d, &du),
        linf_u,
        linf_b,
        smallness_margin: c / s.eps.sqrt() - (linf_u + linf_b),
        div_u_l2: divergence(&s.u).l2_norm(),
        div_b_l2: divergence(&s.b).l2_norm(),
        third_comp: s.u.component(2).l2_norm() + s.b.component(2).l2_norm(),
        ampere_residual: curl25(&s.b).sub(&d.j)?.l2_norm(),
        mean_e: s.e.mean(),
        vanishing_1: v1,
        vanishing_2: v2,
    })
}

/// Diagnostics of an MHD state, i.e. the functionals with `ε = 0` and
/// `j = curl B`: `𝓔₁ = ½∫|u|²+|B|²`, `𝓓₁ = ½∫|∇u|²+|∇B|²`, `𝓔₂ = ½∫|∇u|²+|∇B|²`,
/// `𝓓₂ = ¼∫|Δu|²+|ΔB|²`, classical dissipation `2∫ν|∇u|² + μ|∇B|²`.
pub fn mhd_energy_report(s: &MhdState) -> EnergyReport {
    let linf_u = s.u.linf_norm();
    let linf_b = s.b.linf_norm();
    let (gu, gb) = (s.u.grad_norm_sqr(), s.b.grad_norm_sqr());
    let (lu, lb) = (sq(s.u.laplacian().l2_norm()), sq(s.b.laplacian().l2_norm()));
    EnergyReport {
        t: s.t,
        eps: 0.0,
        e_classical: s.energy(),
        d_classical: 2.0 * (s.nu * gu + s.mu * gb),
        e1: 0.5 * s.energy(),
        d1: 0.5 * (gu + gb),
        e2: 0.5 * (gu + gb),
        d2: 0.25 * (lu + lb),
        linf_u,
        linf_b,
        smallness_margin: f64::INFINITY,
        div_u_l2: divergence(&s.u).l2_norm(),
        div_b_l2: divergence(&s.b).l2_norm(),
        third_comp: s.u.component(2).l2_norm() + s.b.component(2).l2_norm(),
        ampere_residual: 0.0,
        mean_e: [0.0; 3],
        vanishing_1: 0.0,
        vanishing_2: 0.0,
    }
}

/// Outcome of a differential-inequality check on one sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalStatus {
    Holds,
    Violated,
    /// The smallness condition failed at an endpoint.
    NotApplicable,
}

/// `ΔE₁/Δt + mean(D₁)` on `[t0, t1]` against `slack = tol_abs + tol_rel·mean(D₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaE1Interval {
    pub t0: f64,
    pub t1: f64,
    pub lhs: f64,
    pub slack: f64,
    pub status: IntervalStatus,
}

/// Tolerances of [`check_lemma_e1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Self { abs: 1e-6, rel: 1e-2 }
    }
}

fn smallness_holds(r: &EnergyReport, c: f64) -> bool {
    r.linf_u + r.linf_b <= c / r.eps.sqrt()
}

fn intervals(samples: &[EnergyReport]) -> Result<std::slice::Windows<'_, EnergyReport>> {
    if samples.len() < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    for w in samples.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::TimeMismatch {
                left: w[0].t,
                right: w[1].t,
            });
        }
    }
    Ok(samples.windows(2))
}

/// Discrete check of `d𝓔₁/dt + 𝓓₁ ≤ 0` on every interval where
/// `‖u‖∞ + ‖B‖∞ ≤ C₁/√ε` at both endpoints.
pub fn check_lemma_e1(samples: &[EnergyReport], c1: f64, slack: Slack) -> Result<Vec<LemmaE1Interval>> {
    Ok(intervals(samples)?
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let dt = b.t - a.t;
            let mean_d1 = 0.5 * (a.d1 + b.d1);
            let lhs = (b.e1 - a.e1) / dt + mean_d1;
            let tol = slack.abs + slack.rel * mean_d1;
            let status = if !(smallness_holds(a, c1) && smallness_holds(b, c1)) {
                IntervalStatus::NotApplicable
            } else if lhs <= tol {
                IntervalStatus::Holds
            } else {
                IntervalStatus::Violated
            };
            LemmaE1Interval {
                t0: a.t,
                t1: b.t,
                lhs,
                slack: tol,
                status,
            }
        })
        .collect())
}

/// Implied constant `Ĉ = max(0, ΔE₂/Δt + mean D₂) / ((1 + E₁)·D₁·E₂)` on one
/// interval, with interval means of `E₁`, `D₁`, `E₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaE2Interval {
    pub t0: f64,
    pub t1: f64,
    pub c_hat: f64,
    pub applicable: bool,
}

/// Ratios `Ĉ` of the second-order inequality; intervals failing the
/// smallness condition with constant `c2` are marked not applicable.
pub fn check_lemma_e2(samples: &[EnergyReport], c2: f64) -> Result<Vec<LemmaE2Interval>> {
    Ok(intervals(samples)?
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let dt = b.t - a.t;
            let num = ((b.e2 - a.e2) / dt + 0.5 * (a.d2 + b.d2)).max(0.0);
            let den = (1.0 + 0.5 * (a.e1 + b.e1)) * 0.5 * (a.d1 + b.d1) * 0.5 * (a.e2 + b.e2);
            let c_hat = if num == 0.0 {
                0.0
            } else if den > 0.0 {
                num / den
            } else {
                f64::INFINITY
            };
            LemmaE2Interval {
                t0: a.t,
                t1: b.t,
                c_hat,
                applicable: smallness_holds(a, c2) && smallness_holds(b, c2),
            }
        })
        .collect())
}

/// Largest applicable `Ĉ` of a run (0 if none applies).
pub fn max_c_hat(intervals: &[LemmaE2Interval]) -> f64 {
    intervals
        .iter()
        .filter(|i| i.applicable)
        .map(|i| i.c_hat)
        .fold(0.0, f64::max)
}

/// Trapezoid rule over `(t, f)` samples.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// Magnitudes `|∫ε∫(∂ₜE×B)·φ|` and `|∫ε∫∂ₜ²B·ψ|` over a sampled run.
pub fn vanishing_terms(traj: &[NsmState], tf: &TestFunctions) -> Result<(f64, f64)> {
    let mut t = Vec::with_capacity(traj.len());
    let mut a = Vec::with_capacity(traj.len());
    let mut b = Vec::with_capacity(traj.len());
    for s in traj {
        s.grid().check_same(tf.phi.grid())?;
        let (x, y) = vanishing_integrands(s, &derived_fields(s)?, tf)?;
        t.push(s.t);
        a.push(x);
        b.push(y);
    }
    Ok((trapezoid(&t, &a).abs(), trapezoid(&t, &b).abs()))
}

/// Time-integrated vanishing terms from a report series.
pub fn vanishing_from_reports(reports: &[EnergyReport]) -> (f64, f64) {
    let t: Vec<f64> = reports.iter().map(|r| r.t).collect();
    let a: Vec<f64> = reports.iter().map(|r| r.vanishing_1).collect();
    let b: Vec<f64> = reports.iter().map(|r| r.vanishing_2).collect();
    (trapezoid(&t, &a).abs(), trapezoid(&t, &b).abs())
}

/// `(‖u_a − u_b‖_{H¹}, ‖B_a − B_b‖_{H¹})` for states at the same time.
pub fn h1_distance(a: &impl FlowState, b: &impl FlowState) -> Result<(f64, f64)> {
    a.velocity().grid().check_same(b.velocity().grid())?;
    let (ta, tb) = (a.time(), b.time());
    if (ta - tb).abs() > 1e-9 * ta.abs().max(tb.abs()).max(1.0) {
        return Err(Error::TimeMismatch { left: ta, right: tb });
    }
    Ok((
        a.velocity().sub(b.velocity())?.h1_norm(),
        a.magnetic().sub(b.magnetic())?.h1_norm(),
    ))
}

/// `(‖u₃‖₂, ‖B₃‖₂)`.
pub fn third_component_norms(s: &impl FlowState) -> (f64, f64) {
    (
        s.velocity().component(2).l2_norm(),
        s.magnetic().component(2).l2_norm(),
    )
}

/// Distances between one NSM run and the MHD reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub eps: f64,
    pub sup_h1_u: f64,
    pub sup_h1_b: f64,
    pub l2_final_u: f64,
    pub l2_final_b: f64,
    pub vanishing_1: f64,
    pub vanishing_2: f64,
}

impl ConvergenceRecord {
    /// Compares sample by sample; both runs must be sampled at the same times.
    pub fn from_runs(
        eps: f64,
        nsm: &[NsmState],
        mhd: &[MhdState],
        vanishing: (f64, f64),
    ) -> Result<Self> {
        if nsm.len() != mhd.len() || nsm.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "runs have {} and {} samples",
                nsm.len(),
                mhd.len()
            )));
        }
        let mut rec = Self {
            eps,
            sup_h1_u: 0.0,
            sup_h1_b: 0.0,
            l2_final_u: 0.0,
            l2_final_b: 0.0,
            vanishing_1: vanishing.0,
            vanishing_2: vanishing.1,
        };
        for (a, b) in nsm.iter().zip(mhd) {
            let (du, db) = h1_distance(a, b)?;
            rec.sup_h1_u = rec.sup_h1_u.max(du);
            rec.sup_h1_b = rec.sup_h1_b.max(db);
        }
        let (a, b) = (nsm.last().unwrap(), mhd.last().unwrap());
        rec.l2_final_u = a.u.sub(&b.u)?.l2_norm();
        rec.l2_final_b = a.b.sub(&b.b)?.l2_norm();
        Ok(rec)
    }
}

/// Least-squares slope of `log d` against `log x`.
pub fn fit_log_slope(x: &[f64], d: &[f64]) -> Result<f64> {
    if x.len() != d.len() {
        return Err(Error::InvalidParameter("mismatched fit data".into()));
    }
    if x.len() < 3 {
        return Err(Error::NotEnoughSamples {
            needed: 3,
            got: x.len(),
        });
    }
    if x.iter().chain(d).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("fit data must be positive and finite".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ld: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let md = ld.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| sq(v - mx)).sum();
    if sxx <= 1e-24 {
        return Err(Error::InvalidParameter("fit abscissae are not distinct".into()));
    }
    let sxd: f64 = lx.iter().zip(&ld).map(|(a, b)| (a - mx) * (b - md)).sum();
    Ok(sxd / sxx)
}

/// Fitted orders `p` in `sup_t ‖·‖_{H¹} ∝ εᵖ` for `u` and `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOrder {
    pub u: f64,
    pub b: f64,
}

pub fn fit_convergence_order(records: &[ConvergenceRecord]) -> Result<ConvergenceOrder> {
    let eps: Vec<f64> = records.iter().map(|r| r.eps).collect();
    let du: Vec<f64> = records.iter().map(|r| r.sup_h1_u).collect();
    let db: Vec<f64> = records.iter().map(|r| r.sup_h1_b).collect();
    Ok(ConvergenceOrder {
        u: fit_log_slope(&eps, &du)?,
        b: fit_log_slope(&eps, &db)?,
    })
}

/// `ΔE/Δt + 2·mean(∫|∇u|² + |j|²)` on one sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceInterval {
    pub t0: f64,
    pub t1: f64,
    pub residual: f64,
}

/// Per-interval defect of the classical energy equality.
pub fn energy_balance_residual(traj: &[NsmState]) -> Result<Vec<BalanceInterval>> {
    let reports: Vec<(f64, f64, f64)> = traj
        .iter()
        .map(|s| {
            let j = crate::field::ohm_current(&s.u, &s.b, &s.e)?;
            let d = 2.0 * (s.nu * s.u.grad_norm_sqr() + sq(j.l2_norm()));
            Ok((s.t, s.classical_energy(), d))
        })
        .collect::<Result<_>>()?;
    balance_from(&reports)
}

/// Same as [`energy_balance_residual`] from report rows.
pub fn energy_balance_from_reports(reports: &[EnergyReport]) -> Result<Vec<BalanceInterval>> {
    let rows: Vec<_> = reports.iter().map(|r| (r.t, r.e_classical, r.d_classical)).collect();
    balance_from(&rows)
}

fn balance_from(rows: &[(f64, f64, f64)]) -> Result<Vec<BalanceInterval>> {
    if rows.len() < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: rows.len(),
        });
    }
    rows.windows(2)
        .map(|w| {
            let ((t0, e0, d0), (t1, e1, d1)) = (w[0], w[1]);
            if !(t1 > t0) {
                return Err(Error::TimeMismatch { left: t0, right: t1 });
            }
            Ok(BalanceInterval {
                t0,
                t1,
                residual: (e1 - e0) / (t1 - t0) + 0.5 * (d0 + d1),
            })
        })
        .collect()
}

/// `∑ |r|·Δt` over the intervals.
pub fn integrated_balance(intervals: &[BalanceInterval]) -> f64 {
    intervals.iter().map(|i| i.residual.abs() * (i.t1 - i.t0)).sum()
}
