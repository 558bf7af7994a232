//! The ε-dependent Navier–Stokes–Maxwell system
//!
//! ```text
//! ∂ₜu − νΔu + (u·∇)u + ∇q = j × B
//! ε∂ₜE − curl B = −j
//! ∂ₜB + curl E = 0
//! div u = div B = 0,   j = E + u × B
//! ```
//!
//! integrated with the second-order exponential Runge–Kutta scheme
//! (ETD2RK). The stiff linear part (viscosity and the Maxwell–Ohm block) is
//! treated exactly per mode, so the step is not limited by `ε`.

use crate::error::{Error, Result};
use crate::field::{
    add_directional, cross_physical, curl25, grad_physical, leray_project, Field3,
};
use crate::maxwell::{symmetrized, LinearOps, PhiKind};
use crate::mhd::{check_solenoidal, pin_mean};
use crate::spectral::Grid;
use crate::time::{check_cfl, cfl_limit, drive, StepSize, Timed, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct NsmState {
    pub u: Field3,
    pub b: Field3,
    pub e: Field3,
    pub eps: f64,
    pub t: f64,
    /// Viscosity; 1 in the nondimensional system.
    pub nu: f64,
}

/// Time derivatives implied by the equations at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub j: Field3,
    pub dtb: Field3,
    pub dttb: Field3,
    pub dte: Field3,
}

impl NsmState {
    /// State at `t = 0` with `ν = 1`.
    pub fn new(u: Field3, b: Field3, e: Field3, eps: f64) -> Result<Self> {
        Self::with_viscosity(u, b, e, eps, 1.0)
    }

    pub fn with_viscosity(u: Field3, b: Field3, e: Field3, eps: f64, nu: f64) -> Result<Self> {
        u.grid().check_same(b.grid())?;
        u.grid().check_same(e.grid())?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be > 0")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("viscosity {nu} must be >= 0")));
        }
        let s = Self {
            u,
            b,
            e,
            eps,
            t: 0.0,
            nu,
        };
        s.check_invariants()?;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn check_invariants(&self) -> Result<()> {
        check_solenoidal(&self.u, "div u", "mean u")?;
        check_solenoidal(&self.b, "div B", "mean B")
    }

    /// `∫ |u|² + |B|² + ε|E|²`.
    pub fn classical_energy(&self) -> f64 {
        self.u.l2_norm().powi(2) + self.b.l2_norm().powi(2) + self.eps * self.e.l2_norm().powi(2)
    }
}

impl Timed for NsmState {
    fn time(&self) -> f64 {
        self.t
    }
    fn set_time(&mut self, t: f64) {
        self.t = t;
    }
    fn cfl(&self) -> f64 {
        cfl_limit(&self.u, &self.b)
    }
}

/// Products shared by the tendencies: dealiased `u×B` and the raw
/// projected momentum forcing `P[−(u·∇)u + j×B]` (mean removed).
struct Products {
    u_cross_b: Field3,
    forcing: Field3,
}

fn products(u: &Field3, b: &Field3, e: &Field3) -> Result<Products> {
    let g = u.grid();
    let up = u.to_physical();
    let bp = b.to_physical();
    let ep = e.to_physical();
    let u_cross_b = Field3::from_physical_dealiased(g, &cross_physical(&up, &bp))?;
    let uxb = u_cross_b.to_physical();
    let mut jp = ep;
    for (jc, xc) in jp.iter_mut().zip(&uxb) {
        for (a, b) in jc.iter_mut().zip(xc) {
            *a += b;
        }
    }
    let jxb = Field3::from_physical_dealiased(g, &cross_physical(&jp, &bp))?;
    let len = g.len();
    let mut adv = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    add_directional(&mut adv, -1.0, &up[0], &up[1], &grad_physical(u));
    let adv = Field3::from_physical_dealiased(g, &adv)?;
    let mut forcing = leray_project(&adv.add(&jxb)?);
    pin_mean(&mut forcing);
    Ok(Products { u_cross_b, forcing })
}

/// Full tendencies `(∂ₜu, ∂ₜB, ∂ₜE)`.
///
/// `∂ₜu = P[νΔu − (u·∇)u + j×B]` with its mean pinned to zero,
/// `∂ₜB = −curl E`, `∂ₜE = (curl B − j)/ε`.
pub fn nsm_rhs(s: &NsmState) -> Result<(Field3, Field3, Field3)> {
    s.check_invariants()?;
    let p = products(&s.u, &s.b, &s.e)?;
    let mut du = leray_project(&s.u.laplacian().scale(s.nu)).add(&p.forcing)?;
    pin_mean(&mut du);
    let db = curl25(&s.e).scale(-1.0);
    let j = s.e.add(&p.u_cross_b)?;
    let de = curl25(&s.b).sub(&j)?.scale(1.0 / s.eps);
    Ok((du, db, de))
}

/// `j`, `∂ₜB`, `∂ₜ²B`, `∂ₜE` from the equations (no time differencing).
pub fn derived_fields(s: &NsmState) -> Result<DerivedFields> {
    let j = crate::field::ohm_current(&s.u, &s.b, &s.e)?;
    let dtb = curl25(&s.e).scale(-1.0);
    let dte = curl25(&s.b).sub(&j)?.scale(1.0 / s.eps);
    let dttb = curl25(&dte).scale(-1.0);
    Ok(DerivedFields { j, dtb, dttb, dte })
}

/// Reusable ETD2RK stepper; the per-mode operators are rebuilt only when
/// the step, `ε`, `ν` or grid change.
#[derive(Debug, Clone, Default)]
pub struct NsmStepper {
    ops: Option<LinearOps>,
}

impl NsmStepper {
    pub fn new() -> Self {
        Self::default()
    }

    fn ops_for(&mut self, s: &NsmState, dt: f64) -> Result<&LinearOps> {
        let stale = match &self.ops {
            Some(o) => o.step() != dt || o.eps() != s.eps || o.nu() != s.nu || o.grid() != s.grid(),
            None => true,
        };
        if stale {
            self.ops = Some(LinearOps::new(s.grid(), dt, s.eps, s.nu)?);
        }
        Ok(self.ops.as_ref().expect("just built"))
    }

    /// One ETD2RK step, `a = e^{hL}Yₙ + hφ₁(hL)N(Yₙ)`,
    /// `Yₙ₊₁ = a + hφ₂(hL)(N(a) − N(Yₙ))`, in the variables `Y = (u, B, j)`.
    ///
    /// With `j = E + u×B` the Ampère–Maxwell law reads
    /// `ε∂ₜj = curl B − j + ε∂ₜ(u×B)`, so the linear part `L` (viscosity and
    /// the Maxwell–Ohm block acting on `(B, j)`) carries all of the `1/ε`
    /// stiffness and
    /// `N = (P[−(u·∇)u + j×B], curl(u×B), ∂ₜu×B + u×∂ₜB)`
    /// is bounded uniformly in `ε`. Integrating `E` directly instead leaves
    /// `−(u×B)/ε` in `N` and degrades the scheme to first order when `h ≫ ε`.
    pub fn step(&mut self, s: &NsmState, dt: f64) -> Result<NsmState> {
        check_cfl(dt, cfl_limit(&s.u, &s.b))?;
        let (eps, nu) = (s.eps, s.nu);
        let ops = self.ops_for(s, dt)?;

        let j0 = s.e.add(&crate::field::cross(&s.u, &s.b)?)?;
        let (n0u, n0b, n0j) = current_form_nonlinear(&s.u, &s.b, &j0, nu)?;
        let (xu, xb, xj) = ops.apply(PhiKind::Exp, &s.u, &s.b, &j0);
        let (pu, pb, pj) = ops.apply(PhiKind::Phi1, &n0u, &n0b, &n0j);
        let au = symmetrized(&xu.axpy(dt, &pu)?);
        let ab = symmetrized(&xb.axpy(dt, &pb)?);
        let aj = symmetrized(&xj.axpy(dt, &pj)?);

        let (n1u, n1b, n1j) = current_form_nonlinear(&au, &ab, &aj, nu)?;
        let (qu, qb, qj) = ops.apply(
            PhiKind::Phi2,
            &n1u.sub(&n0u)?,
            &n1b.sub(&n0b)?,
            &n1j.sub(&n0j)?,
        );
        let mut u = symmetrized(&au.axpy(dt, &qu)?);
        let mut b = symmetrized(&ab.axpy(dt, &qb)?);
        let j = symmetrized(&aj.axpy(dt, &qj)?);
        pin_mean(&mut u);
        pin_mean(&mut b);
        let e = j.sub(&crate::field::cross(&u, &b)?)?;

        let t = s.t + dt;
        if !(u.is_finite() && b.is_finite() && e.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let next = NsmState {
            u,
            b,
            e,
            eps,
            t,
            nu,
        };
        next.check_invariants()?;
        Ok(next)
    }
}

/// Nonlinear part of the system in the variables `(u, B, j)`:
/// `(P[−(u·∇)u + j×B], curl(u×B), ∂ₜu×B + u×∂ₜB)`, all products dealiased,
/// with `∂ₜu`, `∂ₜB` the full tendencies.
fn current_form_nonlinear(
    u: &Field3,
    b: &Field3,
    j: &Field3,
    nu: f64,
) -> Result<(Field3, Field3, Field3)> {
    let g = u.grid();
    let up = u.to_physical();
    let bp = b.to_physical();
    let u_cross_b = Field3::from_physical_dealiased(g, &cross_physical(&up, &bp))?;
    let jxb = Field3::from_physical_dealiased(g, &cross_physical(&j.to_physical(), &bp))?;
    let len = g.len();
    let mut adv = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    add_directional(&mut adv, -1.0, &up[0], &up[1], &grad_physical(u));
    let adv = Field3::from_physical_dealiased(g, &adv)?;
    let mut nu_ = leray_project(&adv.add(&jxb)?);
    pin_mean(&mut nu_);
    let nb = curl25(&u_cross_b);

    let dtu = u.laplacian().scale(nu).add(&nu_)?;
    let dtb = nb.sub(&curl25(j))?;
    let a = cross_physical(&dtu.to_physical(), &bp);
    let c = cross_physical(&up, &dtb.to_physical());
    let mut sum = a;
    for (x, y) in sum.iter_mut().zip(&c) {
        for (p, q) in x.iter_mut().zip(y) {
            *p += q;
        }
    }
    let nj = Field3::from_physical_dealiased(g, &sum)?;
    Ok((nu_, nb, nj))
}

/// One step from scratch; prefer [`NsmStepper`] or [`run_nsm`] for many steps.
pub fn step_nsm(s: &NsmState, dt: f64) -> Result<NsmState> {
    NsmStepper::new().step(s, dt)
}

/// Integrates to `s0.t + t_end`, sampling every `sample_every` steps and at
/// the end. A numerical abort is recorded in the returned trajectory.
pub fn run_nsm(
    s0: &NsmState,
    t_end: f64,
    dt: StepSize,
    sample_every: usize,
) -> Result<Trajectory<NsmState>> {
    s0.check_invariants()?;
    let mut stepper = NsmStepper::new();
    drive(s0.clone(), t_end, dt, sample_every, |s, h| stepper.step(s, h))
}
