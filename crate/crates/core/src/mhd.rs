//! Viscous resistive incompressible MHD on the torus, integrating-factor
//! midpoint (IF-RK2) in time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{add_directional, grad_physical, leray_project, Field3};
use crate::spectral::Grid;
use crate::time::{check_cfl, cfl_limit, drive, StepSize, Timed, Trajectory};

/// Tolerance for divergence and mean checks, relative to `max(1, ‖f‖₂)`.
pub const INVARIANT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct MhdState {
    pub u: Field3,
    pub b: Field3,
    pub t: f64,
    pub nu: f64,
    pub mu: f64,
}

impl MhdState {
    /// State at `t = 0`; rejects data that is not solenoidal and mean-free.
    pub fn new(u: Field3, b: Field3, nu: f64, mu: f64) -> Result<Self> {
        u.grid().check_same(b.grid())?;
        if !(nu >= 0.0 && mu >= 0.0 && nu.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "viscosity {nu} and resistivity {mu} must be finite and >= 0"
            )));
        }
        let s = Self {
            u,
            b,
            t: 0.0,
            nu,
            mu,
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

    /// `∫ |u|² + |B|²`.
    pub fn energy(&self) -> f64 {
        self.u.l2_norm().powi(2) + self.b.l2_norm().powi(2)
    }
}

impl Timed for MhdState {
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

pub(crate) fn check_solenoidal(f: &Field3, div: &'static str, mean: &'static str) -> Result<()> {
    let scale = f.l2_norm().max(1.0);
    let tol = INVARIANT_TOL * scale;
    let d = crate::field::divergence(f).l2_norm();
    if !(d <= tol) {
        return Err(Error::InvariantViolation {
            what: div,
            value: d,
            tol,
        });
    }
    let m = f.mean();
    let m = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if !(m <= tol) {
        return Err(Error::InvariantViolation {
            what: mean,
            value: m,
            tol,
        });
    }
    Ok(())
}

pub(crate) fn pin_mean(f: &mut Field3) {
    for i in 0..3 {
        f.component_mut(i).coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    }
}

/// Multiplies mode `k` of every component by `e^{−rate·|k|²·tau}`.
pub(crate) fn heat_factor(f: &Field3, rate: f64, tau: f64) -> Field3 {
    let g = f.grid().clone();
    f.map(|c| {
        c.map_modes(|i1, i2| {
            let k1 = g.wavenumber(i1) as f64;
            let k2 = g.wavenumber(i2) as f64;
            Complex64::new((-rate * (k1 * k1 + k2 * k2) * tau).exp(), 0.0)
        })
    })
}

/// Projected nonlinear tendencies `(P[−(u·∇)u + (B·∇)B], P[−(u·∇)B + (B·∇)u])`
/// with zero mean.
fn nonlinear(u: &Field3, b: &Field3) -> Result<(Field3, Field3)> {
    let g = u.grid();
    let up = u.to_physical();
    let bp = b.to_physical();
    let gu = grad_physical(u);
    let gb = grad_physical(b);
    let len = g.len();
    let zero = || [vec![0.0; len], vec![0.0; len], vec![0.0; len]];

    let mut nu_ = zero();
    add_directional(&mut nu_, -1.0, &up[0], &up[1], &gu);
    add_directional(&mut nu_, 1.0, &bp[0], &bp[1], &gb);
    let mut nb = zero();
    add_directional(&mut nb, -1.0, &up[0], &up[1], &gb);
    add_directional(&mut nb, 1.0, &bp[0], &bp[1], &gu);

    let mut du = leray_project(&Field3::from_physical_dealiased(g, &nu_)?);
    let mut db = leray_project(&Field3::from_physical_dealiased(g, &nb)?);
    pin_mean(&mut du);
    pin_mean(&mut db);
    Ok((du, db))
}

/// Full tendencies `(∂ₜu, ∂ₜB)`.
pub fn mhd_rhs(s: &MhdState) -> Result<(Field3, Field3)> {
    s.check_invariants()?;
    let (nu_, nb) = nonlinear(&s.u, &s.b)?;
    let mut du = leray_project(&s.u.laplacian().scale(s.nu).add(&nu_)?);
    pin_mean(&mut du);
    let db = s.b.laplacian().scale(s.mu).add(&nb)?;
    Ok((du, db))
}

/// One IF-RK2 step:
/// `Y* = e^{Lh/2}(Yₙ + h/2·N(Yₙ))`, `Yₙ₊₁ = e^{Lh}Yₙ + h·e^{Lh/2}N(Y*)`.
pub fn step_mhd(s: &MhdState, dt: f64) -> Result<MhdState> {
    check_cfl(dt, cfl_limit(&s.u, &s.b))?;
    let half = |f: &Field3, rate: f64| heat_factor(f, rate, 0.5 * dt);

    let (n0u, n0b) = nonlinear(&s.u, &s.b)?;
    let us = half(&s.u.axpy(0.5 * dt, &n0u)?, s.nu);
    let bs = half(&s.b.axpy(0.5 * dt, &n0b)?, s.mu);
    let (n1u, n1b) = nonlinear(&us, &bs)?;
    let u = half(&half(&s.u, s.nu).axpy(dt, &n1u)?, s.nu);
    let b = half(&half(&s.b, s.mu).axpy(dt, &n1b)?, s.mu);

    let t = s.t + dt;
    if !(u.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let next = MhdState {
        u,
        b,
        t,
        nu: s.nu,
        mu: s.mu,
    };
    next.check_invariants()?;
    Ok(next)
}

/// Integrates to `s0.t + t_end`, sampling every `sample_every` steps and at
/// the end. A numerical abort is recorded in the returned trajectory.
pub fn run_mhd(
    s0: &MhdState,
    t_end: f64,
    dt: StepSize,
    sample_every: usize,
) -> Result<Trajectory<MhdState>> {
    s0.check_invariants()?;
    drive(s0.clone(), t_end, dt, sample_every, step_mhd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::tests::random_solenoidal;
    use crate::spectral::ScalarField2D;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn normalized(f: Field3, amp: f64) -> Field3 {
        let m = f.linf_norm();
        f.scale(amp / m)
    }

    fn taylor_green(g: &Grid) -> Field3 {
        Field3::from_stream_function(&ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin()))
    }

    fn shear(g: &Grid) -> Field3 {
        Field3::from_fns(g, |_, _| 0.0, |x, _| x.sin(), |_, _| 0.0)
    }

    fn dist(a: &MhdState, b: &MhdState) -> f64 {
        (a.u.sub(&b.u).unwrap().l2_norm().powi(2) + a.b.sub(&b.b).unwrap().l2_norm().powi(2))
            .sqrt()
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = grid(16);
        let s = MhdState::new(Field3::zeros(&g), Field3::zeros(&g), 1.0, 1.0).unwrap();
        let (du, db) = mhd_rhs(&s).unwrap();
        assert_eq!(du.l2_norm(), 0.0);
        assert_eq!(db.l2_norm(), 0.0);
        let next = step_mhd(&s, 1e-2).unwrap();
        assert_eq!(next.u, s.u);
        assert_eq!(next.b, s.b);
    }

    #[test]
    fn elsasser_rhs_is_pure_diffusion() {
        let g = grid(32);
        let u = normalized(random_solenoidal(&g, 4, 3), 1.0);
        let s = MhdState::new(u.clone(), u.clone(), 0.7, 0.7).unwrap();
        let (du, db) = mhd_rhs(&s).unwrap();
        let lap = u.laplacian().scale(0.7);
        assert!(du.sub(&lap).unwrap().l2_norm() < 1e-12 * lap.l2_norm());
        assert!(db.sub(&lap).unwrap().l2_norm() < 1e-12 * lap.l2_norm());
    }

    #[test]
    fn taylor_green_rhs() {
        let g = grid(32);
        let u = taylor_green(&g);
        let s = MhdState::new(u.clone(), Field3::zeros(&g), 1.0, 1.0).unwrap();
        let (du, db) = mhd_rhs(&s).unwrap();
        let err = du.add(&u.scale(2.0)).unwrap().l2_norm();
        assert!(err < 1e-12 * u.l2_norm(), "{err}");
        assert!(db.l2_norm() < 1e-14);
    }

    #[test]
    fn rejects_compressible_or_mean_data() {
        let g = grid(16);
        let grad = Field3::from_fns(&g, |x, _| x.cos(), |_, _| 0.0, |_, _| 0.0);
        assert!(matches!(
            MhdState::new(grad, Field3::zeros(&g), 1.0, 1.0),
            Err(Error::InvariantViolation { what: "div u", .. })
        ));
        let mean = Field3::from_fns(&g, |_, _| 1.0, |_, _| 0.0, |_, _| 0.0);
        assert!(matches!(
            MhdState::new(Field3::zeros(&g), mean, 1.0, 1.0),
            Err(Error::InvariantViolation { what: "mean B", .. })
        ));
    }

    #[test]
    fn elsasser_single_mode_decays_exactly() {
        let g = grid(32);
        let s0 = MhdState::new(shear(&g), shear(&g), 1.0, 1.0).unwrap();
        let traj = run_mhd(&s0, 1.0, StepSize::Fixed(1e-3), 100)
            .unwrap()
            .into_result()
            .unwrap();
        let end = traj.last();
        assert!((end.t - 1.0).abs() < 1e-15);
        let exact = shear(&g).scale((-1.0f64).exp());
        assert!(end.u.sub(&exact).unwrap().linf_norm() <= 1e-8);
        assert!(end.b.sub(&exact).unwrap().linf_norm() <= 1e-8);
    }

    #[test]
    fn elsasser_symmetry_is_preserved() {
        let g = grid(32);
        let u = normalized(random_solenoidal(&g, 5, 11), 1.0);
        let s0 = MhdState::new(u.clone(), u, 1.0, 1.0).unwrap();
        let traj = run_mhd(&s0, 0.2, StepSize::Fixed(1e-2), 1).unwrap();
        for s in &traj.samples {
            assert!(s.u.sub(&s.b).unwrap().l2_norm() <= 1e-10);
        }
    }

    #[test]
    fn second_order_in_time() {
        let g = grid(32);
        let u = normalized(random_solenoidal(&g, 4, 5), 1.0);
        let b = normalized(random_solenoidal(&g, 4, 6), 1.0);
        let s0 = MhdState::new(u, b, 0.05, 0.05).unwrap();
        let end = |dt: f64| {
            run_mhd(&s0, 0.5, StepSize::Fixed(dt), 1000)
                .unwrap()
                .into_result()
                .unwrap()
                .last()
                .clone()
        };
        let (a, b, c) = (end(2e-2), end(1e-2), end(5e-3));
        let ratio = dist(&a, &b) / dist(&b, &c);
        assert!((3.8..=4.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn half_runs_compose() {
        let g = grid(16);
        let u = normalized(random_solenoidal(&g, 3, 8), 1.0);
        let b = normalized(random_solenoidal(&g, 3, 9), 1.0);
        let s0 = MhdState::new(u, b, 1.0, 1.0).unwrap();
        let full = run_mhd(&s0, 0.2, StepSize::Fixed(1e-2), 5).unwrap();
        let first = run_mhd(&s0, 0.1, StepSize::Fixed(1e-2), 5).unwrap();
        let second = run_mhd(first.last(), 0.1, StepSize::Fixed(1e-2), 5).unwrap();
        assert_eq!(full.samples.len(), 5);
        assert!(dist(full.last(), second.last()) <= 1e-14);
        assert!((full.last().t - second.last().t).abs() < 1e-15);
    }

    #[test]
    fn energy_decreases_and_invariants_hold() {
        let g = grid(32);
        let u = normalized(random_solenoidal(&g, 5, 21), 1.5);
        let b = normalized(random_solenoidal(&g, 5, 22), 1.5);
        let s0 = MhdState::new(u, b, 0.1, 0.2).unwrap();
        let traj = run_mhd(&s0, 0.5, StepSize::Auto, 1).unwrap().into_result().unwrap();
        assert!(traj.samples.len() > 5);
        for w in traj.samples.windows(2) {
            assert!(w[1].energy() <= w[0].energy());
            w[1].check_invariants().unwrap();
            assert!(w[1].u.component(2).l2_norm() == 0.0);
        }
        for &dt in &traj.dts {
            assert!(dt <= 0.5 * g.spacing() + 1e-15);
        }
    }

    #[test]
    fn zero_duration_returns_initial_state() {
        let g = grid(16);
        let s0 = MhdState::new(shear(&g), Field3::zeros(&g), 1.0, 1.0).unwrap();
        let traj = run_mhd(&s0, 0.0, StepSize::Fixed(1e-2), 1).unwrap();
        assert_eq!(traj.samples, vec![s0]);
    }

    #[test]
    fn cfl_and_nan_are_reported() {
        let g = grid(16);
        let s0 = MhdState::new(shear(&g), Field3::zeros(&g), 1.0, 1.0).unwrap();
        assert!(matches!(step_mhd(&s0, 1.0), Err(Error::CflViolation { .. })));

        let mut bad = s0.clone();
        bad.u.component_mut(1).coeffs_mut()[1] = Complex64::new(f64::NAN, 0.0);
        let traj = run_mhd(&s0, 0.0, StepSize::Fixed(1e-2), 1).unwrap();
        assert!(traj.abort.is_none());
        assert!(step_mhd(&bad, 1e-2).is_err());
    }
}
