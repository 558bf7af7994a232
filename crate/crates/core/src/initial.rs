//! Well-prepared initial data: test problems, spectral mollification and the
//! electric field `E₀` solving `curl E₀ = −∂ₜB|_{t=0}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Field3;
use crate::mhd::{check_solenoidal, mhd_rhs, MhdState, INVARIANT_TOL};
use crate::nsm::NsmState;
use crate::spectral::{Grid, ScalarField2D};

/// Named test problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `ψ = sin x₁ sin x₂` for `u`, `ψ_B = cos x₁ sin x₂` for `B`.
    TaylorGreenMhd,
    /// `u = (−sin x₂, sin x₁)`, `B = (−sin x₂, sin 2x₁)`.
    OrszagTangLike,
    /// Random phases with `|û(k)| ∝ |k|^{−decay}` on the resolved band.
    RandomSmooth { seed: u64, decay: f64 },
}

impl InitialCondition {
    pub const NAMES: [&'static str; 3] = ["taylor-green-mhd", "orszag-tang-like", "random-smooth"];

    /// Looks up a problem by name; `seed` and `decay` are used by `random-smooth` only.
    pub fn from_name(name: &str, seed: u64, decay: f64) -> Result<Self> {
        match name {
            "taylor-green-mhd" => Ok(Self::TaylorGreenMhd),
            "orszag-tang-like" => Ok(Self::OrszagTangLike),
            "random-smooth" => Ok(Self::RandomSmooth { seed, decay }),
            other => Err(Error::UnknownInitialCondition(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::TaylorGreenMhd => Self::NAMES[0],
            Self::OrszagTangLike => Self::NAMES[1],
            Self::RandomSmooth { .. } => Self::NAMES[2],
        }
    }
}

/// Planar, divergence-free, zero-mean `(u₀, B₀)` scaled by `amplitude`.
///
/// The analytic problems are multiplied by `amplitude`; `random-smooth`
/// fields are normalised so that `‖·‖∞ = amplitude` on the grid.
pub fn standard_ic(ic: &InitialCondition, grid: &Grid, amplitude: f64) -> Result<(Field3, Field3)> {
    if !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude {amplitude} must be finite")));
    }
    let zero = |_: f64, _: f64| 0.0;
    let (u, b) = match *ic {
        InitialCondition::TaylorGreenMhd => (
            Field3::from_stream_function(&ScalarField2D::from_fn(grid, |x, y| x.sin() * y.sin())),
            Field3::from_stream_function(&ScalarField2D::from_fn(grid, |x, y| x.cos() * y.sin())),
        ),
        InitialCondition::OrszagTangLike => (
            Field3::from_fns(grid, |_, y| -y.sin(), |x, _| x.sin(), zero),
            Field3::from_fns(grid, |_, y| -y.sin(), |x, _| (2.0 * x).sin(), zero),
        ),
        InitialCondition::RandomSmooth { seed, decay } => {
            if !(decay.is_finite() && decay >= 0.0) {
                return Err(Error::InvalidParameter(format!("decay rate {decay} must be >= 0")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || {
                let f = Field3::from_stream_function(&random_stream(grid, decay, &mut rng));
                let m = f.linf_norm();
                if m > 0.0 {
                    f.scale(1.0 / m)
                } else {
                    f
                }
            };
            let u = draw();
            (u, draw())
        }
    };
    Ok((u.scale(amplitude), b.scale(amplitude)))
}

/// Stream function with `|ψ̂(k)| = |k|^{−decay−1}` and uniform random phases
/// on `0 < max(|k₁|,|k₂|) ≤ n/3`.
fn random_stream(g: &Grid, decay: f64, rng: &mut ChaCha8Rng) -> ScalarField2D {
    let n = g.n();
    let kmax = (n / 3) as i64;
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    // only one of each ±k pair is drawn; from_coeffs fills in the conjugate
    for k1 in 0..=kmax {
        for k2 in -kmax..=kmax {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let phase = rng.gen_range(0.0..2.0 * PI);
            c[g.index_of(k1) * n + g.index_of(k2)] = Complex64::from_polar(r.powf(-decay - 1.0), phase);
        }
    }
    ScalarField2D::from_coeffs(g, c).expect("buffer sized to the grid")
}

/// Zeroes every mode with `|k| > cutoff` (Euclidean radius).
pub fn mollify(f: &Field3, cutoff: f64) -> Result<Field3> {
    let g = f.grid();
    let limit = g.n() as f64 / 3.0;
    if !(cutoff >= 0.0 && cutoff <= limit) {
        return Err(Error::InvalidParameter(format!(
            "mollification cutoff {cutoff} must lie in [0, n/3 = {limit}]"
        )));
    }
    let g2 = g.clone();
    let keep = move |i1: usize, i2: usize| {
        let (k1, k2) = (g2.wavenumber(i1) as f64, g2.wavenumber(i2) as f64);
        if (k1 * k1 + k2 * k2).sqrt() <= cutoff {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    Ok(f.map(|c| c.map_modes(&keep)))
}

/// `∂ₜB` of the MHD system at `t = 0`: `μΔB₀ − (u₀·∇)B₀ + (B₀·∇)u₀`.
pub fn dtb_at_zero(u0: &Field3, b0: &Field3, mu: f64) -> Result<Field3> {
    let s = MhdState::new(u0.clone(), b0.clone(), 0.0, mu)?;
    Ok(mhd_rhs(&s)?.1)
}

/// `E₀ = (0, 0, e₃)` with `curl E₀ = −d`, `mean(e₃) = 0`.
pub fn solve_e0(d: &Field3) -> Result<Field3> {
    check_solenoidal(d, "div dtB", "mean dtB")?;
    let g = d.grid();
    let third = d.component(2).l2_norm();
    if third > INVARIANT_TOL * d.l2_norm().max(1.0) {
        return Err(Error::InvariantViolation {
            what: "third component of dtB",
            value: third,
            tol: INVARIANT_TOL,
        });
    }
    let n = g.n();
    let (d1, d2) = (d.component(0).coeffs(), d.component(1).coeffs());
    let mut e3 = vec![Complex64::new(0.0, 0.0); n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let k1 = g.derivative_wavenumber(i1);
            let k2 = g.derivative_wavenumber(i2);
            let kk = k1 * k1 + k2 * k2;
            if kk > 0.0 {
                let idx = i1 * n + i2;
                e3[idx] = Complex64::i() * (k2 * d1[idx] - k1 * d2[idx]) / kk;
            }
        }
    }
    let zero = ScalarField2D::zeros(g);
    Field3::new(zero.clone(), zero, ScalarField2D::from_raw(g, e3))
}

/// Parameters of [`prepare_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyOptions {
    /// Mollification radius, at most `n/3`.
    pub cutoff: f64,
    /// Resistivity of the reference MHD system used for `∂ₜB|₀`.
    pub mu: f64,
    /// Viscosity of the NSM states.
    pub nu: f64,
    /// Reference constant `C` of the smallness threshold `C/√ε`.
    pub threshold: f64,
}

impl FamilyOptions {
    /// Cutoff at the 2/3 band edge, unit coefficients.
    pub fn for_grid(g: &Grid) -> Self {
        Self {
            cutoff: (g.n() / 3) as f64,
            mu: 1.0,
            nu: 1.0,
            threshold: 1.0,
        }
    }
}

/// `‖u₀‖∞ + ‖B₀‖∞` against `C/√ε` for one member of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessCheck {
    pub eps: f64,
    pub linf_sum: f64,
    pub threshold: f64,
}

impl SmallnessCheck {
    pub fn margin(&self) -> f64 {
        self.threshold - self.linf_sum
    }

    pub fn holds(&self) -> bool {
        self.linf_sum <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFamily {
    pub states: Vec<NsmState>,
    pub checks: Vec<SmallnessCheck>,
}

impl PreparedFamily {
    /// Members whose data exceed the smallness threshold.
    pub fn warnings(&self) -> impl Iterator<Item = &SmallnessCheck> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

/// One well-prepared NSM state per `ε`: mollified `(u₀, B₀)` (same for all
/// `ε`) and `E₀ = mollify(solve_e0(dtb_at_zero(u₀, B₀, μ)))`.
pub fn prepare_family(
    u0: &Field3,
    b0: &Field3,
    eps_list: &[f64],
    opts: &FamilyOptions,
) -> Result<PreparedFamily> {
    let mut out = PreparedFamily {
        states: Vec::with_capacity(eps_list.len()),
        checks: Vec::with_capacity(eps_list.len()),
    };
    if eps_list.is_empty() {
        return Ok(out);
    }
    let u = mollify(u0, opts.cutoff)?;
    let b = mollify(b0, opts.cutoff)?;
    let e = mollify(&solve_e0(&dtb_at_zero(&u, &b, opts.mu)?)?, opts.cutoff)?;
    let linf_sum = u.linf_norm() + b.linf_norm();
    for &eps in eps_list {
        out.states.push(NsmState::with_viscosity(u.clone(), b.clone(), e.clone(), eps, opts.nu)?);
        out.checks.push(SmallnessCheck {
            eps,
            linf_sum,
            threshold: opts.threshold / eps.sqrt(),
        });
    }
    Ok(out)
}

/// `‖curl E₀ + ∂ₜB|₀‖₂`, the defect of the well-preparedness condition.
pub fn initial_data_residual(s: &NsmState, mu: f64) -> Result<f64> {
    let d = dtb_at_zero(&s.u, &s.b, mu)?;
    Ok(crate::field::curl25(&s.e).add(&d)?.l2_norm())
}
