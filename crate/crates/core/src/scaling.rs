//! Defects of the NSM equations on sampled fields, and the diffusive scaling
//!
//! ```text
//! uᵉ(x,t) = m·u(mx, m²t),  Bᵉ likewise,  (Eᵉ, jᵉ, qᵉ)(x,t) = m²·(E, j, q)(mx, m²t)
//! ```
//!
//! with `ε = 1/m²`, which maps solutions of the `ε = 1` system onto the
//! `ε` system while keeping the torus `2π`-periodic.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{advect, cross, curl25, divergence, leray_project, Field3};
use crate::nsm::NsmState;
use crate::spectral::{Grid, ScalarField2D};

/// One time slice of `(u, B, E, j, q)`. Missing `j` means Ohm's law is
/// taken to hold; missing `q` means the momentum defect is projected.
#[derive(Debug, Clone, PartialEq)]
pub struct NsmFields {
    pub t: f64,
    pub u: Field3,
    pub b: Field3,
    pub e: Field3,
    pub j: Option<Field3>,
    pub q: Option<ScalarField2D>,
}

impl NsmFields {
    pub fn new(t: f64, u: Field3, b: Field3, e: Field3) -> Self {
        Self {
            t,
            u,
            b,
            e,
            j: None,
            q: None,
        }
    }

    pub fn with_current(mut self, j: Field3) -> Self {
        self.j = Some(j);
        self
    }

    pub fn with_pressure(mut self, q: ScalarField2D) -> Self {
        self.q = Some(q);
        self
    }
}

impl From<&NsmState> for NsmFields {
    fn from(s: &NsmState) -> Self {
        Self::new(s.t, s.u.clone(), s.b.clone(), s.e.clone())
    }
}

/// L² norms of the equation defects at one interior frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NsmResidual {
    pub t: f64,
    /// `∂ₜu − νΔu + (u·∇)u + ∇q − j×B`
    pub momentum: f64,
    /// `ε∂ₜE − curl B + j`
    pub ampere: f64,
    /// `∂ₜB + curl E`
    pub faraday: f64,
    pub div_u: f64,
    pub div_b: f64,
    /// `E + u×B − j`
    pub ohm: f64,
}

impl NsmResidual {
    pub const NAMES: [&'static str; 6] = ["momentum", "ampere", "faraday", "div_u", "div_b", "ohm"];

    pub fn values(&self) -> [f64; 6] {
        [
            self.momentum,
            self.ampere,
            self.faraday,
            self.div_u,
            self.div_b,
            self.ohm,
        ]
    }
}

/// Per-equation residuals at every interior frame, with centred time
/// differences. Frames must share a grid and be uniformly spaced in time.
pub fn residual_nsm(frames: &[NsmFields], eps: f64, nu: f64) -> Result<Vec<NsmResidual>> {
    if frames.len() < 3 {
        return Err(Error::NotEnoughSamples {
            needed: 3,
            got: frames.len(),
        });
    }
    let g = frames[0].u.grid();
    for f in frames {
        g.check_same(f.u.grid())?;
        g.check_same(f.b.grid())?;
        g.check_same(f.e.grid())?;
        if let Some(j) = &f.j {
            g.check_same(j.grid())?;
        }
        if let Some(q) = &f.q {
            g.check_same(q.grid())?;
        }
    }
    let dt = frames[1].t - frames[0].t;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("frame spacing {dt} must be positive")));
    }
    for w in frames.windows(2) {
        let h = w[1].t - w[0].t;
        if (h - dt).abs() > 1e-9 * dt {
            return Err(Error::TimeMismatch { left: dt, right: h });
        }
    }

    let centred = |a: &Field3, b: &Field3| -> Result<Field3> { Ok(b.sub(a)?.scale(0.5 / dt)) };
    let mut out = Vec::with_capacity(frames.len() - 2);
    for w in frames.windows(3) {
        let (prev, f, next) = (&w[0], &w[1], &w[2]);
        let uxb = cross(&f.u, &f.b)?;
        let ohm_j = f.e.add(&uxb)?;
        let (j, ohm) = match &f.j {
            Some(j) => (j.clone(), ohm_j.sub(j)?.l2_norm()),
            None => (ohm_j, 0.0),
        };

        let mut mom = centred(&prev.u, &next.u)?
            .axpy(-nu, &f.u.laplacian())?
            .add(&advect(&f.u, &f.u)?)?
            .sub(&cross(&j, &f.b)?)?;
        mom = match &f.q {
            Some(q) => mom.add(&Field3::gradient(q))?,
            None => leray_project(&mom),
        };
        let ampere = centred(&prev.e, &next.e)?
            .scale(eps)
            .sub(&curl25(&f.b))?
            .add(&j)?;
        let faraday = centred(&prev.b, &next.b)?.add(&curl25(&f.e))?;

        out.push(NsmResidual {
            t: f.t,
            momentum: mom.l2_norm(),
            ampere: ampere.l2_norm(),
            faraday: faraday.l2_norm(),
            div_u: divergence(&f.u).l2_norm(),
            div_b: divergence(&f.b).l2_norm(),
            ohm,
        });
    }
    Ok(out)
}

/// Result of [`diffusive_scaling`]. The scaled fields live at time
/// `time_factor · t`, i.e. the scaled solution at `t` reads the original at `t/ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFields {
    pub fields: NsmFields,
    pub m: usize,
    pub time_factor: f64,
}

/// The integer `m` with `ε = 1/m²`.
pub fn scaling_index(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} is not of the form 1/m² for a positive integer m"
        )));
    }
    let m = (1.0 / eps.sqrt()).round();
    if (1.0 / (m * m) - eps).abs() > 1e-12 * eps {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} is not of the form 1/m² for a positive integer m"
        )));
    }
    Ok(m as usize)
}

/// Factors by which each residual of [`NsmResidual::values`] grows under the
/// scaling with index `m`.
pub fn residual_factors(m: usize) -> [f64; 6] {
    let m = m as f64;
    let (m2, m3) = (m * m, m * m * m);
    [m3, m2, m3, m2, m2, m2]
}

/// Re-indexes `f` so that the coefficient of mode `mk` is `amp` times the
/// original coefficient of mode `k`.
fn rescale_scalar(f: &ScalarField2D, m: usize, amp: f64) -> Result<ScalarField2D> {
    let g = f.grid();
    let n = g.n();
    if m == 1 {
        return Ok(f.scale(amp));
    }
    let c = f.coeffs();
    let floor = 1e-12 * c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    let mi = m as i64;
    for i1 in 0..n {
        for i2 in 0..n {
            let z = c[i1 * n + i2];
            if z.norm() <= floor {
                continue;
            }
            let (k1, k2) = (g.wavenumber(i1) * mi, g.wavenumber(i2) * mi);
            let (j1, j2) = (g.index_of(k1), g.index_of(k2));
            let fits = 3 * k1.abs() <= n as i64 && 3 * k2.abs() <= n as i64;
            if !fits {
                return Err(Error::InvalidParameter(format!(
                    "mode ({}, {}) scaled by {m} exceeds the band limit of the {n}-point grid",
                    g.wavenumber(i1),
                    g.wavenumber(i2)
                )));
            }
            out[j1 * n + j2] = z * amp;
        }
    }
    ScalarField2D::from_coeffs(g, out)
}

fn rescale(f: &Field3, m: usize, amp: f64) -> Result<Field3> {
    let [a, b, c] = f.components();
    Field3::new(
        rescale_scalar(a, m, amp)?,
        rescale_scalar(b, m, amp)?,
        rescale_scalar(c, m, amp)?,
    )
}

/// Applies the diffusive scaling with `ε = 1/m²`.
///
/// Errors if `ε` is not of that form or if a scaled mode would fall outside
/// the 2/3 band.
pub fn diffusive_scaling(f: &NsmFields, eps: f64) -> Result<ScaledFields> {
    let m = scaling_index(eps)?;
    let a = m as f64;
    let a2 = a * a;
    let fields = NsmFields {
        t: f.t / a2,
        u: rescale(&f.u, m, a)?,
        b: rescale(&f.b, m, a)?,
        e: rescale(&f.e, m, a2)?,
        j: f.j.as_ref().map(|j| rescale(j, m, a2)).transpose()?,
        q: f.q.as_ref().map(|q| rescale_scalar(q, m, a2)).transpose()?,
    };
    Ok(ScaledFields {
        fields,
        m,
        time_factor: 1.0 / a2,
    })
}

/// Smooth-in-time band-limited frames `f(t) = f₀ cos t + f₁ sin t` with random
/// coefficients on `max(|k₁|,|k₂|) ≤ band`. `u` and `B` are solenoidal and
/// mean-free; `E`, `j`, `q` are generic, so no equation is satisfied.
pub fn manufactured_frames(
    g: &Grid,
    band: i64,
    seed: u64,
    t0: f64,
    dt: f64,
    count: usize,
) -> Result<Vec<NsmFields>> {
    if band < 1 || 3 * band > g.n() as i64 {
        return Err(Error::InvalidParameter(format!(
            "band {band} must lie in [1, n/3] for n = {}",
            g.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n();
    let mut scalar = |mean_free: bool| -> Result<ScalarField2D> {
        let mut c = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in -band..=band {
            for k2 in -band..=band {
                c[g.index_of(k1) * n + g.index_of(k2)] =
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        if mean_free {
            c[0] = Complex64::new(0.0, 0.0);
        }
        ScalarField2D::from_coeffs(g, c)
    };
    let mut solenoidal = || -> Result<[Field3; 2]> {
        Ok([
            Field3::from_stream_function(&scalar(true)?),
            Field3::from_stream_function(&scalar(true)?),
        ])
    };
    let [u0, u1] = solenoidal()?;
    let [b0, b1] = solenoidal()?;
    let mut generic = || -> Result<[Field3; 2]> {
        Ok([
            Field3::new(scalar(false)?, scalar(false)?, scalar(false)?)?,
            Field3::new(scalar(false)?, scalar(false)?, scalar(false)?)?,
        ])
    };
    let [e0, e1] = generic()?;
    let [j0, j1] = generic()?;
    let (q0, q1) = (scalar(false)?, scalar(false)?);
    (0..count)
        .map(|i| {
            let t = t0 + i as f64 * dt;
            let (c, s) = (t.cos(), t.sin());
            let mix = |a: &Field3, b: &Field3| a.scale(c).axpy(s, b);
            Ok(NsmFields::new(t, mix(&u0, &u1)?, mix(&b0, &b1)?, mix(&e0, &e1)?)
                .with_current(mix(&j0, &j1)?)
                .with_pressure(q0.scale(c).axpy(s, &q1)?))
        })
        .collect()
}

/// Comparison of the residuals of scaled frames against the scaled
/// residuals of the unit system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub m: usize,
    pub eps: f64,
    pub base: Vec<NsmResidual>,
    pub scaled: Vec<NsmResidual>,
    /// Largest `|r_scaled − factor·r| / max(1, factor·r)` over frames and equations.
    pub max_defect: f64,
}

impl ScalingReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_defect <= tol
    }
}

/// Scales `frames` (solutions or not of the `ε = 1` system) to `ε = 1/m²` and
/// checks that every residual maps with its factor from [`residual_factors`].
pub fn check_scaling(frames: &[NsmFields], eps: f64, nu: f64) -> Result<ScalingReport> {
    let m = scaling_index(eps)?;
    let base = residual_nsm(frames, 1.0, nu)?;
    let scaled_frames: Vec<NsmFields> = frames
        .iter()
        .map(|f| Ok(diffusive_scaling(f, eps)?.fields))
        .collect::<Result<_>>()?;
    let scaled = residual_nsm(&scaled_frames, eps, nu)?;
    let fac = residual_factors(m);
    let mut max_defect = 0.0f64;
    for (a, b) in base.iter().zip(&scaled) {
        for ((x, y), w) in a.values().iter().zip(b.values()).zip(fac) {
            let want = w * x;
            max_defect = max_defect.max((y - want).abs() / want.max(1.0));
        }
    }
    Ok(ScalingReport {
        m,
        eps,
        base,
        scaled,
        max_defect,
    })
}
