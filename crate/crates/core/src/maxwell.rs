//! Exact per-mode functions of the linear part of the Navier–Stokes–Maxwell
//! system: viscous decay of `u` and the Maxwell–Ohm block
//! `∂ₜB = −curl E`, `ε∂ₜE = curl B − E`.
//!
//! For a mode with derivative wavevector `k ≠ 0` (`κ = |k|`, `k̂ = k/κ`)
//! the six `(B, E)` coefficients split along `k̂` and its in-plane normal:
//!
//! * `b∥` is constant and `e∥` decays like `e^{−t/ε}`;
//! * `(b⊥, E₃)` evolves with `M = [[0, iκ], [iκ/ε, −1/ε]]`;
//! * `(B₃, e⊥)` evolves with `SMS`, `S = diag(1, −1)`.
//!
//! Both blocks have the eigenvalues `ελ² + λ + κ² = 0`, computed as
//! `q = −(1 + √(1 − 4εκ²))/2`, `λ₁ = q/ε`, `λ₂ = κ²/q`; the complex principal
//! square root covers both signs of the discriminant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expo::{Mat2, PhiMat2, PhiScalar};
use crate::field::Field3;
use crate::spectral::{Grid, ScalarField2D};

/// Which function of `hL` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiKind {
    Exp,
    Phi1,
    Phi2,
}

impl PhiKind {
    fn index(self) -> usize {
        match self {
            PhiKind::Exp => 0,
            PhiKind::Phi1 => 1,
            PhiKind::Phi2 => 2,
        }
    }
}

/// `φ_k(0)`.
const PHI_AT_ZERO: [f64; 3] = [1.0, 1.0, 0.5];

#[derive(Debug, Clone)]
struct ModeOps {
    khat: [f64; 2],
    /// `None` when the derivative wavevector vanishes.
    block: Option<PhiMat2>,
    e_par: PhiScalar,
    u: PhiScalar,
}

/// Roots `(λ₁, λ₂)` of `ελ² + λ + κ² = 0`, `λ₁` the fast one.
pub fn maxwell_eigenvalues(kappa: f64, eps: f64) -> (Complex64, Complex64) {
    let disc = Complex64::new(1.0 - 4.0 * eps * kappa * kappa, 0.0).sqrt();
    let q = -0.5 * (1.0 + disc);
    (q / eps, kappa * kappa / q)
}

/// Per-mode `e^{hL}`, `φ₁(hL)`, `φ₂(hL)` for a fixed step `h`.
#[derive(Debug, Clone)]
pub struct LinearOps {
    grid: Grid,
    h: f64,
    eps: f64,
    nu: f64,
    modes: Vec<ModeOps>,
}

impl LinearOps {
    pub fn new(grid: &Grid, h: f64, eps: f64, nu: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be > 0")));
        }
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("step {h} must be >= 0")));
        }
        let n = grid.n();
        let mut modes = Vec::with_capacity(grid.len());
        let e_par = PhiScalar::new(-h / eps);
        for i1 in 0..n {
            let d1 = grid.derivative_wavenumber(i1);
            let k1 = grid.wavenumber(i1) as f64;
            for i2 in 0..n {
                let d2 = grid.derivative_wavenumber(i2);
                let k2 = grid.wavenumber(i2) as f64;
                let u = PhiScalar::new(-nu * (k1 * k1 + k2 * k2) * h);
                let kappa = (d1 * d1 + d2 * d2).sqrt();
                let (khat, block) = if kappa == 0.0 {
                    ([0.0, 0.0], None)
                } else {
                    let (l1, l2) = maxwell_eigenvalues(kappa, eps);
                    let z = Mat2::new(
                        Complex64::new(0.0, 0.0),
                        Complex64::new(0.0, kappa * h),
                        Complex64::new(0.0, kappa * h / eps),
                        Complex64::new(-h / eps, 0.0),
                    );
                    (
                        [d1 / kappa, d2 / kappa],
                        Some(PhiMat2::from_eigen(&z, l1 * h, l2 * h)),
                    )
                };
                modes.push(ModeOps {
                    khat,
                    block,
                    e_par,
                    u,
                });
            }
        }
        Ok(Self {
            grid: grid.clone(),
            h,
            eps,
            nu,
            modes,
        })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Applies the chosen function of `hL` to `(u, B, E)`. The result is not
    /// re-symmetrized.
    pub(crate) fn apply(
        &self,
        kind: PhiKind,
        u: &Field3,
        b: &Field3,
        e: &Field3,
    ) -> (Field3, Field3, Field3) {
        let w = kind.index();
        let len = self.grid.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut uo = [vec![zero; len], vec![zero; len], vec![zero; len]];
        let mut bo = uo.clone();
        let mut eo = uo.clone();
        let uc = [u.component(0).coeffs(), u.component(1).coeffs(), u.component(2).coeffs()];
        let bc = [b.component(0).coeffs(), b.component(1).coeffs(), b.component(2).coeffs()];
        let ec = [e.component(0).coeffs(), e.component(1).coeffs(), e.component(2).coeffs()];
        for (p, m) in self.modes.iter().enumerate() {
            let fu = pick(&m.u, w);
            for c in 0..3 {
                uo[c][p] = uc[c][p] * fu;
            }
            let fe = pick(&m.e_par, w);
            let f0 = PHI_AT_ZERO[w];
            match &m.block {
                None => {
                    for c in 0..3 {
                        bo[c][p] = bc[c][p] * f0;
                        eo[c][p] = ec[c][p] * fe;
                    }
                }
                Some(ops) => {
                    let mat = match kind {
                        PhiKind::Exp => &ops.exp,
                        PhiKind::Phi1 => &ops.phi1,
                        PhiKind::Phi2 => &ops.phi2,
                    };
                    let [k1, k2] = m.khat;
                    let (b1, b2, b3) = (bc[0][p], bc[1][p], bc[2][p]);
                    let (e1, e2, e3) = (ec[0][p], ec[1][p], ec[2][p]);
                    let b_par = (b1 * k1 + b2 * k2) * f0;
                    let e_par = (e1 * k1 + e2 * k2) * fe;
                    let [b_perp, e3n] = mat.apply([b1 * k2 * -1.0 + b2 * k1, e3]);
                    let a = &mat.a;
                    let e_perp_in = e2 * k1 - e1 * k2;
                    let b3n = a[0][0] * b3 - a[0][1] * e_perp_in;
                    let e_perp = -a[1][0] * b3 + a[1][1] * e_perp_in;
                    bo[0][p] = b_par * k1 - b_perp * k2;
                    bo[1][p] = b_par * k2 + b_perp * k1;
                    bo[2][p] = b3n;
                    eo[0][p] = e_par * k1 - e_perp * k2;
                    eo[1][p] = e_par * k2 + e_perp * k1;
                    eo[2][p] = e3n;
                }
            }
        }
        let g = &self.grid;
        let build = |c: [Vec<Complex64>; 3]| {
            let [a, b, c] = c;
            Field3::new(
                ScalarField2D::from_raw(g, a),
                ScalarField2D::from_raw(g, b),
                ScalarField2D::from_raw(g, c),
            )
            .expect("shared grid")
        };
        (build(uo), build(bo), build(eo))
    }
}

fn pick(s: &PhiScalar, w: usize) -> f64 {
    match w {
        0 => s.exp,
        1 => s.phi1,
        _ => s.phi2,
    }
}

/// Projects every component onto real fields.
pub(crate) fn symmetrized(f: &Field3) -> Field3 {
    f.map(|c| ScalarField2D::from_coeffs(c.grid(), c.coeffs().to_vec()).expect("sized from grid"))
}

/// Exact solution of `∂ₜB = −curl E`, `ε∂ₜE = curl B − E` after time `dt`.
pub fn maxwell_propagator(b: &Field3, e: &Field3, dt: f64, eps: f64) -> Result<(Field3, Field3)> {
    b.grid().check_same(e.grid())?;
    let ops = LinearOps::new(b.grid(), dt, eps, 0.0)?;
    let z = Field3::zeros(b.grid());
    let (_, b1, e1) = ops.apply(PhiKind::Exp, &z, b, e);
    Ok((symmetrized(&b1), symmetrized(&e1)))
}
