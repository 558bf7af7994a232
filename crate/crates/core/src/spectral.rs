//! Fourier representation of real periodic scalar fields on `[0, 2π)²`.
//!
//! A [`ScalarField2D`] stores the full complex spectrum `f̂(k)` normalised so
//! that `f(x) = Σ_k f̂(k) e^{i k·x}`. Collocation points are
//! `x_j = 2π j / n` and physical buffers are row-major with the `x₂` index
//! running fastest.
//!
//! First derivatives use the wavenumber `k` except at the Nyquist index
//! `n/2`, where the multiplier is zero so that derivatives of real fields stay
//! real. Second-order operators (Laplacian, Sobolev weights) use the full `|k|²`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Coordinate direction on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Square collocation grid with `n` points per axis and period `2π`.
///
/// Cloning is cheap: FFT plans are shared behind an `Arc`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    plan: Arc<Plan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let plan = Plan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            plan: Arc::new(plan),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of collocation points (`n²`).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `h = 2π/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Coordinate of collocation index `j`.
    pub fn coordinate(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// Signed wavenumber of storage index `i`, in `{-n/2+1, …, n/2}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage index of signed wavenumber `k` (taken modulo `n`).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Multiplier used by first derivatives: `k`, or zero at the Nyquist index.
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// Whether a mode survives 2/3-rule truncation (`max(|k₁|,|k₂|) ≤ n/3`).
    pub fn is_resolved(&self, i1: usize, i2: usize) -> bool {
        let n = self.n as i64;
        3 * self.wavenumber(i1).abs() <= n && 3 * self.wavenumber(i2).abs() <= n
    }

    /// Unnormalised 2D transform in place (forward `e^{-ikx}` or inverse `e^{+ikx}`).
    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse {
            &self.plan.inverse
        } else {
            &self.plan.forward
        };
        // rows (x₂ contiguous)
        fft.process(buf);
        // columns via transpose
        let mut t = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = buf[i * n + j];
            }
        }
        fft.process(&mut t);
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] = t[j * n + i];
            }
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }
}

/// A real scalar function on the torus, stored by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarField2D {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    /// Builds a field from collocation values (row-major, `x₂` fastest).
    pub fn from_physical(grid: &Grid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::BufferLength {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.transform(&mut buf, false);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        let mut f = Self {
            grid: grid.clone(),
            coeffs: buf,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Samples `f(x₁, x₂)` at the collocation points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x1 = grid.coordinate(i);
            for j in 0..n {
                values.push(f(x1, grid.coordinate(j)));
            }
        }
        Self::from_physical(grid, &values).expect("buffer sized from grid")
    }

    /// Builds a field from a coefficient array, projecting onto real fields
    /// (conjugate symmetry is enforced by averaging `k` and `-k`).
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::BufferLength {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let mut f = Self {
            grid: grid.clone(),
            coeffs,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Collocation values (row-major, `x₂` fastest).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.transform(&mut buf, true);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    /// Coefficient at signed wavevector `(k₁, k₂)`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.grid.n();
        self.coeffs[self.grid.index_of(k1) * n + self.grid.index_of(k2)]
    }

    fn symmetrize(&mut self) {
        let n = self.grid.n();
        for i1 in 0..n {
            let m1 = (n - i1) % n;
            for i2 in 0..n {
                let m2 = (n - i2) % n;
                let a = i1 * n + i2;
                let b = m1 * n + m2;
                if a < b {
                    let avg = 0.5 * (self.coeffs[a] + self.coeffs[b].conj());
                    self.coeffs[a] = avg;
                    self.coeffs[b] = avg.conj();
                } else if a == b {
                    self.coeffs[a].im = 0.0;
                }
            }
        }
    }

    /// Applies a per-mode multiplier `m(i₁, i₂)`.
    pub(crate) fn map_modes(&self, m: impl Fn(usize, usize) -> Complex64) -> Self {
        let n = self.grid.n();
        let mut out = self.coeffs.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                out[i1 * n + i2] *= m(i1, i2);
            }
        }
        Self::from_raw(&self.grid, out)
    }

    /// Exact spectral derivative along `axis`.
    pub fn ddx(&self, axis: Axis) -> Self {
        let g = &self.grid;
        match axis {
            Axis::X1 => self.map_modes(|i1, _| Complex64::new(0.0, g.derivative_wavenumber(i1))),
            Axis::X2 => self.map_modes(|_, i2| Complex64::new(0.0, g.derivative_wavenumber(i2))),
        }
    }

    /// Spectral Laplacian: multiplies mode `k` by `-|k|²`.
    pub fn laplacian(&self) -> Self {
        let g = &self.grid;
        self.map_modes(|i1, i2| {
            let k1 = g.wavenumber(i1) as f64;
            let k2 = g.wavenumber(i2) as f64;
            Complex64::new(-(k1 * k1 + k2 * k2), 0.0)
        })
    }

    /// 2/3-rule square truncation.
    pub fn dealias(&self) -> Self {
        let mut out = self.clone();
        out.dealias_in_place();
        out
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let n = self.grid.n();
        for i1 in 0..n {
            for i2 in 0..n {
                if !self.grid.is_resolved(i1, i2) {
                    self.coeffs[i1 * n + i2] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Pointwise product in physical space followed by dealiasing.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let a = self.to_physical();
        let b = other.to_physical();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = Self::from_physical(&self.grid, &prod)?;
        out.dealias_in_place();
        Ok(out)
    }

    /// Spatial mean (real part of the `k = 0` coefficient).
    pub fn mean_value(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Sum of `w(k)|f̂(k)|²` scaled by the torus area `4π²`.
    fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let n = self.grid.n();
        let mut s = 0.0;
        for i1 in 0..n {
            let k1 = self.grid.wavenumber(i1) as f64;
            for i2 in 0..n {
                let k2 = self.grid.wavenumber(i2) as f64;
                s += w(k1 * k1 + k2 * k2) * self.coeffs[i1 * n + i2].norm_sqr();
            }
        }
        4.0 * PI * PI * s
    }

    /// `‖f‖₂` on `[0,2π)²` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_energy(|_| 1.0).sqrt()
    }

    /// Squared `‖∇f‖₂`, using the same derivative multipliers as [`Self::ddx`].
    pub fn grad_norm_sqr(&self) -> f64 {
        let n = self.grid.n();
        let mut s = 0.0;
        for i1 in 0..n {
            let k1 = self.grid.derivative_wavenumber(i1);
            for i2 in 0..n {
                let k2 = self.grid.derivative_wavenumber(i2);
                s += (k1 * k1 + k2 * k2) * self.coeffs[i1 * n + i2].norm_sqr();
            }
        }
        4.0 * PI * PI * s
    }

    /// Inhomogeneous `H¹` norm `(‖f‖₂² + ‖∇f‖₂²)^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        (self.weighted_energy(|_| 1.0) + self.grad_norm_sqr()).sqrt()
    }

    /// Inhomogeneous `H²` norm `(‖f‖₂² + ‖∇f‖₂² + ‖Δf‖₂²)^{1/2}`.
    pub fn h2_norm(&self) -> f64 {
        (self.weighted_energy(|k2| 1.0 + k2 * k2) + self.grad_norm_sqr()).sqrt()
    }

    /// Max of `|f|` over collocation points. This is a lower bound of the true
    /// sup-norm of the trigonometric interpolant.
    pub fn linf_norm(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `L²` inner product `∫ f g`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(4.0 * PI * PI * s)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::from_raw(&self.grid, self.coeffs.iter().map(|c| c * a).collect())
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            &self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for &ScalarField2D {
    type Output = ScalarField2D;

    /// Panics on grid mismatch; use [`ScalarField2D::axpy`] for a checked sum.
    fn add(self, rhs: Self) -> ScalarField2D {
        self.axpy(1.0, rhs).expect("grid mismatch in field addition")
    }
}

impl Sub for &ScalarField2D {
    type Output = ScalarField2D;

    fn sub(self, rhs: Self) -> ScalarField2D {
        self.axpy(-1.0, rhs).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &ScalarField2D {
    type Output = ScalarField2D;

    fn mul(self, rhs: f64) -> ScalarField2D {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField2D {
    type Output = ScalarField2D;

    fn neg(self) -> ScalarField2D {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn max_abs_diff(a: &ScalarField2D, b: &ScalarField2D) -> f64 {
        a.to_physical()
            .iter()
            .zip(b.to_physical())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Random real field with modes up to `kmax` in each direction.
    fn random_banded(g: &Grid, kmax: i64, seed: u64) -> ScalarField2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.n();
        let mut c = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                c[g.index_of(k1) * n + g.index_of(k2)] = v;
            }
        }
        ScalarField2D::from_coeffs(g, c).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(Grid::new(6).unwrap_err(), Error::InvalidGrid(6));
        assert_eq!(Grid::new(9).unwrap_err(), Error::InvalidGrid(9));
        assert!(Grid::new(8).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = grid(8);
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.index_of(-1), 7);
        assert_eq!(g.derivative_wavenumber(4), 0.0);
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = grid(32);
        let f = ScalarField2D::from_fn(&g, |x, _| x.sin());
        let expect = ScalarField2D::from_fn(&g, |x, _| x.cos());
        assert!(max_abs_diff(&f.ddx(Axis::X1), &expect) < 1e-12);
        assert!(f.ddx(Axis::X2).l2_norm() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = grid(16);
        let f = ScalarField2D::constant(&g, 3.5);
        assert_eq!(f.ddx(Axis::X1).l2_norm(), 0.0);
        assert_eq!(f.ddx(Axis::X2).l2_norm(), 0.0);
    }

    /// Fourth-order centred differences converge to the spectral derivative at
    /// rate 4 as the grid is refined.
    #[test]
    fn derivative_matches_finite_difference_order() {
        // band-limited test function evaluated analytically on any grid
        let f = |x1: f64, x2: f64| (x1 + 2.0 * x2).sin() + 0.5 * (3.0 * x1).cos() * x2.sin();
        let mut errs = Vec::new();
        for &n in &[32usize, 64, 128] {
            let g = grid(n);
            let field = ScalarField2D::from_fn(&g, f);
            let spec = field.ddx(Axis::X1).to_physical();
            let h = g.spacing();
            let mut err: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let x1 = g.coordinate(i);
                    let x2 = g.coordinate(j);
                    let fd = (-f(x1 + 2.0 * h, x2) + 8.0 * f(x1 + h, x2) - 8.0 * f(x1 - h, x2)
                        + f(x1 - 2.0 * h, x2))
                        / (12.0 * h);
                    err = err.max((fd - spec[i * n + j]).abs());
                }
            }
            errs.push(err);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.9, "observed order {order}");
        }
    }

    #[test]
    fn laplacian_single_modes() {
        let g = grid(32);
        let f = ScalarField2D::from_fn(&g, |x, _| x.sin());
        assert!(max_abs_diff(&f.laplacian(), &(-&f)) < 1e-12);
        let f = ScalarField2D::from_fn(&g, |x, y| x.sin() * y.sin());
        assert!(max_abs_diff(&f.laplacian(), &f.scale(-2.0)) < 1e-12);
    }

    #[test]
    fn laplacian_is_sum_of_second_derivatives() {
        let g = grid(32);
        let f = random_banded(&g, 10, 3);
        let comp = &f.ddx(Axis::X1).ddx(Axis::X1) + &f.ddx(Axis::X2).ddx(Axis::X2);
        assert!((&f.laplacian() - &comp).l2_norm() < 1e-12 * f.h2_norm());
    }

    #[test]
    fn norms_of_sine() {
        let g = grid(32);
        let f = ScalarField2D::from_fn(&g, |x, _| x.sin());
        assert!((f.l2_norm() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((f.h1_norm() - 2.0 * PI).abs() < 1e-12);
        // H² adds ∫ sin² again
        assert!((f.h2_norm() - (6.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linf_against_dense_sampling() {
        let g = grid(64);
        let expr = |x1: f64, x2: f64| x1.sin() + 0.5 * x2.sin();
        let f = ScalarField2D::from_fn(&g, expr);
        let m = 1024;
        let mut dense: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x1 = 2.0 * PI * i as f64 / m as f64;
                let x2 = 2.0 * PI * j as f64 / m as f64;
                dense = dense.max(expr(x1, x2).abs());
            }
        }
        assert!((f.linf_norm() - dense).abs() <= 2e-3);
        assert!(f.linf_norm() <= dense + 1e-12);
    }

    #[test]
    fn dealias_behaviour() {
        let g = grid(32);
        let f = random_banded(&g, 8, 1);
        assert_eq!(f.dealias(), f);

        let high = ScalarField2D::from_fn(&g, |x, _| (15.0 * x).cos());
        assert!(high.dealias().l2_norm() < 1e-13);

        // sin²(10x) = 1/2 − cos(20x)/2; the k = 20 part aliases on n = 32 and is removed
        let s = ScalarField2D::from_fn(&g, |x, _| (10.0 * x).sin());
        let p = s.multiply(&s).unwrap();
        assert!((p.mean_value() - 0.5).abs() < 1e-14);
        assert!((&p - &ScalarField2D::constant(&g, 0.5)).l2_norm() < 1e-13);
    }

    #[test]
    fn mean_values() {
        let g = grid(16);
        assert_eq!(ScalarField2D::constant(&g, 2.25).mean_value(), 2.25);
        assert!(ScalarField2D::from_fn(&g, |x, _| x.sin()).mean_value().abs() < 1e-15);
        let f = ScalarField2D::from_fn(&g, |x, _| 1.0 + x.sin());
        assert!((f.mean_value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = ScalarField2D::zeros(&grid(8));
        let b = ScalarField2D::zeros(&grid(16));
        assert_eq!(
            a.multiply(&b).unwrap_err(),
            Error::GridMismatch { left: 8, right: 16 }
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn parseval_matches_quadrature(seed in 0u64..1000) {
                let g = grid(16);
                let f = random_banded(&g, 7, seed);
                let quad: f64 = f.to_physical().iter().map(|v| v * v).sum::<f64>()
                    * g.spacing() * g.spacing();
                let l2 = f.l2_norm();
                prop_assert!((l2 * l2 - quad).abs() <= 1e-12 * quad);
            }

            #[test]
            fn mixed_derivatives_commute(seed in 0u64..1000) {
                let g = grid(16);
                let f = random_banded(&g, 7, seed);
                let a = f.ddx(Axis::X1).ddx(Axis::X2);
                let b = f.ddx(Axis::X2).ddx(Axis::X1);
                prop_assert!((&a - &b).l2_norm() <= 1e-12);
            }

            #[test]
            fn physical_round_trip(seed in 0u64..1000) {
                let g = grid(16);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let back = ScalarField2D::from_physical(&g, &v).unwrap().to_physical();
                let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                for (x, y) in v.iter().zip(&back) {
                    prop_assert!((x - y).abs() <= 1e-13 * scale);
                }
            }
        }
    }
}
