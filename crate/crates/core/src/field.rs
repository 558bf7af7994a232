//! Three-component fields without `x₃` dependence and the vector calculus
//! of the 2.5D embedding: cross products, the reduced curl, advection,
//! Ohm's law and the Leray projection.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{Axis, Grid, ScalarField2D};

/// A vector field `(c1, c2, c3)` on the torus; all components share one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3 {
    c: [ScalarField2D; 3],
}

impl Field3 {
    pub fn new(c1: ScalarField2D, c2: ScalarField2D, c3: ScalarField2D) -> Result<Self> {
        c1.grid().check_same(c2.grid())?;
        c1.grid().check_same(c3.grid())?;
        Ok(Self { c: [c1, c2, c3] })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let z = ScalarField2D::zeros(grid);
        Self {
            c: [z.clone(), z.clone(), z],
        }
    }

    /// `(c1, c2, 0)`.
    pub fn planar(c1: ScalarField2D, c2: ScalarField2D) -> Result<Self> {
        let z = ScalarField2D::zeros(c1.grid());
        Self::new(c1, c2, z)
    }

    pub fn from_fns(
        grid: &Grid,
        f1: impl Fn(f64, f64) -> f64,
        f2: impl Fn(f64, f64) -> f64,
        f3: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            c: [
                ScalarField2D::from_fn(grid, f1),
                ScalarField2D::from_fn(grid, f2),
                ScalarField2D::from_fn(grid, f3),
            ],
        }
    }

    /// Divergence-free planar field `(-∂₂ψ, ∂₁ψ, 0)` from a stream function.
    pub fn from_stream_function(psi: &ScalarField2D) -> Self {
        Self {
            c: [
                -&psi.ddx(Axis::X2),
                psi.ddx(Axis::X1),
                ScalarField2D::zeros(psi.grid()),
            ],
        }
    }

    /// Planar gradient `(∂₁f, ∂₂f, 0)`.
    pub fn gradient(f: &ScalarField2D) -> Self {
        Self {
            c: [
                f.ddx(Axis::X1),
                f.ddx(Axis::X2),
                ScalarField2D::zeros(f.grid()),
            ],
        }
    }

    pub fn grid(&self) -> &Grid {
        self.c[0].grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField2D {
        &self.c[i]
    }

    pub fn components(&self) -> &[ScalarField2D; 3] {
        &self.c
    }

    pub fn into_components(self) -> [ScalarField2D; 3] {
        self.c
    }

    pub(crate) fn component_mut(&mut self, i: usize) -> &mut ScalarField2D {
        &mut self.c[i]
    }

    pub fn map(&self, f: impl Fn(&ScalarField2D) -> ScalarField2D) -> Self {
        Self {
            c: [f(&self.c[0]), f(&self.c[1]), f(&self.c[2])],
        }
    }

    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        [
            self.c[0].to_physical(),
            self.c[1].to_physical(),
            self.c[2].to_physical(),
        ]
    }

    pub fn from_physical(grid: &Grid, v: &[Vec<f64>; 3]) -> Result<Self> {
        Ok(Self {
            c: [
                ScalarField2D::from_physical(grid, &v[0])?,
                ScalarField2D::from_physical(grid, &v[1])?,
                ScalarField2D::from_physical(grid, &v[2])?,
            ],
        })
    }

    /// Like [`Self::from_physical`] but truncates each component with the 2/3 rule.
    pub(crate) fn from_physical_dealiased(grid: &Grid, v: &[Vec<f64>; 3]) -> Result<Self> {
        let mut f = Self::from_physical(grid, v)?;
        for c in &mut f.c {
            c.dealias_in_place();
        }
        Ok(f)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|c| c.scale(a))
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        Ok(Self {
            c: [
                self.c[0].axpy(a, &other.c[0])?,
                self.c[1].axpy(a, &other.c[1])?,
                self.c[2].axpy(a, &other.c[2])?,
            ],
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn laplacian(&self) -> Self {
        self.map(ScalarField2D::laplacian)
    }

    pub fn dealias(&self) -> Self {
        self.map(ScalarField2D::dealias)
    }

    /// `‖v‖₂ = (Σᵢ ‖vᵢ‖₂²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.c.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// `Σᵢ ‖∇vᵢ‖₂²`.
    pub fn grad_norm_sqr(&self) -> f64 {
        self.c.iter().map(ScalarField2D::grad_norm_sqr).sum()
    }

    pub fn h1_norm(&self) -> f64 {
        self.c.iter().map(|c| c.h1_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn h2_norm(&self) -> f64 {
        self.c.iter().map(|c| c.h2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// Max over collocation points of the Euclidean length `|v(x)|`.
    pub fn linf_norm(&self) -> f64 {
        let [a, b, c] = self.to_physical();
        a.iter()
            .zip(&b)
            .zip(&c)
            .fold(0.0, |m, ((x, y), z)| m.max((x * x + y * y + z * z).sqrt()))
    }

    /// `∫ v·w`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        let mut s = 0.0;
        for i in 0..3 {
            s += self.c[i].inner(&other.c[i])?;
        }
        Ok(s)
    }

    pub fn mean(&self) -> [f64; 3] {
        [
            self.c[0].mean_value(),
            self.c[1].mean_value(),
            self.c[2].mean_value(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(ScalarField2D::is_finite)
    }
}

/// Pointwise cross product of physical component arrays.
pub(crate) fn cross_physical(a: &[Vec<f64>; 3], b: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let len = a[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        out[0][p] = a[1][p] * b[2][p] - a[2][p] * b[1][p];
        out[1][p] = a[2][p] * b[0][p] - a[0][p] * b[2][p];
        out[2][p] = a[0][p] * b[1][p] - a[1][p] * b[0][p];
    }
    out
}

/// `a × b`, computed pointwise and dealiased.
pub fn cross(a: &Field3, b: &Field3) -> Result<Field3> {
    a.grid().check_same(b.grid())?;
    let p = cross_physical(&a.to_physical(), &b.to_physical());
    Field3::from_physical_dealiased(a.grid(), &p)
}

/// Curl with `∂₃ ≡ 0`: `(∂₂E₃, −∂₁E₃, ∂₁E₂ − ∂₂E₁)`.
pub fn curl25(e: &Field3) -> Field3 {
    let [e1, e2, e3] = e.components();
    Field3 {
        c: [
            e3.ddx(Axis::X2),
            -&e3.ddx(Axis::X1),
            &e2.ddx(Axis::X1) - &e1.ddx(Axis::X2),
        ],
    }
}

/// Physical-space `(u·∇)f` for each component of `f`, given physical `u₁, u₂`.
pub(crate) fn advect_physical(u1: &[f64], u2: &[f64], f: &Field3) -> [Vec<f64>; 3] {
    let term = |c: &ScalarField2D| {
        let d1 = c.ddx(Axis::X1).to_physical();
        let d2 = c.ddx(Axis::X2).to_physical();
        (0..u1.len())
            .map(|p| u1[p] * d1[p] + u2[p] * d2[p])
            .collect::<Vec<f64>>()
    };
    [term(&f.c[0]), term(&f.c[1]), term(&f.c[2])]
}

/// `(u·∇)f` componentwise (no `∂₃`), products dealiased.
pub fn advect(u: &Field3, f: &Field3) -> Result<Field3> {
    u.grid().check_same(f.grid())?;
    let u1 = u.c[0].to_physical();
    let u2 = u.c[1].to_physical();
    Field3::from_physical_dealiased(u.grid(), &advect_physical(&u1, &u2, f))
}

/// Ohm's law `j = E + u × B`.
pub fn ohm_current(u: &Field3, b: &Field3, e: &Field3) -> Result<Field3> {
    e.grid().check_same(u.grid())?;
    e.add(&cross(u, b)?)
}

/// Planar divergence `∂₁v₁ + ∂₂v₂`.
pub fn divergence(v: &Field3) -> ScalarField2D {
    &v.c[0].ddx(Axis::X1) + &v.c[1].ddx(Axis::X2)
}

/// `L²`-orthogonal projection of the in-plane part onto divergence-free
/// fields; the `k = 0` mode and the third component pass through.
pub fn leray_project(v: &Field3) -> Field3 {
    let g = v.grid().clone();
    let n = g.n();
    let mut a = v.c[0].coeffs().to_vec();
    let mut b = v.c[1].coeffs().to_vec();
    for i1 in 0..n {
        let k1 = g.derivative_wavenumber(i1);
        for i2 in 0..n {
            let k2 = g.derivative_wavenumber(i2);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let p = i1 * n + i2;
            let dot: Complex64 = (a[p] * k1 + b[p] * k2) / kk;
            a[p] -= dot * k1;
            b[p] -= dot * k2;
        }
    }
    Field3 {
        c: [
            ScalarField2D::from_raw(&g, a),
            ScalarField2D::from_raw(&g, b),
            v.c[2].clone(),
        ],
    }
}

/// Physical values of `∂₁fᵢ, ∂₂fᵢ` for each component.
pub(crate) fn grad_physical(f: &Field3) -> [[Vec<f64>; 2]; 3] {
    let g = |c: &ScalarField2D| [c.ddx(Axis::X1).to_physical(), c.ddx(Axis::X2).to_physical()];
    [g(&f.c[0]), g(&f.c[1]), g(&f.c[2])]
}

/// `out += s·(a₁∂₁f + a₂∂₂f)` pointwise, from precomputed gradients.
pub(crate) fn add_directional(
    out: &mut [Vec<f64>; 3],
    s: f64,
    a1: &[f64],
    a2: &[f64],
    grad: &[[Vec<f64>; 2]; 3],
) {
    for (o, gc) in out.iter_mut().zip(grad) {
        for p in 0..o.len() {
            o[p] += s * (a1[p] * gc[0][p] + a2[p] * gc[1][p]);
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::spectral::Grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_field(g: &Grid, kmax: i64, seed: u64) -> Field3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = g.n();
        let mut comp = || {
            let mut c = vec![Complex64::new(0.0, 0.0); n * n];
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    c[g.index_of(k1) * n + g.index_of(k2)] =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            ScalarField2D::from_coeffs(g, c).unwrap()
        };
        let (a, b, c) = (comp(), comp(), comp());
        Field3::new(a, b, c).unwrap()
    }

    /// Random planar divergence-free zero-mean field.
    pub(crate) fn random_solenoidal(g: &Grid, kmax: i64, seed: u64) -> Field3 {
        let r = random_field(g, kmax, seed);
        let mut psi = r.component(0).clone();
        psi.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        Field3::from_stream_function(&psi)
    }

    fn grid() -> Grid {
        Grid::new(32).unwrap()
    }

    fn tg(g: &Grid) -> Field3 {
        Field3::from_stream_function(&ScalarField2D::from_fn(g, |x, y| x.sin() * y.sin()))
    }

    #[test]
    fn cross_of_unit_vectors() {
        let g = grid();
        let one = ScalarField2D::constant(&g, 1.0);
        let zero = ScalarField2D::zeros(&g);
        let ex = Field3::new(one.clone(), zero.clone(), zero.clone()).unwrap();
        let ey = Field3::new(zero.clone(), one.clone(), zero.clone()).unwrap();
        let c = cross(&ex, &ey).unwrap();
        assert!(c.component(0).l2_norm() < 1e-15);
        assert!(c.component(1).l2_norm() < 1e-15);
        assert!((c.component(2).mean_value() - 1.0).abs() < 1e-15);
        assert!(cross(&ex, &ex).unwrap().l2_norm() < 1e-15);
    }

    #[test]
    fn cross_matches_pointwise_formula() {
        let g = grid();
        let a = Field3::from_fns(&g, |x, _| x.sin(), |_, _| 0.0, |_, _| 0.0);
        let b = Field3::from_fns(&g, |_, _| 0.0, |_, _| 0.0, |_, _| 1.0);
        let c = cross(&a, &b).unwrap();
        let expect = Field3::from_fns(&g, |_, _| 0.0, |x, _| -x.sin(), |_, _| 0.0);
        assert!(c.sub(&expect).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn curl_examples() {
        let g = grid();
        let e = Field3::from_fns(&g, |_, _| 0.0, |_, _| 0.0, |x, _| x.sin());
        let expect = Field3::from_fns(&g, |_, _| 0.0, |x, _| -x.cos(), |_, _| 0.0);
        assert!(curl25(&e).sub(&expect).unwrap().l2_norm() < 1e-12);
        let c = Field3::from_fns(&g, |_, _| 1.0, |_, _| -2.0, |_, _| 0.5);
        assert_eq!(curl25(&c).l2_norm(), 0.0);
    }

    #[test]
    fn double_curl_is_minus_laplacian_on_solenoidal_fields() {
        let g = grid();
        let b = random_solenoidal(&g, 8, 11);
        let lhs = curl25(&curl25(&b));
        let rhs = b.laplacian().scale(-1.0);
        assert!(lhs.sub(&rhs).unwrap().l2_norm() <= 1e-11 * rhs.l2_norm());
    }

    #[test]
    fn advect_trivial_cases() {
        let g = grid();
        let f = random_field(&g, 6, 2);
        assert_eq!(advect(&Field3::zeros(&g), &f).unwrap().l2_norm(), 0.0);
        let c = Field3::from_fns(&g, |_, _| 1.0, |_, _| 2.0, |_, _| 3.0);
        assert!(advect(&f, &c).unwrap().l2_norm() < 1e-13);
    }

    #[test]
    fn taylor_green_self_advection_is_a_gradient() {
        let g = grid();
        let u = tg(&g);
        let a = advect(&u, &u).unwrap();
        assert!(a.l2_norm() > 1.0);
        assert!(leray_project(&a).l2_norm() < 1e-11);
    }

    #[test]
    fn ohm_current_cases() {
        let g = grid();
        let e = random_field(&g, 5, 4);
        let b = random_solenoidal(&g, 5, 5);
        assert_eq!(ohm_current(&Field3::zeros(&g), &b, &e).unwrap(), e);

        let u = random_solenoidal(&g, 5, 6);
        let eq = cross(&u, &b).unwrap().scale(-1.0);
        assert!(ohm_current(&u, &b, &eq).unwrap().l2_norm() < 1e-13);

        // planar u, B: j − E = u × B points along e₃ only
        let d = ohm_current(&u, &b, &e).unwrap().sub(&e).unwrap();
        assert!(d.component(0).l2_norm() < 1e-14);
        assert!(d.component(1).l2_norm() < 1e-14);
        assert!(d.component(2).l2_norm() > 1e-3);
    }

    #[test]
    fn divergence_identities() {
        let g = grid();
        let e = random_field(&g, 8, 7);
        assert!(divergence(&curl25(&e)).l2_norm() < 1e-12);

        let f = random_field(&g, 8, 8).component(0).clone();
        let d = divergence(&Field3::gradient(&f));
        assert!((&d - &f.laplacian()).l2_norm() < 1e-12 * f.h2_norm());
    }

    #[test]
    fn divergence_matches_finite_differences() {
        let g = Grid::new(128).unwrap();
        let v1 = |x: f64, y: f64| (x + y).sin();
        let v2 = |x: f64, y: f64| (2.0 * x).cos() * y.sin();
        let v = Field3::from_fns(&g, v1, v2, |_, _| 0.0);
        let d = divergence(&v).to_physical();
        let h = g.spacing();
        let n = g.n();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (g.coordinate(i), g.coordinate(j));
                let fd = (v1(x + h, y) - v1(x - h, y)) / (2.0 * h)
                    + (v2(x, y + h) - v2(x, y - h)) / (2.0 * h);
                err = err.max((fd - d[i * n + j]).abs());
            }
        }
        // second-order centred differences: error ≈ h²/6 · |∂³v|
        assert!(err < h * h, "err {err}");
    }

    #[test]
    fn leray_examples() {
        let g = grid();
        let u = tg(&g);
        assert!(leray_project(&u).sub(&u).unwrap().l2_norm() < 1e-12);

        let grad = Field3::from_fns(&g, |x, _| x.cos(), |_, _| 0.0, |_, _| 0.0);
        let p = leray_project(&grad);
        assert!(p.component(0).l2_norm() < 1e-14);
        assert!(p.component(1).l2_norm() < 1e-14);

        let third = Field3::from_fns(&g, |_, _| 0.0, |_, _| 0.0, |_, y| y.sin());
        assert_eq!(leray_project(&third), third);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn leray_idempotent_and_solenoidal(seed in 0u64..10_000) {
            let g = Grid::new(16).unwrap();
            let v = random_field(&g, 5, seed);
            let p = leray_project(&v);
            prop_assert!(divergence(&p).l2_norm() <= 1e-12 * v.h1_norm());
            prop_assert!(leray_project(&p).sub(&p).unwrap().l2_norm() <= 1e-12 * v.l2_norm());
        }

        #[test]
        fn leray_self_adjoint(seed in 0u64..10_000) {
            let g = Grid::new(16).unwrap();
            let a = random_field(&g, 5, seed);
            let b = random_field(&g, 5, seed + 77_777);
            let lhs = leray_project(&a).inner(&b).unwrap();
            let rhs = a.inner(&leray_project(&b)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn cross_duality(seed in 0u64..10_000) {
            let g = Grid::new(16).unwrap();
            // band-limited to n/6 so products are alias-free
            let a = random_field(&g, 2, seed);
            let b = random_field(&g, 2, seed + 1);
            let c = random_field(&g, 2, seed + 2);
            let lhs = cross(&a, &b).unwrap().inner(&c).unwrap();
            let rhs = -b.inner(&cross(&a, &c).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
        }

        #[test]
        fn planar_cross_structure(seed in 0u64..10_000) {
            let g = Grid::new(16).unwrap();
            let u = random_solenoidal(&g, 3, seed);
            let b = random_solenoidal(&g, 3, seed + 5);
            let uxb = cross(&u, &b).unwrap();
            prop_assert_eq!(uxb.component(0).l2_norm(), 0.0);
            prop_assert_eq!(uxb.component(1).l2_norm(), 0.0);
            let jxb = cross(&ohm_current(&u, &b, &Field3::zeros(&g)).unwrap(), &b).unwrap();
            prop_assert_eq!(jxb.component(2).l2_norm(), 0.0);
        }
    }
}
