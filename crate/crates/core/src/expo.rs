//! Scalar `φ`-functions and closed-form functions of 2×2 complex matrices,
//! used by the exponential integrators.
//!
//! `φ₀(z) = eᶻ`, `φ_{k+1}(z) = (φ_k(z) − 1/k!)/z`.

use num_complex::Complex64;

/// Number of `φ`-functions evaluated by [`phi_all`] (`φ₀ … φ₇`).
pub const PHI_COUNT: usize = 8;

const SERIES_RADIUS: f64 = 4.0;
const SERIES_TERMS: usize = 48;

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

/// `[φ₀(z), …, φ₇(z)]`.
pub fn phi_all(z: Complex64) -> [Complex64; PHI_COUNT] {
    let mut out = [Complex64::new(0.0, 0.0); PHI_COUNT];
    if z.norm() < SERIES_RADIUS {
        // φ_k(z) = Σ_j z^j / (j+k)!, summed from the tail for accuracy
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (0..SERIES_TERMS).rev() {
                acc = acc * z / (j + k + 1) as f64 + 1.0;
            }
            *slot = acc / factorial(k);
        }
        out[0] = z.exp();
    } else {
        out[0] = z.exp();
        for k in 0..PHI_COUNT - 1 {
            out[k + 1] = (out[k] - 1.0 / factorial(k)) / z;
        }
    }
    out
}

/// Scalar `φ₀, φ₁, φ₂` at `z`.
pub fn phi012(z: Complex64) -> [Complex64; 3] {
    let p = phi_all(z);
    [p[0], p[1], p[2]]
}

/// Divided difference `f[z₁, z₂]` of `φ_k` for `k ≤ 2`.
///
/// For nearly coincident arguments the midpoint expansion
/// `f' + f'''s²/6 + f⁽⁵⁾s⁴/120` (`s = (z₁−z₂)/2`) is used, with derivatives
/// from `φ_k' = φ_k − k φ_{k+1}`.
pub fn phi_divided_difference(k: usize, z1: Complex64, z2: Complex64) -> Complex64 {
    debug_assert!(k <= 2);
    let s = 0.5 * (z1 - z2);
    if s.norm() >= 1e-2 {
        let a = phi_all(z1)[k];
        let b = phi_all(z2)[k];
        return (a - b) / (z1 - z2);
    }
    let m = 0.5 * (z1 + z2);
    let p = phi_all(m);
    // coefficient vector over φ_0..φ_7 representing successive derivatives
    let mut c = [0.0f64; PHI_COUNT];
    c[k] = 1.0;
    let derive = |c: &[f64; PHI_COUNT]| {
        let mut d = [0.0f64; PHI_COUNT];
        for j in 0..PHI_COUNT - 1 {
            d[j] += c[j];
            d[j + 1] -= j as f64 * c[j];
        }
        d
    };
    let eval = |c: &[f64; PHI_COUNT]| {
        c.iter()
            .zip(p.iter())
            .fold(Complex64::new(0.0, 0.0), |acc, (w, v)| acc + v * *w)
    };
    let d1 = derive(&c);
    let d3 = derive(&derive(&d1));
    let d5 = derive(&derive(&d3));
    let s2 = s * s;
    eval(&d1) + eval(&d3) * s2 / 6.0 + eval(&d5) * s2 * s2 / 120.0
}

/// 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: [[Complex64; 2]; 2],
}

impl Mat2 {
    pub fn new(a00: Complex64, a01: Complex64, a10: Complex64, a11: Complex64) -> Self {
        Self {
            a: [[a00, a01], [a10, a11]],
        }
    }

    pub fn identity() -> Self {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::new(o, z, z, o)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a[0][0] * v[0] + self.a[0][1] * v[1],
            self.a[1][0] * v[0] + self.a[1][1] * v[1],
        ]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.a[i][0] * o.a[0][j] + self.a[i][1] * o.a[1][j];
            }
        }
        Mat2 { a: r }
    }

    /// `f(A) = f(z₂)·I + f[z₁,z₂]·(A − z₂ I)` given the eigenvalues of `A`
    /// and the two scalar quantities.
    fn newton(&self, z2: Complex64, f_z2: Complex64, f_dd: Complex64) -> Mat2 {
        let mut r = self.a;
        r[0][0] -= z2;
        r[1][1] -= z2;
        for row in r.iter_mut() {
            for x in row.iter_mut() {
                *x *= f_dd;
            }
        }
        r[0][0] += f_z2;
        r[1][1] += f_z2;
        Mat2 { a: r }
    }
}

/// `e^{Z}`, `φ₁(Z)`, `φ₂(Z)` for a 2×2 matrix `Z` with known eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiMat2 {
    pub exp: Mat2,
    pub phi1: Mat2,
    pub phi2: Mat2,
}

impl PhiMat2 {
    pub fn from_eigen(z: &Mat2, z1: Complex64, z2: Complex64) -> Self {
        let p2 = phi012(z2);
        let f = |k: usize| z.newton(z2, p2[k], phi_divided_difference(k, z1, z2));
        Self {
            exp: f(0),
            phi1: f(1),
            phi2: f(2),
        }
    }
}

/// Scalar counterpart of [`PhiMat2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiScalar {
    pub exp: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl PhiScalar {
    pub fn new(z: f64) -> Self {
        let p = phi012(Complex64::new(z, 0.0));
        Self {
            exp: p[0].re,
            phi1: p[1].re,
            phi2: p[2].re,
        }
    }
}
