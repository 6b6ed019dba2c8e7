//! Symmetric-tridiagonal machinery: determinant recurrences, explicit
//! inverse entries, diagonal-shift increments and Ritz values.
//!
//! Everything here operates on the extended tridiagonal data produced by the
//! bidiagonalization ([`crate::bidiag::GkbState::to_tridiag`]), but the
//! routines are generic over any symmetric positive-definite tridiagonal.
//!
//! Index conventions follow the linear-algebra literature: the order-`m`
//! matrix has diagonal `a_1..a_m` and off-diagonal `b_2..b_m`; `b_1` is the
//! right-hand-side scale and `b_{m+1}` the boundary coupling to the next
//! basis vector, neither of which enters the matrix itself.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::signedlog::{plain_safe, SignedLog};

/// Order cap for exact polynomial coefficients of the shift increments;
/// beyond this the coefficient magnitudes are no longer representable and
/// the evaluated form must be used.
pub const COEFFICIENT_ORDER_CAP: usize = 30;

/// Symmetric tridiagonal projection data with the two boundary scalars.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TridiagExt {
    /// Diagonal entries `a_1..a_m`.
    pub a: Vec<f64>,
    /// Off-diagonal entries `b_2..b_m` (empty when `m == 1`).
    pub b_off: Vec<f64>,
    /// Right-hand-side scale `b_1` (the norm of the projected RHS).
    pub b1: f64,
    /// Boundary coupling `b_{m+1}` to the next basis vector.
    pub b_next: f64,
}

impl TridiagExt {
    pub fn new(a: Vec<f64>, b_off: Vec<f64>, b1: f64, b_next: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidArgument(
                "tridiagonal order must be >= 1".into(),
            ));
        }
        if b_off.len() + 1 != a.len() {
            return Err(Error::InvalidArgument(format!(
                "off-diagonal length {} does not match order {}",
                b_off.len(),
                a.len()
            )));
        }
        Ok(TridiagExt {
            a,
            b_off,
            b1,
            b_next,
        })
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Off-diagonal entry `b_i` for `2 <= i <= m`.
    pub fn b(&self, i: usize) -> f64 {
        self.b_off[i - 2]
    }

    /// Largest diagonal entry; the natural scale for shift parameters.
    pub fn a_max(&self) -> f64 {
        self.a.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.order();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = self.a[i];
        }
        for i in 0..m - 1 {
            t[(i, i + 1)] = self.b_off[i];
            t[(i + 1, i)] = self.b_off[i];
        }
        t
    }

    pub fn shifted_dense(&self, c: f64) -> DMatrix<f64> {
        let mut t = self.to_dense();
        for i in 0..self.order() {
            t[(i, i)] += c;
        }
        t
    }
}

/// Forward (`theta`) and backward (`phi`) determinant recurrences of a fixed
/// order-`m` tridiagonal, on both the plain and the signed-log track.
///
/// `theta_l` is the determinant of the order-`l` leading principal submatrix;
/// `phi_l` plays the mirrored role from the trailing end, so `phi_1 = theta_m`.
#[derive(Clone, Debug)]
pub struct ThetaPhiTable {
    t: TridiagExt,
    /// `theta_0..theta_m`.
    theta: Vec<f64>,
    /// `phi_1..phi_{m+1}`, stored so that `phi[l-1]` is `phi_l`.
    phi: Vec<f64>,
    theta_log: Vec<SignedLog>,
    phi_log: Vec<SignedLog>,
}

impl ThetaPhiTable {
    pub fn new(t: &TridiagExt) -> Self {
        let m = t.order();
        let mut theta = vec![0.0; m + 1];
        let mut theta_log = vec![SignedLog::ZERO; m + 1];
        theta[0] = 1.0;
        theta_log[0] = SignedLog::ONE;
        theta[1] = t.a[0];
        theta_log[1] = SignedLog::new(t.a[0]);
        for l in 2..=m {
            let b2 = t.b(l) * t.b(l);
            theta[l] = t.a[l - 1] * theta[l - 1] - b2 * theta[l - 2];
            theta_log[l] = SignedLog::new(t.a[l - 1]) * theta_log[l - 1]
                - SignedLog::new(b2) * theta_log[l - 2];
        }

        let mut phi = vec![0.0; m + 1];
        let mut phi_log = vec![SignedLog::ZERO; m + 1];
        phi[m] = 1.0; // phi_{m+1}
        phi_log[m] = SignedLog::ONE;
        phi[m - 1] = t.a[m - 1]; // phi_m
        phi_log[m - 1] = SignedLog::new(t.a[m - 1]);
        for l in (1..m).rev() {
            // phi_l = a_l phi_{l+1} - b_{l+1}^2 phi_{l+2}
            let b2 = t.b(l + 1) * t.b(l + 1);
            phi[l - 1] = t.a[l - 1] * phi[l] - b2 * phi[l + 1];
            phi_log[l - 1] =
                SignedLog::new(t.a[l - 1]) * phi_log[l] - SignedLog::new(b2) * phi_log[l + 1];
        }

        ThetaPhiTable {
            t: t.clone(),
            theta,
            phi,
            theta_log,
            phi_log,
        }
    }

    pub fn order(&self) -> usize {
        self.t.order()
    }

    pub fn tridiag(&self) -> &TridiagExt {
        &self.t
    }

    /// `theta_l` for `0 <= l <= m`.
    pub fn theta(&self, l: usize) -> f64 {
        self.theta[l]
    }

    /// `phi_l` for `1 <= l <= m+1`.
    pub fn phi(&self, l: usize) -> f64 {
        self.phi[l - 1]
    }

    pub fn theta_log(&self, l: usize) -> SignedLog {
        self.theta_log[l]
    }

    pub fn phi_log(&self, l: usize) -> SignedLog {
        self.phi_log[l - 1]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn phis(&self) -> &[f64] {
        &self.phi
    }

    /// Determinant of the full matrix (`theta_m`).
    pub fn det(&self) -> f64 {
        self.theta[self.order()]
    }

    pub fn det_log(&self) -> SignedLog {
        self.theta_log[self.order()]
    }

    /// Entry `(i, j)` of the inverse, 1-based.
    ///
    /// For `i <= j` this is `(-1)^{i+j} b_{i+1}..b_j theta_{i-1} phi_{j+1} / theta_m`
    /// with the empty product equal to one; the matrix is symmetric so `i > j`
    /// swaps the indices.
    pub fn inverse_entry(&self, i: usize, j: usize) -> Result<f64> {
        let m = self.order();
        if i < 1 || j < 1 || i > m || j > m {
            return Err(Error::InvalidArgument(format!(
                "inverse entry ({i},{j}) out of range for order {m}"
            )));
        }
        if self.det() == 0.0 && self.det_log().is_zero() {
            return Err(Error::SingularSystem("theta_m = 0".into()));
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        entry_from_parts(
            &self.t,
            i,
            j,
            self.theta(i - 1),
            self.phi(j + 1),
            self.det(),
            self.theta_log(i - 1),
            self.phi_log(j + 1),
            self.det_log(),
        )
    }

    /// Evaluate the shift increments `g(c)`, `h(c)` at a given `c`.
    pub fn shift(&self, c: f64) -> ShiftIncrements<'_> {
        ShiftIncrements::new(self, c)
    }

    /// Exact polynomial coefficients of the shift increments in `c`.
    pub fn shift_poly_coefficients(&self) -> Result<ShiftPolynomials> {
        ShiftPolynomials::new(self)
    }
}

#[allow(clippy::too_many_arguments)]
fn entry_from_parts(
    t: &TridiagExt,
    i: usize,
    j: usize,
    theta_im1: f64,
    phi_jp1: f64,
    det: f64,
    theta_im1_log: SignedLog,
    phi_jp1_log: SignedLog,
    det_log: SignedLog,
) -> Result<f64> {
    debug_assert!(i <= j);
    if det_log.is_zero() {
        return Err(Error::SingularSystem("shifted determinant is zero".into()));
    }
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut prod = 1.0;
    let mut prod_log = SignedLog::ONE;
    for k in (i + 1)..=j {
        prod *= t.b(k);
        prod_log = prod_log * SignedLog::new(t.b(k));
    }
    let use_plain = plain_safe(prod)
        && plain_safe(theta_im1)
        && plain_safe(phi_jp1)
        && plain_safe(det)
        && det != 0.0;
    if use_plain {
        Ok(sign * prod * theta_im1 * phi_jp1 / det)
    } else {
        let v = SignedLog::new(sign) * prod_log * theta_im1_log * phi_jp1_log / det_log;
        Ok(v.to_f64())
    }
}

/// Shift increments `g_l(c)` and `h_l(c)` at a fixed shift `c`, such that the
/// determinant recurrences of the shifted matrix satisfy
/// `theta_l(c) = theta_l + g_l(c)` and `phi_l(c) = phi_l + h_l(c)`.
#[derive(Clone, Debug)]
pub struct ShiftIncrements<'a> {
    table: &'a ThetaPhiTable,
    c: f64,
    /// `g_0..g_m`.
    g: Vec<f64>,
    /// `h_1..h_{m+1}`, stored so that `h[l-1]` is `h_l`.
    h: Vec<f64>,
    g_log: Vec<SignedLog>,
    h_log: Vec<SignedLog>,
}

impl<'a> ShiftIncrements<'a> {
    fn new(table: &'a ThetaPhiTable, c: f64) -> Self {
        let t = &table.t;
        let m = t.order();
        let c_log = SignedLog::new(c);

        // g_0 = 0, g_1 = c, then
        // g_l = (a_l + c) g_{l-1} - b_l^2 g_{l-2} + c theta_{l-1}.
        let mut g = vec![0.0; m + 1];
        let mut g_log = vec![SignedLog::ZERO; m + 1];
        if m >= 1 {
            g[1] = c;
            g_log[1] = c_log;
        }
        for l in 2..=m {
            let b2 = t.b(l) * t.b(l);
            g[l] = (t.a[l - 1] + c) * g[l - 1] - b2 * g[l - 2] + c * table.theta(l - 1);
            g_log[l] = SignedLog::new(t.a[l - 1] + c) * g_log[l - 1]
                - SignedLog::new(b2) * g_log[l - 2]
                + c_log * table.theta_log(l - 1);
        }

        // h_{m+1} = 0, h_m = c, then
        // h_l = (a_l + c) h_{l+1} - b_{l+1}^2 h_{l+2} + c phi_{l+1}.
        let mut h = vec![0.0; m + 1];
        let mut h_log = vec![SignedLog::ZERO; m + 1];
        h[m - 1] = c;
        h_log[m - 1] = c_log;
        for l in (1..m).rev() {
            let b2 = t.b(l + 1) * t.b(l + 1);
            h[l - 1] = (t.a[l - 1] + c) * h[l] - b2 * h[l + 1] + c * table.phi(l + 1);
            h_log[l - 1] = SignedLog::new(t.a[l - 1] + c) * h_log[l]
                - SignedLog::new(b2) * h_log[l + 1]
                + c_log * table.phi_log(l + 1);
        }

        ShiftIncrements {
            table,
            c,
            g,
            h,
            g_log,
            h_log,
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    /// `g_l(c)` for `0 <= l <= m`.
    pub fn g(&self, l: usize) -> f64 {
        self.g[l]
    }

    /// `h_l(c)` for `1 <= l <= m+1`.
    pub fn h(&self, l: usize) -> f64 {
        self.h[l - 1]
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    /// `theta_l + g_l(c)`, the shifted forward recurrence value.
    pub fn theta_shifted(&self, l: usize) -> f64 {
        self.table.theta(l) + self.g[l]
    }

    /// `phi_l + h_l(c)`, the shifted backward recurrence value.
    pub fn phi_shifted(&self, l: usize) -> f64 {
        self.table.phi(l) + self.h[l - 1]
    }

    pub fn theta_shifted_log(&self, l: usize) -> SignedLog {
        self.table.theta_log(l) + self.g_log[l]
    }

    pub fn phi_shifted_log(&self, l: usize) -> SignedLog {
        self.table.phi_log(l) + self.h_log[l - 1]
    }

    /// `(det T, det(T + cI))` where the second component is `theta_m + g_m(c)`.
    pub fn det_pair(&self) -> (f64, f64) {
        let m = self.order();
        let det = self.table.det();
        let shifted = if plain_safe(det) && plain_safe(self.g[m]) {
            det + self.g[m]
        } else {
            self.theta_shifted_log(m).to_f64()
        };
        (det, shifted)
    }

    /// Entry `(i, j)` of the inverse of the shifted matrix `T + cI`.
    pub fn inverse_entry(&self, i: usize, j: usize) -> Result<f64> {
        let m = self.order();
        if i < 1 || j < 1 || i > m || j > m {
            return Err(Error::InvalidArgument(format!(
                "inverse entry ({i},{j}) out of range for order {m}"
            )));
        }
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        entry_from_parts(
            &self.table.t,
            i,
            j,
            self.theta_shifted(i - 1),
            self.phi_shifted(j + 1),
            self.theta_shifted(m),
            self.theta_shifted_log(i - 1),
            self.phi_shifted_log(j + 1),
            self.theta_shifted_log(m),
        )
    }
}

/// Polynomial coefficients (lowest degree first) of the shift increments.
///
/// `g[l]` holds the coefficients of `g_l`, a monic polynomial of degree `l`;
/// `h[l-1]` holds those of `h_l`, monic of degree `m - l + 1`.
#[derive(Clone, Debug)]
pub struct ShiftPolynomials {
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

fn poly_add(p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len().max(q.len());
    let mut r = vec![0.0; n];
    for (i, v) in p.iter().enumerate() {
        r[i] += v;
    }
    for (i, v) in q.iter().enumerate() {
        r[i] += v;
    }
    r
}

fn poly_scale(p: &[f64], s: f64) -> Vec<f64> {
    p.iter().map(|v| v * s).collect()
}

/// Multiply by `(s + c)`: a scale plus a degree shift.
fn poly_mul_linear(p: &[f64], s: f64) -> Vec<f64> {
    let mut r = vec![0.0; p.len() + 1];
    for (i, v) in p.iter().enumerate() {
        r[i] += s * v;
        r[i + 1] += v;
    }
    r
}

pub fn poly_eval(p: &[f64], c: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &coef| acc * c + coef)
}

impl ShiftPolynomials {
    fn new(table: &ThetaPhiTable) -> Result<Self> {
        let t = &table.t;
        let m = t.order();
        if m > COEFFICIENT_ORDER_CAP {
            return Err(Error::Unsupported(format!(
                "coefficient mode capped at order {COEFFICIENT_ORDER_CAP} (got {m}); use the evaluated form"
            )));
        }
        let mut g: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        g.push(vec![0.0]); // g_0 = 0
        g.push(vec![0.0, 1.0]); // g_1 = c
        for l in 2..=m {
            let b2 = t.b(l) * t.b(l);
            let mut p = poly_mul_linear(&g[l - 1], t.a[l - 1]);
            p = poly_add(&p, &poly_scale(&g[l - 2], -b2));
            // + c * theta_{l-1}
            p = poly_add(&p, &[0.0, table.theta(l - 1)]);
            g.push(p);
        }

        let mut h: Vec<Vec<f64>> = vec![Vec::new(); m + 1];
        h[m] = vec![0.0]; // h_{m+1} = 0
        h[m - 1] = vec![0.0, 1.0]; // h_m = c
        for l in (1..m).rev() {
            let b2 = t.b(l + 1) * t.b(l + 1);
            let mut p = poly_mul_linear(&h[l], t.a[l - 1]);
            p = poly_add(&p, &poly_scale(&h[l + 1], -b2));
            p = poly_add(&p, &[0.0, table.phi(l + 1)]);
            h[l - 1] = p;
        }

        Ok(ShiftPolynomials { g, h })
    }

    /// Coefficients of `h_l` for `1 <= l <= m+1`.
    pub fn h_poly(&self, l: usize) -> &[f64] {
        &self.h[l - 1]
    }
}

/// Eigenvalues of the order-`m` symmetric tridiagonal, sorted ascending.
///
/// These are the Ritz values of the projected operator: the roots of the
/// CG residual polynomial and the quantities the polynomial filters
/// interpolate.
pub fn ritz_values(t: &TridiagExt) -> Vec<f64> {
    let dense = t.to_dense();
    let eig = dense.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    vals
}
