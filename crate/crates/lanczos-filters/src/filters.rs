//! Filter factors: SVD-domain filters, CG/CGT polynomial filters at the
//! Ritz values, the damping factors relating CGT coefficients to CGNE
//! coefficients in the Lanczos basis, and the residual representation in
//! the left bidiagonalization basis.
//!
//! The damping factors ("Lanczos filters") come in two routes:
//!
//! * the coefficient ratio `gamma_i = omega_i(c) / omega_i(0)` from two
//!   projected tridiagonal solves, the numerically stable production path;
//! * the determinant-recurrence expression
//!   `gamma_i = [theta_m/(theta_m + g_m)] * [(phi_{i+1} + h_{i+1})/phi_{i+1}]`,
//!   the reference path, carried on the signed-log track because the
//!   individual factors over- and underflow long before the ratios do.

use nalgebra::DVector;

use crate::bidiag::GkbState;
use crate::error::{Error, Result};
use crate::signedlog::plain_safe;
use crate::solvers::solve_shifted_tridiag;
use crate::tridiag::{ritz_values, ThetaPhiTable, TridiagExt};

/// Which route produced a filter set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterPath {
    Recurrence,
    CoefficientRatio,
}

/// Damping factors `gamma_1..gamma_m` at a fixed shift `c`.
///
/// Indices where the factor is undefined (vanishing reference coefficient)
/// carry `NaN` in `gamma` and `false` in `defined`; they are reported, not
/// propagated.
#[derive(Clone, Debug)]
pub struct LanczosFilterSet {
    pub m: usize,
    pub c: f64,
    pub gamma: Vec<f64>,
    pub defined: Vec<bool>,
    pub path: FilterPath,
}

impl LanczosFilterSet {
    /// Iterator over the well-defined (index, value) pairs, 1-based.
    pub fn defined_entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.gamma
            .iter()
            .zip(self.defined.iter())
            .enumerate()
            .filter(|(_, (_, &d))| d)
            .map(|(i, (&g, _))| (i + 1, g))
    }
}

/// Reference path: evaluate the filters from the determinant recurrences of
/// the projected tridiagonal.
pub fn lanczos_filters_recurrence(t: &TridiagExt, c: f64) -> LanczosFilterSet {
    let m = t.order();
    let table = ThetaPhiTable::new(t);
    let shift = table.shift(c);
    let det = table.det();
    let det_shifted = shift.theta_shifted(m);
    let mut gamma = Vec::with_capacity(m);
    let mut defined = Vec::with_capacity(m);
    for i in 1..=m {
        if table.phi_log(i + 1).is_zero() {
            gamma.push(f64::NAN);
            defined.push(false);
            continue;
        }
        let phi = table.phi(i + 1);
        let phi_shifted = shift.phi_shifted(i + 1);
        let plain_ok = plain_safe(det)
            && plain_safe(det_shifted)
            && plain_safe(phi)
            && plain_safe(phi_shifted)
            && det_shifted != 0.0
            && phi != 0.0;
        let val = if plain_ok {
            (det / det_shifted) * (phi_shifted / phi)
        } else {
            ((table.det_log() / shift.theta_shifted_log(m))
                * (shift.phi_shifted_log(i + 1) / table.phi_log(i + 1)))
            .to_f64()
        };
        gamma.push(val);
        defined.push(true);
    }
    LanczosFilterSet {
        m,
        c,
        gamma,
        defined,
        path: FilterPath::Recurrence,
    }
}

/// Production path on bare tridiagonal data: component-wise ratio of the
/// shifted and unshifted projected solves.
pub fn lanczos_filters_ratio_from_tridiag(t: &TridiagExt, c: f64) -> Result<LanczosFilterSet> {
    let m = t.order();
    let base = solve_shifted_tridiag(t, 0.0, t.b1)?;
    let shifted = solve_shifted_tridiag(t, c, t.b1)?;
    let mut gamma = Vec::with_capacity(m);
    let mut defined = Vec::with_capacity(m);
    for i in 0..m {
        if base[i].abs() < 1e-300 {
            gamma.push(f64::NAN);
            defined.push(false);
        } else {
            gamma.push(shifted[i] / base[i]);
            defined.push(true);
        }
    }
    Ok(LanczosFilterSet {
        m,
        c,
        gamma,
        defined,
        path: FilterPath::CoefficientRatio,
    })
}

/// Production path: filters of the order-`m` iterate pair drawn from a
/// bidiagonalization state.
pub fn lanczos_filters_ratio(gkb: &GkbState, m: usize, c: f64) -> Result<LanczosFilterSet> {
    let t = gkb.to_tridiag(m)?;
    lanczos_filters_ratio_from_tridiag(&t, c)
}

/// Classical SVD-domain filter shapes.
#[derive(Clone, Copy, Debug)]
pub enum FilterMethod {
    /// Keep the `k` largest singular triplets (0/1 step filter).
    Tsvd(usize),
    /// `sigma^2 / (sigma^2 + c)`.
    Tikhonov(f64),
}

/// Evaluate a classical filter over a nonincreasing singular-value sequence.
pub fn svd_filters(sigma: &[f64], method: FilterMethod) -> Vec<f64> {
    match method {
        FilterMethod::Tsvd(k) => sigma
            .iter()
            .enumerate()
            .map(|(i, _)| if i < k { 1.0 } else { 0.0 })
            .collect(),
        FilterMethod::Tikhonov(c) => sigma.iter().map(|&s| s * s / (s * s + c)).collect(),
    }
}

/// The degree-`m` CG filter polynomial `f_m(x) = 1 - prod_i (1 - x/eta_i)`
/// evaluated at the given abscissas, where `eta_i` are the Ritz values of
/// the projected tridiagonal. By construction `f_m` interpolates one at
/// every Ritz value and vanishes at zero.
pub fn cg_polynomial_filter(t: &TridiagExt, x_values: &[f64]) -> Result<Vec<f64>> {
    let ritz = ritz_values(t);
    if ritz.iter().any(|&e| e <= 0.0) {
        return Err(Error::Numerical(format!(
            "nonpositive Ritz value {:e}: projected operator not positive definite",
            ritz[0]
        )));
    }
    Ok(x_values
        .iter()
        .map(|&x| {
            // Accumulate the residual-polynomial product in sign/log form;
            // the factors span many orders of magnitude when the Ritz values
            // do, and one exact zero factor must yield exactly zero.
            let mut sign = 1.0f64;
            let mut ln_abs = 0.0f64;
            let mut zero = false;
            for &eta in &ritz {
                let f = 1.0 - x / eta;
                if f == 0.0 {
                    zero = true;
                    break;
                }
                sign *= f.signum();
                ln_abs += f.abs().ln();
            }
            if zero {
                1.0
            } else {
                1.0 - sign * ln_abs.exp()
            }
        })
        .collect())
}

/// The CGT filter evaluated at the (unshifted) Ritz values:
/// `eta_i / (eta_i + c)`, the Tikhonov shape sampled on the projected
/// spectrum.
pub fn cgt_filter_at_ritz(t: &TridiagExt, c: f64) -> Result<Vec<f64>> {
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "shift must be nonnegative, got {c}"
        )));
    }
    Ok(ritz_values(t).iter().map(|&e| e / (e + c)).collect())
}

/// The natural (data-space) residual of the `m`-th CGT iterate expanded in
/// the left bidiagonalization basis `u_1..u_{m+1}`, plus the residual norm
/// obtained from the coefficients alone.
#[derive(Clone, Debug)]
pub struct NaturalResidual {
    pub m: usize,
    pub c: f64,
    /// Coefficients of `u_1..u_{m+1}`.
    pub u_coeffs: Vec<f64>,
    /// `sqrt(sum of squared coefficients)`; equals `||y - A x_m(c)||` up to
    /// the orthonormality of the basis.
    pub norm: f64,
}

impl NaturalResidual {
    /// Reassemble the residual vector from the stored basis. Skips a
    /// trailing basis vector that breakdown never produced, which is safe
    /// because its coefficient is zero in exactly that case.
    pub fn reconstruct(&self, gkb: &GkbState) -> DVector<f64> {
        let n = gkb.u[0].len();
        let mut r = DVector::zeros(n);
        for (k, &coef) in self.u_coeffs.iter().enumerate() {
            if let Some(u) = gkb.u.get(k) {
                r.axpy(coef, u, 1.0);
            }
        }
        r
    }
}

/// Expand `y - A x_m^{(c)}` in the left basis by inserting
/// `x = sum_i omega_i(c) v_i` into the residual and folding the
/// bidiagonalization recurrence `A v_i = alpha_i u_i + beta_{i+1} u_{i+1}`:
///
/// * coefficient of `u_1`:        `beta_0 - omega_1 alpha_1`
/// * coefficient of `u_i`, i=2..m: `-(omega_i alpha_i + omega_{i-1} beta_i)`
/// * coefficient of `u_{m+1}`:    `-omega_m beta_{m+1}`
///
/// with `omega_i` the shifted (CGT) coefficients.
pub fn natural_residual_via_filters(gkb: &GkbState, m: usize, c: f64) -> Result<NaturalResidual> {
    if m == 0 {
        return Ok(NaturalResidual {
            m,
            c,
            u_coeffs: vec![gkb.beta0],
            norm: gkb.beta0,
        });
    }
    let t = gkb.to_tridiag(m)?;
    let omega = solve_shifted_tridiag(&t, c, t.b1)?;
    let alpha = &gkb.alphas;
    let beta = &gkb.betas; // beta[i-2] = beta_i for i >= 2
    let mut coeffs = Vec::with_capacity(m + 1);
    coeffs.push(gkb.beta0 - omega[0] * alpha[0]);
    for i in 2..=m {
        coeffs.push(-(omega[i - 1] * alpha[i - 1] + omega[i - 2] * beta[i - 2]));
    }
    coeffs.push(-omega[m - 1] * beta[m - 1]);
    let norm = coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(NaturalResidual {
        m,
        c,
        u_coeffs: coeffs,
        norm,
    })
}

/// Filters expressing a shorter iterate in the basis of a longer one:
/// `gamma_i = omega_i^{(m_stop)} / omega_i^{(m)}` for `i <= m_stop` and
/// exactly zero beyond. Near-truncation filters: the zero tail is exact but
/// the leading entries are generally not one.
pub fn truncation_filters(gkb: &GkbState, m_stop: usize, m: usize) -> Result<LanczosFilterSet> {
    if m_stop > m {
        return Err(Error::InvalidArgument(format!(
            "m_stop = {m_stop} exceeds m = {m}"
        )));
    }
    let t = gkb.to_tridiag(m)?;
    let long = solve_shifted_tridiag(&t, 0.0, t.b1)?;
    let mut gamma = vec![0.0; m];
    let mut defined = vec![true; m];
    if m_stop > 0 {
        let t_short = gkb.to_tridiag(m_stop)?;
        let short = solve_shifted_tridiag(&t_short, 0.0, t_short.b1)?;
        for i in 0..m_stop {
            if long[i].abs() < 1e-300 {
                gamma[i] = f64::NAN;
                defined[i] = false;
            } else {
                gamma[i] = short[i] / long[i];
            }
        }
    }
    Ok(LanczosFilterSet {
        m,
        c: 0.0,
        gamma,
        defined,
        path: FilterPath::CoefficientRatio,
    })
}
