//! CGNE and CG-Tikhonov iterates through the projected tridiagonal systems,
//! the recurrence-based reference paths, the discrepancy stopping rule and
//! the residual identities connecting the two methods.
//!
//! The production path solves `(T_m + cI) y = b_1 e_1` by an unpivoted
//! symmetric tridiagonal factorization, which is the exact-arithmetic
//! equivalent of running CG on the (shifted) normal equations. The reference
//! path evaluates the explicit inverse-entry formulas instead; agreement of
//! the two is one of the core identities this crate exists to check.

use nalgebra::{DMatrix, DVector};

use crate::bidiag::GkbState;
use crate::error::{Error, Result};
use crate::tridiag::{ThetaPhiTable, TridiagExt};

/// One CGNE/CGT iterate expanded in the solution-space basis.
#[derive(Clone, Debug)]
pub struct IterateRecord {
    pub m: usize,
    /// Tikhonov shift; zero for plain CGNE.
    pub c: f64,
    /// Coefficients of the iterate in the basis `v_1..v_m`.
    pub omega: Vec<f64>,
    /// Reconstructed solution-space vector `sum_i omega_i v_i`.
    pub x: DVector<f64>,
    /// Natural (data-space) residual norm `||y - A x||`.
    pub nat_res_norm: f64,
    /// Normal-equations residual norm `||A'y - (A'A + cI) x||`.
    pub ne_res_norm: f64,
    /// `||x - x_true||` when the true solution is known.
    pub err_norm: Option<f64>,
}

/// Solve `(T + cI) w = rhs_scale * e_1` by the LDL' factorization of the
/// shifted tridiagonal. Fails only if a pivot vanishes, which positivity of
/// the projected operator rules out for `c >= 0`; guarded anyway.
pub(crate) fn solve_shifted_tridiag(t: &TridiagExt, c: f64, rhs_scale: f64) -> Result<Vec<f64>> {
    let m = t.order();
    let mut d = vec![0.0; m]; // pivots
    let mut l = vec![0.0; m]; // subdiagonal multipliers, l[i] couples i-1 -> i
    d[0] = t.a[0] + c;
    for i in 1..m {
        if d[i - 1] == 0.0 {
            return Err(Error::SingularSystem(format!("zero pivot at index {i}")));
        }
        l[i] = t.b(i + 1) / d[i - 1];
        d[i] = (t.a[i] + c) - l[i] * t.b(i + 1);
    }
    if d[m - 1] == 0.0 {
        return Err(Error::SingularSystem("zero pivot at final index".into()));
    }
    // Forward substitution with rhs = rhs_scale * e_1, then D, then L'.
    let mut w = vec![0.0; m];
    w[0] = rhs_scale;
    for i in 1..m {
        w[i] = -l[i] * w[i - 1];
    }
    for i in 0..m {
        w[i] /= d[i];
    }
    for i in (0..m - 1).rev() {
        w[i] -= l[i + 1] * w[i + 1];
    }
    Ok(w)
}

fn reconstruct(gkb: &GkbState, omega: &[f64]) -> DVector<f64> {
    let n = gkb.u[0].len();
    let mut x = DVector::zeros(n);
    for (i, &w) in omega.iter().enumerate() {
        x.axpy(w, &gkb.v[i], 1.0);
    }
    x
}

fn make_record(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    c: f64,
    omega: Vec<f64>,
    x_true: Option<&DVector<f64>>,
) -> IterateRecord {
    let x = reconstruct(gkb, &omega);
    let nat_res_norm = (y - a * &x).norm();
    let aty = a.transpose() * y;
    let ne_res = &aty - a.transpose() * (a * &x) - &x * c;
    IterateRecord {
        m,
        c,
        omega,
        nat_res_norm,
        ne_res_norm: ne_res.norm(),
        err_norm: x_true.map(|xt| (&x - xt).norm()),
        x,
    }
}

/// The trivial `m = 0` record (zero iterate).
pub fn zero_iterate(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    c: f64,
    x_true: Option<&DVector<f64>>,
) -> IterateRecord {
    let n = a.ncols();
    let x = DVector::zeros(n);
    IterateRecord {
        m: 0,
        c,
        omega: Vec::new(),
        nat_res_norm: y.norm(),
        ne_res_norm: (a.transpose() * y).norm(),
        err_norm: x_true.map(|xt| xt.norm()),
        x,
    }
}

/// The `m`-th CG-Tikhonov iterate: solve `(T_m + cI) w = b_1 e_1` and set
/// `x = V_m w`. With `c = 0` this is exactly the CGNE iterate.
pub fn cgt_iterate(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    c: f64,
    x_true: Option<&DVector<f64>>,
) -> Result<IterateRecord> {
    if c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "shift must be nonnegative, got {c}"
        )));
    }
    let t = gkb.to_tridiag(m)?;
    let omega = solve_shifted_tridiag(&t, c, t.b1)?;
    Ok(make_record(a, y, gkb, m, c, omega, x_true))
}

/// The `m`-th CGNE iterate: solve `T_m w = b_1 e_1`, `x = V_m w`.
pub fn cgne_iterate(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    x_true: Option<&DVector<f64>>,
) -> Result<IterateRecord> {
    cgt_iterate(a, y, gkb, m, 0.0, x_true)
}

/// Reference path: CGNE coefficients from the explicit first inverse column,
/// `omega_i = b_1 (T_m^{-1})_{i1}`.
pub fn cgne_via_recurrence(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    x_true: Option<&DVector<f64>>,
) -> Result<IterateRecord> {
    let t = gkb.to_tridiag(m)?;
    let table = ThetaPhiTable::new(&t);
    let mut omega = Vec::with_capacity(m);
    for i in 1..=m {
        omega.push(t.b1 * table.inverse_entry(i, 1)?);
    }
    Ok(make_record(a, y, gkb, m, 0.0, omega, x_true))
}

/// Reference path: CGT coefficients from the shifted inverse column,
/// `omega_i = b_1 ((T_m + cI)^{-1})_{i1}`.
pub fn cgt_via_recurrence(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    c: f64,
    x_true: Option<&DVector<f64>>,
) -> Result<IterateRecord> {
    let t = gkb.to_tridiag(m)?;
    let table = ThetaPhiTable::new(&t);
    let shift = table.shift(c);
    let mut omega = Vec::with_capacity(m);
    for i in 1..=m {
        omega.push(t.b1 * shift.inverse_entry(i, 1)?);
    }
    Ok(make_record(a, y, gkb, m, c, omega, x_true))
}

/// Outcome of the discrepancy-principle stopping rule.
#[derive(Clone, Debug)]
pub struct DiscrepancyStop {
    /// First iteration whose data residual satisfies the discrepancy bound.
    pub m: usize,
    pub record: IterateRecord,
    /// Set when the bound was never met and the iteration hit its cap (or
    /// the bidiagonalization was exhausted).
    pub capped: bool,
}

/// Stop at the smallest `m` with `||y - A x_m|| <= tau * abs_noise`,
/// advancing the bidiagonalization as needed up to `cap` steps.
pub fn discrepancy_stop(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &mut GkbState,
    abs_noise: f64,
    tau: f64,
    cap: usize,
    x_true: Option<&DVector<f64>>,
) -> Result<DiscrepancyStop> {
    if abs_noise <= 0.0 {
        return Err(Error::InvalidArgument(
            "discrepancy principle needs a positive noise estimate".into(),
        ));
    }
    if tau < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "discrepancy safety factor must be >= 1, got {tau}"
        )));
    }
    let bound = tau * abs_noise;
    if y.norm() <= bound {
        return Ok(DiscrepancyStop {
            m: 0,
            record: zero_iterate(a, y, 0.0, x_true),
            capped: false,
        });
    }
    let mut last: Option<IterateRecord> = None;
    for m in 1..=cap {
        if gkb.m < m {
            if gkb.breakdown.is_some() {
                break;
            }
            gkb.step(a)?;
        }
        let rec = cgne_iterate(a, y, gkb, m, x_true)?;
        let done = rec.nat_res_norm <= bound;
        last = Some(rec);
        if done {
            return Ok(DiscrepancyStop {
                m,
                record: last.unwrap(),
                capped: false,
            });
        }
    }
    let record = match last {
        Some(r) => r,
        None => zero_iterate(a, y, 0.0, x_true),
    };
    Ok(DiscrepancyStop {
        m: record.m,
        record,
        capped: true,
    })
}

/// Measured and predicted quantities for the shifted/unshifted
/// normal-equations residual identity.
#[derive(Clone, Debug)]
pub struct ResidualRelationReport {
    pub m: usize,
    pub c: f64,
    /// `|cos|` of the angle between `A'(y - A x_m)` and `v_{m+1}`
    /// (`None` when the next basis vector is unavailable after breakdown).
    pub cos_angle: Option<f64>,
    /// Least-squares scalar relating the shifted to the unshifted residual.
    pub empirical_ratio: f64,
    /// `theta_m / (theta_m + g_m(c))`.
    pub predicted_ratio: f64,
    pub relative_difference: f64,
}

/// Check the residual-ratio identity
/// `A'y - (A'A + cI) x_m^{(c)} = [theta_m/(theta_m + g_m(c))] A'(y - A x_m)`
/// and the collinearity of the unshifted residual with `v_{m+1}`.
pub fn residual_relation_check(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    c: f64,
) -> Result<ResidualRelationReport> {
    let cg = cgne_iterate(a, y, gkb, m, None)?;
    let cgt = cgt_iterate(a, y, gkb, m, c, None)?;
    let aty = a.transpose() * y;
    let r_plain = &aty - a.transpose() * (a * &cg.x);
    let r_shift = &aty - a.transpose() * (a * &cgt.x) - &cgt.x * c;

    let cos_angle = gkb
        .v
        .get(m)
        .map(|v_next| (r_plain.dot(v_next) / r_plain.norm()).abs());

    let empirical_ratio = r_shift.dot(&r_plain) / r_plain.dot(&r_plain);

    let t = gkb.to_tridiag(m)?;
    let table = ThetaPhiTable::new(&t);
    let shift = table.shift(c);
    let predicted_ratio = (table.det_log() / shift.theta_shifted_log(m)).to_f64();

    let relative_difference =
        (empirical_ratio - predicted_ratio).abs() / predicted_ratio.abs().max(f64::MIN_POSITIVE);
    Ok(ResidualRelationReport {
        m,
        c,
        cos_angle,
        empirical_ratio,
        predicted_ratio,
        relative_difference,
    })
}

pub use crate::problems::OptimalParameter;

/// Shift minimizing the true error of the `m`-th CGT iterate, located by
/// bracketed scalar minimization of `log10 c`. Demonstration tool: needs the
/// true solution.
pub fn best_cgt_parameter(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    m: usize,
    x_true: &DVector<f64>,
) -> Result<OptimalParameter> {
    let t = gkb.to_tridiag(m)?;
    let a_max = t.a_max();
    let lo = (1e-16 * a_max).log10();
    let hi = a_max.log10();
    let err = |log_c: f64| -> f64 {
        let c = 10f64.powf(log_c);
        match cgt_iterate(a, y, gkb, m, c, Some(x_true)) {
            Ok(rec) => rec.err_norm.unwrap(),
            Err(_) => f64::INFINITY,
        }
    };
    Ok(crate::problems::minimize_log_scale(lo, hi, 121, err))
}
