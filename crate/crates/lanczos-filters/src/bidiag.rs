//! Golub-Kahan bidiagonalization of `(A, y)` with optional full
//! reorthogonalization, and the derived symmetric tridiagonal data.
//!
//! Ill-posed problems lose basis orthogonality within a handful of steps, and
//! all downstream recurrence algebra presumes an orthonormal basis, so full
//! reorthogonalization is the default; `Reorth::None` is kept for
//! demonstrating the drift.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::TridiagExt;

/// Reorthogonalization policy for the generated bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reorth {
    Full,
    None,
}

/// Which candidate vector collapsed when the iteration broke down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakdownSide {
    /// `A v_i - alpha_i u_i` vanished (data-space candidate).
    Left,
    /// `A' u_{i+1} - beta_{i+1} v_i` vanished (solution-space candidate).
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    /// Index of the coefficient that fell below tolerance
    /// (`beta_{index}` for `Left`, `alpha_{index}` for `Right`).
    pub index: usize,
    pub side: BreakdownSide,
    /// Norm of the collapsed candidate before normalization.
    pub candidate_norm: f64,
}

/// State of the bidiagonalization after `m` completed steps.
///
/// After `m` steps the state holds `alpha_1..alpha_{m+1}`,
/// `beta_2..beta_{m+1}`, and the orthonormal sequences `u_1..u_{m+1}`,
/// `v_1..v_{m+1}`, which is exactly what is needed to form the order-`m`
/// projected tridiagonal together with its boundary coupling `b_{m+1}`.
/// On breakdown the missing coefficients are recorded as zeros and the
/// state stays usable up to the reached `m`.
#[derive(Clone, Debug)]
pub struct GkbState {
    /// `||y||`, the scale of the starting vector.
    pub beta0: f64,
    /// `alpha_1..alpha_{m+1}`.
    pub alphas: Vec<f64>,
    /// `beta_2..beta_{m+1}`.
    pub betas: Vec<f64>,
    /// Data-space basis `u_1..u_{m+1}` (may stop short after breakdown).
    pub u: Vec<DVector<f64>>,
    /// Solution-space basis `v_1..v_{m+1}` (may stop short after breakdown).
    pub v: Vec<DVector<f64>>,
    pub reorth: Reorth,
    /// Completed iterations; `to_tridiag(k)` is valid for `k <= m`.
    pub m: usize,
    pub breakdown: Option<Breakdown>,
    /// Scale-invariant breakdown cutoff (see [`breakdown_tolerance`]).
    pub tol_breakdown: f64,
}

/// Breakdown cutoff for a given reorthogonalization policy.
///
/// Under full reorthogonalization a genuinely exhausted Krylov space drives
/// the twice-orthogonalized candidate to the square of working precision,
/// while still-informative coefficients sit at or above the matrix-vector
/// rounding floor of roughly `eps * ||A||`. A cutoff of `1e-20 * ||A||_est`
/// separates the two; anything larger flags spurious breakdowns on severely
/// ill-posed operators well before the iteration stops carrying information.
/// Without reorthogonalization that separation does not exist and a
/// conventional `1e-14 * ||A||_est` cutoff is used.
pub fn breakdown_tolerance(norm_a_est: f64, reorth: Reorth) -> f64 {
    match reorth {
        Reorth::Full => 1e-20 * norm_a_est,
        Reorth::None => 1e-14 * norm_a_est,
    }
}

/// Cheap spectral-norm estimate by a few power-iteration steps on `A'A`.
pub fn estimate_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.ncols();
    let mut z = DVector::from_fn(n, |i, _| 1.0 + (i as f64 / n as f64));
    z /= z.norm();
    let mut est = 0.0;
    for _ in 0..12 {
        let az = a * &z;
        est = az.norm();
        z = a.transpose() * az;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        z /= nz;
    }
    est
}

fn orthogonalize(w: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // Two passes of modified Gram-Schmidt keep the basis orthonormal to
    // working precision even after many converged Ritz pairs.
    for _ in 0..2 {
        for q in basis {
            let proj = q.dot(w);
            w.axpy(-proj, q, 1.0);
        }
    }
}

impl GkbState {
    /// Start the bidiagonalization: `u_1 = y/beta_0`, `alpha_1 v_1 = A'u_1`.
    pub fn init(a: &DMatrix<f64>, y: &DVector<f64>, reorth: Reorth) -> Result<Self> {
        let beta0 = y.norm();
        if beta0 == 0.0 {
            return Err(Error::InvalidArgument(
                "zero right-hand side: bidiagonalization undefined".into(),
            ));
        }
        let tol_breakdown = breakdown_tolerance(estimate_norm(a), reorth);
        let u1 = y / beta0;
        let w = a.transpose() * &u1;
        let alpha1 = w.norm();
        let mut state = GkbState {
            beta0,
            alphas: vec![alpha1],
            betas: Vec::new(),
            u: vec![u1],
            v: Vec::new(),
            reorth,
            m: 0,
            breakdown: None,
            tol_breakdown,
        };
        if alpha1 <= state.tol_breakdown {
            state.alphas[0] = 0.0;
            state.breakdown = Some(Breakdown {
                index: 1,
                side: BreakdownSide::Right,
                candidate_norm: alpha1,
            });
        } else {
            state.v.push(w / alpha1);
        }
        Ok(state)
    }

    /// Advance by one step: computes `beta_{m+2}, u_{m+2}` and
    /// `alpha_{m+2}, v_{m+2}` from the coupled recurrences
    /// `A v_i = alpha_i u_i + beta_{i+1} u_{i+1}` and
    /// `A' u_{i+1} = beta_{i+1} v_i + alpha_{i+1} v_{i+1}`.
    pub fn step(&mut self, a: &DMatrix<f64>) -> Result<()> {
        if let Some(b) = self.breakdown {
            return Err(Error::Breakdown(b.index, self.m));
        }
        let i = self.m; // expanding from u_{i+1}, v_{i+1}
        let mut w = a * &self.v[i];
        w.axpy(-self.alphas[i], &self.u[i], 1.0);
        if self.reorth == Reorth::Full {
            orthogonalize(&mut w, &self.u);
        }
        let beta = w.norm();
        if beta <= self.tol_breakdown {
            // Krylov space in the data space is exhausted. T_{m+1} is still
            // well defined with zero boundary coupling.
            self.betas.push(0.0);
            self.alphas.push(0.0);
            self.m += 1;
            self.breakdown = Some(Breakdown {
                index: self.m + 1,
                side: BreakdownSide::Left,
                candidate_norm: beta,
            });
            return Ok(());
        }
        let u_next = w / beta;

        let mut w = a.transpose() * &u_next;
        w.axpy(-beta, &self.v[i], 1.0);
        if self.reorth == Reorth::Full {
            orthogonalize(&mut w, &self.v);
        }
        let alpha = w.norm();
        if alpha <= self.tol_breakdown {
            self.betas.push(beta);
            self.u.push(u_next);
            self.alphas.push(0.0);
            self.m += 1;
            self.breakdown = Some(Breakdown {
                index: self.m + 1,
                side: BreakdownSide::Right,
                candidate_norm: alpha,
            });
            return Ok(());
        }
        let v_next = w / alpha;

        self.betas.push(beta);
        self.alphas.push(alpha);
        self.u.push(u_next);
        self.v.push(v_next);
        self.m += 1;
        Ok(())
    }

    /// Run the bidiagonalization until `m_target` steps or breakdown.
    pub fn run(
        a: &DMatrix<f64>,
        y: &DVector<f64>,
        m_target: usize,
        reorth: Reorth,
    ) -> Result<Self> {
        let mut state = GkbState::init(a, y, reorth)?;
        state.advance_to(a, m_target)?;
        Ok(state)
    }

    /// Extend an existing state up to `m_target` steps (stops at breakdown).
    pub fn advance_to(&mut self, a: &DMatrix<f64>, m_target: usize) -> Result<()> {
        while self.m < m_target && self.breakdown.is_none() {
            self.step(a)?;
        }
        Ok(())
    }

    /// `b_1 = beta_0 alpha_1 = ||A'y||`, the projected right-hand-side scale.
    pub fn b1(&self) -> f64 {
        self.beta0 * self.alphas[0]
    }

    /// Assemble the order-`m` projected tridiagonal: `a_i = alpha_i^2 +
    /// beta_{i+1}^2`, off-diagonal `b_i = beta_i alpha_i`, with boundary
    /// coupling `b_{m+1} = beta_{m+1} alpha_{m+1}`.
    pub fn to_tridiag(&self, m: usize) -> Result<TridiagExt> {
        if m == 0 || m > self.m {
            return Err(Error::InvalidArgument(format!(
                "requested order {m} outside completed range 1..={}",
                self.m
            )));
        }
        let mut a = Vec::with_capacity(m);
        for i in 0..m {
            a.push(self.alphas[i] * self.alphas[i] + self.betas[i] * self.betas[i]);
        }
        let mut b_off = Vec::with_capacity(m - 1);
        for i in 1..m {
            b_off.push(self.betas[i - 1] * self.alphas[i]);
        }
        let b_next = self.betas[m - 1] * self.alphas[m];
        TridiagExt::new(a, b_off, self.b1(), b_next)
    }

    /// The `(m+1) x m` lower bidiagonal coefficient matrix.
    pub fn bidiagonal(&self, m: usize) -> Result<DMatrix<f64>> {
        if m == 0 || m > self.m {
            return Err(Error::InvalidArgument(format!(
                "requested order {m} outside completed range 1..={}",
                self.m
            )));
        }
        let mut b = DMatrix::zeros(m + 1, m);
        for i in 0..m {
            b[(i, i)] = self.alphas[i];
            b[(i + 1, i)] = self.betas[i];
        }
        Ok(b)
    }

    /// Basis matrices `V_k` / `U_k` with the first `k` vectors as columns.
    pub fn v_matrix(&self, k: usize) -> DMatrix<f64> {
        stack_columns(&self.v[..k])
    }

    pub fn u_matrix(&self, k: usize) -> DMatrix<f64> {
        stack_columns(&self.u[..k])
    }
}

fn stack_columns(cols: &[DVector<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Partial products of the tridiagonal off-diagonals, `prod_{i=2}^j b_i`
/// for `j = 2..=m`, in plain and log-magnitude form. The plain form may
/// underflow to zero; the log form is the authoritative one.
#[derive(Clone, Debug)]
pub struct OffdiagProducts {
    pub plain: Vec<f64>,
    pub log: Vec<f64>,
}

pub fn offdiag_products(t: &TridiagExt) -> OffdiagProducts {
    let m = t.order();
    let mut plain = Vec::with_capacity(m.saturating_sub(1));
    let mut log = Vec::with_capacity(m.saturating_sub(1));
    let mut p = 1.0;
    let mut lp = 0.0;
    for j in 2..=m {
        p *= t.b(j);
        lp += t.b(j).ln();
        plain.push(p);
        log.push(lp);
    }
    OffdiagProducts { plain, log }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{add_noise, build_shaw, compute_svd};
    use approx::assert_relative_eq;

    fn max_offdiag_identity_gap(q: &DMatrix<f64>) -> f64 {
        let g = q.transpose() * q;
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }

    #[test]
    fn init_on_identity() {
        let a = DMatrix::identity(3, 3);
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let s = GkbState::init(&a, &y, Reorth::Full).unwrap();
        assert_relative_eq!(s.beta0, 1.0);
        assert_relative_eq!(s.alphas[0], 1.0);
        assert_relative_eq!(s.u[0][0], 1.0);
        assert_relative_eq!(s.v[0][0], 1.0);
        assert!((s.u[0].norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn init_rejects_zero_rhs() {
        let a = DMatrix::identity(3, 3);
        let y = DVector::zeros(3);
        assert!(matches!(
            GkbState::init(&a, &y, Reorth::Full),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn beta0_matches_norm_on_shaw() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let s = GkbState::init(&p.matrix, &p.y_noisy, Reorth::Full).unwrap();
        assert_relative_eq!(s.beta0, p.y_noisy.norm(), max_relative = 1e-14);
        assert!((s.u[0].norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn two_by_two_runs_to_exhaustion() {
        // A = diag(2,1), y = (1,1)/sqrt(2): the Krylov space is all of R^2
        // after two steps and the third left candidate vanishes.
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let y = DVector::from_vec(vec![1.0, 1.0]) / 2.0f64.sqrt();
        let s = GkbState::run(&a, &y, 5, Reorth::Full).unwrap();
        assert_eq!(s.m, 2);
        let b = s.breakdown.expect("breakdown expected");
        assert_eq!(b.index, 3);
        assert_eq!(b.side, BreakdownSide::Left);
        // Hand values: alpha_1 = sqrt(5/2), beta_2 = 3/sqrt(10), alpha_2 = 4/sqrt(10).
        assert_relative_eq!(s.alphas[0], (2.5f64).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(s.betas[0], 3.0 / 10f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(s.alphas[1], 4.0 / 10f64.sqrt(), max_relative = 1e-13);
        assert_eq!(s.betas[1], 0.0);
        // T_2 diagonalizes the squared singular values 4 and 1.
        let t = s.to_tridiag(2).unwrap();
        assert_relative_eq!(t.a[0], 3.4, max_relative = 1e-13);
        assert_relative_eq!(t.a[1], 1.6, max_relative = 1e-13);
        assert_relative_eq!(t.b_off[0], 1.2, max_relative = 1e-13);
        assert_relative_eq!(t.b_next, 0.0);
        // Further steps are refused.
        let mut s2 = s;
        assert!(matches!(s2.step(&a), Err(Error::Breakdown(3, 2))));
    }

    #[test]
    fn bases_stay_orthonormal_with_reorth() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 25, Reorth::Full).unwrap();
        let m = s.m.min(25);
        assert!(max_offdiag_identity_gap(&s.v_matrix(m)) <= 1e-10);
        assert!(max_offdiag_identity_gap(&s.u_matrix(m)) <= 1e-10);
    }

    #[test]
    fn golub_kahan_relations_hold() {
        let p = add_noise(&build_shaw(300).unwrap(), 1e-4, 1).unwrap();
        let norm_a = estimate_norm(&p.matrix);
        let mut s = GkbState::init(&p.matrix, &p.y_noisy, Reorth::Full).unwrap();
        for m in 1..=12usize {
            s.step(&p.matrix).unwrap();
            let vm = s.v_matrix(m);
            let um1 = s.u_matrix(m + 1);
            let bm = s.bidiagonal(m).unwrap();
            let res1 = (&p.matrix * &vm - &um1 * &bm).norm();
            assert!(
                res1 <= 1e-10 * norm_a * (m as f64).sqrt(),
                "AV relation at m={m}: {res1:e}"
            );
            let um = s.u_matrix(m);
            let bm_sq = bm.rows(0, m).into_owned();
            let res2 = (p.matrix.transpose() * &um - &vm * bm_sq.transpose()).norm();
            assert!(
                res2 <= 1e-10 * norm_a * (m as f64).sqrt(),
                "A'U relation at m={m}: {res2:e}"
            );
        }
    }

    #[test]
    fn b1_is_projected_rhs_norm() {
        let p = add_noise(&build_shaw(200).unwrap(), 1e-4, 4).unwrap();
        let s = GkbState::init(&p.matrix, &p.y_noisy, Reorth::Full).unwrap();
        let aty = p.matrix.transpose() * &p.y_noisy;
        assert_relative_eq!(s.b1(), aty.norm(), max_relative = 1e-12);
    }

    #[test]
    fn tridiag_of_order_one_on_identity() {
        let a = DMatrix::identity(4, 4);
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let s = GkbState::run(&a, &y, 1, Reorth::Full).unwrap();
        // A v_1 - alpha_1 u_1 = 0: left-side exhaustion in the first step.
        assert_eq!(s.m, 1);
        let t = s.to_tridiag(1).unwrap();
        assert_relative_eq!(t.a[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(t.b1, 1.0, max_relative = 1e-14);
        assert_eq!(t.b_next, 0.0);
        assert!(s.to_tridiag(2).is_err());
    }

    #[test]
    fn projection_matches_dense_on_shaw() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 10, Reorth::Full).unwrap();
        let t = s.to_tridiag(10).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let s1sq = svd.sigma_max() * svd.sigma_max();
        let vm = s.v_matrix(10);
        let proj = vm.transpose() * p.matrix.transpose() * &p.matrix * &vm;
        let dense_t = t.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                worst = worst.max((proj[(i, j)] - dense_t[(i, j)]).abs());
            }
        }
        assert!(worst <= 1e-8 * s1sq, "projection gap {worst:e}");
    }

    #[test]
    fn shifted_projection_identity() {
        // V' (A'A + cI) V = T + cI for orthonormal V.
        let p = add_noise(&build_shaw(300).unwrap(), 1e-4, 2).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 8, Reorth::Full).unwrap();
        let t = s.to_tridiag(8).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let s1sq = svd.sigma_max() * svd.sigma_max();
        let c = 0.37 * s1sq;
        let vm = s.v_matrix(8);
        let proj =
            vm.transpose() * p.matrix.transpose() * &p.matrix * &vm + vm.transpose() * &vm * c;
        let shifted = t.shifted_dense(c);
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                worst = worst.max((proj[(i, j)] - shifted[(i, j)]).abs());
            }
        }
        assert!(worst <= 1e-8 * (s1sq + c));
    }

    #[test]
    fn orthogonality_degrades_without_reorthogonalization() {
        // The demonstration mode: once Ritz pairs converge, the plain
        // three-term recurrence loses orthogonality by many orders of
        // magnitude while the reorthogonalized basis stays at 1e-10.
        let p = add_noise(&build_shaw(200).unwrap(), 1e-4, 1).unwrap();
        let full = GkbState::run(&p.matrix, &p.y_noisy, 15, Reorth::Full).unwrap();
        let none = GkbState::run(&p.matrix, &p.y_noisy, 15, Reorth::None).unwrap();
        let m = full.m.min(none.m).min(15);
        let gap_full = max_offdiag_identity_gap(&full.v_matrix(m));
        let gap_none = max_offdiag_identity_gap(&none.v_matrix(m));
        assert!(gap_full <= 1e-10);
        assert!(
            gap_none > 1e-4,
            "expected visible orthogonality loss, got {gap_none:e}"
        );
    }

    #[test]
    fn ritz_values_approximate_squared_singular_values() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 10, Reorth::Full).unwrap();
        let ritz = crate::tridiag::ritz_values(&s.to_tridiag(10).unwrap());
        let svd = compute_svd(&p.matrix).unwrap();
        let s1sq = svd.values[0] * svd.values[0];
        // The leading Ritz values converge to the leading squared singular
        // values from below.
        for k in 0..4 {
            let eta = ritz[9 - k];
            let sigma_sq = svd.values[k] * svd.values[k];
            assert!(
                (eta - sigma_sq).abs() <= 1e-6 * s1sq,
                "Ritz {k}: {eta:e} vs {sigma_sq:e}"
            );
        }
    }

    #[test]
    fn offdiag_products_of_unit_entries() {
        let t = TridiagExt::new(vec![2.0; 5], vec![1.0; 4], 1.0, 0.0).unwrap();
        let prods = offdiag_products(&t);
        assert_eq!(prods.plain, vec![1.0; 4]);
        assert_eq!(prods.log, vec![0.0; 4]);
    }

    #[test]
    fn offdiag_products_decay_on_shaw() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 20, Reorth::Full).unwrap();
        let t = s.to_tridiag(20).unwrap();
        let prods = offdiag_products(&t);
        // Log-products eventually decrease strictly (decay of the couplings).
        let tail = &prods.log[4..];
        for w in tail.windows(2) {
            assert!(
                w[1] < w[0],
                "log-products should decrease in the tail: {:?}",
                prods.log
            );
        }
        // Eigenvalue-product bound with the singular values of the
        // discretized operator. Matching the corner entry of the degree-m
        // monic polynomial (which sits in row m+1) pairs the m off-diagonals
        // b_2..b_{m+1} with the m largest eigenvalues, so a product of
        // b_2..b_j is bounded by the first j-1 squared singular values:
        // log prod b_i <= log ||y|| + sum_{i<=j-1} log sigma_i^2.
        let svd = compute_svd(&p.matrix).unwrap();
        let log_y = p.y_noisy.norm().ln();
        for j in 2..=20usize {
            let lhs = prods.log[j - 2];
            let rhs = log_y + (0..j - 1).map(|i| 2.0 * svd.values[i].ln()).sum::<f64>();
            assert!(lhs <= rhs, "bound violated at j={j}: lhs={lhs}, rhs={rhs}");
        }
    }
}
