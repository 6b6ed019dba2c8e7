//! Discretized ill-posed test problems and SVD-based direct regularization.
//!
//! Both built-in kernels are first-kind Fredholm integral operators
//! discretized by midpoint quadrature on `n` equispaced nodes, which keeps
//! the construction simple and reproducible. Singular values of the
//! resulting matrices decay rapidly with no gap, the defining trait of a
//! discretely ill-posed problem.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A quadrature-discretized operator together with a known true solution,
/// clean and noise-polluted right-hand sides, and the noise metadata.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    /// Kernel label ("shaw", "gravity", or a user-supplied name).
    pub kernel_name: String,
    /// Dense n-by-n operator.
    pub matrix: DMatrix<f64>,
    /// Collocation nodes (rows).
    pub grid_s: Vec<f64>,
    /// Quadrature nodes (columns).
    pub grid_t: Vec<f64>,
    /// Quadrature weights (uniform for the midpoint rule).
    pub weights: Vec<f64>,
    pub x_true: DVector<f64>,
    pub y_true: DVector<f64>,
    /// `y_true + noise`; equals `y_true` until noise is added.
    pub y_noisy: DVector<f64>,
    pub noise: DVector<f64>,
    /// Relative noise level used to scale the perturbation.
    pub rel_noise: f64,
    /// `|| y_noisy - y_true ||_2`.
    pub abs_noise: f64,
    pub seed: u64,
}

impl DiscreteProblem {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    fn from_parts(
        kernel_name: &str,
        matrix: DMatrix<f64>,
        grid_s: Vec<f64>,
        grid_t: Vec<f64>,
        weights: Vec<f64>,
        x_true: DVector<f64>,
    ) -> Self {
        let y_true = &matrix * &x_true;
        let n = y_true.len();
        DiscreteProblem {
            kernel_name: kernel_name.to_string(),
            matrix,
            grid_s,
            grid_t,
            weights,
            x_true,
            y_noisy: y_true.clone(),
            y_true,
            noise: DVector::zeros(n),
            rel_noise: 0.0,
            abs_noise: 0.0,
            seed: 0,
        }
    }
}

/// The shaw kernel `(cos s + cos t)^2 (sin u / u)^2` with
/// `u = pi (sin s + sin t)`, evaluated with the analytic `u -> 0` limit so
/// the diagonal loci `sin s + sin t = 0` stay finite.
pub fn shaw_kernel(s: f64, t: f64) -> f64 {
    let a = s.cos() + t.cos();
    let u = std::f64::consts::PI * (s.sin() + t.sin());
    let sinc = if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    };
    a * a * sinc * sinc
}

/// The classical two-Gaussian-bump solution used with the shaw kernel.
pub fn shaw_solution(t: f64) -> f64 {
    2.0 * (-6.0 * (t - 0.8).powi(2)).exp() + (-2.0 * (t + 0.5).powi(2)).exp()
}

/// One-dimensional image reconstruction model on `[-pi/2, pi/2]`,
/// discretized with the midpoint rule on `n` nodes. Severely ill-posed.
pub fn build_shaw(n: usize) -> Result<DiscreteProblem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "shaw needs n >= 2, got {n}"
        )));
    }
    let h = std::f64::consts::PI / n as f64;
    let nodes: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::FRAC_PI_2 + (i as f64 + 0.5) * h)
        .collect();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = h * shaw_kernel(nodes[i], nodes[j]);
        }
    }
    let x_true = DVector::from_iterator(n, nodes.iter().map(|&t| shaw_solution(t)));
    Ok(DiscreteProblem::from_parts(
        "shaw",
        a,
        nodes.clone(),
        nodes,
        vec![h; n],
        x_true,
    ))
}

/// Choice of true solution for the gravity problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GravitySolution {
    /// `sin(pi t) + 0.5 sin(2 pi t)`.
    Smooth,
    /// Continuous piecewise-linear profile with slope breaks at `t = 1/3`
    /// and `t = 7/8`; hard for Krylov methods to resolve.
    PiecewiseLinear,
}

/// The gravity-surveying kernel `d (d^2 + (s-t)^2)^{-3/2}` with depth
/// `d = 1/4`.
pub fn gravity_kernel(s: f64, t: f64) -> f64 {
    let d = 0.25;
    let q = d * d + (s - t) * (s - t);
    d / (q * q.sqrt())
}

/// Piecewise-linear gravity solution: the eight-segment interpolant of the
/// vertices `x_k = 0.82 + 1.18 sin(pi k/8) + 0.15 (-1)^k` at `t = k/8`.
///
/// A mass bump carrying an alternating ripple: the smooth component is
/// aligned with the leading singular functions of the kernel (so the
/// discrepancy principle at noise level 1e-2 stops after about two
/// iterations), while the ripple puts genuinely nonsmooth detail just above
/// the noise floor of the mid-spectrum, where early stopping cannot reach
/// it but damped deeper iterates can.
pub fn gravity_piecewise_linear(t: f64) -> f64 {
    let vertex = |k: usize| -> f64 {
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        0.82 + 1.18 * (std::f64::consts::PI * k as f64 / 8.0).sin() + 0.15 * sign
    };
    let s = (t.clamp(0.0, 1.0)) * 8.0;
    let k = (s.floor() as usize).min(7);
    vertex(k) + (s - k as f64) * (vertex(k + 1) - vertex(k))
}

/// One-dimensional gravity surveying model on `[0, 1]`, midpoint quadrature.
pub fn build_gravity(n: usize, solution: GravitySolution) -> Result<DiscreteProblem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "gravity needs n >= 2, got {n}"
        )));
    }
    let h = 1.0 / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = h * gravity_kernel(nodes[i], nodes[j]);
        }
    }
    let x_true = DVector::from_iterator(
        n,
        nodes.iter().map(|&t| match solution {
            GravitySolution::Smooth => {
                (std::f64::consts::PI * t).sin() + 0.5 * (2.0 * std::f64::consts::PI * t).sin()
            }
            GravitySolution::PiecewiseLinear => gravity_piecewise_linear(t),
        }),
    );
    Ok(DiscreteProblem::from_parts(
        "gravity",
        a,
        nodes.clone(),
        nodes,
        vec![h; n],
        x_true,
    ))
}

/// Perturb the right-hand side: `noise = rel_level * ||y_true|| * w/||w||`
/// with `w` a seeded standard-normal vector, so the relative data error is
/// exactly `rel_level`. Deterministic for a fixed seed.
pub fn add_noise(problem: &DiscreteProblem, rel_level: f64, seed: u64) -> Result<DiscreteProblem> {
    if rel_level < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise level must be nonnegative, got {rel_level}"
        )));
    }
    let n = problem.n();
    let mut out = problem.clone();
    out.seed = seed;
    out.rel_noise = rel_level;
    if rel_level == 0.0 {
        out.noise = DVector::zeros(n);
        out.y_noisy = out.y_true.clone();
        out.abs_noise = 0.0;
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = DVector::from_iterator(
        n,
        (0..n).map(|_| -> f64 { StandardNormal.sample(&mut rng) }),
    );
    let scale = rel_level * out.y_true.norm() / w.norm();
    out.noise = w * scale;
    out.y_noisy = &out.y_true + &out.noise;
    out.abs_noise = (&out.y_noisy - &out.y_true).norm();
    Ok(out)
}

/// Singular system of the discretized operator, sorted by nonincreasing
/// singular value. The oracle behind every filter-based direct method here.
#[derive(Clone, Debug)]
pub struct SingularSystem {
    /// Left singular vectors as columns.
    pub left: DMatrix<f64>,
    /// Singular values, nonincreasing.
    pub values: DVector<f64>,
    /// Right singular vectors as columns.
    pub right: DMatrix<f64>,
}

impl SingularSystem {
    pub fn sigma_max(&self) -> f64 {
        self.values[0]
    }
}

pub fn compute_svd(matrix: &DMatrix<f64>) -> Result<SingularSystem> {
    let svd = matrix
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());

    let n = matrix.nrows();
    let mut left = DMatrix::zeros(n, sv.len());
    let mut right = DMatrix::zeros(matrix.ncols(), sv.len());
    let mut values = DVector::zeros(sv.len());
    for (k, &idx) in order.iter().enumerate() {
        values[k] = sv[idx];
        left.set_column(k, &u.column(idx));
        right.set_column(k, &vt.row(idx).transpose());
    }
    Ok(SingularSystem {
        left,
        values,
        right,
    })
}

/// Tikhonov-regularized solution through the singular system:
/// `x_c = sum_i sigma_i/(sigma_i^2 + c) (u_i' y) v_i`.
pub fn tikhonov_direct(svd: &SingularSystem, y: &DVector<f64>, c: f64) -> Result<DVector<f64>> {
    if c <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Tikhonov parameter must be positive, got {c}"
        )));
    }
    let mut x = DVector::zeros(svd.right.nrows());
    for i in 0..svd.values.len() {
        let s = svd.values[i];
        let coef = s / (s * s + c) * svd.left.column(i).dot(y);
        x.axpy(coef, &svd.right.column(i).into_owned(), 1.0);
    }
    Ok(x)
}

/// Truncated-SVD solution keeping the `k` largest singular triplets.
pub fn tsvd_solve(svd: &SingularSystem, y: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
    let n = svd.values.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "truncation index must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    if svd.values[k - 1] == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma_{k} = 0: truncated solution undefined"
        )));
    }
    let mut x = DVector::zeros(svd.right.nrows());
    for i in 0..k {
        let coef = svd.left.column(i).dot(y) / svd.values[i];
        x.axpy(coef, &svd.right.column(i).into_owned(), 1.0);
    }
    Ok(x)
}

/// Result of a bracketed parameter search. `at_boundary` warns that no
/// interior minimum was found and a bracket endpoint is being reported.
#[derive(Clone, Copy, Debug)]
pub struct OptimalParameter {
    pub c: f64,
    pub error: f64,
    pub at_boundary: bool,
}

/// Minimize `f(log10 c)` on `[lo, hi]` (log10 bounds) by a coarse grid
/// followed by golden-section refinement of the bracketing interval.
pub(crate) fn minimize_log_scale<F: FnMut(f64) -> f64>(
    lo: f64,
    hi: f64,
    grid: usize,
    mut f: F,
) -> OptimalParameter {
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    let step = (hi - lo) / (grid - 1) as f64;
    let mut values = Vec::with_capacity(grid);
    for k in 0..grid {
        let v = f(lo + step * k as f64);
        values.push(v);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    if best_k == 0 || best_k == grid - 1 {
        return OptimalParameter {
            c: 10f64.powf(lo + step * best_k as f64),
            error: best_v,
            at_boundary: true,
        };
    }
    // Golden-section on the bracketing interval around the grid minimum.
    let mut a = lo + step * (best_k - 1) as f64;
    let mut b = lo + step * (best_k + 1) as f64;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let (xm, fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    OptimalParameter {
        c: 10f64.powf(xm),
        error: fm,
        at_boundary: false,
    }
}

/// Locate the Tikhonov parameter minimizing the true error
/// `||x_c - x_true||` by scalar minimization of `log10 c` over
/// `[log10(1e-16 sigma_1^2), log10(sigma_1^2)]`.
///
/// Requires the true solution, so this is a demonstration tool, not a
/// practical parameter-choice rule.
pub fn optimal_tikhonov_parameter(
    svd: &SingularSystem,
    y: &DVector<f64>,
    x_true: &DVector<f64>,
) -> Result<OptimalParameter> {
    let s1 = svd.sigma_max();
    if s1 <= 0.0 {
        return Err(Error::InvalidArgument("zero operator".into()));
    }
    // Work in spectral coordinates: error^2 = sum_i (f_i beta_i / sigma_i - t_i)^2
    // with beta_i = u_i' y and t_i = v_i' x_true. O(n) per candidate c.
    let n = svd.values.len();
    let mut beta = vec![0.0; n];
    let mut tcoef = vec![0.0; n];
    for i in 0..n {
        beta[i] = svd.left.column(i).dot(y);
        tcoef[i] = svd.right.column(i).dot(x_true);
    }
    let lo = (1e-16 * s1 * s1).log10();
    let hi = (s1 * s1).log10();
    let err = |log_c: f64| -> f64 {
        let c = 10f64.powf(log_c);
        let mut e2 = 0.0;
        for i in 0..n {
            let s = svd.values[i];
            let xi = if s > 0.0 {
                s / (s * s + c) * beta[i]
            } else {
                0.0
            };
            e2 += (xi - tcoef[i]) * (xi - tcoef[i]);
        }
        e2.sqrt()
    };
    Ok(minimize_log_scale(lo, hi, 161, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{svd_filters, FilterMethod};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn shaw_rejects_tiny_n() {
        assert!(matches!(build_shaw(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            build_gravity(0, GravitySolution::Smooth),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn shaw_kernel_center_value() {
        // u -> 0 limit: k(0,0) = (1+1)^2 * 1 = 4.
        assert_relative_eq!(shaw_kernel(0.0, 0.0), 4.0);
        // With odd n the center node sits at t = 0 exactly.
        let n = 101;
        let p = build_shaw(n).unwrap();
        let mid = n / 2;
        assert_relative_eq!(
            p.matrix[(mid, mid)],
            4.0 * std::f64::consts::PI / n as f64,
            max_relative = 1e-12
        );
    }

    #[test]
    fn shaw_matrix_is_symmetric() {
        let p = build_shaw(60).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                assert!((p.matrix[(i, j)] - p.matrix[(j, i)]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn shaw_construction_identity() {
        let p = build_shaw(80).unwrap();
        let res = (&p.matrix * &p.x_true - &p.y_true).norm();
        assert!(res <= 1e-12 * p.y_true.norm());
        // Kernel values are finite everywhere, including the u = 0 loci.
        assert!(p.matrix.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn gravity_kernel_values() {
        // k(s,s) = (1/4) (1/16)^{-3/2} = 16 for any s.
        assert_relative_eq!(gravity_kernel(0.3, 0.3), 16.0, max_relative = 1e-14);
        assert_relative_eq!(gravity_kernel(0.9, 0.9), 16.0, max_relative = 1e-14);
        // k(0,1) = (1/4) (1/16 + 1)^{-3/2}; direct evaluation.
        let expected = 0.25 * (0.0625f64 + 1.0).powf(-1.5);
        assert_relative_eq!(gravity_kernel(0.0, 1.0), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 0.228_268_7, max_relative = 1e-6);
    }

    #[test]
    fn gravity_piecewise_linear_has_slope_breaks() {
        let p = build_gravity(200, GravitySolution::PiecewiseLinear).unwrap();
        let slopes: Vec<f64> = (1..200)
            .map(|i| (p.x_true[i] - p.x_true[i - 1]) / (p.grid_t[i] - p.grid_t[i - 1]))
            .collect();
        // Inside each of the eight linear pieces the finite-difference slope
        // is constant; each interior knot falls strictly between two
        // midpoint samples, so it shows up as two slope changes (into and
        // out of the straddling cell).
        assert_relative_eq!(slopes[10], slopes[12], max_relative = 1e-10);
        let jumps = slopes
            .windows(2)
            .filter(|w| (w[1] - w[0]).abs() > 0.5)
            .count();
        assert_eq!(jumps, 14, "expected two slope changes per interior knot");
        // Profile stays continuous: adjacent samples never jump.
        for i in 1..200 {
            assert!((p.x_true[i] - p.x_true[i - 1]).abs() < 0.05);
        }
    }

    #[test]
    fn noise_is_deterministic_and_exactly_scaled() {
        let p = build_shaw(50).unwrap();
        let p1 = add_noise(&p, 1e-4, 42).unwrap();
        let p2 = add_noise(&p, 1e-4, 42).unwrap();
        assert_eq!(p1.y_noisy.as_slice(), p2.y_noisy.as_slice());
        assert_relative_eq!(
            p1.noise.norm() / p1.y_true.norm(),
            1e-4,
            max_relative = 1e-14
        );
        // Bitwise construction identity.
        for i in 0..50 {
            assert_eq!(p1.y_noisy[i], p1.y_true[i] + p1.noise[i]);
        }
        let p3 = add_noise(&p, 1e-4, 43).unwrap();
        assert_ne!(p1.y_noisy.as_slice(), p3.y_noisy.as_slice());
    }

    #[test]
    fn zero_noise_is_identity() {
        let p = build_shaw(30).unwrap();
        let q = add_noise(&p, 0.0, 7).unwrap();
        assert_eq!(q.y_noisy.as_slice(), q.y_true.as_slice());
        assert_eq!(q.abs_noise, 0.0);
        assert!(matches!(
            add_noise(&p, -0.1, 7),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn svd_of_simple_matrices() {
        let svd = compute_svd(&DMatrix::identity(3, 3)).unwrap();
        for i in 0..3 {
            assert_relative_eq!(svd.values[i], 1.0, max_relative = 1e-14);
        }
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let svd = compute_svd(&d).unwrap();
        assert_relative_eq!(svd.values[0], 3.0);
        assert_relative_eq!(svd.values[1], 2.0);
        assert_relative_eq!(svd.values[2], 1.0);
        // Vectors are signed unit basis vectors.
        for k in 0..3 {
            let col = svd.right.column(k);
            let mut mags: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_relative_eq!(mags[0], 1.0, max_relative = 1e-14);
            assert!(mags[1] < 1e-14);
        }
    }

    #[test]
    fn svd_reconstructs_and_orders() {
        let p = build_gravity(40, GravitySolution::Smooth).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let recon = &svd.left * DMatrix::from_diagonal(&svd.values) * svd.right.transpose();
        assert!((&p.matrix - recon).norm() <= 1e-10 * svd.sigma_max());
        for i in 1..svd.values.len() {
            assert!(svd.values[i - 1] >= svd.values[i]);
        }
    }

    #[test]
    fn tikhonov_identity_case() {
        let svd = compute_svd(&DMatrix::identity(3, 3)).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let x = tikhonov_direct(&svd, &y, 1.0).unwrap();
        assert_relative_eq!(x[0], 0.5, max_relative = 1e-14);
        assert!(x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
    }

    #[test]
    fn tikhonov_large_shift_kills_solution() {
        let p = add_noise(&build_shaw(60).unwrap(), 1e-4, 3).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let s1 = svd.sigma_max();
        let x_ref = tikhonov_direct(&svd, &p.y_noisy, s1 * s1).unwrap();
        let x_huge = tikhonov_direct(&svd, &p.y_noisy, 1e16 * s1 * s1).unwrap();
        assert!(x_huge.norm() <= 1e-12 * x_ref.norm() * 1e2);
        assert!(matches!(
            tikhonov_direct(&svd, &p.y_noisy, 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn tikhonov_satisfies_shifted_normal_equations() {
        let p = add_noise(&build_shaw(120).unwrap(), 1e-4, 5).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let s1 = svd.sigma_max();
        let aty = p.matrix.transpose() * &p.y_noisy;
        for &c in &[1e-6 * s1 * s1, 1e-2 * s1 * s1] {
            let x = tikhonov_direct(&svd, &p.y_noisy, c).unwrap();
            let lhs = p.matrix.transpose() * (&p.matrix * &x) + c * &x;
            assert!((lhs - &aty).norm() <= 1e-10 * aty.norm());
        }
    }

    #[test]
    fn tikhonov_matches_dense_solve_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let a = DMatrix::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
            let y = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
            let svd = compute_svd(&a).unwrap();
            let c = rng.random_range(0.01..1.0);
            let x = tikhonov_direct(&svd, &y, c).unwrap();
            let lhs = a.transpose() * &a + DMatrix::identity(20, 20) * c;
            let rhs = a.transpose() * &y;
            let x_dense = lhs.lu().solve(&rhs).unwrap();
            assert!((x - &x_dense).norm() <= 1e-10 * x_dense.norm());
        }
    }

    #[test]
    fn tsvd_full_rank_recovers_direct_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let a = DMatrix::from_fn(10, 10, |i, j| {
            if i == j {
                5.0
            } else {
                rng.random_range(-0.3..0.3)
            }
        });
        let y = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let svd = compute_svd(&a).unwrap();
        let x = tsvd_solve(&svd, &y, 10).unwrap();
        let x_dense = a.lu().solve(&y).unwrap();
        assert!((x - &x_dense).norm() <= 1e-10 * x_dense.norm());
    }

    #[test]
    fn tsvd_rank_one_is_multiple_of_v1() {
        let p = add_noise(&build_shaw(40).unwrap(), 1e-4, 2).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let x = tsvd_solve(&svd, &p.y_noisy, 1).unwrap();
        let v1 = svd.right.column(0).into_owned();
        let coef = v1.dot(&x);
        assert!((x - v1 * coef).norm() <= 1e-12 * coef.abs());
        assert!(tsvd_solve(&svd, &p.y_noisy, 41).is_err());
    }

    #[test]
    fn tsvd_error_is_u_shaped_on_shaw() {
        let p = add_noise(&build_shaw(400).unwrap(), 1e-4, 1).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let errs: Vec<f64> = (1..=16)
            .map(|k| (tsvd_solve(&svd, &p.y_noisy, k).unwrap() - &p.x_true).norm())
            .collect();
        let (kmin, _) = errs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert!(
            kmin > 0 && kmin < 15,
            "interior minimum expected, got k={}",
            kmin + 1
        );
        assert!(errs[0] > errs[kmin] && errs[15] > errs[kmin]);
    }

    #[test]
    fn filter_values_lie_in_unit_interval() {
        let p = build_shaw(50).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        let sig: Vec<f64> = svd.values.iter().cloned().collect();
        let f = svd_filters(&sig, FilterMethod::Tikhonov(1e-4));
        for w in f.windows(2) {
            assert!(w[0] >= w[1] - 1e-15, "monotone in sigma");
        }
        for (v, s) in f.iter().zip(sig.iter()) {
            assert!(*v < 1.0);
            if *s > 0.0 {
                assert!(*v > 0.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn optimal_parameter_noise_free_hits_boundary() {
        let p = build_shaw(60).unwrap(); // rel_noise = 0
        let svd = compute_svd(&p.matrix).unwrap();
        let opt = optimal_tikhonov_parameter(&svd, &p.y_noisy, &p.x_true).unwrap();
        assert!(opt.at_boundary);
        assert!(opt.c <= 1e-15 * svd.sigma_max() * svd.sigma_max());
    }

    #[test]
    fn optimal_parameter_is_locally_optimal() {
        for (p, noise, seed) in [
            (build_shaw(400).unwrap(), 1e-4, 1),
            (
                build_gravity(200, GravitySolution::PiecewiseLinear).unwrap(),
                1e-2,
                1,
            ),
        ] {
            let p = add_noise(&p, noise, seed).unwrap();
            let svd = compute_svd(&p.matrix).unwrap();
            let opt = optimal_tikhonov_parameter(&svd, &p.y_noisy, &p.x_true).unwrap();
            assert!(!opt.at_boundary);
            let err_at =
                |c: f64| (tikhonov_direct(&svd, &p.y_noisy, c).unwrap() - &p.x_true).norm();
            assert!(opt.error <= err_at(opt.c * 10.0));
            assert!(opt.error <= err_at(opt.c / 10.0));
        }
    }

    #[test]
    fn shaw_singular_values_decay_severely() {
        let p = build_shaw(400).unwrap();
        let svd = compute_svd(&p.matrix).unwrap();
        // No gap anywhere: the spectrum runs through thirteen orders of
        // magnitude within twenty indices and hits the working-precision
        // floor by thirty (measured 2.3e-13 and 5.5e-17; both routes, dense
        // SVD and symmetric eigendecomposition, agree on these values).
        assert!(
            svd.values[19] / svd.values[0] < 1e-12,
            "sigma_20/sigma_1 = {:e}",
            svd.values[19] / svd.values[0]
        );
        assert!(
            svd.values[29] / svd.values[0] < 1e-15,
            "sigma_30/sigma_1 = {:e}",
            svd.values[29] / svd.values[0]
        );
        // Largest singular value agrees with a power-iteration estimate.
        let mut z = DVector::from_element(400, 1.0 / 20.0);
        for _ in 0..200 {
            z = p.matrix.transpose() * (&p.matrix * &z);
            let nz = z.norm();
            z /= nz;
        }
        let est = (&p.matrix * &z).norm();
        assert_relative_eq!(est, svd.sigma_max(), max_relative = 1e-8);
    }
}
