//! Experiment harness behind the `lfl` command-line tool: problem
//! generation, CGNE/CGT sweeps with discrepancy stopping, filter-table
//! exports, and a machine-checkable identity battery.
//!
//! Commands write CSV/JSON only; plotting belongs to external tools.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bidiag::{GkbState, Reorth};
use crate::error::{Error, Result};
use crate::filters::{
    lanczos_filters_ratio, lanczos_filters_recurrence, natural_residual_via_filters,
    truncation_filters,
};
use crate::io::{write_matrix_csv, write_problem_json, CsvWriter};
use crate::problems::{
    add_noise, build_gravity, build_shaw, compute_svd, optimal_tikhonov_parameter, DiscreteProblem,
    GravitySolution,
};
use crate::solvers::{
    best_cgt_parameter, cgne_iterate, cgt_iterate, discrepancy_stop, residual_relation_check,
    IterateRecord,
};
use crate::tridiag::{ritz_values, ThetaPhiTable, TridiagExt};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Shaw,
    Gravity,
    File,
}

/// How the Tikhonov shift(s) for a run are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CSpec {
    Value { value: f64 },
    Opt,
    Ladder { start: f64, stop: f64, count: usize },
}

impl std::str::FromStr for CSpec {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "opt" {
            return Ok(CSpec::Opt);
        }
        if let Some(rest) = s.strip_prefix("ladder:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err("ladder spec must be ladder:START:STOP:COUNT".into());
            }
            let start: f64 = parts[0]
                .parse()
                .map_err(|e| format!("bad ladder start: {e}"))?;
            let stop: f64 = parts[1]
                .parse()
                .map_err(|e| format!("bad ladder stop: {e}"))?;
            let count: usize = parts[2]
                .parse()
                .map_err(|e| format!("bad ladder count: {e}"))?;
            return Ok(CSpec::Ladder { start, stop, count });
        }
        let value: f64 = s
            .parse()
            .map_err(|_| format!("expected a number, `opt`, or `ladder:A:B:K`, got `{s}`"))?;
        Ok(CSpec::Value { value })
    }
}

/// Full description of one experiment; round-trips losslessly through JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    /// Path of a stored problem container (required when `problem = file`).
    pub file: Option<PathBuf>,
    /// True-solution profile for the gravity kernel.
    pub solution: GravitySolution,
    pub n: usize,
    pub rel_noise: f64,
    pub seed: u64,
    pub m_max: usize,
    pub c_spec: CSpec,
    pub tau: f64,
    pub reorth: Reorth,
    pub output_dir: PathBuf,
    pub jobs: usize,
    /// Suppress the timestamp comment line so re-runs are byte-identical.
    pub reproducible: bool,
}

impl RunConfig {
    /// Paper-anchored defaults: shaw at n = 400 with relative noise 1e-4.
    pub fn default_shaw() -> Self {
        RunConfig {
            problem: ProblemKind::Shaw,
            file: None,
            solution: GravitySolution::PiecewiseLinear,
            n: 400,
            rel_noise: 1e-4,
            seed: 1,
            m_max: 30,
            c_spec: CSpec::Opt,
            tau: 1.0,
            reorth: Reorth::Full,
            output_dir: PathBuf::from("out"),
            jobs: 1,
            reproducible: false,
        }
    }

    /// Default problem size for a kernel (shaw 400, gravity 200).
    pub fn default_n(problem: ProblemKind) -> usize {
        match problem {
            ProblemKind::Gravity => 200,
            _ => 400,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if self.rel_noise < 0.0 {
            return Err(Error::InvalidArgument(
                "noise level must be nonnegative".into(),
            ));
        }
        if self.m_max < 1 {
            return Err(Error::InvalidArgument("m-max must be >= 1".into()));
        }
        if self.tau < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "tau must be >= 1, got {}",
                self.tau
            )));
        }
        if self.jobs < 1 {
            return Err(Error::InvalidArgument("jobs must be >= 1".into()));
        }
        match &self.c_spec {
            CSpec::Value { value } if *value < 0.0 => {
                return Err(Error::InvalidArgument("c must be nonnegative".into()));
            }
            CSpec::Ladder { start, stop, count }
                if *start <= 0.0 || *stop < *start || *count < 1 =>
            {
                return Err(Error::InvalidArgument(
                    "ladder needs 0 < start <= stop and count >= 1".into(),
                ));
            }
            _ => {}
        }
        if self.problem == ProblemKind::File && self.file.is_none() {
            return Err(Error::InvalidArgument(
                "problem = file requires a --file path".into(),
            ));
        }
        Ok(())
    }

    /// Build (or load) the configured problem with its noise realization.
    pub fn build_problem(&self) -> Result<DiscreteProblem> {
        self.validate()?;
        match self.problem {
            ProblemKind::Shaw => add_noise(&build_shaw(self.n)?, self.rel_noise, self.seed),
            ProblemKind::Gravity => add_noise(
                &build_gravity(self.n, self.solution)?,
                self.rel_noise,
                self.seed,
            ),
            ProblemKind::File => {
                let path = self.file.as_ref().unwrap();
                crate::io::read_problem_json(path)
            }
        }
    }

    fn ensure_output_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.output_dir)
            .map_err(|e| Error::io(self.output_dir.display().to_string(), e))
    }
}

/// Iteration cap for the discrepancy search.
pub fn discrepancy_cap(n: usize) -> usize {
    n.min(60)
}

fn resolve_c_values(
    cfg: &RunConfig,
    problem: &DiscreteProblem,
) -> Result<(Vec<f64>, Option<crate::problems::OptimalParameter>)> {
    match &cfg.c_spec {
        CSpec::Value { value } => Ok((vec![*value], None)),
        CSpec::Opt => {
            let svd = compute_svd(&problem.matrix)?;
            let opt = optimal_tikhonov_parameter(&svd, &problem.y_noisy, &problem.x_true)?;
            Ok((vec![opt.c], Some(opt)))
        }
        CSpec::Ladder { start, stop, count } => {
            if *count == 1 {
                return Ok((vec![*start], None));
            }
            let l0 = start.log10();
            let l1 = stop.log10();
            let vals = (0..*count)
                .map(|k| 10f64.powf(l0 + (l1 - l0) * k as f64 / (*count - 1) as f64))
                .collect();
            Ok((vals, None))
        }
    }
}

/// Evaluate one iterate per `(m, c)` cell, sequentially by default and on a
/// dedicated pool when `jobs > 1`. Either way results come back in cell
/// order, so the exported files are identical.
fn grid_records(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    gkb: &GkbState,
    x_true: Option<&DVector<f64>>,
    cells: &[(usize, f64)],
    jobs: usize,
) -> Result<Vec<IterateRecord>> {
    if jobs <= 1 {
        return cells
            .iter()
            .map(|&(m, c)| cgt_iterate(a, y, gkb, m, c, x_true))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, c)| cgt_iterate(a, y, gkb, m, c, x_true))
            .collect()
    })
}

/// `generate`: write the problem container and the matrix CSV.
pub fn cmd_generate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let problem = cfg.build_problem()?;
    cfg.ensure_output_dir()?;
    let json_path = cfg.output_dir.join("problem.json");
    let csv_path = cfg.output_dir.join("matrix.csv");
    write_problem_json(&problem, &json_path)?;
    write_matrix_csv(&problem.matrix, &csv_path)?;
    Ok(vec![json_path, csv_path])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BestPoint {
    pub m: usize,
    pub c: f64,
    pub error: f64,
    pub at_boundary: bool,
}

/// Machine-readable digest of a `run` invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub n: usize,
    pub rel_noise: f64,
    pub abs_noise: f64,
    pub seed: u64,
    pub tau: f64,
    pub m_max: usize,
    /// Iterations actually available (smaller than `m_max` after breakdown).
    pub m_used: usize,
    pub breakdown: bool,
    pub m_discr: usize,
    pub discrepancy_capped: bool,
    pub cgne_discrepancy_error: Option<f64>,
    /// Best CGNE error over the sweep and where it occurred.
    pub cgne_best_m: usize,
    pub cgne_best_error: Option<f64>,
    /// Theoretical optimal direct-Tikhonov parameter and its error.
    pub c_opt: f64,
    pub c_opt_at_boundary: bool,
    pub tikhonov_error_at_c_opt: f64,
    /// Shifts the CGT sweep used.
    pub c_values: Vec<f64>,
    /// Best CGT point at the deepest iteration over a swept shift.
    pub best_cgt: BestPoint,
}

fn write_iterate_rows(
    iter_csv: &mut CsvWriter,
    omega_csv: &mut CsvWriter,
    records: &[IterateRecord],
) -> Result<()> {
    for rec in records {
        iter_csv.row(
            &[],
            &[
                Some(rec.m as f64),
                Some(rec.c),
                Some(rec.nat_res_norm),
                Some(rec.ne_res_norm),
                rec.err_norm,
            ],
        )?;
        for (i, &w) in rec.omega.iter().enumerate() {
            omega_csv.row(
                &[],
                &[
                    Some(rec.m as f64),
                    Some(rec.c),
                    Some((i + 1) as f64),
                    Some(w),
                ],
            )?;
        }
    }
    Ok(())
}

/// `run`: CGNE sweep, discrepancy stop, CGT sweep over the requested
/// shifts, and the summary JSON.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let problem = cfg.build_problem()?;
    cfg.ensure_output_dir()?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;
    let x_true = Some(&problem.x_true);

    let mut gkb = GkbState::run(a, y, cfg.m_max, cfg.reorth)?;
    let m_used = gkb.m.min(cfg.m_max);
    if m_used == 0 {
        return Err(Error::Numerical(
            "bidiagonalization broke down before the first iterate".into(),
        ));
    }

    let cgne_cells: Vec<(usize, f64)> = (1..=m_used).map(|m| (m, 0.0)).collect();
    let cgne = grid_records(a, y, &gkb, x_true, &cgne_cells, cfg.jobs)?;

    let (c_values, c_opt_pre) = resolve_c_values(cfg, &problem)?;
    let cgt_cells: Vec<(usize, f64)> = c_values
        .iter()
        .flat_map(|&c| (1..=m_used).map(move |m| (m, c)))
        .collect();
    let cgt = grid_records(a, y, &gkb, x_true, &cgt_cells, cfg.jobs)?;

    // Discrepancy stop (may extend the bidiagonalization past m_max).
    let cap = discrepancy_cap(problem.n());
    let (m_discr, discrepancy_capped, cgne_discrepancy_error) = if problem.abs_noise > 0.0 {
        let stop = discrepancy_stop(a, y, &mut gkb, problem.abs_noise, cfg.tau, cap, x_true)?;
        (stop.m, stop.capped, stop.record.err_norm)
    } else {
        (0, true, None)
    };

    // Direct-Tikhonov reference with the theoretical optimal parameter.
    let svd = compute_svd(a)?;
    let opt = match c_opt_pre {
        Some(o) => o,
        None => optimal_tikhonov_parameter(&svd, y, &problem.x_true)?,
    };

    let best_cgt_param = best_cgt_parameter(a, y, &gkb, m_used, &problem.x_true)?;
    let best_cgt = BestPoint {
        m: m_used,
        c: best_cgt_param.c,
        error: best_cgt_param.error,
        at_boundary: best_cgt_param.at_boundary,
    };

    let (cgne_best_m, cgne_best_error) = cgne
        .iter()
        .filter_map(|r| r.err_norm.map(|e| (r.m, e)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(m, e)| (m, Some(e)))
        .unwrap_or((0, None));

    // Exports.
    let ts = !cfg.reproducible;
    let mut iter_csv = CsvWriter::create(
        &cfg.output_dir.join("iterates.csv"),
        "m,c,nat_res_norm,ne_res_norm,err_norm",
        ts,
    )?;
    let mut omega_csv = CsvWriter::create(&cfg.output_dir.join("omegas.csv"), "m,c,i,omega", ts)?;
    write_iterate_rows(&mut iter_csv, &mut omega_csv, &cgne)?;
    write_iterate_rows(&mut iter_csv, &mut omega_csv, &cgt)?;

    let summary = RunSummary {
        problem: problem.kernel_name.clone(),
        n: problem.n(),
        rel_noise: problem.rel_noise,
        abs_noise: problem.abs_noise,
        seed: problem.seed,
        tau: cfg.tau,
        m_max: cfg.m_max,
        m_used,
        breakdown: gkb.breakdown.is_some(),
        m_discr,
        discrepancy_capped,
        cgne_discrepancy_error,
        cgne_best_m,
        cgne_best_error,
        c_opt: opt.c,
        c_opt_at_boundary: opt.at_boundary,
        tikhonov_error_at_c_opt: opt.error,
        c_values,
        best_cgt,
    };
    let path = cfg.output_dir.join("summary.json");
    let data = serde_json::to_vec_pretty(&summary)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    std::fs::write(&path, data).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(summary)
}

/// `filters`: long-format filter tables, truncation filters for the
/// discrepancy iterate, and coefficient-magnitude series.
pub fn cmd_filters(cfg: &RunConfig) -> Result<()> {
    let problem = cfg.build_problem()?;
    cfg.ensure_output_dir()?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;

    let mut gkb = GkbState::run(a, y, cfg.m_max, cfg.reorth)?;
    let m = gkb.m.min(cfg.m_max);
    if m == 0 {
        return Err(Error::Numerical("no iterations available".into()));
    }
    let (c_values, _) = resolve_c_values(cfg, &problem)?;

    let ts = !cfg.reproducible;
    let mut filt_csv = CsvWriter::create(
        &cfg.output_dir.join("filters.csv"),
        "problem,m,c,i,gamma,defined",
        ts,
    )?;
    for &c in &c_values {
        let set = lanczos_filters_ratio(&gkb, m, c)?;
        for i in 1..=m {
            let defined = set.defined[i - 1];
            filt_csv.line(&format!(
                "{},{},{},{},{},{}",
                problem.kernel_name,
                m,
                c,
                i,
                if defined {
                    format!("{}", set.gamma[i - 1])
                } else {
                    String::new()
                },
                defined
            ))?;
        }
    }

    // Truncation filters of the discrepancy iterate inside the deep basis.
    let m_stop = if problem.abs_noise > 0.0 {
        let cap = discrepancy_cap(problem.n());
        discrepancy_stop(a, y, &mut gkb, problem.abs_noise, cfg.tau, cap, None)?
            .m
            .min(m)
    } else {
        m
    };
    let trunc = truncation_filters(&gkb, m_stop, m)?;
    let mut trunc_csv = CsvWriter::create(
        &cfg.output_dir.join("truncation.csv"),
        "problem,m_stop,m,i,gamma,defined",
        ts,
    )?;
    for i in 1..=m {
        let defined = trunc.defined[i - 1];
        trunc_csv.line(&format!(
            "{},{},{},{},{},{}",
            problem.kernel_name,
            m_stop,
            m,
            i,
            if defined {
                format!("{}", trunc.gamma[i - 1])
            } else {
                String::new()
            },
            defined
        ))?;
    }

    // Recurrence-table dump for the projected tridiagonal at the first
    // requested shift.
    let t = gkb.to_tridiag(m)?;
    let table = ThetaPhiTable::new(&t);
    let shift = table.shift(c_values.first().copied().unwrap_or(0.0));
    crate::io::write_recurrence_table_csv(&table, &shift, &cfg.output_dir.join("recurrences.csv"))?;

    // |omega_i| series for the full CGNE iterate, the discrepancy iterate
    // and the CGT iterate at the first requested shift.
    let mut coef_csv = CsvWriter::create(
        &cfg.output_dir.join("coefficients.csv"),
        "series,i,abs_omega",
        ts,
    )?;
    let full = cgne_iterate(a, y, &gkb, m, None)?;
    for (i, w) in full.omega.iter().enumerate() {
        coef_csv.line(&format!("cgne_full,{},{}", i + 1, w.abs()))?;
    }
    if m_stop > 0 {
        let stopped = cgne_iterate(a, y, &gkb, m_stop, None)?;
        for (i, w) in stopped.omega.iter().enumerate() {
            coef_csv.line(&format!("cgne_discrepancy,{},{}", i + 1, w.abs()))?;
        }
    }
    if let Some(&c) = c_values.first() {
        let tik = cgt_iterate(a, y, &gkb, m, c, None)?;
        for (i, w) in tik.omega.iter().enumerate() {
            coef_csv.line(&format!("cgt,{},{}", i + 1, w.abs()))?;
        }
    }
    Ok(())
}

/// One identity check: a measured worst-case against its tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn bounded(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            pass: measured.is_finite() && measured <= tolerance,
            measured,
            tolerance,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// Positivity of the projected tridiagonal data: every off-diagonal entry
/// and the right-hand-side scale must be strictly positive.
pub fn check_tridiag_positivity(t: &TridiagExt) -> CheckResult {
    let min_off = t.b_off.iter().cloned().fold(t.b1, f64::min);
    CheckResult {
        name: "tridiag_offdiagonal_positivity".into(),
        pass: min_off > 0.0,
        measured: min_off,
        tolerance: 0.0,
        detail: format!("min(b_1, b_2..b_m) = {min_off:e}, required > 0"),
    }
}

fn random_spd_tridiag(rng: &mut ChaCha8Rng, m: usize) -> TridiagExt {
    let a: Vec<f64> = (0..m).map(|_| rng.random_range(1.0..10.0)).collect();
    let min_diag = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let b_off: Vec<f64> = (0..m - 1)
        .map(|_| rng.random_range(f64::EPSILON..1.0) * min_diag / 2.0)
        .collect();
    TridiagExt::new(a, b_off, 1.0, 0.0).unwrap()
}

/// Oracle check for the inverse-entry formulas over a random SPD ensemble.
pub fn check_inverse_entries(seed: u64, matrices: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..matrices {
        let m = 2 + (k % 19);
        let t = random_spd_tridiag(&mut rng, m);
        let table = ThetaPhiTable::new(&t);
        let inv = t.to_dense().try_inverse().unwrap();
        let c = rng.random_range(0.0..10.0 * t.a_max());
        let shift = table.shift(c);
        let inv_c = t.shifted_dense(c).try_inverse().unwrap();
        for i in 1..=m {
            for j in 1..=m {
                let e = table.inverse_entry(i, j).unwrap();
                worst = worst.max((e - inv[(i - 1, j - 1)]).abs() / inv[(i - 1, j - 1)].abs());
                let es = shift.inverse_entry(i, j).unwrap();
                worst = worst.max((es - inv_c[(i - 1, j - 1)]).abs() / inv_c[(i - 1, j - 1)].abs());
            }
        }
    }
    CheckResult::bounded(
        "inverse_entry_oracle",
        worst,
        1e-9,
        format!("max relative gap to dense inversion over {matrices} matrices"),
    )
}

/// Oracle check for `det(T + cI) = det T + g_m(c)`.
pub fn check_det_shift(seed: u64, matrices: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..matrices {
        let m = 2 + (k % 19);
        let t = random_spd_tridiag(&mut rng, m);
        let table = ThetaPhiTable::new(&t);
        for &c in &[1e-8, 1e-3, 1.0, 1e3] {
            let (_, shifted) = table.shift(c).det_pair();
            let dense = t.shifted_dense(c).determinant();
            worst = worst.max((shifted - dense).abs() / dense.abs());
        }
    }
    CheckResult::bounded(
        "determinant_shift_identity",
        worst,
        1e-9,
        format!("max relative gap to dense determinant over {matrices} matrices"),
    )
}

fn check_gk_relations(a: &DMatrix<f64>, gkb: &GkbState, m: usize) -> CheckResult {
    let norm_a = crate::bidiag::estimate_norm(a);
    let vm = gkb.v_matrix(m);
    let um1 = gkb.u_matrix(m + 1);
    let bm = gkb.bidiagonal(m).unwrap();
    let res1 = (a * &vm - &um1 * &bm).norm() / (norm_a * (m as f64).sqrt());
    let um = gkb.u_matrix(m);
    let bm_sq = bm.rows(0, m).into_owned();
    let res2 =
        (a.transpose() * &um - &vm * bm_sq.transpose()).norm() / (norm_a * (m as f64).sqrt());
    CheckResult::bounded(
        "golub_kahan_relations",
        res1.max(res2),
        1e-10,
        format!("normalized factorization residuals at m = {m}"),
    )
}

/// `verify`: run the identity battery on the configured problem.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let problem = cfg.build_problem()?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;

    let m_deep = cfg.m_max.min(15);
    let gkb = GkbState::run(a, y, m_deep, cfg.reorth)?;
    let m = gkb.m.min(m_deep);
    let t = gkb.to_tridiag(m)?;
    let a_max = t.a_max();

    let mut checks = vec![
        check_tridiag_positivity(&t),
        check_inverse_entries(cfg.seed, 40),
        check_det_shift(cfg.seed.wrapping_add(1), 40),
        check_gk_relations(a, &gkb, m),
    ];

    // Ritz values of the projection are positive and below the operator scale.
    let ritz = ritz_values(&t);
    checks.push(CheckResult {
        name: "ritz_values_positive".into(),
        pass: ritz.iter().all(|&e| e > 0.0),
        measured: ritz[0],
        tolerance: 0.0,
        detail: "smallest Ritz value, required > 0".into(),
    });

    // Filter identities.
    let mut worst_unity: f64 = 0.0;
    let rec0 = lanczos_filters_recurrence(&t, 0.0);
    let rat0 = lanczos_filters_ratio(&gkb, m, 0.0)?;
    for set in [&rec0, &rat0] {
        for (_, g) in set.defined_entries() {
            worst_unity = worst_unity.max((g - 1.0).abs());
        }
    }
    checks.push(CheckResult::bounded(
        "filter_unity_at_zero_shift",
        worst_unity,
        1e-10,
        "max |gamma_i(0) - 1| over both routes".into(),
    ));

    let mut worst_agree: f64 = 0.0;
    for &cf in &[1e-8, 1e-4, 1.0, 1e4] {
        let c = cf * a_max;
        let rec = lanczos_filters_recurrence(&t, c);
        let rat = lanczos_filters_ratio(&gkb, m, c)?;
        for ((_, g1), (_, g2)) in rec.defined_entries().zip(rat.defined_entries()) {
            worst_agree = worst_agree.max((g1 - g2).abs() / g2.abs().max(1e-12));
        }
    }
    checks.push(CheckResult::bounded(
        "filter_path_agreement",
        worst_agree,
        1e-6,
        format!("recurrence vs ratio route, m = {m}, shift ladder scaled by a_max"),
    ));

    let big = lanczos_filters_ratio(&gkb, m, 1e12 * a_max)?;
    let worst_big = big
        .defined_entries()
        .map(|(_, g)| g.abs())
        .fold(0.0f64, f64::max);
    checks.push(CheckResult::bounded(
        "filter_decay_at_large_shift",
        worst_big,
        1e-6,
        "max |gamma_i(1e12 a_max)|".into(),
    ));

    // Residual-norm formula against the directly computed residual.
    let mut worst_resid: f64 = 0.0;
    for &cf in &[0.0, 1e-4] {
        let c = cf * a_max;
        let rec = cgt_iterate(a, y, &gkb, m, c, None)?;
        let viaf = natural_residual_via_filters(&gkb, m, c)?;
        worst_resid = worst_resid.max((viaf.norm - rec.nat_res_norm).abs() / rec.nat_res_norm);
    }
    checks.push(CheckResult::bounded(
        "residual_norm_formula",
        worst_resid,
        1e-8,
        format!("coefficient-formula norm vs direct residual, m = {m}"),
    ));

    // Residual-ratio identity at shifts up to the smallest Ritz value,
    // where the shifted residual stays above the rounding floor.
    let mut worst_ratio: f64 = 0.0;
    let mm = m.min(8);
    let eta_min = ritz_values(&gkb.to_tridiag(mm)?)[0];
    for &cf in &[0.1, 1.0] {
        let rep = residual_relation_check(a, y, &gkb, mm, cf * eta_min)?;
        worst_ratio = worst_ratio.max(rep.relative_difference);
    }
    checks.push(CheckResult::bounded(
        "residual_ratio_identity",
        worst_ratio,
        1e-7,
        format!("empirical vs predicted det ratio, m = {mm}"),
    ));

    let passed = checks.iter().all(|c| c.pass);
    let report = VerifyReport { checks, passed };

    cfg.ensure_output_dir()?;
    let path = cfg.output_dir.join("verify.json");
    let data = serde_json::to_vec_pretty(&report)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    std::fs::write(&path, data).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(report)
}
