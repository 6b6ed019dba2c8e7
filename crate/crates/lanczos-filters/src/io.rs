//! File formats: the JSON problem container, CSV exports for external
//! plotting tools, and bidiagonalization state dumps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! re-reading a file reproduces the exact bit patterns and re-running a
//! deterministic command reproduces identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bidiag::{GkbState, Reorth};
use crate::error::{Error, Result};
use crate::problems::DiscreteProblem;

#[derive(Serialize, Deserialize)]
struct GridsJson {
    s: Vec<f64>,
    t: Vec<f64>,
    weights: Vec<f64>,
}

/// On-disk form of a [`DiscreteProblem`]: matrix stored row-major.
#[derive(Serialize, Deserialize)]
pub struct ProblemContainer {
    pub kernel_name: String,
    pub n: usize,
    pub seed: u64,
    pub rel_noise: f64,
    grids: GridsJson,
    pub matrix: Vec<f64>,
    pub x_true: Vec<f64>,
    pub y_true: Vec<f64>,
    pub y_noisy: Vec<f64>,
}

impl ProblemContainer {
    pub fn from_problem(p: &DiscreteProblem) -> Self {
        let n = p.n();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                matrix.push(p.matrix[(i, j)]);
            }
        }
        ProblemContainer {
            kernel_name: p.kernel_name.clone(),
            n,
            seed: p.seed,
            rel_noise: p.rel_noise,
            grids: GridsJson {
                s: p.grid_s.clone(),
                t: p.grid_t.clone(),
                weights: p.weights.clone(),
            },
            matrix,
            x_true: p.x_true.iter().cloned().collect(),
            y_true: p.y_true.iter().cloned().collect(),
            y_noisy: p.y_noisy.iter().cloned().collect(),
        }
    }

    pub fn into_problem(self, origin: &str) -> Result<DiscreteProblem> {
        let n = self.n;
        if n < 2 {
            return Err(Error::Format {
                path: origin.into(),
                detail: format!("n must be >= 2, got {n}"),
            });
        }
        if self.matrix.len() != n * n {
            return Err(Error::Format {
                path: origin.into(),
                detail: format!(
                    "matrix has {} entries, expected a square {n} x {n} = {} layout",
                    self.matrix.len(),
                    n * n
                ),
            });
        }
        for (name, v) in [
            ("x_true", &self.x_true),
            ("y_true", &self.y_true),
            ("y_noisy", &self.y_noisy),
        ] {
            if v.len() != n {
                return Err(Error::Format {
                    path: origin.into(),
                    detail: format!("{name} has length {}, expected {n}", v.len()),
                });
            }
        }
        let matrix = DMatrix::from_row_slice(n, n, &self.matrix);
        let y_true = DVector::from_vec(self.y_true);
        let y_noisy = DVector::from_vec(self.y_noisy);
        let noise = &y_noisy - &y_true;
        let abs_noise = noise.norm();
        Ok(DiscreteProblem {
            kernel_name: self.kernel_name,
            matrix,
            grid_s: self.grids.s,
            grid_t: self.grids.t,
            weights: self.grids.weights,
            x_true: DVector::from_vec(self.x_true),
            y_true,
            y_noisy,
            noise,
            rel_noise: self.rel_noise,
            abs_noise,
            seed: self.seed,
        })
    }
}

pub fn write_problem_json(p: &DiscreteProblem, path: &Path) -> Result<()> {
    let container = ProblemContainer::from_problem(p);
    let data = serde_json::to_vec_pretty(&container)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    fs::write(path, data).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_problem_json(path: &Path) -> Result<DiscreteProblem> {
    let data = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let container: ProblemContainer = serde_json::from_slice(&data).map_err(|e| Error::Format {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    container.into_problem(&path.display().to_string())
}

/// Matrix as plain numeric CSV, one row per line, for external tools.
pub fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", m[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// JSON form of the bidiagonalization coefficients (the basis vectors are
/// dumped separately as binary blocks).
#[derive(Serialize, Deserialize)]
pub struct GkbStateJson {
    pub beta0: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub m: usize,
    pub reorth: Reorth,
}

impl GkbStateJson {
    pub fn from_state(s: &GkbState) -> Self {
        GkbStateJson {
            beta0: s.beta0,
            alphas: s.alphas.clone(),
            betas: s.betas.clone(),
            m: s.m,
            reorth: s.reorth,
        }
    }
}

pub fn write_gkb_json(s: &GkbState, path: &Path) -> Result<()> {
    let data = serde_json::to_vec_pretty(&GkbStateJson::from_state(s))
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    fs::write(path, data).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Shape sidecar for a binary vector block.
#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
pub struct BlockHeader {
    pub rows: usize,
    pub cols: usize,
    pub dtype: String,
    pub layout: String,
}

/// Write a basis-vector sequence as a little-endian f64 block
/// (column-major: one basis vector after another) plus a JSON shape header
/// at `<path>.shape.json`.
pub fn write_vector_block(vectors: &[DVector<f64>], path: &Path) -> Result<()> {
    let rows = vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut bytes = Vec::with_capacity(rows * vectors.len() * 8);
    for v in vectors {
        for &x in v.iter() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
    let header = BlockHeader {
        rows,
        cols: vectors.len(),
        dtype: "f64le".into(),
        layout: "column-major".into(),
    };
    let header_path = path.with_extension("shape.json");
    let data = serde_json::to_vec_pretty(&header)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    fs::write(&header_path, data).map_err(|e| Error::io(header_path.display().to_string(), e))
}

pub fn read_vector_block(path: &Path) -> Result<Vec<DVector<f64>>> {
    let header_path = path.with_extension("shape.json");
    let data =
        fs::read(&header_path).map_err(|e| Error::io(header_path.display().to_string(), e))?;
    let header: BlockHeader = serde_json::from_slice(&data).map_err(|e| Error::Format {
        path: header_path.display().to_string(),
        detail: e.to_string(),
    })?;
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() != header.rows * header.cols * 8 {
        return Err(Error::Format {
            path: path.display().to_string(),
            detail: format!(
                "expected {} bytes for {} x {}, found {}",
                header.rows * header.cols * 8,
                header.rows,
                header.cols,
                bytes.len()
            ),
        });
    }
    let mut vectors = Vec::with_capacity(header.cols);
    for c in 0..header.cols {
        let mut v = DVector::zeros(header.rows);
        for r in 0..header.rows {
            let off = (c * header.rows + r) * 8;
            v[r] = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        }
        vectors.push(v);
    }
    Ok(vectors)
}

/// Dump the determinant recurrences and shift increments of a tridiagonal,
/// one row per index: `l, theta_l, phi_l, g_l, h_l`. The forward quantities
/// run over `l = 0..m` and the backward ones over `l = 1..m+1`, so the
/// first and last rows each leave one cell empty.
pub fn write_recurrence_table_csv(
    table: &crate::tridiag::ThetaPhiTable,
    shift: &crate::tridiag::ShiftIncrements<'_>,
    path: &Path,
) -> Result<()> {
    let m = table.order();
    let mut out = String::from("l,theta_l,phi_l,g_l,h_l\n");
    for l in 0..=m + 1 {
        let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let theta = (l <= m).then(|| table.theta(l));
        let phi = (l >= 1).then(|| table.phi(l));
        let g = (l <= m).then(|| shift.g(l));
        let h = (l >= 1).then(|| shift.h(l));
        out.push_str(&format!(
            "{l},{},{},{},{}\n",
            cell(theta),
            cell(phi),
            cell(g),
            cell(h)
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Incremental CSV writer with an optional `# generated ...` comment line
/// that reproducible runs suppress.
pub struct CsvWriter {
    file: fs::File,
    path: String,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str, timestamp: bool) -> Result<Self> {
        let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = CsvWriter {
            file,
            path: path.display().to_string(),
        };
        if timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            w.line(&format!("# generated unix={now}"))?;
        }
        w.line(header)?;
        Ok(w)
    }

    pub fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.file, "{s}").map_err(|e| Error::io(self.path.clone(), e))
    }

    /// One row of float cells; `None` renders as an empty cell.
    pub fn row(&mut self, prefix: &[&str], cells: &[Option<f64>]) -> Result<()> {
        let mut s = String::new();
        for p in prefix {
            s.push_str(p);
            s.push(',');
        }
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            if let Some(v) = c {
                s.push_str(&format!("{v}"));
            }
        }
        self.line(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bidiag::Reorth;
    use crate::problems::{add_noise, build_shaw};

    #[test]
    fn problem_container_roundtrip() {
        let p = add_noise(&build_shaw(20).unwrap(), 1e-3, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("problem.json");
        write_problem_json(&p, &path).unwrap();
        let q = read_problem_json(&path).unwrap();
        assert_eq!(q.kernel_name, "shaw");
        assert_eq!(q.n(), 20);
        assert_eq!(q.seed, 5);
        assert_eq!(q.rel_noise, 1e-3);
        // Shortest round-trip float formatting preserves exact values.
        assert_eq!(p.matrix.as_slice(), q.matrix.as_slice());
        assert_eq!(p.y_noisy.as_slice(), q.y_noisy.as_slice());
        assert_eq!(p.x_true.as_slice(), q.x_true.as_slice());
    }

    #[test]
    fn malformed_container_is_rejected() {
        let p = build_shaw(10).unwrap();
        let mut c = ProblemContainer::from_problem(&p);
        c.matrix.truncate(37); // no longer n*n
        assert!(matches!(c.into_problem("test"), Err(Error::Format { .. })));
    }

    #[test]
    fn recurrence_table_dump() {
        use crate::tridiag::{ThetaPhiTable, TridiagExt};
        let t = TridiagExt::new(vec![2.0, 2.0, 2.0], vec![1.0, 1.0], 1.0, 0.0).unwrap();
        let table = ThetaPhiTable::new(&t);
        let shift = table.shift(1.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("recurrences.csv");
        write_recurrence_table_csv(&table, &shift, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "l,theta_l,phi_l,g_l,h_l");
        assert_eq!(lines[1], "0,1,,0,"); // theta_0 = 1, g_0 = 0, no phi/h
        assert_eq!(lines[4], "3,4,2,17,1"); // theta_3 = 4, phi_3 = 2, g_3(1) = 17, h_3(1) = 1
        assert_eq!(lines[5], "4,,1,,0"); // phi_4 = 1, h_4 = 0, no theta/g
    }

    #[test]
    fn gkb_dump_and_vector_blocks() {
        let p = add_noise(&build_shaw(30).unwrap(), 1e-4, 2).unwrap();
        let s = GkbState::run(&p.matrix, &p.y_noisy, 5, Reorth::Full).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let jpath = dir.path().join("gkb.json");
        write_gkb_json(&s, &jpath).unwrap();
        let parsed: GkbStateJson = serde_json::from_slice(&std::fs::read(&jpath).unwrap()).unwrap();
        assert_eq!(parsed.m, 5);
        assert_eq!(parsed.alphas, s.alphas);
        assert_eq!(parsed.reorth, Reorth::Full);

        let vpath = dir.path().join("v.bin");
        write_vector_block(&s.v, &vpath).unwrap();
        let back = read_vector_block(&vpath).unwrap();
        assert_eq!(back.len(), s.v.len());
        for (a, b) in back.iter().zip(s.v.iter()) {
            assert_eq!(a.as_slice(), b.as_slice());
        }
    }
}
