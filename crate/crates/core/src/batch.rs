//! Pairwise dissimilarity matrices over corpora, CSV I/O and classical MDS.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::gw::{ugh_exact, ugw_fw, ugw_inf_exact, Cost, FwConfig};
use crate::rng::pair_stream;
use crate::spaces::UmSpace;
use crate::tol::TAU_METRIC;

/// Dissimilarity computed for every pair of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    UgwInf,
    Ugh,
    UgwFw,
    Uslb,
    Utlb,
    Uflb,
    Slb,
    Tlb,
    Flb,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::UgwInf,
        Method::Ugh,
        Method::UgwFw,
        Method::Uslb,
        Method::Utlb,
        Method::Uflb,
        Method::Slb,
        Method::Tlb,
        Method::Flb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::UgwInf => "ugw-inf",
            Method::Ugh => "ugh",
            Method::UgwFw => "ugw-fw",
            Method::Uslb => "uslb",
            Method::Utlb => "utlb",
            Method::Uflb => "uflb",
            Method::Slb => "slb",
            Method::Tlb => "tlb",
            Method::Flb => "flb",
        }
    }

    /// Evaluate on one pair. `fw` is used by [`Method::UgwFw`] only.
    pub fn eval(self, x: &UmSpace, y: &UmSpace, p: f64, fw: &FwConfig) -> Result<f64> {
        match self {
            Method::UgwInf => Ok(ugw_inf_exact(x, y)?.value),
            Method::Ugh => ugh_exact(x, y),
            Method::UgwFw => Ok(ugw_fw(x, y, p, fw, Cost::Ultra)?.value),
            Method::Uslb => bounds::uslb(x, y, p),
            Method::Utlb => bounds::utlb_with(x, y, p, Exec::Sequential),
            Method::Uflb => bounds::uflb(x, y, p),
            Method::Slb => bounds::slb(x, y, p),
            Method::Tlb => bounds::tlb_with(x, y, p, Exec::Sequential),
            Method::Flb => bounds::flb(x, y, p),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method '{s}'")))
    }
}

/// Seed of the Frank-Wolfe run for pair `(i, j)`.
fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    seed ^ pair_stream(i, j).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Symmetric matrix of `method` over all unordered pairs, each computed once.
///
/// The diagonal is zero. Pairs run under `exec`; results are assembled in
/// index order, and Frank-Wolfe runs draw from a seed derived from
/// `(fw.seed, i, j)`, so the output does not depend on scheduling.
pub fn matrix(spaces: &[UmSpace], method: Method, p: f64, fw: &FwConfig, exec: Exec) -> Result<Array2<f64>> {
    let n = spaces.len();
    if n < 2 {
        return Err(Error::Parameter("a corpus needs at least two spaces".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values = map_range(exec, pairs.len(), |k| {
        let (i, j) = pairs[k];
        let cfg = FwConfig {
            seed: pair_seed(fw.seed, i, j),
            exec: Exec::Sequential,
            ..fw.clone()
        };
        method.eval(&spaces[i], &spaces[j], p, &cfg)
    });
    let mut out = Array2::zeros((n, n));
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        out[[i, j]] = v;
        out[[j, i]] = v;
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV with ids in the first row and column; numbers carry 17 significant digits.
pub fn to_csv(row_ids: &[String], col_ids: &[String], m: &Array2<f64>) -> String {
    let mut out = String::new();
    out.push_str("id");
    for id in col_ids {
        out.push(',');
        out.push_str(&csv_field(id));
    }
    out.push('\n');
    for (i, id) in row_ids.iter().enumerate() {
        out.push_str(&csv_field(id));
        for v in m.row(i) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

fn split_csv_line(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                chars.next();
                cur.push('"');
            }
            ('"', _) => quoted = !quoted,
            (',', false) => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

/// Read a square matrix written by [`to_csv`].
pub fn from_csv(text: &str) -> Result<(Vec<String>, Array2<f64>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, column: 1, message: "empty matrix file".into() })?;
    let ids: Vec<String> = split_csv_line(header).into_iter().skip(1).collect();
    let n = ids.len();
    let mut m = Array2::zeros((n, n));
    let mut rows = 0;
    for (ln, line) in lines {
        let f = split_csv_line(line);
        if rows >= n || f.len() != n + 1 {
            return Err(Error::Parse {
                line: ln + 1,
                column: 1,
                message: format!("expected {} fields in a {n}x{n} matrix", n + 1),
            });
        }
        for (j, cell) in f[1..].iter().enumerate() {
            m[[rows, j]] = cell.trim().parse().map_err(|_| Error::Parse {
                line: ln + 1,
                column: j + 2,
                message: format!("not a number: '{cell}'"),
            })?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: rows + 2,
            column: 1,
            message: format!("expected {n} rows, found {rows}"),
        });
    }
    Ok((ids, m))
}

/// Classical MDS coordinates with the eigenvalues they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Array2<f64>,
    /// Leading eigenvalues of the double-centred matrix, before clamping.
    pub eigenvalues: Vec<f64>,
    /// Some kept eigenvalue was negative and was clamped to zero.
    pub clamped: bool,
}

/// Classical multidimensional scaling of a distance matrix.
///
/// Eigenvectors are oriented so that their largest-magnitude entry is positive.
pub fn mds(d: &Array2<f64>, dim: usize) -> Result<Embedding> {
    let n = d.nrows();
    if d.ncols() != n {
        return Err(Error::Dimension("distance matrix must be square".into()));
    }
    if dim == 0 || dim > n {
        return Err(Error::Parameter(format!("dimension must lie in 1..={n}, got {dim}")));
    }
    for ((i, j), &v) in d.indexed_iter() {
        if !(v >= 0.0) || (v - d[[j, i]]).abs() > TAU_METRIC {
            return Err(Error::Parameter(format!(
                "distance matrix must be symmetric and nonnegative (entry {i},{j})"
            )));
        }
    }
    let sq = d.mapv(|v| v * v);
    let row: Vec<f64> = sq.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let grand = row.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[[i, j]] - row[i] - row[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));
    let mut coords = Array2::zeros((n, dim));
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut clamped = false;
    for (k, &idx) in order.iter().take(dim).enumerate() {
        let lam = eig.eigenvalues[idx];
        eigenvalues.push(lam);
        if lam < 0.0 {
            clamped = true;
        }
        let scale = lam.max(0.0).sqrt();
        let v = eig.eigenvectors.column(idx);
        let pivot = (0..n)
            .max_by(|&a, &c| v[a].abs().total_cmp(&v[c].abs()).then(c.cmp(&a)))
            .expect("nonempty");
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[[i, k]] = sign * v[i] * scale;
        }
    }
    Ok(Embedding {
        coords,
        eigenvalues,
        clamped,
    })
}
