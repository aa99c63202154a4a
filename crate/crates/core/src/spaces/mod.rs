//! Finite ultrametric and ultra-dissimilarity measure spaces.
//!
//! A [`UmSpace`] is a labelled dissimilarity matrix together with a fully
//! supported probability vector. Ultrametric measure spaces are the special
//! case with a zero diagonal; phylogenetic tree shapes produce spaces whose
//! diagonal carries positive birth heights.

mod dendrogram;

pub use dendrogram::{DNode, Dendrogram};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::{dedup_sorted, TAU_MASS, TAU_METRIC};

/// Which axioms a space is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Ultrametric,
    UltraDissimilarity,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Ultrametric => "ultrametric",
            Mode::UltraDissimilarity => "ultra_dissimilarity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Negative { i: usize, j: usize },
    Asymmetric { i: usize, j: usize },
    /// `u[i][j] > max(u[i][k], u[k][j])`.
    StrongTriangle { i: usize, j: usize, k: usize },
    NonzeroDiagonal { i: usize },
    /// `max(u[i][i], u[j][j]) < u[i][j]` fails for `i != j`.
    Diagonal { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: Mode,
    pub passed: bool,
    /// Total number of violations found.
    pub count: usize,
    /// The first [`ValidationReport::MAX_LISTED`] violations.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub const MAX_LISTED: usize = 32;

    pub fn into_result(self) -> Result<()> {
        if self.passed {
            return Ok(());
        }
        Err(Error::Invalid {
            mode: self.mode.name(),
            detail: format!(
                "{} violation(s), first: {:?}",
                self.count,
                self.violations.first()
            ),
        })
    }
}

/// A finite ultra-dissimilarity measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct UmSpace {
    ids: Vec<String>,
    u: Array2<f64>,
    mu: Vec<f64>,
}

impl UmSpace {
    /// Checks shapes and the measure; metric axioms are checked by [`UmSpace::validate`].
    pub fn new(ids: Vec<String>, u: Array2<f64>, mu: Vec<f64>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::Dimension("space must have at least one point".into()));
        }
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but there are {} masses",
                u.nrows(),
                u.ncols(),
                n
            )));
        }
        if ids.len() != n {
            return Err(Error::Dimension(format!(
                "{} ids for {} points",
                ids.len(),
                n
            )));
        }
        if let Some(v) = u.iter().find(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("non-finite entry {v}")));
        }
        check_probability(&mu)?;
        Ok(Self { ids, u, mu })
    }

    /// Points are labelled `0..n`.
    pub fn from_matrix(u: Array2<f64>, mu: Vec<f64>) -> Result<Self> {
        let ids = (0..mu.len()).map(|i| i.to_string()).collect();
        Self::new(ids, u, mu)
    }

    pub fn from_rows(rows: &[Vec<f64>], mu: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows have unequal lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let u = Array2::from_shape_vec((n, n), flat)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Self::from_matrix(u, mu)
    }

    /// Uniform measure on the given matrix.
    pub fn uniform(u: Array2<f64>) -> Result<Self> {
        let n = u.nrows();
        Self::from_matrix(u, vec![1.0 / n as f64; n])
    }

    /// `Δ_n(d)`: `n` points at mutual distance `d`, uniform measure.
    pub fn equidistant(n: usize, d: f64) -> Self {
        let u = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { d });
        Self::uniform(u).expect("equidistant space is well formed")
    }

    /// The one-point space.
    pub fn point() -> Self {
        Self::equidistant(1, 0.0)
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.len() {
            return Err(Error::Dimension("id count mismatch".into()));
        }
        self.ids = ids;
        Ok(self)
    }

    /// Same points and distances with a different measure.
    pub fn with_mu(&self, mu: Vec<f64>) -> Result<Self> {
        Self::new(self.ids.clone(), self.u.clone(), mu)
    }

    /// Relabel points: point `k` of the result is point `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Parameter("not a permutation".into()));
        }
        let u = Array2::from_shape_fn((n, n), |(i, j)| self.u[[perm[i], perm[j]]]);
        let mu = perm.iter().map(|&p| self.mu[p]).collect();
        let ids = perm.iter().map(|&p| self.ids[p].clone()).collect();
        Self::new(ids, u, mu)
    }

    pub fn is_zero_diagonal(&self) -> bool {
        (0..self.len()).all(|i| self.u[[i, i]].abs() <= TAU_METRIC)
    }

    /// Check the axioms of `mode` and list violations.
    pub fn validate(&self, mode: Mode) -> ValidationReport {
        let n = self.len();
        let u = &self.u;
        let mut violations = Vec::new();
        let mut count = 0usize;
        let mut push = |v: Violation| {
            if violations.len() < ValidationReport::MAX_LISTED {
                violations.push(v);
            }
            count += 1;
        };
        for i in 0..n {
            for j in 0..n {
                if u[[i, j]] < 0.0 {
                    push(Violation::Negative { i, j });
                }
                if j > i && (u[[i, j]] - u[[j, i]]).abs() > TAU_METRIC {
                    push(Violation::Asymmetric { i, j });
                }
            }
        }
        if mode == Mode::Ultrametric {
            for i in 0..n {
                if u[[i, i]].abs() > TAU_METRIC {
                    push(Violation::NonzeroDiagonal { i });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if u[[i, j]] - u[[i, i]].max(u[[j, j]]) <= TAU_METRIC {
                    push(Violation::Diagonal { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let uij = u[[i, j]];
                for k in 0..n {
                    if k != i && k != j && uij > u[[i, k]].max(u[[k, j]]) + TAU_METRIC {
                        push(Violation::StrongTriangle { i, j, k });
                    }
                }
            }
        }
        ValidationReport {
            mode,
            passed: count == 0,
            count,
            violations,
        }
    }

    /// Largest entry of the matrix.
    pub fn diam(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    /// `diam_p`: the `L^p(mu ⊗ mu)` norm of `u`; `p = ∞` is the plain maximum.
    pub fn diam_p(&self, p: f64) -> Result<f64> {
        check_order(p)?;
        if p.is_infinite() {
            return Ok(self.diam());
        }
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.u[[i, j]].powf(p) * self.mu[i] * self.mu[j];
            }
        }
        Ok(acc.powf(1.0 / p))
    }

    /// Sorted distinct values of `u`, merged within [`TAU_METRIC`].
    pub fn spectrum(&self) -> Vec<f64> {
        dedup_sorted(self.u.iter().copied().collect())
    }

    /// Snowflake transform: every entry raised to the power `p >= 1`.
    pub fn snowflake(&self, p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("snowflake exponent must be in [1, ∞), got {p}")));
        }
        if p == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self {
            ids: self.ids.clone(),
            u: self.u.mapv(|v| v.powf(p)),
            mu: self.mu.clone(),
        })
    }

    /// Quotient at level `t`: blocks are the classes of the transitive
    /// closure of `u <= t + TAU_METRIC`, masses are pushed forward.
    pub fn quotient(&self, t: f64) -> Result<QuotientSpace> {
        if !(t >= 0.0) {
            return Err(Error::Parameter(format!("quotient level must be >= 0, got {t}")));
        }
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.u[[i, j]] <= t + TAU_METRIC {
                    uf.union(i, j);
                }
            }
        }
        let mut block_of = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            if block_of[r] == usize::MAX {
                block_of[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[block_of[r]].push(i);
        }
        let k = blocks.len();
        let u = Array2::from_shape_fn((k, k), |(a, b)| {
            if a == b {
                0.0
            } else {
                self.u[[blocks[a][0], blocks[b][0]]]
            }
        });
        let mu = blocks
            .iter()
            .map(|b| b.iter().map(|&i| self.mu[i]).sum())
            .collect();
        let ids = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&i| self.ids[i].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let quotient = UmSpace::new(ids, u, mu)?;
        Ok(QuotientSpace {
            base: self.clone(),
            level: t,
            blocks,
            quotient,
        })
    }

    pub fn to_dendrogram(&self) -> Dendrogram {
        Dendrogram::from_space(self)
    }

    pub fn from_dendrogram(d: &Dendrogram) -> Result<Self> {
        d.to_space()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpaceFile::from(self)).expect("space serializes")
    }

    pub fn from_json_str(text: &str) -> Result<(Self, Option<Mode>)> {
        let file: SpaceFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let kind = file.kind;
        Ok((file.try_into()?, kind))
    }
}

/// Weighted quotient of a space at a level.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpace {
    pub base: UmSpace,
    pub level: f64,
    /// Partition of the base indices, ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    pub quotient: UmSpace,
}

/// On-disk layout of a space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<String>>,
    pub u: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Mode>,
}

impl From<&UmSpace> for SpaceFile {
    fn from(s: &UmSpace) -> Self {
        let kind = if s.is_zero_diagonal() {
            Mode::Ultrametric
        } else {
            Mode::UltraDissimilarity
        };
        SpaceFile {
            ids: Some(s.ids.clone()),
            u: s.u.rows().into_iter().map(|r| r.to_vec()).collect(),
            mu: s.mu.clone(),
            kind: Some(kind),
        }
    }
}

impl TryFrom<SpaceFile> for UmSpace {
    type Error = Error;

    fn try_from(f: SpaceFile) -> Result<Self> {
        let space = UmSpace::from_rows(&f.u, f.mu)?;
        match f.ids {
            Some(ids) => space.with_ids(ids),
            None => Ok(space),
        }
    }
}

pub(crate) fn check_probability(mu: &[f64]) -> Result<()> {
    for (index, &value) in mu.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveMass { index, value });
        }
    }
    let sum: f64 = mu.iter().sum();
    if (sum - 1.0).abs() > TAU_MASS {
        return Err(Error::MassSum { sum });
    }
    Ok(())
}

/// `p` must lie in `[1, ∞]`.
pub(crate) fn check_order(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("order p must be in [1, ∞], got {p}")))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the new root.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
            lo
        } else {
            ra
        }
    }
}

#[cfg(test)]
pub(crate) mod tests;
