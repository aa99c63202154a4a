//! Exact Wasserstein distances.
//!
//! Closed forms on ultrametric ground spaces and on the half line with the
//! `Λ_q` costs live in [`closed_form`]; [`exact_ot`] solves general discrete
//! transport problems and serves both as a validation oracle and as the
//! linear subproblem of the Frank-Wolfe solver.

mod bottleneck;
pub mod closed_form;
mod exact;
mod simplex;

pub use closed_form::{w_halfline, w_quantile, w_ultrametric, w_ultrametric_dendrogram};
pub use exact::{exact_ot, exact_ot_rational, Objective, OtSolution, RATIONAL_SIZE_CAP};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::{TAU_MASS, TAU_METRIC};

/// Ground cost matrix of a discrete transport problem.
pub type GroundCost = Array2<f64>;

/// `Λ_q(a, b) = |a^q - b^q|^(1/q)`; `Λ_∞(a, b) = max(a, b)` unless `a == b`
/// (within [`TAU_METRIC`]), in which case it is 0.
pub fn lambda(a: f64, b: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Parameter(format!("Λ_q needs q >= 1, got {q}")));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::Parameter("Λ_q is defined on nonnegative reals".into()));
    }
    Ok(if q.is_infinite() {
        lambda_inf(a, b)
    } else {
        lambda_q(a, b, q)
    })
}

#[inline]
pub(crate) fn lambda_inf(a: f64, b: f64) -> f64 {
    if (a - b).abs() <= TAU_METRIC {
        0.0
    } else {
        a.max(b)
    }
}

#[inline]
pub(crate) fn lambda_q(a: f64, b: f64, q: f64) -> f64 {
    if q == 1.0 {
        (a - b).abs()
    } else {
        (a.powf(q) - b.powf(q)).abs().powf(1.0 / q)
    }
}

/// Finitely supported probability measure on `[0, ∞)`.
///
/// Atoms are sorted by location; locations closer than [`TAU_METRIC`] are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureFile", into = "MeasureFile")]
pub struct ScalarMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    x: Vec<f64>,
    m: Vec<f64>,
}

impl TryFrom<MeasureFile> for ScalarMeasure {
    type Error = Error;

    fn try_from(f: MeasureFile) -> Result<Self> {
        ScalarMeasure::new(&f.x, &f.m)
    }
}

impl From<ScalarMeasure> for MeasureFile {
    fn from(s: ScalarMeasure) -> Self {
        MeasureFile {
            x: s.atoms.iter().map(|a| a.0).collect(),
            m: s.atoms.iter().map(|a| a.1).collect(),
        }
    }
}

impl ScalarMeasure {
    pub fn new(x: &[f64], m: &[f64]) -> Result<Self> {
        if x.len() != m.len() {
            return Err(Error::Dimension(format!(
                "{} locations but {} masses",
                x.len(),
                m.len()
            )));
        }
        if x.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Parameter("locations must be finite and nonnegative".into()));
        }
        for (index, &value) in m.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveMass { index, value });
            }
        }
        let sum: f64 = m.iter().sum();
        if (sum - 1.0).abs() > TAU_MASS {
            return Err(Error::MassSum { sum });
        }
        Ok(Self::from_atoms_unchecked(x.iter().copied().zip(m.iter().copied())))
    }

    /// Sort and merge; masses are assumed valid.
    pub(crate) fn from_atoms_unchecked(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut raw: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        let mut anchor = f64::NEG_INFINITY;
        for (x, m) in raw {
            match out.last_mut() {
                Some(last) if x - anchor <= TAU_METRIC => last.1 += m,
                _ => {
                    anchor = x;
                    out.push((x, m));
                }
            }
        }
        Self { atoms: out }
    }

    pub fn dirac(x: f64) -> Self {
        Self { atoms: vec![(x, 1.0)] }
    }

    /// Pushforward of `weights` under `values`.
    pub fn pushforward(values: &[f64], weights: &[f64]) -> Self {
        Self::from_atoms_unchecked(values.iter().copied().zip(weights.iter().copied()))
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn locations(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    /// Pushforward under `x -> x^q`.
    pub fn snowflake(&self, q: f64) -> Self {
        Self::from_atoms_unchecked(self.atoms.iter().map(|&(x, m)| (x.powf(q), m)))
    }

    /// `∫ x |α - β|(dx)` on the merged support.
    pub fn weighted_tv(&self, other: &Self) -> f64 {
        let (xs, a, b) = common_grid(self, other);
        xs.iter()
            .zip(a.iter().zip(&b))
            .map(|(x, (ai, bi))| x * (ai - bi).abs())
            .sum()
    }
}

/// Both measures expressed on the merged sorted support.
pub(crate) fn common_grid(alpha: &ScalarMeasure, beta: &ScalarMeasure) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut tagged: Vec<(f64, f64, f64)> = alpha
        .atoms
        .iter()
        .map(|&(x, m)| (x, m, 0.0))
        .chain(beta.atoms.iter().map(|&(x, m)| (x, 0.0, m)))
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::new();
    let mut a: Vec<f64> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for (x, ma, mb) in tagged {
        if !xs.is_empty() && x - anchor <= TAU_METRIC {
            *a.last_mut().unwrap() += ma;
            *b.last_mut().unwrap() += mb;
        } else {
            anchor = x;
            xs.push(x);
            a.push(ma);
            b.push(mb);
        }
    }
    (xs, a, b)
}

/// Nonnegative matrix whose marginals are the two measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    matrix: Array2<f64>,
}

impl Coupling {
    /// Accepts `matrix` if it is nonnegative with the given marginals (within [`TAU_MASS`] per entry of the marginals, scaled by size).
    pub fn new(matrix: Array2<f64>, mu: &[f64], nu: &[f64]) -> Result<Self> {
        let c = Self { matrix };
        c.check(mu, nu)?;
        Ok(c)
    }

    pub(crate) fn from_matrix_unchecked(matrix: Array2<f64>) -> Self {
        Self { matrix }
    }

    /// `mu ⊗ nu`.
    pub fn product(mu: &[f64], nu: &[f64]) -> Self {
        Self {
            matrix: Array2::from_shape_fn((mu.len(), nu.len()), |(i, j)| mu[i] * nu[j]),
        }
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.matrix
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.dim()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matrix.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.matrix.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// Largest deviation of either marginal from its target.
    pub fn marginal_error(&self, mu: &[f64], nu: &[f64]) -> f64 {
        let r = self
            .row_sums()
            .iter()
            .zip(mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let c = self
            .col_sums()
            .iter()
            .zip(nu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.max(c)
    }

    pub fn check(&self, mu: &[f64], nu: &[f64]) -> Result<()> {
        let (m, n) = self.shape();
        if m != mu.len() || n != nu.len() {
            return Err(Error::Dimension(format!(
                "coupling is {m}x{n}, marginals have lengths {} and {}",
                mu.len(),
                nu.len()
            )));
        }
        if let Some(v) = self.matrix.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Parameter(format!("coupling has negative entry {v}")));
        }
        let err = self.marginal_error(mu, nu);
        if err > TAU_MASS * (m.max(n) as f64).max(1.0) * 10.0 {
            return Err(Error::Parameter(format!("coupling marginals off by {err:e}")));
        }
        Ok(())
    }

    /// Cells with mass above the support threshold.
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.matrix
            .indexed_iter()
            .filter(|(_, &v)| v > crate::tol::SUPPORT_EPS)
            .map(|(ix, _)| ix)
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}
