//! Exact discrete optimal transport.

use ndarray::Array2;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{bottleneck, simplex, Coupling};
use crate::error::{Error, Result};
use crate::tol::TAU_MASS;

/// Largest side length accepted by [`exact_ot_rational`].
pub const RATIONAL_SIZE_CAP: usize = 16;

const FLOW_NOISE: f64 = 4.0 * f64::EPSILON;

/// Which aggregate of the transported costs is minimised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `Σ c_ij π_ij`.
    Sum,
    /// `max { c_ij : π_ij > 0 }`.
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtSolution {
    pub value: f64,
    pub coupling: Coupling,
}

struct Reduced {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn prepare(cost: &Array2<f64>, mu: &[f64], nu: &[f64]) -> Result<Reduced> {
    let (m, n) = cost.dim();
    if m != mu.len() || n != nu.len() {
        return Err(Error::Dimension(format!(
            "cost is {m}x{n}, marginals have lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    if let Some(v) = cost.iter().find(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("non-finite cost entry {v}")));
    }
    for w in [mu, nu] {
        if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NonPositiveMass { index, value });
        }
    }
    let (sa, sb): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (sa - sb).abs() > TAU_MASS || sa <= 0.0 {
        return Err(Error::Infeasible(format!(
            "marginal totals differ: {sa} vs {sb}"
        )));
    }
    Ok(Reduced {
        rows: (0..m).filter(|&i| mu[i] > 0.0).collect(),
        cols: (0..n).filter(|&j| nu[j] > 0.0).collect(),
    })
}

/// Solve `min Σ c π` (or the bottleneck problem) over couplings of `mu` and `nu`.
///
/// Marginals may contain zeros; their totals must agree within
/// [`TAU_MASS`](crate::tol::TAU_MASS).
pub fn exact_ot(cost: &Array2<f64>, mu: &[f64], nu: &[f64], objective: Objective) -> Result<OtSolution> {
    let red = prepare(cost, mu, nu)?;
    let (m, n) = cost.dim();
    match objective {
        Objective::Max => {
            let sub = Array2::from_shape_fn((red.rows.len(), red.cols.len()), |(a, b)| {
                cost[[red.rows[a], red.cols[b]]]
            });
            let smu: Vec<f64> = red.rows.iter().map(|&i| mu[i]).collect();
            let snu: Vec<f64> = red.cols.iter().map(|&j| nu[j]).collect();
            let (value, plan) = bottleneck::solve(&sub, &smu, &snu);
            let mut full = Array2::zeros((m, n));
            for ((a, b), &x) in plan.indexed_iter() {
                full[[red.rows[a], red.cols[b]]] = x;
            }
            Ok(OtSolution {
                value,
                coupling: Coupling::from_matrix_unchecked(full),
            })
        }
        Objective::Sum => {
            let c: Vec<Vec<f64>> = red
                .rows
                .iter()
                .map(|&i| red.cols.iter().map(|&j| cost[[i, j]]).collect())
                .collect();
            let a: Vec<f64> = red.rows.iter().map(|&i| mu[i]).collect();
            let b: Vec<f64> = red.cols.iter().map(|&j| nu[j]).collect();
            let scale = cost.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let eps = 1e-12 * scale;
            let flows = simplex::solve(&c, &a, &b, &eps)?;
            let mut full = Array2::zeros((m, n));
            for (ra, cb, x) in flows {
                // rounding residue of the marginal bookkeeping, not transported mass
                if x > FLOW_NOISE {
                    full[[red.rows[ra], red.cols[cb]]] += x;
                }
            }
            let value = full.iter().zip(cost.iter()).map(|(p, c)| p * c).sum();
            Ok(OtSolution {
                value,
                coupling: Coupling::from_matrix_unchecked(full),
            })
        }
    }
}

/// Sum-objective transport solved in exact rational arithmetic.
///
/// Inputs are converted to rationals exactly; a total-mass discrepancy within
/// `TAU_MASS` is absorbed by the largest entry of `nu`. Returns the exact
/// optimal value with its float rounding and coupling. Refuses problems with
/// more than [`RATIONAL_SIZE_CAP`] rows or columns.
pub fn exact_ot_rational(cost: &Array2<f64>, mu: &[f64], nu: &[f64]) -> Result<(BigRational, OtSolution)> {
    let (m, n) = cost.dim();
    if m.max(n) > RATIONAL_SIZE_CAP {
        return Err(Error::SizeCap(format!(
            "rational transport is limited to {RATIONAL_SIZE_CAP} points per side, got {m}x{n}"
        )));
    }
    let red = prepare(cost, mu, nu)?;
    let q = |x: f64| BigRational::from_float(x).expect("finite value");
    let c: Vec<Vec<BigRational>> = red
        .rows
        .iter()
        .map(|&i| red.cols.iter().map(|&j| q(cost[[i, j]])).collect())
        .collect();
    let a: Vec<BigRational> = red.rows.iter().map(|&i| q(mu[i])).collect();
    let mut b: Vec<BigRational> = red.cols.iter().map(|&j| q(nu[j])).collect();
    let gap = a.iter().fold(BigRational::zero(), |s, x| s + x)
        - b.iter().fold(BigRational::zero(), |s, x| s + x);
    let big = (0..b.len())
        .max_by(|&x, &y| b[x].cmp(&b[y]).then(y.cmp(&x)))
        .expect("nonempty");
    b[big] = b[big].clone() + gap;
    let zero = BigRational::new(BigInt::zero(), BigInt::from(1));
    let flows = simplex::solve(&c, &a, &b, &zero)?;
    let mut value = BigRational::zero();
    let mut full = Array2::zeros((m, n));
    for (ra, cb, x) in flows {
        value += c[ra][cb].clone() * x.clone();
        full[[red.rows[ra], red.cols[cb]]] += x.to_f64().unwrap_or(0.0);
    }
    let approx = value.to_f64().unwrap_or(f64::NAN);
    Ok((
        value,
        OtSolution {
            value: approx,
            coupling: Coupling::from_matrix_unchecked(full),
        },
    ))
}
