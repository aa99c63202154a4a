//! Polynomial-time lower bounds for `uGW_p` and `dGW_p`.
//!
//! Each bound compares distributions of distances: eccentricities (first
//! bound), the global distance distribution `(u_X)_#(μ_X ⊗ μ_X)` (second) and
//! the local distributions `u_X(x, ·)_#μ_X` (third). The ultrametric bounds
//! use the `Λ_∞` half-line closed form; the classical ones use the quantile
//! formula with `Λ_1` and carry a factor `½`.

use ndarray::Array2;
use serde::Serialize;

use crate::error::Result;
use crate::exec::{map_range, Exec};
use crate::spaces::{check_order, UmSpace};
use crate::transport::{exact_ot, w_halfline, w_quantile, Objective, ScalarMeasure};

/// `s_{X,p}(x) = ‖u_X(x, ·)‖_{L^p(μ_X)}`.
pub fn eccentricity(x: &UmSpace, p: f64) -> Result<Vec<f64>> {
    check_order(p)?;
    let (u, mu) = (x.u(), x.mu());
    Ok((0..x.len())
        .map(|i| {
            if p.is_infinite() {
                u.row(i).iter().copied().fold(0.0, f64::max)
            } else {
                let s: f64 = u.row(i).iter().zip(mu).map(|(d, m)| d.powf(p) * m).sum();
                s.powf(1.0 / p)
            }
        })
        .collect())
}

/// `(u_X)_#(μ_X ⊗ μ_X)`, diagonal included.
pub fn global_distribution(x: &UmSpace) -> ScalarMeasure {
    let n = x.len();
    let (u, mu) = (x.u(), x.mu());
    let mut vals = Vec::with_capacity(n * n);
    let mut w = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            vals.push(u[[i, j]]);
            w.push(mu[i] * mu[j]);
        }
    }
    ScalarMeasure::pushforward(&vals, &w)
}

/// `u_X(x_i, ·)_#μ_X`, self atom included.
pub fn local_distribution(x: &UmSpace, i: usize) -> ScalarMeasure {
    ScalarMeasure::pushforward(x.u().row(i).as_slice().expect("standard layout"), x.mu())
}

fn eccentricity_measure(x: &UmSpace, p: f64) -> Result<ScalarMeasure> {
    Ok(ScalarMeasure::pushforward(&eccentricity(x, p)?, x.mu()))
}

/// First lower bound with `Λ_∞`. Not a lower bound of `uGW_p` for `p < ∞` in general.
pub fn uflb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    w_halfline(&eccentricity_measure(x, p)?, &eccentricity_measure(y, p)?, p)
}

/// Classical first lower bound.
pub fn flb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    Ok(0.5 * w_quantile(&eccentricity_measure(x, p)?, &eccentricity_measure(y, p)?, p, 1.0)?)
}

/// Second lower bound with `Λ_∞`.
pub fn uslb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    w_halfline(&global_distribution(x), &global_distribution(y), p)
}

/// Classical second lower bound.
pub fn slb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    Ok(0.5 * w_quantile(&global_distribution(x), &global_distribution(y), p, 1.0)?)
}

/// The three terms of `uSLB_1 = SLB_1 + ½ ∫ t |dH_X - dH_Y|(dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlbDecomposition {
    pub uslb1: f64,
    pub slb1: f64,
    pub weighted_tv: f64,
}

pub fn uslb1_decomposition(x: &UmSpace, y: &UmSpace) -> Result<SlbDecomposition> {
    let (hx, hy) = (global_distribution(x), global_distribution(y));
    Ok(SlbDecomposition {
        uslb1: w_halfline(&hx, &hy, 1.0)?,
        slb1: 0.5 * w_quantile(&hx, &hy, 1.0, 1.0)?,
        weighted_tv: 0.5 * hx.weighted_tv(&hy),
    })
}

fn third_bound(x: &UmSpace, y: &UmSpace, p: f64, exec: Exec, ultra: bool) -> Result<f64> {
    check_order(p)?;
    let (m, n) = (x.len(), y.len());
    let lx: Vec<ScalarMeasure> = (0..m).map(|i| local_distribution(x, i)).collect();
    let ly: Vec<ScalarMeasure> = (0..n).map(|j| local_distribution(y, j)).collect();
    let cells: Vec<Result<f64>> = map_range(exec, m * n, |k| {
        let (a, b) = (&lx[k / n], &ly[k % n]);
        if ultra {
            w_halfline(a, b, p)
        } else {
            w_quantile(a, b, p, 1.0)
        }
    });
    let omega = Array2::from_shape_vec((m, n), cells.into_iter().collect::<Result<Vec<_>>>()?)
        .expect("shape");
    let value = if p.is_infinite() {
        exact_ot(&omega, x.mu(), y.mu(), Objective::Max)?.value
    } else {
        exact_ot(&omega.mapv(|v| v.powf(p)), x.mu(), y.mu(), Objective::Sum)?
            .value
            .max(0.0)
            .powf(1.0 / p)
    };
    Ok(if ultra { value } else { 0.5 * value })
}

/// Third lower bound with `Λ_∞`.
pub fn utlb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    third_bound(x, y, p, Exec::default(), true)
}

/// [`utlb`] with an explicit execution mode for the cost grid.
pub fn utlb_with(x: &UmSpace, y: &UmSpace, p: f64, exec: Exec) -> Result<f64> {
    third_bound(x, y, p, exec, true)
}

/// Classical third lower bound.
pub fn tlb(x: &UmSpace, y: &UmSpace, p: f64) -> Result<f64> {
    third_bound(x, y, p, Exec::default(), false)
}

pub fn tlb_with(x: &UmSpace, y: &UmSpace, p: f64, exec: Exec) -> Result<f64> {
    third_bound(x, y, p, exec, false)
}
