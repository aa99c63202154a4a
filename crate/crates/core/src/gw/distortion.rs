use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{check_order, UmSpace};
use crate::tol::dedup_sorted;
use crate::transport::{lambda_inf, Coupling};

/// How pairs of distances are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cost {
    /// `Λ_∞(a, b)`.
    #[default]
    Ultra,
    /// `|a - b|`.
    Classical,
}

impl Cost {
    #[inline]
    fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            Cost::Ultra => lambda_inf(a, b),
            Cost::Classical => (a - b).abs(),
        }
    }
}

fn check_coupling(x: &UmSpace, y: &UmSpace, mu: &Coupling) -> Result<()> {
    mu.check(x.mu(), y.mu())
}

fn distortion(x: &UmSpace, y: &UmSpace, mu: &Coupling, p: f64, cost: Cost) -> Result<f64> {
    check_order(p)?;
    check_coupling(x, y, mu)?;
    let (ux, uy) = (x.u(), y.u());
    let pi = mu.matrix();
    if p.is_infinite() {
        let support = mu.support();
        let mut best: f64 = 0.0;
        for &(i, j) in &support {
            for &(k, l) in &support {
                best = best.max(cost.eval(ux[[i, k]], uy[[j, l]]));
            }
        }
        return Ok(best);
    }
    let (m, n) = pi.dim();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..n {
            let pij = pi[[i, j]];
            if pij == 0.0 {
                continue;
            }
            for k in 0..m {
                for l in 0..n {
                    let c = cost.eval(ux[[i, k]], uy[[j, l]]);
                    acc += c.powf(p) * pij * pi[[k, l]];
                }
            }
        }
    }
    Ok(acc.max(0.0).powf(1.0 / p))
}

/// p-ultra-distortion `(Σ Λ_∞(u_X(i,k), u_Y(j,l))^p μ_ij μ_kl)^(1/p)`; at
/// `p = ∞` the largest `Λ_∞` over pairs of support cells.
pub fn dis_ult(x: &UmSpace, y: &UmSpace, mu: &Coupling, p: f64) -> Result<f64> {
    distortion(x, y, mu, p, Cost::Ultra)
}

/// p-distortion with `|u_X - u_Y|`, without the leading `½` of `dGW`.
pub fn dis_classical(x: &UmSpace, y: &UmSpace, mu: &Coupling, p: f64) -> Result<f64> {
    distortion(x, y, mu, p, Cost::Classical)
}

/// Gradient of `μ ↦ dis_ult(μ)^p`: `G_ij = 2 Σ_kl Λ_∞(u_X(i,k), u_Y(j,l))^p μ_kl`.
pub fn ultra_gradient(x: &UmSpace, y: &UmSpace, mu: &Coupling, p: f64) -> Result<Array2<f64>> {
    check_order(p)?;
    if p.is_infinite() {
        return Err(Error::Parameter("the gradient needs a finite p".into()));
    }
    let (m, n) = mu.shape();
    if m != x.len() || n != y.len() {
        return Err(Error::Dimension("coupling shape does not match the spaces".into()));
    }
    let t = DistortionTensor::new(x, y, p, Cost::Ultra);
    Ok(t.apply(mu.matrix()) * 2.0)
}

/// The quadratic form `C_{ij,kl} = cost(u_X(i,k), u_Y(j,l))^p`, stored as
/// level indices into a small table of powered costs.
pub(crate) struct DistortionTensor {
    m: usize,
    n: usize,
    ix: Vec<usize>,
    iy: Vec<usize>,
    ly: usize,
    table: Vec<f64>,
}

fn level_index(levels: &[f64], v: f64) -> usize {
    levels.partition_point(|&r| r <= v).saturating_sub(1)
}

impl DistortionTensor {
    pub(crate) fn new(x: &UmSpace, y: &UmSpace, p: f64, cost: Cost) -> Self {
        let lx = dedup_sorted(x.u().iter().copied().collect());
        let ly = dedup_sorted(y.u().iter().copied().collect());
        let ix = x.u().iter().map(|&v| level_index(&lx, v)).collect();
        let iy = y.u().iter().map(|&v| level_index(&ly, v)).collect();
        let mut table = Vec::with_capacity(lx.len() * ly.len());
        for &a in &lx {
            for &b in &ly {
                table.push(cost.eval(a, b).powf(p));
            }
        }
        Self {
            m: x.len(),
            n: y.len(),
            ix,
            iy,
            ly: ly.len(),
            table,
        }
    }

    /// `(C M)_ij = Σ_kl C_{ij,kl} M_kl`.
    pub(crate) fn apply(&self, mat: &Array2<f64>) -> Array2<f64> {
        let (m, n) = (self.m, self.n);
        let flat = mat.as_standard_layout();
        let flat = flat.as_slice().expect("standard layout");
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for k in 0..m {
                let row = &self.table[self.ix[i * m + k] * self.ly..][..self.ly];
                let mk = &flat[k * n..(k + 1) * n];
                if mk.iter().all(|v| *v == 0.0) {
                    continue;
                }
                for j in 0..n {
                    let iyj = &self.iy[j * n..(j + 1) * n];
                    let mut s = 0.0;
                    for l in 0..n {
                        s += row[iyj[l]] * mk[l];
                    }
                    out[i * n + j] += s;
                }
            }
        }
        Array2::from_shape_vec((m, n), out).expect("shape")
    }
}

/// `⟨A, B⟩` for equally shaped matrices.
pub(crate) fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
