//! Hit-and-run sampling in the transportation polytope.

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::spaces::check_probability;
use crate::transport::Coupling;

/// One jump: a Gaussian direction projected onto the matrices with zero row
/// and column sums, then a uniform point on the feasible chord.
fn jump(pi: &mut Array2<f64>, rng: &mut Rng) {
    let (m, n) = pi.dim();
    let mut d = Array2::<f64>::from_shape_fn((m, n), |_| rng.sample(StandardNormal));
    let rows: Vec<f64> = d.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let cols: Vec<f64> = d.columns().into_iter().map(|c| c.mean().unwrap_or(0.0)).collect();
    let grand = rows.iter().sum::<f64>() / m as f64;
    for ((i, j), v) in d.indexed_iter_mut() {
        *v += grand - rows[i] - cols[j];
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (&p, &dv) in pi.iter().zip(d.iter()) {
        if dv > 0.0 {
            lo = lo.max(-p / dv);
        } else if dv < 0.0 {
            hi = hi.min(p / -dv);
        }
    }
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return;
    }
    let gamma = lo + (hi - lo) * rng.random::<f64>();
    pi.zip_mut_with(&d, |p, dv| *p = (*p + gamma * dv).max(0.0));
}

/// Run `steps` jumps from the product coupling.
pub(crate) fn chain_from_product(mu_x: &[f64], mu_y: &[f64], steps: usize, rng: &mut Rng) -> Coupling {
    let mut pi = Coupling::product(mu_x, mu_y).into_matrix();
    if mu_x.len() > 1 && mu_y.len() > 1 {
        for _ in 0..steps {
            jump(&mut pi, rng);
        }
    }
    Coupling::from_matrix_unchecked(pi)
}

/// `count` couplings from one chain started at the product coupling, emitted
/// every `steps` jumps. With a single row or column the polytope is a point
/// and the product coupling is repeated.
pub fn hitrun_couplings(mu_x: &[f64], mu_y: &[f64], count: usize, steps: usize, seed: u64) -> Result<Vec<Coupling>> {
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    check_probability(mu_x)?;
    check_probability(mu_y)?;
    let mut pi = Coupling::product(mu_x, mu_y).into_matrix();
    if mu_x.len() == 1 || mu_y.len() == 1 {
        return Ok(vec![Coupling::from_matrix_unchecked(pi); count]);
    }
    let mut rng = rng::seeded(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..steps {
            jump(&mut pi, &mut rng);
        }
        out.push(Coupling::from_matrix_unchecked(pi.clone()));
    }
    Ok(out)
}
