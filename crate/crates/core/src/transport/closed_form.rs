//! Closed-form Wasserstein distances.

use super::{common_grid, lambda_q, ScalarMeasure};
use crate::error::{Error, Result};
use crate::spaces::{check_order, Dendrogram, Mode, UmSpace};
use crate::tol::TAU_MASS;

/// `d_{W,p}` between two measures on an ultrametric space, by summing over
/// dendrogram nodes: `½ Σ_B (h(B*)^p - h(B)^p) |α(B) - β(B)|` for `p < ∞`,
/// and the largest parent height over nodes with `α(B) ≠ β(B)` at `p = ∞`.
///
/// `alpha` and `beta` may have zero entries.
pub fn w_ultrametric(space: &UmSpace, alpha: &[f64], beta: &[f64], p: f64) -> Result<f64> {
    space.validate(Mode::Ultrametric).into_result()?;
    let n = space.len();
    if alpha.len() != n || beta.len() != n {
        return Err(Error::Dimension(format!(
            "space has {n} points, vectors have lengths {} and {}",
            alpha.len(),
            beta.len()
        )));
    }
    check_weights(alpha)?;
    check_weights(beta)?;
    w_ultrametric_dendrogram(&space.to_dendrogram(), alpha, beta, p)
}

/// As [`w_ultrametric`] on a prebuilt dendrogram; vectors are indexed by leaf point.
/// Mass differences up to `TAU_MASS` count as zero.
pub fn w_ultrametric_dendrogram(d: &Dendrogram, alpha: &[f64], beta: &[f64], p: f64) -> Result<f64> {
    check_order(p)?;
    let nodes = d.nodes();
    let parents = d.parents();
    // children always precede their parent in node order
    let mut diff = vec![0.0; nodes.len()];
    let mut order: Vec<usize> = Vec::with_capacity(nodes.len());
    let mut stack = vec![(d.root(), false)];
    while let Some((v, done)) = stack.pop() {
        if done {
            order.push(v);
        } else {
            stack.push((v, true));
            stack.extend(nodes[v].children.iter().map(|&c| (c, false)));
        }
    }
    for &v in &order {
        diff[v] = match nodes[v].point {
            Some(i) if nodes[v].is_leaf() => alpha[i] - beta[i],
            _ => nodes[v].children.iter().map(|&c| diff[c]).sum(),
        };
    }
    if p.is_infinite() {
        let mut best: f64 = 0.0;
        for &v in &order {
            if let Some(par) = parents[v] {
                if diff[v].abs() > TAU_MASS {
                    best = best.max(nodes[par].height);
                }
            }
        }
        return Ok(best);
    }
    let mut acc = 0.0;
    for &v in &order {
        if let Some(par) = parents[v] {
            if diff[v].abs() > TAU_MASS {
                let gap = nodes[par].height.powf(p) - nodes[v].height.powf(p);
                acc += gap * diff[v].abs();
            }
        }
    }
    Ok((0.5 * acc).powf(1.0 / p))
}

fn check_weights(w: &[f64]) -> Result<()> {
    if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NonPositiveMass { index, value });
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > TAU_MASS * (w.len() as f64).max(1.0) {
        return Err(Error::MassSum { sum });
    }
    Ok(())
}

/// `d_{W,p}` on the half line with ground cost `Λ_∞`.
pub fn w_halfline(alpha: &ScalarMeasure, beta: &ScalarMeasure, p: f64) -> Result<f64> {
    check_order(p)?;
    let (xs, a, b) = common_grid(alpha, beta);
    let k = xs.len();
    if p.is_infinite() {
        let mut best: f64 = 0.0;
        let mut cum = 0.0;
        for i in 0..k {
            if (a[i] - b[i]).abs() > TAU_MASS {
                best = best.max(xs[i]);
            }
            cum += a[i] - b[i];
            if i + 1 < k && cum.abs() > TAU_MASS {
                best = best.max(xs[i + 1]);
            }
        }
        return Ok(best);
    }
    let pw: Vec<f64> = xs.iter().map(|x| x.powf(p)).collect();
    let mut acc = 0.0;
    let mut cum = 0.0;
    for i in 0..k {
        let jump = a[i] - b[i];
        cum += jump;
        if i + 1 < k && cum.abs() > TAU_MASS {
            acc += cum.abs() * (pw[i + 1] - pw[i]);
        }
        if jump.abs() > TAU_MASS {
            acc += jump.abs() * pw[i];
        }
    }
    Ok((0.5 * acc).powf(1.0 / p))
}

/// `d_{W,p}` on the half line with ground cost `Λ_q`, `1 <= q <= p`, by
/// integrating `Λ_q(F_α^{-1}(t), F_β^{-1}(t))^p` over `t ∈ [0, 1]`.
///
/// At `p = ∞` the integral becomes the largest cost over quantile pieces of
/// positive length. For `q > p` the quantile coupling is not optimal in
/// general and the call is refused.
pub fn w_quantile(alpha: &ScalarMeasure, beta: &ScalarMeasure, p: f64, q: f64) -> Result<f64> {
    check_order(p)?;
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::Parameter(format!("q must lie in [1, ∞), got {q}")));
    }
    if q > p {
        return Err(Error::Parameter(format!(
            "the quantile coupling is only optimal for q <= p (got q = {q}, p = {p})"
        )));
    }
    let a = alpha.atoms();
    let b = beta.atoms();
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    loop {
        let step = ra.min(rb);
        let cost = lambda_q(a[i].0, b[j].0, q);
        if p.is_infinite() {
            if step > TAU_MASS {
                best = best.max(cost);
            }
        } else if step > TAU_MASS {
            acc += step * cost.powf(p);
        }
        ra -= step;
        rb -= step;
        let last_a = i + 1 == a.len();
        let last_b = j + 1 == b.len();
        if last_a && last_b {
            break;
        }
        // advance whichever side is exhausted; ties advance both
        let adv_a = !last_a && (ra <= rb || last_b);
        let adv_b = !last_b && (rb <= ra || last_a);
        if adv_a {
            i += 1;
            ra += a[i].1;
        }
        if adv_b {
            j += 1;
            rb += b[j].1;
        }
    }
    Ok(if p.is_infinite() { best } else { acc.powf(1.0 / p) })
}

