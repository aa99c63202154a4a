//! Frank-Wolfe for the GW quadratic program.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::distortion::{inner, Cost, DistortionTensor};
use super::hitrun::chain_from_product;
use super::{dis_classical, dis_ult, GwResult};
use crate::error::{Error, Result};
use crate::exec::{map_range, Exec};
use crate::rng;
use crate::spaces::{check_order, Mode, UmSpace};
use crate::transport::{exact_ot, Coupling, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `γ_j = 2 / (j + 2)`.
    Harmonic,
    /// Minimiser of the quadratic objective on the segment, clamped to `[0, 1]`.
    #[default]
    ExactLineSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FwConfig {
    /// Number of starting couplings; the first is the product coupling.
    pub restarts: usize,
    /// Iterations per start.
    pub iterations: usize,
    pub step_rule: StepRule,
    /// Hit-and-run jumps used to draw each non-product start.
    pub hitrun_steps: usize,
    pub seed: u64,
    /// Stop once the Frank-Wolfe gap falls to this value.
    pub tol_stationarity: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for FwConfig {
    fn default() -> Self {
        Self {
            restarts: 40,
            iterations: 5000,
            step_rule: StepRule::ExactLineSearch,
            hitrun_steps: 50,
            seed: 0,
            tol_stationarity: 1e-10,
            exec: Exec::default(),
        }
    }
}

impl FwConfig {
    fn check(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 {
            return Err(Error::Parameter("restarts and iterations must be at least 1".into()));
        }
        if !(self.tol_stationarity >= 0.0) {
            return Err(Error::Parameter("tol_stationarity must be nonnegative".into()));
        }
        Ok(())
    }
}

/// One Frank-Wolfe run on `f(π) = ⟨π, Cπ⟩` from `start`.
fn descend(
    tensor: &DistortionTensor,
    mu_x: &[f64],
    mu_y: &[f64],
    start: Coupling,
    cfg: &FwConfig,
) -> Result<Coupling> {
    let mut pi = start.into_matrix();
    let mut c_pi = tensor.apply(&pi);
    for it in 0..cfg.iterations {
        let grad: Array2<f64> = &c_pi * 2.0;
        let vertex = exact_ot(&grad, mu_x, mu_y, Objective::Sum)?.coupling.into_matrix();
        let d = &vertex - &pi;
        let b = inner(&grad, &d);
        if -b <= cfg.tol_stationarity {
            break;
        }
        let c_d = tensor.apply(&d);
        let a = inner(&d, &c_d);
        let gamma = match cfg.step_rule {
            StepRule::Harmonic => 2.0 / (it as f64 + 2.0),
            StepRule::ExactLineSearch => {
                if a > 0.0 {
                    (-b / (2.0 * a)).clamp(0.0, 1.0)
                } else if a + b < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        if gamma <= 0.0 {
            break;
        }
        pi.scaled_add(gamma, &d);
        pi.mapv_inplace(|v| v.max(0.0));
        c_pi.scaled_add(gamma, &c_d);
    }
    Ok(Coupling::from_matrix_unchecked(pi))
}

/// Frank-Wolfe upper bound on `uGW_p` (`cost = Ultra`) or on `dGW_p`
/// (`cost = Classical`, value includes the `½` factor).
///
/// Start 0 is `μ_X ⊗ μ_Y`; start `r > 0` is a hit-and-run sample drawn from
/// random stream `r` of `cfg.seed`, so the result does not depend on how
/// restarts are scheduled. The best final distortion over all starts is
/// returned with its coupling; `trace` lists every start's final value.
pub fn ugw_fw(x: &UmSpace, y: &UmSpace, p: f64, cfg: &FwConfig, cost: Cost) -> Result<GwResult> {
    check_order(p)?;
    if p.is_infinite() {
        return Err(Error::Parameter(
            "Frank-Wolfe needs a finite p; use the exact p = ∞ algorithm".into(),
        ));
    }
    cfg.check()?;
    x.validate(Mode::UltraDissimilarity).into_result()?;
    y.validate(Mode::UltraDissimilarity).into_result()?;
    let tensor = DistortionTensor::new(x, y, p, cost);
    let runs: Vec<Result<(f64, Coupling)>> = map_range(cfg.exec, cfg.restarts, |r| {
        let start = if r == 0 {
            Coupling::product(x.mu(), y.mu())
        } else {
            let mut g = rng::stream(cfg.seed, r as u64);
            chain_from_product(x.mu(), y.mu(), cfg.hitrun_steps, &mut g)
        };
        let pi = descend(&tensor, x.mu(), y.mu(), start, cfg)?;
        let value = match cost {
            Cost::Ultra => dis_ult(x, y, &pi, p)?,
            Cost::Classical => 0.5 * dis_classical(x, y, &pi, p)?,
        };
        Ok((value, pi))
    });
    let mut trace = Vec::with_capacity(runs.len());
    let mut best: Option<(f64, Coupling)> = None;
    for run in runs {
        let (value, pi) = run?;
        trace.push(value);
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, pi));
        }
    }
    let (value, coupling) = best.expect("at least one restart");
    Ok(GwResult {
        value,
        method: match cost {
            Cost::Ultra => "ugw-fw",
            Cost::Classical => "dgw-fw",
        },
        coupling: Some(coupling),
        level: None,
        matching: None,
        trace,
    })
}

/// `ugw_fw` with the classical cost: an upper bound on `dGW_p`.
pub fn dgw_fw(x: &UmSpace, y: &UmSpace, p: f64, cfg: &FwConfig) -> Result<GwResult> {
    ugw_fw(x, y, p, cfg, Cost::Classical)
}
