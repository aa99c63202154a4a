//! Gromov-Wasserstein distances between ultrametric measure spaces.
//!
//! * [`dis_ult`] and [`dis_classical`] evaluate the distortion of a coupling.
//! * [`ugw_inf_exact`] and [`ugh_exact`] compute `uGW_∞` and `uGH` exactly by
//!   sweeping the merged spectrum and comparing canonical forms of quotients.
//! * [`ugw_fw`] approximates `uGW_p` (or `dGW_p`) from above with Frank-Wolfe
//!   started from the product coupling and hit-and-run samples.
//! * [`usturm_bruteforce`] evaluates Sturm's ultrametric GW distance by
//!   enumerating maximal isometric pairs; exponential, for small inputs only.

mod canonical;
mod distortion;
mod fw;
mod hitrun;
mod sturm;

pub use canonical::{ugh_exact, ugw_inf_exact, CanonicalForm, SigMode};
pub use distortion::{dis_classical, dis_ult, ultra_gradient, Cost};
pub use fw::{dgw_fw, ugw_fw, FwConfig, StepRule};
pub use hitrun::hitrun_couplings;
pub use sturm::{usturm_bruteforce, DEFAULT_SIZE_CAP};

use serde_json::{json, Value};

use crate::transport::Coupling;

/// Matched groups of points: `(indices in X, indices in Y)`.
pub type Matching = Vec<(Vec<usize>, Vec<usize>)>;

/// Outcome of a GW computation together with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GwResult {
    pub value: f64,
    pub method: &'static str,
    pub coupling: Option<Coupling>,
    /// Critical quotient level for the exact `p = ∞` algorithms.
    pub level: Option<f64>,
    /// Block matching (exact `p = ∞`) or the optimal isometric embedding (Sturm).
    pub matching: Option<Matching>,
    /// Final distortion of every restart, in restart order.
    pub trace: Vec<f64>,
}

impl GwResult {
    pub fn to_json(&self) -> Value {
        let mut out = json!({"value": self.value, "method": self.method});
        if let Some(c) = &self.coupling {
            out["coupling"] = json!(c.to_rows());
        }
        if let Some(t) = self.level {
            out["level"] = json!(t);
        }
        if let Some(m) = &self.matching {
            out["matching"] = json!(m);
        }
        if !self.trace.is_empty() {
            out["trace"] = json!(self.trace);
        }
        out
    }
}
