//! Numerical tolerances shared across the crate.

/// Absolute tolerance for symmetry and strong-triangle checks, for merging
/// nearby distance values and for the closed quotient condition `u <= t + TAU_METRIC`.
pub const TAU_METRIC: f64 = 1e-9;

/// Tolerance for probability mass sums and mass comparisons.
pub const TAU_MASS: f64 = 1e-12;

/// Resolution at which heights and masses are rounded before building
/// canonical signatures. Weighted isomorphism is decided at this resolution.
pub const QUANTUM: f64 = 1e-9;

/// Entries of a coupling at or below this value are treated as outside its support.
pub const SUPPORT_EPS: f64 = TAU_MASS;

pub(crate) fn quantize(x: f64) -> i64 {
    (x / QUANTUM).round() as i64
}

/// Sort and merge values closer than [`TAU_METRIC`]; each cluster is represented
/// by its smallest member.
pub(crate) fn dedup_sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(&last) if v - last <= TAU_METRIC => {}
            _ => out.push(v),
        }
    }
    out
}
