//! Random ultrametric measure spaces and level-`t` perturbations.
//!
//! [`gen_ultrametric`] samples `k · samples_per_block` reals from the mixture
//! of `U[1.5(i-1), 1.5(i-1) + 1]`, `i = 1..k`, builds the single-linkage
//! dendrogram of the sample and keeps the cophenetic ultrametric on a random
//! subset of points with the uniform measure.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::spaces::{Mode, UmSpace};
use crate::tol::{dedup_sorted, TAU_METRIC};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSpec {
    /// Number of mixture components.
    pub k: usize,
    pub samples_per_block: usize,
    /// Number of points kept.
    pub subsample: usize,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            k: 3,
            samples_per_block: 100,
            subsample: 30,
            seed: 0,
        }
    }
}

/// Minimum spanning tree of points on the line under `|a - b|`, as an adjacency list.
fn mst(points: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, usize::MAX); n];
    best[0] = (0.0, usize::MAX);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0).then(a.cmp(&b)))
            .expect("a vertex remains");
        in_tree[v] = true;
        let (w, p) = best[v];
        if p != usize::MAX {
            adj[v].push((p, w));
            adj[p].push((v, w));
        }
        for u in 0..n {
            if !in_tree[u] {
                let d = (points[u] - points[v]).abs();
                if d < best[u].0 {
                    best[u] = (d, v);
                }
            }
        }
    }
    adj
}

/// Cophenetic single-linkage distances among `keep`: the largest edge on the
/// spanning-tree path between two points.
pub(crate) fn single_linkage(points: &[f64], keep: &[usize]) -> Array2<f64> {
    let adj = mst(points);
    let n = points.len();
    let mut u = Array2::zeros((keep.len(), keep.len()));
    for (a, &src) in keep.iter().enumerate() {
        let mut maxedge = vec![f64::NAN; n];
        maxedge[src] = 0.0;
        let mut stack = vec![src];
        while let Some(v) = stack.pop() {
            for &(w, len) in &adj[v] {
                if maxedge[w].is_nan() {
                    maxedge[w] = maxedge[v].max(len);
                    stack.push(w);
                }
            }
        }
        for (b, &dst) in keep.iter().enumerate() {
            u[[a, b]] = maxedge[dst];
        }
    }
    u
}

/// Draw a random ultrametric measure space.
pub fn gen_ultrametric(spec: &GenSpec) -> Result<UmSpace> {
    if spec.k == 0 || spec.samples_per_block == 0 || spec.subsample == 0 {
        return Err(Error::Parameter("k, samples_per_block and subsample must be positive".into()));
    }
    let total = spec.k * spec.samples_per_block;
    if spec.subsample > total {
        return Err(Error::Parameter(format!(
            "cannot keep {} of {total} points",
            spec.subsample
        )));
    }
    let mut g = rng::seeded(spec.seed);
    let points: Vec<f64> = (0..total)
        .map(|_| {
            let i = g.random_range(0..spec.k) as f64;
            1.5 * i + g.random::<f64>()
        })
        .collect();
    let mut keep = sample(&mut g, total, spec.subsample).into_vec();
    keep.sort_unstable();
    let u = single_linkage(&points, &keep);
    UmSpace::uniform(u)
}

/// Perturb distances inside every level-`t` block while keeping the
/// level-`t` weighted quotient.
///
/// In a block with distinct positive distances `s_1 < … < s_m` and diameter
/// `δ = s_m`, draw `m` uniforms on `[0, t - δ]`, sort them to `a_1 <= … <= a_m`
/// and replace `s_i` by `s_i + a_i`. Distances between blocks are untouched.
pub fn perturb(space: &UmSpace, t: f64, seed: u64) -> Result<UmSpace> {
    space.validate(Mode::Ultrametric).into_result()?;
    let q = space.quotient(t)?;
    let mut g = rng::seeded(seed);
    let mut u = space.u().clone();
    for block in q.blocks.iter().filter(|b| b.len() > 1) {
        let mut vals = Vec::new();
        for (x, &i) in block.iter().enumerate() {
            for &j in &block[x + 1..] {
                vals.push(space.u()[[i, j]]);
            }
        }
        let spec: Vec<f64> = dedup_sorted(vals).into_iter().filter(|&s| s > TAU_METRIC).collect();
        let delta = *spec.last().expect("block has two points");
        let room = (t - delta).max(0.0);
        let mut a: Vec<f64> = (0..spec.len()).map(|_| room * g.random::<f64>()).collect();
        a.sort_by(f64::total_cmp);
        for (x, &i) in block.iter().enumerate() {
            for &j in &block[x + 1..] {
                let v = space.u()[[i, j]];
                if let Some(k) = spec.iter().position(|&s| (v - s).abs() <= TAU_METRIC) {
                    u[[i, j]] = spec[k] + a[k];
                    u[[j, i]] = spec[k] + a[k];
                }
            }
        }
    }
    UmSpace::new(space.ids().to_vec(), u, space.mu().to_vec())
}
