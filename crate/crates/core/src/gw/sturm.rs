//! Sturm's ultrametric GW distance by exhaustive search over maximal pairs.
//!
//! A pair `(A, φ)` is a subset `A ⊆ X` with an isometric injection
//! `φ: A → Y`; it is maximal when no point can be added. For each maximal
//! pair the amalgam `Z_A = X ⊔ (Y \ φ(A))` is an ultrametric space into which
//! both `X` and `Y` embed isometrically, and the candidate value is the
//! Wasserstein distance on `Z_A` between the two pushed-forward measures.

use ndarray::Array2;

use super::GwResult;
use crate::error::{Error, Result};
use crate::spaces::{check_order, Mode, UmSpace};
use crate::tol::TAU_METRIC;
use crate::transport::w_ultrametric_dendrogram;

/// Default largest accepted space size.
pub const DEFAULT_SIZE_CAP: usize = 7;

/// Minimum over maximal pairs of `d_{W,p}^{Z_A}(μ_X, μ_Y)`.
///
/// The result's `matching` lists the optimal embedding as singleton pairs.
pub fn usturm_bruteforce(x: &UmSpace, y: &UmSpace, p: f64, size_cap: usize) -> Result<GwResult> {
    check_order(p)?;
    if x.len() > size_cap || y.len() > size_cap {
        return Err(Error::SizeCap(format!(
            "brute-force search is exponential; sizes {} and {} exceed the cap {size_cap}",
            x.len(),
            y.len()
        )));
    }
    x.validate(Mode::Ultrametric).into_result()?;
    y.validate(Mode::Ultrametric).into_result()?;
    let mut search = Search {
        x,
        y,
        p,
        phi: vec![None; x.len()],
        used: vec![false; y.len()],
        best: None,
        evaluated: 0,
    };
    search.dfs(0)?;
    let (value, phi) = search.best.expect("a singleton pair always exists");
    let matching = phi
        .iter()
        .enumerate()
        .filter_map(|(a, f)| f.map(|b| (vec![a], vec![b])))
        .collect();
    Ok(GwResult {
        value,
        method: "usturm-bruteforce",
        coupling: None,
        level: None,
        matching: Some(matching),
        trace: Vec::new(),
    })
}

struct Search<'a> {
    x: &'a UmSpace,
    y: &'a UmSpace,
    p: f64,
    phi: Vec<Option<usize>>,
    used: Vec<bool>,
    best: Option<(f64, Vec<Option<usize>>)>,
    evaluated: usize,
}

impl Search<'_> {
    fn compatible(&self, a: usize, b: usize) -> bool {
        self.phi.iter().enumerate().all(|(k, f)| match f {
            Some(fk) => (self.x.u()[[a, k]] - self.y.u()[[b, *fk]]).abs() <= TAU_METRIC,
            None => true,
        })
    }

    fn dfs(&mut self, a: usize) -> Result<()> {
        if a == self.x.len() {
            if self.phi.iter().any(Option::is_some) && self.is_maximal() {
                self.evaluate()?;
            }
            return Ok(());
        }
        for b in 0..self.y.len() {
            if !self.used[b] && self.compatible(a, b) {
                self.phi[a] = Some(b);
                self.used[b] = true;
                self.dfs(a + 1)?;
                self.used[b] = false;
                self.phi[a] = None;
            }
        }
        self.dfs(a + 1)
    }

    fn is_maximal(&self) -> bool {
        (0..self.x.len()).filter(|&a| self.phi[a].is_none()).all(|a| {
            (0..self.y.len()).all(|b| self.used[b] || !self.compatible(a, b))
        })
    }

    fn evaluate(&mut self) -> Result<()> {
        self.evaluated += 1;
        let (m, n) = (self.x.len(), self.y.len());
        let (ux, uy) = (self.x.u(), self.y.u());
        let rest: Vec<usize> = (0..n).filter(|&b| !self.used[b]).collect();
        let size = m + rest.len();
        let anchors: Vec<(usize, usize)> = self
            .phi
            .iter()
            .enumerate()
            .filter_map(|(a, f)| f.map(|b| (a, b)))
            .collect();
        let cross = |xi: usize, yj: usize| {
            anchors
                .iter()
                .map(|&(a, b)| ux[[xi, a]].max(uy[[b, yj]]))
                .fold(f64::INFINITY, f64::min)
        };
        let mut u = Array2::zeros((size, size));
        for i in 0..size {
            for j in 0..size {
                u[[i, j]] = match (i < m, j < m) {
                    (true, true) => ux[[i, j]],
                    (false, false) => uy[[rest[i - m], rest[j - m]]],
                    (true, false) => cross(i, rest[j - m]),
                    (false, true) => cross(j, rest[i - m]),
                };
            }
        }
        let mut alpha = vec![0.0; size];
        alpha[..m].copy_from_slice(self.x.mu());
        let mut beta = vec![0.0; size];
        for &(a, b) in &anchors {
            beta[a] = self.y.mu()[b];
        }
        for (k, &b) in rest.iter().enumerate() {
            beta[m + k] = self.y.mu()[b];
        }
        let z = UmSpace::uniform(u)?;
        let value = w_ultrametric_dendrogram(&z.to_dendrogram(), &alpha, &beta, self.p)?;
        if self.best.as_ref().is_none_or(|(v, _)| value < *v) {
            self.best = Some((value, self.phi.clone()));
        }
        Ok(())
    }
}
