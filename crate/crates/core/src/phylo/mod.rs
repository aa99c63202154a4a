//! Phylogenetic trees and their tree-shape ultra-dissimilarity spaces.
//!
//! For tips `x1 != x2`, `u(x1, x2) = d - depth(lca(x1, x2))` and
//! `u(x, x) = d - depth(x)`, where `d` is the largest root-to-tip depth.

mod lca;
mod newick;

pub use newick::{parse_newick, parse_newick_all, write_newick};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Dendrogram, Mode, UmSpace};
use lca::Lca;

#[derive(Debug, Clone, PartialEq)]
pub struct PNode {
    pub label: Option<String>,
    /// Length of the edge to the parent.
    pub length: Option<f64>,
    pub children: Vec<usize>,
}

/// Rooted tree with optional labels and branch lengths; children precede parents in `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    pub nodes: Vec<PNode>,
    pub root: usize,
}

impl PhyloTree {
    /// Tips in left-to-right order.
    pub fn tips(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            let kids = &self.nodes[v].children;
            if kids.is_empty() {
                out.push(v);
            } else {
                stack.extend(kids.iter().rev());
            }
        }
        out
    }

    /// Trees are equal as ordered labelled trees with equal lengths,
    /// regardless of node numbering.
    pub fn same_structure(&self, other: &PhyloTree) -> bool {
        fn eq(a: &PhyloTree, va: usize, b: &PhyloTree, vb: usize) -> bool {
            let (x, y) = (&a.nodes[va], &b.nodes[vb]);
            x.label == y.label
                && x.length == y.length
                && x.children.len() == y.children.len()
                && x.children.iter().zip(&y.children).all(|(&ca, &cb)| eq(a, ca, b, cb))
        }
        eq(self, self.root, other, other.root)
    }
}

/// Probability measure placed on the tips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TipMeasure {
    /// Every tip weighs the same.
    #[default]
    Uniform,
    /// Mass proportional to the pendant edge length (an extension).
    LengthWeighted,
}

enum Depths {
    Unit(Vec<u64>),
    Length(Vec<f64>),
}

/// Tree-shape space of `tree` over its tips.
///
/// With `unit_edges` every edge has length one and depths are exact integers.
/// Otherwise every non-root node needs a nonnegative length. The result must
/// satisfy the ultra-dissimilarity axioms, which fails when a tip sits at the
/// depth of its parent (a zero-length pendant edge).
pub fn tree_shape_space(tree: &PhyloTree, unit_edges: bool, measure: TipMeasure) -> Result<UmSpace> {
    let n_nodes = tree.nodes.len();
    let mut parent = vec![usize::MAX; n_nodes];
    for (v, node) in tree.nodes.iter().enumerate() {
        for &c in &node.children {
            parent[c] = v;
        }
    }
    let mut order = vec![tree.root];
    let mut k = 0;
    while k < order.len() {
        order.extend(tree.nodes[order[k]].children.iter().copied());
        k += 1;
    }
    let edge = |v: usize| -> Result<f64> {
        if unit_edges {
            return Ok(1.0);
        }
        match tree.nodes[v].length {
            Some(l) if l >= 0.0 => Ok(l),
            Some(l) => Err(Error::Parameter(format!("negative branch length {l}"))),
            None => Err(Error::Parameter(format!(
                "node {} has no branch length; use unit edges or supply lengths",
                tree.nodes[v].label.as_deref().unwrap_or("(unlabelled)")
            ))),
        }
    };
    let depths = if unit_edges {
        let mut d = vec![0u64; n_nodes];
        for &v in &order[1..] {
            d[v] = d[parent[v]] + 1;
        }
        Depths::Unit(d)
    } else {
        let mut d = vec![0.0; n_nodes];
        for &v in &order[1..] {
            d[v] = d[parent[v]] + edge(v)?;
        }
        Depths::Length(d)
    };
    let tips = tree.tips();
    let n = tips.len();
    let lca = Lca::new(tree);
    let mut u = Array2::zeros((n, n));
    match &depths {
        Depths::Unit(d) => {
            let dmax = tips.iter().map(|&t| d[t]).max().unwrap_or(0);
            for a in 0..n {
                for b in a..n {
                    let w = if a == b { tips[a] } else { lca.query(tips[a], tips[b]) };
                    let v = (dmax - d[w]) as f64;
                    u[[a, b]] = v;
                    u[[b, a]] = v;
                }
            }
        }
        Depths::Length(d) => {
            let dmax = tips.iter().map(|&t| d[t]).fold(0.0, f64::max);
            for a in 0..n {
                for b in a..n {
                    let w = if a == b { tips[a] } else { lca.query(tips[a], tips[b]) };
                    let v = dmax - d[w];
                    u[[a, b]] = v;
                    u[[b, a]] = v;
                }
            }
        }
    }
    let mu = match measure {
        TipMeasure::Uniform => vec![1.0 / n as f64; n],
        TipMeasure::LengthWeighted => {
            let w: Vec<f64> = if tips.len() == 1 {
                vec![1.0]
            } else {
                tips.iter().map(|&t| edge(t)).collect::<Result<_>>()?
            };
            let total: f64 = w.iter().sum();
            if !(total > 0.0) || w.iter().any(|&x| x <= 0.0) {
                return Err(Error::Parameter(
                    "length-weighted measure needs positive pendant edge lengths".into(),
                ));
            }
            let mut mu: Vec<f64> = w.iter().map(|x| x / total).collect();
            let rest: f64 = mu[1..].iter().sum();
            mu[0] = 1.0 - rest;
            mu
        }
    };
    let ids = tips
        .iter()
        .enumerate()
        .map(|(k, &t)| tree.nodes[t].label.clone().unwrap_or_else(|| format!("tip{k}")))
        .collect();
    let space = UmSpace::new(ids, u, mu)?;
    space.validate(Mode::UltraDissimilarity).into_result()?;
    Ok(space)
}

/// Treegram of an ultra-dissimilarity space: a dendrogram whose leaves are
/// born at their self-dissimilarity.
pub fn treegram(space: &UmSpace) -> Result<Dendrogram> {
    space.validate(Mode::UltraDissimilarity).into_result()?;
    Ok(space.to_dendrogram())
}
