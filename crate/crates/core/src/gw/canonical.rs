use ndarray::Array2;

use super::{GwResult, Matching};
use crate::error::Result;
use crate::spaces::{Dendrogram, Mode, UmSpace};
use crate::tol::dedup_sorted;
use crate::transport::Coupling;

/// Order-invariant signature of a rooted tree with quantized heights and
/// masses. Two dendrograms have equal forms exactly when a height- and
/// mass-preserving rooted isomorphism exists between them (at the
/// quantization resolution).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanonicalForm {
    Leaf {
        height: i64,
        mass: i64,
        id: Option<String>,
    },
    Node {
        height: i64,
        mass: i64,
        children: Vec<CanonicalForm>,
    },
}

/// Which node attributes enter a [`CanonicalForm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigMode {
    /// Heights, masses and leaf ids.
    Labeled,
    /// Heights and masses.
    Weighted,
    /// Heights only.
    Unweighted,
}

/// Descending sweep over the merged spectrum. Returns the smallest level at
/// which the quotients agree, with the index of the first failing level.
fn sweep(dx: &Dendrogram, dy: &Dendrogram, levels_desc: &[f64], mode: SigMode) -> (f64, Option<usize>) {
    for (idx, &t) in levels_desc.iter().enumerate() {
        let same = dx.cut(t).canonical_form(mode) == dy.cut(t).canonical_form(mode);
        if !same {
            // both quotients are single points at the top level
            assert!(idx > 0, "quotients differ at the largest level {t}");
            return (levels_desc[idx - 1], Some(idx));
        }
    }
    (0.0, None)
}

fn merged_levels(x: &UmSpace, y: &UmSpace) -> Vec<f64> {
    let mut all = x.spectrum();
    all.extend(y.spectrum());
    let mut levels = dedup_sorted(all);
    levels.reverse();
    levels
}

/// Exact `uGW_∞`: the smallest spectrum level `t` at which the weighted
/// quotients `X_t` and `Y_t` are isomorphic.
///
/// The certificate is the block matching at that level and the coupling that
/// spreads each matched pair of blocks as a product measure; its
/// `∞`-ultra-distortion equals the returned value.
pub fn ugw_inf_exact(x: &UmSpace, y: &UmSpace) -> Result<GwResult> {
    x.validate(Mode::Ultrametric).into_result()?;
    y.validate(Mode::Ultrametric).into_result()?;
    let (dx, dy) = (x.to_dendrogram(), y.to_dendrogram());
    let levels = merged_levels(x, y);
    let (t, _) = sweep(&dx, &dy, &levels, SigMode::Weighted);
    let (cx, cy) = (dx.cut(t), dy.cut(t));
    let mut matching = Vec::new();
    match_blocks(&cx, cx.root(), &cy, cy.root(), &mut matching);
    matching.sort();
    let coupling = block_coupling(x, y, &matching);
    Ok(GwResult {
        value: t,
        method: "ugw-inf-exact",
        coupling: Some(coupling),
        level: Some(t),
        matching: Some(matching),
        trace: Vec::new(),
    })
}

/// Exact `uGH`: the same sweep with masses ignored.
pub fn ugh_exact(x: &UmSpace, y: &UmSpace) -> Result<f64> {
    x.validate(Mode::Ultrametric).into_result()?;
    y.validate(Mode::Ultrametric).into_result()?;
    let levels = merged_levels(x, y);
    Ok(sweep(&x.to_dendrogram(), &y.to_dendrogram(), &levels, SigMode::Unweighted).0)
}

/// Pair up isomorphic subtrees of two cut dendrograms with equal weighted forms.
fn match_blocks(a: &Dendrogram, va: usize, b: &Dendrogram, vb: usize, out: &mut Matching) {
    let (na, nb) = (a.node(va), b.node(vb));
    if na.is_leaf() {
        out.push((members(na.id.as_deref()), members(nb.id.as_deref())));
        return;
    }
    let keyed = |d: &Dendrogram, v: usize| {
        let mut k: Vec<_> = d
            .node(v)
            .children
            .iter()
            .map(|&c| (d.signature(c, SigMode::Weighted), c))
            .collect();
        k.sort();
        k
    };
    for ((_, ca), (_, cb)) in keyed(a, va).into_iter().zip(keyed(b, vb)) {
        match_blocks(a, ca, b, cb, out);
    }
}

fn members(id: Option<&str>) -> Vec<usize> {
    let mut v: Vec<usize> = id
        .unwrap_or_default()
        .split('+')
        .filter_map(|s| s.parse().ok())
        .collect();
    v.sort_unstable();
    v
}

/// `π = Σ_(A,B) μ_X|_A ⊗ μ_Y|_B / μ_X(A)`.
pub(crate) fn block_coupling(x: &UmSpace, y: &UmSpace, matching: &Matching) -> Coupling {
    let mut pi = Array2::zeros((x.len(), y.len()));
    for (a, b) in matching {
        let mass: f64 = a.iter().map(|&i| x.mu()[i]).sum();
        for &i in a {
            for &j in b {
                pi[[i, j]] = x.mu()[i] * y.mu()[j] / mass;
            }
        }
    }
    Coupling::from_matrix_unchecked(pi)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::spaces::tests::random_ultrametric;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ugh_is_below_ugw_inf(sx in any::<u64>(), sy in any::<u64>(), n in 1usize..7, m in 1usize..7) {
            let (x, y) = (random_ultrametric(n, sx), random_ultrametric(m, sy));
            prop_assert!(ugh_exact(&x, &y).unwrap() <= ugw_inf_exact(&x, &y).unwrap().value);
        }

        #[test]
        fn failures_persist_below_the_first_one(sx in any::<u64>(), sy in any::<u64>(), n in 1usize..7, m in 1usize..7) {
            let (x, y) = (random_ultrametric(n, sx), random_ultrametric(m, sy));
            let (dx, dy) = (x.to_dendrogram(), y.to_dendrogram());
            let levels = merged_levels(&x, &y);
            if let (_, Some(first)) = sweep(&dx, &dy, &levels, SigMode::Weighted) {
                for &t in &levels[first..] {
                    prop_assert_ne!(
                        dx.cut(t).canonical_form(SigMode::Weighted),
                        dy.cut(t).canonical_form(SigMode::Weighted)
                    );
                }
            }
        }

        #[test]
        fn certificate_attains_the_value(sx in any::<u64>(), sy in any::<u64>(), n in 1usize..7, m in 1usize..7) {
            let (x, y) = (random_ultrametric(n, sx), random_ultrametric(m, sy));
            let r = ugw_inf_exact(&x, &y).unwrap();
            let c = r.coupling.unwrap();
            prop_assert!(c.marginal_error(x.mu(), y.mu()) < 1e-12);
            prop_assert_eq!(crate::gw::dis_ult(&x, &y, &c, f64::INFINITY).unwrap(), r.value);
        }
    }
}
