use ndarray::array;
use proptest::prelude::*;

use super::*;
use crate::error::Error;

fn chain() -> UmSpace {
    UmSpace::from_rows(
        &[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]],
        vec![0.2, 0.3, 0.5],
    )
    .unwrap()
}

/// Random ultrametric from a random merge order of `n` singletons.
pub(crate) fn random_ultrametric(n: usize, seed: u64) -> UmSpace {
    use rand::Rng;
    let mut rng = crate::rng::seeded(seed);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut u = Array2::zeros((n, n));
    let mut h = 0.0;
    while clusters.len() > 1 {
        h += rng.random_range(0.1..1.0);
        let a = rng.random_range(0..clusters.len());
        let mut b = rng.random_range(0..clusters.len() - 1);
        if b >= a {
            b += 1;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let merged = clusters.swap_remove(hi);
        for &i in &clusters[lo] {
            for &j in &merged {
                u[[i, j]] = h;
                u[[j, i]] = h;
            }
        }
        clusters[lo].extend(merged);
    }
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut mu: Vec<f64> = w.iter().map(|v| v / s).collect();
    let rest: f64 = mu[1..].iter().sum();
    mu[0] = 1.0 - rest;
    UmSpace::from_matrix(u, mu).unwrap()
}

#[test]
fn two_point_space_is_ultrametric() {
    let x = UmSpace::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap();
    assert!(x.validate(Mode::Ultrametric).passed);
}

#[test]
fn strong_triangle_violation_is_reported() {
    let x = UmSpace::uniform(array![[0.0, 1.0, 3.0], [1.0, 0.0, 2.0], [3.0, 2.0, 0.0]]).unwrap();
    let r = x.validate(Mode::Ultrametric);
    assert!(!r.passed);
    assert!(r
        .violations
        .contains(&Violation::StrongTriangle { i: 0, j: 2, k: 1 }));
}

#[test]
fn positive_diagonal_passes_only_as_ultra_dissimilarity() {
    // four-tip caterpillar shape space
    let x = UmSpace::uniform(array![
        [0.0, 1.0, 2.0, 3.0],
        [1.0, 0.0, 2.0, 3.0],
        [2.0, 2.0, 1.0, 3.0],
        [3.0, 3.0, 3.0, 2.0]
    ])
    .unwrap();
    assert!(x.validate(Mode::UltraDissimilarity).passed);
    let r = x.validate(Mode::Ultrametric);
    assert!(r.violations.contains(&Violation::NonzeroDiagonal { i: 2 }));
}

#[test]
fn measure_errors() {
    let u = array![[0.0, 1.0], [1.0, 0.0]];
    assert!(matches!(
        UmSpace::from_matrix(u.clone(), vec![1.0, 0.0]),
        Err(Error::NonPositiveMass { index: 1, .. })
    ));
    assert!(matches!(
        UmSpace::from_matrix(u.clone(), vec![0.5, 0.6]),
        Err(Error::MassSum { .. })
    ));
    assert!(matches!(
        UmSpace::from_matrix(u, vec![1.0]),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn quotient_of_chain_at_one() {
    let q = chain().quotient(1.0).unwrap();
    assert_eq!(q.blocks, vec![vec![0, 1], vec![2]]);
    assert_eq!(q.quotient.u(), &array![[0.0, 2.0], [2.0, 0.0]]);
    assert!((q.quotient.mu()[0] - 0.5).abs() < 1e-15);
    assert_eq!(q.quotient.mu()[1], 0.5);
}

#[test]
fn quotient_extremes() {
    let x = chain();
    assert_eq!(x.quotient(5.0).unwrap().blocks.len(), 1);
    assert_eq!(x.quotient(0.0).unwrap().blocks.len(), 3);
}

#[test]
fn spectra() {
    assert_eq!(UmSpace::equidistant(2, 1.0).spectrum(), vec![0.0, 1.0]);
    assert_eq!(chain().spectrum(), vec![0.0, 1.0, 2.0]);
    assert_eq!(chain().snowflake(3.0).unwrap().spectrum(), vec![0.0, 1.0, 8.0]);
}

#[test]
fn snowflake_of_two_points() {
    assert_eq!(
        UmSpace::equidistant(2, 2.0).snowflake(2.0).unwrap(),
        UmSpace::equidistant(2, 4.0)
    );
    assert_eq!(chain().snowflake(1.0).unwrap(), chain());
    assert!(chain().snowflake(0.5).is_err());
}

#[test]
fn diam_p_values() {
    assert_eq!(UmSpace::equidistant(2, 1.0).diam_p(1.0).unwrap(), 0.5);
    let x = UmSpace::equidistant(3, 1.0).with_mu(vec![0.25, 0.25, 0.5]).unwrap();
    assert!((x.diam_p(1.0).unwrap() - 0.625).abs() < 1e-15);
    assert_eq!(x.diam_p(f64::INFINITY).unwrap(), 1.0);
    assert!(x.diam_p(0.5).is_err());
}

#[test]
fn dendrogram_of_two_points() {
    let d = UmSpace::equidistant(2, 1.0).to_dendrogram();
    let root = d.node(d.root());
    assert_eq!(root.height, 1.0);
    assert_eq!(root.children.len(), 2);
    assert!(root.children.iter().all(|&c| d.node(c).is_leaf()));
}

#[test]
fn dendrogram_of_chain() {
    let d = chain().to_dendrogram();
    let root = d.node(d.root());
    assert_eq!(root.height, 2.0);
    let kids: Vec<&DNode> = root.children.iter().map(|&c| d.node(c)).collect();
    let leaf = kids.iter().find(|k| k.is_leaf()).unwrap();
    assert_eq!(leaf.point, Some(2));
    let inner = kids.iter().find(|k| !k.is_leaf()).unwrap();
    assert_eq!(inner.height, 1.0);
    assert!((inner.mass - 0.5).abs() < 1e-15);
}

#[test]
fn multiway_merge_is_one_node() {
    let d = UmSpace::equidistant(4, 1.0).to_dendrogram();
    assert_eq!(d.node(d.root()).children.len(), 4);
    assert_eq!(d.nodes().len(), 5);
}

#[test]
fn dendrogram_json_round_trip() {
    let x = chain();
    let d = x.to_dendrogram();
    let back = Dendrogram::from_json(&d.to_json()).unwrap();
    let y = back.to_space().unwrap();
    // leaves are renumbered in document order; compare by id
    for i in 0..3 {
        for j in 0..3 {
            let a = x.ids().iter().position(|s| *s == y.ids()[i]).unwrap();
            let b = x.ids().iter().position(|s| *s == y.ids()[j]).unwrap();
            assert_eq!(y.u()[[i, j]], x.u()[[a, b]]);
        }
    }
}

#[test]
fn space_json_round_trip() {
    let x = chain();
    let text = x.to_json().to_string();
    let (y, kind) = UmSpace::from_json_str(&text).unwrap();
    assert_eq!(x, y);
    assert_eq!(kind, Some(Mode::Ultrametric));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dendrogram_round_trip_is_exact(n in 1usize..10, seed in any::<u64>()) {
        let x = random_ultrametric(n, seed);
        prop_assert_eq!(Dendrogram::from_space(&x).to_space().unwrap(), x);
    }

    #[test]
    fn snowflake_stays_ultrametric(n in 1usize..10, seed in any::<u64>(), p in 1.0f64..4.0) {
        let x = random_ultrametric(n, seed);
        prop_assert!(x.snowflake(p).unwrap().validate(Mode::Ultrametric).passed);
    }

    #[test]
    fn snowflake_composes(n in 1usize..8, seed in any::<u64>(), p in 1.0f64..3.0, q in 1.0f64..3.0) {
        let x = random_ultrametric(n, seed);
        let a = x.snowflake(p).unwrap().snowflake(q).unwrap();
        let b = x.snowflake(p * q).unwrap();
        for (s, t) in a.u().iter().zip(b.u().iter()) {
            prop_assert!((s - t).abs() <= 1e-9 * t.max(1.0));
        }
    }

    #[test]
    fn quotients_compose(n in 1usize..10, seed in any::<u64>(), s in 0.0f64..6.0, t in 0.0f64..6.0) {
        let x = random_ultrametric(n, seed);
        let twice = x.quotient(t).unwrap().quotient.quotient(s).unwrap().quotient;
        let once = x.quotient(s.max(t)).unwrap().quotient;
        prop_assert_eq!(twice.len(), once.len());
        prop_assert_eq!(
            twice.to_dendrogram().canonical_form(crate::gw::SigMode::Weighted),
            once.to_dendrogram().canonical_form(crate::gw::SigMode::Weighted)
        );
    }

    #[test]
    fn block_count_is_nonincreasing(n in 1usize..10, seed in any::<u64>()) {
        let x = random_ultrametric(n, seed);
        let spec = x.spectrum();
        prop_assert!(spec.len() <= n * (n - 1) / 2 + 1);
        let counts: Vec<usize> = spec.iter().map(|&t| x.quotient(t).unwrap().blocks.len()).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    }
}
