mod oracle;

use extcalc::alpha::ext_type;
use extcalc::{classify_pair, AlphaError, AlphaParam, PairSpec, Vertex, VertexSet};
use oracle::{naive_classify, naive_zeta, random_graph, subsets};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_all_pairs(rng: &mut ChaCha8Rng, a: &AlphaParam) -> usize {
    let k = rng.random_range(1..=6);
    let q = rng.random_range(0..=2.min(k - 1));
    let p = rng.random_range(0.2..0.9);
    let g = random_graph(rng, k, p, q);
    let all: Vec<Vertex> = g.vertices().collect();
    let mut checked = 0;
    for h1 in subsets(&all) {
        let members: Vec<Vertex> = h1.iter().copied().collect();
        for h0 in subsets(&members) {
            let pair = PairSpec::new(
                g.clone(),
                VertexSet::new(h0.iter().copied()),
                VertexSet::new(members.clone()),
            )
            .unwrap();
            let c = classify_pair(&pair, a).unwrap();
            let o = naive_classify(&g, &h0, &h1, a.num(), a.den());
            let got = (
                c.ext_type.v as i64,
                c.ext_type.e as i64,
                c.dense,
                c.sparse,
                c.safe,
                c.rigid,
                c.hinged,
            );
            let want = (o.v, o.e, o.dense, o.sparse, o.safe, o.rigid, o.hinged);
            assert_eq!(got, want, "graph {g:?} h0 {h0:?} h1 {h1:?}");
            checked += 1;
        }
    }
    checked
}

#[test]
fn classification_matches_definitions_on_small_templates() {
    for (num, den) in [(79, 100), (701, 1000)] {
        let a = AlphaParam::validate(num, den, 8, 28).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(num as u64);
        let total: usize = (0..100).map(|_| check_all_pairs(&mut rng, &a)).sum();
        assert!(total > 1000);
    }
}

#[test]
fn zeta_matches_exhaustive_minimum() {
    let a = AlphaParam::validate(79, 100, 8, 28).unwrap();
    let (d, v, e) = naive_zeta(79, 100, 8, 28);
    assert_eq!((d, v, e), (5, 4, 5));
    assert_eq!(a.zeta_scaled(), d);
    assert_eq!((a.zeta_at().v as i64, a.zeta_at().e as i64), (v, e));
}

#[test]
fn classification_outside_the_window_is_refused() {
    let a = AlphaParam::validate(79, 100, 2, 3).unwrap();
    let g = extcalc::Graph::complete(4);
    let pair = PairSpec::new(g, VertexSet::empty(), VertexSet::range(1, 4)).unwrap();
    assert!(matches!(
        classify_pair(&pair, &a),
        Err(AlphaError::WindowExceeded { .. })
    ));
}

proptest! {
    #[test]
    fn zeta_is_the_exhaustive_minimum(num in 1i64..200, den in 2i64..200, v_max in 1u32..7, e_max in 1u32..16) {
        prop_assume!(num < den);
        match AlphaParam::validate(num, den, v_max, e_max) {
            Ok(a) => {
                let (d, v, e) = naive_zeta(a.num(), a.den(), v_max as i64, e_max as i64);
                prop_assert!(d > 0);
                prop_assert_eq!(a.zeta_scaled(), d);
                prop_assert_eq!((a.zeta_at().v as i64, a.zeta_at().e as i64), (v, e));
            }
            Err(AlphaError::WindowHit { v, e, .. }) => {
                prop_assert_eq!(v as i64 * den, e as i64 * num);
            }
            Err(other) => prop_assert!(false, "unexpected {other:?}"),
        }
    }

    #[test]
    fn dense_and_sparse_are_exclusive(seed in any::<u64>()) {
        let a = AlphaParam::validate(79, 100, 8, 28).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 5, 0.5, 1);
        let pair = PairSpec::new(g.clone(), VertexSet::empty(), VertexSet::range(1, 5)).unwrap();
        let c = classify_pair(&pair, &a).unwrap();
        prop_assert_eq!(c.ext_type, ext_type(&pair));
        prop_assert!(!(c.dense && c.sparse));
        prop_assert!(!(c.safe && c.rigid));
        prop_assert!(!c.hinged || c.rigid);
        if c.ext_type.v > 0 {
            prop_assert!(c.dense || c.sparse);
        }
    }
}
