use extcalc::experiments::{
    agreement_experiment, concentration_report, e1_bound, estimate_prob, fit_samples, kernel_census, rigid_hit_rate,
    wilson_interval, CensusOptions, DecayModel, DecaySample, ExperimentError, DEFAULT_EVAL_BUDGET, Z95,
};
use extcalc::extension::RoundCap;
use extcalc::logic::parse_formula;
use extcalc::{AlphaParam, Graph, PairSpec, VertexSet};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn alpha() -> AlphaParam {
    AlphaParam::validate(79, 100, 8, 28).unwrap()
}

const K4: &str = "exists a. exists b. exists c. exists d. R(a,b) & R(a,c) & R(a,d) & R(b,c) & R(b,d) & R(c,d)";

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn e1_sequence_count_matches_exact_product() {
    for (n, eps, ell) in [(64.0, 0.5, 4usize), (1e4, 0.6, 3), (5e5, 0.55, 4), (1e6, 0.7, 2)] {
        let size: f64 = f64::powf(n, eps);
        let m = (size / ell as f64).floor() as u64;
        let mut product = BigUint::from(1u32);
        for i in 0..m {
            // (ell * 0)^ell is read as 1
            let li = BigUint::from(if i == 0 { 1 } else { ell as u64 * i });
            product *= BigUint::from(ell as u64) * li.pow(ell as u32) * BigUint::from(4u32).pow(ell as u32);
        }
        let b = e1_bound(n, eps, ell, 0.05);
        let exact = ln_big(&product);
        assert!(
            (b.log_seq_count - exact).abs() <= 1e-9 * exact.max(1.0),
            "{n} {eps}: {} vs {exact}",
            b.log_seq_count
        );
    }
}

#[test]
fn e1_bounds_grow_with_n() {
    let mut last = e1_bound(10.0, 0.5, 4, 0.05);
    for k in 2..40 {
        let b = e1_bound(10.0 * 1.5f64.powi(k), 0.5, 4, 0.05);
        assert!(b.log_seq_count >= last.log_seq_count);
        assert!(b.log_simplified > last.log_simplified);
        assert!(b.log_expected > last.log_expected);
        last = b;
    }
}

#[test]
fn fitter_recovers_noiseless_models() {
    let ns: Vec<f64> = (4..=12).map(|k| f64::powi(2.0, k)).collect();
    let poly: Vec<DecaySample> = ns
        .iter()
        .map(|&n| DecaySample::exact(n, 0.3f64.ln() - 0.8 * n.ln()))
        .collect();
    let fit = fit_samples(&poly, &[]);
    assert_eq!(fit.model, DecayModel::Polynomial);
    assert!((fit.beta.unwrap() - 0.8).abs() < 1e-6);
    let stretched: Vec<DecaySample> = ns.iter().map(|&n| DecaySample::exact(n, -0.05 * n.powf(0.7))).collect();
    let fit = fit_samples(&stretched, &[]);
    assert_eq!(fit.model, DecayModel::StretchedExponential);
    assert!((fit.eps.unwrap() - 0.7).abs() < 0.01);
    assert_eq!(fit_samples(&stretched[..3], &[]).model, DecayModel::Degenerate);
    let flat: Vec<DecaySample> = ns.iter().map(|&n| DecaySample::exact(n, -1.0)).collect();
    assert_eq!(fit_samples(&flat, &[]).model, DecayModel::Degenerate);
}

#[test]
fn censored_points_are_checked_against_the_fit() {
    let ns: Vec<f64> = (4..=9).map(|k| f64::powi(2.0, k)).collect();
    let samples: Vec<DecaySample> = ns.iter().map(|&n| DecaySample::exact(n, -1.5 * n.ln())).collect();
    assert_eq!(fit_samples(&samples, &[(4096.0, 1e-3)]).censored_consistent, Some(true));
    assert_eq!(
        fit_samples(&samples, &[(4096.0, 1e-9)]).censored_consistent,
        Some(false)
    );
}

#[test]
fn edge_sentence_matches_closed_form() {
    let a = AlphaParam::validate(701, 1000, 8, 28).unwrap();
    let psi = parse_formula("exists x. exists y. R(x,y)").unwrap();
    let curve = estimate_prob(&psi, &a, &[3, 5, 8], 20_000, 7, DEFAULT_EVAL_BUDGET).unwrap();
    for pt in &curve.points {
        let n = pt.n as f64;
        let exact = 1.0 - (1.0 - n.powf(-a.as_f64())).powf(n * (n - 1.0) / 2.0);
        let sigma = (exact * (1.0 - exact) / pt.trials as f64).sqrt();
        assert!(
            (pt.rate() - exact).abs() < 4.0 * sigma,
            "n {}: {} vs {exact}",
            pt.n,
            pt.rate()
        );
        let (lo, hi) = wilson_interval(pt.hits, pt.trials, Z95);
        assert!(lo <= pt.rate() && pt.rate() <= hi);
    }
}

#[test]
fn estimate_rejects_bad_requests() {
    let a = alpha();
    let open = parse_formula("R(x,y)").unwrap();
    assert!(matches!(
        estimate_prob(&open, &a, &[5], 10, 0, 1e8),
        Err(ExperimentError::NotSentence(_))
    ));
    let f = parse_formula("exists x. x = x").unwrap();
    assert_eq!(
        estimate_prob(&f, &a, &[5, 5], 10, 0, 1e8),
        Err(ExperimentError::SizesNotIncreasing)
    );
    let deep = parse_formula("exists x. exists y. exists z. ~R(x,y) & ~R(y,z)").unwrap();
    assert!(matches!(
        estimate_prob(&deep, &a, &[1000], 10, 0, 1e8),
        Err(ExperimentError::Eval(_))
    ));
}

#[test]
fn k4_rate_stays_under_the_first_moment() {
    let a = alpha();
    let k4 = PairSpec::new(Graph::complete(4), VertexSet::empty(), VertexSet::range(1, 4)).unwrap();
    for n in [12, 24] {
        let r = rigid_hit_rate(&k4, &a, n, 4000, 3).unwrap();
        let p = n as f64;
        let bound = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 24.0 * p.powf(-6.0 * a.as_f64());
        assert!((r.first_moment_bound - bound).abs() < 1e-12 * bound);
        assert!(r.rate() <= bound + 4.0 * r.sigma(), "n {n}");
    }
}

#[test]
fn rigid_rate_requires_a_rigid_pair() {
    let edge = PairSpec::new(Graph::complete(2), VertexSet::new([1]), VertexSet::range(1, 2)).unwrap();
    assert_eq!(
        rigid_hit_rate(&edge, &alpha(), 20, 10, 0),
        Err(ExperimentError::NotRigid)
    );
}

#[test]
fn census_at_ell_three_finds_nothing() {
    let census = kernel_census(&alpha(), 3, &[60, 120], 40, 5, CensusOptions::default()).unwrap();
    for pt in &census.points {
        assert_eq!(pt.nonempty, 0);
        assert_eq!(pt.e1_hits, 0);
        assert_eq!(pt.histogram.get(&0), Some(&40));
    }
}

#[test]
fn vertex_edge_counts_concentrate() {
    let edge = PairSpec::new(Graph::complete(2), VertexSet::new([1]), VertexSet::range(1, 2)).unwrap();
    let a = alpha();
    let rep = concentration_report(&edge, &a, &[200, 2000], 10, 30, 0.5, 9).unwrap();
    for pt in &rep.points {
        let expected = (pt.n - 1) as f64 * (pt.n as f64).powf(-a.as_f64());
        assert!(
            (pt.mean_count - expected).abs() < 0.25 * expected,
            "n {}: {} vs {expected}",
            pt.n,
            pt.mean_count
        );
        assert_eq!(pt.embeddings, 300);
    }
    let k4 = PairSpec::new(Graph::complete(4), VertexSet::empty(), VertexSet::range(1, 4)).unwrap();
    assert_eq!(
        concentration_report(&k4, &a, &[50], 1, 1, 0.1, 0).map(|_| ()),
        Err(ExperimentError::NotSafe)
    );
}

#[test]
fn empty_kernels_carry_no_k4() {
    let psi = parse_formula(K4).unwrap();
    let rep = agreement_experiment(&psi, &alpha(), 4, 120, 60, 2, RoundCap::default(), DEFAULT_EVAL_BUDGET).unwrap();
    assert_eq!(rep.empty_kernel_true, 0);
    assert!(rep.empty_kernel_trials > 0);
    assert!(rep.all_constant());
}

#[test]
fn experiments_are_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let seed = rng.random();
    let psi = parse_formula("exists x. exists y. exists z. R(x,y) & R(y,z) & ~(x = z)").unwrap();
    let a = alpha();
    let one = estimate_prob(&psi, &a, &[20, 40], 500, seed, 1e8).unwrap();
    let two = estimate_prob(&psi, &a, &[20, 40], 500, seed, 1e8).unwrap();
    assert_eq!(one.records(), two.records());
}

#[test]
fn e1_expectation_falls_as_zeta_grows() {
    for n in [1e3, 1e5, 1e7] {
        let mut last = e1_bound(n, 0.5, 4, 0.01);
        for k in 2..=20 {
            let b = e1_bound(n, 0.5, 4, 0.01 * k as f64);
            assert!(b.log_expected < last.log_expected, "n {n} zeta {}", 0.01 * k as f64);
            last = b;
        }
    }
}

#[test]
fn estimates_agree_across_seeds() {
    let psi = parse_formula("exists x. exists y. exists z. R(x,y) & R(y,z) & ~(x = z)").unwrap();
    let a = alpha();
    let runs: Vec<_> = (0..4u64)
        .map(|s| estimate_prob(&psi, &a, &[15, 30], 800, 1000 + s, 1e8).unwrap())
        .collect();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            for (p, q) in runs[i].points.iter().zip(&runs[j].points) {
                let pooled = (p.hits + q.hits) as f64 / (p.trials + q.trials) as f64;
                let sigma = (pooled * (1.0 - pooled) * (1.0 / p.trials as f64 + 1.0 / q.trials as f64)).sqrt();
                assert!(
                    (p.rate() - q.rate()).abs() <= 4.0 * sigma,
                    "n {}: {} vs {}",
                    p.n,
                    p.rate(),
                    q.rate()
                );
            }
        }
    }
}

#[test]
fn triangle_rate_stays_under_the_first_moment() {
    let a = alpha();
    let triangle = PairSpec::new(Graph::complete(3), VertexSet::new([1]), VertexSet::range(1, 3)).unwrap();
    let n = 100;
    let r = rigid_hit_rate(&triangle, &a, n, 2000, 17).unwrap();
    let p = (n as f64).powf(-a.as_f64());
    let bound = (n - 1) as f64 * (n - 2) as f64 / 2.0 * p.powi(3);
    assert!(r.rate() <= bound + 3.0 * r.sigma(), "{} vs {bound}", r.rate());
}

#[test]
fn census_nonempty_rate_stays_under_the_k4_first_moment() {
    let a = alpha();
    let n = 100;
    let census = kernel_census(&a, 4, &[n], 500, 21, CensusOptions::default()).unwrap();
    let pt = &census.points[0];
    let p = n as f64;
    let bound = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 24.0 * p.powf(-6.0 * a.as_f64());
    let rate = pt.nonempty as f64 / pt.trials as f64;
    let sigma = (bound * (1.0 - bound) / pt.trials as f64).sqrt();
    assert!(rate <= bound + 3.0 * sigma, "{rate} vs {bound}");
}
