use duodiv::centroids::{CentroidProblem, Side};
use duodiv::divergences::{bregman, DuoPair};
use duodiv::families::SourceParams;
use duodiv::generators::{legendre_conjugate, Exponential, NegLog, Quadratic};
use duodiv::truncnorm::{erf, log_normalizer_source, moment_params, TruncNormalLogNormalizer, TruncNormalParams};
use duodiv::ConvexGenerator;
use proptest::prelude::*;

fn bound() -> impl Strategy<Value = f64> {
    prop_oneof![1 => Just(f64::INFINITY), 3 => 0.3..4.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn erf_is_odd(x in -8.0..8.0f64) {
        prop_assert_eq!(erf(-x), -erf(x));
    }

    #[test]
    fn log_normalizer_grows_with_window(
        m in -1.0..1.0f64,
        s in 0.3..2.0f64,
        a in 0.2..3.0f64,
        b in 0.2..3.0f64,
        extra_a in 0.0..2.0f64,
        extra_b in 0.0..2.0f64,
    ) {
        let inner = TruncNormalParams::new(m, s, -a, b).unwrap();
        let outer = TruncNormalParams::new(m, s, -a - extra_a, b + extra_b).unwrap();
        let (fi, fo) = (log_normalizer_source(&inner).unwrap(), log_normalizer_source(&outer).unwrap());
        prop_assert!(fo >= fi - 1e-14, "{} < {}", fo, fi);
    }

    #[test]
    fn nested_windows_dominate(a in 0.2..3.0f64, b in 0.2..3.0f64, t1 in -2.0..2.0f64, t2 in -3.0..-0.1f64) {
        let inner = TruncNormalLogNormalizer::new(-a, b).unwrap();
        let outer = TruncNormalLogNormalizer::untruncated();
        prop_assert!(outer.eval(&[t1, t2]) >= inner.eval(&[t1, t2]));
        prop_assert!(DuoPair::new(&outer, &inner).is_ok());
    }

    #[test]
    fn bregman_is_nonnegative(x in -5.0..5.0f64, y in -5.0..5.0f64, c in 0.1..5.0f64) {
        let (e, n) = (Exponential::default(), NegLog::new(c, 0.0));
        prop_assert!(bregman(&e, &[x], &[y]).unwrap().unwrap_finite() >= 0.0);
        let (u, v) = ((x.abs() + 0.1), (y.abs() + 0.1));
        prop_assert!(bregman(&n, &[u], &[v]).unwrap().unwrap_finite() >= 0.0);
    }

    #[test]
    fn duo_bregman_is_nonnegative(a in 1.0..4.0f64, x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let (f1, f2) = (Quadratic::new(a), Quadratic::new(1.0));
        let pair = DuoPair::new(&f1, &f2).unwrap();
        prop_assert!(pair.duo_bregman(&[x], &[y]).unwrap().unwrap_finite() >= 0.0);
    }

    #[test]
    fn centroids_ignore_order(pts in prop::collection::vec(-3.0..3.0f64, 2..8), left in any::<bool>()) {
        let f = Exponential::default();
        let side = if left { Side::Left } else { Side::Right };
        let solve = |v: &[f64]| {
            let points = v.iter().map(|p| vec![*p]).collect();
            CentroidProblem::new(DuoPair::new(&f, &f).unwrap(), points, side).unwrap().solve().unwrap()[0]
        };
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert!((solve(&pts) - solve(&rev)).abs() <= 1e-12);
    }

    #[test]
    fn centroid_of_one_point_is_the_point(x in -3.0..3.0f64, left in any::<bool>()) {
        let (f1, f2) = (Exponential::default(), Exponential::default());
        let side = if left { Side::Left } else { Side::Right };
        let prob = CentroidProblem::new(DuoPair::new(&f1, &f2).unwrap(), vec![vec![x]], side).unwrap();
        prop_assert!((prob.solve().unwrap()[0] - x).abs() <= 1e-12);
    }

    #[test]
    fn spec_strings_round_trip(
        m in -10.0..10.0f64,
        s in 0.01..10.0f64,
        a in bound(),
        b in bound(),
        lambda in 1e-3..50.0f64,
        p in 0.001..0.999f64,
    ) {
        let all = [
            SourceParams::Poisson { lambda },
            SourceParams::Geometric { p },
            SourceParams::Exponential { lambda },
            SourceParams::Laplacian { lambda },
            SourceParams::HalfNormal { sigma: s },
            SourceParams::Normal { m, s },
            SourceParams::TruncNormal(TruncNormalParams::new(m, s, -a, b).unwrap()),
        ];
        for src in all {
            let back: SourceParams = src.to_string().parse().unwrap();
            prop_assert_eq!(back, src);
        }
    }

    #[test]
    fn natural_domain_nests(t1 in -5.0..5.0f64, t2 in -5.0..-1e-3f64, a in bound(), b in bound()) {
        let f1 = TruncNormalLogNormalizer::untruncated();
        let f2 = TruncNormalLogNormalizer::new(-a, b).unwrap();
        if f1.domain().contains(&[t1, t2]) {
            prop_assert!(f2.domain().contains(&[t1, t2]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn truncated_conjugate_is_consistent(
        m in -1.0..1.0f64,
        s in 0.5..2.0f64,
        a in 0.2..3.0f64,
        b in bound(),
    ) {
        let p = TruncNormalParams::new(m, s, -a, b).unwrap();
        let f = TruncNormalLogNormalizer::new(p.a, p.b).unwrap();
        let theta = p.natural();
        let eta = moment_params(&p).unwrap();
        let conj = legendre_conjugate(&f, &eta).unwrap();
        let gap = f.eval(&theta) + conj - (theta[0] * eta[0] + theta[1] * eta[1]);
        prop_assert!(gap.abs() <= 1e-8, "F + F* - θη = {}", gap);
    }
}

#[test]
fn wide_windows_recover_the_normal() {
    let p = TruncNormalParams::normal(0.3, 1.2).unwrap();
    let full = log_normalizer_source(&p).unwrap();
    let mut previous = f64::INFINITY;
    for l in [1.5, 3.0, 6.0] {
        let trunc = TruncNormalParams::new(0.3, 1.2, -l, l).unwrap();
        let gap = full - log_normalizer_source(&trunc).unwrap();
        assert!(gap >= 0.0 && gap < previous, "L = {l}: gap {gap}");
        previous = gap;
    }
    for l in [10.0, 20.0, 40.0] {
        let trunc = TruncNormalParams::new(0.3, 1.2, -l, l).unwrap();
        let gap = full - log_normalizer_source(&trunc).unwrap();
        assert!(gap.abs() < 1e-12, "L = {l}: gap {gap}");
        let (mu, var) = duodiv::truncnorm::trunc_moments(&trunc).unwrap();
        assert!((mu - 0.3).abs() < 1e-12 && (var - 1.44).abs() < 1e-12);
    }
}
