mod common;

use std::f64::consts::PI;

use common::{location_scale, nested_windows, Textbook};
use duodiv::families::{self, ExpFamilyMember, SourceParams};
use duodiv::oracle::{
    bhattacharyya_numeric, entropy_numeric, expectation_numeric, finite_diff_grad, integrate, kl_numeric,
    normalization_numeric, OracleConfig,
};
use duodiv::truncnorm::{erf, TruncNormalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_member(rng: &mut ChaCha8Rng, which: usize) -> SourceParams {
    match which % 7 {
        0 => SourceParams::Poisson {
            lambda: rng.random_range(0.2..8.0),
        },
        1 => SourceParams::Geometric {
            p: rng.random_range(0.1..0.9),
        },
        2 => SourceParams::Exponential {
            lambda: rng.random_range(0.2..5.0),
        },
        3 => SourceParams::Laplacian {
            lambda: rng.random_range(0.2..5.0),
        },
        4 => SourceParams::HalfNormal {
            sigma: rng.random_range(0.3..3.0),
        },
        5 => {
            let (m, s) = location_scale(rng);
            SourceParams::Normal { m, s }
        }
        _ => {
            let ((a, b), _) = nested_windows(rng);
            let (m, s) = location_scale(rng);
            SourceParams::TruncNormal(TruncNormalParams::new(m, s, a, b).unwrap())
        }
    }
}

fn textbook(src: SourceParams) -> Textbook {
    match src {
        SourceParams::Poisson { lambda } => Textbook::Poisson { lambda },
        SourceParams::Geometric { p } => Textbook::Geometric { p },
        SourceParams::Exponential { lambda } => Textbook::Exponential { lambda },
        SourceParams::Laplacian { lambda } => Textbook::Laplacian { lambda },
        SourceParams::HalfNormal { sigma } => Textbook::HalfNormal { sigma },
        SourceParams::Normal { m, s } => Textbook::Normal { m, s },
        SourceParams::TruncNormal(p) => Textbook::trunc(p.m, p.s, p.a, p.b),
    }
}

#[test]
fn canonical_densities_are_normalized() {
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..70 {
        let src = random_member(&mut rng, i);
        let member = ExpFamilyMember::new(src).unwrap();
        let z = normalization_numeric(&member, &cfg).unwrap();
        assert!((z.value - 1.0).abs() <= 1e-8, "{src}: mass {}", z.value);
    }
}

#[test]
fn gradient_is_expected_statistic() {
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..20 {
        let src = random_member(&mut rng, i);
        let member = ExpFamilyMember::new(src).unwrap();
        let eta = member.moment();
        let family = member.family();
        for (j, e) in eta.iter().enumerate() {
            let stat = |x: f64| family.sufficient_stat(x)[j];
            let expected = expectation_numeric(&textbook(src), &stat, &cfg).unwrap();
            assert!(
                (e - expected.value).abs() <= 1e-6 + expected.abs_error,
                "{src}: η[{j}] = {e}, E[t] = {}",
                expected.value
            );
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..35 {
        let member = ExpFamilyMember::new(random_member(&mut rng, i)).unwrap();
        let f = member.log_normalizer();
        let theta = member.natural().to_vec();
        let margin: Vec<f64> = theta.iter().map(|t| t.abs().max(1e-3)).collect();
        let (fd, err) = finite_diff_grad(&|t| f.eval(t), &theta, &margin, &cfg).unwrap();
        for ((g, d), e) in f.grad(&theta).iter().zip(&fd).zip(&err) {
            assert!(
                (g - d).abs() <= 1e-6 * g.abs().max(1.0) + 10.0 * e,
                "{}: {g} vs {d}",
                member.source()
            );
        }
    }
}

#[test]
fn kl_agrees_with_quadrature() {
    let cfg = OracleConfig::default();
    let pairs = [
        ("geometric:p=0.5", "geometric:p=0.25"),
        ("poisson:lambda=1", "geometric:p=0.5"),
        ("poisson:lambda=4.5", "geometric:p=0.2"),
        ("exponential:lambda=2", "laplacian:lambda=0.5"),
        ("halfnormal:sigma=0.7", "normal:m=0.4,s=1.3"),
        (
            "truncnormal:m=0.2,s=0.9,a=-1,b=1",
            "truncnormal:m=-0.5,s=1.4,a=-2,b=inf",
        ),
        ("normal:m=1,s=2", "normal:m=-1,s=0.5"),
    ];
    for (p, q) in pairs {
        let (sp, sq): (SourceParams, SourceParams) = (p.parse().unwrap(), q.parse().unwrap());
        let closed = families::kl(&ExpFamilyMember::new(sp).unwrap(), &ExpFamilyMember::new(sq).unwrap()).unwrap();
        let oracle = kl_numeric(&textbook(sp), &textbook(sq), &cfg).unwrap();
        let diff = (closed.unwrap_finite() - oracle.unwrap_finite()).abs();
        assert!(diff <= 1e-6 + oracle.abs_error_estimate, "{p} vs {q}: diff {diff}");
    }
    let back = kl_numeric(
        &Textbook::Laplacian { lambda: 1.0 },
        &Textbook::Exponential { lambda: 1.0 },
        &cfg,
    )
    .unwrap();
    assert!(back.is_infinite());
}

#[test]
fn bhattacharyya_agrees_with_quadrature() {
    let cfg = OracleConfig::default();
    let pairs = [
        ("poisson:lambda=2", "poisson:lambda=5"),
        ("exponential:lambda=1.5", "laplacian:lambda=0.8"),
        ("laplacian:lambda=0.8", "exponential:lambda=1.5"),
        ("halfnormal:sigma=1", "normal:m=0,s=1"),
        ("truncnormal:m=0,s=1,a=-1,b=2", "truncnormal:m=0.5,s=0.7,a=0,b=3"),
        ("truncnormal:m=0,s=1,a=-1,b=0", "truncnormal:m=0.5,s=0.7,a=1,b=3"),
    ];
    for (p, q) in pairs {
        let (sp, sq): (SourceParams, SourceParams) = (p.parse().unwrap(), q.parse().unwrap());
        for alpha in [0.25, 0.5, 0.75] {
            let closed = families::bhattacharyya(
                &ExpFamilyMember::new(sp).unwrap(),
                &ExpFamilyMember::new(sq).unwrap(),
                alpha,
            )
            .unwrap();
            let oracle = bhattacharyya_numeric(&textbook(sp), &textbook(sq), alpha, &cfg).unwrap();
            if oracle.is_infinite() {
                assert!(closed.is_infinite(), "{p} vs {q}");
                continue;
            }
            let diff = (closed.unwrap_finite() - oracle.unwrap_finite()).abs();
            assert!(
                diff <= 1e-6 + oracle.abs_error_estimate,
                "{p} vs {q} at {alpha}: diff {diff}"
            );
        }
    }
}

#[test]
fn entropy_agrees_with_quadrature() {
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..42 {
        let src = random_member(&mut rng, i);
        let closed = families::entropy(&ExpFamilyMember::new(src).unwrap()).unwrap();
        let oracle = entropy_numeric(&textbook(src), &cfg).unwrap();
        assert!(
            (closed.value - oracle.value).abs() <= 1e-6 + oracle.abs_error,
            "{src}: {} vs {}",
            closed.value,
            oracle.value
        );
    }
}

#[test]
fn erf_matches_its_integral() {
    let cfg = OracleConfig {
        abs_tol: 1e-16,
        rel_tol: 3e-14,
        ..OracleConfig::default()
    };
    for x in [0.05, 0.3, 0.9, 1.7, 2.5, 4.0] {
        let integral = integrate(&|t| (-t * t).exp(), 0.0, x, 0.0, 1.0, &cfg).unwrap();
        let reference = 2.0 / PI.sqrt() * integral.value;
        assert!(((erf(x) - reference) / reference).abs() <= 1e-13, "erf({x})");
    }
}
