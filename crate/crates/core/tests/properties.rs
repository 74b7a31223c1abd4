use proptest::prelude::*;

use countcompat::dists::CountDistribution::{self, *};
use countcompat::families::{build_theta_family, FamilyDescriptor};
use countcompat::lince::{
    classify_theta_domain, solve_feasibility, theta_region, verify_certificate, LpOutcome, ThetaRegion, LP_RESIDUAL,
};
use countcompat::oracle::affine_deviation;
use countcompat::series::{bivariate_real_power, pgf_to_pmf, series_mul, series_real_power};
use countcompat::simulate::{gibbs_run, sample_family, ConditionalSpec};
use countcompat::{Bivariate, LinearCe, Series};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn law() -> impl Strategy<Value = CountDistribution> {
    prop_oneof![
        (0.05f64..8.0).prop_map(|lambda| Poisson { lambda }),
        (0.2f64..6.0, 0.2f64..0.95).prop_map(|(r, p)| NegBinomial { r, p }),
        (0.2f64..0.95).prop_map(|p| Geometric { p }),
        (0.01f64..0.99).prop_map(|p| Bernoulli { p }),
        (0.0f64..0.99, 0.05f64..2.0).prop_map(|(f, d)| ThetaRatio { theta_num: f * d, theta_den: d }),
        (0.5f64..4.0, 3.5f64..12.0, 0.5f64..4.0).prop_map(|(r, alpha1, alpha2)| BetaNB { r, alpha1, alpha2 }),
        (0u64..20).prop_map(|k| Degenerate { k }),
    ]
}

fn zero_free_on_unit_disc() -> impl Strategy<Value = CountDistribution> {
    prop_oneof![
        (0.05f64..8.0).prop_map(|lambda| Poisson { lambda }),
        (0.2f64..6.0, 0.2f64..0.95).prop_map(|(r, p)| NegBinomial { r, p }),
        (0.2f64..0.95).prop_map(|p| Geometric { p }),
        (0.01f64..0.45).prop_map(|p| Bernoulli { p }),
        (0.0f64..0.99, 0.05f64..2.0).prop_map(|(f, d)| ThetaRatio { theta_num: f * d, theta_den: d }),
    ]
}

fn light_tailed() -> impl Strategy<Value = CountDistribution> {
    prop_oneof![
        (0.3f64..50.0).prop_map(|lambda| Poisson { lambda }),
        (0.001f64..0.999).prop_map(|p| Bernoulli { p }),
        (0u64..1000).prop_map(|k| Degenerate { k }),
    ]
}

fn mass_up_to(d: &CountDistribution, k: u64) -> f64 {
    (0..=k).map(|j| d.pmf(j).unwrap()).sum()
}

fn twelve_sd_point(d: &CountDistribution) -> u64 {
    (d.mean().unwrap() + 12.0 * d.std_dev().unwrap()).ceil() as u64
}

#[test]
fn twelve_sd_bound_misses_exponential_tails() {
    for d in [Geometric { p: 0.5 }, NegBinomial { r: 2.0, p: 0.2 }, Poisson { lambda: 0.05 }] {
        let k = twelve_sd_point(&d);
        assert!(1.0 - mass_up_to(&d, k) > 1e-8, "{d}");
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn pgf_coefficients_match_pmf(d in law()) {
        let s: Series = d.pgf_series(50).unwrap();
        let pmf = pgf_to_pmf(&s).unwrap();
        for k in 0..=50 {
            prop_assert!((pmf.probs[k] - d.pmf(k as u64).unwrap()).abs() <= 1e-12, "{d} k {k}");
        }
        let total: f64 = s.coeffs().iter().sum();
        prop_assert!((total - pmf.captured_mass).abs() <= 1e-14);
    }

    #[test]
    fn captured_mass_at_twelve_sd(d in light_tailed()) {
        let k = twelve_sd_point(&d);
        let mass = mass_up_to(&d, k);
        prop_assert!(mass >= 1.0 - 1e-8, "{d}: mass {mass} at K = {k}");
    }

    #[test]
    fn theta_ratio_without_numerator_is_geometric(t in 0.01f64..20.0) {
        let ratio = ThetaRatio { theta_num: 0.0, theta_den: t };
        let geo = Geometric { p: 1.0 / (1.0 + t) };
        for k in 0..=50 {
            prop_assert_eq!(ratio.pmf(k).unwrap(), geo.pmf(k).unwrap());
        }
    }

    #[test]
    fn real_powers_add(d in zero_free_on_unit_disc(), e1 in 0.05f64..3.0, e2 in 0.05f64..3.0) {
        let base: Series = d.pgf_series(40).unwrap();
        let joint = series_real_power(&base, e1 + e2).unwrap();
        let split = series_mul(&series_real_power(&base, e1).unwrap(), &series_real_power(&base, e2).unwrap()).unwrap();
        for (x, y) in joint.coeffs().iter().zip(split.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn bivariate_power_reduces_on_the_u_axis(a in 0.0f64..3.0, delta in 0.05f64..5.0) {
        let base = Bivariate::shifted_bilinear(a, 0.0, 0.0, 30);
        let biv = bivariate_real_power(&base, -delta).unwrap();
        let uni = series_real_power(&base.u_axis(), -delta).unwrap();
        for i in 0..=30 {
            prop_assert!((biv.get(i, 0) - uni.coeff(i)).abs() <= 1e-13);
            for j in 1..=30 {
                prop_assert!(biv.get(i, j).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>(), lambda0 in 0.1f64..3.0) {
        let desc = FamilyDescriptor::TrivariatePoisson { lambda0, lambda1: 1.0, lambda2: 2.0 };
        let a = sample_family(&desc, 500, seed).unwrap();
        let b = sample_family(&desc, 500, seed).unwrap();
        prop_assert_eq!(a.data(), b.data());
        let spec = ConditionalSpec::LinearPoisson { a: 0.5, b: 1.0, c: 0.5, d: 1.0 };
        let g1 = gibbs_run(&spec, 300, 50, seed).unwrap();
        let g2 = gibbs_run(&spec, 300, 50, seed).unwrap();
        prop_assert_eq!(g1.data(), g2.data());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn theta_parameters_reproduce_the_conditional_means(
        a in 0.1f64..0.9,
        c in 0.1f64..0.9,
        d in 0.3f64..2.0,
        t in 0.05f64..0.95,
    ) {
        prop_assume!((a - c).abs() > 0.02);
        let root = (a / c).sqrt();
        let edge = a * (1.0 - c) / (c * (1.0 - a));
        let b = d * (root + t * (edge - root));
        let domain = classify_theta_domain(a, b, c, d).unwrap();
        prop_assert!(matches!(domain.region, ThetaRegion::D | ThetaRegion::E));
        let built = build_theta_family(domain.params.unwrap(), None).unwrap();
        prop_assume!(built.pmf.captured_mass() > 1.0 - 1e-9);
        let fx = affine_deviation(&built.pmf, 0).unwrap();
        let fy = affine_deviation(&built.pmf, 1).unwrap();
        prop_assert!((fx.slopes[0] - c).abs() < 1e-6 && (fx.intercept - d).abs() < 1e-6, "{fx:?}");
        prop_assert!((fy.slopes[0] - a).abs() < 1e-6 && (fy.intercept - b).abs() < 1e-6, "{fy:?}");
    }

    #[test]
    fn lp_outcome_is_a_valid_alternative(
        a in 0.05f64..2.5,
        c in 0.05f64..2.5,
        b in 0.05f64..3.0,
        d in 0.05f64..3.0,
        n in 3usize..10,
    ) {
        let spec = LinearCe::bivariate(a, b, c, d).unwrap();
        match solve_feasibility(&spec, n).unwrap() {
            LpOutcome::Feasible(sol) => {
                prop_assert!(sol.residual <= LP_RESIDUAL);
                prop_assert!(sol.pmf.probs().iter().all(|&p| p >= 0.0));
            }
            LpOutcome::Infeasible(cert) => prop_assert!(verify_certificate(&cert, &spec)),
        }
    }
}

fn region_predicates(a: f64, b: f64, c: f64, d: f64) -> [bool; 5] {
    let r = b / d;
    let root = (a / c).sqrt();
    let edge = a * (1.0 - c) / (c * (1.0 - a));
    [
        a >= 1.0 && c < 1.0 && r > root,
        c >= 1.0 && a < 1.0 && r < root,
        a == c && a < 1.0 && b == d,
        c < a && a < 1.0 && root < r && r < edge,
        a < c && c < 1.0 && edge < r && r < root,
    ]
}

#[test]
fn theta_regions_are_exclusive() {
    let tags = [ThetaRegion::A, ThetaRegion::B, ThetaRegion::C, ThetaRegion::D, ThetaRegion::E];
    for i in 1..=50 {
        for j in 1..=50 {
            let (a, c) = (i as f64 / 25.0, j as f64 / 25.0);
            for k in 1..=10 {
                for l in 1..=10 {
                    let (b, d) = (k as f64 / 4.0, l as f64 / 4.0);
                    let hits = region_predicates(a, b, c, d);
                    assert!(hits.iter().filter(|&&h| h).count() <= 1, "({a},{b},{c},{d})");
                    let want = hits.iter().position(|&h| h).map_or(ThetaRegion::Outside, |p| tags[p]);
                    assert_eq!(theta_region(a, b, c, d), want, "({a},{b},{c},{d})");
                }
            }
        }
    }
}
