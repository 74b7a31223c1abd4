use countcompat::families::{FamilyDescriptor, MarkovChainParams};
use countcompat::oracle::{affine_deviation, common_poisson_model, conditional_expectation, moments, pairwise_poisson_model};

#[test]
fn pairwise_model_fails_trivariate_linearity() {
    for rates in [[1.0; 6], [0.5, 1.0, 1.5, 0.3, 0.6, 0.9]] {
        let pmf = pairwise_poisson_model(rates, 25).unwrap();
        for target in 0..3 {
            let dev = affine_deviation(&pmf, target).unwrap().max_abs_deviation;
            assert!(dev > 1e-4, "{rates:?} target {target}: {dev:e}");
        }
    }
}

#[test]
fn common_shock_model_is_pairwise_linear_but_not_jointly() {
    let pmf = common_poisson_model([1.0; 4], 30).unwrap();
    let joint = affine_deviation(&pmf, 0).unwrap().max_abs_deviation;
    assert!(joint > 1e-4, "{joint:e}");
    for pair in [[0, 1], [0, 2], [1, 2]] {
        let m = pmf.marginalize(&pair).unwrap();
        for target in 0..2 {
            let fit = affine_deviation(&m, target).unwrap();
            assert!(fit.max_abs_deviation < 1e-6, "{pair:?}: {:e}", fit.max_abs_deviation);
            assert!((fit.slopes[0] - 0.5).abs() < 1e-6);
            assert!((fit.intercept - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn markov_chain_middle_coordinate_is_not_affine() {
    let desc = FamilyDescriptor::MarkovChain(MarkovChainParams::new(1.0, 0.5, 0.5, 0.5).unwrap());
    let built = desc.build(None).unwrap();
    let dev = affine_deviation(&built.pmf, 1).unwrap().max_abs_deviation;
    assert!(dev > 1e-4, "{dev:e}");
}

#[test]
fn ce_table_matches_closed_form_for_independent_poisson() {
    let desc = FamilyDescriptor::IndependentPoisson { lambda_x: 1.5, lambda_y: 2.0 };
    let pmf = desc.build(Some(40)).unwrap().pmf;
    let table = conditional_expectation(&pmf, 1).unwrap();
    for x in 0..10 {
        let m = table.mean_at(&[x]).unwrap();
        assert!((m - 2.0).abs() < 1e-10, "x {x}: {m}");
    }
    let csv = table.to_csv();
    assert!(csv.lines().count() > 10);
    let mom = moments(&pmf);
    assert!(mom.correlation(0, 1).abs() < 1e-12);
}
