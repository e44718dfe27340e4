use hyperteam_core::experiments::{self, CommunitySpec, Scheme};
use hyperteam_core::{instance, rng};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewiring_conserves_both_marginals(seed in any::<u64>(), c in 2usize..6, scheme_idx in 0usize..4) {
        let scheme = Scheme::ALL[scheme_idx];
        let spec = CommunitySpec::new(c, 5, 4, scheme).unwrap();
        let base = experiments::build_communities(&spec).unwrap();
        let wired = experiments::rewire(&base, &spec, &mut rng::seeded(seed)).unwrap();
        prop_assert_eq!(wired.assignment().row_sums(), base.assignment().row_sums());
        prop_assert_eq!(wired.assignment().col_sums(), base.assignment().col_sums());
        prop_assert!(instance::is_connected(&wired));
    }
}

#[test]
fn centroid_schemes_need_enough_memberships() {
    assert!(CommunitySpec::new(6, 4, 3, Scheme::OneNode).is_err());
    assert!(CommunitySpec::new(6, 3, 4, Scheme::OneEdge).is_err());
    assert!(CommunitySpec::new(6, 3, 3, Scheme::Head2Tail).is_ok());
}

#[test]
fn noisy_power_law_slope_is_recovered() {
    let mut r = rng::seeded(9);
    let xs: Vec<f64> = (1..=50).map(|i| 10.0 + 4.0 * i as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| 3.0 * x.powf(-1.5) * (1.0 + 0.02 * (r.gen::<f64>() - 0.5)))
        .collect();
    let fit = experiments::fit_power_law(&xs, &ys).unwrap();
    assert!((fit.exponent + 1.5).abs() < 0.05, "{}", fit.exponent);
}

#[test]
fn exact_power_law_and_constant() {
    let xs = [1.0, 2.0, 4.0, 8.0];
    let fit = experiments::fit_power_law(&xs, &xs.map(|x| x.powi(-2))).unwrap();
    assert!((fit.exponent + 2.0).abs() < 1e-12);
    assert!((fit.r2 - 1.0).abs() < 1e-12);
    let flat = experiments::fit_power_law(&xs, &[3.0; 4]).unwrap();
    assert!(flat.exponent.abs() < 1e-12);
    assert!(experiments::fit_power_law(&xs, &[1.0, -1.0, 1.0, 1.0]).is_err());
}

#[test]
fn swap_rejects_non_unit_or_existing_memberships() {
    let mut a = hyperteam_core::Assignment::from_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
    assert!(experiments::swap_memberships(&mut a, 0, 0, 1, 1));
    assert_eq!(a.row(0), &[0, 1]);
    assert_eq!(a.row(1), &[1, 0]);
    assert!(!experiments::swap_memberships(&mut a, 2, 0, 0, 1));
}
