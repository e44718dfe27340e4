mod common;

use approx::assert_abs_diff_eq;
use hyperteam_core::spectral::{self, Connectivity, SpectralBundle};
use hyperteam_core::{rng, Assignment};
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn two_agents_one_task_exact() {
    let a = Assignment::from_rows(&[vec![1], vec![1]]);
    let b = SpectralBundle::compute(&[2], &a, Connectivity::Require).unwrap();
    let expected = [[0.25, -0.25], [-0.25, 0.25]];
    for i in 0..2 {
        for j in 0..2 {
            assert_abs_diff_eq!(b.l[(i, j)], expected[i][j], epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(b.mu2(), 0.5, epsilon = 1e-12);
}

#[test]
fn three_agents_one_task_exact() {
    let a = Assignment::from_rows(&[vec![1], vec![1], vec![1]]);
    let b = SpectralBundle::compute(&[3], &a, Connectivity::Require).unwrap();
    assert_abs_diff_eq!(b.mu2(), 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn disconnected_requires_opt_in() {
    let a = Assignment::from_rows(&[vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]]);
    assert!(SpectralBundle::compute(&[2, 2], &a, Connectivity::Require).is_err());
    let b = SpectralBundle::compute(&[2, 2], &a, Connectivity::AllowDisconnected).unwrap();
    assert_eq!(b.components, 2);
    assert_abs_diff_eq!(b.mu2(), 0.0, epsilon = 1e-12);
}

#[test]
fn power_iteration_agrees_with_direct_solve() {
    let mut r = rng::seeded(11);
    for _ in 0..20 {
        let (e, rows) = common::random_connected(&mut r, 25, 8);
        let a = Assignment::from_rows(&rows);
        let p = spectral::transition_matrix(&spectral::EdvwMatrices::build(&e, &a).unwrap()).unwrap();
        let direct = spectral::stationary_direct(&p).unwrap();
        let power = spectral::stationary_power(&p, 1e-14, 1_000_000).unwrap();
        assert!((direct - power).amax() < 1e-9);
    }
}

fn check_connected_case(e: &[u64], rows: &[Vec<u64>]) {
    let a = Assignment::from_rows(rows);
    let b = SpectralBundle::compute(e, &a, Connectivity::Require).unwrap();
    let n = rows.len();
    for i in 0..n {
        assert_abs_diff_eq!(b.p.row(i).sum(), 1.0, epsilon = 1e-10);
    }
    let pi_row = b.pi.transpose();
    assert!((&pi_row * &b.p - &pi_row).amax() < 1e-8);
    assert!((&b.l - b.l.transpose()).amax() < 1e-14);
    assert!((&b.l * DVector::from_element(n, 1.0)).amax() < 1e-10);
    assert!(b.eigenvalues[0] > -1e-12);
    assert!(b.mu2() > 0.0);

    let p_ref = common::walk_matrix(e, rows);
    let p_lib: Vec<Vec<f64>> = (0..n).map(|i| b.p.row(i).iter().copied().collect()).collect();
    assert!(common::max_abs_diff(&p_ref, &p_lib) < 1e-12);
    let pi_ref = common::stationary(&p_ref);
    for i in 0..n {
        assert_abs_diff_eq!(b.pi[i], pi_ref[i], epsilon = 1e-9);
    }
    let ev_ref = common::jacobi_eigenvalues(&common::laplacian(&p_ref, &pi_ref));
    for (x, y) in b.eigenvalues.iter().zip(&ev_ref) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laplacian_properties_hold(seed in any::<u64>()) {
        let (e, rows) = common::random_connected(&mut rng::seeded(seed), 30, 10);
        check_connected_case(&e, &rows);
    }

    #[test]
    fn zero_multiplicity_counts_components(seed in any::<u64>(), parts in 2usize..4) {
        let (e, rows) = common::random_disconnected(&mut rng::seeded(seed), parts, 8, 4);
        let a = Assignment::from_rows(&rows);
        let b = SpectralBundle::compute(&e, &a, Connectivity::AllowDisconnected).unwrap();
        let zeros = b.eigenvalues.iter().filter(|x| x.abs() < 1e-9).count();
        prop_assert_eq!(b.components, parts);
        prop_assert_eq!(zeros, parts);
    }

    #[test]
    fn scaling_all_weights_keeps_the_walk(seed in any::<u64>(), f in 2u64..5) {
        let (e, rows) = common::random_connected(&mut rng::seeded(seed), 12, 5);
        let a = Assignment::from_rows(&rows);
        let e2: Vec<u64> = e.iter().map(|x| x * f).collect();
        let m1 = SpectralBundle::compute(&e, &a, Connectivity::Require).unwrap().mu2();
        let m2 = SpectralBundle::compute(&e2, &a.scaled(f), Connectivity::Require).unwrap().mu2();
        prop_assert!((m1 - m2).abs() < 1e-10);
    }
}
