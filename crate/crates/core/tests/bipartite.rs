mod common;

use hyperteam_core::bipartite::{self, BipartiteBundle};
use hyperteam_core::spectral::{self, Connectivity};
use hyperteam_core::{rng, Assignment};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

/// Greedy nearest matching of two eigenvalue multisets; returns the worst
/// pair distance (infinite on a length mismatch).
fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn agent_block_of_two_step_walk_is_hypergraph_walk(seed in any::<u64>()) {
        let (e, rows) = common::random_connected(&mut rng::seeded(seed), 20, 8);
        let a = Assignment::from_rows(&rows);
        let n = rows.len();
        let b = BipartiteBundle::compute(&e, &a).unwrap();
        let p = spectral::transition_matrix(&spectral::EdvwMatrices::build(&e, &a).unwrap()).unwrap();
        let upper = b.p_star.view((0, 0), (n, n)).into_owned();
        prop_assert!((&upper - &p).amax() < 1e-12);

        let lower = b.p_star.view((n, n), (e.len(), e.len())).into_owned();
        let mut union = eigenvalues(&upper);
        union.extend(eigenvalues(&lower));
        prop_assert!(multiset_distance(&eigenvalues(&b.p_star), &union) < 1e-9);
    }

    #[test]
    fn bipartite_walk_is_row_stochastic_and_periodic(seed in any::<u64>()) {
        let (e, rows) = common::random_connected(&mut rng::seeded(seed), 15, 6);
        let a = Assignment::from_rows(&rows);
        let p_b = bipartite::bipartite_transition(&e, &a).unwrap();
        let n = rows.len();
        for i in 0..p_b.nrows() {
            prop_assert!((p_b.row(i).sum() - 1.0).abs() < 1e-12);
        }
        prop_assert!(p_b.view((0, 0), (n, n)).amax() == 0.0);
        prop_assert!(p_b.view((n, n), (e.len(), e.len())).amax() == 0.0);
        let mu2 = bipartite::bipartite_connectivity(&e, &a, Connectivity::Require).unwrap();
        prop_assert!(mu2 > 0.0);
    }
}
