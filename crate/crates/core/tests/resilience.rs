mod common;

use hyperteam_core::resilience::{self, Selection};
use hyperteam_core::{instance, rng, Assignment, ProblemInstance};
use proptest::prelude::*;
use rand::Rng;

/// Random instance whose energies equal the column sums and whose budgets
/// carry `0..=3` spare units per agent.
fn random_instance(seed: u64) -> ProblemInstance {
    let mut r = rng::seeded(seed);
    let (_, rows) = common::random_connected(&mut r, 20, 6);
    let a = Assignment::from_rows(&rows);
    let budgets = a.row_sums().iter().map(|b| b + r.gen_range(0..=3)).collect();
    ProblemInstance::from_parts(budgets, a.col_sums(), a).unwrap()
}

fn removal(inst: &ProblemInstance, seed: u64) -> Vec<usize> {
    let m = 1 + (seed as usize % (inst.n_agents() - 1)).min(3);
    resilience::select_agents(inst, m, Selection::Uniform, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn patch_never_overdraws(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let removed = removal(&inst, seed);
        let damaged = resilience::remove_agents(&inst, &removed).unwrap();
        let res = resilience::patch(&damaged, &removed);
        for i in 0..inst.n_agents() {
            prop_assert!(res.patched_assignment.row_sum(i) <= damaged.budgets()[i]);
        }
        for &i in &removed {
            prop_assert_eq!(res.patched_assignment.row_sum(i), 0);
        }
        let left: u64 = instance::deficiency(inst.energies(), &res.patched_assignment)
            .iter()
            .map(|&d| d.max(0) as u64)
            .sum();
        prop_assert_eq!(left, res.unsatisfied_sum);
        prop_assert_eq!(res.success, res.unsatisfied_sum == 0);
        let charge = resilience::failure_charge(inst.n_agents());
        prop_assert_eq!(res.patching_cost, (res.hop_cost + res.unsatisfied_sum * charge) as f64);
    }

    #[test]
    fn more_spare_budget_never_costs_more(seed in any::<u64>(), pick in any::<usize>()) {
        let inst = random_instance(seed);
        let removed = removal(&inst, seed);
        let damaged = resilience::remove_agents(&inst, &removed).unwrap();
        let base = resilience::patch(&damaged, &removed);
        let survivors: Vec<usize> = (0..inst.n_agents()).filter(|i| !removed.contains(i)).collect();
        let lucky = survivors[pick % survivors.len()];
        let mut budgets = damaged.budgets().to_vec();
        budgets[lucky] += 1;
        let richer = resilience::patch(&damaged.with_budgets(budgets).unwrap(), &removed);
        prop_assert!(richer.patching_cost <= base.patching_cost);
        prop_assert!(richer.unsatisfied_sum <= base.unsatisfied_sum);
    }
}

#[test]
fn attack_runs_are_reproducible() {
    let inst = random_instance(3);
    let a = resilience::attack_experiment(&inst, 2, 8, 42, Selection::Uniform).unwrap();
    let b = resilience::attack_experiment(&inst, 2, 8, 42, Selection::Uniform).unwrap();
    assert_eq!(a.runs, b.runs);
    assert_eq!(a.summary_csv(), b.summary_csv());
}

#[test]
fn targeted_selection_takes_busiest_agents() {
    let a = Assignment::from_rows(&[vec![1, 0], vec![2, 3], vec![0, 1], vec![1, 1]]);
    let inst = ProblemInstance::from_assignment(a).unwrap();
    assert_eq!(resilience::select_agents(&inst, 2, Selection::TargetedDegree, 0), vec![1, 3]);
}
