//! Random instance generators used by experiments, tests and the bundled
//! toy data.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph;
use crate::instance::{Assignment, ProblemInstance};
use crate::rng::{self, Rng};

pub const DEFAULT_RETRIES: usize = 10_000;

/// Pairs shuffled agent tokens with task slots `(task, units)` in order and
/// accumulates the weights. Surplus tokens stay unused.
fn pair_tokens(n_agents: usize, n_tasks: usize, tokens: &mut [usize], slots: &[(usize, u64)], rng: &mut Rng) -> Assignment {
    tokens.shuffle(rng);
    let mut a = Assignment::zeros(n_agents, n_tasks);
    for (&agent, &(task, units)) in tokens.iter().zip(slots) {
        a.add(agent, task, units);
    }
    a
}

/// Uniformly random unit-by-unit assignment that meets every task's energy
/// exactly and never exceeds a budget, resampled until the agents and tasks
/// it touches are connected.
pub fn random_feasible_assignment(budgets: &[u64], energies: &[u64], rng: &mut Rng, max_tries: usize) -> Result<Assignment> {
    let total_b: u64 = budgets.iter().sum();
    let total_e: u64 = energies.iter().sum();
    if total_b < total_e {
        return Err(Error::InfeasibleTotals {
            budget: total_b,
            energy: total_e,
        });
    }
    let mut tokens: Vec<usize> = budgets
        .iter()
        .enumerate()
        .flat_map(|(i, &b)| std::iter::repeat_n(i, b as usize))
        .collect();
    let slots: Vec<(usize, u64)> = energies
        .iter()
        .enumerate()
        .flat_map(|(k, &e)| std::iter::repeat_n((k, 1), e as usize))
        .collect();
    for _ in 0..max_tries {
        let a = pair_tokens(budgets.len(), energies.len(), &mut tokens, &slots, rng);
        if graph::active_connected(&a) {
            return Ok(a);
        }
    }
    Err(Error::RetryCap(max_tries))
}

/// `n` agents with budget `budget`, `k` tasks with energy `energy`, and a
/// connected random feasible assignment.
pub fn uniform_instance(n: usize, k: usize, budget: u64, energy: u64, rng: &mut Rng) -> Result<ProblemInstance> {
    let budgets = vec![budget; n];
    let energies = vec![energy; k];
    let a = random_feasible_assignment(&budgets, &energies, rng, DEFAULT_RETRIES)?;
    ProblemInstance::from_parts(budgets, energies, a)
}

/// The seeded `N = 40, K = 10, B_i = 2, E_k = 8` instance family.
pub fn synthetic_suite_instance(seed: u64) -> Result<ProblemInstance> {
    uniform_instance(40, 10, 2, 8, &mut rng::stream(seed, "synthetic-suite", &[]))
}

/// Collaboration-style network grown one task at a time: each task draws
/// a team of `team` members, each a newcomer with probability `p_new` and
/// otherwise an existing agent picked in proportion to its task count.
/// Productive agents therefore accumulate heavy-tailed budgets. Unit
/// weights; budgets and energies are the row and column sums.
pub fn collaboration_network(
    k: usize,
    team: std::ops::RangeInclusive<usize>,
    p_new: f64,
    rng: &mut Rng,
) -> Result<ProblemInstance> {
    if k < 2 || *team.start() < 2 || team.is_empty() || !(0.0..=1.0).contains(&p_new) {
        return Err(Error::InvalidParameter("bad collaboration network parameters".into()));
    }
    // memberships[i] = tasks of agent i; `slots` lists agents once per task
    let mut memberships: Vec<Vec<usize>> = Vec::new();
    let mut slots: Vec<usize> = Vec::new();
    for t in 0..k {
        let size = rng.gen_range(team.clone());
        let mut members: Vec<usize> = Vec::new();
        while members.len() < size {
            let agent = if slots.is_empty() || rng.gen::<f64>() < p_new {
                memberships.push(Vec::new());
                memberships.len() - 1
            } else {
                slots[rng.gen_range(0..slots.len())]
            };
            if !members.contains(&agent) {
                members.push(agent);
            }
        }
        // every task after the first keeps at least one returning agent
        if t > 0 && members.iter().all(|&i| memberships[i].is_empty()) {
            members[0] = slots[rng.gen_range(0..slots.len())];
        }
        for &i in &members {
            memberships[i].push(t);
            slots.push(i);
        }
    }
    let used: Vec<usize> = (0..memberships.len()).filter(|&i| !memberships[i].is_empty()).collect();
    let rows: Vec<Vec<u64>> = used
        .iter()
        .map(|&i| {
            let mut r = vec![0; k];
            for &t in &memberships[i] {
                r[t] = 1;
            }
            r
        })
        .collect();
    ProblemInstance::from_assignment(Assignment::from_rows(&rows))
}

/// The 400-task collaboration network used as the budget-sweep base.
pub fn sweep_base(seed: u64) -> Result<ProblemInstance> {
    collaboration_network(400, 3..=7, 0.3, &mut rng::stream(seed, "collaboration", &[]))
}

fn connected_pairing(
    n: usize,
    k: usize,
    tokens: &mut [usize],
    slots: &[(usize, u64)],
    rng: &mut Rng,
) -> Result<Assignment> {
    for _ in 0..DEFAULT_RETRIES {
        let a = pair_tokens(n, k, tokens, slots, rng);
        if graph::bipartite_component_count(&a) == 1 {
            return Ok(a);
        }
    }
    Err(Error::RetryCap(DEFAULT_RETRIES))
}

/// Unit-weight mirror of the shape of the APS 1993–94 row: 52 agents,
/// 25 tasks, 180 memberships (tasks of 7 or 8 members, agents on 3 or 4
/// tasks). Budgets and energies are row and column sums.
pub fn aps_like_mirror(seed: u64) -> Result<ProblemInstance> {
    let mut rng = rng::stream(seed, "aps-mirror", &[]);
    let (n, k) = (52, 25);
    let mut tokens: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, if i < 24 { 4 } else { 3 })).collect();
    let slots: Vec<(usize, u64)> = (0..k)
        .flat_map(|t| std::iter::repeat_n((t, 1), if t < 5 { 8 } else { 7 }))
        .collect();
    let a = connected_pairing(n, k, &mut tokens, &slots, &mut rng)?;
    let inst = ProblemInstance::from_assignment(a)?;
    ProblemInstance::new(
        (0..n).map(|i| format!("author{i:02}")).collect(),
        inst.budgets().to_vec(),
        (0..k).map(|t| format!("article{t:02}")).collect(),
        inst.energies().to_vec(),
        inst.assignment().clone(),
    )
}

/// Mirror of the MAG row: 781 agents, 704 tasks, total energy 10580 and
/// total budget 13021. Each task is staffed in three packs of 5 or 6 units;
/// budgets are the units used plus slack spread round-robin.
pub fn mag_like_mirror(seed: u64) -> Result<ProblemInstance> {
    let mut rng = rng::stream(seed, "mag-mirror", &[]);
    let (n, k) = (781usize, 704usize);
    let (total_e, total_b) = (10_580u64, 13_021u64);
    // 684 tasks need 15 units (5+5+5), 20 need 16 (5+5+6).
    let slots: Vec<(usize, u64)> = (0..k)
        .flat_map(|t| {
            let last = if t < 20 { 6 } else { 5 };
            [(t, 5), (t, 5), (t, last)]
        })
        .collect();
    let mut tokens: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, if i < 550 { 3 } else { 2 })).collect();
    debug_assert_eq!(tokens.len(), slots.len());
    let a = connected_pairing(n, k, &mut tokens, &slots, &mut rng)?;
    let energies = a.col_sums();
    debug_assert_eq!(energies.iter().sum::<u64>(), total_e);
    let mut budgets = a.row_sums();
    let mut slack = total_b - total_e;
    let mut i = 0;
    while slack > 0 {
        budgets[i % n] += 1;
        slack -= 1;
        i += 1;
    }
    ProblemInstance::new(
        (0..n).map(|i| format!("author{i:03}")).collect(),
        budgets,
        (0..k).map(|t| format!("article{t:03}")).collect(),
        energies,
        a,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance;

    #[test]
    fn random_feasible_meets_energies_exactly() {
        let mut r = rng::seeded(4);
        let a = random_feasible_assignment(&[3, 3, 2, 2], &[4, 3], &mut r, 100).unwrap();
        assert_eq!(a.col_sums(), vec![4, 3]);
        assert!(a.row_sums().iter().zip([3, 3, 2, 2]).all(|(&s, b)| s <= b));
        assert!(graph::active_connected(&a));
    }

    #[test]
    fn suite_instance_is_tight_and_feasible() {
        let inst = synthetic_suite_instance(1).unwrap();
        assert_eq!((inst.n_agents(), inst.n_tasks()), (40, 10));
        assert_eq!(inst.total_budget(), inst.total_energy());
        let rep = instance::validate(&inst);
        assert!(rep.is_feasible() && rep.connected);
        assert_eq!(synthetic_suite_instance(1).unwrap(), inst);
    }

    #[test]
    fn collaboration_network_is_connected() {
        let inst = collaboration_network(60, 3..=6, 0.7, &mut rng::seeded(2)).unwrap();
        assert!(instance::is_connected(&inst));
        assert!(inst.budgets().iter().max() > Some(&3));
    }

    #[test]
    fn mirrors_have_table_shapes() {
        let aps = aps_like_mirror(0).unwrap();
        assert_eq!((aps.n_agents(), aps.n_tasks(), aps.total_energy()), (52, 25, 180));
        assert!(instance::is_connected(&aps));
        let mag = mag_like_mirror(0).unwrap();
        assert_eq!((mag.n_agents(), mag.n_tasks()), (781, 704));
        assert_eq!((mag.total_budget(), mag.total_energy()), (13_021, 10_580));
        assert!(instance::validate(&mag).is_feasible());
    }
}
