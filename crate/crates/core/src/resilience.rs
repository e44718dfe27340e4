//! Agent-removal attacks and hop-based patching.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{self, Assignment, CoMembershipGraph, ProblemInstance};
use crate::par;
use crate::rng;

/// Outcome of one removal plus patch.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub removed: Vec<usize>,
    pub patched_assignment: Assignment,
    /// Hop cost plus the failure charge for units that could not be placed.
    pub patching_cost: f64,
    /// `Σ (ring + 1)` over patched units only.
    pub hop_cost: u64,
    pub unsatisfied_sum: u64,
    pub success: bool,
}

/// Zeroes the rows and budgets of `removed`.
pub fn remove_agents(inst: &ProblemInstance, removed: &[usize]) -> Result<ProblemInstance> {
    let n = inst.n_agents();
    let mut seen = vec![false; n];
    for &i in removed {
        if i >= n {
            return Err(Error::InvalidParameter(format!("agent index {i} out of range")));
        }
        seen[i] = true;
    }
    if seen.iter().filter(|&&s| s).count() >= n {
        return Err(Error::InvalidParameter("cannot remove every agent".into()));
    }
    let mut a = inst.assignment().clone();
    let mut budgets = inst.budgets().to_vec();
    for (i, _) in seen.iter().enumerate().filter(|(_, &s)| s) {
        a.zero_row(i);
        budgets[i] = 0;
    }
    inst.with_budgets(budgets)?.with_assignment(a)
}

/// Per-unit charge when a deficient unit cannot be refilled. Exceeds every
/// reachable hop cost (`ring + 1 <= N`), so finding more spare budget never
/// raises the total.
pub fn failure_charge(n_agents: usize) -> u64 {
    n_agents as u64 + 1
}

/// Refills task shortfalls from survivors' spare budget.
///
/// Tasks are handled in descending shortfall (ties by index). For each,
/// agents are visited in breadth-first rings over the co-membership graph
/// of the damaged assignment: ring 0 is the task's surviving members, ring
/// `r + 1` their unvisited teammates. Within a ring spare units are drawn
/// in index order, each costing `r + 1`.
pub fn patch(damaged: &ProblemInstance, removed: &[usize]) -> AttackResult {
    let n = damaged.n_agents();
    let mut a = damaged.assignment().clone();
    let graph = CoMembershipGraph::from_assignment(&a);
    let mut spare: Vec<u64> = damaged
        .budgets()
        .iter()
        .zip(a.row_sums())
        .map(|(&b, s)| b.saturating_sub(s))
        .collect();
    let deficiency = instance::deficiency(damaged.energies(), &a);
    let mut order: Vec<usize> = (0..a.n_tasks()).filter(|&k| deficiency[k] > 0).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(deficiency[k]), k));

    let mut hop_cost = 0u64;
    let mut unsatisfied = 0u64;
    let mut visited = vec![usize::MAX; n];
    for &k in &order {
        let mut need = deficiency[k] as u64;
        let mut frontier: Vec<usize> = damaged.assignment().agents_of(k).collect();
        for &i in &frontier {
            visited[i] = k;
        }
        let mut ring = 0u64;
        while need > 0 && !frontier.is_empty() {
            for &i in &frontier {
                let take = spare[i].min(need);
                if take > 0 {
                    a.add(i, k, take);
                    spare[i] -= take;
                    need -= take;
                    hop_cost += take * (ring + 1);
                }
                if need == 0 {
                    break;
                }
            }
            let mut next = Vec::new();
            for &i in &frontier {
                for &j in graph.neighbors(i) {
                    if visited[j] != k {
                        visited[j] = k;
                        next.push(j);
                    }
                }
            }
            next.sort_unstable();
            frontier = next;
            ring += 1;
        }
        unsatisfied += need;
    }
    let mut removed = removed.to_vec();
    removed.sort_unstable();
    AttackResult {
        removed,
        patched_assignment: a,
        patching_cost: (hop_cost + unsatisfied * failure_charge(n)) as f64,
        hop_cost,
        unsatisfied_sum: unsatisfied,
        success: unsatisfied == 0,
    }
}

/// How attacked agents are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    Uniform,
    /// Highest weighted degree first (ties by index). Not randomized.
    TargetedDegree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanStderr {
    /// Mean and sample standard deviation over `√n`.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt() / n.sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub m: usize,
    pub n_exp: usize,
    pub patching_cost: MeanStderr,
    pub unsatisfied_sum: MeanStderr,
    pub success: MeanStderr,
    pub runs: Vec<AttackResult>,
}

impl ExperimentSummary {
    pub fn runs_csv(&self, inst: &ProblemInstance) -> String {
        let mut out = String::from("run,removed_ids,patching_cost,unsatisfied_sum,success\n");
        for (r, res) in self.runs.iter().enumerate() {
            let ids: Vec<&str> = res.removed.iter().map(|&i| inst.agent_ids()[i].as_str()).collect();
            out.push_str(&format!(
                "{r},{},{},{},{}\n",
                ids.join(";"),
                res.patching_cost,
                res.unsatisfied_sum,
                res.success
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,mean,stderr,n_exp\n");
        for (name, s) in [
            ("patching_cost", self.patching_cost),
            ("unsatisfied_sum", self.unsatisfied_sum),
            ("success", self.success),
        ] {
            out.push_str(&format!("{name},{},{},{}\n", s.mean, s.stderr, self.n_exp));
        }
        out
    }
}

/// Agents chosen for one run.
pub fn select_agents(inst: &ProblemInstance, m: usize, selection: Selection, seed: u64) -> Vec<usize> {
    let n = inst.n_agents();
    match selection {
        Selection::Uniform => {
            let mut r = rng::seeded(seed);
            let mut v = index::sample(&mut r, n, m).into_vec();
            v.sort_unstable();
            v
        }
        Selection::TargetedDegree => {
            let deg = inst.assignment().row_sums();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(deg[i]), i));
            order.truncate(m);
            order.sort_unstable();
            order
        }
    }
}

/// `n_exp` independent removals of `m` agents from `inst`; run `r` draws
/// with seed `seed + r`.
pub fn attack_experiment(
    inst: &ProblemInstance,
    m: usize,
    n_exp: usize,
    seed: u64,
    selection: Selection,
) -> Result<ExperimentSummary> {
    if m >= inst.n_agents() {
        return Err(Error::InvalidParameter(format!(
            "cannot remove {m} of {} agents",
            inst.n_agents()
        )));
    }
    if n_exp == 0 {
        return Err(Error::InvalidParameter("n_exp must be >= 1".into()));
    }
    let runs = par::map_range(n_exp, |r| {
        let removed = select_agents(inst, m, selection, seed.wrapping_add(r as u64));
        remove_agents(inst, &removed).map(|d| patch(&d, &removed))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let col = |f: &dyn Fn(&AttackResult) -> f64| MeanStderr::of(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(ExperimentSummary {
        m,
        n_exp,
        patching_cost: col(&|r| r.patching_cost),
        unsatisfied_sum: col(&|r| r.unsatisfied_sum as f64),
        success: col(&|r| if r.success { 1.0 } else { 0.0 }),
        runs,
    })
}

/// `μ₂(optimized) / μ₂(original)`.
pub fn gain(mu2_optimized: f64, mu2_original: f64) -> Result<f64> {
    if mu2_original == 0.0 || !mu2_original.is_finite() {
        return Err(Error::InvalidParameter("gain denominator must be nonzero".into()));
    }
    Ok(mu2_optimized / mu2_original)
}
