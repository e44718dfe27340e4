use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::fit::fit_power_law;
use crate::error::{Error, Result};
use crate::greedy::{greedy_optimize, GreedyParams};
use crate::instance::{Assignment, ProblemInstance};
use crate::par;
use crate::rng::{self, Rng};

const SAMPLE_RETRIES: usize = 1000;

/// `K'` tasks reached breadth-first from a random start task, moving
/// between tasks that share an agent (neighbours visited in random order).
/// `None` if the start's component has fewer than `k` tasks.
pub fn snowball_tasks(a: &Assignment, k: usize, rng: &mut Rng) -> Option<Vec<usize>> {
    let n_tasks = a.n_tasks();
    let start = rng.gen_range(0..n_tasks);
    let mut seen = vec![false; n_tasks];
    let mut picked = Vec::new();
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(t) = queue.pop_front() {
        picked.push(t);
        if picked.len() == k {
            picked.sort_unstable();
            return Some(picked);
        }
        let mut next: Vec<usize> = a
            .agents_of(t)
            .flat_map(|i| a.tasks_of(i).collect::<Vec<_>>())
            .filter(|&u| !seen[u])
            .collect();
        next.sort_unstable();
        next.dedup();
        next.shuffle(rng);
        for u in next {
            seen[u] = true;
            queue.push_back(u);
        }
    }
    None
}

/// Restriction to `tasks` and the agents working on them. Energies are the
/// restricted column sums and budgets `β ×` the restricted row sums.
pub fn sub_instance(base: &ProblemInstance, tasks: &[usize], beta: u64) -> Result<ProblemInstance> {
    let a = base.assignment();
    let agents: Vec<usize> = (0..a.n_agents())
        .filter(|&i| tasks.iter().any(|&k| a.get(i, k) > 0))
        .collect();
    let rows: Vec<Vec<u64>> = agents
        .iter()
        .map(|&i| tasks.iter().map(|&k| a.get(i, k)).collect())
        .collect();
    let sub = Assignment::from_rows(&rows);
    ProblemInstance::new(
        agents.iter().map(|&i| base.agent_ids()[i].clone()).collect(),
        sub.row_sums().iter().map(|&b| b * beta).collect(),
        tasks.iter().map(|&k| base.task_ids()[k].clone()).collect(),
        sub.col_sums(),
        sub,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub beta: u64,
    pub n_tasks: usize,
    pub n_agents: usize,
    pub rep: usize,
    pub mu2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub beta: u64,
    pub n_tasks: usize,
    pub mean_agents: f64,
    pub mean_mu2: f64,
    pub sd_mu2: f64,
}

#[derive(Debug, Clone)]
pub struct BudgetSweep {
    pub rows: Vec<SweepRow>,
    pub points: Vec<SweepPoint>,
    /// `(β, slope of ln μ₂ against ln N)`.
    pub slopes: Vec<(u64, f64)>,
}

impl BudgetSweep {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("beta,K,N,rep,mu2\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.beta, r.n_tasks, r.n_agents, r.rep, r.mu2));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("beta,K,mean_N,mean_mu2,sd_mu2\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.beta, p.n_tasks, p.mean_agents, p.mean_mu2, p.sd_mu2
            ));
        }
        out
    }
}

/// For every size `K'` and repetition one connected snowball sample with
/// about `4K'` agents (within 10%) is drawn; every `β` is then applied to
/// that same sample and optimized with greedy.
pub fn budget_sweep(
    base: &ProblemInstance,
    betas: &[u64],
    sub_sizes: &[usize],
    reps: usize,
    seed: u64,
    greedy: &GreedyParams,
) -> Result<BudgetSweep> {
    if betas.contains(&0) {
        return Err(Error::InvalidParameter("budget multipliers must be >= 1".into()));
    }
    let mut samples = Vec::new();
    for &k in sub_sizes {
        for rep in 0..reps {
            let mut r = rng::stream(seed, "budget-sample", &[k as u64, rep as u64]);
            let tasks = (0..SAMPLE_RETRIES)
                .filter_map(|_| snowball_tasks(base.assignment(), k, &mut r))
                .find(|tasks| {
                    let n = sub_instance(base, tasks, 1).map_or(0, |s| s.n_agents()) as f64;
                    (n - 4.0 * k as f64).abs() <= 0.4 * k as f64
                })
                .ok_or(Error::RetryCap(SAMPLE_RETRIES))?;
            samples.push((k, rep, tasks));
        }
    }
    let jobs: Vec<(u64, usize)> = betas
        .iter()
        .flat_map(|&b| (0..samples.len()).map(move |s| (b, s)))
        .collect();
    let rows = par::map_slice(&jobs, |&(beta, s)| -> Result<SweepRow> {
        let (k, rep, tasks) = &samples[s];
        let inst = sub_instance(base, tasks, beta)?;
        let mut p = greedy.clone();
        p.seed = rng::stream_seed(seed, "budget-greedy", &[beta, *k as u64, *rep as u64]);
        let res = greedy_optimize(&inst, &p)?;
        Ok(SweepRow {
            beta,
            n_tasks: *k,
            n_agents: inst.n_agents(),
            rep: *rep,
            mu2: res.best_mu2,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut slopes = Vec::new();
    for &beta in betas {
        for &k in sub_sizes {
            let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.beta == beta && r.n_tasks == k).collect();
            let n = sel.len() as f64;
            let mean_mu2 = sel.iter().map(|r| r.mu2).sum::<f64>() / n;
            let sd_mu2 = if sel.len() > 1 {
                (sel.iter().map(|r| (r.mu2 - mean_mu2).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            points.push(SweepPoint {
                beta,
                n_tasks: k,
                mean_agents: sel.iter().map(|r| r.n_agents as f64).sum::<f64>() / n,
                mean_mu2,
                sd_mu2,
            });
        }
        if sub_sizes.len() >= 3 {
            let pts: Vec<&SweepPoint> = points.iter().filter(|p| p.beta == beta).collect();
            let xs: Vec<f64> = pts.iter().map(|p| p.mean_agents).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.mean_mu2).collect();
            slopes.push((beta, fit_power_law(&xs, &ys)?.exponent));
        }
    }
    Ok(BudgetSweep { rows, points, slopes })
}
