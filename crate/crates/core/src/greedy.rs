//! Greedy knapsack baseline.
//!
//! A hub-based initialization touches every task with a few high-budget
//! agents, phase 1 fills every task's energy one packet at a time by best
//! `Δμ₂` per unit, and phase 2 spends leftover budget the same way.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::csa::{OptimizationResult, Phase, TraceRow};
use crate::error::{Error, Result};
use crate::instance::{self, Assignment, ProblemInstance};
use crate::par;
use crate::rng::{self, Rng};
use crate::spectral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyParams {
    /// Energy packet size.
    pub h: u64,
    /// Accept negative phase-2 moves with probability `exp(Δ/T)`.
    pub stochastic_accept: bool,
    pub phase2_temperature: f64,
    /// Above this many available agents, assignments are made at random
    /// instead of by scanning candidates.
    pub random_threshold: usize,
    pub seed: u64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self {
            h: 1,
            stochastic_accept: false,
            phase2_temperature: 1e-3,
            random_threshold: 50,
            seed: 0,
        }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(Error::InvalidParameter("h must be >= 1".into()));
        }
        if self.random_threshold == 0 {
            return Err(Error::InvalidParameter("random_threshold must be >= 1".into()));
        }
        if self.stochastic_accept && self.phase2_temperature <= 0.0 {
            return Err(Error::InvalidParameter("phase-2 temperature must be positive".into()));
        }
        Ok(())
    }
}

/// Hub initialization. Agents are taken in descending budget order (stable
/// by index). The first hub puts one unit on as many tasks as it can; every
/// later hub first spends one unit on the lowest-index already-touched task
/// that still needs energy (the lowest touched task if none does), which
/// links it to the earlier hubs, then touches new tasks one unit each.
/// Later agents with budget 1 cannot both link and extend, so they are
/// skipped.
pub fn centralized_init(inst: &ProblemInstance) -> Result<Assignment> {
    if inst.total_budget() < inst.total_energy() {
        return Err(Error::InfeasibleTotals {
            budget: inst.total_budget(),
            energy: inst.total_energy(),
        });
    }
    let (n, k) = (inst.n_agents(), inst.n_tasks());
    let budgets = inst.budgets();
    let energies = inst.energies();
    let mut order: Vec<usize> = (0..n).filter(|&i| budgets[i] > 0).collect();
    order.sort_by(|&x, &y| budgets[y].cmp(&budgets[x]));

    let mut a = Assignment::zeros(n, k);
    let mut covered = vec![false; k];
    let mut n_covered = 0;
    let mut first = true;
    for i in order {
        if n_covered == k {
            break;
        }
        let mut rem = budgets[i];
        if !first {
            if rem < 2 {
                continue;
            }
            let link = (0..k)
                .find(|&t| covered[t] && a.col_sum(t) < energies[t])
                .or_else(|| (0..k).find(|&t| covered[t]))
                .expect("first hub covered a task");
            a.add(i, link, 1);
            rem -= 1;
        }
        for t in 0..k {
            if rem == 0 {
                break;
            }
            if !covered[t] {
                a.add(i, t, 1);
                covered[t] = true;
                n_covered += 1;
                rem -= 1;
            }
        }
        first = false;
    }
    if n_covered < k {
        return Err(Error::InvalidInstance(format!(
            "hub initialization cannot touch all tasks ({n_covered} of {k})"
        )));
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    agent: usize,
    task: usize,
    units: u64,
}

/// `(Δμ₂ per unit, candidate)` of the best candidate; ties keep the
/// earliest in scan order. A candidate that disconnects the active part
/// scores `-inf`.
fn best_candidate(energies: &[u64], a: &Assignment, base: f64, cands: &[Candidate]) -> Result<Option<(f64, Candidate)>> {
    let scores = par::map_slice(cands, |c| -> Result<f64> {
        let mut trial = a.clone();
        trial.add(c.agent, c.task, c.units);
        Ok(match spectral::active_mu2(energies, &trial)? {
            Some(m) => (m - base) / c.units as f64,
            None => f64::NEG_INFINITY,
        })
    });
    let mut best: Option<(f64, Candidate)> = None;
    for (c, s) in cands.iter().zip(scores) {
        let s = s?;
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, *c));
        }
    }
    Ok(best)
}

fn current_mu2(energies: &[u64], a: &Assignment) -> Result<f64> {
    Ok(spectral::active_mu2(energies, a)?.unwrap_or(0.0))
}

fn remaining(budgets: &[u64], a: &Assignment) -> Vec<u64> {
    budgets
        .iter()
        .zip(a.row_sums())
        .map(|(&b, s)| b.saturating_sub(s))
        .collect()
}

struct Run<'a> {
    inst: &'a ProblemInstance,
    params: &'a GreedyParams,
    trace: Vec<TraceRow>,
}

impl Run<'_> {
    fn record(&mut self, a: &Assignment, phase: Phase, accepted: bool) -> Result<()> {
        let mu2 = spectral::active_mu2(self.inst.energies(), a)?;
        let feasible = instance::deficiency(self.inst.energies(), a).iter().all(|&d| d <= 0)
            && instance::overrun(self.inst.budgets(), a).iter().all(|&o| o == 0);
        let penalty = mu2.unwrap_or(f64::NEG_INFINITY);
        let best_penalty = self.trace.last().map_or(penalty, |r| r.best_penalty.max(penalty));
        self.trace.push(TraceRow {
            iter: self.trace.len(),
            temperature: 0.0,
            penalty,
            mu2,
            feasible,
            accepted,
            best_penalty,
            phase: Some(phase),
        });
        Ok(())
    }

    /// One round visits the open tasks in index order; each still-open task
    /// takes one packet from the agent with the best `Δμ₂` per unit (ties to
    /// the lowest agent index).
    fn phase1(&mut self, mut a: Assignment, rng: &mut Rng) -> Result<Assignment> {
        let energies = self.inst.energies();
        let h = self.params.h;
        loop {
            let open: Vec<usize> = {
                let d = instance::deficiency(energies, &a);
                (0..a.n_tasks()).filter(|&k| d[k] > 0).collect()
            };
            if open.is_empty() {
                return Ok(a);
            }
            for k in open {
                let need = energies[k].saturating_sub(a.col_sum(k));
                if need == 0 {
                    continue;
                }
                let rem = remaining(self.inst.budgets(), &a);
                let mut available: Vec<usize> = (0..a.n_agents()).filter(|&i| rem[i] > 0).collect();
                if available.is_empty() {
                    let d = instance::deficiency(energies, &a);
                    return Err(Error::GreedyStall {
                        remaining: d.iter().filter(|&&x| x > 0).map(|&x| x as u64).sum(),
                    });
                }
                if available.len() > self.params.random_threshold {
                    available = vec![available[rng.gen_range(0..available.len())]];
                }
                let cands: Vec<Candidate> = available
                    .iter()
                    .map(|&j| Candidate {
                        agent: j,
                        task: k,
                        units: rem[j].min(need).min(h),
                    })
                    .collect();
                let base = current_mu2(energies, &a)?;
                let (_, c) = best_candidate(energies, &a, base, &cands)?.expect("nonempty candidates");
                a.add(c.agent, c.task, c.units);
                self.record(&a, Phase::Fill, true)?;
            }
        }
    }

    /// One round visits the available agents in index order; each places one
    /// packet on its best task (ties to the lowest task index). A rejected
    /// best move retires the agent. While more agents than the random
    /// threshold are available, each places its packet on a random task
    /// without evaluation.
    fn phase2(&mut self, mut a: Assignment, rng: &mut Rng) -> Result<Assignment> {
        if self.inst.total_budget() == self.inst.total_energy() {
            self.record(&a, Phase::SpendSkipped, false)?;
            return Ok(a);
        }
        let energies = self.inst.energies();
        let n_tasks = a.n_tasks();
        let mut retired = vec![false; a.n_agents()];
        loop {
            let available: Vec<usize> = {
                let rem = remaining(self.inst.budgets(), &a);
                (0..a.n_agents()).filter(|&i| rem[i] > 0 && !retired[i]).collect()
            };
            if available.is_empty() {
                return Ok(a);
            }
            let random = available.len() > self.params.random_threshold;
            for j in available {
                let units = self.inst.budgets()[j].saturating_sub(a.row_sum(j)).min(self.params.h);
                if random {
                    a.add(j, rng.gen_range(0..n_tasks), units);
                    self.record(&a, Phase::Spend, true)?;
                    continue;
                }
                let cands: Vec<Candidate> = (0..n_tasks).map(|k| Candidate { agent: j, task: k, units }).collect();
                let base = current_mu2(energies, &a)?;
                let (delta, c) = best_candidate(energies, &a, base, &cands)?.expect("nonempty candidates");
                let accept = delta >= 0.0
                    || (self.params.stochastic_accept
                        && delta.is_finite()
                        && rng.gen::<f64>() < (delta / self.params.phase2_temperature).exp());
                if accept {
                    a.add(c.agent, c.task, c.units);
                    self.record(&a, Phase::Spend, true)?;
                } else {
                    retired[j] = true;
                }
            }
        }
    }
}

/// Phase 1: fill every task by repeatedly applying the best candidate
/// increment `min(remaining budget, shortfall, h)`.
pub fn phase1(inst: &ProblemInstance, a0: &Assignment, params: &GreedyParams) -> Result<Assignment> {
    params.validate()?;
    let mut run = Run {
        inst,
        params,
        trace: Vec::new(),
    };
    run.phase1(a0.clone(), &mut rng::stream(params.seed, "greedy", &[1]))
}

/// Phase 2: spend leftover budget on the best non-negative `Δμ₂` moves.
/// An agent whose best move is rejected is retired. Does nothing when total
/// budget equals total energy.
pub fn phase2(inst: &ProblemInstance, a1: &Assignment, params: &GreedyParams) -> Result<Assignment> {
    params.validate()?;
    let mut run = Run {
        inst,
        params,
        trace: Vec::new(),
    };
    run.phase2(a1.clone(), &mut rng::stream(params.seed, "greedy", &[2]))
}

pub fn greedy_optimize(inst: &ProblemInstance, params: &GreedyParams) -> Result<OptimizationResult> {
    params.validate()?;
    let mut run = Run {
        inst,
        params,
        trace: Vec::new(),
    };
    let a0 = centralized_init(inst)?;
    run.record(&a0, Phase::Init, true)?;
    let a1 = run.phase1(a0, &mut rng::stream(params.seed, "greedy", &[1]))?;
    let a2 = run.phase2(a1, &mut rng::stream(params.seed, "greedy", &[2]))?;
    let mu2 = spectral::active_mu2(inst.energies(), &a2)?;
    let report = instance::validate(&inst.with_assignment(a2.clone())?);
    Ok(OptimizationResult {
        best_penalty: mu2.unwrap_or(f64::NEG_INFINITY),
        best_mu2: mu2.unwrap_or(0.0),
        feasible: report.is_feasible() && mu2.is_some(),
        iterations_run: run.trace.len(),
        trace: run.trace,
        best_assignment: a2,
        seed: params.seed,
    })
}
