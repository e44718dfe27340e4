//! Constrained simulated annealing over integer assignments.
//!
//! Every agent's full budget is placed at initialization and proposals only
//! move units between tasks, so agent totals never change during a run.
//! Task shortfalls are handled by a penalty term plus a guided move that
//! shifts a unit from an over-provisioned task to a short one.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bipartite;
use crate::error::{Error, Result};
use crate::instance::{self, Assignment, ProblemInstance};
use crate::par;
use crate::rng::{self, Rng};
use crate::spectral;

/// Penalty weights: one value for every item, or one per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Uniform(f64),
    PerItem(Vec<f64>),
}

impl Weights {
    pub fn get(&self, idx: usize) -> f64 {
        match self {
            Weights::Uniform(w) => *w,
            Weights::PerItem(v) => v[idx],
        }
    }

    fn check(&self, len: usize, name: &str) -> Result<()> {
        match self {
            Weights::Uniform(w) if *w >= 0.0 => Ok(()),
            Weights::PerItem(v) if v.len() == len && v.iter().all(|&w| w >= 0.0) => Ok(()),
            _ => Err(Error::InvalidParameter(format!(
                "{name} must be nonnegative (scalar or length {len})"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsaParams {
    #[serde(rename = "T0")]
    pub t0: f64,
    /// Geometric cooling factor.
    pub a_c: f64,
    #[serde(rename = "T_th")]
    pub t_th: f64,
    pub t_max: usize,
    /// Unit moves per proposal; `None` means `max(1, ⌈(N+K)/50⌉)`.
    #[serde(rename = "N_s")]
    pub n_s: Option<usize>,
    /// Per-task shortfall weights.
    pub lambda: Weights,
    /// Per-agent overrun weights.
    pub eta: Weights,
    pub pack_size: u64,
    /// Probability of taking the guided move when it is available.
    pub p_guided: f64,
    /// Coefficients `(c_T, c_A)` on mean tasks per agent and mean teammates.
    pub factor_coeffs: (f64, f64),
    pub seed: u64,
}

impl Default for CsaParams {
    fn default() -> Self {
        Self {
            t0: 1.0,
            a_c: 0.999,
            t_th: 1e-4,
            t_max: 50_000,
            n_s: None,
            lambda: Weights::Uniform(10.0),
            eta: Weights::Uniform(10.0),
            pack_size: 1,
            p_guided: 0.8,
            factor_coeffs: (0.0, 0.0),
            seed: 0,
        }
    }
}

impl CsaParams {
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.t_th > 0.0 && self.t0 > self.t_th) {
            return bad("require T0 > T_th > 0");
        }
        if !(self.a_c > 0.0 && self.a_c < 1.0) {
            return bad("require 0 < a_c < 1");
        }
        if self.pack_size == 0 {
            return bad("pack_size must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.p_guided) {
            return bad("p_guided must lie in [0, 1]");
        }
        if self.n_s == Some(0) {
            return bad("N_s must be >= 1");
        }
        if self.factor_coeffs.0 < 0.0 || self.factor_coeffs.1 < 0.0 {
            return bad("factor coefficients must be nonnegative");
        }
        self.lambda.check(inst.n_tasks(), "lambda")?;
        self.eta.check(inst.n_agents(), "eta")
    }

    pub fn swaps_for(&self, inst: &ProblemInstance) -> usize {
        self.n_s
            .unwrap_or_else(|| ((inst.n_agents() + inst.n_tasks()).div_ceil(50)).max(1))
    }
}

/// Connectivity measure being maximized.
pub trait Objective: Sync {
    /// `Ok(None)` when the active part of the assignment is disconnected.
    fn mu2(&self, energies: &[u64], a: &Assignment) -> Result<Option<f64>>;

    fn name(&self) -> &'static str;
}

/// `μ₂` of the hypergraph Laplacian.
#[derive(Debug, Clone, Copy, Default)]
pub struct HypergraphObjective;

impl Objective for HypergraphObjective {
    fn mu2(&self, energies: &[u64], a: &Assignment) -> Result<Option<f64>> {
        spectral::active_mu2(energies, a)
    }

    fn name(&self) -> &'static str {
        "hypergraph"
    }
}

/// `μ₂` of the bipartite Laplacian `L^B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BipartiteObjective;

impl Objective for BipartiteObjective {
    fn mu2(&self, energies: &[u64], a: &Assignment) -> Result<Option<f64>> {
        bipartite::active_bipartite_mu2(energies, a)
    }

    fn name(&self) -> &'static str {
        "bipartite"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Penalized objective; `-inf` for disconnected candidates.
    pub penalty: f64,
    pub mu2: Option<f64>,
    /// `E_k - Σ_i B_ik`.
    pub deficiency: Vec<i64>,
    pub feasible: bool,
}

/// Penalized objective of one candidate:
/// `μ₂ − Σ η_i (row_i − B_i)⁺ − Σ λ_k (Ẽ_k)⁺ − c_T T̄ − c_A Â`.
pub fn evaluate(
    a: &Assignment,
    inst: &ProblemInstance,
    params: &CsaParams,
    objective: &dyn Objective,
) -> Result<Evaluation> {
    let deficiency = instance::deficiency(inst.energies(), a);
    let over = instance::overrun(inst.budgets(), a);
    let mu2 = objective.mu2(inst.energies(), a)?;
    let Some(m) = mu2 else {
        return Ok(Evaluation {
            penalty: f64::NEG_INFINITY,
            mu2,
            deficiency,
            feasible: false,
        });
    };
    let mut penalty = m;
    for (i, &o) in over.iter().enumerate() {
        if o > 0 {
            penalty -= params.eta.get(i) * o as f64;
        }
    }
    for (k, &d) in deficiency.iter().enumerate() {
        if d > 0 {
            penalty -= params.lambda.get(k) * d as f64;
        }
    }
    let (c_t, c_a) = params.factor_coeffs;
    if c_t > 0.0 || c_a > 0.0 {
        let (t_bar, a_hat) = instance::factor_metrics(a);
        penalty -= c_t * t_bar + c_a * a_hat;
    }
    let feasible = deficiency.iter().all(|&d| d <= 0) && over.iter().all(|&o| o == 0);
    Ok(Evaluation {
        penalty,
        mu2,
        deficiency,
        feasible,
    })
}

/// `(T̄, Â)` of an assignment.
pub fn factor_metrics(a: &Assignment) -> (f64, f64) {
    instance::factor_metrics(a)
}

/// Places every agent's budget on uniformly random tasks in packs of
/// `pack_size`; the remainder goes out one unit at a time.
pub fn initialize_assignment(inst: &ProblemInstance, params: &CsaParams, rng: &mut Rng) -> Result<Assignment> {
    if inst.total_budget() < inst.total_energy() {
        return Err(Error::InfeasibleTotals {
            budget: inst.total_budget(),
            energy: inst.total_energy(),
        });
    }
    let k = inst.n_tasks();
    let pack = params.pack_size.max(1);
    let mut a = Assignment::zeros(inst.n_agents(), k);
    for (i, &b) in inst.budgets().iter().enumerate() {
        for _ in 0..b / pack {
            a.add(i, rng.gen_range(0..k), pack);
        }
        for _ in 0..b % pack {
            a.add(i, rng.gen_range(0..k), 1);
        }
    }
    Ok(a)
}

/// Index drawn with probability proportional to integer `weights`.
/// Cumulative-sum inversion in index order.
pub fn sample_proportional(weights: &[(usize, u64)], rng: &mut Rng) -> usize {
    let total: u64 = weights.iter().map(|&(_, w)| w).sum();
    debug_assert!(total > 0);
    let mut u = rng.gen_range(0..total);
    for &(idx, w) in weights {
        if u < w {
            return idx;
        }
        u -= w;
    }
    unreachable!("u < total")
}

/// What one call to [`perturb`] did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveStats {
    pub guided: usize,
    pub swaps: usize,
    pub noops: usize,
}

const SWAP_RETRIES: usize = 16;

/// Applies `N_s` unit moves in place, keeping `deficiency` in sync.
///
/// Guided move (when some task is short, another over-provisioned, and a
/// coin with `p_guided` comes up): a member of an over-provisioned task
/// (picked ∝ excess) moves one pack to a short task (picked ∝ shortfall).
/// Otherwise two tasks exchange one pack between one member each, which
/// leaves both marginals unchanged.
pub fn perturb(
    a: &mut Assignment,
    deficiency: &mut [i64],
    params: &CsaParams,
    n_s: usize,
    rng: &mut Rng,
) -> MoveStats {
    let mut stats = MoveStats::default();
    let pack = params.pack_size.max(1);
    for _ in 0..n_s {
        let short: Vec<(usize, u64)> = deficiency
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(k, &d)| (k, d as u64))
            .collect();
        let excess: Vec<(usize, u64)> = deficiency
            .iter()
            .enumerate()
            .filter(|(_, &d)| d < 0)
            .map(|(k, &d)| (k, d.unsigned_abs()))
            .collect();
        let guided_available = !short.is_empty() && !excess.is_empty();
        if guided_available && rng.gen::<f64>() < params.p_guided {
            let to = sample_proportional(&short, rng);
            let from = sample_proportional(&excess, rng);
            let donors: Vec<usize> = a.agents_of(from).collect();
            let agent = donors[rng.gen_range(0..donors.len())];
            let q = pack.min(a.get(agent, from));
            a.take(agent, from, q);
            a.add(agent, to, q);
            deficiency[from] += q as i64;
            deficiency[to] -= q as i64;
            stats.guided += 1;
        } else if random_swap(a, pack, rng) {
            stats.swaps += 1;
        } else {
            stats.noops += 1;
        }
    }
    stats
}

fn random_swap(a: &mut Assignment, pack: u64, rng: &mut Rng) -> bool {
    let cols = a.col_sums();
    let staffed: Vec<usize> = (0..a.n_tasks()).filter(|&k| cols[k] > 0).collect();
    if staffed.len() < 2 {
        return false;
    }
    for _ in 0..SWAP_RETRIES {
        let x = rng.gen_range(0..staffed.len());
        let mut y = rng.gen_range(0..staffed.len() - 1);
        if y >= x {
            y += 1;
        }
        let (k1, k2) = (staffed[x], staffed[y]);
        let m1: Vec<usize> = a.agents_of(k1).collect();
        let m2: Vec<usize> = a.agents_of(k2).collect();
        let i = m1[rng.gen_range(0..m1.len())];
        let j = m2[rng.gen_range(0..m2.len())];
        if i == j {
            continue;
        }
        let q = pack.min(a.get(i, k1)).min(a.get(j, k2));
        a.take(i, k1, q);
        a.add(i, k2, q);
        a.take(j, k2, q);
        a.add(j, k1, q);
        return true;
    }
    false
}

/// Optimizer stage label carried in greedy traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Init,
    Fill,
    Spend,
    SpendSkipped,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Fill => "1",
            Phase::Spend => "2",
            Phase::SpendSkipped => "2:skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub temperature: f64,
    /// Penalty of the current state after the accept/reject decision.
    pub penalty: f64,
    pub mu2: Option<f64>,
    pub feasible: bool,
    pub accepted: bool,
    /// Best penalty seen so far (including this row).
    pub best_penalty: f64,
    pub phase: Option<Phase>,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_assignment: Assignment,
    pub best_penalty: f64,
    /// `μ₂` of the returned assignment (`0.0` when undefined).
    pub best_mu2: f64,
    pub feasible: bool,
    pub trace: Vec<TraceRow>,
    pub iterations_run: usize,
    pub seed: u64,
}

impl OptimizationResult {
    /// Trace CSV; a `phase` column is appended when rows carry one.
    pub fn trace_csv(&self) -> String {
        let phased = self.trace.iter().any(|r| r.phase.is_some());
        let mut out = String::from("iter,temperature,penalty,mu2,feasible,accepted");
        if phased {
            out.push_str(",phase");
        }
        out.push('\n');
        for r in &self.trace {
            let mu2 = r.mu2.map(|m| m.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                r.iter, r.temperature, r.penalty, mu2, r.feasible, r.accepted
            ));
            if phased {
                out.push(',');
                out.push_str(r.phase.map(Phase::label).unwrap_or(""));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs CSA from a random full-budget initialization.
pub fn anneal(inst: &ProblemInstance, params: &CsaParams) -> Result<OptimizationResult> {
    anneal_with(inst, params, &HypergraphObjective)
}

pub fn anneal_with(inst: &ProblemInstance, params: &CsaParams, objective: &dyn Objective) -> Result<OptimizationResult> {
    params.validate(inst)?;
    let mut rng = rng::seeded(params.seed);
    let init = initialize_assignment(inst, params, &mut rng)?;
    anneal_from(inst, params, objective, init, &mut rng)
}

/// Annealing loop from a given starting assignment.
///
/// Runs while `T > T_th` and `t < t_max`, with Metropolis acceptance on the
/// penalized objective and `T ← a_c T` after every proposal. Returns the
/// best feasible state seen, or the best overall when none was feasible.
pub fn anneal_from(
    inst: &ProblemInstance,
    params: &CsaParams,
    objective: &dyn Objective,
    init: Assignment,
    rng: &mut Rng,
) -> Result<OptimizationResult> {
    params.validate(inst)?;
    let n_s = params.swaps_for(inst);
    let mut current = init;
    let mut cur = evaluate(&current, inst, params, objective)?;
    let mut deficiency = cur.deficiency.clone();

    let mut best_any = (current.clone(), cur.clone());
    let mut best_feasible = cur.feasible.then(|| (current.clone(), cur.clone()));
    let mut best_penalty = cur.penalty;

    let mut trace = Vec::new();
    let mut temperature = params.t0;
    let mut t = 0usize;
    while temperature > params.t_th && t < params.t_max {
        let mut proposal = current.clone();
        let mut prop_def = deficiency.clone();
        perturb(&mut proposal, &mut prop_def, params, n_s, rng);
        let cand = evaluate(&proposal, inst, params, objective)?;
        debug_assert_eq!(cand.deficiency, prop_def);

        let accepted = if cur.penalty == f64::NEG_INFINITY {
            true
        } else if cand.penalty == f64::NEG_INFINITY {
            false
        } else {
            let delta = cand.penalty - cur.penalty;
            delta >= 0.0 || rng.gen::<f64>() < (delta / temperature).exp()
        };
        if accepted {
            current = proposal;
            deficiency = prop_def;
            cur = cand;
            if cur.penalty > best_any.1.penalty {
                best_any = (current.clone(), cur.clone());
            }
            if cur.feasible && best_feasible.as_ref().is_none_or(|(_, b)| cur.penalty > b.penalty) {
                best_feasible = Some((current.clone(), cur.clone()));
            }
            best_penalty = best_penalty.max(cur.penalty);
        }
        #[cfg(debug_assertions)]
        if t.is_multiple_of(1000) {
            assert_eq!(deficiency, instance::deficiency(inst.energies(), &current));
        }
        t += 1;
        trace.push(TraceRow {
            iter: t,
            temperature,
            penalty: cur.penalty,
            mu2: cur.mu2,
            feasible: cur.feasible,
            accepted,
            best_penalty,
            phase: None,
        });
        temperature *= params.a_c;
    }

    let (best_assignment, best_eval) = best_feasible.unwrap_or(best_any);
    Ok(OptimizationResult {
        best_assignment,
        best_penalty: best_eval.penalty,
        best_mu2: best_eval.mu2.unwrap_or(0.0),
        feasible: best_eval.feasible,
        trace,
        iterations_run: t,
        seed: params.seed,
    })
}

/// Independent runs on derived seeds, merged by feasibility then penalty.
pub fn anneal_restarts(
    inst: &ProblemInstance,
    params: &CsaParams,
    objective: &dyn Objective,
    runs: usize,
) -> Result<OptimizationResult> {
    let results = par::map_range(runs.max(1), |r| {
        let mut p = params.clone();
        p.seed = rng::stream_seed(params.seed, "csa-restart", &[r as u64]);
        anneal_with(inst, &p, objective)
    });
    let mut best: Option<OptimizationResult> = None;
    for res in results {
        let res = res?;
        let better = match &best {
            None => true,
            Some(b) => (res.feasible, res.best_penalty) > (b.feasible, b.best_penalty),
        };
        if better {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one run"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_edge_list;

    fn params() -> CsaParams {
        CsaParams {
            t_max: 300,
            ..CsaParams::default()
        }
    }

    #[test]
    fn initialization_spends_full_budgets() {
        let a = Assignment::zeros(2, 4);
        let inst = ProblemInstance::from_parts(vec![3, 2], vec![1, 1, 1, 1], a).unwrap();
        let mut r = rng::seeded(1);
        let init = initialize_assignment(&inst, &params(), &mut r).unwrap();
        assert_eq!(init.row_sums(), vec![3, 2]);
    }

    #[test]
    fn initialization_in_packs() {
        let a = Assignment::zeros(1, 5);
        let inst = ProblemInstance::from_parts(vec![5], vec![1; 5], a).unwrap();
        let p = CsaParams {
            pack_size: 2,
            ..params()
        };
        for seed in 0..50 {
            let mut r = rng::seeded(seed);
            let init = initialize_assignment(&inst, &p, &mut r).unwrap();
            assert_eq!(init.row_sum(0), 5);
            let odd = init.row(0).iter().filter(|&&w| w % 2 == 1).count();
            assert_eq!(odd, 1, "{:?}", init.row(0));
        }
    }

    #[test]
    fn initialization_is_seeded_and_checks_totals() {
        let a = Assignment::zeros(3, 3);
        let inst = ProblemInstance::from_parts(vec![4, 4, 4], vec![2, 2, 2], a.clone()).unwrap();
        let x = initialize_assignment(&inst, &params(), &mut rng::seeded(9)).unwrap();
        let y = initialize_assignment(&inst, &params(), &mut rng::seeded(9)).unwrap();
        assert_eq!(x, y);
        let short = ProblemInstance::from_parts(vec![1, 1, 1], vec![2, 2, 2], a).unwrap();
        assert!(matches!(
            initialize_assignment(&short, &params(), &mut rng::seeded(0)),
            Err(Error::InfeasibleTotals { .. })
        ));
    }

    #[test]
    fn evaluate_feasible_is_mu2() {
        let inst = parse_edge_list("t1: a b\nt2: b c\n").unwrap();
        let p = params();
        let e = evaluate(inst.assignment(), &inst, &p, &HypergraphObjective).unwrap();
        let mu2 = spectral::SpectralBundle::from_instance(&inst, Default::default())
            .unwrap()
            .mu2();
        assert!(e.feasible);
        assert_eq!(e.penalty, mu2);
    }

    #[test]
    fn evaluate_hinge_terms() {
        // task 0 needs 4 and gets 6; agent 0 is 3 over budget
        let a = Assignment::from_rows(&[vec![4, 1], vec![2, 1]]);
        let inst = ProblemInstance::from_parts(vec![2, 3], vec![4, 2], a.clone()).unwrap();
        let p = params();
        let e = evaluate(&a, &inst, &p, &HypergraphObjective).unwrap();
        assert_eq!(e.deficiency, vec![-2, 0]);
        let mu2 = spectral::active_mu2(inst.energies(), &a).unwrap().unwrap();
        assert!((e.penalty - (mu2 - 30.0)).abs() < 1e-12);
        assert!(!e.feasible);
    }

    #[test]
    fn evaluate_disconnected_is_sentinel() {
        let a = Assignment::from_rows(&[vec![1, 0], vec![0, 1]]);
        let inst = ProblemInstance::from_parts(vec![1, 1], vec![1, 1], a.clone()).unwrap();
        let e = evaluate(&a, &inst, &params(), &HypergraphObjective).unwrap();
        assert_eq!(e.penalty, f64::NEG_INFINITY);
        assert_eq!(e.deficiency, vec![0, 0]);
    }

    #[test]
    fn guided_move_bookkeeping() {
        let mut a = Assignment::from_rows(&[vec![0, 2], vec![0, 2]]);
        let mut def = vec![2, -2];
        let p = CsaParams {
            p_guided: 1.0,
            ..params()
        };
        let stats = perturb(&mut a, &mut def, &p, 1, &mut rng::seeded(3));
        assert_eq!(stats.guided, 1);
        assert_eq!(def, vec![1, -1]);
        assert_eq!(a.col_sums(), vec![1, 3]);
        assert_eq!(a.row_sums(), vec![2, 2]);
    }

    #[test]
    fn without_shortfall_only_swaps_happen() {
        let mut a = Assignment::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        let mut def = vec![0, -1, 0];
        let p = CsaParams {
            p_guided: 1.0,
            ..params()
        };
        let stats = perturb(&mut a, &mut def, &p, 50, &mut rng::seeded(5));
        assert_eq!(stats.guided, 0);
        assert_eq!(def, vec![0, -1, 0]);
        assert_eq!(a.col_sums(), vec![2, 2, 2]);
        assert_eq!(a.row_sums(), vec![2, 2, 2]);
    }

    #[test]
    fn frozen_optimal_instance_returns_initialization() {
        let inst = parse_edge_list("t1: a b c\n").unwrap();
        let p = CsaParams {
            t0: 1e-300,
            t_th: 1e-301,
            ..params()
        };
        let res = anneal(&inst, &p).unwrap();
        assert_eq!(&res.best_assignment, inst.assignment());
        assert!(res.feasible);
    }

    #[test]
    fn anneal_is_deterministic() {
        let inst = parse_edge_list("t1: a b\nt2: b c d\nt3: d e\nt4: a e\n").unwrap();
        let p = CsaParams {
            seed: 11,
            ..params()
        };
        let x = anneal(&inst, &p).unwrap();
        let y = anneal(&inst, &p).unwrap();
        assert_eq!(x.trace, y.trace);
        assert_eq!(x.best_assignment, y.best_assignment);
        assert!(x.trace.windows(2).all(|w| w[1].best_penalty >= w[0].best_penalty));
    }

    #[test]
    fn params_validation() {
        let inst = parse_edge_list("t1: a b\n").unwrap();
        let mut p = params();
        p.a_c = 1.0;
        assert!(p.validate(&inst).is_err());
        let mut p = params();
        p.t0 = p.t_th;
        assert!(p.validate(&inst).is_err());
        let mut p = params();
        p.lambda = Weights::PerItem(vec![1.0, 2.0]);
        assert!(p.validate(&inst).is_err());
        let json = r#"{"T0": 2.0, "a_c": 0.99, "lambda": [1.0], "factor_coeffs": [0.5, 0.0]}"#;
        let p: CsaParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.t0, 2.0);
        assert_eq!(p.t_max, 50_000);
        assert!(p.validate(&inst).is_ok());
    }
}
