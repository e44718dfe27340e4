//! Problem data model: agents with budgets, tasks with energy requirements,
//! and the integer assignment matrix between them.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph;

/// Dense row-major integer matrix of energy units, agents × tasks.
#[derive(Clone, PartialEq, Eq)]
pub struct Assignment {
    n_agents: usize,
    n_tasks: usize,
    data: Vec<u64>,
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u64]> = (0..self.n_agents).map(|i| self.row(i)).collect();
        f.debug_struct("Assignment")
            .field("n_agents", &self.n_agents)
            .field("n_tasks", &self.n_tasks)
            .field("rows", &rows)
            .finish()
    }
}

impl Assignment {
    pub fn zeros(n_agents: usize, n_tasks: usize) -> Self {
        Self {
            n_agents,
            n_tasks,
            data: vec![0; n_agents * n_tasks],
        }
    }

    /// Builds from row vectors. Panics if rows are ragged.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n_tasks = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_tasks), "ragged rows");
        Self {
            n_agents: rows.len(),
            n_tasks,
            data: rows.concat(),
        }
    }

    #[inline]
    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    #[inline]
    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    #[inline]
    pub fn get(&self, agent: usize, task: usize) -> u64 {
        self.data[agent * self.n_tasks + task]
    }

    #[inline]
    pub fn set(&mut self, agent: usize, task: usize, value: u64) {
        self.data[agent * self.n_tasks + task] = value;
    }

    #[inline]
    pub fn add(&mut self, agent: usize, task: usize, units: u64) {
        self.data[agent * self.n_tasks + task] += units;
    }

    /// Removes `units` from an entry. Panics on underflow.
    #[inline]
    pub fn take(&mut self, agent: usize, task: usize, units: u64) {
        let slot = &mut self.data[agent * self.n_tasks + task];
        *slot = slot.checked_sub(units).expect("assignment underflow");
    }

    pub fn row(&self, agent: usize) -> &[u64] {
        &self.data[agent * self.n_tasks..(agent + 1) * self.n_tasks]
    }

    pub fn zero_row(&mut self, agent: usize) {
        let n = self.n_tasks;
        self.data[agent * n..(agent + 1) * n].fill(0);
    }

    pub fn row_sum(&self, agent: usize) -> u64 {
        self.row(agent).iter().sum()
    }

    pub fn col_sum(&self, task: usize) -> u64 {
        (0..self.n_agents).map(|i| self.get(i, task)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.n_agents).map(|i| self.row_sum(i)).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut out = vec![0; self.n_tasks];
        for i in 0..self.n_agents {
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += w;
            }
        }
        out
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    /// Agents with a positive entry in `task`, ascending.
    pub fn agents_of(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_agents).filter(move |&i| self.get(i, task) > 0)
    }

    /// Tasks with a positive entry for `agent`, ascending.
    pub fn tasks_of(&self, agent: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(agent)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(|(k, _)| k)
    }

    /// Positive entries as `(agent, task, weight)` in row-major order.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(move |(idx, &w)| (idx / self.n_tasks, idx % self.n_tasks, w))
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        IncidenceMatrix {
            n_agents: self.n_agents,
            n_tasks: self.n_tasks,
            bits: self.data.iter().map(|&w| w > 0).collect(),
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            n_agents: self.n_agents,
            n_tasks: self.n_tasks,
            data: self.data.iter().map(|w| w * factor).collect(),
        }
    }

    /// Rows reordered so that new row `r` is old row `perm[r]`.
    pub fn permute_agents(&self, perm: &[usize]) -> Self {
        let rows: Vec<Vec<u64>> = perm.iter().map(|&p| self.row(p).to_vec()).collect();
        Self::from_rows(&rows)
    }

    /// Number of positive entries.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|&&w| w > 0).count()
    }
}

/// Binary mask `X_ik = 1` iff agent `i` spends energy on task `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n_agents: usize,
    n_tasks: usize,
    bits: Vec<bool>,
}

impl IncidenceMatrix {
    #[inline]
    pub fn get(&self, agent: usize, task: usize) -> bool {
        self.bits[agent * self.n_tasks + task]
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// A task-assignment problem: who has how much energy, what needs how much,
/// and who currently spends what where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    agent_ids: Vec<String>,
    budgets: Vec<u64>,
    task_ids: Vec<String>,
    energies: Vec<u64>,
    assignment: Assignment,
}

impl ProblemInstance {
    /// Checks id uniqueness, dimensions and `E_k >= 1`. Does not require
    /// every task to be covered; loaders add that check.
    pub fn new(
        agent_ids: Vec<String>,
        budgets: Vec<u64>,
        task_ids: Vec<String>,
        energies: Vec<u64>,
        assignment: Assignment,
    ) -> Result<Self> {
        if agent_ids.is_empty() {
            return Err(Error::InvalidInstance("no agents".into()));
        }
        if task_ids.is_empty() {
            return Err(Error::InvalidInstance("no tasks".into()));
        }
        if budgets.len() != agent_ids.len() || energies.len() != task_ids.len() {
            return Err(Error::InvalidInstance("length mismatch".into()));
        }
        if assignment.n_agents() != agent_ids.len() || assignment.n_tasks() != task_ids.len() {
            return Err(Error::InvalidInstance("assignment shape mismatch".into()));
        }
        check_unique(&agent_ids)?;
        check_unique(&task_ids)?;
        if let Some(k) = energies.iter().position(|&e| e == 0) {
            return Err(Error::InvalidInstance(format!(
                "task `{}` has zero energy",
                task_ids[k]
            )));
        }
        Ok(Self {
            agent_ids,
            budgets,
            task_ids,
            energies,
            assignment,
        })
    }

    /// Instance with default ids `a0..`, `t0..`.
    pub fn from_parts(budgets: Vec<u64>, energies: Vec<u64>, assignment: Assignment) -> Result<Self> {
        let agent_ids = (0..budgets.len()).map(|i| format!("a{i}")).collect();
        let task_ids = (0..energies.len()).map(|k| format!("t{k}")).collect();
        Self::new(agent_ids, budgets, task_ids, energies, assignment)
    }

    /// Unit-weight instance with budgets and energies set to the row and
    /// column sums of the assignment.
    pub fn from_assignment(assignment: Assignment) -> Result<Self> {
        let budgets = assignment.row_sums();
        let energies = assignment.col_sums();
        Self::from_parts(budgets, energies, assignment)
    }

    pub fn n_agents(&self) -> usize {
        self.agent_ids.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.task_ids.len()
    }

    pub fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    pub fn task_ids(&self) -> &[String] {
        &self.task_ids
    }

    pub fn budgets(&self) -> &[u64] {
        &self.budgets
    }

    pub fn energies(&self) -> &[u64] {
        &self.energies
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn total_budget(&self) -> u64 {
        self.budgets.iter().sum()
    }

    pub fn total_energy(&self) -> u64 {
        self.energies.iter().sum()
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agent_ids.iter().position(|a| a == id)
    }

    /// Same agents and tasks with a different assignment.
    pub fn with_assignment(&self, assignment: Assignment) -> Result<Self> {
        if assignment.n_agents() != self.n_agents() || assignment.n_tasks() != self.n_tasks() {
            return Err(Error::InvalidInstance("assignment shape mismatch".into()));
        }
        Ok(Self {
            assignment,
            ..self.clone()
        })
    }

    /// Same structure with replaced budgets.
    pub fn with_budgets(&self, budgets: Vec<u64>) -> Result<Self> {
        if budgets.len() != self.n_agents() {
            return Err(Error::InvalidInstance("budget length mismatch".into()));
        }
        Ok(Self {
            budgets,
            ..self.clone()
        })
    }

    /// Agents with zero budget; optimizers leave them untouched.
    pub fn zero_budget_agents(&self) -> Vec<usize> {
        self.budgets
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Errors if some task has no assigned agent.
    pub fn require_covered_tasks(&self) -> Result<()> {
        let cols = self.assignment.col_sums();
        match cols.iter().position(|&c| c == 0) {
            Some(k) => Err(Error::EmptyHyperedge(self.task_ids[k].clone())),
            None => Ok(()),
        }
    }
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// Constraint audit of an instance's current assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Total budget covers total energy.
    pub feasible_total: bool,
    /// `E_k - sum_i B_ik`; negative when a task is over-provisioned.
    pub deficiency: Vec<i64>,
    /// `(sum_k B_ik - B_i)^+`.
    pub overrun: Vec<u64>,
    pub connected: bool,
}

impl ValidationReport {
    /// All task demands met and no agent over budget.
    pub fn is_feasible(&self) -> bool {
        self.deficiency.iter().all(|&d| d <= 0) && self.overrun.iter().all(|&o| o == 0)
    }

    /// Sum of positive deficiencies.
    pub fn unmet_energy(&self) -> u64 {
        self.deficiency.iter().filter(|&&d| d > 0).map(|&d| d as u64).sum()
    }
}

/// Per-task deficiency `E_k - sum_i B_ik`.
pub fn deficiency(energies: &[u64], a: &Assignment) -> Vec<i64> {
    a.col_sums()
        .iter()
        .zip(energies)
        .map(|(&c, &e)| e as i64 - c as i64)
        .collect()
}

/// Per-agent overrun `(sum_k B_ik - B_i)^+`.
pub fn overrun(budgets: &[u64], a: &Assignment) -> Vec<u64> {
    a.row_sums()
        .iter()
        .zip(budgets)
        .map(|(&r, &b)| r.saturating_sub(b))
        .collect()
}

pub fn validate(inst: &ProblemInstance) -> ValidationReport {
    ValidationReport {
        feasible_total: inst.total_budget() >= inst.total_energy(),
        deficiency: deficiency(&inst.energies, &inst.assignment),
        overrun: overrun(&inst.budgets, &inst.assignment),
        connected: is_connected(inst),
    }
}

/// True iff agents and tasks form a single component of the bipartite
/// membership graph.
pub fn is_connected(inst: &ProblemInstance) -> bool {
    graph::bipartite_component_count(&inst.assignment) == 1
}

/// Agent adjacency: `i ~ j` iff they share a task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoMembershipGraph {
    adjacency: Vec<Vec<usize>>,
}

impl CoMembershipGraph {
    pub fn from_assignment(a: &Assignment) -> Self {
        let n = a.n_agents();
        let mut stamp = vec![usize::MAX; n];
        let members: Vec<Vec<usize>> = (0..a.n_tasks()).map(|k| a.agents_of(k).collect()).collect();
        let adjacency = (0..n)
            .map(|i| {
                let mut nb = Vec::new();
                stamp[i] = i;
                for k in a.tasks_of(i) {
                    for &j in &members[k] {
                        if stamp[j] != i {
                            stamp[j] = i;
                            nb.push(j);
                        }
                    }
                }
                nb.sort_unstable();
                nb
            })
            .collect();
        Self { adjacency }
    }

    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn n_agents(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.adjacency[agent].len()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

pub fn co_membership_graph(inst: &ProblemInstance) -> CoMembershipGraph {
    CoMembershipGraph::from_assignment(&inst.assignment)
}

/// Number of distinct tasks per agent.
pub fn task_counts(a: &Assignment) -> Vec<usize> {
    (0..a.n_agents()).map(|i| a.tasks_of(i).count()).collect()
}

/// Number of distinct agents per task.
pub fn member_counts(a: &Assignment) -> Vec<usize> {
    let mut out = vec![0; a.n_tasks()];
    for (_, k, _) in a.nonzeros() {
        out[k] += 1;
    }
    out
}

/// Number of distinct teammates per agent.
pub fn teammate_counts(a: &Assignment) -> Vec<usize> {
    let g = CoMembershipGraph::from_assignment(a);
    (0..a.n_agents()).map(|i| g.degree(i)).collect()
}

fn mean_of<T: Copy + Into<f64>>(xs: &[T]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().map(|&x| x.into()).sum::<f64>() / xs.len() as f64
}

fn mean_usize(xs: &[usize]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<usize>() as f64 / xs.len() as f64
}

/// `(T̄, Â)`: mean tasks per agent and mean teammates per agent.
pub fn factor_metrics(a: &Assignment) -> (f64, f64) {
    (mean_usize(&task_counts(a)), mean_usize(&teammate_counts(a)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub n_agents: usize,
    pub n_tasks: usize,
    pub mean_budget: f64,
    pub mean_energy: f64,
    /// Mean tasks per agent.
    pub t_bar: f64,
    /// Mean agents per task.
    pub a_bar: f64,
    /// Mean teammates per agent.
    pub a_hat: f64,
}

impl SummaryStats {
    pub const CSV_HEADER: &'static str = "name,N,K,mean_budget,mean_energy,Tbar,Abar,Ahat";

    pub fn csv_row(&self, name: &str) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{:.6},{:.6},{:.6}",
            name,
            self.n_agents,
            self.n_tasks,
            self.mean_budget,
            self.mean_energy,
            self.t_bar,
            self.a_bar,
            self.a_hat
        )
    }
}

pub fn summary_stats(inst: &ProblemInstance) -> SummaryStats {
    let a = &inst.assignment;
    let budgets: Vec<f64> = inst.budgets.iter().map(|&b| b as f64).collect();
    let energies: Vec<f64> = inst.energies.iter().map(|&e| e as f64).collect();
    let (t_bar, a_hat) = factor_metrics(a);
    SummaryStats {
        n_agents: inst.n_agents(),
        n_tasks: inst.n_tasks(),
        mean_budget: mean_of(&budgets),
        mean_energy: mean_of(&energies),
        t_bar,
        a_bar: mean_usize(&member_counts(a)),
        a_hat,
    }
}

// ---------------------------------------------------------------------------
// File formats

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    #[serde(rename = "edgelist")]
    EdgeList,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" | "instance-json" => Ok(Format::Json),
            "edgelist" | "edge-list" => Ok(Format::EdgeList),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AgentRecord {
    id: String,
    budget: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskRecord {
    id: String,
    energy: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntryRecord {
    agent: String,
    task: String,
    weight: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    agents: Vec<AgentRecord>,
    tasks: Vec<TaskRecord>,
    assignment: Vec<EntryRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

pub fn load_instance(path: impl AsRef<Path>, format: Format) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    match format {
        Format::Json => parse_instance_json(&text),
        Format::EdgeList => parse_edge_list(&text),
    }
}

pub fn parse_instance_json(text: &str) -> Result<ProblemInstance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut agent_ids = Vec::with_capacity(file.agents.len());
    let mut budgets = Vec::with_capacity(file.agents.len());
    for rec in file.agents {
        if rec.budget < 0 {
            return Err(Error::InvalidInstance(format!(
                "agent `{}` has negative budget",
                rec.id
            )));
        }
        agent_ids.push(rec.id);
        budgets.push(rec.budget as u64);
    }
    let mut task_ids = Vec::with_capacity(file.tasks.len());
    let mut energies = Vec::with_capacity(file.tasks.len());
    for rec in file.tasks {
        if rec.energy < 1 {
            return Err(Error::InvalidInstance(format!(
                "task `{}` must have energy >= 1",
                rec.id
            )));
        }
        task_ids.push(rec.id);
        energies.push(rec.energy as u64);
    }
    check_unique(&agent_ids)?;
    check_unique(&task_ids)?;
    let agent_index: HashMap<&str, usize> = agent_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let task_index: HashMap<&str, usize> = task_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut assignment = Assignment::zeros(agent_ids.len(), task_ids.len());
    for e in &file.assignment {
        let i = *agent_index
            .get(e.agent.as_str())
            .ok_or_else(|| Error::UnknownId(e.agent.clone()))?;
        let k = *task_index
            .get(e.task.as_str())
            .ok_or_else(|| Error::UnknownId(e.task.clone()))?;
        if e.weight < 0 {
            return Err(Error::NegativeWeight {
                agent: e.agent.clone(),
                task: e.task.clone(),
                weight: e.weight,
            });
        }
        if assignment.get(i, k) > 0 {
            return Err(Error::DuplicateId(format!("{}/{}", e.agent, e.task)));
        }
        assignment.set(i, k, e.weight as u64);
    }
    let inst = ProblemInstance::new(agent_ids, budgets, task_ids, energies, assignment)?;
    inst.require_covered_tasks()?;
    warn_zero_budgets(&inst);
    Ok(inst)
}

fn warn_zero_budgets(inst: &ProblemInstance) {
    let zero = inst.zero_budget_agents();
    if !zero.is_empty() {
        log::warn!("{} agent(s) have zero budget and will be ignored by optimizers", zero.len());
    }
}

/// Parses the text edge-list format:
///
/// ```text
/// # comment
/// t1: alice bob
/// t2(5): bob:3 carol:2
/// ```
///
/// Weights default to 1. Budgets are row sums; energies are column sums
/// unless given in parentheses after the task id.
pub fn parse_edge_list(text: &str) -> Result<ProblemInstance> {
    let mut agent_ids: Vec<String> = Vec::new();
    let mut agent_index: HashMap<String, usize> = HashMap::new();
    let mut task_ids: Vec<String> = Vec::new();
    let mut explicit_energy: Vec<Option<u64>> = Vec::new();
    let mut entries: Vec<Vec<(usize, u64)>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let (head, body) = line.split_once(':').ok_or_else(|| parse_err("missing `:` after task id"))?;
        let head = head.trim();
        let (task_id, energy) = match head.split_once('(') {
            Some((id, rest)) => {
                let num = rest
                    .strip_suffix(')')
                    .ok_or_else(|| parse_err("unclosed `(` in task header"))?;
                let e: i64 = num.trim().parse().map_err(|_| parse_err("bad energy value"))?;
                if e < 1 {
                    return Err(parse_err("task energy must be >= 1"));
                }
                (id.trim(), Some(e as u64))
            }
            None => (head, None),
        };
        if task_id.is_empty() {
            return Err(parse_err("empty task id"));
        }
        if task_ids.iter().any(|t| t == task_id) {
            return Err(Error::DuplicateId(task_id.to_string()));
        }
        let mut row: Vec<(usize, u64)> = Vec::new();
        for tok in body.split_whitespace() {
            let (name, w) = match tok.rsplit_once(':') {
                Some((name, w)) => {
                    let w: i64 = w.parse().map_err(|_| parse_err("bad weight"))?;
                    if w < 0 {
                        return Err(Error::NegativeWeight {
                            agent: name.to_string(),
                            task: task_id.to_string(),
                            weight: w,
                        });
                    }
                    (name, w as u64)
                }
                None => (tok, 1),
            };
            if name.is_empty() {
                return Err(parse_err("empty agent id"));
            }
            let idx = match agent_index.get(name) {
                Some(&i) => i,
                None => {
                    agent_ids.push(name.to_string());
                    agent_index.insert(name.to_string(), agent_ids.len() - 1);
                    agent_ids.len() - 1
                }
            };
            if row.iter().any(|&(j, _)| j == idx) {
                return Err(Error::DuplicateId(format!("{name}/{task_id}")));
            }
            if w > 0 {
                row.push((idx, w));
            }
        }
        if row.is_empty() {
            return Err(Error::EmptyHyperedge(task_id.to_string()));
        }
        task_ids.push(task_id.to_string());
        explicit_energy.push(energy);
        entries.push(row);
    }
    if task_ids.is_empty() {
        return Err(Error::InvalidInstance("edge list contains no tasks".into()));
    }
    let mut assignment = Assignment::zeros(agent_ids.len(), task_ids.len());
    for (k, row) in entries.iter().enumerate() {
        for &(i, w) in row {
            assignment.set(i, k, w);
        }
    }
    let budgets = assignment.row_sums();
    let energies = assignment
        .col_sums()
        .into_iter()
        .zip(&explicit_energy)
        .map(|(c, e)| e.unwrap_or(c))
        .collect();
    let inst = ProblemInstance::new(agent_ids, budgets, task_ids, energies, assignment)?;
    warn_zero_budgets(&inst);
    Ok(inst)
}

/// Serializes in the instance-json schema; `meta` is attached verbatim.
pub fn to_json_value(inst: &ProblemInstance, meta: Option<serde_json::Value>) -> serde_json::Value {
    let file = InstanceFile {
        agents: inst
            .agent_ids
            .iter()
            .zip(&inst.budgets)
            .map(|(id, &b)| AgentRecord {
                id: id.clone(),
                budget: b as i64,
            })
            .collect(),
        tasks: inst
            .task_ids
            .iter()
            .zip(&inst.energies)
            .map(|(id, &e)| TaskRecord {
                id: id.clone(),
                energy: e as i64,
            })
            .collect(),
        assignment: inst
            .assignment
            .nonzeros()
            .map(|(i, k, w)| EntryRecord {
                agent: inst.agent_ids[i].clone(),
                task: inst.task_ids[k].clone(),
                weight: w as i64,
            })
            .collect(),
        meta,
    };
    serde_json::to_value(file).expect("instance serializes")
}

pub fn to_json_string(inst: &ProblemInstance, meta: Option<serde_json::Value>) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(inst, meta)).expect("instance serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(text: &str) -> ProblemInstance {
        parse_edge_list(text).unwrap()
    }

    #[test]
    fn edge_list_single_line() {
        let p = inst("t1: a b\n");
        assert_eq!(p.n_agents(), 2);
        assert_eq!(p.n_tasks(), 1);
        assert_eq!(p.assignment().row(0), &[1]);
        assert_eq!(p.assignment().row(1), &[1]);
        assert_eq!(p.budgets(), &[1, 1]);
        assert_eq!(p.energies(), &[2]);
    }

    #[test]
    fn edge_list_weights_comments_and_energy() {
        let p = inst("# header\n\nt1(3): a:2 b\nt2: b:4 c\n");
        assert_eq!(p.agent_ids(), &["a", "b", "c"]);
        assert_eq!(p.energies(), &[3, 5]);
        assert_eq!(p.budgets(), &[2, 5, 1]);
    }

    #[test]
    fn edge_list_empty_hyperedge_is_rejected() {
        assert!(matches!(parse_edge_list("t1: a\nt2:\n"), Err(Error::EmptyHyperedge(t)) if t == "t2"));
        assert!(matches!(parse_edge_list("t1: a:0\n"), Err(Error::EmptyHyperedge(_))));
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(parse_edge_list("t1: a\nt1: b\n"), Err(Error::DuplicateId(_))));
        assert!(matches!(parse_edge_list("t1: a:-2\n"), Err(Error::NegativeWeight { .. })));
        assert!(matches!(parse_edge_list("t1 a b\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("t1: a:x\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list("t1(0): a\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let p = inst("t1: a:2 b\nt2: b c:3\n");
        let text = to_json_string(&p, None);
        let q = parse_instance_json(&text).unwrap();
        assert_eq!(p, q);

        let dup = r#"{"agents":[{"id":"a","budget":1},{"id":"a","budget":1}],"tasks":[{"id":"t","energy":1}],"assignment":[{"agent":"a","task":"t","weight":1}]}"#;
        assert!(matches!(parse_instance_json(dup), Err(Error::DuplicateId(_))));
        let neg = r#"{"agents":[{"id":"a","budget":1}],"tasks":[{"id":"t","energy":1}],"assignment":[{"agent":"a","task":"t","weight":-1}]}"#;
        assert!(matches!(parse_instance_json(neg), Err(Error::NegativeWeight { .. })));
        let empty = r#"{"agents":[{"id":"a","budget":1}],"tasks":[{"id":"t","energy":1},{"id":"u","energy":1}],"assignment":[{"agent":"a","task":"t","weight":1}]}"#;
        assert!(matches!(parse_instance_json(empty), Err(Error::EmptyHyperedge(t)) if t == "u"));
        let zero_e = r#"{"agents":[{"id":"a","budget":1}],"tasks":[{"id":"t","energy":0}],"assignment":[{"agent":"a","task":"t","weight":1}]}"#;
        assert!(parse_instance_json(zero_e).is_err());
    }

    #[test]
    fn validate_reports() {
        let a = Assignment::from_rows(&[vec![2, 0], vec![1, 3]]);
        let p = ProblemInstance::from_parts(vec![2, 4], vec![3, 3], a).unwrap();
        let r = validate(&p);
        assert!(r.feasible_total);
        assert_eq!(r.deficiency, vec![0, 0]);
        assert_eq!(r.overrun, vec![0, 0]);
        assert!(r.is_feasible());
        assert!(r.connected);

        let a = Assignment::from_rows(&[vec![1], vec![1]]);
        let p = ProblemInstance::from_parts(vec![1, 1], vec![3], a).unwrap();
        let r = validate(&p);
        assert_eq!(r.deficiency, vec![1]);
        assert!(!r.feasible_total);
        assert!(!r.is_feasible());

        let a = Assignment::from_rows(&[vec![4]]);
        let p = ProblemInstance::from_parts(vec![1], vec![1], a).unwrap();
        let r = validate(&p);
        assert_eq!(r.overrun, vec![3]);
        assert_eq!(r.deficiency, vec![-3]);
    }

    #[test]
    fn connectivity_cases() {
        assert!(is_connected(&inst("t1: a b c\n")));
        assert!(!is_connected(&inst("t1: a b\nt2: c d\n")));
        assert!(is_connected(&inst("t1: a b\nt2: b c\n")));
    }

    #[test]
    fn co_membership_cases() {
        let g = co_membership_graph(&inst("t1: a b c\n"));
        for i in 0..3 {
            assert_eq!(g.degree(i), 2);
        }
        let g = co_membership_graph(&inst("t1: a b\nt2: c d\n"));
        assert!(g.are_adjacent(0, 1) && g.are_adjacent(2, 3));
        assert!(!g.are_adjacent(1, 2) && !g.are_adjacent(0, 3));
        let g = co_membership_graph(&inst("t1: a b\nt2: b c\n"));
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[1]);
    }

    #[test]
    fn summary_small_cases() {
        let s = summary_stats(&inst("t1: a b\n"));
        assert_eq!((s.t_bar, s.a_bar, s.a_hat), (1.0, 2.0, 1.0));

        // hub agent in K tasks, one private leaf each
        let k = 6;
        let text: String = (0..k).map(|t| format!("t{t}: hub leaf{t}\n")).collect();
        let p = inst(&text);
        let mates = teammate_counts(p.assignment());
        assert_eq!(mates[p.agent_index("hub").unwrap()], k);
        assert!(mates.iter().enumerate().all(|(i, &m)| i == 0 || m == 1));
    }
}
