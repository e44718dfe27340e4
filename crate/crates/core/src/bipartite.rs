//! Bipartite (agent/task) representation of an assignment.
//!
//! The walk alternates agent → task → agent, so `P^B` is 2-periodic. Its
//! square `P*` is block-diagonal and the agent block reproduces the
//! hypergraph walk exactly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph;
use crate::instance::{Assignment, ProblemInstance};
use crate::spectral::{self, Connectivity};

/// Adjacency `[[0, W∘χ], [(B∘χ)ᵀ, 0]]` and degree diagonal `diag(D_V, D_E)`.
pub fn bipartite_adjacency(energies: &[u64], a: &Assignment) -> (DMatrix<f64>, DVector<f64>) {
    let (n, k) = (a.n_agents(), a.n_tasks());
    let mut adj = DMatrix::zeros(n + k, n + k);
    let mut deg = DVector::zeros(n + k);
    for (i, t, units) in a.nonzeros() {
        let omega = energies[t] as f64;
        adj[(i, n + t)] = omega;
        adj[(n + t, i)] = units as f64;
        deg[i] += omega;
        deg[n + t] += units as f64;
    }
    (adj, deg)
}

/// `P^B = (D^B)⁻¹ A^B`.
pub fn bipartite_transition(energies: &[u64], a: &Assignment) -> Result<DMatrix<f64>> {
    let n = a.n_agents();
    let (mut adj, deg) = bipartite_adjacency(energies, a);
    for (idx, (mut row, d)) in adj.row_iter_mut().zip(deg.iter()).enumerate() {
        if *d <= 0.0 {
            return Err(if idx < n {
                Error::IsolatedAgent(idx)
            } else {
                Error::EmptyTask(idx - n)
            });
        }
        row /= *d;
    }
    Ok(adj)
}

/// `P* = (P^B)²`.
pub fn two_step(p_b: &DMatrix<f64>) -> DMatrix<f64> {
    p_b * p_b
}

/// Stationary distribution of `P^B` by direct solve. Power iteration would
/// oscillate on this periodic chain; the solve returns the time-average
/// (Cesàro) distribution.
pub fn bipartite_stationary(p_b: &DMatrix<f64>) -> Result<DVector<f64>> {
    spectral::stationary_direct(p_b)
}

/// `L^B = Π^B − (Π^B P^B + (P^B)ᵀ Π^B)/2`.
pub fn bipartite_laplacian(p_b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let pi = bipartite_stationary(p_b)?;
    Ok(spectral::laplacian(p_b, &pi))
}

/// Stationary distribution of `P*`: each diagonal block solved on its own
/// and given total mass 1/2.
pub fn two_step_stationary(p_star: &DMatrix<f64>, n_agents: usize) -> Result<DVector<f64>> {
    let total = p_star.nrows();
    let upper = p_star.view((0, 0), (n_agents, n_agents)).into_owned();
    let lower = p_star
        .view((n_agents, n_agents), (total - n_agents, total - n_agents))
        .into_owned();
    let pa = spectral::stationary_direct(&upper)?;
    let pt = spectral::stationary_direct(&lower)?;
    Ok(DVector::from_iterator(
        total,
        pa.iter().chain(pt.iter()).map(|x| x * 0.5),
    ))
}

/// `L* = Π* − (Π* P* + P*ᵀ Π*)/2`, block-diagonal.
pub fn two_step_laplacian(p_star: &DMatrix<f64>, n_agents: usize) -> Result<DMatrix<f64>> {
    let pi = two_step_stationary(p_star, n_agents)?;
    Ok(spectral::laplacian(p_star, &pi))
}

/// Everything derived from the bipartite walk of one assignment.
#[derive(Debug, Clone)]
pub struct BipartiteBundle {
    pub n_agents: usize,
    pub n_tasks: usize,
    pub adjacency: DMatrix<f64>,
    pub degree: DVector<f64>,
    pub p_b: DMatrix<f64>,
    pub pi_b: DVector<f64>,
    pub l_b: DMatrix<f64>,
    pub p_star: DMatrix<f64>,
    pub l_star: DMatrix<f64>,
}

impl BipartiteBundle {
    /// Requires a connected assignment.
    pub fn compute(energies: &[u64], a: &Assignment) -> Result<Self> {
        let components = graph::bipartite_component_count(a);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        let (adjacency, degree) = bipartite_adjacency(energies, a);
        let p_b = bipartite_transition(energies, a)?;
        let pi_b = bipartite_stationary(&p_b)?;
        let l_b = spectral::laplacian(&p_b, &pi_b);
        let p_star = two_step(&p_b);
        let l_star = two_step_laplacian(&p_star, a.n_agents())?;
        Ok(Self {
            n_agents: a.n_agents(),
            n_tasks: a.n_tasks(),
            adjacency,
            degree,
            p_b,
            pi_b,
            l_b,
            p_star,
            l_star,
        })
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        Self::compute(inst.energies(), inst.assignment())
    }

    /// `index,mode,id,pi` dump of the bipartite stationary distribution.
    pub fn stationary_csv(&self, inst: &ProblemInstance) -> String {
        let mut out = String::from("index,mode,id,pi\n");
        for (idx, p) in self.pi_b.iter().enumerate() {
            let (mode, id) = if idx < self.n_agents {
                ("agent", &inst.agent_ids()[idx])
            } else {
                ("task", &inst.task_ids()[idx - self.n_agents])
            };
            out.push_str(&format!("{idx},{mode},{id},{p}\n"));
        }
        out
    }
}

/// Full spectrum of `L^B`; with `AllowDisconnected` each component's walk
/// is solved separately.
pub fn bipartite_spectrum(energies: &[u64], a: &Assignment, mode: Connectivity) -> Result<Vec<f64>> {
    let p_b = bipartite_transition(energies, a)?;
    let (labels, components) = graph::bipartite_components(a);
    let pi = if components == 1 {
        bipartite_stationary(&p_b)?
    } else if mode == Connectivity::AllowDisconnected {
        spectral::blockwise_stationary(&p_b, &labels, components, spectral::stationary_direct)?
    } else {
        return Err(Error::Disconnected { components });
    };
    Ok(spectral::spectrum(&spectral::laplacian(&p_b, &pi)))
}

/// `μ₂(L^B)`.
pub fn bipartite_connectivity(energies: &[u64], a: &Assignment, mode: Connectivity) -> Result<f64> {
    Ok(bipartite_spectrum(energies, a, mode)?.get(1).copied().unwrap_or(0.0))
}

/// `μ₂(L^B)` over agents with positive totals and tasks with positive
/// totals; `Ok(None)` when that part is disconnected.
pub fn active_bipartite_mu2(energies: &[u64], a: &Assignment) -> Result<Option<f64>> {
    let Some((energies, a)) = spectral::active_subassignment(energies, a) else {
        return Ok(None);
    };
    if graph::bipartite_component_count(&a) != 1 {
        return Ok(None);
    }
    bipartite_connectivity(&energies, &a, Connectivity::Require).map(Some)
}
