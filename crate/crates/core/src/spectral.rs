//! Random walk on an edge-dependent vertex-weighted hypergraph and the
//! symmetric Laplacian built from it.
//!
//! A walker at agent `i` picks a task `k` with probability `ω(k)/d(i)`
//! (task weight over the agent's weighted degree), then an agent `j` of that
//! task with probability `γ(j,k)/δ(k)`. Task weight is the task's energy
//! requirement and member weight is the energy the member spends on it:
//!
//! ```text
//! P = D_V⁻¹ W D_E⁻¹ Rᵀ
//! L = Π − (ΠP + PᵀΠ)/2        Π = diag(π),  πP = π
//! ```
//!
//! The second-smallest eigenvalue of `L` (the algebraic connectivity) is the
//! objective maximized by the optimizers in this crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph;
use crate::instance::{Assignment, ProblemInstance};

/// Above this size the stationary distribution is found by power iteration
/// instead of a dense linear solve.
pub const DENSE_STATIONARY_LIMIT: usize = 512;
pub const POWER_ITERATION_TOL: f64 = 1e-12;
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// Whether spectral operations accept hypergraphs with several components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Require,
    AllowDisconnected,
}

/// The four matrices defining the EDVW random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct EdvwMatrices {
    /// `W_ik = E_k` where agent `i` works on task `k`.
    pub w: DMatrix<f64>,
    /// `R_ik = B_ik`.
    pub r: DMatrix<f64>,
    /// Agent weighted degrees `d(v_i) = Σ_{k ∋ i} E_k`.
    pub d_v: DVector<f64>,
    /// Task weighted degrees `δ(e_k) = Σ_i B_ik`.
    pub d_e: DVector<f64>,
}

impl EdvwMatrices {
    pub fn build(energies: &[u64], a: &Assignment) -> Result<Self> {
        let (n, k) = (a.n_agents(), a.n_tasks());
        assert_eq!(energies.len(), k, "energy vector length");
        let mut w = DMatrix::zeros(n, k);
        let mut r = DMatrix::zeros(n, k);
        let mut d_v = DVector::zeros(n);
        let mut d_e = DVector::zeros(k);
        for (i, t, units) in a.nonzeros() {
            let omega = energies[t] as f64;
            w[(i, t)] = omega;
            r[(i, t)] = units as f64;
            d_v[i] += omega;
            d_e[t] += units as f64;
        }
        if let Some(i) = d_v.iter().position(|&d| d <= 0.0) {
            return Err(Error::IsolatedAgent(i));
        }
        if let Some(t) = d_e.iter().position(|&d| d <= 0.0) {
            return Err(Error::EmptyTask(t));
        }
        Ok(Self { w, r, d_v, d_e })
    }

    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        Self::build(inst.energies(), inst.assignment())
    }

    pub fn n_agents(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_tasks(&self) -> usize {
        self.w.ncols()
    }
}

/// `P = D_V⁻¹ W D_E⁻¹ Rᵀ`.
pub fn transition_matrix(m: &EdvwMatrices) -> Result<DMatrix<f64>> {
    if m.d_v.iter().any(|&d| d <= 0.0) || m.d_e.iter().any(|&d| d <= 0.0) {
        return Err(Error::Singular("degree matrix has a zero diagonal entry".into()));
    }
    let mut left = m.w.clone();
    for (mut row, d) in left.row_iter_mut().zip(m.d_v.iter()) {
        row /= *d;
    }
    // D_E⁻¹ Rᵀ, K × N
    let mut right = m.r.transpose();
    for (mut row, d) in right.row_iter_mut().zip(m.d_e.iter()) {
        row /= *d;
    }
    Ok(left * right)
}

/// Left Perron vector of a row-stochastic matrix.
///
/// Dense solve up to [`DENSE_STATIONARY_LIMIT`], power iteration above it.
/// The input must be irreducible; for the dense path periodicity is fine.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    if p.nrows() <= DENSE_STATIONARY_LIMIT {
        stationary_direct(p)
    } else {
        stationary_power(p, POWER_ITERATION_TOL, POWER_ITERATION_CAP)
    }
}

/// Solves `(Pᵀ − I) π = 0` with the last equation replaced by `Σπ = 1`.
pub fn stationary_direct(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    let mut a = p.transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationary system is singular (reducible chain?)".into()))?;
    Ok(clean_probability(pi))
}

/// Power iteration `π ← πP` until the L1 change drops below `tol`.
pub fn stationary_power(p: &DMatrix<f64>, tol: f64, cap: usize) -> Result<DVector<f64>> {
    let n = p.nrows();
    let pt = p.transpose();
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..cap {
        let next = &pt * &pi;
        let delta: f64 = (&next - &pi).iter().map(|x| x.abs()).sum();
        pi = next;
        if delta < tol {
            return Ok(clean_probability(pi));
        }
    }
    Err(Error::NonConvergence { iterations: cap })
}

fn clean_probability(mut pi: DVector<f64>) -> DVector<f64> {
    for x in pi.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    let s = pi.sum();
    pi /= s;
    pi
}

/// `L = Π − (ΠP + PᵀΠ)/2`, symmetrized to scrub rounding asymmetry.
pub fn laplacian(p: &DMatrix<f64>, pi: &DVector<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let mut l = DMatrix::from_fn(n, n, |i, j| -0.5 * (pi[i] * p[(i, j)] + pi[j] * p[(j, i)]));
    for i in 0..n {
        l[(i, i)] += pi[i];
    }
    let lt = l.transpose();
    (l + lt) * 0.5
}

/// Eigenvalues in ascending order, with multiplicity.
pub fn spectrum(l: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Second-smallest eigenvalue of a symmetric Laplacian (`0.0` for 1×1).
pub fn algebraic_connectivity(l: &DMatrix<f64>) -> f64 {
    spectrum(l).get(1).copied().unwrap_or(0.0)
}

/// Transition matrix, stationary distribution, Laplacian and spectrum for
/// one assignment.
#[derive(Debug, Clone)]
pub struct SpectralBundle {
    pub p: DMatrix<f64>,
    pub pi: DVector<f64>,
    pub l: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub components: usize,
}

impl SpectralBundle {
    pub fn compute(energies: &[u64], a: &Assignment, mode: Connectivity) -> Result<Self> {
        let m = EdvwMatrices::build(energies, a)?;
        let p = transition_matrix(&m)?;
        let (labels, components) = graph::agent_components(a, &vec![true; a.n_agents()]);
        let pi = if components == 1 {
            stationary_distribution(&p)?
        } else {
            if mode == Connectivity::Require {
                return Err(Error::Disconnected { components });
            }
            let labels: Vec<usize> = labels.into_iter().map(|l| l.expect("all agents active")).collect();
            blockwise_stationary(&p, &labels, components, stationary_distribution)?
        };
        let l = laplacian(&p, &pi);
        let eigenvalues = spectrum(&l);
        Ok(Self {
            p,
            pi,
            l,
            eigenvalues,
            components,
        })
    }

    pub fn from_instance(inst: &ProblemInstance, mode: Connectivity) -> Result<Self> {
        Self::compute(inst.energies(), inst.assignment(), mode)
    }

    pub fn mu2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }
}

/// Stationary distribution of a block-diagonal (reducible) chain: each
/// component gets its own Perron vector scaled by its share of nodes.
pub fn blockwise_stationary(
    p: &DMatrix<f64>,
    labels: &[usize],
    components: usize,
    solver: fn(&DMatrix<f64>) -> Result<DVector<f64>>,
) -> Result<DVector<f64>> {
    let n = p.nrows();
    let mut pi = DVector::zeros(n);
    for c in 0..components {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let sub = p.select_rows(&idx).select_columns(&idx);
        let local = solver(&sub)?;
        let share = idx.len() as f64 / n as f64;
        for (pos, &i) in idx.iter().enumerate() {
            pi[i] = local[pos] * share;
        }
    }
    Ok(pi)
}

/// Algebraic connectivity of the sub-hypergraph spanned by agents and tasks
/// with positive totals. `Ok(None)` when that sub-hypergraph is
/// disconnected or has fewer than two agents.
pub fn active_mu2(energies: &[u64], a: &Assignment) -> Result<Option<f64>> {
    let Some(sub) = active_subassignment(energies, a) else {
        return Ok(None);
    };
    let (energies, a) = sub;
    let (_, components) = graph::agent_components(&a, &vec![true; a.n_agents()]);
    if components != 1 {
        return Ok(None);
    }
    let m = EdvwMatrices::build(&energies, &a)?;
    let p = transition_matrix(&m)?;
    let pi = stationary_distribution(&p)?;
    Ok(Some(algebraic_connectivity(&laplacian(&p, &pi))))
}

/// Restriction to agents with positive row sums and tasks with positive
/// column sums. `None` when fewer than two agents are active.
pub fn active_subassignment(energies: &[u64], a: &Assignment) -> Option<(Vec<u64>, Assignment)> {
    let agents: Vec<usize> = (0..a.n_agents()).filter(|&i| a.row_sum(i) > 0).collect();
    if agents.len() < 2 {
        return None;
    }
    let cols = a.col_sums();
    let tasks: Vec<usize> = (0..a.n_tasks()).filter(|&k| cols[k] > 0).collect();
    if agents.len() == a.n_agents() && tasks.len() == a.n_tasks() {
        return Some((energies.to_vec(), a.clone()));
    }
    let rows: Vec<Vec<u64>> = agents
        .iter()
        .map(|&i| tasks.iter().map(|&k| a.get(i, k)).collect())
        .collect();
    Some((tasks.iter().map(|&k| energies[k]).collect(), Assignment::from_rows(&rows)))
}

/// Solution of `dx/dt = −L x` sampled at the requested times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 0..n {
            out.push_str(&format!(",x_{i}"));
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in x {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Largest deviation from `target` at each sample.
    pub fn distance_to(&self, target: f64) -> Vec<f64> {
        self.states
            .iter()
            .map(|x| x.iter().map(|v| (v - target).abs()).fold(0.0, f64::max))
            .collect()
    }
}

/// `x(t) = Σ exp(−μ_i t) v_i v_iᵀ x(0)` via a full eigendecomposition.
pub fn diffuse(l: &DMatrix<f64>, x0: &[f64], times: &[f64]) -> Result<Trajectory> {
    let n = l.nrows();
    if x0.len() != n {
        return Err(Error::InvalidParameter(format!(
            "initial state has length {}, expected {n}",
            x0.len()
        )));
    }
    if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("times must be nonnegative and sorted".into()));
    }
    let eig = SymmetricEigen::new(l.clone());
    let x = DVector::from_column_slice(x0);
    let coeffs = eig.eigenvectors.transpose() * &x;
    let states = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return x0.to_vec();
            }
            let scaled = DVector::from_fn(n, |i, _| coeffs[i] * (-eig.eigenvalues[i] * t).exp());
            (&eig.eigenvectors * scaled).iter().copied().collect()
        })
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Spectrum dump: `index,eigenvalue`.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, ev) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{ev}\n"));
    }
    out
}
