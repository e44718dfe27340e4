use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, t_quantile_975};
use crate::error::{Error, Result};
use crate::instance::{self, Assignment, ProblemInstance};
use crate::par;
use crate::rng::{self, Rng};
use crate::spectral::{Connectivity, SpectralBundle};

const SWAP_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    OneNode,
    OneEdge,
    Head2Tail,
    Random,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::OneNode, Scheme::OneEdge, Scheme::Head2Tail, Scheme::Random];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OneNode => "one_node",
            Scheme::OneEdge => "one_edge",
            Scheme::Head2Tail => "head2tail",
            Scheme::Random => "random",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme `{s}`")))
    }
}

/// `N_c` communities of `n_c` nodes each sharing all `m_c` hyperedges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunitySpec {
    pub n_communities: usize,
    pub nodes_per: usize,
    pub edges_per: usize,
    pub scheme: Scheme,
}

impl CommunitySpec {
    pub fn new(n_communities: usize, nodes_per: usize, edges_per: usize, scheme: Scheme) -> Result<Self> {
        if n_communities < 2 || nodes_per < 2 || edges_per < 1 {
            return Err(Error::InvalidParameter(
                "need at least 2 communities of at least 2 nodes and 1 hyperedge".into(),
            ));
        }
        // the centroid gives away one membership per other community
        let centroid_size = match scheme {
            Scheme::OneNode => edges_per,
            Scheme::OneEdge => nodes_per,
            _ => usize::MAX,
        };
        if centroid_size < n_communities - 1 {
            return Err(Error::InvalidParameter(format!(
                "{} needs at least {} memberships on the centroid",
                scheme.name(),
                n_communities - 1
            )));
        }
        Ok(Self {
            n_communities,
            nodes_per,
            edges_per,
            scheme,
        })
    }

    fn node(&self, c: usize, j: usize) -> usize {
        c * self.nodes_per + j
    }

    fn edge(&self, c: usize, l: usize) -> usize {
        c * self.edges_per + l
    }
}

/// Disjoint complete blocks with unit weights; intentionally disconnected.
pub fn build_communities(spec: &CommunitySpec) -> Result<ProblemInstance> {
    let spec = CommunitySpec::new(spec.n_communities, spec.nodes_per, spec.edges_per, spec.scheme)?;
    let n = spec.n_communities * spec.nodes_per;
    let k = spec.n_communities * spec.edges_per;
    let mut a = Assignment::zeros(n, k);
    for c in 0..spec.n_communities {
        for j in 0..spec.nodes_per {
            for l in 0..spec.edges_per {
                a.set(spec.node(c, j), spec.edge(c, l), 1);
            }
        }
    }
    ProblemInstance::from_assignment(a)
}

/// Moves `u` from `e` to `f` and `v` from `f` to `e`. Requires unit
/// memberships `u ∈ e`, `v ∈ f` and `u ∉ f`, `v ∉ e`; returns false and
/// leaves `a` untouched otherwise. Both marginals are preserved.
pub fn swap_memberships(a: &mut Assignment, u: usize, e: usize, v: usize, f: usize) -> bool {
    if u == v || e == f || a.get(u, e) != 1 || a.get(v, f) != 1 || a.get(u, f) != 0 || a.get(v, e) != 0 {
        return false;
    }
    a.set(u, e, 0);
    a.set(u, f, 1);
    a.set(v, f, 0);
    a.set(v, e, 1);
    true
}

fn pick_membership(a: &Assignment, spec: &CommunitySpec, c: usize, rng: &mut Rng) -> (usize, usize) {
    let pairs: Vec<(usize, usize)> = (0..spec.nodes_per)
        .flat_map(|j| (0..spec.edges_per).map(move |l| (spec.node(c, j), spec.edge(c, l))))
        .filter(|&(u, e)| a.get(u, e) == 1)
        .collect();
    pairs[rng.gen_range(0..pairs.len())]
}

fn swap_between(a: &mut Assignment, spec: &CommunitySpec, c1: usize, c2: usize, rng: &mut Rng) -> Result<()> {
    for _ in 0..SWAP_RETRIES {
        let (u, e) = pick_membership(a, spec, c1, rng);
        let (v, f) = pick_membership(a, spec, c2, rng);
        if swap_memberships(a, u, e, v, f) {
            return Ok(());
        }
    }
    Err(Error::RetryCap(SWAP_RETRIES))
}

fn rewire_once(base: &Assignment, spec: &CommunitySpec, rng: &mut Rng) -> Result<Assignment> {
    let mut a = base.clone();
    let nc = spec.n_communities;
    match spec.scheme {
        Scheme::OneNode => {
            let centroid = spec.node(0, 0);
            for c in 1..nc {
                let own: Vec<usize> = (0..spec.edges_per)
                    .map(|l| spec.edge(0, l))
                    .filter(|&e| a.get(centroid, e) == 1)
                    .collect();
                if own.is_empty() {
                    return Err(Error::InvalidParameter("centroid node ran out of memberships".into()));
                }
                let mut done = false;
                for _ in 0..SWAP_RETRIES {
                    let e = own[rng.gen_range(0..own.len())];
                    let (v, f) = pick_membership(&a, spec, c, rng);
                    if swap_memberships(&mut a, centroid, e, v, f) {
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(Error::RetryCap(SWAP_RETRIES));
                }
            }
        }
        Scheme::OneEdge => {
            let centroid = spec.edge(0, 0);
            for c in 1..nc {
                let own: Vec<usize> = (0..spec.nodes_per)
                    .map(|j| spec.node(0, j))
                    .filter(|&u| a.get(u, centroid) == 1)
                    .collect();
                if own.is_empty() {
                    return Err(Error::InvalidParameter("centroid hyperedge ran out of members".into()));
                }
                let mut done = false;
                for _ in 0..SWAP_RETRIES {
                    let u = own[rng.gen_range(0..own.len())];
                    let (v, f) = pick_membership(&a, spec, c, rng);
                    if swap_memberships(&mut a, u, centroid, v, f) {
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(Error::RetryCap(SWAP_RETRIES));
                }
            }
        }
        Scheme::Head2Tail => {
            for c in 0..nc - 1 {
                swap_between(&mut a, spec, c, c + 1, rng)?;
            }
        }
        Scheme::Random => {
            for _ in 0..nc - 1 {
                let c1 = rng.gen_range(0..nc);
                let mut c2 = rng.gen_range(0..nc - 1);
                if c2 >= c1 {
                    c2 += 1;
                }
                swap_between(&mut a, spec, c1, c2, rng)?;
            }
        }
    }
    Ok(a)
}

/// Joins the communities with exactly `N_c − 1` inter-community membership
/// swaps laid out by `spec.scheme`. Random layouts that leave the result
/// disconnected are redrawn.
pub fn rewire(inst: &ProblemInstance, spec: &CommunitySpec, rng: &mut Rng) -> Result<ProblemInstance> {
    if inst.n_agents() != spec.n_communities * spec.nodes_per || inst.n_tasks() != spec.n_communities * spec.edges_per {
        return Err(Error::InvalidParameter("instance does not match the community layout".into()));
    }
    for _ in 0..SWAP_RETRIES {
        let a = rewire_once(inst.assignment(), spec, rng)?;
        let out = inst.with_assignment(a)?;
        if instance::is_connected(&out) {
            return Ok(out);
        }
    }
    Err(Error::RetryCap(SWAP_RETRIES))
}

/// Community size tied to count (`n_c = m_c = N_c`) or held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingMode {
    Coupled,
    Fixed { nodes_per: usize, edges_per: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub scheme: Scheme,
    pub n_communities: usize,
    pub rep: usize,
    pub mu2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub scheme: Scheme,
    /// `a` in `μ₂ ∼ N_c^{−a}`.
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub exponent_stderr: f64,
    /// Half-width of the 95% confidence interval on `a`.
    pub ci95: f64,
    pub sizes: Vec<usize>,
    pub mean_mu2: Vec<f64>,
    pub sd_mu2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<ScalingFit>,
}

impl ScalingResult {
    pub fn fit(&self, scheme: Scheme) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.scheme == scheme)
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("scheme,N_c,rep,mu2\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.scheme, r.n_communities, r.rep, r.mu2));
        }
        out
    }

    pub fn fits_csv(&self) -> String {
        let mut out = String::from("scheme,exponent,exponent_stderr,ci95,intercept,R2\n");
        for f in &self.fits {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f.scheme, f.exponent, f.exponent_stderr, f.ci95, f.intercept, f.r2
            ));
        }
        out
    }
}

/// For every scheme and size, `reps` independent rewirings; `μ₂` of each,
/// and a power-law fit of the per-size mean against `N_c`. Each repetition
/// draws from its own stream keyed by (seed, scheme, size, rep).
pub fn scaling_experiment(
    schemes: &[Scheme],
    sizes: &[usize],
    reps: usize,
    mode: ScalingMode,
    seed: u64,
) -> Result<ScalingResult> {
    let jobs: Vec<(Scheme, usize, usize)> = schemes
        .iter()
        .flat_map(|&s| sizes.iter().flat_map(move |&nc| (0..reps).map(move |r| (s, nc, r))))
        .collect();
    let rows = par::map_slice(&jobs, |&(scheme, nc, rep)| -> Result<ScalingRow> {
        let (np, ep) = match mode {
            ScalingMode::Coupled => (nc, nc),
            ScalingMode::Fixed { nodes_per, edges_per } => (nodes_per, edges_per),
        };
        let spec = CommunitySpec::new(nc, np, ep, scheme)?;
        let base = build_communities(&spec)?;
        let mut r = rng::stream(seed, scheme.name(), &[nc as u64, rep as u64]);
        let wired = rewire(&base, &spec, &mut r)?;
        let mu2 = SpectralBundle::from_instance(&wired, Connectivity::Require)?.mu2();
        Ok(ScalingRow {
            scheme,
            n_communities: nc,
            rep,
            mu2,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut fits = Vec::new();
    for &scheme in schemes {
        let mut mean_mu2 = Vec::new();
        let mut sd_mu2 = Vec::new();
        for &nc in sizes {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.n_communities == nc)
                .map(|r| r.mu2)
                .collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let sd = if v.len() > 1 {
                (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            mean_mu2.push(m);
            sd_mu2.push(sd);
        }
        let xs: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
        let f = fit_power_law(&xs, &mean_mu2)?;
        fits.push(ScalingFit {
            scheme,
            exponent: -f.exponent,
            intercept: f.intercept,
            r2: f.r2,
            exponent_stderr: f.slope_stderr,
            ci95: t_quantile_975(f.n - 2) * f.slope_stderr,
            sizes: sizes.to_vec(),
            mean_mu2,
            sd_mu2,
        });
    }
    Ok(ScalingResult { rows, fits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_blocks_of_six() {
        let spec = CommunitySpec::new(2, 6, 6, Scheme::Random).unwrap();
        let inst = build_communities(&spec).unwrap();
        assert_eq!((inst.n_agents(), inst.n_tasks()), (12, 12));
        assert_eq!(inst.total_energy(), 72);
        assert_eq!(inst.assignment().get(0, 6), 0);
        assert_eq!(inst.assignment().get(7, 6), 1);
        let b = SpectralBundle::from_instance(&inst, Connectivity::AllowDisconnected).unwrap();
        assert!(b.eigenvalues.iter().filter(|&&x| x.abs() < 1e-10).count() >= 2);
    }

    #[test]
    fn every_scheme_conserves_marginals_and_connects() {
        for scheme in Scheme::ALL {
            for seed in 0..5 {
                let spec = CommunitySpec::new(4, 4, 4, scheme).unwrap();
                let base = build_communities(&spec).unwrap();
                let out = rewire(&base, &spec, &mut rng::seeded(seed)).unwrap();
                assert_eq!(out.assignment().row_sums(), base.assignment().row_sums());
                assert_eq!(out.assignment().col_sums(), base.assignment().col_sums());
                assert!(instance::is_connected(&out), "{scheme} seed {seed}");
                let moved = base
                    .assignment()
                    .nonzeros()
                    .filter(|&(i, k, _)| out.assignment().get(i, k) == 0)
                    .count();
                assert_eq!(moved, 2 * 3, "{scheme}: N_c - 1 swaps move two memberships each");
            }
        }
    }

    #[test]
    fn one_node_centroid_reaches_every_community() {
        let spec = CommunitySpec::new(3, 6, 6, Scheme::OneNode).unwrap();
        let base = build_communities(&spec).unwrap();
        let out = rewire(&base, &spec, &mut rng::seeded(1)).unwrap();
        for c in 0..3 {
            assert!((0..6).any(|l| out.assignment().get(0, spec.edge(c, l)) == 1));
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
    }
}
