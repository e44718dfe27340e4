use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph;
use crate::instance::{Assignment, ProblemInstance};
use crate::par;
use crate::spectral::{self, Connectivity, SpectralBundle, Trajectory};

/// Refuse enumerations with more candidates than this.
pub const MAX_CANDIDATES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedHypergraph {
    /// Hyperedges as sorted node lists, in generation order.
    pub edges: Vec<Vec<usize>>,
    pub instance: ProblemInstance,
    pub mu2: f64,
}

/// Node subsets of size at least two, as bitmasks in increasing order.
pub fn admissible_edges(n: usize) -> Vec<u32> {
    (1u32..(1 << n)).filter(|m| m.count_ones() >= 2).collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of `k`-sets of admissible hyperedges on `n` nodes.
pub fn candidate_count(n: usize, k: usize) -> u128 {
    binomial(admissible_edges(n).len() as u128, k as u128)
}

fn combinations(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > len {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == len - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mask_nodes(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Smallest sorted edge-mask list over all node relabellings.
pub fn canonical_form(n: usize, masks: &[u32]) -> Vec<u32> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<u32>> = None;
    loop {
        let mut mapped: Vec<u32> = masks
            .iter()
            .map(|&m| mask_nodes(m).iter().fold(0u32, |acc, &v| acc | (1 << perm[v])))
            .collect();
        mapped.sort_unstable();
        if best.as_ref().is_none_or(|b| mapped < *b) {
            best = Some(mapped);
        }
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| perm[i - 1] < perm[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| perm[j] > perm[i - 1]).expect("pivot exists");
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
    best.unwrap_or_default()
}

/// Every connected hypergraph on `n` nodes with `k` distinct hyperedges of
/// cardinality at least two that touches every node, with unit weights and
/// budgets/energies equal to the row/column sums. Sorted by `μ₂`
/// descending (stable in generation order). With `dedup`, only the first
/// member of each isomorphism class is kept.
pub fn enumerate_small(n: usize, k: usize, dedup: bool) -> Result<Vec<EnumeratedHypergraph>> {
    if n < 2 || k < 1 || n > 16 {
        return Err(Error::InvalidParameter(format!("unsupported size N={n}, K={k}")));
    }
    let count = candidate_count(n, k);
    if count > MAX_CANDIDATES {
        return Err(Error::InvalidParameter(format!(
            "{count} candidates exceeds the limit of {MAX_CANDIDATES}"
        )));
    }
    if dedup && n > 8 {
        return Err(Error::InvalidParameter("dedup supports at most 8 nodes".into()));
    }
    let edges = admissible_edges(n);
    let all_nodes = (1u32 << n) - 1;
    let combos: Vec<Vec<u32>> = combinations(edges.len(), k)
        .into_iter()
        .map(|c| c.iter().map(|&i| edges[i]).collect::<Vec<u32>>())
        .filter(|masks| masks.iter().fold(0, |acc, m| acc | m) == all_nodes)
        .collect();
    let evaluated = par::map_slice(&combos, |masks| -> Result<Option<EnumeratedHypergraph>> {
        let rows: Vec<Vec<u64>> = (0..n)
            .map(|v| masks.iter().map(|&m| u64::from(m & (1 << v) != 0)).collect())
            .collect();
        let a = Assignment::from_rows(&rows);
        if graph::bipartite_component_count(&a) != 1 {
            return Ok(None);
        }
        let instance = ProblemInstance::from_assignment(a)?;
        let mu2 = SpectralBundle::from_instance(&instance, Connectivity::Require)?.mu2();
        Ok(Some(EnumeratedHypergraph {
            edges: masks.iter().map(|&m| mask_nodes(m)).collect(),
            instance,
            mu2,
        }))
    });
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (masks, item) in combos.iter().zip(evaluated) {
        let Some(item) = item? else { continue };
        if dedup && !seen.insert(canonical_form(n, masks)) {
            continue;
        }
        out.push(item);
    }
    out.sort_by(|x, y| y.mu2.total_cmp(&x.mu2));
    Ok(out)
}

/// `"0 1 2|1 3"` style encoding.
pub fn encode_edges(edges: &[Vec<usize>]) -> String {
    edges
        .iter()
        .map(|e| e.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("|")
}

pub fn enumeration_csv(items: &[EnumeratedHypergraph]) -> String {
    let mut out = String::from("rank,mu2,edges\n");
    for (r, h) in items.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", r + 1, h.mu2, encode_edges(&h.edges)));
    }
    out
}

/// Four items from a `μ₂`-sorted list: the maximum, the minimum and two
/// intermediates with distinct values near the 1/3 and 2/3 points of the
/// distinct-value range.
pub fn representatives(items: &[EnumeratedHypergraph]) -> Result<Vec<EnumeratedHypergraph>> {
    const TOL: f64 = 1e-9;
    let mut distinct: Vec<usize> = Vec::new();
    for (i, h) in items.iter().enumerate() {
        if distinct.last().is_none_or(|&j| (items[j].mu2 - h.mu2).abs() > TOL) {
            distinct.push(i);
        }
    }
    if distinct.len() < 4 {
        return Err(Error::InvalidParameter("fewer than four distinct μ₂ values".into()));
    }
    let last = distinct.len() - 1;
    let picks = [0, last / 3, (2 * last) / 3, last];
    let mut picks = picks.to_vec();
    picks.dedup();
    if picks.len() < 4 {
        picks = vec![0, 1, 2, last];
    }
    Ok(picks.iter().map(|&p| items[distinct[p]].clone()).collect())
}

/// Diffusion of the same `x0` on each hypergraph.
pub fn diffusion_comparison(selected: &[EnumeratedHypergraph], x0: &[f64], times: &[f64]) -> Result<Vec<Trajectory>> {
    selected
        .iter()
        .map(|h| {
            let b = SpectralBundle::from_instance(&h.instance, Connectivity::Require)?;
            spectral::diffuse(&b.l, x0, times)
        })
        .collect()
}

/// First sampled time after which every later sample stays within `eps` of
/// `target`.
pub fn consensus_time(traj: &Trajectory, target: f64, eps: f64) -> Option<f64> {
    let d = traj.distance_to(target);
    let mut first = None;
    for (i, &v) in d.iter().enumerate() {
        if v > eps {
            first = None;
        } else if first.is_none() {
            first = Some(i);
        }
    }
    first.map(|i| traj.times[i])
}
