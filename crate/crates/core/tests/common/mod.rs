//! Reference implementations written directly from the walk definition,
//! kept independent of the library code they check.
#![allow(dead_code)]

use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

/// Transition probabilities by summing over the two walk steps: agent `i`
/// picks task `k` with probability `E_k / Σ_{k' ∋ i} E_k'`, then agent `j`
/// with probability `B_jk / Σ_j' B_j'k`.
pub fn walk_matrix(energies: &[u64], rows: &[Vec<u64>]) -> Mat {
    let n = rows.len();
    let k = energies.len();
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let d_i: f64 = (0..k).filter(|&t| rows[i][t] > 0).map(|t| energies[t] as f64).sum();
        for t in 0..k {
            if rows[i][t] == 0 {
                continue;
            }
            let pick_task = energies[t] as f64 / d_i;
            let delta: f64 = rows.iter().map(|r| r[t] as f64).sum();
            for j in 0..n {
                p[i][j] += pick_task * rows[j][t] as f64 / delta;
            }
        }
    }
    p
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..b.len() {
            let x = a[i][l];
            if x == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i][j] += x * b[l][j];
            }
        }
    }
    c
}

/// Stationary distribution of an irreducible chain: the lazy chain
/// `(I + P)/2` squared 48 times (rows renormalized against drift) converges
/// to a matrix whose rows are all π.
pub fn stationary(p: &Mat) -> Vec<f64> {
    let n = p.len();
    let mut q: Mat = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * p[i][j] + if i == j { 0.5 } else { 0.0 }).collect())
        .collect();
    for _ in 0..48 {
        q = matmul(&q, &q);
        for row in &mut q {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
    let s: f64 = q[0].iter().sum();
    q[0].iter().map(|x| x / s).collect()
}

pub fn laplacian(p: &Mat, pi: &[f64]) -> Mat {
    let n = p.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { pi[i] } else { 0.0 };
                    d - 0.5 * (pi[i] * p[i][j] + pi[j] * p[j][i])
                })
                .collect()
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &Mat) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[r][q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p][r], a[q][r]);
                    a[p][r] = c * apr - s * aqr;
                    a[q][r] = s * apr + c * aqr;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `μ₂` of a connected assignment computed entirely by the oracle.
pub fn mu2(energies: &[u64], rows: &[Vec<u64>]) -> f64 {
    let p = walk_matrix(energies, rows);
    let pi = stationary(&p);
    jacobi_eigenvalues(&laplacian(&p, &pi))[1]
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// Number of node components when each hyperedge (bitmask) joins its
/// members.
pub fn node_components(n: usize, edges: &[u32]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    for &e in edges {
        let members: Vec<usize> = (0..n).filter(|v| e >> v & 1 == 1).collect();
        for w in members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    (0..n).filter(|&v| find(&mut parent, v) == v).count()
}

/// Brute-force count of sets of `k` distinct hyperedges (size ≥ 2) on `n`
/// nodes that cover every node and are connected.
pub fn count_connected_hypergraphs(n: usize, k: usize) -> usize {
    let edges: Vec<u32> = (0u32..1 << n).filter(|e| e.count_ones() >= 2).collect();
    let full = (1u32 << n) - 1;
    let mut count = 0;
    let mut pick = Vec::with_capacity(k);
    fn rec(start: usize, k: usize, edges: &[u32], pick: &mut Vec<u32>, n: usize, full: u32, count: &mut usize) {
        if pick.len() == k {
            if pick.iter().fold(0, |a, e| a | e) == full && node_components(n, pick) == 1 {
                *count += 1;
            }
            return;
        }
        for i in start..edges.len() {
            pick.push(edges[i]);
            rec(i + 1, k, edges, pick, n, full, count);
            pick.pop();
        }
    }
    rec(0, k, &edges, &mut pick, n, full, &mut count);
    count
}

/// Random connected case: agent `hub` sits on every task, every agent has
/// at least one task, and extra entries in `1..=3` are sprinkled on top.
pub fn random_connected(rng: &mut impl Rng, max_n: usize, max_k: usize) -> (Vec<u64>, Vec<Vec<u64>>) {
    let n = rng.gen_range(2..=max_n);
    let k = rng.gen_range(1..=max_k);
    let density = rng.gen_range(0.05..0.6);
    let hub = rng.gen_range(0..n);
    let mut rows = vec![vec![0u64; k]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for x in row.iter_mut() {
            if i == hub || rng.gen::<f64>() < density {
                *x = rng.gen_range(1..=3);
            }
        }
        if row.iter().all(|&x| x == 0) {
            row[rng.gen_range(0..k)] = rng.gen_range(1..=3);
        }
    }
    let energies = (0..k).map(|_| rng.gen_range(1..=9)).collect();
    (energies, rows)
}

/// Block-diagonal union of `parts` independent connected cases.
pub fn random_disconnected(rng: &mut impl Rng, parts: usize, max_n: usize, max_k: usize) -> (Vec<u64>, Vec<Vec<u64>>) {
    let blocks: Vec<_> = (0..parts).map(|_| random_connected(rng, max_n, max_k)).collect();
    let k_total: usize = blocks.iter().map(|(e, _)| e.len()).sum();
    let mut energies = Vec::new();
    let mut rows = Vec::new();
    let mut offset = 0;
    for (e, r) in blocks {
        for row in r {
            let mut full = vec![0; k_total];
            full[offset..offset + row.len()].copy_from_slice(&row);
            rows.push(full);
        }
        offset += e.len();
        energies.extend(e);
    }
    (energies, rows)
}

pub fn max_abs_diff(a: &Mat, b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
