//! Union-find and small traversal helpers over assignments.

use crate::instance::Assignment;

#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Component label per agent, where two agents are linked iff they share a
/// task with positive weight. Only agents with `mask[i] == true` take part;
/// the others get `None`. Labels are dense and ordered by first appearance.
pub fn agent_components(a: &Assignment, mask: &[bool]) -> (Vec<Option<usize>>, usize) {
    let n = a.n_agents();
    let mut ds = DisjointSet::new(n);
    for k in 0..a.n_tasks() {
        let mut first: Option<usize> = None;
        for i in a.agents_of(k) {
            if !mask[i] {
                continue;
            }
            match first {
                None => first = Some(i),
                Some(f) => {
                    ds.union(f, i);
                }
            }
        }
    }
    let mut label = vec![None; n];
    let mut root_label = vec![usize::MAX; n];
    let mut count = 0;
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let r = ds.find(i);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        label[i] = Some(root_label[r]);
    }
    (label, count)
}

/// Number of connected components of the agent/task bipartite graph,
/// counting isolated agents and empty tasks as their own components.
pub fn bipartite_component_count(a: &Assignment) -> usize {
    let (n, k) = (a.n_agents(), a.n_tasks());
    let mut ds = DisjointSet::new(n + k);
    for (i, t, _) in a.nonzeros() {
        ds.union(i, n + t);
    }
    (0..n + k).filter(|&x| ds.find(x) == x).count()
}

/// Component labels over the `N + K` nodes of the bipartite membership
/// graph (agents first, then tasks).
pub fn bipartite_components(a: &Assignment) -> (Vec<usize>, usize) {
    let (n, k) = (a.n_agents(), a.n_tasks());
    let mut ds = DisjointSet::new(n + k);
    for (i, t, _) in a.nonzeros() {
        ds.union(i, n + t);
    }
    let mut root_label = vec![usize::MAX; n + k];
    let mut count = 0;
    let labels = (0..n + k)
        .map(|x| {
            let r = ds.find(x);
            if root_label[r] == usize::MAX {
                root_label[r] = count;
                count += 1;
            }
            root_label[r]
        })
        .collect();
    (labels, count)
}

/// True when the agents and tasks carrying positive weight form a single
/// component (idle agents and empty tasks are ignored).
pub fn active_connected(a: &Assignment) -> bool {
    let (n, k) = (a.n_agents(), a.n_tasks());
    let mut ds = DisjointSet::new(n + k);
    let mut active = vec![false; n + k];
    for (i, t, _) in a.nonzeros() {
        ds.union(i, n + t);
        active[i] = true;
        active[n + t] = true;
    }
    let mut root = None;
    for x in (0..n + k).filter(|&x| active[x]) {
        let r = ds.find(x);
        match root {
            None => root = Some(r),
            Some(r0) if r0 != r => return false,
            _ => {}
        }
    }
    root.is_some()
}
