use std::collections::BTreeSet;

use super::weights::edge_weight;
use crate::chordal::{intersection_size, CliqueTree};
use crate::error::{Result, SolverError};
use crate::model::EdgeWeight;

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// Cliques joined by separating-pair edges. Merged cliques keep the smaller
/// of the two indices; the other becomes inactive.
#[derive(Debug, Clone)]
pub struct ReducedCliqueGraph {
    n: usize,
    cliques: Vec<Vec<usize>>,
    active: Vec<bool>,
    adj: Vec<BTreeSet<usize>>,
    weights: std::collections::BTreeMap<(usize, usize), f64>,
    weight_fn: EdgeWeight,
}

/// One performed merge: the two cliques before merging and the edge weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeLogEntry {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub weight: f64,
}

impl ReducedCliqueGraph {
    /// Builds the graph from explicit cliques and edges, weighting every edge.
    pub fn from_edges(n: usize, cliques: Vec<Vec<usize>>, edges: &[(usize, usize)], weight_fn: EdgeWeight) -> Self {
        let p = cliques.len();
        let mut g = ReducedCliqueGraph {
            n,
            cliques: cliques
                .into_iter()
                .map(|mut c| {
                    c.sort_unstable();
                    c.dedup();
                    c
                })
                .collect(),
            active: vec![true; p],
            adj: vec![BTreeSet::new(); p],
            weights: Default::default(),
            weight_fn,
        };
        for &(i, j) in edges {
            if i != j {
                g.adj[i].insert(j);
                g.adj[j].insert(i);
                let w = edge_weight(&g.weight_fn, &g.cliques[i], &g.cliques[j]);
                g.weights.insert(key(i, j), w);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clique(&self, i: usize) -> &[usize] {
        &self.cliques[i]
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    /// Indices of cliques still present.
    pub fn active_cliques(&self) -> Vec<usize> {
        (0..self.cliques.len()).filter(|&i| self.active[i]).collect()
    }

    pub fn neighbors(&self, i: usize) -> &BTreeSet<usize> {
        &self.adj[i]
    }

    /// Edges `(i, j)` with `i < j` and their weights, in index order.
    pub fn edges(&self) -> Vec<((usize, usize), f64)> {
        self.weights.iter().map(|(&k, &w)| (k, w)).collect()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weights.contains_key(&key(i, j))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.weights.get(&key(i, j)).copied()
    }

    pub fn weight_fn(&self) -> EdgeWeight {
        self.weight_fn
    }

    /// A merge along `(i, j)` is permissible when every common neighbour
    /// meets both cliques in the same vertex set.
    pub fn is_permissible(&self, i: usize, j: usize) -> bool {
        self.adj[i].intersection(&self.adj[j]).all(|&k| {
            let a: Vec<usize> = self.cliques[i].iter().copied().filter(|v| self.cliques[k].binary_search(v).is_ok()).collect();
            let b: Vec<usize> = self.cliques[j].iter().copied().filter(|v| self.cliques[k].binary_search(v).is_ok()).collect();
            a == b
        })
    }

    /// Merges a set of cliques into one. Edges inside the set are removed,
    /// edges leaving it are redirected to the merged clique (duplicates
    /// collapse) and re-weighted. Returns the index of the merged clique.
    pub fn merge_cliques(&mut self, members: &[usize]) -> usize {
        let mut members: Vec<usize> = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let m = members[0];
        let mut merged = Vec::new();
        for &c in &members {
            assert!(self.active[c], "clique {c} is not active");
            merged = union_sorted(&merged, &self.cliques[c]);
        }
        let mut boundary = BTreeSet::new();
        for &c in &members {
            let nbs: Vec<usize> = self.adj[c].iter().copied().collect();
            for k in nbs {
                self.adj[k].remove(&c);
                self.weights.remove(&key(c, k));
                if members.binary_search(&k).is_err() {
                    boundary.insert(k);
                }
            }
            self.adj[c].clear();
        }
        for &c in &members[1..] {
            self.active[c] = false;
            self.cliques[c].clear();
        }
        self.cliques[m] = merged;
        for k in boundary {
            self.adj[m].insert(k);
            self.adj[k].insert(m);
            let w = edge_weight(&self.weight_fn, &self.cliques[m], &self.cliques[k]);
            self.weights.insert(key(m, k), w);
        }
        m
    }

    /// The permissible edge of largest weight; ties go to the smallest
    /// `(min index, max index)`.
    pub fn best_permissible_edge(&self) -> Option<((usize, usize), f64)> {
        let mut edges = self.edges();
        edges.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        edges.into_iter().find(|&((i, j), _)| self.is_permissible(i, j))
    }
}

/// Reduced clique graph of a clique tree. Two intersecting cliques are
/// joined when some clique tree contains the edge between them, which is the
/// case exactly when their intersection is as large as the smallest
/// separator on the tree path between them.
pub fn build_reduced_clique_graph(tree: &CliqueTree, weight_fn: EdgeWeight) -> ReducedCliqueGraph {
    let p = tree.len();
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); tree.n()];
    for l in 0..p {
        for &v in tree.clique(l) {
            containing[v].push(l);
        }
    }
    let mut pairs = BTreeSet::new();
    for list in &containing {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                pairs.insert(key(i, j));
            }
        }
    }
    let mut depth = vec![0usize; p];
    for l in (0..p).rev() {
        if let Some(q) = tree.parent(l) {
            depth[l] = depth[q] + 1;
        }
    }
    let path_min = |mut i: usize, mut j: usize| -> Option<usize> {
        let mut best = usize::MAX;
        while i != j {
            if depth[i] >= depth[j] {
                best = best.min(tree.separator(i).len());
                i = tree.parent(i)?;
            } else {
                best = best.min(tree.separator(j).len());
                j = tree.parent(j)?;
            }
        }
        Some(best)
    };
    let edges: Vec<(usize, usize)> = pairs
        .into_iter()
        .filter(|&(i, j)| {
            let w = intersection_size(tree.clique(i), tree.clique(j));
            w > 0 && path_min(i, j) == Some(w)
        })
        .collect();
    ReducedCliqueGraph::from_edges(tree.n(), tree.cliques().to_vec(), &edges, weight_fn)
}

/// Greedy merging along the heaviest permissible edge until no edge of
/// positive weight remains. Returns the merges in the order performed.
pub fn clique_graph_merge(g: &mut ReducedCliqueGraph) -> Vec<MergeLogEntry> {
    let mut log = Vec::new();
    while let Some(((i, j), w)) = g.best_permissible_edge() {
        if w <= 0.0 {
            break;
        }
        log.push(MergeLogEntry { first: g.clique(i).to_vec(), second: g.clique(j).to_vec(), weight: w });
        g.merge_cliques(&[i, j]);
    }
    log
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
}

/// Clique tree of a (possibly merged) graph: a maximum weight spanning
/// forest with weights `|Ci ∩ Cj|`, each component rooted at its largest
/// clique.
pub fn recover_clique_tree(g: &ReducedCliqueGraph) -> Result<CliqueTree> {
    let active = g.active_cliques();
    let mut index = vec![usize::MAX; g.cliques.len()];
    for (k, &c) in active.iter().enumerate() {
        index[c] = k;
    }
    let mut edges: Vec<(usize, usize, usize)> = g
        .weights
        .keys()
        .map(|&(i, j)| (intersection_size(&g.cliques[i], &g.cliques[j]), index[i], index[j]))
        .collect();
    edges.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let p = active.len();
    let mut ds = DisjointSets((0..p).collect());
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); p];
    for (_, i, j) in edges {
        let (ri, rj) = (ds.find(i), ds.find(j));
        if ri != rj {
            ds.0[ri] = rj;
            tree_adj[i].push(j);
            tree_adj[j].push(i);
        }
    }
    let sizes: Vec<usize> = active.iter().map(|&c| g.cliques[c].len()).collect();
    let mut comp: Vec<Vec<usize>> = vec![Vec::new(); p];
    for v in 0..p {
        let r = ds.find(v);
        comp[r].push(v);
    }
    let mut parent = vec![None; p];
    let mut seen = vec![false; p];
    for members in comp.iter().filter(|c| !c.is_empty()) {
        let root = *members
            .iter()
            .max_by(|&&a, &&b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .unwrap();
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &u in &tree_adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(v);
                    queue.push_back(u);
                }
            }
        }
    }
    let cliques: Vec<Vec<usize>> = active.iter().map(|&c| g.cliques[c].clone()).collect();
    CliqueTree::from_parents(g.n, cliques, parent).map_err(|e| match e {
        SolverError::RunningIntersection(msg) => {
            SolverError::RunningIntersection(format!("recovered tree violates running intersection: {msg}"))
        }
        other => other,
    })
}
