use super::pattern::{is_perfect_elimination_ordering, maximum_cardinality_search, SparsityPattern};
use crate::error::{Result, SolverError};

/// Post-ordered clique tree (or forest) of a chordal pattern.
///
/// Cliques are sorted vertex lists. For clique `l`, `separator(l)` is its
/// intersection with the parent and `supernode(l)` the remaining vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueTree {
    n: usize,
    cliques: Vec<Vec<usize>>,
    separators: Vec<Vec<usize>>,
    supernodes: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

pub(crate) fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    intersect_sorted(a, b).len()
}

impl CliqueTree {
    /// Builds a tree from cliques and parent links in any order. The result
    /// is post-ordered (children before parents, roots in their original
    /// relative order) and its running intersection property is checked.
    pub fn from_parents(n: usize, cliques: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Result<Self> {
        let p = cliques.len();
        assert_eq!(parent.len(), p);
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); p];
        let mut roots = Vec::new();
        for (c, par) in parent.iter().enumerate() {
            match par {
                Some(q) => kids[*q].push(c),
                None => roots.push(c),
            }
        }
        let mut post = Vec::with_capacity(p);
        for &r in &roots {
            let mut stack = vec![(r, 0usize)];
            while let Some((v, k)) = stack.pop() {
                if k < kids[v].len() {
                    stack.push((v, k + 1));
                    stack.push((kids[v][k], 0));
                } else {
                    post.push(v);
                }
            }
        }
        if post.len() != p {
            return Err(SolverError::RunningIntersection("parent links contain a cycle".into()));
        }
        let mut new_index = vec![0; p];
        for (k, &c) in post.iter().enumerate() {
            new_index[c] = k;
        }
        let mut cl: Vec<Vec<usize>> = post.iter().map(|&c| cliques[c].clone()).collect();
        for c in &mut cl {
            c.sort_unstable();
            c.dedup();
        }
        let par: Vec<Option<usize>> = post.iter().map(|&c| parent[c].map(|q| new_index[q])).collect();
        let mut children = vec![Vec::new(); p];
        for (c, q) in par.iter().enumerate() {
            if let Some(q) = q {
                children[*q].push(c);
            }
        }
        let separators: Vec<Vec<usize>> = (0..p)
            .map(|c| par[c].map_or_else(Vec::new, |q| intersect_sorted(&cl[c], &cl[q])))
            .collect();
        let supernodes: Vec<Vec<usize>> = (0..p)
            .map(|c| cl[c].iter().copied().filter(|v| separators[c].binary_search(v).is_err()).collect())
            .collect();
        let tree = CliqueTree { n, cliques: cl, separators, supernodes, parent: par, children };
        tree.check_running_intersection()?;
        Ok(tree)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn clique(&self, l: usize) -> &[usize] {
        &self.cliques[l]
    }

    pub fn separator(&self, l: usize) -> &[usize] {
        &self.separators[l]
    }

    pub fn supernode(&self, l: usize) -> &[usize] {
        &self.supernodes[l]
    }

    pub fn parent(&self, l: usize) -> Option<usize> {
        self.parent[l]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, l: usize) -> &[usize] {
        &self.children[l]
    }

    pub fn max_clique(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Clique vertices with the supernode first and the separator last,
    /// each part sorted.
    pub fn local_order(&self, l: usize) -> Vec<usize> {
        let mut v = self.supernodes[l].clone();
        v.extend_from_slice(&self.separators[l]);
        v
    }

    /// Number of overlap entries, `Σ |η|(|η|+1)/2`.
    pub fn overlap_count(&self) -> usize {
        self.separators.iter().map(|s| s.len() * (s.len() + 1) / 2).sum()
    }

    /// Checks that the cliques containing any vertex form a connected
    /// subtree and that every vertex lies in some clique.
    pub fn check_running_intersection(&self) -> Result<()> {
        let mut tops = vec![0usize; self.n];
        for (l, c) in self.cliques.iter().enumerate() {
            for &v in c {
                if v >= self.n {
                    return Err(SolverError::RunningIntersection(format!("vertex {v} out of range")));
                }
                let in_parent = self.parent[l].is_some_and(|q| self.cliques[q].binary_search(&v).is_ok());
                if !in_parent {
                    tops[v] += 1;
                }
            }
        }
        for (v, &t) in tops.iter().enumerate() {
            if t != 1 {
                return Err(SolverError::RunningIntersection(format!(
                    "vertex {v} spans {t} disconnected subtrees"
                )));
            }
        }
        Ok(())
    }
}

/// Clique tree of a chordal pattern from its supernodal elimination tree.
pub fn build_clique_tree(p: &SparsityPattern) -> Result<CliqueTree> {
    let n = p.n();
    let mut order = maximum_cardinality_search(p);
    order.reverse();
    if !is_perfect_elimination_ordering(p, &order) {
        return Err(SolverError::NotChordal(format!(
            "pattern with {} vertices and {} edges has no perfect elimination ordering",
            n,
            p.edge_count()
        )));
    }
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let higher: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut h: Vec<usize> = p.neighbors(v).iter().copied().filter(|&u| pos[u] > pos[v]).collect();
            h.sort_unstable_by_key(|&u| pos[u]);
            h
        })
        .collect();
    let etree_parent: Vec<Option<usize>> = (0..n).map(|v| higher[v].first().copied()).collect();

    // A vertex continues the supernode of a child whose clique contains its own.
    let mut snode = vec![usize::MAX; n];
    let mut snodes: Vec<Vec<usize>> = Vec::new();
    let mut absorbed = vec![false; n];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &v in &order {
        if let Some(u) = etree_parent[v] {
            kids[u].push(v);
        }
    }
    for &v in &order {
        let cont = kids[v]
            .iter()
            .copied()
            .find(|&w| !absorbed[w] && higher[w].len() == higher[v].len() + 1);
        match cont {
            Some(w) => {
                absorbed[w] = true;
                snode[v] = snode[w];
                snodes[snode[v]].push(v);
            }
            None => {
                snode[v] = snodes.len();
                snodes.push(vec![v]);
            }
        }
    }
    let mut cliques = Vec::with_capacity(snodes.len());
    let mut parent = Vec::with_capacity(snodes.len());
    for members in &snodes {
        let top = *members.last().unwrap();
        let mut c = members.clone();
        c.extend_from_slice(&higher[top]);
        cliques.push(c);
        parent.push(etree_parent[top].map(|u| snode[u]));
    }
    CliqueTree::from_parents(n, cliques, parent)
}
