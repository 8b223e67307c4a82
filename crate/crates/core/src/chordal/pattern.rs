use std::fmt::Write as _;

use crate::error::{Result, SolverError};
use crate::linalg::ordering::minimum_degree;
use crate::linalg::sparse::CscMatrix;
use crate::linalg::svec::{svec_entry, triangular_len};

/// Off-diagonal sparsity pattern of a symmetric matrix, stored as sorted
/// neighbour lists. Diagonal entries are always implied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    adj: Vec<Vec<usize>>,
    chordal_extended: bool,
}

impl SparsityPattern {
    pub fn empty(n: usize) -> Self {
        SparsityPattern { n, adj: vec![Vec::new(); n], chordal_extended: false }
    }

    /// Builds a pattern from edges in either orientation; self loops and
    /// duplicates are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            assert!(i < n && j < n, "edge ({i},{j}) out of range for n = {n}");
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
            nb.dedup();
        }
        SparsityPattern { n, adj, chordal_extended: false }
    }

    pub fn dense(n: usize) -> Self {
        let adj = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        SparsityPattern { n, adj, chordal_extended: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i == j || self.adj[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i > j`, sorted.
    pub fn lower_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nb) in self.adj.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j < i).map(|&j| (i, j)));
        }
        out
    }

    /// Fraction of matrix entries that are structurally nonzero, diagonal
    /// included.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        (2 * self.edge_count() + self.n) as f64 / (self.n * self.n) as f64
    }

    pub fn is_chordal_extended(&self) -> bool {
        self.chordal_extended
    }

    /// Coordinate-list form: one `i j` line per lower-triangle edge,
    /// 1-based, preceded by a line with the vertex count.
    pub fn to_coordinate_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (i, j) in self.lower_edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }

    pub fn from_coordinate_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line, first) = lines
            .next()
            .ok_or(SolverError::Parse { line: 1, msg: "missing vertex count".into() })?;
        let n: usize = first
            .parse()
            .map_err(|_| SolverError::Parse { line, msg: format!("bad vertex count '{first}'") })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let parse = |t: &str| -> Result<usize> {
                match t.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                    _ => Err(SolverError::Parse { line, msg: format!("bad vertex '{t}'") }),
                }
            };
            if parts.len() != 2 {
                return Err(SolverError::Parse { line, msg: "expected two indices".into() });
            }
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        Ok(SparsityPattern::from_edges(n, &edges))
    }
}

/// Union of the nonzero positions of all constraint columns and of `b`
/// restricted to the PSD block occupying rows `offset..offset + side(side+1)/2`.
pub fn aggregate_sparsity(a: &CscMatrix, b: &[f64], offset: usize, side: usize) -> SparsityPattern {
    let len = triangular_len(side);
    let mut hit = vec![false; len];
    for (r, _, v) in a.iter() {
        if r >= offset && r < offset + len && v != 0.0 {
            hit[r - offset] = true;
        }
    }
    for (k, &v) in b[offset..offset + len].iter().enumerate() {
        if v != 0.0 {
            hit[k] = true;
        }
    }
    let edges: Vec<(usize, usize)> = hit
        .iter()
        .enumerate()
        .filter(|(_, &h)| h)
        .map(|(k, _)| svec_entry(k))
        .filter(|(i, j)| i != j)
        .collect();
    SparsityPattern::from_edges(side, &edges)
}

/// Symbolic elimination in the given order. Returns, for each vertex, the
/// neighbours eliminated after it in the filled graph.
pub(crate) fn symbolic_elimination(p: &SparsityPattern, order: &[usize]) -> Vec<Vec<usize>> {
    let n = p.n;
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut higher: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mark = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        let mut set = Vec::new();
        mark[v] = k;
        for &u in &p.adj[v] {
            if pos[u] > k && mark[u] != k {
                mark[u] = k;
                set.push(u);
            }
        }
        for &c in &children[v] {
            for &u in &higher[c] {
                if u != v && mark[u] != k {
                    mark[u] = k;
                    set.push(u);
                }
            }
        }
        set.sort_unstable_by_key(|&u| pos[u]);
        if let Some(&first) = set.first() {
            children[first].push(v);
        }
        higher[v] = set;
    }
    higher
}

/// Chordal extension by symbolic factorisation under a minimum degree
/// ordering.
pub fn chordal_extension(p: &SparsityPattern) -> SparsityPattern {
    let order = minimum_degree(&p.adj);
    let higher = symbolic_elimination(p, &order);
    let mut edges = Vec::new();
    for (v, h) in higher.iter().enumerate() {
        edges.extend(h.iter().map(|&u| (v, u)));
    }
    let mut out = SparsityPattern::from_edges(p.n, &edges);
    assert!(
        mcs_is_chordal(&out),
        "chordal extension failed the chordality check (n = {}, edges = {})",
        out.n,
        out.edge_count()
    );
    out.chordal_extended = true;
    out
}

/// Maximum cardinality search. Returns the visiting order; its reverse is a
/// perfect elimination ordering exactly when the graph is chordal.
pub fn maximum_cardinality_search(p: &SparsityPattern) -> Vec<usize> {
    let n = p.n;
    let mut weight = vec![0usize; n];
    let mut visited = vec![false; n];
    // buckets of unvisited vertices by weight, with lazy deletion
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    buckets[0] = (0..n).rev().collect();
    let mut top = 0;
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let v = loop {
            match buckets[top].pop() {
                Some(v) if !visited[v] && weight[v] == top => break v,
                Some(_) => {}
                None => top -= 1,
            }
        };
        visited[v] = true;
        order.push(v);
        for &u in &p.adj[v] {
            if !visited[u] {
                weight[u] += 1;
                buckets[weight[u]].push(u);
                top = top.max(weight[u]);
            }
        }
    }
    order
}

/// True when `order` eliminates every vertex without fill.
pub fn is_perfect_elimination_ordering(p: &SparsityPattern, order: &[usize]) -> bool {
    let n = p.n;
    let mut pos = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    for &v in order {
        let later: Vec<usize> = p.adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        if let Some(&first) = later.iter().min_by_key(|&&u| pos[u]) {
            if later.iter().any(|&u| u != first && !p.has_edge(first, u)) {
                return false;
            }
        }
    }
    true
}

/// Chordality test via maximum cardinality search.
pub fn mcs_is_chordal(p: &SparsityPattern) -> bool {
    let mut order = maximum_cardinality_search(p);
    order.reverse();
    is_perfect_elimination_ordering(p, &order)
}
