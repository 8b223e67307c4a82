//! Fill-reducing orderings.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Minimum degree ordering on an undirected graph given as adjacency lists
/// (no self loops; each edge listed from both ends).
///
/// Runs the elimination game explicitly: the eliminated vertex's neighbours
/// become a clique. Ties are broken by the smallest vertex index so the
/// result is deterministic. Returns `order` with `order[k]` the vertex
/// eliminated at step `k`.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut graph: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(v, nb)| {
            let mut nb: Vec<usize> = nb.iter().copied().filter(|&u| u != v).collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let mut eliminated = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|v| Reverse((graph[v].len(), v))).collect();
    let mut order = Vec::with_capacity(n);
    let mut scratch = Vec::new();

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != graph[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let nbrs = std::mem::take(&mut graph[v]);
        for &u in &nbrs {
            // adj[u] <- (adj[u] \ {v}) ∪ (nbrs \ {u})
            scratch.clear();
            let a = &graph[u];
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < nbrs.len() {
                let next = match (a.get(i), nbrs.get(j)) {
                    (Some(&x), Some(&y)) if x == y => {
                        i += 1;
                        j += 1;
                        x
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        i += 1;
                        x
                    }
                    (Some(_), Some(&y)) => {
                        j += 1;
                        y
                    }
                    (Some(&x), None) => {
                        i += 1;
                        x
                    }
                    (None, Some(&y)) => {
                        j += 1;
                        y
                    }
                    (None, None) => unreachable!(),
                };
                if next != v && next != u {
                    scratch.push(next);
                }
            }
            std::mem::swap(&mut graph[u], &mut scratch);
            heap.push(Reverse((graph[u].len(), u)));
        }
    }
    debug_assert_eq!(order.len(), n);
    order
}

/// Inverse permutation: `inv[perm[k]] = k`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    #[test]
    fn star_eliminates_leaves_first() {
        // hub 0 with leaves 1..4: eliminating the hub first would create a K4
        let adj = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let order = minimum_degree(&adj);
        assert_eq!(order.len(), 5);
        assert!(order[..3].iter().all(|&v| v != 0));
    }

    #[test]
    fn order_is_a_permutation() {
        let adj = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)]);
        let mut order = minimum_degree(&adj);
        order.sort_unstable();
        assert_eq!(order, (0..6).collect::<Vec<_>>());
        let inv = invert_permutation(&[2, 0, 1]);
        assert_eq!(inv, vec![1, 2, 0]);
    }
}
