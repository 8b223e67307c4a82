use crate::chordal::{intersection_size, CliqueTree};
use crate::error::Result;

/// Mutable clique tree used while merging along tree edges.
struct WorkTree {
    n: usize,
    cliques: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    alive: Vec<bool>,
    merges: usize,
}

impl WorkTree {
    fn new(tree: &CliqueTree) -> Self {
        WorkTree {
            n: tree.n(),
            cliques: tree.cliques().to_vec(),
            parent: tree.parents().to_vec(),
            alive: vec![true; tree.len()],
            merges: 0,
        }
    }

    fn children(&self, l: usize) -> Vec<usize> {
        (0..self.cliques.len())
            .filter(|&c| self.alive[c] && self.parent[c] == Some(l))
            .collect()
    }

    fn separator_len(&self, l: usize) -> usize {
        self.parent[l].map_or(0, |q| intersection_size(&self.cliques[l], &self.cliques[q]))
    }

    /// Absorbs `src` into `dst`; children of `src` move to `dst`.
    fn absorb(&mut self, dst: usize, src: usize) {
        let mut u: Vec<usize> = self.cliques[dst].iter().chain(&self.cliques[src]).copied().collect();
        u.sort_unstable();
        u.dedup();
        self.cliques[dst] = u;
        self.alive[src] = false;
        for c in 0..self.cliques.len() {
            if self.parent[c] == Some(src) {
                self.parent[c] = Some(dst);
            }
        }
        if self.parent[dst] == Some(src) {
            self.parent[dst] = self.parent[src];
        }
        self.merges += 1;
    }

    fn finish(self) -> Result<(CliqueTree, usize)> {
        let keep: Vec<usize> = (0..self.cliques.len()).filter(|&c| self.alive[c]).collect();
        let mut index = vec![usize::MAX; self.cliques.len()];
        for (k, &c) in keep.iter().enumerate() {
            index[c] = k;
        }
        let cliques = keep.iter().map(|&c| self.cliques[c].clone()).collect();
        let parent = keep.iter().map(|&c| self.parent[c].map(|q| index[q])).collect();
        Ok((CliqueTree::from_parents(self.n, cliques, parent)?, self.merges))
    }
}

/// Merges each clique into its parent when the extra fill
/// `(|C_par| - |η|)(|C| - |η|)` is at most `t_fill` or both supernodes have
/// at most `t_size` vertices. Cliques are visited children first.
pub fn parent_child_merge(tree: &CliqueTree, t_fill: usize, t_size: usize) -> Result<(CliqueTree, usize)> {
    let mut w = WorkTree::new(tree);
    for l in 0..w.cliques.len() {
        if !w.alive[l] {
            continue;
        }
        let Some(q) = w.parent[l] else { continue };
        let eta = w.separator_len(l);
        let fill = (w.cliques[q].len() - eta) * (w.cliques[l].len() - eta);
        let nu_l = w.cliques[l].len() - eta;
        let nu_q = w.cliques[q].len() - w.separator_len(q);
        if fill <= t_fill || nu_l.max(nu_q) <= t_size {
            w.absorb(q, l);
        }
    }
    w.finish()
}

/// `min(|Ci∩Cj|/|Ci|, |Ci∩Cj|/|Cj|) >= sigma`.
pub fn sparsecolo_criterion(ci: &[usize], cj: &[usize], sigma: f64) -> bool {
    let k = intersection_size(ci, cj) as f64;
    k > 0.0 && (k / ci.len() as f64).min(k / cj.len() as f64) >= sigma
}

/// Sibling then parent-child merging by the overlap criterion. Visits
/// cliques children first; a sibling pair whose union covers the parent is
/// merged together with the parent.
pub fn sparsecolo_merge(tree: &CliqueTree, sigma: f64) -> Result<(CliqueTree, usize)> {
    let mut w = WorkTree::new(tree);
    for l in 0..w.cliques.len() {
        if !w.alive[l] {
            continue;
        }
        // step 1: sibling pairs among the children of l
        'restart: loop {
            let ch = w.children(l);
            for (a, &i) in ch.iter().enumerate() {
                for &j in &ch[a + 1..] {
                    if !sparsecolo_criterion(&w.cliques[i], &w.cliques[j], sigma) {
                        continue;
                    }
                    let covers = w.cliques[l]
                        .iter()
                        .all(|v| w.cliques[i].binary_search(v).is_ok() || w.cliques[j].binary_search(v).is_ok());
                    if covers {
                        w.absorb(l, i);
                        w.absorb(l, j);
                    } else {
                        w.absorb(i, j);
                    }
                    continue 'restart;
                }
            }
            break;
        }
        // step 2: children against l
        for i in w.children(l) {
            if w.alive[i] && sparsecolo_criterion(&w.cliques[i], &w.cliques[l], sigma) {
                w.absorb(l, i);
            }
        }
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> CliqueTree {
        CliqueTree::from_parents(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]], vec![Some(1), Some(2), None]).unwrap()
    }

    #[test]
    fn fill_rule_by_substitution() {
        let t = CliqueTree::from_parents(3, vec![vec![1, 2], vec![0, 1]], vec![None, Some(0)]).unwrap();
        let (m, k) = parent_child_merge(&t, 1, 0).unwrap();
        assert_eq!(k, 1);
        assert_eq!(m.cliques(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn zero_thresholds_keep_tree() {
        let (m, k) = parent_child_merge(&chain(), 0, 0).unwrap();
        assert_eq!(k, 0);
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn small_chain_collapses() {
        // {0,1} joins {1,2} (supernodes 1 and 1), then {0,1,2} joins {2,3}
        // (supernodes 2 and 2)
        let (m, k) = parent_child_merge(&chain(), 0, 2).unwrap();
        assert_eq!(k, 2);
        assert_eq!(m.cliques(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn criterion_by_substitution() {
        assert!(sparsecolo_criterion(&[0, 1, 2], &[1, 2, 3, 4], 0.4));
        assert!(!sparsecolo_criterion(&[0, 1, 2], &[1, 2, 3, 4], 0.6));
    }

    #[test]
    fn sigma_one_never_merges_maximal_cliques() {
        let (m, k) = sparsecolo_merge(&chain(), 1.0).unwrap();
        assert_eq!(k, 0);
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn siblings_covering_parent_merge_three_way() {
        // parent {0,1,2,3}, children {0,1,2,4} and {1,2,3,5}
        let t = CliqueTree::from_parents(
            6,
            vec![vec![0, 1, 2, 4], vec![1, 2, 3, 5], vec![0, 1, 2, 3]],
            vec![Some(2), Some(2), None],
        )
        .unwrap();
        let (m, k) = sparsecolo_merge(&t, 0.4).unwrap();
        assert_eq!(k, 2);
        assert_eq!(m.cliques(), &[vec![0, 1, 2, 3, 4, 5]]);
    }
}
