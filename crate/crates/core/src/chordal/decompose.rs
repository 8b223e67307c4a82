use super::completion::psd_complete;
use super::pattern::{aggregate_sparsity, chordal_extension};
use super::tree::{build_clique_tree, CliqueTree};
use crate::error::{Result, SolverError};
use crate::linalg::sparse::CscMatrix;
use crate::linalg::svec::{svec_index, triangular_len};
use crate::model::{ConeSpec, DecompositionInfo, ProblemData, Settings};

/// Blocks smaller than this are never split.
pub const MIN_DECOMPOSE_SIDE: usize = 10;
/// Blocks whose extended pattern is denser than this are never split.
pub const MAX_DECOMPOSE_DENSITY: f64 = 0.6;

/// How one PSD block maps to its clique blocks in the decomposed problem.
#[derive(Debug, Clone)]
pub struct BlockMap {
    /// Index of the block among the original cones.
    pub cone_index: usize,
    pub orig_offset: usize,
    pub side: usize,
    pub tree: CliqueTree,
    /// First row of each clique block in the decomposed problem.
    pub clique_offsets: Vec<usize>,
    /// For each clique, the original in-block svec index of every local svec entry.
    pub selectors: Vec<Vec<usize>>,
    /// Whether a local entry carries the data of its original entry.
    pub owned: Vec<Vec<bool>>,
    /// First overlap column (absolute column index).
    pub theta_offset: usize,
    /// Per overlap variable: row of the child copy and row of the parent copy.
    pub links: Vec<(usize, usize)>,
}

impl BlockMap {
    pub fn rows(&self) -> usize {
        self.selectors.iter().map(Vec::len).sum()
    }

    /// Sums the clique entries of a stacked vector (local to this block)
    /// back into the svec of the original block.
    pub fn reassemble(&self, stacked: &[f64]) -> Vec<f64> {
        assert_eq!(stacked.len(), self.rows(), "stacked vector length");
        let mut out = vec![0.0; triangular_len(self.side)];
        let mut k = 0;
        for sel in &self.selectors {
            for &o in sel {
                out[o] += stacked[k];
                k += 1;
            }
        }
        out
    }

    /// Reads the owned copy of every pattern entry; other entries are zero.
    pub fn restrict(&self, stacked: &[f64]) -> Vec<f64> {
        assert_eq!(stacked.len(), self.rows(), "stacked vector length");
        let mut out = vec![0.0; triangular_len(self.side)];
        let mut k = 0;
        for (sel, own) in self.selectors.iter().zip(&self.owned) {
            for (&o, &w) in sel.iter().zip(own) {
                if w {
                    out[o] = stacked[k];
                }
                k += 1;
            }
        }
        out
    }
}

/// Correspondence between an original problem and its decomposed form.
#[derive(Debug, Clone)]
pub struct DecompositionMap {
    pub n: usize,
    pub m: usize,
    pub m_decomposed: usize,
    pub overlap_count: usize,
    pub blocks: Vec<BlockMap>,
    /// Untouched row ranges as `(original offset, new offset, length)`.
    pub passthrough: Vec<(usize, usize, usize)>,
}

impl DecompositionMap {
    pub fn recover_x(&self, x: &[f64]) -> Vec<f64> {
        x[..self.n].to_vec()
    }

    fn block_slice<'a>(&self, b: &BlockMap, v: &'a [f64]) -> &'a [f64] {
        let start = b.clique_offsets.first().copied().unwrap_or(0);
        &v[start..start + b.rows()]
    }

    fn copy_passthrough(&self, v: &[f64], out: &mut [f64]) {
        for &(o, nw, len) in &self.passthrough {
            out[o..o + len].copy_from_slice(&v[nw..nw + len]);
        }
    }

    /// Slack of the original problem: clique copies summed per entry.
    pub fn recover_s(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.copy_passthrough(s, &mut out);
        for b in &self.blocks {
            let r = b.reassemble(self.block_slice(b, s));
            out[b.orig_offset..b.orig_offset + r.len()].copy_from_slice(&r);
        }
        out
    }

    /// Dual variable of the original problem. Pattern entries come from the
    /// owning clique; with `complete` the remaining entries are filled so
    /// that `-y` is positive semidefinite, falling back to zeros when no
    /// completion exists.
    pub fn recover_y(&self, y: &[f64], complete: bool) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        self.copy_passthrough(y, &mut out);
        for b in &self.blocks {
            let mut r = b.restrict(self.block_slice(b, y));
            if complete {
                let neg: Vec<f64> = r.iter().map(|v| -v).collect();
                if let Ok(c) = psd_complete(&b.tree, &neg, 1e-6) {
                    r = c.iter().map(|v| -v).collect();
                }
            }
            out[b.orig_offset..b.orig_offset + r.len()].copy_from_slice(&r);
        }
        out
    }
}

/// Splits the listed PSD blocks along their clique trees. Trees with a
/// single clique leave their block unchanged.
///
/// For the decomposed problem `x` is extended by one overlap variable per
/// separator entry; each such column has `+1` on the child copy and `-1`
/// on the parent copy of the entry, so the copies sum to the original slack.
pub fn decompose(problem: &ProblemData, trees: &[(usize, CliqueTree)]) -> Result<(ProblemData, DecompositionMap)> {
    let offsets = problem.cone_offsets();
    let n = problem.n();
    let mut tree_of: Vec<Option<&CliqueTree>> = vec![None; problem.cones.len()];
    for (ci, t) in trees {
        let side = problem.cones.get(*ci).and_then(ConeSpec::psd_side).ok_or_else(|| {
            SolverError::Unsupported(format!("cone {ci} is not a PSD block"))
        })?;
        if t.n() != side {
            return Err(SolverError::DimensionMismatch { context: "clique tree size", expected: side, found: t.n() });
        }
        if t.len() >= 2 {
            tree_of[*ci] = Some(t);
        }
    }

    // rows of A as columns of the transpose
    let at = problem.A.transpose();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(problem.A.nnz() * 2);
    let mut b_new = Vec::with_capacity(problem.m());
    let mut cones = Vec::new();
    let mut blocks = Vec::new();
    let mut passthrough = Vec::new();
    let mut n_theta = 0;
    let push_row = |orig: Option<usize>, triplets: &mut Vec<(usize, usize, f64)>, b_new: &mut Vec<f64>| {
        let r = b_new.len();
        match orig {
            Some(o) => {
                let (cols, vals) = at.col(o);
                triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (r, c, v)));
                b_new.push(problem.b[o]);
            }
            None => b_new.push(0.0),
        }
        r
    };

    for (ci, cone) in problem.cones.iter().enumerate() {
        let off = offsets[ci];
        let Some(tree) = tree_of[ci] else {
            let new_off = b_new.len();
            for r in off..off + cone.dim() {
                push_row(Some(r), &mut triplets, &mut b_new);
            }
            passthrough.push((off, new_off, cone.dim()));
            cones.push(cone.clone());
            continue;
        };
        let side = tree.n();
        let p = tree.len();
        let mut clique_offsets = Vec::with_capacity(p);
        let mut selectors = Vec::with_capacity(p);
        let mut owned = Vec::with_capacity(p);
        // local position of each vertex per clique
        let mut local_pos: Vec<Vec<usize>> = Vec::with_capacity(p);
        for l in 0..p {
            let order = tree.local_order(l);
            let k = order.len();
            let sep_start = k - tree.separator(l).len();
            let mut pos = vec![usize::MAX; side];
            for (a, &v) in order.iter().enumerate() {
                pos[v] = a;
            }
            clique_offsets.push(b_new.len());
            let mut sel = Vec::with_capacity(triangular_len(k));
            let mut own = Vec::with_capacity(triangular_len(k));
            for c in 0..k {
                for r in 0..=c {
                    let (gi, gj) = (order[r].min(order[c]), order[r].max(order[c]));
                    let o = svec_index(gi, gj);
                    let is_own = !(r >= sep_start && c >= sep_start);
                    push_row(is_own.then_some(off + o), &mut triplets, &mut b_new);
                    sel.push(o);
                    own.push(is_own);
                }
            }
            selectors.push(sel);
            owned.push(own);
            local_pos.push(pos);
            cones.push(ConeSpec::PsdTriangle(triangular_len(k)));
        }

        // overlap columns, root side first
        let theta_offset = n + n_theta;
        let mut links = Vec::new();
        for l in (0..p).rev() {
            let Some(q) = tree.parent(l) else { continue };
            let sep = tree.separator(l);
            for c in 0..sep.len() {
                for r in 0..=c {
                    let (vi, vj) = (sep[r], sep[c]);
                    let row_of = |cl: usize| {
                        let (a, b) = (local_pos[cl][vi], local_pos[cl][vj]);
                        clique_offsets[cl] + svec_index(a.min(b), a.max(b))
                    };
                    let (child, parent) = (row_of(l), row_of(q));
                    let col = n + n_theta + links.len();
                    triplets.push((child, col, 1.0));
                    triplets.push((parent, col, -1.0));
                    links.push((child, parent));
                }
            }
        }
        n_theta += links.len();
        blocks.push(BlockMap {
            cone_index: ci,
            orig_offset: off,
            side,
            tree: tree.clone(),
            clique_offsets,
            selectors,
            owned,
            theta_offset,
            links,
        });
    }

    let m_new = b_new.len();
    let n_new = n + n_theta;
    let a_new = CscMatrix::from_triplets(m_new, n_new, &triplets);
    let p_trip: Vec<(usize, usize, f64)> = problem.P.iter().collect();
    let p_new = CscMatrix::from_triplets(n_new, n_new, &p_trip);
    let mut q_new = problem.q.clone();
    q_new.resize(n_new, 0.0);
    let decomposed = ProblemData { P: p_new, q: q_new, A: a_new, b: b_new, cones };
    let map = DecompositionMap {
        n,
        m: problem.m(),
        m_decomposed: m_new,
        overlap_count: n_theta,
        blocks,
        passthrough,
    };
    Ok((decomposed, map))
}

/// A decomposed problem together with the data needed to map results back.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub problem: ProblemData,
    pub map: DecompositionMap,
    pub info: DecompositionInfo,
}

/// Clique tree for one PSD block after extension and merging, or `None`
/// when the block should stay whole.
pub fn analyse_block(problem: &ProblemData, cone_index: usize, settings: &Settings) -> Result<Option<(CliqueTree, usize)>> {
    let Some(side) = problem.cones[cone_index].psd_side() else {
        return Ok(None);
    };
    if side < MIN_DECOMPOSE_SIDE {
        return Ok(None);
    }
    let offset = problem.cone_offsets()[cone_index];
    let pattern = aggregate_sparsity(&problem.A, &problem.b, offset, side);
    let extended = chordal_extension(&pattern);
    if extended.density() > MAX_DECOMPOSE_DENSITY {
        return Ok(None);
    }
    let tree = build_clique_tree(&extended)?;
    let (tree, merges) = crate::merging::merge_tree(tree, &settings.merge_strategy)?;
    Ok((tree.len() >= 2).then_some((tree, merges)))
}

/// Decomposes every PSD block that passes the size and density thresholds.
pub fn decompose_auto(problem: &ProblemData, settings: &Settings) -> Result<Option<Decomposition>> {
    let mut trees = Vec::new();
    let mut merges = 0;
    for ci in 0..problem.cones.len() {
        if let Some((t, k)) = analyse_block(problem, ci, settings)? {
            merges += k;
            trees.push((ci, t));
        }
    }
    if trees.is_empty() {
        return Ok(None);
    }
    let (decomposed, map) = decompose(problem, &trees)?;
    let info = DecompositionInfo {
        decomposed_blocks: trees.len(),
        clique_count: trees.iter().map(|(_, t)| t.len()).sum(),
        max_clique: trees.iter().map(|(_, t)| t.max_clique()).max().unwrap_or(0),
        overlaps: map.overlap_count,
        merges,
    };
    Ok(Some(Decomposition { problem: decomposed, map, info }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::pattern::SparsityPattern;

    fn worked_example() -> (ProblemData, CliqueTree) {
        // cliques {0,1,2}, {1,2,3}, {2,3,4}
        let edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4)];
        let tree = build_clique_tree(&SparsityPattern::from_edges(5, &edges)).unwrap();
        let mut trip = Vec::new();
        let mut b = vec![0.0; 15];
        for (k, &(i, j)) in edges.iter().chain(&[(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]).enumerate() {
            let o = svec_index(i.min(j), i.max(j));
            trip.push((o, 0, 1.0 + k as f64));
            b[o] = 0.5 * k as f64 - 1.0;
        }
        let pd = ProblemData {
            P: CscMatrix::zeros(1, 1),
            q: vec![1.0],
            A: CscMatrix::from_triplets(15, 1, &trip),
            b,
            cones: vec![ConeSpec::PsdTriangle(15)],
        };
        (pd, tree)
    }

    #[test]
    fn three_cliques_six_overlaps() {
        let (pd, tree) = worked_example();
        let (dec, map) = decompose(&pd, &[(0, tree)]).unwrap();
        assert_eq!(map.overlap_count, 6);
        assert_eq!(dec.n(), 7);
        assert_eq!(dec.m(), 18);
        assert!(dec.cones.iter().all(|c| matches!(c, ConeSpec::PsdTriangle(6))));
        assert_eq!(dec.cones.len(), 3);
        // each overlap column has one +1 and one -1
        for c in 1..7 {
            let (_, v) = dec.A.col(c);
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            assert_eq!(v, vec![-1.0, 1.0]);
        }
    }

    #[test]
    fn overlap_terms_cancel_on_reassembly() {
        let (pd, tree) = worked_example();
        let (dec, map) = decompose(&pd, &[(0, tree)]).unwrap();
        let x = [0.7];
        let mut xa = vec![0.0; 7];
        xa[0] = x[0];
        let s_ref: Vec<f64> = pd.b.iter().zip(pd.A.mul_vec(&x)).map(|(b, a)| b - a).collect();
        for seed in 0..3 {
            for t in 1..7 {
                xa[t] = (seed * 7 + t) as f64 * 0.37 - 1.0;
            }
            let s_dec: Vec<f64> = dec.b.iter().zip(dec.A.mul_vec(&xa)).map(|(b, a)| b - a).collect();
            let s = map.recover_s(&s_dec);
            for (a, b) in s.iter().zip(&s_ref) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_clique_passes_through() {
        let (pd, _) = worked_example();
        let t = build_clique_tree(&SparsityPattern::dense(5)).unwrap();
        let (dec, map) = decompose(&pd, &[(0, t)]).unwrap();
        assert_eq!(dec.A, pd.A);
        assert_eq!(map.overlap_count, 0);
        assert!(map.blocks.is_empty());
    }

    #[test]
    fn restrict_reads_owned_copy() {
        let (pd, tree) = worked_example();
        let (_, map) = decompose(&pd, &[(0, tree)]).unwrap();
        let b = &map.blocks[0];
        let v: Vec<f64> = (0..15).map(|k| k as f64 + 1.0).collect();
        // a consistent stacked vector repeats each entry in every copy
        let stacked: Vec<f64> = b.selectors.iter().flatten().map(|&o| v[o]).collect();
        let r = b.restrict(&stacked);
        for (o, val) in r.iter().enumerate() {
            let (i, j) = crate::linalg::svec_entry(o);
            if j - i <= 2 {
                assert_eq!(*val, v[o]);
            } else {
                assert_eq!(*val, 0.0);
            }
        }
    }

    #[test]
    fn small_blocks_not_decomposed() {
        let (pd, _) = worked_example();
        assert!(decompose_auto(&pd, &Settings::default()).unwrap().is_none());
    }
}
