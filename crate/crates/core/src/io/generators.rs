//! Seeded problem generators used by the tests, the acceptance suite and
//! the benchmark command. Every generator is deterministic in its seed.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chordal::SparsityPattern;
use crate::cones::DoublyStochasticSet;
use crate::linalg::sparse::CscMatrix;
use crate::linalg::svec::{svec_index, triangular_len};
use crate::model::{ConeSpec, ProblemData};

/// A generated problem. The modelled objective equals the solver objective
/// plus `objective_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProblem {
    pub name: String,
    pub problem: ProblemData,
    pub objective_offset: f64,
}

/// A primal-dual point satisfying the optimality conditions exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSolution {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}

fn sqrt2_if_off(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        std::f64::consts::SQRT_2
    }
}

/// Aggregate pattern of the block-arrow family: `n_blocks` diagonal blocks
/// of side `d` followed by an arrow head of width `w` coupled to everything.
pub fn block_arrow_pattern(d: usize, n_blocks: usize, w: usize) -> SparsityPattern {
    let n = n_blocks * d + w;
    let mut edges = Vec::new();
    for b in 0..n_blocks {
        for i in b * d..(b + 1) * d {
            for j in i + 1..(b + 1) * d {
                edges.push((i, j));
            }
        }
    }
    for h in n_blocks * d..n {
        for j in 0..h {
            edges.push((j, h));
        }
    }
    SparsityPattern::from_edges(n, &edges)
}

/// Lower-or-diagonal entries `(i, j)` with `i >= j` of a pattern.
fn pattern_entries(p: &SparsityPattern) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..p.n()).map(|i| (i, i)).collect();
    out.extend(p.lower_edges());
    out
}

/// Random dual-form SDP `max b'y  s.t.  Σ A_k y_k + S = C, S ⪰ 0` whose
/// aggregate sparsity is `pattern`, written as
/// `min -b'y  s.t.  Σ svec(A_k) y_k + svec(S) = svec(C)`.
///
/// Each `A_k` keeps a pattern entry with probability `fill`. Both sides are
/// strictly feasible: `X = I` is primal feasible through `b_k = tr(A_k)`,
/// and `C = S₀ + Σ A_k y₀_k` with `S₀` diagonally dominant on the pattern.
pub fn pattern_sdp(pattern: &SparsityPattern, m: usize, fill: f64, seed: u64) -> ProblemData {
    let n = pattern.n();
    let mut r = rng(seed);
    let entries = pattern_entries(pattern);
    let mut trip = Vec::new();
    let mut b_sdp = vec![0.0; m];
    let mut c = vec![0.0; triangular_len(n)];
    for (k, bk) in b_sdp.iter_mut().enumerate() {
        let y0 = uniform(&mut r, -1.0, 1.0);
        for &(i, j) in &entries {
            if r.gen::<f64>() >= fill {
                continue;
            }
            let v = uniform(&mut r, -1.0, 1.0);
            let row = svec_index(j.min(i), j.max(i));
            trip.push((row, k, v * sqrt2_if_off(i, j)));
            c[row] += v * sqrt2_if_off(i, j) * y0;
            if i == j {
                *bk += v;
            }
        }
    }
    let mut row_abs = vec![0.0; n];
    let mut offdiag = Vec::new();
    for &(i, j) in &entries {
        if i != j {
            let v = uniform(&mut r, -1.0, 1.0);
            row_abs[i] += v.abs();
            row_abs[j] += v.abs();
            offdiag.push((i, j, v));
        }
    }
    for (i, j, v) in offdiag {
        c[svec_index(j, i)] += v * std::f64::consts::SQRT_2;
    }
    for (i, ra) in row_abs.iter().enumerate() {
        c[svec_index(i, i)] += ra + 1.0;
    }
    ProblemData {
        P: CscMatrix::zeros(m, m),
        q: b_sdp.iter().map(|v| -v).collect(),
        A: CscMatrix::from_triplets(triangular_len(n), m, &trip),
        b: c,
        cones: vec![ConeSpec::PsdTriangle(triangular_len(n))],
    }
}

/// Block-arrow SDP with side `n_blocks·d + w` and `m` constraints.
pub fn block_arrow(d: usize, n_blocks: usize, w: usize, m: usize, seed: u64) -> GeneratedProblem {
    let pattern = block_arrow_pattern(d, n_blocks, w);
    GeneratedProblem {
        name: format!("block_arrow_d{d}_nb{n_blocks}_w{w}_m{m}_s{seed}"),
        problem: pattern_sdp(&pattern, m, 1.0, seed),
        objective_offset: 0.0,
    }
}

/// Random symmetric matrix with entries in `(-1, 1)`, row-major.
fn random_symmetric(n: usize, r: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n]; n];
    for j in 0..n {
        for i in 0..=j {
            let v = uniform(r, -1.0, 1.0);
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    c
}

/// Nearest correlation matrix to `C` for an explicit data matrix, with the
/// upper triangle of `X` in svec form as the variable: `P = I`,
/// `q = -svec(C)`, unit-diagonal rows in a zero cone and `-I` rows in a PSD
/// cone. svec is an isometry, so `½‖x - svec(C)‖²` equals `½‖X - C‖_F²`.
pub fn nearest_corr_from(c: &[Vec<f64>]) -> GeneratedProblem {
    let n = c.len();
    let t = triangular_len(n);
    let mut cvec = vec![0.0; t];
    for j in 0..n {
        for i in 0..=j {
            cvec[svec_index(i, j)] = c[i][j] * sqrt2_if_off(i, j);
        }
    }
    let mut trip: Vec<(usize, usize, f64)> = (0..n).map(|i| (i, svec_index(i, i), 1.0)).collect();
    trip.extend((0..t).map(|k| (n + k, k, -1.0)));
    let mut b = vec![1.0; n];
    b.extend(std::iter::repeat(0.0).take(t));
    let offset = 0.5 * cvec.iter().map(|v| v * v).sum::<f64>();
    GeneratedProblem {
        name: format!("nearest_corr_n{n}"),
        problem: ProblemData {
            P: CscMatrix::identity(t),
            q: cvec.iter().map(|v| -v).collect(),
            A: CscMatrix::from_triplets(n + t, t, &trip),
            b,
            cones: vec![ConeSpec::Zero(n), ConeSpec::PsdTriangle(t)],
        },
        objective_offset: offset,
    }
}

pub fn nearest_corr(n: usize, seed: u64) -> GeneratedProblem {
    let mut g = nearest_corr_from(&random_symmetric(n, &mut rng(seed)));
    g.name = format!("nearest_corr_n{n}_s{seed}");
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoublyStochasticForm {
    /// Row and column sums as equality rows, nonnegativity as a cone.
    Qp,
    /// The affine set handled by a custom projection.
    Custom,
}

/// Nearest doubly stochastic matrix to `C` (column-major `vec(X)` as the
/// variable) for explicit data.
pub fn doubly_stochastic_from(c: &[Vec<f64>], form: DoublyStochasticForm) -> GeneratedProblem {
    let n = c.len();
    let nn = n * n;
    let cvec: Vec<f64> = (0..nn).map(|k| c[k % n][k / n]).collect();
    let mut trip = Vec::new();
    let (b, cones) = match form {
        DoublyStochasticForm::Qp => {
            for col in 0..n {
                for row in 0..n {
                    let k = col * n + row;
                    trip.push((row, k, 1.0));
                    trip.push((n + col, k, 1.0));
                    trip.push((2 * n + k, k, -1.0));
                }
            }
            let mut b = vec![1.0; 2 * n];
            b.extend(std::iter::repeat(0.0).take(nn));
            (b, vec![ConeSpec::Zero(2 * n), ConeSpec::Nonneg(nn)])
        }
        DoublyStochasticForm::Custom => {
            for k in 0..nn {
                trip.push((k, k, -1.0));
                trip.push((nn + k, k, -1.0));
            }
            (
                vec![0.0; 2 * nn],
                vec![ConeSpec::Custom(Arc::new(DoublyStochasticSet::new(n))), ConeSpec::Nonneg(nn)],
            )
        }
    };
    let m = b.len();
    GeneratedProblem {
        name: format!("doubly_stochastic_{}_n{n}", if form == DoublyStochasticForm::Qp { "qp" } else { "custom" }),
        problem: ProblemData {
            P: CscMatrix::identity(nn),
            q: cvec.iter().map(|v| -v).collect(),
            A: CscMatrix::from_triplets(m, nn, &trip),
            b,
            cones,
        },
        objective_offset: 0.5 * cvec.iter().map(|v| v * v).sum::<f64>(),
    }
}

/// `C_ij ~ U(0, 1)`.
pub fn doubly_stochastic(n: usize, seed: u64, form: DoublyStochasticForm) -> GeneratedProblem {
    let mut r = rng(seed);
    let c: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.gen::<f64>()).collect()).collect();
    let mut g = doubly_stochastic_from(&c, form);
    g.name = format!("{}_s{seed}", g.name);
    g
}

fn sparse_random(nrows: usize, ncols: usize, density: f64, r: &mut ChaCha8Rng) -> Vec<(usize, usize, f64)> {
    let mut trip = Vec::new();
    for i in 0..nrows {
        let mut any = false;
        for j in 0..ncols {
            if r.gen::<f64>() < density {
                trip.push((i, j, uniform(r, -1.0, 1.0)));
                any = true;
            }
        }
        if !any {
            trip.push((i, r.gen_range(0..ncols), uniform(r, -1.0, 1.0)));
        }
    }
    trip
}

/// `M'M + δI` from a sparse random `M`.
fn random_psd(n: usize, rank: usize, density: f64, delta: f64, r: &mut ChaCha8Rng) -> CscMatrix {
    let m = CscMatrix::from_triplets(rank, n, &sparse_random(rank, n, density, r));
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            m.tmul_vec(&m.mul_vec(&e))
        })
        .collect();
    let mut trip = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate().take(j + 1) {
            let v = if i == j { v + delta } else { v };
            if v != 0.0 {
                trip.push((i, j, v));
            }
        }
    }
    CscMatrix::from_triplets(n, n, &trip)
}

/// Strongly convex QP with mixed zero, nonnegative and box rows and a
/// planted optimal primal-dual point. `n ≤ 50`, `m ≤ 100`. A few box rows
/// carry huge bounds and are never active.
pub fn random_qp(seed: u64) -> (GeneratedProblem, PlantedSolution) {
    let mut r = rng(seed);
    let n = r.gen_range(5..=50);
    let m = r.gen_range(n..=(2 * n).min(100));
    let m_eq = r.gen_range(1..=(n / 3).max(1));
    let m_box = r.gen_range(1..=(m - m_eq) / 2);
    let m_ineq = m - m_eq - m_box;

    let p = random_psd(n, n, 0.3, 0.1, &mut r);
    let a = CscMatrix::from_triplets(m, n, &sparse_random(m, n, 0.3, &mut r));
    let x: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
    let mut s = vec![0.0; m];
    let mut y = vec![0.0; m];
    for yi in y.iter_mut().take(m_eq) {
        *yi = uniform(&mut r, -1.0, 1.0);
    }
    for i in m_eq..m_eq + m_ineq {
        if r.gen_bool(0.5) {
            y[i] = -uniform(&mut r, 0.1, 1.0);
        } else {
            s[i] = uniform(&mut r, 0.1, 1.0);
        }
    }
    let mut lower = Vec::with_capacity(m_box);
    let mut upper = Vec::with_capacity(m_box);
    for i in m_eq + m_ineq..m {
        let centre = uniform(&mut r, -1.0, 1.0);
        s[i] = centre;
        match r.gen_range(0..4) {
            0 => {
                y[i] = -uniform(&mut r, 0.1, 1.0);
                lower.push(centre);
                upper.push(centre + uniform(&mut r, 0.5, 2.0));
            }
            1 => {
                y[i] = uniform(&mut r, 0.1, 1.0);
                lower.push(centre - uniform(&mut r, 0.5, 2.0));
                upper.push(centre);
            }
            2 => {
                lower.push(centre - uniform(&mut r, 0.5, 2.0));
                upper.push(centre + uniform(&mut r, 0.5, 2.0));
            }
            _ => {
                lower.push(-1e20);
                upper.push(1e20);
            }
        }
    }
    let ax = a.mul_vec(&x);
    let b: Vec<f64> = ax.iter().zip(&s).map(|(u, v)| u + v).collect();
    let mut px = vec![0.0; n];
    p.symv_upper(1.0, &x, 0.0, &mut px);
    let aty = a.tmul_vec(&y);
    let q: Vec<f64> = aty.iter().zip(&px).map(|(u, v)| u - v).collect();
    let problem = ProblemData {
        P: p,
        q,
        A: a,
        b,
        cones: vec![ConeSpec::Zero(m_eq), ConeSpec::Nonneg(m_ineq), ConeSpec::Box { lower, upper }],
    };
    (
        GeneratedProblem { name: format!("random_qp_s{seed}"), problem, objective_offset: 0.0 },
        PlantedSolution { x, s, y },
    )
}

fn random_unit(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| uniform(r, -1.0, 1.0)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 0.1 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

/// Constraints that admit no solution. Even seeds use a pair of
/// incompatible inequalities `a'x ≤ β` and `a'x ≥ β + γ`; odd seeds use
/// inconsistent equalities `a'x = 1`, `2a'x = 3`. Further rows are feasible
/// on their own.
pub fn primal_infeasible(seed: u64) -> GeneratedProblem {
    let mut r = rng(seed);
    let n = r.gen_range(2..=10);
    let extra = r.gen_range(1..=n);
    let a = random_unit(n, &mut r);
    let p = random_psd(n, n, 0.5, 0.0, &mut r);
    let q: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
    let x0: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
    let mut trip = Vec::new();
    let extra_rows = sparse_random(extra, n, 0.5, &mut r);
    let (b_head, cones_head) = if seed % 2 == 0 {
        let beta = uniform(&mut r, -1.0, 1.0);
        let gap = uniform(&mut r, 0.5, 2.0);
        for (j, &v) in a.iter().enumerate() {
            trip.push((0, j, v));
            trip.push((1, j, -v));
        }
        (vec![beta, -beta - gap], 2)
    } else {
        for (j, &v) in a.iter().enumerate() {
            trip.push((0, j, v));
            trip.push((1, j, 2.0 * v));
        }
        (vec![1.0, 3.0], 2)
    };
    let head = CscMatrix::from_triplets(2, n, &trip);
    let tail = CscMatrix::from_triplets(extra, n, &extra_rows);
    let slack: Vec<f64> = (0..extra).map(|_| uniform(&mut r, 0.1, 1.0)).collect();
    let mut b = b_head;
    b.extend(tail.mul_vec(&x0).iter().zip(&slack).map(|(u, v)| u + v));
    let cones = if seed % 2 == 0 {
        vec![ConeSpec::Nonneg(cones_head + extra)]
    } else {
        vec![ConeSpec::Zero(cones_head), ConeSpec::Nonneg(extra)]
    };
    GeneratedProblem {
        name: format!("primal_infeasible_s{seed}"),
        problem: ProblemData { P: p, q, A: head.vstack(&tail).expect("same column count"), b, cones },
        objective_offset: 0.0,
    }
}

/// Feasible problem that is unbounded below along a ray `d` with `Pd = 0`,
/// `q'd < 0` and `Ad ≤ 0` on inequality rows, `Ad = 0` on equality rows.
pub fn dual_infeasible(seed: u64) -> GeneratedProblem {
    let mut r = rng(seed);
    let n = r.gen_range(2..=10);
    let d = random_unit(n, &mut r);
    let project_out = |v: &mut Vec<f64>| {
        let t: f64 = v.iter().zip(&d).map(|(a, b)| a * b).sum();
        v.iter_mut().zip(&d).for_each(|(a, b)| *a -= t * b);
    };
    // P = G'G with the rows of G orthogonal to d
    let rank = n - 1;
    let mut g = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut row: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
        project_out(&mut row);
        g.push(row);
    }
    let mut p_trip = Vec::new();
    for j in 0..n {
        for i in 0..=j {
            let v: f64 = g.iter().map(|row| row[i] * row[j]).sum();
            if v != 0.0 {
                p_trip.push((i, j, v));
            }
        }
    }
    let mut q: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
    project_out(&mut q);
    let descent = uniform(&mut r, 0.5, 2.0);
    q.iter_mut().zip(&d).for_each(|(a, b)| *a -= descent * b);

    let m_eq = r.gen_range(0..n / 2 + 1);
    let m_ineq = r.gen_range(1..=2 * n);
    let x0: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
    let mut trip = Vec::new();
    let mut b = Vec::new();
    for i in 0..m_eq + m_ineq {
        let mut row: Vec<f64> = (0..n).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
        let t: f64 = row.iter().zip(&d).map(|(a, b)| a * b).sum();
        if i < m_eq {
            project_out(&mut row);
        } else if t > 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        let ax0: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
        b.push(if i < m_eq { ax0 } else { ax0 + uniform(&mut r, 0.0, 1.0) });
        for (j, v) in row.into_iter().enumerate() {
            trip.push((i, j, v));
        }
    }
    let mut cones = Vec::new();
    if m_eq > 0 {
        cones.push(ConeSpec::Zero(m_eq));
    }
    cones.push(ConeSpec::Nonneg(m_ineq));
    GeneratedProblem {
        name: format!("dual_infeasible_s{seed}"),
        problem: ProblemData {
            P: CscMatrix::from_triplets(n, n, &p_trip),
            q,
            A: CscMatrix::from_triplets(m_eq + m_ineq, n, &trip),
            b,
            cones,
        },
        objective_offset: 0.0,
    }
}

/// Random graph: a Hamiltonian path keeps it connected, then each further
/// pair is an edge with probability `density`. Generally not chordal.
pub fn random_pattern(n: usize, density: f64, seed: u64) -> SparsityPattern {
    let mut r = rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let mut edges: Vec<(usize, usize)> = perm.windows(2).map(|w| (w[0], w[1])).collect();
    for i in 0..n {
        for j in i + 1..n {
            if r.gen::<f64>() < density {
                edges.push((i, j));
            }
        }
    }
    SparsityPattern::from_edges(n, &edges)
}

/// Band of half-width `bandwidth` plus `extra` random long-range edges.
pub fn banded_pattern(n: usize, bandwidth: usize, extra: usize, seed: u64) -> SparsityPattern {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..(i + bandwidth + 1).min(n) {
            edges.push((i, j));
        }
    }
    for _ in 0..extra {
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i != j {
            edges.push((i.min(j), i.max(j)));
        }
    }
    SparsityPattern::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{chordal_extension, mcs_is_chordal};

    #[test]
    fn block_arrow_side() {
        let g = block_arrow(2, 2, 1, 3, 0);
        assert_eq!(g.problem.cones, vec![ConeSpec::PsdTriangle(15)]);
        assert_eq!(g.problem.n(), 3);
    }

    #[test]
    fn block_arrow_pattern_is_chordal() {
        let p = block_arrow_pattern(4, 5, 3);
        assert!(mcs_is_chordal(&p));
        assert_eq!(chordal_extension(&p).edge_count(), p.edge_count());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(block_arrow(3, 3, 2, 5, 9), block_arrow(3, 3, 2, 5, 9));
        assert_eq!(nearest_corr(4, 2), nearest_corr(4, 2));
        assert_eq!(random_qp(5), random_qp(5));
        assert_ne!(random_qp(5).0.problem, random_qp(6).0.problem);
    }

    #[test]
    fn nearest_corr_small() {
        let g = nearest_corr(2, 1);
        assert_eq!(g.problem.n(), 3);
        assert_eq!(g.problem.m(), 5);
        // diagonal rows read x[svec(0,0)] and x[svec(1,1)]
        assert_eq!(g.problem.A.get(0, 0), 1.0);
        assert_eq!(g.problem.A.get(1, 2), 1.0);
        assert_eq!(&g.problem.b[..2], &[1.0, 1.0]);
    }

    #[test]
    fn doubly_stochastic_nonzeros() {
        let n = 6;
        assert_eq!(doubly_stochastic(n, 0, DoublyStochasticForm::Qp).problem.A.nnz(), 3 * n * n);
        assert_eq!(doubly_stochastic(n, 0, DoublyStochasticForm::Custom).problem.A.nnz(), 2 * n * n);
    }

    #[test]
    fn planted_qp_satisfies_kkt() {
        for seed in 0..5 {
            let (g, sol) = random_qp(seed);
            let p = &g.problem;
            crate::model::validate(p).unwrap();
            let ax = p.A.mul_vec(&sol.x);
            for i in 0..p.m() {
                assert!((ax[i] + sol.s[i] - p.b[i]).abs() < 1e-12);
            }
            let mut px = vec![0.0; p.n()];
            p.P.symv_upper(1.0, &sol.x, 0.0, &mut px);
            let aty = p.A.tmul_vec(&sol.y);
            for j in 0..p.n() {
                assert!((px[j] + p.q[j] - aty[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infeasible_generators_validate() {
        for seed in 0..6 {
            crate::model::validate(&primal_infeasible(seed).problem).unwrap();
            crate::model::validate(&dual_infeasible(seed).problem).unwrap();
        }
    }

    #[test]
    fn patterns_are_connected_and_sized() {
        let p = random_pattern(30, 0.05, 1);
        assert!(p.edge_count() >= 29);
        let b = banded_pattern(20, 2, 0, 0);
        assert_eq!(b.edge_count(), 19 + 18);
    }
}
