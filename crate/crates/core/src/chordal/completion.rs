use nalgebra::{DMatrix, SymmetricEigen};

use super::tree::CliqueTree;
use crate::error::{Result, SolverError};
use crate::linalg::svec::{smat, svec, triangular_len};

fn submatrix(x: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| x[(rows[i], cols[j])])
}

fn pseudo_inverse_sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m.nrows();
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let cut = lmax * 1e-12 * k as f64;
    let mut out = DMatrix::zeros(k, k);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cut {
            let v = eig.eigenvectors.column(i);
            out += (v * v.transpose()) / l;
        }
    }
    out
}

/// Smallest eigenvalue of each clique restriction of `x`.
pub fn clique_min_eigenvalues(tree: &CliqueTree, x: &DMatrix<f64>) -> Vec<f64> {
    tree.cliques()
        .iter()
        .map(|c| {
            let s = submatrix(x, c, c);
            if s.nrows() == 0 {
                0.0
            } else {
                s.symmetric_eigenvalues().min()
            }
        })
        .collect()
}

/// Positive semidefinite completion of a matrix specified on the cliques
/// of `tree`. Entries of `partial` outside the cliques are ignored.
///
/// Cliques are visited from the root down; the block coupling each new
/// supernode to the already completed vertices is set to
/// `X[ν,η] X[η,η]⁺ X[η,W]`. Fails when a clique restriction has an eigenvalue
/// below `-tol·max(1, ‖X_c‖)`.
pub fn psd_complete(tree: &CliqueTree, partial: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = tree.n();
    if partial.len() != triangular_len(n) {
        return Err(SolverError::DimensionMismatch {
            context: "psd_complete input",
            expected: triangular_len(n),
            found: partial.len(),
        });
    }
    let given = smat(partial)?;
    let mut x = DMatrix::zeros(n, n);
    for c in tree.cliques() {
        for &i in c {
            for &j in c {
                x[(i, j)] = given[(i, j)];
            }
        }
    }
    for (l, c) in tree.cliques().iter().enumerate() {
        if c.is_empty() {
            continue;
        }
        let s = submatrix(&x, c, c);
        let scale = s.amax().max(1.0);
        let min_eig = s.symmetric_eigenvalues().min();
        if min_eig < -tol * scale {
            return Err(SolverError::NotCompletable { clique: l, min_eig });
        }
    }

    let mut done = vec![false; n];
    for l in (0..tree.len()).rev() {
        let nu = tree.supernode(l);
        let eta = tree.separator(l);
        if !eta.is_empty() {
            let w: Vec<usize> = (0..n).filter(|&v| done[v] && eta.binary_search(&v).is_err()).collect();
            if !w.is_empty() {
                let x_nu_eta = submatrix(&x, nu, eta);
                let x_eta_w = submatrix(&x, eta, &w);
                let fill = x_nu_eta * pseudo_inverse_sym(&submatrix(&x, eta, eta)) * x_eta_w;
                for (a, &i) in nu.iter().enumerate() {
                    for (b, &j) in w.iter().enumerate() {
                        x[(i, j)] = fill[(a, b)];
                        x[(j, i)] = fill[(a, b)];
                    }
                }
            }
        }
        for &v in tree.clique(l) {
            done[v] = true;
        }
    }
    svec(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::pattern::SparsityPattern;
    use crate::chordal::tree::build_clique_tree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn min_eig(v: &[f64]) -> f64 {
        smat(v).unwrap().symmetric_eigenvalues().min()
    }

    #[test]
    fn dense_pattern_is_identity() {
        let t = build_clique_tree(&SparsityPattern::dense(3)).unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let v = svec(&m).unwrap();
        let out = psd_complete(&t, &v, 1e-9).unwrap();
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn block_diagonal_completion_is_zero() {
        let t = build_clique_tree(&SparsityPattern::from_edges(4, &[(0, 1), (2, 3)])).unwrap();
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[2.0, 1.0, 5.0, 5.0, 1.0, 2.0, 5.0, 5.0, 5.0, 5.0, 2.0, 1.0, 5.0, 5.0, 1.0, 2.0],
        );
        let out = smat(&psd_complete(&t, &svec(&m).unwrap(), 1e-9).unwrap()).unwrap();
        assert_eq!(out[(0, 2)], 0.0);
        assert_eq!(out[(1, 3)], 0.0);
        assert!((out[(0, 1)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn banded_random_completion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10;
        // restriction of a random PSD matrix to a band is completable
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let full = &g * g.transpose();
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..(i + 3).min(n)).map(move |j| (i, j))).collect();
        let p = SparsityPattern::from_edges(n, &edges);
        let t = build_clique_tree(&p).unwrap();
        let v = svec(&full).unwrap();
        let out = psd_complete(&t, &v, 1e-9).unwrap();
        assert!(min_eig(&out) >= -1e-7);
        let om = smat(&out).unwrap();
        for i in 0..n {
            for j in 0..n {
                if p.has_edge(i, j) {
                    assert!((om[(i, j)] - full[(i, j)]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn refuses_indefinite_clique() {
        let t = build_clique_tree(&SparsityPattern::from_edges(3, &[(0, 1), (1, 2)])).unwrap();
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = psd_complete(&t, &svec(&m).unwrap(), 1e-9);
        assert!(matches!(r, Err(SolverError::NotCompletable { .. })));
    }
}
