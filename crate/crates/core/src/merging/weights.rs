use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cones::project_psd_triangle;
use crate::linalg::svec::triangular_len;
use crate::model::EdgeWeight;

fn union_len(a: &[usize], b: &[usize]) -> usize {
    let common = a.iter().filter(|v| b.binary_search(v).is_ok()).count();
    a.len() + b.len() - common
}

/// `|Ci|³ + |Cj|³ - |Ci ∪ Cj|³` for sorted cliques.
pub fn nominal_weight(ci: &[usize], cj: &[usize]) -> f64 {
    let c = |k: usize| (k as f64).powi(3);
    c(ci.len()) + c(cj.len()) - c(union_len(ci, cj))
}

/// Projection cost model `a N³ + b N²`.
pub fn projection_cost(a: f64, b: f64, size: usize) -> f64 {
    let s = size as f64;
    a * s * s * s + b * s * s
}

/// Estimated saving `t(|Ci|) + t(|Cj|) - t(|Ci ∪ Cj|)`.
pub fn estimated_weight(ci: &[usize], cj: &[usize], a: f64, b: f64) -> f64 {
    projection_cost(a, b, ci.len()) + projection_cost(a, b, cj.len()) - projection_cost(a, b, union_len(ci, cj))
}

pub fn edge_weight(w: &EdgeWeight, ci: &[usize], cj: &[usize]) -> f64 {
    match *w {
        EdgeWeight::Nominal => nominal_weight(ci, cj),
        EdgeWeight::Estimated { a, b } => estimated_weight(ci, cj, a, b),
    }
}

/// Least-squares fit of `t = a N³ + b N²` to `(N, t)` samples.
pub fn fit_projection_model(samples: &[(usize, f64)]) -> Option<(f64, f64)> {
    // normal equations of the two-column design [N³, N²]
    let (mut s66, mut s55, mut s44, mut s3t, mut s2t) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, t) in samples {
        let n = n as f64;
        s66 += n.powi(6);
        s55 += n.powi(5);
        s44 += n.powi(4);
        s3t += n.powi(3) * t;
        s2t += n.powi(2) * t;
    }
    let det = s66 * s44 - s55 * s55;
    if !(det.abs() > 0.0) || !det.is_finite() {
        return None;
    }
    Some(((s44 * s3t - s55 * s2t) / det, (s66 * s2t - s55 * s3t) / det))
}

/// Times the PSD projection at each size, taking the fastest of `reps` runs.
pub fn measure_projection_times(sizes: &[usize], reps: usize) -> Vec<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    sizes
        .iter()
        .map(|&n| {
            let v: Vec<f64> = (0..triangular_len(n)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut best = f64::INFINITY;
            for _ in 0..reps.max(1) {
                let mut w = v.clone();
                let t = Instant::now();
                project_psd_triangle(&mut w).expect("projection of a finite matrix");
                best = best.min(t.elapsed().as_secs_f64());
            }
            (n, best)
        })
        .collect()
}

/// Sizes used for calibration.
pub const CALIBRATION_SIZES: [usize; 15] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75];

/// Fallback cost model, in seconds, used when no calibration is run.
pub const DEFAULT_ESTIMATED: EdgeWeight = EdgeWeight::Estimated { a: 2.0e-9, b: 4.0e-8 };

/// Calibrates the estimated weighting on this machine.
pub fn calibrate_estimated_weight(reps: usize) -> EdgeWeight {
    let samples = measure_projection_times(&CALIBRATION_SIZES, reps);
    match fit_projection_model(&samples) {
        Some((a, b)) if a.is_finite() && b.is_finite() => EdgeWeight::Estimated { a, b },
        _ => DEFAULT_ESTIMATED,
    }
}
