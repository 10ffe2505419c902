//! Independent oracles shared by the integration suites. Everything here
//! deliberately avoids the library's own solution paths: Newton and
//! bisection check the Lambert route, the tree walk checks the
//! physical-number recurrence, and the Jacobi SVD rank checks assembly.

// each test target compiles its own copy and uses a different subset
#![allow(dead_code)]

use hiercon::delay::residual_system;
use hiercon::hierarchy::HierarchySpec;
use hiercon::mat::Mat;
use num_complex::Complex64;

/// 2D Newton on the residual system of `s e^{Ts} + lambda = 0`, with the
/// analytic Jacobian. Starts on the real axis in the real-root regime
/// (lambda T < 1/e) and at (0, pi/(2T)) otherwise.
pub fn newton_rightmost(t: f64, lambda: f64) -> Option<Complex64> {
    let (mut sigma, mut omega) = if lambda * t < (1.0_f64).exp().recip() {
        (0.0, 0.0)
    } else {
        (0.0, std::f64::consts::FRAC_PI_2 / t)
    };
    for _ in 0..200 {
        let (r1, r2) = residual_system(sigma, omega, t, lambda);
        if (r1 * r1 + r2 * r2).sqrt() <= 1e-13 * lambda.max(1.0) {
            return Some(Complex64::new(sigma, omega));
        }
        let est = (sigma * t).exp();
        let (sin, cos) = (omega * t).sin_cos();
        let a = est * (sigma * cos - omega * sin); // r1 - lambda
        let b = est * (sigma * sin + omega * cos); // r2
        let j11 = t * a + est * cos;
        let j12 = -t * b - est * sin;
        let j21 = t * b + est * sin;
        let j22 = t * a + est * cos;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return None;
        }
        let mut ds = (r1 * j22 - r2 * j12) / det;
        let mut dw = (r2 * j11 - r1 * j21) / det;
        // damp oversized steps to stay in the basin
        let norm = (ds * ds + dw * dw).sqrt();
        let cap = 1.0 / t.max(1.0);
        if norm > cap {
            ds *= cap / norm;
            dw *= cap / norm;
        }
        sigma -= ds;
        omega -= dw;
    }
    None
}

/// Bisection on the real characteristic root, valid for lambda T < 1/e.
pub fn bisect_real_root(t: f64, lambda: f64) -> f64 {
    assert!(lambda * t < (1.0_f64).exp().recip());
    let g = |s: f64| s * (s * t).exp() + lambda;
    let mut lo = -1.0 / t;
    let mut hi = 0.0;
    assert!(g(lo) < 0.0 && g(hi) > 0.0, "bracket failed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Leaf counts per node by explicitly walking the interlayer trees.
pub fn tree_walk_physical_numbers(spec: &HierarchySpec) -> Vec<Vec<usize>> {
    let m = spec.layer_count();
    // parent of node i of layer l (0-based) is its group index
    let mut parents: Vec<Vec<usize>> = Vec::with_capacity(m);
    for layer in &spec.layers {
        let mut p = Vec::new();
        for (gi, g) in layer.groups.iter().enumerate() {
            for _ in 0..g.size {
                p.push(gi);
            }
        }
        parents.push(p);
    }
    let mut counts: Vec<Vec<usize>> = (0..m)
        .map(|l| vec![0usize; spec.layers[l].node_count()])
        .collect();
    // push each physical leaf up its chain of superiors
    for leaf in 0..spec.layers[0].node_count() {
        counts[0][leaf] += 1;
        let mut node = leaf;
        for l in 0..m - 1 {
            node = parents[l][node];
            counts[l + 1][node] += 1;
        }
    }
    counts
}

/// Singular values by one-sided Jacobi: rotate column pairs until all are
/// mutually orthogonal; the singular values are the final column norms.
/// Unlike the Gram-matrix route this keeps small singular values accurate
/// to machine precision relative to the largest.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)]).collect())
        .collect();
    for _ in 0..60 {
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let (head, tail) = cols.split_at_mut(j);
                let ci = &mut head[i];
                let cj = &mut tail[0];
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for k in 0..m {
                    app += ci[k] * ci[k];
                    aqq += cj[k] * cj[k];
                    apq += ci[k] * cj[k];
                }
                let scale = (app * aqq).sqrt();
                if scale == 0.0 || apq.abs() <= f64::EPSILON * scale {
                    continue;
                }
                worst = worst.max(apq.abs() / scale);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..m {
                    let x = ci[k];
                    let y = cj[k];
                    ci[k] = c * x - s * y;
                    cj[k] = s * x + c * y;
                }
            }
        }
        if worst <= 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numeric rank: singular values above 1e-9 of the largest.
pub fn numeric_rank(a: &Mat) -> usize {
    let sv = singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > 1e-9 * smax).count()
}
