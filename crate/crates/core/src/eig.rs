//! Dense eigensolvers: cyclic Jacobi for symmetric matrices, balanced
//! Hessenberg + Francis double-shift QR for general real matrices, and a
//! Wilkinson-shifted single-shift QR for complex matrices.
//!
//! The symmetric and general solvers are deliberately independent code
//! paths so they can be tested against each other.

use crate::mat::{CMat, Mat};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigError {
    #[error("QR iteration failed to converge after {iterations} sweeps on a {n}x{n} matrix (active block {lo}..={hi})")]
    NoConvergence {
        n: usize,
        iterations: usize,
        lo: usize,
        hi: usize,
    },
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal mass drops below machine
/// precision relative to the matrix scale. Returns unsorted eigenvalues.
pub fn sym_eigenvalues(a: &Mat) -> Vec<f64> {
    assert!(a.is_square(), "symmetric eigensolver needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return Vec::new();
    }
    let mut a = a.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    const MAX_SWEEPS: usize = 50;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].abs();
            }
        }
        if off <= n as f64 * f64::EPSILON * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::EPSILON * scale * 1e-3 {
                    continue;
                }
                // rotation angle from the 2x2 subproblem
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let t = if theta.abs() > 1e12 {
                    0.5 / theta
                } else {
                    let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                a[(p, p)] -= h;
                a[(q, q)] += h;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let g = a[(j, p)];
                    let hh = a[(j, q)];
                    a[(j, p)] = g - s * (hh + g * tau);
                    a[(j, q)] = hh + s * (g - hh * tau);
                    a[(p, j)] = a[(j, p)];
                    a[(q, j)] = a[(j, q)];
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// All eigenvalues of a general real matrix.
///
/// Diagonal balancing, Householder reduction to upper Hessenberg form,
/// then Francis double-shift QR with deflation (the classic EISPACK
/// `hqr` path, eigenvalues only). Iterations are capped at 30 per
/// eigenvalue.
pub fn general_eigenvalues(a: &Mat) -> Result<Vec<Complex64>, EigError> {
    assert!(a.is_square(), "eigensolver needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    francis_qr(&mut h)
}

/// Diagonal similarity scaling so rows and columns have comparable norms.
fn balance(a: &mut Mat) {
    let n = a.rows();
    const RADIX: f64 = 2.0;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let mut cc = c;
            let s = c + r;
            while cc < r / RADIX {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            while cc > r * RADIX {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (c * f + r / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut Mat) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let mut scale = 0.0;
        for i in (k + 1)..n {
            scale += a[(i, k)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut v = vec![0.0; n];
        let mut h = 0.0;
        for i in (k + 1)..n {
            v[i] = a[(i, k)] / scale;
            h += v[i] * v[i];
        }
        let mut g = h.sqrt();
        if v[k + 1] > 0.0 {
            g = -g;
        }
        h -= v[k + 1] * g;
        v[k + 1] -= g;
        // apply (I - vv^T/h) from the left then the right
        for j in k..n {
            let mut f = 0.0;
            for i in (k + 1)..n {
                f += v[i] * a[(i, j)];
            }
            f /= h;
            for i in (k + 1)..n {
                a[(i, j)] -= f * v[i];
            }
        }
        for i in 0..n {
            let mut f = 0.0;
            for j in (k + 1)..n {
                f += v[j] * a[(i, j)];
            }
            f /= h;
            for j in (k + 1)..n {
                a[(i, j)] -= f * v[j];
            }
        }
        a[(k + 1, k)] = scale * g;
        for i in (k + 2)..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
fn francis_qr(h: &mut Mat) -> Result<Vec<Complex64>, EigError> {
    let nn = h.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); nn];
    let eps = f64::EPSILON;

    let mut anorm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            anorm += h[(i, j)].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(eig);
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let cap_per_eig = 30 * nn;

    let (mut p, mut q, mut r, mut s, mut z, mut w, mut x, mut y);
    p = 0.0;
    q = 0.0;
    r = 0.0;

    while n >= 0 {
        // find the smallest l with a negligible subdiagonal entry
        let mut l = n;
        while l > 0 {
            s = h[((l - 1) as usize, (l - 1) as usize)].abs() + h[(l as usize, l as usize)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if h[(l as usize, (l - 1) as usize)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // single real eigenvalue
            eig[n as usize] = Complex64::new(h[(n as usize, n as usize)] + exshift, 0.0);
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // 2x2 block: real pair or complex conjugate pair
            w = h[(n as usize, (n - 1) as usize)] * h[((n - 1) as usize, n as usize)];
            p = (h[((n - 1) as usize, (n - 1) as usize)] - h[(n as usize, n as usize)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = h[(n as usize, n as usize)] + exshift;
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                let e1 = x + z;
                let e2 = if z != 0.0 { x - w / z } else { e1 };
                eig[(n - 1) as usize] = Complex64::new(e1, 0.0);
                eig[n as usize] = Complex64::new(e2, 0.0);
            } else {
                eig[(n - 1) as usize] = Complex64::new(x + p, z);
                eig[n as usize] = Complex64::new(x + p, -z);
            }
            n -= 2;
            iter = 0;
        } else {
            if iter >= cap_per_eig {
                return Err(EigError::NoConvergence {
                    n: nn,
                    iterations: iter,
                    lo: l as usize,
                    hi: n as usize,
                });
            }
            x = h[(n as usize, n as usize)];
            y = h[((n - 1) as usize, (n - 1) as usize)];
            w = h[(n as usize, (n - 1) as usize)] * h[((n - 1) as usize, n as usize)];
            // exceptional shifts to break cycling
            if iter > 0 && iter.is_multiple_of(10) {
                exshift += x;
                for i in 0..=(n as usize) {
                    h[(i, i)] -= x;
                }
                s = h[(n as usize, (n - 1) as usize)].abs()
                    + h[((n - 1) as usize, (n - 2) as usize)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            iter += 1;

            // two consecutive small subdiagonals
            let mut m = n - 2;
            while m >= l {
                z = h[(m as usize, m as usize)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[((m + 1) as usize, m as usize)]
                    + h[(m as usize, (m + 1) as usize)];
                q = h[((m + 1) as usize, (m + 1) as usize)] - z - r - s;
                r = h[((m + 2) as usize, (m + 1) as usize)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m as usize, (m - 1) as usize)].abs() * (q.abs() + r.abs());
                let rhs = eps
                    * p.abs()
                    * (h[((m - 1) as usize, (m - 1) as usize)].abs()
                        + z.abs()
                        + h[((m + 1) as usize, (m + 1) as usize)].abs());
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h[(i as usize, (i - 2) as usize)] = 0.0;
                if i > m + 2 {
                    h[(i as usize, (i - 3) as usize)] = 0.0;
                }
            }

            // double QR step on rows l..=n
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h[(k as usize, (k - 1) as usize)];
                    q = h[((k + 1) as usize, (k - 1) as usize)];
                    r = if notlast {
                        h[((k + 2) as usize, (k - 1) as usize)]
                    } else {
                        0.0
                    };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k as usize, (k - 1) as usize)] = -s * x;
                } else if l != m {
                    h[(k as usize, (k - 1) as usize)] = -h[(k as usize, (k - 1) as usize)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in (k as usize)..nn {
                    p = h[(k as usize, j)] + q * h[((k + 1) as usize, j)];
                    if notlast {
                        p += r * h[((k + 2) as usize, j)];
                        h[((k + 2) as usize, j)] -= p * z;
                    }
                    h[(k as usize, j)] -= p * x;
                    h[((k + 1) as usize, j)] -= p * y;
                }
                let imax = std::cmp::min(n, k + 3) as usize;
                for i in 0..=imax {
                    p = x * h[(i, k as usize)] + y * h[(i, (k + 1) as usize)];
                    if notlast {
                        p += z * h[(i, (k + 2) as usize)];
                        h[(i, (k + 2) as usize)] -= p * r;
                    }
                    h[(i, k as usize)] -= p;
                    h[(i, (k + 1) as usize)] -= p * q;
                }
            }
        }
    }
    Ok(eig)
}

/// All eigenvalues of a general complex matrix.
///
/// Householder reduction to Hessenberg form followed by single-shift QR
/// with the Wilkinson shift. Complex arithmetic keeps every step a plain
/// rank-one update; there are no 2x2 real blocks to split.
pub fn complex_eigenvalues(a: &CMat) -> Result<Vec<Complex64>, EigError> {
    assert_eq!(a.rows(), a.cols(), "eigensolver needs a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    chessenberg(&mut h);
    complex_qr(&mut h)
}

fn chessenberg(a: &mut CMat) {
    let n = a.rows();
    for k in 0..n.saturating_sub(2) {
        let mut xnorm = 0.0;
        for i in (k + 1)..n {
            xnorm += a[(i, k)].norm_sqr();
        }
        let xnorm = xnorm.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0.norm() == 0.0 {
            Complex64::new(-xnorm, 0.0)
        } else {
            -(x0 / x0.norm()) * xnorm
        };
        // v = x - alpha e1, normalized so the reflector is I - 2 v v*
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = a[(i, k)];
        }
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in &mut v {
            *vi /= vnorm;
        }
        // left: A <- A - 2 v (v* A)
        for j in k..n {
            let mut f = Complex64::new(0.0, 0.0);
            for i in (k + 1)..n {
                f += v[i].conj() * a[(i, j)];
            }
            f *= 2.0;
            for i in (k + 1)..n {
                let sub = f * v[i];
                a[(i, j)] -= sub;
            }
        }
        // right: A <- A - 2 (A v) v*
        for i in 0..n {
            let mut f = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                f += a[(i, j)] * v[j];
            }
            f *= 2.0;
            for j in (k + 1)..n {
                let sub = f * v[j].conj();
                a[(i, j)] -= sub;
            }
        }
        a[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn complex_qr(h: &mut CMat) -> Result<Vec<Complex64>, EigError> {
    let n = h.rows();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let eps = f64::EPSILON;
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let cap_per_eig = 30 * n;

    while hi >= 0 {
        // deflate
        let mut lo = hi;
        while lo > 0 {
            let s = h[((lo - 1) as usize, (lo - 1) as usize)].norm()
                + h[(lo as usize, lo as usize)].norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[(lo as usize, (lo - 1) as usize)].norm() < eps * s {
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi as usize] = h[(hi as usize, hi as usize)];
            hi -= 1;
            iter = 0;
            continue;
        }
        if iter >= cap_per_eig {
            return Err(EigError::NoConvergence {
                n,
                iterations: iter,
                lo: lo as usize,
                hi: hi as usize,
            });
        }

        // Wilkinson shift from the trailing 2x2 of the active block
        let a11 = h[((hi - 1) as usize, (hi - 1) as usize)];
        let a12 = h[((hi - 1) as usize, hi as usize)];
        let a21 = h[(hi as usize, (hi - 1) as usize)];
        let a22 = h[(hi as usize, hi as usize)];
        let tr = a11 + a22;
        let det = a11 * a22 - a12 * a21;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let mu1 = (tr + disc) / 2.0;
        let mu2 = (tr - disc) / 2.0;
        let mut mu = if (mu1 - a22).norm() < (mu2 - a22).norm() {
            mu1
        } else {
            mu2
        };
        if iter > 0 && iter.is_multiple_of(10) {
            // exceptional shift
            mu = a22 + Complex64::new(1.5 * a21.norm(), 0.0);
        }
        iter += 1;

        // explicit shifted QR step via Givens rotations on the active block
        let lo = lo as usize;
        let hiu = hi as usize;
        let m = hiu - lo + 1;
        let mut cs = vec![Complex64::new(0.0, 0.0); m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        for i in lo..=hiu {
            h[(i, i)] -= mu;
        }
        for k in lo..hiu {
            // rotation zeroing h[k+1, k]
            let a = h[(k, k)];
            let b = h[(k + 1, k)];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
            } else {
                (a.conj() / r, b.conj() / r)
            };
            cs[k - lo] = c;
            sn[k - lo] = s;
            for j in k..n {
                let u = h[(k, j)];
                let v = h[(k + 1, j)];
                h[(k, j)] = c * u + s * v;
                h[(k + 1, j)] = -s.conj() * u + c.conj() * v;
            }
        }
        for k in lo..hiu {
            let c = cs[k - lo];
            let s = sn[k - lo];
            let imax = std::cmp::min(k + 2, hiu);
            for i in 0..=imax {
                let u = h[(i, k)];
                let v = h[(i, k + 1)];
                h[(i, k)] = u * c.conj() + v * s.conj();
                h[(i, k + 1)] = -u * s + v * c;
            }
        }
        for i in lo..=hiu {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn jacobi_diagonal() {
        let a = Mat::from_diag(&[3.0, 1.0, 2.0]);
        let e = sorted(sym_eigenvalues(&a));
        assert_eq!(e, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_known_2x2() {
        // [[2,1],[1,2]] -> {1, 3}
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = sorted(sym_eigenvalues(&a));
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_path_laplacian() {
        // path on 3 nodes: eigenvalues {0, 1, 3}
        let a = Mat::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ]);
        let e = sorted(sym_eigenvalues(&a));
        assert!(e[0].abs() < 1e-14);
        assert!((e[1] - 1.0).abs() < 1e-14);
        assert!((e[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn general_diagonal() {
        let a = Mat::from_diag(&[1.0, 2.0, 3.0]);
        let mut e = general_eigenvalues(&a).unwrap();
        e.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (ev, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ev.re - want).abs() < 1e-12 && ev.im.abs() < 1e-12);
        }
    }

    #[test]
    fn general_rotation_generator() {
        // [[0,1],[-1,0]] -> {i, -i}
        let a = Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        let mut e = general_eigenvalues(&a).unwrap();
        e.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn general_agrees_with_jacobi_on_symmetric() {
        let a = Mat::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 3.0, 2.0],
            vec![3.0, 2.0, 2.0],
        ]);
        let js = sorted(sym_eigenvalues(&a));
        let mut gs = general_eigenvalues(&a).unwrap();
        gs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (j, g) in js.iter().zip(&gs) {
            assert!((j - g.re).abs() < 1e-10, "jacobi {j} vs qr {}", g.re);
            assert!(g.im.abs() < 1e-10);
        }
    }

    #[test]
    fn complex_solver_matches_real_on_lift() {
        let a = Mat::from_rows(&[
            vec![0.0, 1.0, 0.5],
            vec![-1.0, 0.0, 0.25],
            vec![0.0, 2.0, -1.0],
        ]);
        let lifted = CMat::from_scaled_real(&a, Complex64::new(1.0, 0.0));
        let mut ce = complex_eigenvalues(&lifted).unwrap();
        let mut re = general_eigenvalues(&a).unwrap();
        let key = |c: &Complex64| (c.re, c.im);
        ce.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        re.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (c, r) in ce.iter().zip(&re) {
            assert!((c - r).norm() < 1e-9, "complex {c} vs real {r}");
        }
    }

    #[test]
    fn stress_random_real_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..30 {
            let n = rng.gen_range(2..=24);
            let mut a = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = rng.gen_range(-2.0..2.0);
                }
            }
            let e = general_eigenvalues(&a).expect("convergence");
            assert_eq!(e.len(), n);
            // trace check: sum of eigenvalues equals the trace
            let tr: f64 = (0..n).map(|i| a[(i, i)]).sum();
            let sum: Complex64 = e.iter().sum();
            let scale = e.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
            assert!(
                (sum.re - tr).abs() < 1e-9 * scale * n as f64 && sum.im.abs() < 1e-9 * scale,
                "trial {trial}: trace {tr} vs eigensum {sum}"
            );
        }
    }

    #[test]
    fn stress_random_complex_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for trial in 0..30 {
            let n = rng.gen_range(2..=20);
            let mut a = CMat::zeros(n, n);
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                }
                tr += a[(i, i)];
            }
            let e = complex_eigenvalues(&a).expect("convergence");
            assert_eq!(e.len(), n);
            let sum: Complex64 = e.iter().sum();
            let scale = e.iter().map(|c| c.norm()).fold(1.0_f64, f64::max);
            assert!(
                (sum - tr).norm() < 1e-9 * scale * n as f64,
                "trial {trial}: trace {tr} vs eigensum {sum}"
            );
        }
    }

    #[test]
    fn complex_solver_scaled_triangle() {
        // upper triangular complex matrix: eigenvalues are the diagonal
        let s = Complex64::new(0.3, -0.7);
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = s;
        m[(0, 1)] = Complex64::new(1.0, 1.0);
        m[(1, 1)] = 2.0 * s;
        m[(1, 2)] = Complex64::new(-0.5, 0.0);
        m[(2, 2)] = 3.0 * s;
        let mut e = complex_eigenvalues(&m).unwrap();
        e.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        for (ev, k) in e.iter().zip(1..=3) {
            assert!((ev - s * k as f64).norm() < 1e-10);
        }
    }
}
