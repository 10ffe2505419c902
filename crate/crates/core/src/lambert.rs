//! Complex Lambert W function by Halley iteration.
//!
//! `W_k(z)` solves `w * exp(w) = z` on branch `k`. The initial guess is
//! picked per region: a series around the origin, a square-root expansion
//! near the branch point at `-1/e`, and the asymptotic `log(z) - log(log(z))`
//! elsewhere, with the `2*pi*k*i` offset selecting the branch.

use num_complex::Complex64;
use std::f64::consts::{E, PI};
use thiserror::Error;

const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Error)]
#[error("Lambert W Halley iteration did not converge for z = {z} on branch {branch} (residual {residual:.3e})")]
pub struct LambertError {
    pub z: Complex64,
    pub branch: i32,
    pub residual: f64,
}

/// W_k(z) to a residual |w e^w - z| <= 1e-12 * max(|z|, 1e-300).
pub fn lambert_w(z: Complex64, k: i32) -> Result<Complex64, LambertError> {
    if z.norm() == 0.0 {
        return if k == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(LambertError {
                z,
                branch: k,
                residual: f64::INFINITY,
            })
        };
    }

    let mut w = initial_guess(z, k);
    let tol = 1e-12 * z.norm().max(1e-300);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - z;
        if f.norm() <= tol {
            return Ok(w);
        }
        // Halley step: f' = (w+1)e^w, f'' = (w+2)e^w
        let wp1 = w + 1.0;
        let denom = wp1 * ew - (w + 2.0) * f / (2.0 * wp1);
        if denom.norm() < 1e-300 {
            break;
        }
        w -= f / denom;
    }
    let residual = (w * w.exp() - z).norm();
    if residual <= tol {
        Ok(w)
    } else {
        Err(LambertError {
            z,
            branch: k,
            residual,
        })
    }
}

fn initial_guess(z: Complex64, k: i32) -> Complex64 {
    let branch_offset = Complex64::new(0.0, 2.0 * PI * k as f64);

    // near the branch point -1/e the principal and -1 branches meet
    let p2 = 2.0 * (E * z + 1.0);
    if (k == 0 || k == -1) && p2.norm() < 0.4 {
        let p = p2.sqrt();
        let p = if k == 0 { p } else { -p };
        return Complex64::new(-1.0, 0.0) + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }

    if k == 0 && z.norm() < 0.3 {
        // series of the principal branch around 0
        return z * (1.0 - z * (1.0 - 1.5 * z));
    }

    // asymptotic guess; valid for all branches away from 0 and -1/e
    let l = z.ln() + branch_offset;
    if l.norm() < 1e-300 {
        return Complex64::new(-0.5, 0.0);
    }
    l - l.ln()
}
