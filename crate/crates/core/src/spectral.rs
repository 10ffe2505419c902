//! Eigenstructure of the layer matrices.
//!
//! Per layer, the effective Laplacian shares its nonzero spectrum with
//! the scaled matrix K L_D, which is similar to the real symmetric
//! Z = K^{1/2} L_D K^{1/2}, so layer spectra are real and computed by the
//! Jacobi solver. The spectrum of the total matrix is the union of the
//! layer spectra with all zeros collapsed to a single one; `union_check`
//! verifies that multiset identity numerically.

use crate::eig::{self, EigError};
use crate::hierarchy::{HierarchySpec, LayerMatrices};
use crate::mat::{CMat, Mat};
use num_complex::Complex64;
use rand::Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Eigenvalues of modulus below this count as zero.
pub const ZERO_EIG_TOL: f64 = 1e-9;
/// Relative scale of the multiset-matching tolerance.
pub const MULTISET_RTOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error("scale factor {index} is zero")]
    ZeroScale { index: usize },
    #[error("state length {got} does not match physical size {want}")]
    StateLength { got: usize, want: usize },
}

fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

/// Spectral summary of an assembled hierarchy.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Ascending real eigenvalues of K L_D per layer.
    pub layer_eigenvalues: Vec<Vec<f64>>,
    /// Largest eigenvalue per layer.
    pub lambda_max: Vec<f64>,
    /// All eigenvalues of the total matrix.
    #[serde(serialize_with = "serialize_complex_vec")]
    pub full_spectrum: Vec<Complex64>,
    /// Number of (numerically) zero eigenvalues of the total matrix.
    pub zero_count: usize,
    /// Consensus weight vector w = K1 / (1'K1).
    pub consensus_weights: Vec<f64>,
    /// w' x0 when an initial state is known.
    pub consensus_value: Option<f64>,
    /// Verdict of the spectrum-union identity.
    pub union_passed: bool,
}

/// Ascending eigenvalues of layer `l` (1-based), computed through the
/// symmetric similarity Z = K^{1/2} L_D K^{1/2}.
pub fn layer_spectrum(m: &LayerMatrices, l: usize) -> Vec<f64> {
    assert!(l >= 1 && l <= m.layer_count(), "layer {l} out of range");
    let ld = &m.group_laplacians[l - 1];
    let k = &m.inv_weights[l - 1];
    let n = ld.rows();
    let mut z = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = k[i].sqrt() * ld[(i, j)] * k[j].sqrt();
        }
    }
    let mut e = eig::sym_eigenvalues(&z);
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

/// All eigenvalues of a square matrix via the general dense solver,
/// sorted by (re, im).
pub fn full_spectrum(a: &Mat) -> Result<Vec<Complex64>, EigError> {
    let mut e = eig::general_eigenvalues(a)?;
    sort_complex(&mut e);
    Ok(e)
}

fn sort_complex(v: &mut [Complex64]) {
    v.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn spectral_radius(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
}

/// Result of a multiset comparison: greedy nearest pairing within a
/// tolerance, reporting the worst matched distance.
#[derive(Clone, Debug, Serialize)]
pub struct MultisetMatch {
    pub matched: bool,
    pub worst_distance: f64,
}

/// Greedy nearest-neighbour pairing of two eigenvalue multisets.
pub fn match_multisets(a: &[Complex64], b: &[Complex64], tol: f64) -> MultisetMatch {
    if a.len() != b.len() {
        return MultisetMatch {
            matched: false,
            worst_distance: f64::INFINITY,
        };
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for &x in a {
        let mut best = usize::MAX;
        let mut bd = f64::INFINITY;
        for (i, &y) in b.iter().enumerate() {
            if !used[i] {
                let d = (x - y).norm();
                if d < bd {
                    bd = d;
                    best = i;
                }
            }
        }
        if best == usize::MAX || bd > tol {
            return MultisetMatch {
                matched: false,
                worst_distance: bd.max(worst),
            };
        }
        used[best] = true;
        worst = worst.max(bd);
    }
    MultisetMatch {
        matched: true,
        worst_distance: worst,
    }
}

/// Verdict of the spectrum-union identity together with both multisets.
#[derive(Clone, Debug, Serialize)]
pub struct UnionCheck {
    pub passed: bool,
    pub zero_count: usize,
    pub worst_distance: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub spectrum: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub predicted: Vec<Complex64>,
}

/// Checks that the spectrum of the total matrix equals {0} united with
/// the nonzero layer eigenvalues, with exactly one zero overall.
pub fn union_check(m: &LayerMatrices) -> Result<UnionCheck, EigError> {
    let spectrum = full_spectrum(&m.total)?;
    let mut predicted = vec![Complex64::new(0.0, 0.0)];
    for l in 1..=m.layer_count() {
        for ev in layer_spectrum(m, l) {
            if ev.abs() > ZERO_EIG_TOL {
                predicted.push(Complex64::new(ev, 0.0));
            }
        }
    }
    sort_complex(&mut predicted);
    let tol = MULTISET_RTOL * spectral_radius(&spectrum).max(1.0);
    let matched = match_multisets(&spectrum, &predicted, tol);
    let zero_count = spectrum.iter().filter(|c| c.norm() < ZERO_EIG_TOL).count();
    Ok(UnionCheck {
        passed: matched.matched && zero_count == 1,
        zero_count,
        worst_distance: matched.worst_distance,
        spectrum,
        predicted,
    })
}

/// Same identity for the scaled sum of effective Laplacians: the
/// spectrum of  sum_l s_l L^(l)  is {0} united with the scaled nonzero
/// layer spectra, for any nonzero complex scales.
pub fn scaled_union_check(
    m: &LayerMatrices,
    scales: &[Complex64],
) -> Result<UnionCheck, SpectralError> {
    assert_eq!(scales.len(), m.layer_count(), "one scale per layer");
    for (i, s) in scales.iter().enumerate() {
        if s.norm() == 0.0 {
            return Err(SpectralError::ZeroScale { index: i });
        }
    }
    let n = m.physical_size();
    let mut sum = CMat::zeros(n, n);
    for (eff, &s) in m.effective.iter().zip(scales) {
        sum.add_assign(&CMat::from_scaled_real(eff, s));
    }
    let mut spectrum = eig::complex_eigenvalues(&sum)?;
    sort_complex(&mut spectrum);

    let mut predicted = vec![Complex64::new(0.0, 0.0)];
    for l in 1..=m.layer_count() {
        for ev in layer_spectrum(m, l) {
            if ev.abs() > ZERO_EIG_TOL {
                predicted.push(scales[l - 1] * ev);
            }
        }
    }
    sort_complex(&mut predicted);
    let radius = spectral_radius(&spectrum).max(spectral_radius(&predicted));
    let tol = MULTISET_RTOL * radius.max(1.0);
    let matched = match_multisets(&spectrum, &predicted, tol);
    let zero_count = spectrum.iter().filter(|c| c.norm() < ZERO_EIG_TOL).count();
    Ok(UnionCheck {
        passed: matched.matched && zero_count == 1,
        zero_count,
        worst_distance: matched.worst_distance,
        spectrum,
        predicted,
    })
}

/// Consensus weight vector and predicted limit value: the closed loop
/// converges to (w' x0) 1 with w = K1 / (1'K1).
pub fn consensus_value(m: &LayerMatrices, x0: &[f64]) -> Result<(Vec<f64>, f64), SpectralError> {
    let a = m.conservation_weights();
    if x0.len() != a.len() {
        return Err(SpectralError::StateLength {
            got: x0.len(),
            want: a.len(),
        });
    }
    let total: f64 = a.iter().sum();
    let w: Vec<f64> = a.iter().map(|&v| v / total).collect();
    let c = w.iter().zip(x0).map(|(wi, xi)| wi * xi).sum();
    Ok((w, c))
}

/// Outcome of the collecting-vector invariance sweep.
#[derive(Clone, Debug, Serialize)]
pub struct CInvariance {
    pub passed: bool,
    pub trials: usize,
    pub worst_layer_deviation: f64,
    pub worst_total_deviation: f64,
}

/// Redraws random stochastic collecting vectors `trials` times and checks
/// that every per-layer spectrum and the full spectrum of the total
/// matrix stay unchanged: the collecting weights cancel out of the
/// spectra. The consensus weights depend only on the physical weights and
/// are compared exactly.
pub fn c_invariance_check(
    spec: &HierarchySpec,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<CInvariance, crate::hierarchy::HierarchyError> {
    let base = crate::hierarchy::assemble(spec)?;
    let base_layers: Vec<Vec<f64>> = (1..=base.layer_count())
        .map(|l| layer_spectrum(&base, l))
        .collect();
    let base_full = full_spectrum(&base.total).expect("baseline spectrum");
    let radius = spectral_radius(&base_full).max(1.0);
    let tol = 1e-8 * radius;
    let (base_w, _) = consensus_value(&base, &vec![0.0; base.physical_size()]).unwrap();

    let mut worst_layer = 0.0_f64;
    let mut worst_total = 0.0_f64;
    let mut passed = true;

    for _ in 0..trials {
        let mut redrawn = spec.clone();
        for layer in redrawn.layers.iter_mut() {
            let rows = layer
                .groups
                .iter()
                .map(|g| random_stochastic(g.size, rng))
                .collect();
            layer.collecting = Some(rows);
        }
        let m = crate::hierarchy::assemble(&redrawn)?;
        for (l, base_ev) in base_layers.iter().enumerate() {
            let ev = layer_spectrum(&m, l + 1);
            for (a, b) in ev.iter().zip(base_ev) {
                let d = (a - b).abs();
                worst_layer = worst_layer.max(d);
                if d > tol {
                    passed = false;
                }
            }
        }
        let full = full_spectrum(&m.total).expect("redraw spectrum");
        let matched = match_multisets(&full, &base_full, tol);
        worst_total = worst_total.max(if matched.worst_distance.is_finite() {
            matched.worst_distance
        } else {
            f64::INFINITY
        });
        if !matched.matched {
            passed = false;
        }
        let (w, _) = consensus_value(&m, &vec![0.0; m.physical_size()]).unwrap();
        if w != base_w {
            passed = false;
        }
    }

    Ok(CInvariance {
        passed,
        trials,
        worst_layer_deviation: worst_layer,
        worst_total_deviation: worst_total,
    })
}

/// Random stochastic row: positive entries summing to one.
pub fn random_stochastic(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = row.iter().sum();
    for v in &mut row {
        *v /= sum;
    }
    row
}

/// Full spectral report for an assembled hierarchy.
pub fn spectral_report(
    m: &LayerMatrices,
    x0: Option<&[f64]>,
) -> Result<SpectralReport, SpectralError> {
    let layer_eigenvalues: Vec<Vec<f64>> = (1..=m.layer_count())
        .map(|l| layer_spectrum(m, l))
        .collect();
    let lambda_max = layer_eigenvalues
        .iter()
        .map(|e| e.last().copied().unwrap_or(0.0))
        .collect();
    let union = union_check(m)?;
    let zeros = vec![0.0; m.physical_size()];
    let (consensus_weights, _) = consensus_value(m, &zeros)?;
    let consensus_value = match x0 {
        Some(x0) => Some(consensus_value(m, x0)?.1),
        None => None,
    };
    Ok(SpectralReport {
        layer_eigenvalues,
        lambda_max,
        full_spectrum: union.spectrum.clone(),
        zero_count: union.zero_count,
        consensus_weights,
        consensus_value,
        union_passed: union.passed,
    })
}
