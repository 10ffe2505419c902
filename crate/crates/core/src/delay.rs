//! Interlayer-delay stability in the frequency domain.
//!
//! The characteristic function of the delayed closed loop factors into
//! one quasi-polynomial `s e^{T s} + lambda = 0` per nonzero layer
//! eigenvalue, with T the round-trip delay of that layer. Such an
//! equation has all roots in the open left half-plane exactly when
//! T < pi / (2 lambda), which turns into per-layer bounds on the
//! cumulative hop delays.

use crate::hierarchy::HierarchySpec;
use crate::lambert::{lambert_w, LambertError};
use crate::spectral::{SpectralReport, ZERO_EIG_TOL};
use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;
use thiserror::Error;

/// Margins within this of zero count as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DelayError {
    #[error("lambda must be positive, got {0}")]
    NonpositiveLambda(f64),
    #[error("delay must be nonnegative, got {0}")]
    NegativeDelay(f64),
    #[error(transparent)]
    Lambert(#[from] LambertError),
}

/// Round-trip delays of the layer terms: D_l = 2 * sum of the hop delays
/// below layer l, for l = 2..=M. Index 0 of the result is D_2.
pub fn effective_delays(spec: &HierarchySpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.hop_delays.len());
    let mut acc = 0.0;
    for &d in &spec.hop_delays {
        acc += d;
        out.push(2.0 * acc);
    }
    out
}

/// Critical round-trip delay of `s e^{T s} + lambda = 0`: all roots stay
/// in the open left half-plane iff T < pi / (2 lambda).
pub fn critical_delay(lambda: f64) -> Result<f64, DelayError> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(DelayError::NonpositiveLambda(lambda));
    }
    Ok(PI / (2.0 * lambda))
}

/// Root of `s e^{T s} + lambda = 0` with maximal real part.
///
/// Substituting u = T s gives u e^u = -lambda T, so s = W0(-lambda T)/T
/// on the principal Lambert branch; principal-branch dominance over the
/// neighbouring branches is exercised in the test grid rather than
/// assumed. T = 0 degenerates to s = -lambda.
pub fn rightmost_root(t: f64, lambda: f64) -> Result<Complex64, DelayError> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(DelayError::NonpositiveLambda(lambda));
    }
    if t < 0.0 {
        return Err(DelayError::NegativeDelay(t));
    }
    if t == 0.0 {
        return Ok(Complex64::new(-lambda, 0.0));
    }
    let z = Complex64::new(-lambda * t, 0.0);
    let w = lambert_w(z, 0)?;
    Ok(w / t)
}

/// Real and imaginary residuals of `s e^{T s} + lambda` at s = sigma + i omega.
/// Both vanish exactly at the characteristic roots; used as the
/// independent check on the Lambert route.
pub fn residual_system(sigma: f64, omega: f64, t: f64, lambda: f64) -> (f64, f64) {
    let est = (sigma * t).exp();
    let (sin, cos) = (omega * t).sin_cos();
    (
        sigma * est * cos - omega * est * sin + lambda,
        sigma * est * sin + omega * est * cos,
    )
}

fn serialize_opt_complex<S: Serializer>(v: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(c) => {
            let mut seq = s.serialize_seq(Some(2))?;
            seq.serialize_element(&c.re)?;
            seq.serialize_element(&c.im)?;
            seq.end()
        }
        None => s.serialize_none(),
    }
}

/// Stability verdict for the whole hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Critical,
    Unstable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Stable => write!(f, "Stable"),
            Verdict::Critical => write!(f, "Critical"),
            Verdict::Unstable => write!(f, "Unstable"),
        }
    }
}

/// Per-layer delay constraint, l = 2..=M.
#[derive(Clone, Debug, Serialize)]
pub struct LayerBound {
    pub layer: usize,
    pub lambda_max: f64,
    /// Sum of the hop delays below this layer.
    pub cumulative_delay: f64,
    /// Round-trip delay of the layer term.
    pub effective_delay: f64,
    /// pi / (4 lambda_max); None when the layer graph has no edges.
    pub bound: Option<f64>,
    /// bound - cumulative_delay.
    pub margin: Option<f64>,
    /// Rightmost root of the layer quasi-polynomial.
    #[serde(serialize_with = "serialize_opt_complex")]
    pub rightmost_root: Option<Complex64>,
}

/// Delay-stability report: one bound per cyber layer plus the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct DelayStabilityReport {
    pub layers: Vec<LayerBound>,
    pub verdict: Verdict,
    /// Layers achieving criticality (verdict Critical) or violating their
    /// bound (verdict Unstable); empty when Stable.
    pub binding_layers: Vec<usize>,
}

impl DelayStabilityReport {
    /// Smallest finite margin, if any layer is constrained.
    pub fn min_margin(&self) -> Option<f64> {
        self.layers
            .iter()
            .filter_map(|l| l.margin)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Evaluates the per-layer delay bounds: layer l is stable iff the hop
/// delays below it sum to less than pi / (4 lambda_max^(l)). Layers whose
/// graphs have no edges impose no constraint.
pub fn stability_verdict(
    spec: &HierarchySpec,
    spectral: &SpectralReport,
) -> Result<DelayStabilityReport, DelayError> {
    let m = spec.layer_count();
    let mut layers = Vec::with_capacity(m.saturating_sub(1));
    let mut cum = 0.0;
    let mut verdict = Verdict::Stable;
    let mut critical = Vec::new();
    let mut unstable = Vec::new();

    for l in 2..=m {
        cum += spec.hop_delays[l - 2];
        let lambda = spectral.lambda_max[l - 1];
        let effective = 2.0 * cum;
        if lambda <= ZERO_EIG_TOL {
            layers.push(LayerBound {
                layer: l,
                lambda_max: lambda,
                cumulative_delay: cum,
                effective_delay: effective,
                bound: None,
                margin: None,
                rightmost_root: None,
            });
            continue;
        }
        let bound = critical_delay(lambda)? / 2.0; // pi / (4 lambda)
        let margin = bound - cum;
        let root = rightmost_root(effective, lambda)?;
        if margin < -CRITICAL_TOL {
            unstable.push(l);
        } else if margin <= CRITICAL_TOL {
            critical.push(l);
        }
        layers.push(LayerBound {
            layer: l,
            lambda_max: lambda,
            cumulative_delay: cum,
            effective_delay: effective,
            bound: Some(bound),
            margin: Some(margin),
            rightmost_root: Some(root),
        });
    }

    let binding_layers;
    if !unstable.is_empty() {
        verdict = Verdict::Unstable;
        binding_layers = unstable;
    } else if !critical.is_empty() {
        verdict = Verdict::Critical;
        binding_layers = critical;
    } else {
        binding_layers = Vec::new();
    }

    Ok(DelayStabilityReport {
        layers,
        verdict,
        binding_layers,
    })
}
