//! Time-domain integration of the delayed closed loop
//! `x'(t) = -L1 x(t) - sum_l L_l x(t - D_l)` with activation gating.
//!
//! Fixed-step classical Runge-Kutta; delayed states come from cubic
//! Hermite interpolation on the stored (state, derivative) history, which
//! keeps the interpolation error at the same fourth order as the
//! integrator. A delayed term contributes exactly zero before its
//! activation time D_l: information has not completed the round trip yet,
//! which is also what makes the input jump at t = D_l.

use crate::hierarchy::LayerMatrices;
use crate::mat::Mat;
use serde::Serialize;
use std::collections::VecDeque;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation options: {0}")]
    InvalidOptions(String),
    #[error("initial state length {got} does not match physical size {want}")]
    StateLength { got: usize, want: usize },
    #[error("{got} delay terms for {want} cyber layers")]
    DelayCount { got: usize, want: usize },
}

/// Integration and classification parameters.
#[derive(Clone, Debug)]
pub struct SimOptions {
    /// Step size; `None` selects min(1e-3, smallest positive delay / 50).
    pub step: Option<f64>,
    /// Simulation horizon in seconds.
    pub t_end: f64,
    /// Record every k-th step.
    pub stride: usize,
    /// Convergence tolerance for trajectory classification.
    pub convergence_tol: f64,
    /// Fraction of the horizon used per classification window.
    pub window_fraction: f64,
    /// Split steps exactly at each activation time D_l.
    pub align_activation: bool,
    /// Oscillation period estimate; windows shorter than this make the
    /// classification inconclusive.
    pub period_estimate: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            step: None,
            t_end: 60.0,
            stride: 1,
            convergence_tol: 1e-4,
            window_fraction: 0.2,
            align_activation: false,
            period_estimate: None,
        }
    }
}

/// Default step rule for a set of round-trip delays.
pub fn default_step(delays: &[f64]) -> f64 {
    let min_pos = delays
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_pos.is_finite() {
        (min_pos / 50.0).min(1e-3)
    } else {
        1e-3
    }
}

/// Trajectory classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum Classification {
    /// All states settled on the predicted consensus value.
    Converged(f64),
    /// Sustained oscillation with steady amplitude.
    CriticalOscillation,
    /// Amplitude growing (or numeric overflow).
    Diverging,
    Inconclusive,
}

/// Sampled solution of one integration run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Sample instants, uniformly spaced.
    pub times: Vec<f64>,
    /// State vector per sample.
    pub states: Vec<Vec<f64>>,
    /// Conserved quantity 1'K x(t) per sample.
    pub conservation: Vec<f64>,
    pub classification: Classification,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has samples")
    }

    /// Writes `t,x1..xN,conservation` rows with 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        write!(w, "t")?;
        for i in 1..=n {
            write!(w, ",x{i}")?;
        }
        writeln!(w, ",conservation")?;
        for ((t, x), cons) in self.times.iter().zip(&self.states).zip(&self.conservation) {
            write!(w, "{t:.11e}")?;
            for v in x {
                write!(w, ",{v:.11e}")?;
            }
            writeln!(w, ",{cons:.11e}")?;
        }
        Ok(())
    }
}

struct HistPoint {
    t: f64,
    x: Vec<f64>,
    /// Left-limit derivative (slope of the segment ending here).
    f_in: Vec<f64>,
    /// Right-limit derivative (slope of the segment starting here); set
    /// when the next substep begins. The input jumps at activation times,
    /// so the two differ there.
    f_out: Vec<f64>,
}

/// Past states with one-sided derivatives for cubic Hermite lookups.
struct History {
    pts: VecDeque<HistPoint>,
}

impl History {
    fn new() -> Self {
        History {
            pts: VecDeque::new(),
        }
    }

    fn push(&mut self, t: f64, x: Vec<f64>, f_in: Vec<f64>) {
        let f_out = f_in.clone();
        self.pts.push_back(HistPoint { t, x, f_in, f_out });
    }

    fn set_last_outgoing(&mut self, f_out: &[f64]) {
        let last = self.pts.back_mut().expect("history is never empty");
        last.f_out.copy_from_slice(f_out);
    }

    fn prune(&mut self, cutoff: f64) {
        while self.pts.len() >= 2 && self.pts[1].t <= cutoff {
            self.pts.pop_front();
        }
    }

    fn eval(&self, u: f64, out: &mut [f64]) {
        let last = self.pts.back().expect("history is never empty");
        if u >= last.t {
            out.copy_from_slice(&last.x);
            return;
        }
        let idx = self.pts.partition_point(|p| p.t <= u);
        if idx == 0 {
            out.copy_from_slice(&self.pts[0].x);
            return;
        }
        let p0 = &self.pts[idx - 1];
        let p1 = &self.pts[idx];
        let dt = p1.t - p0.t;
        let s = (u - p0.t) / dt;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        #[allow(clippy::needless_range_loop)] // four parallel slices
        for i in 0..out.len() {
            out[i] = h00 * p0.x[i] + h10 * dt * p0.f_out[i] + h01 * p1.x[i] + h11 * dt * p1.f_in[i];
        }
    }
}

struct Terms {
    /// Negated undelayed part: -(L1 + zero-delay terms).
    neg_a0: Mat,
    /// (activation time, negated effective Laplacian) per delayed term.
    delayed: Vec<(f64, Mat)>,
}

impl Terms {
    /// Right-hand side at stage time `u` within the substep `span`.
    ///
    /// A delayed term is active throughout a substep that starts at or
    /// after its activation time and inactive throughout one that ends at
    /// or before it, which realizes the one-sided limits at breaking
    /// points. Only a substep that straddles the activation falls back to
    /// per-stage gating (the unaligned O(h) case).
    fn eval(
        &self,
        hist: &History,
        u: f64,
        span: (f64, f64),
        x: &[f64],
        out: &mut [f64],
        scratch: &mut Scratch,
    ) {
        self.neg_a0.matvec_into(x, out);
        for (d, mat) in &self.delayed {
            let active = if *d <= span.0 {
                true
            } else if *d >= span.1 {
                false
            } else {
                u >= *d
            };
            if active {
                hist.eval(u - d, &mut scratch.delayed_state);
                mat.matvec_into(&scratch.delayed_state, &mut scratch.term);
                for (o, v) in out.iter_mut().zip(&scratch.term) {
                    *o += v;
                }
            }
        }
    }
}

struct Scratch {
    delayed_state: Vec<f64>,
    term: Vec<f64>,
}

/// Integrates the delayed closed loop from `x0` and classifies the result.
///
/// `delays` are the round-trip term delays D_l for l = 2..=M (from
/// `delay::effective_delays`). Terms with D_l = 0 fold into the undelayed
/// matrix so the zero-delay case is a plain ODE integration. Non-finite
/// states abort the run with a truncated, `Diverging` trajectory.
pub fn integrate(
    m: &LayerMatrices,
    delays: &[f64],
    x0: &[f64],
    opts: &SimOptions,
) -> Result<Trajectory, SimError> {
    let n = m.physical_size();
    if x0.len() != n {
        return Err(SimError::StateLength {
            got: x0.len(),
            want: n,
        });
    }
    if delays.len() != m.layer_count() - 1 {
        return Err(SimError::DelayCount {
            got: delays.len(),
            want: m.layer_count() - 1,
        });
    }
    if !opts.t_end.is_finite() || opts.t_end <= 0.0 {
        return Err(SimError::InvalidOptions(format!(
            "t_end must be positive, got {}",
            opts.t_end
        )));
    }
    if opts.stride == 0 {
        return Err(SimError::InvalidOptions("stride must be at least 1".into()));
    }
    if opts.window_fraction.is_nan() || opts.window_fraction <= 0.0 || opts.window_fraction > 0.5 {
        return Err(SimError::InvalidOptions(format!(
            "window_fraction must be in (0, 0.5], got {}",
            opts.window_fraction
        )));
    }
    let h_req = match opts.step {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(SimError::InvalidOptions(format!(
                "step must be positive, got {h}"
            )))
        }
        None => default_step(delays),
    };

    // uniform grid covering [0, t_end] with a whole number of strides
    let strides = ((opts.t_end / (h_req * opts.stride as f64)) - 1e-9)
        .ceil()
        .max(1.0) as usize;
    let n_steps = strides * opts.stride;
    let h = opts.t_end / n_steps as f64;

    let min_pos = delays
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_pos.is_finite() && h > min_pos / 2.0 {
        return Err(SimError::InvalidOptions(format!(
            "step {h} too large for smallest delay {min_pos} (needs step <= delay/2)"
        )));
    }
    let max_delay = delays.iter().copied().fold(0.0_f64, f64::max);

    // split the terms into undelayed and delayed parts, pre-negated
    let mut neg_a0 = m.effective[0].scale(-1.0);
    let mut delayed = Vec::new();
    for (l, eff) in m.effective.iter().enumerate().skip(1) {
        let d = delays[l - 1];
        if d == 0.0 {
            neg_a0 = neg_a0.add(&eff.scale(-1.0));
        } else {
            delayed.push((d, eff.scale(-1.0)));
        }
    }
    let mut activations: Vec<f64> = delayed.iter().map(|(d, _)| *d).collect();
    activations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    activations.dedup();

    let mut hist = History::new();
    let k_diag = m.conservation_weights();
    let conserved = |x: &[f64]| -> f64 { k_diag.iter().zip(x).map(|(k, v)| k * v).sum() };

    let mut times = Vec::with_capacity(strides + 1);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(strides + 1);
    let mut conservation = Vec::with_capacity(strides + 1);

    let mut x = x0.to_vec();
    let mut overflow = false;

    // scratch buffers for the RK stages
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut xs = vec![0.0; n];
    let mut scratch = Scratch {
        delayed_state: vec![0.0; n],
        term: vec![0.0; n],
    };

    let terms = Terms { neg_a0, delayed };

    terms.eval(&hist, 0.0, (0.0, 0.0), &x, &mut k1, &mut scratch);
    hist.push(0.0, x.clone(), k1.clone());
    times.push(0.0);
    states.push(x.clone());
    conservation.push(conserved(&x));

    let mut bounds: Vec<f64> = Vec::with_capacity(activations.len() + 2);
    'outer: for step in 0..n_steps {
        let t0 = step as f64 * h;
        let t1 = (step + 1) as f64 * h;
        // optional substep boundaries at activation times inside (t0, t1)
        bounds.clear();
        bounds.push(t0);
        if opts.align_activation {
            for &a in &activations {
                if a > t0 && a < t1 {
                    bounds.push(a);
                }
            }
        }
        bounds.push(t1);

        for w in bounds.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let hs = tb - ta;
            terms.eval(&hist, ta, (ta, tb), &x, &mut k1, &mut scratch);
            // k1 is the right-limit slope at the node starting this substep
            hist.set_last_outgoing(&k1);
            for i in 0..n {
                xs[i] = x[i] + 0.5 * hs * k1[i];
            }
            terms.eval(&hist, ta + 0.5 * hs, (ta, tb), &xs, &mut k2, &mut scratch);
            for i in 0..n {
                xs[i] = x[i] + 0.5 * hs * k2[i];
            }
            terms.eval(&hist, ta + 0.5 * hs, (ta, tb), &xs, &mut k3, &mut scratch);
            for i in 0..n {
                xs[i] = x[i] + hs * k3[i];
            }
            terms.eval(&hist, tb, (ta, tb), &xs, &mut k4, &mut scratch);
            for i in 0..n {
                x[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if x.iter().any(|v| !v.is_finite()) {
                overflow = true;
                break 'outer;
            }
            // left-limit slope at the node ending this substep
            terms.eval(&hist, tb, (ta, tb), &x, &mut k1, &mut scratch);
            hist.push(tb, x.clone(), k1.clone());
        }
        hist.prune(t1 - max_delay - 2.0 * h);

        if (step + 1).is_multiple_of(opts.stride) {
            times.push(t1);
            states.push(x.clone());
            conservation.push(conserved(&x));
        }
    }

    let classification = if overflow {
        Classification::Diverging
    } else {
        let c = {
            let total: f64 = k_diag.iter().sum();
            conserved(x0) / total
        };
        classify_samples(&times, &states, c, max_delay, opts)
    };

    Ok(Trajectory {
        times,
        states,
        conservation,
        classification,
    })
}

/// Classifies a finished trajectory against a consensus prediction.
///
/// The last and preceding windows (each `window_fraction` of the horizon)
/// are compared: settled below the tolerance means converged, amplitude
/// growth beyond 10x means diverging, and a steady peak-to-peak deviation
/// (within [0.8, 1.2] of the preceding window) above the tolerance means
/// critical oscillation. Horizons shorter than four times the largest
/// delay, or windows shorter than the oscillation period estimate, are
/// inconclusive.
pub fn classify(
    traj: &Trajectory,
    consensus: f64,
    max_delay: f64,
    opts: &SimOptions,
) -> Classification {
    classify_samples(&traj.times, &traj.states, consensus, max_delay, opts)
}

fn classify_samples(
    times: &[f64],
    states: &[Vec<f64>],
    consensus: f64,
    max_delay: f64,
    opts: &SimOptions,
) -> Classification {
    if times.len() < 2 {
        return Classification::Inconclusive;
    }
    let t0 = times[0];
    let t1 = *times.last().unwrap();
    let span = t1 - t0;
    if span < 4.0 * max_delay {
        return Classification::Inconclusive;
    }
    let w = opts.window_fraction * span;
    if let Some(p) = opts.period_estimate {
        if w < p {
            return Classification::Inconclusive;
        }
    }

    let dev = |x: &Vec<f64>| -> f64 {
        x.iter()
            .map(|v| (v - consensus).abs())
            .fold(0.0_f64, f64::max)
    };
    let maxabs = |x: &Vec<f64>| -> f64 { x.iter().map(|v| v.abs()).fold(0.0_f64, f64::max) };

    let mut last_dev_max = 0.0_f64;
    let mut last_dev_min = f64::INFINITY;
    let mut prev_dev_max = 0.0_f64;
    let mut prev_dev_min = f64::INFINITY;
    let mut last_abs = 0.0_f64;
    let mut prev_abs = 0.0_f64;
    let mut have_prev = false;

    for (t, x) in times.iter().zip(states) {
        if *t > t1 - w {
            let d = dev(x);
            last_dev_max = last_dev_max.max(d);
            last_dev_min = last_dev_min.min(d);
            last_abs = last_abs.max(maxabs(x));
        } else if *t > t1 - 2.0 * w {
            let d = dev(x);
            prev_dev_max = prev_dev_max.max(d);
            prev_dev_min = prev_dev_min.min(d);
            prev_abs = prev_abs.max(maxabs(x));
            have_prev = true;
        }
    }

    if last_dev_max <= opts.convergence_tol {
        return Classification::Converged(consensus);
    }
    if have_prev && last_abs > 10.0 * prev_abs {
        return Classification::Diverging;
    }
    if have_prev {
        let ptp_last = last_dev_max - last_dev_min;
        let ptp_prev = prev_dev_max - prev_dev_min;
        if ptp_last > opts.convergence_tol
            && ptp_prev > 0.0
            && ptp_last >= 0.8 * ptp_prev
            && ptp_last <= 1.2 * ptp_prev
        {
            return Classification::CriticalOscillation;
        }
    }
    Classification::Inconclusive
}

/// Maximum drift of the conserved quantity 1'K x(t) along a trajectory,
/// recomputed from the states. The continuous dynamics keep it constant,
/// so the return value bounds the integrator error on that functional.
pub fn conservation_deviation(traj: &Trajectory, k_diag: &[f64]) -> f64 {
    let base: f64 = k_diag.iter().zip(&traj.states[0]).map(|(k, v)| k * v).sum();
    traj.states
        .iter()
        .map(|x| {
            let c: f64 = k_diag.iter().zip(x).map(|(k, v)| k * v).sum();
            (c - base).abs()
        })
        .fold(0.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::effective_delays;
    use crate::expm::expm_oracle;
    use crate::hierarchy::assemble;
    use crate::powershare::{fig1_spec, fig1_x0};

    #[test]
    fn equilibrium_stays_put() {
        let spec = fig1_spec(&[0.3, 0.2]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 5.0,
            step: Some(0.01),
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &[0.7; 6], &opts).unwrap();
        for x in &traj.states {
            for v in x {
                assert!((v - 0.7).abs() < 1e-13);
            }
        }
        match traj.classification {
            Classification::Converged(c) => assert!((c - 0.7).abs() < 1e-14),
            other => panic!("expected convergence, got {other:?}"),
        }
        assert_eq!(conservation_deviation(&traj, m.conservation_weights()), 0.0);
    }

    #[test]
    fn zero_delay_matches_matrix_exponential() {
        let spec = fig1_spec(&[0.0, 0.0]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 10.0,
            stride: 100,
            ..Default::default()
        };
        let x0 = fig1_x0();
        let traj = integrate(&m, &effective_delays(&spec), &x0, &opts).unwrap();
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let want = expm_oracle(&m.total, &x0, *t);
            for (a, b) in x.iter().zip(&want) {
                assert!((a - b).abs() < 1e-6, "t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gating_keeps_delayed_terms_silent() {
        // before D2 the derivative is exactly -L1 x: starting from a state
        // that L1 annihilates (constant within groups), nothing moves
        let spec = fig1_spec(&[0.5, 0.5]);
        let m = assemble(&spec).unwrap();
        let x0 = vec![0.2, 0.2, 0.2, 0.9, 0.4, 0.4];
        let opts = SimOptions {
            t_end: 2.0,
            step: Some(1e-3),
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &x0, &opts).unwrap();
        // D2 = 1.0; x must be frozen until then
        for (t, x) in traj.times.iter().zip(&traj.states) {
            if *t < 1.0 - 1e-12 {
                for (a, b) in x.iter().zip(&x0) {
                    assert!((a - b).abs() < 1e-13, "t={t}");
                }
            }
        }
        // and must have moved well after activation
        let last = traj.final_state();
        assert!((last[3] - 0.9).abs() > 1e-3);
    }

    #[test]
    fn case1_converges_to_reference_value() {
        use std::f64::consts::PI;
        let spec = fig1_spec(&[PI / 7.0, PI / 9.0]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 60.0,
            stride: 10,
            convergence_tol: 1e-3,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        match traj.classification {
            Classification::Converged(c) => assert!((c - 0.566667).abs() < 1e-3),
            other => panic!("expected convergence, got {other:?}"),
        }
        let dev = conservation_deviation(&traj, m.conservation_weights());
        assert!(dev < 1e-6, "conservation drift {dev:e}");
    }

    #[test]
    fn case2_critical_oscillation() {
        use std::f64::consts::PI;
        let spec = fig1_spec(&[PI / 6.0, PI / 6.0]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 120.0,
            stride: 10,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        assert_eq!(traj.classification, Classification::CriticalOscillation);
    }

    #[test]
    fn diverging_run_classified() {
        // far beyond the bound: layer-2 margin strongly negative
        let spec = fig1_spec(&[2.0, 0.5]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 100.0,
            step: Some(0.02),
            stride: 50,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        assert_eq!(traj.classification, Classification::Diverging);
    }

    #[test]
    fn overflow_truncates_trajectory() {
        // rightmost root sits near 0.1, so the state tops 1e308 around
        // t = 7000 and the run must abort before the horizon
        let spec = fig1_spec(&[2.0, 0.5]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 10_000.0,
            step: Some(0.1),
            stride: 1000,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        assert_eq!(traj.classification, Classification::Diverging);
        assert!(
            *traj.times.last().unwrap() < 10_000.0,
            "run should abort early"
        );
        for x in &traj.states {
            assert!(x.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn short_horizon_is_inconclusive() {
        let spec = fig1_spec(&[0.5, 0.5]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 4.0, // max delay D3 = 2 -> needs 8 seconds
            step: Some(1e-2),
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        assert_eq!(traj.classification, Classification::Inconclusive);
    }

    #[test]
    fn step_halving_agrees() {
        use std::f64::consts::PI;
        let spec = fig1_spec(&[PI / 7.0, PI / 9.0]);
        let m = assemble(&spec).unwrap();
        let d = effective_delays(&spec);
        let run = |h: f64| {
            let opts = SimOptions {
                t_end: 20.0,
                step: Some(h),
                stride: (20.0 / h) as usize,
                ..Default::default()
            };
            integrate(&m, &d, &fig1_x0(), &opts).unwrap()
        };
        let coarse = run(2e-3);
        let fine = run(1e-3);
        let a = coarse.final_state();
        let b = fine.final_state();
        for (x, y) in a.iter().zip(b) {
            assert!(
                (x - y).abs() < 1e-5,
                "step halving changed state by {}",
                x - y
            );
        }
    }

    #[test]
    fn alignment_flag_close_to_default() {
        use std::f64::consts::PI;
        let spec = fig1_spec(&[PI / 7.0, PI / 9.0]);
        let m = assemble(&spec).unwrap();
        let d = effective_delays(&spec);
        let mk = |align: bool, h: f64| SimOptions {
            t_end: 10.0,
            step: Some(h),
            stride: (10.0 / h) as usize,
            align_activation: align,
            ..Default::default()
        };
        // crossing an activation mid-step injects an O(h |Delta f|) local
        // error, so plain and aligned agree only to that scale
        let plain = integrate(&m, &d, &fig1_x0(), &mk(false, 1e-3)).unwrap();
        let aligned = integrate(&m, &d, &fig1_x0(), &mk(true, 1e-3)).unwrap();
        for (a, b) in plain.final_state().iter().zip(aligned.final_state()) {
            assert!((a - b).abs() < 5e-4, "plain {a} vs aligned {b}");
        }
        // with the split in place the step-halving error is back at O(h^4)
        let aligned_fine = integrate(&m, &d, &fig1_x0(), &mk(true, 5e-4)).unwrap();
        for (a, b) in aligned.final_state().iter().zip(aligned_fine.final_state()) {
            assert!((a - b).abs() < 1e-8, "aligned {a} vs refined {b}");
        }
    }

    #[test]
    fn rejects_oversized_step() {
        let spec = fig1_spec(&[0.05, 0.05]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 10.0,
            step: Some(0.09), // D2 = 0.1, needs <= 0.05
            ..Default::default()
        };
        assert!(matches!(
            integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts),
            Err(SimError::InvalidOptions(_))
        ));
    }

    #[test]
    fn single_layer_no_delay_terms() {
        use crate::hierarchy::{GroupSpec, HierarchySpec, LayerSpec};
        let spec = HierarchySpec {
            layers: vec![LayerSpec::new(vec![GroupSpec::new(3, &[(0, 1), (1, 2)])])],
            physical_weights: vec![1.0, 2.0, 3.0],
            hop_delays: vec![],
        };
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 40.0,
            step: Some(5e-3),
            stride: 10,
            ..Default::default()
        };
        let traj = integrate(&m, &[], &[1.0, 0.0, 0.0], &opts).unwrap();
        // weighted mean: 1*1 / (1+2+3)
        match traj.classification {
            Classification::Converged(c) => assert!((c - 1.0 / 6.0).abs() < 1e-12),
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn csv_shape() {
        let spec = fig1_spec(&[0.0, 0.0]);
        let m = assemble(&spec).unwrap();
        let opts = SimOptions {
            t_end: 1.0,
            step: Some(0.1),
            stride: 5,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &fig1_x0(), &opts).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,x3,x4,x5,x6,conservation");
        assert_eq!(lines.len(), 1 + traj.times.len());
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
