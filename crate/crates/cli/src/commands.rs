//! Per-file command implementations and the batch driver.

use crate::report::{PowershareReport, SimReport, SpectrumReport};
use crate::SimArgs;
use hiercon::dde_sim::{self, Classification};
use hiercon::delay::{self, Verdict};
use hiercon::hierarchy::{self, LayerMatrices};
use hiercon::powershare;
use hiercon::scenario::{Scenario, ScenarioFile};
use hiercon::spectral;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Mutex;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DIVERGED: u8 = 4;

/// One file in, exit code and printable output out.
pub type Runner = Box<dyn Fn(&Path) -> (u8, String) + Send + Sync>;

/// Runs every file, optionally on several workers, printing each file's
/// output in input order. The batch exit code is the worst per-file code.
pub fn run_batch(paths: &[std::path::PathBuf], jobs: usize, runner: &Runner) -> u8 {
    let results: Vec<(u8, String)> = if jobs <= 1 || paths.len() <= 1 {
        paths.iter().map(|p| runner(p)).collect()
    } else {
        let slots: Vec<Mutex<Option<(u8, String)>>> =
            paths.iter().map(|_| Mutex::new(None)).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(paths.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= paths.len() {
                        break;
                    }
                    let r = runner(&paths[i]);
                    *slots[i].lock().unwrap() = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("worker finished"))
            .collect()
    };

    let mut worst = EXIT_OK;
    for (path, (code, output)) in paths.iter().zip(results) {
        if paths.len() > 1 {
            println!("== {}", path.display());
        }
        print!("{output}");
        worst = worst.max(code);
    }
    worst
}

fn load(path: &Path) -> Result<Scenario, (u8, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        (
            EXIT_IO,
            format!("error: cannot read {}: {e}\n", path.display()),
        )
    })?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| (EXIT_IO, format!("error: parse {}: {e}\n", path.display())))?;
    file.build().map_err(|report| {
        let mut out = String::new();
        for v in &report.violations {
            out.push_str(&format!("violation: {v}\n"));
        }
        out.push_str("invalid\n");
        (EXIT_INVALID, out)
    })
}

fn assemble(scenario: &Scenario) -> Result<LayerMatrices, (u8, String)> {
    hierarchy::assemble(&scenario.spec).map_err(|e| (EXIT_INVALID, format!("error: {e}\n")))
}

pub fn validate(path: &Path) -> (u8, String) {
    match load(path) {
        Ok(_) => (EXIT_OK, "valid\n".into()),
        Err(e) => e,
    }
}

pub fn spectrum(path: &Path, out: Option<&Path>, trials: usize, seed: u64) -> (u8, String) {
    let scenario = match load(path) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let m = match assemble(&scenario) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let report = match spectral::spectral_report(&m, scenario.initial_state.as_deref()) {
        Ok(r) => r,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };
    let c_invariance = if trials > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match spectral::c_invariance_check(&scenario.spec, trials, &mut rng) {
            Ok(r) => Some(r),
            Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
        }
    } else {
        None
    };
    let doc = SpectrumReport {
        spectral: report,
        c_invariance,
    };
    let json = serde_json::to_string_pretty(&doc).expect("report serializes");
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, json + "\n") {
                return (EXIT_IO, format!("error: write {}: {e}\n", p.display()));
            }
            (
                EXIT_OK,
                format!("spectrum report written to {}\n", p.display()),
            )
        }
        None => (EXIT_OK, json + "\n"),
    }
}

pub fn bounds(path: &Path, out: Option<&Path>) -> (u8, String) {
    let scenario = match load(path) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let m = match assemble(&scenario) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let spectral = match spectral::spectral_report(&m, None) {
        Ok(r) => r,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };
    let report = match delay::stability_verdict(&scenario.spec, &spectral) {
        Ok(r) => r,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };
    let mut text = report.verdict.to_string();
    if !report.binding_layers.is_empty() {
        let layers: Vec<String> = report
            .binding_layers
            .iter()
            .map(|l| l.to_string())
            .collect();
        text.push_str(&format!(" (binding layer {})", layers.join(", ")));
    }
    text.push('\n');
    if let Some(p) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(p, json + "\n") {
            return (EXIT_IO, format!("error: write {}: {e}\n", p.display()));
        }
    }
    (EXIT_OK, text)
}

pub fn simulate(path: &Path, args: &SimArgs, with_power: bool) -> (u8, String) {
    let scenario = match load(path) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let m = match assemble(&scenario) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let Some(x0) = scenario.initial_state.clone() else {
        return (
            EXIT_INVALID,
            "error: scenario has neither generators nor initial_state\n".into(),
        );
    };

    let spectral = match spectral::spectral_report(&m, Some(&x0)) {
        Ok(r) => r,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };
    let stability = match delay::stability_verdict(&scenario.spec, &spectral) {
        Ok(r) => r,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };

    let mut opts = scenario.sim.clone();
    if let Some(h) = args.step {
        opts.step = Some(h);
    }
    if let Some(t) = args.t_end {
        opts.t_end = t;
    }
    // the slowest critical mode oscillates at its layer eigenvalue; the
    // classification window must cover at least one period
    if stability.verdict == Verdict::Critical {
        let min_lambda = stability
            .binding_layers
            .iter()
            .map(|&l| spectral.lambda_max[l - 1])
            .fold(f64::INFINITY, f64::min);
        if min_lambda.is_finite() && min_lambda > 0.0 {
            opts.period_estimate = Some(2.0 * PI / min_lambda);
        }
    }

    let delays = delay::effective_delays(&scenario.spec);
    log::debug!(
        "integrating {} to t={} (step {:?}, delays {:?})",
        path.display(),
        opts.t_end,
        opts.step,
        delays
    );
    let traj = match dde_sim::integrate(&m, &delays, &x0, &opts) {
        Ok(t) => t,
        Err(e) => return (EXIT_INVALID, format!("error: {e}\n")),
    };

    let mut output = String::new();
    let csv_path = args
        .csv
        .clone()
        .or_else(|| scenario.output.csv.as_ref().map(Into::into));
    if let Some(p) = &csv_path {
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).expect("in-memory write");
        if let Err(e) = std::fs::write(p, buf) {
            return (EXIT_IO, format!("error: write {}: {e}\n", p.display()));
        }
        output.push_str(&format!("trajectory written to {}\n", p.display()));
    }

    let consensus = spectral.consensus_value.expect("x0 is known");
    let conservation_max_dev = dde_sim::conservation_deviation(&traj, m.conservation_weights());
    let power = if with_power {
        scenario
            .fleet
            .as_ref()
            .map(|fleet| powershare::power_report(&traj, fleet))
    } else {
        None
    };

    let report = SimReport {
        classification: traj.classification,
        consensus_prediction: consensus,
        verdict: stability.verdict,
        binding_layers: stability.binding_layers.clone(),
        final_time: *traj.times.last().unwrap(),
        final_state: traj.final_state().to_vec(),
        conservation_max_dev,
        step: opts.step,
        t_end: opts.t_end,
        stride: opts.stride,
        defaults_applied: scenario.defaults_applied.clone(),
        samples: traj.times.len(),
    };

    let summary = match traj.classification {
        Classification::Converged(c) => format!("Converged({c:.6})"),
        Classification::CriticalOscillation => "CriticalOscillation".into(),
        Classification::Diverging => "Diverging".into(),
        Classification::Inconclusive => "Inconclusive".into(),
    };
    output.push_str(&format!("{summary}\n"));

    let json = if with_power {
        serde_json::to_string_pretty(&PowershareReport { sim: report, power })
            .expect("report serializes")
    } else {
        serde_json::to_string_pretty(&report).expect("report serializes")
    };
    let report_path = args
        .out
        .clone()
        .or_else(|| scenario.output.report.as_ref().map(Into::into));
    match report_path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json + "\n") {
                return (EXIT_IO, format!("error: write {}: {e}\n", p.display()));
            }
            output.push_str(&format!("report written to {}\n", p.display()));
        }
        None => {
            output.push_str(&json);
            output.push('\n');
        }
    }

    let code = match traj.classification {
        Classification::Diverging if !args.allow_unstable => EXIT_DIVERGED,
        _ => EXIT_OK,
    };
    (code, output)
}
