//! Property sweeps over seeded random hierarchies plus the oracle
//! cross-checks that do not belong to any single module.

mod common;

use hiercon::dde_sim::{classify, integrate, Classification, SimOptions};
use hiercon::delay::{critical_delay, effective_delays, residual_system, rightmost_root};
use hiercon::eig::general_eigenvalues;
use hiercon::hierarchy::{assemble, block_structure_check, physical_numbers, STRUCT_TOL};
use hiercon::mat::Mat;
use hiercon::powershare::fig1_spec;
use hiercon::random::{random_hierarchy, RandomSpecConfig, DEFAULT_SEED};
use hiercon::spectral::{
    consensus_value, layer_spectrum, match_multisets, scaled_union_check, union_check, ZERO_EIG_TOL,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fig1_layer_ranks() {
    let m = assemble(&fig1_spec(&[0.0, 0.0])).unwrap();
    let ranks: Vec<usize> = m.effective.iter().map(common::numeric_rank).collect();
    assert_eq!(ranks, vec![3, 1, 1]);
    assert_eq!(ranks.iter().sum::<usize>(), m.physical_size() - 1);
}

#[test]
fn rank_sum_is_physical_size_minus_one() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for i in 0..100 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        let rank_sum: usize = m.effective.iter().map(common::numeric_rank).sum();
        assert_eq!(
            rank_sum,
            m.physical_size() - 1,
            "spec {i}: rank sum {rank_sum} for n = {}",
            m.physical_size()
        );
    }
}

#[test]
fn physical_numbers_match_tree_walk() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 1);
    for _ in 0..100 {
        let spec = random_hierarchy(&cfg, &mut rng);
        assert_eq!(
            physical_numbers(&spec),
            common::tree_walk_physical_numbers(&spec)
        );
    }
}

#[test]
fn structural_identities_on_random_specs() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 2);
    for _ in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        let n = m.physical_size();
        // L 1 = 0
        let ones = vec![1.0; n];
        for v in m.total.matvec(&ones) {
            assert!(v.abs() < STRUCT_TOL);
        }
        // 1'K L^(l) = 0
        let k = m.conservation_weights();
        for eff in &m.effective {
            for j in 0..n {
                let s: f64 = (0..n).map(|i| k[i] * eff[(i, j)]).sum();
                assert!(s.abs() < STRUCT_TOL);
            }
        }
        // block structure holds
        assert!(block_structure_check(&m).passed());
        // (prod C)(prod B) = I above every layer
        let mut pb = Mat::identity(n);
        let mut pc = Mat::identity(n);
        for l in 1..m.layer_count() {
            pb = pb.matmul(&m.broadcasts[l - 1]);
            pc = m.collectors[l - 1].matmul(&pc);
            let prod = pc.matmul(&pb);
            for i in 0..m.layer_sizes[l] {
                for j in 0..m.layer_sizes[l] {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - want).abs() < STRUCT_TOL);
                }
            }
        }
        // group Laplacian sign pattern
        for ld in &m.group_laplacians {
            for i in 0..ld.rows() {
                let mut row_sum = 0.0;
                for j in 0..ld.cols() {
                    let v = ld[(i, j)];
                    row_sum += v;
                    if i == j {
                        assert!(v >= 0.0);
                    } else {
                        assert!(v <= 0.0);
                    }
                }
                assert!(row_sum.abs() < STRUCT_TOL);
            }
        }
    }
}

#[test]
fn layer_spectrum_agrees_with_general_solver() {
    // two independent routes to the layer eigenvalues: Jacobi on the
    // symmetric similarity vs QR on K L_D itself
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 3);
    for _ in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        for l in 1..=m.layer_count() {
            let jacobi = layer_spectrum(&m, l);
            let n = m.layer_sizes[l - 1];
            let mut kld = m.group_laplacians[l - 1].clone();
            for i in 0..n {
                for j in 0..n {
                    kld[(i, j)] *= m.inv_weights[l - 1][i];
                }
            }
            let qr = general_eigenvalues(&kld).unwrap();
            let jacobi_c: Vec<Complex64> = jacobi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let radius = jacobi.last().map(|v| v.abs()).unwrap_or(1.0);
            let matched = match_multisets(&jacobi_c, &qr, 1e-8 * radius.max(1.0));
            assert!(
                matched.matched,
                "layer {l}: Jacobi vs QR worst {:.3e}",
                matched.worst_distance
            );
        }
    }
}

#[test]
fn total_spectrum_one_zero_rest_right_half_plane() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 4);
    for _ in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        let u = union_check(&m).unwrap();
        assert_eq!(u.zero_count, 1);
        for ev in &u.spectrum {
            assert!(ev.re >= -1e-9, "eigenvalue {ev} left of the axis");
        }
    }
}

#[test]
fn scaled_union_with_random_complex_scales() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 5);
    for i in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        let scales: Vec<Complex64> = (0..m.layer_count())
            .map(|_| {
                let r = rng.gen_range(0.3..2.0);
                let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                Complex64::from_polar(r, phi)
            })
            .collect();
        let u = scaled_union_check(&m, &scales).unwrap();
        assert!(
            u.passed,
            "spec {i}: scaled union failed, worst {:.3e}, zeros {}",
            u.worst_distance, u.zero_count
        );
    }
}

#[test]
fn consensus_weights_are_left_null_vector() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 6);
    for _ in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        let n = m.physical_size();
        let (w, _) = consensus_value(&m, &vec![0.0; n]).unwrap();
        for j in 0..n {
            let s: f64 = (0..n).map(|i| w[i] * m.total[(i, j)]).sum();
            assert!(s.abs() < 1e-12);
        }
    }
}

#[test]
fn lambert_route_matches_newton_oracle_broadly() {
    // beyond the acceptance grid: random (T, lambda) pairs
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 7);
    let mut checked = 0;
    for _ in 0..200 {
        let lambda = rng.gen_range(0.05..6.0);
        let t = rng.gen_range(0.01..4.0);
        let s = rightmost_root(t, lambda).unwrap();
        let (r1, r2) = residual_system(s.re, s.im, t, lambda);
        assert!((r1 * r1 + r2 * r2).sqrt() <= 1e-10 * lambda);
        if let Some(nroot) = common::newton_rightmost(t, lambda) {
            let d = (s - nroot).norm().min((s - nroot.conj()).norm());
            assert!(d <= 1e-8, "T={t} lambda={lambda}: {s} vs {nroot}");
            checked += 1;
        }
    }
    assert!(
        checked > 150,
        "Newton oracle converged only {checked}/200 times"
    );
}

#[test]
fn real_root_regime_matches_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 8);
    for _ in 0..100 {
        let lambda = rng.gen_range(0.05..3.0);
        let max_t = 1.0 / (lambda * std::f64::consts::E);
        let t = rng.gen_range(0.01 * max_t..0.98 * max_t);
        let s = rightmost_root(t, lambda).unwrap();
        assert!(s.im.abs() < 1e-10, "expected a real root, got {s}");
        let oracle = common::bisect_real_root(t, lambda);
        assert!(
            (s.re - oracle).abs() < 1e-9,
            "T={t} lambda={lambda}: {} vs bisection {oracle}",
            s.re
        );
    }
}

#[test]
fn principal_branch_dominates_neighbours() {
    use hiercon::lambert::lambert_w;
    let lambdas = [0.25, 0.5, 1.0, 4.0 / 3.0, 2.0, 5.0];
    let factors = [0.1, 0.5, 0.99, 1.0, 1.01, 2.0];
    for &lambda in &lambdas {
        let t_star = critical_delay(lambda).unwrap();
        for &f in &factors {
            let t = f * t_star;
            let z = Complex64::new(-lambda * t, 0.0);
            let principal = lambert_w(z, 0).unwrap();
            for k in [-2, -1, 1, 2] {
                if let Ok(w) = lambert_w(z, k) {
                    assert!(
                        principal.re >= w.re - 1e-12,
                        "branch {k} beats W0 at lambda {lambda}, T {f} T*"
                    );
                }
            }
        }
    }
}

/// Random stable specs (margins kept above 10 percent of every bound)
/// must settle on the predicted consensus.
#[test]
fn random_stable_specs_converge_to_prediction() {
    let cfg = RandomSpecConfig {
        max_physical: 8,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 9);
    let mut tested = 0;
    while tested < 6 {
        let mut spec = random_hierarchy(&cfg, &mut rng);
        if spec.layer_count() < 2 {
            continue;
        }
        let m = assemble(&spec).unwrap();
        // hop delays at 40 percent of each incremental bound
        let mut bounds = Vec::new();
        let mut feasible = true;
        let mut prev_cum = 0.0;
        for l in 2..=spec.layer_count() {
            let lmax = *layer_spectrum(&m, l).last().unwrap();
            if lmax > ZERO_EIG_TOL {
                let cum_target = 0.4 * critical_delay(lmax).unwrap() / 2.0;
                let hop = cum_target - prev_cum;
                if hop <= 0.0 {
                    feasible = false;
                    break;
                }
                bounds.push(hop);
                prev_cum = cum_target;
            } else {
                bounds.push(0.01);
                prev_cum += 0.01;
            }
        }
        if !feasible {
            continue;
        }
        spec.hop_delays = bounds;
        let m = assemble(&spec).unwrap();

        let min_lambda = (1..=spec.layer_count())
            .flat_map(|l| layer_spectrum(&m, l))
            .filter(|&v| v > ZERO_EIG_TOL)
            .fold(f64::INFINITY, f64::min);
        let n = m.physical_size();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (_, c) = consensus_value(&m, &x0).unwrap();

        let t_end = (20.0 / min_lambda).max(4.0 * effective_delays(&spec).last().unwrap());
        let opts = SimOptions {
            t_end,
            step: Some(1e-2),
            stride: 10,
            convergence_tol: 1e-3,
            ..Default::default()
        };
        let traj = integrate(&m, &effective_delays(&spec), &x0, &opts).unwrap();
        match traj.classification {
            Classification::Converged(pred) => {
                assert!((pred - c).abs() < 1e-12);
                for v in traj.final_state() {
                    assert!((v - c).abs() < 1e-3, "state {v} vs consensus {c}");
                }
            }
            other => panic!("stable spec (n={n}, t_end={t_end:.1}) classified {other:?}"),
        }
        tested += 1;
    }
}

/// Specs pushed well past a bound must grow between windows.
#[test]
fn random_unstable_specs_grow() {
    let cfg = RandomSpecConfig {
        max_physical: 8,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 10);
    let mut tested = 0;
    while tested < 4 {
        let mut spec = random_hierarchy(&cfg, &mut rng);
        if spec.layer_count() < 2 {
            continue;
        }
        let m = assemble(&spec).unwrap();
        let l2max = *layer_spectrum(&m, 2).last().unwrap();
        if l2max <= ZERO_EIG_TOL {
            continue;
        }
        // layer-2 cumulative delay at 150 percent of its bound
        let mut hops = vec![1.5 * critical_delay(l2max).unwrap() / 2.0];
        hops.resize(spec.layer_count() - 1, 0.05);
        spec.hop_delays = hops;
        let m = assemble(&spec).unwrap();

        let n = m.physical_size();
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (_, c) = consensus_value(&m, &x0).unwrap();
        let d = effective_delays(&spec);
        let t_end = (40.0 / l2max).max(5.0 * d.last().unwrap());
        let opts = SimOptions {
            t_end,
            step: Some(5e-3),
            stride: 10,
            ..Default::default()
        };
        let traj = integrate(&m, &d, &x0, &opts).unwrap();

        // amplitude in the last window must exceed the first window
        let t1 = *traj.times.last().unwrap();
        let span = t1 - traj.times[0];
        let amp = |lo: f64, hi: f64| {
            traj.times
                .iter()
                .zip(&traj.states)
                .filter(|(t, _)| **t >= lo && **t <= hi)
                .map(|(_, x)| x.iter().map(|v| (v - c).abs()).fold(0.0_f64, f64::max))
                .fold(0.0_f64, f64::max)
        };
        let first = amp(0.0, 0.2 * span);
        let last = amp(0.8 * span, t1);
        assert!(
            last > first,
            "unstable spec did not grow: first {first:.3e}, last {last:.3e}"
        );
        assert!(
            matches!(
                traj.classification,
                Classification::Diverging
                    | Classification::CriticalOscillation
                    | Classification::Inconclusive
            ),
            "unexpected classification {:?}",
            traj.classification
        );
        tested += 1;
    }
}

#[test]
fn before_first_activation_only_the_local_term_acts() {
    // until t = D2 the delayed terms are gated off, so the trajectory
    // must match the closed-form solution of x' = -L1 x from any start
    let spec = fig1_spec(&[0.5, 0.25]); // D2 = 1.0
    let m = assemble(&spec).unwrap();
    let x0 = hiercon::powershare::fig1_x0();
    let opts = SimOptions {
        t_end: 8.0,
        step: Some(1e-3),
        stride: 100,
        ..Default::default()
    };
    let traj = integrate(&m, &effective_delays(&spec), &x0, &opts).unwrap();
    for (t, x) in traj.times.iter().zip(&traj.states) {
        if *t > 1.0 {
            break;
        }
        let want = hiercon::expm::expm_oracle(&m.effective[0], &x0, *t);
        for (a, b) in x.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn layer_zero_count_equals_group_count() {
    let cfg = RandomSpecConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 11);
    for _ in 0..50 {
        let spec = random_hierarchy(&cfg, &mut rng);
        let m = assemble(&spec).unwrap();
        for l in 1..=m.layer_count() {
            let ev = layer_spectrum(&m, l);
            assert_eq!(ev.len(), m.layer_sizes[l - 1]);
            let zeros = ev.iter().filter(|v| v.abs() < ZERO_EIG_TOL).count();
            assert_eq!(zeros, m.group_sizes[l - 1].len(), "layer {l}");
            assert!(ev.iter().all(|&v| v > -1e-10));
        }
    }
}

#[test]
fn sample_times_are_uniform() {
    let spec = fig1_spec(&[0.3, 0.2]);
    let m = assemble(&spec).unwrap();
    let opts = SimOptions {
        t_end: 7.3, // not a multiple of the step
        step: Some(1e-3),
        stride: 7,
        ..Default::default()
    };
    let traj = integrate(&m, &effective_delays(&spec), &hiercon::powershare::fig1_x0(), &opts)
        .unwrap();
    let dt = traj.times[1] - traj.times[0];
    for w in traj.times.windows(2) {
        assert!(((w[1] - w[0]) - dt).abs() < 1e-9, "nonuniform stride");
    }
    assert!((traj.times.last().unwrap() - 7.3).abs() < 1e-12);
}

#[test]
fn classify_is_consistent_with_integrate() {
    use std::f64::consts::PI;
    let spec = fig1_spec(&[PI / 6.0, PI / 6.0]);
    let m = assemble(&spec).unwrap();
    let opts = SimOptions {
        t_end: 120.0,
        stride: 10,
        ..Default::default()
    };
    let d = effective_delays(&spec);
    let traj = integrate(&m, &d, &hiercon::powershare::fig1_x0(), &opts).unwrap();
    let c = 3.4 / 6.0;
    let max_d = d.iter().copied().fold(0.0_f64, f64::max);
    assert_eq!(classify(&traj, c, max_d, &opts), traj.classification);
}

#[test]
fn classify_inconclusive_when_window_below_period() {
    use std::f64::consts::PI;
    let spec = fig1_spec(&[PI / 6.0, PI / 6.0]);
    let m = assemble(&spec).unwrap();
    let opts = SimOptions {
        t_end: 120.0,
        stride: 10,
        ..Default::default()
    };
    let d = effective_delays(&spec);
    let traj = integrate(&m, &d, &hiercon::powershare::fig1_x0(), &opts).unwrap();
    let mut strict = opts.clone();
    // claim the oscillation period exceeds the window: must back off
    strict.period_estimate = Some(25.0);
    let c = 3.4 / 6.0;
    assert_eq!(
        classify(&traj, c, 2.0 * PI / 3.0, &strict),
        Classification::Inconclusive
    );
}

#[test]
fn conservation_bounds_integrator_error_against_oracle() {
    // zero-delay run: integrator conservation matches the closed form
    let spec = fig1_spec(&[0.0, 0.0]);
    let m = assemble(&spec).unwrap();
    let x0 = hiercon::powershare::fig1_x0();
    let opts = SimOptions {
        t_end: 20.0,
        stride: 100,
        ..Default::default()
    };
    let traj = integrate(&m, &effective_delays(&spec), &x0, &opts).unwrap();
    let k = m.conservation_weights();
    let base: f64 = k.iter().zip(&x0).map(|(a, b)| a * b).sum();
    for (t, _) in traj.times.iter().zip(&traj.states) {
        let oracle_state = hiercon::expm::expm_oracle(&m.total, &x0, *t);
        let oracle_cons: f64 = k.iter().zip(&oracle_state).map(|(a, b)| a * b).sum();
        assert!((oracle_cons - base).abs() < 1e-9);
    }
    assert!(hiercon::dde_sim::conservation_deviation(&traj, k) < 1e-9);
}

#[test]
fn union_matrix_built_by_hand_fails_union_check() {
    // perturb one entry of the total matrix: the union identity must break
    let spec = fig1_spec(&[0.0, 0.0]);
    let mut m = assemble(&spec).unwrap();
    m.total[(0, 0)] += 0.05;
    let u = union_check(&m).unwrap();
    assert!(!u.passed);
}
