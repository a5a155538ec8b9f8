//! Acceptance criteria 1-10. Each test prints one PASS/FAIL line.
//!
//! Tests share a lock so the wall-clock budgets are measured without
//! competing work from sibling tests.

use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wstate_witness::cavity::{
    hopfield_coefficients, phase_matching_grid, CavityParams, PhaseMap, PumpGeometry,
};
use wstate_witness::losschannel::{
    apply_loss, lhs_trace, lhs_trace_matrix, purification_weights, sweep_eta, w5_weights,
    Efficiencies, SweepGrid, SweepMode, SweepRow,
};
use wstate_witness::oracle::{self, OracleConfig};
use wstate_witness::partition::enumerate_partitions;
use wstate_witness::witness::{
    self, closed_form_f_full_eta, closed_form_f_part_eta, largest_bipartition_se, max_g,
    one_diff_closed_form, SolverConfig, WWeights, WitnessConfig,
};
use wstate_witness::Exec;

static SERIAL: Mutex<()> = Mutex::new(());

const SEED: u64 = 20240611;

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, name: &str, ok: bool, detail: String) {
    println!(
        "criterion {n:>2} {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn within(budget: Duration, elapsed: Duration) -> bool {
    elapsed < budget
}

fn witness_cfg() -> WitnessConfig {
    WitnessConfig {
        solver: SolverConfig {
            seed: SEED,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn oracle_cfg() -> OracleConfig {
    OracleConfig {
        seed: SEED,
        ..Default::default()
    }
}

#[test]
fn criterion_01_pure_w_values() {
    let _g = serial();
    let tol = 1e-10;
    let start = Instant::now();
    let w4 = WWeights::from_moduli(&[0.5; 4]).unwrap();
    let l = w4.operator().unwrap();
    let cfg = witness_cfg();
    let values = [
        (
            witness::f_full(&w4, &cfg.solver).unwrap().g_max,
            27.0 / 64.0,
        ),
        (witness::f_part(&w4, &[], &cfg).unwrap().value, 0.75),
        (
            oracle::f_full(&l, &oracle_cfg()).unwrap().value,
            27.0 / 64.0,
        ),
        (
            oracle::f_part(&l, &[], &oracle_cfg()).unwrap().1.value,
            0.75,
        ),
    ];
    let elapsed = start.elapsed();
    let dev = values
        .iter()
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    report(
        1,
        "pure-W values",
        dev <= tol && within(Duration::from_secs(1), elapsed),
        format!("max deviation {dev:.2e} <= {tol:.0e}, {elapsed:.2?} < 1s"),
    );
}

#[test]
fn criterion_02_equal_weight_closed_form() {
    let _g = serial();
    let tol = 1e-10;
    let dev = (2..=8)
        .map(|k| {
            let w = vec![1.0 / (k as f64).sqrt(); k];
            let want = ((k - 1) as f64 / k as f64).powi(k as i32 - 1);
            (max_g(&w, &SolverConfig::default()).unwrap().g_max - want).abs()
        })
        .fold(0.0, f64::max);
    report(
        2,
        "equal-weight law",
        dev <= tol,
        format!("K=2..8, max deviation {dev:.2e} <= {tol:.0e}"),
    );
}

#[test]
fn criterion_03_one_different_weight_law() {
    let _g = serial();
    let tol = 1e-8;
    let mut dev = 0.0f64;
    let mut points = 0;
    for n in 3..=7usize {
        // 49 ratios across both regimes plus the switch itself
        let switch = ((n - 1) as f64).sqrt();
        let mut ratios: Vec<f64> = (0..49).map(|i| 0.05 + 3.0 * i as f64 / 48.0).collect();
        ratios.push(switch);
        for ratio in ratios {
            let lam = 1.0 / ((n - 1) as f64 + ratio * ratio).sqrt();
            let mut w = vec![lam; n - 1];
            w.push(ratio * lam);
            let solver = max_g(&w, &SolverConfig::default()).unwrap().g_max;
            let closed = one_diff_closed_form(n, lam, ratio * lam).unwrap();
            dev = dev.max((solver - closed).abs());
            points += 1;
        }
    }
    report(
        3,
        "one-different-weight law",
        dev <= tol && points == 250,
        format!("{points} points, max deviation {dev:.2e} <= {tol:.0e}"),
    );
}

#[test]
fn criterion_04_isotropic_boundaries() {
    let _g = serial();
    let tol = 1e-8;
    let seam_tol = 1e-12;
    let start = Instant::now();
    let cfg = witness_cfg();
    let devs: Vec<f64> = cfg.exec.map(1001, |i| {
        let eta = i as f64 / 1000.0;
        let w = w5_weights(eta, eta).unwrap();
        let full = witness::f_full(&w, &cfg.solver).unwrap().g_max;
        let part = witness::f_part(&w, &[4], &cfg).unwrap().value;
        (full - closed_form_f_full_eta(eta).unwrap())
            .abs()
            .max((part - closed_form_f_part_eta(eta).unwrap()).abs())
    });
    let elapsed = start.elapsed();
    let dev = devs.iter().cloned().fold(0.0, f64::max);

    // adjacent branches agree at the switch points
    let full_lo = |e: f64| 1.0 - e;
    let full_hi = |e: f64| 27.0 * e.powi(4) / (5.0 * e - 1.0).powi(3);
    let part_mid = |e: f64| 3.0 * e * e * (e - 1.0) / (13.0 * e * e - 16.0 * e + 4.0);
    let part_hi = |e: f64| 0.75 * e;
    let (half, two_thirds) = (0.5, 2.0 / 3.0);
    let mut seam = [
        full_lo(half) - full_hi(half),
        full_lo(half) - part_mid(half),
        part_mid(two_thirds) - part_hi(two_thirds),
    ]
    .iter()
    .map(|d| d.abs())
    .fold(0.0, f64::max);
    for x in [half, two_thirds] {
        for f in [closed_form_f_full_eta, closed_form_f_part_eta] {
            let (a, b, c) = (
                f(x.next_down()).unwrap(),
                f(x).unwrap(),
                f(x.next_up()).unwrap(),
            );
            seam = seam.max((a - b).abs()).max((c - b).abs());
        }
    }
    report(
        4,
        "isotropic-loss boundaries",
        dev <= tol && seam <= seam_tol && within(Duration::from_secs(10), elapsed),
        format!(
            "1001 points, max deviation {dev:.2e} <= {tol:.0e}, seam gap {seam:.2e} <= {seam_tol:.0e}, {elapsed:.2?} < 10s"
        ),
    );
}

#[test]
fn criterion_05_isotropic_detection_flags() {
    let _g = serial();
    let tol = 1e-12;
    let rows = sweep_eta(SweepGrid::unit(1001), SweepMode::Isotropic, &witness_cfg()).unwrap();
    let flips_at_half = rows.iter().all(|r| {
        let above = r.eta > 0.5;
        r.partial == above && r.full == above
    });
    let first_detected = rows.iter().find(|r| r.partial).map(|r| r.eta);

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let dev = (0..100)
        .map(|_| {
            let e = Efficiencies::random(&mut rng, 4).unwrap();
            (lhs_trace(&e) - lhs_trace_matrix(&e).unwrap()).abs()
        })
        .fold(0.0, f64::max);
    report(
        5,
        "loss detection threshold",
        flips_at_half && dev <= tol,
        format!(
            "flags flip only above 0.5 (first detection at {first_detected:?}), trace deviation {dev:.2e} <= {tol:.0e} on 100 draws"
        ),
    );
}

/// Largest change of `f(row)` between grid neighbours.
fn max_jump(rows: &[SweepRow], n: usize, f: impl Fn(&SweepRow) -> f64) -> f64 {
    let mut jump = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let here = f(&rows[i * n + j]);
            if i + 1 < n {
                jump = jump.max((f(&rows[(i + 1) * n + j]) - here).abs());
            }
            if j + 1 < n {
                jump = jump.max((f(&rows[i * n + j + 1]) - here).abs());
            }
        }
    }
    jump
}

#[test]
fn criterion_06_two_parameter_map() {
    let _g = serial();
    let n = 201;
    let tol = 1e-8;
    // one grid step is 0.005; the functions involved have slopes of order one
    let jump_tol = 0.02;
    let start = Instant::now();
    let rows = sweep_eta(SweepGrid::unit(n), SweepMode::EtaEtaPrime, &witness_cfg()).unwrap();
    let elapsed = start.elapsed();

    let full_in_partial = rows.iter().all(|r| !r.full || r.partial);
    let partial_only = rows.iter().filter(|r| r.partial && !r.full).count();
    let full_count = rows.iter().filter(|r| r.full).count();
    let jump_part = max_jump(&rows, n, |r| r.trace_lhs - r.f_part);
    let jump_full = max_jump(&rows, n, |r| r.trace_lhs - r.f_full);
    let diag = (0..n)
        .map(|i| {
            let r = &rows[i * n + i];
            let eta = r.eta;
            (r.f_full - closed_form_f_full_eta(eta).unwrap())
                .abs()
                .max((r.f_part - closed_form_f_part_eta(eta).unwrap()).abs())
        })
        .fold(0.0, f64::max);
    report(
        6,
        "two-parameter detection map",
        full_in_partial
            && partial_only > 0
            && full_count > 0
            && jump_part <= jump_tol
            && jump_full <= jump_tol
            && diag <= tol
            && within(Duration::from_secs(120), elapsed),
        format!(
            "{full_count} full, {partial_only} partial-only cells, jumps {jump_part:.2e}/{jump_full:.2e} <= {jump_tol}, diagonal deviation {diag:.2e} <= {tol:.0e}, {elapsed:.2?} < 2min"
        ),
    );
}

#[test]
fn criterion_07_cascaded_structure() {
    let _g = serial();
    let tol = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let draws: Vec<Efficiencies> = (0..20)
        .map(|_| Efficiencies::random(&mut rng, 4).unwrap())
        .collect();
    let cfg = oracle_cfg();
    let dev = draws
        .iter()
        .map(|e| {
            let direct = oracle::f_full(&apply_loss(e).unwrap(), &cfg).unwrap().value;
            let purified =
                witness::f_full(&purification_weights(e).unwrap(), &SolverConfig::default())
                    .unwrap()
                    .g_max;
            (direct - purified).abs()
        })
        .fold(0.0, f64::max);
    report(
        7,
        "cascaded-structure identity",
        dev <= tol,
        format!("20 draws, max deviation {dev:.2e} <= {tol:.0e}"),
    );
}

#[test]
fn criterion_08_partition_machinery() {
    let _g = serial();
    let tol = 1e-8;
    // Bell numbers minus the single-block partition
    let bell = [1usize, 2, 5, 15, 52, 203, 877, 4140];
    let counts_ok = (1..=8).all(|n| {
        let want = bell[n - 1] - 1;
        match enumerate_partitions(n, 2, &[]) {
            Ok(p) => p.len() == want,
            Err(_) => want == 0,
        }
    });
    let four = enumerate_partitions(4, 2, &[]).unwrap().len();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let cfg = WitnessConfig {
        force_full_enumeration: true,
        ..witness_cfg()
    };
    let mut dev = 0.0f64;
    for n in 2..=6 {
        for _ in 0..10 {
            let moduli: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let w = WWeights::normalized(moduli.iter().map(|&x| x.into()).collect()).unwrap();
            let part = witness::f_part(&w, &[], &cfg).unwrap().value;
            dev = dev.max((part - largest_bipartition_se(&w)).abs());
        }
    }
    report(
        8,
        "partition machinery",
        counts_ok && four == 14 && dev <= tol,
        format!("N=4 count {four}, Bell counts N<=8 match: {counts_ok}, bipartition shortcut deviation {dev:.2e} <= {tol:.0e}"),
    );
}

/// Index of the cell with the largest value among `cells`.
fn argmax(map: &PhaseMap, cells: &[(usize, usize)]) -> usize {
    (0..cells.len())
        .max_by(|&a, &b| {
            let (x, y) = (cells[a], cells[b]);
            map.at(x.0, x.1).total_cmp(&map.at(y.0, y.1))
        })
        .unwrap()
}

#[test]
fn criterion_09_physics_front_end() {
    let _g = serial();
    let tol = 1e-12;
    let p = CavityParams::default();
    let ortho = (0..=10_000)
        .map(|i| {
            let m = hopfield_coefficients(i as f64 * 1e-3, &p).unwrap();
            let d = m.transpose() * m;
            [d[(0, 0)] - 1.0, d[(1, 1)] - 1.0, d[(0, 1)], d[(1, 0)]]
                .iter()
                .fold(0.0f64, |a, x| a.max(x.abs()))
        })
        .fold(0.0, f64::max);

    let geometry = PumpGeometry::square(p.k_p);
    let map = phase_matching_grid(512, 0.03, &geometry, &p, Exec::default()).unwrap();
    let signal_cells: Vec<(usize, usize)> = geometry
        .signal_wavevectors()
        .iter()
        .map(|&k| map.nearest(k))
        .collect();
    let radius = std::f64::consts::SQRT_2 * p.k_p;
    let circle_cells: Vec<(usize, usize)> = (0..64)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / 64.0;
            map.nearest([radius * t.cos(), radius * t.sin()])
        })
        .collect();
    let signal_max = signal_cells
        .iter()
        .filter(|&&(x, y)| map.is_local_max(x, y, 0.0))
        .count();
    let circle_max = circle_cells
        .iter()
        .filter(|&&(x, y)| map.is_local_max(x, y, 0.0))
        .count();

    // Diagnostics: offset of the largest value across each feature, in cells.
    let signal_offsets: Vec<isize> = signal_cells
        .iter()
        .zip(geometry.signal_wavevectors())
        .map(|(&(x, y), k)| {
            let radial_is_y = k[0].abs() < k[1].abs();
            let line: Vec<(usize, usize)> = (-4..=4isize)
                .map(|d| {
                    if radial_is_y {
                        (x, (y as isize + d) as usize)
                    } else {
                        ((x as isize + d) as usize, y)
                    }
                })
                .collect();
            argmax(&map, &line) as isize - 4
        })
        .collect();
    let phi_at_signals: Vec<String> = signal_cells
        .iter()
        .map(|&(x, y)| format!("{:.3}", map.at(x, y)))
        .collect();

    let ok = ortho <= tol && signal_max == 4 && circle_max == circle_cells.len();
    report(
        9,
        "physics front end",
        ok,
        format!(
            "hopfield deviation {ortho:.2e} <= {tol:.0e}; 3x3 local maxima: signals {signal_max}/4, circle {circle_max}/{}; phi at signals {phi_at_signals:?}, radial crest offset {signal_offsets:?} cells",
            circle_cells.len()
        ),
    );
}

fn selftest_output(seed: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wwitness"))
        .arg("selftest")
        .env("W_WITNESS_SEED", seed)
        .output()
        .expect("binary runs")
}

#[test]
fn criterion_10_selftest_determinism() {
    let _g = serial();
    let a = selftest_output("11");
    let b = selftest_output("11");
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    let green = a.status.code() == Some(0) && b.status.code() == Some(0);
    report(
        10,
        "selftest determinism",
        same && green,
        format!(
            "{} bytes, identical: {same}, exit codes {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    );
}
