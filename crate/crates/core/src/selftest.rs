//! Fast agreement checks between the analytic solver, the closed forms, the
//! matrix layer and the product-state oracle.
//!
//! The report is a pure function of the seed: random draws come from a seeded
//! ChaCha stream and every parallel map returns results in index order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cavity::{
    branch_potential, effective_potential, hopfield_coefficients, CavityParams, PumpGeometry,
};
use crate::classify::{classify_state, locate_entangled_subsets, Verdict, WFamilyBounds};
use crate::exec::Exec;
use crate::losschannel::{
    apply_loss, isotropic_row, lhs_trace, lhs_trace_matrix, purification_weights, purify,
    w5_weights, Efficiencies,
};
use crate::oracle::{self, OracleConfig};
use crate::partition::enumerate_partitions;
use crate::witness::{self, max_g, one_diff_closed_form, SolverConfig, WWeights, WitnessConfig};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    /// Largest absolute deviation found (0 or 1 for yes/no checks).
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<SelfCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One line per check plus a summary line.
    pub fn render(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for c in &self.checks {
            out += &format!(
                "{} {:<28} deviation={:.3e} tolerance={:.0e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.deviation,
                c.tolerance
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out += &format!("{} checks, {} failed\n", self.checks.len(), failed);
        out
    }
}

fn check(name: &'static str, deviation: f64, tolerance: f64) -> SelfCheck {
    SelfCheck {
        name,
        deviation: deviation.abs(),
        tolerance,
        passed: deviation.abs() <= tolerance,
    }
}

fn flag(name: &'static str, ok: bool) -> SelfCheck {
    SelfCheck {
        name,
        deviation: if ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
        passed: ok,
    }
}

fn max_dev<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| {
        if x.is_nan() {
            f64::INFINITY
        } else {
            m.max(x.abs())
        }
    })
}

pub fn run_selftest(seed: u64, exec: Exec) -> Result<SelftestReport> {
    let solver = SolverConfig {
        seed,
        ..Default::default()
    };
    let wcfg = WitnessConfig {
        solver: solver.clone(),
        exec,
        ..Default::default()
    };
    let ocfg = OracleConfig {
        seed,
        exec,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let w4 = WWeights::from_moduli(&[0.5; 4])?;
    let w4_op = w4.operator()?;
    checks.push(check(
        "w4 f_full solver",
        witness::f_full(&w4, &solver)?.g_max - 27.0 / 64.0,
        1e-10,
    ));
    checks.push(check(
        "w4 f_part solver",
        witness::f_part(&w4, &[], &wcfg)?.value - 0.75,
        1e-10,
    ));
    checks.push(check(
        "w4 f_full oracle",
        oracle::f_full(&w4_op, &ocfg)?.value - 27.0 / 64.0,
        1e-10,
    ));
    checks.push(check(
        "w4 f_part oracle",
        oracle::f_part(&w4_op, &[], &ocfg)?.1.value - 0.75,
        1e-10,
    ));

    let equal = (2..=8)
        .map(|k| {
            let w = vec![1.0 / (k as f64).sqrt(); k];
            let want = ((k - 1) as f64 / k as f64).powi(k as i32 - 1);
            Ok(max_g(&w, &solver)?.g_max - want)
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("equal-weight law", max_dev(equal), 1e-10));

    let mut one_diff = Vec::new();
    for n in 3..=6usize {
        for j in 0..10 {
            let ratio = 0.25 + 0.35 * j as f64;
            let lam = 1.0 / ((n - 1) as f64 + ratio * ratio).sqrt();
            let mut w = vec![lam; n - 1];
            w.push(ratio * lam);
            one_diff.push(max_g(&w, &solver)?.g_max - one_diff_closed_form(n, lam, ratio * lam)?);
        }
    }
    checks.push(check("one-different-weight law", max_dev(one_diff), 1e-8));

    let iso = (0..=100)
        .map(|i| {
            let eta = i as f64 / 100.0;
            let row = isotropic_row(eta)?;
            let w = w5_weights(eta, eta)?;
            let full = witness::f_full(&w, &solver)?.g_max;
            let part = witness::f_part(&w, &[4], &wcfg)?.value;
            Ok((full - row.f_full).abs().max((part - row.f_part).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("isotropic closed forms", max_dev(iso), 1e-8));

    let draws: Vec<Efficiencies> = (0..20)
        .map(|_| Efficiencies::random(&mut rng, 4))
        .collect::<Result<_>>()?;
    let trace_dev = draws
        .iter()
        .map(|e| Ok(lhs_trace(e) - lhs_trace_matrix(e)?))
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("trace identity", max_dev(trace_dev), 1e-12));
    let purif_dev = draws
        .iter()
        .map(|e| {
            let reduced = purify(e)?.projector().partial_trace(&[4])?;
            Ok((reduced.matrix() - apply_loss(e)?.matrix()).camax())
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("purification identity", max_dev(purif_dev), 1e-12));

    let cascade = draws[..3]
        .iter()
        .map(|e| {
            let direct = oracle::f_full(&apply_loss(e)?, &ocfg)?.value;
            Ok(direct - witness::f_full(&purification_weights(e)?, &solver)?.g_max)
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("cascaded structure", max_dev(cascade), 1e-6));

    let params = CavityParams::default();
    let ortho = (0..=1000)
        .map(|i| {
            let m = hopfield_coefficients(i as f64 * 0.01, &params)?;
            Ok((m.transpose() * m - nalgebra::Matrix2::identity()).amax())
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("hopfield orthogonality", max_dev(ortho), 1e-12));
    let geometry = PumpGeometry::square(params.k_p);
    let v = effective_potential(&params)?;
    let general = (0..4)
        .map(|n| {
            let (a, b) = (geometry.pumps[n], geometry.pumps[(n + 1) % 4]);
            Ok(branch_potential(a, b, [-a[0], -a[1]], [0; 4], &params)? - v)
        })
        .collect::<Result<Vec<_>>>()?;
    checks.push(check("simplified potential", max_dev(general), 1e-12));

    checks.push(flag(
        "partition count",
        enumerate_partitions(4, 2, &[])?.len() == 14,
    ));
    let bounds = WFamilyBounds {
        solver: solver.clone(),
        ..Default::default()
    };
    checks.push(flag(
        "w4 classified full",
        classify_state(&w4_op, &w4_op, &bounds)?.verdict == Verdict::Full,
    ));
    let dead = apply_loss(&Efficiencies::new(vec![1.0, 1.0, 1.0, 0.0])?)?;
    let located = locate_entangled_subsets(&dead, &dead, &bounds)?;
    checks.push(flag(
        "dead mode located",
        located.entangled == vec![vec![0, 1, 2]] && located.separated == vec![3],
    ));

    // a random complex W state keeps its value under a global phase change
    let raw: Vec<Complex64> = (0..5)
        .map(|_| {
            Complex64::from_polar(
                rng.random_range(0.1..1.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let a = WWeights::normalized(raw.clone())?;
    let b = WWeights::normalized(
        raw.iter()
            .map(|z| z * Complex64::from_polar(1.0, 1.1))
            .collect(),
    )?;
    checks.push(check(
        "phase invariance",
        witness::f_full(&a, &solver)?.g_max - witness::f_full(&b, &solver)?.g_max,
        1e-14,
    ));

    Ok(SelftestReport { seed, checks })
}
