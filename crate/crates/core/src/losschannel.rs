//! Beam-splitter loss applied to the emitted W state.
//!
//! Each signal mode `n` passes a beam splitter of transmittance `η_n`; the
//! bath is traced out analytically. The N-mode result is
//! `ρ_mix = |ψ⟩⟨ψ| + (1 - Ση_n/N)|0…0⟩⟨0…0|` with `|ψ⟩ = Σ_n √(η_n/N) |1_n⟩`,
//! purified by one extra mode that carries the lost amplitude.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exec::Exec;
use crate::fockstate::{expectation, DensityOperator, PureState, MAX_MODES};
use crate::witness::{
    closed_form_f_full_eta, closed_form_f_part_eta, detects, f_full, f_part, WWeights,
    WitnessConfig,
};
use crate::{Error, Result};

/// Per-mode quantum efficiencies, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Efficiencies {
    eta: Vec<f64>,
}

fn check_eta(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}

impl Efficiencies {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() || eta.len() >= MAX_MODES {
            return Err(Error::ModeCount(eta.len()));
        }
        for &e in &eta {
            check_eta("eta", e)?;
        }
        Ok(Self { eta })
    }

    /// `n` modes with the same efficiency.
    pub fn uniform(eta: f64, n: usize) -> Result<Self> {
        Self::new(vec![eta; n])
    }

    /// `(η, η, η, η′)`.
    pub fn eta_etaprime(eta: f64, eta_prime: f64) -> Result<Self> {
        check_eta("eta_prime", eta_prime)?;
        Self::new(vec![eta, eta, eta, eta_prime])
    }

    pub fn n_modes(&self) -> usize {
        self.eta.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.eta
    }

    pub fn sum(&self) -> f64 {
        self.eta.iter().sum()
    }

    /// Independent uniform draws on `[0, 1]`.
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Result<Self> {
        Self::new((0..n).map(|_| rng.random_range(0.0..=1.0)).collect())
    }
}

/// Weights of the `N+1`-mode purification: `√(η_n/N)` on the signals and
/// `√(1 - Ση_n/N)` on the last mode.
pub fn purification_weights(etas: &Efficiencies) -> Result<WWeights> {
    let n = etas.n_modes() as f64;
    let mut w: Vec<f64> = etas.values().iter().map(|e| (e / n).sqrt()).collect();
    w.push((1.0 - etas.sum() / n).max(0.0).sqrt());
    WWeights::normalized(w.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// `λ_{1,2,3} = √η/2`, `λ_4 = √η′/2`, `λ_5 = √(4 - 3η - η′)/2`.
pub fn w5_weights(eta: f64, eta_prime: f64) -> Result<WWeights> {
    purification_weights(&Efficiencies::eta_etaprime(eta, eta_prime)?)
}

/// Purified output state; the purifying mode is last.
pub fn purify(etas: &Efficiencies) -> Result<PureState> {
    purification_weights(etas)?.state()
}

/// Lossy output state `ρ_mix` on the signal modes.
pub fn apply_loss(etas: &Efficiencies) -> Result<DensityOperator> {
    let n = etas.n_modes();
    let amps: Vec<Complex64> = etas
        .values()
        .iter()
        .map(|e| Complex64::new((e / n as f64).sqrt(), 0.0))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let mut matrix = if norm > 0.0 {
        let psi = PureState::single_excitation(
            &amps.iter().map(|a| a / norm.sqrt()).collect::<Vec<_>>(),
        )?;
        psi.projector().matrix() * Complex64::new(norm, 0.0)
    } else {
        nalgebra::DMatrix::zeros(1 << n, 1 << n)
    };
    matrix[(0, 0)] += Complex64::new(1.0 - norm, 0.0);
    DensityOperator::new(n, matrix)
}

/// Closed form of `Tr ρ_mix²`: `(s/N)² + (1 - s/N)²`, `s = Ση_n`.
/// For four modes this is `1 - s/2 + s²/8`.
pub fn lhs_trace(etas: &Efficiencies) -> f64 {
    let x = etas.sum() / etas.n_modes() as f64;
    x * x + (1.0 - x) * (1.0 - x)
}

/// `Tr ρ_mix ρ_mix` from the matrices.
pub fn lhs_trace_matrix(etas: &Efficiencies) -> Result<f64> {
    let rho = apply_loss(etas)?;
    expectation(&rho, &rho)
}

/// Componentwise mean, the turbulence replacement `η_n → ⟨η_n⟩`.
pub fn turbulence_mean(samples: &[Efficiencies]) -> Result<Efficiencies> {
    let first = samples.first().ok_or(Error::EmptySamples)?;
    let n = first.n_modes();
    let mut mean = vec![0.0; n];
    for s in samples {
        if s.n_modes() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.n_modes(),
            });
        }
        for (m, e) in mean.iter_mut().zip(s.values()) {
            *m += e;
        }
    }
    let count = samples.len() as f64;
    Efficiencies::new(
        mean.into_iter()
            .map(|m| (m / count).clamp(0.0, 1.0))
            .collect(),
    )
}

/// Seeded uniform turbulence samples.
pub fn uniform_samples(n_samples: usize, n_modes: usize, seed: u64) -> Result<Vec<Efficiencies>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| Efficiencies::random(&mut rng, n_modes))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// `η_n = η` for all four modes, closed forms.
    Isotropic,
    /// `η_{1,2,3} = η`, `η_4 = η′`, solver values.
    EtaEtaPrime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub eta_prime: f64,
    pub trace_lhs: f64,
    pub f_full: f64,
    pub f_part: f64,
    /// `Tr ρL > f_full`.
    pub partial: bool,
    /// `Tr ρL > f_part`.
    pub full: bool,
}

impl SweepRow {
    fn new(eta: f64, eta_prime: f64, trace_lhs: f64, f_full: f64, f_part: f64) -> Self {
        Self {
            eta,
            eta_prime,
            trace_lhs,
            f_full,
            f_part,
            partial: detects(trace_lhs, f_full),
            full: detects(trace_lhs, f_part),
        }
    }
}

/// Grid `lo, …, hi` with `steps` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepGrid {
    pub fn unit(steps: usize) -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_eta("grid lower bound", self.lo)?;
        check_eta("grid upper bound", self.hi)?;
        if self.lo > self.hi {
            return Err(Error::OutOfDomain {
                name: "grid lower bound",
                value: self.lo,
                domain: "not above the upper bound",
            });
        }
        if self.steps < 2 {
            return Err(Error::OutOfDomain {
                name: "steps",
                value: self.steps as f64,
                domain: "[2, inf)",
            });
        }
        Ok(())
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
        }
    }
}

/// Closed-form row for four modes of equal efficiency.
pub fn isotropic_row(eta: f64) -> Result<SweepRow> {
    let etas = Efficiencies::uniform(eta, 4)?;
    Ok(SweepRow::new(
        eta,
        eta,
        lhs_trace(&etas),
        closed_form_f_full_eta(eta)?,
        closed_form_f_part_eta(eta)?,
    ))
}

/// Solver row for `W5(η, η′)`, mode 5 separated in `f_part`.
pub fn eta_etaprime_row(eta: f64, eta_prime: f64, cfg: &WitnessConfig) -> Result<SweepRow> {
    let etas = Efficiencies::eta_etaprime(eta, eta_prime)?;
    let weights = purification_weights(&etas)?;
    let full = f_full(&weights, &cfg.solver)?.g_max;
    let part = f_part(&weights, &[4], cfg)?.value;
    Ok(SweepRow::new(eta, eta_prime, lhs_trace(&etas), full, part))
}

/// Rows in grid order (`η` outer, `η′` inner for the two-parameter sweep).
pub fn sweep_eta(grid: SweepGrid, mode: SweepMode, cfg: &WitnessConfig) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let n = grid.steps;
    let rows = match mode {
        SweepMode::Isotropic => cfg.exec.map(n, |i| isotropic_row(grid.point(i))),
        SweepMode::EtaEtaPrime => {
            // Rows are the parallel unit; each point runs sequentially inside.
            let inner = WitnessConfig {
                exec: Exec::Sequential,
                ..cfg.clone()
            };
            cfg.exec.map(n * n, |i| {
                eta_etaprime_row(grid.point(i / n), grid.point(i % n), &inner)
            })
        }
    };
    rows.into_iter().collect()
}
