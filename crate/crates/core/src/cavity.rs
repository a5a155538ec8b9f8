//! Polariton front end of the four-pump microcavity.
//!
//! Units: `ħ = c = 1`, energies in eV, in-plane wave numbers in units of
//! `k_0 = E_C(0)`. Excitons are dispersionless. The lower and upper polariton
//! branches come from the two-coupled-oscillator diagonalization with
//! off-diagonal coupling `Ω_R`, so the splitting at resonance is `2 Ω_R`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::fockstate::{DensityOperator, PureState};
use crate::{Error, Result};

pub type WaveVector = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityParams {
    /// Cavity photon energy at normal incidence (eV).
    pub e_c0: f64,
    /// Exciton energy (eV).
    pub e_x: f64,
    /// Exciton–photon coupling (eV); the splitting at resonance is `2 Ω_R`.
    pub omega_r: f64,
    /// Polariton broadening (eV).
    pub gamma: f64,
    /// Pump wave-vector component (units of `k_0`).
    pub k_p: f64,
    /// Exciton binding energy (eV); potentials are reported in units of it.
    pub e_b: Option<f64>,
    /// Splitting-to-binding ratio override, used only when `e_b` is absent.
    pub p_s: Option<f64>,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            e_c0: 1.5,
            e_x: 1.5,
            omega_r: 2e-3,
            gamma: 10e-6,
            k_p: 0.01,
            e_b: None,
            p_s: None,
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value,
            domain: "(0, inf)",
        })
    }
}

fn check_k(k: f64) -> Result<()> {
    if k >= 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name: "k",
            value: k,
            domain: "[0, inf)",
        })
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        positive("e_c0", self.e_c0)?;
        positive("e_x", self.e_x)?;
        positive("omega_r", self.omega_r)?;
        positive("gamma", self.gamma)?;
        positive("k_p", self.k_p)?;
        if let Some(e_b) = self.e_b {
            positive("e_b", e_b)?;
            if let Some(p_s) = self.p_s {
                let derived = 2.0 * self.omega_r / e_b;
                if (p_s - derived).abs() > 1e-12 * derived.max(1.0) {
                    return Err(Error::OutOfDomain {
                        name: "p_s",
                        value: p_s,
                        domain: "2 omega_r / e_b when e_b is given",
                    });
                }
            }
        }
        if let Some(p_s) = self.p_s {
            if !(p_s >= 0.0 && p_s.is_finite()) {
                return Err(Error::OutOfDomain {
                    name: "p_s",
                    value: p_s,
                    domain: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn binding_energy(&self) -> f64 {
        self.e_b.unwrap_or(1.0)
    }

    /// `p_s = 2 Ω_R / E_b`.
    pub fn splitting_ratio(&self) -> f64 {
        match (self.e_b, self.p_s) {
            (Some(e_b), _) => 2.0 * self.omega_r / e_b,
            (None, Some(p_s)) => p_s,
            (None, None) => 2.0 * self.omega_r / self.binding_energy(),
        }
    }
}

/// `E_C(k) = E_C(0) √(1 + k²)`.
pub fn photon_dispersion(k: f64, p: &CavityParams) -> Result<f64> {
    check_k(k)?;
    Ok(p.e_c0 * k.hypot(1.0))
}

/// Half detuning `(E_C - E_X)/2` and half splitting `√(((E_C-E_X)/2)² + Ω_R²)`.
fn half_detuning(k: f64, p: &CavityParams) -> Result<(f64, f64, f64)> {
    let e_c = photon_dispersion(k, p)?;
    let h = 0.5 * (e_c - p.e_x);
    Ok((e_c, h, h.hypot(p.omega_r)))
}

/// Lower and upper polariton energies `(E_1, E_2)`.
pub fn polariton_dispersions(k: f64, p: &CavityParams) -> Result<(f64, f64)> {
    let (e_c, _, root) = half_detuning(k, p)?;
    let mean = 0.5 * (e_c + p.e_x);
    Ok((mean - root, mean + root))
}

/// Lower-branch energy.
pub fn lower_polariton(k: f64, p: &CavityParams) -> Result<f64> {
    Ok(polariton_dispersions(k, p)?.0)
}

/// Hopfield matrix `M` with `M_11 = M_22 = 1/√(1+ρ_k²)`,
/// `M_12 = -M_21 = √(1 - M_11²)` and `ρ_k = (E_2(k) - E_C(k)) / Ω_R`.
///
/// Row index: exciton (0) / photon (1); column index: polariton branch.
pub fn hopfield_coefficients(k: f64, p: &CavityParams) -> Result<Matrix2<f64>> {
    let (_, h, root) = half_detuning(k, p)?;
    // E_2 - E_C = root - h, written without cancellation for h > 0.
    let gap = if h > 0.0 {
        p.omega_r * p.omega_r / (root + h)
    } else {
        root - h
    };
    let rho = gap / p.omega_r;
    let norm = rho.hypot(1.0);
    let m11 = 1.0 / norm;
    let m12 = rho / norm;
    Ok(Matrix2::new(m11, m12, -m12, m11))
}

fn norm2(v: WaveVector) -> f64 {
    v[0].hypot(v[1])
}

fn add(a: WaveVector, b: WaveVector) -> WaveVector {
    [a[0] + b[0], a[1] + b[1]]
}

fn sub(a: WaveVector, b: WaveVector) -> WaveVector {
    [a[0] - b[0], a[1] - b[1]]
}

/// Branch-resolved interaction `V^{j1 j2 j3 j4}_{k,k',q} / E_b` (branches 0 = lower, 1 = upper).
pub fn branch_potential(
    k: WaveVector,
    k_prime: WaveVector,
    q: WaveVector,
    branches: [usize; 4],
    p: &CavityParams,
) -> Result<f64> {
    if branches.iter().any(|&j| j > 1) {
        return Err(Error::OutOfDomain {
            name: "branch",
            value: 2.0,
            domain: "{0, 1}",
        });
    }
    let [j1, j2, j3, j4] = branches;
    let m_out1 = hopfield_coefficients(norm2(add(k, q)), p)?;
    let m_out2 = hopfield_coefficients(norm2(sub(k_prime, q)), p)?;
    let m_in1 = hopfield_coefficients(norm2(k), p)?;
    let m_in2 = hopfield_coefficients(norm2(k_prime), p)?;
    let exciton = m_out1[(0, j1)] * m_out2[(0, j2)] * m_in1[(0, j3)] * m_in2[(0, j4)];
    let saturation = m_out1[(1, j1)] * m_out2[(0, j2)] * m_in1[(0, j3)] * m_in2[(0, j4)]
        + m_out1[(0, j1)] * m_out2[(0, j2)] * m_in1[(0, j3)] * m_in2[(1, j4)];
    Ok(12.0 * exciton - 8.0 * std::f64::consts::PI / 7.0 * p.splitting_ratio() * saturation)
}

/// `V_{k_p} / E_b` for the neighboring-pump processes, which depends only on moduli.
pub fn effective_potential(p: &CavityParams) -> Result<f64> {
    p.validate()?;
    let m0 = hopfield_coefficients(0.0, p)?;
    let m2 = hopfield_coefficients(2.0 * p.k_p, p)?;
    let mr = hopfield_coefficients(std::f64::consts::SQRT_2 * p.k_p, p)?;
    let (m11_0, m21_0) = (m0[(0, 0)], m0[(1, 0)]);
    let m11_2 = m2[(0, 0)];
    let (m11_r, m21_r) = (mr[(0, 0)], mr[(1, 0)]);
    Ok(12.0 * m11_0 * m11_2 * m11_r * m11_r
        - 8.0 * std::f64::consts::PI / 7.0
            * p.splitting_ratio()
            * (m21_0 * m11_2 * m11_r * m11_r + m11_0 * m11_2 * m11_r * m21_r))
}

/// Pump wave vectors, all of equal modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpGeometry {
    pub pumps: [WaveVector; 4],
}

impl PumpGeometry {
    /// `(k_p,k_p), (-k_p,k_p), (-k_p,-k_p), (k_p,-k_p)`.
    pub fn square(k_p: f64) -> Self {
        Self {
            pumps: [[k_p, k_p], [-k_p, k_p], [-k_p, -k_p], [k_p, -k_p]],
        }
    }

    pub fn new(pumps: [WaveVector; 4]) -> Result<Self> {
        let g = Self { pumps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let r0 = norm2(self.pumps[0]);
        for v in &self.pumps {
            let r = norm2(*v);
            if !r.is_finite() || (r - r0).abs() > 1e-12 {
                return Err(Error::OutOfDomain {
                    name: "pump modulus",
                    value: r,
                    domain: "equal for all four pumps",
                });
            }
        }
        Ok(())
    }

    /// Signal wave vectors `k_pn + k_p(n+1)` of the neighboring-pump
    /// processes sharing the idler at `k_i = 0`.
    pub fn signal_wavevectors(&self) -> [WaveVector; 4] {
        std::array::from_fn(|n| add(self.pumps[n], self.pumps[(n + 1) % 4]))
    }
}

/// `Φ(k) = Σ_{n,m} γ² / ([E_1(k) + E_1(|k_pn + k_pm - k|) - 2E_1(√2 k_p)]² + γ²)`.
pub fn phase_matching(k: WaveVector, g: &PumpGeometry, p: &CavityParams) -> Result<f64> {
    if !k[0].is_finite() || !k[1].is_finite() {
        return Err(Error::OutOfDomain {
            name: "k",
            value: f64::NAN,
            domain: "finite",
        });
    }
    let pump_energy = 2.0 * lower_polariton(std::f64::consts::SQRT_2 * p.k_p, p)?;
    let e_signal = lower_polariton(norm2(k), p)?;
    let g2 = p.gamma * p.gamma;
    let mut phi = 0.0;
    for a in &g.pumps {
        for b in &g.pumps {
            let idler = norm2(sub(add(*a, *b), k));
            let detuning = e_signal + lower_polariton(idler, p)? - pump_energy;
            phi += g2 / (detuning * detuning + g2);
        }
    }
    Ok(phi)
}

/// `Φ` sampled on an `n × n` grid over `[-k_max, k_max]²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseMap {
    pub axis: Vec<f64>,
    /// `values[ix * n + iy]`.
    pub values: Vec<f64>,
}

impl PhaseMap {
    pub fn n(&self) -> usize {
        self.axis.len()
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.n() + iy]
    }

    /// Grid cell closest to `k`.
    pub fn nearest(&self, k: WaveVector) -> (usize, usize) {
        let idx = |x: f64| {
            (0..self.n())
                .min_by(|&a, &b| {
                    (self.axis[a] - x)
                        .abs()
                        .total_cmp(&(self.axis[b] - x).abs())
                })
                .expect("nonempty axis")
        };
        (idx(k[0]), idx(k[1]))
    }

    /// True if no neighbor in the 3×3 window exceeds the cell by more than
    /// `rel_tol` (relative).
    pub fn is_local_max(&self, ix: usize, iy: usize, rel_tol: f64) -> bool {
        let n = self.n() as isize;
        let centre = self.at(ix, iy);
        (-1..=1isize).all(|dx| {
            (-1..=1isize).all(|dy| {
                let (x, y) = (ix as isize + dx, iy as isize + dy);
                if x < 0 || y < 0 || x >= n || y >= n {
                    return true;
                }
                self.at(x as usize, y as usize) <= centre * (1.0 + rel_tol)
            })
        })
    }
}

pub fn phase_matching_grid(
    n: usize,
    k_max: f64,
    g: &PumpGeometry,
    p: &CavityParams,
    exec: Exec,
) -> Result<PhaseMap> {
    p.validate()?;
    g.validate()?;
    if n < 2 {
        return Err(Error::OutOfDomain {
            name: "grid steps",
            value: n as f64,
            domain: "[2, inf)",
        });
    }
    positive("k_max", k_max)?;
    let axis: Vec<f64> = (0..n)
        .map(|i| -k_max + 2.0 * k_max * i as f64 / (n - 1) as f64)
        .collect();
    let rows: Vec<Vec<f64>> = exec
        .map(n, |ix| {
            axis.iter()
                .map(|&ky| phase_matching([axis[ix], ky], g, p))
                .collect::<Result<Vec<f64>>>()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(PhaseMap {
        axis,
        values: rows.concat(),
    })
}

/// Output of the four neighboring-pump processes at low excitation.
#[derive(Clone, Debug, PartialEq)]
pub struct EmittedState {
    pub idler_wavevector: WaveVector,
    pub signal_wavevectors: [WaveVector; 4],
    /// `(1/2)|1⟩_i (|1⟩_s1 + … + |1⟩_s4)` with the idler as mode 0.
    pub with_idler: PureState,
    /// Idler-traced signal state, the equal-weight four-mode W state.
    pub signals: PureState,
}

impl EmittedState {
    pub fn signal_density(&self) -> DensityOperator {
        self.signals.projector()
    }
}

/// Normalized emitted state for equal pump amplitudes. The overall
/// `V_{k_p} P² t` prefactor is dropped.
pub fn emitted_signal_state(g: &PumpGeometry) -> Result<EmittedState> {
    g.validate()?;
    let signal_wavevectors = g.signal_wavevectors();
    let half = Complex64::new(0.5, 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << 5];
    for s in 1..5 {
        let mut occ = [0u8; 5];
        occ[0] = 1;
        occ[s] = 1;
        amplitudes[crate::fockstate::basis_index(&occ)?] = half;
    }
    let with_idler = PureState::normalized_from(5, amplitudes)?;
    // The idler factorizes, so the reduction is pure: read the signal block
    // conditioned on one idler photon.
    let signals = PureState::single_excitation(&[half; 4])?;
    Ok(EmittedState {
        idler_wavevector: [0.0, 0.0],
        signal_wavevectors,
        with_idler,
        signals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> CavityParams {
        CavityParams::default()
    }

    #[test]
    fn photon_dispersion_values() {
        let p = defaults();
        assert_eq!(photon_dispersion(0.0, &p).unwrap(), 1.5);
        assert!((photon_dispersion(0.02, &p).unwrap() - 1.5 * 1.0004f64.sqrt()).abs() < 1e-15);
        let big = 1e6;
        assert!((photon_dispersion(big, &p).unwrap() / (1.5 * big) - 1.0).abs() < 1e-12);
        assert!(photon_dispersion(-0.1, &p).is_err());
    }

    #[test]
    fn polariton_branches() {
        let p = defaults();
        for &k in &[0.0, 0.005, 0.02, 0.1, 1.0] {
            let (e1, e2) = polariton_dispersions(k, &p).unwrap();
            let ec = photon_dispersion(k, &p).unwrap();
            assert!(((e1 + e2) - (ec + p.e_x)).abs() < 1e-14);
            assert!(e1 <= e2);
        }
        // resonance at k = 0 for the defaults
        let (e1, e2) = polariton_dispersions(0.0, &p).unwrap();
        assert!((e2 - e1 - 2.0 * p.omega_r).abs() < 1e-15);
        // far detuned: branches approach the bare modes
        let (e1, e2) = polariton_dispersions(10.0, &p).unwrap();
        let ec = photon_dispersion(10.0, &p).unwrap();
        assert!((e1 - p.e_x).abs() < 1e-6 && (e2 - ec).abs() < 1e-6);
    }

    #[test]
    fn anticrossing_gap_minimum() {
        // detuned so that resonance happens at finite k
        let p = CavityParams {
            e_x: 1.5 * 1.01f64.sqrt(),
            ..defaults()
        };
        let k_res = 0.1;
        let gap = |k: f64| {
            let (a, b) = polariton_dispersions(k, &p).unwrap();
            b - a
        };
        assert!((gap(k_res) - 2.0 * p.omega_r).abs() < 1e-12);
        for i in 0..200 {
            assert!(gap(i as f64 * 0.001) >= 2.0 * p.omega_r - 1e-15);
        }
    }

    #[test]
    fn hopfield_limits() {
        let p = defaults();
        let m = hopfield_coefficients(0.0, &p).unwrap();
        assert!((m[(0, 0)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let far = hopfield_coefficients(50.0, &p).unwrap();
        assert!((far[(0, 0)] - 1.0).abs() < 1e-9);
        for i in 0..=1000 {
            let m = hopfield_coefficients(i as f64 * 0.01, &p).unwrap();
            assert!((m.transpose() * m - Matrix2::identity()).norm() < 1e-12);
            assert_eq!(m[(1, 1)], m[(0, 0)]);
            assert_eq!(m[(1, 0)], -m[(0, 1)]);
        }
    }

    #[test]
    fn potential_limits() {
        let zero_ps = CavityParams {
            p_s: Some(0.0),
            ..defaults()
        };
        let v = effective_potential(&zero_ps).unwrap();
        let m11 = |k: f64| hopfield_coefficients(k, &zero_ps).unwrap()[(0, 0)];
        let want = 12.0 * m11(0.0) * m11(0.02) * m11(std::f64::consts::SQRT_2 * 0.01).powi(2);
        assert!((v - want).abs() < 1e-14, "{v} vs {want}");
        // deep exciton-like limit: E_X far below the photon
        let excitonic = CavityParams {
            e_x: 1.0,
            p_s: Some(0.0),
            ..defaults()
        };
        // residual photon fraction is about (Ω_R / δ)², δ = 0.5 eV
        assert!((effective_potential(&excitonic).unwrap() - 12.0).abs() < 1e-3);
    }

    #[test]
    fn simplified_potential_matches_branch_potential() {
        let p = CavityParams {
            e_b: Some(0.01),
            ..defaults()
        };
        let g = PumpGeometry::square(p.k_p);
        let v = effective_potential(&p).unwrap();
        assert!(v.is_finite());
        for n in 0..4 {
            let m = (n + 1) % 4;
            let (kn, km) = (g.pumps[n], g.pumps[m]);
            let general = branch_potential(kn, km, [-kn[0], -kn[1]], [0, 0, 0, 0], &p).unwrap();
            assert!((general - v).abs() < 1e-13, "pair {n}{m}: {general} vs {v}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(CavityParams {
            gamma: 0.0,
            ..defaults()
        }
        .validate()
        .is_err());
        assert!(CavityParams {
            e_b: Some(0.01),
            p_s: Some(1.0),
            ..defaults()
        }
        .validate()
        .is_err());
        let p = CavityParams {
            e_b: Some(0.01),
            ..defaults()
        };
        assert!((p.splitting_ratio() - 0.4).abs() < 1e-15);
        assert_eq!(defaults().splitting_ratio(), 4e-3);
    }

    #[test]
    fn phase_matching_bounds_and_symmetry() {
        let p = defaults();
        let g = PumpGeometry::square(p.k_p);
        for &k in &[[0.0, 0.0], [0.0, 0.02], [0.013, -0.004], [0.03, 0.03]] {
            let phi = phase_matching(k, &g, &p).unwrap();
            assert!(phi > 0.0 && phi <= 16.0);
            let rotated = phase_matching([-k[1], k[0]], &g, &p).unwrap();
            assert!((phi - rotated).abs() < 1e-12 * phi.max(1.0));
        }
        // single-pump process at k = k_p1 is perfectly matched
        let at_pump = phase_matching(g.pumps[0], &g, &p).unwrap();
        assert!(at_pump >= 1.0);
    }

    #[test]
    fn signals_are_neighbor_sums() {
        let g = PumpGeometry::square(0.01);
        let s = g.signal_wavevectors();
        let want = [[0.0, 0.02], [-0.02, 0.0], [0.0, -0.02], [0.02, 0.0]];
        for (a, b) in s.iter().zip(&want) {
            assert!((a[0] - b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        }
        assert!(PumpGeometry::new([[0.01, 0.0], [0.0, 0.02], [0.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn emitted_state_reduces_to_w4() {
        let out = emitted_signal_state(&PumpGeometry::square(0.01)).unwrap();
        let reduced = out.with_idler.projector().partial_trace(&[0]).unwrap();
        assert!((reduced.matrix() - out.signal_density().matrix()).norm() < 1e-15);
        assert!((reduced.purity() - 1.0).abs() < 1e-15);
        for occ in [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] {
            let idx = crate::fockstate::basis_index(&occ).unwrap();
            assert_eq!(out.signals.amplitude(idx), Complex64::new(0.5, 0.0));
        }
    }
}
