//! Separability eigenvalues of the generalized W-state witness
//! `L = |W_N⟩⟨W_N|`, `|W_N⟩ = Σ_i λ_i |0…1_i…0⟩`.
//!
//! After the phases are maximized out, the largest separability eigenvalue
//! over fully separable states is the maximum over `r ∈ [0,1]^K` of
//!
//! ```text
//! g(r) = ( Σ_i w_i √(1 - r_i²) Π_{j≠i} r_j )²,    w_i = |λ_i|.
//! ```
//!
//! Any partition into `K` blocks reduces to the same problem with `w_n`
//! replaced by the square root of the block mass `M_n = Σ_{m ∈ n} |λ_m|²`.
//!
//! [`max_g`] is exact up to root-finding precision. It compares the boundary
//! values `w_i²` against every interior stationary point on every face of
//! the hypercube. Stationary points solve `w_n = x_n Σ_{i≠n} w_i x_i` with
//! `x_n = √(1 - r_n²) / r_n`; writing `S = Σ_i w_i x_i` turns each equation
//! into the quadratic `y_n² - S y_n + w_n² = 0` for `y_n = w_n x_n`. At most
//! one mode can sit on the `+` root (two of them would already sum past `S`),
//! so the stationary set is the union of the roots of `K + 1` scalar
//! self-consistency equations in `S ≥ 2 max w`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exec::Exec;
use crate::fockstate::{DensityOperator, PureState};
use crate::optim::NelderMead;
use crate::partition::{bipartitions, enumerate_partitions, ModePartition};
use crate::{Error, Result};

pub const WEIGHT_NORM_TOL: f64 = 1e-12;
/// Values within this distance count as tied when choosing a certificate.
pub const TIE_TOL: f64 = 1e-12;
/// A witness test `Tr ρL > f` passes only when `Tr ρL > f + DETECTION_TOL`,
/// so rounding never turns an equality into a detection.
pub const DETECTION_TOL: f64 = 1e-12;

/// Strict witness test `trace > bound`, up to [`DETECTION_TOL`].
pub fn detects(trace: f64, bound: f64) -> bool {
    trace > bound + DETECTION_TOL
}

/// Weights `λ_i` of a generalized `N`-mode W state, `Σ|λ_i|² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WWeights {
    lambda: Vec<Complex64>,
}

impl WWeights {
    pub fn new(lambda: Vec<Complex64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidWeights("no modes".into()));
        }
        if lambda
            .iter()
            .any(|l| !l.re.is_finite() || !l.im.is_finite())
        {
            return Err(Error::InvalidWeights("non-finite weight".into()));
        }
        let norm: f64 = lambda.iter().map(|l| l.norm_sqr()).sum();
        if (norm - 1.0).abs() > WEIGHT_NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { lambda })
    }

    pub fn from_moduli(moduli: &[f64]) -> Result<Self> {
        if moduli.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidWeights("negative modulus".into()));
        }
        Self::new(moduli.iter().map(|&m| Complex64::new(m, 0.0)).collect())
    }

    /// Rescales arbitrary nonzero weights to unit norm.
    pub fn normalized(lambda: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = lambda.iter().map(|l| l.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidWeights("zero or non-finite norm".into()));
        }
        Self::new(lambda.into_iter().map(|l| l / norm).collect())
    }

    pub fn n_modes(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l.norm()).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.lambda.iter().map(|l| l.norm_sqr()).collect()
    }

    pub fn state(&self) -> Result<PureState> {
        PureState::single_excitation(&self.lambda)
    }

    /// `|W_N⟩⟨W_N|`.
    pub fn operator(&self) -> Result<DensityOperator> {
        Ok(self.state()?.projector())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeSource {
    /// A single mode excited: `r_k = 0`, all others `1`.
    Boundary,
    /// Root of the stationarity equations on the face spanned by `active`.
    InteriorStationary,
    /// Best point of the multi-start ascent.
    MultiStart,
}

/// Largest separability eigenvalue and the point attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeOutcome {
    pub g_max: f64,
    /// `r_i` (amplitude of `|0⟩` in the optimal product state) per weight.
    pub optimizer: Vec<f64>,
    pub source: SeSource,
    /// Coordinates strictly inside `(0,1)` for interior points, the excited
    /// mode for boundary points.
    pub active: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiStartPolicy {
    Never,
    /// Only when faces are not enumerated (more than `face_limit` nonzero weights).
    Auto,
    Always,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Grid points of the sign-change scan in `S`.
    pub scan_points: usize,
    /// Enumerate every face of the hypercube up to this many nonzero weights.
    pub face_limit: usize,
    pub multistart: MultiStartPolicy,
    pub starts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scan_points: DEFAULT_SCAN_POINTS,
            face_limit: 12,
            multistart: MultiStartPolicy::Auto,
            starts: 64,
            seed: 0x5e_ed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WitnessConfig {
    pub solver: SolverConfig,
    /// Up to this many modes `f_part` enumerates every partition; above it,
    /// only the coarsest admissible ones (bipartitions of the free modes).
    pub full_enumeration_limit: usize,
    pub force_full_enumeration: bool,
    pub exec: Exec,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            full_enumeration_limit: 8,
            force_full_enumeration: false,
            exec: Exec::default(),
        }
    }
}

/// `g(r)` for weights `w`.
pub fn g_value(w: &[f64], r: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), r.len());
    let k = w.len();
    // prefix[i] = Π_{j<i} r_j, suffix[i] = Π_{j>i} r_j
    let mut prefix = vec![1.0; k + 1];
    for i in 0..k {
        prefix[i + 1] = prefix[i] * r[i];
    }
    let mut suffix = 1.0;
    let mut sum = 0.0;
    for i in (0..k).rev() {
        sum += w[i] * (1.0 - r[i] * r[i]).max(0.0).sqrt() * prefix[i] * suffix;
        suffix *= r[i];
    }
    sum * sum
}

/// Largest `|w_n - x_n Σ_{i≠n} w_i x_i|` over the modes with `r_n ∈ (0,1)`.
pub fn stationarity_residual(w: &[f64], r: &[f64]) -> f64 {
    let x: Vec<f64> = r
        .iter()
        .map(|&ri| {
            if ri > 0.0 && ri < 1.0 {
                (1.0 - ri * ri).sqrt() / ri
            } else {
                0.0
            }
        })
        .collect();
    let s: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
    (0..w.len())
        .filter(|&n| r[n] > 0.0 && r[n] < 1.0)
        .map(|n| (w[n] - x[n] * (s - w[n] * x[n])).abs())
        .fold(0.0, f64::max)
}

fn validate_unit_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let norm: f64 = w.iter().map(|x| x * x).sum();
    if (norm - 1.0).abs() > WEIGHT_NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// `y⁻ = (S - √(S² - 4w²)) / 2` in cancellation-free form.
#[inline]
fn minus_root(s: f64, w: f64) -> f64 {
    2.0 * w * w / (s + (s * s - 4.0 * w * w).max(0.0).sqrt())
}

const SCAN_T_MAX: f64 = 16.0;
const DEFAULT_SCAN_POINTS: usize = 512;

fn build_scan_table(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (SCAN_T_MAX * j as f64 / (n - 1) as f64).cosh())
        .collect()
}

/// `cosh t_j` on the scan grid; the default size is built once.
fn scan_table(scan_points: usize) -> Cow<'static, [f64]> {
    static DEFAULT: OnceLock<Vec<f64>> = OnceLock::new();
    let n = scan_points.max(8);
    if n == DEFAULT_SCAN_POINTS {
        Cow::Borrowed(DEFAULT.get_or_init(|| build_scan_table(n)))
    } else {
        Cow::Owned(build_scan_table(n))
    }
}

/// Illinois (modified regula falsi) root of `f` on `[a, b]` with `f(a) f(b) < 0`.
fn illinois<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
            break;
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if (fc < 0.0) == (fb < 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Interior stationary points (as `r` vectors) of `g` for strictly positive
/// weights `v`, found on the curve `S = 2 max(v) cosh t`.
fn stationary_points(v: &[f64], cosh_table: &[f64]) -> Vec<Vec<f64>> {
    let m = v.len();
    let s0 = 2.0 * v.iter().cloned().fold(0.0, f64::max);
    // branch None: every mode on the minus root; Some(k): mode k on the plus root
    let residual = |branch: Option<usize>, s: f64| -> f64 {
        let sum: f64 = v.iter().map(|&w| minus_root(s, w)).sum();
        match branch {
            None => sum - s,
            Some(k) => sum - 2.0 * minus_root(s, v[k]),
        }
    };

    let n = cosh_table.len();
    let ss: Vec<f64> = cosh_table.iter().map(|c| s0 * c).collect();
    // table[b][j]: residual of branch b (0 = all minus, 1 + k = plus on k) at ss[j]
    let mut table = vec![vec![0.0; n]; m + 1];
    let mut ym = vec![0.0; m];
    for (j, &s) in ss.iter().enumerate() {
        for (y, &w) in ym.iter_mut().zip(v) {
            *y = minus_root(s, w);
        }
        let sum: f64 = ym.iter().sum();
        table[0][j] = sum - s;
        for k in 0..m {
            table[k + 1][j] = sum - 2.0 * ym[k];
        }
    }
    let mut points = Vec::new();
    for (b, vals) in table.iter().enumerate() {
        let branch = b.checked_sub(1);
        let to_r = |s: f64| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(i, &w)| {
                    let ym = minus_root(s, w);
                    let y = if branch == Some(i) { s - ym } else { ym };
                    let x = y / w;
                    1.0 / (1.0 + x * x).sqrt()
                })
                .collect()
        };
        for j in 0..n - 1 {
            if vals[j] == 0.0 {
                points.push(to_r(ss[j]));
            } else if vals[j] * vals[j + 1] < 0.0 {
                let s = illinois(
                    |s| residual(branch, s),
                    ss[j],
                    ss[j + 1],
                    vals[j],
                    vals[j + 1],
                );
                points.push(to_r(s));
            }
        }
        if vals[n - 1] == 0.0 {
            points.push(to_r(ss[n - 1]));
        }
    }
    points
}

fn multistart(w: &[f64], cfg: &SolverConfig) -> (Vec<f64>, f64) {
    let k = w.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let objective = |theta: &[f64]| {
        let r: Vec<f64> = theta.iter().map(|t| t.cos().abs()).collect();
        g_value(w, &r)
    };
    let nm = NelderMead::default();
    let mut best: (Vec<f64>, f64) = (vec![1.0; k], 0.0);
    for _ in 0..cfg.starts.max(1) {
        let start: Vec<f64> = (0..k)
            .map(|_| rng.random_range(0.0..std::f64::consts::FRAC_PI_2))
            .collect();
        let (theta, value) = nm.maximize(objective, &start);
        if value > best.1 {
            best = (theta.iter().map(|t| t.cos().abs()).collect(), value);
        }
    }
    best
}

/// Global maximum of `g(r)` over `[0,1]^K` for nonnegative unit-norm weights.
pub fn max_g(w: &[f64], cfg: &SolverConfig) -> Result<SeOutcome> {
    validate_unit_weights(w)?;
    let k = w.len();
    let nonzero: Vec<usize> = (0..k).filter(|&i| w[i] > 0.0).collect();

    let top = nonzero
        .iter()
        .copied()
        .fold(nonzero[0], |best, i| if w[i] > w[best] { i } else { best });
    let mut r = vec![1.0; k];
    r[top] = 0.0;
    let mut best = SeOutcome {
        g_max: g_value(w, &r),
        optimizer: r,
        source: SeSource::Boundary,
        active: vec![top],
    };
    if nonzero.len() < 2 {
        return Ok(best);
    }

    // On two weights the maximum is the larger mass (Schmidt decomposition),
    // already covered by the boundary value.
    let mut faces: Vec<Vec<usize>> = if nonzero.len() <= cfg.face_limit {
        (1usize..1 << nonzero.len())
            .filter(|mask| mask.count_ones() >= 3)
            .map(|mask| {
                (0..nonzero.len())
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| nonzero[b])
                    .collect()
            })
            .collect()
    } else if nonzero.len() >= 3 {
        vec![nonzero.clone()]
    } else {
        Vec::new()
    };
    // g ≤ Σ_face w_i², so heavy faces go first and light ones can be skipped.
    let mass = |face: &[usize]| face.iter().map(|&i| w[i] * w[i]).sum::<f64>();
    faces.sort_by(|a, b| mass(b).total_cmp(&mass(a)));
    let cosh_table = scan_table(cfg.scan_points);
    // Faces with the same weight multiset share their stationary points up to relabeling.
    let mut memo: HashMap<Vec<u64>, Vec<Vec<f64>>> = HashMap::new();
    for mut face in faces {
        if mass(&face) <= best.g_max {
            continue;
        }
        face.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
        let v: Vec<f64> = face.iter().map(|&i| w[i]).collect();
        let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        let points = memo
            .entry(key)
            .or_insert_with(|| stationary_points(&v, &cosh_table));
        for sub_r in points.iter() {
            let mut r = vec![1.0; k];
            for (&i, &ri) in face.iter().zip(sub_r) {
                r[i] = ri;
            }
            let g = g_value(w, &r);
            if g > best.g_max {
                best = SeOutcome {
                    g_max: g,
                    optimizer: r,
                    source: SeSource::InteriorStationary,
                    active: {
                        let mut a = face.clone();
                        a.sort_unstable();
                        a
                    },
                };
            }
        }
    }

    let run_multistart = match cfg.multistart {
        MultiStartPolicy::Never => false,
        MultiStartPolicy::Auto => nonzero.len() > cfg.face_limit,
        MultiStartPolicy::Always => true,
    };
    if run_multistart {
        let (r, g) = multistart(w, cfg);
        if g > best.g_max {
            let active = (0..k).filter(|&i| r[i] > 0.0 && r[i] < 1.0).collect();
            best = SeOutcome {
                g_max: g,
                optimizer: r,
                source: SeSource::MultiStart,
                active,
            };
        }
    }
    Ok(best)
}

/// Closed form for `N - 1` weights equal to `λ` and one equal to `λ'`.
///
/// Valid for `λ'/λ < √(N-1)`; otherwise no interior stationary point exists
/// and the value is `max(λ², λ'²)`.
pub fn one_diff_closed_form(n: usize, lam: f64, lam_prime: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidWeights(format!(
            "need at least two modes, got {n}"
        )));
    }
    if lam.is_nan() || lam_prime.is_nan() || lam < 0.0 || lam_prime < 0.0 {
        return Err(Error::InvalidWeights("weights must be nonnegative".into()));
    }
    let nm1 = (n - 1) as f64;
    let norm = nm1 * lam * lam + lam_prime * lam_prime;
    if (norm - 1.0).abs() > WEIGHT_NORM_TOL {
        return Err(Error::NotNormalized(norm));
    }
    if lam > 0.0 && lam_prime < lam * nm1.sqrt() {
        let l2 = lam * lam;
        let ratio = nm1 * (nm1 - 1.0) * l2 / (nm1 * nm1 * l2 - lam_prime * lam_prime);
        Ok(nm1 * l2 * ratio.powi(n as i32 - 2))
    } else {
        Ok((lam * lam).max(lam_prime * lam_prime))
    }
}

fn check_block(n_modes: usize, block: &[usize]) -> Result<Vec<bool>> {
    let mut inside = vec![false; n_modes];
    for &m in block {
        if m >= n_modes {
            return Err(Error::InvalidMode { index: m, n_modes });
        }
        inside[m] = true;
    }
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 || count == n_modes {
        return Err(Error::InvalidPartition(
            "block must be a nonempty proper subset".into(),
        ));
    }
    Ok(inside)
}

/// Largest separability eigenvalue across the bipartition `block | rest`:
/// `max(Σ_{block} |λ_i|², Σ_{rest} |λ_i|²)`.
pub fn bipartition_se(weights: &WWeights, block: &[usize]) -> Result<f64> {
    let inside = check_block(weights.n_modes(), block)?;
    let (a, b) = weights
        .masses()
        .iter()
        .zip(&inside)
        .fold(
            (0.0, 0.0),
            |(a, b), (&m, &i)| if i { (a + m, b) } else { (a, b + m) },
        );
    Ok(f64::max(a, b))
}

/// Block masses `M_n = Σ_{m ∈ block n} |λ_m|²`.
pub fn block_masses(weights: &WWeights, partition: &ModePartition) -> Result<Vec<f64>> {
    if partition.n_modes() != weights.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: weights.n_modes(),
            found: partition.n_modes(),
        });
    }
    let masses = weights.masses();
    Ok(partition
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&m| masses[m]).sum())
        .collect())
}

/// Largest separability eigenvalue for states separable along `partition`.
pub fn partition_se(
    weights: &WWeights,
    partition: &ModePartition,
    cfg: &SolverConfig,
) -> Result<SeOutcome> {
    let masses = block_masses(weights, partition)?;
    let total: f64 = masses.iter().sum();
    // Renormalize away rounding in the block sums; WWeights is unit-norm already.
    let w: Vec<f64> = masses.iter().map(|m| (m / total).sqrt()).collect();
    max_g(&w, cfg)
}

/// `f_full(L)`: supremum of `⟨L⟩` over fully separable states.
pub fn f_full(weights: &WWeights, cfg: &SolverConfig) -> Result<SeOutcome> {
    max_g(&weights.moduli(), cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionOutcome {
    pub value: f64,
    pub partition: ModePartition,
    pub outcome: SeOutcome,
}

/// Maximum of [`partition_se`] over `partitions`; the certificate is the
/// first partition within [`TIE_TOL`] of the maximum.
pub fn max_over_partitions(
    weights: &WWeights,
    partitions: &[ModePartition],
    cfg: &WitnessConfig,
) -> Result<PartitionOutcome> {
    let outcomes: Vec<SeOutcome> = cfg
        .exec
        .map_slice(partitions, |p| partition_se(weights, p, &cfg.solver))
        .into_iter()
        .collect::<Result<_>>()?;
    let best = outcomes
        .iter()
        .map(|o| o.g_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let idx = outcomes
        .iter()
        .position(|o| o.g_max >= best - TIE_TOL)
        .ok_or(Error::NoAdmissiblePartition {
            n_modes: weights.n_modes(),
            min_blocks: 2,
        })?;
    Ok(PartitionOutcome {
        value: outcomes[idx].g_max,
        partition: partitions[idx].clone(),
        outcome: outcomes[idx].clone(),
    })
}

/// Coarsest partial separations: bipartitions of the free modes, each forced
/// singleton kept as its own block.
pub fn coarsest_partitions(n_modes: usize, forced: &[usize]) -> Result<Vec<ModePartition>> {
    let mut forced = forced.to_vec();
    forced.sort_unstable();
    forced.dedup();
    if let Some(&index) = forced.iter().find(|&&m| m >= n_modes) {
        return Err(Error::InvalidMode { index, n_modes });
    }
    let free: Vec<usize> = (0..n_modes).filter(|m| !forced.contains(m)).collect();
    let mut out: Vec<ModePartition> = bipartitions(free.len())
        .into_iter()
        .map(|(a, b)| {
            let mut blocks = vec![
                a.iter().map(|&i| free[i]).collect::<Vec<_>>(),
                b.iter().map(|&i| free[i]).collect(),
            ];
            blocks.extend(forced.iter().map(|&m| vec![m]));
            ModePartition::new(n_modes, blocks)
                .and_then(|p| p.with_forced_singletons(&forced))
                .expect("valid by construction")
        })
        .collect();
    out.sort_by_cached_key(ModePartition::rgs);
    Ok(out)
}

/// `f_part(L)`: supremum of `⟨L⟩` over partially separable states, with the
/// modes in `forced_singletons` always separated.
pub fn f_part(
    weights: &WWeights,
    forced_singletons: &[usize],
    cfg: &WitnessConfig,
) -> Result<PartitionOutcome> {
    let n = weights.n_modes();
    let partitions = if cfg.force_full_enumeration || n <= cfg.full_enumeration_limit {
        if n < 2 {
            Vec::new()
        } else {
            enumerate_partitions(n, 2, forced_singletons)?
        }
    } else {
        coarsest_partitions(n, forced_singletons)?
    };
    if partitions.is_empty() {
        return Err(Error::NoAdmissiblePartition {
            n_modes: n,
            min_blocks: 2,
        });
    }
    max_over_partitions(weights, &partitions, cfg)
}

/// Sum of the `N - 1` largest `|λ_i|²`, the maximum of [`bipartition_se`].
pub fn largest_bipartition_se(weights: &WWeights) -> f64 {
    let masses = weights.masses();
    let smallest = masses.iter().cloned().fold(f64::INFINITY, f64::min);
    masses.iter().sum::<f64>() - smallest
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::OutOfDomain {
            name: "eta",
            value: eta,
            domain: "[0, 1]",
        });
    }
    Ok(())
}

/// `f_full` of the five-mode purification for equal efficiencies `η`.
pub fn closed_form_f_full_eta(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(if eta <= 0.5 {
        1.0 - eta
    } else {
        27.0 * eta.powi(4) / (5.0 * eta - 1.0).powi(3)
    })
}

/// `f_part` of the five-mode purification for equal efficiencies `η`, mode 5 separated.
pub fn closed_form_f_part_eta(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(if eta <= 0.5 {
        1.0 - eta
    } else if eta < 2.0 / 3.0 {
        3.0 * eta * eta * (eta - 1.0) / (13.0 * eta * eta - 16.0 * eta + 4.0)
    } else {
        0.75 * eta
    })
}
