//! Brute-force maximization of `⟨ψ|L|ψ⟩` over product states `|ψ_1⟩⊗…⊗|ψ_K⟩`
//! whose factors live on the blocks of a mode partition.
//!
//! Each start draws random complex factors (or, for small systems, a
//! computational-basis product state), then sweeps the blocks, replacing
//! each factor by the top eigenvector of the operator reduced on that block
//! with the other factors held fixed. Every update is an exact maximization
//! over one block, so the value never decreases, and a fixed point solves the
//! separability eigenvalue equations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::exec::Exec;
use crate::fockstate::{embed_table, DensityOperator, PureState, HERMITIAN_TOL};
use crate::partition::ModePartition;
use crate::witness::{coarsest_partitions, TIE_TOL};
use crate::{Error, Result};

/// Top eigenvalues closer than this are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Random starts per block; a `K`-block partition gets `K` times this many.
    pub starts_per_block: usize,
    pub max_rounds: usize,
    /// A start stops once a full sweep changes neither the value nor any
    /// factor by more than this.
    pub tol: f64,
    pub seed: u64,
    /// Also start from every computational-basis product state when the
    /// system has at most this many modes.
    pub basis_starts_up_to: usize,
    pub exec: Exec,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            starts_per_block: 64,
            max_rounds: 500,
            tol: 1e-12,
            seed: 0x5eed,
            basis_starts_up_to: 10,
            exec: Exec::default(),
        }
    }
}

/// Normalized factors on the blocks of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    partition: ModePartition,
    factors: Vec<DVector<Complex64>>,
}

impl ProductState {
    /// Normalizes each factor; factor `b` has dimension `2^|block b|` with the
    /// block's first mode as the most significant bit.
    pub fn new(partition: ModePartition, factors: Vec<DVector<Complex64>>) -> Result<Self> {
        if factors.len() != partition.n_blocks() {
            return Err(Error::DimensionMismatch {
                expected: partition.n_blocks(),
                found: factors.len(),
            });
        }
        let factors = factors
            .into_iter()
            .zip(partition.blocks())
            .map(|(f, block)| {
                let dim = 1 << block.len();
                if f.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: f.len(),
                    });
                }
                let norm = f.norm();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(Error::NotNormalized(norm * norm));
                }
                Ok(f / Complex64::new(norm, 0.0))
            })
            .collect::<Result<_>>()?;
        Ok(Self { partition, factors })
    }

    /// One mode per block with factor `r|0⟩ + √(1-r²)|1⟩`.
    pub fn from_r(r: &[f64]) -> Result<Self> {
        let factors = r
            .iter()
            .map(|&ri| {
                DVector::from_vec(vec![
                    Complex64::new(ri, 0.0),
                    Complex64::new((1.0 - ri * ri).max(0.0).sqrt(), 0.0),
                ])
            })
            .collect();
        Self::new(ModePartition::singletons(r.len()), factors)
    }

    pub fn partition(&self) -> &ModePartition {
        &self.partition
    }

    pub fn factors(&self) -> &[DVector<Complex64>] {
        &self.factors
    }

    /// The product as a state on all modes.
    pub fn to_pure_state(&self) -> Result<PureState> {
        let n = self.partition.n_modes();
        let layout = Layout::new(&self.partition);
        let amps = (0..1usize << n).map(|idx| layout.product_amplitude(&self.factors, idx, None));
        PureState::new(n, amps.collect())
    }

    /// Rotates each factor so that its largest component (first on ties) is
    /// real and positive.
    fn gauge_fixed(mut self) -> Self {
        for f in &mut self.factors {
            let top = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if let Some(c) = f.iter().find(|c| c.norm() >= top - 1e-12) {
                let phase = c.conj() / c.norm();
                *f *= phase;
            }
        }
        self
    }

    fn flattened(&self) -> Vec<f64> {
        self.factors
            .iter()
            .flat_map(|f| f.iter().flat_map(|c| [c.re, c.im]))
            .collect()
    }
}

/// Index bookkeeping for a partition.
struct Layout {
    n_modes: usize,
    /// `embed[b][i]`: full index of local configuration `i` of block `b`.
    embed: Vec<Vec<usize>>,
    /// `local[b][idx]`: local configuration of block `b` inside full index `idx`.
    local: Vec<Vec<usize>>,
    /// `complement[b]`: full indices of the configurations of the other modes.
    complement: Vec<Vec<usize>>,
}

impl Layout {
    fn new(partition: &ModePartition) -> Self {
        let n = partition.n_modes();
        let embed: Vec<Vec<usize>> = partition
            .blocks()
            .iter()
            .map(|b| embed_table(b, n))
            .collect();
        let local = embed
            .iter()
            .map(|table| {
                let mask = table.last().copied().unwrap_or(0);
                let mut inverse = vec![0; 1 << n];
                for (idx, slot) in inverse.iter_mut().enumerate() {
                    *slot = table.iter().position(|&e| e == idx & mask).unwrap_or(0);
                }
                inverse
            })
            .collect();
        let complement = partition
            .blocks()
            .iter()
            .map(|b| {
                let rest: Vec<usize> = (0..n).filter(|m| !b.contains(m)).collect();
                if rest.is_empty() {
                    vec![0]
                } else {
                    embed_table(&rest, n)
                }
            })
            .collect();
        Self {
            n_modes: n,
            embed,
            local,
            complement,
        }
    }

    fn product_amplitude(
        &self,
        factors: &[DVector<Complex64>],
        idx: usize,
        skip: Option<usize>,
    ) -> Complex64 {
        factors
            .iter()
            .enumerate()
            .filter(|(b, _)| Some(*b) != skip)
            .map(|(b, f)| f[self.local[b][idx]])
            .product()
    }

    /// `⟨φ_rest| L |φ_rest⟩` on block `b`.
    fn reduced(
        &self,
        l: &DMatrix<Complex64>,
        factors: &[DVector<Complex64>],
        b: usize,
    ) -> DMatrix<Complex64> {
        let comp = &self.complement[b];
        let emb = &self.embed[b];
        let phi: Vec<Complex64> = comp
            .iter()
            .map(|&c| self.product_amplitude(factors, c, Some(b)))
            .collect();
        let d = emb.len();
        let dim = 1usize << self.n_modes;
        // v[j] = L (|j⟩_b ⊗ |φ⟩) as a full vector
        let columns: Vec<Vec<Complex64>> = emb
            .iter()
            .map(|&ej| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                for (&cy, &py) in comp.iter().zip(&phi) {
                    if py == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let col = ej | cy;
                    for (row, slot) in v.iter_mut().enumerate() {
                        *slot += l[(row, col)] * py;
                    }
                }
                v
            })
            .collect();
        let m = DMatrix::from_fn(d, d, |i, j| {
            comp.iter()
                .zip(&phi)
                .map(|(&cx, px)| px.conj() * columns[j][emb[i] | cx])
                .sum()
        });
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

fn expectation_dense(l: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> f64 {
    psi.dotc(&(l * psi)).re
}

fn check_operator(l: &DensityOperator, partition: &ModePartition) -> Result<()> {
    if partition.n_modes() != l.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: l.n_modes(),
            found: partition.n_modes(),
        });
    }
    l.check_hermitian(HERMITIAN_TOL.max(1e-10 * l.matrix().norm()))
}

/// `⟨ψ|L|ψ⟩` for a product state.
pub fn product_expectation(l: &DensityOperator, state: &ProductState) -> Result<f64> {
    check_operator(l, state.partition())?;
    Ok(expectation_dense(
        l.matrix(),
        state.to_pure_state()?.amplitudes(),
    ))
}

/// `max_b ‖L_b|ψ_b⟩ - g|ψ_b⟩‖` with `g = ⟨ψ|L|ψ⟩` and `L_b` the operator
/// reduced on block `b`.
pub fn stationarity_residual(l: &DensityOperator, state: &ProductState) -> Result<f64> {
    check_operator(l, state.partition())?;
    let layout = Layout::new(state.partition());
    let g = expectation_dense(l.matrix(), state.to_pure_state()?.amplitudes());
    Ok((0..state.factors.len())
        .map(|b| {
            let lb = layout.reduced(l.matrix(), &state.factors, b);
            let f = &state.factors[b];
            (&lb * f - f * Complex64::new(g, 0.0)).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub value: f64,
    pub certificate: ProductState,
    pub residual: f64,
    pub rounds: usize,
    pub start: usize,
}

/// Top eigenvector of a Hermitian block operator; on a degenerate top
/// eigenvalue the previous factor is projected onto the top eigenspace.
fn top_eigenvector(m: DMatrix<Complex64>, previous: &DVector<Complex64>) -> DVector<Complex64> {
    let eig = SymmetricEigen::new(m);
    let top = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let space: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= top - DEGENERACY_TOL)
        .collect();
    if space.len() > 1 {
        let mut proj = DVector::zeros(previous.len());
        for &i in &space {
            let v = eig.eigenvectors.column(i);
            proj += v * v.dotc(previous);
        }
        let norm = proj.norm();
        if norm > 1e-8 {
            return proj / Complex64::new(norm, 0.0);
        }
    }
    let best = space
        .iter()
        .copied()
        .max_by(|&a, &b| {
            eig.eigenvalues[a]
                .total_cmp(&eig.eigenvalues[b])
                .then(b.cmp(&a))
        })
        .expect("nonempty spectrum");
    eig.eigenvectors.column(best).into_owned()
}

fn random_factor(rng: &mut ChaCha8Rng, dim: usize) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Start `s < random` draws random factors; later starts are the basis
/// product states `|s - random⟩`.
fn initial_factors(
    layout: &Layout,
    partition: &ModePartition,
    cfg: &OracleConfig,
    random: usize,
    start: usize,
) -> Vec<DVector<Complex64>> {
    if start < random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(start as u64);
        partition
            .blocks()
            .iter()
            .map(|b| random_factor(&mut rng, 1 << b.len()))
            .collect()
    } else {
        let idx = start - random;
        partition
            .blocks()
            .iter()
            .enumerate()
            .map(|(b, block)| {
                let mut f = DVector::zeros(1 << block.len());
                f[layout.local[b][idx]] = Complex64::new(1.0, 0.0);
                f
            })
            .collect()
    }
}

fn run_start(
    l: &DMatrix<Complex64>,
    layout: &Layout,
    mut factors: Vec<DVector<Complex64>>,
    cfg: &OracleConfig,
) -> (f64, Vec<DVector<Complex64>>, usize) {
    let mut value = f64::NEG_INFINITY;
    let mut rounds = 0;
    while rounds < cfg.max_rounds {
        rounds += 1;
        let mut moved = 0.0f64;
        for b in 0..factors.len() {
            let lb = layout.reduced(l, &factors, b);
            let mut next = top_eigenvector(lb, &factors[b]);
            // align the phase with the previous factor before measuring the move
            let overlap = next.dotc(&factors[b]);
            if overlap.norm() > 0.0 {
                next *= overlap / overlap.norm();
            }
            moved = moved.max((&next - &factors[b]).norm());
            factors[b] = next;
        }
        let psi_amps: Vec<Complex64> = (0..1usize << layout.n_modes)
            .map(|i| layout.product_amplitude(&factors, i, None))
            .collect();
        let next_value = expectation_dense(l, &DVector::from_vec(psi_amps));
        let change = (next_value - value).abs();
        value = next_value;
        if change.max(moved) < cfg.tol {
            break;
        }
    }
    (value, factors, rounds)
}

/// Largest `⟨ψ|L|ψ⟩` found over product states along `partition`, with the
/// optimizing product state. A lower bound on the supremum in general.
pub fn max_product_expectation(
    l: &DensityOperator,
    partition: &ModePartition,
    cfg: &OracleConfig,
) -> Result<OracleOutcome> {
    check_operator(l, partition)?;
    let layout = Layout::new(partition);
    let random = (cfg.starts_per_block * partition.n_blocks()).max(1);
    let basis = if l.n_modes() <= cfg.basis_starts_up_to {
        l.dim()
    } else {
        0
    };
    let runs = cfg.exec.map(random + basis, |s| {
        let start = initial_factors(&layout, partition, cfg, random, s);
        run_start(l.matrix(), &layout, start, cfg)
    });
    let best = runs.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<(usize, ProductState)> = None;
    for (s, (value, factors, _)) in runs.iter().enumerate() {
        if *value < best - TIE_TOL {
            continue;
        }
        let cert = ProductState::new(partition.clone(), factors.clone())?.gauge_fixed();
        let smaller = match &chosen {
            None => true,
            Some((_, c)) => {
                cert.flattened()
                    .iter()
                    .zip(c.flattened())
                    .map(|(a, b)| a.total_cmp(&b))
                    .find(|o| o.is_ne())
                    == Some(std::cmp::Ordering::Less)
            }
        };
        if smaller {
            chosen = Some((s, cert));
        }
    }
    let (start, certificate) = chosen.expect("at least one start");
    let value = runs[start].0;
    let residual = stationarity_residual(l, &certificate)?;
    Ok(OracleOutcome {
        value,
        certificate,
        residual,
        rounds: runs[start].2,
        start,
    })
}

/// Oracle maximum over several partitions; the reported partition is the
/// first within [`TIE_TOL`] of the maximum.
pub fn max_over_partitions(
    l: &DensityOperator,
    partitions: &[ModePartition],
    cfg: &OracleConfig,
) -> Result<(ModePartition, OracleOutcome)> {
    let outcomes: Vec<OracleOutcome> = partitions
        .iter()
        .map(|p| max_product_expectation(l, p, cfg))
        .collect::<Result<_>>()?;
    let best = outcomes
        .iter()
        .map(|o| o.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let idx = outcomes
        .iter()
        .position(|o| o.value >= best - TIE_TOL)
        .ok_or(Error::NoAdmissiblePartition {
            n_modes: l.n_modes(),
            min_blocks: 2,
        })?;
    Ok((partitions[idx].clone(), outcomes[idx].clone()))
}

/// Oracle estimate of `f_full(L)`.
pub fn f_full(l: &DensityOperator, cfg: &OracleConfig) -> Result<OracleOutcome> {
    max_product_expectation(l, &ModePartition::singletons(l.n_modes()), cfg)
}

/// Oracle estimate of `f_part(L)` with `forced_singletons` always separated.
///
/// Product states along a partition are also product states along any
/// coarsening of it, so only the coarsest admissible partitions are searched.
pub fn f_part(
    l: &DensityOperator,
    forced_singletons: &[usize],
    cfg: &OracleConfig,
) -> Result<(ModePartition, OracleOutcome)> {
    let partitions = coarsest_partitions(l.n_modes(), forced_singletons)?;
    if partitions.is_empty() {
        return Err(Error::NoAdmissiblePartition {
            n_modes: l.n_modes(),
            min_blocks: 2,
        });
    }
    max_over_partitions(l, &partitions, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub value: f64,
    pub residual: f64,
    pub partition: String,
    /// Per block: `[re, im]` amplitudes in the block's local basis.
    pub factors: Vec<Vec<[f64; 2]>>,
}

impl From<&OracleOutcome> for CertificateReport {
    fn from(o: &OracleOutcome) -> Self {
        Self {
            value: o.value,
            residual: o.residual,
            partition: o.certificate.partition().to_string(),
            factors: o
                .certificate
                .factors()
                .iter()
                .map(|f| f.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::WWeights;
    use proptest::prelude::*;

    fn w4() -> DensityOperator {
        WWeights::from_moduli(&[0.5; 4])
            .unwrap()
            .operator()
            .unwrap()
    }

    #[test]
    fn w4_full_separability_bound() {
        let out = f_full(&w4(), &OracleConfig::default()).unwrap();
        assert!((out.value - 27.0 / 64.0).abs() < 1e-10, "{}", out.value);
        assert!(out.residual < 1e-9, "residual {}", out.residual);
        for f in out.certificate.factors() {
            assert!((f[0].re - 3f64.sqrt() / 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn w4_bipartition_bound() {
        let p = ModePartition::parse("123:4", 4).unwrap();
        let out = max_product_expectation(&w4(), &p, &OracleConfig::default()).unwrap();
        assert!((out.value - 0.75).abs() < 1e-10);
        assert!(out.residual < 1e-9);
    }

    #[test]
    fn w4_partial_separability_bound() {
        let (p, out) = f_part(&w4(), &[], &OracleConfig::default()).unwrap();
        assert!((out.value - 0.75).abs() < 1e-10);
        assert_eq!(p.to_string(), "123:4");
    }

    #[test]
    fn flat_boundary_maximum_is_found() {
        // block masses (1/2, 1/4, 1/4) sit on the switch of the one-different-weight law
        let p = ModePartition::parse("12:3:4", 4).unwrap();
        let out = max_product_expectation(&w4(), &p, &OracleConfig::default()).unwrap();
        assert!((out.value - 0.5).abs() < 1e-12, "{}", out.value);
    }

    #[test]
    fn analytic_optimizer_is_stationary() {
        let state = ProductState::from_r(&[3f64.sqrt() / 2.0; 4]).unwrap();
        assert!(stationarity_residual(&w4(), &state).unwrap() < 1e-12);
        assert!((product_expectation(&w4(), &state).unwrap() - 27.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn random_product_is_not_stationary() {
        let state = ProductState::from_r(&[0.3, 0.9, 0.5, 0.7]).unwrap();
        assert!(stationarity_residual(&w4(), &state).unwrap() > 1e-3);
    }

    #[test]
    fn reproducible_and_policy_independent() {
        let l = WWeights::from_moduli(&[0.6, 0.48, 0.64])
            .unwrap()
            .operator()
            .unwrap();
        let p = ModePartition::singletons(3);
        let seq = OracleConfig {
            exec: Exec::Sequential,
            ..Default::default()
        };
        let par = OracleConfig {
            exec: Exec::Parallel,
            ..Default::default()
        };
        let a = max_product_expectation(&l, &p, &seq).unwrap();
        let b = max_product_expectation(&l, &p, &par).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.certificate, b.certificate);
    }

    #[test]
    fn rejects_bad_input() {
        let p = ModePartition::singletons(3);
        assert!(max_product_expectation(&w4(), &p, &OracleConfig::default()).is_err());
        let mut m = w4().matrix().clone();
        m[(1, 2)] += Complex64::new(0.1, 0.0);
        let bad = DensityOperator::new(4, m).unwrap();
        assert!(f_full(&bad, &OracleConfig::default()).is_err());
    }

    #[test]
    fn product_state_round_trip() {
        let p = ModePartition::parse("13:2", 3).unwrap();
        let f0 = DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let f1 = DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let s = ProductState::new(p, vec![f0, f1])
            .unwrap()
            .to_pure_state()
            .unwrap();
        // modes (1,3) = |01⟩, mode 2 = |1⟩ → |011⟩
        let idx = crate::fockstate::basis_index(&[0, 1, 1]).unwrap();
        assert!((s.amplitude(idx) - Complex64::new(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-15);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn sweeps_never_decrease(seed in 0u64..1000, raw in proptest::collection::vec(0.05f64..1.0, 3)) {
            let l = WWeights::normalized(raw.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .unwrap().operator().unwrap();
            let p = ModePartition::singletons(3);
            let layout = Layout::new(&p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut factors: Vec<DVector<Complex64>> = (0..3).map(|_| random_factor(&mut rng, 2)).collect();
            let value = |f: &[DVector<Complex64>]| {
                let amps: Vec<Complex64> = (0..8).map(|i| layout.product_amplitude(f, i, None)).collect();
                expectation_dense(l.matrix(), &DVector::from_vec(amps))
            };
            let mut last = value(&factors);
            for _ in 0..5 {
                for b in 0..3 {
                    let lb = layout.reduced(l.matrix(), &factors, b);
                    factors[b] = top_eigenvector(lb, &factors[b]);
                    let v = value(&factors);
                    prop_assert!(v >= last - 1e-14);
                    last = v;
                }
            }
        }
    }
}
