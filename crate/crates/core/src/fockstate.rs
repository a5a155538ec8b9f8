//! Dense linear algebra on `N` modes with at most one photon per mode.
//!
//! Basis vectors are occupation bitstrings with mode 0 as the most significant
//! bit, so for four modes `|1,0,0,0⟩` sits at index 8 and `|0,0,0,1⟩` at 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard cap on the number of modes of a dense representation.
pub const MAX_MODES: usize = 12;
pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-10;
pub const IMAG_TOL: f64 = 1e-10;

fn check_modes(n_modes: usize) -> Result<()> {
    if n_modes == 0 || n_modes > MAX_MODES {
        return Err(Error::ModeCount(n_modes));
    }
    Ok(())
}

/// Bit mask selecting `mode` in an `n_modes` basis index.
#[inline]
pub fn mode_bit(mode: usize, n_modes: usize) -> usize {
    1 << (n_modes - 1 - mode)
}

/// Position of an occupation bitstring in the basis.
pub fn basis_index(occupations: &[u8]) -> Result<usize> {
    check_modes(occupations.len())?;
    occupations
        .iter()
        .enumerate()
        .try_fold(0usize, |acc, (position, &value)| match value {
            0 | 1 => Ok((acc << 1) | value as usize),
            _ => Err(Error::InvalidOccupation { position, value }),
        })
}

/// Inverse of [`basis_index`].
pub fn occupations(index: usize, n_modes: usize) -> Vec<u8> {
    (0..n_modes)
        .map(|m| u8::from(index & mode_bit(m, n_modes) != 0))
        .collect()
}

/// Expands the bits of `compact` (one per listed mode, first mode = MSB) into
/// a full basis index of an `n_modes` system.
fn scatter(compact: usize, modes: &[usize], n_modes: usize) -> usize {
    let k = modes.len();
    modes
        .iter()
        .enumerate()
        .filter(|(j, _)| compact & (1 << (k - 1 - j)) != 0)
        .fold(0, |acc, (_, &m)| acc | mode_bit(m, n_modes))
}

/// Full basis indices for every configuration of `modes`, the other modes empty.
pub(crate) fn embed_table(modes: &[usize], n_modes: usize) -> Vec<usize> {
    (0..1usize << modes.len())
        .map(|c| scatter(c, modes, n_modes))
        .collect()
}

fn validate_mode_set(modes: &[usize], n_modes: usize) -> Result<Vec<usize>> {
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&index) = sorted.iter().find(|&&m| m >= n_modes) {
        return Err(Error::InvalidMode { index, n_modes });
    }
    Ok(sorted)
}

/// Pure state on `n_modes` two-level modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_modes: usize,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(n_modes: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_modes(n_modes)?;
        let dim = 1 << n_modes;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_modes,
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Like [`PureState::new`] but rejects vectors whose norm is not one.
    pub fn normalized_from(n_modes: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::new(n_modes, amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn basis(occupations: &[u8]) -> Result<Self> {
        let index = basis_index(occupations)?;
        let n = occupations.len();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(n, amplitudes)
    }

    pub fn vacuum(n_modes: usize) -> Result<Self> {
        Self::basis(&vec![0; n_modes])
    }

    /// `Σ_i λ_i |0…1_i…0⟩`, not renormalized.
    pub fn single_excitation(weights: &[Complex64]) -> Result<Self> {
        let n = weights.len();
        check_modes(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (mode, &w) in weights.iter().enumerate() {
            amplitudes[mode_bit(mode, n)] = w;
        }
        Self::new(n, amplitudes)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        self.amplitudes /= Complex64::new(norm, 0.0);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            n_modes: self.n_modes,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn to_fixture(&self) -> Fixture {
        Fixture {
            n_modes: self.n_modes,
            re: self.amplitudes.iter().map(|a| a.re).collect(),
            im: self.amplitudes.iter().map(|a| a.im).collect(),
        }
    }
}

/// `a ⊗ b`, with the modes of `a` first.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    check_modes(a.n_modes + b.n_modes)?;
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    PureState::new(a.n_modes + b.n_modes, amplitudes)
}

/// Dense operator on `n_modes` modes: a state `ρ` or a test operator `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    n_modes: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn new(n_modes: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_modes(n_modes)?;
        let dim = 1 << n_modes;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n_modes, matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        state.projector()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entrywise deviation from `A = A†`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err = 0.0f64;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        err
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let err = self.hermiticity_error();
        if err > tol {
            return Err(Error::NotHermitian(err));
        }
        Ok(())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut values: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Hermitian within [`HERMITIAN_TOL`], unit trace within [`TRACE_TOL`]
    /// and positive semidefinite down to [`PSD_TOL`].
    pub fn is_valid_state(&self) -> bool {
        let tr = self.trace();
        self.hermiticity_error() <= HERMITIAN_TOL
            && (tr.re - 1.0).abs() <= TRACE_TOL
            && tr.im.abs() <= TRACE_TOL
            && self.eigenvalues().first().is_some_and(|&v| v >= PSD_TOL)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Traces out `traced_modes`; the remaining modes keep their relative order.
    pub fn partial_trace(&self, traced_modes: &[usize]) -> Result<DensityOperator> {
        let traced = validate_mode_set(traced_modes, self.n_modes)?;
        let kept: Vec<usize> = (0..self.n_modes).filter(|m| !traced.contains(m)).collect();
        if kept.is_empty() {
            return Err(Error::ModeCount(0));
        }
        let kept_idx = embed_table(&kept, self.n_modes);
        let traced_idx = embed_table(&traced, self.n_modes);
        let k = kept_idx.len();
        let matrix = DMatrix::from_fn(k, k, |a, b| {
            traced_idx
                .iter()
                .map(|&t| self.matrix[(kept_idx[a] | t, kept_idx[b] | t)])
                .sum()
        });
        DensityOperator::new(kept.len(), matrix)
    }

    /// Reduced operator on `kept_modes` (in the given order).
    pub fn reduce_to(&self, kept_modes: &[usize]) -> Result<DensityOperator> {
        let kept = validate_mode_set(kept_modes, self.n_modes)?;
        let traced: Vec<usize> = (0..self.n_modes).filter(|m| !kept.contains(m)).collect();
        if traced.is_empty() {
            return Ok(self.clone());
        }
        self.partial_trace(&traced)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        check_modes(self.n_modes + other.n_modes)?;
        DensityOperator::new(
            self.n_modes + other.n_modes,
            self.matrix.kronecker(&other.matrix),
        )
    }

    /// Row-major JSON fixture.
    pub fn to_fixture(&self) -> Fixture {
        let d = self.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(self.matrix[(i, j)].re);
                im.push(self.matrix[(i, j)].im);
            }
        }
        Fixture {
            n_modes: self.n_modes,
            re,
            im,
        }
    }
}

impl std::ops::Add for &DensityOperator {
    type Output = DensityOperator;

    fn add(self, rhs: &DensityOperator) -> DensityOperator {
        assert_eq!(self.n_modes, rhs.n_modes, "operator mode count mismatch");
        DensityOperator {
            n_modes: self.n_modes,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Mul<f64> for &DensityOperator {
    type Output = DensityOperator;

    fn mul(self, rhs: f64) -> DensityOperator {
        DensityOperator {
            n_modes: self.n_modes,
            matrix: &self.matrix * Complex64::new(rhs, 0.0),
        }
    }
}

/// `Re Tr(ρ L)`; fails if the imaginary part exceeds [`IMAG_TOL`].
pub fn expectation(rho: &DensityOperator, l: &DensityOperator) -> Result<f64> {
    if rho.n_modes != l.n_modes {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: l.dim(),
        });
    }
    // Tr(ρL) = Σ_ij ρ_ij L_ji
    let value: Complex64 = rho
        .matrix
        .iter()
        .zip(l.matrix.transpose().iter())
        .map(|(a, b)| a * b)
        .sum();
    if value.im.abs() > IMAG_TOL {
        return Err(Error::ComplexExpectation(value.im));
    }
    Ok(value.re)
}

/// JSON form `{n_modes, re[], im[]}`: `2^n` entries for a state, `4^n`
/// row-major entries for an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub n_modes: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Fixture {
    fn values(&self) -> Result<Vec<Complex64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::Fixture(format!(
                "re has {} entries but im has {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect())
    }

    pub fn is_operator(&self) -> bool {
        self.n_modes <= MAX_MODES && self.re.len() == 1 << (2 * self.n_modes)
    }

    pub fn to_state(&self) -> Result<PureState> {
        PureState::new(self.n_modes, self.values()?)
    }

    pub fn to_operator(&self) -> Result<DensityOperator> {
        check_modes(self.n_modes)?;
        let d = 1 << self.n_modes;
        let values = self.values()?;
        if values.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: values.len(),
            });
        }
        DensityOperator::new(self.n_modes, DMatrix::from_row_slice(d, d, &values))
    }

    /// Accepts either form; a state fixture becomes its projector.
    pub fn to_operator_or_projector(&self) -> Result<DensityOperator> {
        if self.is_operator() {
            self.to_operator()
        } else {
            Ok(self.to_state()?.projector())
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Fixture(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fixture serialization is infallible")
    }
}
