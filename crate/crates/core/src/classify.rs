//! Three-way entanglement classification from bipartition witness tests, and
//! the recursive search for which modes are entangled.
//!
//! For every bipartition `A|B` the test `Tr ρL > sup_{ψ_A⊗ψ_B} ⟨L⟩` is run
//! (see [`detects`]).
//! No passing test: nothing detected. Some passing: the state is not fully
//! separable (partial). All passing: no bipartition separates it (full).
//!
//! Sub-tests inside a subset `S` use `ρ_S = Tr_{S^c} ρ` against
//! `L_S = Tr_{S^c} L`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::exec::Exec;
use crate::fockstate::{expectation, mode_bit, DensityOperator};
use crate::oracle::{max_product_expectation, OracleConfig};
use crate::partition::{bipartitions, ModePartition};
use crate::witness::{detects, max_g, SolverConfig};
use crate::{Error, Result};

/// Supremum of `⟨ψ_A ⊗ ψ_B| L |ψ_A ⊗ ψ_B⟩` for a bipartition.
pub trait BoundsProvider: Sync {
    fn bipartition_bound(&self, l: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64>;
}

/// `L = |w⟩⟨w| + c |0…0⟩⟨0…0|` with unnormalized single-excitation weights `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct WFamily {
    pub weights: Vec<Complex64>,
    pub vacuum: f64,
}

/// Recognizes operators of the form [`WFamily`] up to `tol` (absolute, per entry).
pub fn w_family(l: &DensityOperator, tol: f64) -> Option<WFamily> {
    let n = l.n_modes();
    let singles: Vec<usize> = (0..n).map(|m| mode_bit(m, n)).collect();
    let support = |i: usize| i == 0 || i.count_ones() == 1;
    let m = l.matrix();
    for i in 0..l.dim() {
        for j in 0..l.dim() {
            let inside = support(i) && support(j) && ((i == 0) == (j == 0));
            if !inside && m[(i, j)].norm() > tol {
                return None;
            }
        }
    }
    let vacuum = m[(0, 0)];
    if vacuum.im.abs() > tol || vacuum.re < -tol {
        return None;
    }
    let block = DMatrix::from_fn(n, n, |a, b| m[(singles[a], singles[b])]);
    let herm = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm.clone());
    let top = (0..n).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))?;
    let value = eig.eigenvalues[top].max(0.0);
    let mut v = eig.eigenvectors.column(top).into_owned();
    let lead = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(c) = v.iter().find(|c| c.norm() >= lead - 1e-12).copied() {
        if c.norm() > 0.0 {
            v *= c.conj() / c.norm();
        }
    }
    let w = v * Complex64::new(value.sqrt(), 0.0);
    if (&herm - &w * w.adjoint()).camax() > tol {
        return None;
    }
    Some(WFamily {
        weights: w.iter().copied().collect(),
        vacuum: vacuum.re.max(0.0),
    })
}

/// Sum of `|w_i|²` over `modes`.
fn mass(weights: &[Complex64], modes: &[usize]) -> f64 {
    modes.iter().map(|&m| weights[m].norm_sqr()).sum()
}

/// Bounds from the separability eigenvalue equations for [`WFamily`]
/// operators. The vacuum part is purified by an extra, always separated
/// mode, so a bipartition becomes a three-block problem with masses
/// `(M_A, M_B, c)`.
#[derive(Clone, Debug)]
pub struct WFamilyBounds {
    pub solver: SolverConfig,
    pub tol: f64,
}

impl Default for WFamilyBounds {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            tol: 1e-10,
        }
    }
}

impl WFamilyBounds {
    pub fn bound_for(&self, family: &WFamily, a: &[usize], b: &[usize]) -> Result<f64> {
        let masses = [
            mass(&family.weights, a),
            mass(&family.weights, b),
            family.vacuum,
        ];
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Ok(0.0);
        }
        let w: Vec<f64> = masses.iter().map(|m| (m / total).sqrt()).collect();
        Ok(total * max_g(&w, &self.solver)?.g_max)
    }
}

impl BoundsProvider for WFamilyBounds {
    fn bipartition_bound(&self, l: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
        let family = w_family(l, self.tol)
            .ok_or_else(|| Error::InvalidWeights("operator is not in the W family".into()))?;
        self.bound_for(&family, a, b)
    }
}

/// Bounds from the product-state oracle (lower bounds on the supremum).
#[derive(Clone, Debug, Default)]
pub struct OracleBounds {
    pub config: OracleConfig,
}

impl BoundsProvider for OracleBounds {
    fn bipartition_bound(&self, l: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
        let p = ModePartition::new(l.n_modes(), vec![a.to_vec(), b.to_vec()])?;
        Ok(max_product_expectation(l, &p, &self.config)?.value)
    }
}

/// W-family bounds when the operator qualifies, the oracle otherwise.
#[derive(Clone, Debug, Default)]
pub struct AutoBounds {
    pub w: WFamilyBounds,
    pub oracle: OracleBounds,
}

impl BoundsProvider for AutoBounds {
    fn bipartition_bound(&self, l: &DensityOperator, a: &[usize], b: &[usize]) -> Result<f64> {
        match w_family(l, self.w.tol) {
            Some(family) => self.w.bound_for(&family, a, b),
            None => self.oracle.bipartition_bound(l, a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No bipartition test passed. This does not prove separability.
    NoneDetected,
    Partial,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartitionTest {
    #[serde(skip)]
    pub a: Vec<usize>,
    #[serde(skip)]
    pub b: Vec<usize>,
    /// One-based, e.g. `"12|34"`.
    pub label: String,
    pub bound: f64,
    pub passed: bool,
}

impl BipartitionTest {
    /// `bound - Tr ρL`; positive for failed tests.
    pub fn margin(&self, trace: f64) -> f64 {
        self.bound - trace
    }
}

fn label(modes: &[usize]) -> String {
    let wide = modes.iter().any(|&m| m >= 9);
    let parts: Vec<String> = modes.iter().map(|m| (m + 1).to_string()).collect();
    parts.join(if wide { "," } else { "" })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub n_modes: usize,
    pub trace: f64,
    pub verdict: Verdict,
    pub tests: Vec<BipartitionTest>,
}

/// Runs the bipartition test for each of the `2^(N-1) - 1` bipartitions.
pub fn classify_state(
    rho: &DensityOperator,
    l: &DensityOperator,
    bounds: &dyn BoundsProvider,
) -> Result<Classification> {
    classify_labeled(rho, l, bounds, &(0..rho.n_modes()).collect::<Vec<_>>())
}

/// As [`classify_state`], reporting modes under the labels `names`.
fn classify_labeled(
    rho: &DensityOperator,
    l: &DensityOperator,
    bounds: &dyn BoundsProvider,
    names: &[usize],
) -> Result<Classification> {
    if rho.n_modes() != l.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_modes(),
            found: l.n_modes(),
        });
    }
    let n = rho.n_modes();
    if n < 2 {
        return Err(Error::ModeCount(n));
    }
    let trace = expectation(rho, l)?;
    let cuts = bipartitions(n);
    let tests = Exec::default()
        .map_slice(&cuts, |(a, b)| -> Result<BipartitionTest> {
            let bound = bounds.bipartition_bound(l, a, b)?;
            let ga: Vec<usize> = a.iter().map(|&i| names[i]).collect();
            let gb: Vec<usize> = b.iter().map(|&i| names[i]).collect();
            Ok(BipartitionTest {
                label: format!("{}|{}", label(&ga), label(&gb)),
                a: ga,
                b: gb,
                bound,
                passed: detects(trace, bound),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let passed = tests.iter().filter(|t| t.passed).count();
    let verdict = match passed {
        0 => Verdict::NoneDetected,
        p if p == tests.len() => Verdict::Full,
        _ => Verdict::Partial,
    };
    Ok(Classification {
        n_modes: n,
        trace,
        verdict,
        tests,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SubsetNode {
    /// A single mode split off from the rest.
    Separated { mode: usize },
    /// Every bipartition test inside `modes` passes.
    Entangled { modes: Vec<usize> },
    /// No test inside `modes` passes.
    Undetected { modes: Vec<usize> },
    /// Split along the failed cut with the largest margin.
    Split {
        modes: Vec<usize>,
        cut: [Vec<usize>; 2],
        children: Box<[SubsetNode; 2]>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocateReport {
    pub verdict: Verdict,
    /// False when the top-level verdict is not partial; nothing is split then.
    pub performed: bool,
    pub tree: Option<SubsetNode>,
    pub entangled: Vec<Vec<usize>>,
    pub separated: Vec<usize>,
    pub undetected: Vec<Vec<usize>>,
}

fn locate_node(
    rho: &DensityOperator,
    l: &DensityOperator,
    bounds: &dyn BoundsProvider,
    modes: &[usize],
    known: Option<Classification>,
) -> Result<SubsetNode> {
    if modes.len() == 1 {
        return Ok(SubsetNode::Separated { mode: modes[0] });
    }
    let c = match known {
        Some(c) => c,
        None => {
            let rho_s = rho.reduce_to(modes)?;
            let l_s = l.reduce_to(modes)?;
            classify_labeled(&rho_s, &l_s, bounds, modes)?
        }
    };
    match c.verdict {
        Verdict::Full => Ok(SubsetNode::Entangled {
            modes: modes.to_vec(),
        }),
        Verdict::NoneDetected => Ok(SubsetNode::Undetected {
            modes: modes.to_vec(),
        }),
        Verdict::Partial => {
            let cut = c
                .tests
                .iter()
                .filter(|t| !t.passed)
                .fold(None::<&BipartitionTest>, |best, t| match best {
                    Some(b) if b.margin(c.trace) >= t.margin(c.trace) => Some(b),
                    _ => Some(t),
                })
                .expect("partial verdict has a failed test");
            let left = locate_node(rho, l, bounds, &cut.a, None)?;
            let right = locate_node(rho, l, bounds, &cut.b, None)?;
            Ok(SubsetNode::Split {
                modes: modes.to_vec(),
                cut: [cut.a.clone(), cut.b.clone()],
                children: Box::new([left, right]),
            })
        }
    }
}

fn collect(node: &SubsetNode, report: &mut LocateReport) {
    match node {
        SubsetNode::Separated { mode } => report.separated.push(*mode),
        SubsetNode::Entangled { modes } => report.entangled.push(modes.clone()),
        SubsetNode::Undetected { modes } => report.undetected.push(modes.clone()),
        SubsetNode::Split { children, .. } => {
            for child in children.iter() {
                collect(child, report);
            }
        }
    }
}

/// Splits a partially entangled state along failed bipartitions and re-tests
/// inside each part until every part is a single mode, passes all its tests,
/// or passes none. Full and none-detected verdicts return without splitting.
///
/// Mode labels are `0`-based indices of `rho`.
pub fn locate_entangled_subsets(
    rho: &DensityOperator,
    l: &DensityOperator,
    bounds: &dyn BoundsProvider,
) -> Result<LocateReport> {
    let top = classify_state(rho, l, bounds)?;
    let all: Vec<usize> = (0..rho.n_modes()).collect();
    let mut report = LocateReport {
        verdict: top.verdict,
        performed: false,
        tree: None,
        entangled: Vec::new(),
        separated: Vec::new(),
        undetected: Vec::new(),
    };
    match top.verdict {
        Verdict::Full => report.entangled.push(all),
        Verdict::NoneDetected => report.undetected.push(all),
        Verdict::Partial => {
            let tree = locate_node(rho, l, bounds, &all, Some(top))?;
            collect(&tree, &mut report);
            report.separated.sort_unstable();
            report.performed = true;
            report.tree = Some(tree);
        }
    }
    Ok(report)
}
