//! Dicke basis, diagonal-symmetric states and the product-mixture forward map.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub type Complex64 = nalgebra::Complex<f64>;

/// Largest qubit count for which dense `2^N x 2^N` matrices are built.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Slack allowed on negative populations of numerically produced states.
pub const POPULATION_NEG_TOL: f64 = 1e-12;
/// Slack allowed on the normalization of a population vector.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Binomial coefficient as an exactly representable float for the small `n`
/// used here.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as f64
}

/// Number of mixture terms for `n` qubits: `ceil((n + 1) / 2)`.
pub fn j_max(n: usize) -> usize {
    (n + 2) / 2
}

/// A mixed state diagonal in the Dicke basis.
///
/// `chi[n0]` is the population of the level with `n0` qubits in `|0⟩` and
/// `n1 = N - n0` qubits in `|1⟩`. That puts the ground state `χ_{N,0}` at the
/// end of the vector and the maximally excited state `χ_{0,N}` at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GdsStateRepr", into = "GdsStateRepr")]
pub struct GdsState {
    chi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GdsStateRepr {
    n: usize,
    chi: Vec<f64>,
}

impl TryFrom<GdsStateRepr> for GdsState {
    type Error = Error;

    fn try_from(repr: GdsStateRepr) -> Result<Self> {
        if repr.chi.len() != repr.n + 1 {
            return Err(Error::DimensionMismatch { expected: repr.n + 1, found: repr.chi.len() });
        }
        GdsState::new(repr.chi)
    }
}

impl From<GdsState> for GdsStateRepr {
    fn from(state: GdsState) -> Self {
        GdsStateRepr { n: state.n_qubits(), chi: state.chi }
    }
}

impl GdsState {
    /// Validates and wraps a population vector of length `N + 1`.
    pub fn new(chi: Vec<f64>) -> Result<Self> {
        if chi.len() < 2 {
            return Err(Error::InvalidState(format!(
                "need at least two populations (N >= 1), got {}",
                chi.len()
            )));
        }
        if let Some((n0, &v)) =
            chi.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -POPULATION_NEG_TOL)
        {
            return Err(Error::InvalidState(format!("population at n0 = {n0} is {v}")));
        }
        let total: f64 = chi.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidState(format!("populations sum to {total}, not 1")));
        }
        Ok(Self { chi })
    }

    /// The pure Dicke level `|D_{n0, N-n0}⟩⟨D_{n0, N-n0}|`.
    pub fn dicke_level(n: usize, n0: usize) -> Result<Self> {
        if n0 > n || n == 0 {
            return Err(Error::InvalidState(format!("level n0 = {n0} invalid for N = {n}")));
        }
        let mut chi = vec![0.0; n + 1];
        chi[n0] = 1.0;
        Self::new(chi)
    }

    /// All qubits in `|0⟩`.
    pub fn ground(n: usize) -> Result<Self> {
        Self::dicke_level(n, n)
    }

    /// All qubits in `|1⟩`.
    pub fn excited(n: usize) -> Result<Self> {
        Self::dicke_level(n, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.chi.len() - 1
    }

    pub fn populations(&self) -> &[f64] {
        &self.chi
    }

    /// Population `χ_{n0, N-n0}`.
    pub fn chi(&self, n0: usize) -> f64 {
        self.chi[n0]
    }

    pub fn into_populations(self) -> Vec<f64> {
        self.chi
    }
}

/// Parameters of a phase-averaged mixture of identical product states.
///
/// Each term `(x, y)` contributes weight `x` of the product of `N` copies of
/// `sqrt(y)|0⟩ + sqrt(1-y) e^{iφ}|1⟩`. For even `N` the last term has its
/// amplitude pinned to `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdsParams {
    n: usize,
    terms: Vec<(f64, f64)>,
}

impl SdsParams {
    pub fn new(n: usize, terms: Vec<(f64, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        let expected = j_max(n);
        if terms.len() != expected {
            return Err(Error::InvalidParams(format!(
                "expected {expected} terms for N = {n}, got {}",
                terms.len()
            )));
        }
        for (j, &(x, y)) in terms.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::InvalidParams(format!("term {j} = ({x}, {y}) outside [0, 1]")));
            }
        }
        if n.is_multiple_of(2) && terms[expected - 1].1 != 0.0 {
            return Err(Error::InvalidParams("even N requires the last amplitude to be 0".into()));
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParams(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { n, terms })
    }

    /// Random parameters: Dirichlet(1, ..., 1) weights and uniform amplitudes.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let jm = j_max(n);
        let mut xs: Vec<f64> = (0..jm).map(|_| Exp1.sample(rng)).collect();
        let total: f64 = xs.iter().sum();
        xs.iter_mut().for_each(|x| *x /= total);
        let terms = xs
            .into_iter()
            .enumerate()
            .map(|(j, x)| {
                let y = if n.is_multiple_of(2) && j == jm - 1 { 0.0 } else { rng.random::<f64>() };
                (x, y)
            })
            .collect();
        Self { n, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }
}

/// A dense Hermitian operator on `N` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    matrix: DMatrix<Complex64>,
}

/// Entrywise tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

impl DenseHermitian {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        let dim = matrix.nrows();
        for i in 0..dim {
            for j in i..dim {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidState(format!("entry ({i}, {j}) breaks Hermiticity")));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Largest entrywise deviation `|A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &DenseHermitian) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Smallest eigenvalue, computed block by block over the connected
    /// components of the sparsity pattern.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue_blocked(&self.matrix)
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity { n, max: MAX_DENSE_QUBITS });
    }
    Ok(())
}

/// `|D_{n0,n1}⟩⟨D_{n0,n1}|` in the computational basis.
///
/// Qubit 0 is the most significant bit of the basis index, so `|0001⟩` is
/// index 1. The projector is built by enumerating the `C(N, n1)` basis kets
/// with exactly `n1` ones.
pub fn dicke_projector(n: usize, n0: usize) -> Result<DenseHermitian> {
    check_capacity(n)?;
    if n == 0 || n0 > n {
        return Err(Error::InvalidState(format!("level n0 = {n0} invalid for N = {n}")));
    }
    let n1 = n - n0;
    let dim = 1usize << n;
    let support: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == n1).collect();
    let entry = Complex64::new(1.0 / support.len() as f64, 0.0);
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for &i in &support {
        for &j in &support {
            m[(i, j)] = entry;
        }
    }
    Ok(DenseHermitian::from_matrix_unchecked(m))
}

/// `Σ_n χ_n |D_n⟩⟨D_n|` in the computational basis.
pub fn gds_density_matrix(state: &GdsState) -> Result<DenseHermitian> {
    let n = state.n_qubits();
    check_capacity(n)?;
    let dim = 1usize << n;
    // Entry (i, j) is nonzero only when both kets carry the same excitation count.
    let level_value: Vec<f64> =
        (0..=n).map(|n1| state.chi(n - n1) / binomial(n, n1)).collect();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        let wi = i.count_ones() as usize;
        let v = level_value[wi];
        if v.is_zero() {
            continue;
        }
        for j in 0..dim {
            if j.count_ones() as usize == wi {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
    }
    Ok(DenseHermitian::from_matrix_unchecked(m))
}

/// Dicke populations of a phase-averaged product mixture:
/// `χ_{n0,n1} = C(N, n0) Σ_j x_j y_j^{n0} (1 - y_j)^{n1}`.
pub fn sds_populations(params: &SdsParams) -> GdsState {
    let n = params.n_qubits();
    let chi = populations_from_terms(n, params.terms().iter().copied());
    GdsState { chi }
}

pub(crate) fn populations_from_terms(
    n: usize,
    terms: impl Iterator<Item = (f64, f64)> + Clone,
) -> Vec<f64> {
    (0..=n)
        .map(|n0| {
            let n1 = (n - n0) as i32;
            let s: f64 =
                terms.clone().map(|(x, y)| x * y.powi(n0 as i32) * (1.0 - y).powi(n1)).sum();
            binomial(n, n0) * s
        })
        .collect()
}

/// Discrete phase average of `Σ_j x_j (ρ¹[y_j, φ])^{⊗N}` over `n_phases`
/// equally spaced phases.
///
/// The integrand is a trigonometric polynomial of degree at most `N` in `φ`,
/// so any `n_phases > N` reproduces the continuous average exactly.
pub fn sds_density_matrix_phase_avg(params: &SdsParams, n_phases: usize) -> Result<DenseHermitian> {
    let n = params.n_qubits();
    check_capacity(n)?;
    if n_phases <= n {
        return Err(Error::TooFewPhases { n, n_phases });
    }
    let dim = 1usize << n;
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for m in 0..n_phases {
        let phi = 2.0 * std::f64::consts::PI * m as f64 / n_phases as f64;
        let phase = Complex64::from_polar(1.0, phi);
        for &(x, y) in params.terms() {
            if x == 0.0 {
                continue;
            }
            let psi = product_ket(n, y, phase);
            let scale = Complex64::new(x / n_phases as f64, 0.0);
            acc.ger(scale, &psi, &psi.conjugate(), Complex64::new(1.0, 0.0));
        }
    }
    Ok(DenseHermitian::from_matrix_unchecked(acc))
}

/// `(sqrt(y)|0⟩ + sqrt(1-y) e^{iφ}|1⟩)^{⊗N}` as a state vector.
fn product_ket(n: usize, y: f64, phase: Complex64) -> DVector<Complex64> {
    let a0 = Complex64::new(y.sqrt(), 0.0);
    let a1 = phase * (1.0 - y).sqrt();
    DVector::from_fn(1 << n, |i, _| {
        let ones = i.count_ones() as usize;
        a0.powu((n - ones) as u32) * a1.powu(ones as u32)
    })
}
