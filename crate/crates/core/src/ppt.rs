//! Positivity under partial transposition for diagonal-symmetric states.
//!
//! Permutation symmetry makes every bipartition equivalent to transposing the
//! first `k` qubits for some `k` in `1..=N/2`, so only those are checked.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dicke::{dicke_projector, gds_density_matrix, Complex64, DenseHermitian, GdsState};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue_real, sparsity_blocks};

/// Default slack on the smallest partial-transpose eigenvalue.
pub const DEFAULT_PPT_TOL: f64 = 1e-10;

/// Largest `N` accepted by [`is_ppt`].
pub const MAX_PPT_QUBITS: usize = 10;

/// Transposes the first `k` tensor factors of an `n`-qubit operator:
/// entry `((a, b), (a', b'))` becomes `((a', b), (a, b'))`.
pub fn partial_transpose(rho: &DenseHermitian, k: usize, n: usize) -> Result<DenseHermitian> {
    let dim = 1usize << n;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidBipartition { k, max: n.saturating_sub(1) });
    }
    let shift = n - k;
    let low = (1usize << shift) - 1;
    let m = rho.matrix();
    let out = DMatrix::<Complex64>::from_fn(dim, dim, |i, j| {
        let (a, b) = (i >> shift, i & low);
        let (a2, b2) = (j >> shift, j & low);
        m[((a2 << shift) | b, (a << shift) | b2)]
    });
    Ok(DenseHermitian::from_matrix_unchecked(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartitionResult {
    pub k: usize,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub n: usize,
    pub bipartitions: Vec<BipartitionResult>,
    pub tol: f64,
    pub ppt: bool,
}

impl PptReport {
    pub fn min_eig(&self) -> f64 {
        self.bipartitions.iter().map(|b| b.min_eig).fold(f64::INFINITY, f64::min)
    }
}

/// Builds the density matrix and tests every inequivalent bipartition.
pub fn is_ppt(state: &GdsState, tol: f64) -> Result<PptReport> {
    let n = state.n_qubits();
    if n > MAX_PPT_QUBITS {
        return Err(Error::Capacity { n, max: MAX_PPT_QUBITS });
    }
    let rho = gds_density_matrix(state)?;
    let bipartitions = (1..=n / 2)
        .map(|k| {
            let pt = partial_transpose(&rho, k, n)?;
            Ok(BipartitionResult { k, min_eig: pt.min_eigenvalue() })
        })
        .collect::<Result<Vec<_>>>()?;
    let ppt = bipartitions.iter().all(|b| b.min_eig >= -tol);
    Ok(PptReport { n, bipartitions, tol, ppt })
}

/// One diagonal block of a partial transpose. The block is
/// `Σ_{n0} χ_{n0} levels[n0]`; every level matrix is real.
#[derive(Debug, Clone)]
struct PtBlock {
    levels: Vec<DMatrix<f64>>,
    /// Copies of this block in the full matrix.
    multiplicity: usize,
}

/// Precomputed partial-transpose structure for repeated PPT tests at fixed
/// `N`.
///
/// The partial transpose is linear in the populations, so the block
/// decomposition of each Dicke projector's transpose is computed once and
/// every test only assembles and diagonalizes small real blocks. Identical
/// blocks are kept once.
#[derive(Debug, Clone)]
pub struct PptEvaluator {
    n: usize,
    bipartitions: Vec<(usize, Vec<PtBlock>)>,
}

impl PptEvaluator {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_PPT_QUBITS {
            return Err(Error::Capacity { n, max: MAX_PPT_QUBITS });
        }
        let projectors = (0..=n).map(|n0| dicke_projector(n, n0)).collect::<Result<Vec<_>>>()?;
        let mut bipartitions = Vec::new();
        for k in 1..=n / 2 {
            let pts = projectors
                .iter()
                .map(|p| partial_transpose(p, k, n))
                .collect::<Result<Vec<_>>>()?;
            // All projector entries are nonnegative, so the sum has the union pattern.
            let pattern = pts.iter().fold(DMatrix::<Complex64>::zeros(1 << n, 1 << n), |acc, p| {
                acc + p.matrix()
            });
            let mut blocks: Vec<PtBlock> = Vec::new();
            for idx in sparsity_blocks(&pattern) {
                let levels: Vec<DMatrix<f64>> = pts
                    .iter()
                    .map(|p| DMatrix::from_fn(idx.len(), idx.len(), |a, b| p.matrix()[(idx[a], idx[b])].re))
                    .collect();
                match blocks.iter_mut().find(|b| b.levels == levels) {
                    Some(b) => b.multiplicity += 1,
                    None => blocks.push(PtBlock { levels, multiplicity: 1 }),
                }
            }
            bipartitions.push((k, blocks));
        }
        Ok(Self { n, bipartitions })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    fn assemble(block: &PtBlock, chi: &[f64]) -> DMatrix<f64> {
        let dim = block.levels[0].nrows();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (level, &c) in block.levels.iter().zip(chi) {
            if c != 0.0 {
                m.zip_apply(level, |a, b| *a += c * b);
            }
        }
        m
    }

    fn block_min(block: &PtBlock, chi: &[f64]) -> f64 {
        min_eigenvalue_real(Self::assemble(block, chi))
    }

    /// `λ_min > -tol`, decided by a Cholesky factorization of `M + tol·I`.
    fn block_psd(block: &PtBlock, chi: &[f64], tol: f64) -> bool {
        let mut m = Self::assemble(block, chi);
        if m.nrows() == 1 {
            return m[(0, 0)] >= -tol;
        }
        for i in 0..m.nrows() {
            m[(i, i)] += tol;
        }
        m.cholesky().is_some()
    }

    /// Smallest eigenvalue per bipartition `k = 1..=N/2`.
    pub fn min_eigenvalues(&self, chi: &[f64]) -> Vec<BipartitionResult> {
        assert_eq!(chi.len(), self.n + 1, "population vector length");
        self.bipartitions
            .iter()
            .map(|(k, blocks)| BipartitionResult {
                k: *k,
                min_eig: blocks.iter().map(|b| Self::block_min(b, chi)).fold(f64::INFINITY, f64::min),
            })
            .collect()
    }

    /// PPT verdict, stopping at the first non-positive block.
    ///
    /// Agrees with [`report`](Self::report) except on states whose smallest
    /// eigenvalue is within rounding of exactly `-tol`.
    pub fn is_ppt(&self, chi: &[f64], tol: f64) -> bool {
        assert_eq!(chi.len(), self.n + 1, "population vector length");
        self.bipartitions
            .iter()
            .all(|(_, blocks)| blocks.iter().all(|b| Self::block_psd(b, chi, tol)))
    }

    /// Total dimension covered by the blocks of bipartition `k`, counting
    /// multiplicity. Equals `2^N` when the decomposition is complete.
    pub fn covered_dim(&self, k: usize) -> Option<usize> {
        self.bipartitions
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, blocks)| blocks.iter().map(|b| b.levels[0].nrows() * b.multiplicity).sum())
    }

    pub fn report(&self, chi: &[f64], tol: f64) -> PptReport {
        let bipartitions = self.min_eigenvalues(chi);
        let ppt = bipartitions.iter().all(|b| b.min_eig >= -tol);
        PptReport { n: self.n, bipartitions, tol, ppt }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::{sds_populations, SdsParams};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        use rand::Rng;
        let g = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        m / tr
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DenseHermitian::from_matrix(random_density(8, &mut rng)).unwrap();
        for k in 1..3 {
            let twice = partial_transpose(&partial_transpose(&rho, k, 3).unwrap(), k, 3).unwrap();
            assert_eq!(twice, rho);
        }
    }

    #[test]
    fn product_state_transposes_factorwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_density(2, &mut rng);
        let b = random_density(4, &mut rng);
        let rho = DenseHermitian::from_matrix(kron(&a, &b)).unwrap();
        let pt = partial_transpose(&rho, 1, 3).unwrap();
        let expected = kron(&a.transpose(), &b);
        assert!((pt.matrix() - &expected).iter().all(|z| z.norm() < 1e-15));
        let (e1, e2) = (rho.eigenvalues(), pt.eigenvalues());
        for (x, y) in e1.iter().zip(&e2) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetric_bell_state_is_npt() {
        let pt = partial_transpose(&gds_density_matrix(&GdsState::dicke_level(2, 1).unwrap()).unwrap(), 1, 2)
            .unwrap();
        assert_abs_diff_eq!(pt.min_eigenvalue(), -0.5, epsilon = 1e-14);
    }

    #[test]
    fn dimension_and_bipartition_errors() {
        let rho = gds_density_matrix(&GdsState::ground(3).unwrap()).unwrap();
        assert!(matches!(partial_transpose(&rho, 1, 4), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(partial_transpose(&rho, 3, 3), Err(Error::InvalidBipartition { .. })));
        assert!(matches!(partial_transpose(&rho, 0, 3), Err(Error::InvalidBipartition { .. })));
        let big = GdsState::ground(11).unwrap();
        assert_eq!(is_ppt(&big, DEFAULT_PPT_TOL), Err(Error::Capacity { n: 11, max: 10 }));
    }

    #[test]
    fn two_qubit_product_state_sits_on_boundary() {
        let r = is_ppt(&GdsState::new(vec![0.25, 0.5, 0.25]).unwrap(), DEFAULT_PPT_TOL).unwrap();
        assert!(r.ppt);
        assert_eq!(r.bipartitions.len(), 1);
        assert_abs_diff_eq!(r.bipartitions[0].min_eig, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn balanced_dicke_level_is_npt() {
        let r = is_ppt(&GdsState::dicke_level(4, 2).unwrap(), DEFAULT_PPT_TOL).unwrap();
        assert!(!r.ppt);
        assert_eq!(r.bipartitions.iter().map(|b| b.k).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn pt_preserves_hermiticity_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=6 {
            for _ in 0..5 {
                let chi = crate::volume::sample_gds_simplex(n, &mut rng);
                let rho = gds_density_matrix(&chi).unwrap();
                for k in 1..n {
                    let pt = partial_transpose(&rho, k, n).unwrap();
                    assert!(pt.hermiticity_defect() <= 1e-12);
                    assert_abs_diff_eq!(pt.trace(), 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_mixtures_are_ppt() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in 2..=6 {
            for _ in 0..20 {
                let chi = sds_populations(&SdsParams::sample(n, &mut rng));
                let r = is_ppt(&chi, DEFAULT_PPT_TOL).unwrap();
                assert!(r.min_eig() >= -1e-10, "N = {n}: {r:?}");
            }
        }
    }

    #[test]
    fn evaluator_matches_dense_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=7 {
            let ev = PptEvaluator::new(n).unwrap();
            for k in 1..=n / 2 {
                assert_eq!(ev.covered_dim(k), Some(1 << n));
            }
            for _ in 0..10 {
                let chi = crate::volume::sample_gds_simplex(n, &mut rng);
                let dense = is_ppt(&chi, DEFAULT_PPT_TOL).unwrap();
                let fast = ev.report(chi.populations(), DEFAULT_PPT_TOL);
                assert_eq!(dense.ppt, fast.ppt);
                assert_eq!(ev.is_ppt(chi.populations(), DEFAULT_PPT_TOL), dense.ppt);
                for (a, b) in dense.bipartitions.iter().zip(&fast.bipartitions) {
                    assert_eq!(a.k, b.k);
                    assert_abs_diff_eq!(a.min_eig, b.min_eig, epsilon = 1e-12);
                }
            }
        }
    }
}
