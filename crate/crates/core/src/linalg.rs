//! Small dense linear-algebra kernels: blocked Hermitian spectra and the
//! matrix exponential.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::dicke::Complex64;

/// Imaginary parts below this are treated as an exactly real matrix.
const REAL_EMBED_TOL: f64 = 1e-15;

fn is_effectively_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im.abs() <= REAL_EMBED_TOL)
}

/// Ascending eigenvalues of a Hermitian matrix.
///
/// Real symmetric inputs go through the real solver.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut eig: Vec<f64> = if is_effectively_real(m) {
        let re = m.map(|z| z.re);
        SymmetricEigen::new(re).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
    };
    eig.sort_by(f64::total_cmp);
    eig
}

/// Partition of `0..dim` into connected components of the graph whose edges
/// are the nonzero entries of `m`. Each component is returned sorted.
pub fn sparsity_blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let dim = m.nrows();
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if m[(i, j)] != Complex64::new(0.0, 0.0) || m[(j, i)] != Complex64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..dim {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Principal submatrix on `idx`.
fn principal(m: &DMatrix<Complex64>, idx: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Smallest eigenvalue of a Hermitian matrix, solved per sparsity block.
///
/// The block split is an exact permutation similarity, so the result equals
/// the minimum of the full spectrum.
pub fn min_eigenvalue_blocked(m: &DMatrix<Complex64>) -> f64 {
    sparsity_blocks(m)
        .iter()
        .map(|idx| {
            if idx.len() == 1 {
                m[(idx[0], idx[0])].re
            } else {
                hermitian_eigenvalues(&principal(m, idx))[0]
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue_real(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 Padé approximant meets
/// double-precision backward error.
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` by scaling and squaring with a degree-13 Padé approximant.
///
/// No eigendecomposition is involved, so matrices with repeated eigenvalues
/// and nontrivial Jordan structure are handled like any other.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert!(a.is_square(), "expm needs a square matrix");
    let ident = DMatrix::<f64>::identity(n, n);
    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * 2f64.powi(-squarings);

    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expm_of_jordan_block() {
        // exp([[l, 1], [0, l]] t) = e^{lt} [[1, t], [0, 1]]
        let (l, t) = (-6.0, 0.7);
        let a = DMatrix::from_row_slice(2, 2, &[l * t, t, 0.0, l * t]);
        let e = expm(&a);
        let s = (l * t).exp();
        assert_abs_diff_eq!(e[(0, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(0, 1)], t * s, epsilon = 1e-15);
        assert_abs_diff_eq!(e[(1, 0)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_matches_taylor_for_small_norm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -0.2, 0.05, 0.3, -0.1, 0.0, 0.02, 0.4, 0.2]);
        let mut term = DMatrix::<f64>::identity(3, 3);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / k as f64;
            sum += &term;
        }
        assert!((expm(&a) - sum).abs().max() < 1e-14);
    }

    #[test]
    fn expm_large_norm_is_scaled() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-40.0, 3.0]));
        let e = expm(&a);
        assert!((e[(0, 0)] - (-40f64).exp()).abs() < 1e-28);
        assert!((e[(1, 1)] / 3f64.exp() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn blocks_split_disconnected_entries() {
        let mut m = DMatrix::<Complex64>::zeros(4, 4);
        m[(0, 3)] = Complex64::new(1.0, 0.0);
        m[(3, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(2.0, 0.0);
        let blocks = sparsity_blocks(&m);
        assert_eq!(blocks, vec![vec![0, 3], vec![1], vec![2]]);
        assert_abs_diff_eq!(min_eigenvalue_blocked(&m), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hermitian_eigenvalues(&m)[0], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // [[0, -i], [i, 0]] has eigenvalues ±1.
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, -1.0);
        m[(1, 0)] = Complex64::new(0.0, 1.0);
        let eig = hermitian_eigenvalues(&m);
        assert_abs_diff_eq!(eig[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig[1], 1.0, epsilon = 1e-14);
    }
}
