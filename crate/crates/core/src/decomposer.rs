//! Inversion of the product-mixture forward map and the separability
//! certificate built on it.
//!
//! Writing `p_k = χ_k / C(N, k)`, the populations satisfy
//! `p_k = Σ_j x_j y_j^k (1 - y_j)^{N-k}`. A binomial resummation turns these
//! into plain power moments `m_r = Σ_j x_j y_j^r` of a discrete measure on the
//! amplitudes, so recovering `(x, y)` is a truncated moment problem: a Hankel
//! system gives the node polynomial, its companion matrix gives the nodes and
//! a Vandermonde least-squares solve gives the weights.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dicke::{binomial, Complex64, GdsState, SdsParams};
use crate::error::{Error, Result};

/// Tolerance on imaginary parts and on the `[0, 1]` box of a certificate.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Largest reconstruction error accepted from the solver.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Slack on the necessary population bound.
pub const BOUND_TOL: f64 = 1e-12;

/// Power moments `m_r = Σ_j x_j y_j^r`, `r = 0..=N`, computed from the
/// populations alone.
pub fn to_power_moments(state: &GdsState) -> Vec<f64> {
    let n = state.n_qubits();
    let p: Vec<f64> = (0..=n).map(|k| state.chi(k) / binomial(n, k)).collect();
    (0..=n)
        .map(|r| (0..=n - r).map(|i| binomial(n - r, i) * p[r + i]).sum())
        .collect()
}

/// One mixture term. Solved parameters may be complex when the input is not
/// of product-mixture form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub x: Complex64,
    pub y: Complex64,
}

impl Term {
    fn real(x: f64, y: f64) -> Self {
        Self { x: Complex64::new(x, 0.0), y: Complex64::new(y, 0.0) }
    }
}

/// A solution of the population equations.
#[derive(Debug, Clone, PartialEq)]
pub struct SdsDecomposition {
    n: usize,
    terms: Vec<Term>,
    residual: f64,
    canonicalized: bool,
    rank: usize,
}

impl SdsDecomposition {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// `j_max` terms. For even `N` the last one is the pinned `y = 0` term.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `max_n |χ_reconstructed - χ_input|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn canonicalized(&self) -> bool {
        self.canonicalized
    }

    /// Number of free nodes the solver actually used.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn weight_sum(&self) -> Complex64 {
        self.terms.iter().map(|t| t.x).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|t| t.x.im.abs().max(t.y.im.abs())).fold(0.0, f64::max)
    }

    /// Populations implied by the terms (complex in general).
    pub fn reconstruct(&self) -> Vec<Complex64> {
        reconstruct(self.n, &self.terms)
    }

    /// Real parts of the terms as validated parameters, if they form one.
    pub fn to_params(&self) -> Result<SdsParams> {
        SdsParams::new(self.n, self.terms.iter().map(|t| (t.x.re, t.y.re)).collect())
    }

    /// Sorts the unpinned terms by descending weight. The pinned term of an
    /// even-`N` decomposition stays last.
    pub fn canonicalize(&mut self) {
        let free = free_terms(self.n);
        self.terms[..free].sort_by(|a, b| {
            b.x.re.total_cmp(&a.x.re).then_with(|| b.y.re.total_cmp(&a.y.re))
        });
        self.canonicalized = true;
    }

    fn recompute_residual(&mut self, target: &[f64]) {
        self.residual = residual(&self.reconstruct(), target);
    }
}

/// Terms that carry a free amplitude: all of them for odd `N`, all but the
/// pinned one for even `N`.
fn free_terms(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n / 2
    } else {
        n.div_ceil(2)
    }
}

fn reconstruct(n: usize, terms: &[Term]) -> Vec<Complex64> {
    (0..=n)
        .map(|n0| {
            let s: Complex64 = terms
                .iter()
                .map(|t| t.x * t.y.powu(n0 as u32) * (Complex64::new(1.0, 0.0) - t.y).powu((n - n0) as u32))
                .sum();
            s * binomial(n, n0)
        })
        .collect()
}

fn residual(rec: &[Complex64], target: &[f64]) -> f64 {
    rec.iter()
        .zip(target)
        .map(|(a, &b)| (a - Complex64::new(b, 0.0)).norm())
        .fold(0.0, f64::max)
}

/// Nodes and weights of an `r`-point measure matching the moments `mu`.
///
/// The node polynomial comes from the leading `r x r` Hankel system; its
/// roots are refined with a few Newton steps. Weights are the least-squares
/// fit to every supplied moment.
fn prony(mu: &[f64], r: usize) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    if r == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    let hankel = DMatrix::from_fn(r, r, |i, k| mu[i + k]);
    let rhs = DVector::from_fn(r, |i, _| -mu[r + i]);
    let coeffs = hankel.lu().solve(&rhs)?;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return None;
    }
    // Monic node polynomial t^r + c_{r-1} t^{r-1} + ... + c_0.
    let mut companion = DMatrix::<f64>::zeros(r, r);
    for i in 1..r {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..r {
        companion[(i, r - 1)] = -coeffs[i];
    }
    // Defective companions (confluent nodes) never converge: no r-point fit.
    let schur = Schur::try_new(companion, f64::EPSILON, 1000)?;
    let mut nodes: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    for z in nodes.iter_mut() {
        *z = newton_polish(&coeffs, *z);
    }
    let m = mu.len();
    let vander = DMatrix::from_fn(m, r, |row, j| nodes[j].powu(row as u32));
    let target = DVector::from_fn(m, |row, _| Complex64::new(mu[row], 0.0));
    let weights = vander.try_svd(true, true, f64::EPSILON, 1000)?.solve(&target, 1e-14).ok()?;
    let weights: Vec<Complex64> = weights.iter().copied().collect();
    if nodes.iter().chain(&weights).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some((nodes, weights))
}

fn newton_polish(coeffs: &DVector<f64>, mut z: Complex64) -> Complex64 {
    let r = coeffs.len();
    for _ in 0..3 {
        // Horner for p and p'.
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..r).rev() {
            dp = dp * z + p;
            p = p * z + coeffs[k];
        }
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        let next = z - step;
        if (next - z).norm() > 1e-6 * (1.0 + z.norm()) {
            // Far from a simple root: keep the eigenvalue estimate.
            break;
        }
        z = next;
    }
    z
}

fn candidate(state: &GdsState, rank: usize, moments: &[f64]) -> Option<SdsDecomposition> {
    let n = state.n_qubits();
    let pinned = n.is_multiple_of(2);
    let mu = if pinned { &moments[1..] } else { moments };
    let (nodes, weights) = prony(mu, rank)?;
    let mut terms: Vec<Term> = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| {
            // Even N fits the measure y·x(dy), so the weight carries a factor y.
            let x = if pinned { w / y } else { w };
            Term { x, y }
        })
        .collect();
    if terms.iter().any(|t| !t.x.re.is_finite() || !t.x.im.is_finite()) {
        return None;
    }
    terms.resize(free_terms(n), Term::real(0.0, 0.0));
    if pinned {
        let rest: Complex64 = terms.iter().map(|t| t.x).sum();
        terms.push(Term { x: Complex64::new(1.0, 0.0) - rest, y: Complex64::new(0.0, 0.0) });
    }
    let mut dec = SdsDecomposition { n, terms, residual: f64::INFINITY, canonicalized: false, rank };
    dec.canonicalize();
    dec.recompute_residual(state.populations());
    Some(dec)
}

fn is_admissible(dec: &SdsDecomposition, eps: f64) -> bool {
    dec.terms.iter().all(|t| {
        [t.x, t.y].iter().all(|z| z.im.abs() <= eps && z.re >= -eps && z.re <= 1.0 + eps)
    })
}

/// Solves the population equations for mixture parameters.
///
/// Ranks `r = K, K-1, ..., 0` (with `K` free nodes) are tried in turn. The
/// highest-rank solution that reproduces the populations to
/// [`RESIDUAL_TOL`] with parameters inside the `[0, 1]` box is preferred;
/// failing that, the highest-rank solution meeting the residual alone is
/// returned. Lower ranks cover mixtures with fewer distinct amplitudes, which
/// make the full Hankel matrix singular; unused slots are padded with
/// `(x, y) = (0, 0)`.
pub fn solve_decomposition(state: &GdsState) -> Result<SdsDecomposition> {
    let n = state.n_qubits();
    let moments = to_power_moments(state);
    let free = free_terms(n);
    let candidates: Vec<SdsDecomposition> = (0..=free)
        .rev()
        .filter_map(|r| candidate(state, r, &moments))
        .filter(|d| d.residual <= RESIDUAL_TOL)
        .collect();
    if let Some(best) = candidates.iter().find(|d| is_admissible(d, DEFAULT_EPSILON)) {
        return Ok(best.clone());
    }
    candidates.into_iter().next().ok_or_else(|| {
        Error::SolverDegenerate(format!(
            "no rank up to {free} reproduces the populations to {RESIDUAL_TOL:e}"
        ))
    })
}

/// Closed-form inversion for four qubits.
///
/// Returns terms `[(x+, y+), (x-, y-), (x3, 0)]` in that order, without
/// canonicalization. The formulas divide by `y+ - y-` and by the node
/// amplitudes, so coincident or vanishing nodes (including the fully excited
/// state, where every expression is 0/0) are reported as degenerate.
pub fn solve_n4_closed_form(state: &GdsState) -> Result<SdsDecomposition> {
    if state.n_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 5, found: state.n_qubits() + 1 });
    }
    let c = |n0: usize| Complex64::new(state.chi(n0), 0.0);
    let (c40, c31, c22, c13) = (c(4), c(3), c(2), c(1));

    let lead = c31 * c31 * 9.0 - c13 * c40 * 18.0 + c22 * (c31 - c40 * 8.0) * 3.0;
    let radicand = c13 * c13 * c40 * c40 * 324.0
        + c22 * (c22 * c22 * 8.0 - c13 * c31 * 27.0) * c40 * 12.0
        - (c22 * c22 - c13 * c31 * 3.0) * c31 * c31 * 27.0;
    let denom = c22 * c22 * 4.0 + (c31 - c40 * 4.0) * c22 * 6.0 + c31 * c31 * 9.0
        - c13 * (c31 + c40 * 4.0) * 9.0;
    let scale = state.populations().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if denom.norm() <= 1e-14 * scale * scale {
        return Err(Error::SolverDegenerate("closed-form denominator vanishes".into()));
    }
    let root = radicand.sqrt();
    let y_plus = (lead + root) / denom;
    let y_minus = (lead - root) / denom;
    if (y_plus - y_minus).norm() <= 1e-12 || y_plus.norm() <= 1e-14 || y_minus.norm() <= 1e-14 {
        return Err(Error::SolverDegenerate("closed-form nodes coincide or vanish".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let weight = |ya: Complex64, yb: Complex64| {
        (yb * yb * c22 - (yb - one) * (yb - one) * c40 * 6.0)
            / (ya * ya * (ya - yb) * (ya * (yb * 2.0 - one) - yb) * 6.0)
    };
    let x_plus = weight(y_plus, y_minus);
    let x_minus = weight(y_minus, y_plus);
    let x3 = one - x_plus - x_minus;
    let mut terms = vec![
        Term { x: x_plus, y: y_plus },
        Term { x: x_minus, y: y_minus },
        Term { x: x3, y: Complex64::new(0.0, 0.0) },
    ];
    if terms.iter().any(|t| !t.x.re.is_finite() || !t.x.im.is_finite()) {
        return Err(Error::SolverDegenerate("closed-form weights are not finite".into()));
    }
    polish_terms(state.populations(), &mut terms, 2);
    let mut dec = SdsDecomposition { n: 4, terms, residual: f64::INFINITY, canonicalized: false, rank: 2 };
    dec.recompute_residual(state.populations());
    Ok(dec)
}

/// Gauss-Newton refinement of every weight and every unpinned node, kept only
/// while it lowers the residual.
fn polish_terms(target: &[f64], terms: &mut [Term], free: usize) {
    let n = target.len() - 1;
    let one = Complex64::new(1.0, 0.0);
    let mut best = residual(&reconstruct(n, terms), target);
    for _ in 0..50 {
        let rec = reconstruct(n, terms);
        let cols = terms.len() + free;
        let jac = DMatrix::from_fn(n + 1, cols, |n0, c| {
            let b = binomial(n, n0);
            let (a, k) = (n0 as u32, (n - n0) as u32);
            if c < terms.len() {
                let y = terms[c].y;
                y.powu(a) * (one - y).powu(k) * b
            } else {
                let t = terms[c - terms.len()];
                let d_up = if a > 0 { t.y.powu(a - 1) * (one - t.y).powu(k) * f64::from(a) } else { 0.0.into() };
                let d_dn = if k > 0 { t.y.powu(a) * (one - t.y).powu(k - 1) * f64::from(k) } else { 0.0.into() };
                t.x * (d_up - d_dn) * b
            }
        });
        let r = DVector::from_fn(n + 1, |n0, _| Complex64::new(target[n0], 0.0) - rec[n0]);
        let Some(Ok(delta)) = jac.try_svd(true, true, f64::EPSILON, 1000).map(|d| d.solve(&r, 1e-14)) else { break };
        let mut improved = false;
        let mut step = 1.0;
        for _ in 0..20 {
            let mut trial = terms.to_vec();
            for (j, t) in trial.iter_mut().enumerate() {
                t.x += delta[j] * step;
                if j < free {
                    t.y += delta[terms.len() + j] * step;
                }
            }
            let res = residual(&reconstruct(n, &trial), target);
            if res < best {
                best = res;
                terms.copy_from_slice(&trial);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedSeparable,
    NotCertified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NotCertifiedReason {
    /// Some recovered parameter has an imaginary part above tolerance.
    ComplexParameters,
    /// A real parameter lies outside `[-ε, 1 + ε]`.
    ParameterOutOfRange { index: usize, param: Param, value: f64 },
    /// No decomposition reproduces the populations.
    SolverDegenerate,
}

/// Outcome of [`certify`].
///
/// `CertifiedSeparable` is a proof of full separability: the certificate is an
/// explicit separable mixture reproducing the state. `NotCertified` only says
/// that this particular decomposition failed. It is a proof of entanglement
/// for `N <= 4`, where the mixture family is known to cover every separable
/// diagonal-symmetric state, but for `N >= 5` that coverage is conjectural and
/// the verdict should be read as "not certified", not "entangled".
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationResult {
    pub verdict: Verdict,
    /// Clamped decomposition, present when certified.
    pub certificate: Option<SdsDecomposition>,
    /// Unclamped solver output, present whenever the solver succeeded.
    pub solution: Option<SdsDecomposition>,
    pub reason: Option<NotCertifiedReason>,
    pub epsilon: f64,
}

impl CertificationResult {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedSeparable
    }
}

/// Solves for the mixture and checks that every parameter is real and in
/// `[0, 1]` up to `epsilon`, then clamps into the box.
pub fn certify(state: &GdsState, epsilon: f64) -> CertificationResult {
    let not_certified = |solution, reason| CertificationResult {
        verdict: Verdict::NotCertified,
        certificate: None,
        solution,
        reason: Some(reason),
        epsilon,
    };
    let solution = match solve_decomposition(state) {
        Ok(s) => s,
        Err(_) => return not_certified(None, NotCertifiedReason::SolverDegenerate),
    };
    if solution.max_imag() > epsilon {
        return not_certified(Some(solution), NotCertifiedReason::ComplexParameters);
    }
    for (index, t) in solution.terms.iter().enumerate() {
        for (param, value) in [(Param::X, t.x.re), (Param::Y, t.y.re)] {
            if !(-epsilon..=1.0 + epsilon).contains(&value) {
                return not_certified(
                    Some(solution.clone()),
                    NotCertifiedReason::ParameterOutOfRange { index, param, value },
                );
            }
        }
    }
    let mut certificate = solution.clone();
    for t in certificate.terms.iter_mut() {
        *t = Term::real(t.x.re.clamp(0.0, 1.0), t.y.re.clamp(0.0, 1.0));
    }
    certificate.recompute_residual(state.populations());
    CertificationResult {
        verdict: Verdict::CertifiedSeparable,
        certificate: Some(certificate),
        solution: Some(solution),
        reason: None,
        epsilon,
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn x_ln_x(k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * (k as f64).ln()
    }
}

/// Largest value `χ_{n0,n1}` can take in a product mixture:
/// `(n0^n0 / n0!) (n1^n1 / n1!) (N! / N^N)`, with `0^0 = 1`.
pub fn population_bound(n: usize, n0: usize) -> f64 {
    assert!(n0 <= n, "n0 = {n0} exceeds N = {n}");
    let n1 = n - n0;
    let ln = x_ln_x(n0) - ln_factorial(n0) + x_ln_x(n1) - ln_factorial(n1) + ln_factorial(n)
        - x_ln_x(n);
    ln.exp()
}

/// A population exceeding its separable maximum; each one proves
/// entanglement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub n0: usize,
    pub chi: f64,
    pub bound: f64,
}

pub fn check_population_bounds(state: &GdsState) -> Vec<BoundViolation> {
    let n = state.n_qubits();
    (0..=n)
        .filter_map(|n0| {
            let bound = population_bound(n, n0);
            let chi = state.chi(n0);
            (chi > bound + BOUND_TOL).then_some(BoundViolation { n0, chi, bound })
        })
        .collect()
}
