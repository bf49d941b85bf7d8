//! Idealized Dicke-model superradiant cascade.
//!
//! Level `n0` (qubits in `|0⟩`) decays into `n0 + 1` at rate `(n0 + 1) n1`,
//! with time measured in units of the single-atom decay rate. The system
//! starts maximally excited (`χ_{0,N} = 1`) and drains into the ground level.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::dicke::GdsState;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::expm;

/// Rate matrix of the cascade in the `n0` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeGenerator {
    n: usize,
    matrix: DMatrix<f64>,
}

impl CascadeGenerator {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `exp(τ G)`.
    pub fn propagator(&self, tau: f64) -> Result<DMatrix<f64>> {
        check_tau(tau)?;
        Ok(expm(&(&self.matrix * tau)))
    }
}

/// Loss rate out of level `n0`: `(n0 + 1)(N - n0)`.
fn decay_rate(n: usize, n0: usize) -> i64 {
    ((n0 + 1) * (n - n0)) as i64
}

/// Builds the lower-bidiagonal generator: diagonal `-(n0 + 1) n1`, feed
/// `n0 (n1 + 1)` from level `n0 - 1`.
pub fn generator(n: usize) -> CascadeGenerator {
    assert!(n >= 1, "cascade needs at least one qubit");
    let mut rates = vec![vec![0i64; n + 1]; n + 1];
    for n0 in 0..=n {
        rates[n0][n0] = -decay_rate(n, n0);
        if n0 > 0 {
            rates[n0][n0 - 1] = (n0 * (n - n0 + 1)) as i64;
        }
    }
    debug_assert!((0..=n).all(|c| (0..=n).map(|r| rates[r][c]).sum::<i64>() == 0));
    let matrix = DMatrix::from_fn(n + 1, n + 1, |r, c| rates[r][c] as f64);
    CascadeGenerator { n, matrix }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau < 0.0 || !tau.is_finite() {
        return Err(Error::NegativeTime(tau));
    }
    Ok(())
}

fn initial_vector(n: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n + 1);
    v[0] = 1.0;
    v
}

/// Populations at time `tau` from the maximally excited start.
pub fn evolve(n: usize, tau: f64) -> Result<GdsState> {
    let g = generator(n);
    let chi = g.propagator(tau)? * initial_vector(n);
    GdsState::new(chi.iter().copied().collect())
}

/// Like [`evolve`], starting from an arbitrary population vector.
pub fn evolve_from(state: &GdsState, tau: f64) -> Result<GdsState> {
    let g = generator(state.n_qubits());
    let v = DVector::from_column_slice(state.populations());
    let chi = g.propagator(tau)? * v;
    GdsState::new(chi.iter().copied().collect())
}

/// The exponential sums cancel to about 1e-12 near `tau = 0`. Negatives that
/// small are set to zero.
fn closed_form_state(mut chi: Vec<f64>) -> Result<GdsState> {
    for v in chi.iter_mut().filter(|v| (-CANCELLATION_TOL..0.0).contains(*v)) {
        *v = 0.0;
    }
    GdsState::new(chi)
}

const CANCELLATION_TOL: f64 = 1e-9;

/// Closed-form four-qubit populations.
pub fn closed_form_n4(tau: f64) -> Result<GdsState> {
    check_tau(tau)?;
    let t = tau;
    let e4 = (-4.0 * t).exp();
    let e6 = (-6.0 * t).exp();
    let chi_04 = e4;
    let chi_13 = 2.0 * e4 - 2.0 * e6;
    let chi_22 = 6.0 * e6 * (-2.0 * t - 1.0) + 6.0 * e4;
    let chi_31 = 36.0 * e4 * (t - 1.0) + 36.0 * e6 * (t + 1.0);
    let chi_40 = e6 * (-24.0 * t - 28.0) + e4 * (27.0 - 36.0 * t) + 1.0;
    closed_form_state(vec![chi_04, chi_13, chi_22, chi_31, chi_40])
}

/// Closed-form eight-qubit populations.
pub fn closed_form_n8(tau: f64) -> Result<GdsState> {
    check_tau(tau)?;
    let t = tau;
    let e = |k: f64| (-k * t).exp();
    let chi_08 = e(8.0);
    let chi_17 = 4.0 / 3.0 * (e(8.0) - e(14.0));
    let chi_26 = (-70.0 * e(14.0) + 28.0 * e(8.0) + 42.0 * e(18.0)) / 15.0;
    let chi_35 = 14.0 / 5.0 * (9.0 * e(18.0) - 5.0 * e(14.0) + e(8.0) - 5.0 * e(20.0));
    let chi_44 = 14.0 / 3.0
        * (-60.0 * t * e(20.0) + 54.0 * e(18.0) - 10.0 * e(14.0) + e(8.0) - 45.0 * e(20.0));
    let chi_53 = 28.0 / 3.0
        * (75.0 * (4.0 * t + 5.0) * e(20.0) - 25.0 * e(14.0)
            + e(8.0)
            + 27.0 * e(18.0) * (20.0 * t - 13.0));
    let chi_62 = 28.0
        * (-50.0 * e(14.0) * (3.0 * t - 2.0) + e(8.0)
            - 162.0 * e(18.0) * (5.0 * t - 2.0)
            - 25.0 * (12.0 * t + 17.0) * e(20.0));
    let chi_71 = 196.0 / 5.0
        * (125.0 * e(14.0) * (2.0 * t - 1.0)
            + 125.0 * (2.0 * t + 3.0) * e(20.0)
            + e(8.0) * (10.0 * t - 7.0)
            + 81.0 * e(18.0) * (10.0 * t - 3.0));
    let chi_80 = -800.0 * e(14.0) * (7.0 * t - 3.0) - 196.0 * e(20.0) * (20.0 * t + 31.0)
        + 49.0 / 5.0 * e(8.0) * (23.0 - 40.0 * t)
        + 1568.0 / 5.0 * e(18.0) * (11.0 - 45.0 * t)
        + 1.0;
    closed_form_state(vec![chi_08, chi_17, chi_26, chi_35, chi_44, chi_53, chi_62, chi_71, chi_80])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// A `min:max:points:lin|geom` time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self { min: 1e-3, max: 10.0, points: 200, spacing: Spacing::Geometric }
    }
}

impl TauGrid {
    pub fn new(min: f64, max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let grid = Self { min, max, points, spacing };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGrid(msg.to_string()));
        if !self.min.is_finite() || !self.max.is_finite() || self.min < 0.0 {
            return bad("bounds must be finite and nonnegative");
        }
        if self.max < self.min {
            return bad("max must not be below min");
        }
        if self.points == 0 {
            return bad("need at least one point");
        }
        if self.spacing == Spacing::Geometric && self.min <= 0.0 {
            return bad("geometric spacing needs min > 0");
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.min];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * f,
                    Spacing::Geometric => self.min * (self.max / self.min).powf(f),
                }
            })
            .map(|v| v.clamp(self.min, self.max))
            .collect()
    }
}

impl FromStr for TauGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidGrid(format!("expected min:max:points:lin|geom, got {s:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let spacing = match parts[3].trim() {
            "lin" => Spacing::Linear,
            "geom" => Spacing::Geometric,
            _ => return Err(bad()),
        };
        Self::new(min, max, points, spacing)
    }
}

/// Populations sampled along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n_qubits: usize,
    pub tau: Vec<f64>,
    pub states: Vec<GdsState>,
}

/// Evolves to every grid point. The grid must be ascending and nonnegative.
pub fn trajectory(n: usize, tau_grid: &[f64]) -> Result<Trajectory> {
    trajectory_with(Execution::default(), n, tau_grid)
}

pub fn trajectory_with(exec: Execution, n: usize, tau_grid: &[f64]) -> Result<Trajectory> {
    if let Some(&bad) = tau_grid.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::NegativeTime(bad));
    }
    if tau_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid("time grid must be ascending".into()));
    }
    let g = generator(n);
    let start = initial_vector(n);
    let states = exec
        .map_indexed(tau_grid.len(), |i| {
            let chi = g.propagator(tau_grid[i])? * &start;
            GdsState::new(chi.iter().copied().collect())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { n_qubits: n, tau: tau_grid.to_vec(), states })
}
