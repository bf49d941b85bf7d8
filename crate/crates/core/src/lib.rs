//! Separability certification for N-qubit mixed states that are diagonal in
//! the Dicke (symmetric) basis.
//!
//! The crate is organised bottom-up:
//!
//! * [`dicke`] builds Dicke projectors, the diagonal-symmetric state
//!   representation and the forward map from product-state mixtures to
//!   Dicke populations.
//! * [`decomposer`] inverts that map with a Prony/Hankel moment method and
//!   turns the recovered mixture into a separability certificate.
//! * [`superradiance`] evolves populations under the idealized Dicke cascade.
//! * [`ppt`] checks positivity under partial transposition.
//! * [`volume`] estimates state-space volumes in population coordinates.
//! * [`io`] holds the JSON and CSV formats shared with the CLI.
//!
//! Population vectors are always indexed by `n0` ascending: entry `n0` is the
//! weight of the Dicke level with `n0` qubits in `|0⟩` and `N - n0` in `|1⟩`.

pub mod decomposer;
pub mod dicke;
pub mod error;
pub mod exec;
pub mod io;
pub mod linalg;
pub mod ppt;
pub mod superradiance;
pub mod volume;

pub use decomposer::{
    certify, check_population_bounds, population_bound, solve_decomposition, solve_n4_closed_form,
    to_power_moments, BoundViolation, CertificationResult, NotCertifiedReason, SdsDecomposition,
    Verdict, DEFAULT_EPSILON,
};
pub use dicke::{
    dicke_projector, gds_density_matrix, sds_density_matrix_phase_avg, sds_populations,
    DenseHermitian, GdsState, SdsParams, MAX_DENSE_QUBITS,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use ppt::{is_ppt, partial_transpose, PptReport, DEFAULT_PPT_TOL};
pub use superradiance::{
    closed_form_n4, closed_form_n8, evolve, generator, trajectory, CascadeGenerator, Spacing, TauGrid,
    Trajectory,
};
pub use volume::{
    gds_volume, ppt_gds_volume, sample_gds_simplex, sds_volume_formula, sds_volume_mc,
    VolumeEstimate, VolumeMethod,
};
