//! Quantum evolution with position as the evolution parameter.
//!
//! * [`dispersion`]: on-shell maps `p ↔ E` and the transition kernels
//!   `⟨p|t⟩`, `⟨x|E⟩`.
//! * [`orthogonality`]: smeared-delta checks of `⟨t|t'⟩` and `⟨x|x'⟩`.
//! * [`pep`]: time-of-arrival amplitudes at a detector position, the
//!   time-basis route, and the even-kernel inconsistency.
//! * [`tep`]: ordinary time evolution and probability current, for
//!   cross-checking arrival densities.
//! * [`tunneling`]: WKB tunneling probability from the imaginary Jacobi action.
//!
//! Natural units, `ħ = c = 1`.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dispersion;
pub mod error;
pub mod orthogonality;
pub mod pep;
pub mod quadrature;
pub mod tep;
pub mod tunneling;

pub use dispersion::{
    kernel_p_t, kernel_p_t_even, kernel_x_e, BranchConfig, Dispersion, EnergySign, HalfLine,
    KernelSample, Regime,
};
pub use error::{Error, Result};
pub use orthogonality::{
    check_even_kernel_orthogonality, check_position_orthogonality,
    check_position_orthogonality_unrestricted, check_time_orthogonality,
    check_time_orthogonality_unrestricted, CheckKind, OrthogonalityReport, SmearingTest,
    TestFunction,
};
pub use pep::{
    arrival_amplitude, arrival_amplitude_via_time_basis, arrival_distribution,
    even_kernel_arrival_routes, nonrel_arrival_amplitude, ArrivalAmplitude, ArrivalDistribution,
    EvenKernelRoutes, FullLineWavefunction, MomentumGrid, MomentumWavefunction,
};
pub use tep::{
    crosscheck_arrival_vs_current, evolve_tep, probability_current, CrosscheckReport,
    PositionWavefunction, TimeWindow,
};
pub use tunneling::{
    exact_rectangular_transmission, find_turning_points, jacobi_action_im, tunneling_probability,
    PotentialSpec, TunnelingResult,
};
pub use num_complex::Complex64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
