//! Geometric (Berry) phases of a spin-1/2 coupled to quantized field modes.
//!
//! The crate provides the pieces needed to compute such phases three
//! independent ways and check them against each other:
//!
//! * [`fock`] — truncated Fock-space algebra: ladder, spin, and Schwinger
//!   SU(2) operators, tensor products, coherent states.
//! * [`hamiltonians`] — builders for the semiclassical 2x2 family, the
//!   single-mode Jaynes-Cummings model and its phase-shifted conjugates, and
//!   the two-mode polarization-loop family.
//! * [`spectral`] — Hermitian eigendecomposition, analytic dressed states,
//!   and smooth eigenstate tracking along parameter paths.
//! * [`holonomy`] — the geometric-phase engine: discrete Pancharatnam
//!   products, unwrapped connection accumulation (recovering 2*pi*n winding
//!   terms), closed-form phase formulas, solid angles, mixed-state phases,
//!   and the classical polarization loop.
//! * [`adiabatic`] — Schroedinger propagation under slow parameter schedules,
//!   dynamical-phase subtraction, convergence studies, and the coherent-state
//!   semiclassical-limit experiment.
//!
//! Conventions, fixed once and used everywhere: the geometric phase of a
//! closed chain of states is `-arg prod_k <psi_k|psi_{k+1}>` (equivalently
//! `i * integral <psi|d psi>` for smooth families), wrapped values live in
//! `(-pi, pi]`, angles are radians, and `hbar = 1`.

pub mod adiabatic;
pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod holonomy;
pub(crate) mod sector;
pub mod spectral;

pub use adiabatic::{
    ConvergenceRow, EvolutionResult, Profile, Schedule, SemiclassicalLimitReport,
};
pub use error::{Error, Result};
pub use fock::{Operator, SpaceSpec, StateVector, C64};
pub use holonomy::{LoopPoint, Method, ParameterLoop, PhaseResult};
pub use spectral::{BranchSign, DressedLabel, TrackedBand};
