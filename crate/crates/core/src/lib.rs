//! Stable sampling formulas in shift-invariant spaces from samples,
//! forward/backward/central differences and averages.
//!
//! The pipeline, for a generator `φ` and an offset `a`:
//!
//! 1. [`generators::zak_kernel`] tabulates `K_a` and checks the Riesz
//!    condition `0 < ||K_a||_0 <= ||K_a||_∞ < ∞`.
//! 2. [`kernels::shannon_kernel`] expands the interpolating function
//!    `S_a` in shifts of `φ`.
//! 3. [`schemes::scheme_matrix`] turns a list of channel operators into the
//!    matrix `M` over one sampling period; [`riesz::invert_scheme`] (or
//!    [`riesz::left_inverse`] for redundant channel sets) yields its dual.
//! 4. [`kernels::assemble_kernels`] reads the composite kernels `T_{a,j}`
//!    off the dual's columns and [`reconstruct::reconstruct_1d`] sums the
//!    series.
//!
//! The two-dimensional case uses Kronecker products of one-dimensional
//! schemes.

pub mod error;
pub mod generators;
pub mod kernels;
pub mod reconstruct;
pub mod riesz;
pub mod schemes;

pub use error::{Error, Result};
pub use generators::{
    bspline_eval, riesz_condition, zak_kernel, zak_kernel_2d, Generator, Generator2d, RieszStatus, ZakKernel,
    ZakKernel2d,
};
pub use kernels::{
    assemble_kernels, assemble_kernels_2d, interpolation_check, shannon_kernel, shannon_kernel_2d, BaseKernel2d,
    SamplingKernelSet, SamplingKernelSet2d, ShannonKernel, ShannonKernel2d,
};
pub use reconstruct::{
    frame_reconstruct_1d, reconstruct_1d, reconstruct_2d, DualChoice, Pipeline1d, Pipeline2d,
    ReconstructionReport, Signal, Signal2d,
};
pub use riesz::{
    biorthogonality_check, invert_scheme, kronecker, left_inverse, DualMatrix, DualMode, SchemeMatrix,
};
pub use schemes::{apply_operators, apply_operators_2d, scheme_matrix, OperatorKind, OperatorSpec, SampleSet, SampleSet2d};
