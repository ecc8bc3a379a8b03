// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Analysis toolkit for the transvection-twirl approximate unitary design
//! scheme on `m` qubits.
//!
//! The scheme applies one uniformly random Pauli followed by `k` uniformly
//! random transvection Cliffords. Its `t`-copy moment operator restricted to
//! the sum-zero Pauli-product basis is a real symmetric matrix; this crate
//! builds it exactly, computes its spectrum, certifies convergence to the
//! Clifford (Haar) twirl and verifies the invariant-subspace structure of the
//! three-copy representation.
//!
//! Modules:
//! - [`gf2_symplectic`]: F₂^{2m} vectors, symplectic form, transvections.
//! - [`pauli_algebra`]: phase-exact Pauli products and the Hermitian
//!   sum-zero basis.
//! - [`twirl_superops`]: Pauli, transvection and Haar twirls on the sum-zero
//!   basis.
//! - [`spectral_analysis`]: spectra, S₃ projectors and sector decompositions.
//! - [`rep_theory`]: invariant subspaces, intertwiners and Gram identities.
//! - [`design_certify`]: iteration counts, distance bounds and sampling.

pub mod design_certify;
pub mod error;
pub mod gf2_symplectic;
pub mod pauli_algebra;
pub mod rational;
pub mod rep_theory;
pub mod spectral_analysis;
pub mod twirl_superops;

pub use error::{Error, Result};
pub use gf2_symplectic::{F2Vector, SymplecticMatrix, TransvectionLabel};
