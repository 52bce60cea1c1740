//! Exact numerics for the biased PXP chain.
//!
//! `H_g = Σ_i P_{i-1} (e^{g} σ⁺_i + e^{-g} σ⁻_i) P_{i+1}` on a periodic ring of
//! even length `L`, restricted to the blockaded sector that contains the Néel
//! states. `H_g` is similar to the Hermitian PXP Hamiltonian through
//! `e^{g N↑}`, so its spectrum is real and `g`-independent, and its dynamics
//! and right eigenvectors follow from a single diagonalization of `H_0`.
//!
//! Modules, bottom-up:
//! - [`basis`]: sector enumeration and lookup
//! - [`operators`]: sparse `H_g`, the weight `e^{g N↑}`, similarity check
//! - [`spectral`]: eigensystem of `H_0`, right eigenvectors, scars, `p_{N↑}`
//! - [`evolution`]: Néel return probabilities, norm decomposition, ODE oracle
//! - [`entanglement`]: half-ring Schmidt entropies
//! - [`io`], [`cli`]: CSV/JSON outputs and the `scarlab` command line

pub mod basis;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod io;
pub mod operators;
pub mod spectral;

pub use basis::{enumerate_basis, neel_states, n_up, BasisState, ConstrainedBasis};
pub use entanglement::{entropy_sweep, schmidt_entropy, Bipartition, CutSpec, EntropyRecord};
pub use error::{Result, ScarError};
pub use evolution::{
    evolve_direct, evolve_direct_with, evolve_similarity, norm_decomposition, propagate_h0,
    time_grid, EvolutionTrace,
};
pub use operators::{
    build_h, build_v, check_similarity, similarity_residual, DiagonalWeight, ModelParams,
    OperatorKind, OperatorMatrix,
};
pub use spectral::{
    eigendecompose_h0, identify_scars, p_nup, right_eigvec, scar_overlaps, spectrum_invariance,
    EigenSystem, NupDistribution, ScarCriterion, ScarLabeling, SpectrumReport,
};
