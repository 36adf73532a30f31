//! A desk-scale exact-diagonalization laboratory for the random XXZ
//! spin-1/2 chain in its Ising phase.
//!
//! The crate builds the chain's Hamiltonians and their particle-number
//! graded block structure ([`qoperators`]), runs dense per-sector spectral
//! calculus ([`spectral`]), evaluates a Gaussian-smoothed family of energy
//! window indicators and their band-limited truncations ([`smoothing`]),
//! performs Heisenberg evolution with local approximants and light-cone
//! diagnostics ([`dynamics`]), and drives reproducible disorder ensembles
//! with CSV/JSON output ([`experiments`]).
//!
//! ```
//! use xxz_lab::lattice::SiteInterval;
//! use xxz_lab::qoperators::{build_hamiltonian, DisorderRealization, ModelParams};
//! use xxz_lab::spectral::diagonalize;
//!
//! let ambient = SiteInterval::of_len(6);
//! let params = ModelParams::new(2.0, 1.0).unwrap();
//! let omega = DisorderRealization::constant(ambient, 0.0);
//! let h = build_hamiltonian(&ambient, &params, &omega, None).unwrap();
//! let eig = diagonalize(&h).unwrap();
//! // the all-spins-up state is the simple ground state at energy zero
//! assert!(eig.min_eigenvalue().abs() < 1e-12);
//! ```

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod guide;
pub mod lattice;
pub mod qoperators;
pub mod quad;
pub mod smoothing;
pub mod spectral;

pub use error::{Error, Result};
