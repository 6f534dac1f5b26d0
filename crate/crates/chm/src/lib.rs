//! Complex Hadamard matrices and their relatives.
//!
//! A complex Hadamard matrix is a square matrix with unit-modulus entries
//! whose rows are pairwise orthogonal; equivalently, `√N` times a unitary
//! with unimodular entries. This crate provides:
//!
//! - exact (`ButsonMatrix`, root-of-unity exponents) and floating
//!   (`UnimodularMatrix`) carriers, the equivalence relation, tensor and
//!   Diță products, and verification ([`matrix`]);
//! - the classical constructions: Fourier matrices of finite abelian
//!   groups, Walsh, Paley, Williamson, the named 6×6 and 7×7 families,
//!   and block constructions from Gauss sums ([`constructions`]);
//! - exact arithmetic obstructions to Butson, circulant, and bistochastic
//!   existence via vanishing sums of roots of unity ([`obstructions`]);
//! - determinant/norm/excess invariants and bistochastic forms
//!   ([`analytics`]), and the glow: the law of the excess over the
//!   equivalence orbit, with its partition-indexed moment machinery
//!   ([`glow`]);
//! - the defect, i.e. the first-order deformation dimension, computed
//!   numerically and against closed forms ([`defect`]);
//! - almost Hadamard machinery: 1-norm criticality and local-maximum
//!   tests on the orthogonal and unitary groups ([`almost_hadamard`]);
//! - circulant matrices, cyclic roots, and the Φ functional
//!   ([`circulant`]);
//! - partial Hadamard matrices: counting, completions, and submatrix
//!   polar analysis ([`partial`]);
//! - the numerical layer of quantum permutation groups: magic unitaries,
//!   transfer matrices, truncated character moments, Kesten moments, and
//!   pre-Latin-square semigroups ([`quantum`]).

pub mod error;
pub mod exec;

pub mod cyclotomic;
pub mod group;
pub mod matrix;

pub mod constructions;
pub mod obstructions;
pub mod analytics;
pub mod glow;
pub mod defect;
pub mod almost_hadamard;
pub mod circulant;
pub mod partial;

pub mod io;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Tolerance on `|entry| - 1` for unimodular matrices.
pub const TOL_ENTRY: f64 = 1e-9;

/// Default Gram tolerance; scalar products are compared against `TOL_GRAM * N`.
pub const TOL_GRAM: f64 = 1e-8;
