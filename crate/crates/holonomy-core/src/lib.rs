//! Geometric phases for pure and mixed quantum states under cyclic (and open)
//! unitary evolution.
//!
//! A mixed state with non-degenerate nonzero spectrum lives on a coadjoint
//! orbit of U(n): the set of density matrices with a fixed, strictly
//! decreasing spectrum `κ₁ > κ₂ > … > κ_k`. Above each orbit sits the space
//! of ordered orthonormal k-frames in Cⁿ, fibered by U(1)ᵏ phase changes of
//! the individual columns. A closed loop of density matrices lifts
//! horizontally to the frame space; the lift fails to close by k independent
//! phases, one per spectral level. The κ-weighted average of those phases
//! equals minus the symplectic area (for the Kostant–Kirillov–Souriau
//! two-form) of any surface spanning the loop.
//!
//! The crate verifies that identity numerically at desk scale (n = 2…6),
//! together with the supporting structure: the u(n) generator toolkit
//! ([`algebra`]), frames, weights and orbits ([`states`]), connection
//! one-forms, local charts and the KKS form ([`geometry`]), horizontal lifts
//! and holonomies ([`transport`]), and Bargmann invariants, null phase
//! curves and Pancharatnam lifts ([`npc`]).
//!
//! Data-parallel inner loops (quadrature cells, batch runs, triple scans) go
//! through [`exec`], which uses rayon when the default `parallel` feature is
//! enabled and plain iterators otherwise. Results are independent of the
//! evaluation order either way: parallel maps collect in index order and all
//! reductions run sequentially afterwards.

pub mod algebra;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod npc;
pub mod rng;
pub mod selftest;
pub mod states;
pub mod transport;

pub use error::{Error, Result};
