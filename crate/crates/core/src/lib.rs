//! Numerical laboratory for Gamow vectors of the reversed harmonic oscillator
//! and its damped-motion twin.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: uniform grids, sampled wavefunctions, Simpson inner products
//! - [`special`]: Hermite, Γ, Kummer `M` and parabolic cylinder `D_ν`
//! - [`resonances`]: the resonance families `f_n^±` and Gamow expansions
//! - [`continuum`]: continuum eigenfunctions and their residues
//! - [`propagators`]: exact, PDE and split-step time evolution
//! - [`transform`]: the unitary map between the `(u,v)` and `(x,p)` pictures
//! - [`bump`]: compactly supported bumps and least-squares bump fits
//! - [`background`]: background functions and coefficient-decay diagnostics

pub mod background;
pub mod bump;
pub mod continuum;
pub mod error;
pub mod grid;
pub mod numerics;
pub mod propagators;
pub mod resonances;
pub mod special;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{inner_product, norm, resample, Grid, Representation, WaveFunction};
