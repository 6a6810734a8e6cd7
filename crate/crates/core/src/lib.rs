//! Configuration spaces over `Y = ℝ*₊ × ℝᵈ`, the cone of positive discrete
//! Radon measures on `ℝᵈ`, and the Plato space of pinpointing
//! configurations that the reflection map `R` identifies with the cone.
//!
//! Alongside the data structures the crate ships seedable Poisson and Gamma
//! samplers, a vague-topology toolkit built on finite test-function
//! families, and the statistics used to check sampler output against
//! closed-form laws.

pub mod cli;
pub mod cone;
pub mod configuration;
mod error;
pub mod function;
pub mod io;
pub mod plato;
mod quadrature;
pub mod sampling;
pub mod stats;
pub mod topology;
pub mod window;

pub use cone::DiscreteMeasure;
pub use configuration::{Configuration, MarkedPoint, Position};
pub use error::{Error, Result};
pub use function::{Domain, TestFunction};
pub use plato::{to_plato, PlatoConfiguration};
pub use sampling::{LevySpec, MarkDensity, SampleReport};
pub use topology::{BumpGrid, ConvergenceReport, TestFamily};
pub use window::{MarkInterval, Window};
