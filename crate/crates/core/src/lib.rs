//! Locally D-optimal designs on the k-dimensional unit ball for regression
//! models whose elemental information is `λ(f(x)ᵀβ) f(x) f(x)ᵀ`.
pub mod cli;
pub mod design;
pub mod discretize;
pub mod equivariance;
pub mod error;
pub mod information;
pub mod models;
pub mod optim;
pub mod roots;
pub mod solver;
pub mod verify;

pub use design::{ExactDesign, MarginalDesign};
pub use error::{DesignError, Result};
pub use models::{FnIntensity, Intensity, IntensityModel, Properties, ShiftedIntensity};
pub use solver::{solve, CaseLabel, SolveOptions, SolveReport, SupportForm};
