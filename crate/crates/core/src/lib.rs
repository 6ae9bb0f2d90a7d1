//! Thompson's group `F`, its site actions, and finite conditional-expectation
//! checks for stationary Markov chains.

pub mod dilation;
pub mod error;
pub mod finprob;
pub mod fword;
pub mod pl;
pub mod random;
pub mod scalar;
pub mod sites;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Exact chains and spaces, used by the acceptance sweeps.
pub type ExactSpace = finprob::FiniteSpace<Rational>;
pub type ExactMatrix = finprob::StochasticMatrix<Rational>;
pub type ExactWeights = finprob::WeightVector<Rational>;
pub type ExactCoupling = dilation::CouplingMap<Rational>;
pub type ExactWindow = finprob::WindowModel<Rational>;

/// Floating-point counterparts, for exploration on larger alphabets.
pub type FloatSpace = finprob::FiniteSpace<f64>;
pub type FloatMatrix = finprob::StochasticMatrix<f64>;
pub type FloatWeights = finprob::WeightVector<f64>;
pub type FloatCoupling = dilation::CouplingMap<f64>;
pub type FloatWindow = finprob::WindowModel<f64>;
