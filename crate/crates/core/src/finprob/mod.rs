//! Finite commutative probability: partition subalgebras, conditional
//! expectations, commuting squares and finite-window Markov models.

mod markov;
mod site_model;
mod space;

pub use markov::*;
pub use site_model::*;
pub use space::*;
