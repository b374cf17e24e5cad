pub mod agent;
pub mod concepts;
pub mod data;
pub mod dialog;
pub mod error;
pub mod frame;
pub mod grounding;
pub mod learning;
pub mod num;
pub mod semparse;
pub mod simuser;
pub mod world;

pub use error::{Error, Result};

/// Exact rational used where arithmetic must not round.
pub type Rational = num_rational::Ratio<i64>;

pub type Belief = dialog::BeliefState<f64>;
pub type Belief32 = dialog::BeliefState<f32>;
pub type ExactBelief = dialog::BeliefState<Rational>;
pub type Evidence = dialog::UtteranceBelief<f64>;
pub type ExactEvidence = dialog::UtteranceBelief<Rational>;
pub type Grounding = grounding::GroundingDistribution<f64>;
pub type ExactGrounding = grounding::GroundingDistribution<Rational>;
