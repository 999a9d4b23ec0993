//! Monte Carlo laboratory for B-symmetric log-concave measures, bodies of
//! revolution and multi-block measures, with Poincaré-constant lower bounds.

pub mod batch;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod hexfloat;
pub mod linalg;
pub mod moments;
pub mod poincare;
pub mod profiles;
pub mod quadrature;
pub mod rng;
pub mod samplers;
pub mod scalar;
pub mod stats;

pub use batch::{McmcDiagnostics, Provenance, SampleBatch};
pub use error::{Error, Result};
pub use geometry::{ConvexBody, Family, RadiusProfile, RevolutionBody};
pub use profiles::{NormalizedPair, RadialProfile};
pub use moments::{MomentAccumulator, MomentSummary};
pub use rng::RngStream;
pub use scalar::{Field, Real};

pub type ConvexBodyF32 = ConvexBody<f32>;
pub type ExactMomentAccumulator = MomentAccumulator<num_rational::BigRational>;
