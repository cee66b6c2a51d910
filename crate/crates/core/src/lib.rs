pub mod ordinals;

pub use ordinals::{FinOrdSet, Ordinal, OrdinalError};
pub mod norms;
pub mod rho;
pub mod space;
pub mod vectors;
