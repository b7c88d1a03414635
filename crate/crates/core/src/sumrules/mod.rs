//! Sum-rule conditions, perturbations and convergence diagnostics.

pub mod conditions;
pub mod experiments;
pub mod oscillatory;
pub mod perturb;
pub mod series;

pub use conditions::*;
pub use experiments::*;
pub use oscillatory::*;
pub use perturb::*;
pub use series::*;
