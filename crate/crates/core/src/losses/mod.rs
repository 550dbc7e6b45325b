//! Training objectives and their analytic gradients.
//!
//! - [`view_synthesis_loss`]: L1 photometric error between the target and each
//!   warped source, optionally weighted per pixel by an explainability mask.
//! - [`explainability_regularizer`]: cross-entropy toward label 1 that keeps
//!   masks from collapsing to zero.
//! - [`smoothness_loss`]: L1 norm of second-order depth differences.
//! - [`total_loss`]: the multi-scale sum of the three.

mod explainability;
mod photometric;
mod pyramid;
mod smoothness;
mod total;

pub use explainability::{explainability_regularizer, ExplainabilityField, RegularizerLoss};
pub use photometric::{view_synthesis_loss, view_synthesis_loss_logits, PhotometricLoss};
pub use pyramid::{build_pyramid, depth_pyramid};
pub use smoothness::{smoothness_loss, SmoothnessLoss};
pub use total::{total_loss, LossConfig, LossGradients, LossInputs, LossReport, Normalization};
