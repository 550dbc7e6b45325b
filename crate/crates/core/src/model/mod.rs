//! Direct parameterization of depth, pose and explainability, optimized with
//! Adam against the multi-scale objective.

mod adam;
mod checkpoint;
mod depth;
mod fit;
mod state;

pub use adam::{adam_step, Adam, AdamConfig, Moments};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, Checkpoint};
pub use depth::{DepthField, DEPTH_ALPHA, DEPTH_BETA};
pub use fit::{fit_snippet, FitResult, HistoryEntry};
pub use state::{init_state, SnippetState, StateConfig};
