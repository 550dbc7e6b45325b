//! Synthetic scenes with closed-form ground truth, and the on-disk formats
//! used to exchange sequences.

mod formats;
mod io;
mod scene;

pub use formats::{
    decode_pnm, decode_wf01, encode_pnm, encode_wf01, format_intrinsics, format_manifest, parse_intrinsics,
    parse_manifest, Manifest, WF01_MAGIC,
};
pub use io::{load_image, load_sequence, save_image, save_sequence, MANIFEST_NAME};
pub use scene::{render_scene, SceneKind, SceneSpec, SnippetSequence, TextureMode};
