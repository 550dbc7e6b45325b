pub mod eval;
pub mod fit;
pub mod gradcheck;
pub mod synth;
pub mod warp;

use std::path::Path;

use anyhow::Context as _;

pub fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_file(path: &Path, data: impl AsRef<[u8]>) -> anyhow::Result<()> {
    std::fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}
