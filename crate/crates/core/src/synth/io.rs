use std::path::{Path, PathBuf};

use super::formats::{
    decode_wf01, encode_wf01, format_intrinsics, format_manifest, parse_intrinsics, parse_manifest, Manifest,
};
use super::scene::SnippetSequence;
use crate::error::{Error, Result};
use crate::eval::{parse_trajectory, format_trajectory, Trajectory};
use crate::image::Image;

pub const MANIFEST_NAME: &str = "manifest.txt";

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, data).map_err(|e| Error::io(path, e))
}

pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), encode_wf01(img))
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    decode_wf01(&read(path.as_ref())?)
}

/// Writes `manifest.txt`, `intrinsics.txt`, `frame_NNN.wf` and, when present,
/// `depth_NNN.wf` and `poses.txt` into `dir`.
pub fn save_sequence(seq: &SnippetSequence, dir: impl AsRef<Path>) -> Result<()> {
    seq.validate()?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut m = Manifest {
        intrinsics: "intrinsics.txt".into(),
        target: seq.target_index,
        ..Default::default()
    };
    write(&dir.join(&m.intrinsics), format_intrinsics(&seq.intrinsics))?;
    for (k, img) in seq.images.iter().enumerate() {
        let name = PathBuf::from(format!("frame_{k:03}.wf"));
        save_image(img, dir.join(&name))?;
        m.frames.push(name);
    }
    if let Some(depths) = &seq.gt_depths {
        for (k, d) in depths.iter().enumerate() {
            let name = PathBuf::from(format!("depth_{k:03}.wf"));
            save_image(d, dir.join(&name))?;
            m.depths.push(name);
        }
    }
    if let Some(poses) = &seq.gt_poses {
        let name = PathBuf::from("poses.txt");
        write(&dir.join(&name), format_trajectory(&Trajectory::new(poses.clone())))?;
        m.poses = Some(name);
    }
    write(&dir.join(MANIFEST_NAME), format_manifest(&m))
}

/// Loads a sequence from a manifest file or a directory holding
/// `manifest.txt`.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<SnippetSequence> {
    let path = path.as_ref();
    let manifest_path = if path.is_dir() { path.join(MANIFEST_NAME) } else { path.to_path_buf() };
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let m = parse_manifest(&read_text(&manifest_path)?)?;
    let intrinsics = parse_intrinsics(&read_text(&base.join(&m.intrinsics))?)?;
    let images = m
        .frames
        .iter()
        .map(|f| load_image(base.join(f)))
        .collect::<Result<Vec<_>>>()?;
    let gt_depths = if m.depths.is_empty() {
        None
    } else {
        Some(m.depths.iter().map(|f| load_image(base.join(f))).collect::<Result<Vec<_>>>()?)
    };
    let gt_poses = match &m.poses {
        Some(p) => Some(parse_trajectory(&read_text(&base.join(p))?)?.poses),
        None => None,
    };
    let seq = SnippetSequence {
        images,
        intrinsics,
        gt_depths,
        gt_poses,
        target_index: m.target,
    };
    seq.validate()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Intrinsics;
    use crate::synth::{render_scene, SceneSpec};

    #[test]
    fn round_trip_is_bit_identical() {
        let k = Intrinsics::new(20.0, 20.0, 11.5, 7.5, 24, 16).unwrap();
        let mut spec = SceneSpec::plane_sweep(3, 4.0, 0.1, k, 5);
        spec.channels = 3;
        let mut seq = render_scene(&spec).unwrap();
        // make every value f32-representable so the container is exact
        for img in seq.images.iter_mut().chain(seq.gt_depths.iter_mut().flatten()) {
            for x in img.data_mut() {
                *x = *x as f32 as f64;
            }
        }
        let dir = tempfile::tempdir().unwrap();
        save_sequence(&seq, dir.path()).unwrap();
        let back = load_sequence(dir.path()).unwrap();
        assert_eq!(back, seq);
        assert_eq!(load_sequence(dir.path().join(MANIFEST_NAME)).unwrap(), seq);
    }

    #[test]
    fn distinct_errors() {
        let k = Intrinsics::new(20.0, 20.0, 11.5, 7.5, 24, 16).unwrap();
        let seq = render_scene(&SceneSpec::plane_sweep(2, 4.0, 0.1, k, 5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_sequence(&seq, dir.path()).unwrap();

        let frame = dir.path().join("frame_001.wf");
        let mut bytes = std::fs::read(&frame).unwrap();
        bytes[0] = b'X';
        std::fs::write(&frame, &bytes).unwrap();
        assert!(matches!(load_sequence(dir.path()), Err(Error::Format { offset: 0, .. })));
        bytes[0] = b'W';
        std::fs::write(&frame, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(load_sequence(dir.path()), Err(Error::Truncated { .. })));
        std::fs::write(&frame, &bytes).unwrap();

        std::fs::write(dir.path().join("intrinsics.txt"), "fx 20\ncx 11.5\ncy 7.5\nwidth 24\nheight 16\n").unwrap();
        match load_sequence(dir.path()) {
            Err(Error::Parse { key, .. }) => assert_eq!(key, "fy"),
            other => panic!("{other:?}"),
        }
        std::fs::write(dir.path().join("intrinsics.txt"), "fx 20\nfy 20\ncx 11.5\ncy 7.5\nwidth 25\nheight 16\n").unwrap();
        assert!(matches!(load_sequence(dir.path()), Err(Error::DimensionMismatch(_))));
    }
}
