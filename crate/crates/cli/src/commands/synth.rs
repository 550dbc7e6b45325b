use std::path::PathBuf;

use clap::{Args, ValueEnum};
use viewsynth::synth::{encode_pnm, render_scene, save_sequence, SceneKind, SceneSpec, TextureMode};
use viewsynth::Intrinsics;

use super::{create_dir, write_file};
use crate::config::pick;
use crate::{Context, UsageError};

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Scene {
    Plane,
    Slanted,
    TwoPlane,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Texture {
    Smooth,
    HighFrequency,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "plane")]
    pub scene: Scene,
    /// Number of frames; the middle one is the target.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Plane depth (near plane for two-plane scenes).
    #[arg(long, default_value_t = 4.0)]
    pub depth: f64,
    /// Sideways camera motion per frame; 0 gives a static camera.
    #[arg(long, default_value_t = 0.16)]
    pub step: f64,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 48)]
    pub height: usize,
    #[arg(long, default_value_t = 50.0)]
    pub focal: f64,
    #[arg(long, default_value_t = 1)]
    pub channels: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_enum, default_value = "smooth")]
    pub texture: Texture,
}

pub fn run(a: &SynthArgs, ctx: &Context) -> anyhow::Result<()> {
    let frames = pick(a.frames, ctx.file.frames, 3);
    if frames < 2 {
        return Err(UsageError("--frames must be at least 2".into()).into());
    }
    let k = Intrinsics::new(
        a.focal,
        a.focal,
        (a.width as f64 - 1.0) / 2.0,
        (a.height as f64 - 1.0) / 2.0,
        a.width,
        a.height,
    )
    .map_err(|e| UsageError(e.to_string()))?;
    let mut spec = SceneSpec::plane_sweep(frames, a.depth, a.step, k, ctx.seed);
    spec.kind = match a.scene {
        Scene::Plane => SceneKind::Plane { depth: a.depth },
        Scene::Slanted => SceneKind::Slanted {
            depth: a.depth,
            slope_x: 0.2,
            slope_y: 0.1,
        },
        Scene::TwoPlane => SceneKind::TwoPlane {
            near: a.depth,
            far: 2.0 * a.depth,
            split_x: 0.0,
        },
    };
    spec.texture = match a.texture {
        Texture::Smooth => TextureMode::Smooth,
        Texture::HighFrequency => TextureMode::HighFrequency,
    };
    spec.channels = a.channels;
    spec.noise_sigma = a.noise;
    spec.validate().map_err(|e| UsageError(e.to_string()))?;

    let seq = render_scene(&spec)?;
    create_dir(&a.out)?;
    save_sequence(&seq, &a.out)?;
    let ext = if a.channels == 1 { "pgm" } else { "ppm" };
    for (i, img) in seq.images.iter().enumerate() {
        write_file(&a.out.join(format!("frame_{i:03}.{ext}")), encode_pnm(img)?)?;
    }
    if ctx.verbose {
        eprintln!("wrote {frames} frames to {}", a.out.display());
    }
    Ok(())
}
