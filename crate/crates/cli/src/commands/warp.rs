use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context as _};
use clap::Args;
use viewsynth::eval::load_trajectory;
use viewsynth::sampler::inverse_warp;
use viewsynth::synth::{encode_pnm, load_image, load_sequence, save_image};

use super::{create_dir, write_file};
use crate::Context;

#[derive(Args, Debug)]
pub struct WarpArgs {
    /// Sequence directory or manifest.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Target depth map (WF01); defaults to the sequence ground truth.
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Trajectory file with one pose per frame; defaults to the ground truth.
    #[arg(long)]
    pub poses: Option<PathBuf>,
}

pub fn run(a: &WarpArgs, _ctx: &Context) -> anyhow::Result<()> {
    let seq = load_sequence(&a.input)?;
    let t = seq.target_index;
    let depth = match &a.depth {
        Some(p) => load_image(p)?,
        None => seq
            .gt_depths
            .as_ref()
            .map(|d| d[t].clone())
            .context("sequence has no ground-truth depth; pass --depth")?,
    };
    let poses = match &a.poses {
        Some(p) => load_trajectory(p)?.poses,
        None => seq
            .gt_poses
            .clone()
            .context("sequence has no ground-truth poses; pass --poses")?,
    };
    if poses.len() != seq.images.len() {
        bail!("{} poses for {} frames", poses.len(), seq.images.len());
    }
    if depth.channels() != 1 {
        bail!("depth map must be single-channel");
    }

    create_dir(&a.out)?;
    let mut report = String::new();
    for s in (0..seq.images.len()).filter(|&s| s != t) {
        let rel = poses[s].invert().compose(&poses[t]);
        let wr = inverse_warp(&seq.images[s], depth.data(), &rel, &seq.intrinsics)?;
        let c = wr.warped.channels();
        let target = seq.images[t].data();
        let mut sum = 0.0;
        for (p, _) in wr.valid.iter().enumerate().filter(|(_, v)| **v) {
            for ch in 0..c {
                sum += (wr.warped.data()[p * c + ch] - target[p * c + ch]).abs();
            }
        }
        let n = wr.valid_count();
        let mean = if n > 0 { sum / (n * c) as f64 } else { 0.0 };
        writeln!(report, "source {s} valid {n} mean_l1 {mean:?}")?;
        save_image(&wr.warped, a.out.join(format!("warped_{s:03}.wf")))?;
        if c == 1 || c == 3 {
            let ext = if c == 1 { "pgm" } else { "ppm" };
            write_file(&a.out.join(format!("warped_{s:03}.{ext}")), encode_pnm(&wr.warped)?)?;
        }
    }
    write_file(&a.out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}
