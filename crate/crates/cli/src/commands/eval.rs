use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _};
use clap::{Args, ValueEnum};
use viewsynth::eval::{
    depth_metrics_set, evaluate_snippets, format_depth_report, format_depth_table, load_trajectory,
    mean_odometry_baseline, snippet_ate, split_snippets, DepthEvalOptions, ScaleMode,
};
use viewsynth::synth::{load_image, load_sequence, MANIFEST_NAME};
use viewsynth::Image;

use super::write_file;
use crate::config::pick;
use crate::{Context, UsageError};

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Scale {
    /// Median ratio per image.
    Median,
    /// One median ratio over the whole set.
    Global,
    /// No rescaling.
    None,
}

#[derive(Args, Debug)]
pub struct EvalDepthArgs {
    /// Predicted depth (WF01 file or directory of .wf files).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Ground-truth depth file or directory, matched to --in by sorted file
    /// order. A sequence directory supplies its target depth when --in is a
    /// single file, otherwise every frame's depth.
    #[arg(long)]
    pub gt: PathBuf,
    /// Ignore ground truth deeper than this.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Central crop fraction in (0, 1].
    #[arg(long)]
    pub crop: Option<f64>,
    #[arg(long, value_enum, default_value = "median")]
    pub scale: Scale,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn depth_files(path: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wf"))
        .collect();
    files.sort();
    Ok(files)
}

fn gt_depths(path: &Path, n_pred: usize) -> anyhow::Result<Vec<Image>> {
    if path.is_dir() && path.join(MANIFEST_NAME).is_file() {
        let seq = load_sequence(path).with_context(|| path.display().to_string())?;
        let Some(mut depths) = seq.gt_depths else {
            bail!("{} has no ground-truth depth", path.display());
        };
        if n_pred == 1 {
            return Ok(vec![depths.swap_remove(seq.target_index)]);
        }
        return Ok(depths);
    }
    depth_files(path)?
        .iter()
        .map(|g| load_image(g).with_context(|| g.display().to_string()))
        .collect()
}

pub fn run_depth(a: &EvalDepthArgs, ctx: &Context) -> anyhow::Result<()> {
    let opts = DepthEvalOptions {
        cap: a.cap.or(ctx.file.cap),
        crop: a.crop.or(ctx.file.crop),
        scale: match a.scale {
            Scale::Median => ScaleMode::Median,
            Scale::Global => ScaleMode::Global,
            Scale::None => ScaleMode::Fixed(1.0),
        },
    };
    opts.validate().map_err(|e| UsageError(e.to_string()))?;
    let preds = depth_files(&a.input)?
        .iter()
        .map(|p| load_image(p).with_context(|| p.display().to_string()))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let gts = gt_depths(&a.gt, preds.len())?;
    if preds.len() != gts.len() || preds.is_empty() {
        bail!("{} predictions for {} ground-truth maps", preds.len(), gts.len());
    }
    let pairs: Vec<(Image, Image)> = preds.into_iter().zip(gts).collect();
    let m = depth_metrics_set(&pairs, &opts)?;
    let mut text = format_depth_table(&[("pred", m)]);
    text.push('\n');
    text.push_str(&format!("images {}\n", pairs.len()));
    text.push_str(&format_depth_report(&m));
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvalOdomArgs {
    /// Predicted trajectory file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Ground-truth trajectory file.
    #[arg(long)]
    pub gt: PathBuf,
    /// Ground-truth trajectory used to build the mean-motion baseline;
    /// defaults to --gt.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub snippet_len: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_odom(a: &EvalOdomArgs, ctx: &Context) -> anyhow::Result<()> {
    let pred = load_trajectory(&a.input)?;
    let gt = load_trajectory(&a.gt)?;
    if pred.len() != gt.len() {
        bail!("prediction has {} poses, ground truth {}", pred.len(), gt.len());
    }
    let len = pick(a.snippet_len, ctx.file.snippet_len, 5.min(gt.len()));
    if len < 2 {
        return Err(UsageError("--snippet-len must be at least 2".into()).into());
    }
    let pred_snips = split_snippets(&pred, len);
    let gt_snips = split_snippets(&gt, len);
    if gt_snips.is_empty() {
        bail!("trajectories of {} poses are shorter than one {len}-frame snippet", gt.len());
    }
    let summary = evaluate_snippets(&pred_snips, &gt_snips)?;
    let train = match &a.train {
        Some(p) => split_snippets(&load_trajectory(p)?, len),
        None => gt_snips.clone(),
    };
    let baseline = mean_odometry_baseline(&train)?;
    let base_summary = evaluate_snippets(&vec![baseline; gt_snips.len()], &gt_snips)?;

    let mut text = String::new();
    writeln!(text, "snippet_len {len}")?;
    writeln!(text, "snippets {}", summary.count)?;
    writeln!(text, "ate_mean {:.10}", summary.mean)?;
    writeln!(text, "ate_std {:.10}", summary.std)?;
    writeln!(text, "baseline_ate_mean {:.10}", base_summary.mean)?;
    writeln!(text, "baseline_ate_std {:.10}", base_summary.std)?;
    for (i, (p, g)) in pred_snips.iter().zip(&gt_snips).enumerate() {
        let r = snippet_ate(p, g)?;
        let flag = if r.scale_undefined { " scale_undefined" } else { "" };
        writeln!(text, "snippet {i} ate {:.10} scale {:.10}{flag}", r.ate, r.scale)?;
    }
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    print!("{text}");
    Ok(())
}
