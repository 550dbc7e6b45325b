use super::explainability::{explainability_regularizer, ExplainabilityField};
use super::photometric::view_synthesis_loss;
use super::pyramid::depth_pyramid;
use super::smoothness::smoothness_loss;
use crate::error::{Error, Result};
use crate::geometry::{pose_to_transform, Intrinsics, PoseParams};
use crate::image::{downsample_adjoint, Image};
use crate::sampler::inverse_warp;

/// How per-pixel photometric errors are reduced for each source view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Mean over valid pixels and channels; keeps weights resolution-independent.
    #[default]
    Mean,
    /// Raw sum over valid pixels and channels.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Smoothness weight at full resolution; level `l` uses `lambda_s / 2^l`.
    pub lambda_s: f64,
    pub lambda_e: f64,
    pub num_levels: usize,
    pub use_explainability: bool,
    pub normalization: Normalization,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_s: 0.5,
            lambda_e: 0.2,
            num_levels: 4,
            use_explainability: true,
            normalization: Normalization::Mean,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_s >= 0.0 && self.lambda_e >= 0.0) {
            return Err(Error::invalid("loss weights must be non-negative"));
        }
        if self.num_levels == 0 {
            return Err(Error::invalid("num_levels must be at least 1"));
        }
        Ok(())
    }

    pub fn smoothness_weight(&self, level: usize) -> f64 {
        self.lambda_s / (1u64 << level) as f64
    }
}

/// Borrowed view of everything the objective depends on.
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a> {
    /// Target image pyramid.
    pub target: &'a [Image],
    /// Source pyramids, `[source][level]`.
    pub sources: &'a [Vec<Image>],
    /// Intrinsics per level.
    pub intrinsics: &'a [Intrinsics],
    /// Activated full-resolution target depth; coarser levels are its
    /// box-filtered pyramid.
    pub depth: &'a [f64],
    /// Target-to-source pose per source.
    pub poses: &'a [PoseParams],
    /// Explainability logits `[level][source]`.
    pub masks: Option<&'a [Vec<ExplainabilityField>]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub total: f64,
    /// View-synthesis loss per level (summed over sources).
    pub vs: Vec<f64>,
    /// Unweighted smoothness loss per level.
    pub smooth: Vec<f64>,
    /// Regularizer per `[level][source]`; empty when masks are off.
    pub reg: Vec<Vec<f64>>,
    pub valid_counts: Vec<Vec<usize>>,
    /// Set when some level had no valid pixel in any source.
    pub degenerate: bool,
}

impl LossReport {
    /// Re-sums the components with the configured weights.
    pub fn recompose(&self, config: &LossConfig) -> f64 {
        let mut total = 0.0;
        for l in 0..self.vs.len() {
            total += self.vs[l] + config.smoothness_weight(l) * self.smooth[l];
            if let Some(r) = self.reg.get(l) {
                total += config.lambda_e * r.iter().sum::<f64>();
            }
        }
        total
    }

    pub fn total_vs(&self) -> f64 {
        self.vs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGradients {
    /// d total / d activated full-resolution depth.
    pub depth: Vec<f64>,
    pub poses: Vec<[f64; 6]>,
    /// d total / d explainability logits, `[level][source]`.
    pub masks: Vec<Vec<Vec<f64>>>,
}

/// Multi-scale objective: for every level, the (optionally mask-weighted)
/// view-synthesis loss, plus `lambda_s / 2^l` times the depth smoothness,
/// plus `lambda_e` times the explainability regularizer of every source.
pub fn total_loss(inputs: &LossInputs<'_>, config: &LossConfig) -> Result<(LossReport, LossGradients)> {
    config.validate()?;
    let levels = config.num_levels;
    let n_src = inputs.sources.len();
    if n_src == 0 {
        return Err(Error::invalid("at least one source view is required"));
    }
    if inputs.poses.len() != n_src {
        return Err(Error::DimensionMismatch(format!(
            "{} poses for {} sources",
            inputs.poses.len(),
            n_src
        )));
    }
    if inputs.target.len() < levels
        || inputs.intrinsics.len() < levels
        || inputs.sources.iter().any(|s| s.len() < levels)
    {
        return Err(Error::DimensionMismatch(format!(
            "pyramids shallower than the {levels} configured levels"
        )));
    }
    let use_masks = config.use_explainability;
    let masks = match (use_masks, inputs.masks) {
        (true, Some(m)) => {
            if m.len() < levels || m.iter().take(levels).any(|lv| lv.len() != n_src) {
                return Err(Error::DimensionMismatch(
                    "need explainability fields for every level and source".into(),
                ));
            }
            Some(m)
        }
        (true, None) => {
            return Err(Error::invalid("explainability enabled but no masks supplied"))
        }
        (false, _) => None,
    };

    let (h0, w0) = (inputs.target[0].height(), inputs.target[0].width());
    if inputs.depth.len() != h0 * w0 {
        return Err(Error::DimensionMismatch(format!(
            "depth has {} values, target has {} pixels",
            inputs.depth.len(),
            h0 * w0
        )));
    }
    let depths = depth_pyramid(inputs.depth, h0, w0, levels);
    if depths.len() < levels {
        return Err(Error::invalid(format!(
            "{h0}x{w0} image supports only {} pyramid levels",
            depths.len()
        )));
    }
    let transforms = inputs
        .poses
        .iter()
        .map(pose_to_transform)
        .collect::<Result<Vec<_>>>()?;

    let mut report = LossReport {
        total: 0.0,
        vs: Vec::with_capacity(levels),
        smooth: Vec::with_capacity(levels),
        reg: Vec::new(),
        valid_counts: Vec::with_capacity(levels),
        degenerate: false,
    };
    let mut grads = LossGradients {
        depth: Vec::new(),
        poses: vec![[0.0; 6]; n_src],
        masks: Vec::new(),
    };
    let mut depth_grads: Vec<Vec<f64>> = Vec::with_capacity(levels);

    for l in 0..levels {
        let target = &inputs.target[l];
        let k = &inputs.intrinsics[l];
        let (h, w) = (target.height(), target.width());
        let depth = &depths[l];
        if k.width != w || k.height != h || depth.len() != h * w {
            return Err(Error::DimensionMismatch(format!(
                "level {l}: target {w}x{h}, intrinsics {}x{}",
                k.width, k.height
            )));
        }

        let warps = inputs
            .sources
            .iter()
            .zip(&transforms)
            .map(|(src, t)| inverse_warp(&src[l], depth, t, k))
            .collect::<Result<Vec<_>>>()?;

        let level_masks: Option<Vec<Vec<f64>>> =
            masks.map(|m| m[l].iter().map(ExplainabilityField::mask).collect());
        let photo = view_synthesis_loss(target, &warps, level_masks.as_deref(), config.normalization)?;
        report.degenerate |= photo.degenerate;

        let mut g_depth = vec![0.0; h * w];
        for (s, warp) in warps.iter().enumerate() {
            let g = warp.backward(&photo.grad_warped[s], &inputs.poses[s]);
            for (acc, x) in g_depth.iter_mut().zip(&g.depth) {
                *acc += x;
            }
            for (acc, x) in grads.poses[s].iter_mut().zip(g.pose) {
                *acc += x;
            }
        }

        let smooth = smoothness_loss(depth, h, w);
        let ws = config.smoothness_weight(l);
        for (acc, x) in g_depth.iter_mut().zip(&smooth.grad) {
            *acc += ws * x;
        }
        depth_grads.push(g_depth);

        let mut level_total = photo.value + ws * smooth.value;

        if let Some(m) = masks {
            let grad_mask = photo.grad_mask.as_ref().expect("masks supplied");
            let mut level_reg = Vec::with_capacity(n_src);
            let mut level_grads = Vec::with_capacity(n_src);
            for (field, gm) in m[l].iter().zip(grad_mask) {
                let reg = explainability_regularizer(field);
                let mut g = field.mask_grad_to_logits(gm);
                for (acc, x) in g.iter_mut().zip(&reg.grad_logits) {
                    *acc += config.lambda_e * x;
                }
                level_reg.push(reg.value);
                level_grads.push(g);
            }
            level_total += config.lambda_e * level_reg.iter().sum::<f64>();
            report.reg.push(level_reg);
            grads.masks.push(level_grads);
        }

        report.vs.push(photo.value);
        report.smooth.push(smooth.value);
        report.valid_counts.push(photo.valid_counts);
        report.total += level_total;
    }

    // coarse-to-fine: push each level's depth gradient through the box filter
    let mut carry = depth_grads.pop().expect("at least one level");
    while let Some(mut finer) = depth_grads.pop() {
        let l = depth_grads.len();
        let (h, w) = (inputs.target[l].height(), inputs.target[l].width());
        for (acc, x) in finer.iter_mut().zip(downsample_adjoint(&carry, h, w)) {
            *acc += x;
        }
        carry = finer;
    }
    grads.depth = carry;

    Ok((report, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::build_pyramid;

    fn tiny(levels: usize) -> (Vec<Image>, Vec<Vec<Image>>, Vec<Intrinsics>) {
        let img = Image::from_fn(8, 12, 1, |i, j, _| 0.5 + 0.4 * ((i as f64) * 0.5 + (j as f64) * 0.3).sin());
        let k = Intrinsics::new(10.0, 10.0, 6.0, 4.0, 12, 8).unwrap();
        let pyr = build_pyramid(&img, levels);
        let ks = (0..levels).map(|l| k.scale(l).unwrap()).collect();
        (pyr.clone(), vec![pyr.clone(), pyr], ks)
    }

    #[test]
    fn perfect_static_scene_is_zero() {
        let (t, s, k) = tiny(1);
        let config = LossConfig {
            num_levels: 1,
            use_explainability: false,
            ..Default::default()
        };
        let inputs = LossInputs {
            target: &t,
            sources: &s,
            intrinsics: &k,
            depth: &[2.0; 96],
            poses: &[PoseParams::default(); 2],
            masks: None,
        };
        let (r, g) = total_loss(&inputs, &config).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(g.depth.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn missing_masks_is_an_error() {
        let (t, s, k) = tiny(2);
        let inputs = LossInputs {
            target: &t,
            sources: &s,
            intrinsics: &k,
            depth: &[2.0; 96],
            poses: &[PoseParams::default(); 2],
            masks: None,
        };
        let config = LossConfig {
            num_levels: 2,
            ..Default::default()
        };
        assert!(total_loss(&inputs, &config).is_err());
    }

    #[test]
    fn smoothness_weights_halve_per_level() {
        let c = LossConfig::default();
        assert_eq!(c.smoothness_weight(0), 0.5);
        assert_eq!(c.smoothness_weight(1), 0.25);
        assert_eq!(c.smoothness_weight(3), 0.0625);
    }
}
