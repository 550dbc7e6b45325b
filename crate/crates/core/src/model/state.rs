use super::depth::DepthField;
use crate::error::{Error, Result};
use crate::geometry::{pose_to_transform, Intrinsics, PoseParams, RigidTransform};
use crate::image::Image;
use crate::losses::{build_pyramid, total_loss, ExplainabilityField, LossConfig, LossGradients, LossInputs, LossReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateConfig {
    pub num_levels: usize,
    /// Initial activated depth everywhere.
    pub depth_prior: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            num_levels: 4,
            depth_prior: 1.0,
        }
    }
}

/// Everything optimized for one snippet, plus the image pyramids it is
/// optimized against.
#[derive(Debug, Clone)]
pub struct SnippetState {
    target_index: usize,
    /// Original frame index of every source, in source order.
    source_indices: Vec<usize>,
    target: Vec<Image>,
    sources: Vec<Vec<Image>>,
    intrinsics: Vec<Intrinsics>,
    pub depth: DepthField,
    /// Target-to-source pose per source.
    pub poses: Vec<PoseParams>,
    /// Explainability logits `[level][source]`.
    pub masks: Vec<Vec<ExplainabilityField>>,
}

/// Builds the initial state: constant depth at the prior, zero poses and
/// zero mask logits (every mask value 0.5).
pub fn init_state(
    images: &[Image],
    target_index: usize,
    k: &Intrinsics,
    config: &StateConfig,
) -> Result<SnippetState> {
    if images.len() < 2 {
        return Err(Error::invalid("a snippet needs at least two frames"));
    }
    if target_index >= images.len() {
        return Err(Error::invalid(format!(
            "target index {target_index} out of range for {} frames",
            images.len()
        )));
    }
    let first = &images[0];
    if let Some(i) = images.iter().position(|im| !im.same_shape(first)) {
        return Err(Error::invalid(format!(
            "frame {i} is {}x{}x{}, frame 0 is {}x{}x{}",
            images[i].height(),
            images[i].width(),
            images[i].channels(),
            first.height(),
            first.width(),
            first.channels()
        )));
    }
    if k.width != first.width() || k.height != first.height() {
        return Err(Error::DimensionMismatch(format!(
            "intrinsics are {}x{}, frames are {}x{}",
            k.width,
            k.height,
            first.width(),
            first.height()
        )));
    }
    k.validate()?;
    if config.num_levels == 0 {
        return Err(Error::invalid("num_levels must be at least 1"));
    }
    let intrinsics = (0..config.num_levels)
        .map(|l| k.scale(l))
        .collect::<Result<Vec<_>>>()?;
    let target = build_pyramid(&images[target_index], config.num_levels);
    debug_assert_eq!(target.len(), config.num_levels);
    let source_indices: Vec<usize> = (0..images.len()).filter(|&i| i != target_index).collect();
    let sources = source_indices
        .iter()
        .map(|&i| build_pyramid(&images[i], config.num_levels))
        .collect();
    let masks = target
        .iter()
        .map(|lv| {
            source_indices
                .iter()
                .map(|_| ExplainabilityField::zeros(lv.height(), lv.width()))
                .collect()
        })
        .collect();
    Ok(SnippetState {
        target_index,
        depth: DepthField::constant(first.height(), first.width(), config.depth_prior)?,
        poses: vec![PoseParams::default(); source_indices.len()],
        source_indices,
        target,
        sources,
        intrinsics,
        masks,
    })
}

impl SnippetState {
    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn num_sources(&self) -> usize {
        self.source_indices.len()
    }

    pub fn num_levels(&self) -> usize {
        self.target.len()
    }

    pub fn intrinsics(&self) -> &Intrinsics {
        &self.intrinsics[0]
    }

    pub fn target(&self) -> &Image {
        &self.target[0]
    }

    pub fn source(&self, s: usize) -> &Image {
        &self.sources[s][0]
    }

    pub fn num_params(&self) -> usize {
        self.depth.logits().len()
            + 6 * self.poses.len()
            + self.masks.iter().flatten().map(|f| f.logits().len()).sum::<usize>()
    }

    /// Flattened parameters: depth logits, poses, then mask logits in
    /// level-major, source-minor order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend_from_slice(self.depth.logits());
        for p in &self.poses {
            out.extend_from_slice(&p.to_array());
        }
        for f in self.masks.iter().flatten() {
            out.extend_from_slice(f.logits());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut rest = params;
        let n = self.depth.logits().len();
        self.depth.logits_mut().copy_from_slice(&rest[..n]);
        rest = &rest[n..];
        for p in self.poses.iter_mut() {
            let mut a = [0.0; 6];
            a.copy_from_slice(&rest[..6]);
            *p = PoseParams::from_array(a);
            rest = &rest[6..];
        }
        for f in self.masks.iter_mut().flatten() {
            let n = f.logits().len();
            f.logits_mut().copy_from_slice(&rest[..n]);
            rest = &rest[n..];
        }
        Ok(())
    }

    /// Flattens loss gradients into parameter order, chaining depth through
    /// the activation. Mask entries are zero when the loss ignored masks.
    pub fn flatten_grads(&self, grads: &LossGradients) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.extend(self.depth.depth_grad_to_logits(&grads.depth));
        for g in &grads.poses {
            out.extend_from_slice(g);
        }
        for (l, level) in self.masks.iter().enumerate() {
            for (s, f) in level.iter().enumerate() {
                match grads.masks.get(l).and_then(|lv| lv.get(s)) {
                    Some(g) => out.extend_from_slice(g),
                    None => out.extend(std::iter::repeat_n(0.0, f.logits().len())),
                }
            }
        }
        out
    }

    /// Objective and gradients at the current parameters. Only the first
    /// `config.num_levels` levels contribute.
    pub fn evaluate(&self, config: &LossConfig) -> Result<(LossReport, LossGradients)> {
        let depth = self.depth.depth();
        let inputs = LossInputs {
            target: &self.target,
            sources: &self.sources,
            intrinsics: &self.intrinsics,
            depth: &depth,
            poses: &self.poses,
            masks: Some(&self.masks),
        };
        total_loss(&inputs, config)
    }

    /// Target-to-source transform of every source.
    pub fn transforms(&self) -> Result<Vec<RigidTransform>> {
        self.poses.iter().map(pose_to_transform).collect()
    }

    /// Camera poses of all frames expressed in the target camera frame
    /// (camera-to-target), in original frame order. The target is identity.
    pub fn trajectory(&self) -> Result<Vec<RigidTransform>> {
        let n = self.source_indices.len() + 1;
        let mut out = vec![RigidTransform::identity(); n];
        for (s, &frame) in self.source_indices.iter().enumerate() {
            out[frame] = pose_to_transform(&self.poses[s])?.invert();
        }
        Ok(out)
    }

    /// Mean full-resolution mask value over all sources.
    pub fn mean_mask(&self) -> f64 {
        let level = &self.masks[0];
        level.iter().map(ExplainabilityField::mean_mask).sum::<f64>() / level.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::inverse_warp;

    fn frames() -> Vec<Image> {
        (0..3)
            .map(|f| Image::from_fn(8, 12, 1, |i, j, _| 0.5 + 0.3 * ((i + 2 * j + f) as f64 * 0.4).sin()))
            .collect()
    }

    fn k() -> Intrinsics {
        Intrinsics::new(10.0, 10.0, 6.0, 4.0, 12, 8).unwrap()
    }

    #[test]
    fn defaults() {
        let s = init_state(&frames(), 1, &k(), &StateConfig { num_levels: 2, depth_prior: 1.0 }).unwrap();
        assert!(s.depth.depth().iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!(s.masks.iter().flatten().all(|f| f.mask().iter().all(|&e| e == 0.5)));
        assert_eq!(s.source_indices(), &[0, 2]);
        assert_eq!(s.masks[1][0].height(), 4);
        assert_eq!(s.params().len(), s.num_params());
    }

    #[test]
    fn initial_loss_is_mean_abs_difference() {
        let imgs = frames();
        let s = init_state(&imgs, 1, &k(), &StateConfig { num_levels: 1, depth_prior: 1.0 }).unwrap();
        let config = LossConfig {
            num_levels: 1,
            use_explainability: false,
            lambda_s: 0.0,
            ..Default::default()
        };
        let (r, _) = s.evaluate(&config).unwrap();
        let mut oracle = 0.0;
        for src in [0, 2] {
            let d: f64 = imgs[1]
                .data()
                .iter()
                .zip(imgs[src].data())
                .map(|(a, b)| (a - b).abs())
                .sum();
            oracle += d / 96.0;
        }
        assert!((r.vs[0] - oracle).abs() < 1e-14);
        // zero pose means identity warp
        let w = inverse_warp(&imgs[0], &s.depth.depth(), &RigidTransform::identity(), &k()).unwrap();
        assert_eq!(w.warped, imgs[0]);
    }

    #[test]
    fn params_round_trip() {
        let mut s = init_state(&frames(), 0, &k(), &StateConfig { num_levels: 2, depth_prior: 2.0 }).unwrap();
        let mut p = s.params();
        for (i, x) in p.iter_mut().enumerate() {
            *x = i as f64 * 1e-3;
        }
        s.set_params(&p).unwrap();
        assert_eq!(s.params(), p);
        assert!(s.set_params(&p[1..]).is_err());
    }

    #[test]
    fn rejects_bad_snippets() {
        let imgs = frames();
        let c = StateConfig::default();
        assert!(init_state(&imgs[..1], 0, &k(), &c).is_err());
        assert!(init_state(&imgs, 3, &k(), &c).is_err());
        let mut odd = imgs.clone();
        odd[2] = Image::filled(8, 11, 1, 0.0);
        assert!(init_state(&odd, 1, &k(), &c).is_err());
        // 8x12 supports 3 levels (8 -> 4 -> 2), not 4
        assert!(init_state(&imgs, 1, &k(), &c).is_err());
    }
}
