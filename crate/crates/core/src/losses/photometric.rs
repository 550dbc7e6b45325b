use super::explainability::ExplainabilityField;
use super::total::Normalization;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::sampler::WarpResult;

/// Value and gradients of [`view_synthesis_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotometricLoss {
    pub value: f64,
    pub per_source: Vec<f64>,
    pub valid_counts: Vec<usize>,
    /// d value / d warped intensity, one buffer per source.
    pub grad_warped: Vec<Vec<f64>>,
    /// d value / d mask value, one buffer per source, when masks were given.
    pub grad_mask: Option<Vec<Vec<f64>>>,
    /// Set when no source had a single valid pixel; the loss is then 0.
    pub degenerate: bool,
}

/// Photometric L1 error between `target` and every warped source over the
/// warp's valid pixels, optionally weighted by a per-pixel mask (one mask
/// value per pixel per source). Each source contributes its mean (or raw sum,
/// per `norm`) and the contributions are summed over sources.
pub fn view_synthesis_loss(
    target: &Image,
    warps: &[WarpResult],
    masks: Option<&[Vec<f64>]>,
    norm: Normalization,
) -> Result<PhotometricLoss> {
    if warps.is_empty() {
        return Err(Error::invalid("at least one warped source is required"));
    }
    let n = target.pixels();
    let ch = target.channels();
    for w in warps {
        if !w.warped.same_shape(target) {
            return Err(Error::DimensionMismatch(format!(
                "warped {}x{}x{} vs target {}x{}x{}",
                w.warped.height(),
                w.warped.width(),
                w.warped.channels(),
                target.height(),
                target.width(),
                ch
            )));
        }
    }
    if let Some(m) = masks {
        if m.len() != warps.len() || m.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch(
                "need one mask value per target pixel for every source".into(),
            ));
        }
    }

    let tgt = target.data();
    let mut value = 0.0;
    let mut per_source = Vec::with_capacity(warps.len());
    let mut valid_counts = Vec::with_capacity(warps.len());
    let mut grad_warped = Vec::with_capacity(warps.len());
    let mut grad_mask = masks.map(|_| Vec::with_capacity(warps.len()));

    for (s, w) in warps.iter().enumerate() {
        let count = w.valid_count();
        valid_counts.push(count);
        let mut gw = vec![0.0; n * ch];
        let mut gm = vec![0.0; n];
        let mut src_value = 0.0;
        if count > 0 {
            let scale = match norm {
                Normalization::Mean => 1.0 / (count * ch) as f64,
                Normalization::Sum => 1.0,
            };
            let warped = w.warped.data();
            for p in 0..n {
                if !w.valid[p] {
                    continue;
                }
                let weight = masks.map_or(1.0, |m| m[s][p]);
                let mut err = 0.0;
                for c in 0..ch {
                    let k = p * ch + c;
                    let diff = tgt[k] - warped[k];
                    err += diff.abs();
                    // d|I_t - I_w| / d I_w
                    let sgn = if diff > 0.0 {
                        -1.0
                    } else if diff < 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    gw[k] = weight * sgn * scale;
                }
                src_value += weight * err;
                gm[p] = err * scale;
            }
            src_value *= scale;
        }
        value += src_value;
        per_source.push(src_value);
        grad_warped.push(gw);
        if let Some(g) = grad_mask.as_mut() {
            g.push(gm);
        }
    }

    Ok(PhotometricLoss {
        value,
        per_source,
        degenerate: valid_counts.iter().all(|&c| c == 0),
        valid_counts,
        grad_warped,
        grad_mask,
    })
}

/// [`view_synthesis_loss`] with masks given as explainability logits. The
/// mask gradient is chained through the softmax to the logits.
pub fn view_synthesis_loss_logits(
    target: &Image,
    warps: &[WarpResult],
    fields: &[ExplainabilityField],
    norm: Normalization,
) -> Result<(PhotometricLoss, Vec<Vec<f64>>)> {
    let masks: Vec<Vec<f64>> = fields.iter().map(|f| f.mask()).collect();
    let loss = view_synthesis_loss(target, warps, Some(&masks), norm)?;
    let grads = fields
        .iter()
        .zip(loss.grad_mask.as_ref().expect("masks were supplied"))
        .map(|(f, g)| f.mask_grad_to_logits(g))
        .collect();
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Intrinsics, RigidTransform};
    use crate::sampler::inverse_warp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity_warp(src: &Image) -> WarpResult {
        let (h, w) = (src.height(), src.width());
        let k = Intrinsics::new(5.0, 5.0, w as f64 / 2.0, h as f64 / 2.0, w, h).unwrap();
        inverse_warp(src, &vec![1.0; h * w], &RigidTransform::identity(), &k).unwrap()
    }

    #[test]
    fn perfect_reconstruction_is_zero() {
        let img = Image::from_fn(4, 4, 1, |i, j, _| (i + j) as f64 / 8.0);
        let w = identity_warp(&img);
        let l = view_synthesis_loss(&img, &[w], None, Normalization::Mean).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(!l.degenerate);
    }

    #[test]
    fn constant_fields_with_half_mask() {
        let target = Image::filled(3, 3, 1, 0.0);
        let w = identity_warp(&Image::filled(3, 3, 1, 1.0));
        let half = vec![vec![0.5; 9]];
        let l = view_synthesis_loss(&target, std::slice::from_ref(&w), Some(&half), Normalization::Sum).unwrap();
        assert_eq!(l.value, 0.5 * 9.0);
        let l = view_synthesis_loss(&target, &[w], Some(&half), Normalization::Mean).unwrap();
        assert_eq!(l.value, 0.5);
    }

    #[test]
    fn matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (h, w, ch) = (4, 4, 2);
        let target = Image::from_fn(h, w, ch, |_, _, _| rng.random());
        let k = Intrinsics::new(4.0, 4.0, 1.7, 1.6, w, h).unwrap();
        let mut warps = Vec::new();
        let mut masks = Vec::new();
        for s in 0..2 {
            let src = Image::from_fn(h, w, ch, |_, _, _| rng.random());
            let depth: Vec<f64> = (0..h * w).map(|_| rng.random_range(1.0..3.0)).collect();
            let t = RigidTransform::translation_only([0.3 * (s as f64 - 0.5), 0.1, 0.0]);
            warps.push(inverse_warp(&src, &depth, &t, &k).unwrap());
            masks.push((0..h * w).map(|_| rng.random::<f64>()).collect::<Vec<_>>());
        }
        let l = view_synthesis_loss(&target, &warps, Some(&masks), Normalization::Mean).unwrap();

        let mut oracle = 0.0;
        for s in 0..2 {
            let mut sum = 0.0;
            let mut valid = 0usize;
            for i in 0..h {
                for j in 0..w {
                    let p = i * w + j;
                    if !warps[s].valid[p] {
                        continue;
                    }
                    valid += 1;
                    for c in 0..ch {
                        sum += masks[s][p] * (target.get(i, j, c) - warps[s].warped.get(i, j, c)).abs();
                    }
                }
            }
            if valid > 0 {
                oracle += sum / (valid * ch) as f64;
            }
        }
        assert!(warps.iter().all(|wr| wr.valid_count() > 0 && wr.valid_count() < h * w));
        assert!((l.value - oracle).abs() < 1e-14);
    }

    #[test]
    fn unit_mask_is_bitwise_plain_l1() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let target = Image::from_fn(5, 6, 3, |_, _, _| rng.random());
        let src = Image::from_fn(5, 6, 3, |_, _, _| rng.random());
        let w = identity_warp(&src);
        let ones = vec![vec![1.0; 30]];
        let a = view_synthesis_loss(&target, std::slice::from_ref(&w), None, Normalization::Mean).unwrap();
        let b = view_synthesis_loss(&target, &[w], Some(&ones), Normalization::Mean).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.grad_warped, b.grad_warped);
    }

    #[test]
    fn all_invalid_is_degenerate_zero() {
        let target = Image::filled(3, 4, 1, 0.2);
        let k = Intrinsics::new(4.0, 4.0, 2.0, 1.5, 4, 3).unwrap();
        let t = RigidTransform::translation_only([0.0, 0.0, -10.0]);
        let w = inverse_warp(&Image::filled(3, 4, 1, 0.9), &[1.0; 12], &t, &k).unwrap();
        let l = view_synthesis_loss(&target, &[w], None, Normalization::Mean).unwrap();
        assert!(l.degenerate);
        assert_eq!(l.value, 0.0);
        assert!(l.grad_warped[0].iter().all(|&g| g == 0.0));
    }

    #[test]
    fn shape_errors() {
        let target = Image::filled(3, 3, 1, 0.0);
        assert!(view_synthesis_loss(&target, &[], None, Normalization::Mean).is_err());
        let w = identity_warp(&Image::filled(4, 3, 1, 0.0));
        assert!(view_synthesis_loss(&target, &[w], None, Normalization::Mean).is_err());
    }
}
