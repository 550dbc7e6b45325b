use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::geometry::{pose_to_transform, PoseParams, RigidTransform};

#[derive(Debug, Clone, PartialEq)]
pub struct AteResult {
    pub ate: f64,
    /// Scale applied to the predicted translations.
    pub scale: f64,
    /// Per-frame `||s * t_pred - t_gt||` after re-basing.
    pub residuals: Vec<f64>,
    /// Set when every predicted translation is zero while the ground truth
    /// moves; the scale is then 0 and the ATE is the RMS ground-truth offset.
    pub scale_undefined: bool,
}

/// Scale-aligned absolute trajectory error. Both trajectories are re-based to
/// their first frame and a single nonnegative scale is fitted to the
/// predicted translations by least squares.
pub fn snippet_ate(pred: &Trajectory, gt: &Trajectory) -> Result<AteResult> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} frames, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::invalid("ATE needs at least two frames"));
    }
    let tp = pred.rebase(0).positions();
    let tg = gt.rebase(0).positions();
    let dot: f64 = tp.iter().zip(&tg).map(|(p, g)| dot3(p, g)).sum();
    let norm: f64 = tp.iter().map(|p| dot3(p, p)).sum();
    let gt_norm: f64 = tg.iter().map(|g| dot3(g, g)).sum();
    let (scale, scale_undefined) = if norm > 0.0 {
        ((dot / norm).max(0.0), false)
    } else {
        (0.0, gt_norm > 0.0)
    };
    let residuals: Vec<f64> = tp
        .iter()
        .zip(&tg)
        .map(|(p, g)| {
            let d = [scale * p[0] - g[0], scale * p[1] - g[1], scale * p[2] - g[2]];
            dot3(&d, &d).sqrt()
        })
        .collect();
    let ate = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(AteResult {
        ate,
        scale,
        residuals,
        scale_undefined,
    })
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Consecutive windows of `length` frames (stride 1), each re-based so its
/// central frame (index `(length - 1) / 2`) is the identity.
pub fn split_snippets(traj: &Trajectory, length: usize) -> Vec<Trajectory> {
    if length < 2 || traj.len() < length {
        return Vec::new();
    }
    let center = (length - 1) / 2;
    (0..=traj.len() - length)
        .map(|start| {
            let window = Trajectory {
                poses: traj.poses[start..start + length].to_vec(),
                timestamps: traj.timestamps.as_ref().map(|t| t[start..start + length].to_vec()),
            };
            window.rebase(center)
        })
        .collect()
}

/// Canonical snippet built from the mean inter-frame motion of the training
/// snippets: per-step mean translation and per-axis mean Euler angles.
/// The result is re-based to its central frame.
pub fn mean_odometry_baseline(train: &[Trajectory]) -> Result<Trajectory> {
    let first = train
        .first()
        .ok_or_else(|| Error::invalid("baseline needs at least one training snippet"))?;
    let len = first.len();
    if len < 2 {
        return Err(Error::invalid("training snippets need at least two frames"));
    }
    if let Some(bad) = train.iter().find(|t| t.len() != len) {
        return Err(Error::DimensionMismatch(format!(
            "snippet lengths differ ({len} and {})",
            bad.len()
        )));
    }
    let n = train.len() as f64;
    let mut poses = vec![RigidTransform::identity()];
    for k in 0..len - 1 {
        let mut mean = [0.0; 6];
        for t in train {
            let step = t.poses[k].invert().compose(&t.poses[k + 1]).to_pose().to_array();
            for (m, s) in mean.iter_mut().zip(step) {
                *m += s / n;
            }
        }
        let step = pose_to_transform(&PoseParams::from_array(mean))?;
        let next = poses[k].compose(&step);
        poses.push(next);
    }
    Ok(Trajectory::new(poses).rebase((len - 1) / 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteSummary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// Mean and population standard deviation of per-snippet ATE.
pub fn evaluate_snippets(pred: &[Trajectory], gt: &[Trajectory]) -> Result<AteSummary> {
    if pred.len() != gt.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted snippets for {} ground-truth snippets",
            pred.len(),
            gt.len()
        )));
    }
    if gt.is_empty() {
        return Err(Error::invalid("no snippets to evaluate"));
    }
    let ates: Vec<f64> = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| snippet_ate(p, g).map(|r| r.ate))
        .collect::<Result<_>>()?;
    let n = ates.len() as f64;
    let mean = ates.iter().sum::<f64>() / n;
    let var = ates.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    Ok(AteSummary {
        mean,
        std: var.sqrt(),
        count: ates.len(),
    })
}

/// Absolute side-direction (x) offset of the last frame in the first frame's
/// coordinates.
pub fn side_rotation_magnitude(snippet: &Trajectory) -> Result<f64> {
    if snippet.len() < 2 {
        return Err(Error::invalid("side offset needs at least two frames"));
    }
    let rebased = snippet.rebase(0);
    Ok(rebased.poses[rebased.len() - 1].translation()[0].abs())
}
