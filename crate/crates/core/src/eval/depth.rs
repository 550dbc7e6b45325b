use crate::error::{Error, Result};
use crate::image::Image;

/// Table-1 style reference row, kept as a formatting fixture.
pub const REFERENCE_ROW: (&str, [f64; 7]) = ("Ours, K", [0.208, 1.768, 6.856, 0.283, 0.678, 0.885, 0.957]);

pub const METRIC_NAMES: [&str; 7] = ["abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3"];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DepthMetrics {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub count: usize,
    pub scale: f64,
}

impl DepthMetrics {
    pub fn values(&self) -> [f64; 7] {
        [
            self.abs_rel,
            self.sq_rel,
            self.rmse,
            self.rmse_log,
            self.delta1,
            self.delta2,
            self.delta3,
        ]
    }

    /// Unweighted mean over images. `count` is summed and `scale` averaged.
    pub fn mean(items: &[DepthMetrics]) -> Result<DepthMetrics> {
        if items.is_empty() {
            return Err(Error::invalid("no metrics to average"));
        }
        let n = items.len() as f64;
        let avg = |f: fn(&DepthMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
        Ok(DepthMetrics {
            abs_rel: avg(|m| m.abs_rel),
            sq_rel: avg(|m| m.sq_rel),
            rmse: avg(|m| m.rmse),
            rmse_log: avg(|m| m.rmse_log),
            delta1: avg(|m| m.delta1),
            delta2: avg(|m| m.delta2),
            delta3: avg(|m| m.delta3),
            count: items.iter().map(|m| m.count).sum(),
            scale: avg(|m| m.scale),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScaleMode {
    /// Per-image median ratio.
    #[default]
    Median,
    /// One median ratio pooled over every image of a set.
    Global,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DepthEvalOptions {
    /// Ground-truth pixels deeper than this are excluded.
    pub cap: Option<f64>,
    /// Keep only the central fraction of rows and columns.
    pub crop: Option<f64>,
    pub scale: ScaleMode,
}

impl DepthEvalOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.cap {
            if !(c > 0.0) {
                return Err(Error::invalid(format!("cap must be positive, got {c}")));
            }
        }
        if let Some(f) = self.crop {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::invalid(format!("crop fraction must lie in (0, 1], got {f}")));
            }
        }
        if let ScaleMode::Fixed(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!("fixed scale must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Median with the even-count convention of averaging the two central values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// `median(gt) / median(pred)` over the valid pixels.
pub fn median_scale(pred: &[f64], gt: &[f64], valid: Option<&[bool]>) -> Result<f64> {
    if pred.len() != gt.len() || valid.is_some_and(|m| m.len() != gt.len()) {
        return Err(Error::DimensionMismatch(format!(
            "prediction has {} values, ground truth {}",
            pred.len(),
            gt.len()
        )));
    }
    let (mut p, mut g) = (Vec::new(), Vec::new());
    for i in 0..gt.len() {
        if valid.is_none_or(|m| m[i]) {
            if !(pred[i] > 0.0 && gt[i] > 0.0) {
                return Err(Error::invalid(format!(
                    "nonpositive depth at pixel {i} (pred {}, gt {})",
                    pred[i], gt[i]
                )));
            }
            p.push(pred[i]);
            g.push(gt[i]);
        }
    }
    match (median(&g), median(&p)) {
        (Some(mg), Some(mp)) => Ok(mg / mp),
        _ => Err(Error::NoValidPixels("median scaling needs at least one valid pixel".into())),
    }
}

/// Pixels taking part in the evaluation: caller mask, central crop and cap.
fn evaluation_mask(gt: &Image, valid: Option<&[bool]>, opts: &DepthEvalOptions) -> Vec<bool> {
    let (h, w) = (gt.height(), gt.width());
    let (r0, r1, c0, c1) = match opts.crop {
        Some(f) => {
            let keep_h = ((h as f64 * f).round() as usize).clamp(1, h);
            let keep_w = ((w as f64 * f).round() as usize).clamp(1, w);
            let (r0, c0) = ((h - keep_h) / 2, (w - keep_w) / 2);
            (r0, r0 + keep_h, c0, c0 + keep_w)
        }
        None => (0, h, 0, w),
    };
    (0..h * w)
        .map(|k| {
            let (i, j) = (k / w, k % w);
            valid.is_none_or(|m| m[k])
                && (r0..r1).contains(&i)
                && (c0..c1).contains(&j)
                && opts.cap.is_none_or(|cap| gt.data()[k] <= cap)
        })
        .collect()
}

fn check_pair(pred: &Image, gt: &Image, valid: Option<&[bool]>) -> Result<()> {
    if pred.channels() != 1 || gt.channels() != 1 {
        return Err(Error::invalid("depth maps must be single-channel"));
    }
    if pred.height() != gt.height() || pred.width() != gt.width() {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, ground truth {}x{}",
            pred.height(),
            pred.width(),
            gt.height(),
            gt.width()
        )));
    }
    if valid.is_some_and(|m| m.len() != gt.pixels()) {
        return Err(Error::DimensionMismatch("valid mask does not match the depth map".into()));
    }
    Ok(())
}

/// Standard monocular depth metrics after scaling the prediction.
/// [`ScaleMode::Global`] behaves like `Median` for a single image.
pub fn depth_metrics(pred: &Image, gt: &Image, valid: Option<&[bool]>, opts: &DepthEvalOptions) -> Result<DepthMetrics> {
    opts.validate()?;
    check_pair(pred, gt, valid)?;
    let mask = evaluation_mask(gt, valid, opts);
    let scale = match opts.scale {
        ScaleMode::Fixed(s) => s,
        ScaleMode::Median | ScaleMode::Global => median_scale(pred.data(), gt.data(), Some(&mask))?,
    };
    metrics_with_scale(pred.data(), gt.data(), &mask, scale)
}

fn metrics_with_scale(pred: &[f64], gt: &[f64], mask: &[bool], scale: f64) -> Result<DepthMetrics> {
    let mut m = DepthMetrics {
        scale,
        ..Default::default()
    };
    let (mut sq, mut sq_log) = (0.0, 0.0);
    for k in 0..gt.len() {
        if !mask[k] {
            continue;
        }
        let (p, g) = (pred[k] * scale, gt[k]);
        if !(p > 0.0 && g > 0.0) {
            return Err(Error::invalid(format!("nonpositive depth at pixel {k} (pred {p}, gt {g})")));
        }
        let d = p - g;
        m.abs_rel += d.abs() / g;
        m.sq_rel += d * d / g;
        sq += d * d;
        let dl = p.ln() - g.ln();
        sq_log += dl * dl;
        let ratio = (p / g).max(g / p);
        m.delta1 += (ratio < 1.25) as u8 as f64;
        m.delta2 += (ratio < 1.25f64.powi(2)) as u8 as f64;
        m.delta3 += (ratio < 1.25f64.powi(3)) as u8 as f64;
        m.count += 1;
    }
    if m.count == 0 {
        return Err(Error::NoValidPixels("no pixel passes the evaluation mask".into()));
    }
    let n = m.count as f64;
    m.abs_rel /= n;
    m.sq_rel /= n;
    m.rmse = (sq / n).sqrt();
    m.rmse_log = (sq_log / n).sqrt();
    m.delta1 /= n;
    m.delta2 /= n;
    m.delta3 /= n;
    Ok(m)
}

/// Per-image metrics over a set, averaged. With [`ScaleMode::Global`] one
/// ratio of pooled medians is applied to every image.
pub fn depth_metrics_set(pairs: &[(Image, Image)], opts: &DepthEvalOptions) -> Result<DepthMetrics> {
    opts.validate()?;
    let masks: Vec<Vec<bool>> = pairs
        .iter()
        .map(|(p, g)| check_pair(p, g, None).map(|_| evaluation_mask(g, None, opts)))
        .collect::<Result<_>>()?;
    let per_image: Vec<DepthMetrics> = match opts.scale {
        ScaleMode::Global => {
            let mut p = Vec::new();
            let mut g = Vec::new();
            let mut m = Vec::new();
            for ((pred, gt), mask) in pairs.iter().zip(&masks) {
                p.extend_from_slice(pred.data());
                g.extend_from_slice(gt.data());
                m.extend_from_slice(mask);
            }
            let s = median_scale(&p, &g, Some(&m))?;
            pairs
                .iter()
                .zip(&masks)
                .map(|((pred, gt), mask)| metrics_with_scale(pred.data(), gt.data(), mask, s))
                .collect::<Result<_>>()?
        }
        _ => pairs
            .iter()
            .map(|(pred, gt)| depth_metrics(pred, gt, None, opts))
            .collect::<Result<_>>()?,
    };
    DepthMetrics::mean(&per_image)
}

/// Aligned plain-text table with the usual column order.
pub fn format_depth_table(rows: &[(&str, DepthMetrics)]) -> String {
    let heads = ["Abs Rel", "Sq Rel", "RMSE", "RMSE log", "d<1.25", "d<1.25^2", "d<1.25^3"];
    let label_w = rows.iter().map(|(n, _)| n.len()).chain([6]).max().unwrap_or(6);
    let mut out = format!("{:<label_w$}", "Method");
    for h in heads {
        out.push_str(&format!("  {h:>9}"));
    }
    out.push('\n');
    for (name, m) in rows {
        out.push_str(&format!("{name:<label_w$}"));
        for v in m.values() {
            out.push_str(&format!("  {v:>9.3}"));
        }
        out.push('\n');
    }
    out
}

/// Machine-readable `key value` block.
pub fn format_depth_report(m: &DepthMetrics) -> String {
    let mut out = String::new();
    for (k, v) in METRIC_NAMES.iter().zip(m.values()) {
        out.push_str(&format!("{k} {v:.10}\n"));
    }
    out.push_str(&format!("count {}\nscale {:.10}\n", m.count, m.scale));
    out
}
