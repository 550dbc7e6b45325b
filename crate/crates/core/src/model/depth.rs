use crate::error::{Error, Result};

pub const DEPTH_ALPHA: f64 = 10.0;
pub const DEPTH_BETA: f64 = 0.01;

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-pixel depth logits. Depth is `1 / (alpha * sigmoid(x) + beta)`, which
/// keeps it inside `(1 / (alpha + beta), 1 / beta)` for every finite logit.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthField {
    height: usize,
    width: usize,
    logits: Vec<f64>,
}

impl DepthField {
    pub fn from_logits(height: usize, width: usize, logits: Vec<f64>) -> Result<Self> {
        if logits.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width} depth field needs {} logits, got {}",
                height * width,
                logits.len()
            )));
        }
        Ok(DepthField {
            height,
            width,
            logits,
        })
    }

    /// Constant field whose activated depth equals `depth`.
    pub fn constant(height: usize, width: usize, depth: f64) -> Result<Self> {
        let logit = Self::logit_for_depth(depth)?;
        Self::from_logits(height, width, vec![logit; height * width])
    }

    /// Inverse of the activation.
    pub fn logit_for_depth(depth: f64) -> Result<f64> {
        let lo = 1.0 / (DEPTH_ALPHA + DEPTH_BETA);
        let hi = 1.0 / DEPTH_BETA;
        if !(depth > lo && depth < hi) {
            return Err(Error::invalid(format!(
                "depth {depth} outside the representable range ({lo}, {hi})"
            )));
        }
        let s = (1.0 / depth - DEPTH_BETA) / DEPTH_ALPHA;
        Ok((s / (1.0 - s)).ln())
    }

    pub fn activate(logit: f64) -> f64 {
        1.0 / (DEPTH_ALPHA * sigmoid(logit) + DEPTH_BETA)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    pub fn depth(&self) -> Vec<f64> {
        self.logits.iter().map(|&x| Self::activate(x)).collect()
    }

    /// Chains d/d(depth) to d/d(logit): `dD/dx = -alpha * s * (1 - s) * D^2`.
    pub fn depth_grad_to_logits(&self, grad_depth: &[f64]) -> Vec<f64> {
        self.logits
            .iter()
            .zip(grad_depth)
            .map(|(&x, &g)| {
                let s = sigmoid(x);
                let d = 1.0 / (DEPTH_ALPHA * s + DEPTH_BETA);
                -g * DEPTH_ALPHA * s * (1.0 - s) * d * d
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_init_hits_prior() {
        let f = DepthField::constant(3, 4, 1.0).unwrap();
        for d in f.depth() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        assert!(DepthField::constant(1, 1, 100.0).is_err());
        assert!(DepthField::constant(1, 1, 0.05).is_err());
    }

    #[test]
    fn logit_gradient_matches_finite_differences() {
        for &x in &[-6.0, -1.0, 0.0, 0.3, 2.5, 8.0] {
            let f = DepthField::from_logits(1, 1, vec![x]).unwrap();
            let g = f.depth_grad_to_logits(&[1.0])[0];
            let h = 1e-6;
            let fd = (DepthField::activate(x + h) - DepthField::activate(x - h)) / (2.0 * h);
            assert!((g - fd).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }

    proptest! {
        #[test]
        fn activation_stays_in_range(x in -700.0..700.0f64) {
            let d = DepthField::activate(x);
            prop_assert!((1.0 / (DEPTH_ALPHA + DEPTH_BETA)..=1.0 / DEPTH_BETA).contains(&d));
            prop_assert!(d > 0.0);
        }
    }
}
