use crate::error::{Error, Result};

/// Two-channel per-pixel logits for one source view at one pyramid level.
///
/// The explainability mask is the second channel after a softmax over the
/// two channels, i.e. `sigmoid(l1 - l0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainabilityField {
    height: usize,
    width: usize,
    /// Interleaved `[l0, l1]` per pixel, row-major.
    logits: Vec<f64>,
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl ExplainabilityField {
    /// All-zero logits: the mask is 0.5 everywhere.
    pub fn zeros(height: usize, width: usize) -> Self {
        ExplainabilityField {
            height,
            width,
            logits: vec![0.0; height * width * 2],
        }
    }

    pub fn from_logits(height: usize, width: usize, logits: Vec<f64>) -> Result<Self> {
        if logits.len() != height * width * 2 {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width} explainability field needs {} logits, got {}",
                height * width * 2,
                logits.len()
            )));
        }
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("explainability logits must be finite"));
        }
        Ok(ExplainabilityField {
            height,
            width,
            logits,
        })
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

    /// Softmax probabilities of channel 1, one per pixel.
    pub fn mask(&self) -> Vec<f64> {
        self.logits
            .chunks_exact(2)
            .map(|l| sigmoid(l[1] - l[0]))
            .collect()
    }

    pub fn mean_mask(&self) -> f64 {
        let m = self.mask();
        m.iter().sum::<f64>() / m.len() as f64
    }

    /// Chains d/d(mask) back to d/d(logits).
    pub fn mask_grad_to_logits(&self, grad_mask: &[f64]) -> Vec<f64> {
        assert_eq!(grad_mask.len(), self.height * self.width);
        let mut out = vec![0.0; self.logits.len()];
        for (p, (l, g)) in self.logits.chunks_exact(2).zip(grad_mask).enumerate() {
            let e = sigmoid(l[1] - l[0]);
            let d = g * e * (1.0 - e);
            out[2 * p] = -d;
            out[2 * p + 1] = d;
        }
        out
    }
}

/// Value and logit gradient of [`explainability_regularizer`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerLoss {
    pub value: f64,
    pub grad_logits: Vec<f64>,
}

/// Mean over pixels of `-log E(p)`: cross-entropy against a constant label 1.
pub fn explainability_regularizer(field: &ExplainabilityField) -> RegularizerLoss {
    let n = (field.height * field.width) as f64;
    let mut value = 0.0;
    let mut grad_logits = vec![0.0; field.logits.len()];
    for (p, l) in field.logits.chunks_exact(2).enumerate() {
        let z = l[1] - l[0];
        value += softplus(-z);
        let d = -(1.0 - sigmoid(z)) / n;
        grad_logits[2 * p] = -d;
        grad_logits[2 * p + 1] = d;
    }
    RegularizerLoss {
        value: value / n,
        grad_logits,
    }
}
