/// Value and gradient of [`smoothness_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessLoss {
    pub value: f64,
    /// d value / d depth, row-major like the input.
    pub grad: Vec<f64>,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean absolute second difference `D(p-1) - 2 D(p) + D(p+1)` along each
/// axis, summed over the two axes. An axis with fewer than three samples
/// contributes zero.
pub fn smoothness_loss(depth: &[f64], height: usize, width: usize) -> SmoothnessLoss {
    assert_eq!(depth.len(), height * width, "depth map shape mismatch");
    let mut grad = vec![0.0; depth.len()];
    let mut value = 0.0;

    if width >= 3 {
        let count = (height * (width - 2)) as f64;
        let mut sum = 0.0;
        for i in 0..height {
            for j in 1..width - 1 {
                let idx = i * width + j;
                let d2 = depth[idx - 1] - 2.0 * depth[idx] + depth[idx + 1];
                sum += d2.abs();
                let g = sign(d2) / count;
                grad[idx - 1] += g;
                grad[idx] -= 2.0 * g;
                grad[idx + 1] += g;
            }
        }
        value += sum / count;
    }
    if height >= 3 {
        let count = ((height - 2) * width) as f64;
        let mut sum = 0.0;
        for i in 1..height - 1 {
            for j in 0..width {
                let idx = i * width + j;
                let d2 = depth[idx - width] - 2.0 * depth[idx] + depth[idx + width];
                sum += d2.abs();
                let g = sign(d2) / count;
                grad[idx - width] += g;
                grad[idx] -= 2.0 * g;
                grad[idx + width] += g;
            }
        }
        value += sum / count;
    }
    SmoothnessLoss { value, grad }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_affine_are_free() {
        let c = vec![3.0; 20];
        assert_eq!(smoothness_loss(&c, 4, 5).value, 0.0);
        // integer coefficients keep the stencil exact
        let ramp: Vec<f64> = (0..20).map(|k| (2 * (k % 5) + 3 * (k / 5) + 1) as f64).collect();
        assert_eq!(smoothness_loss(&ramp, 4, 5).value, 0.0);
    }

    #[test]
    fn parabola_row() {
        let row: Vec<f64> = (0..6).map(|u| (u * u) as f64).collect();
        let s = smoothness_loss(&row, 1, 6);
        assert_eq!(s.value, 2.0);
    }

    #[test]
    fn short_axes_contribute_nothing() {
        let s = smoothness_loss(&[1.0, 5.0, 2.0, 7.0], 2, 2);
        assert_eq!(s.value, 0.0);
        assert!(s.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d: Vec<f64> = (0..20).map(|k| ((k * 37 % 11) as f64 * 0.7).sin() + 2.0).collect();
        let s = smoothness_loss(&d, 4, 5);
        let h = 1e-6;
        for idx in 0..20 {
            let mut p = d.clone();
            p[idx] += h;
            let fp = smoothness_loss(&p, 4, 5).value;
            p[idx] -= 2.0 * h;
            let fm = smoothness_loss(&p, 4, 5).value;
            assert!((s.grad[idx] - (fp - fm) / (2.0 * h)).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn invariant_under_affine_offset(
            base in proptest::collection::vec(0.1..10.0f64, 30),
            a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64
        ) {
            let (h, w) = (5, 6);
            let shifted: Vec<f64> = base
                .iter()
                .enumerate()
                .map(|(k, d)| d + a * (k % w) as f64 + b * (k / w) as f64 + c)
                .collect();
            let l0 = smoothness_loss(&base, h, w).value;
            let l1 = smoothness_loss(&shifted, h, w).value;
            prop_assert!(l0 >= 0.0);
            prop_assert!((l0 - l1).abs() < 1e-9 * (1.0 + l0));
        }
    }
}
