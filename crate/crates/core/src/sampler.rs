//! Differentiable inverse warping.
//!
//! Every target pixel is lifted to 3D with its depth, moved into the source
//! camera and re-projected; the source image is then read back with bilinear
//! interpolation. Coordinates outside `[0, w-1] x [0, h-1]` or behind the
//! source camera are invalid: they produce zero intensity and zero gradient.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    mat3_vec, project_terms, Intrinsics, PixelCoord, PoseParams, RigidTransform,
};
use crate::image::Image;

/// Bilinear read of all channels at a continuous coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearSample {
    pub value: Vec<f64>,
    /// d value / d u, per channel.
    pub du: Vec<f64>,
    /// d value / d v, per channel.
    pub dv: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    j0: usize,
    j1: usize,
    i0: usize,
    i1: usize,
    a: f64,
    b: f64,
}

/// Floor-based cell assignment; the last row/column reuses the previous cell
/// so that `u = w - 1` is still interpolable.
#[inline]
fn locate(width: usize, height: usize, u: f64, v: f64) -> Option<Cell> {
    if !(u >= 0.0 && v >= 0.0 && u <= (width - 1) as f64 && v <= (height - 1) as f64) {
        return None;
    }
    let mut j0 = u.floor() as usize;
    if j0 + 1 >= width {
        j0 = width.saturating_sub(2);
    }
    let mut i0 = v.floor() as usize;
    if i0 + 1 >= height {
        i0 = height.saturating_sub(2);
    }
    Some(Cell {
        j0,
        j1: (j0 + 1).min(width - 1),
        i0,
        i1: (i0 + 1).min(height - 1),
        a: u - j0 as f64,
        b: v - i0 as f64,
    })
}

#[inline]
fn sample_cell(img: &Image, cell: &Cell, value: &mut [f64], du: &mut [f64], dv: &mut [f64]) {
    let Cell { j0, j1, i0, i1, a, b } = *cell;
    let w00 = (1.0 - a) * (1.0 - b);
    let w01 = a * (1.0 - b);
    let w10 = (1.0 - a) * b;
    let w11 = a * b;
    let p00 = img.pixel(i0, j0);
    let p01 = img.pixel(i0, j1);
    let p10 = img.pixel(i1, j0);
    let p11 = img.pixel(i1, j1);
    for c in 0..img.channels() {
        value[c] = w00 * p00[c] + w01 * p01[c] + w10 * p10[c] + w11 * p11[c];
        du[c] = (1.0 - b) * (p01[c] - p00[c]) + b * (p11[c] - p10[c]);
        dv[c] = (1.0 - a) * (p10[c] - p00[c]) + a * (p11[c] - p01[c]);
    }
}

/// Interpolation weights `(w_tl, w_tr, w_bl, w_br)` at `p`, or `None` when `p`
/// is not interpolable.
pub fn bilinear_weights(width: usize, height: usize, p: PixelCoord) -> Option<[f64; 4]> {
    let cell = locate(width, height, p.u, p.v)?;
    let (a, b) = (cell.a, cell.b);
    Some([(1.0 - a) * (1.0 - b), a * (1.0 - b), (1.0 - a) * b, a * b])
}

/// Samples `img` at `p`. Returns `None` outside the interpolable region.
pub fn bilinear_sample(img: &Image, p: PixelCoord) -> Option<BilinearSample> {
    let cell = locate(img.width(), img.height(), p.u, p.v)?;
    let c = img.channels();
    let mut s = BilinearSample {
        value: vec![0.0; c],
        du: vec![0.0; c],
        dv: vec![0.0; c],
    };
    sample_cell(img, &cell, &mut s.value, &mut s.du, &mut s.dv);
    Some(s)
}

/// Per-pixel quantities kept by [`inverse_warp`] for backpropagation.
#[derive(Debug, Clone, Copy, Default)]
struct PixelTerms {
    ray: [f64; 3],
    inv_depth: f64,
    /// d(u_s, v_s) / dq, see `geometry::ProjectionTerms`.
    dpix_dq: [[f64; 3]; 2],
}

/// Output of [`inverse_warp`]: the source view resampled on the target grid.
#[derive(Debug, Clone)]
pub struct WarpResult {
    pub warped: Image,
    pub valid: Vec<bool>,
    /// d warped / d u_s, per pixel and channel.
    pub grad_u: Vec<f64>,
    /// d warped / d v_s, per pixel and channel.
    pub grad_v: Vec<f64>,
    /// Projected source coordinates (NaN when behind the camera).
    pub coords: Vec<PixelCoord>,
    terms: Vec<PixelTerms>,
    transform: RigidTransform,
}

/// Gradients of a scalar with respect to the warp inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpGradients {
    /// Per target pixel, d/d depth.
    pub depth: Vec<f64>,
    /// d/d (rx, ry, rz, tx, ty, tz).
    pub pose: [f64; 6],
}

impl WarpResult {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn transform(&self) -> &RigidTransform {
        &self.transform
    }

    /// Chains `grad_warped` (d scalar / d warped intensity, same layout as
    /// `warped`) back to the depth map and the six pose parameters. `pose`
    /// must be the parameters that produced the warp's transform.
    pub fn backward(&self, grad_warped: &[f64], pose: &PoseParams) -> WarpGradients {
        let n = self.valid.len();
        let ch = self.warped.channels();
        assert_eq!(grad_warped.len(), n * ch, "gradient buffer shape mismatch");
        let drot = pose.rotation_derivatives();
        let t = self.transform.translation();
        let mut depth = vec![0.0; n];
        let mut pose_grad = [0.0; 6];
        for idx in 0..n {
            if !self.valid[idx] {
                continue;
            }
            let (mut gu, mut gv) = (0.0, 0.0);
            for c in 0..ch {
                let g = grad_warped[idx * ch + c];
                gu += g * self.grad_u[idx * ch + c];
                gv += g * self.grad_v[idx * ch + c];
            }
            if gu == 0.0 && gv == 0.0 {
                continue;
            }
            let pt = &self.terms[idx];
            // d scalar / dq
            let gq = [
                gu * pt.dpix_dq[0][0] + gv * pt.dpix_dq[1][0],
                gu * pt.dpix_dq[0][1] + gv * pt.dpix_dq[1][1],
                gu * pt.dpix_dq[0][2] + gv * pt.dpix_dq[1][2],
            ];
            let inv_d2 = pt.inv_depth * pt.inv_depth;
            depth[idx] = -(gq[0] * t[0] + gq[1] * t[1] + gq[2] * t[2]) * inv_d2;
            for (axis, dr) in drot.iter().enumerate() {
                let dq = mat3_vec(dr, &pt.ray);
                pose_grad[axis] += gq[0] * dq[0] + gq[1] * dq[1] + gq[2] * dq[2];
            }
            for k in 0..3 {
                pose_grad[3 + k] += gq[k] * pt.inv_depth;
            }
        }
        WarpGradients {
            depth,
            pose: pose_grad,
        }
    }
}

struct RowOut {
    warped: Vec<f64>,
    valid: Vec<bool>,
    grad_u: Vec<f64>,
    grad_v: Vec<f64>,
    coords: Vec<PixelCoord>,
    terms: Vec<PixelTerms>,
}

/// Warps `src` onto the target grid given the target depth map (one value per
/// target pixel, row-major), the target-to-source transform and intrinsics.
pub fn inverse_warp(
    src: &Image,
    depth: &[f64],
    pose: &RigidTransform,
    k: &Intrinsics,
) -> Result<WarpResult> {
    let (h, w, ch) = (src.height(), src.width(), src.channels());
    if k.width != w || k.height != h {
        return Err(Error::DimensionMismatch(format!(
            "intrinsics are {}x{}, source image is {}x{}",
            k.width, k.height, w, h
        )));
    }
    if depth.len() != h * w {
        return Err(Error::DimensionMismatch(format!(
            "depth map has {} values, image has {} pixels",
            depth.len(),
            h * w
        )));
    }
    if let Some(i) = depth.iter().position(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::invalid(format!(
            "depth at pixel {i} is {}, must be positive",
            depth[i]
        )));
    }
    let r = pose.rotation();
    let t = pose.translation();

    let rows: Vec<RowOut> = (0..h)
        .into_par_iter()
        .map(|i| {
            let mut out = RowOut {
                warped: vec![0.0; w * ch],
                valid: vec![false; w],
                grad_u: vec![0.0; w * ch],
                grad_v: vec![0.0; w * ch],
                coords: Vec::with_capacity(w),
                terms: Vec::with_capacity(w),
            };
            for j in 0..w {
                let d = depth[i * w + j];
                let pt = project_terms(PixelCoord::new(j as f64, i as f64), d, k, &r, &t);
                out.coords.push(pt.projection.pixel);
                out.terms.push(PixelTerms {
                    ray: pt.ray,
                    inv_depth: 1.0 / d,
                    dpix_dq: pt.dpix_dq,
                });
                if !pt.projection.in_front {
                    continue;
                }
                let p = pt.projection.pixel;
                if let Some(cell) = locate(w, h, p.u, p.v) {
                    out.valid[j] = true;
                    let sl = j * ch..(j + 1) * ch;
                    sample_cell(
                        src,
                        &cell,
                        &mut out.warped[sl.clone()],
                        &mut out.grad_u[sl.clone()],
                        &mut out.grad_v[sl],
                    );
                }
            }
            out
        })
        .collect();

    let mut warped = Vec::with_capacity(h * w * ch);
    let mut valid = Vec::with_capacity(h * w);
    let mut grad_u = Vec::with_capacity(h * w * ch);
    let mut grad_v = Vec::with_capacity(h * w * ch);
    let mut coords = Vec::with_capacity(h * w);
    let mut terms = Vec::with_capacity(h * w);
    for row in rows {
        warped.extend(row.warped);
        valid.extend(row.valid);
        grad_u.extend(row.grad_u);
        grad_v.extend(row.grad_v);
        coords.extend(row.coords);
        terms.extend(row.terms);
    }
    Ok(WarpResult {
        warped: Image::new(h, w, ch, warped)?,
        valid,
        grad_u,
        grad_v,
        coords,
        terms,
        transform: *pose,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pose_to_transform;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize, c: usize) -> Image {
        Image::from_fn(h, w, c, |_, _, _| rng.random::<f64>())
    }

    #[test]
    fn integer_coordinate_reads_exact_pixel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = random_image(&mut rng, 8, 8, 2);
        let s = bilinear_sample(&img, PixelCoord::new(3.0, 5.0)).unwrap();
        for c in 0..2 {
            assert_eq!(s.value[c], img.get(5, 3, c));
            assert_eq!(s.du[c], img.get(5, 4, c) - img.get(5, 3, c));
            assert_eq!(s.dv[c], img.get(6, 3, c) - img.get(5, 3, c));
        }
    }

    #[test]
    fn midpoint_is_mean_of_corners() {
        let img = Image::new(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let s = bilinear_sample(&img, PixelCoord::new(0.5, 0.5)).unwrap();
        assert_eq!(s.value[0], 1.5);
    }

    #[test]
    fn far_edge_is_interpolable() {
        let img = Image::new(2, 3, 1, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let s = bilinear_sample(&img, PixelCoord::new(2.0, 1.0)).unwrap();
        assert_eq!(s.value[0], 5.0);
        assert!(bilinear_sample(&img, PixelCoord::new(2.0 + 1e-12, 1.0)).is_none());
        assert!(bilinear_sample(&img, PixelCoord::new(-1e-12, 0.0)).is_none());
        assert!(bilinear_sample(&img, PixelCoord::new(f64::NAN, 0.0)).is_none());
        let single = Image::new(1, 1, 1, vec![0.25]).unwrap();
        let s = bilinear_sample(&single, PixelCoord::new(0.0, 0.0)).unwrap();
        assert_eq!((s.value[0], s.du[0], s.dv[0]), (0.25, 0.0, 0.0));
    }

    #[test]
    fn sample_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = random_image(&mut rng, 5, 5, 1);
        let h = 1e-6;
        for _ in 0..50 {
            let (u, v): (f64, f64) = (rng.random_range(0.05..3.95), rng.random_range(0.05..3.95));
            if (u - u.round()).abs() < 1e-3 || (v - v.round()).abs() < 1e-3 {
                continue;
            }
            let s = bilinear_sample(&img, PixelCoord::new(u, v)).unwrap();
            let f = |uu: f64, vv: f64| bilinear_sample(&img, PixelCoord::new(uu, vv)).unwrap().value[0];
            let fdu = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
            let fdv = (f(u, v + h) - f(u, v - h)) / (2.0 * h);
            assert_relative_eq!(s.du[0], fdu, max_relative = 1e-5, epsilon = 1e-9);
            assert_relative_eq!(s.dv[0], fdv, max_relative = 1e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn identity_warp_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let img = random_image(&mut rng, 9, 13, 3);
        let k = Intrinsics::new(11.0, 12.0, 6.3, 4.1, 13, 9).unwrap();
        let depth: Vec<f64> = (0..9 * 13).map(|_| rng.random_range(0.1..50.0)).collect();
        let wr = inverse_warp(&img, &depth, &RigidTransform::identity(), &k).unwrap();
        assert_eq!(wr.warped, img);
        assert!(wr.valid.iter().all(|&v| v));
    }

    #[test]
    fn everything_behind_camera() {
        let img = Image::filled(4, 5, 1, 0.7);
        let k = Intrinsics::new(5.0, 5.0, 2.0, 1.5, 5, 4).unwrap();
        let t = RigidTransform::translation_only([0.0, 0.0, -10.0]);
        let wr = inverse_warp(&img, &[2.0; 20], &t, &k).unwrap();
        assert_eq!(wr.valid_count(), 0);
        assert!(wr.warped.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_checks() {
        let img = Image::filled(4, 5, 1, 0.7);
        let k = Intrinsics::new(5.0, 5.0, 2.0, 1.5, 5, 4).unwrap();
        let id = RigidTransform::identity();
        assert!(matches!(
            inverse_warp(&img, &[1.0; 19], &id, &k),
            Err(Error::DimensionMismatch(_))
        ));
        let k2 = Intrinsics::new(5.0, 5.0, 2.0, 1.5, 6, 4).unwrap();
        assert!(inverse_warp(&img, &[1.0; 20], &id, &k2).is_err());
        let mut d = [1.0; 20];
        d[3] = 0.0;
        assert!(inverse_warp(&img, &d, &id, &k).is_err());
    }

    #[test]
    fn translation_warp_is_closed_form_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = random_image(&mut rng, 6, 10, 1);
        let k = Intrinsics::new(20.0, 20.0, 5.0, 3.0, 10, 6).unwrap();
        // fx * tx / D = 20 * 0.25 / 2.5 = 2 pixels
        let t = RigidTransform::translation_only([0.25, 0.0, 0.0]);
        let wr = inverse_warp(&img, &[2.5; 60], &t, &k).unwrap();
        for i in 0..6 {
            for j in 0..10 {
                let idx = i * 10 + j;
                if j + 2 <= 9 {
                    assert!(wr.valid[idx]);
                    assert!((wr.warped.get(i, j, 0) - img.get(i, j + 2, 0)).abs() < 1e-12);
                } else {
                    assert!(!wr.valid[idx]);
                    assert_eq!(wr.warped.get(i, j, 0), 0.0);
                }
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (h, w) = (8, 12);
        let img = Image::from_fn(h, w, 2, |i, j, c| {
            0.5 + 0.3 * ((i as f64) * 0.7 + (j as f64) * 0.45 + c as f64).sin()
        });
        let k = Intrinsics::new(10.0, 10.0, 5.5, 3.5, w, h).unwrap();
        let depth: Vec<f64> = (0..h * w).map(|_| rng.random_range(2.0..4.0)).collect();
        let pose = PoseParams::new(0.02, -0.03, 0.01, 0.1, -0.05, 0.08);
        let weights: Vec<f64> = (0..h * w * 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scalar = |d: &[f64], p: &PoseParams| {
            let wr = inverse_warp(&img, d, &pose_to_transform(p).unwrap(), &k).unwrap();
            wr.warped.data().iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>()
        };
        let wr = inverse_warp(&img, &depth, &pose_to_transform(&pose).unwrap(), &k).unwrap();
        let g = wr.backward(&weights, &pose);
        let step = 1e-5;
        for axis in 0..6 {
            let mut a = pose.to_array();
            a[axis] += step;
            let fp = scalar(&depth, &PoseParams::from_array(a));
            a[axis] -= 2.0 * step;
            let fm = scalar(&depth, &PoseParams::from_array(a));
            let fd = (fp - fm) / (2.0 * step);
            assert_relative_eq!(g.pose[axis], fd, max_relative = 1e-4, epsilon = 1e-8);
        }
        for idx in [0usize, 13, 40, 77, 95] {
            let mut d = depth.clone();
            d[idx] += step;
            let fp = scalar(&d, &pose);
            d[idx] -= 2.0 * step;
            let fm = scalar(&d, &pose);
            let fd = (fp - fm) / (2.0 * step);
            assert_relative_eq!(g.depth[idx], fd, max_relative = 1e-4, epsilon = 1e-8);
        }
    }

    proptest! {
        #[test]
        fn weights_are_convex(u in -1.0..6.0f64, v in -1.0..5.0f64) {
            if let Some(wts) = bilinear_weights(6, 5, PixelCoord::new(u, v)) {
                prop_assert!(wts.iter().all(|&x| x >= 0.0));
                prop_assert!((wts.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            } else {
                prop_assert!(u < 0.0 || v < 0.0 || u > 5.0 || v > 4.0);
            }
        }

        #[test]
        fn samples_stay_within_neighbors(
            seed in 0u64..1000, u in 0.0..4.0f64, v in 0.0..3.0f64
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = random_image(&mut rng, 4, 5, 1);
            let s = bilinear_sample(&img, PixelCoord::new(u, v)).unwrap();
            let (j0, i0) = ((u.floor() as usize).min(3), (v.floor() as usize).min(2));
            let n = [img.get(i0, j0, 0), img.get(i0, j0 + 1, 0), img.get(i0 + 1, j0, 0), img.get(i0 + 1, j0 + 1, 0)];
            let lo = n.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = n.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s.value[0] >= lo - 1e-15 && s.value[0] <= hi + 1e-15);
        }
    }
}
