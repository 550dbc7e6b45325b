use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{mat3_vec, pose_to_transform, Intrinsics, PixelCoord, PoseParams, RigidTransform};
use crate::image::Image;

/// Scene geometry, in world coordinates (camera 0 looks down +z from the origin
/// when the trajectory starts at identity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneKind {
    /// Plane `z = depth`.
    Plane { depth: f64 },
    /// Plane `z = depth + slope_x * x + slope_y * y`.
    Slanted {
        depth: f64,
        slope_x: f64,
        slope_y: f64,
    },
    /// Near plane `z = near` for `x < split_x`, in front of an infinite far
    /// plane `z = far`.
    TwoPlane { near: f64, far: f64, split_x: f64 },
}

impl SceneKind {
    fn reference_depth(&self) -> f64 {
        match *self {
            SceneKind::Plane { depth } | SceneKind::Slanted { depth, .. } => depth,
            SceneKind::TwoPlane { near, .. } => near,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SceneKind::Plane { depth } => depth > 0.0,
            SceneKind::Slanted {
                depth,
                slope_x,
                slope_y,
            } => depth > 0.0 && slope_x.is_finite() && slope_y.is_finite(),
            SceneKind::TwoPlane { near, far, split_x } => {
                near > 0.0 && far > near && split_x.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid scene geometry {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TextureMode {
    /// Wavelengths of 12 to 32 pixels at the reference depth.
    #[default]
    Smooth,
    /// Wavelengths of 2 to 3 pixels; photometric gradients become local.
    HighFrequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub kind: SceneKind,
    pub texture: TextureMode,
    pub texture_seed: u64,
    /// Camera-to-world pose of every frame.
    pub trajectory: Vec<PoseParams>,
    pub intrinsics: Intrinsics,
    /// 1 (gray) or 3 (color).
    pub channels: usize,
    /// Standard deviation of additive Gaussian noise; 0 disables it.
    pub noise_sigma: f64,
    pub target_index: usize,
}

impl SceneSpec {
    /// Fronto-parallel plane seen by `frames` cameras translating along x,
    /// `step` world units per frame, centred on the middle (target) frame.
    pub fn plane_sweep(frames: usize, depth: f64, step: f64, intrinsics: Intrinsics, seed: u64) -> Self {
        let center = frames / 2;
        SceneSpec {
            kind: SceneKind::Plane { depth },
            texture: TextureMode::Smooth,
            texture_seed: seed,
            trajectory: (0..frames)
                .map(|k| PoseParams::translation((k as f64 - center as f64) * step, 0.0, 0.0))
                .collect(),
            intrinsics,
            channels: 1,
            noise_sigma: 0.0,
            target_index: center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        self.intrinsics.validate()?;
        if self.trajectory.len() < 2 {
            return Err(Error::invalid("a scene needs at least two frames"));
        }
        if self.target_index >= self.trajectory.len() {
            return Err(Error::invalid("target index out of range"));
        }
        if self.channels != 1 && self.channels != 3 {
            return Err(Error::invalid("scenes render 1 or 3 channels"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::invalid("noise sigma must be non-negative"));
        }
        Ok(())
    }
}

/// Ordered frames with intrinsics and optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetSequence {
    pub images: Vec<Image>,
    pub intrinsics: Intrinsics,
    /// Per-frame single-channel depth maps.
    pub gt_depths: Option<Vec<Image>>,
    /// Camera-to-world pose per frame.
    pub gt_poses: Option<Vec<RigidTransform>>,
    pub target_index: usize,
}

impl SnippetSequence {
    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::invalid("sequence has no frames"));
        }
        if self.target_index >= self.images.len() {
            return Err(Error::invalid(format!(
                "target index {} out of range for {} frames",
                self.target_index,
                self.images.len()
            )));
        }
        let first = &self.images[0];
        for (i, im) in self.images.iter().enumerate() {
            if !im.same_shape(first) {
                return Err(Error::DimensionMismatch(format!(
                    "frame {i} is {}x{}x{}, frame 0 is {}x{}x{}",
                    im.height(),
                    im.width(),
                    im.channels(),
                    first.height(),
                    first.width(),
                    first.channels()
                )));
            }
        }
        if self.intrinsics.width != first.width() || self.intrinsics.height != first.height() {
            return Err(Error::DimensionMismatch(format!(
                "intrinsics are {}x{}, frames are {}x{}",
                self.intrinsics.width,
                self.intrinsics.height,
                first.width(),
                first.height()
            )));
        }
        if let Some(d) = &self.gt_depths {
            if d.len() != self.images.len()
                || d.iter().any(|m| m.height() != first.height() || m.width() != first.width() || m.channels() != 1)
            {
                return Err(Error::DimensionMismatch(
                    "ground-truth depth maps must be single-channel and match the frames".into(),
                ));
            }
        }
        if let Some(p) = &self.gt_poses {
            if p.len() != self.images.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} ground-truth poses for {} frames",
                    p.len(),
                    self.images.len()
                )));
            }
        }
        Ok(())
    }

    /// Ground-truth transform taking target-camera points into frame `s`.
    pub fn relative_pose(&self, s: usize) -> Option<RigidTransform> {
        let poses = self.gt_poses.as_ref()?;
        Some(poses[s].invert().compose(&poses[self.target_index]))
    }
}

#[derive(Debug, Clone)]
struct Wave {
    kx: f64,
    ky: f64,
    amplitude: f64,
    phase: [f64; 3],
}

/// Sum of low-frequency sinusoids over world `(x, y)`, centred on 0.5.
#[derive(Debug, Clone)]
struct Texture {
    waves: Vec<Wave>,
}

impl Texture {
    fn new(seed: u64, mode: TextureMode, world_per_pixel: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = match mode {
            TextureMode::Smooth => (12.0, 32.0),
            TextureMode::HighFrequency => (2.0, 3.0),
        };
        let count = 6;
        let waves = (0..count)
            .map(|_| {
                let wavelength_px: f64 = rng.random_range(lo..hi);
                let angle: f64 = rng.random_range(0.0..TAU);
                let k = TAU / (wavelength_px * world_per_pixel);
                Wave {
                    kx: k * angle.cos(),
                    ky: k * angle.sin(),
                    amplitude: rng.random_range(0.5..1.0),
                    phase: [
                        rng.random_range(0.0..TAU),
                        rng.random_range(0.0..TAU),
                        rng.random_range(0.0..TAU),
                    ],
                }
            })
            .collect::<Vec<_>>();
        // total amplitude 0.45 keeps intensities inside [0.05, 0.95]
        let sum: f64 = waves.iter().map(|w| w.amplitude).sum();
        let waves = waves
            .into_iter()
            .map(|w| Wave {
                amplitude: w.amplitude * 0.45 / sum,
                ..w
            })
            .collect();
        Texture { waves }
    }

    fn eval(&self, x: f64, y: f64, channel: usize) -> f64 {
        0.5 + self
            .waves
            .iter()
            .map(|w| w.amplitude * (w.kx * x + w.ky * y + w.phase[channel]).sin())
            .sum::<f64>()
    }
}

/// Ray parameter of the hit of `origin + t * dir` with plane `n . X = d`.
fn hit_plane(n: [f64; 3], d: f64, origin: [f64; 3], dir: [f64; 3]) -> Option<f64> {
    let denom = n[0] * dir[0] + n[1] * dir[1] + n[2] * dir[2];
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (d - (n[0] * origin[0] + n[1] * origin[1] + n[2] * origin[2])) / denom;
    (t > 0.0).then_some(t)
}

/// Depth along a camera ray with unit z (so the ray parameter is the camera
/// z-depth) and the world hit point.
fn intersect(kind: &SceneKind, origin: [f64; 3], dir: [f64; 3]) -> Option<(f64, [f64; 3])> {
    let at = |t: f64| [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
    match *kind {
        SceneKind::Plane { depth } => hit_plane([0.0, 0.0, 1.0], depth, origin, dir).map(|t| (t, at(t))),
        SceneKind::Slanted {
            depth,
            slope_x,
            slope_y,
        } => hit_plane([-slope_x, -slope_y, 1.0], depth, origin, dir).map(|t| (t, at(t))),
        SceneKind::TwoPlane { near, far, split_x } => {
            let near_hit = hit_plane([0.0, 0.0, 1.0], near, origin, dir)
                .map(|t| (t, at(t)))
                .filter(|(_, p)| p[0] < split_x);
            near_hit.or_else(|| hit_plane([0.0, 0.0, 1.0], far, origin, dir).map(|t| (t, at(t))))
        }
    }
}

/// Renders every frame by casting the ray of each pixel into the scene and
/// evaluating the procedural texture at the hit point.
pub fn render_scene(spec: &SceneSpec) -> Result<SnippetSequence> {
    spec.validate()?;
    let k = spec.intrinsics;
    let (h, w, ch) = (k.height, k.width, spec.channels);
    let texture = Texture::new(
        spec.texture_seed,
        spec.texture,
        spec.kind.reference_depth() / k.fx,
    );
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.texture_seed ^ 0x9e37_79b9_7f4a_7c15);
    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma checked"));

    let mut images = Vec::with_capacity(spec.trajectory.len());
    let mut depths = Vec::with_capacity(spec.trajectory.len());
    let mut poses = Vec::with_capacity(spec.trajectory.len());
    for (f, pose) in spec.trajectory.iter().enumerate() {
        let c2w = pose_to_transform(pose)?;
        let r = c2w.rotation();
        let origin = c2w.translation();
        let mut pix = Vec::with_capacity(h * w * ch);
        let mut dep = Vec::with_capacity(h * w);
        for i in 0..h {
            for j in 0..w {
                let ray = k.unproject(PixelCoord::new(j as f64, i as f64));
                let dir = mat3_vec(&r, &ray);
                let (t, p) = intersect(&spec.kind, origin, dir).ok_or_else(|| {
                    Error::invalid(format!(
                        "frame {f}: pixel ({i}, {j}) does not see the scene in front of the camera"
                    ))
                })?;
                dep.push(t);
                for c in 0..ch {
                    let mut value = texture.eval(p[0], p[1], c);
                    if let Some(n) = &noise {
                        value = (value + n.sample(&mut noise_rng)).clamp(0.0, 1.0);
                    }
                    pix.push(value);
                }
            }
        }
        images.push(Image::new(h, w, ch, pix)?);
        depths.push(Image::new(h, w, 1, dep)?);
        poses.push(c2w);
    }
    Ok(SnippetSequence {
        images,
        intrinsics: k,
        gt_depths: Some(depths),
        gt_poses: Some(poses),
        target_index: spec.target_index,
    })
}
