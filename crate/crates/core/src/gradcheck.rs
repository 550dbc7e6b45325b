//! Central finite-difference check of the analytic gradients of the total
//! objective on small random snippets.
//!
//! Each parameter is differenced with step `h` and again with `h / 2`. When
//! the two estimates disagree the difference straddles a non-smooth point
//! (L1 zero crossing, bilinear cell edge, image border) and the instance is
//! redrawn. A wrong analytic gradient leaves both estimates in agreement, so
//! this does not hide errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Intrinsics, PoseParams};
use crate::image::Image;
use crate::losses::{ExplainabilityField, LossConfig};
use crate::model::{init_state, DepthField, SnippetState, StateConfig};

pub const GROUP_NAMES: [&str; 3] = ["depth_logits", "poses", "mask_logits"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckConfig {
    pub instances: usize,
    pub seed: u64,
    pub step: f64,
    pub tolerance: f64,
    /// Denominator floor of the relative error.
    pub floor: f64,
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    pub loss: LossConfig,
    /// Redraws allowed per requested instance.
    pub max_redraws: usize,
    /// Test hook: perturbs the analytic pose gradient by a relative 1e-3.
    pub inject_bug: bool,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig {
            instances: 20,
            seed: 0,
            step: 1e-5,
            tolerance: 1e-4,
            floor: 1e-7,
            height: 8,
            width: 12,
            frames: 3,
            loss: LossConfig {
                num_levels: 2,
                ..LossConfig::default()
            },
            max_redraws: 20,
            inject_bug: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupStat {
    pub max_rel_error: f64,
    pub checked: usize,
}

impl GroupStat {
    fn merge(&mut self, other: &GroupStat) {
        self.max_rel_error = self.max_rel_error.max(other.max_rel_error);
        self.checked += other.checked;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    /// Indexed like [`GROUP_NAMES`].
    pub groups: [GroupStat; 3],
    pub instances: usize,
    pub redrawn: usize,
    pub tolerance: f64,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.max_rel_error <= self.tolerance)
    }

    pub fn format(&self) -> String {
        let mut out = format!("instances {}\nredrawn {}\ntolerance {:e}\n", self.instances, self.redrawn, self.tolerance);
        for (name, g) in GROUP_NAMES.iter().zip(&self.groups) {
            out.push_str(&format!("{name} max_rel_error {:.6e} checked {}\n", g.max_rel_error, g.checked));
        }
        out.push_str(if self.passed() { "result pass\n" } else { "result fail\n" });
        out
    }
}

/// Random snippet: textured frames, depths in [1.5, 4], small poses and
/// unit-scale mask logits.
pub fn random_instance(rng: &mut ChaCha8Rng, cfg: &GradcheckConfig) -> Result<SnippetState> {
    let (h, w) = (cfg.height, cfg.width);
    let k = Intrinsics::new(10.0, 10.0, (w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0, w, h)?;
    let images: Vec<Image> = (0..cfg.frames)
        .map(|_| Image::from_fn(h, w, 1, |_, _, _| rng.random_range(0.05..0.95)))
        .collect();
    let mut state = init_state(
        &images,
        cfg.frames / 2,
        &k,
        &StateConfig {
            num_levels: cfg.loss.num_levels,
            depth_prior: 2.0,
        },
    )?;
    let logits = (0..h * w)
        .map(|_| DepthField::logit_for_depth(rng.random_range(1.5..4.0)))
        .collect::<Result<Vec<_>>>()?;
    state.depth = DepthField::from_logits(h, w, logits)?;
    for p in state.poses.iter_mut() {
        let mut r = |s: f64| rng.random_range(-s..s);
        *p = PoseParams::new(r(0.02), r(0.02), r(0.02), r(0.1), r(0.1), r(0.1));
    }
    for f in state.masks.iter_mut().flatten() {
        let n = f.logits().len();
        let logits = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        *f = ExplainabilityField::from_logits(f.height(), f.width(), logits)?;
    }
    Ok(state)
}

/// Group of every flattened parameter index.
fn groups_of(state: &SnippetState) -> Vec<usize> {
    let n_depth = state.depth.logits().len();
    let n_pose = 6 * state.poses.len();
    (0..state.num_params())
        .map(|i| {
            if i < n_depth {
                0
            } else if i < n_depth + n_pose {
                1
            } else {
                2
            }
        })
        .collect()
}

/// Compares analytic and numeric gradients on one instance. Returns `None`
/// when some difference straddles a non-smooth point.
pub fn check_instance(state: &SnippetState, cfg: &GradcheckConfig) -> Result<Option<[GroupStat; 3]>> {
    let (_, grads) = state.evaluate(&cfg.loss)?;
    let mut analytic = state.flatten_grads(&grads);
    let groups = groups_of(state);
    if cfg.inject_bug {
        for (a, &g) in analytic.iter_mut().zip(&groups) {
            if g == 1 {
                *a *= 1.0 + 1e-3;
            }
        }
    }
    let params = state.params();
    let loss_at = |i: usize, delta: f64| -> Result<f64> {
        let mut p = params.clone();
        p[i] += delta;
        let mut s = state.clone();
        s.set_params(&p)?;
        Ok(s.evaluate(&cfg.loss)?.0.total)
    };
    let h = cfg.step;
    let results: Vec<Option<f64>> = (0..params.len())
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let fd = (loss_at(i, h)? - loss_at(i, -h)?) / (2.0 * h);
            let fd_half = (loss_at(i, 0.5 * h)? - loss_at(i, -0.5 * h)?) / h;
            let a = analytic[i];
            let scale = a.abs().max(fd.abs()).max(cfg.floor);
            if (fd - fd_half).abs() > 0.1 * cfg.tolerance * scale {
                return Ok(None);
            }
            Ok(Some((a - fd).abs() / scale))
        })
        .collect::<Result<_>>()?;
    let mut stats = [GroupStat::default(); 3];
    for (r, &g) in results.iter().zip(&groups) {
        match r {
            None => return Ok(None),
            Some(e) => {
                stats[g].max_rel_error = stats[g].max_rel_error.max(*e);
                stats[g].checked += 1;
            }
        }
    }
    Ok(Some(stats))
}

pub fn run_gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    if cfg.instances == 0 {
        return Err(Error::invalid("gradcheck needs at least one instance"));
    }
    if !(cfg.step > 0.0 && cfg.tolerance > 0.0 && cfg.floor > 0.0) {
        return Err(Error::invalid("step, tolerance and floor must be positive"));
    }
    if cfg.frames < 2 {
        return Err(Error::invalid("gradcheck needs at least two frames"));
    }
    cfg.loss.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut groups = [GroupStat::default(); 3];
    let mut redrawn = 0;
    let mut accepted = 0;
    while accepted < cfg.instances {
        let state = random_instance(&mut rng, cfg)?;
        match check_instance(&state, cfg)? {
            Some(stats) => {
                for (g, s) in groups.iter_mut().zip(&stats) {
                    g.merge(s);
                }
                accepted += 1;
            }
            None => {
                redrawn += 1;
                if redrawn > cfg.max_redraws * cfg.instances {
                    return Err(Error::invalid(format!(
                        "gave up after redrawing {redrawn} non-smooth instances"
                    )));
                }
            }
        }
    }
    Ok(GradcheckReport {
        groups,
        instances: accepted,
        redrawn,
        tolerance: cfg.tolerance,
    })
}
