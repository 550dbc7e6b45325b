use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Stop once the best loss improved by less than this relative amount
    /// over the last `window` iterations.
    pub tolerance: f64,
    pub window: usize,
    pub seed: u64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.0002,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_iters: 3000,
            tolerance: 1e-7,
            window: 50,
            seed: 0,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::invalid("Adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("Adam epsilon must be positive"));
        }
        Ok(())
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Moments {
    pub fn zeros(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    moments: &mut Moments,
    config: &AdamConfig,
    t: usize,
) -> Result<()> {
    if t == 0 {
        return Err(Error::invalid("Adam step index starts at 1"));
    }
    let n = params.len();
    if grads.len() != n || moments.m.len() != n || moments.v.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "params {n}, grads {}, moments {}/{}",
            grads.len(),
            moments.m.len(),
            moments.v.len()
        )));
    }
    let t = i32::try_from(t).unwrap_or(i32::MAX);
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for i in 0..n {
        let g = grads[i];
        moments.m[i] = config.beta1 * moments.m[i] + (1.0 - config.beta1) * g;
        moments.v[i] = config.beta2 * moments.v[i] + (1.0 - config.beta2) * g * g;
        let m_hat = moments.m[i] / c1;
        let v_hat = moments.v[i] / c2;
        params[i] -= config.lr * m_hat / (v_hat.sqrt() + config.epsilon);
    }
    Ok(())
}

/// Adam optimizer that tracks its own moments and step count.
#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    moments: Moments,
    t: usize,
}

impl Adam {
    pub fn new(config: AdamConfig, num_params: usize) -> Result<Self> {
        config.validate()?;
        Ok(Adam {
            config,
            moments: Moments::zeros(num_params),
            t: 0,
        })
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        self.t += 1;
        adam_step(params, grads, &mut self.moments, &self.config, self.t)
    }

    pub fn steps(&self) -> usize {
        self.t
    }
}
