use crate::error::{Error, Result};

/// Settings shared by the affine and flow optimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_iters: usize,
    /// Stop once the best loss improved by less than this fraction over the
    /// last [`STALL_WINDOW`] iterations.
    pub tol: f64,
    pub seed: u64,
}

/// Iterations over which relative best-loss improvement is measured.
pub const STALL_WINDOW: usize = 20;

impl Default for OptimizerConfig {
    /// Adam settings used for network training: beta1 0.9, beta2 0.999,
    /// lr 1e-4. Direct optimization normally wants [`Self::affine`] or
    /// [`Self::flow`] instead.
    fn default() -> Self {
        Self {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    /// Preset for [`register_affine`](super::register_affine). The step is in
    /// normalized coordinates where 1 is half the grid extent.
    pub fn affine() -> Self {
        Self {
            lr: 4e-3,
            max_iters: 500,
            ..Self::default()
        }
    }

    /// Preset for [`register_flow`](super::register_flow); the step is in
    /// pixels of the current pyramid level.
    pub fn flow() -> Self {
        Self {
            lr: 0.02,
            max_iters: 200,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!("lr {} must be > 0", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidParameter(format!("{name} {b} outside [0, 1)")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidParameter("tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Adaptive-moment gradient descent over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(cfg: &OptimizerConfig, n_params: usize) -> Self {
        Self {
            lr: cfg.lr,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Tracks the best loss and decides when progress has stalled.
#[derive(Debug, Clone, Default)]
pub(crate) struct StallMonitor {
    best_history: Vec<f64>,
}

impl StallMonitor {
    /// Records the best-so-far loss; returns true when the run should stop.
    pub(crate) fn push(&mut self, best: f64, tol: f64) -> bool {
        self.best_history.push(best);
        let n = self.best_history.len();
        if n <= STALL_WINDOW {
            return false;
        }
        let before = self.best_history[n - 1 - STALL_WINDOW];
        let gain = (before - best) / before.abs().max(f64::MIN_POSITIVE);
        gain < tol
    }
}
