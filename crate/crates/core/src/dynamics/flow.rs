use serde::{Deserialize, Serialize};

use super::propagator::{Damping, NoiseKernel, PropagatorCache};
use crate::rng::RngStream;
use crate::spectral::{cubic_product, PhaseState, SpectralField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Splitting {
    /// Linear/noise substep followed by one full cubic kick.
    Lie,
    /// Half kick, linear/noise substep, half kick.
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub s: f64,
    /// Galerkin cutoff `N` of the nonlinear part.
    pub cutoff: usize,
    /// Cutoff up to which the linear high-frequency band `Π_{>N}` is carried.
    pub store_cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub splitting: Splitting,
    pub cubic: bool,
    pub noise: bool,
    pub damping: Damping,
}

impl FlowConfig {
    /// Damped stochastic flow with cubic term, Strang splitting, no high band.
    pub fn new(s: f64, cutoff: usize, dt: f64, horizon: f64) -> Self {
        FlowConfig {
            s,
            cutoff,
            store_cutoff: cutoff,
            dt,
            horizon,
            splitting: Splitting::Strang,
            cubic: true,
            noise: true,
            damping: Damping::Damped,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be non-negative, got {}",
                self.horizon
            )));
        }
        if self.store_cutoff < self.cutoff {
            return Err(Error::InvalidParameter(format!(
                "storage cutoff {} below Galerkin cutoff {}",
                self.store_cutoff, self.cutoff
            )));
        }
        if self.noise && self.damping == Damping::Undamped {
            return Err(Error::InvalidParameter(
                "stochastic forcing needs the damped linear part".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps; the horizon is rounded to the nearest multiple of `dt`.
    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }

    pub fn actual_horizon(&self) -> f64 {
        self.steps() as f64 * self.dt
    }
}

/// Prebuilt step operator for one [`FlowConfig`].
#[derive(Debug, Clone)]
pub struct Flow {
    cfg: FlowConfig,
    linear: PropagatorCache,
    kernel: Option<NoiseKernel>,
}

impl Flow {
    pub fn new(cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let linear = PropagatorCache::new(cfg.dt, cfg.store_cutoff, cfg.damping);
        let kernel = if cfg.noise {
            Some(NoiseKernel::new(cfg.s, cfg.dt, cfg.store_cutoff)?)
        } else {
            None
        };
        Ok(Flow {
            cfg,
            linear,
            kernel,
        })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> Option<&NoiseKernel> {
        self.kernel.as_ref()
    }

    /// `v ← v − h Π_{≤N}((Π_{≤N}u)³)`.
    fn kick(&self, x: &mut PhaseState, h: f64) {
        if !self.cfg.cubic {
            return;
        }
        let n = self.cfg.cutoff;
        let low: SpectralField = x.u.resized(n);
        let cube = cubic_product(&low, &low, &low, n).expect("shared cutoff");
        x.v.axpy(-h, &cube);
    }

    fn drift(&self, x: &mut PhaseState, step: u64, rng: Option<&RngStream>, sign: f64) {
        self.linear.apply_in_place(x);
        if let (Some(kernel), Some(rng)) = (&self.kernel, rng) {
            kernel.add_sample(x, &mut rng.lane(step), sign);
        }
    }

    /// Advance one step in place. Step `k` draws its noise from lane `k` of
    /// `rng`; `sign = −1` gives the antithetic path.
    pub fn step(
        &self,
        x: &mut PhaseState,
        step: u64,
        rng: Option<&RngStream>,
        sign: f64,
    ) -> Result<()> {
        let dt = self.cfg.dt;
        match self.cfg.splitting {
            Splitting::Strang => {
                self.kick(x, 0.5 * dt);
                self.drift(x, step, rng, sign);
                self.kick(x, 0.5 * dt);
            }
            Splitting::Lie => {
                self.drift(x, step, rng, sign);
                self.kick(x, dt);
            }
        }
        if !x.is_finite() {
            return Err(Error::BlowUp {
                step: step + 1,
                sample: None,
            });
        }
        Ok(())
    }

    /// Run the configured horizon from `x0`, calling `observe(k, t_k, x_k)` for
    /// `k = 0..=steps`. Returns the final state.
    pub fn evolve(
        &self,
        x0: &PhaseState,
        rng: &RngStream,
        mut observe: impl FnMut(u64, f64, &PhaseState),
    ) -> Result<PhaseState> {
        let mut x = x0.resized(self.cfg.store_cutoff);
        observe(0, 0.0, &x);
        let steps = self.cfg.steps();
        for k in 0..steps {
            self.step(&mut x, k, Some(rng), 1.0)?;
            observe(k + 1, (k + 1) as f64 * self.cfg.dt, &x);
        }
        Ok(x)
    }
}

/// One step of the truncated flow from a fresh configuration.
pub fn step_truncated(x: &PhaseState, cfg: &FlowConfig, rng: &RngStream) -> Result<PhaseState> {
    let flow = Flow::new(*cfg)?;
    let mut y = x.resized(cfg.store_cutoff);
    flow.step(&mut y, 0, Some(rng), 1.0)?;
    Ok(y)
}

/// `Φ_T^N(x0; ξ)` sampled every `every` steps (and at the final step).
pub fn evolve(
    x0: &PhaseState,
    cfg: &FlowConfig,
    rng: &RngStream,
    every: u64,
) -> Result<Vec<(f64, PhaseState)>> {
    let flow = Flow::new(*cfg)?;
    let steps = cfg.steps();
    let every = every.max(1);
    let mut out = Vec::new();
    flow.evolve(x0, rng, |k, t, x| {
        if k % every == 0 || k == steps {
            out.push((t, x.clone()));
        }
    })?;
    Ok(out)
}

/// Remainder of the first-order expansion,
/// `w_N(t) = Π_{≤N}Φ_t^N(x0; ξ) − Φ_t^lin(Π_{≤N}x0; Π_{≤N}ξ)`,
/// with both flows driven by the same noise increments. Sampled every
/// `every` steps.
pub fn remainder_w(
    x0: &PhaseState,
    cfg: &FlowConfig,
    rng: &RngStream,
    every: u64,
) -> Result<Vec<(f64, PhaseState)>> {
    let n = cfg.cutoff;
    let nonlinear = Flow::new(FlowConfig {
        store_cutoff: n,
        noise: false,
        ..*cfg
    })?;
    let linear = Flow::new(FlowConfig {
        store_cutoff: n,
        noise: false,
        cubic: false,
        ..*cfg
    })?;
    let kernel = if cfg.noise {
        Some(NoiseKernel::new(cfg.s, cfg.dt, n)?)
    } else {
        None
    };
    let mut a = x0.resized(n);
    let mut b = a.clone();
    let every = every.max(1);
    let steps = cfg.steps();
    let mut out = vec![(0.0, PhaseState::zeros(n))];
    for k in 0..steps {
        match cfg.splitting {
            Splitting::Strang => {
                nonlinear.kick(&mut a, 0.5 * cfg.dt);
                nonlinear.linear.apply_in_place(&mut a);
                linear.linear.apply_in_place(&mut b);
            }
            Splitting::Lie => {
                nonlinear.linear.apply_in_place(&mut a);
                linear.linear.apply_in_place(&mut b);
            }
        }
        if let Some(kernel) = &kernel {
            let eta = kernel.sample(&mut rng.lane(k));
            a.axpy(1.0, &eta);
            b.axpy(1.0, &eta);
        }
        match cfg.splitting {
            Splitting::Strang => nonlinear.kick(&mut a, 0.5 * cfg.dt),
            Splitting::Lie => nonlinear.kick(&mut a, cfg.dt),
        }
        if !a.is_finite() {
            return Err(Error::BlowUp {
                step: k + 1,
                sample: None,
            });
        }
        if (k + 1) % every == 0 || k + 1 == steps {
            out.push(((k + 1) as f64 * cfg.dt, &a - &b));
        }
    }
    Ok(out)
}
