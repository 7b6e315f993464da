//! Problem description and the forward Euler simulator.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::UniformSource;

pub type DriftFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
/// Writes the `d x q` diffusion matrix in row-major order.
pub type DiffusionFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
pub type DriverFn = dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync;
pub type TerminalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Drift {
    Zero,
    Constant(Vec<f64>),
    Function(Arc<DriftFn>),
}

#[derive(Clone)]
pub enum Diffusion {
    Zero,
    /// `sigma = scale * Identity`; requires the Brownian dimension to equal `d`.
    Scaled(f64),
    Function(Arc<DiffusionFn>),
}

/// Growth and Lipschitz constants of the terminal condition and driver:
/// `|g(x)| <= c_g (1+|x|^2)^{eta_g/2}`, `|f(t,x,0)| <= c_f (1+|x|^2)^{eta_f/2}`,
/// `|f(t,x,y) - f(t,x,y')| <= l_f |y - y'|`.
///
/// `c_eta` bounds the moment ratio of the Euler scheme and has no closed form.
/// It defaults to 1, which is exact when `eta_g = eta_f = 0`; for polynomially
/// growing data the caller must supply a value that is at least the true one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConstants {
    pub c_g: f64,
    pub eta_g: f64,
    pub c_f: f64,
    pub eta_f: f64,
    pub l_f: f64,
    pub c_eta: f64,
}

impl Default for GrowthConstants {
    fn default() -> Self {
        Self {
            c_g: 1.0,
            eta_g: 0.0,
            c_f: 0.0,
            eta_f: 0.0,
            l_f: 0.0,
            c_eta: 1.0,
        }
    }
}

/// Decoupled forward-backward problem: forward dynamics `(b, sigma)`, driver `f`,
/// terminal condition `g` and horizon `T`.
#[derive(Clone)]
pub struct ProblemSpec {
    dim: usize,
    brownian_dim: usize,
    horizon: f64,
    drift: Drift,
    diffusion: Diffusion,
    driver: Arc<DriverFn>,
    terminal: Arc<TerminalFn>,
    constants: GrowthConstants,
    coef_limit: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dim", &self.dim)
            .field("brownian_dim", &self.brownian_dim)
            .field("horizon", &self.horizon)
            .field("constants", &self.constants)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Starts a problem with zero drift, identity diffusion, zero driver and `g = 0`.
    pub fn builder(dim: usize, horizon: f64) -> ProblemBuilder {
        ProblemBuilder {
            dim,
            brownian_dim: dim,
            horizon,
            drift: Drift::Zero,
            diffusion: Diffusion::Scaled(1.0),
            driver: Arc::new(|_, _, _| 0.0),
            terminal: Arc::new(|_| 0.0),
            constants: GrowthConstants::default(),
            coef_limit: 1e12,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn brownian_dim(&self) -> usize {
        self.brownian_dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn constants(&self) -> &GrowthConstants {
        &self.constants
    }

    #[inline]
    pub fn driver(&self, t: f64, x: &[f64], y: f64) -> f64 {
        (self.driver)(t, x, y)
    }

    #[inline]
    pub fn terminal(&self, x: &[f64]) -> f64 {
        (self.terminal)(x)
    }

    /// A-priori bound `L*(x)` on `|y_i(x)|`, uniform in the time index.
    pub fn lstar_bound(&self, x: &[f64]) -> f64 {
        let c = &self.constants;
        let base = c.c_eta * (c.c_g + self.horizon * c.c_f) * (c.c_eta * c.l_f * self.horizon).exp();
        let eta = c.eta_g.max(c.eta_f);
        if eta == 0.0 {
            base
        } else {
            base * (1.0 + sq_norm(x)).powf(0.5 * eta)
        }
    }
}

pub struct ProblemBuilder {
    dim: usize,
    brownian_dim: usize,
    horizon: f64,
    drift: Drift,
    diffusion: Diffusion,
    driver: Arc<DriverFn>,
    terminal: Arc<TerminalFn>,
    constants: GrowthConstants,
    coef_limit: f64,
}

impl ProblemBuilder {
    pub fn brownian_dim(mut self, q: usize) -> Self {
        self.brownian_dim = q;
        self
    }

    pub fn drift(mut self, drift: Drift) -> Self {
        self.drift = drift;
        self
    }

    pub fn diffusion(mut self, diffusion: Diffusion) -> Self {
        self.diffusion = diffusion;
        self
    }

    pub fn driver(mut self, f: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.driver = Arc::new(f);
        self
    }

    pub fn terminal(mut self, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.terminal = Arc::new(g);
        self
    }

    pub fn constants(mut self, c: GrowthConstants) -> Self {
        self.constants = c;
        self
    }

    /// Largest absolute drift/diffusion entry accepted during simulation.
    pub fn coefficient_limit(mut self, limit: f64) -> Self {
        self.coef_limit = limit;
        self
    }

    pub fn build(self) -> Result<ProblemSpec> {
        if self.dim == 0 || self.brownian_dim == 0 {
            return Err(Error::Domain("state and Brownian dimensions must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        let c = &self.constants;
        let all = [c.c_g, c.eta_g, c.c_f, c.eta_f, c.l_f, c.c_eta];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!("growth constants must be finite and non-negative: {c:?}")));
        }
        if c.c_eta < 1.0 {
            return Err(Error::Domain(format!("c_eta must be at least 1, got {}", c.c_eta)));
        }
        if let Drift::Constant(v) = &self.drift {
            if v.len() != self.dim {
                return Err(Error::Contract("constant drift has the wrong length".into()));
            }
        }
        if matches!(self.diffusion, Diffusion::Scaled(_)) && self.brownian_dim != self.dim {
            return Err(Error::Contract(
                "scaled-identity diffusion needs the Brownian dimension to equal d".into(),
            ));
        }
        if !(self.coef_limit > 0.0) {
            return Err(Error::Domain("coefficient limit must be positive".into()));
        }
        Ok(ProblemSpec {
            dim: self.dim,
            brownian_dim: self.brownian_dim,
            horizon: self.horizon,
            drift: self.drift,
            diffusion: self.diffusion,
            driver: self.driver,
            terminal: self.terminal,
            constants: self.constants,
            coef_limit: self.coef_limit,
        })
    }
}

#[inline]
pub fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Euler path `X_i, ..., X_N` started at step `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathBundle {
    start: usize,
    dim: usize,
    points: Vec<f64>,
}

impl PathBundle {
    pub fn empty(dim: usize) -> Self {
        Self {
            start: 0,
            dim,
            points: Vec::new(),
        }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Final step index `N`.
    pub fn end(&self) -> usize {
        self.start + self.points.len() / self.dim - 1
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// State at absolute step `j`, `start <= j <= end`.
    #[inline]
    pub fn point(&self, j: usize) -> &[f64] {
        let r = (j - self.start) * self.dim;
        &self.points[r..r + self.dim]
    }
}

/// Uniform time grid `t_j = j * delta`, `delta = T / N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub steps: usize,
    pub delta: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Domain("need at least one time step".into()));
        }
        Ok(Self {
            steps,
            delta: horizon / steps as f64,
        })
    }

    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.delta
    }
}

/// Per-worker buffers for the simulator.
#[derive(Clone, Debug)]
pub struct EulerScratch {
    drift: Vec<f64>,
    sigma: Vec<f64>,
    dw: Vec<f64>,
}

impl EulerScratch {
    pub fn new(spec: &ProblemSpec) -> Self {
        Self {
            drift: vec![0.0; spec.dim],
            sigma: vec![0.0; spec.dim * spec.brownian_dim],
            dw: vec![0.0; spec.brownian_dim],
        }
    }
}

/// Simulates `X_{j+1} = X_j + b(t_j, X_j) delta + sigma(t_j, X_j) dW_j` from
/// `X_i = x0` up to `X_N`, drawing `dW_j ~ N(0, delta I)` from `src`.
pub fn euler_path<S: UniformSource + ?Sized>(
    src: &mut S,
    x0: &[f64],
    start: usize,
    spec: &ProblemSpec,
    grid: TimeGrid,
) -> Result<PathBundle> {
    let mut bundle = PathBundle::empty(spec.dim);
    let mut scratch = EulerScratch::new(spec);
    euler_path_into(src, x0, start, spec, grid, &mut bundle, &mut scratch)?;
    Ok(bundle)
}

pub fn euler_path_into<S: UniformSource + ?Sized>(
    src: &mut S,
    x0: &[f64],
    start: usize,
    spec: &ProblemSpec,
    grid: TimeGrid,
    bundle: &mut PathBundle,
    scratch: &mut EulerScratch,
) -> Result<()> {
    let d = spec.dim;
    if x0.len() != d {
        return Err(Error::Contract(format!("start point has length {}, expected {d}", x0.len())));
    }
    if start > grid.steps {
        return Err(Error::Contract(format!("start step {start} beyond N = {}", grid.steps)));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Simulation {
            step: start,
            detail: "non-finite start point".into(),
        });
    }
    let q = spec.brownian_dim;
    let sqrt_dt = grid.delta.sqrt();
    bundle.start = start;
    bundle.dim = d;
    bundle.points.clear();
    bundle.points.extend_from_slice(x0);

    for j in start..grid.steps {
        let t = grid.time(j);
        let base = (j - start) * d;
        bundle.points.extend_from_within(base..base + d);
        let (head, next) = bundle.points.split_at_mut(base + d);
        let cur = &head[base..];

        match &spec.drift {
            Drift::Zero => {}
            Drift::Constant(b) => {
                for (n, bl) in next.iter_mut().zip(b) {
                    *n += bl * grid.delta;
                }
            }
            Drift::Function(b) => {
                b(t, cur, &mut scratch.drift);
                check_coefficients(&scratch.drift, spec.coef_limit, j, "drift")?;
                for (n, bl) in next.iter_mut().zip(&scratch.drift) {
                    *n += bl * grid.delta;
                }
            }
        }

        match &spec.diffusion {
            Diffusion::Zero => {}
            Diffusion::Scaled(s) => {
                for n in next.iter_mut() {
                    *n += s * sqrt_dt * src.next_normal();
                }
            }
            Diffusion::Function(sig) => {
                for w in scratch.dw.iter_mut() {
                    *w = sqrt_dt * src.next_normal();
                }
                sig(t, cur, &mut scratch.sigma);
                check_coefficients(&scratch.sigma, spec.coef_limit, j, "diffusion")?;
                for (row, n) in scratch.sigma.chunks_exact(q).zip(next.iter_mut()) {
                    *n += row.iter().zip(&scratch.dw).map(|(a, w)| a * w).sum::<f64>();
                }
            }
        }

        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation {
                step: j + 1,
                detail: "state became non-finite".into(),
            });
        }
    }
    Ok(())
}

fn check_coefficients(v: &[f64], limit: f64, step: usize, what: &str) -> Result<()> {
    match v.iter().find(|c| !(c.abs() <= limit)) {
        Some(bad) => Err(Error::Simulation {
            step,
            detail: format!("{what} coefficient {bad} outside the sanity limit {limit}"),
        }),
        None => Ok(()),
    }
}
