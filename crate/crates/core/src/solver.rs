//! Backward quasi-regression iteration.
//!
//! For `i = N-1, ..., 0` a fresh cloud of `M` paths is started from `nu` at step
//! `i`. Along each path the weighted response
//!
//! ```text
//! S_i = [ g(X_N) + sum_{j=i}^{N-1} f(t_j, X_j, T_L*( y_{j+1}(X_{j+1}) )) delta ] / (1+|X_i|^2)^{q/2}
//! ```
//!
//! is formed from the already frozen coefficient vectors of later steps, and the
//! coefficients of step `i` are the plain averages `(1/M) sum_m S_i^m phi_k(X_i^m)`.
//!
//! Paths are grouped in fixed chunks of [`CHUNK_PATHS`]; partial sums are
//! reduced in chunk order, so the output does not depend on the worker count.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisContext, BasisScratch};
use crate::dist::SamplingMeasure;
use crate::engine::{euler_path_into, sq_norm, EulerScratch, PathBundle, ProblemSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::mindex::MultiIndexSet;
use crate::rng::{stream_id, StreamDomain, StreamFactory, MAX_PATHS, MAX_STEPS};
use crate::table::{CoefficientTable, RunMetadata, SolveStats};

/// Paths per reduction chunk. Part of the determinism contract: changing it
/// changes the floating-point summation order.
pub const CHUNK_PATHS: usize = 1024;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryMode {
    /// Keep `(X_i^m, S^m)` for every path between the two phases.
    #[default]
    StoreCloud,
    /// Keep only `S^m` and regenerate `X_i^m` from its stream in the second phase.
    RecomputeFromSeeds,
}

/// Solver parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub steps: usize,
    pub paths: usize,
    pub q: f64,
    pub seed: u64,
    pub workers: usize,
    pub memory_mode: MemoryMode,
    pub gamma: MultiIndexSet,
    pub measure: SamplingMeasure,
}

impl RunConfig {
    pub fn new(steps: usize, paths: usize, q: f64, seed: u64, gamma: MultiIndexSet, measure: SamplingMeasure) -> Self {
        Self {
            steps,
            paths,
            q,
            seed,
            workers: default_workers(),
            memory_mode: MemoryMode::StoreCloud,
            gamma,
            measure,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_memory_mode(mut self, mode: MemoryMode) -> Self {
        self.memory_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.steps as u64 >= MAX_STEPS {
            return Err(Error::Domain(format!("step count {} out of range", self.steps)));
        }
        if self.paths == 0 || self.paths as u64 >= MAX_PATHS {
            return Err(Error::Domain(format!("path count {} out of range", self.paths)));
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::Domain(format!("damping exponent must be >= 0, got {}", self.q)));
        }
        if self.workers == 0 {
            return Err(Error::Domain("need at least one worker".into()));
        }
        if self.gamma.dim() != self.measure.dim() {
            return Err(Error::Contract("index set and measure dimensions differ".into()));
        }
        Ok(())
    }

    /// `L_Gamma / M`, the factor driving the statistical error.
    pub fn statistical_indicator(&self) -> f64 {
        crate::basis::christoffel(&self.gamma) / self.paths as f64
    }

    /// Rough peak memory in bytes: the stored cloud, the coefficient table
    /// and the per-chunk buffers.
    pub fn memory_estimate(&self) -> u64 {
        let d = self.gamma.dim() as u64;
        let m = self.paths as u64;
        let per_path = match self.memory_mode {
            MemoryMode::StoreCloud => (d + 1) * 8,
            MemoryMode::RecomputeFromSeeds => 8,
        };
        let table = self.steps as u64 * self.gamma.len() as u64 * 8;
        let chunks = m.div_ceil(CHUNK_PATHS as u64) * self.gamma.len() as u64 * 8;
        m * per_path + table + chunks
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Soft truncation `-L v (v ^ L)`.
#[inline]
pub fn truncate(v: f64, bound: f64) -> f64 {
    v.clamp(-bound, bound)
}

#[inline]
fn damping(x: &[f64], q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        (1.0 + sq_norm(x)).powf(0.5 * q)
    }
}

/// Counts of series evaluations and of those clipped by the truncation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub evaluations: u64,
    pub truncations: u64,
}

/// Everything needed to turn a simulated path into its weighted response.
pub struct ResponseContext<'a> {
    pub spec: &'a ProblemSpec,
    pub basis: &'a BasisContext,
    pub grid: TimeGrid,
    pub q: f64,
}

impl ResponseContext<'_> {
    /// Weighted response of a path started at `path.start()`. `future[j]` must
    /// hold the coefficients of step `j` for every `start < j < N`.
    pub fn response(
        &self,
        path: &PathBundle,
        future: &[Option<Vec<f64>>],
        scratch: &mut BasisScratch,
        counters: &mut Counters,
    ) -> Result<f64> {
        let n = self.grid.steps;
        let i = path.start();
        if path.end() != n {
            return Err(Error::Contract(format!("path ends at {} but N = {n}", path.end())));
        }
        let terminal_x = path.point(n);
        let terminal = self.spec.terminal(terminal_x);
        let mut acc = terminal;
        for j in i..n {
            let x_next = path.point(j + 1);
            let undamped = if j + 1 == n {
                terminal
            } else {
                let coeffs = future
                    .get(j + 1)
                    .and_then(|c| c.as_deref())
                    .ok_or_else(|| Error::Contract(format!("coefficients of step {} not available", j + 1)))?;
                counters.evaluations += 1;
                self.basis.series(coeffs, x_next, scratch) * damping(x_next, self.q)
            };
            let bound = self.spec.lstar_bound(x_next);
            let y = truncate(undamped, bound);
            if y != undamped {
                counters.truncations += 1;
            }
            acc += self.spec.driver(self.grid.time(j), path.point(j), y) * self.grid.delta;
        }
        Ok(acc / damping(path.point(i), self.q))
    }
}

/// One-off response evaluation; allocates its own scratch space.
pub fn response(
    path: &PathBundle,
    future: &[Option<Vec<f64>>],
    spec: &ProblemSpec,
    config: &RunConfig,
) -> Result<f64> {
    let basis = BasisContext::new(config.measure.clone(), config.gamma.clone())?;
    let ctx = ResponseContext {
        spec,
        basis: &basis,
        grid: TimeGrid::new(spec.horizon(), config.steps)?,
        q: config.q,
    };
    let mut scratch = basis.scratch();
    ctx.response(path, future, &mut scratch, &mut Counters::default())
}

struct CloudChunk {
    points: Vec<f64>,
    responses: Vec<f64>,
    counters: Counters,
}

/// Runs the backward iteration and returns the coefficient table.
pub fn backward_solve(spec: &ProblemSpec, config: &RunConfig) -> Result<CoefficientTable> {
    config.validate()?;
    if spec.dim() != config.measure.dim() {
        return Err(Error::Contract(format!(
            "problem dimension {} but sampling measure dimension {}",
            spec.dim(),
            config.measure.dim()
        )));
    }
    let basis = BasisContext::new(config.measure.clone(), config.gamma.clone())?;
    let grid = TimeGrid::new(spec.horizon(), config.steps)?;
    let ctx = ResponseContext {
        spec,
        basis: &basis,
        grid,
        q: config.q,
    };
    let streams = StreamFactory::new(config.seed);
    let pool = Pool::new(config.workers)?;
    let d = spec.dim();
    let m_total = config.paths;
    let n_chunks = m_total.div_ceil(CHUNK_PATHS);
    let store = config.memory_mode == MemoryMode::StoreCloud;

    let mut future: Vec<Option<Vec<f64>>> = vec![None; config.steps];
    let mut stats = SolveStats::default();
    let mut step_seconds = vec![0.0; config.steps];
    let total_watch = Stopwatch::start();

    for i in (0..config.steps).rev() {
        let watch = Stopwatch::start();
        let id = |m: usize| stream_id(StreamDomain::Training, i as u64, m as u64);

        // Phase 1: simulate the cloud and evaluate responses.
        let chunks: Vec<Result<CloudChunk>> = pool.map(n_chunks, |c| {
            let range = c * CHUNK_PATHS..((c + 1) * CHUNK_PATHS).min(m_total);
            let mut out = CloudChunk {
                points: Vec::with_capacity(if store { range.len() * d } else { 0 }),
                responses: Vec::with_capacity(range.len()),
                counters: Counters::default(),
            };
            let mut x0 = vec![0.0; d];
            let mut bundle = PathBundle::empty(d);
            let mut euler = EulerScratch::new(spec);
            let mut scratch = basis.scratch();
            for m in range {
                let mut stream = streams.stream(id(m));
                config.measure.sample_into(&mut stream, &mut x0);
                euler_path_into(&mut stream, &x0, i, spec, grid, &mut bundle, &mut euler)?;
                let s = ctx.response(&bundle, &future, &mut scratch, &mut out.counters)?;
                if !s.is_finite() {
                    return Err(Error::Numerical {
                        step: i,
                        index: m,
                        detail: format!("non-finite response {s} on path {m}"),
                    });
                }
                if store {
                    out.points.extend_from_slice(&x0);
                }
                out.responses.push(s);
            }
            Ok(out)
        });
        let chunks = chunks.into_iter().collect::<Result<Vec<_>>>()?;
        for c in &chunks {
            stats.series_evaluations += c.counters.evaluations;
            stats.truncation_hits += c.counters.truncations;
        }

        // Phase 2: per-chunk partial sums of S^m phi_k(X_i^m), reduced in order.
        let partials: Vec<Vec<f64>> = pool.map(n_chunks, |c| {
            let chunk = &chunks[c];
            let first = c * CHUNK_PATHS;
            let mut acc = vec![0.0; basis.len()];
            let mut phi = vec![0.0; basis.len()];
            let mut scratch = basis.scratch();
            let mut regen = vec![0.0; d];
            for (r, &s) in chunk.responses.iter().enumerate() {
                let x: &[f64] = if store {
                    &chunk.points[r * d..(r + 1) * d]
                } else {
                    let mut stream = streams.stream(id(first + r));
                    config.measure.sample_into(&mut stream, &mut regen);
                    &regen
                };
                basis.phi_all(x, &mut scratch, &mut phi);
                for (a, p) in acc.iter_mut().zip(&phi) {
                    *a += s * p;
                }
            }
            acc
        });
        let mut alpha = vec![0.0; basis.len()];
        for part in &partials {
            for (a, p) in alpha.iter_mut().zip(part) {
                *a += p;
            }
        }
        let inv_m = 1.0 / m_total as f64;
        for (k, a) in alpha.iter_mut().enumerate() {
            *a *= inv_m;
            if !a.is_finite() {
                return Err(Error::Numerical {
                    step: i,
                    index: k,
                    detail: format!("coefficient is {a}"),
                });
            }
        }
        future[i] = Some(alpha);
        step_seconds[i] = watch.seconds();
    }

    let alphas = future.into_iter().map(|c| c.expect("every step filled")).collect();
    let meta = RunMetadata {
        workers: config.workers,
        memory_mode: config.memory_mode,
        step_seconds,
        total_seconds: total_watch.seconds(),
    };
    CoefficientTable::new(basis, spec.horizon(), config, alphas, stats, meta)
}

/// Undamped estimate `y_i(x) = ybar_i(x) (1+|x|^2)^{q/2}`.
pub fn evaluate_solution(table: &CoefficientTable, i: usize, x: &[f64]) -> Result<f64> {
    table.evaluate(i, x)
}

/// Executes `f(0..n)` on the configured number of workers, preserving order.
pub(crate) struct Pool {
    #[cfg(feature = "parallel")]
    inner: Option<rayon::ThreadPool>,
}

impl Pool {
    pub(crate) fn new(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let inner = if workers > 1 {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .map_err(|e| Error::Contract(format!("cannot start worker pool: {e}")))?,
                )
            } else {
                None
            };
            Ok(Self { inner })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Ok(Self {})
        }
    }

    pub(crate) fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.inner {
            use rayon::prelude::*;
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
        (0..n).map(f).collect()
    }
}

/// Wall-clock timer that reads zero where no clock is available (wasm32).
pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        0.0
    }
}
