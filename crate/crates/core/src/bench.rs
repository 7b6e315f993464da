//! Sinusoidal benchmark with a known solution, error metrics and confidence
//! intervals over repeated runs.
//!
//! With `X = W`, terminal `g(x) = 1 + kappa + sin(lambda sum x_l)` and driver
//! `f(t,x,y) = min(1, [y - u(t,x)]^2)`, the PDE `u_t + 1/2 Lap u + f(t,x,u) = 0`
//! is solved by `u(t,x) = 1 + kappa + sin(lambda sum x_l) exp(lambda^2 d (t-T)/2)`.

use serde::{Deserialize, Serialize};

use crate::dist::normal_inv_cdf;
use crate::engine::{sq_norm, Diffusion, Drift, GrowthConstants, ProblemSpec};
use crate::error::{Error, Result};
use crate::rng::{stream_id, StreamDomain, StreamFactory};
use crate::solver::{default_workers, Pool};
use crate::table::CoefficientTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinBenchmark {
    pub dim: usize,
    pub kappa: f64,
    pub lambda: f64,
    pub horizon: f64,
}

impl SinBenchmark {
    /// `kappa = 0.6`, `lambda = 1/sqrt(d)`, `T = 1`.
    pub fn standard(dim: usize) -> Self {
        Self {
            dim,
            kappa: 0.6,
            lambda: 1.0 / (dim as f64).sqrt(),
            horizon: 1.0,
        }
    }

    fn phase(&self, x: &[f64]) -> f64 {
        (self.lambda * x.iter().sum::<f64>()).sin()
    }

    fn decay(&self, t: f64) -> f64 {
        (0.5 * self.lambda * self.lambda * self.dim as f64 * (t - self.horizon)).exp()
    }

    pub fn exact_solution(&self, t: f64, x: &[f64]) -> f64 {
        1.0 + self.kappa + self.phase(x) * self.decay(t)
    }

    pub fn terminal(&self, x: &[f64]) -> f64 {
        1.0 + self.kappa + self.phase(x)
    }

    pub fn driver(&self, t: f64, x: &[f64], y: f64) -> f64 {
        let z = y - self.exact_solution(t, x);
        (z * z).min(1.0)
    }

    /// Forward-backward problem with `b = 0`, `sigma = I`.
    ///
    /// Growth constants: `|g| <= 2 + kappa`, `|f(.,.,0)| <= 1`, no polynomial
    /// growth, and `L_f = 2` (the derivative `2z` of `min(1, z^2)` in `y` is
    /// bounded by 2 where it is non-zero).
    pub fn make_problem(&self) -> Result<ProblemSpec> {
        if !(self.kappa.is_finite() && self.lambda.is_finite()) {
            return Err(Error::Domain("benchmark parameters must be finite".into()));
        }
        let g = *self;
        let f = *self;
        ProblemSpec::builder(self.dim, self.horizon)
            .drift(Drift::Zero)
            .diffusion(Diffusion::Scaled(1.0))
            .terminal(move |x| g.terminal(x))
            .driver(move |t, x, y| f.driver(t, x, y))
            .constants(GrowthConstants {
                c_g: 2.0 + self.kappa.abs(),
                eta_g: 0.0,
                c_f: 1.0,
                eta_f: 0.0,
                l_f: 2.0,
                c_eta: 1.0,
            })
            .build()
    }
}

/// Error indicators of a trained table against the exact solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// `ln( max_i (1/n) sum_m e_{i,m}^2 )`; `-inf` if every error vanishes.
    pub mse_max: f64,
    /// `ln( (1/(n N)) sum_i sum_m e_{i,m}^2 )`.
    pub mse_av: f64,
    /// Same two indicators on the undamped scale.
    pub mse_max_undamped: f64,
    pub mse_av_undamped: f64,
    pub eval_points: usize,
    /// `sum_m e_{i,m}^2` per step, damped scale.
    pub step_sq_errors: Vec<f64>,
    pub row: RowInfo,
}

/// Run description printed alongside the metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowInfo {
    pub dim: usize,
    pub delta: f64,
    pub q: f64,
    pub kind: String,
    pub degree: u32,
    pub size: usize,
    pub paths: usize,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "d,delta,q,kind,deg,size,paths,seed,mse_max,mse_av,wall_seconds";

impl MetricReport {
    pub fn csv_row(&self, wall_seconds: f64) -> String {
        let r = &self.row;
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
            r.dim,
            r.delta,
            r.q,
            r.kind,
            r.degree,
            r.size,
            r.paths,
            r.seed,
            self.mse_max,
            self.mse_av,
            wall_seconds
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn log_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Draws `n_eval` fresh `nu`-distributed points per step from the evaluation
/// stream domain of `eval_seed`, disjoint from every training stream.
pub fn evaluation_points(table: &CoefficientTable, eval_seed: u64, n_eval: usize) -> Vec<Vec<f64>> {
    let measure = table.basis().measure();
    let d = measure.dim();
    let streams = StreamFactory::new(eval_seed);
    (0..table.steps())
        .map(|i| {
            let mut pts = vec![0.0; n_eval * d];
            for (m, x) in pts.chunks_exact_mut(d).enumerate() {
                let mut s = streams.stream(stream_id(StreamDomain::Evaluation, i as u64, m as u64));
                measure.sample_into(&mut s, x);
            }
            pts
        })
        .collect()
}

pub fn mse_metrics(
    table: &CoefficientTable,
    bench: &SinBenchmark,
    eval_seed: u64,
    n_eval: usize,
) -> Result<MetricReport> {
    if n_eval == 0 {
        return Err(Error::Domain("need at least one evaluation point".into()));
    }
    let points = evaluation_points(table, eval_seed, n_eval);
    mse_metrics_at(table, bench, &points)
}

/// Metrics on caller-supplied points: `points[i]` holds the flattened points of step `i`.
pub fn mse_metrics_at(table: &CoefficientTable, bench: &SinBenchmark, points: &[Vec<f64>]) -> Result<MetricReport> {
    let basis = table.basis();
    let d = basis.dim();
    if d != bench.dim {
        return Err(Error::Contract(format!("table dimension {d}, benchmark dimension {}", bench.dim)));
    }
    if points.len() != table.steps() {
        return Err(Error::Contract(format!("{} point sets for {} steps", points.len(), table.steps())));
    }
    let n_eval = points[0].len() / d;
    if n_eval == 0 || points.iter().any(|p| p.len() != n_eval * d) {
        return Err(Error::Contract("every step needs the same non-zero number of points".into()));
    }
    let q = table.q();
    let delta = table.delta();
    let workers = match table.metadata().workers {
        0 => default_workers(),
        w => w,
    };
    let pool = Pool::new(workers)?;
    let sums: Vec<(f64, f64)> = pool.map(table.steps(), |i| {
        let coeffs = table.coefficients(i);
        let mut scratch = basis.scratch();
        let t = i as f64 * delta;
        let mut damped = 0.0;
        let mut undamped = 0.0;
        for x in points[i].chunks_exact(d) {
            let w = if q == 0.0 { 1.0 } else { (1.0 + sq_norm(x)).powf(0.5 * q) };
            let e = basis.series(coeffs, x, &mut scratch) - bench.exact_solution(t, x) / w;
            damped += e * e;
            undamped += (e * w) * (e * w);
        }
        (damped, undamped)
    });
    let n = n_eval as f64;
    let steps = table.steps() as f64;
    let max_of = |sel: fn(&(f64, f64)) -> f64| sums.iter().map(sel).fold(0.0, f64::max);
    let sum_of = |sel: fn(&(f64, f64)) -> f64| sums.iter().map(sel).sum::<f64>();
    let gamma = basis.gamma();
    Ok(MetricReport {
        mse_max: log_or_neg_inf(max_of(|s| s.0) / n),
        mse_av: log_or_neg_inf(sum_of(|s| s.0) / (n * steps)),
        mse_max_undamped: log_or_neg_inf(max_of(|s| s.1) / n),
        mse_av_undamped: log_or_neg_inf(sum_of(|s| s.1) / (n * steps)),
        eval_points: n_eval,
        step_sq_errors: sums.iter().map(|s| s.0).collect(),
        row: RowInfo {
            dim: d,
            delta,
            q,
            kind: gamma.kind().name().into(),
            degree: gamma.kind().degree(),
            size: gamma.len(),
            paths: table.paths(),
            seed: table.seed(),
        },
    })
}

/// Normal-approximation interval `mean +- z sd / sqrt(n)` at the given level.
pub fn confidence_interval(values: &[f64], level: f64) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Contract("a confidence interval needs at least two values".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level must be in (0,1), got {level}")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let half = normal_inv_cdf(0.5 * (1.0 + level)) * var.sqrt() / n.sqrt();
    Ok((mean - half, mean + half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::SamplingMeasure;
    use crate::mindex::{IndexKind, MultiIndexSet};
    use crate::solver::{backward_solve, RunConfig};

    #[test]
    fn exact_solution_spot_values() {
        let b = SinBenchmark::standard(1);
        assert!((b.exact_solution(0.0, &[0.0]) - 1.6).abs() < 1e-15);
        for x in [-2.0, 0.3, 5.0] {
            assert_eq!(b.exact_solution(1.0, &[x]), b.terminal(&[x]));
        }
        assert!((b.exact_solution(1.0, &[std::f64::consts::FRAC_PI_2]) - 2.6).abs() < 1e-15);
        let b3 = SinBenchmark::standard(3);
        assert!((b3.exact_solution(0.0, &[0.0; 3]) - 1.6).abs() < 1e-15);
    }

    #[test]
    fn driver_vanishes_on_the_solution_and_is_bounded() {
        let b = SinBenchmark::standard(2);
        let spec = b.make_problem().unwrap();
        for (t, x) in [(0.0, [0.1, 0.2]), (0.5, [-3.0, 1.0]), (0.99, [10.0, -4.0])] {
            assert_eq!(spec.driver(t, &x, b.exact_solution(t, &x)), 0.0);
            for y in [-100.0, 0.0, 1.0, 55.0] {
                let v = spec.driver(t, &x, y);
                assert!((0.0..=1.0).contains(&v));
            }
            let g = spec.terminal(&x);
            assert!((0.6..=2.6).contains(&g));
        }
        assert_eq!(spec.lstar_bound(&[0.0, 0.0]), spec.lstar_bound(&[30.0, -8.0]));
    }

    #[test]
    fn pde_residual_vanishes() {
        let h = 1e-5;
        let mut s = StreamFactory::new(3).stream(0);
        use crate::rng::UniformSource;
        for d in [1usize, 3] {
            let b = SinBenchmark::standard(d);
            for _ in 0..100 {
                let t = s.next_uniform() * b.horizon;
                let x: Vec<f64> = (0..d).map(|_| 6.0 * s.next_uniform() - 3.0).collect();
                let u = b.exact_solution(t, &x);
                let ut = (b.exact_solution(t + h, &x) - b.exact_solution(t - h, &x)) / (2.0 * h);
                let mut lap = 0.0;
                for l in 0..d {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[l] += h;
                    xm[l] -= h;
                    lap += (b.exact_solution(t, &xp) - 2.0 * u + b.exact_solution(t, &xm)) / (h * h);
                }
                let residual = ut + 0.5 * lap + b.driver(t, &x, u);
                assert!(residual.abs() < 1e-4, "d={d} t={t} x={x:?}: {residual}");
            }
        }
    }

    #[test]
    fn confidence_interval_properties() {
        assert_eq!(confidence_interval(&[2.5; 10], 0.99).unwrap(), (2.5, 2.5));
        let v = [1.0, 2.0, 4.0, 7.0];
        let (lo, hi) = confidence_interval(&v, 0.99).unwrap();
        assert!((0.5 * (lo + hi) - 3.5).abs() < 1e-15);
        // sd = sqrt(7), z_{0.995} = 2.5758293035489
        let half = 2.575_829_303_548_901 * 7f64.sqrt() / 2.0;
        assert!((hi - lo - 2.0 * half).abs() < 1e-12);
        assert!(confidence_interval(&[1.0], 0.99).is_err());
        assert!(confidence_interval(&v, 1.5).is_err());
    }

    fn small_table(q: f64) -> CoefficientTable {
        let b = SinBenchmark::standard(1);
        let cfg = RunConfig::new(
            5,
            2000,
            q,
            3,
            MultiIndexSet::build(1, IndexKind::Full { k: vec![20] }).unwrap(),
            SamplingMeasure::new(2.0, 1).unwrap(),
        )
        .with_workers(1);
        backward_solve(&b.make_problem().unwrap(), &cfg).unwrap()
    }

    #[test]
    fn constant_error_gives_log_square() {
        let t = small_table(0.0);
        let b = SinBenchmark::standard(1);
        let pts: Vec<Vec<f64>> = (0..t.steps()).map(|_| vec![0.0; 10]).collect();
        let r = mse_metrics_at(&t, &b, &pts).unwrap();
        let shifted = SinBenchmark { kappa: b.kappa + 0.25, ..b };
        let rs = mse_metrics_at(&t, &shifted, &pts).unwrap();
        // At x = 0 the error is a per-step constant e_i; shifting kappa by c maps e_i to e_i - c.
        let e: Vec<f64> = (0..t.steps()).map(|i| t.evaluate(i, &[0.0]).unwrap() - 1.0 - b.kappa).collect();
        let av = e.iter().map(|v| v * v).sum::<f64>() / e.len() as f64;
        assert!((r.mse_av - av.ln()).abs() < 1e-10);
        let av_s = e.iter().map(|v| (v - 0.25) * (v - 0.25)).sum::<f64>() / e.len() as f64;
        assert!((rs.mse_av - av_s.ln()).abs() < 1e-10);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let t = small_table(2.1);
        let b = SinBenchmark::standard(1);
        let pts = evaluation_points(&t, 99, 300);
        let a = mse_metrics_at(&t, &b, &pts).unwrap();
        let rev: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().rev().copied().collect()).collect();
        let r = mse_metrics_at(&t, &b, &rev).unwrap();
        assert!((a.mse_max - r.mse_max).abs() < 1e-12);
        assert!((a.mse_av - r.mse_av).abs() < 1e-12);
        assert!(a.mse_max.is_finite() && a.mse_av.is_finite());
        assert!(mse_metrics_at(&t, &b, &pts[1..]).is_err());
    }

    #[test]
    fn csv_row_layout() {
        let t = small_table(0.0);
        let r = mse_metrics(&t, &SinBenchmark::standard(1), 1, 100).unwrap();
        let row = r.csv_row(0.5);
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("1,0.2,0,full,20,21,2000,3,"));
    }
}
