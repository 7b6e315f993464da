//! WebAssembly bindings for the demo page.
//!
//! The plain functions return `qrbsde::Result` and are tested natively; the
//! `#[wasm_bindgen]` wrappers flatten their output into typed arrays.

use qrbsde::basis::phi_eval;
use qrbsde::bench::{mse_metrics, SinBenchmark};
use qrbsde::dist::SamplingMeasure;
use qrbsde::mindex::{IndexKind, MultiIndexSet};
use qrbsde::{backward_solve, Error, Result, RunConfig};
use wasm_bindgen::prelude::*;

/// Demo solves are capped so the page stays responsive.
pub const MAX_DEMO_WORK: u64 = 200_000_000;

/// Rows `k = 0..=k_max` of `phi_k(x)` on `n` equispaced points of `[lo, hi]`,
/// preceded by one row holding the sampling density.
pub fn basis_rows(mu: f64, k_max: u32, lo: f64, hi: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 || !(lo < hi) {
        return Err(Error::Domain("need n >= 2 and lo < hi".into()));
    }
    let m = SamplingMeasure::new(mu, 1)?;
    let xs: Vec<f64> = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
    let mut rows = vec![xs.iter().map(|&x| m.pdf(0, x)).collect::<Result<Vec<f64>>>()?];
    for k in 0..=k_max {
        rows.push(xs.iter().map(|&x| phi_eval(&[k], &[x], &m)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(rows)
}

pub fn parse_kind(kind: &str, deg: u32) -> Result<IndexKind> {
    match kind {
        "total" => Ok(IndexKind::Total { deg }),
        "hyperbolic" => Ok(IndexKind::Hyperbolic { deg }),
        "full" => Ok(IndexKind::Full { k: vec![deg, deg] }),
        other => Err(Error::Domain(format!("unknown index kind {other:?}"))),
    }
}

/// Two-dimensional index set as `(k1, k2)` pairs.
pub fn index_pairs(kind: &str, deg: u32) -> Result<Vec<(u32, u32)>> {
    let set = MultiIndexSet::build(2, parse_kind(kind, deg)?)?;
    Ok(set.iter().map(|k| (k[0], k[1])).collect())
}

/// Result of a small one-dimensional benchmark solve.
#[derive(Debug, Clone)]
pub struct SolveCurve {
    pub xs: Vec<f64>,
    pub estimate: Vec<f64>,
    pub exact: Vec<f64>,
    pub mse_max: f64,
    pub mse_av: f64,
}

pub fn solve_curve(q: f64, k: u32, paths: usize, steps: usize, seed: u64, n: usize) -> Result<SolveCurve> {
    let work = (paths as u64) * (steps as u64).pow(2) * (u64::from(k) + 1);
    if work > MAX_DEMO_WORK {
        return Err(Error::Capacity {
            what: "demo solve work",
            requested: u128::from(work),
            limit: u128::from(MAX_DEMO_WORK),
        });
    }
    if n < 2 {
        return Err(Error::Domain("need at least two plot points".into()));
    }
    let b = SinBenchmark::standard(1);
    let cfg = RunConfig::new(
        steps,
        paths,
        q,
        seed,
        MultiIndexSet::build(1, IndexKind::Full { k: vec![k] })?,
        SamplingMeasure::new(2.0, 1)?,
    )
    .with_workers(1);
    let table = backward_solve(&b.make_problem()?, &cfg)?;
    let report = mse_metrics(&table, &b, seed ^ 0x5eed, 500)?;
    let xs: Vec<f64> = (0..n).map(|j| -6.0 + 12.0 * j as f64 / (n - 1) as f64).collect();
    let estimate = xs.iter().map(|&x| table.evaluate(0, &[x])).collect::<Result<Vec<f64>>>()?;
    let exact = xs.iter().map(|&x| b.exact_solution(0.0, &[x])).collect();
    Ok(SolveCurve {
        xs,
        estimate,
        exact,
        mse_max: report.mse_max,
        mse_av: report.mse_av,
    })
}

fn js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Flattened `(k_max + 2) x n` matrix: density row, then `phi_0 .. phi_kmax`.
#[wasm_bindgen(js_name = basisCurves)]
pub fn basis_curves(mu: f64, k_max: u32, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    Ok(basis_rows(mu, k_max, lo, hi, n).map_err(js)?.concat())
}

/// Flattened `k1, k2, k1, k2, ...`.
#[wasm_bindgen(js_name = indexSet)]
pub fn index_set(kind: &str, deg: u32) -> Result<Vec<u32>, JsValue> {
    Ok(index_pairs(kind, deg).map_err(js)?.into_iter().flat_map(|(a, b)| [a, b]).collect())
}

/// `[mse_max, mse_av, x_0..x_{n-1}, estimate.., exact..]`.
#[wasm_bindgen(js_name = solveCurve)]
pub fn solve_curve_js(q: f64, k: u32, paths: usize, steps: usize, seed: u32, n: usize) -> Result<Vec<f64>, JsValue> {
    let c = solve_curve(q, k, paths, steps, u64::from(seed), n).map_err(js)?;
    let mut out = vec![c.mse_max, c.mse_av];
    out.extend(c.xs);
    out.extend(c.estimate);
    out.extend(c.exact);
    Ok(out)
}
