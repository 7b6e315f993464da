use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qrbsde::basis::christoffel;
use qrbsde::bench::{confidence_interval, mse_metrics, MetricReport, CSV_HEADER};
use qrbsde::dist::SamplingMeasure;
use qrbsde::mindex::{cardinality_hyperbolic, cardinality_total, IndexKind};
use qrbsde::table::RunMetadata;
use qrbsde::{backward_solve, CoefficientTable};
use serde::Serialize;

use crate::args::{resolve_kind, BenchArgs, DistArgs, Format, IndexArgs, Resolved, RunArgs};
use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

/// Summary lines go to stdout when the artifact goes to a file, else to stderr.
fn summary(r: &Resolved, line: &str) {
    if r.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn plan(r: &Resolved) -> String {
    let c = &r.config;
    let l = christoffel(&c.gamma);
    let bytes = c.memory_estimate();
    format!(
        "d={} N={} M={} kind={} #Gamma={} L_Gamma={} L_Gamma/M={:.3e} memory-estimate={} bytes ({:.1} MiB) workers={}",
        c.gamma.dim(),
        c.steps,
        c.paths,
        c.gamma.kind(),
        c.gamma.len(),
        l,
        l / c.paths as f64,
        bytes,
        bytes as f64 / (1024.0 * 1024.0),
        c.workers
    )
}

fn coefficient_csv(table: &CoefficientTable) -> String {
    let d = table.basis().dim();
    let mut s = String::from("step");
    for l in 0..d {
        s.push_str(&format!(",k{}", l + 1));
    }
    s.push_str(",alpha\n");
    for i in 0..table.steps() {
        for (k, a) in table.basis().gamma().iter().zip(table.coefficients(i)) {
            s.push_str(&i.to_string());
            for v in k {
                s.push_str(&format!(",{v}"));
            }
            s.push_str(&format!(",{a:e}\n"));
        }
    }
    s
}

pub fn solve(args: RunArgs) -> Result<(), CliError> {
    let r = args.resolve(None)?;
    if r.qs.len() != 1 {
        return Err(CliError::Usage("solve takes a single --q value; use bench for sweeps".into()));
    }
    if r.dry_run {
        println!("{}", plan(&r));
        return Ok(());
    }
    let spec = r.bench.make_problem()?;
    let start = Instant::now();
    let table = backward_solve(&spec, &r.config)?;
    let secs = start.elapsed().as_secs_f64();
    let text = match r.format {
        Format::Json => table.to_json()?,
        Format::Csv => coefficient_csv(&table),
    };
    emit(r.out.as_deref(), &text)?;
    if let Some(out) = &r.out {
        let m = meta_path(out);
        std::fs::write(&m, table.metadata_json()?).map_err(|e| io_err(&m, e))?;
    }
    let center = table.basis().measure().center().to_vec();
    summary(
        &r,
        &format!(
            "solve q={} {} y0(center)={:.6} truncated={:.3}% seconds={secs:.2}",
            r.config.q,
            plan(&r),
            table.evaluate(0, &center)?,
            100.0 * table.stats().truncation_rate()
        ),
    );
    Ok(())
}

#[derive(Serialize)]
struct BenchRun {
    q: f64,
    seed: u64,
    eval_seed: u64,
    origin_estimate: f64,
    report: MetricReport,
}

#[derive(Serialize)]
struct OriginInterval {
    q: f64,
    level: f64,
    runs: usize,
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct BenchOutput {
    runs: Vec<BenchRun>,
    intervals: Vec<OriginInterval>,
}

#[derive(Serialize)]
struct BenchMeta {
    q: f64,
    seed: u64,
    wall_seconds: f64,
    run: RunMetadata,
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let r = args.run.resolve(Some((args.eval_seed, args.eval_points, args.runs)))?;
    if r.dry_run {
        println!("{} runs={} q={:?}", plan(&r), r.runs, r.qs);
        return Ok(());
    }
    let spec = r.bench.make_problem()?;
    let center = r.config.measure.center().to_vec();
    let mut runs = Vec::new();
    let mut metas = Vec::new();
    let mut rows = vec![CSV_HEADER.to_string()];
    let mut intervals = Vec::new();
    for &q in &r.qs {
        let mut origin = Vec::with_capacity(r.runs);
        for k in 0..r.runs as u64 {
            let mut cfg = r.config.clone();
            cfg.q = q;
            cfg.seed = r.config.seed.wrapping_add(k);
            let start = Instant::now();
            let table = backward_solve(&spec, &cfg)?;
            let eval_seed = r.eval_seed.wrapping_add(k);
            let report = mse_metrics(&table, &r.bench, eval_seed, r.eval_points)?;
            let secs = start.elapsed().as_secs_f64();
            let y0 = table.evaluate(0, &center)?;
            origin.push(y0);
            summary(
                &r,
                &format!(
                    "bench q={q} seed={} MSE_max={:.3} MSE_av={:.3} y0(center)={y0:.4} L_Gamma/M={:.3e} seconds={secs:.2}",
                    cfg.seed,
                    report.mse_max,
                    report.mse_av,
                    cfg.statistical_indicator()
                ),
            );
            rows.push(report.csv_row(secs));
            metas.push(BenchMeta {
                q,
                seed: cfg.seed,
                wall_seconds: secs,
                run: table.metadata().clone(),
            });
            runs.push(BenchRun {
                q,
                seed: cfg.seed,
                eval_seed,
                origin_estimate: y0,
                report,
            });
        }
        if origin.len() >= 2 {
            let (lo, hi) = confidence_interval(&origin, 0.99)?;
            summary(&r, &format!("bench q={q} 99% interval for y0(center) over {} runs: [{lo:.3}, {hi:.3}]", origin.len()));
            intervals.push(OriginInterval {
                q,
                level: 0.99,
                runs: origin.len(),
                lo,
                hi,
            });
        }
    }
    let text = match r.format {
        Format::Json => serde_json::to_string_pretty(&BenchOutput { runs, intervals })
            .map_err(|e| CliError::Io(e.to_string()))?,
        Format::Csv => rows.join("\n") + "\n",
    };
    emit(r.out.as_deref(), &text)?;
    if let Some(out) = &r.out {
        let m = meta_path(out);
        let meta = serde_json::to_string_pretty(&metas).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&m, meta).map_err(|e| io_err(&m, e))?;
    }
    Ok(())
}

pub fn mindex_card(args: IndexArgs) -> Result<(), CliError> {
    let dim = args.dim.unwrap_or(1);
    if dim == 0 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    let n = match resolve_kind(dim, args.kind, args.deg, args.full_k)? {
        IndexKind::Total { deg } => cardinality_total(dim, deg)?,
        IndexKind::Hyperbolic { deg } => cardinality_hyperbolic(dim, deg)?,
        IndexKind::Full { k } => k
            .iter()
            .try_fold(1u64, |acc, &v| acc.checked_mul(u64::from(v) + 1))
            .ok_or_else(|| CliError::Usage("full grid size overflows".into()))?,
    };
    println!("{n}");
    Ok(())
}

pub fn dist_check(args: DistArgs) -> Result<(), CliError> {
    let m = SamplingMeasure::new(args.mu, 1)?;
    let closed_form = args.mu == 1.0 || args.mu == 2.0;
    let tol = if closed_form { 1e-12 } else { 1e-8 };
    let mut grid: Vec<f64> = (1..=args.grid).map(|j| j as f64 / (args.grid + 1) as f64).collect();
    for e in 1..=15 {
        let t = 10f64.powi(-e);
        grid.push(t);
        grid.push(1.0 - t);
    }
    let mut worst = 0.0f64;
    for &u in &grid {
        let x = m.inv_cdf(0, u)?;
        worst = worst.max((m.cdf(0, x) - u).abs());
    }
    let u: f64 = 1e-6;
    let lead = -(m.c_mu() / args.mu).powf(1.0 / args.mu) * u.powf(-1.0 / args.mu);
    let ratio = m.inv_cdf(0, u)? / lead;
    println!(
        "mu={} points={} max-round-trip-error={worst:.3e} tolerance={tol:e} tail-ratio(1e-6)={ratio:.4}",
        args.mu,
        grid.len()
    );
    if worst > tol {
        return Err(CliError::Numeric(format!("round-trip error {worst:e} exceeds {tol:e}")));
    }
    Ok(())
}
