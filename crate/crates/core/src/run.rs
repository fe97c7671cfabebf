//! Pipelines behind the command-line front end.
//!
//! A run reads a [`RunConfig`], executes one command and writes
//! `report.json` plus the requested artifacts into the output directory.
//! The report is split into a `metadata` block (wall clock, timing) and a
//! `report` block that depends only on the configuration.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::anisotropy::AnisotropyModel;
use crate::config::{Command, Format, RunConfig};
use crate::counterexample::{self as cx, CounterexampleSettings};
use crate::error::{Error, Result};
use crate::geometry::{coarea_check, upper_level_set, LevelSetView};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::io;
use crate::pairing::{blowup, normal_trace, pairing_apply, pairing_density_sum, verify_zeqnu, ZeqnuCheck};
use crate::solver::{solve_with, subgradient_defect, verify_subgradient, ProblemSpec, SolveResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ACCEPTANCE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
pub const EXIT_DIVERGED: i32 = 5;
pub const EXIT_RUNTIME: i32 = 6;

/// Absolute slack for the sampled subgradient inequality.
pub const SUBGRADIENT_TOL: f64 = 1e-8;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const PERTURBATIONS: usize = 20;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Config(_) => EXIT_CONFIG,
        Error::SolverDiverged { .. } | Error::Unbounded(_) => EXIT_DIVERGED,
        _ => EXIT_RUNTIME,
    }
}

/// A named pass/fail check with the measured value and its bound.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// The configuration-determined part of the report.
    pub report: Value,
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
}

struct Sink<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl Sink<'_> {
    fn wants(&self, f: Format) -> bool {
        self.cfg.output.wants(f)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(PathBuf::from(name));
        p
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(p, body)?;
        Ok(())
    }

    fn fields(&mut self, u: &ScalarField, z: Option<&VectorField>) -> Result<()> {
        if self.wants(Format::Bin) {
            let p = self.path("u.bin");
            io::save_scalar(u, &p)?;
            if let Some(z) = z {
                let p = self.path("z.bin");
                io::save_vector(z, &p)?;
            }
        }
        if self.wants(Format::Pgm) && u.grid().dim() >= 2 {
            let p = self.path("u.pgm");
            io::save_pgm(u, &p)?;
        }
        Ok(())
    }

    fn set(&mut self, e: &LevelSetView) -> Result<()> {
        if self.wants(Format::Pbm) && e.grid().dim() >= 2 {
            let p = self.path("set.pbm");
            io::save_pbm(e, &p)?;
        }
        Ok(())
    }
}

/// Executes the configured command, writing artifacts into `dir`.
pub fn execute(cfg: &RunConfig, config_text: &str, dir: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(dir)?;
    let mut sink = Sink {
        dir,
        cfg,
        written: Vec::new(),
    };
    let (results, checks) = match cfg.command {
        Command::Solve => cmd_solve(cfg, &mut sink)?,
        Command::Verify => cmd_verify(cfg, &mut sink)?,
        Command::Levelset => cmd_levelset(cfg, &mut sink)?,
        Command::Blowup => cmd_blowup(cfg, &mut sink)?,
        Command::Counterexample => cmd_counterexample(cfg, &mut sink)?,
        Command::Selftest => cmd_selftest(&mut sink)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command,
        "config": config_text,
        "tolerances": tolerances(cfg),
        "results": results,
        "checks": checks,
        "passed": passed,
        "artifacts": sink.written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    Ok(Outcome {
        report,
        passed,
        artifacts: sink.written,
    })
}

fn tolerances(cfg: &RunConfig) -> Value {
    let d = &cfg.diagnostics;
    json!({
        "gap_tol": cfg.solver.gap_tol,
        "feasibility": FEASIBILITY_TOL,
        "subgradient": SUBGRADIENT_TOL,
        "pairing_residual": d.max_pairing_residual,
        "blowup_residual": d.max_blowup_residual,
        "trace_error": d.max_trace_error,
        "coarea_error": d.max_coarea_error,
        "density_band": d.density_band,
        "counterexample_quadrature": cx::QUADRATURE_TOL,
        "counterexample_gap_slack": cx::GAP_SLACK,
    })
}

/// Reads the config at `path`, runs it and writes `report.json`.
pub fn run(path: &Path, out_override: Option<&Path>, command_override: Option<Command>) -> Result<Outcome> {
    let text = std::fs::read_to_string(path)?;
    run_text(&text, out_override, command_override)
}

pub fn run_text(
    text: &str,
    out_override: Option<&Path>,
    command_override: Option<Command>,
) -> Result<Outcome> {
    let started = Instant::now();
    let mut cfg = RunConfig::parse(text)?;
    if let Some(c) = command_override {
        cfg.command = c;
        RunConfig::parse(&toml::to_string(&cfg).map_err(|e| Error::Config(e.to_string()))?)?;
    }
    let dir = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output.dir.clone());
    let outcome = execute(&cfg, text, &dir)?;
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "metadata": {
            "timestamp_unix": stamp,
            "elapsed_seconds": started.elapsed().as_secs_f64(),
        },
        "report": outcome.report,
    });
    if cfg.output.wants(Format::Json) {
        std::fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&doc)? + "\n",
        )?;
    }
    Ok(outcome)
}

struct Solved {
    model: AnisotropyModel,
    result: SolveResult,
}

fn solve_problem(cfg: &RunConfig) -> Result<Solved> {
    let p = cfg.problem.as_ref().expect("validated");
    let model = cfg.model.build(p.dim, p.lo, p.hi)?;
    let spec: ProblemSpec = p.build(model.clone())?;
    let result = solve_with(&spec, &cfg.solver.options())?;
    Ok(Solved { model, result })
}

fn solve_summary(r: &SolveResult) -> Value {
    let (lo, hi) = r.u.range();
    json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "primal_energy": r.primal_energy,
        "dual_energy": r.dual_energy,
        "gap": r.gap,
        "relative_gap": r.relative_gap,
        "u_min": lo,
        "u_max": hi,
    })
}

fn solve_artifacts(sink: &mut Sink, r: &SolveResult) -> Result<()> {
    sink.fields(&r.u, Some(&r.z))?;
    if sink.wants(Format::Csv) {
        sink.text("gap_history.csv", &io::gap_history_csv(&r.gap_history))?;
    }
    Ok(())
}

fn cmd_solve(cfg: &RunConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let s = solve_problem(cfg)?;
    solve_artifacts(sink, &s.result)?;
    let checks = vec![Check::at_most(
        "relative_gap",
        s.result.relative_gap,
        cfg.solver.gap_tol,
    )];
    Ok((json!({ "solve": solve_summary(&s.result) }), checks))
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn level_set(cfg: &RunConfig, u: &ScalarField) -> (f64, LevelSetView) {
    let (lo, hi) = u.range();
    let s = cfg.diagnostics.level.unwrap_or(0.5 * (lo + hi));
    (s, upper_level_set(u, s, false))
}

/// Perturbations `v = u + t eta` with `eta` uniform in `[-1, 1]` on masked cells.
pub fn subgradient_samples(
    r: &SolveResult,
    model: &AnisotropyModel,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = r.u.grid();
    (0..count)
        .map(|_| {
            let t: f64 = rng.gen_range(1e-3..1.0);
            let mut v = r.u.clone();
            for (c, val) in v.values_mut().iter_mut().enumerate() {
                let eta: f64 = rng.gen_range(-1.0..1.0);
                if grid.in_mask(c) {
                    *val += t * eta;
                }
            }
            subgradient_defect(&r.u, &r.g, &v, model)
        })
        .collect()
}

fn zeqnu_at(
    cfg: &RunConfig,
    z: &VectorField,
    e: &LevelSetView,
    model: &AnisotropyModel,
    pts: &[Vec<f64>],
) -> (Vec<ZeqnuCheck>, usize) {
    let h = z.grid().spacing();
    let d = &cfg.diagnostics;
    let radii: Vec<f64> = d.radii.iter().map(|r| r * h).collect();
    let mut out = Vec::new();
    let mut skipped = 0;
    for x in pts {
        match verify_zeqnu(z, e, model, x, &radii, d.normal_radius * h) {
            Ok(c) => out.push(c),
            Err(_) => skipped += 1,
        }
    }
    (out, skipped)
}

/// Per-radius median of the oscillations over all points.
pub fn median_oscillations(checks: &[ZeqnuCheck]) -> Vec<f64> {
    let n = checks.first().map_or(0, |c| c.series.radii.len());
    (0..n)
        .map(|i| {
            median(
                &checks
                    .iter()
                    .map(|c| c.series.oscillations[i])
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

/// Largest increase between consecutive entries; negative when strictly decreasing.
pub fn max_step(v: &[f64]) -> f64 {
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn zeqnu_summary(checks: &[ZeqnuCheck], skipped: usize) -> Value {
    let res: Vec<f64> = checks.iter().map(|c| c.residual).collect();
    let mono = checks
        .iter()
        .filter(|c| c.series.oscillation_decreasing())
        .count();
    json!({
        "points": checks.len(),
        "skipped_non_reduced": skipped,
        "median_residual": median(&res),
        "max_residual": max_of(&res),
        "median_oscillations": median_oscillations(checks),
        "monotone_oscillation_points": mono,
        "lebesgue_like_points": checks.iter().filter(|c| c.series.lebesgue_like).count(),
    })
}

fn zeqnu_checks(cfg: &RunConfig, checks: &[ZeqnuCheck]) -> Vec<Check> {
    let res: Vec<f64> = checks.iter().map(|c| c.residual).collect();
    vec![
        Check::at_most(
            "median_blowup_residual",
            median(&res),
            cfg.diagnostics.max_blowup_residual,
        ),
        Check::at_most(
            "median_oscillation_max_step",
            max_step(&median_oscillations(checks)),
            0.0,
        ),
    ]
}

fn cmd_verify(cfg: &RunConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let s = solve_problem(cfg)?;
    let r = &s.result;
    solve_artifacts(sink, r)?;
    let d = &cfg.diagnostics;
    let cal = verify_subgradient(r, &s.model);
    let defects = subgradient_samples(r, &s.model, PERTURBATIONS, 0)?;
    let mut checks = vec![
        Check::at_most("relative_gap", r.relative_gap, cfg.solver.gap_tol),
        Check::at_most("feasibility_excess", cal.feasibility_excess, FEASIBILITY_TOL),
        Check::at_most(
            "relative_pairing_residual",
            cal.relative_pairing_residual,
            d.max_pairing_residual,
        ),
        Check::at_least("min_subgradient_defect", min_of(&defects), -SUBGRADIENT_TOL),
    ];
    let (level, e) = level_set(cfg, &r.u);
    sink.set(&e)?;
    let mut results = json!({
        "solve": solve_summary(r),
        "calibration": cal,
        "subgradient_defects": defects,
        "level": level,
    });
    if !e.is_empty() && !e.is_full() {
        let h = r.u.grid().spacing();
        let pts = e.sample_boundary_points(d.boundary_points);
        let mut errors = Vec::new();
        let mut traces = Vec::new();
        for x in &pts {
            if let Ok(t) = normal_trace(&r.z, &e, x, d.trace_r * h, d.trace_rho * h) {
                let f = s.model.value(x, &t.normal)?;
                errors.push((t.value - f).abs());
                traces.push(t.value);
            }
        }
        let (zq, skipped) = zeqnu_at(cfg, &r.z, &e, &s.model, &pts);
        checks.push(Check::at_most(
            "median_trace_error",
            median(&errors),
            d.max_trace_error,
        ));
        checks.extend(zeqnu_checks(cfg, &zq));
        results["traces"] = json!({
            "points": traces.len(),
            "values": traces,
            "median_error": median(&errors),
            "max_error": max_of(&errors),
            "r": d.trace_r * h,
            "rho": d.trace_rho * h,
        });
        results["blowup"] = zeqnu_summary(&zq, skipped);
    }
    Ok((results, checks))
}

fn cmd_levelset(cfg: &RunConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let s = solve_problem(cfg)?;
    let r = &s.result;
    sink.fields(&r.u, None)?;
    let d = &cfg.diagnostics;
    let (level, e) = level_set(cfg, &r.u);
    sink.set(&e)?;
    let co = coarea_check(&r.u, &s.model, d.coarea_thresholds)?;
    let mut checks = vec![Check::at_most(
        "coarea_relative_error",
        co.relative_error,
        d.max_coarea_error,
    )];
    let mut results = json!({
        "solve": solve_summary(r),
        "level": level,
        "volume": e.volume(),
        "perimeter": e.perimeter(&s.model),
        "coarea": co,
    });
    if !e.is_empty() && !e.is_full() {
        let h = r.u.grid().spacing();
        let pts = e.sample_boundary_points(d.boundary_points);
        let ratios = pts
            .iter()
            .map(|x| e.density_ratio(x, d.density_radius * h))
            .collect::<Result<Vec<_>>>()?;
        checks.push(Check::at_least(
            "min_density_ratio",
            min_of(&ratios),
            d.density_band[0],
        ));
        checks.push(Check::at_most(
            "max_density_ratio",
            max_of(&ratios),
            d.density_band[1],
        ));
        if sink.wants(Format::Csv) {
            let mut csv = String::from("point,x0,x1,x2,density_ratio\n");
            for (i, (x, q)) in pts.iter().zip(&ratios).enumerate() {
                let c = |k: usize| x.get(k).map(|v| v.to_string()).unwrap_or_default();
                csv.push_str(&format!("{i},{},{},{},{q}\n", c(0), c(1), c(2)));
            }
            sink.text("density.csv", &csv)?;
        }
        results["density_ratios"] = json!(ratios);
    }
    Ok((results, checks))
}

fn blowup_csv(checks: &[ZeqnuCheck]) -> String {
    let mut out = String::new();
    for (i, c) in checks.iter().enumerate() {
        let body = c.series.to_csv();
        let mut lines = body.lines();
        let head = lines.next().unwrap_or_default();
        if i == 0 {
            out.push_str(&format!("point,{head},residual\n"));
        }
        for (line, res) in lines.zip(&c.residuals) {
            out.push_str(&format!("{i},{line},{res}\n"));
        }
    }
    out
}

fn cmd_blowup(cfg: &RunConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let s = solve_problem(cfg)?;
    let r = &s.result;
    sink.fields(&r.u, Some(&r.z))?;
    let (level, e) = level_set(cfg, &r.u);
    sink.set(&e)?;
    if e.is_empty() || e.is_full() {
        return Err(Error::EmptyRegion(format!(
            "level set at {level} has no boundary"
        )));
    }
    let pts = e.sample_boundary_points(cfg.diagnostics.boundary_points);
    let (zq, skipped) = zeqnu_at(cfg, &r.z, &e, &s.model, &pts);
    if sink.wants(Format::Csv) {
        sink.text("blowup.csv", &blowup_csv(&zq))?;
    }
    let checks = zeqnu_checks(cfg, &zq);
    Ok((
        json!({
            "solve": solve_summary(r),
            "level": level,
            "radii": cfg.diagnostics.radii.iter().map(|v| v * r.u.grid().spacing()).collect::<Vec<_>>(),
            "blowup": zeqnu_summary(&zq, skipped),
        }),
        checks,
    ))
}

/// The counterexample report: averages, integrability bound and, in 2-D,
/// the blow-up of the rasterized field at the origin.
pub fn counterexample_results(
    settings: &CounterexampleSettings,
    raster_cells: usize,
) -> Result<(Value, Vec<Check>, String)> {
    let c = settings.build()?;
    let q = settings.quadrature;
    let rep = cx::lebesgue_failure_report(&c, q)?;
    let p = c.dim() as f64 - c.epsilon();
    let lp = cx::div_lp_norm(&c, p, q)?;
    let mut checks = vec![
        Check::at_most(
            "max_large_ball_average",
            max_of(&rep.large_ball_averages),
            rep.large_ball_bound,
        ),
        Check::at_least(
            "min_small_ball_average",
            min_of(&rep.small_ball_averages),
            rep.small_ball_bound,
        ),
        Check::at_least("oscillation_gap", rep.gap, rep.gap_bound),
        Check::at_most("div_lp_norm", lp.value, lp.bound * 1.01),
    ];
    let mut results = json!({
        "config": c,
        "lebesgue_failure": rep,
        "div_lp_norm": lp,
    });
    let r = c.radii();
    if c.dim() == 2 && r.len() >= 2 {
        let half = 3.0 * r[0];
        let h = 2.0 * half / raster_cells as f64;
        if r[1] >= 2.0 * h {
            let (z, _) = cx::rasterize(&c, raster_cells, half)?;
            let radii = [3.0 * r[0], r[0], 3.0 * r[1], r[1]];
            let s = blowup(&z, &[0.0, 0.0], &radii)?;
            checks.push(Check::at_most(
                "raster_lebesgue_like",
                s.lebesgue_like as u8 as f64,
                0.0,
            ));
            results["raster_blowup"] = json!(s);
        }
    }
    Ok((results, checks, rep.to_csv()))
}

fn cmd_counterexample(cfg: &RunConfig, sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let settings = cfg.counterexample.as_ref().expect("validated");
    let (results, checks, csv) = counterexample_results(settings, cfg.diagnostics.rasterize_cells)?;
    if sink.wants(Format::Csv) {
        sink.text("averages.csv", &csv)?;
    }
    Ok((results, checks))
}

/// Fast invariant suite over all layers; every check is deterministic.
pub fn selftest_checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checks = Vec::new();

    // anisotropy calculus
    let (mut euler, mut homog, mut bipolar, mut convex) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for name in ["euclidean", "ellipse", "rotating", "ramp", "bump"] {
        let m = AnisotropyModel::preset(name, 2)?;
        let dirs: Vec<[f64; 2]> = (0..4096)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 4096.0;
                [t.cos(), t.sin()]
            })
            .collect();
        for _ in 0..50 {
            let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let t: f64 = rng.gen_range(0.1..10.0);
            let f = m.value(&x, &p)?;
            let g = m.grad(&x, &p)?;
            euler = euler.max((g[0] * p[0] + g[1] * p[1] - f).abs() / f);
            homog = homog.max((m.value(&x, &[t * p[0], t * p[1]])? - t * f).abs() / (t * f));
            let sup = dirs
                .iter()
                .map(|w| {
                    let s = m.polar(&x, w).unwrap();
                    (w[0] * p[0] + w[1] * p[1]) / s
                })
                .fold(f64::NEG_INFINITY, f64::max);
            bipolar = bipolar.max((sup - f).abs() / f);
            convex = convex.min(m.strong_convexity_residual(&x, &y, &p)?);
        }
    }
    checks.push(Check::at_most("euler_identity", euler, 1e-10));
    checks.push(Check::at_most("homogeneity", homog, 1e-10));
    checks.push(Check::at_most("bipolarity_sampled", bipolar, 1e-5));
    checks.push(Check::at_least("strong_convexity", convex, -1e-10));

    // summation by parts and the pairing identity
    let grid = std::sync::Arc::new(GridSpec::unit_cube(2, 32)?);
    let u = ScalarField::from_fn(grid.clone(), |_| rng.gen_range(-1.0..1.0));
    let z = VectorField::from_fn(grid.clone(), |_| {
        vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
    });
    let grad = u.gradient();
    let lhs: f64 = grad
        .components()
        .iter()
        .zip(z.components())
        .map(|(a, b)| a * b)
        .sum();
    let rhs: f64 = -u
        .values()
        .iter()
        .zip(z.divergence().values())
        .map(|(a, b)| a * b)
        .sum::<f64>();
    checks.push(Check::at_most(
        "adjointness",
        (lhs - rhs).abs() / lhs.abs().max(1.0),
        1e-12,
    ));
    let psi = ScalarField::from_fn(grid.clone(), |x| {
        let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
        (0.16 - r2).max(0.0)
    });
    let a = pairing_apply(&z, &u, &psi)?;
    let b = pairing_density_sum(&z, &u, &psi);
    checks.push(Check::at_most(
        "pairing_identity",
        (a - b).abs() / b.abs().max(1e-300),
        1e-12,
    ));

    // a small ROF disc
    let grid = std::sync::Arc::new(GridSpec::unit_cube(2, 64)?);
    let f = ScalarField::from_fn(grid.clone(), |x| {
        ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) <= 0.0625) as u8 as f64
    });
    let model = AnisotropyModel::euclidean(2)?;
    let spec = ProblemSpec::rof(model.clone(), f, 32.0)?;
    let r = solve_with(&spec, &Default::default())?;
    checks.push(Check::at_most("rof_relative_gap", r.relative_gap, 1e-5));
    let plateau = r.u.values()[grid.cell_containing(&[0.5, 0.5]).unwrap()];
    checks.push(Check::at_most(
        "rof_plateau_error",
        (plateau - 0.75).abs() / 0.75,
        0.02,
    ));
    let cal = verify_subgradient(&r, &model);
    checks.push(Check::at_most(
        "rof_feasibility",
        cal.feasibility_excess,
        FEASIBILITY_TOL,
    ));
    checks.push(Check::at_most("rof_pairing", cal.relative_pairing_residual, 0.05));
    let binary = upper_level_set(&r.u, 0.375, false);
    let chi = ScalarField::new(
        grid.clone(),
        binary.mask().iter().map(|&b| b as u8 as f64).collect(),
    )?;
    checks.push(Check::at_most(
        "coarea_binary",
        coarea_check(&chi, &model, 16)?.relative_error,
        1e-12,
    ));

    // the non-Lebesgue construction
    let (_, cchecks, _) = counterexample_results(&CounterexampleSettings::new(2, 0.5, 0.01), 256)?;
    checks.extend(cchecks.into_iter().map(|mut c| {
        c.name = format!("counterexample_{}", c.name);
        c
    }));
    Ok(checks)
}

fn cmd_selftest(_sink: &mut Sink) -> Result<(Value, Vec<Check>)> {
    let checks = selftest_checks()?;
    Ok((json!({ "checks_run": checks.len() }), checks))
}
