//! Discrete anisotropic total variation problems and their dual certificates.
//!
//! Two problem modes are supported:
//!
//! * ROF: minimize `J(u) + (lambda / 2) sum (u - f)^2 h^d`. At the optimum
//!   `g = lambda (f - u)` is a subgradient of `J` at `u`, and the dual field `z`
//!   satisfies `-div z = g`, `F°(x, z) <= 1`.
//! * Prescribed `g`: minimize `J(u) - sum g u h^d` with `u` frozen on the cells
//!   touching the mask boundary.
//!
//! Here `J(u) = sum F(x_c, grad u(c)) h^d`. Both modes are solved with a fixed
//! step primal-dual iteration whose dual step is preconditioned by the metric of
//! the anisotropy, so that radial scaling onto `{F° <= 1}` is the exact proximal
//! map of the dual constraint.

use std::sync::Arc;

use serde::Serialize;

use crate::anisotropy::{AnisotropyModel, Family};
use crate::error::{Error, Result};
use crate::grid::{divergence_into, gradient_into, GridSpec, ScalarField, VectorField};

#[derive(Debug, Clone)]
pub enum ProblemMode {
    Rof { datum: ScalarField, lambda: f64 },
    PrescribedG { g: ScalarField, boundary: ScalarField },
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    mode: ProblemMode,
    model: AnisotropyModel,
    grid: Arc<GridSpec>,
}

impl ProblemSpec {
    pub fn rof(model: AnisotropyModel, datum: ScalarField, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let grid = datum.grid().clone();
        check_model(&model, &grid)?;
        Ok(ProblemSpec {
            mode: ProblemMode::Rof { datum, lambda },
            model,
            grid,
        })
    }

    /// `g` is the prescribed datum; `boundary` supplies the values frozen on
    /// mask-boundary cells (other entries are ignored).
    pub fn prescribed_g(model: AnisotropyModel, g: ScalarField, boundary: ScalarField) -> Result<Self> {
        if g.grid() != boundary.grid() {
            return Err(Error::InvalidInput(
                "g and boundary values live on different grids".into(),
            ));
        }
        let grid = g.grid().clone();
        check_model(&model, &grid)?;
        if !(0..grid.len()).any(|c| grid.is_mask_boundary(c)) {
            return Err(Error::InvalidInput(
                "mask has no boundary cells to hold Dirichlet data".into(),
            ));
        }
        Ok(ProblemSpec {
            mode: ProblemMode::PrescribedG { g, boundary },
            model,
            grid,
        })
    }

    pub fn mode(&self) -> &ProblemMode {
        &self.mode
    }

    pub fn model(&self) -> &AnisotropyModel {
        &self.model
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }
}

fn check_model(model: &AnisotropyModel, grid: &GridSpec) -> Result<()> {
    if model.dim() != grid.dim() {
        return Err(Error::InvalidInput(format!(
            "model is {}-dimensional but the grid is {}-dimensional",
            model.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once `(primal - dual) / |primal|` drops below this.
    pub gap_tol: f64,
    /// Iterations between duality gap evaluations.
    pub check_every: usize,
    /// `tau / sigma` balance; `tau * sigma * ||grad||^2 * metric_bound = 0.99` always.
    pub step_ratio: f64,
    /// Iterations of the dual feasibility pre-solve in prescribed-`g` mode.
    pub presolve_iters: usize,
    /// Relative divergence residual above which the pre-solve declares the energy unbounded.
    pub presolve_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            gap_tol: 1e-5,
            check_every: 10,
            step_ratio: 0.003,
            presolve_iters: 2_000,
            presolve_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    pub z: VectorField,
    /// `lambda (f - u)` in ROF mode, the datum in prescribed-`g` mode.
    pub g: ScalarField,
    pub primal_energy: f64,
    pub dual_energy: f64,
    /// Absolute duality gap `primal - dual`.
    pub gap: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(iteration, relative gap)` at every check.
    pub gap_history: Vec<(usize, f64)>,
}

/// Runs the solver with default options apart from the iteration cap and tolerance.
pub fn solve(spec: &ProblemSpec, max_iters: usize, gap_tol: f64) -> Result<SolveResult> {
    solve_with(
        spec,
        &SolverOptions {
            max_iters,
            gap_tol,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_with(spec: &ProblemSpec, opts: &SolverOptions) -> Result<SolveResult> {
    if !(opts.gap_tol > 0.0) {
        return Err(Error::InvalidInput("gap_tol must be positive".into()));
    }
    if opts.check_every == 0 || !(opts.step_ratio > 0.0) {
        return Err(Error::InvalidInput(
            "check_every and step_ratio must be positive".into(),
        ));
    }
    if let ProblemMode::PrescribedG { .. } = spec.mode {
        presolve_feasibility(spec, opts)?;
    }
    Iteration::new(spec, opts).run()
}

/// Cell centers, cached only when the model depends on `x`.
fn centers(grid: &GridSpec, model: &AnisotropyModel) -> Option<Vec<f64>> {
    if model.is_homogeneous_in_x() {
        return None;
    }
    let d = grid.dim();
    let mut out = vec![0.0; grid.len() * d];
    for c in 0..grid.len() {
        grid.center_into(c, &mut out[c * d..(c + 1) * d]);
    }
    Some(out)
}

struct Iteration<'a> {
    spec: &'a ProblemSpec,
    opts: &'a SolverOptions,
    grid: &'a GridSpec,
    centers: Option<Vec<f64>>,
    tau: f64,
    sigma: f64,
    // Dirichlet cells in prescribed-g mode
    frozen: Vec<bool>,
}

impl<'a> Iteration<'a> {
    fn new(spec: &'a ProblemSpec, opts: &'a SolverOptions) -> Self {
        let grid = spec.grid.as_ref();
        let d = grid.dim() as f64;
        let l2 = 4.0 * d / grid.spacing().powi(2);
        let scale = (l2 * spec.model.metric_bound()).sqrt();
        let tau = opts.step_ratio.sqrt() * 0.99f64.sqrt() / scale;
        let sigma = 0.99f64.sqrt() / (opts.step_ratio.sqrt() * scale);
        let frozen = match spec.mode {
            ProblemMode::Rof { .. } => vec![false; grid.len()],
            ProblemMode::PrescribedG { .. } => (0..grid.len()).map(|c| grid.is_mask_boundary(c)).collect(),
        };
        Iteration {
            spec,
            opts,
            grid,
            centers: centers(grid, &spec.model),
            tau,
            sigma,
            frozen,
        }
    }

    fn run(&self) -> Result<SolveResult> {
        let grid = self.grid;
        let (n, d) = (grid.len(), grid.dim());
        let model = &self.spec.model;
        let mut u = match &self.spec.mode {
            ProblemMode::Rof { datum, .. } => datum.values().to_vec(),
            ProblemMode::PrescribedG { boundary, .. } => (0..n)
                .map(|c| if self.frozen[c] { boundary.values()[c] } else { 0.0 })
                .collect(),
        };
        let mut ubar = u.clone();
        let mut z = vec![0.0; n * d];
        let mut grad = vec![0.0; n * d];
        let mut div = vec![0.0; n];

        let mut history = Vec::new();
        let mut best: Option<Snapshot> = None;
        let mut worsening = 0usize;
        let mut last_gap = f64::INFINITY;
        let mut iterations = 0;
        let euclidean = model.family() == Family::Euclidean;

        while iterations < self.opts.max_iters {
            iterations += 1;
            // dual ascent + projection onto {F° <= 1}
            gradient_into(grid, &ubar, &mut grad);
            let mut v = [0.0; 3];
            for c in 0..n {
                if !grid.in_mask(c) {
                    continue;
                }
                for k in 0..d {
                    v[k] = grad[k * n + c];
                }
                if euclidean {
                    let mut s = 0.0;
                    for k in 0..d {
                        v[k] = z[k * n + c] + self.sigma * v[k];
                        s += v[k] * v[k];
                    }
                    let scale = if s > 1.0 { 1.0 / s.sqrt() } else { 1.0 };
                    for k in 0..d {
                        z[k * n + c] = v[k] * scale;
                    }
                } else {
                    let x = self.center(c);
                    model.apply_dual_metric(x, &mut v[..d]);
                    for k in 0..d {
                        v[k] = z[k * n + c] + self.sigma * v[k];
                    }
                    model.project_dual_in_place(x, &mut v[..d]);
                    for k in 0..d {
                        z[k * n + c] = v[k];
                    }
                }
            }
            // primal descent
            divergence_into(grid, &z, &mut div);
            self.primal_step(&mut u, &mut ubar, &div);

            if iterations % self.opts.check_every == 0 || iterations == self.opts.max_iters {
                let snap = self.snapshot(&u, &z, &div, iterations)?;
                history.push((iterations, snap.relative_gap));
                if snap.relative_gap > last_gap * (1.0 + 1e-12) {
                    worsening += self.opts.check_every;
                } else {
                    worsening = 0;
                }
                last_gap = snap.relative_gap;
                let done = snap.relative_gap <= self.opts.gap_tol;
                if best.as_ref().is_none_or(|b| snap.relative_gap <= b.relative_gap) {
                    best = Some(snap);
                }
                if done {
                    break;
                }
                let b = best.as_ref().unwrap();
                // gap kept growing for 100 iterations and is far above the best seen
                if worsening >= 100 && last_gap > 1e3 * b.relative_gap.max(self.opts.gap_tol) {
                    return Err(Error::SolverDiverged {
                        iterations,
                        reason: format!("duality gap increased for {worsening} consecutive iterations"),
                        primal_energy: b.primal,
                        gap: last_gap,
                    });
                }
            }
        }
        let best = best.expect("at least one gap check");
        Ok(self.finish(best, iterations, history))
    }

    fn center(&self, c: usize) -> &[f64] {
        match &self.centers {
            Some(xs) => {
                let d = self.grid.dim();
                &xs[c * d..(c + 1) * d]
            }
            // x is ignored by homogeneous models
            None => &[0.0, 0.0, 0.0][..self.grid.dim()],
        }
    }

    fn primal_step(&self, u: &mut [f64], ubar: &mut [f64], div: &[f64]) {
        let tau = self.tau;
        match &self.spec.mode {
            ProblemMode::Rof { datum, lambda } => {
                let f = datum.values();
                let denom = 1.0 / (1.0 + tau * lambda);
                for c in 0..u.len() {
                    let old = u[c];
                    let new = (old + tau * div[c] + tau * lambda * f[c]) * denom;
                    u[c] = new;
                    ubar[c] = 2.0 * new - old;
                }
            }
            ProblemMode::PrescribedG { g, .. } => {
                let g = g.values();
                for c in 0..u.len() {
                    if self.frozen[c] || !self.grid.in_mask(c) {
                        continue;
                    }
                    let old = u[c];
                    let new = old + tau * (div[c] + g[c]);
                    u[c] = new;
                    ubar[c] = 2.0 * new - old;
                }
            }
        }
    }

    /// Evaluates the gap for the current dual iterate.
    ///
    /// In ROF mode the primal candidate is `u = f + div z / lambda`, the exact
    /// minimizer of the Lagrangian for this `z`; then `g = lambda (f - u) = -div z`
    /// holds by construction and the gap equals `sum F(grad u) - z . grad u`.
    fn snapshot(&self, u: &[f64], z: &[f64], div: &[f64], iteration: usize) -> Result<Snapshot> {
        let grid = self.grid;
        let hd = grid.cell_volume();
        let model = &self.spec.model;
        let (primal, dual, candidate) = match &self.spec.mode {
            ProblemMode::Rof { datum, lambda } => {
                let f = datum.values();
                let cand: Vec<f64> = (0..grid.len()).map(|c| f[c] + div[c] / lambda).collect();
                let tv = tv_raw(grid, model, &cand, self.centers.as_deref());
                let mut data = 0.0;
                let mut dual = 0.0;
                for c in (0..grid.len()).filter(|&c| grid.in_mask(c)) {
                    data += 0.5 * lambda * (cand[c] - f[c]).powi(2);
                    dual += -f[c] * div[c] - div[c] * div[c] / (2.0 * lambda);
                }
                (tv + data * hd, dual * hd, cand)
            }
            ProblemMode::PrescribedG { g, boundary } => {
                let g = g.values();
                let b = boundary.values();
                let tv = tv_raw(grid, model, u, self.centers.as_deref());
                let bound = u.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let (mut lin, mut dual, mut slack) = (0.0, 0.0, 0.0);
                for c in (0..grid.len()).filter(|&c| grid.in_mask(c)) {
                    lin += g[c] * u[c];
                    if self.frozen[c] {
                        dual += -b[c] * (div[c] + g[c]);
                    } else {
                        slack += (div[c] + g[c]).abs();
                    }
                }
                (tv - lin * hd, (dual - bound * slack) * hd, u.to_vec())
            }
        };
        if !(primal.is_finite() && dual.is_finite()) {
            return Err(Error::SolverDiverged {
                iterations: iteration,
                reason: "non-finite energy".into(),
                primal_energy: primal,
                gap: f64::NAN,
            });
        }
        let gap = primal - dual;
        let relative_gap = gap / primal.abs().max(f64::MIN_POSITIVE);
        Ok(Snapshot {
            u: candidate,
            z: z.to_vec(),
            primal,
            dual,
            gap,
            relative_gap: if gap == 0.0 { 0.0 } else { relative_gap },
        })
    }

    fn finish(&self, best: Snapshot, iterations: usize, history: Vec<(usize, f64)>) -> SolveResult {
        let grid = self.spec.grid.clone();
        let u = ScalarField::new(grid.clone(), best.u).expect("finite iterate");
        let g = match &self.spec.mode {
            ProblemMode::Rof { datum, lambda } => {
                let vals = datum
                    .values()
                    .iter()
                    .zip(u.values())
                    .map(|(f, u)| lambda * (f - u))
                    .collect();
                ScalarField::new(grid.clone(), vals).expect("finite datum")
            }
            ProblemMode::PrescribedG { g, .. } => g.clone(),
        };
        let mut z = VectorField::from_components(grid, best.z).expect("finite dual iterate");
        z.mark_feasibility(&self.spec.model, 1e-9);
        SolveResult {
            u,
            z,
            g,
            primal_energy: best.primal,
            dual_energy: best.dual,
            gap: best.gap,
            converged: best.relative_gap <= self.opts.gap_tol,
            relative_gap: best.relative_gap,
            iterations,
            gap_history: history,
        }
    }
}

struct Snapshot {
    u: Vec<f64>,
    z: Vec<f64>,
    primal: f64,
    dual: f64,
    gap: f64,
    relative_gap: f64,
}

fn tv_raw(grid: &GridSpec, model: &AnisotropyModel, u: &[f64], centers: Option<&[f64]>) -> f64 {
    let (n, d) = (grid.len(), grid.dim());
    let mut grad = vec![0.0; n * d];
    gradient_into(grid, u, &mut grad);
    let mut x = [0.0; 3];
    let mut p = [0.0; 3];
    let mut sum = 0.0;
    for c in (0..n).filter(|&c| grid.in_mask(c)) {
        for k in 0..d {
            p[k] = grad[k * n + c];
        }
        let xc: &[f64] = match centers {
            Some(xs) => &xs[c * d..(c + 1) * d],
            None => {
                grid.center_into(c, &mut x[..d]);
                &x[..d]
            }
        };
        sum += model.value_raw(xc, &p[..d]);
    }
    sum * grid.cell_volume()
}

/// `J(u) = sum F(x_c, grad u(c)) h^d` over masked cells.
pub fn total_variation(u: &ScalarField, model: &AnisotropyModel) -> f64 {
    tv_raw(u.grid(), model, u.values(), None)
}

/// `J(u)` plus the data term of the problem mode.
pub fn primal_energy(u: &ScalarField, spec: &ProblemSpec) -> Result<f64> {
    if u.grid() != spec.grid() {
        return Err(Error::InvalidInput("u does not live on the problem grid".into()));
    }
    let tv = total_variation(u, &spec.model);
    let hd = spec.grid.cell_volume();
    let data: f64 = match &spec.mode {
        ProblemMode::Rof { datum, lambda } => u
            .masked()
            .map(|(c, v)| 0.5 * lambda * (v - datum.values()[c]).powi(2))
            .sum(),
        ProblemMode::PrescribedG { g, .. } => -u.masked().map(|(c, v)| g.values()[c] * v).sum::<f64>(),
    };
    Ok(tv + data * hd)
}

/// `J(v) - J(u) - sum g (v - u) h^d`, nonnegative whenever `g` is a subgradient of `J` at `u`.
pub fn subgradient_defect(
    u: &ScalarField,
    g: &ScalarField,
    v: &ScalarField,
    model: &AnisotropyModel,
) -> Result<f64> {
    if u.grid() != g.grid() || u.grid() != v.grid() {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    let lin: f64 = u
        .masked()
        .map(|(c, uc)| g.values()[c] * (v.values()[c] - uc))
        .sum::<f64>()
        * u.grid().cell_volume();
    Ok(total_variation(v, model) - total_variation(u, model) - lin)
}

/// Dual feasibility pre-solve for prescribed-`g` mode: accelerated projected
/// gradient on `min { |div z + g|^2 / 2 : F°(z) <= 1 }` over the free cells.
fn presolve_feasibility(spec: &ProblemSpec, opts: &SolverOptions) -> Result<()> {
    let ProblemMode::PrescribedG { g, .. } = &spec.mode else {
        return Ok(());
    };
    let grid = spec.grid.as_ref();
    let (n, d) = (grid.len(), grid.dim());
    let model = &spec.model;
    let centers = centers(grid, model);
    let free: Vec<bool> = (0..n)
        .map(|c| grid.in_mask(c) && !grid.is_mask_boundary(c))
        .collect();
    let gv = g.values();
    let g_norm = (0..n)
        .filter(|&c| free[c])
        .map(|c| gv[c] * gv[c])
        .sum::<f64>()
        .sqrt();
    if g_norm == 0.0 {
        return Ok(());
    }
    let step = grid.spacing().powi(2) / (4.0 * d as f64 * model.metric_bound());
    let mut z = vec![0.0; n * d];
    let mut y = z.clone();
    let mut t = 1.0f64;
    let mut div = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut grad = vec![0.0; n * d];
    let mut best = f64::INFINITY;
    let zero = [0.0; 3];
    for _ in 0..opts.presolve_iters {
        divergence_into(grid, &y, &mut div);
        let mut res = 0.0;
        for c in 0..n {
            r[c] = if free[c] { div[c] + gv[c] } else { 0.0 };
            res += r[c] * r[c];
        }
        best = best.min(res.sqrt() / g_norm);
        if best <= 1e-6 {
            return Ok(());
        }
        // gradient of |div y + g|^2 / 2 is -grad(r)
        gradient_into(grid, &r, &mut grad);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut v = [0.0; 3];
        for c in (0..n).filter(|&c| grid.in_mask(c)) {
            let x = match &centers {
                Some(xs) => &xs[c * d..(c + 1) * d],
                None => &zero[..d],
            };
            for k in 0..d {
                v[k] = grad[k * n + c];
            }
            model.apply_dual_metric(x, &mut v[..d]);
            for k in 0..d {
                v[k] = y[k * n + c] + step * v[k];
            }
            model.project_dual_in_place(x, &mut v[..d]);
            for k in 0..d {
                let old = z[k * n + c];
                z[k * n + c] = v[k];
                y[k * n + c] = v[k] + (t - 1.0) / t_next * (v[k] - old);
            }
        }
        t = t_next;
    }
    if best > opts.presolve_tol {
        return Err(Error::Unbounded(format!(
            "no feasible z with -div z = g found (best relative residual {best:.3e} after {} iterations); \
             the datum is likely too large for the domain",
            opts.presolve_iters
        )));
    }
    Ok(())
}

/// Discrete calibration check of a `(u, z, g)` triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// `max(F°(x, z) - 1, 0)` over masked cells.
    pub feasibility_excess: f64,
    /// `(sum (div z + g)^2 h^d)^{1/2}`.
    pub divergence_residual: f64,
    pub relative_divergence_residual: f64,
    /// `sum (F(x, grad u) - z . grad u) h^d`.
    pub pairing_residual: f64,
    pub relative_pairing_residual: f64,
    /// Smallest cellwise `F(x, grad u) - z . grad u`.
    pub min_cell_pairing: f64,
    pub total_variation: f64,
}

pub fn verify_subgradient(result: &SolveResult, model: &AnisotropyModel) -> CalibrationReport {
    calibration_report(&result.u, &result.z, &result.g, model)
}

/// Same as [`verify_subgradient`] for an arbitrary triple.
pub fn calibration_report(
    u: &ScalarField,
    z: &VectorField,
    g: &ScalarField,
    model: &AnisotropyModel,
) -> CalibrationReport {
    let grid = u.grid().as_ref();
    let (n, d) = (grid.len(), grid.dim());
    let hd = grid.cell_volume();
    let grad = u.gradient();
    let div = z.divergence();
    let mut x = vec![0.0; d];
    let mut p = vec![0.0; d];
    let mut w = vec![0.0; d];
    let (mut excess, mut div_res, mut g_norm, mut tv, mut pairing) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    let mut min_cell = f64::INFINITY;
    for c in (0..n).filter(|&c| grid.in_mask(c)) {
        grid.center_into(c, &mut x);
        grad.at_into(c, &mut p);
        z.at_into(c, &mut w);
        excess = excess.max(model.polar_raw(&x, &w) - 1.0);
        let r = div.values()[c] + g.values()[c];
        div_res += r * r;
        g_norm += g.values()[c].powi(2);
        let f = model.value_raw(&x, &p);
        let zp: f64 = p.iter().zip(&w).map(|(a, b)| a * b).sum();
        tv += f;
        pairing += f - zp;
        min_cell = min_cell.min(f - zp);
    }
    let tv = tv * hd;
    let pairing = pairing * hd;
    let div_res = (div_res * hd).sqrt();
    let g_norm = (g_norm * hd).sqrt();
    CalibrationReport {
        feasibility_excess: excess.max(0.0),
        divergence_residual: div_res,
        relative_divergence_residual: if g_norm > 0.0 { div_res / g_norm } else { div_res },
        pairing_residual: pairing,
        relative_pairing_residual: if tv > 0.0 { pairing / tv } else { 0.0 },
        min_cell_pairing: if min_cell.is_finite() { min_cell } else { 0.0 },
        total_variation: tv,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::unit_cube(2, n).unwrap())
    }

    #[test]
    fn constant_datum_is_fixed_point() {
        let grid = unit(16);
        let f = ScalarField::constant(grid, 0.7);
        let spec = ProblemSpec::rof(AnisotropyModel::euclidean(2).unwrap(), f, 5.0).unwrap();
        let r = solve(&spec, 100, 1e-8).unwrap();
        assert!(r.u.values().iter().all(|&v| (v - 0.7).abs() < 1e-15));
        assert_eq!(r.gap, 0.0);
        assert!(r.converged);
        assert!(r.z.divergence().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_of_constant_and_ramp() {
        let grid = unit(64);
        let model = AnisotropyModel::euclidean(2).unwrap();
        let u = ScalarField::constant(grid.clone(), 2.0);
        let spec = ProblemSpec::rof(model.clone(), u.clone(), 1.0).unwrap();
        assert_eq!(primal_energy(&u, &spec).unwrap(), 0.0);
        // |grad u| = 1 except on the last column
        let ramp = ScalarField::from_fn(grid, |x| x[0]);
        let tv = total_variation(&ramp, &model);
        assert!((tv - 63.0 / 64.0).abs() < 1e-12, "{tv}");
    }

    #[test]
    fn single_interface_energy() {
        let grid = unit(64);
        let model = AnisotropyModel::euclidean(2).unwrap();
        let stripe = ScalarField::from_fn(grid, |x| if x[0] > 0.5 { 1.0 } else { 0.0 });
        assert!((total_variation(&stripe, &model) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_pairing_is_total_variation() {
        let grid = unit(32);
        let model = AnisotropyModel::euclidean(2).unwrap();
        let u = ScalarField::from_fn(grid.clone(), |x| (x[0] * 3.0).sin() + x[1]);
        let z = VectorField::zeros(grid.clone());
        let g = ScalarField::zeros(grid);
        let rep = calibration_report(&u, &z, &g, &model);
        assert_eq!(rep.pairing_residual, rep.total_variation);
        assert_eq!(rep.divergence_residual, 0.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let grid = unit(8);
        let f = ScalarField::constant(grid.clone(), 0.0);
        let m = AnisotropyModel::euclidean(2).unwrap();
        assert!(ProblemSpec::rof(m.clone(), f.clone(), 0.0).is_err());
        assert!(ProblemSpec::rof(AnisotropyModel::euclidean(3).unwrap(), f.clone(), 1.0).is_err());
        let spec = ProblemSpec::rof(m, f, 1.0).unwrap();
        assert!(solve(&spec, 10, 0.0).is_err());
    }
}
