//! Checks the closed-form calibration of a disc, `z = -(x - c)/R` inside and
//! `-R (x - c)/|x - c|^2` outside, against the sampled indicator and against
//! the discrete ROF minimizer.

use std::sync::Arc;

use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::geometry::LevelSetView;
use tvcalib::grid::{GridSpec, ScalarField, VectorField};
use tvcalib::pairing::normal_trace;
use tvcalib::solver::{calibration_report, solve_with, ProblemSpec, SolverOptions};

fn main() -> tvcalib::Result<()> {
    let (cells, radius, lambda) = (256, 0.25, 32.0);
    let grid = Arc::new(GridSpec::unit_cube(2, cells)?);
    let h = grid.spacing();
    let z = VectorField::from_fn(grid.clone(), |x| {
        let (a, b) = (x[0] - 0.5, x[1] - 0.5);
        let r2 = a * a + b * b;
        let s = if r2 <= radius * radius {
            1.0 / radius
        } else {
            radius / r2
        };
        vec![-s * a, -s * b]
    });
    let e = LevelSetView::from_predicate(grid.clone(), |x| {
        (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) <= radius * radius
    });
    let chi = ScalarField::new(
        grid.clone(),
        e.mask().iter().map(|&m| f64::from(u8::from(m))).collect(),
    )?;
    let model = AnisotropyModel::euclidean(2)?;

    let g = ScalarField::new(grid.clone(), z.divergence().values().iter().map(|v| -v).collect())?;
    let cal = calibration_report(&chi, &z, &g, &model);
    println!(
        "indicator: J = {:.5} (2πR = {:.5}), relative pairing residual {:.3}",
        cal.total_variation,
        2.0 * std::f64::consts::PI * radius,
        cal.relative_pairing_residual
    );

    let r = solve_with(
        &ProblemSpec::rof(model.clone(), chi, lambda)?,
        &SolverOptions::default(),
    )?;
    let cal = calibration_report(&r.u, &z, &r.g, &model);
    println!(
        "ROF minimizer: relative pairing residual {:.4}",
        cal.relative_pairing_residual
    );

    let mut worst: f64 = 0.0;
    for x in e.sample_boundary_points(32) {
        let t = normal_trace(&z, &e, &x, 4.0 * h, 16.0 * h)?;
        worst = worst.max((t.value - 1.0).abs());
    }
    println!("normal trace at 32 boundary points: max |[z, ν] - 1| = {worst:.4}");
    Ok(())
}
