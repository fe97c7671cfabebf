//! Blow-up of the dual certificate at boundary points of a solved disc: the
//! ball averages approach `∇F(ν)` and the oscillation shrinks.

use std::sync::Arc;

use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::geometry::upper_level_set;
use tvcalib::grid::{GridSpec, ScalarField};
use tvcalib::pairing::verify_zeqnu;
use tvcalib::solver::{solve_with, ProblemSpec, SolverOptions};

fn main() -> tvcalib::Result<()> {
    let grid = Arc::new(GridSpec::unit_cube(2, 128)?);
    let h = grid.spacing();
    let f = ScalarField::from_fn(grid.clone(), |x| {
        f64::from(u8::from((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) <= 0.0625))
    });
    let model = AnisotropyModel::euclidean(2)?;
    let r = solve_with(
        &ProblemSpec::rof(model.clone(), f, 32.0)?,
        &SolverOptions::default(),
    )?;
    let (lo, hi) = r.u.range();
    let e = upper_level_set(&r.u, 0.5 * (lo + hi), false);
    let radii = [16.0 * h, 8.0 * h, 4.0 * h];
    for x in e.sample_boundary_points(6) {
        let check = verify_zeqnu(&r.z, &e, &model, &x, &radii, 8.0 * h)?;
        let osc: Vec<String> = check
            .series
            .oscillations
            .iter()
            .map(|o| format!("{o:.3}"))
            .collect();
        println!(
            "x = ({:.3}, {:.3}) ν = ({:+.3}, {:+.3}) residuals {:?} oscillations [{}]",
            x[0],
            x[1],
            check.normal[0],
            check.normal[1],
            check
                .residuals
                .iter()
                .map(|v| (v * 1e3).round() / 1e3)
                .collect::<Vec<_>>(),
            osc.join(", ")
        );
    }
    Ok(())
}
