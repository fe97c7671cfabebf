//! Level sets of a solved ROF problem: coarea identity, density ratios and
//! a PBM snapshot of `{u > 1/2}` written to the temp directory.

use std::sync::Arc;

use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::geometry::{coarea_check, upper_level_set};
use tvcalib::grid::{GridSpec, ScalarField};
use tvcalib::io::save_pbm;
use tvcalib::solver::{solve_with, ProblemSpec, SolverOptions};

fn main() -> tvcalib::Result<()> {
    let grid = Arc::new(GridSpec::unit_cube(2, 96)?);
    let h = grid.spacing();
    let f = ScalarField::from_fn(grid.clone(), |x| {
        let square = (x[0] - 0.5).abs().max((x[1] - 0.5).abs()) <= 0.25;
        f64::from(u8::from(square))
    });
    let model = AnisotropyModel::preset("ellipse", 2)?;
    let r = solve_with(
        &ProblemSpec::rof(model.clone(), f, 48.0)?,
        &SolverOptions::default(),
    )?;

    let c = coarea_check(&r.u, &model, 128)?;
    println!(
        "J(u) = {:.5}, level-set sum = {:.5}, relative error {:.3}",
        c.total_variation, c.level_sum, c.relative_error
    );
    let (lo, hi) = r.u.range();
    let e = upper_level_set(&r.u, 0.5 * (lo + hi), false);
    let ratios: Vec<f64> = e
        .sample_boundary_points(32)
        .iter()
        .map(|x| e.density_ratio(x, 8.0 * h))
        .collect::<tvcalib::Result<_>>()?;
    let (min, max) = ratios
        .iter()
        .fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    println!("density ratios at 32 boundary points in [{min:.3}, {max:.3}]");
    println!(
        "|E| = {:.4}, anisotropic perimeter = {:.4}",
        e.volume(),
        e.perimeter(&model)
    );
    let path = std::env::temp_dir().join("tvcalib_level_set.pbm");
    save_pbm(&e, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
