//! Solves the ROF problem for the indicator of a disc and compares the
//! plateau with `1 - 2/(λR)`.
//!
//! `cargo run --release --example rof_disc -- 128`

use std::sync::Arc;

use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::grid::{GridSpec, ScalarField};
use tvcalib::solver::{solve_with, verify_subgradient, ProblemSpec, SolverOptions};

fn main() -> tvcalib::Result<()> {
    let cells: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(128);
    let (radius, lambda) = (0.25, 32.0);
    let grid = Arc::new(GridSpec::unit_cube(2, cells)?);
    let f = ScalarField::from_fn(grid.clone(), |x| {
        f64::from(u8::from(
            (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) <= radius * radius,
        ))
    });
    let model = AnisotropyModel::euclidean(2)?;
    let spec = ProblemSpec::rof(model.clone(), f, lambda)?;
    let r = solve_with(&spec, &SolverOptions::default())?;

    let plateau = r.u.values()[grid.cell_containing(&[0.5, 0.5]).unwrap()];
    let expected = 1.0 - 2.0 / (lambda * radius);
    println!(
        "cells {cells}, iterations {}, relative gap {:.2e}",
        r.iterations, r.relative_gap
    );
    println!(
        "plateau {plateau:.5} (expected {expected:.5}, error {:.3}%)",
        100.0 * (plateau / expected - 1.0).abs()
    );
    let cal = verify_subgradient(&r, &model);
    println!(
        "feasibility excess {:.1e}, relative pairing residual {:.2e}, J(u) = {:.5}",
        cal.feasibility_excess, cal.relative_pairing_residual, cal.total_variation
    );
    Ok(())
}
