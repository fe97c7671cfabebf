//! The discrete pairing `[z, Du]` tested against a bump: the weak form
//! `-Σ uψ div z - Σ u z·∇ψ` agrees with `Σ ψ z·∇u` to rounding.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvcalib::grid::{GridSpec, ScalarField, VectorField};
use tvcalib::pairing::{pairing_apply, pairing_density_sum};

fn main() -> tvcalib::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (dim, cells) in [(2, 64), (3, 32)] {
        let grid = Arc::new(GridSpec::unit_cube(dim, cells)?);
        let u = ScalarField::from_fn(grid.clone(), |_| rng.gen_range(-1.0..1.0));
        let z = VectorField::from_fn(grid.clone(), |_| {
            (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
        });
        let psi = ScalarField::from_fn(grid.clone(), |x| {
            let r2: f64 = x.iter().map(|c| (c - 0.5).powi(2)).sum();
            (0.16 - r2).max(0.0).powi(2)
        });
        let weak = pairing_apply(&z, &u, &psi)?;
        let strong = pairing_density_sum(&z, &u, &psi);
        println!(
            "{dim}-D {cells}^{dim}: weak {weak:+.12e} strong {strong:+.12e} relative difference {:.1e}",
            (weak - strong).abs() / strong.abs()
        );
    }
    Ok(())
}
