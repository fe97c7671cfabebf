//! Discrete pairing `[z, Du]`, normal traces on level-set boundaries and
//! blow-up diagnostics of the calibration field.

use serde::Serialize;

use crate::anisotropy::{norm, AnisotropyModel};
use crate::error::{Error, Result};
use crate::geometry::{check_radii, LevelSetView};
use crate::grid::{RowSums, ScalarField, VectorField};

/// `<[z, Du], psi> = -sum u psi div z h^d - sum u z . grad psi h^d`.
///
/// In the second sum the value of `u` multiplying `z_k(c)` is taken at
/// `c + e_k`, the far end of the edge carrying that component. With this
/// staggering the pairing equals `sum psi z . grad u h^d` exactly.
pub fn pairing_apply(z: &VectorField, u: &ScalarField, psi: &ScalarField) -> Result<f64> {
    let grid = z.grid();
    if u.grid() != grid || psi.grid() != grid {
        return Err(Error::InvalidInput("fields live on different grids".into()));
    }
    if let Some(c) =
        (0..grid.len()).find(|&c| psi.values()[c] != 0.0 && (!grid.in_mask(c) || grid.is_mask_boundary(c)))
    {
        return Err(Error::Precondition(format!(
            "test function must vanish outside the mask interior (cell {c})"
        )));
    }
    let n = grid.len();
    let div = z.divergence();
    let grad_psi = psi.gradient();
    let (uv, pv) = (u.values(), psi.values());
    let mut first = 0.0;
    for c in 0..n {
        first += uv[c] * pv[c] * div.values()[c];
    }
    let mut second = 0.0;
    for k in 0..grid.dim() {
        let s = grid.stride(k);
        let zk = z.component(k);
        let gk = grad_psi.component(k);
        for c in 0..n - s {
            second += uv[c + s] * zk[c] * gk[c];
        }
    }
    Ok(-(first + second) * grid.cell_volume())
}

/// `sum psi z . grad u h^d`.
pub fn pairing_density_sum(z: &VectorField, u: &ScalarField, psi: &ScalarField) -> f64 {
    let grad = u.gradient();
    let n = z.grid().len();
    let mut s = 0.0;
    for k in 0..z.grid().dim() {
        let (zk, gk) = (z.component(k), grad.component(k));
        for c in 0..n {
            s += psi.values()[c] * zk[c] * gk[c];
        }
    }
    s * z.grid().cell_volume()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalTrace {
    /// Mean of `z . alpha` over the cylinder.
    pub value: f64,
    /// The axis `alpha`: the estimated inward normal.
    pub normal: Vec<f64>,
    pub normal_ratio: f64,
    pub r: f64,
    pub rho: f64,
}

/// Estimates `[z, ν^E](x)` as a cylinder average with axis `boundary_normal(E, x, rho)`.
pub fn normal_trace(z: &VectorField, e: &LevelSetView, x: &[f64], r: f64, rho: f64) -> Result<NormalTrace> {
    check_boundary_point(e, x)?;
    let est = e.boundary_normal(x, rho)?;
    if !est.is_reduced() {
        return Err(Error::NonReducedPoint {
            ratio: est.ratio,
            threshold: crate::geometry::REDUCED_RATIO,
        });
    }
    let value = z.cylinder_average(x, &est.normal, r, rho)?;
    Ok(NormalTrace {
        value,
        normal: est.normal,
        normal_ratio: est.ratio,
        r,
        rho,
    })
}

fn check_boundary_point(e: &LevelSetView, x: &[f64]) -> Result<()> {
    let c = e
        .grid()
        .cell_containing(x)
        .ok_or_else(|| Error::Domain(format!("{x:?} is outside the grid")))?;
    if e.boundary_cells().binary_search(&c).is_err() {
        return Err(Error::Precondition(format!(
            "{x:?} is not in a boundary cell of the set"
        )));
    }
    Ok(())
}

/// Ball averages `z_rho(x)` over a decreasing list of radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupSeries {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub averages: Vec<Vec<f64>>,
    /// Mean over `y` in `B_rho(x)` of `|z_{s rho}(y) - z_rho(x)|`, `s = OSCILLATION_SUBRADIUS`.
    pub oscillations: Vec<f64>,
    /// `∇_p F(x, ν)` when the series was built against a boundary normal.
    pub reference: Option<Vec<f64>>,
    pub normal: Option<Vec<f64>>,
    pub lebesgue_like: bool,
}

/// Fraction of `max |z|` below which the last oscillation counts as small.
pub const LEBESGUE_OSCILLATION: f64 = 0.1;
/// Oscillations compare `z_rho(x)` with averages over balls of radius
/// `OSCILLATION_SUBRADIUS * rho` centred in `B_rho(x)`.
pub const OSCILLATION_SUBRADIUS: f64 = 1.0;
/// Above this many cells the outer mean runs over a regular sub-lattice.
pub const OSCILLATION_SAMPLES: usize = 4096;

impl BlowupSeries {
    /// `radius,avg_0,..,avg_{d-1},oscillation` with a header row.
    pub fn to_csv(&self) -> String {
        let d = self.center.len();
        let mut out = String::from("radius");
        for k in 0..d {
            out.push_str(&format!(",avg_{k}"));
        }
        out.push_str(",oscillation\n");
        for (i, r) in self.radii.iter().enumerate() {
            out.push_str(&format!("{r}"));
            for v in &self.averages[i] {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", self.oscillations[i]));
        }
        out
    }

    /// `|z_rho - reference|` per radius.
    pub fn residuals(&self) -> Option<Vec<f64>> {
        let r = self.reference.as_ref()?;
        Some(
            self.averages
                .iter()
                .map(|a| norm(&a.iter().zip(r).map(|(x, y)| x - y).collect::<Vec<_>>()))
                .collect(),
        )
    }

    pub fn oscillation_decreasing(&self) -> bool {
        self.oscillations.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn blowup(z: &VectorField, x: &[f64], radii: &[f64]) -> Result<BlowupSeries> {
    let grid = z.grid();
    check_radii(grid, radii)?;
    let d = grid.dim();
    let mut averages = Vec::with_capacity(radii.len());
    let mut oscillations = Vec::with_capacity(radii.len());
    let sums = RowSums::new(z);
    for &rho in radii {
        let cells = grid.cells_in_ball(x, rho);
        if cells.is_empty() {
            return Err(Error::EmptyRegion(format!(
                "ball of radius {rho} at {x:?} is empty"
            )));
        }
        let avg = z.mean_over(&cells);
        let sub = OSCILLATION_SUBRADIUS * rho;
        let mut y = vec![0.0; d];
        // regular sub-lattice of the ball once it holds many cells
        let stride = ((cells.len() as f64 / OSCILLATION_SAMPLES as f64)
            .powf(1.0 / d as f64)
            .ceil() as usize)
            .max(1);
        let sample: Vec<usize> = cells
            .iter()
            .copied()
            .filter(|&c| grid.multi_index(c)[..d].iter().all(|i| i % stride == 0))
            .collect();
        let sample = if sample.is_empty() { cells.clone() } else { sample };
        let osc = sample
            .iter()
            .map(|&c| {
                grid.center_into(c, &mut y);
                let inner = sums.ball_mean(&y, sub).expect("ball contains its center cell");
                inner
                    .iter()
                    .zip(&avg)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum::<f64>()
            / sample.len() as f64;
        averages.push(avg);
        oscillations.push(osc);
    }
    let mut series = BlowupSeries {
        center: x.to_vec(),
        radii: radii.to_vec(),
        averages,
        oscillations,
        reference: None,
        normal: None,
        lebesgue_like: false,
    };
    let last = *series.oscillations.last().unwrap();
    series.lebesgue_like =
        radii.len() >= 3 && series.oscillation_decreasing() && last <= LEBESGUE_OSCILLATION * z.max_norm();
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeqnuCheck {
    /// `|z_rho(x) - ∇_p F(x, ν̂)|` at the smallest radius.
    pub residual: f64,
    pub residuals: Vec<f64>,
    pub normal: Vec<f64>,
    pub normal_ratio: f64,
    pub series: BlowupSeries,
}

/// Compares the blow-up of `z` at a boundary point of `E` with `∇_p F(x, ν̂)`,
/// `ν̂` being the discrete inward normal measured at `normal_radius`.
pub fn verify_zeqnu(
    z: &VectorField,
    e: &LevelSetView,
    model: &AnisotropyModel,
    x: &[f64],
    radii: &[f64],
    normal_radius: f64,
) -> Result<ZeqnuCheck> {
    check_boundary_point(e, x)?;
    let est = e.boundary_normal(x, normal_radius)?;
    if !est.is_reduced() {
        return Err(Error::NonReducedPoint {
            ratio: est.ratio,
            threshold: crate::geometry::REDUCED_RATIO,
        });
    }
    let reference = model.grad(x, &est.normal)?;
    let mut series = blowup(z, x, radii)?;
    series.reference = Some(reference);
    series.normal = Some(est.normal.clone());
    let residuals = series.residuals().expect("reference set");
    Ok(ZeqnuCheck {
        residual: *residuals.last().unwrap(),
        residuals,
        normal: est.normal,
        normal_ratio: est.ratio,
        series,
    })
}
