//! Level sets of grid functions and their measure-geometric diagnostics:
//! density ratios, discrete reduced-boundary normals, perimeters, the coarea
//! identity and the jump-set indicator.

use std::sync::Arc;

use serde::Serialize;

use crate::anisotropy::{norm, AnisotropyModel};
use crate::error::{Error, Result};
use crate::grid::{dist2, GridSpec, ScalarField};
use crate::solver::total_variation;

/// Norm ratio `|Dχ_E(B)| / |Dχ_E|(B)` below which a point is not treated as a
/// reduced-boundary point.
pub const REDUCED_RATIO: f64 = 0.5;

/// A subset `E` of the masked cells, typically `{u > s}` or `{u >= s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetView {
    grid: Arc<GridSpec>,
    threshold: f64,
    strict: bool,
    mask: Vec<bool>,
    boundary_cells: Vec<usize>,
}

/// `{u > s}` when `strict`, `{u >= s}` otherwise, restricted to the grid mask.
pub fn upper_level_set(u: &ScalarField, s: f64, strict: bool) -> LevelSetView {
    let grid = u.grid().clone();
    let mask = (0..grid.len())
        .map(|c| {
            let v = u.values()[c];
            grid.in_mask(c) && if strict { v > s } else { v >= s }
        })
        .collect();
    LevelSetView::build(grid, s, strict, mask)
}

impl LevelSetView {
    /// Arbitrary cell set; cells outside the grid mask are dropped.
    pub fn from_mask(grid: Arc<GridSpec>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::InvalidInput("set mask does not match the grid".into()));
        }
        let mask = mask
            .iter()
            .enumerate()
            .map(|(c, &m)| m && grid.in_mask(c))
            .collect();
        Ok(Self::build(grid, f64::NAN, true, mask))
    }

    /// Cells whose centers satisfy `pred`.
    pub fn from_predicate(grid: Arc<GridSpec>, mut pred: impl FnMut(&[f64]) -> bool) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let mask = (0..grid.len())
            .map(|c| {
                grid.center_into(c, &mut x);
                grid.in_mask(c) && pred(&x)
            })
            .collect();
        Self::build(grid, f64::NAN, true, mask)
    }

    fn build(grid: Arc<GridSpec>, threshold: f64, strict: bool, mask: Vec<bool>) -> Self {
        let boundary_cells = (0..grid.len())
            .filter(|&c| {
                grid.in_mask(c)
                    && (0..grid.dim()).any(|k| {
                        [1, -1].into_iter().any(|dir| {
                            grid.neighbor(c, k, dir)
                                .is_some_and(|nb| grid.in_mask(nb) && mask[nb] != mask[c])
                        })
                    })
            })
            .collect();
        LevelSetView {
            grid,
            threshold,
            strict,
            mask,
            boundary_cells,
        }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    /// `NaN` for sets not built from a threshold.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, c: usize) -> bool {
        self.mask[c]
    }

    /// Cells on either side of a face across which membership changes.
    pub fn boundary_cells(&self) -> &[usize] {
        &self.boundary_cells
    }

    /// Boundary cells that belong to `E`.
    pub fn inner_boundary_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary_cells.iter().copied().filter(|&c| self.mask[c])
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn is_full(&self) -> bool {
        (0..self.grid.len()).all(|c| !self.grid.in_mask(c) || self.mask[c])
    }

    /// `|E|` by cell counting.
    pub fn volume(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 * self.grid.cell_volume()
    }

    /// `|E ∩ B_rho(x)| / |B_rho(x) ∩ Ω|` by counting cell centers.
    pub fn density_ratio(&self, x: &[f64], rho: f64) -> Result<f64> {
        let cells = self.grid.cells_in_ball(x, rho);
        if cells.is_empty() {
            return Err(Error::EmptyRegion(format!(
                "ball of radius {rho} at {x:?} misses the domain"
            )));
        }
        let inside = cells.iter().filter(|&&c| self.mask[c]).count();
        Ok(inside as f64 / cells.len() as f64)
    }

    /// Normalized `Dχ_E(B_rho(x))`, summed over the membership-changing faces
    /// whose centers lie in the ball. Points into `E`.
    pub fn boundary_normal(&self, x: &[f64], rho: f64) -> Result<NormalEstimate> {
        let grid = &self.grid;
        let d = grid.dim();
        let h = grid.spacing();
        let face = h.powi(d as i32 - 1);
        let mut sum = vec![0.0; d];
        let mut total = 0.0;
        let reach = rho + h;
        let lo: Vec<f64> = x.iter().map(|c| c - reach).collect();
        let hi: Vec<f64> = x.iter().map(|c| c + reach).collect();
        let mut fc = vec![0.0; d];
        grid.for_each_cell_near(&lo, &hi, |c, xc| {
            for k in 0..d {
                if !grid.edge_valid(k, c) {
                    continue;
                }
                let nb = c + grid.stride(k);
                if self.mask[c] == self.mask[nb] {
                    continue;
                }
                fc.copy_from_slice(xc);
                fc[k] += 0.5 * h;
                if dist2(&fc, x) <= rho * rho {
                    let jump = f64::from(u8::from(self.mask[nb])) - f64::from(u8::from(self.mask[c]));
                    sum[k] += jump * face;
                    total += face;
                }
            }
        });
        if total == 0.0 {
            return Err(Error::EmptyRegion(format!(
                "no boundary face within {rho} of {x:?}"
            )));
        }
        let len = norm(&sum);
        let ratio = len / total;
        let normal = if len > 0.0 {
            sum.iter().map(|v| v / len).collect()
        } else {
            sum
        };
        Ok(NormalEstimate { normal, ratio })
    }

    /// `J(χ_E)`: the anisotropic total variation of the indicator, i.e. the
    /// perimeter measured with the same forward differences as the solver.
    pub fn perimeter(&self, model: &AnisotropyModel) -> f64 {
        let values = self.mask.iter().map(|&m| f64::from(u8::from(m))).collect();
        let chi = ScalarField::new(self.grid.clone(), values).expect("indicator is finite");
        total_variation(&chi, model)
    }

    /// `n` cell centers spread along the inner boundary, ordered by angle
    /// (in the first two coordinates) around the boundary centroid.
    pub fn sample_boundary_points(&self, n: usize) -> Vec<Vec<f64>> {
        let cells: Vec<usize> = self.inner_boundary_cells().collect();
        if cells.is_empty() || n == 0 {
            return Vec::new();
        }
        let centers: Vec<Vec<f64>> = cells.iter().map(|&c| self.grid.center(c)).collect();
        let d = self.grid.dim();
        let centroid: Vec<f64> = (0..d)
            .map(|k| centers.iter().map(|x| x[k]).sum::<f64>() / centers.len() as f64)
            .collect();
        let mut order: Vec<(f64, usize)> = centers
            .iter()
            .enumerate()
            .map(|(i, x)| ((x[1] - centroid[1]).atan2(x[0] - centroid[0]), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let m = order.len();
        let take = n.min(m);
        (0..take)
            .map(|j| centers[order[j * m / take].1].clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalEstimate {
    /// Unit inward normal (zero if the face sum cancels exactly).
    pub normal: Vec<f64>,
    /// `|Dχ_E(B)| / |Dχ_E|(B)` in `[0, 1]`.
    pub ratio: f64,
}

impl NormalEstimate {
    pub fn is_reduced(&self) -> bool {
        self.ratio >= REDUCED_RATIO
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoareaCheck {
    /// `sum_k J(χ_{u > s_k}) Δs`.
    pub level_sum: f64,
    /// `J(u)`.
    pub total_variation: f64,
    pub relative_error: f64,
}

/// Compares `J(u)` with the level-set integral over `n_thresholds` midpoints of
/// a uniform ladder on `[min u, max u]`.
pub fn coarea_check(u: &ScalarField, model: &AnisotropyModel, n_thresholds: usize) -> Result<CoareaCheck> {
    if n_thresholds < 2 {
        return Err(Error::Precondition(
            "coarea check needs at least 2 thresholds".into(),
        ));
    }
    let tv = total_variation(u, model);
    let (lo, hi) = u.range();
    if hi <= lo {
        return Ok(CoareaCheck {
            level_sum: 0.0,
            total_variation: tv,
            relative_error: 0.0,
        });
    }
    let ds = (hi - lo) / n_thresholds as f64;
    let level_sum: f64 = (0..n_thresholds)
        .map(|k| upper_level_set(u, lo + (k as f64 + 0.5) * ds, true).perimeter(model) * ds)
        .sum();
    Ok(CoareaCheck {
        level_sum,
        total_variation: tv,
        relative_error: if tv > 0.0 {
            (level_sum - tv).abs() / tv
        } else {
            0.0
        },
    })
}

/// `min over radii of rho^{1-d} sum_{B_rho(x)} |grad u| h^d`. Bounded away from
/// zero on jumps, of order `rho` at points where `u` is Lipschitz.
pub fn theta_indicator(u: &ScalarField, x: &[f64], radii: &[f64]) -> Result<f64> {
    let grid = u.grid();
    check_radii(grid, radii)?;
    let grad = u.gradient();
    let d = grid.dim();
    let mut p = vec![0.0; d];
    let mut best = f64::INFINITY;
    for &rho in radii {
        let mass: f64 = grid
            .cells_in_ball(x, rho)
            .into_iter()
            .map(|c| {
                grad.at_into(c, &mut p);
                norm(&p)
            })
            .sum::<f64>()
            * grid.cell_volume();
        best = best.min(mass * rho.powi(1 - d as i32));
    }
    Ok(best)
}

pub(crate) fn check_radii(grid: &GridSpec, radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::Precondition("empty radius list".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(format!(
            "radii must strictly decrease: {radii:?}"
        )));
    }
    let min = 2.0 * grid.spacing() * (1.0 - 1e-12);
    if radii.iter().any(|&r| r < min) {
        return Err(Error::Precondition(format!(
            "radii must be at least 2h = {}: {radii:?}",
            2.0 * grid.spacing()
        )));
    }
    Ok(())
}

/// A level `s` such that cell `c` lies on the boundary of `{u > s}`, whenever
/// `u` jumps across one of the faces of `c`.
pub fn level_through(u: &ScalarField, c: usize) -> Option<f64> {
    let grid = u.grid();
    if !grid.in_mask(c) {
        return None;
    }
    let v = u.values()[c];
    (0..grid.dim()).find_map(|k| {
        [1, -1].into_iter().find_map(|dir| {
            grid.neighbor(c, k, dir)
                .filter(|&nb| grid.in_mask(nb) && u.values()[nb] != v)
                .map(|nb| 0.5 * (v + u.values()[nb]))
        })
    })
}
