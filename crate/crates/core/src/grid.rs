//! Uniform `d`-dimensional grids (`d` = 2 or 3) with a cell mask, and the
//! finite-difference calculus used everywhere else.
//!
//! Cells are stored with axis 0 varying fastest. The gradient is the forward
//! difference `(u[c + e_k] - u[c]) / h` on edges whose two cells both lie in the
//! mask and zero otherwise (homogeneous Neumann). The divergence is its exact
//! negative adjoint, so `sum(u * div z) = -sum(grad u . z)` holds for every pair
//! of fields, not only for compactly supported ones.

use std::sync::Arc;

use crate::anisotropy::AnisotropyModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    shape: Vec<usize>,
    spacing: f64,
    origin: Vec<f64>,
    mask: Vec<bool>,
    strides: Vec<usize>,
    // 1.0 where the forward edge along the axis joins two masked cells
    edge_weight: Vec<Vec<f64>>,
}

impl GridSpec {
    /// Full-mask grid whose lower corner is `origin`.
    pub fn new(shape: Vec<usize>, spacing: f64, origin: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        Self::with_mask(shape, spacing, origin, vec![true; len])
    }

    pub fn with_mask(shape: Vec<usize>, spacing: f64, origin: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let d = shape.len();
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidInput(format!(
                "grid dimension must be 2 or 3, got {d}"
            )));
        }
        if origin.len() != d {
            return Err(Error::InvalidInput(
                "origin dimension does not match shape".into(),
            ));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidInput("grid has an empty axis".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidInput(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let len: usize = shape.iter().product();
        if mask.len() != len {
            return Err(Error::InvalidInput(format!(
                "mask has {} cells, grid has {len}",
                mask.len()
            )));
        }
        if !mask.iter().any(|&m| m) {
            return Err(Error::InvalidInput("mask is empty".into()));
        }
        let mut strides = vec![1; d];
        for k in 1..d {
            strides[k] = strides[k - 1] * shape[k - 1];
        }
        let mut grid = GridSpec {
            shape,
            spacing,
            origin,
            mask,
            strides,
            edge_weight: Vec::new(),
        };
        grid.edge_weight = (0..d)
            .map(|k| {
                (0..len)
                    .map(|c| f64::from(u8::from(grid.forward_edge(c, k))))
                    .collect()
            })
            .collect();
        Ok(grid)
    }

    /// The unit square or cube `[0, 1]^d` split into `cells` cells per axis.
    pub fn unit_cube(dim: usize, cells: usize) -> Result<Self> {
        Self::new(vec![cells; dim], 1.0 / cells as f64, vec![0.0; dim])
    }

    /// Grid of `cells` cells per axis covering `[lo, hi]^d`, masked to the cells
    /// whose centers lie in the ball `B_radius(center)`.
    pub fn ball(dim: usize, cells: usize, lo: f64, hi: f64, center: &[f64], radius: f64) -> Result<Self> {
        let h = (hi - lo) / cells as f64;
        let mut g = Self::new(vec![cells; dim], h, vec![lo; dim])?;
        let mask = (0..g.len())
            .map(|c| dist2(&g.center(c), center) <= radius * radius)
            .collect();
        g = Self::with_mask(g.shape.clone(), h, g.origin.clone(), mask)?;
        Ok(g)
    }

    fn forward_edge(&self, c: usize, k: usize) -> bool {
        let i = (c / self.strides[k]) % self.shape[k];
        i + 1 < self.shape[k] && self.mask[c] && self.mask[c + self.strides[k]]
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn in_mask(&self, c: usize) -> bool {
        self.mask[c]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Whether the forward edge `c -> c + e_axis` joins two masked cells.
    pub fn edge_valid(&self, axis: usize, c: usize) -> bool {
        self.edge_weight[axis][c] != 0.0
    }

    pub(crate) fn edge_weights(&self, axis: usize) -> &[f64] {
        &self.edge_weight[axis]
    }

    pub fn index_of(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, c: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for k in 0..self.dim() {
            out[k] = (c / self.strides[k]) % self.shape[k];
        }
        out
    }

    pub fn center(&self, c: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(c, &mut x);
        x
    }

    pub fn center_into(&self, c: usize, x: &mut [f64]) {
        for k in 0..self.dim() {
            let i = (c / self.strides[k]) % self.shape[k];
            x[k] = self.origin[k] + (i as f64 + 0.5) * self.spacing;
        }
    }

    /// Cell whose closed box contains `x` (ties go to the upper cell).
    pub fn cell_containing(&self, x: &[f64]) -> Option<usize> {
        let mut c = 0;
        for k in 0..self.dim() {
            let t = ((x[k] - self.origin[k]) / self.spacing).floor();
            if t < 0.0 || t >= self.shape[k] as f64 {
                return None;
            }
            c += t as usize * self.strides[k];
        }
        Some(c)
    }

    /// Neighbor of `c` one step along `axis` in direction `dir` (+1 or -1), if inside the grid.
    pub fn neighbor(&self, c: usize, axis: usize, dir: i32) -> Option<usize> {
        let i = (c / self.strides[axis]) % self.shape[axis];
        match dir {
            1 if i + 1 < self.shape[axis] => Some(c + self.strides[axis]),
            -1 if i > 0 => Some(c - self.strides[axis]),
            _ => None,
        }
    }

    /// Masked cell with at least one face neighbor outside the mask or the grid.
    pub fn is_mask_boundary(&self, c: usize) -> bool {
        self.mask[c]
            && (0..self.dim()).any(|k| {
                [1, -1].iter().any(|&dir| match self.neighbor(c, k, dir) {
                    Some(n) => !self.mask[n],
                    None => true,
                })
            })
    }

    /// Calls `f` for every masked cell whose center lies in the axis box
    /// `[lo, hi]` (inclusive, per axis) after the predicate on the center holds.
    pub(crate) fn for_each_cell_near(&self, lo: &[f64], hi: &[f64], mut f: impl FnMut(usize, &[f64])) {
        let d = self.dim();
        let mut first = [0usize; 3];
        let mut last = [0usize; 3];
        for k in 0..d {
            let a = ((lo[k] - self.origin[k]) / self.spacing - 0.5).ceil();
            let b = ((hi[k] - self.origin[k]) / self.spacing - 0.5).floor();
            let a = a.max(0.0);
            let b = b.min(self.shape[k] as f64 - 1.0);
            if a > b {
                return;
            }
            first[k] = a as usize;
            last[k] = b as usize;
        }
        let mut idx = first;
        let mut x = [0.0; 3];
        loop {
            let c: usize = (0..d).map(|k| idx[k] * self.strides[k]).sum();
            if self.mask[c] {
                for k in 0..d {
                    x[k] = self.origin[k] + (idx[k] as f64 + 0.5) * self.spacing;
                }
                f(c, &x[..d]);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                if idx[k] < last[k] {
                    idx[k] += 1;
                    break;
                }
                idx[k] = first[k];
                k += 1;
            }
        }
    }

    /// Masked cells whose centers lie in the closed ball `B_radius(center)`.
    pub fn cells_in_ball(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
        let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.for_each_cell_near(&lo, &hi, |c, x| {
            if dist2(x, center) <= r2 {
                out.push(c);
            }
        });
        out
    }
}

/// Prefix sums of a vector field and of the mask along axis 0; ball sums
/// then cost one lookup pair per row.
pub(crate) struct RowSums<'a> {
    grid: &'a GridSpec,
    rows: usize,
    // entry ((k * rows + row) * (shape_0 + 1) + i); component `d` counts cells
    sums: Vec<f64>,
}

impl<'a> RowSums<'a> {
    pub(crate) fn new(z: &'a VectorField) -> Self {
        let grid = z.grid.as_ref();
        let (n, d) = (grid.len(), grid.dim());
        let s0 = grid.shape[0];
        let rows = n / s0;
        let w = s0 + 1;
        let mut sums = vec![0.0; (d + 1) * rows * w];
        for k in 0..=d {
            for row in 0..rows {
                let base = (k * rows + row) * w;
                let mut acc = 0.0;
                for i in 0..s0 {
                    let c = row * s0 + i;
                    if grid.mask[c] {
                        acc += if k < d { z.values[k * n + c] } else { 1.0 };
                    }
                    sums[base + i + 1] = acc;
                }
            }
        }
        RowSums { grid, rows, sums }
    }

    /// Mean of the field over masked cells with centers in the closed ball,
    /// `None` when there are none.
    pub(crate) fn ball_mean(&self, center: &[f64], radius: f64) -> Option<Vec<f64>> {
        let g = self.grid;
        let d = g.dim();
        let (h, w) = (g.spacing, g.shape[0] + 1);
        let r2 = radius * radius;
        let range = |k: usize, lo: f64, hi: f64| -> Option<(usize, usize)> {
            let a = ((lo - g.origin[k]) / h - 0.5).ceil().max(0.0);
            let b = ((hi - g.origin[k]) / h - 0.5)
                .floor()
                .min(g.shape[k] as f64 - 1.0);
            (a <= b).then_some((a as usize, b as usize))
        };
        let mut acc = vec![0.0; d + 1];
        let mut visit = |row: usize, dy2: f64| {
            if dy2 > r2 {
                return;
            }
            let half = (r2 - dy2).sqrt();
            if let Some((a, b)) = range(0, center[0] - half, center[0] + half) {
                for (k, v) in acc.iter_mut().enumerate() {
                    let base = (k * self.rows + row) * w;
                    *v += self.sums[base + b + 1] - self.sums[base + a];
                }
            }
        };
        let coord = |k: usize, i: usize| g.origin[k] + (i as f64 + 0.5) * h;
        match d {
            1 => visit(0, 0.0),
            2 => {
                let (a, b) = range(1, center[1] - radius, center[1] + radius)?;
                for j in a..=b {
                    visit(j, (coord(1, j) - center[1]).powi(2));
                }
            }
            _ => {
                let (a1, b1) = range(1, center[1] - radius, center[1] + radius)?;
                let (a2, b2) = range(2, center[2] - radius, center[2] + radius)?;
                for l in a2..=b2 {
                    let dz2 = (coord(2, l) - center[2]).powi(2);
                    for j in a1..=b1 {
                        visit(j + g.shape[1] * l, dz2 + (coord(1, j) - center[1]).powi(2));
                    }
                }
            }
        }
        let count = acc[d];
        (count > 0.0).then(|| acc[..d].iter().map(|v| v / count).collect())
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<GridSpec>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(c) = (0..grid.len()).find(|&c| grid.in_mask(c) && !values[c].is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at masked cell {c}"
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Arc<GridSpec>, value: f64) -> Self {
        let values = vec![value; grid.len()];
        ScalarField { grid, values }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Arc<GridSpec>, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|c| {
                grid.center_into(c, &mut x);
                f(&x)
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Minimum and maximum over masked cells.
    pub fn range(&self) -> (f64, f64) {
        self.masked()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn masked(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(c, _)| self.grid.in_mask(*c))
            .map(|(c, v)| (c, *v))
    }

    /// Sum over masked cells of `f(value) * h^d`.
    pub fn integrate(&self) -> f64 {
        self.masked().map(|(_, v)| v).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn gradient(&self) -> VectorField {
        let mut out = vec![0.0; self.grid.len() * self.grid.dim()];
        gradient_into(&self.grid, &self.values, &mut out);
        VectorField {
            grid: self.grid.clone(),
            values: out,
            feasible: None,
        }
    }

    /// Mean of the values at masked cells whose centers lie in `B_radius(center)`.
    pub fn ball_average(&self, center: &[f64], radius: f64) -> Result<f64> {
        let cells = self.grid.cells_in_ball(center, radius);
        if cells.is_empty() {
            return Err(Error::EmptyRegion(format!(
                "ball of radius {radius} at {center:?} contains no masked cell"
            )));
        }
        Ok(cells.iter().map(|&c| self.values[c]).sum::<f64>() / cells.len() as f64)
    }
}

/// Per-cell `d`-vectors in the forward-staggered convention: component `k` of
/// cell `c` belongs to the edge `c -> c + e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<GridSpec>,
    // component-major: values[k * n + c]
    values: Vec<f64>,
    feasible: Option<bool>,
}

impl VectorField {
    pub fn zeros(grid: Arc<GridSpec>) -> Self {
        let values = vec![0.0; grid.len() * grid.dim()];
        VectorField {
            grid,
            values,
            feasible: None,
        }
    }

    /// Component-major values: `values[k * n_cells + c]`.
    pub fn from_components(grid: Arc<GridSpec>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * grid.dim() {
            return Err(Error::InvalidInput("vector field has the wrong length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("vector field has non-finite values".into()));
        }
        Ok(VectorField {
            grid,
            values,
            feasible: None,
        })
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Arc<GridSpec>, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Self {
        let (n, d) = (grid.len(), grid.dim());
        let mut values = vec![0.0; n * d];
        let mut x = vec![0.0; d];
        for c in 0..n {
            grid.center_into(c, &mut x);
            let v = f(&x);
            for k in 0..d {
                values[k * n + c] = v[k];
            }
        }
        VectorField {
            grid,
            values,
            feasible: None,
        }
    }

    pub fn constant(grid: Arc<GridSpec>, v: &[f64]) -> Self {
        let v = v.to_vec();
        Self::from_fn(grid, move |_| v.clone())
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn components(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, k: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn at(&self, c: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.grid.dim()];
        self.at_into(c, &mut v);
        v
    }

    pub fn at_into(&self, c: usize, out: &mut [f64]) {
        let n = self.grid.len();
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.values[k * n + c];
        }
    }

    pub fn divergence(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        divergence_into(&self.grid, &self.values, &mut out);
        ScalarField {
            grid: self.grid.clone(),
            values: out,
        }
    }

    /// Largest `F°(x, z(x))` over masked cells.
    pub fn max_polar(&self, model: &AnisotropyModel) -> f64 {
        let d = self.grid.dim();
        let mut x = vec![0.0; d];
        let mut v = vec![0.0; d];
        let mut worst = 0.0f64;
        for c in (0..self.grid.len()).filter(|&c| self.grid.in_mask(c)) {
            self.grid.center_into(c, &mut x);
            self.at_into(c, &mut v);
            worst = worst.max(model.polar_raw(&x, &v));
        }
        worst
    }

    /// Records whether `F°(x, z) <= 1 + tol` at every masked cell and returns it.
    pub fn mark_feasibility(&mut self, model: &AnisotropyModel, tol: f64) -> bool {
        let ok = self.max_polar(model) <= 1.0 + tol;
        self.feasible = Some(ok);
        ok
    }

    /// Last result of [`mark_feasibility`](Self::mark_feasibility), if still valid.
    pub fn feasible(&self) -> Option<bool> {
        self.feasible
    }

    /// Largest Euclidean norm over masked cells.
    pub fn max_norm(&self) -> f64 {
        let d = self.grid.dim();
        let mut v = vec![0.0; d];
        let mut worst = 0.0f64;
        for c in (0..self.grid.len()).filter(|&c| self.grid.in_mask(c)) {
            self.at_into(c, &mut v);
            worst = worst.max(crate::anisotropy::norm(&v));
        }
        worst
    }

    /// Componentwise mean over masked cells whose centers lie in `B_radius(center)`.
    pub fn ball_average(&self, center: &[f64], radius: f64) -> Result<Vec<f64>> {
        let cells = self.grid.cells_in_ball(center, radius);
        if cells.is_empty() {
            return Err(Error::EmptyRegion(format!(
                "ball of radius {radius} at {center:?} contains no masked cell"
            )));
        }
        Ok(self.mean_over(&cells))
    }

    pub(crate) fn mean_over(&self, cells: &[usize]) -> Vec<f64> {
        let n = self.grid.len();
        (0..self.grid.dim())
            .map(|k| cells.iter().map(|&c| self.values[k * n + c]).sum::<f64>() / cells.len() as f64)
            .collect()
    }

    /// Mean of `z . alpha` over masked cells whose centers lie in the cylinder
    /// `C_{r,rho}(x, alpha)`: half-height `r` along the unit vector `alpha` and
    /// cross-section radius `rho`.
    pub fn cylinder_average(&self, x: &[f64], alpha: &[f64], r: f64, rho: f64) -> Result<f64> {
        let d = self.grid.dim();
        let an = crate::anisotropy::norm(alpha);
        if !(an > 0.0 && r > 0.0 && rho > 0.0) {
            return Err(Error::InvalidInput(
                "cylinder needs a nonzero axis and positive r, rho".into(),
            ));
        }
        let alpha: Vec<f64> = alpha.iter().map(|a| a / an).collect();
        let reach = (r * r + rho * rho).sqrt();
        let lo: Vec<f64> = x.iter().map(|c| c - reach).collect();
        let hi: Vec<f64> = x.iter().map(|c| c + reach).collect();
        let n = self.grid.len();
        let (mut sum, mut count) = (0.0, 0usize);
        self.grid.for_each_cell_near(&lo, &hi, |c, y| {
            let along: f64 = (0..d).map(|k| (y[k] - x[k]) * alpha[k]).sum();
            let across2 = dist2(y, x) - along * along;
            if along.abs() < r && across2 < rho * rho {
                sum += (0..d).map(|k| self.values[k * n + c] * alpha[k]).sum::<f64>();
                count += 1;
            }
        });
        if count == 0 {
            return Err(Error::EmptyRegion(format!(
                "cylinder (r = {r}, rho = {rho}) at {x:?} contains no masked cell"
            )));
        }
        Ok(sum / count as f64)
    }
}

/// Forward-difference gradient into a component-major buffer.
pub(crate) fn gradient_into(grid: &GridSpec, u: &[f64], out: &mut [f64]) {
    let n = grid.len();
    let inv_h = 1.0 / grid.spacing();
    for k in 0..grid.dim() {
        let s = grid.stride(k);
        let w = grid.edge_weights(k);
        let g = &mut out[k * n..(k + 1) * n];
        for c in 0..n - s {
            g[c] = w[c] * (u[c + s] - u[c]) * inv_h;
        }
        g[n - s..].iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Negative adjoint of [`gradient_into`].
pub(crate) fn divergence_into(grid: &GridSpec, z: &[f64], out: &mut [f64]) {
    let n = grid.len();
    let inv_h = 1.0 / grid.spacing();
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..grid.dim() {
        let s = grid.stride(k);
        let w = grid.edge_weights(k);
        let zk = &z[k * n..(k + 1) * n];
        for c in 0..n {
            let mut v = w[c] * zk[c];
            if c >= s {
                v -= w[c - s] * zk[c - s];
            }
            out[c] += v * inv_h;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize) -> Arc<GridSpec> {
        Arc::new(GridSpec::unit_cube(2, n).unwrap())
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = ScalarField::constant(unit(8), 3.0).gradient();
        assert!(g.components().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_x0() {
        let grid = unit(16);
        let g = ScalarField::from_fn(grid.clone(), |x| x[0]).gradient();
        for c in 0..grid.len() {
            let [i, _, _] = grid.multi_index(c);
            let v = g.at(c);
            if i + 1 < 16 {
                assert!((v[0] - 1.0).abs() < 1e-12 && v[1] == 0.0);
            } else {
                assert_eq!(v[0], 0.0);
            }
        }
    }

    #[test]
    fn gradient_matches_index_arithmetic() {
        let grid = unit(8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = ScalarField::new(grid.clone(), vals.clone()).unwrap().gradient();
        for j in 0..8 {
            for i in 0..8 {
                let c = i + 8 * j;
                let gx = if i < 7 { (vals[c + 1] - vals[c]) * 8.0 } else { 0.0 };
                let gy = if j < 7 { (vals[c + 8] - vals[c]) * 8.0 } else { 0.0 };
                let v = g.at(c);
                assert!((v[0] - gx).abs() < 1e-12 && (v[1] - gy).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let grid = unit(16);
        let d = VectorField::constant(grid.clone(), &[0.3, -1.2]).divergence();
        let d2 = VectorField::from_fn(grid.clone(), |x| vec![x[0], 0.0]).divergence();
        for c in (0..grid.len()).filter(|&c| !grid.is_mask_boundary(c)) {
            assert!(d.values()[c].abs() < 1e-12);
            assert!((d2.values()[c] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_gradient_is_neumann() {
        let grid = Arc::new(GridSpec::ball(2, 32, 0.0, 1.0, &[0.5, 0.5], 0.4).unwrap());
        let g = ScalarField::from_fn(grid.clone(), |x| x[0] + x[1]).gradient();
        for c in 0..grid.len() {
            for k in 0..2 {
                if !grid.edge_valid(k, c) {
                    assert_eq!(g.component(k)[c], 0.0);
                }
            }
        }
    }

    #[test]
    fn ball_average_examples() {
        let grid = Arc::new(GridSpec::new(vec![64, 64], 1.0 / 32.0, vec![-1.0, -1.0]).unwrap());
        let c = ScalarField::constant(grid.clone(), 2.5);
        assert!((c.ball_average(&[0.1, 0.2], 0.3).unwrap() - 2.5).abs() < 1e-14);
        let x0 = ScalarField::from_fn(grid.clone(), |x| x[0]);
        assert!(x0.ball_average(&[0.0, 0.0], 0.5).unwrap().abs() < grid.spacing());
        assert!(matches!(
            c.ball_average(&[5.0, 5.0], 0.1),
            Err(Error::EmptyRegion(_))
        ));
    }

    #[test]
    fn cylinder_average_constant() {
        let grid = unit(64);
        let z = VectorField::constant(grid.clone(), &[0.25, 0.75]);
        let v = z
            .cylinder_average(&[0.5, 0.5], &[0.0, 1.0], 2.0 / 64.0, 0.2)
            .unwrap();
        assert!((v - 0.75).abs() < 1e-14);
        let e = VectorField::constant(grid, &[0.0, 1.0]);
        let v = e.cylinder_average(&[0.3, 0.4], &[0.0, 1.0], 0.05, 0.1).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(vec![4], 0.1, vec![0.0]).is_err());
        assert!(GridSpec::new(vec![4, 4], 0.0, vec![0.0, 0.0]).is_err());
        assert!(GridSpec::with_mask(vec![2, 2], 0.1, vec![0.0, 0.0], vec![false; 4]).is_err());
    }

    #[test]
    fn row_sums_agree_with_direct_means() {
        for dim in [2usize, 3] {
            let center = vec![0.1; dim];
            let g = Arc::new(GridSpec::ball(dim, 20, -1.0, 1.0, &center, 0.9).unwrap());
            let z = VectorField::from_fn(g.clone(), |x| x.iter().map(|v| (3.0 * v).sin() + v * v).collect());
            let sums = RowSums::new(&z);
            for (y, r) in [
                (vec![0.0; dim], 0.5),
                (vec![0.7; dim], 0.33),
                (vec![-0.95; dim], 0.2),
            ] {
                let cells = g.cells_in_ball(&y, r);
                let fast = sums.ball_mean(&y, r);
                if cells.is_empty() {
                    assert!(fast.is_none());
                    continue;
                }
                let direct = z.mean_over(&cells);
                for (a, b) in fast.unwrap().iter().zip(&direct) {
                    assert!((a - b).abs() < 1e-12, "{a} {b}");
                }
            }
        }
    }
}
