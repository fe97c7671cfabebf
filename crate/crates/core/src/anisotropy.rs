//! Smooth elliptic one-homogeneous integrands `F(x, p)` and their polars.
//!
//! Three families are supported, all with closed-form polar functions and
//! gradients:
//!
//! * Euclidean: `F(x, p) = |p|`,
//! * weighted Euclidean: `F(x, p) = a(x) |p|` with `a > 0`,
//! * Riemannian: `F(x, p) = sqrt(p^T A(x) p)` with `A(x)` symmetric positive definite,
//!   whose polar is `F°(x, z) = sqrt(z^T A(x)^{-1} z)`.
//!
//! The ellipticity constant `c0` and the convexity modulus `delta` are measured
//! when a model is built, by sampling the weight or matrix field over a box.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Small dense symmetric matrix for `d <= 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Mat3 {
    m: [[f64; 3]; 3],
}

impl Mat3 {
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let d = v.len();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            *o = (0..d).map(|j| self.m[i][j] * v[j]).sum();
        }
    }

    fn quad(&self, v: &[f64]) -> f64 {
        let d = v.len();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += v[i] * self.m[i][j] * v[j];
            }
        }
        s
    }
}

/// Scalar weight `a(x)` of the weighted Euclidean family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum WeightProfile {
    Constant {
        value: f64,
    },
    /// `a(x) = base + slope . x`
    Affine {
        base: f64,
        slope: Vec<f64>,
    },
    /// `a(x) = base + amplitude * exp(-|x - center|^2 / width^2)`
    Bump {
        base: f64,
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
}

impl WeightProfile {
    fn at(&self, x: &[f64]) -> f64 {
        match self {
            WeightProfile::Constant { value } => *value,
            WeightProfile::Affine { base, slope } => {
                base + slope.iter().zip(x).map(|(s, xi)| s * xi).sum::<f64>()
            }
            WeightProfile::Bump {
                base,
                amplitude,
                center,
                width,
            } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c).powi(2)).sum();
                base + amplitude * (-r2 / (width * width)).exp()
            }
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        match self {
            WeightProfile::Constant { value } if !(value.is_finite() && *value > 0.0) => Err(
                Error::InvalidInput(format!("constant weight must be positive, got {value}")),
            ),
            WeightProfile::Affine { slope, .. } if slope.len() != dim => Err(Error::InvalidInput(format!(
                "affine weight slope has {} entries, expected {dim}",
                slope.len()
            ))),
            WeightProfile::Bump { center, width, .. } if center.len() != dim || *width <= 0.0 => {
                Err(Error::InvalidInput(
                    "bump weight needs a center of the model dimension and a positive width".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Matrix field `A(x)` of the Riemannian family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum MatrixProfile {
    /// Constant symmetric positive definite matrix, given row by row.
    Constant { matrix: Vec<Vec<f64>> },
    /// Two-dimensional field `R(t) diag(major, minor) R(t)^T` with `t = angle + twist * x_0`.
    Rotating {
        major: f64,
        minor: f64,
        angle: f64,
        twist: f64,
    },
}

/// Axis-aligned box over which `c0` and `delta` are measured.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub per_axis: usize,
}

impl SampleBox {
    pub fn unit(dim: usize) -> Self {
        SampleBox {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
            per_axis: 17,
        }
    }

    fn points(&self) -> Vec<Vec<f64>> {
        let d = self.lo.len();
        let n = self.per_axis.max(2);
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut k| {
                (0..d)
                    .map(|axis| {
                        let i = k % n;
                        k /= n;
                        self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (n - 1) as f64
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Euclidean,
    Weighted(WeightProfile),
    Riemannian {
        profile: MatrixProfile,
        // Cached matrix and inverse for the constant profile.
        fixed: Option<(Mat3, Mat3)>,
    },
}

/// Family tag of a model, for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Euclidean,
    Weighted,
    Riemannian,
}

/// An evaluable anisotropy `F(x, p)` with closed-form polar and gradients.
///
/// Immutable after construction; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropyModel {
    kind: Kind,
    dim: usize,
    c0: f64,
    delta: f64,
    polar_delta: f64,
    metric_bound: f64,
}

fn check_dim(dim: usize) -> Result<()> {
    if (2..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "dimension must be 2 or 3, got {dim}"
        )))
    }
}

fn rotating(major: f64, minor: f64, t: f64) -> (Mat3, Mat3) {
    let (s, c) = t.sin_cos();
    let mut a = Mat3 { m: [[0.0; 3]; 3] };
    let mut inv = Mat3 { m: [[0.0; 3]; 3] };
    a.m[0][0] = major * c * c + minor * s * s;
    a.m[1][1] = major * s * s + minor * c * c;
    a.m[0][1] = (major - minor) * c * s;
    a.m[1][0] = a.m[0][1];
    inv.m[0][0] = c * c / major + s * s / minor;
    inv.m[1][1] = s * s / major + c * c / minor;
    inv.m[0][1] = (1.0 / major - 1.0 / minor) * c * s;
    inv.m[1][0] = inv.m[0][1];
    (a, inv)
}

/// Returns (A, A^{-1}, min eigenvalue, max eigenvalue).
fn constant_matrix(dim: usize, rows: &[Vec<f64>]) -> Result<(Mat3, Mat3, f64, f64)> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput(format!("matrix must be {dim}x{dim}")));
    }
    let a = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let asym = (&a - a.transpose()).abs().max();
    if asym > 1e-12 * a.abs().max() {
        return Err(Error::InvalidInput("matrix is not symmetric".into()));
    }
    let eig = a.clone().symmetric_eigen();
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    if lmin <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive definite (smallest eigenvalue {lmin})"
        )));
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("matrix is singular".into()))?;
    let mut am = Mat3 { m: [[0.0; 3]; 3] };
    let mut im = Mat3 { m: [[0.0; 3]; 3] };
    for i in 0..dim {
        for j in 0..dim {
            am.m[i][j] = a[(i, j)];
            // symmetrize to keep the inverse exactly symmetric
            im.m[i][j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok((am, im, lmin, lmax))
}

impl AnisotropyModel {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(AnisotropyModel {
            kind: Kind::Euclidean,
            dim,
            c0: 1.0,
            delta: 1.0,
            polar_delta: 1.0,
            metric_bound: 1.0,
        })
    }

    pub fn weighted(dim: usize, profile: WeightProfile, samples: &SampleBox) -> Result<Self> {
        check_dim(dim)?;
        profile.check(dim)?;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in samples.points() {
            let a = profile.at(&x);
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "weight is not positive at {x:?} (value {a})"
                )));
            }
            lo = lo.min(a);
            hi = hi.max(a);
        }
        Ok(AnisotropyModel {
            kind: Kind::Weighted(profile),
            dim,
            c0: lo.min(1.0 / hi),
            delta: lo,
            polar_delta: 1.0 / hi,
            metric_bound: 1.0,
        })
    }

    pub fn riemannian(dim: usize, profile: MatrixProfile, samples: &SampleBox) -> Result<Self> {
        check_dim(dim)?;
        let (fixed, lmin, lmax) = match &profile {
            MatrixProfile::Constant { matrix } => {
                let (a, inv, lmin, lmax) = constant_matrix(dim, matrix)?;
                (Some((a, inv)), lmin, lmax)
            }
            MatrixProfile::Rotating {
                major,
                minor,
                angle,
                twist,
            } => {
                if dim != 2 {
                    return Err(Error::InvalidInput("rotating matrix field is 2D only".into()));
                }
                if !(*major > 0.0 && *minor > 0.0) || !angle.is_finite() || !twist.is_finite() {
                    return Err(Error::InvalidInput(
                        "rotating field needs positive eigenvalues and finite angles".into(),
                    ));
                }
                // Eigenvalue bounds measured over the sample box.
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for x in samples.points() {
                    let (a, _) = rotating(*major, *minor, angle + twist * x[0]);
                    let m = DMatrix::from_fn(2, 2, |i, j| a.m[i][j]);
                    let eig = m.symmetric_eigen();
                    lo = lo.min(eig.eigenvalues.min());
                    hi = hi.max(eig.eigenvalues.max());
                }
                (None, lo, hi)
            }
        };
        Ok(AnisotropyModel {
            kind: Kind::Riemannian { profile, fixed },
            dim,
            c0: lmin.sqrt().min(1.0 / lmax.sqrt()),
            delta: lmin.sqrt(),
            polar_delta: 1.0 / lmax.sqrt(),
            metric_bound: lmax,
        })
    }

    /// Named presets: `euclidean`, `ellipse` (diag(1, 4[, 9])), `rotating` (2D),
    /// `ramp` (weight `1 + x_0 / 2`), `bump` (weight `1 + exp(-|x - c|^2 / 0.04)`).
    pub fn preset(name: &str, dim: usize) -> Result<Self> {
        let samples = SampleBox::unit(dim);
        match name {
            "euclidean" => Self::euclidean(dim),
            "ellipse" => {
                let diag = [1.0, 4.0, 9.0];
                let matrix = (0..dim)
                    .map(|i| (0..dim).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
                    .collect();
                Self::riemannian(dim, MatrixProfile::Constant { matrix }, &samples)
            }
            "rotating" => Self::riemannian(
                dim,
                MatrixProfile::Rotating {
                    major: 2.0,
                    minor: 0.5,
                    angle: 0.3,
                    twist: 1.5,
                },
                &samples,
            ),
            "ramp" => {
                let mut slope = vec![0.0; dim];
                slope[0] = 0.5;
                Self::weighted(dim, WeightProfile::Affine { base: 1.0, slope }, &samples)
            }
            "bump" => Self::weighted(
                dim,
                WeightProfile::Bump {
                    base: 1.0,
                    amplitude: 1.0,
                    center: vec![0.5; dim],
                    width: 0.2,
                },
                &samples,
            ),
            other => Err(Error::InvalidInput(format!(
                "unknown anisotropy preset `{other}`"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Modulus `delta` with `F^2 / 2` uniformly `delta^2`-convex.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The same modulus for the polar `F°`.
    pub fn polar_delta(&self) -> f64 {
        self.polar_delta
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Euclidean => Family::Euclidean,
            Kind::Weighted(_) => Family::Weighted,
            Kind::Riemannian { .. } => Family::Riemannian,
        }
    }

    /// Largest eigenvalue of the per-cell dual metric used by the solver.
    pub(crate) fn metric_bound(&self) -> f64 {
        self.metric_bound
    }

    /// Whether `F(x, .)` is the same for every `x`.
    pub fn is_homogeneous_in_x(&self) -> bool {
        match &self.kind {
            Kind::Euclidean => true,
            Kind::Weighted(WeightProfile::Constant { .. }) => true,
            Kind::Weighted(_) => false,
            Kind::Riemannian { fixed, .. } => fixed.is_some(),
        }
    }

    fn matrices(&self, x: &[f64]) -> Option<(Mat3, Mat3)> {
        match &self.kind {
            Kind::Riemannian { fixed: Some(m), .. } => Some(*m),
            Kind::Riemannian {
                profile:
                    MatrixProfile::Rotating {
                        major,
                        minor,
                        angle,
                        twist,
                    },
                ..
            } => Some(rotating(*major, *minor, angle + twist * x[0])),
            _ => None,
        }
    }

    fn check_args(&self, x: &[f64], v: &[f64]) -> Result<()> {
        if x.len() != self.dim || v.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "expected {}-dimensional point and vector, got {} and {}",
                self.dim,
                x.len(),
                v.len()
            )));
        }
        ensure_finite("point", x)?;
        ensure_finite("vector", v)
    }

    pub(crate) fn value_raw(&self, x: &[f64], p: &[f64]) -> f64 {
        match &self.kind {
            Kind::Euclidean => norm(p),
            Kind::Weighted(w) => w.at(x) * norm(p),
            Kind::Riemannian { .. } => {
                let (a, _) = self.matrices(x).unwrap();
                a.quad(p).max(0.0).sqrt()
            }
        }
    }

    pub(crate) fn polar_raw(&self, x: &[f64], z: &[f64]) -> f64 {
        match &self.kind {
            Kind::Euclidean => norm(z),
            Kind::Weighted(w) => norm(z) / w.at(x),
            Kind::Riemannian { .. } => {
                let (_, inv) = self.matrices(x).unwrap();
                inv.quad(z).max(0.0).sqrt()
            }
        }
    }

    /// `F(x, p)`.
    pub fn value(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        self.check_args(x, p)?;
        Ok(self.value_raw(x, p))
    }

    /// `F°(x, z) = sup { z.p : F(x, p) <= 1 }`.
    pub fn polar(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        self.check_args(x, z)?;
        Ok(self.polar_raw(x, z))
    }

    /// `∇_p F(x, p)`, undefined at `p = 0`.
    pub fn grad(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_args(x, p)?;
        if p.iter().all(|&c| c == 0.0) {
            return Err(Error::DegeneratePoint("gradient of F at p = 0".into()));
        }
        let mut out = vec![0.0; self.dim];
        match &self.kind {
            Kind::Euclidean => scale_into(p, 1.0 / norm(p), &mut out),
            Kind::Weighted(w) => scale_into(p, w.at(x) / norm(p), &mut out),
            Kind::Riemannian { .. } => {
                let (a, _) = self.matrices(x).unwrap();
                a.apply(p, &mut out);
                let f = a.quad(p).sqrt();
                out.iter_mut().for_each(|o| *o /= f);
            }
        }
        Ok(out)
    }

    /// `∇_z F°(x, z)`, undefined at `z = 0`.
    pub fn polar_grad(&self, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check_args(x, z)?;
        if z.iter().all(|&c| c == 0.0) {
            return Err(Error::DegeneratePoint("gradient of F° at z = 0".into()));
        }
        let mut out = vec![0.0; self.dim];
        match &self.kind {
            Kind::Euclidean => scale_into(z, 1.0 / norm(z), &mut out),
            Kind::Weighted(w) => scale_into(z, 1.0 / (w.at(x) * norm(z)), &mut out),
            Kind::Riemannian { .. } => {
                let (_, inv) = self.matrices(x).unwrap();
                inv.apply(z, &mut out);
                let f = inv.quad(z).sqrt();
                out.iter_mut().for_each(|o| *o /= f);
            }
        }
        Ok(out)
    }

    /// Residual of the `delta^2`-convexity inequality for `F^2`:
    /// `F²(y) - F²(z) - 2 F(z) ∇F(z).(y - z) - delta² |y - z|²`, nonnegative for a valid model.
    pub fn strong_convexity_residual(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        self.check_args(x, y)?;
        self.check_args(x, z)?;
        let fy = self.value_raw(x, y);
        let dist2: f64 = y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
        let d2 = self.delta * self.delta;
        if z.iter().all(|&c| c == 0.0) {
            return Ok(fy * fy - d2 * dist2);
        }
        let fz = self.value_raw(x, z);
        let g = self.grad(x, z)?;
        let lin: f64 = g
            .iter()
            .zip(y.iter().zip(z))
            .map(|(gi, (yi, zi))| gi * (yi - zi))
            .sum();
        Ok(fy * fy - fz * fz - 2.0 * fz * lin - d2 * dist2)
    }

    /// The same residual for `F°` with modulus [`polar_delta`](Self::polar_delta).
    pub fn polar_strong_convexity_residual(&self, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        self.check_args(x, y)?;
        self.check_args(x, z)?;
        let fy = self.polar_raw(x, y);
        let dist2: f64 = y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum();
        let d2 = self.polar_delta * self.polar_delta;
        if z.iter().all(|&c| c == 0.0) {
            return Ok(fy * fy - d2 * dist2);
        }
        let fz = self.polar_raw(x, z);
        let g = self.polar_grad(x, z)?;
        let lin: f64 = g
            .iter()
            .zip(y.iter().zip(z))
            .map(|(gi, (yi, zi))| gi * (yi - zi))
            .sum();
        Ok(fy * fy - fz * fz - 2.0 * fz * lin - d2 * dist2)
    }

    /// Radial scaling `z / max(1, F°(x, z))` onto the dual constraint set `{F° <= 1}`.
    pub fn project_dual(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        self.project_dual_in_place(x, &mut out);
        out
    }

    pub(crate) fn project_dual_in_place(&self, x: &[f64], z: &mut [f64]) {
        let n = self.polar_raw(x, z);
        if n > 1.0 {
            z.iter_mut().for_each(|c| *c /= n);
        }
    }

    /// Applies the dual metric at `x` (identity, or `A(x)` for the Riemannian family).
    ///
    /// Radial scaling is the exact proximal map of the dual constraint in this metric.
    pub(crate) fn apply_dual_metric(&self, x: &[f64], v: &mut [f64]) {
        if let Some((a, _)) = self.matrices(x) {
            let mut tmp = [0.0; 3];
            a.apply(v, &mut tmp[..v.len()]);
            v.copy_from_slice(&tmp[..v.len()]);
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn scale_into(v: &[f64], s: f64, out: &mut [f64]) {
    for (o, c) in out.iter_mut().zip(v) {
        *o = c * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn ellipse() -> AnisotropyModel {
        AnisotropyModel::preset("ellipse", 2).unwrap()
    }

    #[test]
    fn euclidean_values() {
        let m = AnisotropyModel::euclidean(2).unwrap();
        let x = [0.3, 0.7];
        assert_eq!(m.value(&x, &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(m.value(&x, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(close(m.polar(&x, &[0.6, 0.8]).unwrap(), 1.0, 1e-15));
        let g = m.grad(&x, &[3.0, 4.0]).unwrap();
        assert!(close(g[0], 0.6, 1e-15) && close(g[1], 0.8, 1e-15));
        assert_eq!(m.grad(&x, &[0.0, -7.0]).unwrap(), vec![0.0, -1.0]);
        assert_eq!(m.polar_grad(&x, &[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(m.polar_grad(&x, &[0.0, -3.0]).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn ellipse_closed_forms() {
        let m = ellipse();
        let x = [0.1, 0.2];
        assert!(close(m.value(&x, &[0.0, 1.0]).unwrap(), 2.0, 1e-15));
        assert!(close(m.polar(&x, &[0.0, 1.0]).unwrap(), 0.5, 1e-15));
        let g = m.grad(&x, &[0.0, 1.0]).unwrap();
        assert!(close(g[0], 0.0, 1e-15) && close(g[1], 2.0, 1e-15));
        let h = m.polar_grad(&x, &[0.0, 2.0]).unwrap();
        assert!(close(h[0], 0.0, 1e-15) && close(h[1], 0.5, 1e-15));
        assert_eq!(m.delta(), 1.0);
        assert_eq!(m.c0(), 0.5);
    }

    #[test]
    fn zero_is_degenerate() {
        let m = ellipse();
        assert!(matches!(
            m.grad(&[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::DegeneratePoint(_))
        ));
        assert!(matches!(
            m.polar_grad(&[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::DegeneratePoint(_))
        ));
        assert_eq!(m.polar(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        let m = AnisotropyModel::euclidean(2).unwrap();
        assert!(matches!(
            m.value(&[0.0, 0.0], &[f64::NAN, 1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            m.polar(&[f64::INFINITY, 0.0], &[1.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(m.value(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn strong_convexity_examples() {
        let e = AnisotropyModel::euclidean(2).unwrap();
        let x = [0.0, 0.0];
        assert_eq!(
            e.strong_convexity_residual(&x, &[2.0, 0.0], &[1.0, 0.0]).unwrap(),
            0.0
        );
        assert_eq!(
            e.strong_convexity_residual(&x, &[0.3, 0.4], &[0.3, 0.4]).unwrap(),
            0.0
        );
        // quadratic form: (y-z)^T A (y-z) - |y-z|^2 = 1 + 4 - 2 = 3
        let r = ellipse()
            .strong_convexity_residual(&x, &[0.0, 1.0], &[1.0, 0.0])
            .unwrap();
        assert!(close(r, 3.0, 1e-14), "{r}");
        // z = 0 branch
        assert!(close(
            ellipse()
                .strong_convexity_residual(&x, &[0.0, 1.0], &[0.0, 0.0])
                .unwrap(),
            3.0,
            1e-14
        ));
    }

    #[test]
    fn projection_examples() {
        let e = AnisotropyModel::euclidean(2).unwrap();
        let x = [0.5, 0.5];
        let p = e.project_dual(&x, &[3.0, 4.0]);
        assert!(close(p[0], 0.6, 1e-15) && close(p[1], 0.8, 1e-15));
        assert_eq!(e.project_dual(&x, &[0.1, 0.2]), vec![0.1, 0.2]);
        let q = ellipse().project_dual(&x, &[0.0, 4.0]);
        assert!(close(q[1], 2.0, 1e-15));
        assert!(close(ellipse().polar(&x, &q).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn rejects_bad_matrices() {
        let s = SampleBox::unit(2);
        let not_spd = MatrixProfile::Constant {
            matrix: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        };
        assert!(AnisotropyModel::riemannian(2, not_spd, &s).is_err());
        let asym = MatrixProfile::Constant {
            matrix: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
        };
        assert!(AnisotropyModel::riemannian(2, asym, &s).is_err());
        let w = WeightProfile::Affine {
            base: 0.1,
            slope: vec![-1.0, 0.0],
        };
        assert!(AnisotropyModel::weighted(2, w, &s).is_err());
        assert!(AnisotropyModel::euclidean(4).is_err());
    }

    #[test]
    fn rotating_constants_sampled() {
        let m = AnisotropyModel::preset("rotating", 2).unwrap();
        assert!(close(m.delta(), 0.5f64.sqrt(), 1e-12));
        assert!(close(m.polar_delta(), 1.0 / 2.0f64.sqrt(), 1e-12));
        assert!(!m.is_homogeneous_in_x());
    }
}
