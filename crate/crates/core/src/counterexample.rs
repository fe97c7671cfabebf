//! A calibration field on the unit ball whose divergence lies in `L^{d-ε}`
//! but whose ball averages at the origin do not converge.
//!
//! Balls `B_n = B_{r_n}(2 r_n e_d)` are stacked above the flat interface
//! `{x_d = 0}`. Outside them `z = e_d`; inside `z = (|x - x_n| / r_n) e_d`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LevelSetView;
use crate::grid::{GridSpec, VectorField};

/// Absolute tolerance folded into every averaged bound.
pub const QUADRATURE_TOL: f64 = 1e-3;
/// Slack required between the oscillation gap and zero.
pub const GAP_SLACK: f64 = 2e-3;
pub const DEFAULT_QUADRATURE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSettings {
    pub dimension: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Explicit radii. When absent, `r_n = 2^{-2^n}` for `n = first..first + depth`.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_first")]
    pub first: u32,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
}

fn default_first() -> u32 {
    2
}
fn default_depth() -> usize {
    5
}
fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE
}

impl CounterexampleSettings {
    pub fn new(dimension: usize, epsilon: f64, delta: f64) -> Self {
        CounterexampleSettings {
            dimension,
            epsilon,
            delta,
            radii: None,
            first: default_first(),
            depth: default_depth(),
            quadrature: default_quadrature(),
        }
    }

    pub fn build(&self) -> Result<CounterexampleConfig> {
        let radii = match &self.radii {
            Some(r) => r.clone(),
            None => double_exponential_radii(self.first, self.depth),
        };
        CounterexampleConfig::new(self.dimension, self.epsilon, self.delta, radii)
    }
}

/// `2^{-2^n}` for `n = first, .., first + depth - 1`.
pub fn double_exponential_radii(first: u32, depth: usize) -> Vec<f64> {
    (0..depth)
        .map(|i| match 1i64.checked_shl(first + i as u32) {
            Some(e) if e <= 1100 => 2f64.powi(-(e as i32)),
            _ => 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleConfig {
    dim: usize,
    epsilon: f64,
    delta: f64,
    radii: Vec<f64>,
}

impl CounterexampleConfig {
    pub fn new(dim: usize, epsilon: f64, delta: f64, radii: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::ConstructionInvalid(m));
        if dim != 2 && dim != 3 {
            return bad(format!("dimension must be 2 or 3, got {dim}"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        let cap = inv_six_pow(dim);
        if !(delta > 0.0 && delta + GAP_SLACK < cap) {
            return bad(format!(
                "delta must satisfy 0 < delta < {cap} - {GAP_SLACK}, got {delta}"
            ));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("radii must be positive and finite".into());
        }
        if let Some(&r1) = radii.first() {
            if 3.0 * r1 >= 1.0 {
                return bad(format!("3 r_1 = {} must be below 1", 3.0 * r1));
            }
        }
        for (i, w) in radii.windows(2).enumerate() {
            if !(w[1] < w[0] / 4.0) {
                return bad(format!("r_{} = {} is not below r_{} / 4", i + 2, w[1], i + 1));
            }
        }
        let cfg = CounterexampleConfig {
            dim,
            epsilon,
            delta,
            radii,
        };
        for i in 0..cfg.radii.len() {
            for j in i + 1..cfg.radii.len() {
                let gap = 2.0 * (cfg.radii[i] - cfg.radii[j]);
                if gap <= cfg.radii[i] + cfg.radii[j] {
                    return bad(format!("balls {} and {} overlap", i + 1, j + 1));
                }
            }
        }
        for n in 0..cfg.radii.len() {
            let tail: f64 = cfg.radii[n + 1..].iter().map(|r| r.powi(dim as i32)).sum();
            let allowed = delta * cfg.radii[n].powi(dim as i32);
            if tail > allowed {
                return bad(format!(
                    "tail volume after ball {} is {tail:e}, above delta r^d = {allowed:e}",
                    n + 1
                ));
            }
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn depth(&self) -> usize {
        self.radii.len()
    }

    /// Center `2 r_n e_d` of ball `n` (1-based).
    pub fn center(&self, n: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        c[self.dim - 1] = 2.0 * self.radii[n - 1];
        c
    }

    fn check_index(&self, n: usize, last: usize) -> Result<()> {
        if n == 0 || n > last {
            return Err(Error::InvalidInput(format!("ball index {n} outside 1..={last}")));
        }
        Ok(())
    }
}

/// `1 / 6^d`.
pub fn inv_six_pow(d: usize) -> f64 {
    6f64.powi(-(d as i32))
}

/// Volume of the unit ball.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(d as f64 / 2.0) / gamma_half_int(d + 2),
    }
}

// Γ(k/2) for positive integer k.
fn gamma_half_int(k: usize) -> f64 {
    match k {
        1 => PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half_int(k - 2),
    }
}

pub fn eval_field(cfg: &CounterexampleConfig, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != cfg.dim {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            cfg.dim
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if !(r2 <= 1.0) {
        return Err(Error::Domain(format!("{x:?} lies outside the unit ball")));
    }
    let mut z = vec![0.0; cfg.dim];
    z[cfg.dim - 1] = z_d(cfg, x);
    Ok(z)
}

fn z_d(cfg: &CounterexampleConfig, x: &[f64]) -> f64 {
    let d = cfg.dim;
    for &r in &cfg.radii {
        let mut s = 0.0;
        for (k, &v) in x.iter().enumerate() {
            let c = if k == d - 1 { 2.0 * r } else { 0.0 };
            s += (v - c) * (v - c);
        }
        if s < r * r {
            return s.sqrt() / r;
        }
    }
    1.0
}

/// Midpoint nodes on the unit sphere of `R^d` with weights summing to its area.
fn sphere_nodes(d: usize, count: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        2 => {
            let m = count.max(4);
            let w = 2.0 * PI / m as f64;
            (0..m)
                .map(|i| {
                    let t = (i as f64 + 0.5) * w;
                    (vec![t.cos(), t.sin()], w)
                })
                .collect()
        }
        _ => {
            // uniform in cos(polar) times uniform in azimuth
            // the integrands vary mostly in the polar direction
            let m = ((count as f64).sqrt().ceil() as usize).max(4);
            let (mc, mp) = (2 * m, (m / 2).max(4));
            let w = 4.0 * PI / (mc * mp) as f64;
            let mut out = Vec::with_capacity(mc * mp);
            for i in 0..mc {
                let c = -1.0 + (i as f64 + 0.5) * 2.0 / mc as f64;
                let s = (1.0 - c * c).sqrt();
                for j in 0..mp {
                    let p = (j as f64 + 0.5) * 2.0 * PI / mp as f64;
                    out.push((vec![s * p.cos(), s * p.sin(), c], w));
                }
            }
            out
        }
    }
}

/// Midpoint radius and `∫ s^{d-1} ds` of shell `i` out of `nr` in `[0, r]`.
fn shell(d: usize, r: f64, nr: usize, i: usize) -> (f64, f64) {
    let dr = r / nr as f64;
    let (a, b) = (i as f64 * dr, (i + 1) as f64 * dr);
    ((a + b) / 2.0, (b.powi(d as i32) - a.powi(d as i32)) / d as f64)
}

/// Splits a node budget between radius and sphere.
fn split_budget(d: usize, q: usize) -> (usize, usize) {
    let q = q.max(16);
    match d {
        2 => {
            let n = (q as f64).sqrt().ceil() as usize;
            (n, n)
        }
        _ => {
            let n = (q as f64).cbrt().ceil() as usize;
            (n, n * n)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpNorm {
    pub p: f64,
    /// Truncated `∫ |div z|^p` over the materialized balls.
    pub value: f64,
    /// `ω_d Σ r_n^{d-p}`.
    pub bound: f64,
    pub per_ball: Vec<f64>,
    /// `p >= d`: the integrability the construction relies on fails.
    pub supercritical: bool,
}

/// `∫ |div z|^p` with `div z = (x_d - x_{n,d}) / (r_n |x - x_n|)` inside `B_n`.
pub fn div_lp_norm(cfg: &CounterexampleConfig, p: f64, quadrature_per_ball: usize) -> Result<LpNorm> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("exponent must be positive, got {p}")));
    }
    let d = cfg.dim;
    let (nr, ns) = split_budget(d, quadrature_per_ball);
    let sphere = sphere_nodes(d, ns);
    let mut per_ball = Vec::with_capacity(cfg.radii.len());
    for &r in &cfg.radii {
        let radial: f64 = (0..nr).map(|i| shell(d, r, nr, i).1).sum();
        let angular: f64 = sphere.iter().map(|(w, a)| w[d - 1].abs().powf(p) * a).sum();
        per_ball.push(radial * angular * r.powf(-p));
    }
    let bound = unit_ball_volume(d) * cfg.radii.iter().map(|r| r.powf(d as f64 - p)).sum::<f64>();
    Ok(LpNorm {
        p,
        value: per_ball.iter().sum(),
        bound,
        per_ball,
        supercritical: p >= d as f64,
    })
}

/// Integral of `1 - z·e_d` over `B_n ∩ B_R(0)`.
fn deficit_in_ball(cfg: &CounterexampleConfig, n: usize, big_r: f64, q: usize) -> f64 {
    let d = cfg.dim;
    let r = cfg.radii[n];
    let h = 2.0 * r;
    // farthest and nearest distances from the origin
    if h - r >= big_r {
        return 0.0;
    }
    let (nr, ns) = split_budget(d, q);
    let radial = |i: usize| {
        let (s, w) = shell(d, r, nr, i);
        (s, w * (1.0 - s / r))
    };
    if h + r <= big_r {
        let area = sphere_area(d);
        return (0..nr).map(|i| radial(i).1).sum::<f64>() * area;
    }
    let sphere = sphere_nodes(d, ns);
    let mut total = 0.0;
    for i in 0..nr {
        let (s, w) = radial(i);
        for (dir, a) in &sphere {
            let mut dist2 = 0.0;
            for k in 0..d {
                let c = if k == d - 1 { h } else { 0.0 };
                let v = c + s * dir[k];
                dist2 += v * v;
            }
            if dist2 < big_r * big_r {
                total += w * a;
            }
        }
    }
    total
}

fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

fn ball_mean(cfg: &CounterexampleConfig, big_r: f64, q: usize) -> f64 {
    let deficit: f64 = (0..cfg.radii.len())
        .map(|n| deficit_in_ball(cfg, n, big_r, q))
        .sum();
    1.0 - deficit / (unit_ball_volume(cfg.dim) * big_r.powi(cfg.dim as i32))
}

/// Mean of `z·e_d` over `B_{3 r_n}(0)`.
pub fn average_large_ball(cfg: &CounterexampleConfig, n: usize, quadrature: usize) -> Result<f64> {
    cfg.check_index(n, cfg.depth())?;
    Ok(ball_mean(cfg, 3.0 * cfg.radii[n - 1], quadrature))
}

/// Mean of `z·e_d` over `B_{r_n}(0)`.
pub fn average_small_ball(cfg: &CounterexampleConfig, n: usize, quadrature: usize) -> Result<f64> {
    cfg.check_index(n, cfg.depth().saturating_sub(1))?;
    Ok(ball_mean(cfg, cfg.radii[n - 1], quadrature))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LebesgueFailureReport {
    pub dimension: usize,
    pub delta: f64,
    pub radii: Vec<f64>,
    pub large_ball_averages: Vec<f64>,
    pub small_ball_averages: Vec<f64>,
    /// `1 - 1/6^d + tol`.
    pub large_ball_bound: f64,
    /// `1 - δ - tol`.
    pub small_ball_bound: f64,
    pub gap: f64,
    /// `1/6^d - δ - 2e-3`.
    pub gap_bound: f64,
    pub large_ok: bool,
    pub small_ok: bool,
}

impl LebesgueFailureReport {
    pub fn passed(&self) -> bool {
        self.large_ok && self.small_ok && self.gap >= self.gap_bound
    }

    /// `n,radius,large_ball_average,small_ball_average` with empty trailing cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,radius,large_ball_average,small_ball_average\n");
        for (i, r) in self.radii.iter().enumerate() {
            let small = self
                .small_ball_averages
                .get(i)
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{r},{},{small}\n",
                i + 1,
                self.large_ball_averages[i]
            ));
        }
        out
    }
}

pub fn lebesgue_failure_report(
    cfg: &CounterexampleConfig,
    quadrature: usize,
) -> Result<LebesgueFailureReport> {
    let n = cfg.depth();
    if n < 3 {
        return Err(Error::Precondition(format!("need at least 3 balls, have {n}")));
    }
    let large = (1..=n)
        .map(|i| average_large_ball(cfg, i, quadrature))
        .collect::<Result<Vec<_>>>()?;
    let small = (1..n)
        .map(|i| average_small_ball(cfg, i, quadrature))
        .collect::<Result<Vec<_>>>()?;
    let large_bound = 1.0 - inv_six_pow(cfg.dim) + QUADRATURE_TOL;
    let small_bound = 1.0 - cfg.delta - QUADRATURE_TOL;
    let max_small = small.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_large = large.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = max_small - min_large;
    let gap_bound = inv_six_pow(cfg.dim) - cfg.delta - GAP_SLACK;
    if gap < gap_bound {
        return Err(Error::ConstructionInvalid(format!(
            "oscillation gap {gap} below {gap_bound}"
        )));
    }
    Ok(LebesgueFailureReport {
        dimension: cfg.dim,
        delta: cfg.delta,
        radii: cfg.radii.clone(),
        large_ok: large.iter().all(|&v| v <= large_bound),
        small_ok: small.iter().all(|&v| v >= small_bound),
        large_ball_averages: large,
        small_ball_averages: small,
        large_ball_bound: large_bound,
        small_ball_bound: small_bound,
        gap,
        gap_bound,
    })
}

/// Samples the field on a cube `[-half_width, half_width]^d` with `cells` per
/// axis. Each component is taken at the midpoint of the face it lives on.
/// The returned set is `{x_d > 0}`, whose inward normal is `e_d`.
pub fn rasterize(
    cfg: &CounterexampleConfig,
    cells: usize,
    half_width: f64,
) -> Result<(VectorField, LevelSetView)> {
    let d = cfg.dim;
    if !(half_width > 0.0) || half_width * (d as f64).sqrt() > 1.0 {
        return Err(Error::Domain(format!(
            "cube of half width {half_width} leaves the unit ball"
        )));
    }
    let h = 2.0 * half_width / cells as f64;
    let grid = Arc::new(GridSpec::new(vec![cells; d], h, vec![-half_width; d])?);
    let n = grid.len();
    let mut values = vec![0.0; d * n];
    let mut x = vec![0.0; d];
    for c in 0..n {
        grid.center_into(c, &mut x);
        x[d - 1] += 0.5 * h;
        values[(d - 1) * n + c] = z_d(cfg, &x);
    }
    let z = VectorField::from_components(grid.clone(), values)?;
    let e = LevelSetView::from_predicate(grid, |x| x[d - 1] > 0.0);
    Ok((z, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg2() -> CounterexampleConfig {
        CounterexampleSettings::new(2, 0.5, 0.01).build().unwrap()
    }

    #[test]
    fn generator_radii() {
        let r = double_exponential_radii(2, 3);
        assert_eq!(r, vec![1.0 / 16.0, 1.0 / 256.0, 1.0 / 65536.0]);
    }

    #[test]
    fn field_values() {
        let c = cfg2();
        assert_eq!(eval_field(&c, &[0.9, 0.0]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(eval_field(&c, &c.center(1)).unwrap(), vec![0.0, 0.0]);
        let r = c.radii()[0];
        let edge = eval_field(&c, &[0.0, 2.0 * r - r * (1.0 - 1e-12)]).unwrap();
        assert!((edge[1] - 1.0).abs() < 1e-9);
        assert!(matches!(eval_field(&c, &[1.0, 0.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn validation() {
        assert!(CounterexampleConfig::new(4, 0.5, 0.01, vec![0.1]).is_err());
        assert!(CounterexampleConfig::new(2, 1.5, 0.01, vec![0.1]).is_err());
        assert!(CounterexampleConfig::new(2, 0.5, 0.027, vec![0.1]).is_err());
        assert!(CounterexampleConfig::new(2, 0.5, 0.01, vec![0.1, 0.03]).is_err());
        assert!(CounterexampleConfig::new(2, 0.5, 0.01, vec![0.4]).is_err());
        // tail volume too large for delta
        assert!(CounterexampleConfig::new(2, 0.5, 0.01, vec![0.1, 0.02]).is_err());
        assert!(CounterexampleConfig::new(3, 0.5, 1e-3, double_exponential_radii(2, 5)).is_ok());
    }

    #[test]
    fn no_balls_is_flat() {
        let c = CounterexampleConfig::new(2, 0.5, 0.01, vec![]).unwrap();
        assert_eq!(div_lp_norm(&c, 1.5, 1000).unwrap().value, 0.0);
    }

    #[test]
    fn report_refuses_short_sequences() {
        let c = CounterexampleConfig::new(2, 0.5, 0.01, vec![1.0 / 16.0]).unwrap();
        assert!(matches!(
            lebesgue_failure_report(&c, 1000),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn partial_overlap_against_brute_force() {
        let c = CounterexampleConfig::new(2, 0.5, 0.01, vec![0.1]).unwrap();
        let big_r = 0.2;
        let q = ball_mean(&c, big_r, 40_000);
        let n = 2000;
        let h = 2.0 * big_r / n as f64;
        let (mut sum, mut count) = (0.0, 0usize);
        for j in 0..n {
            for i in 0..n {
                let x = [-big_r + (i as f64 + 0.5) * h, -big_r + (j as f64 + 0.5) * h];
                if x[0] * x[0] + x[1] * x[1] < big_r * big_r {
                    sum += z_d(&c, &x);
                    count += 1;
                }
            }
        }
        let brute = sum / count as f64;
        assert!((q - brute).abs() < 1e-3, "{q} {brute}");
    }

    #[test]
    fn raster_matches_pointwise() {
        let c = cfg2();
        let (z, e) = rasterize(&c, 64, 0.2).unwrap();
        assert_eq!(z.grid().len(), 64 * 64);
        assert!(z.max_norm() <= 1.0);
        assert!(!e.is_empty() && !e.is_full());
    }
}
