#![allow(dead_code)]

use std::sync::Arc;

use tvcalib::anisotropy::AnisotropyModel;
use tvcalib::grid::{GridSpec, ScalarField, VectorField};

pub const PRESETS_2D: [&str; 5] = ["euclidean", "ellipse", "rotating", "ramp", "bump"];
pub const PRESETS_3D: [&str; 4] = ["euclidean", "ellipse", "ramp", "bump"];

pub fn models() -> Vec<(String, AnisotropyModel)> {
    let mut out = Vec::new();
    for name in PRESETS_2D {
        out.push((format!("{name}/2"), AnisotropyModel::preset(name, 2).unwrap()));
    }
    for name in PRESETS_3D {
        out.push((format!("{name}/3"), AnisotropyModel::preset(name, 3).unwrap()));
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `sup_{|w| = 1} w·p / F°(x, w)` over `n` equispaced angles, refined by
/// golden-section search around the best sample.
pub fn sampled_bipolar(m: &AnisotropyModel, x: &[f64], p: &[f64], n: usize) -> f64 {
    let obj = |t: f64| {
        let w = [t.cos(), t.sin()];
        dot(&w, p) / m.polar(x, &w).unwrap()
    };
    let step = std::f64::consts::TAU / n as f64;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let t = i as f64 * step;
        let v = obj(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best_t - step, best_t + step);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if obj(c) > obj(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(obj(0.5 * (a + b)))
}

pub fn disc_indicator(grid: &Arc<GridSpec>, center: &[f64], radius: f64) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
        f64::from(u8::from(r2 <= radius * radius))
    })
}

/// Calibration of `B_R(c)` for the Euclidean perimeter with inward normals.
pub fn disc_calibration(grid: &Arc<GridSpec>, center: &[f64], radius: f64) -> VectorField {
    VectorField::from_fn(grid.clone(), |x| {
        let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
        let r2 = dot(&y, &y);
        let s = if r2 <= radius * radius {
            1.0 / radius
        } else {
            radius / r2
        };
        y.iter().map(|v| -s * v).collect()
    })
}
