//! Run configuration, read from TOML.
//!
//! ```toml
//! command = "verify"
//!
//! [problem]
//! cells = 256
//! lambda = 32.0
//! datum = { kind = "disc", center = [0.5, 0.5], radius = 0.25 }
//!
//! [model]
//! preset = "euclidean"
//!
//! [output]
//! dir = "out/disc"
//! ```
//!
//! Unknown keys are rejected. Lengths in `[diagnostics]` are in units of the
//! grid spacing.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anisotropy::{AnisotropyModel, MatrixProfile, SampleBox, WeightProfile};
use crate::counterexample::CounterexampleSettings;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::solver::{ProblemSpec, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Solve,
    Verify,
    Levelset,
    Blowup,
    Counterexample,
    Selftest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub counterexample: Option<CounterexampleSettings>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Scalar data on the domain: a datum `f`, a load `g` or boundary values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    /// `value` on the closed ball, 0 elsewhere.
    Disc {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `value` on the cube `|x - center|_inf <= half_width`.
    Square {
        center: Vec<f64>,
        half_width: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `value` where `x_axis > threshold`.
    Stripe {
        axis: usize,
        threshold: f64,
        #[serde(default = "one")]
        value: f64,
    },
    /// `offset + slope . x`
    Affine {
        offset: f64,
        slope: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl FieldSpec {
    pub fn check(&self, dim: usize) -> Result<()> {
        let ok = match self {
            FieldSpec::Constant { value } => value.is_finite(),
            FieldSpec::Disc {
                center,
                radius,
                value,
            } => center.len() == dim && *radius > 0.0 && value.is_finite(),
            FieldSpec::Square {
                center,
                half_width,
                value,
            } => center.len() == dim && *half_width > 0.0 && value.is_finite(),
            FieldSpec::Stripe {
                axis,
                threshold,
                value,
            } => *axis < dim && threshold.is_finite() && value.is_finite(),
            FieldSpec::Affine { offset, slope } => slope.len() == dim && offset.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid field specification {self:?} for dimension {dim}"
            )))
        }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        match self {
            FieldSpec::Constant { value } => *value,
            FieldSpec::Disc {
                center,
                radius,
                value,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                if r2 <= radius * radius {
                    *value
                } else {
                    0.0
                }
            }
            FieldSpec::Square {
                center,
                half_width,
                value,
            } => {
                if x.iter().zip(center).all(|(a, b)| (a - b).abs() <= *half_width) {
                    *value
                } else {
                    0.0
                }
            }
            FieldSpec::Stripe {
                axis,
                threshold,
                value,
            } => {
                if x[*axis] > *threshold {
                    *value
                } else {
                    0.0
                }
            }
            FieldSpec::Affine { offset, slope } => {
                offset + slope.iter().zip(x).map(|(s, v)| s * v).sum::<f64>()
            }
        }
    }

    pub fn sample(&self, grid: &Arc<GridSpec>) -> ScalarField {
        ScalarField::from_fn(grid.clone(), |x| self.at(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Rof,
    PrescribedG,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallDomain {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "two")]
    pub dim: usize,
    pub cells: usize,
    /// The grid covers `[lo, hi]^d`.
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
    /// Restricts the active cells to a ball.
    #[serde(default)]
    pub domain: Option<BallDomain>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub datum: Option<FieldSpec>,
    #[serde(default)]
    pub g: Option<FieldSpec>,
    #[serde(default)]
    pub boundary: Option<FieldSpec>,
}

fn two() -> usize {
    2
}

impl ProblemConfig {
    pub fn grid(&self) -> Result<Arc<GridSpec>> {
        if !(self.hi > self.lo) || self.cells == 0 {
            return Err(Error::Config("problem needs cells > 0 and hi > lo".into()));
        }
        let grid = match &self.domain {
            None => {
                let h = (self.hi - self.lo) / self.cells as f64;
                GridSpec::new(vec![self.cells; self.dim], h, vec![self.lo; self.dim])?
            }
            Some(b) => GridSpec::ball(self.dim, self.cells, self.lo, self.hi, &b.center, b.radius)?,
        };
        Ok(Arc::new(grid))
    }

    pub fn build(&self, model: AnisotropyModel) -> Result<ProblemSpec> {
        let grid = self.grid()?;
        let need = |f: &Option<FieldSpec>, name: &str| -> Result<FieldSpec> {
            let f = f
                .clone()
                .ok_or_else(|| Error::Config(format!("problem.{name} is required in this mode")))?;
            f.check(self.dim)?;
            Ok(f)
        };
        match self.mode {
            Mode::Rof => {
                let lambda = self
                    .lambda
                    .filter(|l| *l > 0.0 && l.is_finite())
                    .ok_or_else(|| Error::Config("problem.lambda must be positive".into()))?;
                let f = need(&self.datum, "datum")?;
                ProblemSpec::rof(model, f.sample(&grid), lambda)
            }
            Mode::PrescribedG => {
                let g = need(&self.g, "g")?;
                let b = need(&self.boundary, "boundary")?;
                ProblemSpec::prescribed_g(model, g.sample(&grid), b.sample(&grid))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `euclidean`, `ellipse`, `rotating`, `ramp` or `bump`.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub weight: Option<WeightProfile>,
    #[serde(default)]
    pub matrix: Option<MatrixProfile>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            preset: Some("euclidean".into()),
            weight: None,
            matrix: None,
        }
    }
}

impl ModelConfig {
    /// Model constants are measured over the problem box.
    pub fn build(&self, dim: usize, lo: f64, hi: f64) -> Result<AnisotropyModel> {
        let samples = SampleBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
            per_axis: 17,
        };
        match (&self.preset, &self.weight, &self.matrix) {
            (Some(p), None, None) => AnisotropyModel::preset(p, dim),
            (None, Some(w), None) => AnisotropyModel::weighted(dim, w.clone(), &samples),
            (None, None, Some(m)) => AnisotropyModel::riemannian(dim, m.clone(), &samples),
            (None, None, None) => AnisotropyModel::euclidean(dim),
            _ => Err(Error::Config(
                "model takes exactly one of preset, weight, matrix".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub gap_tol: f64,
    pub check_every: usize,
    pub step_ratio: f64,
    pub presolve_iters: usize,
    pub presolve_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            max_iters: o.max_iters,
            gap_tol: o.gap_tol,
            check_every: o.check_every,
            step_ratio: o.step_ratio,
            presolve_iters: o.presolve_iters,
            presolve_tol: o.presolve_tol,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            gap_tol: self.gap_tol,
            check_every: self.check_every,
            step_ratio: self.step_ratio,
            presolve_iters: self.presolve_iters,
            presolve_tol: self.presolve_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Blow-up radii, decreasing.
    pub radii: Vec<f64>,
    pub boundary_points: usize,
    pub density_radius: f64,
    pub normal_radius: f64,
    pub trace_rho: f64,
    pub trace_r: f64,
    pub coarea_thresholds: usize,
    /// Level used by `levelset`; the midpoint of the range of `u` when absent.
    pub level: Option<f64>,
    /// Acceptance bounds.
    pub max_pairing_residual: f64,
    pub max_blowup_residual: f64,
    pub max_trace_error: f64,
    pub max_coarea_error: f64,
    pub density_band: [f64; 2],
    pub rasterize_cells: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            radii: vec![32.0, 16.0, 8.0, 4.0],
            boundary_points: 32,
            density_radius: 8.0,
            normal_radius: 8.0,
            trace_rho: 16.0,
            trace_r: 4.0,
            coarea_thresholds: 128,
            level: None,
            max_pairing_residual: 0.05,
            max_blowup_residual: 0.1,
            max_trace_error: 0.05,
            max_coarea_error: 0.05,
            density_band: [0.05, 0.95],
            rasterize_cells: 768,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Pgm,
    Pbm,
    Bin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let needs_problem = matches!(
            self.command,
            Command::Solve | Command::Verify | Command::Levelset | Command::Blowup
        );
        if needs_problem && self.problem.is_none() {
            return Err(Error::Config(format!(
                "command {:?} needs a [problem] section",
                self.command
            )));
        }
        if self.command == Command::Counterexample && self.counterexample.is_none() {
            return Err(Error::Config(
                "command counterexample needs a [counterexample] section".into(),
            ));
        }
        if let Some(p) = &self.problem {
            if !(1..=3).contains(&p.dim) {
                return Err(Error::Config(format!(
                    "problem.dim must be 1, 2 or 3, got {}",
                    p.dim
                )));
            }
        }
        let d = &self.diagnostics;
        let lengths = [d.density_radius, d.normal_radius, d.trace_rho, d.trace_r];
        if lengths.iter().any(|v| !(*v > 0.0)) || d.radii.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Config("diagnostic lengths must be positive".into()));
        }
        if d.boundary_points == 0 || d.coarea_thresholds == 0 {
            return Err(Error::Config("diagnostic counts must be positive".into()));
        }
        let s = &self.solver;
        if s.max_iters == 0 || !(s.gap_tol > 0.0) || s.check_every == 0 || !(s.step_ratio > 0.0) {
            return Err(Error::Config("solver parameters must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISC: &str = r#"
command = "verify"

[problem]
cells = 32
lambda = 32.0
datum = { kind = "disc", center = [0.5, 0.5], radius = 0.25 }
"#;

    #[test]
    fn parses_minimal_disc() {
        let c = RunConfig::parse(DISC).unwrap();
        assert_eq!(c.command, Command::Verify);
        let p = c.problem.unwrap();
        assert_eq!(p.mode, Mode::Rof);
        assert_eq!(c.diagnostics.radii, vec![32.0, 16.0, 8.0, 4.0]);
        let m = c.model.build(2, 0.0, 1.0).unwrap();
        let spec = p.build(m).unwrap();
        assert_eq!(spec.grid().len(), 32 * 32);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = DISC.replace("cells = 32", "cells = 32\nsmoothing = 2");
        assert!(matches!(RunConfig::parse(&text), Err(Error::Config(_))));
        let text = format!("{DISC}\n[solver]\nmaxiter = 3\n");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn missing_sections() {
        assert!(RunConfig::parse("command = \"solve\"").is_err());
        assert!(RunConfig::parse("command = \"counterexample\"").is_err());
        assert!(RunConfig::parse("command = \"selftest\"").is_ok());
        assert!(RunConfig::parse("command = \"dance\"").is_err());
    }

    #[test]
    fn rof_needs_positive_lambda() {
        let c = RunConfig::parse(&DISC.replace("32.0", "-1.0")).unwrap();
        let m = c.model.build(2, 0.0, 1.0).unwrap();
        assert!(c.problem.unwrap().build(m).is_err());
    }

    #[test]
    fn model_forms() {
        let text = format!("{DISC}\n[model]\nweight = {{ profile = \"constant\", value = 2.0 }}\n");
        let c = RunConfig::parse(&text).unwrap();
        let m = c.model.build(2, 0.0, 1.0).unwrap();
        assert!((m.value(&[0.1, 0.1], &[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let both = format!(
            "{DISC}\n[model]\npreset = \"ellipse\"\nweight = {{ profile = \"constant\", value = 2.0 }}\n"
        );
        let c = RunConfig::parse(&both).unwrap();
        assert!(c.model.build(2, 0.0, 1.0).is_err());
    }

    #[test]
    fn field_specs() {
        let s = FieldSpec::Stripe {
            axis: 0,
            threshold: 0.5,
            value: 2.0,
        };
        assert_eq!(s.at(&[0.6, 0.0]), 2.0);
        assert_eq!(s.at(&[0.5, 0.0]), 0.0);
        assert!(FieldSpec::Disc {
            center: vec![0.0],
            radius: 1.0,
            value: 1.0
        }
        .check(2)
        .is_err());
    }
}
