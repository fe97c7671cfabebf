//! Field dumps and image output.
//!
//! Binary dumps start with a short text header, one `key value` pair per
//! line, closed by a line `end`:
//!
//! ```text
//! tvcalib-field 1
//! kind vector
//! shape 256 256
//! components 2
//! spacing 0.00390625
//! origin 0 0
//! mask 0
//! end
//! ```
//!
//! followed by `components * prod(shape)` little-endian `f64` values in
//! component-major order and, when `mask 1`, one byte per cell.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::LevelSetView;
use crate::grid::{GridSpec, ScalarField, VectorField};

const MAGIC: &str = "tvcalib-field";
const FORMAT_VERSION: u32 = 1;

/// A field read back from a dump.
#[derive(Debug, Clone)]
pub enum Dump {
    Scalar(ScalarField),
    Vector(VectorField),
}

fn header(grid: &GridSpec, kind: &str, components: usize) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let partial = grid.mask().iter().any(|m| !m);
    format!(
        "{MAGIC} {FORMAT_VERSION}\nkind {kind}\nshape {}\ncomponents {components}\nspacing {}\norigin {}\nmask {}\nend\n",
        join(grid.shape().iter().map(|s| s.to_string()).collect()),
        grid.spacing(),
        join(grid.origin().iter().map(|s| s.to_string()).collect()),
        partial as u8,
    )
}

fn write_body(out: &mut impl Write, grid: &GridSpec, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    if grid.mask().iter().any(|m| !m) {
        let bytes: Vec<u8> = grid.mask().iter().map(|&m| m as u8).collect();
        out.write_all(&bytes)?;
    }
    Ok(())
}

pub fn write_scalar(field: &ScalarField, out: &mut impl Write) -> Result<()> {
    out.write_all(header(field.grid(), "scalar", 1).as_bytes())?;
    write_body(out, field.grid(), field.values())
}

pub fn write_vector(field: &VectorField, out: &mut impl Write) -> Result<()> {
    let d = field.grid().dim();
    out.write_all(header(field.grid(), "vector", d).as_bytes())?;
    write_body(out, field.grid(), field.components())
}

pub fn save_scalar(field: &ScalarField, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_scalar(field, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn save_vector(field: &VectorField, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_vector(field, &mut f)?;
    f.flush()?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("malformed field dump: {}", msg.into()))
}

pub fn read_dump(input: impl Read) -> Result<Dump> {
    let mut reader = BufReader::new(input);
    let mut kind = None;
    let mut shape = None;
    let mut components = None;
    let mut spacing = None;
    let mut origin = None;
    let mut masked = false;
    let mut line = String::new();
    let mut first = true;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(bad("header not terminated"));
        }
        let l = line.trim_end();
        let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
        if first {
            if key != MAGIC || rest.parse::<u32>().ok() != Some(FORMAT_VERSION) {
                return Err(bad("unknown magic"));
            }
            first = false;
            continue;
        }
        let nums = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number {t}"))))
                .collect()
        };
        match key {
            "end" => break,
            "kind" => kind = Some(rest.to_string()),
            "shape" => {
                shape = Some(
                    rest.split_whitespace()
                        .map(|t| t.parse::<usize>().map_err(|_| bad(format!("bad extent {t}"))))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            "components" => components = Some(rest.parse::<usize>().map_err(|_| bad("components"))?),
            "spacing" => spacing = nums(rest)?.first().copied(),
            "origin" => origin = Some(nums(rest)?),
            "mask" => masked = rest == "1",
            other => return Err(bad(format!("unknown key {other}"))),
        }
    }
    let shape = shape.ok_or_else(|| bad("missing shape"))?;
    let spacing = spacing.ok_or_else(|| bad("missing spacing"))?;
    let origin = origin.ok_or_else(|| bad("missing origin"))?;
    let components = components.ok_or_else(|| bad("missing components"))?;
    let n: usize = shape.iter().product();
    let mut raw = vec![0u8; n * components * 8];
    reader.read_exact(&mut raw)?;
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let grid = if masked {
        let mut m = vec![0u8; n];
        reader.read_exact(&mut m)?;
        GridSpec::with_mask(shape, spacing, origin, m.into_iter().map(|b| b != 0).collect())?
    } else {
        GridSpec::new(shape, spacing, origin)?
    };
    let grid = Arc::new(grid);
    match kind.as_deref() {
        Some("scalar") if components == 1 => Ok(Dump::Scalar(ScalarField::new(grid, values)?)),
        Some("vector") if components == grid.dim() => {
            Ok(Dump::Vector(VectorField::from_components(grid, values)?))
        }
        _ => Err(bad("kind and component count disagree")),
    }
}

pub fn load_dump(path: &Path) -> Result<Dump> {
    read_dump(std::fs::File::open(path)?)
}

/// Index of the cell shown at image pixel `(col, row)`; row 0 is the top,
/// axis 1 points up, 3-D grids show their middle slice along axis 2.
fn pixel_cell(grid: &GridSpec, col: usize, row: usize) -> usize {
    let s = grid.shape();
    let mut idx = vec![col, s[1] - 1 - row];
    if grid.dim() == 3 {
        idx.push(s[2] / 2);
    }
    grid.index_of(&idx)
}

fn image_dims(grid: &GridSpec) -> Result<(usize, usize)> {
    if grid.dim() < 2 {
        return Err(Error::InvalidInput("images need at least two axes".into()));
    }
    Ok((grid.shape()[0], grid.shape()[1]))
}

/// Binary greymap, values scaled linearly from `[min, max]` to `[0, 255]`.
pub fn write_pgm(field: &ScalarField, out: &mut impl Write) -> Result<()> {
    let grid = field.grid();
    let (w, h) = image_dims(grid)?;
    let (lo, hi) = field.range();
    let span = if hi > lo { hi - lo } else { 1.0 };
    write!(out, "P5\n{w} {h}\n255\n")?;
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let v = field.values()[pixel_cell(grid, col, row)];
            pixels.push(((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out.write_all(&pixels)?;
    Ok(())
}

/// Packed bitmap; cells of the set are black.
pub fn write_pbm(set: &LevelSetView, out: &mut impl Write) -> Result<()> {
    let grid = set.grid();
    let (w, h) = image_dims(grid)?;
    write!(out, "P4\n{w} {h}\n")?;
    let stride = w.div_ceil(8);
    let mut bits = vec![0u8; stride * h];
    for row in 0..h {
        for col in 0..w {
            if set.contains(pixel_cell(grid, col, row)) {
                bits[row * stride + col / 8] |= 0x80 >> (col % 8);
            }
        }
    }
    out.write_all(&bits)?;
    Ok(())
}

pub fn save_pgm(field: &ScalarField, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pgm(field, &mut f)?;
    f.flush()?;
    Ok(())
}

pub fn save_pbm(set: &LevelSetView, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pbm(set, &mut f)?;
    f.flush()?;
    Ok(())
}

/// `iteration,relative_gap`.
pub fn gap_history_csv(history: &[(usize, f64)]) -> String {
    let mut out = String::from("iteration,relative_gap\n");
    for (i, g) in history {
        out.push_str(&format!("{i},{g}\n"));
    }
    out
}
