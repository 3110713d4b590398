//! PPM images and CSV dumps of λ-plane scans.
//!
//! Shading: converged cells are black, bounded non-convergent cells dark
//! grey, divergent cells a grey that lightens the faster the orbit escaped.
//! Flagged λ values (exceptional points, say) can be overlaid in red.

use std::io::{Read, Write};

use dynspec_core::analysis::{CellClass, DomainGrid, GridSpec};
use dynspec_core::C64;
use serde::{Deserialize, Serialize};

pub const BOUNDED_GREY: u8 = 72;
/// Darkest grey used for the slowest escape.
pub const SLOW_ESCAPE_GREY: u8 = 110;
pub const OVERLAY_RED: [u8; 3] = [255, 0, 0];

fn escape_grey(escape: usize, slowest: usize) -> u8 {
    let t = ((1 + escape) as f64).ln() / ((1 + slowest.max(1)) as f64).ln();
    let span = f64::from(255 - SLOW_ESCAPE_GREY);
    (255.0 - span * t.clamp(0.0, 1.0)).round() as u8
}

/// Row and column of the pixel whose sample point is nearest `lambda`, if
/// it falls inside the grid.
pub fn pixel_of(spec: &GridSpec, lambda: C64) -> Option<(usize, usize)> {
    let col = ((lambda.re - spec.re_min) / spec.pixel_re()).round();
    let row = ((spec.im_max - lambda.im) / spec.pixel_im()).round();
    let inside = |x: f64, n: usize| x >= 0.0 && x < n as f64;
    (inside(col, spec.res_re) && inside(row, spec.res_im)).then(|| (row as usize, col as usize))
}

/// RGB pixels, row-major, top row first.
pub fn shade(grid: &DomainGrid, overlay: &[C64]) -> Vec<[u8; 3]> {
    let slowest = grid.cells.iter().filter_map(|c| c.escape).max().unwrap_or(1);
    let mut px: Vec<[u8; 3]> = grid
        .cells
        .iter()
        .map(|c| match c.class {
            CellClass::Converged => [0, 0, 0],
            CellClass::BoundedNonConverged => [BOUNDED_GREY; 3],
            CellClass::Diverged => [escape_grey(c.escape.unwrap_or(c.iterations), slowest); 3],
        })
        .collect();
    for &l in overlay {
        if let Some((r, c)) = pixel_of(&grid.spec, l) {
            px[r * grid.spec.res_re + c] = OVERLAY_RED;
        }
    }
    px
}

/// Binary PPM (P6).
pub fn write_ppm<W: Write>(grid: &DomainGrid, overlay: &[C64], mut out: W) -> std::io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", grid.spec.res_re, grid.spec.res_im)?;
    let bytes: Vec<u8> = shade(grid, overlay).into_iter().flatten().collect();
    out.write_all(&bytes)?;
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub re: f64,
    pub im: f64,
    pub class: String,
    pub iters: usize,
}

/// Grid CSV with columns `re, im, class, iters`, one row per cell in
/// row-major order.
pub fn write_grid_csv<W: Write>(grid: &DomainGrid, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, c) in grid.cells.iter().enumerate() {
        let l = grid.spec.lambda_at(i);
        w.serialize(GridRecord {
            re: l.re,
            im: l.im,
            class: c.class.as_str().into(),
            iters: c.iterations,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum GridCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: unknown class `{class}`")]
    Class { row: usize, class: String },
}

/// Reads a grid CSV back as `(λ, class, iterations)` triples.
pub fn read_grid_csv<R: Read>(input: R) -> Result<Vec<(C64, CellClass, usize)>, GridCsvError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (row, rec) in r.deserialize::<GridRecord>().enumerate() {
        let rec = rec?;
        let class = CellClass::parse(&rec.class).ok_or_else(|| GridCsvError::Class {
            row,
            class: rec.class.clone(),
        })?;
        out.push((C64::new(rec.re, rec.im), class, rec.iters));
    }
    Ok(out)
}

/// Reads overlay points, one `re,im` (or `re`) per line; blank lines and
/// lines starting with `#` are skipped.
pub fn parse_overlay(text: &str) -> Result<Vec<C64>, String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(crate::problem::parse_complex)
        .collect()
}
