//! `fgrid v1`: a plain-text field-grid format.
//!
//! ```text
//! #fgrid v1
//! nx=<usize>
//! ny=<usize>
//! dx=<f64>
//! dy=<f64>
//! origin=<x>,<y>
//! components=1|4
//! k=<f64>
//! <re0> <im0> [<re1> <im1> <re2> <im2> <re3> <im3>]   (nx·ny lines, row-major)
//! ```
//!
//! Numbers are written with 17 significant digits, so a write/read cycle is
//! bit-exact. Lines starting with `#` after the magic line are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::algebra::DiracSpinor;
use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D, SpinorField2D};
use crate::C64;

pub const MAGIC: &str = "#fgrid v1";

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField2D),
    Spinor(SpinorField2D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    /// Wavenumber the field was computed at; 0 for masks.
    pub k: f64,
    pub data: FieldData,
}

impl FieldFile {
    pub fn scalar(field: ScalarField2D, k: f64) -> Self {
        Self { k, data: FieldData::Scalar(field) }
    }

    pub fn spinor(field: SpinorField2D, k: f64) -> Self {
        Self { k, data: FieldData::Spinor(field) }
    }

    pub fn grid(&self) -> &Grid2D {
        match &self.data {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Spinor(f) => f.grid(),
        }
    }

    pub fn components(&self) -> usize {
        match self.data {
            FieldData::Scalar(_) => 1,
            FieldData::Spinor(_) => 4,
        }
    }

    pub fn to_text(&self) -> String {
        let g = self.grid();
        let mut out = String::with_capacity(g.len() * 50 * self.components() + 128);
        out.push_str(MAGIC);
        out.push('\n');
        let _ = writeln!(out, "nx={}", g.nx);
        let _ = writeln!(out, "ny={}", g.ny);
        let _ = writeln!(out, "dx={}", fmt_num(g.dx));
        let _ = writeln!(out, "dy={}", fmt_num(g.dy));
        let _ = writeln!(out, "origin={},{}", fmt_num(g.origin[0]), fmt_num(g.origin[1]));
        let _ = writeln!(out, "components={}", self.components());
        let _ = writeln!(out, "k={}", fmt_num(self.k));
        let mut push = |vals: &[C64]| {
            for (i, v) in vals.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{} {}", fmt_num(v.re), fmt_num(v.im));
            }
            out.push('\n');
        };
        match &self.data {
            FieldData::Scalar(f) => f.values().iter().for_each(|v| push(std::slice::from_ref(v))),
            FieldData::Spinor(f) => f.values().iter().for_each(|v| push(v.components())),
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse().map(|(f, _)| f)
    }

    /// Like [`FieldFile::parse`], also returning `(line, byte offset)` of
    /// every data row.
    pub fn parse_located(text: &str) -> Result<(Self, Vec<(usize, usize)>)> {
        Parser::new(text).parse()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Parser<'a> {
    lines: Vec<(usize, usize, &'a str)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut offset = 0;
        for (i, raw) in text.split_inclusive('\n').enumerate() {
            lines.push((i + 1, offset, raw.trim_end_matches(['\n', '\r'])));
            offset += raw.len();
        }
        Self { lines, pos: 0, end: text.len() }
    }

    fn err_at(line: usize, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse { line, offset, message: message.into() }
    }

    fn eof(&self, what: &str) -> Error {
        Self::err_at(self.lines.len() + 1, self.end, format!("unexpected end of file, expected {what}"))
    }

    /// Next non-comment line (the magic line is read separately).
    fn next(&mut self) -> Option<(usize, usize, &'a str)> {
        while self.pos < self.lines.len() {
            let l = self.lines[self.pos];
            self.pos += 1;
            let t = l.2.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some(l);
        }
        None
    }

    fn header<T: std::str::FromStr>(&mut self, key: &str) -> Result<(T, usize, usize)> {
        let (line, offset, text) = self.next().ok_or_else(|| self.eof(&format!("'{key}='")))?;
        let Some((k, v)) = text.split_once('=') else {
            return Err(Self::err_at(line, offset, format!("expected '{key}=<value>', found '{text}'")));
        };
        if k.trim() != key {
            return Err(Self::err_at(line, offset, format!("expected key '{key}', found '{}'", k.trim())));
        }
        let value = v.trim().parse().map_err(|_| Self::err_at(line, offset, format!("invalid value '{}' for '{key}'", v.trim())))?;
        Ok((value, line, offset))
    }

    fn parse(mut self) -> Result<(FieldFile, Vec<(usize, usize)>)> {
        match self.lines.first() {
            Some((_, _, l)) if l.trim() == MAGIC => self.pos = 1,
            Some((line, offset, l)) => return Err(Self::err_at(*line, *offset, format!("expected '{MAGIC}', found '{l}'"))),
            None => return Err(self.eof(&format!("'{MAGIC}'"))),
        }
        let (nx, nx_line, nx_off): (usize, _, _) = self.header("nx")?;
        let (ny, _, _): (usize, _, _) = self.header("ny")?;
        let (dx, _, _): (f64, _, _) = self.header("dx")?;
        let (dy, _, _): (f64, _, _) = self.header("dy")?;
        let (origin, o_line, o_off): (String, _, _) = self.header("origin")?;
        let origin = match origin.split_once(',').map(|(a, b)| (a.trim().parse::<f64>(), b.trim().parse::<f64>())) {
            Some((Ok(a), Ok(b))) => [a, b],
            _ => return Err(Self::err_at(o_line, o_off, format!("origin must be '<x>,<y>', found '{origin}'"))),
        };
        let (components, c_line, c_off): (usize, _, _) = self.header("components")?;
        if components != 1 && components != 4 {
            return Err(Self::err_at(c_line, c_off, format!("components must be 1 or 4, found {components}")));
        }
        let (k, _, _): (f64, _, _) = self.header("k")?;
        let grid = Grid2D::new(nx, ny, dx, dy, origin).map_err(|e| Self::err_at(nx_line, nx_off, e.to_string()))?;

        let mut values = Vec::with_capacity(grid.len() * components);
        let mut rows = Vec::with_capacity(grid.len());
        for row in 0..grid.len() {
            let (line, offset, text) = self.next().ok_or_else(|| self.eof(&format!("data row {} of {}", row + 1, grid.len())))?;
            rows.push((line, offset));
            let mut count = 0;
            let mut fields = text.split_whitespace();
            while let Some(re) = fields.next() {
                let im = fields
                    .next()
                    .ok_or_else(|| Self::err_at(line, offset, "odd number of columns: every value needs re and im"))?;
                let parse = |s: &str| s.parse::<f64>().map_err(|_| Self::err_at(line, offset, format!("invalid number '{s}'")));
                values.push(C64::new(parse(re)?, parse(im)?));
                count += 1;
            }
            if count != components {
                return Err(Self::err_at(line, offset, format!("expected {components} complex values, found {count}")));
            }
        }
        if let Some((line, offset, _)) = self.next() {
            return Err(Self::err_at(line, offset, format!("trailing data after {} rows", grid.len())));
        }
        let data = if components == 1 {
            FieldData::Scalar(ScalarField2D::new(grid, values)?)
        } else {
            let spinors = values.chunks_exact(4).map(|c| DiracSpinor::new([c[0], c[1], c[2], c[3]])).collect();
            FieldData::Spinor(SpinorField2D::new(grid, spinors)?)
        };
        Ok((FieldFile { k, data }, rows))
    }
}
