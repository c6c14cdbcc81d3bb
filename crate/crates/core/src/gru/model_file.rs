//! Versioned plain-text model container.
//!
//! ```text
//! GRUCDR
//! version 1
//! dims <input> <hidden> <output>
//! W_r <rows> <cols>
//! <cols values>            (one line per row)
//! ...                      (R_r b_r W_z R_z b_z W_u R_u b_u W_out b_out)
//! norm_offset 1 <n>
//! norm_scale 1 <n>
//! end
//! ```
//!
//! Values use the shortest decimal form that parses back to the same bits.

use std::fmt::Write as _;

use super::params::{GruDims, GruParams, TENSOR_NAMES};
use crate::train::Normalizer;

pub const MAGIC: &str = "GRUCDR";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelFileError {
    #[error("not a model file (missing {MAGIC} header)")]
    BadMagic,
    #[error("unsupported model file version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("array {name} has shape {found:?}, expected {expected:?}")]
    DimensionMismatch { name: String, expected: (usize, usize), found: (usize, usize) },
    #[error("model file ends early (while reading {0})")]
    TruncatedFile(String),
    #[error("model file line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("refusing to write non-finite value in {0}")]
    NonFinite(&'static str),
}

fn write_array(out: &mut String, name: &str, rows: usize, cols: usize, data: &[f64]) {
    let _ = writeln!(out, "{} {} {}", name, rows, cols);
    for row in data.chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|v| format!("{:?}", v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

pub fn serialize_model(p: &GruParams, norm: &Normalizer) -> Result<Vec<u8>, ModelFileError> {
    let dims = p.dims();
    for (name, t) in TENSOR_NAMES.iter().zip(p.tensors()) {
        if t.iter().any(|v| !v.is_finite()) {
            return Err(ModelFileError::NonFinite(name));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{}", MAGIC);
    let _ = writeln!(out, "version {}", FORMAT_VERSION);
    let _ = writeln!(out, "dims {} {} {}", dims.input, dims.hidden, dims.output);
    for ((name, (rows, cols)), data) in
        TENSOR_NAMES.iter().zip(GruParams::shapes(dims)).zip(p.tensors())
    {
        write_array(&mut out, name, rows, cols, data);
    }
    write_array(&mut out, "norm_offset", 1, norm.offset.len(), &norm.offset);
    write_array(&mut out, "norm_scale", 1, norm.scale.len(), &norm.scale);
    out.push_str("end\n");
    Ok(out.into_bytes())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, context: &str) -> Result<&'a str, ModelFileError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim())
            }
            None => Err(ModelFileError::TruncatedFile(context.to_string())),
        }
    }

    fn malformed(&self, msg: impl Into<String>) -> ModelFileError {
        ModelFileError::Malformed { line: self.last, msg: msg.into() }
    }

    fn header(&mut self, key: &str, n: usize) -> Result<Vec<usize>, ModelFileError> {
        let line = self.next(key)?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.malformed(format!("expected `{}`, found {:?}", key, line)));
        }
        let nums: Vec<usize> = parts
            .map(|s| s.parse().map_err(|_| self.malformed(format!("bad integer {:?}", s))))
            .collect::<Result<_, _>>()?;
        if nums.len() != n {
            return Err(self.malformed(format!("`{}` takes {} integers", key, n)));
        }
        Ok(nums)
    }

    fn array(&mut self, name: &str, expected: (usize, usize)) -> Result<Vec<f64>, ModelFileError> {
        let shape = self.header(name, 2)?;
        let found = (shape[0], shape[1]);
        if found != expected {
            return Err(ModelFileError::DimensionMismatch { name: name.to_string(), expected, found });
        }
        let mut data = Vec::with_capacity(found.0 * found.1);
        for _ in 0..found.0 {
            let line = self.next(name)?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| self.malformed(format!("bad number {:?} in {}", tok, name)))?;
                data.push(v);
            }
            if data.len() - before != found.1 {
                return Err(self.malformed(format!(
                    "row of {} has {} values, expected {}",
                    name,
                    data.len() - before,
                    found.1
                )));
            }
        }
        Ok(data)
    }
}

pub fn deserialize_model(bytes: &[u8]) -> Result<(GruParams, Normalizer), ModelFileError> {
    if !bytes.starts_with(MAGIC.as_bytes()) {
        return Err(ModelFileError::BadMagic);
    }
    let text = std::str::from_utf8(bytes)
        .map_err(|e| ModelFileError::Malformed { line: 0, msg: e.to_string() })?;
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    if lines.next("magic")? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }

    let version_line = lines.next("version")?;
    let found = version_line
        .strip_prefix("version ")
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| lines.malformed("expected `version <n>`"))?;
    if found != FORMAT_VERSION {
        return Err(ModelFileError::VersionMismatch { found });
    }

    let d = lines.header("dims", 3)?;
    let dims = GruDims::new(d[0], d[1], d[2]);
    if dims.input == 0 || dims.hidden == 0 || dims.output == 0 {
        return Err(lines.malformed("dimensions must be positive"));
    }

    let mut p = GruParams::zeros(dims);
    let shapes = GruParams::shapes(dims);
    for ((name, shape), dst) in TENSOR_NAMES.iter().zip(shapes).zip(p.tensors_mut()) {
        let data = lines.array(name, shape)?;
        dst.copy_from_slice(&data);
    }
    let offset = lines.array("norm_offset", (1, dims.input))?;
    let scale = lines.array("norm_scale", (1, dims.input))?;
    if lines.next("end")? != "end" {
        return Err(lines.malformed("expected `end`"));
    }
    let norm = Normalizer::new(offset, scale).map_err(|e| lines.malformed(e.to_string()))?;
    Ok((p, norm))
}
