//! CSV assembly and atomic file output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::atlas::Polyline;

/// Seventeen significant digits, so every value reads back bit-exactly.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV document built in memory. The header row is always present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(|f| f.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn blank(&mut self) {
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Boundary polylines as `param1,param2,max_re_residual`, one blank line
/// between polylines.
pub fn boundary_csv(polylines: &[Polyline]) -> Csv {
    let mut csv = Csv::new(&["param1", "param2", "max_re_residual"]);
    for (i, p) in polylines.iter().enumerate() {
        if i > 0 {
            csv.blank();
        }
        for (pt, r) in p.points.iter().zip(&p.residuals) {
            csv.row(&[num(pt[0]), num(pt[1]), num(*r)]);
        }
    }
    csv
}

/// Writes `contents` to `dir/name` through a temporary file and a rename,
/// so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}
