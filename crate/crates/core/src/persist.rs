//! Versioned `key=value` text files for trained models.
//!
//! ```text
//! trajproto-model
//! format_version=1
//! kind=alignment
//! m=31
//! ...
//! end
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips every
//! `f64` exactly. Arrays are space separated, matrices row-major. Keys
//! under `config.` echo the settings that produced the file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::align::{AlignmentModel, RegressorParams};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Trajectory};
use crate::quantize::PrototypeSet;
use crate::scalar::Scalar;

pub const MAGIC: &str = "trajproto-model";
pub const FORMAT_VERSION: u32 = 1;
const END: &str = "end";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Alignment,
    PrototypeSet,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Alignment => "alignment",
            ModelKind::PrototypeSet => "prototype_set",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub kind: ModelKind,
    entries: Vec<(String, String)>,
}

/// Formats a real with 17 significant digits.
pub fn fmt_real<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

fn fmt_reals<T: Scalar>(values: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v:.16e}");
    }
    s
}

fn fmt_points<T: Scalar>(points: &[Point2<T>]) -> String {
    fmt_reals(points.iter().flat_map(|p| [p.x, p.y]))
}

impl ModelFile {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Appends an entry; keys must be unique and free of `=` and newlines.
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        debug_assert!(!key.contains('=') && !key.contains('\n'));
        debug_assert!(self.get(&key).is_none(), "duplicate key {key}");
        self.entries.push((key, value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Entries under `prefix.`, with the prefix stripped.
    pub fn section(&self, prefix: &str) -> Vec<(String, String)> {
        let p = format!("{prefix}.");
        self.entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), v.clone())))
            .collect()
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Format(format!("missing key `{key}`")))
    }

    pub fn parse_value<V: std::str::FromStr>(&self, key: &str) -> Result<V> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::Format(format!("bad value for `{key}`: `{raw}`")))
    }

    pub fn parse_reals<T: Scalar>(&self, key: &str, expected: usize) -> Result<Vec<T>> {
        let raw = self.require(key)?;
        let values = raw
            .split_ascii_whitespace()
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| Error::Format(format!("bad real in `{key}`: `{t}`")))
            })
            .collect::<Result<Vec<T>>>()?;
        if values.len() != expected {
            return Err(Error::Format(format!(
                "`{key}` has {} values, expected {expected}",
                values.len()
            )));
        }
        Ok(values)
    }

    pub fn parse_points<T: Scalar>(&self, key: &str, m: usize) -> Result<Vec<Point2<T>>> {
        Ok(self
            .parse_reals(key, 2 * m)?
            .chunks_exact(2)
            .map(|c| Point2::new(c[0], c[1]))
            .collect())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{MAGIC}\nformat_version={FORMAT_VERSION}\nkind={}\n",
            self.kind.as_str()
        );
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s.push_str(END);
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(Error::Format(format!("missing `{MAGIC}` header")));
        }
        let version_line = lines
            .next()
            .ok_or_else(|| Error::Format("missing format_version".into()))?;
        let found: u32 = version_line
            .strip_prefix("format_version=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad format_version line `{version_line}`")))?;
        if found != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                expected: FORMAT_VERSION,
                found,
            });
        }
        let kind = match lines.next().and_then(|l| l.strip_prefix("kind=")) {
            Some("alignment") => ModelKind::Alignment,
            Some("prototype_set") => ModelKind::PrototypeSet,
            other => return Err(Error::Format(format!("unknown kind {other:?}"))),
        };
        let mut file = ModelFile::new(kind);
        let mut terminated = false;
        for line in lines {
            if line == END {
                terminated = true;
                break;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line without `=`: `{line}`")))?;
            if file.get(k).is_some() {
                return Err(Error::Format(format!("duplicate key `{k}`")));
            }
            file.entries.push((k.to_string(), v.to_string()));
        }
        if !terminated {
            return Err(Error::Format("truncated file (no `end` line)".into()));
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn expect_kind(self, kind: ModelKind) -> Result<Self> {
        if self.kind != kind {
            return Err(Error::Format(format!(
                "expected a {} file, found {}",
                kind.as_str(),
                self.kind.as_str()
            )));
        }
        Ok(self)
    }

    pub fn push_config(&mut self, prefix: &str, echo: &[(String, String)]) {
        for (k, v) in echo {
            self.push(format!("{prefix}.{k}"), v.clone());
        }
    }
}

impl<T: Scalar> AlignmentModel<T> {
    pub fn to_model_file(&self) -> ModelFile {
        let reg = self.regressor();
        let mut f = ModelFile::new(ModelKind::Alignment);
        f.push("m", self.m().to_string());
        f.push("hidden_width", reg.hidden_width().to_string());
        f.push("s_min", fmt_real(self.s_min()));
        f.push("weights_in", fmt_reals(reg.weights_in.iter().copied()));
        f.push("bias_in", fmt_reals(reg.bias_in.iter().copied()));
        f.push("weights_out", fmt_reals(reg.weights_out.iter().copied()));
        f.push("bias_out", fmt_reals(reg.bias_out.iter().copied()));
        f.push("prototype", fmt_points(self.prototype()));
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        if f.kind != ModelKind::Alignment {
            return Err(Error::Format("not an alignment model".into()));
        }
        let m: usize = f.parse_value("m")?;
        let h: usize = f.parse_value("hidden_width")?;
        let d = 2 * m;
        let reg = RegressorParams::from_parts(
            d,
            h,
            f.parse_reals("weights_in", h * d)?,
            f.parse_reals("bias_in", h)?,
            f.parse_reals("weights_out", crate::align::OUTPUT_DIM * h)?,
            f.parse_reals("bias_out", crate::align::OUTPUT_DIM)?,
        )?;
        AlignmentModel::new(reg, f.parse_points("prototype", m)?, f.parse_value("s_min")?)
    }
}

impl<T: Scalar> PrototypeSet<T> {
    pub fn to_model_file(&self) -> ModelFile {
        let mut f = ModelFile::new(ModelKind::PrototypeSet);
        f.push("k", self.k().to_string());
        f.push("m", self.m().to_string());
        for (i, p) in self.prototypes().iter().enumerate() {
            f.push(format!("prototype.{i}.id"), p.id().to_string());
            f.push(format!("prototype.{i}.points"), fmt_points(p.points()));
        }
        if let Some(s) = self.support() {
            f.push(
                "support",
                s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
            );
        }
        f
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        if f.kind != ModelKind::PrototypeSet {
            return Err(Error::Format("not a prototype set".into()));
        }
        let k: usize = f.parse_value("k")?;
        let m: usize = f.parse_value("m")?;
        let prototypes = (0..k)
            .map(|i| {
                let id = f.require(&format!("prototype.{i}.id"))?;
                Trajectory::new(id, f.parse_points(&format!("prototype.{i}.points"), m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let set = PrototypeSet::new(prototypes)?;
        match f.get("support") {
            None => Ok(set),
            Some(raw) => {
                let support = raw
                    .split_ascii_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Format(format!("bad support count `{t}`"))))
                    .collect::<Result<Vec<usize>>>()?;
                set.with_support(support)
                    .map_err(|_| Error::Format("support length differs from k".into()))
            }
        }
    }
}
