//! Dataset-complexity summary of a quantization run.
//!
//! Machine-readable output is one `key=value` per line, using only these keys:
//!
//! - `n_samples`, `n_rejected`, `k_initial`, `k_refined`, `global_error`
//! - `prototype.<i>.support`, `prototype.<i>.ratio`, `prototype.<i>.mean_error`
//!   for `i` in `0..k_refined`
//! - `config.<name>` for every echoed setting

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::persist::{fmt_real, ModelFile, ModelKind};
use crate::quantize::PrototypeSet;

#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeStats {
    pub support: usize,
    pub ratio: f64,
    pub mean_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportSummary {
    pub n_samples: usize,
    pub n_rejected: usize,
    pub k_initial: usize,
    pub k_refined: usize,
    pub prototypes: Vec<PrototypeStats>,
    pub global_error: f64,
    pub config: Vec<(String, String)>,
}

impl ReportSummary {
    pub fn new(
        refined: &PrototypeSet<f64>,
        mean_errors: &[f64],
        n_rejected: usize,
        k_initial: usize,
        global_error: f64,
        config: Vec<(String, String)>,
    ) -> Result<Self> {
        let support = refined
            .support()
            .ok_or_else(|| Error::InvalidConfig("report needs support counts".into()))?;
        if mean_errors.len() != support.len() {
            return Err(Error::LengthMismatch {
                expected: support.len(),
                found: mean_errors.len(),
            });
        }
        let n_samples: usize = support.iter().sum();
        let prototypes = support
            .iter()
            .zip(mean_errors)
            .map(|(&s, &e)| PrototypeStats {
                support: s,
                ratio: s as f64 / n_samples as f64,
                mean_error: e,
            })
            .collect();
        Ok(Self {
            n_samples,
            n_rejected,
            k_initial,
            k_refined: refined.k(),
            prototypes,
            global_error,
            config,
        })
    }

    /// Stores the summary-only fields under `report.`; support counts and
    /// `config.` entries live in the prototype file itself.
    pub fn write_into(&self, f: &mut ModelFile) {
        f.push("report.n_samples", self.n_samples.to_string());
        f.push("report.n_rejected", self.n_rejected.to_string());
        f.push("report.k_initial", self.k_initial.to_string());
        f.push("report.global_error", fmt_real(self.global_error));
        f.push(
            "report.mean_error",
            self.prototypes
                .iter()
                .map(|p| fmt_real(p.mean_error))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }

    pub fn from_model_file(f: &ModelFile) -> Result<Self> {
        if f.kind != ModelKind::PrototypeSet {
            return Err(Error::Format("report needs a prototype_set file".into()));
        }
        let set = PrototypeSet::<f64>::from_model_file(f)?;
        let mean_errors = f.parse_reals("report.mean_error", set.k())?;
        let summary = Self::new(
            &set,
            &mean_errors,
            f.parse_value("report.n_rejected")?,
            f.parse_value("report.k_initial")?,
            f.parse_value("report.global_error")?,
            f.section("config"),
        )?;
        let n: usize = f.parse_value("report.n_samples")?;
        if n != summary.n_samples {
            return Err(Error::Format(format!(
                "report.n_samples = {n} but support sums to {}",
                summary.n_samples
            )));
        }
        Ok(summary)
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_samples={}", self.n_samples);
        let _ = writeln!(s, "n_rejected={}", self.n_rejected);
        let _ = writeln!(s, "k_initial={}", self.k_initial);
        let _ = writeln!(s, "k_refined={}", self.k_refined);
        let _ = writeln!(s, "global_error={}", fmt_real(self.global_error));
        for (i, p) in self.prototypes.iter().enumerate() {
            let _ = writeln!(s, "prototype.{i}.support={}", p.support);
            let _ = writeln!(s, "prototype.{i}.ratio={:.6}", p.ratio);
            let _ = writeln!(s, "prototype.{i}.mean_error={}", fmt_real(p.mean_error));
        }
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k}={v}");
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "samples: {} ({} rejected)   prototypes: {} -> {}   global error: {:.6e}",
            self.n_samples, self.n_rejected, self.k_initial, self.k_refined, self.global_error
        );
        let _ = writeln!(
            s,
            "{:>9}  {:>8}  {:>8}  {:>13}",
            "prototype", "support", "ratio", "mean error"
        );
        for (i, p) in self.prototypes.iter().enumerate() {
            let _ = writeln!(
                s,
                "{:>9}  {:>8}  {:>7.2}%  {:>13.6e}",
                i,
                p.support,
                100.0 * p.ratio,
                p.mean_error
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, Trajectory};

    fn summary() -> ReportSummary {
        let protos = (0..3)
            .map(|k| {
                Trajectory::new(
                    format!("p{k}"),
                    vec![Point2::new(k as f64, 0.0), Point2::new(k as f64, 1.0)],
                )
                .unwrap()
            })
            .collect();
        let set = PrototypeSet::new(protos).unwrap().with_support(vec![5, 3, 2]).unwrap();
        ReportSummary::new(&set, &[0.1, 0.2, 0.0], 1, 10, 0.11, vec![("k".into(), "10".into())]).unwrap()
    }

    #[test]
    fn ratios_sum_to_one() {
        let s = summary();
        assert_eq!(s.n_samples, 10);
        let total: f64 = s.prototypes.iter().map(|p| p.ratio).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn key_set_is_fixed() {
        let text = summary().to_key_values();
        let allowed = |k: &str| {
            ["n_samples", "n_rejected", "k_initial", "k_refined", "global_error"].contains(&k)
                || k.starts_with("config.")
                || (k.starts_with("prototype.") && ["support", "ratio", "mean_error"].iter().any(|f| k.ends_with(f)))
        };
        for line in text.lines() {
            let (k, _) = line.split_once('=').unwrap();
            assert!(allowed(k), "{k}");
        }
        assert!(text.contains("k_refined=3\n"));
        assert!(text.contains("prototype.0.ratio=0.500000\n"));
    }

    #[test]
    fn round_trip_through_prototype_file() {
        let s = summary();
        let protos = (0..3)
            .map(|k| {
                Trajectory::new(
                    format!("p{k}"),
                    vec![Point2::new(k as f64, 0.0), Point2::new(k as f64, 1.0)],
                )
                .unwrap()
            })
            .collect();
        let set = PrototypeSet::new(protos).unwrap().with_support(vec![5, 3, 2]).unwrap();
        let mut f = set.to_model_file();
        f.push_config("config", &s.config);
        s.write_into(&mut f);
        let back = ReportSummary::from_model_file(&ModelFile::parse(&f.to_text()).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
