//! Flat `key = value` run configuration. Every field has a key; `auto`
//! (or an empty value) selects the length-dependent default.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::estimator::{ApproxStrategy, EstimatorConfig, WindowBackend};
use crate::grids::Kind;
use crate::sparse::Overrides;

/// Number of scales used by the desk profile unless overridden.
pub const DESK_SCALES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Kind,
    pub estimator: EstimatorConfig,
    /// Whether a seed was given explicitly.
    pub seed_set: bool,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Adds wall-clock fields to reports (which are then not reproducible).
    pub timing: bool,
    pub search_gamma: Option<usize>,
    pub search_backend: WindowBackend,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Kind::Ed,
            estimator: EstimatorConfig { overrides: Overrides::desk(DESK_SCALES), ..Default::default() },
            seed_set: false,
            output: None,
            csv: None,
            timing: false,
            search_gamma: None,
            search_backend: WindowBackend::Exact,
        }
    }
}

fn opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, BenchError> {
    if v.is_empty() || v == "auto" {
        return Ok(None);
    }
    v.parse().map(Some).map_err(|_| BenchError::Config(format!("bad value `{v}` for `{key}`")))
}

fn req<T: FromStr>(key: &str, v: &str) -> Result<T, BenchError> {
    opt(key, v)?.ok_or_else(|| BenchError::Config(format!("`{key}` needs a value")))
}

fn show<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), T::to_string)
}

impl RunConfig {
    /// Small-input profile with the given number of scales.
    pub fn desk(s: usize) -> RunConfig {
        let mut c = RunConfig::default();
        c.estimator.overrides = Overrides::desk(s);
        c
    }

    /// Formula defaults for every schedule parameter.
    pub fn paper() -> RunConfig {
        let mut c = RunConfig::default();
        c.estimator.overrides = Overrides::default();
        c
    }

    pub fn seed(&self) -> u64 {
        self.estimator.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.estimator.seed = seed;
        self.seed_set = true;
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), BenchError> {
        let e = &mut self.estimator;
        let o = &mut e.overrides;
        match key {
            "mode" => self.mode = v.parse().map_err(BenchError::Config)?,
            "m" => o.m = opt(key, v)?,
            "s" => o.s = opt(key, v)?,
            "phi_y" => o.phi_y = opt(key, v)?,
            "active_prob" => o.active_prob = opt(key, v)?,
            "active_scales" => {
                o.active_scales = if v == "auto" {
                    None
                } else {
                    Some(
                        v.split(',')
                            .map(str::trim)
                            .filter(|t| !t.is_empty())
                            .map(|t| req::<usize>(key, t))
                            .collect::<Result<_, _>>()?,
                    )
                }
            }
            "eta_all_ones" => o.eta_all_ones = req(key, v)?,
            "repeats" => e.repeats = opt(key, v)?,
            "dispatch_threshold" => e.dispatch_threshold = opt(key, v)?,
            "clip_factor" => e.clip_factor = opt(key, v)?,
            "giveup_factor" => e.giveup_factor = opt(key, v)?,
            "slack" => e.slack = req(key, v)?,
            "seed" => {
                let s = req(key, v)?;
                self.set_seed(s);
            }
            "compute_exact" => e.compute_exact = req(key, v)?,
            "approx" => {
                e.approx = match v {
                    "exact" => ApproxStrategy::Exact,
                    "band_doubling" => ApproxStrategy::BandDoubling,
                    _ => return Err(BenchError::Config(format!("bad value `{v}` for `approx`"))),
                }
            }
            "pad_exponent" => e.pad_exponent = req(key, v)?,
            "pad_byte" => e.pad_byte = req(key, v)?,
            "output" => self.output = opt(key, v)?,
            "csv" => self.csv = opt(key, v)?,
            "timing" => self.timing = req(key, v)?,
            "search_gamma" => self.search_gamma = opt(key, v)?,
            "search_backend" => {
                self.search_backend = match v {
                    "exact" => WindowBackend::Exact,
                    "estimator" => WindowBackend::Estimator,
                    _ => return Err(BenchError::Config(format!("bad value `{v}` for `search_backend`"))),
                }
            }
            _ => return Err(BenchError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), BenchError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| BenchError::Config(format!("line {}: {e}", no + 1)))?;
        }
        self.validate()
    }

    pub fn parse(text: &str) -> Result<RunConfig, BenchError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let e = &self.estimator;
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if e.repeats == Some(0) {
            return bad("repeats must be positive");
        }
        if e.clip_factor.is_some_and(|c| c.is_nan() || c <= 0.0) {
            return bad("clip_factor must be positive");
        }
        if e.giveup_factor.is_some_and(|c| c.is_nan() || c <= 0.0) {
            return bad("giveup_factor must be positive");
        }
        if !(0.0..1.0).contains(&e.slack) {
            return bad("slack must lie in [0, 1)");
        }
        if !(e.pad_exponent > 0.0 && e.pad_exponent <= 1.0) {
            return bad("pad_exponent must lie in (0, 1]");
        }
        if self.search_gamma == Some(0) {
            return bad("search_gamma must be positive");
        }
        Ok(())
    }

    /// Every key, one per line, in a fixed order.
    pub fn to_text(&self) -> String {
        let e = &self.estimator;
        let o = &e.overrides;
        let mut s = String::new();
        let scales = o
            .active_scales
            .as_ref()
            .map_or_else(|| "auto".into(), |v| v.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        let path = |p: &Option<PathBuf>| p.as_ref().map_or_else(|| "auto".into(), |p| p.display().to_string());
        let approx = match e.approx {
            ApproxStrategy::Exact => "exact",
            ApproxStrategy::BandDoubling => "band_doubling",
        };
        let backend = match self.search_backend {
            WindowBackend::Exact => "exact",
            WindowBackend::Estimator => "estimator",
        };
        let pairs: Vec<(&str, String)> = vec![
            ("mode", self.mode.to_string()),
            ("m", show(&o.m)),
            ("s", show(&o.s)),
            ("phi_y", show(&o.phi_y)),
            ("active_prob", show(&o.active_prob)),
            ("active_scales", scales),
            ("eta_all_ones", o.eta_all_ones.to_string()),
            ("repeats", show(&e.repeats)),
            ("dispatch_threshold", show(&e.dispatch_threshold)),
            ("clip_factor", show(&e.clip_factor)),
            ("giveup_factor", show(&e.giveup_factor)),
            ("slack", e.slack.to_string()),
            ("seed", e.seed.to_string()),
            ("compute_exact", e.compute_exact.to_string()),
            ("approx", approx.into()),
            ("pad_exponent", e.pad_exponent.to_string()),
            ("pad_byte", e.pad_byte.to_string()),
            ("output", path(&self.output)),
            ("csv", path(&self.csv)),
            ("timing", self.timing.to_string()),
            ("search_gamma", show(&self.search_gamma)),
            ("search_backend", backend.into()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::desk(6);
        c.mode = Kind::Lcs;
        c.set_seed(42);
        c.estimator.clip_factor = Some(f64::INFINITY);
        c.estimator.overrides.active_scales = Some(vec![3, 6]);
        c.output = Some("out.json".into());
        let back = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_errors() {
        let c = RunConfig::parse("# desk\nmode = lcs # trailing\n\nseed=5\n").unwrap();
        assert_eq!(c.mode, Kind::Lcs);
        assert_eq!(c.seed(), 5);
        assert!(c.seed_set);
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("repeats = 0").is_err());
        assert!(RunConfig::parse("mode").is_err());
    }
}
