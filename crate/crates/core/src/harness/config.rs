use std::path::PathBuf;
use std::str::FromStr;

use super::{ExperimentConfig, Mode, NoiseKind, Preset};
use crate::error::{Error, Result};
use crate::hilbert::Metric;

/// Optional settings layered over a preset. Built from a config file and
/// from command-line flags; flags are merged last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub preset: Option<Preset>,
    pub n_points: Option<usize>,
    pub c0: Option<f64>,
    pub delta_rel: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
    pub mode: Option<Mode>,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    pub stop_c: Option<f64>,
    pub noise: Option<NoiseKind>,
    pub out: Option<PathBuf>,
    pub max_iter: Option<usize>,
    pub metric: Option<Metric>,
    pub p: Option<f64>,
    pub shift: Option<u32>,
    pub record_timing: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Validation(format!("invalid value '{value}' for {key}: {e}")))
}

/// Parses a comma-separated list such as `0.02,0.01`.
pub fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let value = value.trim();
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| parse_value(key, v.trim()))
        .collect()
}

/// Reads `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys use the same names as the CLI flags, with `-` or `_`.
pub fn parse_config_file(text: &str) -> Result<ConfigOverrides> {
    let mut o = ConfigOverrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Validation(format!(
                "line {}: expected key = value, got '{line}'",
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "preset" => o.preset = Some(value.parse()?),
            "n-points" => o.n_points = Some(parse_value(k, value)?),
            "c0" => o.c0 = Some(parse_value(k, value)?),
            "delta-rel" => o.delta_rel = Some(parse_list(k, value)?),
            "seeds" => o.seeds = Some(parse_list(k, value)?),
            "mode" => o.mode = Some(value.parse()?),
            "h" => o.h = Some(parse_value(k, value)?),
            "gamma" => o.gamma = Some(parse_value(k, value)?),
            "stop-c" => o.stop_c = Some(parse_value(k, value)?),
            "noise" => o.noise = Some(value.parse()?),
            "out" => o.out = Some(PathBuf::from(value)),
            "max-iter" => o.max_iter = Some(parse_value(k, value)?),
            "metric" => o.metric = Some(value.parse()?),
            "p" => o.p = Some(parse_value(k, value)?),
            "shift" => o.shift = Some(parse_value(k, value)?),
            "record-timing" => o.record_timing = Some(parse_value(k, value)?),
            _ => {
                return Err(Error::Validation(format!(
                    "line {}: unknown key '{}'",
                    lineno + 1,
                    key
                )))
            }
        }
    }
    Ok(o)
}

impl ConfigOverrides {
    /// Field-wise merge; values set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            preset: other.preset.or(self.preset),
            n_points: other.n_points.or(self.n_points),
            c0: other.c0.or(self.c0),
            delta_rel: other.delta_rel.or(self.delta_rel),
            seeds: other.seeds.or(self.seeds),
            mode: other.mode.or(self.mode),
            h: other.h.or(self.h),
            gamma: other.gamma.or(self.gamma),
            stop_c: other.stop_c.or(self.stop_c),
            noise: other.noise.or(self.noise),
            out: other.out.or(self.out),
            max_iter: other.max_iter.or(self.max_iter),
            metric: other.metric.or(self.metric),
            p: other.p.or(self.p),
            shift: other.shift.or(self.shift),
            record_timing: other.record_timing.or(self.record_timing),
        }
    }

    /// Starts from the selected preset and applies every set field.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let preset = self
            .preset
            .ok_or_else(|| Error::Validation("no preset given".into()))?;
        let mut c = ExperimentConfig::preset(preset);
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(v) = self.n_points {
            c.n_points = v;
        }
        if let Some(v) = self.c0 {
            c.c0 = v;
        }
        if let Some(v) = &self.delta_rel {
            c.delta_rel = v.clone();
        }
        if let Some(v) = &self.seeds {
            c.seeds = v.clone();
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.h {
            c.h = v;
        }
        if let Some(v) = self.gamma {
            c.stop.gamma = v;
        }
        if let Some(v) = self.stop_c {
            c.stop.c = v;
        }
        if let Some(v) = self.noise {
            c.noise = v;
        }
        if let Some(v) = &self.out {
            c.out = Some(v.clone());
        }
        if let Some(v) = self.max_iter {
            c.max_iter = v;
        }
        if let Some(v) = self.metric {
            c.stop.metric = v;
        }
        if let Some(v) = self.p {
            c.p = v;
        }
        if let Some(v) = self.shift {
            c.shift = v;
        }
        if let Some(v) = self.record_timing {
            c.record_timing = v;
        }
    }
}
