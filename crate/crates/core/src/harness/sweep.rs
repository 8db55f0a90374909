//! One-parameter sweeps around a base configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_experiment, ExperimentConfig, ResultsDocument, RESULTS_SCHEMA_VERSION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Step,
    Buffer,
    SeamOffset,
    Boundary,
    Scheme,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Step => "step",
            SweepAxis::Buffer => "buffer",
            SweepAxis::SeamOffset => "seam-offset",
            SweepAxis::Boundary => "boundary",
            SweepAxis::Scheme => "scheme",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "step" | "s" => Ok(SweepAxis::Step),
            "buffer" | "b" => Ok(SweepAxis::Buffer),
            "seam-offset" | "t" => Ok(SweepAxis::SeamOffset),
            "boundary" => Ok(SweepAxis::Boundary),
            "scheme" => Ok(SweepAxis::Scheme),
            other => Err(format!(
                "unknown sweep axis '{other}' (expected step, buffer, seam-offset, boundary or scheme)"
            )),
        }
    }
}

/// Splits `a..b` (inclusive) or a comma list into values.
pub fn parse_values(text: &str) -> Result<Vec<String>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let parse = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| Error::Config(format!("bad range bound '{v}' in '{text}'")))
        };
        let (lo, hi) = (parse(a)?, parse(b)?);
        if lo > hi {
            return Err(Error::Config(format!("empty range '{text}'")));
        }
        return Ok((lo..=hi).map(|v| v.to_string()).collect());
    }
    let values: Vec<String> = text.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Config("no sweep values given".into()));
    }
    Ok(values)
}

/// The base configuration with `axis` set to `value`.
pub fn apply(base: &ExperimentConfig, axis: SweepAxis, value: &str) -> Result<ExperimentConfig> {
    let bad = |e: String| Error::Config(format!("{axis} value '{value}': {e}"));
    let mut config = base.clone();
    match axis {
        SweepAxis::Step => config.step = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
        SweepAxis::Buffer => {
            config.buffer = Some(value.parse().map_err(|e| bad(format!("{e}")))?);
            config.window = None;
        }
        SweepAxis::SeamOffset => config.seam_offset = value.parse().map_err(|e| bad(format!("{e}")))?,
        SweepAxis::Boundary => config.artificial_boundary = value.parse().map_err(bad)?,
        SweepAxis::Scheme => config.scheme = value.parse().map_err(bad)?,
    }
    config.output = None;
    config.shot_dump = None;
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: String,
    pub results: ResultsDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDocument {
    pub schema_version: u32,
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepDocument {
    /// One row per `(value, d, p)`.
    pub fn csv(&self) -> String {
        let mut out = format!("{},d,p,p_l,p_l_low,p_l_high,std_err\n", self.axis);
        for pt in &self.points {
            for c in &pt.results.cells {
                let (p_l, lo, hi, se) = c
                    .fit
                    .as_ref()
                    .map_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN), |f| (f.p_l, f.interval.0, f.interval.1, f.std_err));
                out.push_str(&format!("{},{},{},{p_l},{lo},{hi},{se}\n", pt.value, c.d, c.p));
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path.with_extension("json"), serde_json::to_string_pretty(self)?)?;
        std::fs::write(path.with_extension("csv"), self.csv())?;
        Ok(())
    }
}

/// Runs the base configuration once per value. All configurations are
/// validated before anything runs.
pub fn run_sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[String]) -> Result<SweepDocument> {
    let configs: Vec<ExperimentConfig> = values.iter().map(|v| apply(base, axis, v)).collect::<Result<_>>()?;
    let points = values
        .iter()
        .zip(&configs)
        .map(|(value, config)| {
            Ok(SweepPoint {
                value: value.clone(),
                results: run_experiment(config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = SweepDocument {
        schema_version: RESULTS_SCHEMA_VERSION,
        axis,
        points,
    };
    if let Some(path) = &base.output {
        doc.write(path)?;
    }
    Ok(doc)
}
