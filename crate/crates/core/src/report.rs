//! JSON and CSV emitters. Every report carries `{version, config, seed}`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::algebra::{AlgebraLevel, StructureConstants};
use crate::config::{Format, RunConfig};
use crate::error::Result;
use crate::hspace::DefectReport;
use crate::parallelism::{ComponentStat, ConstancyReport};
use crate::VERSION;

#[derive(Debug, Serialize)]
pub struct TablesExport {
    pub version: &'static str,
    pub level: u8,
    pub algebra: &'static str,
    /// Every nonzero a_ijk as [i, j, k, sign].
    pub triples: Vec<[i64; 4]>,
}

pub fn tables_export(level: AlgebraLevel) -> TablesExport {
    TablesExport {
        version: VERSION,
        level: level.get(),
        algebra: level.name(),
        triples: StructureConstants::frozen(level).triples(),
    }
}

#[derive(Debug, Serialize)]
pub struct ConstancyJson<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    pub frame: &'a str,
    pub level: u8,
    pub h: f64,
    pub eps_pole: f64,
    pub samples: usize,
    pub max_dev: f64,
    pub flagged: usize,
    pub min_torsion_norm: f64,
    pub max_torsion_norm: f64,
    pub components: &'a [ComponentStat],
}

impl<'a> ConstancyJson<'a> {
    pub fn new(config: &'a RunConfig, frame: &'a str, level: u8, r: &'a ConstancyReport) -> Self {
        ConstancyJson {
            version: VERSION,
            config,
            seed: config.seed,
            frame,
            level,
            h: r.h,
            eps_pole: r.eps_pole,
            samples: r.samples,
            max_dev: r.max_dev,
            flagged: r.flagged,
            min_torsion_norm: r.min_torsion_norm,
            max_torsion_norm: r.max_torsion_norm,
            components: &r.components,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = provenance(self.config);
        let _ = writeln!(
            s,
            "# frame={} level={} h={} eps_pole={} samples={} max_dev={} flagged={} min_torsion_norm={} max_torsion_norm={}",
            self.frame,
            self.level,
            self.h,
            self.eps_pole,
            self.samples,
            self.max_dev,
            self.flagged,
            self.min_torsion_norm,
            self.max_torsion_norm
        );
        s.push_str("i,j,k,mean,max_dev\n");
        for c in self.components {
            let _ = writeln!(s, "{},{},{},{},{}", c.i, c.j, c.k, c.mean, c.max_dev);
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct DefectJson<'a> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub model: &'a str,
    pub mult: &'a str,
    pub op: &'a str,
    pub seed: u64,
    pub n: usize,
    pub max: f64,
    pub mean: f64,
    pub hist: &'a [u64],
}

impl<'a> DefectJson<'a> {
    pub fn new(config: &'a RunConfig, mult: &'a str, r: &'a DefectReport) -> Self {
        DefectJson {
            version: VERSION,
            config,
            model: config.model.name(),
            mult,
            op: r.op.name(),
            seed: r.seed,
            n: r.n,
            max: r.max,
            mean: r.mean,
            hist: &r.hist,
        }
    }

    /// `key,value` rows: n, max, mean, then hist_0 .. hist_31.
    pub fn to_csv(&self) -> String {
        let mut s = provenance(self.config);
        let _ = writeln!(s, "# model={} mult={} op={}", self.model, self.mult, self.op);
        s.push_str("key,value\n");
        let _ = writeln!(s, "n,{}", self.n);
        let _ = writeln!(s, "max,{}", self.max);
        let _ = writeln!(s, "mean,{}", self.mean);
        for (b, c) in self.hist.iter().enumerate() {
            let _ = writeln!(s, "hist_{b},{c}");
        }
        s
    }
}

/// Envelope for reports without a dedicated schema.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(config: &'a RunConfig, body: T) -> Self {
        Envelope {
            version: VERSION,
            config,
            seed: config.seed,
            body,
        }
    }
}

/// `# version=… seed=… config={json}` header line for CSV output.
pub fn provenance(config: &RunConfig) -> String {
    format!(
        "# version={} seed={} config={}\n",
        VERSION,
        config.seed,
        serde_json::to_string(config).unwrap_or_default()
    )
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Renders with the configured format.
pub fn render<T: Serialize>(format: Format, value: &T, csv: impl FnOnce() -> String) -> Result<String> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => Ok(csv()),
    }
}

/// Writes to `path`, or stdout when `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, content)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octonion_export_has_42_entries() {
        let t = tables_export(AlgebraLevel::OCTONION);
        assert_eq!(t.triples.len(), 42);
        assert!(t.triples.contains(&[1, 2, 3, 1]));
        assert!(t.triples.contains(&[2, 1, 3, -1]));
        assert!(tables_export(AlgebraLevel::COMPLEX).triples.is_empty());
    }
}
