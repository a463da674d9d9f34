//! Run configuration: flat `key = value` files, overridden by command-line flags.

use std::fmt;
use std::path::Path;

use stable_info::alphapower::PowerOptions;
use stable_info::GridConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("output.format must be csv or json, got '{s}'")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_points: usize,
    pub extent_factor: f64,
    pub root_tol: f64,
    pub entropy_tol: f64,
    pub slack_tol: f64,
    pub seed: u64,
    pub format: Format,
    /// `-` writes to standard output.
    pub path: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = GridConfig::default();
        Self {
            n_points: grid.n_points,
            extent_factor: grid.extent_factor,
            root_tol: PowerOptions::default().rel_tol,
            entropy_tol: 1e-3,
            slack_tol: 1e-3,
            seed: 42,
            format: Format::Csv,
            path: "-".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("{key}: cannot parse '{v}'"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "grid.n_points" => self.n_points = num(key, value)?,
            "grid.extent_factor" => self.extent_factor = num(key, value)?,
            "tolerances.root" => self.root_tol = num(key, value)?,
            "tolerances.entropy" => self.entropy_tol = num(key, value)?,
            "tolerances.slack" => self.slack_tol = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output.format" => self.format = Format::parse(value)?,
            "output.path" => self.path = value.to_string(),
            _ => return Err(format!("unknown configuration key '{key}'")),
        }
        Ok(())
    }

    /// Applies a `key = value` document; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            self.set(k.trim(), v.trim()).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.grid().validate().map_err(|e| e.to_string())?;
        for (name, v) in [
            ("tolerances.root", self.root_tol),
            ("tolerances.entropy", self.entropy_tol),
            ("tolerances.slack", self.slack_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig { n_points: self.n_points, extent_factor: self.extent_factor, ..GridConfig::default() }
    }

    pub fn power(&self) -> PowerOptions {
        PowerOptions { grid: self.grid(), rel_tol: self.root_tol }
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid.n_points = {}", self.n_points)?;
        writeln!(f, "grid.extent_factor = {}", self.extent_factor)?;
        writeln!(f, "tolerances.root = {:e}", self.root_tol)?;
        writeln!(f, "tolerances.entropy = {:e}", self.entropy_tol)?;
        writeln!(f, "tolerances.slack = {:e}", self.slack_tol)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "output.format = {}", self.format)?;
        writeln!(f, "output.path = {}", self.path)
    }
}
