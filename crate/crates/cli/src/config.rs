//! Flat `key = value` configuration with `#` comments.
//!
//! Every key is optional; an empty file yields the baseline scenario. Errors
//! carry the 1-based line they refer to (0 when the problem is a combination
//! of defaults).

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nfpls::{ArrayGeometry, ChannelModel, NodeGeometry};

use crate::grid::{GridScale, GridSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source_name}:{line}: {message}")]
pub struct ConfigError {
    pub source_name: String,
    pub line: usize,
    pub message: String,
}

/// Fully resolved sweep parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub wavelength: f64,
    pub spacing: f64,
    pub element_area: f64,
    pub m_x: usize,
    pub m_z: usize,
    pub snr_db: f64,
    pub noise_db: f64,
    pub r0: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub theta_e: f64,
    pub phi_e: f64,
    pub r_b: f64,
    pub r_e: f64,
    pub quad_order: usize,
    pub grid: Option<GridSpec>,
    pub threshold: f64,
    pub models: Vec<ChannelModel>,
    pub threads: Option<usize>,
    pub uncorrected_forms: bool,
    pub output_dir: Option<PathBuf>,
    /// Keys given explicitly; experiments only apply their own defaults to the rest.
    pub explicit: HashSet<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let lambda = 0.125;
        Self {
            wavelength: lambda,
            spacing: lambda / 2.0,
            element_area: lambda * lambda / (4.0 * PI),
            m_x: 51,
            m_z: 51,
            snr_db: 40.0,
            noise_db: -10.0,
            r0: 1.0,
            theta_b: PI / 3.0,
            phi_b: 2.0 * PI / 3.0,
            theta_e: PI / 3.0,
            phi_e: 2.0 * PI / 3.0,
            r_b: 10.0,
            r_e: 20.0,
            quad_order: 100,
            grid: None,
            threshold: 0.5,
            models: ChannelModel::ALL.to_vec(),
            threads: None,
            uncorrected_forms: false,
            output_dir: None,
            explicit: HashSet::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "wavelength",
    "spacing_d",
    "element_area",
    "m_x",
    "m_z",
    "snr_db",
    "noise_db",
    "r0",
    "theta_b",
    "phi_b",
    "theta_e",
    "phi_e",
    "r_b",
    "r_e",
    "quad_order",
    "grid_variable",
    "grid_start",
    "grid_stop",
    "grid_points",
    "grid_scale",
    "threshold",
    "models",
    "threads",
    "uncorrected_forms",
    "output_dir",
];

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SweepConfig {
    /// Linear transmit SNR P/σ².
    pub fn snr(&self) -> f64 {
        db_to_linear(self.snr_db)
    }
    /// Noise power σ² in watts.
    pub fn noise(&self) -> f64 {
        db_to_linear(self.noise_db)
    }
    pub fn power(&self) -> f64 {
        self.snr() * self.noise()
    }

    pub fn array(&self) -> nfpls::Result<ArrayGeometry> {
        ArrayGeometry::new(
            self.m_x,
            self.m_z,
            self.spacing,
            self.element_area.sqrt(),
            self.wavelength,
        )
    }
    pub fn bob(&self) -> nfpls::Result<NodeGeometry> {
        NodeGeometry::new(self.r_b, self.theta_b, self.phi_b)
    }
    pub fn eve(&self) -> nfpls::Result<NodeGeometry> {
        NodeGeometry::new(self.r_e, self.theta_e, self.phi_e)
    }
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source_name: name.clone(),
            line: 0,
            message: format!("cannot read: {e}"),
        })?;
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, message: String| ConfigError {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut cfg = SweepConfig::default();
        let mut lines_of = std::collections::HashMap::new();
        let mut grid = GridDraft::default();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{body}`")))?;
            if !KEYS.contains(&key) {
                return Err(err(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(line, format!("`{key}` has no value")));
            }
            if let Some(prev) = lines_of.insert(key.to_string(), line) {
                return Err(err(line, format!("`{key}` already set on line {prev}")));
            }
            cfg.explicit.insert(key.to_string());
            cfg.apply(key, value, &mut grid).map_err(|m| err(line, m))?;
        }

        if !cfg.is_explicit("spacing_d") {
            cfg.spacing = cfg.wavelength / 2.0;
        }
        if !cfg.is_explicit("element_area") {
            cfg.element_area = cfg.wavelength * cfg.wavelength / (4.0 * PI);
        }
        let line_of = |k: &str| lines_of.get(k).copied().unwrap_or(0);
        cfg.array().map_err(|e| {
            let l = ["m_x", "m_z", "spacing_d", "element_area", "wavelength"]
                .iter()
                .map(|k| line_of(k))
                .max();
            err(l.unwrap_or(0), e.to_string())
        })?;
        cfg.bob().map_err(|e| {
            err(
                line_of("theta_b").max(line_of("phi_b")).max(line_of("r_b")),
                e.to_string(),
            )
        })?;
        cfg.eve().map_err(|e| {
            err(
                line_of("theta_e").max(line_of("phi_e")).max(line_of("r_e")),
                e.to_string(),
            )
        })?;
        cfg.grid = grid
            .finish()
            .map_err(|m| err(line_of("grid_variable").max(line_of("grid_points")), m))?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str, grid: &mut GridDraft) -> Result<(), String> {
        match key {
            "wavelength" => self.wavelength = positive(value)?,
            "spacing_d" => self.spacing = positive(value)?,
            "element_area" => self.element_area = positive(value)?,
            "m_x" => self.m_x = odd_count(value)?,
            "m_z" => self.m_z = odd_count(value)?,
            "snr_db" => self.snr_db = finite(value)?,
            "noise_db" => self.noise_db = finite(value)?,
            "r0" => self.r0 = positive(value)?,
            "theta_b" => self.theta_b = finite(value)?,
            "phi_b" => self.phi_b = finite(value)?,
            "theta_e" => self.theta_e = finite(value)?,
            "phi_e" => self.phi_e = finite(value)?,
            "r_b" => self.r_b = positive(value)?,
            "r_e" => self.r_e = positive(value)?,
            "quad_order" => {
                self.quad_order = integer(value)?;
                if self.quad_order < 10 {
                    return Err(format!(
                        "quad_order must be at least 10, got {}",
                        self.quad_order
                    ));
                }
            }
            "grid_variable" => grid.variable = Some(value.to_string()),
            "grid_start" => grid.start = Some(finite(value)?),
            "grid_stop" => grid.stop = Some(finite(value)?),
            "grid_points" => grid.points = Some(integer(value)?),
            "grid_scale" => grid.scale = Some(value.parse()?),
            "threshold" => {
                let t = finite(value)?;
                if !(t > 0.0 && t < 1.0) {
                    return Err(format!("threshold must lie in (0, 1), got {t}"));
                }
                self.threshold = t;
            }
            "models" => self.models = parse_models(value)?,
            "threads" => {
                let n = integer(value)?;
                if n == 0 {
                    return Err("threads must be at least 1".into());
                }
                self.threads = Some(n);
            }
            "uncorrected_forms" => {
                self.uncorrected_forms = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(format!("expected true or false, got `{value}`")),
                }
            }
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            _ => unreachable!("key list and match arms out of sync"),
        }
        Ok(())
    }

    /// Re-parseable listing of every effective value; derived quantities as comments.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("wavelength", fmt_f(self.wavelength));
        kv("spacing_d", fmt_f(self.spacing));
        kv("element_area", fmt_f(self.element_area));
        kv("m_x", self.m_x.to_string());
        kv("m_z", self.m_z.to_string());
        kv("snr_db", fmt_f(self.snr_db));
        kv("noise_db", fmt_f(self.noise_db));
        kv("r0", fmt_f(self.r0));
        kv("theta_b", fmt_f(self.theta_b));
        kv("phi_b", fmt_f(self.phi_b));
        kv("theta_e", fmt_f(self.theta_e));
        kv("phi_e", fmt_f(self.phi_e));
        kv("r_b", fmt_f(self.r_b));
        kv("r_e", fmt_f(self.r_e));
        kv("quad_order", self.quad_order.to_string());
        if let Some(g) = &self.grid {
            kv("grid_variable", g.variable.clone());
            kv("grid_start", fmt_f(g.start));
            kv("grid_stop", fmt_f(g.stop));
            kv("grid_points", g.points.to_string());
            kv("grid_scale", g.scale.to_string());
        }
        kv("threshold", fmt_f(self.threshold));
        kv(
            "models",
            self.models
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        if let Some(t) = self.threads {
            kv("threads", t.to_string());
        }
        kv("uncorrected_forms", self.uncorrected_forms.to_string());
        if let Some(d) = &self.output_dir {
            kv("output_dir", d.display().to_string());
        }
        writeln!(s, "# snr = {}", fmt_f(self.snr())).unwrap();
        writeln!(s, "# noise = {} W", fmt_f(self.noise())).unwrap();
        writeln!(s, "# power = {} W", fmt_f(self.power())).unwrap();
        s
    }
}

impl fmt::Display for SweepConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.echo())
    }
}

#[derive(Default)]
struct GridDraft {
    variable: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    scale: Option<GridScale>,
}

impl GridDraft {
    fn finish(self) -> Result<Option<GridSpec>, String> {
        let any = self.variable.is_some()
            || self.start.is_some()
            || self.stop.is_some()
            || self.points.is_some()
            || self.scale.is_some();
        if !any {
            return Ok(None);
        }
        let (Some(variable), Some(start), Some(stop), Some(points)) =
            (self.variable, self.start, self.stop, self.points)
        else {
            return Err(
                "grid needs grid_variable, grid_start, grid_stop and grid_points together".into(),
            );
        };
        GridSpec::new(
            variable,
            start,
            stop,
            points,
            self.scale.unwrap_or(GridScale::Linear),
        )
        .map(Some)
    }
}

/// Shortest representation that parses back to the same f64.
fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

fn finite(v: &str) -> Result<f64, String> {
    let x = f64::from_str(v).map_err(|_| format!("`{v}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok(x)
}

fn positive(v: &str) -> Result<f64, String> {
    let x = finite(v)?;
    if x <= 0.0 {
        return Err(format!("expected a positive value, got {x}"));
    }
    Ok(x)
}

fn integer(v: &str) -> Result<usize, String> {
    usize::from_str(v).map_err(|_| format!("`{v}` is not a non-negative integer"))
}

fn odd_count(v: &str) -> Result<usize, String> {
    let n = integer(v)?;
    if n % 2 == 0 {
        return Err(format!("antenna counts must be odd, got {n}"));
    }
    Ok(n)
}

pub fn parse_models(v: &str) -> Result<Vec<ChannelModel>, String> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: ChannelModel = part.parse().map_err(|e: nfpls::Error| e.to_string())?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err("model list is empty".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SweepConfig, ConfigError> {
        SweepConfig::parse(s, "test.cfg")
    }

    #[test]
    fn empty_file_is_baseline() {
        let c = parse("").unwrap();
        assert_eq!(c.m_x, 51);
        assert_eq!(c.spacing, 0.0625);
        assert!((c.snr() - 1e4).abs() < 1e-9);
        assert!((c.noise() - 0.1).abs() < 1e-15);
        assert_eq!(c.models.len(), 3);
        assert!(c.grid.is_none());
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse("# header\n  m_x = 21   # trailing\n\nr_e=30\n").unwrap();
        assert_eq!(c.m_x, 21);
        assert_eq!(c.r_e, 30.0);
        assert!(c.is_explicit("r_e") && !c.is_explicit("r_b"));
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse("m_x = 21\nm_z = 50\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("odd"));
        let e = parse("\nbogus = 1\n").unwrap_err();
        assert_eq!((e.line, e.message.as_str()), (2, "unknown key `bogus`"));
        let e = parse("r_b = ten\n").unwrap_err();
        assert!(e.message.contains("not a number"));
        assert_eq!(parse("r_b = 1\nr_b = 2\n").unwrap_err().line, 2);
        assert!(parse("m_x 5\n").is_err());
        assert!(parse("threshold = 1.5\n").is_err());
        assert!(parse("models = upw,fancy\n").is_err());
        assert!(parse("grid_points = 10\n").is_err());
        assert_eq!(e.to_string().split(':').next().unwrap(), "test.cfg");
    }

    #[test]
    fn derived_defaults_follow_wavelength() {
        let c = parse("wavelength = 0.01\n").unwrap();
        assert_eq!(c.spacing, 0.005);
        assert!((c.element_area - 1e-4 / (4.0 * PI)).abs() < 1e-18);
    }

    #[test]
    fn echo_round_trips_and_shows_linear_snr() {
        let c = parse("snr_db = 40\nmodels = nusw, upw\ngrid_variable = r_e\ngrid_start = 1\ngrid_stop = 5\ngrid_points = 3\n")
            .unwrap();
        let echo = c.echo();
        assert!(echo.contains("# snr = 10000.0"));
        let mut back = parse(&echo).unwrap();
        back.explicit = c.explicit.clone();
        assert_eq!(back, c);
    }
}
