use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
    /// Evenly spaced in decibels, values reported as 10^(x/10).
    Db,
}

impl FromStr for GridScale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(GridScale::Linear),
            "log" => Ok(GridScale::Log),
            "db" => Ok(GridScale::Db),
            other => Err(format!(
                "unknown grid scale `{other}` (expected linear, log or db)"
            )),
        }
    }
}

impl fmt::Display for GridScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridScale::Linear => "linear",
            GridScale::Log => "log",
            GridScale::Db => "db",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn new(
        variable: impl Into<String>,
        start: f64,
        stop: f64,
        points: usize,
        scale: GridScale,
    ) -> Result<Self, String> {
        if points < 2 {
            return Err(format!("a grid needs at least 2 points, got {points}"));
        }
        if scale == GridScale::Log && !(start > 0.0 && stop > 0.0) {
            return Err(format!(
                "log grid needs positive endpoints, got {start}..{stop}"
            ));
        }
        Ok(Self {
            variable: variable.into(),
            start,
            stop,
            points,
            scale,
        })
    }

    /// Grid values in order, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    return self.end_value();
                }
                let t = i as f64 / last;
                match self.scale {
                    GridScale::Linear => self.start + (self.stop - self.start) * t,
                    GridScale::Log => self.start * (self.stop / self.start).powf(t),
                    GridScale::Db => 10f64.powf((self.start + (self.stop - self.start) * t) / 10.0),
                }
            })
            .collect()
    }

    fn end_value(&self) -> f64 {
        match self.scale {
            GridScale::Db => 10f64.powf(self.stop / 10.0),
            _ => self.stop,
        }
    }
}

/// Nearest odd integers ≥ 1, consecutive duplicates removed.
pub fn odd_sides(values: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(values.len());
    for &v in values {
        let k = ((v.max(1.0) - 1.0) / 2.0).round() as usize * 2 + 1;
        if out.last() != Some(&k) {
            out.push(k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales() {
        let g = GridSpec::new("x", -10.0, 80.0, 91, GridScale::Linear).unwrap();
        let v = g.values();
        assert_eq!((v[0], v[50], v[90]), (-10.0, 40.0, 80.0));
        let g = GridSpec::new("x", 1.0, 100.0, 3, GridScale::Log).unwrap();
        let v = g.values();
        assert!((v[1] - 10.0).abs() < 1e-12 && v[2] == 100.0);
        let g = GridSpec::new("x", 0.0, 40.0, 2, GridScale::Db).unwrap();
        assert_eq!(g.values(), vec![1.0, 1e4]);
        assert!(GridSpec::new("x", 0.0, 1.0, 5, GridScale::Log).is_err());
        assert!(GridSpec::new("x", 0.0, 1.0, 1, GridScale::Linear).is_err());
        assert_eq!("DB".parse::<GridScale>().unwrap(), GridScale::Db);
    }

    #[test]
    fn odd_rounding() {
        assert_eq!(
            odd_sides(&[1.0, 2.9, 3.2, 4.0, 4.2, 501.0]),
            vec![1, 3, 5, 501]
        );
    }
}
