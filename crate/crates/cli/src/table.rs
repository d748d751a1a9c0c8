use std::io;
use std::path::Path;

/// One CSV field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Oracle not evaluated at this size.
    Skipped,
}

impl Cell {
    /// `%.12e` rendering, with `inf`, `-inf` and `nan` for non-finite values.
    pub fn render(&self) -> String {
        match *self {
            Cell::Skipped => "skipped".to_string(),
            Cell::Num(v) if v.is_nan() => "nan".to_string(),
            Cell::Num(v) if v.is_infinite() => if v > 0.0 { "inf" } else { "-inf" }.to_string(),
            Cell::Num(v) => sci(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

/// C-style `%.12e`: twelve fractional digits, signed exponent of at least two digits.
pub fn sci(v: f64) -> String {
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> csv::Result<()> {
        self.write(std::fs::File::create(path)?)
    }
}
