use crate::config::ExperimentConfig;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of the SHA-256 of the config echo. The output
/// directory is left out so a relocated rerun hashes the same.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let lines: Vec<String> = cfg.echo().into_iter().filter(|l| !l.starts_with("output =")).collect();
    let digest = Sha256::digest(lines.join("\n").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            // 17 significant digits round-trip any f64
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(_) => "nan".into(),
            Cell::Text(s) => s.replace([',', '\n'], ";"),
        }
    }

    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Int(n) => Some(*n as f64),
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.unwrap_or(f64::NAN))
    }
}

impl From<Option<usize>> for Cell {
    fn from(x: Option<usize>) -> Self {
        x.map_or(Cell::Num(f64::NAN), Cell::Int)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// One CSV file: named columns, rows of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match table `{}`", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c].num().filter(|x| !x.is_nan())).collect())
    }

    /// Header block, then the column line, then one line per row. Every row
    /// ends with the code version and config hash.
    pub fn write(&self, out: &mut impl Write, cfg: &ExperimentConfig) -> std::io::Result<()> {
        let hash = config_hash(cfg);
        writeln!(out, "# composite-bem {VERSION}")?;
        writeln!(out, "# config_hash: {hash}")?;
        for line in cfg.echo() {
            writeln!(out, "# config: {line}")?;
        }
        writeln!(out, "{},version,config_hash", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            writeln!(out, "{},{VERSION},{hash}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn save(&self, dir: &Path, cfg: &ExperimentConfig) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{}.csv", self.name)))?);
        self.write(&mut f, cfg)?;
        f.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_rows_and_hash() {
        let cfg = ExperimentConfig::parse("experiment = delta\nh = 0.12").unwrap();
        let mut t = Table::new("delta", &["delta", "iterations", "status"]);
        t.push(vec![0.24.into(), 12usize.into(), "ok".into()]);
        t.push(vec![0.5.into(), None::<usize>.into(), "gmres: no, convergence".into()]);
        let mut buf = Vec::new();
        t.write(&mut buf, &cfg).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let hash = config_hash(&cfg);
        assert_eq!(hash.len(), 16);
        assert!(text.lines().any(|l| l == "# config: experiment = delta"));
        assert!(text.lines().any(|l| l == "# config: cutoff_factor = 3.5"));
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body[0], "delta,iterations,status,version,config_hash");
        assert_eq!(body[1], format!("2.3999999999999999e-1,12,ok,{VERSION},{hash}"));
        assert!(body[2].starts_with("5.0000000000000000e-1,nan,gmres: no; convergence,"));
        assert_eq!(t.column("iterations").unwrap(), vec![Some(12.0), None]);

        let other = ExperimentConfig::parse("experiment = delta\nh = 0.1").unwrap();
        assert_ne!(config_hash(&other), hash);
    }
}
