//! JSON result records and CSV scan tables.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::density::{EnergyBreakdown, InequalityReport};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Hartree,
    Bohr,
    Dimensionless,
    Second,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Hartree => "hartree",
            Unit::Bohr => "bohr",
            Unit::Dimensionless => "dimensionless",
            Unit::Second => "second",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    pub fn hartree(value: f64) -> Self {
        Self::new(value, Unit::Hartree)
    }

    pub fn dimensionless(value: f64) -> Self {
        Self::new(value, Unit::Dimensionless)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: Unit,
}

/// Plot-ready table; written next to the record as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&str, Unit)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: *u,
                })
                .collect(),
            rows: Vec::new(),
            file: None,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV bytes; the first column repeats `config_hash` on every row.
    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["config_hash".to_string()];
        header.extend(self.columns.iter().map(|c| format!("{}[{}]", c.name, c.unit.as_str())));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![config_hash.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }
}

/// Residual with the tolerance it is judged against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
        }
    }

    pub fn below(&self) -> bool {
        self.value <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityEntry {
    pub label: String,
    pub kinetic: Quantity,
    pub lieb_thirring: Quantity,
    pub hoffmann_ostenhof: Quantity,
    pub l2_sobolev: Quantity,
    pub holds: bool,
}

impl InequalityEntry {
    pub fn new(label: impl Into<String>, r: &InequalityReport) -> Self {
        Self {
            label: label.into(),
            kinetic: Quantity::hartree(r.kinetic),
            lieb_thirring: Quantity::hartree(r.lieb_thirring),
            hoffmann_ostenhof: Quantity::hartree(r.hoffmann_ostenhof),
            l2_sobolev: Quantity::hartree(r.l2_sobolev),
            holds: r.all_hold(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub energy: BTreeMap<String, Quantity>,
    pub quantities: BTreeMap<String, Quantity>,
    pub residuals: Vec<Residual>,
    pub tables: Vec<Table>,
    pub inequalities: Vec<InequalityEntry>,
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timing: Quantity,
}

impl ResultRecord {
    pub fn new(run_id: &str, subcommand: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            run_id: run_id.to_string(),
            subcommand: subcommand.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            energy: BTreeMap::new(),
            quantities: BTreeMap::new(),
            residuals: Vec::new(),
            tables: Vec::new(),
            inequalities: Vec::new(),
            flags: Vec::new(),
            error: None,
            timing: Quantity::new(0.0, Unit::Second),
        }
    }

    pub fn set(&mut self, key: &str, value: f64, unit: Unit) {
        self.quantities.insert(key.to_string(), Quantity::new(value, unit));
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.quantities.get(key).map(|q| q.value)
    }

    pub fn set_energy(&mut self, e: &EnergyBreakdown) {
        for (k, v) in [
            ("kinetic", e.kinetic),
            ("external", e.external),
            ("hartree", e.hartree),
            ("magnetic", e.magnetic),
            ("total", e.total),
        ] {
            self.energy.insert(k.to_string(), Quantity::hartree(v));
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn residuals_below(&self) -> bool {
        self.residuals.iter().all(Residual::below)
    }

    /// `0` when every residual is within tolerance, `1` on failure, `2`
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            1
        } else if self.residuals_below() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `<run_id>.json` and one `<run_id>_<table>.csv` per table into
    /// `dir`; returns the record path.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        for t in &mut self.tables {
            let name = format!("{}_{}.csv", self.run_id, t.name);
            write_atomic(&dir.join(&name), &t.to_csv(&self.config_hash)?)?;
            t.file = Some(name);
        }
        let path = dir.join(format!("{}.json", self.run_id));
        write_atomic(&path, self.to_json()?.as_bytes())?;
        Ok(path)
    }
}

/// Writes to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}
