//! CSV logs, paths and generic tables. Headers carry units as `name [unit]`;
//! values are written in shortest round-trip decimal form.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ffcomp_core::log::{Channel, Sample};
use ffcomp_core::tracking::{ReferencePath, Waypoint, DEFAULT_SPACING};
use ffcomp_core::SampleLog;

use crate::error::{Error, Result};

/// `name [unit]` header cell.
pub fn header(name: &str, unit: &str) -> String {
    if unit.is_empty() {
        name.to_string()
    } else {
        format!("{name} [{unit}]")
    }
}

/// Strips an optional ` [unit]` suffix.
pub fn column_name(cell: &str) -> &str {
    let cell = cell.trim();
    match cell.find(" [") {
        Some(i) if cell.ends_with(']') => &cell[..i],
        _ => cell,
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// Rows of numbers under a header, written to `path`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn to_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_string())
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn log_table(log: &SampleLog) -> Table {
    let mut t = Table::new(Channel::ALL.iter().map(|c| header(c.name(), c.unit())).collect());
    for s in log.rows() {
        t.push_numbers(&s.to_array());
    }
    t
}

pub fn write_log(path: &Path, log: &SampleLog) -> Result<()> {
    log_table(log).write(path)
}

fn parse_cell(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::format(path, format!("line {line}: `{cell}` is not a number")))
}

fn read_numeric(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let names: Vec<String> = r
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .iter()
        .map(|h| column_name(h).to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|c| parse_cell(path, i + 2, c))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((names, rows))
}

/// Reads a log written by [`write_log`]. Columns may appear in any order; the
/// period is taken from the time column and must be uniform.
pub fn read_log(path: &Path) -> Result<SampleLog> {
    let (names, rows) = read_numeric(path)?;
    let mut index = [usize::MAX; 14];
    for (col, name) in names.iter().enumerate() {
        let c = Channel::from_name(name).ok_or_else(|| Error::format(path, format!("unknown column `{name}`")))?;
        let pos = Channel::ALL.iter().position(|x| *x == c).expect("channel listed");
        index[pos] = col;
    }
    if let Some(missing) = index.iter().position(|i| *i == usize::MAX) {
        return Err(Error::format(path, format!("missing column `{}`", Channel::ALL[missing].name())));
    }
    if rows.len() < 2 {
        return Err(Error::format(path, "log needs at least two rows"));
    }
    let t = |r: &Vec<f64>| r[index[0]];
    let period = t(&rows[1]) - t(&rows[0]);
    if !(period > 0.0) {
        return Err(Error::format(path, "time column is not increasing"));
    }
    for (i, w) in rows.windows(2).enumerate() {
        if ((t(&w[1]) - t(&w[0])) - period).abs() > 1e-9 {
            return Err(Error::format(path, format!("non-uniform time step at row {}", i + 2)));
        }
    }
    let mut log = SampleLog::new(period);
    for r in &rows {
        let mut a = [0.0; 14];
        for (dst, col) in a.iter_mut().zip(index) {
            *dst = r[col];
        }
        log.push(Sample::from_array(a));
    }
    Ok(log)
}

pub fn write_path(path: &Path, reference: &ReferencePath) -> Result<()> {
    let mut t = Table::new(vec![header("s", "m"), header("x", "m"), header("y", "m")]);
    for (s, x, y) in reference.to_rows() {
        t.push_numbers(&[s, x, y]);
    }
    t.write(path)
}

/// Reads `s,x,y` rows as given, or `x,y` rows resampled to the default
/// spacing.
pub fn read_path(path: &Path) -> Result<ReferencePath> {
    let (names, rows) = read_numeric(path)?;
    let col = |n: &str| names.iter().position(|h| h == n);
    let (x, y) = match (col("x"), col("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::format(path, "path needs x and y columns")),
    };
    let built = match col("s") {
        Some(s) => ReferencePath::new(
            rows.iter()
                .map(|r| Waypoint {
                    s: r[s],
                    x: r[x],
                    y: r[y],
                })
                .collect(),
        ),
        None => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[x], r[y])).collect();
            ReferencePath::from_xy(&pts, DEFAULT_SPACING)
        }
    };
    built.map_err(|e| Error::format(path, e.to_string()))
}
