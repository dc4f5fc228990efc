use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// A record with a fixed CSV schema.
pub trait CsvRow {
    const HEADER: &'static [&'static str];

    fn cells(&self) -> Vec<String>;

    /// `"ok"` for a completed point, otherwise a failure tag.
    fn status(&self) -> &str;
}

/// Seventeen significant digits in scientific notation; exact round trip.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{:.16e}", x + 0.0)
    }
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.into()
}

/// Header line plus one line per row, `\n`-terminated.
pub fn render<R: CsvRow>(rows: &[R]) -> String {
    let mut out = R::HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.cells().join(","));
    }
    out
}

pub fn completed<R: CsvRow>(rows: &[R]) -> usize {
    rows.iter().filter(|r| r.status() == "ok").count()
}

/// A rendered table ready to be written to `name` inside an output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub name: &'static str,
    pub contents: String,
    pub rows: usize,
    pub completed: usize,
}

impl CsvFile {
    pub fn new<R: CsvRow>(name: &'static str, rows: &[R]) -> Self {
        Self { name, contents: render(rows), rows: rows.len(), completed: completed(rows) }
    }

    pub fn write_into(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(self.name), &self.contents)
    }
}
