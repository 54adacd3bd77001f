use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    /// 17 significant digits, enough to round-trip an `f64`.
    fn exact(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            other => other.short(),
        }
    }

    fn short(&self) -> String {
        match self {
            Cell::Float(x) if *x == 0.0 || !x.is_finite() => format!("{x}"),
            Cell::Float(x) if (1e-3..1e6).contains(&x.abs()) => {
                let s = format!("{x:.6}");
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            }
            Cell::Float(x) => format!("{x:.4e}"),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: Option<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { title: None, columns, rows: Vec::new() }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

/// Result of one subcommand: a JSON document plus the tabular view used
/// for CSV and table output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if self.tables.len() > 1 {
                if i > 0 {
                    out.push('\n');
                }
                if let Some(title) = &table.title {
                    out.push_str(&format!("# {title}\n"));
                }
            }
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(&table.columns).expect("in-memory write");
            for row in &table.rows {
                writer.write_record(row.iter().map(Cell::exact)).expect("in-memory write");
            }
            let bytes = writer.into_inner().expect("in-memory flush");
            out.push_str(&String::from_utf8(bytes).expect("UTF-8 input"));
        }
        out
    }

    fn table(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if let Some(title) = &table.title {
                out.push_str(title);
                out.push('\n');
            }
            let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(Cell::short).collect()).collect();
            let widths: Vec<usize> = (0..table.columns.len())
                .map(|c| cells.iter().map(|r| r[c].len()).chain([table.columns[c].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: Vec<&str>| {
                let padded: Vec<String> = items.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            out.push_str(&line(table.columns.clone()));
            out.push_str(&line(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
            for row in &cells {
                out.push_str(&line(row.iter().map(String::as_str).collect()));
            }
        }
        out
    }
}
