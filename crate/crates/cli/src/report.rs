use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[cfg(test)]
use crate::commands::Params;

/// One table entry. Non-finite floats are stored as text so JSON round-trips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            Cell::Float(v)
        } else {
            Cell::Text(v.to_string())
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::from)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        i64::try_from(v).map_or_else(|_| Cell::Text(v.to_string()), Cell::Int)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        i64::try_from(v).map_or_else(|_| Cell::Text(v.to_string()), Cell::Int)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => format!("{f:e}"),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }
}

/// Column whose boolean entries count toward the verdict summary.
pub const VERDICT_COLUMN: &str = "pass";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Section {
    pub name: String,
    /// Tolerance behind every verdict and numeric entry in the table.
    pub tolerance: Option<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, tolerance: Option<f64>, columns: &[&str]) -> Self {
        Section {
            name: name.to_string(),
            tolerance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width for section {}",
            self.name
        );
        self.rows.push(row);
    }

    fn verdicts(&self) -> impl Iterator<Item = bool> + '_ {
        let idx = self.columns.iter().position(|c| c == VERDICT_COLUMN);
        self.rows
            .iter()
            .filter_map(move |r| match idx.map(|i| &r[i]) {
                Some(Cell::Bool(b)) => Some(*b),
                _ => None,
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDocument {
    pub tool_version: String,
    pub timestamp: String,
    pub params: BTreeMap<String, Cell>,
    pub sections: Vec<Section>,
    pub verdict_summary: VerdictSummary,
}

impl ReportDocument {
    pub fn new(params: BTreeMap<String, Cell>, sections: Vec<Section>) -> Self {
        let mut summary = VerdictSummary::default();
        for ok in sections.iter().flat_map(Section::verdicts) {
            if ok {
                summary.pass += 1;
            } else {
                summary.fail += 1;
            }
        }
        ReportDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            params,
            sections,
            verdict_summary: summary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

pub fn render(doc: &ReportDocument, format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(doc)
            .map(|s| s + "\n")
            .map_err(|e| e.to_string()),
        Format::Csv => render_csv(doc),
        Format::Human => Ok(render_human(doc)),
    }
}

/// One header-led table per section, separated by blank lines.
fn render_csv(doc: &ReportDocument) -> Result<String, String> {
    let mut blocks = Vec::new();
    for s in &doc.sections {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&s.columns).map_err(|e| e.to_string())?;
        for r in &s.rows {
            w.write_record(r.iter().map(Cell::render))
                .map_err(|e| e.to_string())?;
        }
        let bytes = w.into_inner().map_err(|e| e.to_string())?;
        blocks.push(String::from_utf8(bytes).map_err(|e| e.to_string())?);
    }
    Ok(blocks.join("\n"))
}

fn render_human(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let params: Vec<String> = doc
        .params
        .iter()
        .map(|(k, v)| format!("{k}={}", v.render()))
        .collect();
    let _ = writeln!(out, "qcurve {}  {}", doc.tool_version, params.join(" "));
    for s in &doc.sections {
        let tol = s
            .tolerance
            .map(|t| format!("  (tolerance {t:e})"))
            .unwrap_or_default();
        let _ = writeln!(out, "\n== {}{tol}", s.name);
        let cells: Vec<Vec<String>> = s
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::render).collect())
            .collect();
        let widths: Vec<usize> = (0..s.columns.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain([s.columns[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |row: &[String]| -> String {
            row.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let _ = writeln!(out, "{}", line(&s.columns));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r));
        }
    }
    let _ = writeln!(
        out,
        "\nverdicts: {} pass, {} fail",
        doc.verdict_summary.pass, doc.verdict_summary.fail
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> ReportDocument {
        let mut s = Section::new("t", Some(1e-12), &["x", "label", "pass"]);
        s.push(vec![0.1.into(), "a,b".into(), true.into()]);
        s.push(vec![f64::INFINITY.into(), Cell::Null, false.into()]);
        ReportDocument::new(BTreeMap::from([("n".to_string(), Cell::Int(5))]), vec![s])
    }

    #[test]
    fn summary_counts_pass_column() {
        assert_eq!(
            sample().verdict_summary,
            VerdictSummary { pass: 1, fail: 1 }
        );
    }

    #[test]
    fn json_round_trip() {
        let doc = sample();
        let text = render(&doc, Format::Json).unwrap();
        let back: ReportDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn csv_quotes_commas() {
        let text = render(&sample(), Format::Csv).unwrap();
        assert!(text.contains("\"a,b\""));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    #[should_panic]
    fn row_width_enforced() {
        Section::new("t", None, &["a", "b"]).push(vec![Cell::Null]);
    }

    fn cell() -> impl Strategy<Value = Cell> {
        prop_oneof![
            any::<bool>().prop_map(Cell::Bool),
            any::<i64>().prop_map(Cell::Int),
            any::<f64>().prop_map(Cell::from),
            "[a-z ,\"]{0,8}".prop_map(Cell::Text),
            Just(Cell::Null),
        ]
    }

    proptest! {
        #[test]
        fn documents_round_trip(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 0..6)) {
            let mut s = Section::new("p", None, &["a", "b", "c"]);
            rows.into_iter().for_each(|r| s.push(r));
            let doc = ReportDocument::new(Params::new(), vec![s]);
            let back: ReportDocument = serde_json::from_str(&render(&doc, Format::Json).unwrap()).unwrap();
            prop_assert_eq!(back, doc);
        }

        #[test]
        fn csv_rows_keep_width(rows in prop::collection::vec(prop::collection::vec(cell(), 3), 1..6)) {
            let mut s = Section::new("p", None, &["a", "b", "c"]);
            rows.into_iter().for_each(|r| s.push(r));
            let doc = ReportDocument::new(Params::new(), vec![s]);
            let text = render(&doc, Format::Csv).unwrap();
            let mut r = csv::Reader::from_reader(text.as_bytes());
            for rec in r.records() {
                prop_assert_eq!(rec.unwrap().len(), 3);
            }
        }
    }
}
