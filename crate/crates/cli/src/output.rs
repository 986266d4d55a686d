// SPDX-License-Identifier: Apache-2.0

//! Self-describing tabular output: CSV with `#` comment headers, or a JSON
//! mirror of the same data. Cell formatting is fixed so identical runs
//! write identical bytes.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// A table cell; `None` renders as an empty CSV field (used where a column
/// does not extend to the full horizon).
pub type Cell = Option<f64>;

pub struct Table {
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(params: Vec<(String, String)>, columns: Vec<&str>) -> Self {
        Self {
            params,
            columns: columns.into_iter().map(String::from).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        // normalize negative zero so formatting never emits "-0"
        self.rows.push(
            row.into_iter()
                .map(|c| c.map(|x| if x == 0.0 { 0.0 } else { x }))
                .collect(),
        );
    }

    fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# qwalk {}", env!("CARGO_PKG_VERSION"))?;
        let line = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "# {line}")?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line = row
                .iter()
                .map(|c| c.map(|x| format!("{x}")).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    fn write_json(&self, w: impl Write) -> Result<(), CliError> {
        let params: serde_json::Map<String, serde_json::Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let doc = serde_json::json!({
            "generator": format!("qwalk {}", env!("CARGO_PKG_VERSION")),
            "params": params,
            "columns": self.columns,
            "rows": self.rows,
        });
        serde_json::to_writer_pretty(w, &doc)
            .map_err(|e| CliError::Io(format!("cannot encode JSON: {e}")))
    }

    /// Write to `path`, as JSON when `json` is set and CSV otherwise.
    pub fn write(&self, path: &Path, json: bool) -> Result<(), CliError> {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        let buf = std::io::BufWriter::new(file);
        if json {
            self.write_json(buf)?;
        } else {
            self.write_csv(buf)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}
