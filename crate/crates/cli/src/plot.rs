//! Gnuplot-ready data: whitespace-separated columns under a `#` header
//! naming each column with its unit.

use std::fmt::Write as _;

pub(crate) struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        let mut text = format!("# {title}\n# ");
        text.push_str(&columns.join("  "));
        text.push('\n');
        Self {
            text,
            columns: columns.len(),
        }
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
        self.text.push_str(&cells.join(" "));
        self.text.push('\n');
    }

    /// Blank line; separates scans for `splot`.
    pub fn block(&mut self) {
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}
