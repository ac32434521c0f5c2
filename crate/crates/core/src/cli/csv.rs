//! Minimal CSV document: `#` comment header, one column-name row, data rows
//! and optional trailing `#` summary lines.

use std::io::{self, Write};

/// Shortest representation that parses back to the same `f64`, switching to
/// exponent notation for very small or large magnitudes; `-0` prints as `0.0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:?}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvDoc {
    lines: Vec<String>,
    columns: usize,
}

impl CsvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: impl AsRef<str>) {
        self.lines.push(format!("# {}", text.as_ref()));
    }

    /// `# key = value` with a float value.
    pub fn summary(&mut self, key: &str, value: f64) {
        self.comment(format!("{key} = {}", fmt_f64(value)));
    }

    pub fn columns(&mut self, names: &[String]) {
        self.columns = names.len();
        self.lines.push(names.join(","));
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.lines.push(cells.join(","));
    }

    /// Row of preformatted cells, for mixed integer and float columns.
    pub fn row_cells(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        self.lines.push(cells.join(","));
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn write_to(&self, out: &mut impl Write) -> io::Result<()> {
        for line in &self.lines {
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// Parses data rows back into numbers, skipping comments and the column row.
pub fn parse_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5, f64::MIN_POSITIVE, 0.1 + 0.2] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), "0.0");
        assert_eq!(fmt_f64(2.0), "2.0");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }

    #[test]
    fn document_layout() {
        let mut d = CsvDoc::new();
        d.comment("xxzq 0.1.0");
        d.columns(&["t".to_string(), "v".to_string()]);
        d.row(&[0.0, 0.5]);
        d.summary("slope", 1.25);
        assert_eq!(d.render(), "# xxzq 0.1.0\nt,v\n0.0,0.5\n# slope = 1.25\n");
        assert_eq!(parse_rows(&d.render()), vec![vec![0.0, 0.5]]);
    }
}
