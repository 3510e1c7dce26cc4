use std::fmt::Write;

use clap::ValueEnum;
use qftree_core::rational::render;
use qftree_core::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

/// Rendering options shared by all commands.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub format: Format,
    pub decimal: bool,
}

impl Style {
    pub fn num(&self, r: &Rational) -> String {
        render(r, self.decimal)
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match format {
            Format::Tsv => {
                for r in std::iter::once(&self.header).chain(&self.rows) {
                    writeln!(s, "{}", r.join("\t")).unwrap();
                }
            }
            Format::Text => {
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|i| {
                        std::iter::once(&self.header)
                            .chain(&self.rows)
                            .map(|r| r[i].chars().count())
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                for r in std::iter::once(&self.header).chain(&self.rows) {
                    let line: Vec<String> =
                        r.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
                    writeln!(s, "{}", line.join("  ").trim_end()).unwrap();
                }
            }
        }
        s
    }
}

/// `key value` pairs, or `key\tvalue` lines in TSV.
pub fn pairs(format: Format, items: &[(&str, String)]) -> String {
    let mut t = Table::new(&["key", "value"]);
    for (k, v) in items {
        t.row(vec![k.to_string(), v.clone()]);
    }
    match format {
        Format::Tsv => t.render(format),
        Format::Text => {
            let mut s = String::new();
            for (k, v) in items {
                writeln!(s, "{k}: {v}").unwrap();
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_tsv() {
        let mut t = Table::new(&["a", "long"]);
        t.row(vec!["xyz".into(), "1".into()]);
        assert_eq!(t.render(Format::Tsv), "a\tlong\nxyz\t1\n");
        assert_eq!(t.render(Format::Text), "a    long\nxyz  1\n");
    }
}
