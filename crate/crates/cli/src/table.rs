use std::io::{self, Write};

/// A rectangular report rendered as a markdown pipe table or as CSV.
pub struct Table {
    pub title: Option<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Table {
        Table {
            title: None,
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn titled(mut self, title: impl Into<String>) -> Table {
        self.title = Some(title.into());
        self
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }

    pub fn write_md(&self, out: &mut impl Write) -> io::Result<()> {
        if let Some(t) = &self.title {
            writeln!(out, "### {t}\n")?;
        }
        writeln!(out, "| {} |", self.headers.join(" | "))?;
        writeln!(out, "|{}", "---|".repeat(self.headers.len()))?;
        for r in &self.rows {
            writeln!(out, "| {} |", r.join(" | "))?;
        }
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["y", "I_1(y)"]);
        t.push(["0111", "{2,3}"]);
        t
    }

    #[test]
    fn markdown_layout() {
        let mut buf = Vec::new();
        sample().titled("x").write_md(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "### x\n\n| y | I_1(y) |\n|---|---|\n| 0111 | {2,3} |\n\n"
        );
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "y,I_1(y)\n0111,\"{2,3}\"\n");
    }
}
