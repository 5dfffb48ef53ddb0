use std::fmt::Write;

/// Human-readable text followed by a `[values]` section of `key = value`
/// lines that [`Report::parse_values`] reads back.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub values: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn value(&mut self, key: impl Into<String>, value: impl ToString) {
        self.values.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", self.title).unwrap();
        if !self.lines.is_empty() {
            out.push('\n');
            for l in &self.lines {
                writeln!(out, "{l}").unwrap();
            }
        }
        out.push_str("\n[values]\n");
        for (k, v) in &self.values {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// Key-value pairs of the `[values]` section of rendered text.
    pub fn parse_values(text: &str) -> Vec<(String, String)> {
        text.lines()
            .skip_while(|l| l.trim() != "[values]")
            .skip(1)
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip() {
        let mut r = Report::new("demo");
        r.line("a table = with equals");
        r.value("ratio", 0.75);
        r.value("kind", "rk4");
        let parsed = Report::parse_values(&r.render());
        assert_eq!(parsed, r.values);
        assert_eq!(r.get("ratio"), Some("0.75"));
    }
}
