//! CSV and flat-JSON writers. Floats go through [`g12`] everywhere.

use std::fmt::Write as _;
use std::path::Path;

use conelim::text::g12;
use serde_json::Value;

use crate::Failure;

pub fn num(x: f64) -> Value {
    match g12(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
        Some(n) if x.is_finite() => Value::Number(n),
        _ => Value::String(g12(x)),
    }
}

/// A JSON object that keeps its keys in insertion order.
#[derive(Default)]
pub struct FlatJson(Vec<(String, Value)>);

impl FlatJson {
    pub fn new() -> Self {
        FlatJson::default()
    }

    pub fn str(mut self, k: &str, v: impl Into<String>) -> Self {
        self.0.push((k.into(), Value::String(v.into())));
        self
    }

    pub fn num(mut self, k: &str, v: f64) -> Self {
        self.0.push((k.into(), num(v)));
        self
    }

    pub fn int(mut self, k: &str, v: u64) -> Self {
        self.0.push((k.into(), Value::from(v)));
        self
    }

    pub fn bool(mut self, k: &str, v: bool) -> Self {
        self.0.push((k.into(), Value::Bool(v)));
        self
    }

    pub fn render(&self, indent: &str) -> String {
        let mut s = String::from("{\n");
        for (i, (k, v)) in self.0.iter().enumerate() {
            let sep = if i + 1 == self.0.len() { "" } else { "," };
            let _ = writeln!(s, "{indent}  {}: {}{sep}", Value::String(k.clone()), v);
        }
        s.push_str(indent);
        s.push('}');
        s
    }
}

/// One object, or an array of objects, followed by a newline.
pub fn json_text(objs: &[FlatJson]) -> String {
    if let [one] = objs {
        return one.render("") + "\n";
    }
    let items: Vec<String> = objs.iter().map(|o| format!("  {}", o.render("  "))).collect();
    format!("[\n{}\n]\n", items.join(",\n"))
}

fn csv_field(f: &str) -> String {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv { text: String::new() };
        c.row(header.iter().map(|h| h.to_string()));
        c
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().map(|f| csv_field(&f)).collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keeps_order_and_rounds() {
        let j = FlatJson::new().str("b", "x").num("a", std::f64::consts::PI).num("c", f64::INFINITY);
        assert_eq!(json_text(&[j]), "{\n  \"b\": \"x\",\n  \"a\": 3.14159265359,\n  \"c\": \"inf\"\n}\n");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut c = Csv::new(&["id", "note"]);
        c.row(["a".to_string(), "x,y".to_string()]);
        assert_eq!(c.into_string(), "id,note\na,\"x,y\"\n");
    }
}
