//! Number formatting and file emission.
//!
//! Every float leaves the program rounded to 15 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::Value;

/// `x` rounded to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest text for `round15(x)`; exponent form outside `[1e-5, 1e15)`.
pub fn fmt15(x: f64) -> String {
    let r = round15(x);
    if r.is_nan() {
        return "nan".into();
    }
    if r.is_infinite() {
        return if r > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = r.abs();
    if r == 0.0 || (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Round every float in a JSON tree to 15 significant digits.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(round15(x)).map(Value::Number).unwrap_or(Value::Null);
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn json_text(mut v: Value) -> String {
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Write to `path`, or stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// CSV writer with a fixed header.
pub struct CsvWriter<W: Write> {
    out: W,
}

impl CsvWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &str) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &str) -> io::Result<Self> {
        writeln!(out, "{header}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Float field, empty when absent.
pub fn opt_field(x: Option<f64>) -> String {
    x.map(fmt15).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt15(0.9202212159423), "0.9202212159423");
        assert_eq!(fmt15(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt15(-2.403953531857764), "-2.40395353185776");
        assert_eq!(fmt15(150.0), "150");
        assert_eq!(fmt15(0.0), "0");
        assert_eq!(fmt15(3.08e-14), "3.08e-14");
        assert_eq!(fmt15(f64::NAN), "nan");
    }

    #[test]
    fn json_rounding_is_recursive() {
        let text = json_text(json!({"a": [1.0 / 3.0, {"b": 2.0 / 3.0}], "n": 7, "s": "x", "bad": null}));
        assert!(text.contains("0.333333333333333,"), "{text}");
        assert!(text.contains("0.666666666666667"), "{text}");
        assert!(text.contains("\"n\": 7"), "{text}");
    }

    #[test]
    fn csv_rows() {
        let mut w = CsvWriter::new(Vec::new(), "r,eta").unwrap();
        w.row(&[fmt15(0.5), opt_field(None)]).unwrap();
        assert_eq!(String::from_utf8(w.finish().unwrap()).unwrap(), "r,eta\n0.5,\n");
    }
}
