//! Number formatting and tabular output.

use menos_core::json::real_to_json;
use serde_json::{Map, Value};

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal for the 12-digit rounding of `x`; `inf`, `-inf` and `nan` as words.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:?}", round12(x))
    }
}

/// Rows of reals under a fixed header, rendered as CSV or as a JSON array of objects.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let docs: Vec<Value> = self
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(r)
                        .map(|(k, &v)| (k.to_string(), real_to_json(round12(v))))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&docs).expect("JSON values serialize");
            s.push('\n');
            return s;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(|&v| fmt_num(v))).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_numbers() {
        assert_eq!(fmt_num(4.0), "4.0");
        assert_eq!(fmt_num(0.9604), "0.9604");
        assert_eq!(fmt_num(16.0 / 3.0), "5.33333333333");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
        assert_eq!(fmt_num(1.0000000000004), "1.0");
        assert_eq!(fmt_num(3.6e-31), "3.6e-31");
        assert_eq!(fmt_num(0.0), "0.0");
    }

    #[test]
    fn renders_csv_and_json() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.5, f64::INFINITY]);
        assert_eq!(t.render(false), "a,b\n1.5,inf\n");
        let v: Value = serde_json::from_str(&t.render(true)).unwrap();
        assert_eq!(v[0]["a"], 1.5);
        assert_eq!(v[0]["b"], "inf");
    }
}
