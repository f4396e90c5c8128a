//! Deterministic CSV emission.
//!
//! Comma separators, `.` decimal point, `\n` line endings, mandatory header
//! row. Floats are printed with Rust's shortest round-trip formatting so a
//! given value always serializes to the same bytes.

use std::fmt::Write as _;
use std::path::Path;

/// Shortest round-trip form; negative zero normalized away and exponent
/// notation used outside a readable magnitude range.
pub fn fmt_f64(x: f64) -> String {
    let x = x + 0.0;
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Self { buf }
    }

    pub fn with_comments(comments: &[String], header: &str) -> Self {
        let mut buf = String::new();
        for c in comments {
            let _ = writeln!(buf, "# {c}");
        }
        buf.push_str(header);
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.buf.as_bytes())
    }
}
