//! Matrix text fixtures.
//!
//! ```text
//! n=1
//! 0.5+0i 0.5-0.25i
//! 0.5+0.25i 0.5+0i
//! ```

use std::fmt::Write;
use std::str::FromStr;

use num_complex::Complex64;

use super::{DenseMatrix, OracleError};

/// Formats `re±imi` with the shortest round-tripping decimal for each part.
pub fn format_complex(c: Complex64) -> String {
    let im = c.im;
    let sign = if im.is_sign_negative() && im != 0.0 { '-' } else { '+' };
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    format!("{}{}{}i", re, sign, im.abs())
}

/// Parses `re±imi`, a bare real `re`, or a bare imaginary `imi`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return f64::from_str(s).ok().map(|re| Complex64::new(re, 0.0));
    };
    // The split sign is the last '+'/'-' that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = f64::from_str(&body[..i]).ok()?;
            let im = f64::from_str(&body[i..]).ok()?;
            Some(Complex64::new(re, im))
        }
        None => f64::from_str(body).ok().map(|im| Complex64::new(0.0, im)),
    }
}

impl DenseMatrix {
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.n_qubits());
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|c| format_complex(self.get(r, c))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<DenseMatrix, OracleError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(OracleError::Format {
            line: 1,
            message: "missing header".into(),
        })?;
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| OracleError::Format {
                line,
                message: format!("expected `n=<qubits>`, found `{header}`"),
            })?;
        if n > 30 {
            return Err(OracleError::Format {
                line,
                message: format!("{n} qubits is not a plausible fixture"),
            });
        }
        let dim = 1usize << n;
        let mut data = Vec::with_capacity(dim * dim);
        let mut rows = 0;
        for (line, text) in lines {
            let before = data.len();
            for tok in text.split_whitespace() {
                let v = parse_complex(tok).ok_or_else(|| OracleError::Format {
                    line,
                    message: format!("bad entry `{tok}`"),
                })?;
                data.push(v);
            }
            if data.len() - before != dim {
                return Err(OracleError::Format {
                    line,
                    message: format!("expected {dim} entries, found {}", data.len() - before),
                });
            }
            rows += 1;
        }
        if rows != dim {
            return Err(OracleError::Format {
                line: 0,
                message: format!("expected {dim} rows, found {rows}"),
            });
        }
        DenseMatrix::from_data(n, data)
    }
}
