//! Text matrix formats shared by all modules and the CLI.
//!
//! Two self-describing formats:
//!
//! ```text
//! complex M N
//! re,im re,im ... (N pairs)   ×  M lines
//! ```
//!
//! ```text
//! butson M N l
//! k k ... (N integers in [0,l))   ×  M lines
//! ```
//!
//! Complex values are printed with Rust's shortest round-trip float
//! representation, so write-then-read is lossless; Butson files are exact
//! by nature.

use std::path::Path;

use num_complex::Complex64;

use crate::error::Error;
use crate::matrix::{ButsonMatrix, CMat, UnimodularMatrix};
use crate::Result;

/// A matrix read from a file, in whichever format it was stored.
#[derive(Clone, Debug)]
pub enum ParsedMatrix {
    Complex(CMat),
    Butson(ButsonMatrix),
}

impl ParsedMatrix {
    pub fn to_cmat(&self) -> CMat {
        match self {
            ParsedMatrix::Complex(m) => m.clone(),
            ParsedMatrix::Butson(b) => b.to_unimodular().into_cmat(),
        }
    }

    pub fn to_unimodular(&self) -> Result<UnimodularMatrix> {
        match self {
            ParsedMatrix::Complex(m) => UnimodularMatrix::new(m.clone()),
            ParsedMatrix::Butson(b) => Ok(b.to_unimodular()),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            ParsedMatrix::Complex(m) => (m.rows(), m.cols()),
            ParsedMatrix::Butson(b) => (b.rows(), b.cols()),
        }
    }
}

pub fn parse_matrix(text: &str) -> Result<ParsedMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty file"))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let usize_at = |i: usize| -> Result<usize> {
        tokens
            .get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(format!("bad header field {i} in {header:?}")))
    };
    match tokens.first() {
        Some(&"complex") => {
            let (m, n) = (usize_at(1)?, usize_at(2)?);
            let mut rows = Vec::with_capacity(m);
            for _ in 0..m {
                let line = lines.next().ok_or_else(|| Error::parse("missing matrix row"))?;
                let row = parse_complex_row(line, n)?;
                rows.push(row);
            }
            Ok(ParsedMatrix::Complex(CMat::from_rows(rows)?))
        }
        Some(&"butson") => {
            let (m, n) = (usize_at(1)?, usize_at(2)?);
            let l: u32 = tokens
                .get(3)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse("bad level in butson header"))?;
            let mut exps = Vec::with_capacity(m * n);
            for _ in 0..m {
                let line = lines.next().ok_or_else(|| Error::parse("missing matrix row"))?;
                let row: Vec<u32> = line
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::parse(format!("bad exponent {t:?}"))))
                    .collect::<Result<_>>()?;
                if row.len() != n {
                    return Err(Error::parse(format!("expected {n} exponents, got {}", row.len())));
                }
                if let Some(bad) = row.iter().find(|&&k| k >= l) {
                    return Err(Error::parse(format!("exponent {bad} out of range [0,{l})")));
                }
                exps.extend(row);
            }
            ButsonMatrix::new(m, n, l, exps).map(ParsedMatrix::Butson)
        }
        _ => Err(Error::parse(format!("unknown header {header:?}"))),
    }
}

fn parse_complex_row(line: &str, n: usize) -> Result<Vec<Complex64>> {
    let row: Vec<Complex64> = line
        .split_whitespace()
        .map(|t| {
            let (re, im) = t
                .split_once(',')
                .ok_or_else(|| Error::parse(format!("expected re,im pair, got {t:?}")))?;
            let re: f64 = re.parse().map_err(|_| Error::parse(format!("bad real part {re:?}")))?;
            let im: f64 = im.parse().map_err(|_| Error::parse(format!("bad imag part {im:?}")))?;
            Ok(Complex64::new(re, im))
        })
        .collect::<Result<_>>()?;
    if row.len() != n {
        return Err(Error::parse(format!("expected {n} entries, got {}", row.len())));
    }
    Ok(row)
}

pub fn format_complex(m: &CMat) -> String {
    let mut out = format!("complex {} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_butson(b: &ButsonMatrix) -> String {
    let mut out = format!("butson {} {} {}\n", b.rows(), b.cols(), b.level());
    for i in 0..b.rows() {
        let line: Vec<String> =
            (0..b.cols()).map(|j| b.exponent(i, j).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ParsedMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_complex(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    Ok(std::fs::write(path, format_complex(m))?)
}

pub fn write_butson(path: impl AsRef<Path>, b: &ButsonMatrix) -> Result<()> {
    Ok(std::fs::write(path, format_butson(b))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::fourier_unimodular;

    #[test]
    fn complex_round_trip_is_lossless() {
        let m = fourier_unimodular(5).into_cmat();
        let text = format_complex(&m);
        let back = parse_matrix(&text).unwrap().to_cmat();
        assert_eq!(m.rows(), back.rows());
        for (a, b) in m.data().iter().zip(back.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn butson_round_trip_is_exact() {
        let b = ButsonMatrix::from_fn(4, 4, 4, |i, j| ((i * j) % 4) as u32);
        let text = format_butson(&b);
        match parse_matrix(&text).unwrap() {
            ParsedMatrix::Butson(back) => assert_eq!(b, back),
            _ => panic!("wrong format detected"),
        }
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("complex 2 2\n1,0 1,0\n").is_err());
        assert!(parse_matrix("butson 1 2 4\n0 5\n").is_err());
        assert!(parse_matrix("sparse 2 2\n").is_err());
    }
}
