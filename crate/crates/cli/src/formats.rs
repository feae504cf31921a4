//! Potential files, argument parsing helpers and CSV output.
//!
//! Floats in CSV files are written with 17 significant digits (`{:.16e}`)
//! so artifacts are byte-stable and round-trip exactly.

use crate::Failure;
use parabolic_core::TrigPolynomial;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// `{"constant": a0, "cos": [a1, ...], "sin": [b1, ...]}` meaning
/// `U(θ) = a0 + Σ a_k cos kθ + b_k sin kθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl PotentialFile {
    pub fn from_polynomial(u: &TrigPolynomial) -> Self {
        PotentialFile { constant: u.constant(), cos: u.cos_coeffs().to_vec(), sin: u.sin_coeffs().to_vec() }
    }

    pub fn to_polynomial(&self) -> Result<TrigPolynomial, Failure> {
        if !self.constant.is_finite() || self.cos.iter().chain(&self.sin).any(|c| !c.is_finite()) {
            return Err(Failure::Validation("potential coefficients must be finite".into()));
        }
        Ok(TrigPolynomial::new(self.constant, self.cos.clone(), self.sin.clone()))
    }
}

pub fn read_potential(path: &Path) -> Result<TrigPolynomial, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read potential {}: {e}", path.display())))?;
    let file: PotentialFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("bad potential file {}: {e}", path.display())))?;
    file.to_polynomial()
}

/// Angle in radians: a plain number, or a multiple of `pi` such as `pi`,
/// `-pi/2`, `3pi`, `2*pi/3`. Anything that looks like degrees is refused.
pub fn parse_radians(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if t.ends_with("deg") || t.ends_with('°') || t.ends_with('d') || t.contains("degree") {
        return Err(format!("'{s}': angles are in radians; degree input is not accepted"));
    }
    let value = if let Some(pos) = t.find("pi") {
        let (head, tail) = (&t[..pos], &t[pos + 2..]);
        let head = head.strip_suffix('*').unwrap_or(head);
        let coeff = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| format!("'{s}': bad multiple of pi"))?,
        };
        let den = match tail {
            "" => 1.0,
            d => d
                .strip_prefix('/')
                .and_then(|d| d.parse::<f64>().ok())
                .filter(|d| *d != 0.0)
                .ok_or_else(|| format!("'{s}': bad multiple of pi"))?,
        };
        coeff * std::f64::consts::PI / den
    } else {
        t.parse::<f64>().map_err(|_| format!("'{s}': not a number"))?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{s}': not finite"))
    }
}

pub fn parse_finite(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("'{s}': not a finite number")),
    }
}

/// `LO:HI:N`, `N` equally spaced values including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0 || self.hi < self.lo || (self.count > 1 && self.hi == self.lo)
    }
}

pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("'{s}': expected LO:HI:N"));
    };
    Ok(Range {
        lo: parse_finite(lo)?,
        hi: parse_finite(hi)?,
        count: n.trim().parse().map_err(|_| format!("'{s}': N must be a non-negative integer"))?,
    })
}

/// `A:B` of finite numbers.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("'{s}': expected A:B"))?;
    Ok((parse_finite(a)?, parse_finite(b)?))
}

/// `R:THETA` with the angle in radians.
pub fn parse_polar(s: &str) -> Result<(f64, f64), String> {
    let (r, th) = s.split_once(':').ok_or_else(|| format!("'{s}': expected R:THETA"))?;
    Ok((parse_finite(r)?, parse_radians(th)?))
}

/// `LO:HI` angles in radians.
pub fn parse_angle_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("'{s}': expected LO:HI"))?;
    Ok((parse_radians(a)?, parse_radians(b)?))
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV artifact: a `#`-prefixed tolerance line, the header, then rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(tolerances: &serde_json::Value, header: &[&str]) -> Self {
        let mut text = format!("# tolerances {}\n", tolerances);
        text.push_str(&header.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Row with a trailing non-numeric column.
    pub fn row_with(&mut self, values: &[f64], last: &str) {
        let mut cells: Vec<String> = values.iter().map(|v| fmt_float(*v)).collect();
        cells.push(last.to_string());
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let mut f = fs::File::create(dir.join(name))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    write_text(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn radians_and_multiples_of_pi() {
        assert_eq!(parse_radians("1.5").unwrap(), 1.5);
        assert_eq!(parse_radians("pi").unwrap(), PI);
        assert_eq!(parse_radians("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_radians("3pi").unwrap(), 3.0 * PI);
        assert_eq!(parse_radians("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        for bad in ["180deg", "90°", "45d", "pi/0", "x", "inf"] {
            assert!(parse_radians(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges() {
        let r = parse_range("0.5:1:3").unwrap();
        assert_eq!(r.values(), vec![0.5, 0.75, 1.0]);
        assert!(parse_range("1:0.5:4").unwrap().is_empty());
        assert!(parse_range("0.5:1:0").unwrap().is_empty());
        assert!(!parse_range("0.7:0.7:1").unwrap().is_empty());
        assert!(parse_range("0.5:1").is_err());
        assert!(parse_range("0.5:1:-2").is_err());
    }

    #[test]
    fn potential_file_round_trip() {
        let text = r#"{"constant": 2.0, "cos": [0.0, -1.0]}"#;
        let f: PotentialFile = serde_json::from_str(text).unwrap();
        let u = f.to_polynomial().unwrap();
        assert_eq!(u.value(0.0), 1.0);
        assert_eq!(PotentialFile::from_polynomial(&u), PotentialFile { sin: vec![0.0, 0.0], ..f });
        assert!(serde_json::from_str::<PotentialFile>(r#"{"constant": 1, "tan": [1]}"#).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&serde_json::json!({"tol": 1e-10}), &["a", "b"]);
        c.row(&[1.0, -0.5]);
        c.row_with(&[2.0], "event");
        assert_eq!(
            c.as_str(),
            "# tolerances {\"tol\":1e-10}\na,b\n1.0000000000000000e0,-5.0000000000000000e-1\n2.0000000000000000e0,event\n"
        );
    }
}
