//! Deterministic file writers: binary Netpbm images, `row,col,value` CSV
//! dumps and the JSON run manifest.
//!
//! Images cover the grid's bounds, rows north to south and columns west to
//! east. Identical inputs always produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{Coord, Grid};

/// Rotor colours, indexed by rotor position modulo 4.
pub const ROTOR4: [[u8; 3]; 4] = [[0, 0, 255], [0, 255, 0], [255, 0, 0], [255, 255, 0]];
pub const BACKGROUND: [u8; 3] = [0, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Palette {
    /// Four fixed colours for rotor positions ([`ROTOR4`]).
    Rotor4,
    /// Linear gray ramp over first-visit iteration numbers.
    IterationGray,
    PassageLinear,
    /// `ln(1 + v)` gray ramp, for passage counts spanning many decades.
    PassageLog,
}

impl Palette {
    pub fn name(self) -> &'static str {
        match self {
            Palette::Rotor4 => "rotor4",
            Palette::IterationGray => "iteration_gray",
            Palette::PassageLinear => "passage_linear",
            Palette::PassageLog => "passage_log",
        }
    }

    fn log_scale(self) -> bool {
        self == Palette::PassageLog
    }
}

/// Cell types that can be written as images and CSV.
pub trait FieldValue: Clone {
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn csv_text(&self) -> String;
    fn parse_csv(text: &str) -> Option<Self>;
}

impl FieldValue for u64 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn csv_text(&self) -> String {
        self.to_string()
    }

    fn parse_csv(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

impl FieldValue for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn csv_text(&self) -> String {
        format_g17(*self)
    }

    fn parse_csv(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

/// `printf("%.17g")`: 17 significant digits, trailing zeros trimmed, fixed
/// notation for decimal exponents in `-5..17`.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, v);
        trim_fraction(&fixed).to_string()
    } else {
        format!(
            "{}e{}{:02}",
            trim_fraction(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Binary PGM (`P5`, maxval 255) of a scalar field.
pub fn encode_pgm<V: FieldValue>(grid: &Grid<V>, palette: Palette) -> Vec<u8> {
    let b = grid.bounds();
    let max = grid
        .values()
        .iter()
        .map(FieldValue::to_f64)
        .fold(0.0, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", b.width(), b.height()).into_bytes();
    out.extend(grid.values().iter().map(|v| {
        let v = v.to_f64().max(0.0);
        if max <= 0.0 {
            0
        } else if palette.log_scale() {
            (255.0 * v.ln_1p() / max.ln_1p()).round() as u8
        } else {
            (255.0 * v / max).round() as u8
        }
    }));
    out
}

pub fn write_pgm<V: FieldValue>(grid: &Grid<V>, palette: Palette, path: &Path) -> Result<()> {
    write_bytes(path, &encode_pgm(grid, palette))
}

/// Binary PPM (`P6`, maxval 255); `Some(i)` cells get `ROTOR4[i % 4]`.
pub fn encode_ppm_rotors(grid: &Grid<Option<u32>>) -> Vec<u8> {
    let b = grid.bounds();
    let mut out = format!("P6\n{} {}\n255\n", b.width(), b.height()).into_bytes();
    for cell in grid.values() {
        let rgb = match cell {
            Some(i) => ROTOR4[(*i % 4) as usize],
            None => BACKGROUND,
        };
        out.extend_from_slice(&rgb);
    }
    out
}

pub fn write_ppm_rotors(grid: &Grid<Option<u32>>, path: &Path) -> Result<()> {
    write_bytes(path, &encode_ppm_rotors(grid))
}

/// Pseudo-rotor for fractional models: `floor(passages) mod 4` on visited
/// sites.
pub fn passage_rotors<V: FieldValue>(passages: &Grid<V>) -> Grid<Option<u32>> {
    passages.map(|v| {
        let p = v.to_f64();
        (p > 0.0).then(|| (p.floor() as u64 % 4) as u32)
    })
}

pub const CSV_HEADER: &str = "row,col,value";

/// `row,col,value` lines for every nonzero site, sorted by `(row, col)`,
/// after a header line.
pub fn encode_csv<V: FieldValue>(grid: &Grid<V>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    // row-major iteration is already (row, col) order
    for (c, v) in grid.iter().filter(|(_, v)| !v.is_zero()) {
        out.push_str(&format!("{},{},{}\n", c.row, c.col, v.csv_text()));
    }
    out
}

pub fn write_csv<V: FieldValue>(grid: &Grid<V>, path: &Path) -> Result<()> {
    write_bytes(path, encode_csv(grid).as_bytes())
}

/// Inverse of [`encode_csv`]; returns the listed sites in file order.
pub fn parse_csv<V: FieldValue>(text: &str) -> Result<Vec<(Coord, V)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => return Err(Error::invalid(format!("bad CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = || Error::invalid(format!("bad CSV line {}: {line:?}", i + 2));
            let mut parts = line.split(',');
            let row = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let col = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let value = parts.next().and_then(V::parse_csv).ok_or_else(bad)?;
            if parts.next().is_some() {
                return Err(bad());
            }
            Ok((Coord::new(row, col), value))
        })
        .collect()
}

pub fn read_csv<V: FieldValue>(path: &Path) -> Result<Vec<(Coord, V)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Plain table with a header row, for descriptive series.
pub fn encode_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_table_csv(header: &[&str], rows: &[Vec<String>], path: &Path) -> Result<()> {
    write_bytes(path, encode_table(header, rows).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub model: String,
    pub ants: u64,
    pub program: Option<String>,
    pub sweeps: Option<u64>,
    pub numeric_mode: String,
    pub parameters: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, Value>,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> Value {
        json!({
            "generator": concat!("rotor-core ", env!("CARGO_PKG_VERSION")),
            "model": self.model,
            "ants": self.ants,
            "program": self.program,
            "sweeps": self.sweeps,
            "numeric_mode": self.numeric_mode,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "files": self.files,
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(value: &Value) -> Result<Manifest> {
        let bad =
            |what: &str| Error::invalid(format!("manifest field {what} missing or malformed"));
        let obj = value.as_object().ok_or_else(|| bad("<root>"))?;
        let map = |key: &str| -> Result<BTreeMap<String, Value>> {
            Ok(obj
                .get(key)
                .and_then(Value::as_object)
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect())
        };
        let files = map("files")?
            .into_iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|s| (k, s.to_string()))
                    .ok_or_else(|| bad("files"))
            })
            .collect::<Result<_>>()?;
        Ok(Manifest {
            model: obj
                .get("model")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("model"))?
                .to_string(),
            ants: obj
                .get("ants")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("ants"))?,
            program: obj
                .get("program")
                .and_then(Value::as_str)
                .map(str::to_string),
            sweeps: obj.get("sweeps").and_then(Value::as_u64),
            numeric_mode: obj
                .get("numeric_mode")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("numeric_mode"))?
                .to_string(),
            parameters: map("parameters")?,
            metrics: map("metrics")?,
            files,
        })
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    write_bytes(path, manifest.to_json_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Bounds;
    use proptest::prelude::*;

    #[test]
    fn single_pixel_pgm() {
        let mut g = Grid::new(0u64);
        g.set(Coord::ORIGIN, 1);
        let bytes = encode_pgm(&g, Palette::PassageLinear);
        assert_eq!(bytes, b"P5\n1 1\n255\n\xff");
        assert_eq!(encode_pgm(&g, Palette::PassageLog), b"P5\n1 1\n255\n\xff");
    }

    #[test]
    fn zero_pgm() {
        let g = Grid::with_bounds(Bounds::new(0, 1, -1, 0), 0u64);
        assert_eq!(
            encode_pgm(&g, Palette::PassageLinear),
            b"P5\n2 2\n255\n\0\0\0\0"
        );
    }

    #[test]
    fn log_mapping() {
        let mut g = Grid::with_bounds(Bounds::new(0, 0, 0, 2), 0.0f64);
        g.set(Coord::new(0, 1), 1.0);
        g.set(Coord::new(0, 2), 99.0);
        let bytes = encode_pgm(&g, Palette::PassageLog);
        let expected = (255.0 * 2f64.ln() / 100f64.ln()).round() as u8;
        assert_eq!(&bytes[bytes.len() - 3..], &[0, expected, 255]);
        let lin = encode_pgm(&g, Palette::PassageLinear);
        assert_eq!(&lin[lin.len() - 3..], &[0, 3, 255]);
    }

    #[test]
    fn rotor_pixels() {
        let mut g = Grid::with_bounds(Bounds::new(0, 0, 0, 1), None);
        g.set(Coord::ORIGIN, Some(0));
        assert_eq!(encode_ppm_rotors(&g), b"P6\n2 1\n255\n\0\0\xff\0\0\0");
        let mut p = Grid::new(0.0f64);
        p.set(Coord::ORIGIN, 7.9);
        assert_eq!(*passage_rotors(&p).get(Coord::ORIGIN), Some(3));
        assert_eq!(*passage_rotors(&Grid::new(0.0f64)).get(Coord::ORIGIN), None);
    }

    #[test]
    fn csv_lines() {
        let mut g = Grid::new(0u64);
        g.set(Coord::ORIGIN, 4);
        assert_eq!(encode_csv(&g), "row,col,value\n0,0,4\n");
        assert_eq!(encode_csv(&Grid::new(0u64)), "row,col,value\n");
        let mut f = Grid::new(0.0f64);
        f.set(Coord::new(-1, 2), 0.25);
        f.set(Coord::new(1, -2), 0.1);
        assert_eq!(
            encode_csv(&f),
            "row,col,value\n-1,2,0.25\n1,-2,0.10000000000000001\n"
        );
    }

    #[test]
    fn g17_format() {
        assert_eq!(format_g17(1.5), "1.5");
        assert_eq!(format_g17(166.1424), "166.14240000000001");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(2f64.powi(60)), "1.152921504606847e+18");
        assert_eq!(format_g17(-0.5), "-0.5");
        assert_eq!(format_g17(123456.0), "123456");
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest {
            model: "walk".into(),
            ants: 5,
            program: Some("N,W,S,E".into()),
            numeric_mode: "float".into(),
            ..Manifest::default()
        };
        m.metrics.insert("occupied_sites".into(), json!(5));
        m.files.insert("a.csv".into(), sha256_hex(b"x"));
        let text = m.to_json_string();
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(Manifest::from_json(&parsed).unwrap(), m);
        assert_eq!(text, m.clone().to_json_string());
        let keys: Vec<_> = parsed.as_object().unwrap().keys().cloned().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn unwritable_path_reports_path() {
        let err = write_csv(&Grid::new(0u64), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }

    proptest! {
        #[test]
        fn csv_round_trip(cells in prop::collection::vec((-30i64..30, -30i64..30, any::<f64>()), 0..40)) {
            let mut g = Grid::new(0.0f64);
            for &(r, c, v) in &cells {
                if v.is_finite() {
                    g.set(Coord::new(r, c), v);
                }
            }
            let parsed: Vec<(Coord, f64)> = parse_csv(&encode_csv(&g)).unwrap();
            let expected: Vec<(Coord, f64)> =
                g.iter().filter(|(_, v)| **v != 0.0).map(|(c, v)| (c, *v)).collect();
            prop_assert_eq!(parsed, expected);
        }
    }
}
