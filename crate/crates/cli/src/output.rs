//! Report emission. JSON floats are printed with 17 significant digits so
//! output round-trips bit-exactly; pipelines get byte-identical bytes for
//! identical inputs and seeds.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// serde_json formatter that prints every float as `{:.16e}`.
struct SciFloats;

impl serde_json::ser::Formatter for SciFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFloats);
    value.serialize(&mut ser).context("serializing report")?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

/// Writes the JSON report to the chosen destination, newline-terminated.
pub fn emit_json<T: Serialize>(value: &T, output: Option<&PathBuf>) -> Result<()> {
    let json = to_json_string(value)?;
    match output {
        Some(path) => {
            let mut f =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            writeln!(f, "{json}")?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            writeln!(lock, "{json}")?;
        }
    }
    Ok(())
}

/// 17-significant-digit float field for CSV rows.
pub fn csv_float(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else if value.is_nan() {
        "nan".to_string()
    } else if value > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn csv_writer(path: &Path) -> Result<io::BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_print_with_seventeen_digits() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            n: u32,
        }
        let json = to_json_string(&S { x: 0.3, n: 7 }).unwrap();
        assert_eq!(json, "{\"x\":2.9999999999999999e-1,\"n\":7}");
    }

    #[test]
    fn non_finite_floats_become_null() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let json = to_json_string(&S { x: f64::INFINITY }).unwrap();
        assert_eq!(json, "{\"x\":null}");
    }

    #[test]
    fn csv_floats_round_trip() {
        let samples = [0.3, 1.0, -2.75e-19, 6.02e23];
        for &x in &samples {
            let printed = csv_float(x);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back, x);
        }
        assert_eq!(csv_float(f64::INFINITY), "inf");
    }
}
