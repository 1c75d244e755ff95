//! JSON emission with a fixed float format.

use std::io;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::ser::Formatter;

/// Compact JSON whose floats always carry 17 significant digits, so output
/// round-trips exactly and is byte-stable across runs.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        // -0.0 prints as 0 so sign noise from cancellation stays invisible
        let value = if value == 0.0 { 0.0 } else { value };
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser).expect("reports serialize");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().cloned().collect()).collect()
}

pub fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().cloned().collect()
}
