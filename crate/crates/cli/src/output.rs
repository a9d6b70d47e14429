use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ptwell_core::Complex64 as C64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty JSON with every float written to 17 significant digits, so equal
/// inputs give byte-identical output.
struct FixedDigits<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fixed(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    forward!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

/// 17 significant digits, with `-0` written as `0`.
pub fn fixed(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("output types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexOut {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexOut {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}
