//! JSON documents exchanged by the command line, plus CSV and SVG plot output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DwError, Result};
use crate::linalg::{c64, ComplexMatrix, ShellPoint, C64};
use crate::stability::{RMat, StateSpaceSystem};

pub const SCHEMA: &str = "dwshell/1";

fn schema() -> String {
    SCHEMA.into()
}

/// f64 fields that may be ±∞ or NaN: finite values are JSON numbers, the rest the
/// strings "inf", "-inf", "nan".
pub mod ext_f64 {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct V;

    impl Visitor<'_> for V {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom(format!("unexpected float string {v:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(V)
    }
}

fn check_schema(found: &str) -> Result<()> {
    if found != SCHEMA {
        return Err(DwError::InvalidArgument(format!("unsupported schema {found:?}, expected {SCHEMA:?}")));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| DwError::InvalidArgument(format!("malformed JSON: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| DwError::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub dim: usize,
    /// Row-major [re, im] pairs.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDocument {
    pub fn from_matrix(name: &str, m: &ComplexMatrix) -> Self {
        Self { schema: schema(), name: name.into(), dim: m.dim(), entries: m.row_major().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        check_schema(&self.schema)?;
        if self.dim == 0 || self.entries.len() != self.dim * self.dim {
            return Err(DwError::InvalidArgument(format!("matrix {:?}: dim {} needs {} entries, found {}", self.name, self.dim, self.dim * self.dim, self.entries.len())));
        }
        let z: Vec<C64> = self.entries.iter().map(|p| c64(p[0], p[1])).collect();
        ComplexMatrix::from_row_major(self.dim, &z)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }
}

/// Real matrix with declared shape and row-major data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealArray {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealArray {
    pub fn from_matrix(m: &RMat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self, label: &str) -> Result<RMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(DwError::InvalidArgument(format!("{label}: shape {}x{} needs {} values, found {}", self.rows, self.cols, self.rows * self.cols, self.data.len())));
        }
        Ok(RMat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceData {
    #[serde(rename = "A")]
    pub a: RealArray,
    #[serde(rename = "B")]
    pub b: RealArray,
    #[serde(rename = "C")]
    pub c: RealArray,
    #[serde(rename = "D")]
    pub d: RealArray,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDocument {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(default)]
    pub name: String,
    pub state_space: StateSpaceData,
}

impl SystemDocument {
    pub fn from_system(name: &str, s: &StateSpaceSystem) -> Self {
        Self {
            schema: schema(),
            name: name.into(),
            state_space: StateSpaceData {
                a: RealArray::from_matrix(&s.a),
                b: RealArray::from_matrix(&s.b),
                c: RealArray::from_matrix(&s.c),
                d: RealArray::from_matrix(&s.d),
            },
        }
    }

    pub fn to_system(&self) -> Result<StateSpaceSystem> {
        check_schema(&self.schema)?;
        let ss = &self.state_space;
        let sys = StateSpaceSystem::new(ss.a.to_matrix("A")?, ss.b.to_matrix("B")?, ss.c.to_matrix("C")?, ss.d.to_matrix("D")?)?;
        if sys.inputs() != sys.outputs() {
            return Err(DwError::InvalidArgument(format!("system {:?} must have as many inputs as outputs", self.name)));
        }
        Ok(sys)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(default = "schema")]
    pub schema: String,
    /// Subcommand name.
    pub command: String,
    /// Every parameter needed to re-run the command.
    pub parameters: serde_json::Value,
    /// FNV-1a digest of the serialized input documents.
    pub inputs_digest: String,
    pub inputs: serde_json::Value,
    pub result: serde_json::Value,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl ResultDocument {
    pub fn new(command: &str, parameters: serde_json::Value, inputs: serde_json::Value, result: serde_json::Value) -> Self {
        let digest = digest(&inputs.to_string());
        Self { schema: schema(), command: command.into(), parameters, inputs_digest: digest, inputs, result, diagnostics: Vec::new() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let d: Self = parse_json(text)?;
        check_schema(&d.schema)?;
        Ok(d)
    }
}

/// 64-bit FNV-1a, hex-encoded.
pub fn digest(text: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

pub fn vertices_json(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn shell_csv(points: &[ShellPoint]) -> String {
    let mut s = String::from("z_re,z_im,nu\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.z.re, p.z.im, p.nu);
    }
    s
}

pub fn curve_csv(v: &[C64]) -> String {
    let mut s = String::from("re,im\n");
    for z in v {
        let _ = writeln!(s, "{},{}", z.re, z.im);
    }
    s
}

/// Columns omega, re, im; one row per eigenvalue.
pub fn loci_csv(omegas: &[f64], loci: &[Vec<C64>]) -> String {
    let mut s = String::from("omega,re,im\n");
    for (w, ls) in omegas.iter().zip(loci) {
        for l in ls {
            let _ = writeln!(s, "{w},{},{}", l.re, l.im);
        }
    }
    s
}

pub struct SvgCurve<'a> {
    pub vertices: &'a [C64],
    pub closed: bool,
    pub color: &'a str,
}

/// Polylines in a square canvas; the data bounding box (padded 5%) maps onto the
/// viewBox with the vertical axis pointing up.
pub fn svg_polylines(curves: &[SvgCurve], size: f64) -> String {
    let pts = curves.iter().flat_map(|c| c.vertices.iter()).filter(|z| z.re.is_finite() && z.im.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12) * 1.1;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let map = |z: &C64| ((z.re - cx) / span * size + 0.5 * size, (cy - z.im) / span * size + 0.5 * size);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">"#);
    let _ = writeln!(s, "<!-- data box: x [{}, {}], y [{}, {}] -->", cx - 0.5 * span, cx + 0.5 * span, cy - 0.5 * span, cy + 0.5 * span);
    for c in curves {
        let tag = if c.closed { "polygon" } else { "polyline" };
        let coords: Vec<String> = c.vertices.iter().map(map).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(s, r#"<{tag} fill="none" stroke="{}" stroke-width="1" points="{}"/>"#, c.color, coords.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::example2_systems;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_row_major(2, &[c64(1.0, 2.0), c64(0.0, -1.0), c64(3.0, 0.0), c64(0.5, 0.5)]).unwrap();
        let d = MatrixDocument::from_matrix("m", &m);
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"schema\":\"dwshell/1\""));
        let back = MatrixDocument::parse(&text).unwrap().to_matrix().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_document_errors() {
        assert!(MatrixDocument::parse("{").is_err());
        let d = MatrixDocument::parse(r#"{"dim": 2, "entries": [[1,0]]}"#).unwrap();
        assert!(d.to_matrix().is_err());
        let d = MatrixDocument::parse(r#"{"schema": "other", "dim": 1, "entries": [[1,0]]}"#).unwrap();
        assert!(d.to_matrix().is_err());
    }

    #[test]
    fn system_round_trip() {
        let (g, _) = example2_systems();
        let d = SystemDocument::from_system("G", &g);
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(SystemDocument::parse(&text).unwrap().to_system().unwrap(), g);
        let bad = text.replace("\"rows\":2,\"cols\":2,\"data\":[-1.0", "\"rows\":2,\"cols\":3,\"data\":[-1.0");
        assert!(SystemDocument::parse(&bad).unwrap().to_system().is_err());
    }

    #[test]
    fn non_finite_floats_round_trip() {
        #[derive(Serialize, Deserialize)]
        struct T {
            #[serde(with = "ext_f64")]
            v: f64,
        }
        for v in [1.5, f64::INFINITY, f64::NEG_INFINITY] {
            let s = serde_json::to_string(&T { v }).unwrap();
            assert_eq!(serde_json::from_str::<T>(&s).unwrap().v, v);
        }
        let s = serde_json::to_string(&T { v: f64::NAN }).unwrap();
        assert_eq!(s, r#"{"v":"nan"}"#);
        assert!(serde_json::from_str::<T>(&s).unwrap().v.is_nan());
        assert_eq!(serde_json::from_str::<T>(r#"{"v":3}"#).unwrap().v, 3.0);
    }

    #[test]
    fn svg_maps_box_into_view() {
        let v = [c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 1.0)];
        let s = svg_polylines(&[SvgCurve { vertices: &v, closed: true, color: "black" }], 100.0);
        assert!(s.starts_with("<svg") && s.contains("<polygon"));
        assert_eq!(digest("abc"), digest("abc"));
        assert_ne!(digest("abc"), digest("abd"));
    }
}
