//! Builtin devices and the key-value device file format.
//!
//! ```text
//! # device 2
//! id  = device2
//! w1  = 4.25 GHz
//! w2  = 4.20 GHz
//! g12 = 6.48 MHz
//! dc  = -100 MHz
//! d1  = -250 MHz
//! d2  = -250 MHz
//! g      = 95 MHz     # optional, qubit-coupler coupling at wc_ref
//! wc_ref = 4.8 GHz    # optional
//! t1_q1 = 200 us      # optional coherence block, all six or none
//! ```
//!
//! Frequencies take `GHz`, `MHz` or `kHz`; times take `us` or `ns`.

use crate::circuit::{CircuitParams, CouplingGeometry};
use crate::dynamics::CoherenceSpec;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

pub const REFERENCE_COUPLING: f64 = 0.095;
pub const REFERENCE_COUPLER: f64 = 4.8;

/// Affine entangling-mode parks for devices 1-4.
pub const AFFINE_PARKS: [f64; 4] = [4.472, 4.530, 4.658, 4.731];

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceRecord {
    pub id: String,
    pub params: CircuitParams,
    pub coupling: f64,
    pub wc_ref: f64,
    pub coherence: Option<CoherenceSpec>,
    pub note: String,
}

/// Rows of (w1, w2 in GHz; g12, dc, d1, d2 in MHz).
const TABLE: [(f64, f64, f64, f64, f64, f64); 7] = [
    (4.25, 4.20, 3.76, -100.0, -250.0, -250.0),
    (4.25, 4.20, 6.48, -100.0, -250.0, -250.0),
    (4.25, 4.20, 6.48, -200.0, -250.0, -250.0),
    (4.25, 4.20, 6.48, -100.0, -320.0, -320.0),
    (4.00, 4.20, 9.48, -100.0, 500.0, -250.0),
    (4.40, 4.20, 9.48, -100.0, -320.0, -320.0),
    (4.50, 4.20, 6.48, 200.0, -250.0, -250.0),
];

/// `v * 10^-shift`, shifting the decimal exponent of the literal so that
/// `6.48 MHz` and `0.00648 GHz` give the same double.
fn scale_decimal(literal: &str, v: f64, shift: i32) -> f64 {
    if shift == 0 {
        return v;
    }
    let (mant, exp) = match literal.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().unwrap_or(0)),
        None => (literal, 0),
    };
    format!("{mant}e{}", exp - shift).parse().unwrap_or(v / 10f64.powi(shift))
}

fn mhz(x: f64) -> f64 {
    scale_decimal(&format!("{x:?}"), x, 3)
}

pub fn make_params(w1: f64, w2: f64, g12: f64, dc: f64, d1: f64, d2: f64, g: f64, wc_ref: f64) -> CircuitParams {
    let geometry = CouplingGeometry::from_reference(w1, w2, g, wc_ref, g12);
    CircuitParams { w1, wc: wc_ref, w2, d1, dc, d2, g1c: g, g2c: g, g12, geometry: Some(geometry) }
}

pub fn builtin(id: usize) -> Result<DeviceRecord> {
    if !(1..=7).contains(&id) {
        return Err(Error::InvalidParameter { name: "device", reason: format!("no builtin device {id}") });
    }
    let (w1, w2, g12, dc, d1, d2) = TABLE[id - 1];
    Ok(DeviceRecord {
        id: format!("device{id}"),
        params: make_params(w1, w2, mhz(g12), mhz(dc), mhz(d1), mhz(d2), REFERENCE_COUPLING, REFERENCE_COUPLER),
        coupling: REFERENCE_COUPLING,
        wc_ref: REFERENCE_COUPLER,
        coherence: None,
        note: format!("builtin table row {id}"),
    })
}

pub fn builtin_all() -> Vec<DeviceRecord> {
    (1..=7).map(|i| builtin(i).unwrap()).collect()
}

/// `device2`, `2` or a path to a device file. Bare names are also looked
/// up as `<name>.dev` under `dir` when given.
pub fn load_device(source: &str, dir: Option<&Path>) -> Result<DeviceRecord> {
    let trimmed = source.trim_start_matches("device");
    if let Ok(id) = trimmed.parse::<usize>() {
        if !Path::new(source).exists() {
            return builtin(id);
        }
    }
    let mut path = Path::new(source).to_path_buf();
    if !path.exists() {
        if let Some(d) = dir {
            let candidate = d.join(format!("{source}.dev"));
            if candidate.exists() {
                path = candidate;
            }
        }
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_device(&text, &path.display().to_string())
}

const FREQ_KEYS: [&str; 8] = ["w1", "w2", "g12", "dc", "d1", "d2", "g", "wc_ref"];
const TIME_KEYS: [&str; 6] = ["t1_q1", "t2_q1", "t1_c", "t2_c", "t1_q2", "t2_q2"];

fn parse_quantity(raw: &str, time: bool, path: &str) -> Result<f64> {
    let schema = |reason: String| Error::Schema { path: path.to_string(), reason };
    let mut parts = raw.split_whitespace();
    let num = parts.next().ok_or_else(|| schema("missing value".into()))?;
    let unit = parts.next().ok_or_else(|| schema("missing unit".into()))?;
    if parts.next().is_some() {
        return Err(schema(format!("trailing tokens in `{raw}`")));
    }
    let v: f64 = num.parse().map_err(|_| schema(format!("`{num}` is not a number")))?;
    if !v.is_finite() {
        return Err(schema(format!("`{num}` is not finite")));
    }
    let shift = match (time, unit) {
        (false, "GHz") | (true, "us") => 0,
        (false, "MHz") | (true, "ns") => 3,
        (false, "kHz") => 6,
        _ => return Err(schema(format!("unit `{unit}` not allowed here"))),
    };
    Ok(scale_decimal(num, v, shift))
}

pub fn parse_device(text: &str, origin: &str) -> Result<DeviceRecord> {
    let mut fields: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Schema {
            path: format!("{origin}:{}", lineno + 1),
            reason: "expected `key = value`".into(),
        })?;
        let k = k.trim().to_string();
        if fields.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Schema { path: format!("{origin}:{k}"), reason: "duplicate key".into() });
        }
    }
    for k in fields.keys() {
        if k != "id" && !FREQ_KEYS.contains(&k.as_str()) && !TIME_KEYS.contains(&k.as_str()) {
            return Err(Error::Schema { path: format!("{origin}:{k}"), reason: "unknown field".into() });
        }
    }
    let freq = |k: &str| -> Result<Option<f64>> {
        fields.get(k).map(|v| parse_quantity(v, false, &format!("{origin}:{k}"))).transpose()
    };
    let need = |k: &'static str| -> Result<f64> {
        freq(k)?.ok_or_else(|| Error::Schema { path: format!("{origin}:{k}"), reason: "missing field".into() })
    };
    let (w1, w2, g12, dc, d1, d2) = (need("w1")?, need("w2")?, need("g12")?, need("dc")?, need("d1")?, need("d2")?);
    let g = freq("g")?.unwrap_or(REFERENCE_COUPLING);
    let wc_ref = freq("wc_ref")?.unwrap_or(REFERENCE_COUPLER);
    for (k, v) in [("w1", w1), ("w2", w2), ("wc_ref", wc_ref)] {
        if v <= 0.0 {
            return Err(Error::Schema { path: format!("{origin}:{k}"), reason: "frequency must be positive".into() });
        }
    }
    let present = TIME_KEYS.iter().filter(|k| fields.contains_key(**k)).count();
    let coherence = match present {
        0 => None,
        6 => {
            let t = |k: &str| parse_quantity(&fields[k], true, &format!("{origin}:{k}"));
            let c = CoherenceSpec {
                t1: [t("t1_q1")?, t("t1_c")?, t("t1_q2")?],
                t2: [t("t2_q1")?, t("t2_c")?, t("t2_q2")?],
            };
            c.validate().map_err(|e| Error::Schema { path: origin.to_string(), reason: e.to_string() })?;
            Some(c)
        }
        _ => {
            return Err(Error::Schema {
                path: origin.to_string(),
                reason: "coherence block needs all of t1_q1 t2_q1 t1_c t2_c t1_q2 t2_q2".into(),
            })
        }
    };
    let params = make_params(w1, w2, g12, dc, d1, d2, g, wc_ref);
    params.validate()?;
    Ok(DeviceRecord {
        id: fields.get("id").cloned().unwrap_or_else(|| origin.to_string()),
        params,
        coupling: g,
        wc_ref,
        coherence,
        note: format!("loaded from {origin}"),
    })
}

/// Serialize in GHz/us with shortest round-trip formatting.
pub fn write_device(rec: &DeviceRecord) -> String {
    let p = &rec.params;
    let mut s = format!("id = {}\n", rec.id);
    for (k, v) in [
        ("w1", p.w1),
        ("w2", p.w2),
        ("g12", p.g12),
        ("dc", p.dc),
        ("d1", p.d1),
        ("d2", p.d2),
        ("g", rec.coupling),
        ("wc_ref", rec.wc_ref),
    ] {
        s += &format!("{k} = {v:?} GHz\n");
    }
    if let Some(c) = &rec.coherence {
        for (k, v) in TIME_KEYS.iter().zip([c.t1[0], c.t2[0], c.t1[1], c.t2[1], c.t1[2], c.t2[2]]) {
            s += &format!("{k} = {v:?} us\n");
        }
    }
    s
}
