//! MDJSON, the on-disk interchange format for modular data: a UTF-8 JSON
//! object
//!
//! ```json
//! {
//!   "schema": "mdjson/1",
//!   "order": 39,
//!   "labels": ["0", "b", "..."],
//!   "vacuum": 0,
//!   "S": [[{"L": 13, "coeffs": ["1/13", "..."]}, "..."], ["..."]],
//!   "T": [{"L": 1, "coeffs": ["1"]}, "..."],
//!   "meta": { "family": "...", "...": "..." }
//! }
//! ```
//!
//! Every scalar is written exactly as its power-basis coordinates over the
//! smallest cyclotomic field containing it: `{"L": conductor, "coeffs":
//! [rationals as "p/q" strings, φ(conductor) of them]}`.  Rationals use
//! decimal numerator/denominator so files stay readable and diffable.
//! Loading rebuilds exact scalars and, unless the caller opts out,
//! re-verifies the modular-data axioms.

use crate::cyclotomic::Cyc;
use crate::mdata::{verify_axioms, MdataError, ModularData, VerifyMode};
use crate::ScalarError;
use num_rational::BigRational;
use std::path::Path;
use std::str::FromStr;

/// Format identifier written to and required from every file.
pub const SCHEMA: &str = "mdjson/1";

/// Errors from MDJSON encode/decode and the reload verification.
#[derive(Debug, thiserror::Error)]
pub enum MdjsonError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed mdjson: {0}")]
    Schema(String),
    #[error("axioms fail on load: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Mdata(#[from] MdataError),
}

/// Exact scalar as `{"L": conductor, "coeffs": [...]}`.
pub fn cyc_to_value(v: &Cyc) -> Result<serde_json::Value, MdjsonError> {
    let (order, coeffs) = v.to_power_basis()?;
    let strings: Vec<serde_json::Value> = coeffs
        .iter()
        .map(|c| serde_json::Value::String(c.to_string()))
        .collect();
    Ok(serde_json::json!({ "L": order, "coeffs": strings }))
}

/// Parse `{"L": conductor, "coeffs": [...]}` back into an exact scalar.
pub fn cyc_from_value(v: &serde_json::Value) -> Result<Cyc, MdjsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| MdjsonError::Schema("scalar is not an object".into()))?;
    let order = obj
        .get("L")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| MdjsonError::Schema("scalar lacks a positive integer \"L\"".into()))?;
    let coeffs = obj
        .get("coeffs")
        .and_then(|x| x.as_array())
        .ok_or_else(|| MdjsonError::Schema("scalar lacks a \"coeffs\" array".into()))?;
    let parsed: Result<Vec<BigRational>, MdjsonError> = coeffs
        .iter()
        .map(|c| {
            let s = c
                .as_str()
                .ok_or_else(|| MdjsonError::Schema("coefficient is not a string".into()))?;
            BigRational::from_str(s)
                .map_err(|e| MdjsonError::Schema(format!("bad rational {s:?}: {e}")))
        })
        .collect();
    Ok(Cyc::from_power_basis(order, &parsed?)?)
}

/// Encode a modular datum as an MDJSON value.
pub fn to_value(md: &ModularData) -> Result<serde_json::Value, MdjsonError> {
    let s: Result<Vec<Vec<serde_json::Value>>, MdjsonError> = md
        .s
        .iter()
        .map(|row| row.iter().map(cyc_to_value).collect())
        .collect();
    let t: Result<Vec<serde_json::Value>, MdjsonError> = md.t.iter().map(cyc_to_value).collect();
    Ok(serde_json::json!({
        "schema": SCHEMA,
        "order": md.order,
        "labels": md.labels,
        "vacuum": md.vacuum,
        "S": s?,
        "T": t?,
        "meta": md.meta,
    }))
}

/// Decode an MDJSON value; shape is validated, axioms are the caller's
/// choice via [`load`]'s mode argument.
pub fn from_value(v: &serde_json::Value) -> Result<ModularData, MdjsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| MdjsonError::Schema("top level is not an object".into()))?;
    let schema = obj.get("schema").and_then(|x| x.as_str()).unwrap_or("");
    if schema != SCHEMA {
        return Err(MdjsonError::Schema(format!(
            "schema {schema:?} is not {SCHEMA:?}"
        )));
    }
    let labels: Vec<String> = obj
        .get("labels")
        .and_then(|x| x.as_array())
        .ok_or_else(|| MdjsonError::Schema("missing \"labels\"".into()))?
        .iter()
        .map(|l| {
            l.as_str()
                .map(str::to_owned)
                .ok_or_else(|| MdjsonError::Schema("label is not a string".into()))
        })
        .collect::<Result<_, _>>()?;
    let vacuum = obj
        .get("vacuum")
        .and_then(|x| x.as_u64())
        .ok_or_else(|| MdjsonError::Schema("missing \"vacuum\"".into()))? as usize;
    let s_rows = obj
        .get("S")
        .and_then(|x| x.as_array())
        .ok_or_else(|| MdjsonError::Schema("missing \"S\"".into()))?;
    let s: Result<Vec<Vec<Cyc>>, MdjsonError> = s_rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| MdjsonError::Schema("S row is not an array".into()))?
                .iter()
                .map(cyc_from_value)
                .collect()
        })
        .collect();
    let t: Result<Vec<Cyc>, MdjsonError> = obj
        .get("T")
        .and_then(|x| x.as_array())
        .ok_or_else(|| MdjsonError::Schema("missing \"T\"".into()))?
        .iter()
        .map(cyc_from_value)
        .collect();
    let meta = obj
        .get("meta")
        .and_then(|x| x.as_object())
        .cloned()
        .unwrap_or_default();
    let md = ModularData::new(labels, vacuum, s?, t?, meta)?;
    let declared = obj.get("order").and_then(|x| x.as_u64()).unwrap_or(0);
    if declared != 0 && md.order != declared {
        return Err(MdjsonError::Schema(format!(
            "declared order {declared} but entries generate order {}",
            md.order
        )));
    }
    Ok(md)
}

/// Write a modular datum to a pretty-printed MDJSON file.
pub fn save(md: &ModularData, path: impl AsRef<Path>) -> Result<(), MdjsonError> {
    let value = to_value(md)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Read a modular datum from an MDJSON file, re-verifying axioms in the
/// given mode (`None` skips verification, for callers that will run their
/// own checks).
pub fn load(path: impl AsRef<Path>, verify: Option<VerifyMode>) -> Result<ModularData, MdjsonError> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let md = from_value(&value)?;
    if let Some(mode) = verify {
        let report = verify_axioms(&md, mode)?;
        if !report.passed() {
            let failing: Vec<&str> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            return Err(MdjsonError::VerificationFailed(failing.join(", ")));
        }
    }
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{cyclic_double, haagerup_izumi};

    #[test]
    fn round_trips_exactly() {
        let hg = haagerup_izumi(&[3], 0).unwrap();
        let value = to_value(&hg).unwrap();
        assert_eq!(value["schema"], SCHEMA);
        let back = from_value(&value).unwrap();
        assert_eq!(back.labels, hg.labels);
        assert_eq!(back.vacuum, hg.vacuum);
        assert_eq!(back.order, hg.order);
        assert_eq!(back.s, hg.s);
        assert_eq!(back.t, hg.t);
        assert_eq!(back.meta, hg.meta);
    }

    #[test]
    fn file_round_trip_with_verification() {
        let md = cyclic_double(3, 1).unwrap();
        let dir = std::env::temp_dir().join("mdjson-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zc31.mdjson");
        save(&md, &path).unwrap();
        let back = load(&path, Some(VerifyMode::Exact)).unwrap();
        assert_eq!(back.s, md.s);
        assert_eq!(back.t, md.t);
    }

    #[test]
    fn rejects_malformed_input() {
        let bad = serde_json::json!({"schema": "mdjson/0"});
        assert!(matches!(
            from_value(&bad),
            Err(MdjsonError::Schema(_))
        ));
        let hg = haagerup_izumi(&[1], 0).unwrap();
        let mut value = to_value(&hg).unwrap();
        value["order"] = serde_json::json!(7);
        assert!(matches!(from_value(&value), Err(MdjsonError::Schema(_))));
        // corrupt one scalar's length
        let mut value = to_value(&hg).unwrap();
        value["T"][0] = serde_json::json!({"L": 5, "coeffs": ["1"]});
        assert!(matches!(from_value(&value), Err(MdjsonError::Scalar(_))));
    }

    #[test]
    fn verification_on_load_catches_corruption() {
        let md = cyclic_double(3, 0).unwrap();
        let mut value = to_value(&md).unwrap();
        // negate one off-diagonal S entry, breaking unitarity
        let entry = cyc_from_value(&value["S"][0][1]).unwrap().neg();
        value["S"][0][1] = cyc_to_value(&entry).unwrap();
        value["S"][1][0] = cyc_to_value(&entry).unwrap();
        let dir = std::env::temp_dir().join("mdjson-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("corrupt.mdjson");
        std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        assert!(matches!(
            load(&path, Some(VerifyMode::Exact)),
            Err(MdjsonError::VerificationFailed(_))
        ));
        // but loads fine with verification disabled
        assert!(load(&path, None).is_ok());
    }
}
