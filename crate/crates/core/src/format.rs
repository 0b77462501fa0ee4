//! Text formats and content hashing. Diagrams, move scripts and certificates
//! are JSON documents; big integers and rationals are carried as decimal
//! strings so golden files stay exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diagram::SurgeryDiagram;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serialization is infallible");
    out.push('\n');
    out
}

pub fn read_file(path: &str) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn write_file(path: &str, contents: &str) -> Result<(), FormatError> {
    std::fs::write(path, contents).map_err(|source| FormatError::Io { path: path.into(), source })
}

/// Canonical serialization of a diagram: component order as stored, linking
/// normalized (a < b, sorted, zeros dropped), compact JSON.
pub fn canonical_diagram_json(d: &SurgeryDiagram) -> String {
    let mut normal = d.clone();
    let canon = d.canonicalized();
    normal.linking = canon.linking;
    serde_json::to_string(&normal).expect("serialization is infallible")
}

/// Hex-encoded content digest of the canonical serialization.
pub fn content_hash(d: &SurgeryDiagram) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_diagram_json(d).as_bytes());
    hex::encode(hasher.finalize())
}

/// Reduced fraction as `p/q`, or a plain integer without `/1`.
pub fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_str(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from(s.parse::<BigInt>().ok()?)),
    }
}

/// Serde adapter: one `BigInt` as a decimal string.
pub mod bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: `Vec<BigInt>` as decimal strings.
pub mod bigints {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.into_iter()
            .map(|x| x.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Serde adapter: `Option<BigRational>` as `"p/q"` strings (integers without
/// `/1`), `null` when absent.
pub mod rational_opt {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&super::rational_str(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        match raw {
            None => Ok(None),
            Some(text) => super::rational_from_str(&text)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {text:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Sign, SurgeryComponent};
    use num_bigint::BigInt;

    #[test]
    fn diagram_roundtrip() {
        let mut d = SurgeryDiagram::new();
        d.add_component(SurgeryComponent::new("u", -2, 1, Sign::Plus));
        d.add_component(SurgeryComponent::new("v", -1, 0, Sign::Minus));
        d.set_linking("v", "u", 2);
        let text = to_json_pretty(&d);
        let back: SurgeryDiagram = from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(content_hash(&back), content_hash(&d));
    }

    #[test]
    fn sign_is_literal() {
        let text = r#"{"components":[{"id":"u","tb":-2,"rot":1,"sign":"+1"}],"linking":[]}"#;
        let d: SurgeryDiagram = from_json(text).unwrap();
        assert_eq!(d.components[0].sign, Sign::Plus);
        let bad = r#"{"components":[{"id":"u","tb":-2,"rot":1,"sign":"1/2"}],"linking":[]}"#;
        assert!(from_json::<SurgeryDiagram>(bad).is_err());
        let numeric = r#"{"components":[{"id":"u","tb":-2,"rot":1,"sign":-1}],"linking":[]}"#;
        assert!(from_json::<SurgeryDiagram>(numeric).is_err());
    }

    #[test]
    fn rational_formatting() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(rational_str(&half), "1/2");
        let int = BigRational::from(BigInt::from(-3));
        assert_eq!(rational_str(&int), "-3");
        assert_eq!(rational_from_str("1/2"), Some(half));
        assert_eq!(rational_from_str("-3"), Some(int));
    }
}
