//! JSON ingestion with field-level diagnostics, plus small export helpers.

use std::path::Path;

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parses `text`, reporting the failing field path and line/column.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path: format!("line {} column {}, field `{}`", inner.line(), inner.column(), path),
            message: inner.to_string(),
        }
    })
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        Error::Parse { path: p, message } => Error::Parse { path: format!("{}: {p}", path.display()), message },
        other => other,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

    #[test]
    fn corrupt_channel_reports_field_and_line() {
        let mut spec = crate::channel::build_modulo_example(2, crate::rational::Prob::zero()).unwrap();
        spec.noise[0][0][0] = crate::rational::Prob::one();
        let text = spec.to_json_string().replacen("\"1\"", "\"one\"", 1);
        let err = parse_json::<ChannelSpec>(&text).unwrap_err();
        match err {
            Error::Parse { path, message } => {
                assert!(path.contains("noise[0][0][0]"), "{path}");
                assert!(path.contains("line"), "{path}");
                assert!(message.contains("invalid probability"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hashes_are_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
