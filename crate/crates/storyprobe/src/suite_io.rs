//! Suite files: a JSON header line followed by one JSON test case per line.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use storyprobe_core::perturb::TestType;
use storyprobe_core::suite::{Manifest, TestCase, TestSuite};
use storyprobe_core::RunConfig;

use crate::error::{read_text, write_text, Error, Result};

pub const SUITE_FORMAT: &str = "storyprobe-suite";
pub const FORMAT_VERSION: u32 = 1;

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(config: &RunConfig) -> String {
    digest(
        serde_json::to_string(config)
            .expect("config serializes")
            .as_bytes(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct SuiteHeader {
    format: String,
    version: u32,
    test_type: TestType,
    seed: u64,
    config_hash: String,
    cases: usize,
    manifest: Manifest,
}

pub fn suite_to_string(suite: &TestSuite) -> String {
    let header = SuiteHeader {
        format: SUITE_FORMAT.to_string(),
        version: FORMAT_VERSION,
        test_type: suite.manifest.test_type,
        seed: suite.manifest.seed,
        config_hash: config_hash(&suite.manifest.config),
        cases: suite.cases.len(),
        manifest: suite.manifest.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for case in &suite.cases {
        out.push_str(&serde_json::to_string(case).expect("case serializes"));
        out.push('\n');
    }
    out
}

/// Digest of the serialized suite; score files carry it so results are
/// never joined against a different suite.
pub fn suite_hash(suite: &TestSuite) -> String {
    digest(suite_to_string(suite).as_bytes())
}

pub fn parse_suite(text: &str, file: &str) -> Result<TestSuite> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (n, first) = lines
        .next()
        .ok_or_else(|| Error::parse(file, 1, "empty suite file"))?;
    let header: SuiteHeader = serde_json::from_str(first)
        .map_err(|e| Error::parse(file, n, format!("malformed suite header: {e}")))?;
    if header.format != SUITE_FORMAT {
        return Err(Error::parse(
            file,
            n,
            format!("not a suite file (format `{}`)", header.format),
        ));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::parse(
            file,
            n,
            format!("unsupported suite version {}", header.version),
        ));
    }
    let expected = config_hash(&header.manifest.config);
    if header.config_hash != expected {
        return Err(Error::parse(
            file,
            n,
            format!(
                "config hash {} does not match the embedded configuration ({expected})",
                header.config_hash
            ),
        ));
    }
    if header.test_type != header.manifest.test_type || header.seed != header.manifest.seed {
        return Err(Error::parse(file, n, "header disagrees with its manifest"));
    }
    let cases = lines
        .map(|(n, l)| {
            let case: TestCase = serde_json::from_str(l)
                .map_err(|e| Error::parse(file, n, format!("malformed test case: {e}")))?;
            case.validate()
                .map_err(|e| Error::parse(file, n, e.to_string()))?;
            Ok(case)
        })
        .collect::<Result<Vec<_>>>()?;
    if cases.len() != header.cases {
        return Err(Error::Data(format!(
            "{file}: header declares {} cases, found {}",
            header.cases,
            cases.len()
        )));
    }
    let suite = TestSuite {
        manifest: header.manifest,
        cases,
    };
    suite
        .validate()
        .map_err(|e| Error::Data(format!("{file}: {e}")))?;
    Ok(suite)
}

pub fn read_suite(path: &Path) -> Result<TestSuite> {
    parse_suite(&read_text(path)?, &path.display().to_string())
}

pub fn write_suite(path: &Path, suite: &TestSuite) -> Result<()> {
    write_text(path, &suite_to_string(suite))
}
