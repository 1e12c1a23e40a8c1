//! Record-level and split-level checks for emitted cipher datasets.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{CipherError, CipherManifest, CipherRecord};

fn unshift(word: &str, key: u32) -> Option<String> {
    word.bytes()
        .map(|b| {
            b.is_ascii_lowercase()
                .then(|| (b'a' + (b - b'a' + 26 - (key % 26) as u8) % 26) as char)
        })
        .collect()
}

/// Checks a record against the replace-then-encrypt contract.
pub fn check_record(r: &CipherRecord) -> Result<(), String> {
    let tokens: Vec<&str> = r.sentence.split(' ').collect();
    let target: Vec<&str> = r.target.split(' ').collect();
    let first = tokens.iter().position(|t| *t == r.find);
    if r.is_noop != first.is_none() {
        return Err(format!("is_noop={} but find word present={}", r.is_noop, first.is_some()));
    }
    let Some(at) = first else {
        return if r.target == r.sentence {
            Ok(())
        } else {
            Err("no-op target differs from sentence".into())
        };
    };
    if tokens.len() != target.len() {
        return Err("target token count differs".into());
    }
    let differing: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i] != target[i]).collect();
    if differing != [at] {
        return Err(format!("expected exactly token {at} to change, got {differing:?}"));
    }
    if unshift(target[at], r.key).as_deref() != Some(r.replace.as_str()) {
        return Err(format!("`{}` does not decrypt to `{}` with key {}", target[at], r.replace, r.key));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CipherCheckReport {
    pub train_examples: usize,
    pub test_examples: usize,
    pub train_noops: usize,
    pub test_noops: usize,
    pub violations: Vec<String>,
}

impl CipherCheckReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn read_records(path: &Path) -> Result<Vec<CipherRecord>, CipherError> {
    BufReader::new(File::open(path)?)
        .lines()
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Checks each record, the no-op shares and dictionary disjointness as
/// seen in the files: no test find word may occur as a train find or
/// replace word.
pub fn check_cipher_dataset(dir: impl AsRef<Path>) -> Result<CipherCheckReport, CipherError> {
    let dir = dir.as_ref();
    let manifest: CipherManifest =
        serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
    let train = read_records(&dir.join(&manifest.train_file))?;
    let test = read_records(&dir.join(&manifest.test_file))?;

    let mut report = CipherCheckReport {
        train_examples: train.len(),
        test_examples: test.len(),
        train_noops: train.iter().filter(|r| r.is_noop).count(),
        test_noops: test.iter().filter(|r| r.is_noop).count(),
        violations: Vec::new(),
    };
    for (split, records) in [("train", &train), ("test", &test)] {
        for (i, r) in records.iter().enumerate() {
            if let Err(e) = check_record(r) {
                report.violations.push(format!("{split}:{}: {e}", i + 1));
            }
        }
    }
    let fraction = manifest.config.noop_fraction;
    for (split, n, noops) in [
        ("train", report.train_examples, report.train_noops),
        ("test", report.test_examples, report.test_noops),
    ] {
        if (noops as f64 - fraction * n as f64).abs() > 1.0 {
            report
                .violations
                .push(format!("{split}: {noops} no-ops out of {n}, fraction {fraction}"));
        }
    }
    let train_words: HashSet<&str> = train
        .iter()
        .flat_map(|r| [r.find.as_str(), r.replace.as_str()])
        .collect();
    for r in &test {
        if train_words.contains(r.find.as_str()) || train_words.contains(r.replace.as_str()) {
            report
                .violations
                .push(format!("test word `{}`/`{}` also used in train", r.find, r.replace));
        }
    }
    Ok(report)
}
