//! Independent verification of emitted rewrite datasets.
//!
//! Nothing here calls the generator or the rewrite engine: occurrence
//! counts and targets are recomputed by brute force from each record.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{DatasetManifest, Example, TaskGenError, MANIFEST_FILE};
use crate::output::checksum_files;

/// Violations past this many are counted but not kept.
const KEEP_VIOLATIONS: usize = 50;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub train_examples: usize,
    pub test_examples: usize,
    pub violation_count: usize,
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.violation_count == 0
    }

    fn flag(&mut self, message: String) {
        self.violation_count += 1;
        if self.violations.len() < KEEP_VIOLATIONS {
            self.violations.push(message);
        }
    }
}

fn naive_positions(hay: &[char], pat: &[char]) -> Vec<usize> {
    if pat.is_empty() || pat.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - pat.len())
        .filter(|&i| (0..pat.len()).all(|k| hay[i + k] == pat[k]))
        .collect()
}

/// Checks one record against its own fields.
pub fn check_example(ex: &Example) -> Result<(), String> {
    let input: Vec<char> = ex.input.chars().collect();
    let pattern: Vec<char> = ex.instruction.pattern.chars().collect();
    let positions = naive_positions(&input, &pattern);
    if positions.len() != ex.occurrences {
        return Err(format!(
            "occurrences field {} but pattern occurs {} times",
            ex.occurrences,
            positions.len()
        ));
    }
    if ex.is_noop != positions.is_empty() {
        return Err(format!("is_noop={} with {} occurrences", ex.is_noop, positions.len()));
    }
    let expected: String = match positions.first() {
        None => ex.input.clone(),
        Some(&p) => input[..p]
            .iter()
            .chain(ex.instruction.replacement.chars().collect::<Vec<_>>().iter())
            .chain(input[p + pattern.len()..].iter())
            .collect(),
    };
    if ex.target != expected {
        return Err(format!("target `{}` but expected `{expected}`", ex.target));
    }
    Ok(())
}

#[derive(Default)]
struct SplitTally {
    examples: usize,
    // pattern -> (count, noops)
    per_pattern: BTreeMap<String, (usize, usize)>,
}

fn check_file(path: &Path, split: &str, report: &mut CheckReport) -> Result<SplitTally, TaskGenError> {
    let mut tally = SplitTally::default();
    for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let ex: Example = match serde_json::from_str(&line) {
            Ok(ex) => ex,
            Err(e) => {
                report.flag(format!("{split}:{}: unparsable record: {e}", n + 1));
                continue;
            }
        };
        if let Err(e) = check_example(&ex) {
            report.flag(format!("{split}:{}: {e}", n + 1));
        }
        tally.examples += 1;
        let entry = tally.per_pattern.entry(ex.instruction.pattern).or_default();
        entry.0 += 1;
        entry.1 += usize::from(ex.is_noop);
    }
    Ok(tally)
}

/// Verifies every record of a generated dataset directory, plus
/// train/test disjointness, per-instruction counts, no-op shares and the
/// manifest checksum.
pub fn check_dataset(dir: impl AsRef<Path>) -> Result<CheckReport, TaskGenError> {
    let dir = dir.as_ref();
    let manifest: DatasetManifest =
        serde_json::from_reader(BufReader::new(File::open(dir.join(MANIFEST_FILE))?))?;
    let train_path = dir.join(&manifest.train_file);
    let test_path = dir.join(&manifest.test_file);

    let mut report = CheckReport::default();
    let train = check_file(&train_path, "train", &mut report)?;
    let test = check_file(&test_path, "test", &mut report)?;
    report.train_examples = train.examples;
    report.test_examples = test.examples;

    let train_patterns: HashSet<&String> = train.per_pattern.keys().collect();
    for p in test.per_pattern.keys().filter(|p| train_patterns.contains(p)) {
        report.flag(format!("pattern `{p}` appears in both train and test"));
    }
    let fraction = manifest.config.noop_fraction;
    for (split, tally, expected) in [
        ("train", &train, &manifest.per_instruction_counts),
        ("test", &test, &manifest.test_per_instruction_counts),
    ] {
        let seen: BTreeMap<&String, usize> =
            tally.per_pattern.iter().map(|(p, (c, _))| (p, *c)).collect();
        let wanted: BTreeMap<&String, usize> = expected.iter().map(|(p, c)| (p, *c)).collect();
        if seen != wanted {
            report.flag(format!("{split}: per-instruction counts differ from manifest"));
        }
        for (p, &(count, noops)) in &tally.per_pattern {
            if (noops as f64 - fraction * count as f64).abs() > 1.0 {
                report.flag(format!(
                    "{split}: `{p}` has {noops} no-ops out of {count}, fraction {fraction}"
                ));
            }
        }
    }
    if train.examples != manifest.train_examples || test.examples != manifest.test_examples {
        report.flag("example totals differ from manifest".into());
    }
    if checksum_files(&[&train_path, &test_path])? != manifest.checksum {
        report.flag("checksum mismatch".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::Instruction;

    fn ex(pattern: &str, input: &str, target: &str, is_noop: bool, occ: usize) -> Example {
        Example {
            instruction: Instruction::new(pattern, "zz"),
            input: input.into(),
            target: target.into(),
            is_noop,
            occurrences: occ,
        }
    }

    #[test]
    fn accepts_correct_records() {
        assert!(check_example(&ex("ab", "abab", "zzab", false, 2)).is_ok());
        assert!(check_example(&ex("qq", "abab", "abab", true, 0)).is_ok());
        assert!(check_example(&ex("aba", "abababcc", "zzbabcc", false, 2)).is_ok());
    }

    #[test]
    fn flags_bad_records() {
        assert!(check_example(&ex("ab", "abab", "abzz", false, 2)).is_err());
        assert!(check_example(&ex("ab", "abab", "zzab", false, 1)).is_err());
        assert!(check_example(&ex("ab", "abab", "abab", true, 0)).is_err());
        assert!(check_example(&ex("aba", "abababcc", "zzbabcc", false, 1)).is_err());
    }
}
