//! Single-rule rewrite datasets.
//!
//! An [`Example`] pairs an [`Instruction`] `pattern -> replacement` with an
//! input string; the target replaces the leftmost occurrence of the
//! pattern, or copies the input unchanged when the pattern is absent.

mod alloc;
pub mod check;
mod dataset;
mod embed;
mod pattern;

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::Rule;

pub use alloc::{allocate_counts, is_noop_slot, noop_count, power_law_weights, PowerLawSpec};
pub use dataset::{
    cross_class_splits, make_dataset, CrossClassConfig, DatasetConfig, DatasetManifest,
    MANIFEST_FILE, TEST_FILE, TRAIN_FILE,
};
pub use embed::{embed_pattern, make_example, EMBED_RETRIES};
pub use pattern::{gen_pattern, pattern_capacity, SemanticClass};

#[derive(Debug, Error)]
pub enum TaskGenError {
    #[error("pattern length must be positive")]
    ZeroLength,
    #[error("repetition parameter k must be at least 1")]
    ZeroK,
    #[error("length {length} is not divisible by k={k}")]
    IndivisibleLength { length: usize, k: usize },
    #[error("{occurrences} occurrences of a length-{pattern_len} pattern do not fit in {input_length} symbols")]
    EmbeddingTooLong {
        pattern_len: usize,
        occurrences: usize,
        input_length: usize,
    },
    #[error("could not embed `{pattern}` exactly {occurrences} times after {retries} attempts")]
    RetriesExhausted {
        pattern: String,
        occurrences: usize,
        retries: usize,
    },
    #[error("cannot give each of {instructions} instructions an example out of {total}")]
    TooFewExamples { total: usize, instructions: usize },
    #[error("power-law shape must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("alphabet too small: need {needed} distinct patterns, at most {available} are possible")]
    AlphabetTooSmall { needed: usize, available: String },
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
}

impl TaskGenError {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Self::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub pattern: String,
    pub replacement: String,
}

impl Instruction {
    pub fn new(pattern: impl Into<String>, replacement: impl Into<String>) -> Self {
        Self {
            pattern: pattern.into(),
            replacement: replacement.into(),
        }
    }

    pub fn rule(&self) -> Rule {
        Rule::new(self.pattern.clone(), self.replacement.clone())
    }
}

/// One dataset record. Serialized flat as
/// `{pattern, replacement, input, target, is_noop, occurrences}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    #[serde(flatten)]
    pub instruction: Instruction,
    pub input: String,
    pub target: String,
    pub is_noop: bool,
    pub occurrences: usize,
}

impl Example {
    /// Builds the record for `input`, computing occurrence count and target.
    pub fn new(instruction: Instruction, input: String) -> Self {
        let occurrences = count_occurrences(&input, &instruction.pattern);
        let target = match instruction.rule().apply_once(&input) {
            Some((out, _)) if occurrences > 0 => out,
            _ => input.clone(),
        };
        Self {
            instruction,
            input,
            target,
            is_noop: occurrences == 0,
            occurrences,
        }
    }
}

/// Number of positions where `pattern` starts in `haystack`, overlaps included.
pub fn count_occurrences(haystack: &str, pattern: &str) -> usize {
    if pattern.is_empty() {
        return 0;
    }
    let step = pattern.chars().next().map_or(1, char::len_utf8);
    let mut count = 0;
    let mut from = 0;
    while let Some(i) = haystack[from..].find(pattern) {
        count += 1;
        from += i + step;
        if from > haystack.len() {
            break;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_aware_count() {
        assert_eq!(count_occurrences("abababcc", "aba"), 2);
        assert_eq!(count_occurrences("aaaa", "aa"), 3);
        assert_eq!(count_occurrences("abc", "xyz"), 0);
        assert_eq!(count_occurrences("", "a"), 0);
    }

    #[test]
    fn example_targets() {
        let ex = Example::new(Instruction::new("ss", "tr"), "mississipi".into());
        assert_eq!(ex.target, "mitrissipi");
        assert_eq!(ex.occurrences, 2);
        assert!(!ex.is_noop);

        let ex = Example::new(Instruction::new("ab", "zz"), "abab".into());
        assert_eq!(ex.target, "zzab");
        assert_eq!(ex.occurrences, 2);

        let ex = Example::new(Instruction::new("qrs", "xyz"), "abcabc".into());
        assert!(ex.is_noop);
        assert_eq!(ex.target, ex.input);
    }

    #[test]
    fn flat_json_layout() {
        let ex = Example::new(Instruction::new("ab", "zz"), "abab".into());
        assert_eq!(
            serde_json::to_string(&ex).unwrap(),
            r#"{"pattern":"ab","replacement":"zz","input":"abab","target":"zzab","is_noop":false,"occurrences":2}"#
        );
    }
}
