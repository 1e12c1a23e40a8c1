use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub example_id: usize,
    pub prediction: String,
}

/// A reference example reduced to what scoring needs. Rewrite and cipher
/// records both map onto this.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceItem {
    pub input: String,
    pub target: String,
    pub is_noop: bool,
    pub instruction: String,
    pub occurrences: Option<usize>,
}

#[derive(Deserialize)]
struct AnyRecord {
    pattern: Option<String>,
    replacement: Option<String>,
    input: Option<String>,
    sentence: Option<String>,
    find: Option<String>,
    replace: Option<String>,
    key: Option<u32>,
    target: String,
    is_noop: bool,
    occurrences: Option<usize>,
}

impl AnyRecord {
    fn into_item(self) -> Result<ReferenceItem, String> {
        match self {
            AnyRecord {
                pattern: Some(p),
                replacement: Some(r),
                input: Some(input),
                target,
                is_noop,
                occurrences,
                ..
            } => Ok(ReferenceItem {
                input,
                target,
                is_noop,
                instruction: format!("{p}->{r}"),
                occurrences,
            }),
            AnyRecord {
                sentence: Some(sentence),
                find: Some(f),
                replace: Some(r),
                key: Some(k),
                target,
                is_noop,
                ..
            } => Ok(ReferenceItem {
                input: sentence,
                target,
                is_noop,
                instruction: format!("{f}->{r}@{k}"),
                occurrences: None,
            }),
            _ => Err("neither a rewrite nor a cipher record".into()),
        }
    }
}

fn read_jsonl<T>(path: &Path, mut parse: impl FnMut(&str) -> Result<T, String>) -> Result<Vec<T>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&line).map_err(|message| EvalError::Record {
            path: path.display().to_string(),
            line: i + 1,
            message,
        })?);
    }
    Ok(out)
}

/// Reads a rewrite or cipher dataset file.
pub fn load_reference(path: impl AsRef<Path>) -> Result<Vec<ReferenceItem>, EvalError> {
    read_jsonl(path.as_ref(), |line| {
        serde_json::from_str::<AnyRecord>(line)
            .map_err(|e| e.to_string())?
            .into_item()
    })
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, EvalError> {
    read_jsonl(path.as_ref(), |line| {
        serde_json::from_str(line).map_err(|e| e.to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Predicts the input unchanged.
    Copy,
    /// Predicts the reference target.
    Target,
}

pub fn baseline_predictions(reference: &[ReferenceItem], baseline: Baseline) -> Vec<PredictionRecord> {
    reference
        .iter()
        .enumerate()
        .map(|(example_id, r)| PredictionRecord {
            example_id,
            prediction: match baseline {
                Baseline::Copy => r.input.clone(),
                Baseline::Target => r.target.clone(),
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub count: usize,
    pub correct: usize,
    /// Absent when `count` is zero.
    pub accuracy: Option<f64>,
}

impl SplitScore {
    fn add(&mut self, correct: bool) {
        self.count += 1;
        self.correct += usize::from(correct);
    }

    fn finish(&mut self) {
        self.accuracy = (self.count > 0).then(|| self.correct as f64 / self.count as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: SplitScore,
    pub hasop: SplitScore,
    pub noop: SplitScore,
    pub total_accuracy: f64,
    pub hasop_accuracy: Option<f64>,
    pub noop_accuracy: Option<f64>,
    /// Share of has-op examples whose prediction is the unchanged input.
    pub always_noop_rate: Option<f64>,
    pub per_instruction: BTreeMap<String, SplitScore>,
    pub per_occurrence: BTreeMap<usize, SplitScore>,
    /// Training-set instruction count, when the caller supplies it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_instructions: Option<usize>,
    /// Training-set power-law shape, when the caller supplies it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
}

/// Scores predictions by exact string match, joined on `example_id`.
pub fn score(reference: &[ReferenceItem], predictions: &[PredictionRecord]) -> Result<EvalReport, EvalError> {
    if reference.len() != predictions.len() {
        return Err(EvalError::LengthMismatch {
            reference: reference.len(),
            predictions: predictions.len(),
        });
    }
    let mut by_id: Vec<Option<&str>> = vec![None; reference.len()];
    for p in predictions {
        let slot = by_id.get_mut(p.example_id).ok_or(EvalError::UnknownId {
            id: p.example_id,
            len: reference.len(),
        })?;
        if slot.replace(&p.prediction).is_some() {
            return Err(EvalError::DuplicateId(p.example_id));
        }
    }
    // equal lengths and no duplicates leave no gaps
    let outcomes: Vec<(bool, bool)> = reference
        .par_iter()
        .zip(by_id.par_iter())
        .map(|(r, p)| {
            let p = p.expect("every id is covered");
            (p == r.target, p == r.input)
        })
        .collect();

    let mut total = SplitScore::default();
    let mut hasop = SplitScore::default();
    let mut noop = SplitScore::default();
    let mut copied = 0usize;
    let mut per_instruction: BTreeMap<String, SplitScore> = BTreeMap::new();
    let mut per_occurrence: BTreeMap<usize, SplitScore> = BTreeMap::new();
    for (r, &(correct, is_copy)) in reference.iter().zip(&outcomes) {
        total.add(correct);
        if r.is_noop {
            noop.add(correct);
        } else {
            hasop.add(correct);
            copied += usize::from(is_copy);
        }
        per_instruction.entry(r.instruction.clone()).or_default().add(correct);
        if let Some(occ) = r.occurrences {
            per_occurrence.entry(occ).or_default().add(correct);
        }
    }
    for s in [&mut total, &mut hasop, &mut noop]
        .into_iter()
        .chain(per_instruction.values_mut())
        .chain(per_occurrence.values_mut())
    {
        s.finish();
    }
    Ok(EvalReport {
        total_accuracy: total.accuracy.unwrap_or(0.0),
        hasop_accuracy: hasop.accuracy,
        noop_accuracy: noop.accuracy,
        always_noop_rate: (hasop.count > 0).then(|| copied as f64 / hasop.count as f64),
        total,
        hasop,
        noop,
        per_instruction,
        per_occurrence,
        num_instructions: None,
        shape: None,
    })
}

pub fn score_files(reference: impl AsRef<Path>, predictions: impl AsRef<Path>) -> Result<EvalReport, EvalError> {
    score(&load_reference(reference)?, &load_predictions(predictions)?)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{:.4}", v))
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "examples        {}", self.total.count);
        let _ = writeln!(s, "total accuracy  {:.4} ({}/{})", self.total_accuracy, self.total.correct, self.total.count);
        let _ = writeln!(s, "has-op accuracy {} ({}/{})", pct(self.hasop_accuracy), self.hasop.correct, self.hasop.count);
        let _ = writeln!(s, "no-op accuracy  {} ({}/{})", pct(self.noop_accuracy), self.noop.correct, self.noop.count);
        let _ = writeln!(s, "copy rate       {}", pct(self.always_noop_rate));
        let _ = writeln!(s, "instructions    {}", self.per_instruction.len());
        if !self.per_occurrence.is_empty() {
            let _ = writeln!(s, "by occurrence count:");
            for (occ, score) in &self.per_occurrence {
                let _ = writeln!(s, "  {occ:>4}  {} ({}/{})", pct(score.accuracy), score.correct, score.count);
            }
        }
        s
    }
}
