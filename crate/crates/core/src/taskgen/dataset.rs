use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    allocate_counts, gen_pattern, is_noop_slot, make_example, noop_count, pattern_capacity,
    Instruction, PowerLawSpec, SemanticClass, TaskGenError,
};
use crate::output::{Checksum, OutputSet};
use crate::rng::substream;

pub const TRAIN_FILE: &str = "train.jsonl";
pub const TEST_FILE: &str = "test.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Examples generated from one RNG substream. Fixed so that output does
/// not depend on the worker count.
const CHUNK: usize = 1024;
/// Work units generated in parallel before being flushed to disk.
const WINDOW: usize = 64;

fn default_input_length() -> usize {
    50
}
fn default_pattern_length() -> usize {
    20
}
fn default_occurrences() -> Vec<usize> {
    vec![1]
}
fn default_holdout() -> usize {
    1_000
}
fn default_test_examples() -> usize {
    100_000
}
fn default_alphabet() -> String {
    ('a'..='z').collect()
}

/// Every knob of a rewrite dataset. Field names double as the keys of
/// the flat configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub seed: u64,
    pub num_instructions: usize,
    /// `S`; exactly one of this and `total_examples` must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples_per_instruction: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_examples: Option<usize>,
    #[serde(default = "default_input_length")]
    pub input_length: usize,
    #[serde(default = "default_pattern_length")]
    pub pattern_length: usize,
    /// Defaults to `pattern_length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement_length: Option<usize>,
    #[serde(default)]
    pub noop_fraction: f64,
    /// Occurrence counts drawn uniformly for has-op examples.
    #[serde(default = "default_occurrences")]
    pub occurrence_set: Vec<usize>,
    #[serde(default)]
    pub semantic_class: SemanticClass,
    /// Apply the pattern class to replacements as well.
    #[serde(default)]
    pub constrain_replacement: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_law_shape: Option<f64>,
    #[serde(default = "default_holdout")]
    pub holdout_instructions: usize,
    #[serde(default = "default_test_examples")]
    pub test_examples: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
}

impl DatasetConfig {
    /// `num_instructions × examples_per_instruction` with all other knobs at
    /// their defaults.
    pub fn new(seed: u64, num_instructions: usize, examples_per_instruction: usize) -> Self {
        Self {
            seed,
            num_instructions,
            examples_per_instruction: Some(examples_per_instruction),
            total_examples: None,
            input_length: default_input_length(),
            pattern_length: default_pattern_length(),
            replacement_length: None,
            noop_fraction: 0.0,
            occurrence_set: default_occurrences(),
            semantic_class: SemanticClass::Unconstrained,
            constrain_replacement: false,
            power_law_shape: None,
            holdout_instructions: default_holdout(),
            test_examples: default_test_examples(),
            alphabet: default_alphabet(),
        }
    }

    pub fn replacement_length(&self) -> usize {
        self.replacement_length.unwrap_or(self.pattern_length)
    }

    pub fn power_law(&self) -> Option<PowerLawSpec> {
        self.power_law_shape.and_then(|s| PowerLawSpec::new(s).ok())
    }

    pub fn alphabet_symbols(&self) -> Vec<char> {
        self.alphabet.chars().collect()
    }

    /// Occurrence counts, sorted and deduplicated.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut v = self.occurrence_set.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn train_total(&self) -> usize {
        match (self.examples_per_instruction, self.total_examples) {
            (Some(s), _) => s.saturating_mul(self.num_instructions),
            (None, Some(t)) => t,
            (None, None) => 0,
        }
    }

    pub fn validate(&self) -> Result<(), TaskGenError> {
        self.validate_for(&[self.semantic_class], self.semantic_class)
    }

    fn validate_for(
        &self,
        train_classes: &[SemanticClass],
        test_class: SemanticClass,
    ) -> Result<(), TaskGenError> {
        type E = TaskGenError;
        if self.num_instructions == 0 {
            return Err(E::config("num_instructions", "must be at least 1"));
        }
        match (self.examples_per_instruction, self.total_examples) {
            (Some(0), _) => return Err(E::config("examples_per_instruction", "must be at least 1")),
            (Some(_), Some(_)) | (None, None) => {
                return Err(E::config(
                    "examples_per_instruction",
                    "set exactly one of examples_per_instruction and total_examples",
                ))
            }
            (None, Some(t)) if t < self.num_instructions => {
                return Err(E::config(
                    "total_examples",
                    format!("must be at least num_instructions ({})", self.num_instructions),
                ))
            }
            _ => {}
        }
        if self.pattern_length == 0 {
            return Err(E::config("pattern_length", "must be at least 1"));
        }
        if self.pattern_length > self.input_length {
            return Err(E::config("pattern_length", "must not exceed input_length"));
        }
        if !(0.0..=1.0).contains(&self.noop_fraction) {
            return Err(E::config("noop_fraction", "must lie in [0, 1]"));
        }
        let occ = self.occurrences();
        if occ.is_empty() || occ[0] == 0 {
            return Err(E::config("occurrence_set", "must be a non-empty set of positive counts"));
        }
        let max = *occ.last().unwrap();
        if max.saturating_mul(self.pattern_length) > self.input_length {
            return Err(E::config(
                "occurrence_set",
                format!(
                    "{max} occurrences of a length-{} pattern exceed input_length {}",
                    self.pattern_length, self.input_length
                ),
            ));
        }
        if let Some(shape) = self.power_law_shape {
            PowerLawSpec::new(shape).map_err(|e| E::config("power_law_shape", e.to_string()))?;
        }
        if self.holdout_instructions == 0 {
            return Err(E::config("holdout_instructions", "must be at least 1"));
        }
        if self.test_examples < self.holdout_instructions {
            return Err(E::config(
                "test_examples",
                "must be at least holdout_instructions",
            ));
        }
        let symbols = self.alphabet_symbols();
        if symbols.is_empty() {
            return Err(E::config("alphabet", "must not be empty"));
        }
        if symbols.iter().collect::<HashSet<_>>().len() != symbols.len() {
            return Err(E::config("alphabet", "symbols must be distinct"));
        }
        for &class in train_classes.iter().chain([&test_class]) {
            class
                .check_length(self.pattern_length)
                .map_err(|e| E::config("semantic_class", e.to_string()))?;
            if self.constrain_replacement {
                class
                    .check_length(self.replacement_length())
                    .map_err(|e| E::config("replacement_length", e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// A train/test pair whose pools come from different pattern classes.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossClassConfig {
    /// Lengths, counts and seed. Its `semantic_class` is not used.
    pub base: DatasetConfig,
    /// Train instruction `i` is drawn from `train_classes[i % len]`.
    pub train_classes: Vec<SemanticClass>,
    pub test_class: SemanticClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub config: DatasetConfig,
    pub train_classes: Vec<SemanticClass>,
    pub test_class: SemanticClass,
    pub train_file: String,
    pub test_file: String,
    pub train_examples: usize,
    pub test_examples: usize,
    pub train_instructions: Vec<Instruction>,
    pub test_instructions: Vec<Instruction>,
    /// Train example count keyed by pattern.
    pub per_instruction_counts: BTreeMap<String, usize>,
    pub test_per_instruction_counts: BTreeMap<String, usize>,
    /// SHA-256 over the train file followed by the test file.
    pub checksum: String,
}

struct Pools {
    train: Vec<Instruction>,
    test: Vec<Instruction>,
}

fn sample_pool<R: Rng>(
    config: &DatasetConfig,
    classes: &[SemanticClass],
    count: usize,
    seen: &mut HashSet<String>,
    rng: &mut R,
) -> Result<Vec<Instruction>, TaskGenError> {
    let symbols = config.alphabet_symbols();
    let capacity = classes
        .iter()
        .map(|&c| pattern_capacity(c, config.pattern_length, symbols.len()))
        .fold(0u128, u128::saturating_add);
    let needed = (seen.len() + count) as u128;
    if capacity < needed {
        return Err(TaskGenError::AlphabetTooSmall {
            needed: seen.len() + count,
            available: capacity.to_string(),
        });
    }
    let max_attempts = count.saturating_mul(200).max(10_000);
    let mut pool = Vec::with_capacity(count);
    let mut attempts = 0;
    while pool.len() < count {
        if attempts == max_attempts {
            return Err(TaskGenError::AlphabetTooSmall {
                needed: seen.len() + count - pool.len(),
                available: format!("{} found after {max_attempts} draws", seen.len()),
            });
        }
        attempts += 1;
        let class = classes[pool.len() % classes.len()];
        let pattern = gen_pattern(class, config.pattern_length, &symbols, rng)?;
        if !seen.insert(pattern.clone()) {
            continue;
        }
        let replacement_class = if config.constrain_replacement {
            class
        } else {
            SemanticClass::Unconstrained
        };
        let replacement = match config.replacement_length() {
            0 => String::new(),
            n => gen_pattern(replacement_class, n, &symbols, rng)?,
        };
        pool.push(Instruction::new(pattern, replacement));
    }
    Ok(pool)
}

fn sample_pools(
    config: &DatasetConfig,
    train_classes: &[SemanticClass],
    test_class: SemanticClass,
) -> Result<Pools, TaskGenError> {
    let mut seen = HashSet::new();
    let mut rng = substream(config.seed, "instructions", 0, 0);
    let train = sample_pool(config, train_classes, config.num_instructions, &mut seen, &mut rng)?;
    let mut rng = substream(config.seed, "instructions", 1, 0);
    let test = sample_pool(config, &[test_class], config.holdout_instructions, &mut seen, &mut rng)?;
    Ok(Pools { train, test })
}

/// Chunk `chunk` of instruction `index` in one split.
struct Unit {
    index: usize,
    chunk: usize,
}

fn emit_split(
    config: &DatasetConfig,
    split: &'static str,
    instructions: &[Instruction],
    counts: &[usize],
    out: &mut impl Write,
    sum: &mut Checksum,
) -> Result<usize, TaskGenError> {
    let units: Vec<Unit> = counts
        .iter()
        .enumerate()
        .flat_map(|(index, &count)| (0..count.div_ceil(CHUNK)).map(move |chunk| Unit { index, chunk }))
        .collect();
    let symbols = config.alphabet_symbols();
    let occurrences = config.occurrences();
    let mut written = 0;
    for window in units.chunks(WINDOW) {
        let buffers: Vec<Vec<u8>> = window
            .par_iter()
            .map(|unit| -> Result<Vec<u8>, TaskGenError> {
                let instruction = &instructions[unit.index];
                let count = counts[unit.index];
                let noops = noop_count(count, config.noop_fraction);
                let mut rng = substream(config.seed, split, unit.index as u64, unit.chunk as u64);
                let start = unit.chunk * CHUNK;
                let end = (start + CHUNK).min(count);
                let mut buf = Vec::with_capacity((end - start) * (3 * config.input_length + 96));
                for j in start..end {
                    let occ = if is_noop_slot(j, count, noops) {
                        0
                    } else {
                        occurrences[rng.gen_range(0..occurrences.len())]
                    };
                    let ex = make_example(instruction, config.input_length, occ, &symbols, &mut rng)?;
                    serde_json::to_writer(&mut buf, &ex)?;
                    buf.push(b'\n');
                }
                Ok(buf)
            })
            .collect::<Result<_, _>>()?;
        for buf in buffers {
            sum.update(&buf);
            out.write_all(&buf)?;
        }
        written += window
            .iter()
            .map(|u| (counts[u.index] - u.chunk * CHUNK).min(CHUNK))
            .sum::<usize>();
    }
    Ok(written)
}

fn generate(
    config: &DatasetConfig,
    train_classes: &[SemanticClass],
    test_class: SemanticClass,
    out_dir: &Path,
    jobs: usize,
) -> Result<DatasetManifest, TaskGenError> {
    if train_classes.is_empty() {
        return Err(TaskGenError::config("train_classes", "must name at least one class"));
    }
    config.validate_for(train_classes, test_class)?;
    let pools = sample_pools(config, train_classes, test_class)?;
    let train_counts = allocate_counts(config.train_total(), pools.train.len(), config.power_law())?;
    let test_counts = allocate_counts(config.test_examples, pools.test.len(), None)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| TaskGenError::Io(std::io::Error::other(e)))?;

    let mut output = OutputSet::new(out_dir)?;
    let mut sum = Checksum::new();
    let train_examples = {
        let mut f = output.create(TRAIN_FILE)?;
        let n = pool.install(|| emit_split(config, "train", &pools.train, &train_counts, &mut f, &mut sum))?;
        f.flush()?;
        n
    };
    let test_examples = {
        let mut f = output.create(TEST_FILE)?;
        let n = pool.install(|| emit_split(config, "test", &pools.test, &test_counts, &mut f, &mut sum))?;
        f.flush()?;
        n
    };

    let by_pattern = |pool: &[Instruction], counts: &[usize]| -> BTreeMap<String, usize> {
        pool.iter()
            .zip(counts)
            .map(|(i, &c)| (i.pattern.clone(), c))
            .collect()
    };
    let manifest = DatasetManifest {
        config: config.clone(),
        train_classes: train_classes.to_vec(),
        test_class,
        train_file: TRAIN_FILE.into(),
        test_file: TEST_FILE.into(),
        train_examples,
        test_examples,
        per_instruction_counts: by_pattern(&pools.train, &train_counts),
        test_per_instruction_counts: by_pattern(&pools.test, &test_counts),
        train_instructions: pools.train,
        test_instructions: pools.test,
        checksum: sum.hex(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    output.write_file(MANIFEST_FILE, &json)?;
    output.commit()?;
    Ok(manifest)
}

/// Generates `train.jsonl`, `test.jsonl` and `manifest.json` in `out_dir`
/// using `jobs` worker threads. Output bytes do not depend on `jobs`.
pub fn make_dataset(
    config: &DatasetConfig,
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<DatasetManifest, TaskGenError> {
    generate(config, &[config.semantic_class], config.semantic_class, out_dir.as_ref(), jobs)
}

/// Generates each pair into `out_dir/pair-<n>`.
pub fn cross_class_splits(
    configs: &[CrossClassConfig],
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<Vec<DatasetManifest>, TaskGenError> {
    configs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let dir = out_dir.as_ref().join(format!("pair-{n}"));
            generate(&c.base, &c.train_classes, c.test_class, &dir, jobs)
        })
        .collect()
}

/// Generates one cross-class pair directly into `out_dir`.
impl CrossClassConfig {
    pub fn generate(&self, out_dir: impl AsRef<Path>, jobs: usize) -> Result<DatasetManifest, TaskGenError> {
        generate(&self.base, &self.train_classes, self.test_class, out_dir.as_ref(), jobs)
    }
}
