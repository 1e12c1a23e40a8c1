use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{caesar, CipherError, Dictionary, SentencePool};
use crate::output::{Checksum, OutputSet};
use crate::rng::substream;
use crate::taskgen::{allocate_counts, is_noop_slot, noop_count, PowerLawSpec, TEST_FILE, TRAIN_FILE};

pub const CIPHER_MANIFEST_FILE: &str = "manifest.json";

const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CipherInstruction {
    pub find_word: String,
    pub replace_word: String,
    pub key: u32,
}

/// One emitted record. `sentence` and `target` are space-joined tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherRecord {
    pub sentence: String,
    pub find: String,
    pub replace: String,
    pub key: u32,
    pub target: String,
    pub is_noop: bool,
}

impl CipherRecord {
    /// Applies the instruction to a tokenized sentence: the first token equal
    /// to `find_word` becomes `caesar(replace_word, key)`.
    pub fn build(tokens: &[String], instruction: &CipherInstruction) -> Result<Self, CipherError> {
        let sentence = tokens.join(" ");
        let (target, is_noop) = match tokens.iter().position(|t| *t == instruction.find_word) {
            None => (sentence.clone(), true),
            Some(at) => {
                let encrypted = caesar(&instruction.replace_word, instruction.key)?;
                let mut out = tokens.to_vec();
                out[at] = encrypted;
                (out.join(" "), false)
            }
        };
        Ok(Self {
            sentence,
            find: instruction.find_word.clone(),
            replace: instruction.replace_word.clone(),
            key: instruction.key,
            target,
            is_noop,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CipherConfig {
    pub seed: u64,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_noop_fraction")]
    pub noop_fraction: f64,
    /// Restrict training to this many distinct instructions. Unset, every
    /// train example samples its own instruction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_instructions: Option<usize>,
    /// Distribute training examples over the instruction pool by this
    /// power law instead of uniformly. Needs `train_instructions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_law_shape: Option<f64>,
}

fn default_train_size() -> usize {
    40_000
}
fn default_test_size() -> usize {
    5_000
}
fn default_noop_fraction() -> f64 {
    0.4
}

impl CipherConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            train_size: default_train_size(),
            test_size: default_test_size(),
            noop_fraction: default_noop_fraction(),
            train_instructions: None,
            power_law_shape: None,
        }
    }
}

/// A dictionary with the sentences its examples are drawn from.
#[derive(Debug, Clone)]
pub struct CipherSource {
    pub dictionary: Dictionary,
    pub pool: SentencePool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionarySummary {
    pub name: String,
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CipherManifest {
    pub config: CipherConfig,
    pub train_dictionary: DictionarySummary,
    pub test_dictionary: DictionarySummary,
    pub train_file: String,
    pub test_file: String,
    pub train_examples: usize,
    pub test_examples: usize,
    pub train_noops: usize,
    pub test_noops: usize,
    /// Has-op find words used in the test split, with counts.
    pub test_find_words: BTreeMap<String, usize>,
    /// The fixed training instructions, in rank order, with example counts.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_pool: Vec<PoolEntry>,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    #[serde(flatten)]
    pub instruction: CipherInstruction,
    pub hasop_examples: usize,
    pub noop_examples: usize,
}

/// A fixed instruction pool with a per-slot assignment.
struct InstructionPool {
    instructions: Vec<CipherInstruction>,
    /// Index into `Prepared::words` of each instruction's find word.
    find_index: Vec<usize>,
    /// Instruction per has-op ordinal, then per no-op ordinal.
    hasop: Vec<u32>,
    noop: Vec<u32>,
    hasop_counts: Vec<usize>,
    noop_counts: Vec<usize>,
}

/// Shuffled slot assignment realizing `counts`.
fn assignment(counts: &[usize], seed: u64, stream: u64) -> Vec<u32> {
    let mut out: Vec<u32> = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat(i as u32).take(c))
        .collect();
    out.shuffle(&mut substream(seed, "cipher-assign", stream, 0));
    out
}

/// Lookup tables over a source, precomputed once per split.
struct Prepared<'a> {
    source: &'a CipherSource,
    words: Vec<&'a String>,
    /// Sentence indices containing each of `words`.
    sentences_with: Vec<Vec<usize>>,
    /// Has-op find word per has-op ordinal when words must be spread
    /// evenly (the test split); otherwise sampled per example.
    rotation: Option<Vec<usize>>,
    pool: Option<InstructionPool>,
}

impl<'a> Prepared<'a> {
    fn new(source: &'a CipherSource, rotate: bool, seed: u64) -> Result<Self, CipherError> {
        if source.dictionary.len() < 2 {
            return Err(CipherError::DictionaryTooSmall(source.dictionary.name.clone()));
        }
        let mut index: BTreeMap<&String, Vec<usize>> = BTreeMap::new();
        for (i, s) in source.pool.sentences.iter().enumerate() {
            for w in &s.contained {
                index.entry(w).or_default().push(i);
            }
        }
        let (words, sentences_with): (Vec<_>, Vec<_>) = index.into_iter().unzip();
        let rotation = rotate.then(|| {
            let mut order: Vec<usize> = (0..words.len()).collect();
            order.shuffle(&mut substream(seed, "cipher-test-words", 0, 0));
            order
        });
        Ok(Self {
            source,
            words,
            sentences_with,
            rotation,
            pool: None,
        })
    }

    /// Samples `n` distinct has-op instructions and splits `hasop` and
    /// `noops` slots among them following `law` (uniform when `None`).
    fn fix_pool(&mut self, n: usize, law: Option<PowerLawSpec>, hasop: usize, noops: usize, seed: u64) -> Result<(), CipherError> {
        let dict_len = self.source.dictionary.len();
        let capacity = self.words.len() as u128 * (dict_len as u128 - 1) * 25;
        if (n as u128) > capacity {
            return Err(CipherError::PoolExhausted(format!(
                "cannot draw {n} distinct instructions; at most {capacity} exist"
            )));
        }
        let mut rng = substream(seed, "cipher-instructions", 0, 0);
        let mut seen = HashSet::new();
        let mut instructions = Vec::with_capacity(n);
        let mut find_index = Vec::with_capacity(n);
        let max_attempts = n.saturating_mul(200).max(10_000);
        let mut attempts = 0;
        while instructions.len() < n {
            if attempts == max_attempts {
                return Err(CipherError::PoolExhausted(format!(
                    "found {} distinct instructions after {max_attempts} draws",
                    instructions.len()
                )));
            }
            attempts += 1;
            let w = rng.gen_range(0..self.words.len());
            let find = self.words[w];
            let (replace_word, key) = self.sample_replacement(find, &mut rng)?;
            let instruction = CipherInstruction {
                find_word: find.clone(),
                replace_word,
                key,
            };
            if seen.insert(instruction.clone()) {
                instructions.push(instruction);
                find_index.push(w);
            }
        }
        let split = |total: usize, key: &str| -> Result<Vec<usize>, CipherError> {
            if total == 0 {
                return Ok(vec![0; n]);
            }
            if total < n {
                return Err(CipherError::Config {
                    key: "train_instructions".into(),
                    message: format!("{n} instructions need at least {n} {key} train examples, found {total}"),
                });
            }
            allocate_counts(total, n, law).map_err(|e| CipherError::Config {
                key: "train_instructions".into(),
                message: e.to_string(),
            })
        };
        let hasop_counts = split(hasop, "has-op")?;
        let noop_counts = split(noops, "no-op")?;
        self.pool = Some(InstructionPool {
            hasop: assignment(&hasop_counts, seed, 0),
            noop: assignment(&noop_counts, seed, 1),
            instructions,
            find_index,
            hasop_counts,
            noop_counts,
        });
        Ok(())
    }

    fn sample_replacement<R: Rng>(&self, find: &str, rng: &mut R) -> Result<(String, u32), CipherError> {
        let dict: Vec<&String> = self.source.dictionary.words.iter().collect();
        for _ in 0..1_000 {
            let replace = dict[rng.gen_range(0..dict.len())];
            if replace == find {
                continue;
            }
            let key = rng.gen_range(1..=25);
            // an encryption that reproduces the find word would be a silent no-op
            if caesar(replace, key)? != find {
                return Ok((replace.clone(), key));
            }
        }
        Err(CipherError::PoolExhausted(format!(
            "no replacement for `{find}` in dictionary `{}`",
            self.source.dictionary.name
        )))
    }

    fn has_op<R: Rng>(&self, ordinal: usize, rng: &mut R) -> Result<CipherRecord, CipherError> {
        if self.words.is_empty() {
            return Err(CipherError::PoolExhausted(format!(
                "no sentence contains a word of dictionary `{}`",
                self.source.dictionary.name
            )));
        }
        if let Some(pool) = &self.pool {
            let i = pool.hasop[ordinal] as usize;
            let candidates = &self.sentences_with[pool.find_index[i]];
            let sentence = &self.source.pool.sentences[candidates[rng.gen_range(0..candidates.len())]];
            return CipherRecord::build(&sentence.tokens, &pool.instructions[i]);
        }
        let w = match &self.rotation {
            Some(order) => order[ordinal % order.len()],
            None => rng.gen_range(0..self.words.len()),
        };
        let candidates = &self.sentences_with[w];
        let sentence = &self.source.pool.sentences[candidates[rng.gen_range(0..candidates.len())]];
        let find = self.words[w];
        let (replace_word, key) = self.sample_replacement(find, rng)?;
        let instruction = CipherInstruction {
            find_word: find.clone(),
            replace_word,
            key,
        };
        CipherRecord::build(&sentence.tokens, &instruction)
    }

    fn no_op<R: Rng>(&self, ordinal: usize, rng: &mut R) -> Result<CipherRecord, CipherError> {
        let dict: Vec<&String> = self.source.dictionary.words.iter().collect();
        let sentences = &self.source.pool.sentences;
        if let Some(pool) = &self.pool {
            let instruction = &pool.instructions[pool.noop[ordinal] as usize];
            for _ in 0..1_000 {
                let sentence = &sentences[rng.gen_range(0..sentences.len())];
                if !sentence.contained.contains(&instruction.find_word) {
                    return CipherRecord::build(&sentence.tokens, instruction);
                }
            }
            return Err(CipherError::PoolExhausted(format!(
                "no sentence without `{}` found for a no-op",
                instruction.find_word
            )));
        }
        for _ in 0..1_000 {
            let sentence = &sentences[rng.gen_range(0..sentences.len())];
            if sentence.contained.len() == dict.len() {
                continue;
            }
            let find = loop {
                let w = dict[rng.gen_range(0..dict.len())];
                if !sentence.contained.contains(w) {
                    break w;
                }
            };
            let (replace_word, key) = self.sample_replacement(find, rng)?;
            let instruction = CipherInstruction {
                find_word: find.clone(),
                replace_word,
                key,
            };
            return CipherRecord::build(&sentence.tokens, &instruction);
        }
        Err(CipherError::PoolExhausted(
            "every sentence contains every dictionary word".into(),
        ))
    }
}

fn emit_split(
    prepared: &Prepared<'_>,
    seed: u64,
    split: &'static str,
    size: usize,
    noops: usize,
    out: &mut impl Write,
    sum: &mut Checksum,
    find_counts: &mut BTreeMap<String, usize>,
) -> Result<(), CipherError> {
    let chunks: Vec<usize> = (0..size.div_ceil(CHUNK)).collect();
    for window in chunks.chunks(64) {
        let parts: Vec<Vec<CipherRecord>> = window
            .par_iter()
            .map(|&chunk| {
                let mut rng = substream(seed, split, chunk as u64, 0);
                let start = chunk * CHUNK;
                (start..(start + CHUNK).min(size))
                    .map(|j| {
                        // no-op slots strictly before j
                        let noops_before = j * noops / size;
                        if is_noop_slot(j, size, noops) {
                            prepared.no_op(noops_before, &mut rng)
                        } else {
                            prepared.has_op(j - noops_before, &mut rng)
                        }
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        for record in parts.iter().flatten() {
            if !record.is_noop {
                *find_counts.entry(record.find.clone()).or_default() += 1;
            }
            let mut line = serde_json::to_vec(record)?;
            line.push(b'\n');
            sum.update(&line);
            out.write_all(&line)?;
        }
    }
    Ok(())
}

/// Emits train/test JSONL and a manifest into `out_dir`.
///
/// Test has-op examples cycle through the test words in a seeded shuffled
/// order, so every instance uses a distinct word while the dictionary
/// has enough coverage.
pub fn make_cipher_dataset(
    config: &CipherConfig,
    train: &CipherSource,
    test: &CipherSource,
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<CipherManifest, CipherError> {
    if !(0.0..=1.0).contains(&config.noop_fraction) {
        return Err(CipherError::Config {
            key: "noop_fraction".into(),
            message: "must lie in [0, 1]".into(),
        });
    }
    for (key, size) in [("train_size", config.train_size), ("test_size", config.test_size)] {
        if size == 0 {
            return Err(CipherError::Config {
                key: key.into(),
                message: "must be at least 1".into(),
            });
        }
    }
    let law = match (config.power_law_shape, config.train_instructions) {
        (None, _) => None,
        (Some(_), None) => {
            return Err(CipherError::Config {
                key: "power_law_shape".into(),
                message: "needs train_instructions".into(),
            })
        }
        (Some(shape), Some(_)) => Some(PowerLawSpec::new(shape).map_err(|e| CipherError::Config {
            key: "power_law_shape".into(),
            message: e.to_string(),
        })?),
    };
    if config.train_instructions == Some(0) {
        return Err(CipherError::Config {
            key: "train_instructions".into(),
            message: "must be at least 1".into(),
        });
    }
    train.dictionary.check_disjoint(&test.dictionary)?;
    let train_noops = noop_count(config.train_size, config.noop_fraction);
    let test_noops = noop_count(config.test_size, config.noop_fraction);
    let mut train_prep = Prepared::new(train, false, config.seed)?;
    if let Some(n) = config.train_instructions {
        train_prep.fix_pool(n, law, config.train_size - train_noops, train_noops, config.seed)?;
    }
    let test_prep = Prepared::new(test, true, config.seed)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CipherError::Io(std::io::Error::other(e)))?;
    let mut output = OutputSet::new(out_dir)?;
    let mut sum = Checksum::new();
    let mut train_finds = BTreeMap::new();
    let mut test_finds = BTreeMap::new();
    {
        let mut f = output.create(TRAIN_FILE)?;
        pool.install(|| {
            emit_split(&train_prep, config.seed, "cipher-train", config.train_size, train_noops, &mut f, &mut sum, &mut train_finds)
        })?;
        f.flush()?;
    }
    {
        let mut f = output.create(TEST_FILE)?;
        pool.install(|| {
            emit_split(&test_prep, config.seed, "cipher-test", config.test_size, test_noops, &mut f, &mut sum, &mut test_finds)
        })?;
        f.flush()?;
    }
    let summary = |d: &Dictionary| DictionarySummary {
        name: d.name.clone(),
        words: d.len(),
    };
    let manifest = CipherManifest {
        config: config.clone(),
        train_dictionary: summary(&train.dictionary),
        test_dictionary: summary(&test.dictionary),
        train_file: TRAIN_FILE.into(),
        test_file: TEST_FILE.into(),
        train_examples: config.train_size,
        test_examples: config.test_size,
        train_noops,
        test_noops,
        test_find_words: test_finds,
        train_pool: train_prep
            .pool
            .as_ref()
            .map(|p| {
                p.instructions
                    .iter()
                    .zip(p.hasop_counts.iter().zip(&p.noop_counts))
                    .map(|(i, (&h, &n))| PoolEntry {
                        instruction: i.clone(),
                        hasop_examples: h,
                        noop_examples: n,
                    })
                    .collect()
            })
            .unwrap_or_default(),
        checksum: sum.hex(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    output.write_file(CIPHER_MANIFEST_FILE, &json)?;
    output.commit()?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::tokenize;

    #[test]
    fn replace_then_encrypt() {
        let tokens = tokenize("we saw the ship");
        let ins = CipherInstruction {
            find_word: "ship".into(),
            replace_word: "boat".into(),
            key: 1,
        };
        let r = CipherRecord::build(&tokens, &ins).unwrap();
        assert_eq!(r.target, "we saw the cpbu");
        assert!(!r.is_noop);
    }

    #[test]
    fn only_first_occurrence_replaced() {
        let tokens = tokenize("ship to ship");
        let ins = CipherInstruction {
            find_word: "ship".into(),
            replace_word: "boat".into(),
            key: 2,
        };
        assert_eq!(CipherRecord::build(&tokens, &ins).unwrap().target, "dqcv to ship");
    }

    #[test]
    fn absent_word_copies() {
        let tokens = tokenize("we saw the ship");
        let ins = CipherInstruction {
            find_word: "car".into(),
            replace_word: "boat".into(),
            key: 4,
        };
        let r = CipherRecord::build(&tokens, &ins).unwrap();
        assert!(r.is_noop);
        assert_eq!(r.target, r.sentence);
    }

    fn source(words: &[&str], seed: u64) -> CipherSource {
        let dictionary = Dictionary::new("d", words.iter().copied()).unwrap();
        let pool = crate::cipher::template_pool(&dictionary, 5, 20, seed).unwrap();
        CipherSource { dictionary, pool }
    }

    #[test]
    fn fixed_pool_follows_allocation() {
        let train = source(&["ship", "boat", "car", "plane", "train", "truck"], 1);
        let test = source(&["horse", "camel"], 2);
        let mut config = CipherConfig::new(3);
        config.train_size = 1000;
        config.test_size = 50;
        config.train_instructions = Some(20);
        config.power_law_shape = Some(1.0);
        let dir = tempfile::tempdir().unwrap();
        let m = make_cipher_dataset(&config, &train, &test, dir.path(), 2).unwrap();
        assert_eq!(m.train_pool.len(), 20);
        let hasop: Vec<usize> = m.train_pool.iter().map(|e| e.hasop_examples).collect();
        assert_eq!(hasop, allocate_counts(600, 20, Some(PowerLawSpec::new(1.0).unwrap())).unwrap());
        assert_eq!(m.train_pool.iter().map(|e| e.noop_examples).sum::<usize>(), 400);

        let text = std::fs::read_to_string(dir.path().join(TRAIN_FILE)).unwrap();
        let mut seen: BTreeMap<(String, String, u32, bool), usize> = BTreeMap::new();
        for line in text.lines() {
            let r: CipherRecord = serde_json::from_str(line).unwrap();
            *seen.entry((r.find, r.replace, r.key, r.is_noop)).or_default() += 1;
        }
        for e in &m.train_pool {
            let i = &e.instruction;
            let key = |noop| (i.find_word.clone(), i.replace_word.clone(), i.key, noop);
            assert_eq!(seen.get(&key(false)).copied().unwrap_or(0), e.hasop_examples);
            assert_eq!(seen.get(&key(true)).copied().unwrap_or(0), e.noop_examples);
        }
        assert_eq!(seen.values().sum::<usize>(), 1000);
    }

    #[test]
    fn shape_needs_pool() {
        let train = source(&["ship", "boat"], 1);
        let test = source(&["horse", "camel"], 2);
        let mut config = CipherConfig::new(3);
        config.power_law_shape = Some(1.0);
        let dir = tempfile::tempdir().unwrap();
        let err = make_cipher_dataset(&config, &train, &test, dir.path(), 1).unwrap_err();
        assert!(err.to_string().starts_with("power_law_shape:"), "{err}");
    }

    #[test]
    fn json_field_order() {
        let r = CipherRecord::build(
            &tokenize("a ship"),
            &CipherInstruction {
                find_word: "ship".into(),
                replace_word: "boat".into(),
                key: 1,
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"sentence":"a ship","find":"ship","replace":"boat","key":1,"target":"a cpbu","is_noop":false}"#
        );
    }
}
