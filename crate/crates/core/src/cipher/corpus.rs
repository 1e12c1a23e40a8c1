use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::Rng;

use super::CipherError;
use crate::rng::substream;

/// A named set of lowercase words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    pub name: String,
    pub words: BTreeSet<String>,
}

impl Dictionary {
    pub fn new<I, S>(name: impl Into<String>, words: I) -> Result<Self, CipherError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        let mut set = BTreeSet::new();
        for (i, w) in words.into_iter().enumerate() {
            let w = w.into();
            if w.is_empty() || !w.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(CipherError::InvalidWord {
                    source_name: name,
                    line: i + 1,
                    word: w,
                });
            }
            set.insert(w);
        }
        if set.is_empty() {
            return Err(CipherError::EmptyDictionary(name));
        }
        Ok(Self { name, words: set })
    }

    /// Reads one word per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CipherError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let mut words = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let w = line.trim();
            if w.is_empty() || w.starts_with('#') {
                continue;
            }
            if !w.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(CipherError::InvalidWord {
                    source_name: name,
                    line: i + 1,
                    word: w.to_string(),
                });
            }
            words.insert(w.to_string());
        }
        if words.is_empty() {
            return Err(CipherError::EmptyDictionary(name));
        }
        Ok(Self { name, words })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn check_disjoint(&self, other: &Dictionary) -> Result<(), CipherError> {
        let shared: Vec<&String> = self.words.intersection(&other.words).collect();
        match shared.first() {
            None => Ok(()),
            Some(w) => Err(CipherError::DictionaryOverlap {
                count: shared.len(),
                example: w.to_string(),
            }),
        }
    }
}

/// Lowercases and splits on anything that is not a letter or digit.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PooledSentence {
    pub tokens: Vec<String>,
    /// Dictionary words occurring among `tokens`.
    pub contained: BTreeSet<String>,
}

impl PooledSentence {
    pub fn new(tokens: Vec<String>, dictionary: &Dictionary) -> Self {
        let contained = tokens
            .iter()
            .filter(|t| dictionary.contains(t))
            .cloned()
            .collect();
        Self { tokens, contained }
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePool {
    pub sentences: Vec<PooledSentence>,
}

/// Builds a pool from corpus bytes, one sentence per line. Lines without
/// any token are skipped.
pub fn parse_corpus(bytes: &[u8], dictionary: &Dictionary) -> Result<SentencePool, CipherError> {
    let mut sentences = Vec::new();
    for (i, line) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = std::str::from_utf8(line).map_err(|_| CipherError::Encoding { line: i + 1 })?;
        let tokens = tokenize(line);
        if !tokens.is_empty() {
            sentences.push(PooledSentence::new(tokens, dictionary));
        }
    }
    if sentences.is_empty() {
        return Err(CipherError::EmptyCorpus);
    }
    Ok(SentencePool { sentences })
}

pub fn ingest_corpus(path: impl AsRef<Path>, dictionary: &Dictionary) -> Result<SentencePool, CipherError> {
    parse_corpus(&fs::read(path)?, dictionary)
}

const ADJECTIVES: &[&str] = &[
    "quiet", "bright", "old", "small", "heavy", "distant", "curious", "gentle", "broken", "narrow",
    "silver", "early", "tired", "patient", "hidden", "warm",
];
const VERBS: &[&str] = &[
    "watched", "passed", "followed", "found", "carried", "noticed", "left", "reached", "painted",
    "described", "visited", "remembered",
];
const NOUNS: &[&str] = &[
    "river", "garden", "window", "village", "morning", "letter", "mountain", "kitchen", "harbor",
    "forest", "station", "market", "bridge", "meadow",
];

fn fillers(list: &[&'static str], dictionary: &Dictionary) -> Result<Vec<&'static str>, CipherError> {
    let kept: Vec<&str> = list.iter().copied().filter(|w| !dictionary.contains(w)).collect();
    if kept.is_empty() {
        return Err(CipherError::PoolExhausted(
            "dictionary covers every template filler word".into(),
        ));
    }
    Ok(kept)
}

/// Deterministic template sentences for corpora-free runs.
///
/// Emits `per_word` sentences of the form
/// `the <adj> <word> <verb> the <adj> <noun>` for every dictionary word,
/// each containing that word exactly once, plus `plain` sentences that
/// contain no dictionary word.
pub fn template_pool(
    dictionary: &Dictionary,
    per_word: usize,
    plain: usize,
    seed: u64,
) -> Result<SentencePool, CipherError> {
    let adjectives = fillers(ADJECTIVES, dictionary)?;
    let verbs = fillers(VERBS, dictionary)?;
    let nouns = fillers(NOUNS, dictionary)?;
    let mut rng = substream(seed, "templates", 0, 0);
    let mut pick = |list: &[&'static str]| list[rng.gen_range(0..list.len())];
    let mut sentences = Vec::new();
    for word in &dictionary.words {
        for _ in 0..per_word {
            let tokens = vec![
                "the".to_string(),
                pick(&adjectives).to_string(),
                word.clone(),
                pick(&verbs).to_string(),
                "the".to_string(),
                pick(&adjectives).to_string(),
                pick(&nouns).to_string(),
            ];
            sentences.push(PooledSentence::new(tokens, dictionary));
        }
    }
    for _ in 0..plain {
        let tokens = vec![
            "the".to_string(),
            pick(&adjectives).to_string(),
            pick(&nouns).to_string(),
            pick(&verbs).to_string(),
            "the".to_string(),
            pick(&nouns).to_string(),
        ];
        sentences.push(PooledSentence::new(tokens, dictionary));
    }
    if sentences.is_empty() {
        return Err(CipherError::EmptyCorpus);
    }
    Ok(SentencePool { sentences })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict(words: &[&str]) -> Dictionary {
        Dictionary::new("d", words.iter().copied()).unwrap()
    }

    #[test]
    fn ingest_marks_contained_words() {
        let d = dict(&["cat"]);
        let pool = parse_corpus(b"The cat sat.\nno animals here\n\n", &d).unwrap();
        assert_eq!(pool.sentences.len(), 2);
        assert_eq!(pool.sentences[0].tokens, ["the", "cat", "sat"]);
        assert!(pool.sentences[0].contained.contains("cat"));
        assert!(pool.sentences[1].contained.is_empty());
    }

    #[test]
    fn ingest_errors() {
        let d = dict(&["cat"]);
        assert!(matches!(parse_corpus(b"\n  \n", &d), Err(CipherError::EmptyCorpus)));
        assert!(matches!(
            parse_corpus(b"fine\n\xff\xfe\n", &d),
            Err(CipherError::Encoding { line: 2 })
        ));
    }

    #[test]
    fn template_contains_word_once() {
        let d = dict(&["ship", "river"]);
        let pool = template_pool(&d, 3, 2, 1).unwrap();
        // words are visited in sorted order: river, then ship
        for s in &pool.sentences[3..6] {
            assert_eq!(s.tokens.iter().filter(|t| *t == "ship").count(), 1);
            // `river` is a dictionary word so it must not appear as filler
            assert!(!s.tokens.contains(&"river".to_string()));
        }
        assert!(pool.sentences[6..].iter().all(|s| s.contained.is_empty()));
    }

    #[test]
    fn dictionary_validation() {
        assert!(Dictionary::new("d", ["Ship"]).is_err());
        assert!(Dictionary::new("d", Vec::<String>::new()).is_err());
        let a = dict(&["ship", "boat"]);
        let b = dict(&["boat", "car"]);
        assert!(matches!(
            a.check_disjoint(&b),
            Err(CipherError::DictionaryOverlap { count: 1, .. })
        ));
    }
}
