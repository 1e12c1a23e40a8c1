//! Replace-then-encrypt task: swap a dictionary word in a sentence for
//! another word, Caesar-shifted by a key named in the instruction.

mod caesar;
pub mod check;
mod corpus;
mod dataset;

use std::io;

use thiserror::Error;

pub use caesar::{caesar, caesar_decrypt};
pub use corpus::{
    ingest_corpus, parse_corpus, template_pool, tokenize, Dictionary, PooledSentence, SentencePool,
};
pub use dataset::{
    make_cipher_dataset, CIPHER_MANIFEST_FILE, CipherConfig, CipherInstruction, CipherManifest, CipherRecord, CipherSource,
    PoolEntry,
};

#[derive(Debug, Error)]
pub enum CipherError {
    #[error("`{0}` is not a lowercase a-z word")]
    NotLowercase(String),
    #[error("{source_name}: line {line}: `{word}` is not a lowercase a-z word")]
    InvalidWord {
        source_name: String,
        line: usize,
        word: String,
    },
    #[error("dictionary `{0}` is empty")]
    EmptyDictionary(String),
    #[error("dictionary `{0}` needs at least two words to sample replacements")]
    DictionaryTooSmall(String),
    #[error("train and test dictionaries share {count} word(s), e.g. `{example}`")]
    DictionaryOverlap { count: usize, example: String },
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("corpus line {line} is not valid UTF-8")]
    Encoding { line: usize },
    #[error("sentence pool exhausted: {0}")]
    PoolExhausted(String),
    #[error("{key}: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed record: {0}")]
    Json(#[from] serde_json::Error),
}
