//! String-rewriting benchmark toolkit.
//!
//! * [`markov`] interprets Markov algorithms (ordered rewrite rules with
//!   stop rules) and exposes single-rule application.
//! * [`taskgen`] generates single-rule rewrite datasets along the
//!   instruction-count, no-op, occurrence-count, pattern-class and
//!   power-law axes.
//! * [`cipher`] builds the replace-then-Caesar-encrypt task from sentence
//!   corpora.
//! * [`eval`] scores prediction files by exact match and assembles curves.
//! * [`config`] reads the strict run-configuration files used by the CLI.

pub mod cipher;
pub mod config;
pub mod eval;
pub mod markov;
pub mod output;
pub mod rng;
pub mod taskgen;
