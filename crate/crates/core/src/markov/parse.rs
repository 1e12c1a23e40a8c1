//! Text format for Markov programs.
//!
//! ```text
//! # comment
//! alphabet: ab          # base symbols (default a-z)
//! aux: αβ               # auxiliary symbols; whitespace-separated names may be longer
//! vars: xy in ab        # schema variables and the symbols they range over
//! αx -> xαβx            # ordinary rule
//! α -> .                # stop rule with empty replacement
//! ab -> .ba             # stop rule that rewrites ab to ba, then halts
//! -> α                  # empty left-hand side
//! ```
//!
//! Declarations may appear anywhere; they are collected before rules are read.

use thiserror::Error;

use super::{Alphabet, MarkovError, MarkovProgram, RuleSchema, DEFAULT_STOP_MARKER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown symbol `{symbol}`")]
    UnknownSymbol { line: usize, symbol: String },
    #[error("line {line}: duplicate `{keyword}` declaration")]
    DuplicateDeclaration { line: usize, keyword: &'static str },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: MarkovError },
    #[error("program must contain at least one rule")]
    NoRules,
}

enum Decl<'a> {
    Alphabet(&'a str),
    Aux(&'a str),
    Vars(&'a str),
}

fn declaration(line: &str) -> Option<Decl<'_>> {
    let (key, rest) = line.split_once(':')?;
    match key.trim() {
        "alphabet" => Some(Decl::Alphabet(rest.trim())),
        "aux" => Some(Decl::Aux(rest.trim())),
        "vars" => Some(Decl::Vars(rest.trim())),
        _ => None,
    }
}

/// Splits a symbol list. Lists containing whitespace or commas are read as
/// names; otherwise every character is one symbol. `a-z` expands to a range.
fn symbol_list(text: &str) -> Vec<String> {
    let tokens: Vec<&str> = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    let mut out = Vec::new();
    if tokens.len() == 1 {
        let chars: Vec<char> = tokens[0].chars().collect();
        if chars.len() == 3 && chars[1] == '-' && chars[0] < chars[2] {
            out.extend((chars[0]..=chars[2]).map(String::from));
        } else {
            out.extend(chars.into_iter().map(String::from));
        }
    } else {
        for t in tokens {
            let chars: Vec<char> = t.chars().collect();
            if chars.len() == 3 && chars[1] == '-' && chars[0] < chars[2] {
                out.extend((chars[0]..=chars[2]).map(String::from));
            } else {
                out.push(t.to_string());
            }
        }
    }
    out
}

fn single_chars(line: usize, names: &[String]) -> Result<Vec<char>, ParseError> {
    names
        .iter()
        .map(|n| {
            let mut it = n.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(ParseError::Syntax {
                    line,
                    message: format!("symbol `{n}` must be a single character"),
                }),
            }
        })
        .collect()
}

/// Symbol table for tokenizing rule text: spellings sorted longest first.
pub(crate) struct Tokenizer {
    spellings: Vec<(String, char)>,
}

impl Tokenizer {
    pub(crate) fn new(alphabet: &Alphabet, variables: &[char]) -> Self {
        let mut spellings = alphabet.spellings();
        spellings.extend(variables.iter().map(|&v| (v.to_string(), v)));
        spellings.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Self { spellings }
    }

    /// Greedy longest-match tokenization; whitespace is ignored.
    pub(crate) fn tokenize(&self, text: &str) -> Result<String, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut rest = compact.as_str();
        let mut out = String::new();
        while !rest.is_empty() {
            match self.spellings.iter().find(|(s, _)| rest.starts_with(s.as_str())) {
                Some((s, c)) => {
                    out.push(*c);
                    rest = &rest[s.len()..];
                }
                None => return Err(rest.chars().next().unwrap().to_string()),
            }
        }
        Ok(out)
    }
}

/// Parses a program and expands its schemas in place.
pub fn parse_program(text: &str) -> Result<MarkovProgram, ParseError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut base: Option<Vec<char>> = None;
    let mut aux: Option<Vec<String>> = None;
    let mut aux_line = 0;
    // variable -> domain
    let mut vars: Vec<(char, Vec<char>)> = Vec::new();
    let mut rule_lines = Vec::new();

    for &(line, content) in &lines {
        match declaration(content) {
            Some(Decl::Alphabet(list)) => {
                if base.is_some() {
                    return Err(ParseError::DuplicateDeclaration {
                        line,
                        keyword: "alphabet",
                    });
                }
                base = Some(single_chars(line, &symbol_list(list))?);
            }
            Some(Decl::Aux(list)) => {
                if aux.is_some() {
                    return Err(ParseError::DuplicateDeclaration { line, keyword: "aux" });
                }
                aux = Some(symbol_list(list));
                aux_line = line;
            }
            Some(Decl::Vars(spec)) => {
                let (names, domain) = spec.split_once(" in ").ok_or_else(|| ParseError::Syntax {
                    line,
                    message: "expected `vars: <symbols> in <symbols>`".into(),
                })?;
                let names = single_chars(line, &symbol_list(names))?;
                let domain = single_chars(line, &symbol_list(domain))?;
                for v in names {
                    if vars.iter().any(|(w, _)| *w == v) {
                        return Err(ParseError::DuplicateDeclaration { line, keyword: "vars" });
                    }
                    vars.push((v, domain.clone()));
                }
            }
            None => rule_lines.push((line, content)),
        }
    }

    let mut alphabet = match base {
        Some(b) => Alphabet::new(b, [], DEFAULT_STOP_MARKER)
            .map_err(|source| ParseError::Invalid { line: 1, source })?,
        None => Alphabet::lowercase(),
    };
    for name in aux.unwrap_or_default() {
        alphabet
            .add_named_aux(&name)
            .map_err(|source| ParseError::Invalid {
                line: aux_line,
                source,
            })?;
    }
    for (v, domain) in &vars {
        if alphabet.contains(*v) || *v == alphabet.stop_marker() {
            return Err(ParseError::Invalid {
                line: 1,
                source: MarkovError::OverlappingAlphabet(*v),
            });
        }
        if let Some(&c) = domain.iter().find(|c| !alphabet.is_base(**c)) {
            return Err(ParseError::Invalid {
                line: 1,
                source: MarkovError::DomainOutsideBase(c),
            });
        }
    }

    let variables: Vec<char> = vars.iter().map(|(v, _)| *v).collect();
    let tokenizer = Tokenizer::new(&alphabet, &variables);
    let mut rules = Vec::new();
    let mut origins = Vec::new();
    for (origin, &(line, content)) in rule_lines.iter().enumerate() {
        let (lhs, rhs) = content.split_once("->").ok_or_else(|| ParseError::Syntax {
            line,
            message: format!("expected `LHS -> RHS`, found `{content}`"),
        })?;
        let rhs = rhs.trim();
        let (is_stop, rhs) = match rhs
            .strip_prefix('.')
            .or_else(|| rhs.strip_prefix(alphabet.stop_marker()))
        {
            Some(rest) => (true, rest),
            None => (false, rhs),
        };
        let unknown = |symbol| ParseError::UnknownSymbol { line, symbol };
        let schema = RuleSchema {
            lhs_template: tokenizer.tokenize(lhs).map_err(unknown)?,
            rhs_template: tokenizer.tokenize(rhs).map_err(unknown)?,
            variables: variables.clone(),
            is_stop,
        };
        let expanded = schema
            .expand_with(&alphabet, &vars)
            .map_err(|source| ParseError::Invalid { line, source })?;
        origins.extend(std::iter::repeat(origin).take(expanded.len()));
        rules.extend(expanded);
    }
    if rules.is_empty() {
        return Err(ParseError::NoRules);
    }
    MarkovProgram::with_origins(alphabet, rules, origins)
        .map_err(|source| ParseError::Invalid { line: 1, source })
}

impl MarkovProgram {
    /// Converts user text (auxiliary names spelled out) to the internal form.
    pub fn encode_input(&self, text: &str) -> Result<String, MarkovError> {
        Tokenizer::new(self.alphabet(), &[])
            .tokenize(text)
            .map_err(|s| MarkovError::UnknownSymbol(s.chars().next().unwrap_or('?')))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::Rule;

    #[test]
    fn plain_rule_over_default_alphabet() {
        let p = parse_program("ss -> tr\n").unwrap();
        assert_eq!(p.rules(), &[Rule::new("ss", "tr")]);
        assert_eq!(p.alphabet().base().len(), 26);
    }

    #[test]
    fn empty_program_is_rejected() {
        assert_eq!(parse_program("# nothing\nalphabet: ab\n"), Err(ParseError::NoRules));
        assert_eq!(
            ParseError::NoRules.to_string(),
            "program must contain at least one rule"
        );
    }

    #[test]
    fn stop_rules_and_empty_sides() {
        let p = parse_program("alphabet: ab\na -> .\nb -> .ab\n-> a\nab ->\n").unwrap();
        assert_eq!(
            p.rules(),
            &[
                Rule::stop("a", ""),
                Rule::stop("b", "ab"),
                Rule::new("", "a"),
                Rule::new("ab", ""),
            ]
        );
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_program("alphabet: ab\n\nab ba\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_symbol_reports_line() {
        let err = parse_program("alphabet: ab\nac -> b\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownSymbol {
                line: 2,
                symbol: "c".into()
            }
        );
    }

    #[test]
    fn duplicate_alphabet_rejected() {
        let err = parse_program("alphabet: ab\nalphabet: cd\na -> b\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::DuplicateDeclaration {
                line: 2,
                keyword: "alphabet"
            }
        );
    }

    #[test]
    fn multi_character_aux_names() {
        let p = parse_program("alphabet: ab\naux: M1 M2\nM1 a -> a M2\n").unwrap();
        let out = p.run(&p.encode_input("M1ab").unwrap(), crate::markov::DEFAULT_STEP_LIMIT);
        assert_eq!(p.alphabet().render(&out.final_string), "aM2b");
    }

    #[test]
    fn ranges_in_declarations() {
        let p = parse_program("alphabet: a-e\nvars: x in a-c\nx -> .\n").unwrap();
        assert_eq!(p.alphabet().base(), &['a', 'b', 'c', 'd', 'e']);
        assert_eq!(p.rules().len(), 3);
    }
}
