use std::fmt;

use super::{Alphabet, MarkovError};

/// A ground rewrite rule `lhs -> rhs`. Stop rules perform their
/// replacement and then halt the algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: String,
    pub rhs: String,
    pub is_stop: bool,
}

impl Rule {
    pub fn new(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Self {
            lhs: lhs.into(),
            rhs: rhs.into(),
            is_stop: false,
        }
    }

    pub fn stop(lhs: impl Into<String>, rhs: impl Into<String>) -> Self {
        Self {
            lhs: lhs.into(),
            rhs: rhs.into(),
            is_stop: true,
        }
    }

    /// Replaces the leftmost occurrence of `lhs` in `seq`.
    ///
    /// Returns the rewritten string and the match offset counted in
    /// symbols. An empty `lhs` matches at offset 0.
    pub fn apply_once(&self, seq: &str) -> Option<(String, usize)> {
        let byte_pos = seq.find(self.lhs.as_str())?;
        let mut out = String::with_capacity(seq.len() + self.rhs.len());
        out.push_str(&seq[..byte_pos]);
        out.push_str(&self.rhs);
        out.push_str(&seq[byte_pos + self.lhs.len()..]);
        Some((out, symbol_offset(seq, byte_pos)))
    }

    pub fn matches(&self, seq: &str) -> bool {
        seq.contains(self.lhs.as_str())
    }

    pub(crate) fn validate(&self, alphabet: &Alphabet) -> Result<(), MarkovError> {
        for c in self.lhs.chars().chain(self.rhs.chars()) {
            if c == alphabet.stop_marker() {
                return Err(MarkovError::StopMarkerInRule);
            }
            if !alphabet.contains(c) {
                return Err(MarkovError::UnknownSymbol(c));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stop = if self.is_stop { "." } else { "" };
        write!(f, "{} -> {}{}", self.lhs, stop, self.rhs)
    }
}

/// Free-function form of [`Rule::apply_once`].
pub fn apply_rule_once(rule: &Rule, seq: &str) -> Option<(String, usize)> {
    rule.apply_once(seq)
}

pub(crate) fn symbol_offset(s: &str, byte_pos: usize) -> usize {
    s[..byte_pos].chars().count()
}

/// A rule template whose variables range over base symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSchema {
    pub lhs_template: String,
    pub rhs_template: String,
    pub variables: Vec<char>,
    pub is_stop: bool,
}

impl RuleSchema {
    /// Variables that actually occur in the left-hand side, in declaration order.
    fn bound_variables(&self) -> Vec<char> {
        self.variables
            .iter()
            .copied()
            .filter(|v| self.lhs_template.contains(*v))
            .collect()
    }

    fn check_free_variables(&self) -> Result<(), MarkovError> {
        match self
            .variables
            .iter()
            .find(|v| self.rhs_template.contains(**v) && !self.lhs_template.contains(**v))
        {
            Some(&v) => Err(MarkovError::FreeOutputVariable(v)),
            None => Ok(()),
        }
    }

    /// Expands the schema with every bound variable ranging over `domain`.
    pub fn expand(&self, alphabet: &Alphabet, domain: &[char]) -> Result<Vec<Rule>, MarkovError> {
        let domains: Vec<(char, Vec<char>)> = self
            .variables
            .iter()
            .map(|&v| (v, domain.to_vec()))
            .collect();
        self.expand_with(alphabet, &domains)
    }

    /// Expansion with a separate domain for each variable.
    ///
    /// Assignments are enumerated lexicographically: the first bound
    /// variable is the most significant digit, and each domain is walked
    /// in base-alphabet order.
    pub(crate) fn expand_with(
        &self,
        alphabet: &Alphabet,
        domains: &[(char, Vec<char>)],
    ) -> Result<Vec<Rule>, MarkovError> {
        self.check_free_variables()?;
        let bound = self.bound_variables();
        let mut digits: Vec<Vec<char>> = Vec::with_capacity(bound.len());
        for v in &bound {
            let mut domain = domains
                .iter()
                .find(|(dv, _)| dv == v)
                .map(|(_, d)| d.clone())
                .ok_or(MarkovError::UnboundVariable(*v))?;
            for &c in &domain {
                if !alphabet.is_base(c) {
                    return Err(MarkovError::DomainOutsideBase(c));
                }
            }
            domain.sort_by_key(|&c| alphabet.base_rank(c));
            domain.dedup();
            if domain.is_empty() {
                return Err(MarkovError::EmptyDomain(*v));
            }
            digits.push(domain);
        }

        let total: usize = digits.iter().map(Vec::len).product();
        let mut rules = Vec::with_capacity(total);
        let mut counter = vec![0usize; digits.len()];
        for _ in 0..total {
            let subst = |template: &str| -> String {
                template
                    .chars()
                    .map(|c| match bound.iter().position(|&v| v == c) {
                        Some(i) => digits[i][counter[i]],
                        None => c,
                    })
                    .collect()
            };
            let rule = Rule {
                lhs: subst(&self.lhs_template),
                rhs: subst(&self.rhs_template),
                is_stop: self.is_stop,
            };
            rule.validate(alphabet)?;
            rules.push(rule);
            // odometer increment, last digit fastest
            for i in (0..counter.len()).rev() {
                counter[i] += 1;
                if counter[i] < digits[i].len() {
                    break;
                }
                counter[i] = 0;
            }
        }
        Ok(rules)
    }
}

/// Free-function form of [`RuleSchema::expand`].
pub fn expand_schema(
    schema: &RuleSchema,
    alphabet: &Alphabet,
    variable_domain: &[char],
) -> Result<Vec<Rule>, MarkovError> {
    schema.expand(alphabet, variable_domain)
}
