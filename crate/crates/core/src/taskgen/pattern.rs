use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TaskGenError;

/// Structural constraint on generated patterns.
///
/// Written in configuration files as `unconstrained`, `repeated:K`,
/// `periodic:K` or `mirror:K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SemanticClass {
    #[default]
    Unconstrained,
    /// Blocks of one symbol repeated k times: `aaabbbccc` for k=3.
    Repeated(usize),
    /// A unit repeated k times: `abcabc` for k=2.
    Periodic(usize),
    /// k alternating copies of a unit and its reverse: `abccbaabc` for k=3.
    Mirror(usize),
}

impl SemanticClass {
    pub fn k(self) -> Option<usize> {
        match self {
            SemanticClass::Unconstrained => None,
            SemanticClass::Repeated(k) | SemanticClass::Periodic(k) | SemanticClass::Mirror(k) => {
                Some(k)
            }
        }
    }

    /// Checks that a pattern of `length` symbols can be built in this class.
    pub fn check_length(self, length: usize) -> Result<(), TaskGenError> {
        if length == 0 {
            return Err(TaskGenError::ZeroLength);
        }
        match self.k() {
            None => Ok(()),
            Some(0) => Err(TaskGenError::ZeroK),
            Some(k) if length % k != 0 => Err(TaskGenError::IndivisibleLength { length, k }),
            Some(_) => Ok(()),
        }
    }

    /// Number of freely chosen symbols in a pattern of `length`.
    fn free_symbols(self, length: usize) -> usize {
        match self.k() {
            None => length,
            Some(k) => length / k,
        }
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticClass::Unconstrained => f.write_str("unconstrained"),
            SemanticClass::Repeated(k) => write!(f, "repeated:{k}"),
            SemanticClass::Periodic(k) => write!(f, "periodic:{k}"),
            SemanticClass::Mirror(k) => write!(f, "mirror:{k}"),
        }
    }
}

impl FromStr for SemanticClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "unconstrained" {
            return Ok(SemanticClass::Unconstrained);
        }
        let (kind, k) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `unconstrained` or `<kind>:<k>`, found `{s}`"))?;
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| format!("invalid repetition parameter in `{s}`"))?;
        if k == 0 {
            return Err(format!("repetition parameter must be at least 1 in `{s}`"));
        }
        match kind.trim() {
            "repeated" => Ok(SemanticClass::Repeated(k)),
            "periodic" => Ok(SemanticClass::Periodic(k)),
            "mirror" => Ok(SemanticClass::Mirror(k)),
            other => Err(format!("unknown pattern class `{other}`")),
        }
    }
}

impl TryFrom<String> for SemanticClass {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SemanticClass> for String {
    fn from(c: SemanticClass) -> Self {
        c.to_string()
    }
}

/// Upper bound on the number of distinct patterns of `length` in `class`,
/// saturating at `u128::MAX`.
pub fn pattern_capacity(class: SemanticClass, length: usize, alphabet_size: usize) -> u128 {
    let free = u32::try_from(class.free_symbols(length)).unwrap_or(u32::MAX);
    (alphabet_size as u128)
        .checked_pow(free)
        .unwrap_or(u128::MAX)
}

fn random_string<R: Rng + ?Sized>(rng: &mut R, alphabet: &[char], length: usize) -> Vec<char> {
    (0..length)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Samples a pattern of `length` symbols from `alphabet` in the given class.
pub fn gen_pattern<R: Rng + ?Sized>(
    class: SemanticClass,
    length: usize,
    alphabet: &[char],
    rng: &mut R,
) -> Result<String, TaskGenError> {
    class.check_length(length)?;
    assert!(!alphabet.is_empty(), "alphabet must not be empty");
    let out: String = match class {
        SemanticClass::Unconstrained => random_string(rng, alphabet, length).into_iter().collect(),
        SemanticClass::Repeated(k) => random_string(rng, alphabet, length / k)
            .into_iter()
            .flat_map(|c| std::iter::repeat(c).take(k))
            .collect(),
        SemanticClass::Periodic(k) => {
            let unit = random_string(rng, alphabet, length / k);
            (0..k).flat_map(|_| unit.iter().copied()).collect()
        }
        SemanticClass::Mirror(k) => {
            let unit = random_string(rng, alphabet, length / k);
            let rev: Vec<char> = unit.iter().rev().copied().collect();
            (0..k)
                .flat_map(|j| if j % 2 == 0 { unit.clone() } else { rev.clone() })
                .collect()
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    const ABC: [char; 3] = ['a', 'b', 'c'];

    // Generates until the wanted string shows up; the pattern space is tiny.
    fn can_yield(class: SemanticClass, length: usize, wanted: &str) -> bool {
        let mut rng = substream(1, "pattern-test", 0, 0);
        (0..10_000).any(|_| gen_pattern(class, length, &ABC, &mut rng).unwrap() == wanted)
    }

    #[test]
    fn class_examples_are_reachable() {
        assert!(can_yield(SemanticClass::Repeated(3), 9, "aaabbbccc"));
        assert!(can_yield(SemanticClass::Periodic(2), 6, "abcabc"));
        assert!(can_yield(SemanticClass::Mirror(3), 9, "abccbaabc"));
    }

    #[test]
    fn indivisible_length_rejected() {
        let mut rng = substream(1, "pattern-test", 0, 0);
        assert!(matches!(
            gen_pattern(SemanticClass::Periodic(4), 10, &ABC, &mut rng),
            Err(TaskGenError::IndivisibleLength { length: 10, k: 4 })
        ));
        assert!(matches!(
            gen_pattern(SemanticClass::Unconstrained, 0, &ABC, &mut rng),
            Err(TaskGenError::ZeroLength)
        ));
    }

    #[test]
    fn class_strings_round_trip() {
        for c in [
            SemanticClass::Unconstrained,
            SemanticClass::Repeated(6),
            SemanticClass::Periodic(2),
            SemanticClass::Mirror(3),
        ] {
            assert_eq!(c.to_string().parse::<SemanticClass>(), Ok(c));
        }
        assert!("mirror:0".parse::<SemanticClass>().is_err());
        assert!("spiral:2".parse::<SemanticClass>().is_err());
    }

    #[test]
    fn capacity() {
        assert_eq!(pattern_capacity(SemanticClass::Unconstrained, 3, 26), 17_576);
        assert_eq!(pattern_capacity(SemanticClass::Repeated(3), 9, 2), 8);
        assert_eq!(pattern_capacity(SemanticClass::Unconstrained, 50, 26), u128::MAX);
    }
}
