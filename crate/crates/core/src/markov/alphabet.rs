use std::collections::BTreeSet;

use super::MarkovError;

/// Default termination marker.
pub const DEFAULT_STOP_MARKER: char = '·';

/// First character handed out to multi-character auxiliary symbols.
const RESERVED_BASE: u32 = 0xE000;

/// Symbols a Markov program may use: the input alphabet, auxiliary
/// markers, and a distinguished stop marker.
///
/// Every symbol is a single `char`. Auxiliary symbols that are spelled
/// with several characters in a program file are mapped onto characters
/// from the Unicode private-use area; `names` keeps the spelling so that
/// strings can be rendered back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    base: Vec<char>,
    extension: Vec<char>,
    stop_marker: char,
    names: Vec<(char, String)>,
}

impl Alphabet {
    pub fn new(
        base: impl IntoIterator<Item = char>,
        extension: impl IntoIterator<Item = char>,
        stop_marker: char,
    ) -> Result<Self, MarkovError> {
        let base = dedup(base);
        let extension = dedup(extension);
        if base.is_empty() {
            return Err(MarkovError::EmptyAlphabet);
        }
        if let Some(&c) = base.iter().find(|c| extension.contains(c)) {
            return Err(MarkovError::OverlappingAlphabet(c));
        }
        if base.contains(&stop_marker) || extension.contains(&stop_marker) {
            return Err(MarkovError::OverlappingAlphabet(stop_marker));
        }
        Ok(Self {
            base,
            extension,
            stop_marker,
            names: Vec::new(),
        })
    }

    /// Lowercase `a`..=`z`, no auxiliary symbols.
    pub fn lowercase() -> Self {
        Self::new('a'..='z', [], DEFAULT_STOP_MARKER).expect("lowercase alphabet is valid")
    }

    pub fn base(&self) -> &[char] {
        &self.base
    }

    pub fn extension(&self) -> &[char] {
        &self.extension
    }

    pub fn stop_marker(&self) -> char {
        self.stop_marker
    }

    pub fn is_base(&self, c: char) -> bool {
        self.base.contains(&c)
    }

    /// Membership in the extended alphabet (base plus auxiliary symbols).
    /// The stop marker is not a string symbol.
    pub fn contains(&self, c: char) -> bool {
        self.base.contains(&c) || self.extension.contains(&c)
    }

    /// Position of a base symbol in alphabet order.
    pub fn base_rank(&self, c: char) -> Option<usize> {
        self.base.iter().position(|&b| b == c)
    }

    /// Adds an auxiliary symbol spelled `name`. Single-character names
    /// map to themselves, longer names to a reserved character.
    pub(crate) fn add_named_aux(&mut self, name: &str) -> Result<char, MarkovError> {
        let mut chars = name.chars();
        let symbol = match (chars.next(), chars.next()) {
            (Some(c), None) => c,
            (Some(_), Some(_)) => {
                let offset = u32::try_from(self.names.len()).expect("symbol count fits in u32");
                char::from_u32(RESERVED_BASE + offset).ok_or(MarkovError::TooManySymbols)?
            }
            (None, _) => return Err(MarkovError::EmptySymbol),
        };
        if self.contains(symbol) || symbol == self.stop_marker {
            return Err(MarkovError::OverlappingAlphabet(symbol));
        }
        self.extension.push(symbol);
        if name.chars().count() > 1 {
            self.names.push((symbol, name.to_string()));
        }
        Ok(symbol)
    }

    /// Spelling of every symbol, used by the program tokenizer.
    pub(crate) fn spellings(&self) -> Vec<(String, char)> {
        self.base
            .iter()
            .chain(&self.extension)
            .map(|&c| (self.name_of(c), c))
            .collect()
    }

    fn name_of(&self, c: char) -> String {
        self.names
            .iter()
            .find(|(s, _)| *s == c)
            .map(|(_, n)| n.clone())
            .unwrap_or_else(|| c.to_string())
    }

    /// Renders an internal string with auxiliary symbols spelled out.
    pub fn render(&self, s: &str) -> String {
        if self.names.is_empty() {
            return s.to_string();
        }
        s.chars().map(|c| self.name_of(c)).collect()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::lowercase()
    }
}

fn dedup(symbols: impl IntoIterator<Item = char>) -> Vec<char> {
    let mut seen = BTreeSet::new();
    symbols.into_iter().filter(|c| seen.insert(*c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_and_empty_base() {
        assert_eq!(
            Alphabet::new("ab".chars(), "b".chars(), '·'),
            Err(MarkovError::OverlappingAlphabet('b'))
        );
        assert_eq!(
            Alphabet::new("ab".chars(), [], 'a'),
            Err(MarkovError::OverlappingAlphabet('a'))
        );
        assert_eq!(
            Alphabet::new([], "α".chars(), '·'),
            Err(MarkovError::EmptyAlphabet)
        );
    }

    #[test]
    fn long_aux_names_map_to_reserved_chars() {
        let mut a = Alphabet::new("ab".chars(), [], '·').unwrap();
        let m1 = a.add_named_aux("M1").unwrap();
        let alpha = a.add_named_aux("α").unwrap();
        assert_eq!(alpha, 'α');
        assert!(a.contains(m1));
        assert_ne!(m1, 'M');
        let s: String = ['a', m1, alpha, 'b'].iter().collect();
        assert_eq!(a.render(&s), "aM1αb");
    }
}
