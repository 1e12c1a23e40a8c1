use rand::seq::index;
use rand::Rng;

use super::{count_occurrences, Example, Instruction, TaskGenError};

/// Attempts per input before an embedding is declared infeasible.
pub const EMBED_RETRIES: usize = 1_000;

/// Builds a string of `input_length` symbols containing `pattern` exactly
/// `occurrences` times, overlaps included.
///
/// Copies of the pattern are placed at a uniformly chosen set of
/// non-overlapping slots and the gaps are filled with random symbols.
/// Draws whose fill creates extra (or destroys) occurrences are
/// rejected and redrawn.
pub fn embed_pattern<R: Rng + ?Sized>(
    pattern: &str,
    input_length: usize,
    occurrences: usize,
    alphabet: &[char],
    rng: &mut R,
) -> Result<String, TaskGenError> {
    let pat: Vec<char> = pattern.chars().collect();
    if pat.is_empty() {
        return Err(TaskGenError::ZeroLength);
    }
    let used = occurrences
        .checked_mul(pat.len())
        .filter(|&u| u <= input_length)
        .ok_or(TaskGenError::EmbeddingTooLong {
            pattern_len: pat.len(),
            occurrences,
            input_length,
        })?;
    let filler = input_length - used;
    let items = filler + occurrences;
    let mut out = String::with_capacity(input_length);
    let mut is_copy = vec![false; items];
    for _ in 0..EMBED_RETRIES {
        is_copy.iter_mut().for_each(|b| *b = false);
        for i in index::sample(rng, items, occurrences) {
            is_copy[i] = true;
        }
        out.clear();
        for &copy in &is_copy {
            if copy {
                out.extend(pat.iter());
            } else {
                out.push(alphabet[rng.gen_range(0..alphabet.len())]);
            }
        }
        if count_occurrences(&out, pattern) == occurrences {
            return Ok(out);
        }
    }
    Err(TaskGenError::RetriesExhausted {
        pattern: pattern.to_string(),
        occurrences,
        retries: EMBED_RETRIES,
    })
}

/// Generates one example whose input contains the pattern `occurrences` times.
pub fn make_example<R: Rng + ?Sized>(
    instruction: &Instruction,
    input_length: usize,
    occurrences: usize,
    alphabet: &[char],
    rng: &mut R,
) -> Result<Example, TaskGenError> {
    let input = embed_pattern(&instruction.pattern, input_length, occurrences, alphabet, rng)?;
    let example = Example::new(instruction.clone(), input);
    debug_assert_eq!(example.occurrences, occurrences);
    Ok(example)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn naive_count(hay: &str, pat: &str) -> usize {
        let h: Vec<char> = hay.chars().collect();
        let p: Vec<char> = pat.chars().collect();
        if p.len() > h.len() {
            return 0;
        }
        (0..=h.len() - p.len()).filter(|&i| h[i..i + p.len()] == p[..]).count()
    }

    fn lower() -> Vec<char> {
        ('a'..='z').collect()
    }

    #[test]
    fn zero_occurrences() {
        let mut rng = substream(3, "embed", 0, 0);
        for _ in 0..200 {
            let s = embed_pattern("xyz", 9, 0, &lower(), &mut rng).unwrap();
            assert_eq!(s.chars().count(), 9);
            assert_eq!(naive_count(&s, "xyz"), 0);
        }
    }

    #[test]
    fn single_long_pattern() {
        let mut rng = substream(3, "embed", 1, 0);
        let pat = "qwertyuiopasdfghjklz";
        for _ in 0..200 {
            let s = embed_pattern(pat, 50, 1, &lower(), &mut rng).unwrap();
            assert_eq!(s.len(), 50);
            assert_eq!(naive_count(&s, pat), 1);
        }
    }

    #[test]
    fn self_overlapping_pattern() {
        // the small alphabet makes accidental overlaps like "ababa" common
        let ab = ['a', 'b', 'c'];
        let mut rng = substream(3, "embed", 2, 0);
        for _ in 0..500 {
            let s = embed_pattern("aba", 8, 2, &ab, &mut rng).unwrap();
            assert_eq!(s.len(), 8);
            assert_eq!(naive_count(&s, "aba"), 2, "{s}");
        }
    }

    #[test]
    fn infeasible_configurations() {
        let mut rng = substream(3, "embed", 3, 0);
        assert!(matches!(
            embed_pattern("aa", 10, 0, &['a'], &mut rng),
            Err(TaskGenError::RetriesExhausted { .. })
        ));
        assert!(matches!(
            embed_pattern("abc", 8, 3, &lower(), &mut rng),
            Err(TaskGenError::EmbeddingTooLong { .. })
        ));
    }

    #[test]
    fn make_example_copy_and_rewrite() {
        let mut rng = substream(3, "embed", 4, 0);
        let noop = make_example(&Instruction::new("qqq", "rrr"), 12, 0, &lower(), &mut rng).unwrap();
        assert!(noop.is_noop);
        assert_eq!(noop.target, noop.input);

        let hit = make_example(&Instruction::new("qqq", "rr"), 12, 1, &lower(), &mut rng).unwrap();
        let at = hit.input.find("qqq").unwrap();
        assert_eq!(hit.target, format!("{}rr{}", &hit.input[..at], &hit.input[at + 3..]));
        assert_eq!(hit.occurrences, 1);
    }
}
