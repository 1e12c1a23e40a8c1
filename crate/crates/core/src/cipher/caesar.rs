use super::CipherError;

fn shift(word: &str, by: u32) -> Result<String, CipherError> {
    if !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return Err(CipherError::NotLowercase(word.to_string()));
    }
    let by = (by % 26) as u8;
    Ok(word
        .bytes()
        .map(|b| (b'a' + (b - b'a' + by) % 26) as char)
        .collect())
}

/// Shifts every letter of a lowercase word forward by `key` (mod 26).
pub fn caesar(word: &str, key: u32) -> Result<String, CipherError> {
    shift(word, key)
}

pub fn caesar_decrypt(word: &str, key: u32) -> Result<String, CipherError> {
    shift(word, 26 - key % 26)
}
