//! Random prescription codes.
//!
//! A code is 10 random Crockford base32 characters followed by one check
//! character, chosen so the sum of all 11 character values is 0 mod 32.
//! Any single-character substitution changes the sum by a nonzero amount
//! smaller than 32, so every single typo is caught.

use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, Rng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const ALPHABET: &[u8; 32] = b"0123456789ABCDEFGHJKMNPQRSTVWXYZ";
pub const BODY_LEN: usize = 10;
pub const CODE_LEN: usize = BODY_LEN + 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed prescription code")]
pub struct MalformedCode;

/// Value of an alphabet character, or `None` for anything else (including lowercase).
pub fn char_value(c: u8) -> Option<u8> {
    ALPHABET.iter().position(|&a| a == c).map(|p| p as u8)
}

fn check_char(body: &[u8]) -> u8 {
    let sum: u32 = body.iter().map(|&c| u32::from(char_value(c).expect("body in alphabet"))).sum();
    ALPHABET[((32 - sum % 32) % 32) as usize]
}

/// True iff `code` is 11 alphabet characters whose values sum to 0 mod 32.
pub fn code_checksum_valid(code: &str) -> bool {
    let bytes = code.as_bytes();
    if bytes.len() != CODE_LEN {
        return false;
    }
    let mut sum = 0u32;
    for &b in bytes {
        match char_value(b) {
            Some(v) => sum += u32::from(v),
            None => return false,
        }
    }
    sum.is_multiple_of(32)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrescriptionCode(String);

impl PrescriptionCode {
    pub fn generate<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut text = Vec::with_capacity(CODE_LEN);
        for _ in 0..BODY_LEN {
            // 32 is a power of two, so masking keeps the draw uniform.
            text.push(ALPHABET[(rng.next_u32() & 31) as usize]);
        }
        text.push(check_char(&text));
        Self(String::from_utf8(text).expect("alphabet is ascii"))
    }

    /// Strict parse: exactly the 11-character canonical form.
    pub fn parse(text: &str) -> Result<Self, MalformedCode> {
        if code_checksum_valid(text) {
            Ok(Self(text.to_owned()))
        } else {
            Err(MalformedCode)
        }
    }

    /// Accepts pharmacist-typed input: surrounding whitespace, `-` or space
    /// group separators and lowercase letters are tolerated.
    pub fn parse_entry(text: &str) -> Result<Self, MalformedCode> {
        let canonical: String = text
            .chars()
            .filter(|c| !matches!(c, '-' | ' ' | '\t'))
            .map(|c| c.to_ascii_uppercase())
            .collect();
        Self::parse(&canonical)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `XXX-XXXX-XXXX`, for reading aloud. Presentation only.
    pub fn grouped(&self) -> String {
        format!("{}-{}-{}", &self.0[..3], &self.0[3..7], &self.0[7..])
    }
}

/// Generates a fresh code.
pub fn generate_code<R: Rng + CryptoRng + ?Sized>(random_source: &mut R) -> PrescriptionCode {
    PrescriptionCode::generate(random_source)
}

impl fmt::Display for PrescriptionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for PrescriptionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrescriptionCode({})", self.0)
    }
}

impl FromStr for PrescriptionCode {
    type Err = MalformedCode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for PrescriptionCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for PrescriptionCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}
