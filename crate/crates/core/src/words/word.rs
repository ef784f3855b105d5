//! Words over the alphabet {1,2,3}, packed two bits per symbol.
//!
//! Symbols are stored most-significant-first inside each `u64` chunk, 32
//! symbols per chunk, with the raw value 1..3 in each 2-bit field and 0 as
//! padding. Because padding sorts below every symbol, comparing the chunk
//! slices lexicographically is exactly lexicographic word order (with a
//! prefix sorting before its extensions), and equal chunk slices imply equal
//! words.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::linalg::{generator, multiply, Mat3};

const SYMS_PER_CHUNK: usize = 32;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    len: u32,
    chunks: SmallVec<[u64; 2]>,
}

impl Word {
    pub fn new() -> Self {
        Word::default()
    }

    pub fn from_symbols(symbols: &[u8]) -> Result<Self> {
        let mut w = Word::new();
        for &s in symbols {
            if !(1..=3).contains(&s) {
                return Err(Error::Input(format!("symbol {s} outside alphabet {{1,2,3}}")));
            }
            w.push(s);
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends a symbol. Panics on symbols outside {1,2,3}; use
    /// [`Word::from_symbols`] for unvalidated input.
    pub fn push(&mut self, s: u8) {
        assert!((1..=3).contains(&s), "symbol {s} outside alphabet");
        let i = self.len as usize;
        if i % SYMS_PER_CHUNK == 0 {
            self.chunks.push(0);
        }
        let shift = 62 - 2 * (i % SYMS_PER_CHUNK);
        let last = self.chunks.last_mut().unwrap();
        *last |= (s as u64) << shift;
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<u8> {
        if self.len == 0 {
            return None;
        }
        let i = (self.len - 1) as usize;
        let shift = 62 - 2 * (i % SYMS_PER_CHUNK);
        let chunk = self.chunks.last_mut().unwrap();
        let s = ((*chunk >> shift) & 3) as u8;
        *chunk &= !(3u64 << shift);
        if i % SYMS_PER_CHUNK == 0 {
            self.chunks.pop();
        }
        self.len -= 1;
        Some(s)
    }

    pub fn get(&self, i: usize) -> u8 {
        assert!(i < self.len as usize, "index {i} past word length {}", self.len);
        let shift = 62 - 2 * (i % SYMS_PER_CHUNK);
        ((self.chunks[i / SYMS_PER_CHUNK] >> shift) & 3) as u8
    }

    pub fn last(&self) -> Option<u8> {
        if self.len == 0 {
            None
        } else {
            Some(self.get(self.len as usize - 1))
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len as usize).map(move |i| self.get(i))
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        if self.len > other.len {
            return false;
        }
        let full = self.len as usize / SYMS_PER_CHUNK;
        if self.chunks[..full] != other.chunks[..full] {
            return false;
        }
        let rem = self.len as usize % SYMS_PER_CHUNK;
        if rem == 0 {
            return true;
        }
        let mask = !0u64 << (64 - 2 * rem);
        (self.chunks[full] ^ other.chunks[full]) & mask == 0
    }

    pub fn ends_with(&self, suffix: &Word) -> bool {
        if suffix.len > self.len {
            return false;
        }
        let off = (self.len - suffix.len) as usize;
        suffix
            .symbols()
            .enumerate()
            .all(|(i, s)| self.get(off + i) == s)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for s in other.symbols() {
            w.push(s);
        }
        w
    }

    /// True unless the last `n` symbols exist and are all equal.
    pub fn last_n_digits_not_same(&self, n: usize) -> bool {
        let len = self.len as usize;
        if n == 0 || len < n {
            return true;
        }
        let last = self.get(len - 1);
        !(len - n..len - 1).all(|i| self.get(i) == last)
    }

    /// The matrix of the word: the left-to-right product of generators.
    /// The empty word is the identity.
    pub fn matrix(&self) -> Mat3 {
        let mut g = Mat3::identity();
        for s in self.symbols() {
            let a = generator(s).expect("stored symbols are valid");
            g = multiply(&g, &a).expect("products of generators stay finite");
        }
        g
    }
}

/// Left-to-right product of the generators named by the word.
pub fn word_to_matrix(w: &Word) -> Mat3 {
    w.matrix()
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Chunk slices compare exactly like symbol sequences; see module doc.
        self.chunks
            .cmp(&other.chunks)
            .then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut w = Word::new();
        for ch in s.chars() {
            match ch {
                '1' => w.push(1),
                '2' => w.push(2),
                '3' => w.push(3),
                _ => {
                    return Err(Error::Input(format!(
                        "invalid word character {ch:?}; expected digits 1-3"
                    )))
                }
            }
        }
        Ok(w)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
