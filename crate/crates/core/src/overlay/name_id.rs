use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Maximum supported name-ID length; capacities up to 2^31 nodes.
pub const MAX_NAME_BITS: u8 = 31;

/// Fixed-length binary membership string. Bit 0 is the leftmost character.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NameId {
    bits: u32,
    len: u8,
}

impl NameId {
    pub fn new(bits: u32, len: u8) -> Self {
        assert!(len <= MAX_NAME_BITS, "name ID too long: {len}");
        let mask = if len == 0 { 0 } else { (1u32 << len) - 1 };
        NameId {
            bits: bits & mask,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at position `i`, counting from the left.
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len(), "bit index {i} out of range");
        ((self.bits >> (self.len as usize - 1 - i)) & 1) as u8
    }

    pub fn with_bit(mut self, i: usize, value: u8) -> Self {
        assert!(i < self.len(), "bit index {i} out of range");
        let shift = self.len as usize - 1 - i;
        self.bits = (self.bits & !(1 << shift)) | ((value as u32 & 1) << shift);
        self
    }

    pub fn raw(&self) -> u32 {
        self.bits
    }
}

/// Number of equal leading bits. Both IDs must have the same length.
pub fn common_prefix_length(a: NameId, b: NameId) -> usize {
    assert_eq!(a.len, b.len, "name IDs of different lengths");
    if a.len == 0 {
        return 0;
    }
    let diff = (a.bits ^ b.bits) << (32 - a.len as u32);
    (diff.leading_zeros() as usize).min(a.len())
}

impl fmt::Display for NameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NameId({self})")
    }
}

impl Ord for NameId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Lexicographic on the bit string, shorter first on a shared prefix.
        let n = self.len.min(other.len) as u32;
        let a = if n == 0 { 0 } else { self.bits >> (self.len as u32 - n) };
        let b = if n == 0 { 0 } else { other.bits >> (other.len as u32 - n) };
        a.cmp(&b).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for NameId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for NameId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > MAX_NAME_BITS as usize {
            return Err(Error::config("nameId", format!("`{s}` is longer than {MAX_NAME_BITS} bits")));
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::config("nameId", format!("`{s}` is not a bit string"))),
                };
        }
        Ok(NameId::new(bits, s.len() as u8))
    }
}

impl From<NameId> for String {
    fn from(n: NameId) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NameId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
