use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Integer types of the IR. `Ptr` is a 64-bit unsigned byte address.
///
/// Runtime values are carried as `i128` holding the mathematical value of the
/// bit pattern under the type's signedness, so every value of every type is
/// representable and comparisons need no type context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    I8,
    I16,
    I32,
    I64,
    U8,
    U16,
    U32,
    U64,
    Ptr,
}

impl ScalarType {
    pub const ALL: [ScalarType; 9] = [
        ScalarType::I8,
        ScalarType::I16,
        ScalarType::I32,
        ScalarType::I64,
        ScalarType::U8,
        ScalarType::U16,
        ScalarType::U32,
        ScalarType::U64,
        ScalarType::Ptr,
    ];

    pub fn bits(self) -> u32 {
        match self {
            ScalarType::I8 | ScalarType::U8 => 8,
            ScalarType::I16 | ScalarType::U16 => 16,
            ScalarType::I32 | ScalarType::U32 => 32,
            ScalarType::I64 | ScalarType::U64 | ScalarType::Ptr => 64,
        }
    }

    pub fn bytes(self) -> usize {
        self.bits() as usize / 8
    }

    pub fn is_signed(self) -> bool {
        matches!(
            self,
            ScalarType::I8 | ScalarType::I16 | ScalarType::I32 | ScalarType::I64
        )
    }

    pub fn min_value(self) -> i128 {
        if self.is_signed() {
            -(1i128 << (self.bits() - 1))
        } else {
            0
        }
    }

    pub fn max_value(self) -> i128 {
        if self.is_signed() {
            (1i128 << (self.bits() - 1)) - 1
        } else {
            (1i128 << self.bits()) - 1
        }
    }

    pub fn contains(self, v: i128) -> bool {
        self.min_value() <= v && v <= self.max_value()
    }

    /// Reduces `v` modulo 2^bits into the type's value range.
    #[inline]
    pub fn wrap(self, v: i128) -> i128 {
        let bits = self.bits();
        let m = (v as u128) & ((1u128 << bits) - 1);
        if self.is_signed() && (m >> (bits - 1)) & 1 == 1 {
            m as i128 - (1i128 << bits)
        } else {
            m as i128
        }
    }

    /// Two's-complement bit pattern of a value of this type.
    #[inline]
    pub fn to_bits(self, v: i128) -> u64 {
        v as u64
    }

    #[inline]
    pub fn from_bits(self, bits: u64) -> i128 {
        self.wrap(bits as i128)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarType::I8 => "i8",
            ScalarType::I16 => "i16",
            ScalarType::I32 => "i32",
            ScalarType::I64 => "i64",
            ScalarType::U8 => "u8",
            ScalarType::U16 => "u16",
            ScalarType::U32 => "u32",
            ScalarType::U64 => "u64",
            ScalarType::Ptr => "ptr",
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ScalarType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_matches_native_casts() {
        for v in [-300i128, -129, -128, -1, 0, 1, 127, 128, 255, 256, 70000] {
            assert_eq!(ScalarType::I8.wrap(v), (v as i8) as i128);
            assert_eq!(ScalarType::U8.wrap(v), (v as u8) as i128);
            assert_eq!(ScalarType::I16.wrap(v), (v as i16) as i128);
            assert_eq!(ScalarType::U32.wrap(v), (v as u32) as i128);
            assert_eq!(ScalarType::U64.wrap(v), (v as u64) as i128);
            assert_eq!(ScalarType::I64.wrap(v), (v as i64) as i128);
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(ScalarType::U32.max_value(), u32::MAX as i128);
        assert_eq!(ScalarType::I64.min_value(), i64::MIN as i128);
        assert_eq!(ScalarType::Ptr.max_value(), u64::MAX as i128);
        assert!(!ScalarType::U8.contains(-1));
    }
}
