// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Fixed-width bit pattern of arbitrary size, stored as little-endian words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    width: u32,
    words: Vec<u64>,
}

impl Bits {
    fn word_count(width: u32) -> usize {
        (width as usize).div_ceil(64).max(1)
    }

    fn masked(mut self) -> Self {
        let rem = self.width % 64;
        if rem != 0 {
            if let Some(top) = self.words.last_mut() {
                *top &= (1u64 << rem) - 1;
            }
        }
        self
    }

    pub fn zero(width: u32) -> Self {
        assert!(width >= 1, "bit width must be positive");
        Self { width, words: vec![0; Self::word_count(width)] }
    }

    pub fn ones(width: u32) -> Self {
        Self::repeat_byte(width, 0xFF)
    }

    /// `byte` repeated across the width, truncated (e.g. 0xAA.., 0x55..).
    pub fn repeat_byte(width: u32, byte: u8) -> Self {
        let word = u64::from_ne_bytes([byte; 8]);
        Self { width, words: vec![word; Self::word_count(width)] }.masked()
    }

    pub fn from_u64(width: u32, value: u64) -> Self {
        let mut b = Self::zero(width);
        b.words[0] = value;
        b.masked()
    }

    pub fn random<R: RngCore>(width: u32, rng: &mut R) -> Self {
        let words = (0..Self::word_count(width)).map(|_| rng.next_u64()).collect();
        Self { width, words }.masked()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Lowest 64 bits.
    pub fn low_u64(&self) -> u64 {
        self.words[0]
    }

    /// Hex digits without prefix, most significant first, no leading-zero
    /// trimming beyond the digit count implied by the width.
    pub fn hex_digits(&self) -> String {
        let digits = (self.width as usize).div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let word = self.words[bit / 64];
            let nibble = (word >> (bit % 64)) & 0xF;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    /// Verilog sized literal, e.g. `8'haa`.
    pub fn verilog_literal(&self) -> String {
        format!("{}'h{}", self.width, self.hex_digits())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.verilog_literal())
    }
}

/// Corner patterns every datapath input is seeded with, in this order:
/// zero, all ones, alternating 1010…, alternating 0101….
pub fn corner_patterns(width: u32) -> [Bits; 4] {
    [Bits::zero(width), Bits::ones(width), Bits::repeat_byte(width, 0xAA), Bits::repeat_byte(width, 0x55)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn corners_truncate_to_width() {
        let lits: Vec<String> = corner_patterns(16).iter().map(Bits::verilog_literal).collect();
        assert_eq!(lits, ["16'h0000", "16'hffff", "16'haaaa", "16'h5555"]);
        let lits: Vec<String> = corner_patterns(3).iter().map(Bits::verilog_literal).collect();
        assert_eq!(lits, ["3'h0", "3'h7", "3'h2", "3'h5"]);
        let lits: Vec<String> = corner_patterns(1).iter().map(Bits::verilog_literal).collect();
        assert_eq!(lits, ["1'h0", "1'h1", "1'h0", "1'h1"]);
    }

    #[test]
    fn wide_values() {
        let b = Bits::ones(70);
        assert_eq!(b.verilog_literal(), "70'h3fffffffffffffffff");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for w in [1, 7, 63, 64, 65, 128, 200] {
            let r = Bits::random(w, &mut rng);
            assert_eq!(r.hex_digits().len(), (w as usize).div_ceil(4));
            // Top digit never exceeds what the width allows.
            let top = u32::from_str_radix(&r.hex_digits()[..1], 16).unwrap();
            let top_bits = if w % 4 == 0 { 4 } else { w % 4 };
            assert!(top < (1 << top_bits));
        }
    }
}
