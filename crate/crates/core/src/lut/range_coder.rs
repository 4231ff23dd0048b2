//! Byte-oriented range coder with carry propagation through a cached byte,
//! 32-bit range, 64-bit low and 16-bit frequency precision.

use super::table::PRECISION_BITS;
use crate::error::{Error, Result};

const TOP: u32 = 1 << 24;

pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            out: Vec::new(),
        }
    }

    /// Codes the interval `[start, start + size)` out of `2¹⁶`.
    pub fn encode(&mut self, start: u32, size: u32) {
        debug_assert!(size > 0 && start + size <= 1 << PRECISION_BITS);
        let r = self.range >> PRECISION_BITS;
        self.low += r as u64 * start as u64;
        self.range = r * size;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.out.push(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

pub struct RangeDecoder<'a> {
    code: u32,
    range: u32,
    bytes: &'a [u8],
    pos: usize,
    /// `range >> 16` from the last [`RangeDecoder::target`] call.
    r: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self> {
        if bytes.len() < 5 {
            return Err(Error::Corruption("range-coded payload shorter than 5 bytes".into()));
        }
        if bytes[0] != 0 {
            return Err(Error::Corruption("range-coded payload must start with a zero byte".into()));
        }
        let code = u32::from_be_bytes(bytes[1..5].try_into().expect("four bytes"));
        Ok(Self {
            code,
            range: u32::MAX,
            bytes,
            pos: 5,
            r: 0,
        })
    }

    /// Cumulative count selected by the next symbol.
    pub fn target(&mut self) -> Result<u32> {
        self.r = self.range >> PRECISION_BITS;
        let t = self.code / self.r;
        if t >= 1 << PRECISION_BITS {
            return Err(Error::Corruption("range decoder state out of bounds".into()));
        }
        Ok(t)
    }

    /// Consumes the symbol occupying `[start, start + size)`; must follow
    /// [`RangeDecoder::target`].
    pub fn consume(&mut self, start: u32, size: u32) -> Result<()> {
        self.code -= self.r * start;
        self.range = self.r * size;
        while self.range < TOP {
            let byte = *self
                .bytes
                .get(self.pos)
                .ok_or_else(|| Error::Corruption("range-coded payload truncated".into()))?;
            self.pos += 1;
            self.code = (self.code << 8) | byte as u32;
            self.range <<= 8;
        }
        Ok(())
    }

    /// True once every payload byte has been consumed.
    pub fn exhausted(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

/// MSB-first bit writer for raw (bypass) bits.
#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    used: u8,
}

impl BitWriter {
    pub fn push(&mut self, bit: bool) {
        if self.used == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte pushed above") |= 0x80 >> self.used;
        }
        self.used = (self.used + 1) % 8;
    }

    pub fn push_bits(&mut self, value: u64, count: u32) {
        for i in (0..count).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Exp-Golomb order 0: `v + 1` in binary preceded by one zero per bit
    /// after its leading one.
    pub fn push_exp_golomb(&mut self, v: u64) {
        let x = v as u128 + 1;
        let bits = 128 - x.leading_zeros();
        for _ in 1..bits {
            self.push(false);
        }
        for i in (0..bits).rev() {
            self.push((x >> i) & 1 == 1);
        }
    }

    pub fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Bit count of the Exp-Golomb order-0 code of `v`.
pub fn exp_golomb_len(v: u64) -> u32 {
    let bits = 128 - (v as u128 + 1).leading_zeros();
    2 * bits - 1
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn bit(&mut self) -> Result<bool> {
        let byte = self
            .bytes
            .get(self.pos / 8)
            .ok_or_else(|| Error::Corruption("bypass section truncated".into()))?;
        let b = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    pub fn exp_golomb(&mut self) -> Result<u64> {
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 64 {
                return Err(Error::Corruption("Exp-Golomb prefix longer than 64 bits".into()));
            }
        }
        let mut x: u128 = 1;
        for _ in 0..zeros {
            x = (x << 1) | self.bit()? as u128;
        }
        u64::try_from(x - 1).map_err(|_| Error::Corruption("Exp-Golomb value overflows".into()))
    }

    pub fn bits_read(&self) -> usize {
        self.pos
    }
}
