use crate::error::{Error, Result};
use crate::model::Shape;

pub const PRECISION_BITS: u32 = 16;
pub const TOTAL_FREQ: u32 = 1 << PRECISION_BITS;
pub const MAX_SLOTS: usize = 256;
/// Largest `K` in the regular support `[−K, K]`; 255 regular slots plus escape.
pub const MAX_HALF_WIDTH: u32 = 127;
/// Support grows until the mass beyond `±(K + ½)` drops below `2⁻¹⁷`.
const SUPPORT_TAIL: f64 = 1.0 / (1u64 << 17) as f64;

/// Integer cumulative frequencies for the symbols `[−K, K]` followed by one
/// escape slot. Every slot owns at least one of the `2¹⁶` counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdfTable {
    half_width: u32,
    /// `cum[s]` is the first count of slot `s`; `cum[slots] = 2¹⁶`.
    cum: Vec<u32>,
}

impl CdfTable {
    /// Quantizes the zero-center PMF of shape `shape` at scale `alpha`.
    pub(crate) fn from_shape(shape: &Shape, alpha: f64) -> Self {
        let mut edge = shape.edge(0.5 / alpha);
        let mut half = vec![edge.p];
        let mut k = 0u32;
        while edge.q >= SUPPORT_TAIL && k < MAX_HALF_WIDTH {
            k += 1;
            let next = shape.edge((k as f64 + 0.5) / alpha);
            half.push(shape.mass(&edge, &next).0);
            edge = next;
        }
        let mut probs: Vec<f64> = half.iter().rev().chain(half.iter().skip(1)).copied().collect();
        probs.push(edge.q);
        Self::from_probs(k, &probs)
    }

    /// Builds a table from `2K + 2` nonnegative weights (regular slots then
    /// escape). Each slot first receives one count; the remaining counts are
    /// split by floor plus largest remainder, ties going to the lower slot.
    pub fn from_probs(half_width: u32, probs: &[f64]) -> Self {
        let slots = 2 * half_width as usize + 2;
        assert_eq!(probs.len(), slots, "expected 2K + 2 weights");
        assert!(slots <= MAX_SLOTS, "table exceeds {MAX_SLOTS} slots");
        let sum: f64 = probs.iter().sum();
        let spare = (TOTAL_FREQ as usize - slots) as f64;
        let mut counts = Vec::with_capacity(slots);
        let mut remainders = Vec::with_capacity(slots);
        let mut assigned = 0u64;
        for &p in probs {
            let x = if sum > 0.0 { p.max(0.0) / sum * spare } else { 0.0 };
            let f = x.floor();
            counts.push(1 + f as u32);
            remainders.push(x - f);
            assigned += f as u64;
        }
        let leftover = spare as u64 - assigned;
        let mut order: Vec<usize> = (0..slots).collect();
        order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
        for &i in order.iter().take(leftover as usize) {
            counts[i] += 1;
        }
        let mut cum = Vec::with_capacity(slots + 1);
        let mut acc = 0u32;
        cum.push(0);
        for c in counts {
            acc += c;
            cum.push(acc);
        }
        debug_assert_eq!(acc, TOTAL_FREQ);
        Self { half_width, cum }
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    /// Symbol coded by slot 0.
    pub fn offset(&self) -> i64 {
        -(self.half_width as i64)
    }

    /// Number of slots including the escape slot.
    pub fn slots(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn escape_slot(&self) -> usize {
        self.slots() - 1
    }

    pub fn cum(&self) -> &[u32] {
        &self.cum
    }

    /// Slot of `symbol`, or `None` when it must be escaped.
    pub fn slot_of(&self, symbol: i64) -> Option<usize> {
        let k = self.half_width as i64;
        (-k..=k).contains(&symbol).then(|| (symbol + k) as usize)
    }

    pub fn symbol_of(&self, slot: usize) -> i64 {
        slot as i64 + self.offset()
    }

    /// `(start, size)` of `slot` in the cumulative counts.
    pub fn range(&self, slot: usize) -> (u32, u32) {
        (self.cum[slot], self.cum[slot + 1] - self.cum[slot])
    }

    /// Slot whose count range contains `target < 2¹⁶`.
    pub fn find(&self, target: u32) -> usize {
        self.cum.partition_point(|&c| c <= target) - 1
    }

    pub fn prob(&self, slot: usize) -> f64 {
        self.range(slot).1 as f64 / TOTAL_FREQ as f64
    }

    pub(crate) fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.offset() as i16).to_le_bytes());
        out.extend_from_slice(&(self.slots() as u16).to_le_bytes());
        for &c in &self.cum[..self.slots()] {
            out.extend_from_slice(&(c as u16).to_le_bytes());
        }
    }

    pub(crate) fn read(bytes: &[u8], pos: &mut usize) -> Result<Self> {
        let offset = i16::from_le_bytes(take::<2>(bytes, pos)?) as i64;
        let slots = u16::from_le_bytes(take::<2>(bytes, pos)?) as usize;
        if !(2..=MAX_SLOTS).contains(&slots) || !slots.is_multiple_of(2) || offset != -((slots as i64 - 2) / 2) {
            return Err(Error::Corruption(format!(
                "table with offset {offset} and {slots} slots"
            )));
        }
        let mut cum = Vec::with_capacity(slots + 1);
        for _ in 0..slots {
            cum.push(u16::from_le_bytes(take::<2>(bytes, pos)?) as u32);
        }
        cum.push(TOTAL_FREQ);
        if cum[0] != 0 || cum.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Corruption("cumulative counts not strictly increasing".into()));
        }
        Ok(Self {
            half_width: (slots as u32 - 2) / 2,
            cum,
        })
    }
}

pub(crate) fn take<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = pos
        .checked_add(N)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Corruption(format!("unexpected end of data at byte {}", *pos)))?;
    let mut buf = [0u8; N];
    buf.copy_from_slice(&bytes[*pos..end]);
    *pos = end;
    Ok(buf)
}
