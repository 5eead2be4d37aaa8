//! Fixed-universe bitsets used for halfspaces (sets of points) and
//! orientations (sets of walls). Universes here are small (hundreds), so
//! everything is a handful of `u64` words.

type Block = u64;
const BITS: usize = Block::BITS as usize;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: usize,
    blocks: Vec<Block>,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            len,
            blocks: vec![0; len.div_ceil(BITS)],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, iter: I) -> Self {
        let mut b = Bits::new(len);
        for i in iter {
            b.set(i);
        }
        b
    }

    /// Universe size, not the number of set bits.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.blocks[i / BITS] |= 1 << (i % BITS);
    }

    pub fn clear(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.blocks[i / BITS] &= !(1 << (i % BITS));
    }

    pub fn assign(&mut self, i: usize, value: bool) {
        if value {
            self.set(i);
        } else {
            self.clear(i);
        }
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.blocks[i / BITS] & (1 << (i % BITS)) != 0
    }

    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.blocks[i / BITS] ^= 1 << (i % BITS);
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a ^ b)
    }

    /// Complement within the universe; trailing bits of the last block stay zero.
    pub fn complement(&self) -> Bits {
        let mut out = Bits {
            len: self.len,
            blocks: self.blocks.iter().map(|b| !b).collect(),
        };
        let tail = self.len % BITS;
        if tail != 0 {
            if let Some(last) = out.blocks.last_mut() {
                *last &= (1 << tail) - 1;
            }
        }
        out
    }

    fn zip_with(&self, other: &Bits, f: impl Fn(Block, Block) -> Block) -> Bits {
        debug_assert_eq!(self.len, other.len);
        Bits {
            len: self.len,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Clears all bits strictly below `i`.
    pub fn clear_below(&mut self, i: usize) {
        let full = i / BITS;
        for b in self.blocks.iter_mut().take(full) {
            *b = 0;
        }
        let rem = i % BITS;
        if rem != 0 && full < self.blocks.len() {
            self.blocks[full] &= !((1u64 << rem) - 1);
        }
    }

    /// Smallest set index, if any.
    pub fn first(&self) -> Option<usize> {
        for (w, &block) in self.blocks.iter().enumerate() {
            if block != 0 {
                return Some(w * BITS + block.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(w, &block)| {
            let mut b = block;
            std::iter::from_fn(move || {
                if b == 0 {
                    None
                } else {
                    let i = b.trailing_zeros() as usize;
                    b &= b - 1;
                    Some(w * BITS + i)
                }
            })
        })
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Bits {
    /// Universe is sized to fit the largest index; prefer `from_indices`
    /// when the universe is known.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let idx: Vec<usize> = iter.into_iter().collect();
        let len = idx.iter().max().map_or(0, |m| m + 1);
        Bits::from_indices(len, idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut b = Bits::new(130);
        b.set(0);
        b.set(64);
        b.set(129);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1));
        assert_eq!(b.count(), 3);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
    }

    #[test]
    fn complement_respects_universe() {
        let b = Bits::from_indices(70, [0, 69]);
        let c = b.complement();
        assert_eq!(c.count(), 68);
        assert!(!c.get(0) && !c.get(69) && c.get(1));
        assert!(b.union(&c).count() == 70);
    }

    #[test]
    fn subset_and_intersect() {
        let a = Bits::from_indices(10, [1, 2, 3]);
        let b = Bits::from_indices(10, [1, 2, 3, 7]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(a.intersects(&b));
        assert!(!a.intersects(&Bits::from_indices(10, [0, 9])));
    }
}
