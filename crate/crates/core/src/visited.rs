//! Visited-site sets for long walks.
//!
//! Three representations with identical observable behaviour:
//! a closed interval (a nearest-neighbour walk on ℤ always has visited an
//! interval), a paged bitmap keyed by packed block coordinates for low
//! dimensions, and a hash set of packed coordinates otherwise.

use rustc_hash::{FxHashMap, FxHashSet};

/// Sites per block page: 2^12 bits.
const BLOCK_BITS: u32 = 12;
const WORDS_PER_BLOCK: usize = 1 << (BLOCK_BITS - 6);

/// Packs coordinates into a u128 with `128 / d` bits each (at most 64).
/// Panics if a coordinate does not fit; that needs a walk of more than
/// 2^(128/d − 1) steps in one direction.
#[inline]
pub(crate) fn pack(coords: &[i64]) -> u128 {
    let d = coords.len();
    let bits = (128 / d as u32).min(64);
    if bits == 64 {
        let mut key = 0u128;
        for &c in coords {
            key = (key << 64) | (c as u64) as u128;
        }
        return key;
    }
    let half = 1i64 << (bits - 1);
    let mut key = 0u128;
    for &c in coords {
        assert!(
            (-half..half).contains(&c),
            "coordinate {c} exceeds the packable range for dimension {d}"
        );
        key = (key << bits) | (c + half) as u128;
    }
    key
}

#[derive(Clone, Debug)]
pub struct BlockSet {
    shift: u32,
    mask: i64,
    index: FxHashMap<u128, u32>,
    blocks: Vec<[u64; WORDS_PER_BLOCK]>,
    last: Option<(u128, u32)>,
    len: usize,
    scratch: Vec<i64>,
}

impl BlockSet {
    pub fn new(dim: usize) -> Self {
        let shift = (BLOCK_BITS / dim as u32).max(1);
        BlockSet {
            shift,
            mask: (1i64 << shift) - 1,
            index: FxHashMap::default(),
            blocks: Vec::new(),
            last: None,
            len: 0,
            scratch: vec![0; dim],
        }
    }

    #[inline]
    fn locate(&mut self, coords: &[i64], create: bool) -> Option<(u32, usize)> {
        let mut bit = 0usize;
        for (i, &c) in coords.iter().enumerate() {
            self.scratch[i] = c >> self.shift;
            bit |= ((c & self.mask) as usize) << (self.shift as usize * i);
        }
        let key = pack(&self.scratch);
        let block = match self.last {
            Some((k, b)) if k == key => b,
            _ => {
                let b = match self.index.get(&key) {
                    Some(&b) => b,
                    None if create => {
                        let b = self.blocks.len() as u32;
                        self.blocks.push([0; WORDS_PER_BLOCK]);
                        self.index.insert(key, b);
                        b
                    }
                    None => return None,
                };
                self.last = Some((key, b));
                b
            }
        };
        Some((block, bit))
    }

    #[inline]
    pub fn insert(&mut self, coords: &[i64]) -> bool {
        let (block, bit) = self.locate(coords, true).expect("created on demand");
        let word = &mut self.blocks[block as usize][bit >> 6];
        let m = 1u64 << (bit & 63);
        let fresh = *word & m == 0;
        *word |= m;
        self.len += usize::from(fresh);
        fresh
    }

    pub fn contains(&mut self, coords: &[i64]) -> bool {
        match self.locate(coords, false) {
            Some((block, bit)) => self.blocks[block as usize][bit >> 6] & (1u64 << (bit & 63)) != 0,
            None => false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }
}

#[derive(Clone, Debug)]
pub enum VisitedSet {
    Interval { lo: i64, hi: i64, len: usize },
    Blocks(BlockSet),
    Hashed(FxHashSet<u128>),
}

impl VisitedSet {
    /// Picks the representation for `dim`.
    pub fn for_dimension(dim: usize) -> Self {
        match dim {
            1 => VisitedSet::Interval { lo: 0, hi: -1, len: 0 },
            2 => VisitedSet::Blocks(BlockSet::new(dim)),
            _ => VisitedSet::Hashed(FxHashSet::default()),
        }
    }

    /// Returns true if the site was not present before.
    #[inline]
    pub fn insert(&mut self, coords: &[i64]) -> bool {
        match self {
            VisitedSet::Interval { lo, hi, len } => {
                let x = coords[0];
                if *len == 0 {
                    *lo = x;
                    *hi = x;
                    *len = 1;
                    true
                } else if x >= *lo && x <= *hi {
                    false
                } else if x == *hi + 1 {
                    *hi = x;
                    *len += 1;
                    true
                } else if x == *lo - 1 {
                    *lo = x;
                    *len += 1;
                    true
                } else {
                    // a jump: the set stops being an interval
                    let mut set: FxHashSet<u128> = (*lo..=*hi).map(|v| pack(&[v])).collect();
                    set.insert(pack(coords));
                    *self = VisitedSet::Hashed(set);
                    true
                }
            }
            VisitedSet::Blocks(b) => b.insert(coords),
            VisitedSet::Hashed(s) => s.insert(pack(coords)),
        }
    }

    pub fn contains(&mut self, coords: &[i64]) -> bool {
        match self {
            VisitedSet::Interval { lo, hi, len } => *len > 0 && coords[0] >= *lo && coords[0] <= *hi,
            VisitedSet::Blocks(b) => b.contains(coords),
            VisitedSet::Hashed(s) => s.contains(&pack(coords)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            VisitedSet::Interval { len, .. } => *len,
            VisitedSet::Blocks(b) => b.len(),
            VisitedSet::Hashed(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn pack_is_injective_on_small_boxes() {
        let mut seen = HashSet::new();
        for x in -3..=3 {
            for y in -3..=3 {
                for z in -3..=3 {
                    assert!(seen.insert(pack(&[x, y, z])));
                }
            }
        }
        assert_ne!(pack(&[-1, 0]), pack(&[0, -1]));
        assert_ne!(pack(&[i64::MIN, 5]), pack(&[i64::MAX, 5]));
    }

    #[test]
    fn interval_upgrades_on_jump() {
        let mut v = VisitedSet::for_dimension(1);
        assert!(v.insert(&[0]));
        assert!(v.insert(&[1]));
        assert!(!v.insert(&[0]));
        assert!(v.insert(&[5]));
        assert!(matches!(v, VisitedSet::Hashed(_)));
        assert_eq!(v.len(), 3);
        assert!(v.contains(&[5]) && v.contains(&[1]) && !v.contains(&[3]));
    }

    fn walk_points(dim: usize, moves: &[(usize, bool)]) -> Vec<Vec<i64>> {
        let mut p = vec![0i64; dim];
        let mut out = vec![p.clone()];
        for &(axis, plus) in moves {
            p[axis % dim] += if plus { 1 } else { -1 };
            out.push(p.clone());
        }
        out
    }

    proptest! {
        #[test]
        fn representations_agree(
            dim in 1usize..=5,
            moves in prop::collection::vec((0usize..5, any::<bool>()), 0..600),
        ) {
            let pts = walk_points(dim, &moves);
            let mut reference = HashSet::new();
            let mut variants = vec![
                VisitedSet::for_dimension(dim),
                VisitedSet::Blocks(BlockSet::new(dim)),
                VisitedSet::Hashed(FxHashSet::default()),
            ];
            for p in &pts {
                let fresh = reference.insert(p.clone());
                for v in variants.iter_mut() {
                    prop_assert_eq!(v.insert(p), fresh);
                }
            }
            for v in variants.iter_mut() {
                prop_assert_eq!(v.len(), reference.len());
                for p in &pts {
                    prop_assert!(v.contains(p));
                }
            }
        }
    }
}
