use std::fmt;

use super::PlaneId;

pub const MAX_PLANES: usize = 128;

/// Set of hyperplane ids below [`MAX_PLANES`], stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PlaneSet(u128);

impl PlaneSet {
    pub const EMPTY: PlaneSet = PlaneSet(0);

    pub fn from_ids(ids: impl IntoIterator<Item = PlaneId>) -> Self {
        let mut s = PlaneSet::EMPTY;
        for id in ids {
            s.insert(id);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, id: PlaneId) {
        debug_assert!((id as usize) < MAX_PLANES);
        self.0 |= 1u128 << id;
    }

    #[inline]
    pub fn contains(self, id: PlaneId) -> bool {
        self.0 >> id & 1 == 1
    }

    #[inline]
    pub fn intersection(self, o: PlaneSet) -> PlaneSet {
        PlaneSet(self.0 & o.0)
    }

    #[inline]
    pub fn is_superset(self, o: PlaneSet) -> bool {
        self.0 & o.0 == o.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = PlaneId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let id = bits.trailing_zeros();
            bits &= bits - 1;
            Some(id)
        })
    }
}

impl fmt::Debug for PlaneSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a = PlaneSet::from_ids([0, 3, 5, 127]);
        let b = PlaneSet::from_ids([3, 5, 9]);
        assert_eq!(a.intersection(b).iter().collect::<Vec<_>>(), vec![3, 5]);
        assert!(a.is_superset(PlaneSet::from_ids([0, 127])));
        assert!(!a.is_superset(b));
        assert_eq!(a.len(), 4);
        assert!(a.contains(127) && !a.contains(1));
    }
}
