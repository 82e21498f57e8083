//! Dense mixed-radix indexing for finite product spaces.
//!
//! Type profiles, bid profiles, strategy profiles and outcome maps are all
//! elements of finite cartesian products. Each product is addressed by a
//! single dense index whose numeric order equals lexicographic order of the
//! coordinate tuple (first coordinate most significant). This fixes the
//! deterministic iteration order used by every solver in the crate.

/// A finite cartesian product of `dims[k]`-element coordinate sets.
///
/// The empty product (no coordinates) has exactly one element, the empty
/// tuple, with index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSpace {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProductSpace {
    /// Builds the space; every dimension must be positive and the total
    /// size must fit in `usize`.
    pub fn new(dims: Vec<usize>) -> Self {
        assert!(dims.iter().all(|&d| d > 0), "empty coordinate set");
        let mut strides = vec![1usize; dims.len()];
        let mut len = 1usize;
        for k in (0..dims.len()).rev() {
            strides[k] = len;
            len = len.checked_mul(dims[k]).expect("product space too large");
        }
        ProductSpace { dims, strides, len }
    }

    /// Total element count as `u128`, usable for budget checks before
    /// committing to enumeration.
    pub fn count(dims: &[usize]) -> u128 {
        dims.iter().map(|&d| d as u128).product()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // the empty product still has one element
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Index of a coordinate tuple.
    pub fn index_of(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.dims.len());
        debug_assert!(tuple.iter().zip(&self.dims).all(|(&c, &d)| c < d));
        tuple.iter().zip(&self.strides).map(|(&c, &s)| c * s).sum()
    }

    /// Coordinate tuple of an index.
    pub fn tuple_of(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.len);
        let mut rest = index;
        self.strides
            .iter()
            .zip(&self.dims)
            .map(|(&s, &d)| {
                let c = (rest / s) % d;
                rest -= c * s;
                c
            })
            .collect()
    }

    /// Single coordinate of an index, without allocating the tuple.
    pub fn coordinate(&self, index: usize, pos: usize) -> usize {
        (index / self.strides[pos]) % self.dims[pos]
    }

    /// All tuples in index (= lexicographic) order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len).map(|i| self.tuple_of(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_indices() {
        let s = ProductSpace::new(vec![2, 3, 2]);
        assert_eq!(s.len(), 12);
        for i in 0..s.len() {
            let t = s.tuple_of(i);
            assert_eq!(s.index_of(&t), i);
            for (p, &c) in t.iter().enumerate() {
                assert_eq!(s.coordinate(i, p), c);
            }
        }
    }

    #[test]
    fn index_order_is_lexicographic() {
        let s = ProductSpace::new(vec![2, 3]);
        let tuples: Vec<_> = s.iter().collect();
        let mut sorted = tuples.clone();
        sorted.sort();
        assert_eq!(tuples, sorted);
        assert_eq!(tuples[0], vec![0, 0]);
        assert_eq!(tuples[1], vec![0, 1]);
        assert_eq!(tuples[5], vec![1, 2]);
    }

    #[test]
    fn empty_product_has_one_element() {
        let s = ProductSpace::new(vec![]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.tuple_of(0), Vec::<usize>::new());
        assert_eq!(s.index_of(&[]), 0);
    }
}
