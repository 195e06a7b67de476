//! Permutations of {0, …, n−1}, used as the symmetric-group factor of every
//! smash product in this crate.

use std::fmt;

/// A permutation stored as its image vector: `perm.apply(i) = images[i]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<u8>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm { images: (0..n as u8).collect() }
    }

    /// From an image vector; must be a bijection.
    pub fn from_images(images: Vec<u8>) -> Perm {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            assert!((i as usize) < n && !seen[i as usize], "not a permutation");
            seen[i as usize] = true;
        }
        Perm { images }
    }

    /// The transposition i ↔ j.
    pub fn transposition(n: usize, i: usize, j: usize) -> Perm {
        let mut images: Vec<u8> = (0..n as u8).collect();
        images.swap(i, j);
        Perm { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    /// Group product: `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.n(), other.n());
        Perm { images: (0..self.n()).map(|i| self.images[other.apply(i)]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0u8; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v as usize] = i as u8;
        }
        Perm { images }
    }

    pub fn is_transposition(&self) -> Option<(usize, usize)> {
        let moved: Vec<usize> = (0..self.n()).filter(|&i| self.apply(i) != i).collect();
        if moved.len() == 2 && self.apply(moved[0]) == moved[1] {
            Some((moved[0], moved[1]))
        } else {
            None
        }
    }

    /// Permute slot-indexed labels: entry at slot `i` moves to slot `self(i)`.
    pub fn permute_labels<T: Clone + Default>(&self, labels: &[T]) -> Vec<T> {
        assert_eq!(labels.len(), self.n());
        let mut out = vec![T::default(); labels.len()];
        for (i, l) in labels.iter().enumerate() {
            out[self.apply(i)] = l.clone();
        }
        out
    }

    /// All permutations of degree n in lexicographic order of image vectors.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut v: Vec<u8> = (0..n as u8).collect();
        loop {
            out.push(Perm { images: v.clone() });
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| v[i] < v[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
            v.swap(i, j);
            v[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_inverse() {
        for p in Perm::all(4) {
            assert!(p.compose(&p.inverse()).is_identity());
            assert!(p.inverse().compose(&p).is_identity());
        }
        let s01 = Perm::transposition(3, 0, 1);
        let s12 = Perm::transposition(3, 1, 2);
        // (s01 ∘ s12)(2) = s01(1) = 0.
        assert_eq!(s01.compose(&s12).apply(2), 0);
    }

    #[test]
    fn all_permutations() {
        assert_eq!(Perm::all(1).len(), 1);
        assert_eq!(Perm::all(3).len(), 6);
        assert_eq!(Perm::all(4).len(), 24);
    }

    #[test]
    fn label_action_convention() {
        // sigma moves slot i content to slot sigma(i).
        let s = Perm::from_images(vec![1, 2, 0]);
        let labels = vec![10u8, 20, 30];
        assert_eq!(s.permute_labels(&labels), vec![30, 10, 20]);
    }
}
