use serde::{Deserialize, Serialize};

/// Subset `a` of an index set (outcomes or outcome sequences); members are
/// assigned to hypothesis H0, the complement `ā` to H1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupingMask {
    bits: Vec<bool>,
}

impl GroupingMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_members(len: usize, members: &[usize]) -> Self {
        let mut bits = vec![false; len];
        for &i in members {
            bits[i] = true;
        }
        Self { bits }
    }

    /// Mask from the low `len` bits of `word`.
    pub fn from_word(len: usize, word: u64) -> Self {
        Self {
            bits: (0..len).map(|i| word >> i & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn members(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Empty or full masks decide the same way on every input.
    pub fn is_trivial(&self) -> bool {
        self.bits.iter().all(|&b| b) || self.bits.iter().all(|&b| !b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_and_members_agree() {
        let m = GroupingMask::from_word(4, 0b1010);
        assert_eq!(m.members(), vec![1, 3]);
        assert_eq!(m, GroupingMask::from_members(4, &[3, 1]));
        assert_eq!(m.complement().members(), vec![0, 2]);
        assert!(!m.is_trivial());
        assert!(GroupingMask::from_word(3, 0).is_trivial());
        assert!(GroupingMask::from_word(3, 0b111).is_trivial());
    }
}
