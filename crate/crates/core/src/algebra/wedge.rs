use std::fmt;

use crate::error::{Error, Result};

/// Exponents of the fiber variables `X¹ … X^{2n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FiberMonomial(pub Vec<u32>);

impl FiberMonomial {
    pub fn one(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// The single variable `X^{k+1}`.
    pub fn var(dim: usize, k: usize) -> Self {
        let mut e = vec![0; dim];
        e[k] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Number of `X` factors.
    pub fn len(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// A canonical wedge word `dq^{j₁}∧…∧dq^{j_m}` with strictly increasing
/// 0-based indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct WedgeWord(Vec<u8>);

impl WedgeWord {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds a word from indices that are already strictly increasing.
    pub fn from_sorted(indices: &[usize]) -> Option<Self> {
        if indices.windows(2).all(|w| w[0] < w[1]) {
            Some(Self(indices.iter().map(|&i| i as u8).collect()))
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.binary_search(&(k as u8)).is_ok()
    }

    /// `dq^k ∧ self`, normalized. `None` when `k` already occurs.
    pub fn prepend(&self, k: usize) -> Option<(Self, i8)> {
        let k = k as u8;
        match self.0.binary_search(&k) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, k);
                Some((Self(v), if pos % 2 == 0 { 1 } else { -1 }))
            }
        }
    }

    /// The word with its `pos`-th factor removed.
    pub fn remove_at(&self, pos: usize) -> Self {
        let mut v = self.0.clone();
        v.remove(pos);
        Self(v)
    }

    /// `self ∧ other`, normalized. `None` when the words share an index.
    pub fn concat(&self, other: &Self) -> Option<(Self, i8)> {
        if other.0.is_empty() {
            return Some((self.clone(), 1));
        }
        if self.0.is_empty() {
            return Some((other.clone(), 1));
        }
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let mut inversions = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    inversions += self.0.len() - i;
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return None,
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Some((Self(out), if inversions.is_multiple_of(2) { 1 } else { -1 }))
    }
}

impl fmt::Display for WedgeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| format!("dq{}", i + 1)).collect();
        write!(f, "{}", parts.join("^"))
    }
}

/// Sorts a sequence of 0-based form indices into a canonical word and
/// returns the permutation sign. A repeated index gives the empty word with
/// sign 0.
pub fn wedge_normalize(indices: &[usize], dim: usize) -> Result<(WedgeWord, i8)> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, dim });
    }
    let mut v: Vec<u8> = indices.iter().map(|&i| i as u8).collect();
    let mut sign = 1i8;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return Ok((WedgeWord::empty(), 0));
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Ok((WedgeWord::empty(), 0));
    }
    Ok((WedgeWord(v), sign))
}
