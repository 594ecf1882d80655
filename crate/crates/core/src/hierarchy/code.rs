//! Growable bit sets used as type codes.

use std::fmt;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Code {
    words: Vec<u64>,
}

impl Code {
    pub fn new() -> Self {
        Code { words: Vec::new() }
    }

    pub fn singleton(bit: usize) -> Self {
        let mut c = Code::new();
        c.set(bit);
        c
    }

    pub fn set(&mut self, bit: usize) {
        let w = bit / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (bit % 64);
    }

    pub fn clear(&mut self, bit: usize) {
        if let Some(w) = self.words.get_mut(bit / 64) {
            *w &= !(1 << (bit % 64));
        }
        self.trim();
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words.get(bit / 64).is_some_and(|w| w >> (bit % 64) & 1 == 1)
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn and(&self, other: &Code) -> Code {
        let mut words: Vec<u64> = self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect();
        while words.last() == Some(&0) {
            words.pop();
        }
        Code { words }
    }

    pub fn or(&self, other: &Code) -> Code {
        let mut c = self.clone();
        c.or_assign(other);
        c
    }

    pub fn or_assign(&mut self, other: &Code) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Code) -> bool {
        self.words.iter().enumerate().all(|(i, w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b))
    }

    /// Hex digits, most significant first; `0` for the empty set.
    pub fn to_hex(&self) -> String {
        if self.words.is_empty() {
            return "0".into();
        }
        let mut s = format!("{:x}", self.words.last().unwrap());
        for w in self.words.iter().rev().skip(1) {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

impl FromIterator<usize> for Code {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut c = Code::new();
        for b in iter {
            c.set(b);
        }
        c
    }
}
