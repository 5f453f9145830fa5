//! Linear algebra over GF(2): sparse columns as sorted index lists and dense
//! bit vectors with an incremental echelon basis.

/// `a += b` for sorted index lists.
pub fn col_add(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn col_add_assign(a: &mut Vec<usize>, b: &[usize]) {
    *a = col_add(a, b);
}

/// Sorted list with each index kept iff it occurs an odd number of times.
pub fn col_from_multiset(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Applies a sparse matrix (given by columns) to a sparse vector.
pub fn apply(cols: &[Vec<usize>], v: &[usize]) -> Vec<usize> {
    let mut acc = Vec::new();
    for &j in v {
        acc.extend_from_slice(&cols[j]);
    }
    col_from_multiset(acc)
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn zeros(len: usize) -> BitVec {
        BitVec { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_indices(len: usize, idx: &[usize]) -> BitVec {
        let mut b = BitVec::zeros(len);
        for &i in idx {
            b.toggle(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn set(&mut self, i: usize, v: bool) {
        if self.get(i) != v {
            self.toggle(i);
        }
    }

    pub fn xor_assign(&mut self, o: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Highest set index.
    pub fn top(&self) -> Option<usize> {
        for (k, w) in self.words.iter().enumerate().rev() {
            if *w != 0 {
                return Some(k * 64 + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

/// Echelon basis with provenance: each stored row remembers which inserted
/// vectors it is a combination of.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    rows: Vec<(usize, BitVec, BitVec)>,
    inserted: usize,
    cap: usize,
}

impl Echelon {
    /// `len` is the ambient dimension, `cap` bounds the number of insertions tracked.
    pub fn new(len: usize, cap: usize) -> Echelon {
        Echelon { len, rows: Vec::new(), inserted: 0, cap }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_with(&self, v: &BitVec) -> (BitVec, BitVec) {
        let mut v = v.clone();
        let mut c = BitVec::zeros(self.cap);
        for (p, r, rc) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
                c.xor_assign(rc);
            }
        }
        (v, c)
    }

    /// Canonical remainder of `v` modulo the span.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        self.reduce_with(v).0
    }

    /// Inserts `v`; returns whether it enlarged the span.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        assert_eq!(v.len(), self.len);
        assert!(self.inserted < self.cap, "echelon insertion capacity exceeded");
        let (r, mut c) = self.reduce_with(v);
        c.toggle(self.inserted);
        self.inserted += 1;
        match r.top() {
            Some(p) => {
                let pos = self.rows.iter().position(|(q, _, _)| *q < p).unwrap_or(self.rows.len());
                self.rows.insert(pos, (p, r, c));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Inserts `v`; if it was dependent, returns the relation among inserted
    /// vectors (including `v` itself) that sums to zero.
    pub fn insert_relation(&mut self, v: &BitVec) -> Option<BitVec> {
        let idx = self.inserted;
        let (r, mut c) = self.reduce_with(v);
        if self.insert(v) {
            None
        } else {
            debug_assert!(r.is_zero());
            c.toggle(idx);
            Some(c)
        }
    }

    /// Combination of inserted vectors summing to `v`, if `v` is in the span.
    pub fn solve(&self, v: &BitVec) -> Option<BitVec> {
        let (r, c) = self.reduce_with(v);
        if r.is_zero() {
            Some(c)
        } else {
            None
        }
    }
}

/// Rank of a family of sparse columns in an ambient space of dimension `n`.
pub fn rank(n: usize, cols: &[Vec<usize>]) -> usize {
    let mut e = Echelon::new(n, cols.len().max(1));
    cols.iter().filter(|c| e.insert(&BitVec::from_indices(n, c))).count()
}
