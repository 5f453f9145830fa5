//! Small dense GF(2) linear algebra on 256-bit vectors, used only by the test oracles.

#![allow(dead_code)]

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Debug)]
pub struct Bv(pub [u64; 4]);

pub const BITS: usize = 256;

impl Bv {
    pub fn zero() -> Bv {
        Bv([0; 4])
    }

    pub fn unit(i: usize) -> Bv {
        assert!(i < BITS, "oracle vector overflow");
        let mut b = Bv::zero();
        b.0[i / 64] = 1u64 << (i % 64);
        b
    }

    pub fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor(&self, o: &Bv) -> Bv {
        Bv([self.0[0] ^ o.0[0], self.0[1] ^ o.0[1], self.0[2] ^ o.0[2], self.0[3] ^ o.0[3]])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn lead(&self) -> Option<usize> {
        for w in (0..4).rev() {
            if self.0[w] != 0 {
                return Some(w * 64 + 63 - self.0[w].leading_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..BITS).filter(|&i| self.get(i)).collect()
    }
}

/// Row echelon form keyed by leading bit.
#[derive(Clone, Default)]
pub struct Echelon {
    rows: Vec<(usize, Bv)>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon { rows: Vec::new() }
    }

    /// Canonical representative modulo the span: no pivot bit survives.
    pub fn reduce(&self, v: &Bv) -> Bv {
        let mut v = *v;
        for (p, r) in &self.rows {
            if v.get(*p) {
                v = v.xor(r);
            }
        }
        v
    }

    /// Adds `v`; returns whether it was independent.
    pub fn insert(&mut self, v: &Bv) -> bool {
        let r = self.reduce(v);
        match r.lead() {
            Some(l) => {
                let pos = self.rows.iter().position(|(p, _)| *p < l).unwrap_or(self.rows.len());
                self.rows.insert(pos, (l, r));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &Bv) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Kernel of the linear map sending the `i`-th unknown to `images[i]`, as
/// combination vectors over the unknowns.
pub fn kernel(images: &[Bv]) -> Vec<Bv> {
    assert!(images.len() <= BITS);
    // rows: (image, combination)
    let mut piv: Vec<(usize, Bv, Bv)> = Vec::new();
    let mut ker = Vec::new();
    for (i, img) in images.iter().enumerate() {
        let mut v = *img;
        let mut c = Bv::unit(i);
        loop {
            match v.lead() {
                None => {
                    ker.push(c);
                    break;
                }
                Some(l) => match piv.iter().find(|(p, _, _)| *p == l) {
                    Some((_, pv, pc)) => {
                        v = v.xor(pv);
                        c = c.xor(pc);
                    }
                    None => {
                        piv.push((l, v, c));
                        break;
                    }
                },
            }
        }
    }
    ker
}

/// Solves `Σ x_i images[i] = target`; returns a combination if solvable.
pub fn solve(images: &[Bv], target: &Bv) -> Option<Bv> {
    let mut piv: Vec<(usize, Bv, Bv)> = Vec::new();
    for (i, img) in images.iter().enumerate() {
        let mut v = *img;
        let mut c = Bv::unit(i);
        while let Some(l) = v.lead() {
            match piv.iter().find(|(p, _, _)| *p == l) {
                Some((_, pv, pc)) => {
                    v = v.xor(pv);
                    c = c.xor(pc);
                }
                None => {
                    piv.push((l, v, c));
                    break;
                }
            }
        }
    }
    let mut v = *target;
    let mut c = Bv::zero();
    while let Some(l) = v.lead() {
        let (_, pv, pc) = piv.iter().find(|(p, _, _)| *p == l)?;
        v = v.xor(pv);
        c = c.xor(pc);
    }
    Some(c)
}

/// Rank of a list of vectors.
pub fn rank(vs: &[Bv]) -> usize {
    let mut e = Echelon::new();
    vs.iter().filter(|v| e.insert(v)).count()
}
