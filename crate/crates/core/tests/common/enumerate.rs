//! Exhaustive enumeration of small barcodes.

use tpcalc::{Bar, Barcode, Q};

/// All barcodes whose minimal model has at most `weight` generators, with the
/// given endpoints and degrees.
pub fn barcodes_up_to(weight: usize, ends: &[Q], degs: &[i64]) -> Vec<Barcode> {
    let mut kinds = Vec::new();
    for &d in degs {
        for (i, &a) in ends.iter().enumerate() {
            kinds.push((Bar::infinite(a, d), 1));
            for &b in &ends[i + 1..] {
                kinds.push((Bar::finite(a, b, d), 2));
            }
        }
    }
    weighted(&kinds, weight)
}

/// All barcodes with at most `n` bars drawn from the given endpoints in one degree.
pub fn barcodes_with_bars(n: usize, ends: &[Q], deg: i64) -> Vec<Barcode> {
    let mut kinds = Vec::new();
    for (i, &a) in ends.iter().enumerate() {
        kinds.push((Bar::infinite(a, deg), 1));
        for &b in &ends[i + 1..] {
            kinds.push((Bar::finite(a, b, deg), 1));
        }
    }
    weighted(&kinds, n)
}

fn weighted(kinds: &[(Bar, usize)], weight: usize) -> Vec<Barcode> {
    let mut out = vec![(Vec::new(), 0usize, 0usize)];
    let mut k = 0;
    while k < out.len() {
        let (bars, w, from) = out[k].clone();
        for (t, (bar, bw)) in kinds.iter().enumerate().skip(from) {
            if w + bw <= weight {
                let mut nb = bars.clone();
                nb.push(*bar);
                out.push((nb, w + bw, t));
            }
        }
        k += 1;
    }
    out.into_iter().map(|(b, _, _)| Barcode::new(0, b)).collect()
}
