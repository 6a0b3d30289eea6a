//! Exact sums over index ranges, split across rayon workers when the
//! `parallel` feature is on and the caller asks for it.

use num_traits::Zero;

use crate::complex::ComplexRat;

const BLOCK: usize = 1 << 10;

fn block_sum<F: Fn(usize) -> ComplexRat>(lo: usize, hi: usize, f: &F) -> ComplexRat {
    let mut acc = ComplexRat::zero();
    for x in lo..hi {
        let v = f(x);
        if !v.is_zero() {
            acc += &v;
        }
    }
    acc
}

/// `Σ_{x < n} f(x)`.
pub(crate) fn sum_range<F>(n: usize, parallel: bool, f: F) -> ComplexRat
where
    F: Fn(usize) -> ComplexRat + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel && n > BLOCK {
        use rayon::prelude::*;
        let blocks = n.div_ceil(BLOCK);
        return (0..blocks)
            .into_par_iter()
            .map(|b| block_sum(b * BLOCK, ((b + 1) * BLOCK).min(n), &f))
            .reduce(ComplexRat::zero, |a, b| a + b);
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    block_sum(0, n, &f)
}

/// `Π_i xs[i]`, as a balanced tree so operand sizes stay even.
pub(crate) fn product_all(xs: Vec<ComplexRat>, parallel: bool) -> ComplexRat {
    #[cfg(feature = "parallel")]
    if parallel && xs.len() > BLOCK {
        use rayon::prelude::*;
        return xs.into_par_iter().reduce(num_traits::One::one, |a, b| a * b);
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    let mut layer = xs;
    if layer.is_empty() {
        return num_traits::One::one();
    }
    while layer.len() > 1 {
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        layer = next;
    }
    layer.pop().unwrap()
}

