//! Plug-in entropy helpers on raw mass vectors.

/// `-p log2 p`, with `0 log 0 = 0`.
#[inline]
pub fn neg_xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        -p * libm::log2(p)
    } else {
        0.0
    }
}

/// Shannon entropy in bits of a (not necessarily normalized) mass vector.
pub fn entropy_of(mass: &[f64]) -> f64 {
    mass.iter().map(|&p| neg_xlog2x(p)).sum()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    neg_xlog2x(p) + neg_xlog2x(1.0 - p)
}
