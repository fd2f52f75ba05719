//! Reference six-site pseudometrics `P_2 … P_5`, transcribed entry by entry
//! in terms of the shape parameters β, γ, δ.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use ptwell_core::Rational;

pub fn six_site(k: usize, lambda: Rational) -> Option<DMatrix<Rational>> {
    let o = Rational::one();
    let z = Rational::zero();
    let b = o - lambda;
    let g = (o - lambda) / (o + lambda * lambda);
    let d = o / (o + lambda * lambda);
    #[rustfmt::skip]
    let rows = match k {
        2 => [
            z, b, z, z, z, z,
            b, z, o, z, z, z,
            z, o, z, o, z, z,
            z, z, o, z, o, z,
            z, z, z, o, z, b,
            z, z, z, z, b, z,
        ],
        3 => [
            z, z, g, z, z, z,
            z, d, z, d, z, z,
            g, z, o, z, d, z,
            z, d, z, o, z, g,
            z, z, d, z, d, z,
            z, z, z, g, z, z,
        ],
        4 => [
            z, z, z, g, z, z,
            z, z, d, z, d, z,
            z, d, z, o, z, g,
            g, z, o, z, d, z,
            z, d, z, d, z, z,
            z, z, g, z, z, z,
        ],
        5 => [
            z, z, z, z, b, z,
            z, z, z, o, z, b,
            z, z, o, z, o, z,
            z, o, z, o, z, z,
            b, z, o, z, z, z,
            z, b, z, z, z, z,
        ],
        _ => return None,
    };
    Some(DMatrix::from_row_slice(6, 6, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_coupling_values() {
        let p3 = six_site(3, Rational::new(1, 2)).unwrap();
        assert_eq!(p3[(0, 2)], Rational::new(2, 5));
        assert_eq!(p3[(1, 1)], Rational::new(4, 5));
        assert!(six_site(6, Rational::new(1, 2)).is_none());
    }
}
