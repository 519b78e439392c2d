use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Monomials of total degree at most `degree` in `dim` variables, in
/// graded-lexicographic order: by total degree, then by descending exponent
/// vector (`x1` before `x2`). The first monomial is the constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    dim: usize,
    degree: usize,
    exponents: Vec<Vec<u32>>,
}

pub fn monomial_basis(dim: usize, degree: usize) -> MonomialBasis {
    let mut exponents = Vec::new();
    let mut current = vec![0u32; dim];
    for total in 0..=degree {
        push_compositions(total as u32, 0, &mut current, &mut exponents);
    }
    MonomialBasis { dim, degree, exponents }
}

// Exponent vectors with the given remaining sum, first coordinate largest first.
fn push_compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    if current.is_empty() {
        out.push(Vec::new());
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_compositions(remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

impl MonomialBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    /// Value of every monomial at `x`.
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| e.iter().zip(x).map(|(&k, &xi)| ipow(xi, k)).product())
            .collect()
    }
}

fn ipow(x: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * x)
}

/// `sum_k c_k * prod_j x_j^(e_kj)`.
pub fn eval_poly(coeffs: &[f64], basis: &MonomialBasis, x: &[f64]) -> Result<f64> {
    if coeffs.len() != basis.len() {
        return Err(Error::LengthMismatch { expected: basis.len(), found: coeffs.len() });
    }
    if x.len() != basis.dim() {
        return Err(Error::LengthMismatch { expected: basis.dim(), found: x.len() });
    }
    Ok(coeffs.iter().zip(basis.features(x)).map(|(c, m)| c * m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    // All exponent vectors in [0, r]^d with sum <= r, by brute force.
    fn brute_force_count(d: usize, r: usize) -> usize {
        let mut count = 0;
        let total = (r + 1).pow(d as u32);
        for code in 0..total {
            let mut c = code;
            let mut sum = 0;
            for _ in 0..d {
                sum += c % (r + 1);
                c /= r + 1;
            }
            if sum <= r {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn small_bases() {
        assert_eq!(monomial_basis(2, 0).exponents(), &[vec![0, 0]]);
        assert_eq!(monomial_basis(2, 1).exponents(), &[vec![0, 0], vec![1, 0], vec![0, 1]]);
        let quad = monomial_basis(2, 2);
        assert_eq!(quad.len(), brute_force_count(2, 2));
        assert_eq!(quad.len(), 6);
        assert_eq!(quad.exponents()[3], vec![2, 0]);
        assert_eq!(quad.exponents()[4], vec![1, 1]);
        assert_eq!(quad.exponents()[5], vec![0, 2]);
    }

    #[test]
    fn sizes_match_enumeration() {
        for d in 1..=4 {
            for r in 0..=4 {
                let b = monomial_basis(d, r);
                assert_eq!(b.len(), brute_force_count(d, r));
                assert_eq!(b.len(), binomial(r + d, d));
                assert!(b.exponents()[0].iter().all(|&e| e == 0));
                // Graded order: degrees never decrease.
                let degrees: Vec<u32> = b.exponents().iter().map(|e| e.iter().sum()).collect();
                assert!(degrees.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn evaluation_examples() {
        let b1 = monomial_basis(2, 1);
        assert_eq!(eval_poly(&[1.0, 2.0, 3.0], &b1, &[0.5, 0.5]).unwrap(), 3.5);
        assert_eq!(eval_poly(&[0.0; 3], &b1, &[0.2, 0.9]).unwrap(), 0.0);
        let b2 = monomial_basis(2, 2);
        let x = [3.0f64, 1.0];
        assert_eq!(eval_poly(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], &b2, &x).unwrap(), x[0].powi(2));
        assert_eq!(
            eval_poly(&[1.0, 2.0], &b1, &[0.0, 0.0]).unwrap_err(),
            Error::LengthMismatch { expected: 3, found: 2 }
        );
    }

    proptest! {
        #[test]
        fn affine_basis_matches_dot_product(
            w in proptest::collection::vec(-10.0f64..10.0, 3),
            bias in -10.0f64..10.0,
            x in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            let b = monomial_basis(3, 1);
            let mut c = vec![bias];
            c.extend_from_slice(&w);
            let direct = bias + w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            prop_assert!((eval_poly(&c, &b, &x).unwrap() - direct).abs() <= 1e-12);
        }
    }
}
