//! Characteristic polynomials as the canonical fingerprint of a spectrum.
//!
//! Two matrices have the same spectrum counting multiplicities exactly when
//! their characteristic polynomials agree, so spectrum comparisons never
//! need eigenvalues.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use alloc::vec;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::matrix::{integer_form, Matrix};
use crate::scalar::Scalar;

/// Monic `det(xI - A)`, coefficients ordered from the highest degree down.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CharPoly {
    coeffs: Vec<Scalar>,
}

impl CharPoly {
    /// Builds from explicit coefficients; `None` unless monic and nonconstant.
    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Option<Self> {
        if coeffs.len() >= 2 && coeffs[0].is_one() {
            Some(CharPoly { coeffs })
        } else {
            None
        }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }
}

/// Faddeev-LeVerrier on the integer matrix `B = dA`, `d` the lcm of the
/// denominators. Over the integers every step is exact (the division by `k`
/// leaves no remainder), and `c_k(A) = c_k(B) / d^k`.
pub fn charpoly(a: &Matrix) -> CharPoly {
    let n = a.n();
    let (b, d) = integer_form(a.entries());
    let mul = |x: &[BigInt], y: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = &x[i * n + k];
                if xik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += xik * &y[k * n + j];
                }
            }
        }
        out
    };
    let mut ints = Vec::with_capacity(n + 1);
    ints.push(BigInt::one());
    let mut m = vec![BigInt::zero(); n * n];
    for k in 1..=n {
        // M_k = B M_{k-1} + c_{k-1} I, c_k = -tr(B M_k) / k
        let mut next = mul(&b, &m);
        for i in 0..n {
            next[i * n + i] += &ints[k - 1];
        }
        let bm = mul(&b, &next);
        let tr: BigInt = (0..n).map(|i| &bm[i * n + i]).sum();
        ints.push(-(tr / BigInt::from(k)));
        m = next;
    }
    let mut scale = BigInt::one();
    let coeffs = ints
        .into_iter()
        .map(|c| {
            let v = Scalar::from_bigints(c, scale.clone()).expect("nonzero denominator");
            scale *= &d;
            v
        })
        .collect();
    CharPoly { coeffs }
}

pub fn trace(a: &Matrix) -> Scalar {
    a.trace()
}

/// `spec(A) = spec(B)` with multiplicity.
pub fn same_spectrum(a: &Matrix, b: &Matrix) -> bool {
    a.n() == b.n() && charpoly(a) == charpoly(b)
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            let p = n - k;
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() || p == 0 {
                write!(out, "{mag}")?;
            }
            match p {
                0 => {}
                1 => out.push('λ'),
                _ => write!(out, "λ^{p}")?,
            }
        }
        f.write_str(&out)
    }
}
