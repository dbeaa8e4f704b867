//! Untruncated elements of `Z[zeta_p]` with arbitrary-precision coefficients.
//!
//! There is deliberately no conversion from [`RingElement`]: a residue class mod
//! `p^K` does not determine an element of `Z[zeta]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::context::PrimeContext;
use crate::error::{Error, Result};
use crate::ring::RingElement;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactElement {
    p: u64,
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for ExactElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactElement(p={}, [{}])", self.p, self)
    }
}

impl fmt::Display for ExactElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(BigInt::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parse one decimal integer: optional `-`, then ASCII digits only.
pub fn parse_decimal(s: &str) -> Result<BigInt> {
    let t = s.trim();
    let digits = t.strip_prefix('-').unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(s.to_string()));
    }
    t.parse().map_err(|_| Error::Parse(s.to_string()))
}

/// Parse the literal `c0,c1,...,c_{p-2}`.
pub fn parse_coeff_list(s: &str) -> Result<Vec<BigInt>> {
    s.split(',').map(parse_decimal).collect()
}

impl ExactElement {
    pub fn new(p: u64, coeffs: Vec<BigInt>) -> Result<Self> {
        let expected = (p - 1) as usize;
        if coeffs.len() != expected {
            return Err(Error::CoefficientCount {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { p, coeffs })
    }

    pub fn from_ints(p: u64, coeffs: &[i64]) -> Result<Self> {
        Self::new(p, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn parse(p: u64, literal: &str) -> Result<Self> {
        Self::new(p, parse_coeff_list(literal)?)
    }

    pub fn from_decimal_strings<S: AsRef<str>>(p: u64, items: &[S]) -> Result<Self> {
        Self::new(
            p,
            items
                .iter()
                .map(|s| parse_decimal(s.as_ref()))
                .collect::<Result<_>>()?,
        )
    }

    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(BigInt::to_string).collect()
    }

    pub fn from_integer(p: u64, n: impl Into<BigInt>) -> Self {
        let mut coeffs = vec![BigInt::zero(); (p - 1) as usize];
        coeffs[0] = n.into();
        Self { p, coeffs }
    }

    pub fn one(p: u64) -> Self {
        Self::from_integer(p, 1)
    }

    pub fn zeta_pow(p: u64, j: i64) -> Self {
        let mut buf = vec![BigInt::zero(); p as usize];
        buf[j.rem_euclid(p as i64) as usize] = BigInt::one();
        Self {
            p,
            coeffs: fold_cyclic(buf),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Mismatch {
                p1: self.p,
                k1: 0,
                p2: other.p,
                k2: 0,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let p = self.p as usize;
        let mut buf = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                buf[(i + j) % p] += a * b;
            }
        }
        Ok(Self {
            p: self.p,
            coeffs: fold_cyclic(buf),
        })
    }

    pub fn galois_apply(&self, j: i64) -> Result<Self> {
        let p = self.p;
        let j = j.rem_euclid(p as i64) as u64;
        if j == 0 {
            return Err(Error::ZeroResidue { a: 0, p });
        }
        let mut buf = vec![BigInt::zero(); p as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            buf[((i as u64 * j) % p) as usize] += c;
        }
        Ok(Self {
            p,
            coeffs: fold_cyclic(buf),
        })
    }

    pub fn conjugate(&self) -> Self {
        self.galois_apply(-1).expect("-1 is a unit")
    }

    pub fn is_real(&self) -> bool {
        self.conjugate() == *self
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.p);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Reduce mod `p^K` into the residue ring.
    pub fn reduce(&self, ctx: &Arc<PrimeContext>, k: u32) -> Result<RingElement> {
        if ctx.p() != self.p {
            return Err(Error::Mismatch {
                p1: self.p,
                k1: 0,
                p2: ctx.p(),
                k2: k,
            });
        }
        RingElement::from_bigints(ctx, k, &self.coeffs)
    }

    /// Field norm `N_{K/Q}`, the determinant of multiplication by `self` on the
    /// power basis (equal to the resultant with `Phi_p`). Fraction-free Bareiss
    /// elimination keeps every intermediate an exact integer.
    pub fn norm(&self) -> BigInt {
        let n = self.coeffs.len();
        let zeta = Self::zeta_pow(self.p, 1);
        let mut mat = vec![vec![BigInt::zero(); n]; n];
        let mut col = self.clone();
        for j in 0..n {
            for (i, row) in mat.iter_mut().enumerate() {
                row[j] = col.coeffs[i].clone();
            }
            if j + 1 < n {
                col = &col * &zeta;
            }
        }
        bareiss_determinant(mat)
    }
}

fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = t / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn fold_cyclic(mut buf: Vec<BigInt>) -> Vec<BigInt> {
    let top = buf.pop().expect("p >= 3");
    if !top.is_zero() {
        for c in buf.iter_mut() {
            *c -= &top;
        }
    }
    buf
}

/// Largest `t` with `p^t | n`, and the cofactor. `n` must be nonzero.
pub fn split_p_power(n: &BigInt, p: u64) -> (u32, BigInt) {
    let p = BigInt::from(p);
    let mut t = 0;
    let mut r = n.abs();
    while !r.is_zero() && (&r % &p).is_zero() {
        r /= &p;
        t += 1;
    }
    (t, r)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ExactElement> for &ExactElement {
            type Output = ExactElement;

            fn $method(self, rhs: &ExactElement) -> ExactElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }

        impl $trait<ExactElement> for ExactElement {
            type Output = ExactElement;

            fn $method(self, rhs: ExactElement) -> ExactElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &ExactElement {
    type Output = ExactElement;

    fn neg(self) -> ExactElement {
        ExactElement {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conjugate_product(a: &ExactElement) -> BigInt {
        let mut acc = ExactElement::one(a.p());
        for j in 1..a.p() as i64 {
            acc = &acc * &a.galois_apply(j).unwrap();
        }
        assert!(acc.coeffs()[1..].iter().all(Zero::is_zero));
        acc.coeffs()[0].clone()
    }

    #[test]
    fn norm_of_lambda_is_p() {
        for p in [3u64, 5, 7, 11, 13, 31] {
            let lam = &ExactElement::zeta_pow(p, 1) - &ExactElement::one(p);
            assert_eq!(lam.norm(), BigInt::from(p));
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(ExactElement::from_integer(5, 2).norm(), BigInt::from(16));
        let unit = ExactElement::from_ints(5, &[0, 0, 1, 1]).unwrap();
        assert_eq!(unit.norm().abs(), BigInt::one());
        assert_eq!(unit.norm(), conjugate_product(&unit));
        assert_eq!(ExactElement::from_integer(7, 0).norm(), BigInt::zero());
    }

    #[test]
    fn norm_agrees_with_conjugate_product() {
        let a = ExactElement::from_ints(7, &[3, -1, 4, 1, -5, 9]).unwrap();
        let b = ExactElement::from_ints(7, &[0, 2, 0, -7, 1, 1]).unwrap();
        assert_eq!(a.norm(), conjugate_product(&a));
        assert_eq!(b.norm(), conjugate_product(&b));
        assert_eq!((&a * &b).norm(), a.norm() * b.norm());
    }

    #[test]
    fn parsing() {
        let e = ExactElement::parse(5, "1,-2, 30,123456789012345678901234567890").unwrap();
        assert_eq!(e.to_string(), "1,-2,30,123456789012345678901234567890");
        assert!(ExactElement::parse(5, "1,2,3").is_err());
        assert!(ExactElement::parse(5, "1e3,0,0,0").is_err());
        assert!(ExactElement::parse(5, "+1,0,0,0").is_err());
        assert!(ExactElement::parse(5, "1,,0,0").is_err());
    }

    #[test]
    fn reduce_to_ring() {
        let ctx = Arc::new(PrimeContext::new(5, None).unwrap());
        let e = ExactElement::from_ints(5, &[-1, 26, 0, 50]).unwrap();
        assert_eq!(e.reduce(&ctx, 2).unwrap().coeffs(), &[24, 1, 0, 0]);
    }

    #[test]
    fn p_power_split() {
        assert_eq!(split_p_power(&BigInt::from(-250), 5), (3, BigInt::from(2)));
        assert_eq!(split_p_power(&BigInt::from(7), 5), (0, BigInt::from(7)));
    }
}
