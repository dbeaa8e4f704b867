//! Residue ring `O_K / p^K O_K` for `K = Q(zeta_p)`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^{p-2}` with every
//! coefficient reduced into `[0, p^K)`. Since `p O_K = pi^{p-1}`, precision `K`
//! determines elements modulo `pi^{K(p-1)}`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::arith::{inv_mod, mul_mod, reduce_i64};
use crate::context::PrimeContext;
use crate::error::{Error, Result};
use crate::padic::{valuation, Valuation};

/// Largest coefficient modulus accepted; keeps convolution sums inside `u128`.
const MODULUS_LIMIT: u64 = 1 << 32;

pub fn modulus_for(p: u64, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(Error::InsufficientPrecision { k, needed: 1 });
    }
    let mut m = 1u64;
    for _ in 0..k {
        m = m
            .checked_mul(p)
            .filter(|&m| m <= MODULUS_LIMIT)
            .ok_or(Error::PrecisionTooLarge { p, k })?;
    }
    Ok(m)
}

#[derive(Clone)]
pub struct RingElement {
    ctx: Arc<PrimeContext>,
    k: u32,
    modulus: u64,
    coeffs: Vec<u64>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.k == other.k && self.coeffs == other.coeffs
    }
}

impl Eq for RingElement {}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement(p={}, K={}, [{}])", self.p(), self.k, self)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl RingElement {
    pub fn from_residues(ctx: &Arc<PrimeContext>, k: u32, coeffs: Vec<u64>) -> Result<Self> {
        let modulus = modulus_for(ctx.p(), k)?;
        let expected = ctx.order();
        if coeffs.len() != expected {
            return Err(Error::CoefficientCount {
                expected,
                got: coeffs.len(),
            });
        }
        let coeffs = coeffs.into_iter().map(|c| c % modulus).collect();
        Ok(Self {
            ctx: Arc::clone(ctx),
            k,
            modulus,
            coeffs,
        })
    }

    pub fn from_coeffs(ctx: &Arc<PrimeContext>, k: u32, coeffs: &[i64]) -> Result<Self> {
        let modulus = modulus_for(ctx.p(), k)?;
        Self::from_residues(ctx, k, coeffs.iter().map(|&c| reduce_i64(c, modulus)).collect())
    }

    pub fn from_bigints(ctx: &Arc<PrimeContext>, k: u32, coeffs: &[BigInt]) -> Result<Self> {
        let modulus = modulus_for(ctx.p(), k)?;
        let m = BigInt::from(modulus);
        let residues = coeffs
            .iter()
            .map(|c| {
                let r = ((c % &m) + &m) % &m;
                r.to_u64().expect("residue below modulus")
            })
            .collect();
        Self::from_residues(ctx, k, residues)
    }

    pub fn zero(ctx: &Arc<PrimeContext>, k: u32) -> Result<Self> {
        Self::from_residues(ctx, k, vec![0; ctx.order()])
    }

    pub fn one(ctx: &Arc<PrimeContext>, k: u32) -> Result<Self> {
        Self::from_integer(ctx, k, 1)
    }

    /// The constant `n mod p^K`.
    pub fn from_integer(ctx: &Arc<PrimeContext>, k: u32, n: i64) -> Result<Self> {
        let mut e = Self::zero(ctx, k)?;
        e.coeffs[0] = reduce_i64(n, e.modulus);
        Ok(e)
    }

    /// `zeta^j` for any integer `j`.
    pub fn zeta_pow(ctx: &Arc<PrimeContext>, k: u32, j: i64) -> Result<Self> {
        let mut buf = vec![0u128; ctx.p() as usize];
        buf[j.rem_euclid(ctx.p() as i64) as usize] = 1;
        let mut e = Self::zero(ctx, k)?;
        e.coeffs = fold_cyclic(&buf, e.modulus);
        Ok(e)
    }

    /// `lambda = zeta - 1`, a generator of `pi`.
    pub fn lambda(ctx: &Arc<PrimeContext>, k: u32) -> Result<Self> {
        Ok(&Self::zeta_pow(ctx, k, 1)? - &Self::one(ctx, k)?)
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 % self.modulus && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx || self.k != other.k {
            return Err(Error::Mismatch {
                p1: self.p(),
                k1: self.k,
                p2: other.p(),
                k2: other.k,
            });
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<u64>) -> Self {
        Self {
            ctx: Arc::clone(&self.ctx),
            k: self.k,
            modulus: self.modulus,
            coeffs,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let m = self.modulus;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + b) % m)
                .collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let m = self.modulus;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + m - b) % m)
                .collect(),
        ))
    }

    /// Product in `Z[x]/(x^p - 1)` followed by the `Phi_p` fold.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let p = self.p() as usize;
        let mut buf = vec![0u128; p];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let idx = if i + j >= p { i + j - p } else { i + j };
                buf[idx] += a as u128 * b as u128;
            }
        }
        Ok(self.with_coeffs(fold_cyclic(&buf, self.modulus)))
    }

    pub fn scale(&self, c: i64) -> Self {
        let m = self.modulus;
        let c = reduce_i64(c, m);
        self.with_coeffs(self.coeffs.iter().map(|&a| mul_mod(a, c, m)).collect())
    }

    /// Substitute `zeta -> zeta^j`.
    pub fn galois_apply(&self, j: i64) -> Result<Self> {
        let p = self.p();
        let j = j.rem_euclid(p as i64) as u64;
        if j == 0 {
            return Err(Error::ZeroResidue { a: 0, p });
        }
        let mut buf = vec![0u128; p as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            buf[((i as u64 * j) % p) as usize] += c as u128;
        }
        Ok(self.with_coeffs(fold_cyclic(&buf, self.modulus)))
    }

    /// `sigma: zeta -> zeta^u`.
    pub fn sigma(&self) -> Self {
        self.galois_apply(self.ctx.u() as i64).expect("u is a unit")
    }

    /// `sigma^s: zeta -> zeta^{u_s}`.
    pub fn sigma_pow(&self, s: i64) -> Self {
        self.galois_apply(self.ctx.upow(s) as i64).expect("u_s is a unit")
    }

    pub fn conjugate(&self) -> Self {
        self.galois_apply(-1).expect("-1 is a unit")
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(&self.ctx, self.k).expect("precision already validated");
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

    /// Multiplicative inverse in `O_K / p^K`, found by solving `a x = 1` with
    /// Gaussian elimination on the multiplication matrix, pivoting on entries
    /// prime to `p`.
    pub fn invert(&self) -> Result<Self> {
        let v = valuation(self);
        if v != Valuation::Exact(0) {
            return Err(Error::NonUnit(v));
        }
        let n = self.ctx.order();
        let m = self.modulus;
        let p = self.p();
        // augmented rows: [M | e_0], column j of M is a * zeta^j
        let mut rows = vec![vec![0u64; n + 1]; n];
        let mut col = self.clone();
        let zeta = Self::zeta_pow(&self.ctx, self.k, 1)?;
        for j in 0..n {
            for (i, row) in rows.iter_mut().enumerate() {
                row[j] = col.coeffs[i];
            }
            col = &col * &zeta;
        }
        rows[0][n] = 1;

        for c in 0..n {
            let pivot = (c..n)
                .find(|&r| rows[r][c] % p != 0)
                .expect("unit element has an invertible multiplication matrix");
            rows.swap(c, pivot);
            let inv = inv_mod(rows[c][c], m).expect("pivot is prime to p");
            for x in rows[c].iter_mut() {
                *x = mul_mod(*x, inv, m);
            }
            let pivot_row = rows[c].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == c || row[c] == 0 {
                    continue;
                }
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + m - mul_mod(f, y, m)) % m;
                }
            }
        }
        Ok(self.with_coeffs(rows.iter().map(|r| r[n]).collect()))
    }

    /// Reduce to a lower coefficient precision `k_new <= K`.
    pub fn truncate(&self, k_new: u32) -> Result<Self> {
        if k_new > self.k {
            return Err(Error::InsufficientPrecision {
                k: self.k,
                needed: k_new,
            });
        }
        Self::from_residues(&self.ctx, k_new, self.coeffs.clone())
    }

    /// Coefficients lifted to the symmetric range `(-p^K/2, p^K/2]`.
    pub fn centered_coeffs(&self) -> Vec<i64> {
        let m = self.modulus as i64;
        self.coeffs
            .iter()
            .map(|&c| {
                let c = c as i64;
                if c > m / 2 {
                    c - m
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Reduce a length-`p` vector in `Z[x]/(x^p - 1)` to the power basis of
/// `Z[zeta]` using `zeta^{p-1} = -(1 + zeta + ... + zeta^{p-2})`.
fn fold_cyclic(buf: &[u128], modulus: u64) -> Vec<u64> {
    let m = modulus as u128;
    let top = buf[buf.len() - 1] % m;
    buf[..buf.len() - 1]
        .iter()
        .map(|&c| ((c % m + m - top) % m) as u64)
        .collect()
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&RingElement> for &RingElement {
            type Output = RingElement;

            fn $method(self, rhs: &RingElement) -> RingElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }

        impl $trait<RingElement> for RingElement {
            type Output = RingElement;

            fn $method(self, rhs: RingElement) -> RingElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &RingElement {
    type Output = RingElement;

    fn neg(self) -> RingElement {
        let m = self.modulus;
        self.with_coeffs(self.coeffs.iter().map(|&a| (m - a) % m).collect())
    }
}

impl Neg for RingElement {
    type Output = RingElement;

    fn neg(self) -> RingElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> Arc<PrimeContext> {
        Arc::new(PrimeContext::new(p, None).unwrap())
    }

    #[test]
    fn roots_of_unity_multiply() {
        let c = ctx(5);
        let z2 = RingElement::zeta_pow(&c, 2, 2).unwrap();
        let z3 = RingElement::zeta_pow(&c, 2, 3).unwrap();
        assert!((&z2 * &z3).is_one());
        let z1 = RingElement::zeta_pow(&c, 2, 1).unwrap();
        let z4 = &z1 * &z3;
        assert_eq!(z4.centered_coeffs(), vec![-1, -1, -1, -1]);
        assert_eq!(z4, RingElement::zeta_pow(&c, 2, 4).unwrap());
    }

    #[test]
    fn p3_square_of_one_plus_zeta() {
        let c = ctx(3);
        let a = RingElement::from_coeffs(&c, 3, &[1, 1]).unwrap();
        // 1 + 2 zeta + zeta^2 with zeta^2 = -1 - zeta
        assert_eq!((&a * &a).centered_coeffs(), vec![0, 1]);
        assert_eq!(&a * &a, RingElement::zeta_pow(&c, 3, 1).unwrap());
    }

    #[test]
    fn from_integer_examples() {
        let c = ctx(5);
        assert!(RingElement::from_integer(&c, 2, 0).unwrap().is_zero());
        assert_eq!(RingElement::from_integer(&c, 2, 5).unwrap().coeffs(), &[5, 0, 0, 0]);
        assert_eq!(RingElement::from_integer(&c, 2, -1).unwrap().coeffs(), &[24, 0, 0, 0]);
    }

    #[test]
    fn mismatch_is_an_error() {
        let c = ctx(5);
        let a = RingElement::one(&c, 2).unwrap();
        let b = RingElement::one(&c, 3).unwrap();
        assert!(matches!(a.checked_add(&b), Err(Error::Mismatch { .. })));
        let other = Arc::new(PrimeContext::new(7, None).unwrap());
        let d = RingElement::one(&other, 2).unwrap();
        assert!(a.checked_mul(&d).is_err());
    }

    #[test]
    fn galois_examples() {
        let c = ctx(5);
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        assert_eq!(z.sigma(), RingElement::zeta_pow(&c, 2, 2).unwrap());
        let real = &z + &RingElement::zeta_pow(&c, 2, 4).unwrap();
        assert_eq!(real.galois_apply(4).unwrap(), real);
        assert_eq!(real.conjugate(), real);
        assert_eq!(z.galois_apply(1).unwrap(), z);
        assert!(z.galois_apply(5).is_err());
        assert_eq!(z.conjugate(), RingElement::zeta_pow(&c, 2, 4).unwrap());
        let n = RingElement::from_integer(&c, 2, 17).unwrap();
        assert_eq!(n.conjugate(), n);
    }

    #[test]
    fn pow_examples() {
        let c = ctx(3);
        let z = RingElement::zeta_pow(&c, 4, 1).unwrap();
        assert!(z.pow(3).is_one());
        assert!(z.pow(0).is_one());
        // (2 zeta - 1)^3 = 19 + 18 zeta, visible in full at K = 4 (mod 81)
        let a = RingElement::from_coeffs(&c, 4, &[-1, 2]).unwrap();
        assert_eq!(a.pow(3).coeffs(), &[19, 18]);
    }

    #[test]
    fn invert_examples() {
        let c = ctx(5);
        assert!(RingElement::one(&c, 2).unwrap().invert().unwrap().is_one());
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        assert_eq!(z.invert().unwrap(), RingElement::zeta_pow(&c, 2, 4).unwrap());
        let two = RingElement::from_integer(&c, 1, 2).unwrap();
        assert_eq!(two.invert().unwrap().coeffs(), &[3, 0, 0, 0]);
        let lam = RingElement::lambda(&c, 2).unwrap();
        assert_eq!(lam.invert().unwrap_err(), Error::NonUnit(Valuation::Exact(1)));
    }

    #[test]
    fn modulus_limit() {
        assert!(modulus_for(97, 4).is_ok());
        assert!(matches!(modulus_for(97, 5), Err(Error::PrecisionTooLarge { .. })));
        assert!(modulus_for(5, 0).is_err());
    }
}
