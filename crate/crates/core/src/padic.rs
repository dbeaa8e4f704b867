//! pi-adic structure: the `lambda = zeta - 1` basis, valuations, canonical
//! digit expansions, and the congruence predicates built on them.
//!
//! Valuations come from the lambda-basis coefficients: if `a = sum c_i lambda^i`
//! with `0 <= i <= p - 2`, then `v(c_i lambda^i) = i + (p - 1) v_p(c_i)`. These
//! candidates are pairwise distinct mod `p - 1`, so the minimum is attained once
//! and equals `v(a)` exactly. With coefficients known mod `p^K` the answer is
//! exact below `K(p - 1)` and a lower bound at that cap.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::arith::{inv_mod, mul_mod};
use crate::context::PrimeContext;
use crate::error::{Error, Result};
use crate::ring::RingElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// Known only to be at least this value (the precision cap).
    AtLeast(u32),
}

impl Valuation {
    /// True when the valuation is known to be `>= n`.
    pub fn is_at_least(self, n: u32) -> bool {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v >= n,
        }
    }

    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Exact(v) => s.serialize_u32(*v),
            Valuation::AtLeast(_) => s.serialize_str("cap"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaExpansion {
    pub valuation: Valuation,
    pub digits: Vec<u64>,
    pub precision: u32,
}

/// Pascal triangle rows `0..n` reduced mod `m`.
fn pascal(n: usize, m: u64) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = vec![1 % m; r + 1];
        for c in 1..r {
            row[c] = (rows[r - 1][c - 1] + rows[r - 1][c]) % m;
        }
        rows.push(row);
    }
    rows
}

/// Coefficients of `a` in the basis `1, lambda, ..., lambda^{p-2}`, via
/// `zeta^j = sum_i C(j, i) lambda^i`.
pub fn to_lambda_basis(a: &RingElement) -> Vec<u64> {
    let n = a.coeffs().len();
    let m = a.modulus();
    let binom = pascal(n, m);
    (0..n)
        .map(|i| {
            (i..n).fold(0u64, |acc, j| (acc + mul_mod(a.coeffs()[j], binom[j][i], m)) % m)
        })
        .collect()
}

/// Inverse of [`to_lambda_basis`], via `lambda^i = sum_j C(i, j) (-1)^{i-j} zeta^j`.
pub fn from_lambda_basis(ctx: &Arc<PrimeContext>, k: u32, coeffs: &[u64]) -> Result<RingElement> {
    let modulus = crate::ring::modulus_for(ctx.p(), k)?;
    let n = ctx.order();
    if coeffs.len() != n {
        return Err(Error::CoefficientCount {
            expected: n,
            got: coeffs.len(),
        });
    }
    let binom = pascal(n, modulus);
    let out = (0..n)
        .map(|j| {
            (j..n).fold(0u64, |acc, i| {
                let t = mul_mod(coeffs[i] % modulus, binom[i][j], modulus);
                if (i - j) % 2 == 0 {
                    (acc + t) % modulus
                } else {
                    (acc + modulus - t) % modulus
                }
            })
        })
        .collect();
    RingElement::from_residues(ctx, k, out)
}

fn valuation_of_lambda_coeffs(p: u64, k: u32, coeffs: &[u64]) -> Valuation {
    let cap = k * (p as u32 - 1);
    let best = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            let mut vp = 0u32;
            let mut c = c;
            while c % p == 0 {
                c /= p;
                vp += 1;
            }
            i as u32 + (p as u32 - 1) * vp
        })
        .min();
    match best {
        Some(v) if v < cap => Valuation::Exact(v),
        _ => Valuation::AtLeast(cap),
    }
}

/// `v_pi(a)`, exact below `K(p - 1)`.
pub fn valuation(a: &RingElement) -> Valuation {
    valuation_of_lambda_coeffs(a.p(), a.k(), &to_lambda_basis(a))
}

/// Largest pi-adic precision an element at coefficient precision `K` carries.
pub fn max_precision(a: &RingElement) -> u32 {
    a.k() * (a.p() as u32 - 1)
}

/// Canonical digits `d_0..d_{N-1}` in `[0, p)` with `a = sum d_i lambda^i mod pi^N`.
///
/// Digit `i` is the unique residue that raises the valuation of the running
/// remainder past `i`; it is found by probing all `p` candidates.
pub fn digits(a: &RingElement, n: u32) -> Result<LambdaExpansion> {
    let max = max_precision(a);
    if n > max {
        return Err(Error::PrecisionOverflow { requested: n, max });
    }
    let p = a.p();
    let k = a.k();
    let m = a.modulus();
    let len = a.coeffs().len();

    // lambda^i in the lambda basis; beyond p - 2 these wrap through Phi_p
    let lam = RingElement::lambda(a.ctx(), k)?;
    let mut powers: Vec<Vec<u64>> = Vec::with_capacity(n as usize);
    let mut lam_pow = RingElement::one(a.ctx(), k)?;
    for i in 0..n as usize {
        if i < len {
            let mut e = vec![0u64; len];
            e[i] = 1;
            powers.push(e);
        } else {
            powers.push(to_lambda_basis(&lam_pow));
        }
        lam_pow = &lam_pow * &lam;
    }

    let mut rem = to_lambda_basis(a);
    let mut out = Vec::with_capacity(n as usize);
    for (i, basis) in powers.iter().enumerate() {
        let target = i as u32 + 1;
        let mut found = None;
        for d in 0..p {
            let probe: Vec<u64> = rem
                .iter()
                .zip(basis)
                .map(|(&r, &b)| (r + m - mul_mod(d, b, m)) % m)
                .collect();
            if valuation_of_lambda_coeffs(p, k, &probe).is_at_least(target) {
                found = Some((d, probe));
                break;
            }
        }
        let (d, next) = found.expect("residue field is F_p: exactly one digit fits");
        out.push(d);
        rem = next;
    }

    let valuation = match out.iter().position(|&d| d != 0) {
        Some(v) => Valuation::Exact(v as u32),
        None => Valuation::AtLeast(n),
    };
    Ok(LambdaExpansion {
        valuation,
        digits: out,
        precision: n,
    })
}

fn require_unit(a: &RingElement) -> Result<()> {
    match valuation(a) {
        Valuation::Exact(0) => Ok(()),
        v => Err(Error::NonUnit(v)),
    }
}

/// `a = c mod pi^2` for a rational integer `c` prime to `p`. Non-units are not
/// semi-primary.
pub fn is_semi_primary(a: &RingElement) -> Result<bool> {
    if valuation(a) != Valuation::Exact(0) {
        return Ok(false);
    }
    let exp = digits(a, 2)?;
    Ok(exp.digits[1] == 0)
}

/// A rational `c` prime to `p` with `v(a - c^p) >= depth`, if one exists.
///
/// `c` is forced mod `p` by the first digit, and `c^p mod p^K` depends only on
/// `c mod p^{K-1}`, so the lifts of that residue mod `p^{K-1}` are exhaustive.
pub fn local_pth_root(a: &RingElement, depth: u32) -> Result<Option<u64>> {
    require_unit(a)?;
    let max = max_precision(a);
    if depth > max {
        return Err(Error::PrecisionOverflow {
            requested: depth,
            max,
        });
    }
    let p = a.p();
    let d0 = to_lambda_basis(a)[0] % p;
    let lifts = p.pow(a.k().saturating_sub(2));
    for t in 0..lifts {
        let c = d0 + t * p;
        let cp = RingElement::from_integer(a.ctx(), a.k(), c as i64)?.pow(p);
        if valuation(&(a - &cp)).is_at_least(depth) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// `a = c^p mod pi^depth` for some rational `c` prime to `p`.
pub fn is_locally_pth_power(a: &RingElement, depth: u32) -> Result<bool> {
    Ok(local_pth_root(a, depth)?.is_some())
}

/// Default depth for local p-th power tests: `p + 1`, the modulus to which
/// p-th powers of congruent units agree.
pub fn default_depth(p: u64) -> u32 {
    p as u32 + 1
}

/// `a = c^p mod pi^p` for some rational `c` prime to `p`.
pub fn is_primary(a: &RingElement) -> Result<bool> {
    if a.k() < 2 {
        return Err(Error::InsufficientPrecision { k: a.k(), needed: 2 });
    }
    is_locally_pth_power(a, a.p() as u32)
}

/// The unique `w` in `0..p` making `a zeta^w` semi-primary, with that product.
///
/// From `a = d0 + d1 lambda` and `zeta^w = 1 + w lambda mod pi^2`, `w = -d1/d0`.
pub fn semi_primary_normalize(a: &RingElement) -> Result<(u64, RingElement)> {
    require_unit(a)?;
    let p = a.p();
    let exp = digits(a, 2)?;
    let d0_inv = inv_mod(exp.digits[0], p).expect("unit has nonzero first digit");
    let w = mul_mod((p - exp.digits[1]) % p, d0_inv, p);
    let b = a * &RingElement::zeta_pow(a.ctx(), a.k(), w as i64)?;
    Ok((w, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> Arc<PrimeContext> {
        Arc::new(PrimeContext::new(p, None).unwrap())
    }

    #[test]
    fn lambda_basis_examples() {
        let c = ctx(5);
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        assert_eq!(to_lambda_basis(&z), vec![1, 1, 0, 0]);
        let seven = RingElement::from_integer(&c, 2, 7).unwrap();
        assert_eq!(to_lambda_basis(&seven), vec![7, 0, 0, 0]);
        let z2 = RingElement::zeta_pow(&c, 2, 2).unwrap();
        assert_eq!(to_lambda_basis(&z2), vec![1, 2, 1, 0]);
        assert_eq!(from_lambda_basis(&c, 2, &[1, 2, 1, 0]).unwrap(), z2);
    }

    #[test]
    fn valuation_examples() {
        for p in [3u64, 5, 7, 13] {
            let c = ctx(p);
            let pe = RingElement::from_integer(&c, 2, p as i64).unwrap();
            assert_eq!(valuation(&pe), Valuation::Exact(p as u32 - 1));
            assert_eq!(
                valuation(&RingElement::zero(&c, 2).unwrap()),
                Valuation::AtLeast(2 * (p as u32 - 1))
            );
        }
        let c = ctx(5);
        let lam = RingElement::lambda(&c, 2).unwrap();
        assert_eq!(valuation(&(&lam * &lam).scale(3)), Valuation::Exact(2));
        // 5 lambda^3 has valuation 4 + 3
        let x = lam.pow(3).scale(5);
        assert_eq!(valuation(&x), Valuation::Exact(7));
        assert_eq!(valuation(&x.scale(5)), Valuation::AtLeast(8));
    }

    #[test]
    fn digit_examples() {
        let c = ctx(5);
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        let e = digits(&z, 3).unwrap();
        assert_eq!(e.digits, vec![1, 1, 0]);
        assert_eq!(e.valuation, Valuation::Exact(0));

        let lam3 = RingElement::lambda(&c, 2).unwrap().pow(3);
        assert_eq!(digits(&lam3, 4).unwrap().digits, vec![0, 0, 0, 1]);

        // 5 = -lambda^4 - 5 lambda^3 - 10 lambda^2 - 10 lambda, so 5 = -lambda^4 mod pi^5
        let five = RingElement::from_integer(&c, 2, 5).unwrap();
        let e = digits(&five, 5).unwrap();
        assert_eq!(e.valuation, Valuation::Exact(4));
        assert_eq!(e.digits, vec![0, 0, 0, 0, 4]);

        assert!(matches!(
            digits(&five, 9),
            Err(Error::PrecisionOverflow { requested: 9, max: 8 })
        ));
        let zero = digits(&RingElement::zero(&c, 2).unwrap(), 6).unwrap();
        assert_eq!(zero.valuation, Valuation::AtLeast(6));
        assert_eq!(
            serde_json::to_string(&zero).unwrap(),
            r#"{"valuation":"cap","digits":[0,0,0,0,0,0],"precision":6}"#
        );
    }

    #[test]
    fn semi_primary_examples() {
        let c = ctx(5);
        let two = RingElement::from_integer(&c, 2, 2).unwrap();
        assert!(is_semi_primary(&two).unwrap());
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        assert!(!is_semi_primary(&z).unwrap());
        let lam = RingElement::lambda(&c, 2).unwrap();
        let a = &RingElement::one(&c, 2).unwrap() + &(&lam * &lam);
        assert!(is_semi_primary(&a).unwrap());
        assert!(!is_semi_primary(&lam).unwrap());
    }

    #[test]
    fn primary_examples() {
        let c = ctx(5);
        assert!(is_primary(&RingElement::one(&c, 2).unwrap()).unwrap());
        assert!(!is_primary(&RingElement::zeta_pow(&c, 2, 1).unwrap()).unwrap());
        let a = RingElement::from_integer(&c, 2, 32).unwrap();
        assert!(is_primary(&a).unwrap());
        assert_eq!(local_pth_root(&a, 5).unwrap(), Some(2));
        assert!(matches!(
            is_primary(&RingElement::one(&c, 1).unwrap()),
            Err(Error::InsufficientPrecision { .. })
        ));
        assert!(matches!(
            is_primary(&RingElement::lambda(&c, 2).unwrap()),
            Err(Error::NonUnit(_))
        ));
    }

    #[test]
    fn local_pth_power_examples() {
        let c = ctx(5);
        assert!(is_locally_pth_power(&RingElement::one(&c, 2).unwrap(), 6).unwrap());
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        assert!(!is_locally_pth_power(&z, 6).unwrap());
        // brute force over every rational c mod 25: v(zeta - c^5) <= 1
        for cc in 1..25 {
            if cc % 5 == 0 {
                continue;
            }
            let cp = RingElement::from_integer(&c, 2, cc).unwrap().pow(5);
            assert!(!valuation(&(&z - &cp)).is_at_least(2));
        }
        let beta = RingElement::from_coeffs(&c, 2, &[3, 1, 4, 1]).unwrap();
        assert!(is_locally_pth_power(&beta.pow(5), 6).unwrap());
        assert!(is_locally_pth_power(&z, 9).is_err());
    }

    #[test]
    fn normalize_examples() {
        let c = ctx(5);
        let z = RingElement::zeta_pow(&c, 2, 1).unwrap();
        let (w, b) = semi_primary_normalize(&z).unwrap();
        assert_eq!(w, 4);
        assert!(b.is_one());

        let two = RingElement::from_integer(&c, 2, 2).unwrap();
        assert_eq!(semi_primary_normalize(&two).unwrap(), (0, two));

        let a = RingElement::from_coeffs(&c, 2, &[-1, 2, 0, 0]).unwrap();
        let (w, b) = semi_primary_normalize(&a).unwrap();
        assert_eq!(w, 3);
        assert_eq!(digits(&b, 2).unwrap().digits[1], 0);
        // no other w works
        for other in 0..5 {
            let t = &a * &RingElement::zeta_pow(&c, 2, other).unwrap();
            assert_eq!(is_semi_primary(&t).unwrap(), other == 3);
        }
    }
}
