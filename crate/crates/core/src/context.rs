//! The prime `p`, a primitive root `u`, and the index tables built from them.
//!
//! Throughout the crate `u_i` denotes the least positive residue of `u^i` mod `p`
//! for any integer `i` (negative `i` meaning powers of `u^{-1}`). The Galois
//! generator used everywhere is `sigma: zeta -> zeta^u`.

use std::sync::OnceLock;

use crate::arith::{inv_mod, is_prime, mul_mod, pow_mod, prime_factors, smallest_factor};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct PrimeContext {
    p: u64,
    u: u64,
    upow: Vec<u64>,
    uindex: Vec<usize>,
    bernoulli: OnceLock<Vec<u64>>,
}

impl PartialEq for PrimeContext {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.u == other.u
    }
}

impl Eq for PrimeContext {}

impl PrimeContext {
    /// Build the tables for `p`, using `u` when given and the smallest primitive
    /// root otherwise.
    pub fn new(p: u64, u: Option<u64>) -> Result<Self> {
        if p < 3 || p % 2 == 0 {
            return match smallest_factor(p) {
                Some(factor) if p > 3 => Err(Error::Composite { n: p, factor }),
                _ => Err(Error::NotOddPrime(p)),
            };
        }
        if let Some(factor) = smallest_factor(p) {
            return Err(Error::Composite { n: p, factor });
        }
        debug_assert!(is_prime(p));
        let u = match u {
            Some(u) => {
                check_primitive_root(u, p)?;
                u % p
            }
            None => (2..p)
                .find(|&g| check_primitive_root(g, p).is_ok())
                .expect("every prime has a primitive root"),
        };

        let order = (p - 1) as usize;
        let mut upow = Vec::with_capacity(order);
        let mut uindex = vec![usize::MAX; p as usize];
        let mut x = 1u64;
        for i in 0..order {
            upow.push(x);
            uindex[x as usize] = i;
            x = mul_mod(x, u, p);
        }
        debug_assert_eq!(x, 1);

        Ok(Self {
            p,
            u,
            upow,
            uindex,
            bernoulli: OnceLock::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    /// `(p - 1) / 2`
    pub fn half(&self) -> u64 {
        (self.p - 1) / 2
    }

    /// Order of the Galois group, `p - 1`.
    pub fn order(&self) -> usize {
        self.upow.len()
    }

    pub fn upow_table(&self) -> &[u64] {
        &self.upow
    }

    /// `u_i` for any integer `i`.
    pub fn upow(&self, i: i64) -> u64 {
        self.upow[i.rem_euclid(self.order() as i64) as usize]
    }

    /// Discrete logarithm base `u`: the `s` in `0..p-1` with `u_s = a mod p`.
    pub fn index_of(&self, a: i64) -> Result<usize> {
        let r = a.rem_euclid(self.p as i64) as usize;
        if r == 0 {
            return Err(Error::ZeroResidue { a, p: self.p });
        }
        Ok(self.uindex[r])
    }

    /// Inverse table view: `uindex[a]` for `a` in `1..p`, entry 0 unused.
    pub fn uindex_table(&self) -> &[usize] {
        &self.uindex
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        inv_mod(a % self.p, self.p).ok_or(Error::ZeroResidue {
            a: a as i64,
            p: self.p,
        })
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        pow_mod(a, e, self.p)
    }

    /// `B_{2m} mod p` for even `2 <= 2m <= p - 3`.
    pub fn bernoulli_mod_p(&self, two_m: u64) -> Result<u64> {
        let max = self.p.saturating_sub(3);
        if two_m % 2 != 0 || two_m < 2 || two_m > max {
            return Err(Error::BernoulliIndex {
                index: two_m,
                max,
            });
        }
        Ok(self.bernoulli_table()[two_m as usize])
    }

    /// Even indices `2m` in `[2, p - 3]` with `p | B_{2m}`, ascending.
    pub fn irregular_pairs(&self) -> Vec<u64> {
        let table = self.bernoulli_table();
        (2..=self.p.saturating_sub(3))
            .step_by(2)
            .filter(|&k| table[k as usize] == 0)
            .collect()
    }

    /// `B_0, ..., B_{p-3}` reduced mod `p`. The recurrence
    /// `sum_{k=0}^{n} C(n+1, k) B_k = 0` only divides by `n + 1 <= p - 2`.
    fn bernoulli_table(&self) -> &[u64] {
        self.bernoulli.get_or_init(|| {
            let p = self.p;
            let len = (p - 2) as usize;
            let mut table = vec![0u64; len];
            table[0] = 1;
            // binom[k] = C(n + 1, k) mod p, updated row by row
            let mut binom = vec![1u64, 1];
            for n in 1..len {
                let mut next = vec![1u64; n + 2];
                for k in 1..=n {
                    next[k] = (binom[k - 1] + binom[k]) % p;
                }
                binom = next;
                let mut acc = 0u64;
                for (k, &b) in table.iter().enumerate().take(n) {
                    acc = (acc + mul_mod(binom[k], b, p)) % p;
                }
                let inv = inv_mod((n + 1) as u64, p).expect("n + 1 < p");
                table[n] = mul_mod((p - acc) % p, inv, p);
            }
            table
        })
    }
}

fn check_primitive_root(u: u64, p: u64) -> Result<()> {
    if u % p == 0 {
        return Err(Error::NotPrimitiveRoot { u, p, exponent: 0 });
    }
    for q in prime_factors(p - 1) {
        let exponent = (p - 1) / q;
        if pow_mod(u, exponent, p) == 1 {
            return Err(Error::NotPrimitiveRoot { u, p, exponent });
        }
    }
    Ok(())
}
