#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `B_0..B_n` over Q from `B_n = -1/(n+1) sum_{k<n} C(n+1, k) B_k`.
pub fn bernoulli_exact(n: usize) -> Vec<BigRational> {
    let mut b = vec![BigRational::one()];
    for m in 1..=n {
        let mut binom = BigInt::one();
        let mut sum = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            sum += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-sum / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// Pairs `(p, 2m)` with `p` odd, `2 <= 2m <= p - 3` and `p` dividing the numerator of `B_2m`.
pub fn irregular_pairs_exact(max: u64) -> Vec<(u64, u64)> {
    let b = bernoulli_exact(max as usize);
    let mut out = Vec::new();
    for p in odd_primes(max) {
        let p_big = BigInt::from(p);
        for two_m in (2..=p.saturating_sub(3)).step_by(2) {
            if (b[two_m as usize].numer() % &p_big).is_zero() {
                out.push((p, two_m));
            }
        }
    }
    out
}

pub fn odd_primes(max: u64) -> impl Iterator<Item = u64> {
    (3..=max).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}
