//! The action of `sigma` over `F_p` and its eigenvectors.
//!
//! Linear algebra here uses the normal basis `zeta, zeta^2, ..., zeta^{p-1}` of
//! `Z[zeta]`, on which `sigma` is a permutation. For `mu = u_s` the eigenspace
//! is the line spanned by
//!
//! ```text
//! e_mu = sum_{i=0}^{p-2} mu^{-i} zeta^{u_i}
//! ```
//!
//! normalized so its `zeta` coordinate is 1.

use std::sync::Arc;

use serde::Serialize;

use crate::arith::mul_mod;
use crate::context::PrimeContext;
use crate::error::{Error, Result};
use crate::padic::{valuation, Valuation};
use crate::ring::RingElement;

/// Dense matrix over `F_p`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u64,
    rows: Vec<Vec<u64>>,
}

impl FpMatrix {
    pub fn zeros(p: u64, nrows: usize, ncols: usize) -> Self {
        Self {
            p,
            rows: vec![vec![0; ncols]; nrows],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.rows[i][i] = 1;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.rows[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.rows[r][c] = v % self.p;
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| (acc + mul_mod(a, b, self.p)) % self.p)
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.p, self.nrows(), other.ncols());
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                let a = self.rows[i][k];
                if a == 0 {
                    continue;
                }
                for j in 0..other.ncols() {
                    out.rows[i][j] = (out.rows[i][j] + mul_mod(a, other.rows[k][j], self.p)) % self.p;
                }
            }
        }
        out
    }

    /// `self - c I`
    pub fn minus_scalar(&self, c: u64) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows().min(self.ncols()) {
            out.rows[i][i] = (out.rows[i][i] + self.p - c % self.p) % self.p;
        }
        out
    }

    /// Basis of the right kernel, one vector per free column of the reduced
    /// row echelon form.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let ncols = self.ncols();
        let mut a = self.rows.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..ncols {
            let Some(pr) = (row..a.len()).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(row, pr);
            let inv = crate::arith::inv_mod(a[row][col], p).expect("nonzero in F_p");
            for x in a[row].iter_mut() {
                *x = mul_mod(*x, inv, p);
            }
            let pivot_row = a[row].clone();
            for (r, other) in a.iter_mut().enumerate() {
                if r != row && other[col] != 0 {
                    let f = other[col];
                    for (x, &y) in other.iter_mut().zip(&pivot_row) {
                        *x = (*x + p - mul_mod(f, y, p)) % p;
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == a.len() {
                break;
            }
        }
        (0..ncols)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut v = vec![0u64; ncols];
                v[free] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - a[r][free]) % p;
                }
                v
            })
            .collect()
    }
}

/// Matrix of `sigma` on the normal basis `zeta^1..zeta^{p-1}` (column `j`
/// holds the image of `zeta^{j+1}`): a single `(p-1)`-cycle.
pub fn sigma_matrix(ctx: &PrimeContext) -> FpMatrix {
    let p = ctx.p();
    let n = ctx.order();
    let mut m = FpMatrix::zeros(p, n, n);
    for j in 0..n {
        let image = ((j as u64 + 1) * ctx.u()) % p;
        m.set(image as usize - 1, j, 1);
    }
    m
}

/// `sigma` on the reduced coordinates `zeta^1..zeta^{p-2}` of the power basis,
/// as an affine pair: `sigma(x) = M x + (r . x)` where the row `r` gives the
/// constant term produced when `zeta^j` lands on `zeta^{p-1} = -1 - zeta - ...`.
pub fn sigma_affine(ctx: &PrimeContext) -> (FpMatrix, Vec<u64>) {
    let p = ctx.p();
    let n = ctx.order() - 1;
    let mut m = FpMatrix::zeros(p, n, n);
    let mut constant = vec![0u64; n];
    for j in 0..n {
        let image = ((j as u64 + 1) * ctx.u()) % p;
        if image == p - 1 {
            for i in 0..n {
                m.set(i, j, p - 1);
            }
            constant[j] = p - 1;
        } else {
            m.set(image as usize - 1, j, 1);
        }
    }
    (m, constant)
}

/// Normal-basis coordinates (of `zeta^1..zeta^{p-1}`) to a ring element.
pub fn normal_to_ring(ctx: &Arc<PrimeContext>, k: u32, coords: &[u64]) -> Result<RingElement> {
    let n = ctx.order();
    if coords.len() != n {
        return Err(Error::CoefficientCount {
            expected: n,
            got: coords.len(),
        });
    }
    let m = crate::ring::modulus_for(ctx.p(), k)?;
    let top = coords[n - 1] % m;
    let mut out = vec![(m - top) % m; n];
    for j in 1..n {
        out[j] = (coords[j - 1] % m + m - top) % m;
    }
    RingElement::from_residues(ctx, k, out)
}

/// Power-basis element to normal-basis coordinates, using `1 = -sum_j zeta^j`.
pub fn ring_to_normal(a: &RingElement) -> Vec<u64> {
    let m = a.modulus();
    let c = a.coeffs();
    let n = c.len();
    let mut out = Vec::with_capacity(n);
    for j in 1..n {
        out.push((c[j] + m - c[0]) % m);
    }
    out.push((m - c[0]) % m);
    out
}

fn check_mu(ctx: &PrimeContext, mu: u64) -> Result<usize> {
    if mu < 2 || mu >= ctx.p() {
        return Err(Error::OutOfRange(format!(
            "mu = {mu} must lie in [2, {}]",
            ctx.p() - 1
        )));
    }
    ctx.index_of(mu as i64)
}

/// Closed-form `e_mu` in normal-basis coordinates.
pub fn closed_form(ctx: &PrimeContext, mu: u64) -> Result<Vec<u64>> {
    check_mu(ctx, mu)?;
    let p = ctx.p();
    let mu_inv = ctx.inv(mu)?;
    let mut v = vec![0u64; ctx.order()];
    let mut coeff = 1u64;
    for i in 0..ctx.order() {
        v[ctx.upow(i as i64) as usize - 1] = coeff;
        coeff = mul_mod(coeff, mu_inv, p);
    }
    Ok(v)
}

/// `e_mu` as an element of the residue ring at precision `k`.
pub fn eigen_element(ctx: &Arc<PrimeContext>, k: u32, mu: u64) -> Result<RingElement> {
    normal_to_ring(ctx, k, &closed_form(ctx, mu)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EigenReport {
    pub mu: u64,
    pub index_s: usize,
    pub dimension: usize,
    /// Normal-basis coordinates of the eigenvector, `zeta` coordinate 1.
    pub vector: Vec<u64>,
    pub valuation: Valuation,
    pub matches_closed_form: bool,
    /// Whether `s > (p - 1)/2`, the range where expansions along `e_mu` apply.
    pub above_half: bool,
}

/// Eigenspace of `sigma` for `mu`, computed as a kernel over `F_p` and checked
/// against the closed form.
pub fn canonical_eigenvector(ctx: &Arc<PrimeContext>, mu: u64) -> Result<EigenReport> {
    let s = check_mu(ctx, mu)?;
    let p = ctx.p();
    let kernel = sigma_matrix(ctx).minus_scalar(mu).nullspace();
    let dimension = kernel.len();
    let closed = closed_form(ctx, mu)?;

    let vector = match kernel.first() {
        Some(v) if v[0] != 0 => {
            let inv = ctx.inv(v[0])?;
            v.iter().map(|&x| mul_mod(x, inv, p)).collect()
        }
        Some(v) => v.clone(),
        None => vec![0; ctx.order()],
    };

    let element = normal_to_ring(ctx, 1, &vector)?;
    let eigen_identity = element.sigma() == element.scale(mu as i64);
    Ok(EigenReport {
        mu,
        index_s: s,
        dimension,
        matches_closed_form: dimension == 1 && vector == closed && eigen_identity,
        valuation: valuation(&element),
        vector,
        above_half: 2 * s as u64 > p - 1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecurrenceSolution {
    pub mu: u64,
    /// The constant term.
    pub gamma: u64,
    /// Coefficients of `zeta^{u_i}` for `i = 0..p-3`; the last is the free parameter.
    pub gammas: Vec<u64>,
    pub free_parameter: u64,
}

/// Solve the triangular system `mu gamma_0 = -g`, `mu gamma_i = gamma_{i-1} - g`,
/// `(mu - 1) gamma = -g` for `g = gamma_{p-3}` given, and confirm the closing
/// equation `mu g = gamma_{p-4} - g`.
pub fn recurrence_solve(ctx: &PrimeContext, mu: u64, free: u64) -> Result<RecurrenceSolution> {
    let p = ctx.p();
    let mu = mu % p;
    if mu == 0 || mu == 1 {
        return Err(Error::OutOfRange(format!("mu = {mu} must not be 0 or 1 mod p")));
    }
    if p < 5 {
        return Err(Error::OutOfRange("the recurrence needs p >= 5".into()));
    }
    let g = free % p;
    let mu_inv = ctx.inv(mu)?;
    let neg_g = (p - g) % p;
    let gamma = mul_mod(neg_g, ctx.inv(mu - 1)?, p);

    let n = (p - 2) as usize;
    let mut gammas = Vec::with_capacity(n);
    let mut prev = mul_mod(neg_g, mu_inv, p);
    gammas.push(prev);
    for _ in 1..n - 1 {
        prev = mul_mod((prev + p - g) % p, mu_inv, p);
        gammas.push(prev);
    }
    gammas.push(g);
    debug_assert_eq!(mul_mod(mu, g, p), (gammas[n - 2] + p - g) % p);
    Ok(RecurrenceSolution {
        mu,
        gamma,
        gammas,
        free_parameter: g,
    })
}

impl RecurrenceSolution {
    /// Whether the closing equation `mu gamma_{p-3} = gamma_{p-4} - gamma_{p-3}` holds.
    pub fn closes(&self, p: u64) -> bool {
        let n = self.gammas.len();
        let g = self.free_parameter;
        mul_mod(self.mu, g, p) == (self.gammas[n - 2] + p - g) % p
    }

    /// `V = gamma + gamma_0 zeta + gamma_1 zeta^u + ... + gamma_{p-3} zeta^{u_{p-3}}`
    /// reduced mod `p`.
    pub fn assemble(&self, ctx: &Arc<PrimeContext>) -> Result<RingElement> {
        let mut v = RingElement::from_integer(ctx, 1, self.gamma as i64)?;
        for (i, &g) in self.gammas.iter().enumerate() {
            v = &v + &RingElement::zeta_pow(ctx, 1, ctx.upow(i as i64) as i64)?.scale(g as i64);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpansionMatch {
    pub matches: bool,
    pub delta: Option<u64>,
}

/// Decide whether `a = 1 - delta e_mu mod pi^depth` for some `delta` in `F_p`.
///
/// At `depth = p - 1` the congruence is a congruence mod `p`, so `delta` is read
/// off the `zeta` coordinate of `1 - a` and the other coordinates are checked.
/// Shallower depths are decided by trying each `delta`.
pub fn expansion_matches(a: &RingElement, mu: u64, depth: u32) -> Result<ExpansionMatch> {
    let ctx = a.ctx();
    let p = ctx.p();
    check_mu(ctx, mu)?;
    let v = valuation(a);
    if v != Valuation::Exact(0) {
        return Err(Error::NonUnit(v));
    }
    if depth > p as u32 - 1 {
        return Err(Error::PrecisionOverflow {
            requested: depth,
            max: p as u32 - 1,
        });
    }
    let one = RingElement::one(ctx, a.k())?;
    let target = &one - a;
    let e = closed_form(ctx, mu)?;

    if depth == p as u32 - 1 {
        let t: Vec<u64> = ring_to_normal(&target.truncate(1)?);
        let delta = t[0];
        let matches = t.iter().zip(&e).all(|(&x, &y)| x == mul_mod(delta, y, p));
        return Ok(ExpansionMatch {
            matches,
            delta: matches.then_some(delta),
        });
    }

    let e = normal_to_ring(ctx, a.k(), &e)?;
    for delta in 0..p {
        if valuation(&(&target - &e.scale(delta as i64))).is_at_least(depth) {
            return Ok(ExpansionMatch {
                matches: true,
                delta: Some(delta),
            });
        }
    }
    Ok(ExpansionMatch {
        matches: false,
        delta: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> Arc<PrimeContext> {
        Arc::new(PrimeContext::new(p, None).unwrap())
    }

    #[test]
    fn p3_affine_form() {
        let c = ctx(3);
        let (m, constant) = sigma_affine(&c);
        assert_eq!(m.rows(), &[vec![2]]);
        assert_eq!(constant, vec![2]);
    }

    #[test]
    fn p5_sigma_column_for_zeta_is_zeta_squared() {
        let c = ctx(5);
        let m = sigma_matrix(&c);
        let col: Vec<u64> = (0..4).map(|r| m.get(r, 0)).collect();
        assert_eq!(col, vec![0, 1, 0, 0]);
        let (aff, constant) = sigma_affine(&c);
        // zeta^2 -> zeta^4 = -1 - zeta - zeta^2 - zeta^3
        assert_eq!((0..3).map(|r| aff.get(r, 1)).collect::<Vec<_>>(), vec![4, 4, 4]);
        assert_eq!(constant, vec![0, 4, 0]);
    }

    #[test]
    fn sigma_has_order_p_minus_1() {
        for p in [3u64, 5, 7, 13] {
            let c = ctx(p);
            let m = sigma_matrix(&c);
            let mut acc = FpMatrix::identity(p, c.order());
            for step in 1..=c.order() {
                acc = acc.mul(&m);
                assert_eq!(acc == FpMatrix::identity(p, c.order()), step == c.order());
            }
        }
    }

    #[test]
    fn affine_form_agrees_with_ring_sigma() {
        let c = ctx(7);
        let (m, constant) = sigma_affine(&c);
        let x = RingElement::from_coeffs(&c, 1, &[0, 3, 1, 4, 1, 5]).unwrap();
        let y = x.sigma();
        let xs = &x.coeffs()[1..];
        let lin = m.mul_vec(xs);
        let cst = xs.iter().zip(&constant).fold(0, |acc, (&a, &b)| (acc + a * b) % 7);
        assert_eq!(&y.coeffs()[1..], &lin[..]);
        assert_eq!(y.coeffs()[0], cst);
    }

    #[test]
    fn p5_eigenvector() {
        let c = ctx(5);
        assert_eq!(closed_form(&c, 2).unwrap(), vec![1, 3, 2, 4]);
        let r = canonical_eigenvector(&c, 2).unwrap();
        assert_eq!(r.vector, vec![1, 3, 2, 4]);
        assert_eq!(r.dimension, 1);
        assert_eq!(r.index_s, 1);
        assert_eq!(r.valuation, Valuation::Exact(1));
        assert!(r.matches_closed_form);
        let e = eigen_element(&c, 1, 2).unwrap();
        assert_eq!(e.sigma(), e.scale(2));
    }

    #[test]
    fn p3_eigenvector() {
        let c = ctx(3);
        assert_eq!(closed_form(&c, 2).unwrap(), vec![1, 2]);
        let r = canonical_eigenvector(&c, 2).unwrap();
        assert!(r.matches_closed_form);
        assert_eq!(r.valuation, Valuation::Exact(1));
    }

    #[test]
    fn mu_range() {
        let c = ctx(5);
        assert!(canonical_eigenvector(&c, 1).is_err());
        assert!(canonical_eigenvector(&c, 5).is_err());
        assert!(canonical_eigenvector(&c, 0).is_err());
    }

    #[test]
    fn normal_basis_round_trip() {
        let c = ctx(7);
        let x = RingElement::from_coeffs(&c, 2, &[5, -3, 1, 0, 22, 9]).unwrap();
        assert_eq!(normal_to_ring(&c, 2, &ring_to_normal(&x)).unwrap(), x);
    }

    #[test]
    fn recurrence_examples() {
        let c = ctx(5);
        let s = recurrence_solve(&c, 3, 1).unwrap();
        assert_eq!(s.gamma, 2);
        assert_eq!(s.gammas, vec![3, 4, 1]);
        assert!(s.closes(5));
        let zero = recurrence_solve(&c, 3, 0).unwrap();
        assert_eq!(zero.gamma, 0);
        assert!(zero.gammas.iter().all(|&g| g == 0));
        let two = recurrence_solve(&c, 3, 2).unwrap();
        assert_eq!(two.gamma, 4);
        assert_eq!(two.gammas, vec![1, 3, 2]);
        assert!(recurrence_solve(&c, 1, 1).is_err());
        assert!(recurrence_solve(&c, 6, 1).is_err());
    }

    #[test]
    fn recurrence_assembles_to_eigenvector() {
        let c = ctx(11);
        for s in 1..10 {
            let mu = c.upow(s);
            let sol = recurrence_solve(&c, mu, 1).unwrap();
            let v = sol.assemble(&c).unwrap();
            assert_eq!(v.sigma(), v.scale(mu as i64));
            // V = (mu^{-1} / (mu - 1)) g e_mu
            let factor = mul_mod(c.inv(mu).unwrap(), c.inv(mu - 1).unwrap(), 11);
            assert_eq!(v, eigen_element(&c, 1, mu).unwrap().scale(factor as i64));
        }
    }

    #[test]
    fn expansion_examples() {
        let c = ctx(5);
        let one = RingElement::one(&c, 2).unwrap();
        let e = eigen_element(&c, 2, 3).unwrap();
        let a = &one - &e.scale(2);
        assert_eq!(
            expansion_matches(&a, 3, 4).unwrap(),
            ExpansionMatch { matches: true, delta: Some(2) }
        );
        assert_eq!(
            expansion_matches(&one, 3, 4).unwrap(),
            ExpansionMatch { matches: true, delta: Some(0) }
        );
        let b = &one + &RingElement::lambda(&c, 2).unwrap();
        assert!(!expansion_matches(&b, 3, 4).unwrap().matches);
        // no delta in F_5 works, by exhaustion
        for d in 0..5 {
            let diff = &(&b - &one) + &e.scale(d);
            assert!(!valuation(&diff).is_at_least(4));
        }
        assert!(expansion_matches(&RingElement::lambda(&c, 2).unwrap(), 3, 4).is_err());
        assert!(expansion_matches(&one, 3, 5).is_err());
    }

    #[test]
    fn shallow_expansion_uses_probing() {
        let c = ctx(7);
        let one = RingElement::one(&c, 2).unwrap();
        let mu = c.upow(4);
        let a = &one - &eigen_element(&c, 2, mu).unwrap().scale(3);
        let m = expansion_matches(&a, mu, 6).unwrap();
        assert_eq!(m.delta, Some(3));
        let shallow = expansion_matches(&a, mu, 5).unwrap();
        assert_eq!(shallow.delta, Some(3));
    }
}
