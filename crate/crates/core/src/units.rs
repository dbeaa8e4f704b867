//! Real cyclotomic units, their projections onto `sigma`-eigencomponents, and
//! the congruences those projections satisfy.
//!
//! Only the cyclotomic-unit subgroup (finite index `h+` in the real units) is
//! reachable here; every relation is checked on explicit representatives.

use std::sync::Arc;

use serde::Serialize;

use crate::arith::mul_mod;
use crate::context::PrimeContext;
use crate::eigen::{expansion_matches, ExpansionMatch};
use crate::error::{Error, Result};
use crate::exact::ExactElement;
use crate::padic::{default_depth, is_locally_pth_power, valuation, Valuation};
use crate::ring::RingElement;

fn check_base(ctx: &PrimeContext, a: u64) -> Result<()> {
    if a < 2 || a > ctx.half() {
        return Err(Error::OutOfRange(format!(
            "cyclotomic unit index a = {a} must lie in [2, {}]",
            ctx.half()
        )));
    }
    Ok(())
}

pub fn check_two_m(ctx: &PrimeContext, two_m: u64) -> Result<()> {
    if two_m % 2 != 0 || two_m < 2 || two_m + 3 > ctx.p() {
        return Err(Error::OutOfRange(format!(
            "2m = {two_m} must be even in [2, {}]",
            ctx.p().saturating_sub(3)
        )));
    }
    Ok(())
}

/// Exponent `(1 - a)/2 mod p` making `xi_a` real.
fn half_shift(ctx: &PrimeContext, a: u64) -> i64 {
    let p = ctx.p();
    let two_inv = ctx.inv(2).expect("p is odd");
    mul_mod((1 + p - a % p) % p, two_inv, p) as i64
}

/// `xi_a = zeta^{(1-a)/2} (zeta^a - 1)/(zeta - 1) = sum_{t<a} zeta^{(1-a)/2 + t}`.
pub fn cyclotomic_unit_exact(ctx: &PrimeContext, a: u64) -> Result<ExactElement> {
    check_base(ctx, a)?;
    let shift = half_shift(ctx, a);
    let p = ctx.p();
    let mut acc = ExactElement::from_integer(p, 0);
    for t in 0..a as i64 {
        acc = &acc + &ExactElement::zeta_pow(p, shift + t);
    }
    Ok(acc)
}

pub fn cyclotomic_unit(ctx: &Arc<PrimeContext>, k: u32, a: u64) -> Result<RingElement> {
    check_base(ctx, a)?;
    let shift = half_shift(ctx, a);
    let mut acc = RingElement::zero(ctx, k)?;
    for t in 0..a as i64 {
        acc = &acc + &RingElement::zeta_pow(ctx, k, shift + t)?;
    }
    Ok(acc)
}

/// `prod_j sigma^j(xi_a)^{exponents[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitExponentVector {
    pub base_index: u64,
    pub exponents: Vec<u64>,
}

impl UnitExponentVector {
    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn evaluate(&self, ctx: &Arc<PrimeContext>, k: u32) -> Result<RingElement> {
        let xi = cyclotomic_unit(ctx, k, self.base_index)?;
        let mut acc = RingElement::one(ctx, k)?;
        for (j, &c) in self.exponents.iter().enumerate() {
            if c != 0 {
                acc = &acc * &xi.sigma_pow(j as i64).pow(c);
            }
        }
        Ok(acc)
    }

    pub fn evaluate_exact(&self, ctx: &PrimeContext) -> Result<ExactElement> {
        let xi = cyclotomic_unit_exact(ctx, self.base_index)?;
        let mut acc = ExactElement::one(ctx.p());
        for (j, &c) in self.exponents.iter().enumerate() {
            if c != 0 {
                acc = &acc * &xi.galois_apply(ctx.upow(j as i64) as i64)?.pow(c);
            }
        }
        Ok(acc)
    }
}

/// Exponents `c_j = u^{-2m j} mod p`, so that `c_{j-1} = u_{2m} c_j` and
/// the product `eta` satisfies `sigma(eta) = eta^{u_{2m}} * (p-th power)`.
pub fn projection_recipe(ctx: &PrimeContext, a: u64, two_m: u64) -> Result<UnitExponentVector> {
    check_base(ctx, a)?;
    check_two_m(ctx, two_m)?;
    let exponents = (0..ctx.order() as i64)
        .map(|j| ctx.upow(-(two_m as i64) * j))
        .collect();
    Ok(UnitExponentVector {
        base_index: a,
        exponents,
    })
}

pub fn eigen_project_unit(
    ctx: &Arc<PrimeContext>,
    k: u32,
    a: u64,
    two_m: u64,
) -> Result<(RingElement, UnitExponentVector)> {
    let recipe = projection_recipe(ctx, a, two_m)?;
    Ok((recipe.evaluate(ctx, k)?, recipe))
}

/// Product of the projections of several `xi_a` onto the same component.
pub fn eigen_project_units(
    ctx: &Arc<PrimeContext>,
    k: u32,
    bases: &[u64],
    two_m: u64,
) -> Result<(RingElement, Vec<UnitExponentVector>)> {
    let mut acc = RingElement::one(ctx, k)?;
    let mut recipes = Vec::with_capacity(bases.len());
    for &a in bases {
        let (eta, recipe) = eigen_project_unit(ctx, k, a, two_m)?;
        acc = &acc * &eta;
        recipes.push(recipe);
    }
    Ok((acc, recipes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitReport {
    pub two_m: u64,
    pub mu: u64,
    /// `sigma(eta) eta^{-mu}` is a local p-th power at depth `p + 1`.
    pub relation_holds: bool,
    /// `eta` itself is a local p-th power at depth `p + 1`.
    pub local_pth_power: bool,
    pub valuation_of_eta_pm1: Valuation,
    /// `local_pth_power` or `v(eta^{p-1} - 1) = 2m`.
    pub dichotomy_holds: bool,
    /// Set when `2m > (p - 1)/2`.
    pub expansion: Option<ExpansionMatch>,
    pub expansion_delta: Option<u64>,
}

impl UnitReport {
    /// Relation and dichotomy hold, and where the expansion applies it matches
    /// with `delta` prime to `p` unless `eta` is a local p-th power.
    pub fn all_hold(&self) -> bool {
        let expansion_ok = match self.expansion {
            None => true,
            Some(m) => m.matches && (self.local_pth_power || m.delta.is_some_and(|d| d != 0)),
        };
        self.relation_holds && self.dichotomy_holds && expansion_ok
    }
}

/// `sigma(x) x^{-mu}` in the residue ring.
pub fn sigma_twist(x: &RingElement, mu: u64) -> Result<RingElement> {
    Ok(&x.sigma() * &x.invert()?.pow(mu))
}

pub fn verify_unit_relation(eta: &RingElement, two_m: u64) -> Result<UnitReport> {
    let ctx = eta.ctx();
    if eta.k() < 2 {
        return Err(Error::InsufficientPrecision { k: eta.k(), needed: 2 });
    }
    check_two_m(ctx, two_m)?;
    let p = ctx.p();
    let mu = ctx.upow(two_m as i64);
    let depth = default_depth(p);

    let relation_holds = is_locally_pth_power(&sigma_twist(eta, mu)?, depth)?;
    let local_pth_power = is_locally_pth_power(eta, depth)?;
    let eta_pm1 = eta.pow(p - 1);
    let one = RingElement::one(ctx, eta.k())?;
    let valuation_of_eta_pm1 = valuation(&(&eta_pm1 - &one));
    let dichotomy_holds = local_pth_power || valuation_of_eta_pm1 == Valuation::Exact(two_m as u32);

    let expansion = if 2 * two_m > p - 1 {
        Some(expansion_matches(&eta_pm1, mu, p as u32 - 1)?)
    } else {
        None
    };
    Ok(UnitReport {
        two_m,
        mu,
        relation_holds,
        local_pth_power,
        valuation_of_eta_pm1,
        dichotomy_holds,
        expansion_delta: expansion.and_then(|m| m.delta),
        expansion,
    })
}

/// Exponents `rho_j = -l_j / (nu_j - mu) mod p` for the components `(nu_j, l_j)`.
pub fn solve_unit_adjustment(ctx: &PrimeContext, mu: u64, components: &[(u64, u64)]) -> Result<Vec<u64>> {
    let p = ctx.p();
    components
        .iter()
        .enumerate()
        .map(|(j, &(nu, l))| {
            let diff = (nu % p + p - mu % p) % p;
            if diff == 0 {
                return Err(Error::OutOfRange(format!(
                    "component {j} has nu = {nu} equal to mu = {mu} mod {p}"
                )));
            }
            let inv = ctx.inv(diff)?;
            Ok(mul_mod((p - l % p) % p, inv, p))
        })
        .collect()
}
