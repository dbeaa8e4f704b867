//! Checks of the congruence consequences that singular semi-primary integers
//! must satisfy, run against user-supplied candidate bundles.
//!
//! Membership in `K^p` is tested locally, modulo `pi^{p+1}`, and the ideal
//! condition `B O_K = b^p` only through its norm: `|N(B)| = p^t n^p`.
//! Three outcomes are kept apart: a report whose claims fail (theorem
//! violation), [`VerifyError::WitnessInvalid`] for witnesses that do not satisfy
//! their defining identity, and the other [`VerifyError`] variants for bundles
//! that never reach the claims.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::context::PrimeContext;
use crate::eigen::expansion_matches;
use crate::error::Error;
use crate::exact::{split_p_power, ExactElement};
use crate::padic::{default_depth, is_locally_pth_power, is_primary, is_semi_primary, valuation, Valuation};
use crate::ring::RingElement;
use crate::units::{projection_recipe, sigma_twist};

/// Seed used when neither the caller nor the environment supplies one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("malformed bundle: {0}")]
    Format(String),

    #[error("bundle field `{field}`: {message}")]
    Field { field: &'static str, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("witness invalid: {0}")]
    WitnessInvalid(String),
}

impl From<Error> for VerifyError {
    fn from(e: Error) -> Self {
        VerifyError::Precondition(e.to_string())
    }
}

/// How a verification run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    AllHold,
    TheoremViolation,
    WitnessInvalid,
    PreconditionViolation,
}

impl Outcome {
    pub fn of(result: &Result<VerdictReport, VerifyError>) -> Self {
        match result {
            Ok(r) if r.overall => Outcome::AllHold,
            Ok(_) => Outcome::TheoremViolation,
            Err(VerifyError::WitnessInvalid(_)) => Outcome::WitnessInvalid,
            Err(_) => Outcome::PreconditionViolation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Negative,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: String,
    /// `None` for skipped claims, whose `data` is `{"skipped": reason}`.
    pub holds: Option<bool>,
    pub data: Value,
}

impl Claim {
    pub fn skip_reason(&self) -> Option<&str> {
        self.holds.is_none().then(|| self.data["skipped"].as_str()).flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub overall: bool,
    pub claims: Vec<Claim>,
}

impl Default for VerdictReport {
    fn default() -> Self {
        Self {
            overall: true,
            claims: Vec::new(),
        }
    }
}

impl VerdictReport {
    pub fn record(&mut self, id: &str, reference: &str, holds: bool, data: Value) {
        self.overall &= holds;
        self.claims.push(Claim {
            id: id.to_string(),
            reference: reference.to_string(),
            holds: Some(holds),
            data,
        });
    }

    pub fn skip(&mut self, id: &str, reference: &str, reason: impl Into<String>) {
        self.claims.push(Claim {
            id: id.to_string(),
            reference: reference.to_string(),
            holds: None,
            data: json!({ "skipped": reason.into() }),
        });
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn extend(&mut self, other: VerdictReport) {
        self.overall &= other.overall;
        self.claims.extend(other.claims);
    }

    pub fn failed_claims(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| c.holds == Some(false))
    }
}

/// On-disk bundle layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub p: u64,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u64>,
    pub parity: Parity,
    pub mu: u64,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<String>>,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct CandidateBundle {
    ctx: Arc<PrimeContext>,
    k: u32,
    parity: Parity,
    mu: u64,
    index_s: usize,
    b: ExactElement,
    eta: Option<ExactElement>,
    beta: Option<ExactElement>,
    label: String,
}

impl CandidateBundle {
    /// Validate the bundle invariants: `K >= 2`; `mu` has the parity's sign
    /// under `mu^{(p-1)/2}`; `mu != u`; and `mu = u_s` with `s` odd in
    /// `[3, p-2]` (negative) or even in `[2, p-3]` (positive).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ctx: Arc<PrimeContext>,
        k: u32,
        parity: Parity,
        mu: u64,
        b: ExactElement,
        eta: Option<ExactElement>,
        beta: Option<ExactElement>,
        label: impl Into<String>,
    ) -> Result<Self, VerifyError> {
        let p = ctx.p();
        let field = |field, message: String| VerifyError::Field { field, message };
        if k < 2 {
            return Err(field("K", format!("precision K = {k} is below 2")));
        }
        crate::ring::modulus_for(p, k).map_err(|e| field("K", e.to_string()))?;
        if mu == 0 || mu >= p {
            return Err(field("mu", format!("mu = {mu} must lie in [1, {}]", p - 1)));
        }
        if mu == ctx.u() {
            return Err(field(
                "mu",
                format!("mu = u = {mu} is excluded: sigma - u does not annihilate the class"),
            ));
        }
        let sign = ctx.pow(mu, ctx.half());
        let s = ctx.index_of(mu as i64).map_err(|e| field("mu", e.to_string()))?;
        match parity {
            Parity::Negative if sign != p - 1 => {
                return Err(field(
                    "mu",
                    format!("negative parity needs mu^((p-1)/2) = -1, but mu = {mu} = u^{s} has even index"),
                ))
            }
            Parity::Positive if sign != 1 => {
                return Err(field(
                    "mu",
                    format!("positive parity needs mu^((p-1)/2) = 1, but mu = {mu} = u^{s} has odd index"),
                ))
            }
            Parity::Positive if s == 0 => {
                return Err(field("mu", "mu = 1 is not an admissible eigenvalue".to_string()))
            }
            _ => {}
        }
        for (name, e) in [("B", Some(&b)), ("eta", eta.as_ref()), ("beta", beta.as_ref())] {
            if let Some(e) = e {
                if e.p() != p {
                    return Err(field(name, format!("element is over p = {}, bundle has p = {p}", e.p())));
                }
            }
        }
        Ok(Self {
            ctx,
            k,
            parity,
            mu,
            index_s: s,
            b,
            eta,
            beta,
            label: label.into(),
        })
    }

    pub fn ctx(&self) -> &Arc<PrimeContext> {
        &self.ctx
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    /// The `s` with `mu = u_s`.
    pub fn index_s(&self) -> usize {
        self.index_s
    }

    pub fn b(&self) -> &ExactElement {
        &self.b
    }

    pub fn eta(&self) -> Option<&ExactElement> {
        self.eta.as_ref()
    }

    pub fn beta(&self) -> Option<&ExactElement> {
        self.beta.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same bundle with `B` replaced, bypassing nothing: invariants only involve
    /// the other fields.
    pub fn with_b(&self, b: ExactElement) -> Self {
        Self { b, ..self.clone() }
    }

    pub fn to_file(&self) -> BundleFile {
        BundleFile {
            p: self.ctx.p(),
            k: self.k,
            u: Some(self.ctx.u()),
            parity: self.parity,
            mu: self.mu,
            b: self.b.to_decimal_strings(),
            eta: self.eta.as_ref().map(ExactElement::to_decimal_strings),
            beta: self.beta.as_ref().map(ExactElement::to_decimal_strings),
            label: self.label.clone(),
        }
    }

    pub fn from_file(file: BundleFile) -> Result<Self, VerifyError> {
        let ctx = PrimeContext::new(file.p, file.u).map_err(|e| {
            let field = if matches!(e, Error::NotPrimitiveRoot { .. }) { "u" } else { "p" };
            VerifyError::Field {
                field,
                message: e.to_string(),
            }
        })?;
        let p = file.p;
        let parse = |field: &'static str, items: &[String]| {
            ExactElement::from_decimal_strings(p, items).map_err(|e| VerifyError::Field {
                field,
                message: e.to_string(),
            })
        };
        let b = parse("B", &file.b)?;
        let eta = file.eta.as_deref().map(|v| parse("eta", v)).transpose()?;
        let beta = file.beta.as_deref().map(|v| parse("beta", v)).transpose()?;
        Self::new(Arc::new(ctx), file.k, file.parity, file.mu, b, eta, beta, file.label)
    }
}

/// Parse and validate a bundle from JSON text.
pub fn load_bundle(text: &str) -> Result<CandidateBundle, VerifyError> {
    let file: BundleFile = serde_json::from_str(text).map_err(|e| VerifyError::Format(e.to_string()))?;
    CandidateBundle::from_file(file)
}

pub fn load_bundle_file(path: &std::path::Path) -> Result<CandidateBundle, VerifyError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| VerifyError::Format(format!("{}: {e}", path.display())))?;
    load_bundle(&text)
}

/// `|N(B)| = p^t n^p` for integers `t, n`.
fn norm_claim(b: &ExactElement, p: u64) -> (bool, Value) {
    let norm = b.norm();
    if norm.is_zero() {
        return (false, json!({ "norm": "0" }));
    }
    let (t, cofactor) = split_p_power(&norm, p);
    let root = cofactor.nth_root(p as u32);
    let holds = num_traits::pow(root.clone(), p as usize) == cofactor;
    let sign = if norm.is_negative() { -1 } else { 1 };
    (
        holds,
        json!({
            "norm": norm.to_string(),
            "sign": sign,
            "p_exponent": t,
            "cofactor_root": if holds { Value::String(root.to_string()) } else { Value::Null },
        }),
    )
}

fn valuation_json(v: Valuation) -> Value {
    serde_json::to_value(v).expect("valuation serializes")
}

/// Local test of `sigma(x) x^{-mu}` in `K^p`.
fn local_relation(x: &RingElement, mu: u64) -> Result<(bool, Value), VerifyError> {
    let twisted = sigma_twist(x, mu)?;
    let depth = default_depth(x.p());
    let holds = is_locally_pth_power(&twisted, depth)?;
    Ok((holds, json!({ "depth": depth, "local": true })))
}

/// `v(x - 1) = expected` unless `primary`.
fn valuation_law(report: &mut VerdictReport, id: &str, reference: &str, x: &RingElement, primary: bool, expected: usize) {
    if primary {
        report.skip(id, reference, "element is primary");
        return;
    }
    let one = RingElement::one(x.ctx(), x.k()).expect("precision validated");
    let v = valuation(&(x - &one));
    report.record(
        id,
        reference,
        v == Valuation::Exact(expected as u32),
        json!({ "valuation": valuation_json(v), "expected": expected }),
    );
}

fn expansion_claim(
    report: &mut VerdictReport,
    id: &str,
    reference: &str,
    x: &RingElement,
    mu: u64,
    primary: bool,
    index: usize,
) -> Result<(), VerifyError> {
    let p = x.p();
    if 2 * (index as u64) < p {
        report.skip(id, reference, format!("index {index} is not above (p-1)/2"));
        return Ok(());
    }
    let m = expansion_matches(x, mu, p as u32 - 1)?;
    let delta_ok = match m.delta {
        Some(d) => primary || d != 0,
        None => false,
    };
    report.record(
        id,
        reference,
        m.matches && delta_ok,
        json!({ "matches": m.matches, "delta": m.delta, "primary": primary }),
    );
    Ok(())
}

fn require_parity(bundle: &CandidateBundle, parity: Parity) -> Result<(), VerifyError> {
    if bundle.parity != parity {
        return Err(VerifyError::Precondition(format!(
            "bundle parity is {:?}, this check needs {:?}",
            bundle.parity, parity
        )));
    }
    Ok(())
}

const NOT_UNIT: &str = "B is not a unit at pi";

/// Checks for a negative candidate with `C = B / conj(B)` and `mu = u_{2m+1}`.
pub fn verify_negative_candidate(bundle: &CandidateBundle) -> Result<VerdictReport, VerifyError> {
    require_parity(bundle, Parity::Negative)?;
    let ctx = &bundle.ctx;
    let p = ctx.p();
    let s = bundle.index_s;
    let b = bundle.b.reduce(ctx, bundle.k)?;
    let mut report = VerdictReport::default();

    report.record(
        "semi_primary",
        "B = c mod pi^2, c prime to p",
        is_semi_primary(&b)?,
        Value::Null,
    );
    let (holds, data) = norm_claim(&bundle.b, p);
    report.record("norm_condition", "|N(B)| = p^t n^p", holds, data);

    if valuation(&b) != Valuation::Exact(0) {
        for (id, r) in [
            ("local_eigen_relation", "sigma(C) C^-mu in K^p (local)"),
            ("valuation_law", "pi^(2m+1) || C - 1"),
            ("expansion", "C = 1 - delta e_mu mod pi^(p-1)"),
        ] {
            report.skip(id, r, NOT_UNIT);
        }
        report.overall = false;
        return Ok(report);
    }

    let c = &b * &b.conjugate().invert()?;
    let (holds, data) = local_relation(&c, bundle.mu)?;
    report.record("local_eigen_relation", "sigma(C) C^-mu in K^p (local)", holds, data);

    let primary = is_primary(&c)?;
    valuation_law(&mut report, "valuation_law", "pi^(2m+1) || C - 1", &c, primary, s);
    expansion_claim(
        &mut report,
        "expansion",
        "C = 1 - delta e_mu mod pi^(p-1)",
        &c,
        bundle.mu,
        primary,
        s,
    )?;
    Ok(report)
}

/// Checks on `B' = B^2 / eta` given witnesses with `B conj(B) = eta beta^p`.
pub fn verify_b_prime(bundle: &CandidateBundle) -> Result<VerdictReport, VerifyError> {
    require_parity(bundle, Parity::Negative)?;
    let (eta, beta) = match (&bundle.eta, &bundle.beta) {
        (Some(e), Some(b)) => (e, b),
        (None, _) => return Err(VerifyError::Precondition("missing witness eta".into())),
        (_, None) => return Err(VerifyError::Precondition("missing witness beta".into())),
    };
    let ctx = &bundle.ctx;
    let p = ctx.p();

    let lhs = &bundle.b * &bundle.b.conjugate();
    let rhs = eta * &beta.pow(p);
    if lhs != rhs {
        return Err(VerifyError::WitnessInvalid(
            "B * conj(B) differs from eta * beta^p".into(),
        ));
    }
    if !eta.is_real() {
        return Err(VerifyError::WitnessInvalid("eta is not real".into()));
    }
    let eta_norm = eta.norm();
    if eta_norm.abs() != BigInt::from(1) {
        return Err(VerifyError::WitnessInvalid(format!(
            "eta is not a unit (norm {eta_norm})"
        )));
    }

    let mut report = VerdictReport::default();
    report.record("witness_identity", "B conj(B) = eta beta^p (exact)", true, Value::Null);
    report.record("eta_real", "conj(eta) = eta (exact)", true, json!({ "norm": eta_norm.to_string() }));

    let b = bundle.b.reduce(ctx, bundle.k)?;
    if valuation(&b) != Valuation::Exact(0) {
        report.skip("b_prime_local_eigen_relation", "sigma(B') B'^-mu in K^p (local)", NOT_UNIT);
        report.skip("b_prime_valuation_law", "pi^(2m+1) || B'^(p-1) - 1", NOT_UNIT);
        report.overall = false;
        return Ok(report);
    }
    let b_prime = &(&b * &b) * &eta.reduce(ctx, bundle.k)?.invert()?;
    let (holds, data) = local_relation(&b_prime, bundle.mu)?;
    report.record("b_prime_local_eigen_relation", "sigma(B') B'^-mu in K^p (local)", holds, data);
    let primary = is_primary(&b_prime)?;
    valuation_law(
        &mut report,
        "b_prime_valuation_law",
        "pi^(2m+1) || B'^(p-1) - 1",
        &b_prime.pow(p - 1),
        primary,
        bundle.index_s,
    );
    Ok(report)
}

/// Checks for a positive candidate with `mu = u_{2m}`.
pub fn verify_positive_candidate(bundle: &CandidateBundle) -> Result<VerdictReport, VerifyError> {
    require_parity(bundle, Parity::Positive)?;
    let ctx = &bundle.ctx;
    let p = ctx.p();
    let two_m = bundle.index_s;
    let b = bundle.b.reduce(ctx, bundle.k)?;
    let mut report = VerdictReport::default();

    report.record(
        "semi_primary",
        "B = c mod pi^2, c prime to p",
        is_semi_primary(&b)?,
        Value::Null,
    );
    let (holds, data) = norm_claim(&bundle.b, p);
    report.record("norm_condition", "|N(B)| = p^t n^p", holds, data);

    if valuation(&b) != Valuation::Exact(0) {
        for (id, r) in [
            ("local_eigen_relation", "sigma(B) B^-mu in K^p (local)"),
            ("valuation_law", "pi^(2m) || B^(p-1) - 1"),
            ("expansion", "B^(p-1) = 1 - delta e_mu mod pi^(p-1)"),
        ] {
            report.skip(id, r, NOT_UNIT);
        }
        report.overall = false;
        return Ok(report);
    }

    let (holds, data) = local_relation(&b, bundle.mu)?;
    report.record("local_eigen_relation", "sigma(B) B^-mu in K^p (local)", holds, data);

    let primary = is_primary(&b)?;
    let b_pm1 = b.pow(p - 1);
    valuation_law(&mut report, "valuation_law", "pi^(2m) || B^(p-1) - 1", &b_pm1, primary, two_m);
    expansion_claim(
        &mut report,
        "expansion",
        "B^(p-1) = 1 - delta e_mu mod pi^(p-1)",
        &b_pm1,
        bundle.mu,
        primary,
        two_m,
    )?;
    Ok(report)
}

/// Dispatch on parity; negative bundles carrying witnesses also get the `B'`
/// checks.
pub fn verify_bundle(bundle: &CandidateBundle) -> Result<VerdictReport, VerifyError> {
    match bundle.parity {
        Parity::Positive => verify_positive_candidate(bundle),
        Parity::Negative => {
            let mut report = verify_negative_candidate(bundle)?;
            if bundle.eta.is_some() || bundle.beta.is_some() {
                report.extend(verify_b_prime(bundle)?);
            }
            Ok(report)
        }
    }
}

/// Seeded campaign: for random `alpha` prime to `pi` and `beta = alpha mod pi`,
/// `v(alpha^p - beta^p) >= p + 1`.
pub fn check_ppower_congruence(
    ctx: &Arc<PrimeContext>,
    k: u32,
    trials: u64,
    seed: u64,
) -> Result<VerdictReport, VerifyError> {
    if k < 2 {
        return Err(Error::InsufficientPrecision { k, needed: 2 }.into());
    }
    let p = ctx.p();
    let modulus = crate::ring::modulus_for(p, k)?;
    let n = ctx.order();
    let depth = default_depth(p);
    let lambda = RingElement::lambda(ctx, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |rng: &mut ChaCha8Rng| {
        RingElement::from_residues(ctx, k, (0..n).map(|_| rng.gen_range(0..modulus)).collect())
    };

    let mut failures = 0u64;
    let mut min_valuation: Option<Valuation> = None;
    let mut first_failure = Value::Null;
    for _ in 0..trials {
        let alpha = loop {
            let a = random(&mut rng)?;
            if valuation(&a) == Valuation::Exact(0) {
                break a;
            }
        };
        let beta = &alpha + &(&lambda * &random(&mut rng)?);
        let v = valuation(&(&alpha.pow(p) - &beta.pow(p)));
        if !v.is_at_least(depth) {
            failures += 1;
            if first_failure.is_null() {
                first_failure = json!({ "alpha": alpha.to_string(), "beta": beta.to_string() });
            }
        }
        min_valuation = Some(match (min_valuation, v) {
            (None, v) => v,
            (Some(Valuation::AtLeast(_)), Valuation::Exact(x)) => Valuation::Exact(x),
            (Some(Valuation::Exact(a)), Valuation::Exact(b)) => Valuation::Exact(a.min(b)),
            (Some(old), _) => old,
        });
    }

    let mut report = VerdictReport::default();
    report.record(
        "ppower_congruence",
        "alpha = beta mod pi implies alpha^p = beta^p mod pi^(p+1)",
        failures == 0,
        json!({
            "p": p,
            "K": k,
            "seed": seed,
            "trials": trials,
            "failures": failures,
            "depth": depth,
            "min_valuation": min_valuation.map(valuation_json),
            "first_failure": first_failure,
        }),
    );
    Ok(report)
}

/// Positive bundle whose `B` is the projection of `xi_a` onto the `u_{2m}`
/// component, computed exactly.
pub fn unit_bundle(ctx: &Arc<PrimeContext>, k: u32, a: u64, two_m: u64) -> Result<CandidateBundle, VerifyError> {
    let recipe = projection_recipe(ctx, a, two_m)?;
    let eta = recipe.evaluate_exact(ctx)?;
    CandidateBundle::new(
        Arc::clone(ctx),
        k,
        Parity::Positive,
        ctx.upow(two_m as i64),
        eta,
        None,
        None,
        format!("projected cyclotomic unit p={} a={a} 2m={two_m}", ctx.p()),
    )
}
