//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::context::PrimeContext;
use crate::eigen::{canonical_eigenvector, EigenReport};
use crate::error::Error;
use crate::exact::ExactElement;
use crate::padic::{digits, LambdaExpansion};
use crate::units::{check_two_m, eigen_project_units, verify_unit_relation, UnitReport};
use crate::verify::{check_ppower_congruence, load_bundle_file, verify_bundle, VerdictReport, VerifyError, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_WITNESS_INVALID: i32 = 3;

pub const SEED_ENV: &str = "PI_SINGULAR_SEED";

#[derive(Debug, Parser)]
#[command(name = "pi-singular", version, about = "Exact pi-adic arithmetic in Z[zeta_p]")]
pub struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Coefficient precision K: residues are taken mod p^K.
    #[arg(long = "k", global = true, default_value_t = 2)]
    pub k: u32,

    /// RNG seed; overrides PI_SINGULAR_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the primitive-root tables for p.
    Ctx {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        u: Option<u64>,
    },
    /// Scan odd primes up to MAX for p | B_2m.
    Irregular {
        #[arg(long)]
        max: u64,
    },
    /// Eigenvectors of sigma over F_p.
    Eigen {
        #[arg(long)]
        p: u64,
        #[arg(long, conflicts_with = "all")]
        mu: Option<u64>,
        #[arg(long)]
        all: bool,
    },
    /// Lambda-adic digits and valuation of an element.
    Expand {
        #[arg(long)]
        p: u64,
        /// Coefficients c0,c1,...,c_{p-2} in the power basis.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: String,
        /// Number of digits; defaults to p + 1.
        #[arg(long)]
        precision: Option<u32>,
    },
    /// Random campaign for alpha = beta mod pi implying alpha^p = beta^p mod pi^(p+1).
    Ppower {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Projected cyclotomic units and their congruences.
    Units(UnitsArgs),
    /// Check a candidate bundle file.
    Verify {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct UnitsArgs {
    #[arg(long)]
    pub p: u64,
    /// Base of xi_a; repeat to multiply projections of several bases.
    #[arg(long = "a", default_values_t = [2u64])]
    pub a: Vec<u64>,
    #[arg(long = "two-m", conflicts_with = "all")]
    pub two_m: Option<u64>,
    #[arg(long)]
    pub all: bool,
}

enum Failure {
    Usage(String),
    WitnessInvalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::WitnessInvalid(_) => Failure::WitnessInvalid(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Command output: the JSON document, its text rendering, and whether every
/// claim held.
struct Rendered {
    json: Value,
    text: String,
    ok: bool,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Resolve the seed: flag, then environment, then the default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}={v:?} is not a non-negative integer")),
        None => Ok(DEFAULT_SEED),
    }
}

/// Run with `argv[0]` the program name; returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let seed = match resolve_seed(cli.seed, env_seed.as_deref()) {
        Ok(s) => s,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };

    match dispatch(&cli, seed) {
        Ok(r) => {
            let written = if cli.json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r.json).expect("json"))
            } else {
                write!(out, "{}", r.text)
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            if r.ok {
                EXIT_OK
            } else {
                EXIT_CLAIM_FAILED
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::WitnessInvalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_WITNESS_INVALID
        }
    }
}

fn context(p: u64, u: Option<u64>) -> Result<Arc<PrimeContext>, Failure> {
    Ok(Arc::new(PrimeContext::new(p, u)?))
}

fn dispatch(cli: &Cli, seed: u64) -> Result<Rendered, Failure> {
    match &cli.command {
        Command::Ctx { p, u } => cmd_ctx(*p, *u),
        Command::Irregular { max } => cmd_irregular(*max),
        Command::Eigen { p, mu, .. } => cmd_eigen(*p, *mu),
        Command::Expand { p, coeffs, precision } => cmd_expand(*p, coeffs, *precision, cli.k),
        Command::Ppower { p, trials } => cmd_ppower(*p, *trials, seed, cli.k),
        Command::Units(args) => cmd_units(args, cli.k),
        Command::Verify { file } => cmd_verify(file),
    }
}

fn cmd_ctx(p: u64, u: Option<u64>) -> Result<Rendered, Failure> {
    let ctx = context(p, u)?;
    let upow = ctx.upow_table().to_vec();
    // index table over 1..p-1
    let index: Vec<usize> = (1..p as i64).map(|a| ctx.index_of(a).expect("nonzero")).collect();
    let mut text = format!("p = {p}\nu = {}\n  i  u_i\n", ctx.u());
    for (i, x) in upow.iter().enumerate() {
        text.push_str(&format!("{i:>3}  {x:>3}\n"));
    }
    Ok(Rendered {
        json: json!({ "p": p, "u": ctx.u(), "upow": upow, "index": index }),
        text,
        ok: true,
    })
}

/// Odd primes `p <= max` and even `2m <= p - 3` with `p | B_2m`.
pub fn irregular_scan(max: u64) -> Vec<(u64, u64)> {
    (3..=max)
        .filter(|&n| crate::arith::is_prime(n))
        .flat_map(|p| {
            let ctx = PrimeContext::new(p, None).expect("odd prime");
            ctx.irregular_pairs().into_iter().map(move |k| (p, k))
        })
        .collect()
}

fn cmd_irregular(max: u64) -> Result<Rendered, Failure> {
    let pairs = irregular_scan(max);
    let mut text = String::new();
    for (p, k) in &pairs {
        text.push_str(&format!("({p}, {k})\n"));
    }
    if pairs.is_empty() {
        text.push_str("none\n");
    }
    let list: Vec<Value> = pairs.iter().map(|(p, k)| json!({ "p": p, "two_m": k })).collect();
    Ok(Rendered {
        json: json!({ "max": max, "pairs": list }),
        text,
        ok: true,
    })
}

fn cmd_eigen(p: u64, mu: Option<u64>) -> Result<Rendered, Failure> {
    let ctx = context(p, None)?;
    let reports: Vec<EigenReport> = match mu {
        Some(mu) => vec![canonical_eigenvector(&ctx, mu)?],
        None => (1..p as i64 - 1)
            .map(|s| canonical_eigenvector(&ctx, ctx.upow(s)))
            .collect::<Result<_, _>>()?,
    };
    let ok = reports.iter().all(|r| r.matches_closed_form);
    let mut text = String::from("  s   mu  valuation  closed_form\n");
    for r in &reports {
        text.push_str(&format!(
            "{:>3}  {:>3}  {:>9}  {}\n",
            r.index_s, r.mu, r.valuation.to_string(), r.matches_closed_form
        ));
    }
    Ok(Rendered {
        json: json!({ "p": p, "u": ctx.u(), "reports": to_value(&reports) }),
        text,
        ok,
    })
}

fn cmd_expand(p: u64, coeffs: &str, precision: Option<u32>, k: u32) -> Result<Rendered, Failure> {
    let ctx = context(p, None)?;
    let n = precision.unwrap_or(p as u32 + 1);
    let element = ExactElement::parse(p, coeffs)?;
    let needed = n.div_ceil(p as u32 - 1).max(1);
    let a = element.reduce(&ctx, k.max(needed))?;
    let e: LambdaExpansion = digits(&a, n)?;
    let digits_text: Vec<String> = e.digits.iter().map(u64::to_string).collect();
    let text = format!(
        "valuation = {}\ndigits = {}\nprecision = {}\n",
        match e.valuation {
            crate::padic::Valuation::Exact(v) => v.to_string(),
            crate::padic::Valuation::AtLeast(_) => "cap".to_string(),
        },
        digits_text.join(","),
        e.precision
    );
    Ok(Rendered {
        json: to_value(&e),
        text,
        ok: true,
    })
}

fn cmd_ppower(p: u64, trials: u64, seed: u64, k: u32) -> Result<Rendered, Failure> {
    let ctx = context(p, None)?;
    let report = check_ppower_congruence(&ctx, k, trials, seed)?;
    let claim = &report.claims[0];
    let text = format!(
        "p = {p}  K = {k}  seed = {seed}  trials = {trials}  failures = {}  min valuation = {}\n{}\n",
        claim.data["failures"],
        claim.data["min_valuation"],
        if report.overall { "holds" } else { "FAILS" }
    );
    Ok(Rendered {
        json: to_value(&report),
        text,
        ok: report.overall,
    })
}

fn cmd_units(args: &UnitsArgs, k: u32) -> Result<Rendered, Failure> {
    let ctx = context(args.p, None)?;
    let p = args.p;
    let indices: Vec<u64> = match args.two_m {
        Some(t) => {
            check_two_m(&ctx, t)?;
            vec![t]
        }
        None => (2..=p.saturating_sub(3)).step_by(2).collect(),
    };
    let mut reports: Vec<UnitReport> = Vec::with_capacity(indices.len());
    for &two_m in &indices {
        let (eta, _) = eigen_project_units(&ctx, k, &args.a, two_m)?;
        reports.push(verify_unit_relation(&eta, two_m)?);
    }
    let ok = reports.iter().all(UnitReport::all_hold);
    let mut text = String::from(" 2m   mu  relation  p-th power  v(eta^(p-1)-1)  dichotomy  delta\n");
    for r in &reports {
        let delta = match (&r.expansion, r.expansion_delta) {
            (None, _) => "-".to_string(),
            (Some(m), Some(d)) if m.matches => d.to_string(),
            _ => "no match".to_string(),
        };
        text.push_str(&format!(
            "{:>3}  {:>3}  {:>8}  {:>10}  {:>14}  {:>9}  {}\n",
            r.two_m,
            r.mu,
            r.relation_holds,
            r.local_pth_power,
            r.valuation_of_eta_pm1.to_string(),
            r.dichotomy_holds,
            delta
        ));
    }
    Ok(Rendered {
        json: json!({ "p": p, "u": ctx.u(), "K": k, "a": args.a, "reports": to_value(&reports) }),
        text,
        ok,
    })
}

fn report_text(report: &VerdictReport) -> String {
    let mut text = String::new();
    for c in &report.claims {
        let status = match c.holds {
            Some(true) => "holds".to_string(),
            Some(false) => "FAILS".to_string(),
            None => format!("skipped ({})", c.skip_reason().unwrap_or("")),
        };
        text.push_str(&format!("{:<30} {:<45} {}\n", c.id, c.reference, status));
    }
    text.push_str(if report.overall { "overall: holds\n" } else { "overall: FAILS\n" });
    text
}

fn cmd_verify(file: &std::path::Path) -> Result<Rendered, Failure> {
    let bundle = load_bundle_file(file)?;
    let report = verify_bundle(&bundle)?;
    Ok(Rendered {
        json: to_value(&report),
        text: format!("{}\n{}", bundle.label(), report_text(&report)),
        ok: report.overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("pi-singular").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eigen_all_p5() {
        let (code, out, _) = run_args(&["eigen", "--p", "5", "--all", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let reports = v["reports"].as_array().unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r["matches_closed_form"] == json!(true)));
    }

    #[test]
    fn expand_five() {
        let (code, out, _) = run_args(&["expand", "--p", "5", "--coeffs", "5,0,0,0", "--precision", "5", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["valuation"], json!(4));
        assert_eq!(v["digits"], json!([0, 0, 0, 0, 4]));
        assert_eq!(v["precision"], json!(5));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["valuation", "digits", "precision"]);

        let (_, out, _) = run_args(&["expand", "--p", "5", "--coeffs", "0,0,0,0", "--json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["valuation"], json!("cap"));
    }

    #[test]
    fn irregular_to_40() {
        let (code, out, _) = run_args(&["irregular", "--max", "40", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pairs"], json!([{ "p": 37, "two_m": 32 }]));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["eigen", "--p", "9"]).0, 2);
        assert_eq!(run_args(&["nope"]).0, 2);
        assert_eq!(run_args(&["expand", "--p", "5", "--coeffs", "1e3,0,0,0"]).0, 2);
        assert_eq!(run_args(&["expand", "--p", "5", "--coeffs", "1,0"]).0, 2);
        assert_eq!(run_args(&["units", "--p", "7", "--two-m", "3"]).0, 2);
        assert_eq!(run_args(&["verify", "--file", "/nonexistent/bundle.json"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(7), Some("9")), Ok(7));
        assert_eq!(resolve_seed(None, Some("9")), Ok(9));
        assert_eq!(resolve_seed(None, None), Ok(DEFAULT_SEED));
        assert!(resolve_seed(None, Some("x")).is_err());
    }

    #[test]
    fn verify_json_is_the_bare_report() {
        let dir = std::env::temp_dir().join(format!("pi-singular-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("one.json");
        std::fs::write(&path, r#"{"p":5,"K":2,"parity":"positive","mu":4,"B":["1","0","0","0"],"label":"one"}"#).unwrap();
        let (code, out, _) = run_args(&["verify", "--json", "--file", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["overall", "claims"]);
        for claim in v["claims"].as_array().unwrap() {
            let keys: Vec<&String> = claim.as_object().unwrap().keys().collect();
            assert_eq!(keys, ["id", "ref", "holds", "data"]);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn units_sweep_text() {
        let (code, out, _) = run_args(&["units", "--p", "7", "--all"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().count(), 3);
    }
}
