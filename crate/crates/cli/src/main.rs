use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cobordlab::actions::{realize, CharacterGroup};
use cobordlab::bounds::{main_bound_report, milnor_divisibility_check, ratio_bound, small_fixed_divisibility, DivisibilityReport};
use cobordlab::cobordism::{
    check_order, dim_q_direct, dim_q_via_generators, express_in_generators, standard_generators_cached, GeneratorFamily,
    Membership,
};
use cobordlab::equivariant::{localization_check, EqProjClass};
use cobordlab::expr::parse_expr_with_notes;
use cobordlab::fpring::Fp;
use cobordlab::partitions::{rho_q, IndexSet};
use cobordlab::selftest::{Suite, CRITERIA};
use cobordlab::{parse_bpoly, BPoly, ChernCalculator};

const RAW_DEFAULT_MAX_WEIGHT: u32 = 16;
const DEFAULT_SEED: u64 = 20240601;

#[derive(Parser)]
#[command(name = "cobordlab", version, about = "Chern numbers mod p, generator expressions and fixed-point bounds")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// The prime p.
    #[arg(short = 'p', long = "prime", global = true, default_value_t = 2)]
    prime: u32,
    /// Group order q, a power of p.
    #[arg(short = 'q', long = "order", global = true)]
    order: Option<u32>,
    /// Truncation weight (default: dimension of the expression, or 16 for raw classes).
    #[arg(long, global = true)]
    max_weight: Option<u32>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Generator cache file (COBORDLAB_CACHE overrides).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Generator family: `standard` or `perturbed(SEED)`.
    #[arg(long, global = true, default_value = "standard")]
    family: FamilyChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyChoice {
    Standard,
    Perturbed(u64),
}

impl std::str::FromStr for FamilyChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "standard" {
            return Ok(FamilyChoice::Standard);
        }
        let seed = s
            .strip_prefix("perturbed(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("perturbed:"))
            .ok_or_else(|| format!("expected `standard` or `perturbed(SEED)`, got `{s}`"))?;
        seed.trim().parse().map(FamilyChoice::Perturbed).map_err(|e| format!("bad seed `{seed}`: {e}"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Chern numbers mod p of a variety expression.
    Class { input: String },
    /// Write a class as a polynomial in the generators.
    Express {
        input: String,
        /// Exit with status 2 if the class is not in L_p.
        #[arg(long)]
        require_member: bool,
    },
    /// dim_q computed directly and through the generator expression.
    Dimq { input: String },
    /// Lower bounds on the fixed-locus dimension and their divisibility consequences.
    Bound {
        input: String,
        #[arg(long, value_enum, default_value_t = BoundKind::Main)]
        kind: BoundKind,
        /// Index set A for the ratio bound: `np`, `np-5,9`, `1,2,4` or `empty`.
        #[arg(long = "set")]
        set: Option<String>,
        /// Maximal number of factors indexed by A.
        #[arg(short = 's', long, default_value_t = 0)]
        s: u32,
        /// Fixed-locus dimension d (default: dim_q of the class).
        #[arg(short = 'd', long, allow_negative_numbers = true)]
        d: Option<i64>,
    },
    /// An action on a variety with the given class whose fixed locus has dimension dim_q.
    Realize {
        input: String,
        /// Invariant factors of the group, comma separated (default: cyclic of order q).
        #[arg(long)]
        group: Option<String>,
    },
    /// rho_q of an index set.
    Rho {
        /// `np`, `np-5,9`, `1,2,4` or `empty`.
        #[arg(default_value = "np")]
        set: String,
    },
    /// Both sides of the fixed-point degree identity for zeta^a t^b on P(V).
    Localize {
        /// Characters of the summands of V, comma separated.
        #[arg(long)]
        weights: String,
        /// Exponent of zeta.
        #[arg(long, default_value_t = 0)]
        zeta: u32,
        /// Exponent of t.
        #[arg(long, default_value_t = 0)]
        t: u32,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        coeff: i64,
        #[arg(short = 'r', long, default_value_t = 1)]
        r: u32,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Run only these criteria.
        #[arg(long = "criterion", value_parser = clap::value_parser!(u32).range(1..=i64::from(CRITERIA)))]
        criteria: Vec<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Main,
    Ratio,
    Small,
    Milnor,
}

/// A check that should hold by theory but did not.
#[derive(Debug)]
struct AssertionFailure(String);

impl fmt::Display for AssertionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "assertion failed: {}", self.0)
    }
}

impl std::error::Error for AssertionFailure {}

/// Result of a command: what to print, and whether it is a failure.
struct Output {
    json: Value,
    text: String,
    failure: Option<AssertionFailure>,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, failure: None }
    }
}

struct Input {
    class: BPoly,
    expression: Option<String>,
    notes: Vec<String>,
}

struct Session<'a> {
    g: &'a Global,
}

impl Session<'_> {
    fn p(&self) -> Result<u32> {
        Fp::new(self.g.prime)?;
        Ok(self.g.prime)
    }

    fn q(&self) -> Result<u32> {
        let q = self.g.order.context("this command needs -q/--order")?;
        check_order(q, self.p()?)?;
        Ok(q)
    }

    fn cache_path(&self) -> Option<PathBuf> {
        if let Some(v) = std::env::var_os("COBORDLAB_CACHE").filter(|v| !v.is_empty()) {
            return Some(PathBuf::from(v));
        }
        if let Some(path) = &self.g.cache {
            return Some(path.clone());
        }
        std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cobordlab").join("cache.json"))
    }

    fn input(&self, text: &str) -> Result<Input> {
        let p = self.p()?;
        if text.contains("b[") {
            let mw = self.g.max_weight.unwrap_or(RAW_DEFAULT_MAX_WEIGHT);
            return Ok(Input { class: parse_bpoly(text, p, mw)?, expression: None, notes: Vec::new() });
        }
        let (expr, notes) = parse_expr_with_notes(text)?;
        if !self.g.json {
            for note in &notes {
                eprintln!("note: {note}");
            }
        }
        let mw = self.g.max_weight.unwrap_or(expr.dim().max(0) as u32);
        let class = ChernCalculator::new(p)?.chern_numbers(&expr, mw)?;
        Ok(Input { class, expression: Some(expr.to_string()), notes })
    }

    fn family(&self, max_weight: u32) -> Result<GeneratorFamily> {
        let cache = self.cache_path();
        let fam = standard_generators_cached(self.p()?, max_weight, cache.as_deref())?;
        Ok(match self.g.family {
            FamilyChoice::Standard => fam,
            FamilyChoice::Perturbed(seed) => fam.perturbed(seed)?,
        })
    }
}

fn input_json(input: &Input) -> Value {
    json!({ "expression": input.expression, "notes": input.notes, "class": input.class })
}

fn label(input: &Input) -> String {
    input.expression.clone().unwrap_or_else(|| input.class.to_string())
}

fn parse_list(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().with_context(|| format!("bad integer `{s}`")))
        .collect()
}

fn parse_index_set(text: &str, p: u32) -> Result<IndexSet> {
    let t = text.trim();
    if t == "empty" {
        return Ok(IndexSet::finite([]));
    }
    if let Some(rest) = t.strip_prefix("np") {
        let rest = rest.trim();
        if rest.is_empty() {
            return Ok(IndexSet::np(p));
        }
        let excluded = rest.strip_prefix('-').with_context(|| format!("bad index set `{t}`"))?;
        return Ok(IndexSet::np_minus(p, parse_list(excluded)?));
    }
    Ok(IndexSet::finite(parse_list(t)?))
}

fn divisibility_output(kind: &str, input: &Input, d: i64, q: u32, report: DivisibilityReport) -> Output {
    let json = json!({ "kind": kind, "input": input_json(input), "d": d, "q": q, "report": report });
    let mut text = format!(
        "{kind} divisibility for {} at d = {d}: required {}, expression {}: {}",
        label(input),
        report.required,
        report.expression,
        if report.holds { "holds" } else { "FAILS" }
    );
    let failure = report.counterexample.as_ref().map(|b| {
        text.push_str(&format!(" (monomial X{b})"));
        AssertionFailure(format!("{kind} divisibility fails at monomial X{b}"))
    });
    Output { json, text, failure }
}

fn default_d(d: Option<i64>, x: &BPoly, q: u32) -> Result<i64> {
    match d {
        Some(d) => Ok(d),
        None => dim_q_direct(x, q).value().context("the class is zero; pass -d explicitly"),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    let ctx = Session { g: &cli.global };
    match &cli.command {
        Command::Class { input } => {
            let input = ctx.input(input)?;
            let text = format!("[{}] = {}", label(&input), input.class);
            Ok(Output::ok(input_json(&input), text))
        }
        Command::Express { input, require_member } => {
            let input = ctx.input(input)?;
            let fam = ctx.family(input.class.max_weight())?;
            let m = express_in_generators(&input.class, &fam)?;
            let text = match &m {
                Membership::Member { poly } => format!("[{}] = {}", label(&input), poly),
                Membership::NotInLp { witness } => {
                    format!("[{}] is not in L_{}; first inconsistent coefficient at {witness}", label(&input), fam.p())
                }
            };
            let json = json!({ "input": input_json(&input), "family": family_json(&fam), "result": m });
            if *require_member {
                m.clone().into_result()?;
            }
            Ok(Output::ok(json, text))
        }
        Command::Dimq { input } => {
            let q = ctx.q()?;
            let input = ctx.input(input)?;
            let fam = ctx.family(input.class.max_weight())?;
            let direct = dim_q_direct(&input.class, q);
            let via = dim_q_via_generators(&input.class, q, &fam)?;
            let json = json!({ "direct": direct, "viaGenerators": via });
            let text = format!("dim_{q} [{}]: direct {direct}, via generators {via}", label(&input));
            let failure = (direct != via).then(|| AssertionFailure(format!("dim_q direct {direct} != via generators {via}")));
            Ok(Output { json, text, failure })
        }
        Command::Bound { input, kind, set, s, d } => {
            let input = ctx.input(input)?;
            match kind {
                BoundKind::Main => {
                    let r = main_bound_report(&input.class, ctx.q()?)?;
                    let text = format!("dim X^G >= {} for X = {}", r.bound, label(&input));
                    Ok(Output::ok(serde_json::to_value(&r)?, text))
                }
                BoundKind::Ratio => {
                    let q = ctx.q()?;
                    let set = set.as_deref().context("the ratio bound needs --set")?;
                    let a = parse_index_set(set, ctx.p()?)?;
                    let fam = ctx.family(input.class.max_weight())?;
                    let r = ratio_bound(&input.class, &a, *s, q, &fam)?;
                    let text = format!("dim X^G >= {} for X = {} ({})", r.bound, label(&input), r.hypothesis_checked);
                    let main = dim_q_direct(&input.class, q);
                    let failure = (r.bound > main)
                        .then(|| AssertionFailure(format!("ratio bound {} exceeds dim_q = {main}", r.bound)));
                    Ok(Output { json: serde_json::to_value(&r)?, text, failure })
                }
                BoundKind::Small => {
                    let q = ctx.q()?;
                    let d = default_d(*d, &input.class, q)?;
                    let fam = ctx.family(input.class.max_weight())?;
                    let r = small_fixed_divisibility(&input.class, q, d, &fam)?;
                    Ok(divisibility_output("small", &input, d, q, r))
                }
                BoundKind::Milnor => {
                    let d = default_d(*d, &input.class, 2)?;
                    let fam = ctx.family(input.class.max_weight())?;
                    let r = milnor_divisibility_check(&input.class, d, &fam)?;
                    Ok(divisibility_output("milnor", &input, d, 2, r))
                }
            }
        }
        Command::Realize { input, group } => {
            let p = ctx.p()?;
            let g = match group {
                Some(factors) => CharacterGroup::new(p, parse_list(factors)?)?,
                None => CharacterGroup::cyclic(p, ctx.q()?)?,
            };
            let input = ctx.input(input)?;
            let fam = ctx.family(input.class.max_weight())?;
            let r = realize(&input.class, &g, &fam)?;
            let text = format!(
                "[{}] realized by {} with fixed locus of dimension {}",
                label(&input),
                r.expression,
                r.achieved_dim
            );
            let json = json!({ "input": input_json(&input), "group": g.invariant_factors(), "realization": r });
            Ok(Output::ok(json, text))
        }
        Command::Rho { set } => {
            let p = ctx.p()?;
            let q = ctx.q()?;
            let a = parse_index_set(set, p)?;
            let rho = rho_q(&a, q);
            let json = json!({ "set": a, "q": q, "rho": rho.to_string() });
            Ok(Output::ok(json, format!("rho_{q}({set}) = {rho}")))
        }
        Command::Localize { weights, zeta, t, coeff, r } => {
            let p = ctx.p()?;
            let w = parse_list(weights)?;
            let y = EqProjClass::monomial(p, &w, *zeta, *t, *coeff)?;
            let (lhs, rhs) = localization_check(&y, *r)?;
            let json = json!({ "p": p, "weights": w, "zeta": zeta, "t": t, "coeff": coeff, "r": r, "lhs": lhs, "rhs": rhs });
            let text = format!("lhs = {lhs}, rhs = {rhs}");
            let failure = (lhs != rhs).then(|| AssertionFailure(format!("localization lhs {lhs} != rhs {rhs}")));
            Ok(Output { json, text, failure })
        }
        Command::Selftest { seed, criteria } => {
            let mut suite = Suite::new(*seed, ctx.cache_path());
            let reports = if criteria.is_empty() {
                suite.run_all()
            } else {
                criteria.iter().map(|&id| suite.run(id)).collect()
            };
            let passed = reports.iter().filter(|r| r.passed).count();
            let mut text: Vec<String> = reports.iter().map(ToString::to_string).collect();
            text.push(format!("{passed} of {} criteria passed", reports.len()));
            let json = json!({
                "seed": seed,
                "passed": passed,
                "total": reports.len(),
                "criteria": reports
                    .iter()
                    .map(|r| json!({ "id": r.id, "title": r.title, "passed": r.passed, "cases": r.cases, "detail": r.detail }))
                    .collect::<Vec<_>>(),
            });
            let failure = (passed != reports.len())
                .then(|| AssertionFailure(format!("{} criteria failed", reports.len() - passed)));
            Ok(Output { json, text: text.join("\n"), failure })
        }
    }
}

fn family_json(fam: &GeneratorFamily) -> Value {
    json!({ "p": fam.p(), "maxWeight": fam.max_weight(), "provenance": fam.provenance() })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<AssertionFailure>().is_some() {
        return 3;
    }
    match err.downcast_ref::<cobordlab::Error>() {
        Some(cobordlab::Error::NotInLp { .. }) => 2,
        Some(cobordlab::Error::Invariant(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON values serialize"));
            } else {
                println!("{}", out.text);
            }
            match out.failure {
                Some(f) => {
                    eprintln!("error: {f}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_choices() {
        assert_eq!("standard".parse::<FamilyChoice>().unwrap(), FamilyChoice::Standard);
        assert_eq!("perturbed(7)".parse::<FamilyChoice>().unwrap(), FamilyChoice::Perturbed(7));
        assert_eq!("perturbed:9".parse::<FamilyChoice>().unwrap(), FamilyChoice::Perturbed(9));
        assert!("perturbed()".parse::<FamilyChoice>().is_err());
        assert!("other".parse::<FamilyChoice>().is_err());
    }

    #[test]
    fn index_sets() {
        assert_eq!(parse_index_set("np", 2).unwrap(), IndexSet::np(2));
        assert_eq!(parse_index_set("np-5", 2).unwrap(), IndexSet::np_minus(2, [5]));
        assert_eq!(parse_index_set("1, 2,4", 3).unwrap(), IndexSet::finite([1, 2, 4]));
        assert_eq!(parse_index_set("empty", 3).unwrap(), IndexSet::finite([]));
        assert!(parse_index_set("np+5", 2).is_err());
    }

    #[test]
    fn exit_codes() {
        let not_in = anyhow::Error::from(cobordlab::Error::NotInLp { witness: [2, 1, 1].into() });
        assert_eq!(exit_code(&not_in), 2);
        assert_eq!(exit_code(&anyhow::Error::from(AssertionFailure("x".into()))), 3);
        assert_eq!(exit_code(&anyhow::Error::from(cobordlab::Error::NotPrime(4))), 1);
    }
}
