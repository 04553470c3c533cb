//! The acceptance suite, shared by the `acceptance` test target and the
//! `selftest` command.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::actions::{
    construct_action_h, construct_action_l, construct_action_p, milnor_fixed_dim_formula, realize_with,
    CharacterGroup, WeightedVariety,
};
use crate::bounds::{main_bound, milnor_divisibility_check, small_fixed_divisibility};
use crate::chow::{Atom, ChernCalculator};
use crate::cobordism::{
    dim_q_direct, dim_q_via_generators, evaluate_gen_poly, express_in_generators, random_gen_poly,
    standard_generators_cached, GeneratorFamily, Membership,
};
use crate::dim::Dim;
use crate::equivariant::{f_poly, localization_check, phi, phi_closed_form, EqProjClass};
use crate::error::{Error, Result};
use crate::fpring::{is_power_of, np_contains, BPoly, Fp, GenPoly};
use crate::partitions::{partitions_of, IndexSet, Partition};

/// Largest weight used by the randomized criteria.
pub const SUITE_MAX_WEIGHT: u32 = 16;
pub const CRITERIA: u32 = 12;

const DIMQ_CONFIGS: [(u32, u32); 5] = [(2, 2), (2, 4), (2, 8), (3, 3), (3, 9)];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2}: {} ({} cases, {:.2}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.cases,
            self.seconds,
            self.detail
        )
    }
}

fn title(id: u32) -> &'static str {
    match id {
        1 => "class of P^4 mod 2",
        2 => "c_(i)(P^i) = -(i+1)",
        3 => "c_(i) of Milnor generators = k",
        4 => "L_2 membership",
        5 => "dim_q direct = via generators",
        6 => "realizer achieves dim_q",
        7 => "Boardman ratio 2/5",
        8 => "localization identity",
        9 => "phi closed form and f_i divisibility",
        10 => "fixed dims of P and H actions",
        11 => "fixed dim >= main bound",
        12 => "divisibility corollaries",
        _ => "unknown",
    }
}

struct Collected {
    action: WeightedVariety,
    p: u32,
    q: u32,
    class: Option<BPoly>,
}

/// Outcome of one criterion body: number of cases checked, or a failure.
type Outcome = std::result::Result<(usize, String), String>;

fn fail<T>(msg: impl Into<String>) -> std::result::Result<T, String> {
    Err(msg.into())
}

fn ok_or_fail<T>(r: Result<T>, ctx: impl fmt::Display) -> std::result::Result<T, String> {
    r.map_err(|e| format!("{ctx}: {e}"))
}

/// All abelian groups with `|Ĝ| = q`, as lists of invariant factors.
pub fn groups_of_order(p: u32, q: u32) -> Vec<CharacterGroup> {
    fn rec(p: u32, rest: u32, max: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 1 {
            out.push(acc.clone());
            return;
        }
        let mut f = p;
        while f <= rest.min(max) {
            if rest % f == 0 {
                acc.push(f);
                rec(p, rest / f, f, acc, out);
                acc.pop();
            }
            f *= p;
        }
    }
    let mut out = Vec::new();
    rec(p, q, q, &mut Vec::new(), &mut out);
    out.into_iter().map(|f| CharacterGroup::new(p, f).expect("valid factors")).collect()
}

/// Runs the acceptance criteria with shared caches.
pub struct Suite {
    seed: u64,
    cache: Option<PathBuf>,
    calcs: BTreeMap<u32, ChernCalculator>,
    families: BTreeMap<u32, GeneratorFamily>,
    perturbed: BTreeMap<u32, GeneratorFamily>,
    collected: Vec<Collected>,
    ran: Vec<u32>,
}

impl Suite {
    pub fn new(seed: u64, cache: Option<PathBuf>) -> Self {
        Suite {
            seed,
            cache,
            calcs: BTreeMap::new(),
            families: BTreeMap::new(),
            perturbed: BTreeMap::new(),
            collected: Vec::new(),
            ran: Vec::new(),
        }
    }

    fn rng(&self, id: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(u64::from(id)))
    }

    fn calc(&mut self, p: u32) -> &ChernCalculator {
        self.calcs.entry(p).or_insert_with(|| ChernCalculator::new(p).expect("prime"))
    }

    fn family(&mut self, p: u32) -> Result<&GeneratorFamily> {
        if !self.families.contains_key(&p) {
            let fam = standard_generators_cached(p, SUITE_MAX_WEIGHT, self.cache.as_deref())?;
            self.families.insert(p, fam);
        }
        Ok(&self.families[&p])
    }

    fn perturbed_family(&mut self, p: u32) -> Result<&GeneratorFamily> {
        if !self.perturbed.contains_key(&p) {
            let seed = self.seed;
            let fam = self.family(p)?.perturbed(seed)?;
            self.perturbed.insert(p, fam);
        }
        Ok(&self.perturbed[&p])
    }

    pub fn run_all(&mut self) -> Vec<CriterionReport> {
        (1..=CRITERIA).map(|id| self.run(id)).collect()
    }

    /// Runs one criterion. Criterion 11 first runs the criteria whose
    /// actions it audits, if they have not run yet.
    pub fn run(&mut self, id: u32) -> CriterionReport {
        if id == 11 {
            for dep in [6, 10] {
                if !self.ran.contains(&dep) {
                    self.run(dep);
                }
            }
        }
        let start = Instant::now();
        let outcome = match id {
            1 => self.c1(),
            2 => self.c2(),
            3 => self.c3(),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => self.c8(),
            9 => self.c9(),
            10 => self.c10(),
            11 => self.c11(),
            12 => self.c12(),
            _ => fail(format!("no criterion {id}")),
        };
        self.ran.push(id);
        let seconds = start.elapsed().as_secs_f64();
        let (passed, cases, detail) = match outcome {
            Ok((cases, detail)) => (true, cases, detail),
            Err(detail) => (false, 0, detail),
        };
        CriterionReport { id, title: title(id), passed, cases, detail, seconds }
    }

    fn c1(&mut self) -> Outcome {
        let start = Instant::now();
        let got = ok_or_fail(self.calc(2).atom(Atom::P(4)), "P(4)")?;
        let elapsed = start.elapsed().as_secs_f64();
        let expected = BPoly::from_terms(
            2,
            4,
            [(Partition::from([4]), 1), (Partition::from([2, 2]), 1), (Partition::from([2, 1, 1]), 1)],
        );
        if got != expected {
            return fail(format!("got {got}, expected {expected}"));
        }
        if elapsed >= 1.0 {
            return fail(format!("took {elapsed:.2}s"));
        }
        Ok((1, format!("[P^4] = {got}")))
    }

    fn c2(&mut self) -> Outcome {
        let mut cases = 0;
        for p in [2, 3, 5, 7] {
            let f = Fp::new(p).expect("prime");
            for i in 1..=20u32 {
                let class = ok_or_fail(self.calc(p).atom(Atom::P(i)), format!("P({i})"))?;
                let got = ok_or_fail(class.coefficient(&Partition::new(vec![i])), "coefficient")?;
                let want = f.reduce(-(i64::from(i) + 1));
                if got != want {
                    return fail(format!("p={p}, i={i}: c_(i) = {got}, expected {want}"));
                }
                cases += 1;
            }
        }
        Ok((cases, String::new()))
    }

    fn c3(&mut self) -> Outcome {
        let triples = [(2u32, 3u32, 1u32), (2, 3, 2), (2, 5, 1), (3, 2, 1), (3, 4, 1), (5, 2, 1)];
        for &(p, k, s) in &triples {
            let ps = p.pow(s);
            let i = k * ps - 1;
            let atom = Atom::milnor(ps, (k - 1) * ps);
            let class = ok_or_fail(self.calc(p).atom(atom), atom)?;
            let got = ok_or_fail(class.coefficient(&Partition::single(i)), "coefficient")?;
            if got != k % p {
                return fail(format!("(p,k,s)=({p},{k},{s}): c_({i})({atom}) = {got}, expected {}", k % p));
            }
        }
        Ok((triples.len(), String::new()))
    }

    fn c4(&mut self) -> Outcome {
        let fam = ok_or_fail(self.family(2), "family")?;
        let mw = fam.max_weight();
        let b = |terms: &[&[u32]]| BPoly::from_terms(2, mw, terms.iter().map(|t| (Partition::from(*t), 1)));
        let cases: [(BPoly, bool); 3] =
            [(b(&[&[2, 1, 1]]), false), (b(&[&[2, 2]]), true), (b(&[&[4], &[2, 2], &[2, 1, 1]]), true)];
        for (x, member) in &cases {
            let m = ok_or_fail(express_in_generators(x, fam), x)?;
            if m.is_member() != *member {
                return fail(format!("{x}: got {m:?}"));
            }
            if let Membership::Member { poly } = &m {
                if &ok_or_fail(evaluate_gen_poly(poly, fam), "evaluate")? != x {
                    return fail(format!("{x}: expression {poly} does not evaluate back"));
                }
            }
        }
        Ok((cases.len(), String::new()))
    }

    fn random_class(rng: &mut ChaCha8Rng, fam: &GeneratorFamily) -> Result<(GenPoly, BPoly)> {
        let p = fam.p();
        let n = rng.gen_range(0..=fam.max_weight());
        let mut poly = random_gen_poly(rng, p, n, 4)?;
        if rng.gen_bool(0.25) {
            let m = rng.gen_range(0..=fam.max_weight());
            if m != n {
                poly = poly.add(&random_gen_poly(rng, p, m, 3)?)?;
            }
        }
        let x = evaluate_gen_poly(&poly, fam)?;
        Ok((poly, x))
    }

    fn c5(&mut self) -> Outcome {
        let mut rng = self.rng(5);
        let mut cases = 0;
        for &(p, q) in &DIMQ_CONFIGS {
            ok_or_fail(self.perturbed_family(p), "perturbed family")?;
            let std = &self.families[&p];
            let pert = &self.perturbed[&p];
            for source in [std, pert] {
                for _ in 0..200 {
                    let (poly, x) = ok_or_fail(Self::random_class(&mut rng, source), "sample")?;
                    let direct = dim_q_direct(&x, q);
                    let via_std = ok_or_fail(dim_q_via_generators(&x, q, std), &x)?;
                    let via_pert = ok_or_fail(dim_q_via_generators(&x, q, pert), &x)?;
                    if direct != via_std || direct != via_pert || direct != poly.deg_q(q) {
                        return fail(format!(
                            "p={p} q={q} x={x}: direct {direct}, standard {via_std}, perturbed {via_pert}"
                        ));
                    }
                    cases += 1;
                }
            }
        }
        Ok((cases, String::new()))
    }

    fn c6(&mut self) -> Outcome {
        let mut rng = self.rng(6);
        let mut cases = 0;
        for &(p, q) in &DIMQ_CONFIGS {
            ok_or_fail(self.family(p), "family")?;
            let groups = groups_of_order(p, q);
            self.calc(p);
            let fam = &self.families[&p];
            let calc = &self.calcs[&p];
            for k in 0..100 {
                let g = &groups[k % groups.len()];
                let (_, x) = ok_or_fail(Self::random_class(&mut rng, fam), "sample")?;
                let r = ok_or_fail(realize_with(&x, g, fam, calc), format!("realize {x} (q={q})"))?;
                let want = dim_q_direct(&x, q);
                if r.achieved_dim != want {
                    return fail(format!("{x}: achieved {}, dim_q {want}", r.achieved_dim));
                }
                self.collected.push(Collected { action: r.variety, p, q, class: Some(x) });
                cases += 1;
            }
        }
        Ok((cases, String::new()))
    }

    fn c7(&mut self) -> Outcome {
        let np = IndexSet::np(2);
        let mut cases = 0;
        for n in 1..=20u32 {
            let need = (2 * n + 4) / 5;
            for beta in ok_or_fail(partitions_of(n, Some(&np)), "partitions")? {
                if beta.pi_q(2) < need {
                    return fail(format!("X{beta}: deg_2 = {} < {need}", beta.pi_q(2)));
                }
                cases += 1;
            }
        }
        Ok((cases, String::new()))
    }

    fn c8(&mut self) -> Outcome {
        let mut cases = 0;
        for p in [2u32, 3] {
            for len in 1..=5u32 {
                for code in 0..p.pow(len) {
                    let weights: Vec<u32> = (0..len).map(|j| code / p.pow(j) % p).collect();
                    let n = len - 1;
                    for a in 0..=n {
                        for b in 0..=(n - a) {
                            let y = ok_or_fail(EqProjClass::monomial(p, &weights, a, b, 1), "class")?;
                            for r in 1..p {
                                let (lhs, rhs) = ok_or_fail(localization_check(&y, r), "localization")?;
                                if lhs != rhs {
                                    return fail(format!(
                                        "p={p} weights={weights:?} y=z^{a}t^{b} r={r}: lhs {lhs} != rhs {rhs}"
                                    ));
                                }
                                cases += 1;
                            }
                        }
                    }
                }
            }
        }
        Ok((cases, String::new()))
    }

    fn c9(&mut self) -> Outcome {
        let mut cases = 0;
        for p in [2u32, 3, 5, 7] {
            if ok_or_fail(phi(p), "phi")? != ok_or_fail(phi_closed_form(p), "phi")? {
                return fail(format!("phi differs from x^p - t^(p-1)x at p={p}"));
            }
            for i in 0..=30 {
                let f = ok_or_fail(f_poly(p, i), "f_i")?;
                if f.deg() != i || !f.divisible_by_x_power(i / p) {
                    return fail(format!("f_{i} at p={p} is not divisible by x^{}", i / p));
                }
                cases += 1;
            }
        }
        Ok((cases, String::new()))
    }

    fn c10(&mut self) -> Outcome {
        let mut cases = 0;
        for (p, q) in [(2u32, 2u32), (3, 3), (2, 4), (2, 8), (3, 9)] {
            for g in groups_of_order(p, q) {
                for n in 0..=30 {
                    let a = ok_or_fail(construct_action_p(n, &g), format!("P({n})"))?;
                    ok_or_fail(a.validate(&g), "validate")?;
                    if a.fixed_dim() != Dim::finite(i64::from(n / q)) {
                        return fail(format!("P({n}), q={q}: fixed dim {}", a.fixed_dim()));
                    }
                    self.collected.push(Collected { action: a, p, q, class: None });
                    cases += 1;
                }
                if q <= 4 {
                    for n in 0..=8 {
                        for m in 0..=n {
                            let a = ok_or_fail(construct_action_h(n, m, &g), format!("H({m},{n})"))?;
                            ok_or_fail(a.validate(&g), "validate")?;
                            let want = milnor_fixed_dim_formula(n, m, q);
                            if a.fixed_dim() != want {
                                return fail(format!("H({m},{n}), q={q}: fixed dim {} != {want}", a.fixed_dim()));
                            }
                            self.collected.push(Collected { action: a, p, q, class: None });
                            cases += 1;
                        }
                    }
                }
                for i in (1..=SUITE_MAX_WEIGHT).filter(|&i| np_contains(i, p)) {
                    let a = ok_or_fail(construct_action_l(i, &g), format!("L_{i}"))?;
                    self.collected.push(Collected { action: a, p, q, class: None });
                    cases += 1;
                }
            }
        }
        Ok((cases, String::new()))
    }

    fn c11(&mut self) -> Outcome {
        let collected = std::mem::take(&mut self.collected);
        let mut cases = 0;
        let mut result = Ok(());
        for c in &collected {
            let class = match &c.class {
                Some(x) => x.clone(),
                None => {
                    let expr = c.action.underlying();
                    let w = expr.dim().max(0) as u32;
                    match self.calc(c.p).chern_numbers(&expr, w) {
                        Ok(x) => x,
                        Err(e) => {
                            result = fail(format!("{expr}: {e}"));
                            break;
                        }
                    }
                }
            };
            let bound = match main_bound(&class, c.q) {
                Ok(b) => b,
                Err(e) => {
                    result = fail(e.to_string());
                    break;
                }
            };
            if c.action.fixed_dim() < bound {
                result = fail(format!(
                    "{} with q={}: fixed dim {} < bound {bound}",
                    c.action.underlying(),
                    c.q,
                    c.action.fixed_dim()
                ));
                break;
            }
            cases += 1;
        }
        self.collected = collected;
        result.map(|_| (cases, String::new()))
    }

    fn c12(&mut self) -> Outcome {
        let mut rng = self.rng(12);
        ok_or_fail(self.family(2), "family")?;
        ok_or_fail(self.family(3), "family")?;
        let mut total = 0;
        let mut nontrivial = 0;
        // (p, q, favoured part)
        for (p, q, favoured) in [(3u32, 3u32, 1u32), (2, 4, 2), (2, 2, 5)] {
            let fam = &self.families[&p];
            let mut found = 0;
            let mut attempts = 0;
            while found < 50 {
                attempts += 1;
                if attempts > 200_000 {
                    return fail(format!("could not sample classes for q={q}"));
                }
                let n = rng.gen_range(1..=14u32);
                let Some(x) = biased_class(&mut rng, fam, n, favoured) else { continue };
                let Some(d) = dim_q_direct(&x, q).value() else { continue };
                let report = if q == 2 {
                    if 3 * i64::from(n) < 7 * d {
                        continue;
                    }
                    ok_or_fail(milnor_divisibility_check(&x, d, fam), &x)?
                } else {
                    if i64::from(n) < (2 * i64::from(q) - 1) * d {
                        continue;
                    }
                    ok_or_fail(small_fixed_divisibility(&x, q, d, fam), &x)?
                };
                if !report.holds {
                    return fail(format!("q={q} x={x} d={d}: {:?} fails", report.counterexample));
                }
                if report.required > 0 {
                    nontrivial += 1;
                }
                found += 1;
            }
            total += found;
        }
        Ok((total, format!("{nontrivial} with a positive required exponent")))
    }
}

/// A random homogeneous class of weight `n` whose generator monomials
/// favour the part `favoured`; `None` if the draw could not fill `n`.
fn biased_class(rng: &mut ChaCha8Rng, fam: &GeneratorFamily, n: u32, favoured: u32) -> Option<BPoly> {
    let p = fam.p();
    let parts: Vec<u32> = (1..=n).filter(|&i| np_contains(i, p)).collect();
    let terms = rng.gen_range(1..=3);
    let mut poly = GenPoly::zero(p);
    for _ in 0..terms {
        let mut rest = n;
        let mut beta = Vec::new();
        while rest > 0 {
            let fits: Vec<u32> = parts.iter().copied().filter(|&i| i <= rest).collect();
            if fits.is_empty() {
                return None;
            }
            let i = if fits.contains(&favoured) && rng.gen_bool(0.7) {
                favoured
            } else {
                fits[rng.gen_range(0..fits.len())]
            };
            beta.push(i);
            rest -= i;
        }
        let c = i64::from(rng.gen_range(1..p.max(2)));
        let term = GenPoly::from_terms(p, [(Partition::new(beta), c)]).ok()?;
        poly = poly.add(&term).ok()?;
    }
    evaluate_gen_poly(&poly, fam).ok()
}

/// Checks `q` against `p` for callers that build groups from user input.
pub fn cyclic_group(p: u32, q: u32) -> Result<CharacterGroup> {
    if !is_power_of(q, p) {
        return Err(Error::NotPrimePower { q, p });
    }
    CharacterGroup::cyclic(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_enumeration() {
        let orders: Vec<Vec<u32>> =
            groups_of_order(2, 8).iter().map(|g| g.invariant_factors().to_vec()).collect();
        assert_eq!(orders, vec![vec![2, 2, 2], vec![4, 2], vec![8]]);
        assert_eq!(groups_of_order(3, 9).len(), 2);
        assert_eq!(groups_of_order(2, 2).len(), 1);
    }

    #[test]
    fn quick_criteria() {
        let mut suite = Suite::new(1, None);
        for id in [1, 4, 7, 9] {
            let r = suite.run(id);
            assert!(r.passed, "{r}");
        }
    }
}
