//! The mod-p cobordism ring `𝕃_p ⊂ 𝔽_p[b]`: generator families, expression
//! of classes as polynomials in the generators, and `dim_q`.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chow::{Atom, ChernCalculator};
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::fpring::{is_power_of, np_contains, BPoly, Fp, GenPoly};
use crate::partitions::{partitions_of, IndexSet, Partition};
use crate::ring::Ring;

/// Where a family's classes came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Standard,
    Perturbed { seed: u64 },
    Custom,
}

/// Polynomial generators `ℓ_i` (`i ∈ N_p`, `i ≤ max_weight`) of `𝕃_p`.
#[derive(Debug)]
pub struct GeneratorFamily {
    p: u32,
    max_weight: u32,
    classes: BTreeMap<u32, BPoly>,
    provenance: Provenance,
    products: Mutex<HashMap<Partition, BPoly>>,
}

impl Clone for GeneratorFamily {
    fn clone(&self) -> Self {
        GeneratorFamily {
            p: self.p,
            max_weight: self.max_weight,
            classes: self.classes.clone(),
            provenance: self.provenance,
            products: Mutex::new(HashMap::new()),
        }
    }
}

/// The generator variety `L_i`: `ℙ^i` if `i+1` is prime to `p`, otherwise
/// `H(p^s, (k−1)p^s)` where `i+1 = kp^s` with `k` prime to `p`.
pub fn standard_atom(i: u32, p: u32) -> Result<Atom> {
    if !np_contains(i, p) {
        return Err(Error::NotInNp { i, p });
    }
    let mut k = i + 1;
    let mut ps = 1;
    while k % p == 0 {
        k /= p;
        ps *= p;
    }
    if ps == 1 {
        Ok(Atom::P(i))
    } else {
        Ok(Atom::milnor(ps, (k - 1) * ps))
    }
}

impl GeneratorFamily {
    /// Validates and wraps a family.
    pub fn custom(p: u32, max_weight: u32, classes: BTreeMap<u32, BPoly>) -> Result<Self> {
        Self::build(p, max_weight, classes, Provenance::Custom)
    }

    fn build(p: u32, max_weight: u32, classes: BTreeMap<u32, BPoly>, provenance: Provenance) -> Result<Self> {
        Fp::new(p)?;
        for i in (1..=max_weight).filter(|&i| np_contains(i, p)) {
            let l = classes.get(&i).ok_or_else(|| Error::Invariant(format!("missing generator l_{i}")))?;
            if l.p() != p {
                return Err(Error::PrimeMismatch(l.p(), p));
            }
            if l.is_zero() || l.weights() != vec![i] {
                return Err(Error::Invariant(format!("l_{i} is not homogeneous of weight {i}")));
            }
            if l.coefficient(&Partition::single(i))? == 0 {
                return Err(Error::Invariant(format!("c_({i})(l_{i}) vanishes")));
            }
        }
        let classes = classes
            .into_iter()
            .filter(|(i, _)| *i <= max_weight && np_contains(*i, p))
            .map(|(i, l)| (i, l.with_max_weight(max_weight)))
            .collect();
        Ok(GeneratorFamily { p, max_weight, classes, provenance, products: Mutex::new(HashMap::new()) })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn classes(&self) -> &BTreeMap<u32, BPoly> {
        &self.classes
    }

    pub fn class(&self, i: u32) -> Result<&BPoly> {
        if !np_contains(i, self.p) {
            return Err(Error::NotInNp { i, p: self.p });
        }
        self.classes
            .get(&i)
            .ok_or_else(|| Error::Truncation { partition: Partition::single(i), max_weight: self.max_weight })
    }

    /// `ℓ_β = ∏_j ℓ_{β_j}`, memoized.
    pub fn product(&self, beta: &Partition) -> Result<BPoly> {
        if beta.weight() > self.max_weight {
            return Err(Error::Truncation { partition: beta.clone(), max_weight: self.max_weight });
        }
        if let Some(x) = self.products.lock().expect("product memo").get(beta) {
            return Ok(x.clone());
        }
        let value = match beta.largest() {
            None => BPoly::one(self.p, self.max_weight),
            Some(first) => {
                let rest = beta.remove_part(first).expect("part present");
                let w = beta.weight();
                let a = self.class(first)?.clone().with_max_weight(w);
                let b = self.product(&rest)?.with_max_weight(w);
                a.mul(&b)?.with_max_weight(self.max_weight)
            }
        };
        self.products.lock().expect("product memo").insert(beta.clone(), value.clone());
        Ok(value)
    }

    /// `ℓ_i′ = ℓ_i + (random 𝔽_p-combination of products ℓ_β, β ⊢ i, ℓ(β) ≥ 2)`.
    pub fn perturbed(&self, seed: u64) -> Result<GeneratorFamily> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(self.p) << 32));
        let np = IndexSet::np(self.p);
        let mut classes = BTreeMap::new();
        for (&i, l) in &self.classes {
            let mut c = l.clone();
            for beta in partitions_of(i, Some(&np))? {
                if beta.len() >= 2 {
                    let lambda = rng.gen_range(0..self.p);
                    if lambda != 0 {
                        c = c.add(&self.product(&beta)?.scale(i64::from(lambda)))?;
                    }
                }
            }
            classes.insert(i, c);
        }
        Self::build(self.p, self.max_weight, classes, Provenance::Perturbed { seed })
    }
}

/// `ℓ_i = ⟦L_i⟧` for every `i ∈ N_p` up to `max_weight`.
pub fn standard_generators(p: u32, max_weight: u32) -> Result<GeneratorFamily> {
    let calc = ChernCalculator::new(p)?;
    let mut classes = BTreeMap::new();
    for i in (1..=max_weight).filter(|&i| np_contains(i, p)) {
        classes.insert(i, calc.atom(standard_atom(i, p)?)?);
    }
    GeneratorFamily::build(p, max_weight, classes, Provenance::Standard)
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    p: u32,
    #[serde(rename = "maxWeight")]
    max_weight: u32,
    generators: BTreeMap<String, BPoly>,
}

const CACHE_VERSION: u32 = 1;

fn load_cache(path: &Path, p: u32, max_weight: u32) -> Option<GeneratorFamily> {
    let text = fs::read_to_string(path).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    if file.version != CACHE_VERSION || file.p != p || file.max_weight < max_weight {
        return None;
    }
    let classes = file
        .generators
        .into_iter()
        .filter_map(|(k, v)| k.parse::<u32>().ok().map(|i| (i, v)))
        .filter(|(i, _)| *i <= max_weight)
        .collect();
    GeneratorFamily::build(p, max_weight, classes, Provenance::Standard).ok()
}

/// Writes the Standard family of `fam` to `path`.
pub fn save_cache(path: &Path, fam: &GeneratorFamily) -> Result<()> {
    let file = CacheFile {
        version: CACHE_VERSION,
        p: fam.p,
        max_weight: fam.max_weight,
        generators: fam.classes.iter().map(|(i, l)| (i.to_string(), l.clone())).collect(),
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    }
    let text = serde_json::to_string(&file).map_err(|e| Error::Cache(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::Cache(e.to_string()))
}

/// Standard generators, reading and refreshing the on-disk cache. The cache
/// only affects speed: unreadable or invalid files are recomputed, and a
/// failed write is ignored.
pub fn standard_generators_cached(p: u32, max_weight: u32, cache: Option<&Path>) -> Result<GeneratorFamily> {
    if let Some(path) = cache {
        if let Some(fam) = load_cache(path, p, max_weight) {
            return Ok(fam);
        }
    }
    let fam = standard_generators(p, max_weight)?;
    if let Some(path) = cache {
        let _ = save_cache(path, &fam);
    }
    Ok(fam)
}

/// Outcome of expressing a class in generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum Membership {
    #[serde(rename = "member")]
    Member { poly: GenPoly },
    #[serde(rename = "notInLp")]
    NotInLp { witness: Partition },
}

impl Membership {
    pub fn into_result(self) -> Result<GenPoly> {
        match self {
            Membership::Member { poly } => Ok(poly),
            Membership::NotInLp { witness } => Err(Error::NotInLp { witness }),
        }
    }

    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

fn check_compatible(x: &BPoly, fam: &GeneratorFamily) -> Result<()> {
    if x.p() != fam.p {
        return Err(Error::PrimeMismatch(x.p(), fam.p));
    }
    if let Some(&top) = x.weights().last() {
        if top > fam.max_weight {
            let alpha = x.support().find(|a| a.weight() == top).expect("weight present").clone();
            return Err(Error::Truncation { partition: alpha, max_weight: fam.max_weight });
        }
    }
    Ok(())
}

/// Solves `Σ_β λ_β c_α(ℓ_β) = c_α(x)` weight by weight. Unknowns are taken
/// coarsest first, where the system is triangular.
pub fn express_in_generators(x: &BPoly, fam: &GeneratorFamily) -> Result<Membership> {
    check_compatible(x, fam)?;
    let field = Fp::new(fam.p)?;
    let np = IndexSet::np(fam.p);
    let mut terms = Vec::new();
    for n in x.weights() {
        let mut r = x.homogeneous_component(n).with_max_weight(fam.max_weight);
        for beta in partitions_of(n, Some(&np))? {
            let target = r.coefficient(&beta)?;
            if target == 0 {
                continue;
            }
            let l = fam.product(&beta)?;
            let diag = l.coefficient(&beta)?;
            let inv = field.inv(diag).ok_or_else(|| Error::Invariant(format!("c_{beta}(l_{beta}) vanishes")))?;
            let lambda = field.mul(&target, &inv);
            r = r.sub(&l.scale(i64::from(lambda)))?;
            terms.push((beta, i64::from(lambda)));
        }
        let first = r.support().next().cloned();
        if let Some(witness) = first {
            return Ok(Membership::NotInLp { witness });
        }
    }
    Ok(Membership::Member { poly: GenPoly::from_terms(fam.p, terms)? })
}

/// Same system solved by incremental Gaussian elimination over all rows in
/// canonical order; the witness is the first row that makes it inconsistent.
pub fn express_in_generators_gaussian(x: &BPoly, fam: &GeneratorFamily) -> Result<Membership> {
    check_compatible(x, fam)?;
    let field = Fp::new(fam.p)?;
    let np = IndexSet::np(fam.p);
    let mut terms = Vec::new();
    for n in x.weights() {
        let cols = partitions_of(n, Some(&np))?;
        let ells = cols.iter().map(|b| fam.product(b)).collect::<Result<Vec<_>>>()?;
        // pivots: column -> reduced row (coefficients ++ rhs) with 1 at the pivot
        let mut pivots: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for alpha in partitions_of(n, None)? {
            let mut row: Vec<u32> = ells.iter().map(|l| l.coefficient(&alpha)).collect::<Result<_>>()?;
            row.push(x.coefficient(&alpha)?);
            for (&c, prow) in &pivots {
                let f = row[c];
                if f != 0 {
                    for (v, w) in row.iter_mut().zip(prow) {
                        *v = field.sub(v, &field.mul(&f, w));
                    }
                }
            }
            match row[..cols.len()].iter().position(|&v| v != 0) {
                Some(c) => {
                    let inv = field.inv(row[c]).expect("nonzero pivot");
                    for v in row.iter_mut() {
                        *v = field.mul(v, &inv);
                    }
                    for prow in pivots.values_mut() {
                        let f = prow[c];
                        if f != 0 {
                            for (v, w) in prow.iter_mut().zip(&row) {
                                *v = field.sub(v, &field.mul(&f, w));
                            }
                        }
                    }
                    pivots.insert(c, row);
                }
                None if row[cols.len()] != 0 => return Ok(Membership::NotInLp { witness: alpha }),
                None => {}
            }
        }
        if pivots.len() != cols.len() {
            return Err(Error::Invariant(format!("generator products of weight {n} are dependent")));
        }
        for (c, row) in pivots {
            terms.push((cols[c].clone(), i64::from(row[cols.len()])));
        }
    }
    Ok(Membership::Member { poly: GenPoly::from_terms(fam.p, terms)? })
}

/// `Σ λ_β ℓ_β`.
pub fn evaluate_gen_poly(poly: &GenPoly, fam: &GeneratorFamily) -> Result<BPoly> {
    if poly.p() != fam.p {
        return Err(Error::PrimeMismatch(poly.p(), fam.p));
    }
    let mut total = BPoly::zero(fam.p, fam.max_weight);
    for (beta, c) in poly.terms() {
        total = total.add(&fam.product(beta)?.scale(i64::from(c)))?;
    }
    Ok(total)
}

/// `sup { π_q(α) : c_α(x) ≠ 0 }`.
pub fn dim_q_direct(x: &BPoly, q: u32) -> Dim {
    x.support().map(|a| Dim::from(a.pi_q(q))).max().unwrap_or(Dim::NEG_INF)
}

/// `deg_q` of the generator expression of `x`.
pub fn dim_q_via_generators(x: &BPoly, q: u32, fam: &GeneratorFamily) -> Result<Dim> {
    Ok(express_in_generators(x, fam)?.into_result()?.deg_q(q))
}

/// Indecomposable in `𝕃_p`: some `c_(n)(x)` is nonzero.
pub fn is_indecomposable(x: &BPoly) -> bool {
    x.terms().any(|(a, _)| a.len() == 1)
}

/// Validates that `q` is a power of `p` (including `q = 1`).
pub fn check_order(q: u32, p: u32) -> Result<()> {
    if q >= 1 && is_power_of(q, p) {
        Ok(())
    } else {
        Err(Error::NotPrimePower { q, p })
    }
}

/// A random homogeneous polynomial of weight `n` in the generators.
pub fn random_gen_poly<R: Rng>(rng: &mut R, p: u32, n: u32, max_terms: usize) -> Result<GenPoly> {
    let monomials = partitions_of(n, Some(&IndexSet::np(p)))?;
    let k = rng.gen_range(1..=max_terms.max(1)).min(monomials.len());
    let terms = monomials.choose_multiple(rng, k).map(|b| (b.clone(), rng.gen_range(1..p.max(2)) as i64));
    GenPoly::from_terms(p, terms.collect::<Vec<_>>())
}
