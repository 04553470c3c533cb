//! Truncated Chow rings of products of projective spaces, virtual bundles,
//! and the multiplicative generating series `P_g` whose `b_α`-coefficients
//! are the (generalized) Conner–Floyd classes.
//!
//! A Milnor hypersurface `H ⊂ ℙ^a × ℙ^b` is modelled by its ambient ring
//! with the degree functional twisted by its class `h₁ + h₂`: by the
//! projection formula `∫_H z|_H = ∫_{ℙ^a×ℙ^b} (h₁+h₂)·z`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VarietyExpr;
use crate::fpring::{BPoly, Fp};
use crate::partitions::{Partition, PartitionIndex};
use crate::ring::Ring;

/// Dense coefficient vector over the exponent box of a [`ChowModel`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChowElem(Vec<u32>);

impl ChowElem {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for ChowElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChowElem{:?}", self.0)
    }
}

#[derive(Debug)]
struct ModelData {
    p: u32,
    caps: Vec<u32>,
    strides: Vec<usize>,
    exps: Vec<Vec<u32>>,
    multiplier: Vec<u32>,
    virtual_dim: i64,
}

/// `𝔽_p[h₁,…,h_k]/(h₁^{n₁+1},…,h_k^{n_k+1})` with the degree functional
/// `z ↦ [h₁^{n₁}⋯h_k^{n_k}](μ·z)`.
#[derive(Clone, Debug)]
pub struct ChowModel {
    data: Arc<ModelData>,
}

impl ChowModel {
    /// Ring of `ℙ^{n₁} × ⋯ × ℙ^{n_k}` (degree multiplier 1).
    pub fn projective(p: u32, caps: &[u32]) -> Self {
        let model = Self::bare(p, caps.to_vec(), caps.iter().map(|&c| i64::from(c)).sum());
        let one = model.one();
        model.with_multiplier(one.0)
    }

    /// Milnor hypersurface of bidegree (1,1) in `ℙ^a × ℙ^b`.
    pub fn milnor(p: u32, a: u32, b: u32) -> Self {
        let model = Self::bare(p, vec![a, b], i64::from(a) + i64::from(b) - 1);
        let mu = model.linear_form(&[1, 1]);
        model.with_multiplier(mu.0)
    }

    /// Künneth product of models: caps concatenate, multipliers multiply.
    pub fn product(p: u32, factors: &[ChowModel]) -> Self {
        let caps: Vec<u32> = factors.iter().flat_map(|m| m.caps().iter().copied()).collect();
        let dim = factors.iter().map(ChowModel::virtual_dim).sum();
        let model = Self::bare(p, caps, dim);
        let mut mu = model.one();
        let mut offset = 0;
        for f in factors {
            mu = model.mul(&mu, &model.embed(f, offset, &ChowElem(f.data.multiplier.clone())));
            offset += f.caps().len();
        }
        model.with_multiplier(mu.0)
    }

    fn bare(p: u32, caps: Vec<u32>, virtual_dim: i64) -> Self {
        let mut strides = Vec::with_capacity(caps.len());
        let mut size = 1usize;
        for &c in &caps {
            strides.push(size);
            size *= c as usize + 1;
        }
        let exps = (0..size)
            .map(|idx| caps.iter().zip(&strides).map(|(&c, &s)| ((idx / s) % (c as usize + 1)) as u32).collect())
            .collect();
        ChowModel {
            data: Arc::new(ModelData { p, caps, strides, exps, multiplier: Vec::new(), virtual_dim }),
        }
    }

    fn with_multiplier(self, multiplier: Vec<u32>) -> Self {
        let mut data = Arc::try_unwrap(self.data).expect("fresh model");
        data.multiplier = multiplier;
        ChowModel { data: Arc::new(data) }
    }

    pub fn p(&self) -> u32 {
        self.data.p
    }

    pub fn caps(&self) -> &[u32] {
        &self.data.caps
    }

    pub fn virtual_dim(&self) -> i64 {
        self.data.virtual_dim
    }

    fn size(&self) -> usize {
        self.data.exps.len()
    }

    fn field(&self) -> Fp {
        Fp::new(self.data.p).expect("model built over a prime")
    }

    fn index_of(&self, exps: &[u32]) -> Option<usize> {
        if exps.len() != self.caps().len() || exps.iter().zip(self.caps()).any(|(e, c)| e > c) {
            return None;
        }
        Some(exps.iter().zip(&self.data.strides).map(|(&e, &s)| e as usize * s).sum())
    }

    /// `c · h^e`; zero when `e` leaves the exponent box.
    pub fn monomial(&self, exps: &[u32], c: i64) -> ChowElem {
        let mut v = vec![0; self.size()];
        if let Some(k) = self.index_of(exps) {
            v[k] = self.field().reduce(c);
        }
        ChowElem(v)
    }

    /// `e₁h₁ + ⋯ + e_kh_k`.
    pub fn linear_form(&self, coeffs: &[i64]) -> ChowElem {
        let mut out = self.zero();
        for (k, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; self.caps().len()];
            e[k] = 1;
            out = self.add(&out, &self.monomial(&e, c));
        }
        out
    }

    /// Pulls back an element of a factor model sitting at variable `offset`.
    pub fn embed(&self, factor: &ChowModel, offset: usize, z: &ChowElem) -> ChowElem {
        let mut out = vec![0; self.size()];
        for (k, &c) in z.0.iter().enumerate() {
            if c != 0 {
                let mut e = vec![0; self.caps().len()];
                e[offset..offset + factor.caps().len()].copy_from_slice(&factor.data.exps[k]);
                out[self.index_of(&e).expect("factor fits")] = c;
            }
        }
        ChowElem(out)
    }

    /// The degree map `Ch(X) → 𝔽_p`.
    pub fn degree(&self, z: &ChowElem) -> u32 {
        let top = self.size() - 1;
        let mu = ChowElem(self.data.multiplier.clone());
        self.mul(&mu, z).0[top]
    }

    /// `ε_r`-style substitution helper: the coefficient of a monomial.
    pub fn coefficient(&self, z: &ChowElem, exps: &[u32]) -> u32 {
        self.index_of(exps).map_or(0, |k| z.0[k])
    }

    /// Is `z` nilpotent (no constant term)?
    pub fn is_nilpotent(&self, z: &ChowElem) -> bool {
        z.0[0] == 0
    }

    /// Inverse of a unit `u + n` with `u ∈ 𝔽_p^×` and `n` nilpotent.
    pub fn inverse(&self, z: &ChowElem) -> Option<ChowElem> {
        let field = self.field();
        let u_inv = field.inv(z.0[0])?;
        // z = u(1 + m), m nilpotent; (1+m)^{-1} = Σ (−m)^k
        let scaled = self.scale(z, u_inv);
        let m = self.sub(&scaled, &self.one());
        let neg_m = self.neg(&m);
        let mut term = self.one();
        let mut acc = self.one();
        loop {
            term = self.mul(&term, &neg_m);
            if self.is_zero(&term) {
                break;
            }
            acc = self.add(&acc, &term);
        }
        Some(self.scale(&acc, u_inv))
    }

    pub fn scale(&self, z: &ChowElem, c: u32) -> ChowElem {
        let f = self.field();
        ChowElem(z.0.iter().map(|x| f.mul(x, &c)).collect())
    }
}

impl Ring for ChowModel {
    type Elem = ChowElem;

    fn zero(&self) -> ChowElem {
        ChowElem(vec![0; self.size()])
    }

    fn one(&self) -> ChowElem {
        self.monomial(&vec![0; self.caps().len()], 1)
    }

    fn add(&self, a: &ChowElem, b: &ChowElem) -> ChowElem {
        let p = self.data.p;
        ChowElem(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) % p).collect())
    }

    fn neg(&self, a: &ChowElem) -> ChowElem {
        let p = self.data.p;
        ChowElem(a.0.iter().map(|x| (p - x) % p).collect())
    }

    fn mul(&self, a: &ChowElem, b: &ChowElem) -> ChowElem {
        let p = u64::from(self.data.p);
        let caps = &self.data.caps;
        let exps = &self.data.exps;
        let nz_b: Vec<(usize, u64)> =
            b.0.iter().enumerate().filter(|(_, &y)| y != 0).map(|(j, &y)| (j, u64::from(y))).collect();
        let mut out = vec![0u64; self.size()];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let ei = &exps[i];
            for &(j, y) in &nz_b {
                let ej = &exps[j];
                if ei.iter().zip(ej).zip(caps).all(|((u, v), c)| u + v <= *c) {
                    out[i + j] = (out[i + j] + u64::from(x) * y) % p;
                }
            }
        }
        ChowElem(out.into_iter().map(|x| x as u32).collect())
    }

    fn is_zero(&self, a: &ChowElem) -> bool {
        a.0.iter().all(|&x| x == 0)
    }

    fn from_int(&self, n: i64) -> ChowElem {
        self.monomial(&vec![0; self.caps().len()], n)
    }
}

/// A virtual combination of line bundles `Σ m_j [L_j] + offset·[1]`, where
/// `c₁(L_j) = Σ_k e_{jk} h_k`.
#[derive(Clone, Debug)]
pub struct KClass {
    model: ChowModel,
    terms: Vec<(i64, Vec<i64>)>,
    trivial_rank_offset: i64,
}

impl KClass {
    pub fn new(model: ChowModel, terms: Vec<(i64, Vec<i64>)>, trivial_rank_offset: i64) -> Self {
        KClass { model, terms, trivial_rank_offset }
    }

    pub fn trivial(model: ChowModel, rank: i64) -> Self {
        KClass::new(model, Vec::new(), rank)
    }

    pub fn model(&self) -> &ChowModel {
        &self.model
    }

    pub fn terms(&self) -> &[(i64, Vec<i64>)] {
        &self.terms
    }

    pub fn trivial_rank_offset(&self) -> i64 {
        self.trivial_rank_offset
    }

    pub fn rank(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m).sum::<i64>() + self.trivial_rank_offset
    }

    pub fn neg(&self) -> KClass {
        KClass {
            model: self.model.clone(),
            terms: self.terms.iter().map(|(m, e)| (-m, e.clone())).collect(),
            trivial_rank_offset: -self.trivial_rank_offset,
        }
    }

    pub fn add(&self, other: &KClass) -> KClass {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        KClass { model: self.model.clone(), terms, trivial_rank_offset: self.trivial_rank_offset + other.trivial_rank_offset }
    }

    /// `(multiplicity, c₁)` pairs, trivial summands included with `c₁ = 0`.
    pub fn line_bundles(&self) -> Vec<(i64, ChowElem)> {
        let mut out: Vec<(i64, ChowElem)> =
            self.terms.iter().map(|(m, e)| (*m, self.model.linear_form(e))).collect();
        if self.trivial_rank_offset != 0 {
            out.push((self.trivial_rank_offset, self.model.zero()));
        }
        out
    }
}

/// A family `g = (g_i)` of polynomials with `g₀ = 1`, stored as coefficient
/// lists in `x` over the coefficient ring, for `i` up to a weight bound.
#[derive(Clone, Debug)]
pub struct Family<E> {
    polys: Vec<Vec<E>>,
}

impl<E: Clone + PartialEq + fmt::Debug> Family<E> {
    /// `g_i = x^i`, giving the Conner–Floyd classes `c_α`.
    pub fn standard<R: Ring<Elem = E>>(ring: &R, max_weight: u32) -> Self {
        let polys = (0..=max_weight as usize)
            .map(|i| {
                let mut v = vec![ring.zero(); i + 1];
                v[i] = ring.one();
                v
            })
            .collect();
        Family { polys }
    }

    pub fn from_polys<R: Ring<Elem = E>>(ring: &R, polys: Vec<Vec<E>>) -> Result<Self> {
        match polys.first() {
            Some(g0) if g0.len() == 1 && g0[0] == ring.one() => Ok(Family { polys }),
            _ => Err(Error::Precondition("family must start with g_0 = 1".into())),
        }
    }

    pub fn max_weight(&self) -> u32 {
        self.polys.len() as u32 - 1
    }

    pub fn poly(&self, i: usize) -> &[E] {
        &self.polys[i]
    }

    /// `[g_0(ℓ), g_1(ℓ), …]`.
    fn evaluate_all<R: Ring<Elem = E>>(&self, ring: &R, ell: &E, max_weight: u32) -> Vec<E> {
        let top = max_weight as usize;
        let mut powers = vec![ring.one()];
        for k in 1..=top {
            let next = ring.mul(&powers[k - 1], ell);
            powers.push(next);
        }
        (0..=top)
            .map(|i| {
                let mut acc = ring.zero();
                for (k, c) in self.polys[i].iter().enumerate() {
                    if !ring.is_zero(c) && !ring.is_zero(&powers[k]) {
                        acc = ring.add(&acc, &ring.mul(c, &powers[k]));
                    }
                }
                acc
            })
            .collect()
    }
}

/// A series in the `b_i` with coefficients in a ring, truncated by weight.
#[derive(Clone, Debug)]
pub struct CfSeries<E> {
    index: Arc<PartitionIndex>,
    coeffs: Vec<E>,
}

impl<E: Clone + PartialEq + fmt::Debug> CfSeries<E> {
    pub fn one<R: Ring<Elem = E>>(ring: &R, index: Arc<PartitionIndex>) -> Self {
        let mut coeffs = vec![ring.zero(); index.len()];
        coeffs[0] = ring.one();
        CfSeries { index, coeffs }
    }

    pub fn max_weight(&self) -> u32 {
        self.index.max_weight()
    }

    pub fn index(&self) -> &PartitionIndex {
        &self.index
    }

    /// The `b_α` coefficient `g_α`.
    pub fn coefficient(&self, alpha: &Partition) -> Result<&E> {
        self.index
            .position(alpha)
            .map(|k| &self.coeffs[k])
            .ok_or_else(|| Error::Truncation { partition: alpha.clone(), max_weight: self.max_weight() })
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Partition, &E)> {
        self.index.iter().zip(&self.coeffs)
    }

    /// `self ← self · (1 + Σ_{i≥1} v_i b_i)`.
    fn multiply_line<R: Ring<Elem = E>>(&mut self, ring: &R, values: &[E]) {
        for k in (0..self.coeffs.len()).rev() {
            let mut acc = self.coeffs[k].clone();
            for &(part, j) in self.index.removals(k) {
                let v = &values[part as usize];
                if !ring.is_zero(v) && !ring.is_zero(&self.coeffs[j]) {
                    acc = ring.add(&acc, &ring.mul(&self.coeffs[j], v));
                }
            }
            self.coeffs[k] = acc;
        }
    }

    /// `self ← self / (1 + Σ_{i≥1} v_i b_i)`.
    fn divide_line<R: Ring<Elem = E>>(&mut self, ring: &R, values: &[E]) {
        for k in 0..self.coeffs.len() {
            let mut acc = self.coeffs[k].clone();
            for &(part, j) in self.index.removals(k) {
                let v = &values[part as usize];
                if !ring.is_zero(v) && !ring.is_zero(&self.coeffs[j]) {
                    acc = ring.sub(&acc, &ring.mul(&self.coeffs[j], v));
                }
            }
            self.coeffs[k] = acc;
        }
    }

    /// Series product over splittings `β ∪ γ = α`.
    pub fn mul<R: Ring<Elem = E>>(&self, ring: &R, other: &CfSeries<E>) -> CfSeries<E> {
        let index = if self.max_weight() <= other.max_weight() { self.index.clone() } else { other.index.clone() };
        let w = index.max_weight();
        let mut coeffs = vec![ring.zero(); index.len()];
        for (b, x) in self.coefficients() {
            if ring.is_zero(x) || b.weight() > w {
                continue;
            }
            for (g, y) in other.coefficients() {
                if ring.is_zero(y) || b.weight() + g.weight() > w {
                    continue;
                }
                let k = index.position(&b.union(g)).expect("within bound");
                coeffs[k] = ring.add(&coeffs[k], &ring.mul(x, y));
            }
        }
        CfSeries { index, coeffs }
    }

    pub fn map<R: Ring, F: Fn(&E) -> R::Elem>(&self, f: F) -> CfSeries<R::Elem> {
        CfSeries { index: self.index.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }
}

/// `P_g(E)` for `E = Σ m_j [L_j]` given by `(m_j, c₁(L_j))`; negative
/// multiplicities divide, which is exact because every `c₁` is nilpotent.
pub fn cf_series<R: Ring>(
    ring: &R,
    family: &Family<R::Elem>,
    bundle: &[(i64, R::Elem)],
    index: Arc<PartitionIndex>,
) -> CfSeries<R::Elem> {
    let w = index.max_weight().min(family.max_weight());
    let mut series = CfSeries::one(ring, index);
    for (mult, ell) in bundle {
        let mut values = family.evaluate_all(ring, ell, w);
        values.resize(series.max_weight() as usize + 1, ring.zero());
        if values[1..].iter().all(|v| ring.is_zero(v)) {
            continue;
        }
        for _ in 0..mult.unsigned_abs() {
            if *mult > 0 {
                series.multiply_line(ring, &values);
            } else {
                series.divide_line(ring, &values);
            }
        }
    }
    series
}

/// `c_α(E)` in the Chow ring of the bundle's model.
pub fn cf_class(e: &KClass, alpha: &Partition) -> Result<ChowElem> {
    let model = e.model();
    let w = alpha.weight();
    let family = Family::standard(model, w);
    let series = cf_series(model, &family, &e.line_bundles(), Arc::new(PartitionIndex::new(w)));
    series.coefficient(alpha).cloned()
}

/// A generator atom: projective space `ℙ^n` or Milnor hypersurface `H(a,b)`
/// with `a ≤ b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    P(u32),
    H(u32, u32),
}

impl Atom {
    pub fn milnor(a: u32, b: u32) -> Self {
        Atom::H(a.min(b), a.max(b))
    }

    /// Dimension; `H(0,0)` is empty and reports `-1`.
    pub fn dim(&self) -> i64 {
        match *self {
            Atom::P(n) => i64::from(n),
            Atom::H(a, b) => i64::from(a) + i64::from(b) - 1,
        }
    }

    pub fn model(&self, p: u32) -> ChowModel {
        match *self {
            Atom::P(n) => ChowModel::projective(p, &[n]),
            Atom::H(a, b) => ChowModel::milnor(p, a, b),
        }
    }

    /// Tangent bundle in K-theory: the Euler sequence for `ℙ^n`, and for
    /// `H(a,b)` the ambient tangent minus the normal bundle `O(1,1)`.
    pub fn tangent_kclass(&self, p: u32) -> Result<KClass> {
        let model = self.model(p);
        match *self {
            Atom::P(n) => Ok(KClass::new(model, vec![(i64::from(n) + 1, vec![1])], -1)),
            Atom::H(a, b) => {
                if a > b {
                    return Err(Error::InvalidAtom(format!("H({a},{b}) is not normalized")));
                }
                Ok(KClass::new(
                    model,
                    vec![(i64::from(a) + 1, vec![1, 0]), (i64::from(b) + 1, vec![0, 1]), (-1, vec![1, 1])],
                    -2,
                ))
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::P(n) => write!(f, "P({n})"),
            Atom::H(a, b) => write!(f, "H({a},{b})"),
        }
    }
}

/// Mod-p Chern numbers `⟦X⟧ = Σ_α deg c_α(−T_X) b_α` of one atom.
pub fn atom_class(atom: Atom, p: u32) -> Result<BPoly> {
    let dim = atom.dim();
    if dim < 0 {
        return Ok(BPoly::zero(p, 0));
    }
    let tangent = atom.tangent_kclass(p)?;
    class_from_tangent(&tangent, dim as u32)
}

fn class_from_tangent(tangent: &KClass, dim: u32) -> Result<BPoly> {
    let model = tangent.model();
    let family = Family::standard(model, dim);
    let index = Arc::new(PartitionIndex::new(dim));
    let series = cf_series(model, &family, &tangent.neg().line_bundles(), index);
    let terms = series
        .coefficients()
        .filter(|(a, _)| a.weight() == dim)
        .map(|(a, z)| (a.clone(), i64::from(model.degree(z))));
    Ok(BPoly::from_terms(model.p(), dim, terms))
}

/// `⟦X⟧` for a product of atoms computed in the single Künneth model of the
/// product, without using multiplicativity in `𝔽_p[b]`.
pub fn product_class_direct(atoms: &[Atom], p: u32) -> Result<BPoly> {
    if atoms.iter().any(|a| a.dim() < 0) {
        return Ok(BPoly::zero(p, 0));
    }
    let models: Vec<ChowModel> = atoms.iter().map(|a| a.model(p)).collect();
    let model = ChowModel::product(p, &models);
    let mut tangent = KClass::trivial(model.clone(), 0);
    let mut offset = 0;
    for (atom, m) in atoms.iter().zip(&models) {
        let t = atom.tangent_kclass(p)?;
        let terms = t
            .terms()
            .iter()
            .map(|(mult, e)| {
                let mut full = vec![0; model.caps().len()];
                full[offset..offset + e.len()].copy_from_slice(e);
                (*mult, full)
            })
            .collect();
        tangent = tangent.add(&KClass::new(model.clone(), terms, t.trivial_rank_offset()));
        offset += m.caps().len();
    }
    let dim = model.virtual_dim() as u32;
    class_from_tangent(&tangent, dim)
}

/// Computes classes of variety expressions, memoizing atom classes.
#[derive(Debug)]
pub struct ChernCalculator {
    p: u32,
    atoms: Mutex<HashMap<Atom, BPoly>>,
}

impl ChernCalculator {
    pub fn new(p: u32) -> Result<Self> {
        Fp::new(p)?;
        Ok(ChernCalculator { p, atoms: Mutex::new(HashMap::new()) })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn atom(&self, atom: Atom) -> Result<BPoly> {
        if let Some(x) = self.atoms.lock().expect("atom memo").get(&atom) {
            return Ok(x.clone());
        }
        let x = atom_class(atom, self.p)?;
        self.atoms.lock().expect("atom memo").insert(atom, x.clone());
        Ok(x)
    }

    /// `⟦expr⟧` truncated at `max_weight`. Products use multiplicativity of
    /// `⟦·⟧`, disjoint unions add.
    pub fn chern_numbers(&self, expr: &VarietyExpr, max_weight: u32) -> Result<BPoly> {
        let mut total = BPoly::zero(self.p, max_weight);
        for term in expr.terms() {
            let dim = term.dim();
            if dim > i64::from(max_weight) {
                return Err(Error::Precondition(format!(
                    "term of dimension {dim} exceeds the truncation bound {max_weight}"
                )));
            }
            let mut class = BPoly::one(self.p, max_weight);
            for &atom in term.atoms() {
                let a = self.atom(atom)?.with_max_weight(max_weight);
                class = class.mul(&a)?;
            }
            total = total.add(&class.scale(term.multiplicity() as i64))?;
        }
        Ok(total)
    }
}

/// One-shot convenience wrapper around [`ChernCalculator`].
pub fn chern_numbers(expr: &VarietyExpr, p: u32, max_weight: u32) -> Result<BPoly> {
    ChernCalculator::new(p)?.chern_numbers(expr, max_weight)
}
