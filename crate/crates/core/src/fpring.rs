//! Prime-field arithmetic, the weight-truncated series ring `𝔽_p[b]`, and the
//! generator polynomial ring `𝔽_p[X_i : i ∈ N_p]`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::ring::Ring;

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d: &u32| u64::from(*d) * u64::from(*d) <= u64::from(n)).all(|d| n % d != 0)
}

/// `Some(s)` when `n = p^s` (including `1 = p^0`).
pub fn log_if_power(n: u64, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let (mut n, mut s) = (n, 0);
    while n % p == 0 {
        n /= p;
        s += 1;
    }
    (n == 1).then_some(s)
}

pub fn is_power_of(n: u32, p: u32) -> bool {
    log_if_power(u64::from(n), u64::from(p)).is_some()
}

/// `i ∈ N_p`: `i ≥ 1` and `i + 1` is not a power of `p`.
pub fn np_contains(i: u32, p: u32) -> bool {
    i >= 1 && log_if_power(u64::from(i) + 1, u64::from(p)).is_none()
}

/// The prime field `𝔽_p`; elements are residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp {
    p: u32,
}

impl Fp {
    pub fn new(p: u32) -> Result<Self> {
        if is_prime(p) {
            Ok(Fp { p })
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn reduce(&self, n: i64) -> u32 {
        n.rem_euclid(i64::from(self.p)) as u32
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a % self.p == 0 {
            return None;
        }
        Some(self.pow(&a, u64::from(self.p) - 2))
    }

    /// Smallest nonnegative integer representative, as used by the realizer.
    pub fn lift(&self, a: u32) -> u64 {
        u64::from(a % self.p)
    }
}

impl Ring for Fp {
    type Elem = u32;

    fn zero(&self) -> u32 {
        0
    }

    fn one(&self) -> u32 {
        1 % self.p
    }

    fn add(&self, a: &u32, b: &u32) -> u32 {
        ((u64::from(*a) + u64::from(*b)) % u64::from(self.p)) as u32
    }

    fn neg(&self, a: &u32) -> u32 {
        (self.p - a % self.p) % self.p
    }

    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((u64::from(*a) * u64::from(*b)) % u64::from(self.p)) as u32
    }

    fn is_zero(&self, a: &u32) -> bool {
        *a % self.p == 0
    }

    fn from_int(&self, n: i64) -> u32 {
        self.reduce(n)
    }
}

/// An element of `𝔽_p[b_1, b_2, …]`, known up to a weight bound.
///
/// Coefficients of partitions heavier than `max_weight` are unknown, and
/// reading one is an error rather than a silent zero.
#[derive(Clone, PartialEq, Eq)]
pub struct BPoly {
    p: u32,
    max_weight: u32,
    terms: BTreeMap<Partition, u32>,
}

impl BPoly {
    pub fn zero(p: u32, max_weight: u32) -> Self {
        BPoly { p, max_weight, terms: BTreeMap::new() }
    }

    pub fn one(p: u32, max_weight: u32) -> Self {
        BPoly::monomial(p, max_weight, Partition::empty(), 1)
    }

    /// `coeff · b_α`; a monomial heavier than the bound is dropped.
    pub fn monomial(p: u32, max_weight: u32, alpha: Partition, coeff: i64) -> Self {
        BPoly::from_terms(p, max_weight, [(alpha, coeff)])
    }

    pub fn from_terms(p: u32, max_weight: u32, terms: impl IntoIterator<Item = (Partition, i64)>) -> Self {
        let field = Fp { p };
        let mut out = BPoly::zero(p, max_weight);
        for (alpha, c) in terms {
            if alpha.weight() <= max_weight {
                out.add_term(alpha, field.reduce(c));
            }
        }
        out
    }

    fn field(&self) -> Fp {
        Fp { p: self.p }
    }

    fn add_term(&mut self, alpha: Partition, c: u32) {
        let current = self.terms.get(&alpha).copied().unwrap_or(0);
        let v = self.field().add(&current, &c);
        if v == 0 {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, v);
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero terms in canonical partition order.
    pub fn terms(&self) -> impl Iterator<Item = (&Partition, u32)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &Partition> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `c_α(x)`, the coefficient of `b_α`.
    pub fn coefficient(&self, alpha: &Partition) -> Result<u32> {
        if alpha.weight() > self.max_weight {
            return Err(Error::Truncation { partition: alpha.clone(), max_weight: self.max_weight });
        }
        Ok(self.terms.get(alpha).copied().unwrap_or(0))
    }

    /// Same element with a smaller (or equal) weight bound.
    pub fn truncate(&self, max_weight: u32) -> BPoly {
        let max_weight = max_weight.min(self.max_weight);
        BPoly {
            p: self.p,
            max_weight,
            terms: self.terms.iter().filter(|(a, _)| a.weight() <= max_weight).map(|(a, &c)| (a.clone(), c)).collect(),
        }
    }

    /// Raises the recorded bound; only sound when the caller knows the
    /// element has no terms above its current bound (e.g. a homogeneous class).
    pub fn with_max_weight(mut self, max_weight: u32) -> BPoly {
        self.max_weight = max_weight;
        self.terms.retain(|a, _| a.weight() <= max_weight);
        self
    }

    pub fn weights(&self) -> Vec<u32> {
        let mut w: Vec<u32> = self.terms.keys().map(Partition::weight).collect();
        w.dedup();
        w
    }

    pub fn is_homogeneous(&self) -> bool {
        self.weights().len() <= 1
    }

    pub fn homogeneous_component(&self, weight: u32) -> BPoly {
        BPoly {
            p: self.p,
            max_weight: self.max_weight,
            terms: self.terms.iter().filter(|(a, _)| a.weight() == weight).map(|(a, &c)| (a.clone(), c)).collect(),
        }
    }

    fn check_prime(&self, other: &BPoly) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &BPoly) -> Result<BPoly> {
        self.check_prime(other)?;
        let mut out = self.truncate(other.max_weight);
        for (a, &c) in &other.terms {
            if a.weight() <= out.max_weight {
                out.add_term(a.clone(), c);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> BPoly {
        let field = self.field();
        let c = field.reduce(c);
        let mut out = BPoly::zero(self.p, self.max_weight);
        for (a, v) in &self.terms {
            let w = field.mul(v, &c);
            if w != 0 {
                out.terms.insert(a.clone(), w);
            }
        }
        out
    }

    pub fn sub(&self, other: &BPoly) -> Result<BPoly> {
        self.add(&other.scale(-1))
    }

    /// Product in `𝔽_p[b]`: `c_α(xy) = Σ_{β∪γ=α} c_β(x) c_γ(y)`.
    pub fn mul(&self, other: &BPoly) -> Result<BPoly> {
        self.check_prime(other)?;
        let field = self.field();
        let max_weight = self.max_weight.min(other.max_weight);
        let mut acc: BTreeMap<Partition, u32> = BTreeMap::new();
        for (b, &cb) in &self.terms {
            let wb = b.weight();
            if wb > max_weight {
                continue;
            }
            for (g, &cg) in &other.terms {
                if wb + g.weight() > max_weight {
                    continue;
                }
                let e = acc.entry(b.union(g)).or_insert(0);
                *e = field.add(e, &field.mul(&cb, &cg));
            }
        }
        acc.retain(|_, c| *c != 0);
        Ok(BPoly { p: self.p, max_weight, terms: acc })
    }

    pub fn pow(&self, e: u32) -> Result<BPoly> {
        let mut acc = BPoly::one(self.p, self.max_weight);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for BPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, "b", self.terms.iter().map(|(a, &c)| (a, c)))
    }
}

impl fmt::Debug for BPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BPoly(p={}, w<={}: {})", self.p, self.max_weight, self)
    }
}

fn write_poly<'a>(f: &mut fmt::Formatter<'_>, var: &str, terms: impl Iterator<Item = (&'a Partition, u32)>) -> fmt::Result {
    let mut first = true;
    for (alpha, c) in terms {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        let mono: Vec<String> = alpha
            .multiplicities()
            .into_iter()
            .map(|(v, m)| if m == 1 { format!("{var}[{v}]") } else { format!("{var}[{v}]^{m}") })
            .collect();
        match (c, mono.is_empty()) {
            (_, true) => write!(f, "{c}")?,
            (1, false) => write!(f, "{}", mono.join("*"))?,
            _ => write!(f, "{c}*{}", mono.join("*"))?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct BTermJson {
    partition: Partition,
    coeff: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BPolyJson {
    p: u32,
    max_weight: u32,
    terms: Vec<BTermJson>,
}

impl Serialize for BPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BPolyJson {
            p: self.p,
            max_weight: self.max_weight,
            terms: self.terms.iter().map(|(a, &c)| BTermJson { partition: a.clone(), coeff: c }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BPolyJson::deserialize(d)?;
        if !is_prime(raw.p) {
            return Err(serde::de::Error::custom(format!("{} is not a prime", raw.p)));
        }
        let terms = raw.terms.into_iter().map(|t| (t.partition, i64::from(t.coeff)));
        Ok(BPoly::from_terms(raw.p, raw.max_weight, terms))
    }
}

/// A polynomial in the abstract generators `X_i`, `i ∈ N_p`; the monomial
/// `X_{β₁}⋯X_{β_s}` is keyed by the partition `β`.
#[derive(Clone, PartialEq, Eq)]
pub struct GenPoly {
    p: u32,
    terms: BTreeMap<Partition, u32>,
}

impl GenPoly {
    pub fn zero(p: u32) -> Self {
        GenPoly { p, terms: BTreeMap::new() }
    }

    pub fn from_terms(p: u32, terms: impl IntoIterator<Item = (Partition, i64)>) -> Result<Self> {
        let field = Fp { p };
        let mut acc: BTreeMap<Partition, u32> = BTreeMap::new();
        for (beta, c) in terms {
            if let Some(&bad) = beta.parts().iter().find(|&&i| !np_contains(i, p)) {
                return Err(Error::NotInNp { i: bad, p });
            }
            let e = acc.entry(beta).or_insert(0);
            *e = field.add(e, &field.reduce(c));
        }
        acc.retain(|_, c| *c != 0);
        Ok(GenPoly { p, terms: acc })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, u32)> {
        self.terms.iter().map(|(a, &c)| (a, c))
    }

    pub fn coefficient(&self, beta: &Partition) -> u32 {
        self.terms.get(beta).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Ordinary degree, `X_i` in degree `i`.
    pub fn deg(&self) -> Dim {
        self.terms.keys().map(|b| Dim::from(b.weight())).max().unwrap_or(Dim::NEG_INF)
    }

    /// Degree with `X_i` in degree `⌊i/q⌋`.
    pub fn deg_q(&self, q: u32) -> Dim {
        self.terms.keys().map(|b| Dim::from(b.pi_q(q))).max().unwrap_or(Dim::NEG_INF)
    }

    pub fn add(&self, other: &GenPoly) -> Result<GenPoly> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        GenPoly::from_terms(
            self.p,
            self.terms().chain(other.terms()).map(|(b, c)| (b.clone(), i64::from(c))),
        )
    }
}

impl fmt::Display for GenPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, "X", self.terms.iter().map(|(a, &c)| (a, c)))
    }
}

impl fmt::Debug for GenPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GenPoly(p={}: {})", self.p, self)
    }
}

#[derive(Serialize, Deserialize)]
struct GTermJson {
    monomial: Partition,
    coeff: u32,
}

#[derive(Serialize, Deserialize)]
struct GenPolyJson {
    p: u32,
    terms: Vec<GTermJson>,
}

impl Serialize for GenPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GenPolyJson {
            p: self.p,
            terms: self.terms.iter().map(|(a, &c)| GTermJson { monomial: a.clone(), coeff: c }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GenPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GenPolyJson::deserialize(d)?;
        GenPoly::from_terms(raw.p, raw.terms.into_iter().map(|t| (t.monomial, i64::from(t.coeff))))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::from(parts)
    }

    #[test]
    fn np_membership() {
        assert!(!np_contains(1, 2));
        assert!(np_contains(5, 2));
        assert!(!np_contains(8, 3));
        assert!(np_contains(1, 3));
        assert!(!np_contains(0, 5));
    }

    #[test]
    fn field_inverse() {
        let f = Fp::new(7).unwrap();
        for a in 1..7 {
            assert_eq!(f.mul(&a, &f.inv(a).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
        assert!(Fp::new(9).is_err());
    }

    #[test]
    fn product_examples() {
        let b2 = BPoly::monomial(2, 8, p(&[2]), 1);
        let sq = b2.mul(&b2).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq.coefficient(&p(&[2, 2])).unwrap(), 1);
        assert_eq!(b2.mul(&BPoly::one(2, 8)).unwrap(), b2);
        // b1·b1 is the monomial b_(1,1); the only split of (1,1) is ((1),(1)).
        let b1 = BPoly::monomial(2, 8, p(&[1]), 1);
        assert_eq!(b1.mul(&b1).unwrap(), BPoly::monomial(2, 8, p(&[1, 1]), 1));
        assert!(b1.mul(&BPoly::one(3, 8)).is_err());
    }

    #[test]
    fn coefficient_reads() {
        let x = BPoly::from_terms(2, 4, [(p(&[4]), 1), (p(&[2, 2]), 1)]);
        assert_eq!(x.coefficient(&p(&[4])).unwrap(), 1);
        assert_eq!(x.coefficient(&p(&[2, 1, 1])).unwrap(), 0);
        assert!(matches!(x.coefficient(&p(&[5])), Err(Error::Truncation { .. })));
    }

    #[test]
    fn genpoly_degrees() {
        let g = GenPoly::from_terms(2, [(p(&[4]), 1), (p(&[2, 2]), 1)]).unwrap();
        assert_eq!(g.deg(), Dim::finite(4));
        assert_eq!(g.deg_q(2), Dim::finite(2));
        let g = GenPoly::from_terms(2, [(p(&[5]), 1)]).unwrap();
        assert_eq!((g.deg(), g.deg_q(2)), (Dim::finite(5), Dim::finite(2)));
        let z = GenPoly::zero(2);
        assert_eq!((z.deg(), z.deg_q(2)), (Dim::NEG_INF, Dim::NEG_INF));
        assert!(GenPoly::from_terms(2, [(p(&[3]), 1)]).is_err());
    }

    #[test]
    fn json_shapes() {
        let x = BPoly::from_terms(2, 8, [(p(&[4]), 1)]);
        assert_eq!(
            serde_json::to_string(&x).unwrap(),
            r#"{"p":2,"maxWeight":8,"terms":[{"partition":[4],"coeff":1}]}"#
        );
        let g = GenPoly::from_terms(2, [(p(&[4]), 1)]).unwrap();
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"p":2,"terms":[{"monomial":[4],"coeff":1}]}"#);
        let back: BPoly = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn display() {
        let x = BPoly::from_terms(2, 8, [(p(&[4]), 1), (p(&[2, 2]), 1), (p(&[2, 1, 1]), 1)]);
        assert_eq!(x.to_string(), "b[4] + b[2]^2 + b[2]*b[1]^2");
    }
}
