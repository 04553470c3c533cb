//! Actions of diagonalizable p-groups described by weight data, their
//! fixed-locus dimensions, and explicit actions realizing `dim_q`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chow::{Atom, ChernCalculator};
use crate::cobordism::{dim_q_direct, express_in_generators, standard_atom, GeneratorFamily, Provenance};
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::expr::{Term, VarietyExpr};
use crate::fpring::{is_power_of, BPoly, Fp};

/// A character of `G`: one residue per invariant factor.
pub type Character = Vec<u32>;

/// `Ĝ ≅ ∏ ℤ/p^{r_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CharacterGroup {
    p: u32,
    invariant_factors: Vec<u32>,
}

impl CharacterGroup {
    pub fn new(p: u32, invariant_factors: Vec<u32>) -> Result<Self> {
        Fp::new(p)?;
        if let Some(&bad) = invariant_factors.iter().find(|&&f| f < 2 || !is_power_of(f, p)) {
            return Err(Error::NotPrimePower { q: bad, p });
        }
        Ok(CharacterGroup { p, invariant_factors })
    }

    /// Cyclic `Ĝ = ℤ/q` (trivial for `q = 1`).
    pub fn cyclic(p: u32, q: u32) -> Result<Self> {
        if q == 1 {
            return Self::new(p, Vec::new());
        }
        Self::new(p, vec![q])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn invariant_factors(&self) -> &[u32] {
        &self.invariant_factors
    }

    /// `q = |Ĝ|`.
    pub fn order(&self) -> u32 {
        self.invariant_factors.iter().product()
    }

    /// All characters, last coordinate varying fastest, trivial character first.
    pub fn characters(&self) -> Vec<Character> {
        let mut out = vec![Vec::new()];
        for &f in &self.invariant_factors {
            out = out.into_iter().flat_map(|c| (0..f).map(move |r| [c.clone(), vec![r]].concat())).collect();
        }
        out
    }

    pub fn contains(&self, c: &Character) -> bool {
        c.len() == self.invariant_factors.len() && c.iter().zip(&self.invariant_factors).all(|(r, f)| r < f)
    }
}

/// A variety with a `G`-action given by weight data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum WeightedVariety {
    /// `ℙ(V)`, `V = ⊕ V(c)` given as the multiset of weights.
    #[serde(rename = "P")]
    P { weights: Vec<Character> },
    /// Milnor hypersurface from `V ⊆ W`: the bundle `ℙ_{ℙ(V)}(Q ⊕ U)`.
    #[serde(rename = "H")]
    H { v: Vec<Character>, w: Vec<Character> },
    #[serde(rename = "product")]
    Product { factors: Vec<WeightedVariety> },
    #[serde(rename = "disjoint")]
    Disjoint { parts: Vec<DisjointPart> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjointPart {
    pub multiplicity: u64,
    pub variety: WeightedVariety,
}

fn multiplicities(weights: &[Character]) -> BTreeMap<&Character, i64> {
    let mut m = BTreeMap::new();
    for c in weights {
        *m.entry(c).or_insert(0) += 1;
    }
    m
}

impl WeightedVariety {
    /// Dimension of the fixed locus `X^G`, `−∞` when it is empty.
    pub fn fixed_dim(&self) -> Dim {
        match self {
            WeightedVariety::P { weights } => {
                multiplicities(weights).values().map(|&m| Dim::finite(m - 1)).max().unwrap_or(Dim::NEG_INF)
            }
            WeightedVariety::H { v, w } => {
                let mv = multiplicities(v);
                let mw = multiplicities(w);
                let mut best = Dim::NEG_INF;
                for (c, &a) in &mv {
                    for (g, &b) in &mw {
                        let r = b - i64::from(g == c);
                        if r >= 1 {
                            best = best.max(Dim::finite(a - 1 + r - 1));
                        }
                    }
                }
                best
            }
            WeightedVariety::Product { factors } => {
                factors.iter().fold(Dim::finite(0), |acc, f| acc + f.fixed_dim())
            }
            WeightedVariety::Disjoint { parts } => parts
                .iter()
                .filter(|d| d.multiplicity > 0)
                .map(|d| d.variety.fixed_dim())
                .max()
                .unwrap_or(Dim::NEG_INF),
        }
    }

    /// Checks the weight data against `G` and the structural invariants.
    pub fn validate(&self, g: &CharacterGroup) -> Result<()> {
        let chars_ok = |ws: &[Character]| -> Result<()> {
            match ws.iter().find(|c| !g.contains(c)) {
                Some(c) => Err(Error::Precondition(format!("{c:?} is not a character of the group"))),
                None => Ok(()),
            }
        };
        match self {
            WeightedVariety::P { weights } => {
                chars_ok(weights)?;
                if weights.is_empty() {
                    return Err(Error::Precondition("P(V) needs dim V >= 1".into()));
                }
                Ok(())
            }
            WeightedVariety::H { v, w } => {
                chars_ok(v)?;
                chars_ok(w)?;
                let mw = multiplicities(w);
                let sub = multiplicities(v).iter().all(|(c, m)| mw.get(c).copied().unwrap_or(0) >= *m);
                if v.is_empty() || v.len() > w.len() || !sub {
                    return Err(Error::Precondition("H action needs nonempty V contained in W".into()));
                }
                Ok(())
            }
            WeightedVariety::Product { factors } => factors.iter().try_for_each(|f| f.validate(g)),
            WeightedVariety::Disjoint { parts } => parts.iter().try_for_each(|d| d.variety.validate(g)),
        }
    }

    /// The underlying variety, forgetting the action.
    pub fn underlying(&self) -> VarietyExpr {
        match self {
            WeightedVariety::P { weights } => {
                VarietyExpr::atom(Atom::P(weights.len().saturating_sub(1) as u32))
            }
            WeightedVariety::H { v, w } => {
                VarietyExpr::atom(Atom::milnor(v.len().saturating_sub(1) as u32, w.len().saturating_sub(1) as u32))
            }
            WeightedVariety::Product { factors } => {
                let mut terms = vec![Term::new(1, Vec::new())];
                for f in factors {
                    let sub = f.underlying();
                    terms = terms
                        .iter()
                        .flat_map(|t| {
                            sub.terms().iter().map(move |s| {
                                Term::new(t.multiplicity() * s.multiplicity(), [t.atoms(), s.atoms()].concat())
                            })
                        })
                        .collect();
                }
                VarietyExpr::new(terms)
            }
            WeightedVariety::Disjoint { parts } => VarietyExpr::new(
                parts
                    .iter()
                    .flat_map(|d| {
                        d.variety
                            .underlying()
                            .terms()
                            .iter()
                            .map(|t| Term::new(d.multiplicity * t.multiplicity(), t.atoms().to_vec()))
                            .collect::<Vec<_>>()
                    })
                    .collect(),
            ),
        }
    }
}

/// First `r` characters with multiplicity `a + 1`, the others with `a`,
/// where `dim V = qa + r`, `1 ≤ r ≤ q`.
fn balanced_weights(dim_v: u32, g: &CharacterGroup) -> Vec<Character> {
    let q = g.order();
    let a = (dim_v - 1) / q;
    let r = dim_v - q * a;
    let mut weights = Vec::with_capacity(dim_v as usize);
    for (k, c) in g.characters().into_iter().enumerate() {
        let m = if (k as u32) < r { a + 1 } else { a };
        weights.extend(std::iter::repeat(c).take(m as usize));
    }
    weights
}

/// `ℙ^n` with fixed locus of dimension `⌊n/q⌋`.
pub fn construct_action_p(n: u32, g: &CharacterGroup) -> Result<WeightedVariety> {
    let action = WeightedVariety::P { weights: balanced_weights(n + 1, g) };
    let expected = Dim::finite(i64::from(n / g.order()));
    if action.fixed_dim() != expected {
        return Err(Error::Invariant(format!("P({n}) action has fixed dim {} != {expected}", action.fixed_dim())));
    }
    Ok(action)
}

/// Fixed-locus dimension of the Milnor construction: `⌊(m+n−1)/q⌋` when
/// `q` divides both indices, `⌊m/q⌋ + ⌊n/q⌋` otherwise; `H(0,0)` is empty.
pub fn milnor_fixed_dim_formula(n: u32, m: u32, q: u32) -> Dim {
    if n == 0 && m == 0 {
        return Dim::NEG_INF;
    }
    if n % q == 0 && m % q == 0 {
        Dim::finite(i64::from((n + m - 1) / q))
    } else {
        Dim::finite(i64::from(n / q + m / q))
    }
}

/// `H(n,m)` with `V` on the smaller and `W` on the larger index.
pub fn construct_action_h(n: u32, m: u32, g: &CharacterGroup) -> Result<WeightedVariety> {
    let (small, large) = (n.min(m), n.max(m));
    let action = WeightedVariety::H { v: balanced_weights(small + 1, g), w: balanced_weights(large + 1, g) };
    action.validate(g)?;
    let expected = milnor_fixed_dim_formula(n, m, g.order());
    if action.fixed_dim() != expected {
        return Err(Error::Invariant(format!("H({n},{m}) action has fixed dim {} != {expected}", action.fixed_dim())));
    }
    Ok(action)
}

/// Action on the generator variety `L_i` with fixed locus of dimension `⌊i/q⌋`.
pub fn construct_action_l(i: u32, g: &CharacterGroup) -> Result<WeightedVariety> {
    let action = match standard_atom(i, g.p())? {
        Atom::P(n) => construct_action_p(n, g)?,
        Atom::H(a, b) => construct_action_h(a, b, g)?,
    };
    let expected = Dim::finite(i64::from(i / g.order()));
    if action.fixed_dim() != expected {
        return Err(Error::Invariant(format!("L_{i} action has fixed dim {} != {expected}", action.fixed_dim())));
    }
    Ok(action)
}

/// An action realizing `x` with fixed locus of dimension exactly `dim_q x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Realization {
    pub variety: WeightedVariety,
    pub expression: VarietyExpr,
    pub achieved_dim: Dim,
}

pub fn realize(x: &BPoly, g: &CharacterGroup, fam: &GeneratorFamily) -> Result<Realization> {
    realize_with(x, g, fam, &ChernCalculator::new(x.p())?)
}

/// [`realize`] reusing a calculator's atom memo.
pub fn realize_with(x: &BPoly, g: &CharacterGroup, fam: &GeneratorFamily, calc: &ChernCalculator) -> Result<Realization> {
    if fam.provenance() != Provenance::Standard {
        return Err(Error::Precondition("realize needs the Standard generator family".into()));
    }
    if x.p() != g.p() || fam.p() != g.p() {
        return Err(Error::PrimeMismatch(x.p(), g.p()));
    }
    let poly = express_in_generators(x, fam)?.into_result()?;
    let mut parts = Vec::new();
    for (beta, lambda) in poly.terms() {
        let factors = if beta.is_empty() {
            vec![WeightedVariety::P { weights: vec![g.characters().swap_remove(0)] }]
        } else {
            beta.parts().iter().map(|&i| construct_action_l(i, g)).collect::<Result<_>>()?
        };
        parts.push(DisjointPart { multiplicity: u64::from(lambda), variety: WeightedVariety::Product { factors } });
    }
    let variety = WeightedVariety::Disjoint { parts };
    let achieved_dim = variety.fixed_dim();
    let expected = dim_q_direct(x, g.order());
    if achieved_dim != expected {
        return Err(Error::Invariant(format!("realization has fixed dim {achieved_dim}, dim_q = {expected}")));
    }
    let expression = variety.underlying();
    if expression.dim() > i64::from(x.max_weight()) {
        return Err(Error::Invariant("realization exceeds the truncation bound".into()));
    }
    let class = calc.chern_numbers(&expression, x.max_weight())?;
    if &class != x {
        return Err(Error::Invariant(format!("realization has class {class}, expected {x}")));
    }
    Ok(Realization { variety, expression, achieved_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cobordism::standard_generators;
    use crate::partitions::Partition;

    fn cyc(p: u32, q: u32) -> CharacterGroup {
        CharacterGroup::cyclic(p, q).unwrap()
    }

    fn weights(v: &[u32]) -> Vec<Character> {
        v.iter().map(|&r| vec![r]).collect()
    }

    #[test]
    fn character_enumeration() {
        let g = CharacterGroup::new(2, vec![2, 4]).unwrap();
        assert_eq!(g.order(), 8);
        let chars = g.characters();
        assert_eq!(chars.len(), 8);
        assert_eq!(chars[0], vec![0, 0]);
        assert_eq!(chars[1], vec![0, 1]);
        assert!(CharacterGroup::new(2, vec![6]).is_err());
        assert_eq!(cyc(3, 1).characters(), vec![Vec::<u32>::new()]);
    }

    #[test]
    fn fixed_dim_examples() {
        assert_eq!(WeightedVariety::P { weights: weights(&[0, 0, 0, 1, 1]) }.fixed_dim(), Dim::finite(2));
        let prod = WeightedVariety::Product {
            factors: vec![
                WeightedVariety::P { weights: weights(&[0, 0, 1]) },
                WeightedVariety::P { weights: weights(&[0, 1]) },
            ],
        };
        assert_eq!(prod.fixed_dim(), Dim::finite(1));
        assert_eq!(WeightedVariety::Disjoint { parts: vec![] }.fixed_dim(), Dim::NEG_INF);
    }

    #[test]
    fn projective_constructions() {
        let a = construct_action_p(4, &cyc(2, 2)).unwrap();
        assert_eq!(a, WeightedVariety::P { weights: weights(&[0, 0, 0, 1, 1]) });
        assert_eq!(construct_action_p(0, &cyc(3, 9)).unwrap().fixed_dim(), Dim::finite(0));
        let b = construct_action_p(5, &cyc(3, 3)).unwrap();
        assert_eq!(b, WeightedVariety::P { weights: weights(&[0, 0, 1, 1, 2, 2]) });
        assert_eq!(b.fixed_dim(), Dim::finite(1));
    }

    #[test]
    fn milnor_constructions() {
        let g = cyc(2, 2);
        assert_eq!(construct_action_h(2, 4, &g).unwrap().fixed_dim(), Dim::finite(2));
        assert_eq!(construct_action_h(2, 3, &g).unwrap().fixed_dim(), Dim::finite(2));
        assert_eq!(construct_action_h(1, 1, &g).unwrap().fixed_dim(), Dim::finite(0));
        assert_eq!(construct_action_h(0, 0, &g).unwrap().fixed_dim(), Dim::NEG_INF);
        assert_eq!(construct_action_h(4, 2, &g).unwrap().underlying(), VarietyExpr::atom(Atom::H(2, 4)));
    }

    #[test]
    fn generator_constructions() {
        assert_eq!(construct_action_l(5, &cyc(2, 2)).unwrap().fixed_dim(), Dim::finite(2));
        assert_eq!(construct_action_l(5, &cyc(2, 2)).unwrap().underlying(), VarietyExpr::atom(Atom::H(2, 4)));
        assert_eq!(construct_action_l(4, &cyc(2, 4)).unwrap().fixed_dim(), Dim::finite(1));
        assert_eq!(construct_action_l(5, &cyc(2, 8)).unwrap().fixed_dim(), Dim::finite(0));
        assert!(construct_action_l(3, &cyc(2, 2)).is_err());
    }

    #[test]
    fn realize_examples() {
        let fam = standard_generators(2, 8).unwrap();
        let g = cyc(2, 2);
        let x = fam.class(4).unwrap().clone();
        let r = realize(&x, &g, &fam).unwrap();
        assert_eq!(r.achieved_dim, Dim::finite(2));
        let expected = WeightedVariety::P { weights: weights(&[0, 0, 0, 1, 1]) };
        match &r.variety {
            WeightedVariety::Disjoint { parts } => {
                assert_eq!(parts.len(), 1);
                assert_eq!(parts[0].variety, WeightedVariety::Product { factors: vec![expected] });
            }
            other => panic!("{other:?}"),
        }
        let zero = realize(&BPoly::zero(2, 8), &g, &fam).unwrap();
        assert_eq!(zero.achieved_dim, Dim::NEG_INF);
        let y = fam.product(&Partition::from([5, 2])).unwrap();
        assert_eq!(realize(&y, &g, &fam).unwrap().achieved_dim, Dim::finite(3));
    }

    #[test]
    fn json_shape() {
        let a = WeightedVariety::P { weights: weights(&[0, 0, 1]) };
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"type":"P","weights":[[0],[0],[1]]}"#);
        let back: WeightedVariety = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }
}
