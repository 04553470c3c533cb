//! Lower bounds on fixed-locus dimensions and the divisibility conclusions
//! they imply.

use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chow::{atom_class, Atom};
use crate::cobordism::{check_order, dim_q_direct, express_in_generators, GeneratorFamily};
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::fpring::{BPoly, GenPoly};
use crate::partitions::{rho_q, IndexSet, Partition};

/// A bound together with what was checked and what witnesses it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundReport {
    pub kind: String,
    pub inputs: Value,
    pub bound: Dim,
    pub hypothesis_checked: String,
    pub certificate: Option<Value>,
}

/// `dim X^G ≥ dim_q ⟦X⟧`.
pub fn main_bound(x: &BPoly, q: u32) -> Result<Dim> {
    check_order(q, x.p())?;
    Ok(dim_q_direct(x, q))
}

pub fn main_bound_report(x: &BPoly, q: u32) -> Result<BoundReport> {
    let bound = main_bound(x, q)?;
    let witness = x.support().find(|a| Dim::from(a.pi_q(q)) == bound).cloned();
    Ok(BoundReport {
        kind: "main".into(),
        inputs: json!({ "class": x, "q": q }),
        bound,
        hypothesis_checked: format!("q = {q} is a power of p = {}", x.p()),
        certificate: witness.map(|a| json!({ "partition": a })),
    })
}

/// `Σ_j π_q(α^j)`.
pub fn partition_bound(alphas: &[Partition], q: u32) -> u32 {
    alphas.iter().map(|a| a.pi_q(q)).sum()
}

fn ceil_ratio_times(r: Ratio<u64>, m: i64) -> i64 {
    let num = i128::from(*r.numer()) * i128::from(m);
    let den = i128::from(*r.denom());
    let q = num.div_euclid(den);
    (if num.rem_euclid(den) == 0 { q } else { q + 1 }) as i64
}

fn homogeneous_weight(x: &BPoly) -> Result<Option<u32>> {
    match x.weights().as_slice() {
        [] => Ok(None),
        [n] => Ok(Some(*n)),
        _ => Err(Error::Precondition("class must be homogeneous".into())),
    }
}

/// `d ≥ ⌈ρ_q(N_p∖A)·(n − (q−1)s)⌉`, provided the generator expression of `x`
/// has a monomial with at most `s` factors indexed by `A`.
pub fn ratio_bound(x: &BPoly, a: &IndexSet, s: u32, q: u32, fam: &GeneratorFamily) -> Result<BoundReport> {
    check_order(q, x.p())?;
    let inputs = json!({ "class": x, "A": a, "s": s, "q": q });
    let Some(n) = homogeneous_weight(x)? else {
        return Ok(BoundReport {
            kind: "ratio".into(),
            inputs,
            bound: Dim::NEG_INF,
            hypothesis_checked: "class is zero".into(),
            certificate: None,
        });
    };
    let poly = express_in_generators(x, fam)?.into_result()?;
    let hit = poly.terms().map(|(b, _)| b).find(|b| b.parts().iter().filter(|&&i| a.contains(i)).count() <= s as usize);
    let rest = a.complement_in_np(x.p());
    let rho = rho_q(&rest, q);
    Ok(match hit {
        Some(beta) => BoundReport {
            kind: "ratio".into(),
            inputs,
            bound: Dim::finite(ceil_ratio_times(rho, i64::from(n) - i64::from(q - 1) * i64::from(s))),
            hypothesis_checked: format!(
                "generator monomial X{beta} has at most {s} factors indexed by A; rho_q(N_p \\ A) = {rho}"
            ),
            certificate: Some(json!({ "monomial": beta, "rho": rho.to_string() })),
        },
        None => BoundReport {
            kind: "ratio".into(),
            inputs,
            bound: Dim::NEG_INF,
            hypothesis_checked: format!("no generator monomial has at most {s} factors indexed by A"),
            certificate: None,
        },
    })
}

/// Verdict of a divisibility check, with the first offending monomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DivisibilityReport {
    pub holds: bool,
    pub required: i64,
    pub expression: GenPoly,
    pub counterexample: Option<Partition>,
}

fn check_monomials(poly: GenPoly, required: i64, measure: impl Fn(&Partition) -> i64) -> DivisibilityReport {
    let counterexample = poly.terms().map(|(b, _)| b).find(|b| measure(b) < required).cloned();
    DivisibilityReport { holds: counterexample.is_none(), required, expression: poly, counterexample }
}

/// `⟦X⟧ ∈ L_{n−(2q−1)d}`: every generator monomial has its factors of
/// degree `≤ q−2` of total degree `≥ n − (2q−1)d`.
pub fn small_fixed_divisibility(x: &BPoly, q: u32, d: i64, fam: &GeneratorFamily) -> Result<DivisibilityReport> {
    check_order(q, x.p())?;
    let n = i64::from(homogeneous_weight(x)?.unwrap_or(0));
    let slope = 2 * i64::from(q) - 1;
    if n < slope * d {
        return Err(Error::Precondition(format!("n = {n} < (2q-1)d = {}", slope * d)));
    }
    let poly = express_in_generators(x, fam)?.into_result()?;
    let small = i64::from(q) - 2;
    Ok(check_monomials(poly, n - slope * d, |b| {
        b.parts().iter().map(|&i| i64::from(i)).filter(|&i| i <= small).sum()
    }))
}

/// For `p = 2`: every generator monomial carries `X_5` to the power
/// `≥ ⌈(3n − 7d)/15⌉`, where `ℓ_5 = ⟦H(2,4)⟧`.
pub fn milnor_divisibility_check(x: &BPoly, d: i64, fam: &GeneratorFamily) -> Result<DivisibilityReport> {
    if x.p() != 2 || fam.p() != 2 {
        return Err(Error::Precondition("the Milnor check needs p = 2".into()));
    }
    if fam.max_weight() >= 5 {
        let h = atom_class(Atom::H(2, 4), 2)?.with_max_weight(fam.max_weight());
        if fam.class(5)? != &h {
            return Err(Error::Precondition("family must have l_5 = [H(2,4)]".into()));
        }
    }
    let n = i64::from(homogeneous_weight(x)?.unwrap_or(0));
    if 3 * n < 7 * d {
        return Err(Error::Precondition(format!("3n = {} < 7d = {}", 3 * n, 7 * d)));
    }
    let poly = express_in_generators(x, fam)?.into_result()?;
    let required = (3 * n - 7 * d + 14).div_euclid(15);
    Ok(check_monomials(poly, required, |b| b.count_part(5) as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cobordism::{evaluate_gen_poly, standard_generators};

    fn part(v: &[u32]) -> Partition {
        Partition::from(v)
    }

    #[test]
    fn partition_bound_examples() {
        assert_eq!(partition_bound(&[part(&[4])], 2), 2);
        assert_eq!(partition_bound(&[part(&[2, 2]), part(&[3])], 2), 3);
        assert_eq!(partition_bound(&[Partition::empty()], 5), 0);
    }

    #[test]
    fn main_bound_examples() {
        let fam = standard_generators(2, 8).unwrap();
        assert_eq!(main_bound(fam.class(4).unwrap(), 2).unwrap(), Dim::finite(2));
        assert_eq!(main_bound(fam.class(5).unwrap(), 2).unwrap(), Dim::finite(2));
        assert_eq!(main_bound(&BPoly::zero(2, 3), 4).unwrap(), Dim::NEG_INF);
        assert!(main_bound(&BPoly::zero(2, 3), 3).is_err());
    }

    #[test]
    fn ratio_bound_examples() {
        let fam = standard_generators(2, 12).unwrap();
        let x = fam.class(10).unwrap().clone();
        // A = N_p, s = 1, indecomposable: (n - (q-1))/q
        let r = ratio_bound(&x, &IndexSet::np(2), 1, 2, &fam).unwrap();
        assert_eq!(r.bound, Dim::finite(5));
        // A = ∅, s = 0: ⌈2n/5⌉
        let y = fam.product(&part(&[5, 2, 2])).unwrap();
        let r = ratio_bound(&y, &IndexSet::finite([]), 0, 2, &fam).unwrap();
        assert_eq!(r.bound, Dim::finite(4));
        assert!(r.bound <= main_bound(&y, 2).unwrap());
        let z = ratio_bound(&BPoly::zero(2, 12), &IndexSet::finite([]), 0, 2, &fam).unwrap();
        assert_eq!(z.bound, Dim::NEG_INF);
        let none = ratio_bound(&y, &IndexSet::finite([2, 5]), 2, 2, &fam).unwrap();
        assert_eq!(none.bound, Dim::NEG_INF);
    }

    #[test]
    fn ceilings() {
        assert_eq!(ceil_ratio_times(Ratio::new(2, 5), 9), 4);
        assert_eq!(ceil_ratio_times(Ratio::new(1, 3), -2), 0);
        assert_eq!(ceil_ratio_times(Ratio::new(1, 2), 4), 2);
    }

    #[test]
    fn small_fixed_examples() {
        let fam3 = standard_generators(3, 8).unwrap();
        // X_1^6: n = 6, d = dim_3 = 0 → divisible by X_1^6
        let x = fam3.product(&part(&[1; 6])).unwrap();
        assert!(small_fixed_divisibility(&x, 3, 0, &fam3).unwrap().holds);
        assert!(matches!(small_fixed_divisibility(&x, 3, 2, &fam3), Err(Error::Precondition(_))));
        let fam2 = standard_generators(2, 8).unwrap();
        let y = fam2.product(&part(&[2, 2, 2, 2])).unwrap();
        let r = small_fixed_divisibility(&y, 4, 0, &fam2).unwrap();
        assert!(r.holds);
        assert_eq!(r.required, 8);
    }

    #[test]
    fn milnor_examples() {
        let fam = standard_generators(2, 8).unwrap();
        let l5 = fam.class(5).unwrap().clone();
        let r = milnor_divisibility_check(&l5, 2, &fam).unwrap();
        assert!(r.holds && r.required == 1);
        let l25 = fam.product(&part(&[5, 2])).unwrap();
        assert!(milnor_divisibility_check(&l25, 3, &fam).unwrap().holds);
        assert_eq!(milnor_divisibility_check(&l25, 3, &fam).unwrap().required, 0);
        let l4 = evaluate_gen_poly(&GenPoly::from_terms(2, [(part(&[4]), 1)]).unwrap(), &fam).unwrap();
        assert!(matches!(milnor_divisibility_check(&l4, 2, &fam), Err(Error::Precondition(_))));
    }
}
