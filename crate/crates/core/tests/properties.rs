use std::sync::{Arc, OnceLock};

use cobordlab::actions::{construct_action_l, CharacterGroup, WeightedVariety};
use cobordlab::chow::{cf_series, product_class_direct, Atom, ChernCalculator, ChowElem, ChowModel, Family, KClass};
use cobordlab::cobordism::{
    dim_q_direct, evaluate_gen_poly, express_in_generators, express_in_generators_gaussian, is_indecomposable,
    standard_generators, GeneratorFamily,
};
use cobordlab::equivariant::{epsilon_r, euler_inverse_eps};
use cobordlab::expr::{parse_expr, Term, VarietyExpr};
use cobordlab::fpring::{np_contains, BPoly, GenPoly};
use cobordlab::partitions::{partitions_of, IndexSet, Partition, PartitionIndex};
use cobordlab::ring::{PolyRing, Ring};
use cobordlab::Dim;
use proptest::prelude::*;

fn families(p: u32) -> &'static (GeneratorFamily, GeneratorFamily) {
    static F2: OnceLock<(GeneratorFamily, GeneratorFamily)> = OnceLock::new();
    static F3: OnceLock<(GeneratorFamily, GeneratorFamily)> = OnceLock::new();
    let cell = if p == 2 { &F2 } else { &F3 };
    cell.get_or_init(|| {
        let std = standard_generators(p, 16).unwrap();
        let pert = std.perturbed(99).unwrap();
        (std, pert)
    })
}

fn partition(max_part: u32, max_len: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(1..=max_part, 0..=max_len).prop_map(Partition::new)
}

fn np_partition(p: u32, max_weight: u32) -> impl Strategy<Value = Partition> {
    (0..=max_weight, any::<prop::sample::Index>()).prop_map(move |(n, idx)| {
        let all = partitions_of(n, Some(&IndexSet::np(p))).unwrap();
        if all.is_empty() {
            Partition::empty()
        } else {
            all[idx.index(all.len())].clone()
        }
    })
}

fn gen_poly(p: u32, max_weight: u32) -> impl Strategy<Value = GenPoly> {
    prop::collection::vec((np_partition(p, max_weight), 1..p as i64), 0..4)
        .prop_map(move |terms| GenPoly::from_terms(p, terms).unwrap())
}

fn bpoly(p: u32, max_weight: u32) -> impl Strategy<Value = BPoly> {
    prop::collection::vec((partition(4, 4), 0..p as i64), 0..5).prop_map(move |terms| {
        let terms: Vec<_> = terms.into_iter().filter(|(a, _)| a.weight() <= max_weight).collect();
        BPoly::from_terms(p, max_weight, terms)
    })
}

fn kclass(model: ChowModel) -> impl Strategy<Value = KClass> {
    let vars = model.caps().len();
    (prop::collection::vec((-2i64..=3, prop::collection::vec(-2i64..=2, vars)), 0..4), -2i64..=2)
        .prop_map(move |(terms, offset)| KClass::new(model.clone(), terms, offset))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_is_additive_and_sorted(a in partition(9, 6), b in partition(9, 6)) {
        let u = a.union(&b);
        prop_assert_eq!(u.weight(), a.weight() + b.weight());
        prop_assert_eq!(u.len(), a.len() + b.len());
        prop_assert!(u.parts().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(u.refines(&Partition::single(u.weight())) || u.is_empty());
        prop_assert!(u.splittings().contains(&(a.clone(), b.clone())));
    }

    #[test]
    fn coarser_partitions_have_larger_pi_q(a in partition(6, 5), b in partition(6, 3), q in 2u32..=5) {
        if a.refines(&b) {
            prop_assert!(b.pi_q(q) >= a.pi_q(q));
            prop_assert!(a.len() >= b.len());
            prop_assert!(b <= a);
        }
        if b.dominates(&a) {
            prop_assert!(b.pi_q(q) >= a.pi_q(q));
        }
        prop_assert!(a.refines(&a));
        prop_assert!(a.dominates(&a));
    }

    #[test]
    fn bpoly_ring_axioms(x in bpoly(3, 8), y in bpoly(3, 8), z in bpoly(3, 8)) {
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
        let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
        let rhs = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(x.mul(&BPoly::one(3, 8)).unwrap(), x.clone());
    }

    #[test]
    fn bpoly_json_round_trip(x in bpoly(5, 10)) {
        let text = serde_json::to_string(&x).unwrap();
        let back: BPoly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn series_is_multiplicative(
        (e, f) in kclass(ChowModel::projective(3, &[2, 3])).prop_flat_map(|e| {
            let m = e.model().clone();
            (Just(e), kclass(m))
        })
    ) {
        let model = e.model().clone();
        let idx = Arc::new(PartitionIndex::new(5));
        let fam = Family::standard(&model, 5);
        let se = cf_series(&model, &fam, &e.line_bundles(), idx.clone());
        let sf = cf_series(&model, &fam, &f.line_bundles(), idx.clone());
        let sum = cf_series(&model, &fam, &e.add(&f).line_bundles(), idx.clone());
        let prod = se.mul(&model, &sf);
        for ((a, x), (_, y)) in sum.coefficients().zip(prod.coefficients()) {
            prop_assert_eq!(x, y, "at {}", a);
        }
        for n in 1..=5 {
            let a = Partition::single(n);
            let total = model.add(se.coefficient(&a).unwrap(), sf.coefficient(&a).unwrap());
            prop_assert_eq!(sum.coefficient(&a).unwrap(), &total);
        }
        let inv = cf_series(&model, &fam, &e.neg().line_bundles(), idx);
        for (a, z) in se.mul(&model, &inv).coefficients() {
            let want = if a.is_empty() { model.one() } else { model.zero() };
            prop_assert_eq!(z, &want);
        }
    }

    #[test]
    fn express_round_trip_p2(poly in gen_poly(2, 16), perturbed in any::<bool>()) {
        let (std, pert) = families(2);
        let fam = if perturbed { pert } else { std };
        let x = evaluate_gen_poly(&poly, fam).unwrap();
        let m = express_in_generators(&x, fam).unwrap();
        prop_assert_eq!(m.clone().into_result().unwrap(), poly.clone());
        prop_assert_eq!(express_in_generators_gaussian(&x, fam).unwrap(), m);
        for q in [2, 4, 8] {
            prop_assert_eq!(dim_q_direct(&x, q), poly.deg_q(q));
        }
    }

    #[test]
    fn express_round_trip_p3(poly in gen_poly(3, 14), perturbed in any::<bool>()) {
        let (std, pert) = families(3);
        let fam = if perturbed { pert } else { std };
        let x = evaluate_gen_poly(&poly, fam).unwrap();
        prop_assert_eq!(express_in_generators(&x, fam).unwrap().into_result().unwrap(), poly.clone());
        for q in [3, 9] {
            prop_assert_eq!(dim_q_direct(&x, q), poly.deg_q(q));
        }
    }

    #[test]
    fn solvers_agree_on_arbitrary_classes(x in bpoly(2, 12)) {
        let (std, _) = families(2);
        let x = x.with_max_weight(16);
        prop_assert_eq!(express_in_generators(&x, std).unwrap(), express_in_generators_gaussian(&x, std).unwrap());
    }

    #[test]
    fn indecomposables_live_in_np(poly in gen_poly(3, 12)) {
        let (std, _) = families(3);
        let x = evaluate_gen_poly(&poly, std).unwrap();
        for n in x.weights() {
            if is_indecomposable(&x.homogeneous_component(n)) {
                prop_assert!(np_contains(n, 3));
            }
        }
    }

    #[test]
    fn generator_actions_divide_by_q(beta in np_partition(2, 16), k in 1u32..=3) {
        let q = 2u32.pow(k);
        let g = CharacterGroup::cyclic(2, q).unwrap();
        let factors: Vec<WeightedVariety> = beta.parts().iter().map(|&i| construct_action_l(i, &g).unwrap()).collect();
        let action = WeightedVariety::Product { factors };
        prop_assert_eq!(action.fixed_dim(), Dim::finite(i64::from(beta.pi_q(q))));
    }

    #[test]
    fn epsilon_is_a_ring_map(
        a in prop::collection::vec(prop::collection::vec(0i64..5, 4), 1..4),
        b in prop::collection::vec(prop::collection::vec(0i64..5, 4), 1..4),
        r in 0u32..5,
    ) {
        let model = ChowModel::projective(5, &[3]);
        let ring = PolyRing::new(model.clone());
        let elem = |cs: &Vec<i64>| -> ChowElem {
            cs.iter().enumerate().fold(model.zero(), |acc, (k, &c)| model.add(&acc, &model.monomial(&[k as u32], c)))
        };
        let poly = |v: &Vec<Vec<i64>>| -> Vec<ChowElem> {
            v.iter().enumerate().fold(ring.zero(), |acc, (k, cs)| ring.add(&acc, &ring.monomial(elem(cs), k)))
        };
        let (x, y) = (poly(&a), poly(&b));
        let ex = epsilon_r(&ring, &x, r);
        let ey = epsilon_r(&ring, &y, r);
        prop_assert_eq!(epsilon_r(&ring, &ring.mul(&x, &y), r), model.mul(&ex, &ey));
        prop_assert_eq!(epsilon_r(&ring, &ring.add(&x, &y), r), model.add(&ex, &ey));
        let c = ring.constant(elem(&a[0]));
        prop_assert_eq!(epsilon_r(&ring, &c, r), elem(&a[0]));
        // a degree-0 class is a constant; its image does not depend on r
        let deg0 = ring.constant(model.from_int(a[0][0]));
        prop_assert_eq!(epsilon_r(&ring, &deg0, r), epsilon_r(&ring, &deg0, 0));
    }

    #[test]
    fn euler_inverse_is_multiplicative(c1 in -3i64..=3, c2 in -3i64..=3, d1 in -3i64..=3, c in 1u32..5, r in 1u32..5) {
        let model = ChowModel::projective(5, &[3]);
        let h = |k: i64| model.linear_form(&[k]);
        // F' and F'' of ranks 1 and 2 with total Chern classes (1 + c1 h), (1 + c2 h)(1 + d1 h)
        let e1 = vec![h(c1)];
        let e2 = vec![model.add(&h(c2), &h(d1)), model.mul(&h(c2), &h(d1))];
        let sum = vec![
            model.add(&e1[0], &e2[0]),
            model.add(&e2[1], &model.mul(&e1[0], &e2[0])),
            model.mul(&e1[0], &e2[1]),
        ];
        let lhs = euler_inverse_eps(&model, &sum, c, r).unwrap();
        let rhs = model.mul(&euler_inverse_eps(&model, &e1, c, r).unwrap(), &euler_inverse_eps(&model, &e2, c, r).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn expression_display_round_trip(terms in prop::collection::vec((0u64..4, prop::collection::vec((any::<bool>(), 0u32..6, 0u32..6), 1..3)), 1..4)) {
        let expr = VarietyExpr::new(terms.into_iter().map(|(m, atoms)| {
            Term::new(m, atoms.into_iter().map(|(is_p, a, b)| if is_p { Atom::P(a) } else { Atom::milnor(a, b) }).collect())
        }).collect());
        prop_assert_eq!(parse_expr(&expr.to_string()).unwrap(), expr);
    }
}

#[test]
fn top_chern_class_is_euler_class() {
    let model = ChowModel::projective(7, &[2, 2]);
    let e = KClass::new(model.clone(), vec![(1, vec![1, 0]), (1, vec![0, 1]), (1, vec![1, 1])], 0);
    let top = cobordlab::chow::cf_class(&e, &Partition::from([1, 1, 1])).unwrap();
    let product = e.line_bundles().iter().fold(model.one(), |acc, (_, l)| model.mul(&acc, l));
    assert_eq!(top, product);
}

#[test]
fn product_classes_match_direct_model() {
    let calc = ChernCalculator::new(2).unwrap();
    for a in 0..=6u32 {
        for b in 0..=(6 - a) {
            let expr = parse_expr(&format!("P({a})*P({b})")).unwrap();
            let via = calc.chern_numbers(&expr, a + b).unwrap();
            assert_eq!(via, product_class_direct(&[Atom::P(a), Atom::P(b)], 2).unwrap(), "P({a})xP({b})");
        }
    }
    let expr = parse_expr("P(2)*H(2,4)").unwrap();
    let via = calc.chern_numbers(&expr, 7).unwrap();
    assert_eq!(via, product_class_direct(&[Atom::P(2), Atom::H(2, 4)], 2).unwrap());
}

#[test]
fn standard_generators_are_indecomposable_in_np() {
    for p in [2, 3, 5] {
        let fam = standard_generators(p, 12).unwrap();
        for (&i, l) in fam.classes() {
            assert!(is_indecomposable(l));
            assert!(np_contains(i, p));
        }
    }
}
