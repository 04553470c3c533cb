//! `μ_p`-equivariant classes at desk scale: `Ch_{μ_p}(X) = Ch(X)[t]` for a
//! trivial action, the maps `ε_r`, the polynomials `φ` and `f_i`, Euler
//! class inversion, and the fixed-point degree identity on linear actions on
//! projective space.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chow::{cf_series, ChowElem, ChowModel, Family, KClass};
use crate::error::{Error, Result};
use crate::fpring::Fp;
use crate::partitions::{Partition, PartitionIndex};
use crate::ring::{PolyRing, Ring};

/// Orientation constant fixing the sign convention for `c₁(ℒ_c) = c·t`.
pub const SIGMA: i64 = 1;

/// A homogeneous polynomial in `x` and `t`; `coeffs[k]` is the coefficient
/// of `x^k t^{deg−k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XtPoly {
    p: u32,
    deg: u32,
    coeffs: Vec<u32>,
}

impl XtPoly {
    pub fn from_coeffs(p: u32, coeffs: Vec<i64>) -> Result<Self> {
        let f = Fp::new(p)?;
        let deg = coeffs.len().saturating_sub(1) as u32;
        Ok(XtPoly { p, deg, coeffs: coeffs.into_iter().map(|c| f.reduce(c)).collect() })
    }

    pub fn one(p: u32) -> Self {
        XtPoly { p, deg: 0, coeffs: vec![1] }
    }

    /// `x + c·t`.
    pub fn shifted_x(p: u32, c: u32) -> Self {
        XtPoly { p, deg: 1, coeffs: vec![c % p, 1] }
    }

    pub fn deg(&self) -> u32 {
        self.deg
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^k t^{deg−k}`.
    pub fn coeff(&self, k: u32) -> u32 {
        self.coeffs.get(k as usize).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &XtPoly) -> XtPoly {
        let p = u64::from(self.p);
        let mut out = vec![0u64; (self.deg + other.deg + 1) as usize];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + u64::from(a) * u64::from(b)) % p;
            }
        }
        XtPoly { p: self.p, deg: self.deg + other.deg, coeffs: out.into_iter().map(|c| c as u32).collect() }
    }

    pub fn pow(&self, e: u32) -> XtPoly {
        (0..e).fold(XtPoly::one(self.p), |acc, _| acc.mul(self))
    }

    /// Is the polynomial divisible by `x^k`?
    pub fn divisible_by_x_power(&self, k: u32) -> bool {
        self.coeffs.iter().take(k as usize).all(|&c| c == 0)
    }
}

/// `φ(x) = x(x + t)(x + 2t)⋯(x + (p−1)t)`, expanded literally.
pub fn phi(p: u32) -> Result<XtPoly> {
    Fp::new(p)?;
    Ok((1..p).fold(XtPoly::shifted_x(p, 0), |acc, c| acc.mul(&XtPoly::shifted_x(p, c))))
}

/// `x^p − t^{p−1}x`.
pub fn phi_closed_form(p: u32) -> Result<XtPoly> {
    let mut c = vec![0i64; p as usize + 1];
    c[1] = -1;
    c[p as usize] = 1;
    XtPoly::from_coeffs(p, c)
}

/// `f_i = x^{i mod p} φ^{⌊i/p⌋}`.
pub fn f_poly(p: u32, i: u32) -> Result<XtPoly> {
    let x = XtPoly::shifted_x(p, 0);
    Ok(x.pow(i % p).mul(&phi(p)?.pow(i / p)))
}

/// `ε_r: Ch(X)[t] → Ch(X)`, `t ↦ r`.
pub fn epsilon_r(ring: &PolyRing<ChowModel>, z: &[ChowElem], r: u32) -> ChowElem {
    let base = ring.base();
    ring.evaluate(z, &base.from_int(i64::from(r)))
}

/// Inverse of `(rc)^n + c₁(F)(rc)^{n−1} + ⋯ + c_n(F)`, i.e. of
/// `ε_r(e(F ⊗ ℒ_c))` for `F` with trivial action.
pub fn euler_inverse_eps(model: &ChowModel, chern: &[ChowElem], c: u32, r: u32) -> Result<ChowElem> {
    let f = Fp::new(model.p())?;
    let rc = f.mul(&(r % model.p()), &(c % model.p()));
    if rc == 0 {
        return Err(Error::Precondition("rc must be nonzero mod p".into()));
    }
    let n = chern.len() as u32;
    let mut e = model.from_int(i64::from(f.pow(&rc, u64::from(n))));
    for (j, cj) in chern.iter().enumerate() {
        let k = n - (j as u32 + 1);
        e = model.add(&e, &model.mul(cj, &model.from_int(i64::from(f.pow(&rc, u64::from(k))))));
    }
    model.inverse(&e).ok_or_else(|| Error::Invariant("Euler class is not a unit".into()))
}

/// A class on `ℙ(V)` with a linear `μ_p`-action: a polynomial in `ζ, t`
/// reduced modulo `∏_j (ζ + σ w_j t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqProjClass {
    p: u32,
    weights: Vec<u32>,
    /// `(a, b) ↦` coefficient of `ζ^a t^b`.
    coeffs: BTreeMap<(u32, u32), u32>,
}

impl EqProjClass {
    pub fn zero(p: u32, weights: &[u32]) -> Result<Self> {
        Fp::new(p)?;
        if weights.is_empty() {
            return Err(Error::Precondition("P(V) needs dim V >= 1".into()));
        }
        Ok(EqProjClass { p, weights: weights.iter().map(|w| w % p).collect(), coeffs: BTreeMap::new() })
    }

    /// `c · ζ^a t^b`, reduced.
    pub fn monomial(p: u32, weights: &[u32], a: u32, b: u32, c: i64) -> Result<Self> {
        let mut z = Self::zero(p, weights)?;
        let v = Fp::new(p)?.reduce(c);
        if v != 0 {
            z.coeffs.insert((a, b), v);
        }
        Ok(z.reduced())
    }

    pub fn n(&self) -> u32 {
        self.weights.len() as u32 - 1
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn coeffs(&self) -> &BTreeMap<(u32, u32), u32> {
        &self.coeffs
    }

    /// Total degree if homogeneous; `None` for zero or mixed degrees.
    pub fn degree(&self) -> Option<u32> {
        let mut degs = self.coeffs.keys().map(|(a, b)| a + b);
        let d = degs.next()?;
        degs.all(|e| e == d).then_some(d)
    }

    fn field(&self) -> Fp {
        Fp::new(self.p).expect("prime")
    }

    /// Coefficients `s_k` of `∏_j (ζ + σ w_j t) = Σ_k s_k t^k ζ^{n+1−k}`.
    fn relation(&self) -> Vec<u32> {
        let f = self.field();
        let mut s = vec![1u32];
        for &w in &self.weights {
            let sw = f.reduce(SIGMA * i64::from(w));
            let mut next = vec![0u32; s.len() + 1];
            for (k, &c) in s.iter().enumerate() {
                next[k] = f.add(&next[k], &c);
                next[k + 1] = f.add(&next[k + 1], &f.mul(&c, &sw));
            }
            s = next;
        }
        s
    }

    fn reduced(mut self) -> Self {
        let f = self.field();
        let top = self.n() + 1;
        let rel = self.relation();
        while let Some((&(a, b), &c)) = self.coeffs.iter().rev().find(|((a, _), _)| *a >= top) {
            self.coeffs.remove(&(a, b));
            // ζ^a t^b = ζ^{a−top} t^b · ζ^top ≡ −Σ_{k≥1} s_k ζ^{a−k} t^{b+k}
            for (k, &s) in rel.iter().enumerate().skip(1) {
                if s != 0 {
                    let key = (a - k as u32, b + k as u32);
                    let v = f.sub(self.coeffs.get(&key).unwrap_or(&0), &f.mul(&c, &s));
                    if v == 0 {
                        self.coeffs.remove(&key);
                    } else {
                        self.coeffs.insert(key, v);
                    }
                }
            }
        }
        self
    }

    pub fn add(&self, other: &EqProjClass) -> EqProjClass {
        let f = self.field();
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            let v = f.add(out.coeffs.get(&k).unwrap_or(&0), &c);
            if v == 0 {
                out.coeffs.remove(&k);
            } else {
                out.coeffs.insert(k, v);
            }
        }
        out
    }

    pub fn mul(&self, other: &EqProjClass) -> EqProjClass {
        let f = self.field();
        let mut out = EqProjClass { p: self.p, weights: self.weights.clone(), coeffs: BTreeMap::new() };
        for (&(a, b), &c) in &self.coeffs {
            for (&(a2, b2), &c2) in &other.coeffs {
                let key = (a + a2, b + b2);
                let v = f.add(out.coeffs.get(&key).unwrap_or(&0), &f.mul(&c, &c2));
                if v == 0 {
                    out.coeffs.remove(&key);
                } else {
                    out.coeffs.insert(key, v);
                }
            }
        }
        out.reduced()
    }
}

/// Both sides of `deg ε(y) = Σ_c deg(ε_r(e(−N_c)) · ε_r(i_c^* y))`.
pub fn localization_check(y: &EqProjClass, r: u32) -> Result<(u32, u32)> {
    let p = y.p;
    let f = Fp::new(p)?;
    let r = r % p;
    if r == 0 {
        return Err(Error::Precondition("r must be nonzero mod p".into()));
    }
    let n = y.n();
    if let Some(s) = y.degree() {
        if s > n {
            return Err(Error::Precondition(format!("class of degree {s} exceeds n = {n}")));
        }
    } else if !y.coeffs.is_empty() {
        return Err(Error::Precondition("class must be homogeneous".into()));
    }
    let lhs = y.coeffs.get(&(n, 0)).copied().unwrap_or(0);

    let mut classes: BTreeMap<u32, u32> = BTreeMap::new();
    for &w in &y.weights {
        *classes.entry(w).or_insert(0) += 1;
    }
    let mut rhs = 0;
    for (&c, &m) in &classes {
        let model = ChowModel::projective(p, &[m - 1]);
        let xi = model.linear_form(&[1]);
        let constant = |v: i64| model.from_int(v);
        // ε_r(e(N_c)) = ∏_{c′≠c} (ξ + σ(c′−c)r)^{m_c′}
        let mut euler = model.one();
        for (&c2, &m2) in &classes {
            if c2 != c {
                let shift = f.reduce(SIGMA * (i64::from(c2) - i64::from(c)) * i64::from(r));
                let factor = model.add(&xi, &constant(i64::from(shift)));
                euler = model.mul(&euler, &model.pow(&factor, u64::from(m2)));
            }
        }
        let inv = model.inverse(&euler).ok_or_else(|| Error::Invariant("normal Euler class not a unit".into()))?;
        // ε_r(i_c^* ζ) = ξ − σcr
        let zeta = model.sub(&xi, &constant(SIGMA * i64::from(c) * i64::from(r)));
        let mut restricted = model.zero();
        for (&(a, b), &coef) in &y.coeffs {
            let term = model.mul(&model.pow(&zeta, u64::from(a)), &constant(i64::from(coef) * i64::from(f.pow(&r, u64::from(b)))));
            restricted = model.add(&restricted, &term);
        }
        rhs = f.add(&rhs, &model.degree(&model.mul(&inv, &restricted)));
    }
    Ok((lhs, rhs))
}

/// The family `(f_i)` as polynomials in `x` over `Ch(X)[t]`.
pub fn f_family(ring: &PolyRing<ChowModel>, max_weight: u32) -> Result<Family<Vec<ChowElem>>> {
    let p = ring.base().p();
    let base = ring.base();
    let polys = (0..=max_weight)
        .map(|i| {
            let fi = f_poly(p, i)?;
            Ok((0..=i)
                .map(|k| ring.monomial(base.from_int(i64::from(fi.coeff(k))), (i - k) as usize))
                .collect())
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    Family::from_polys(ring, polys)
}

/// `f_α(E)` for `E = ⊕ L_j ⊗ ℒ_{c_j}` over a trivial-action base, returned
/// as an element of `Ch(X)[t]`. Checks `ε₀(f_α(E)) = c_α(E)`.
pub fn f_alpha_class(model: &ChowModel, bundle: &[(Vec<i64>, u32)], alpha: &Partition) -> Result<Vec<ChowElem>> {
    let ring = PolyRing::new(model.clone());
    let w = alpha.weight();
    let family = f_family(&ring, w)?;
    let lines: Vec<(i64, Vec<ChowElem>)> = bundle
        .iter()
        .map(|(e, c)| (1, vec![model.linear_form(e), model.from_int(i64::from(*c))]))
        .collect();
    let series = cf_series(&ring, &family, &lines, Arc::new(PartitionIndex::new(w)));
    let value = series.coefficient(alpha)?.clone();
    let plain = KClass::new(model.clone(), bundle.iter().map(|(e, _)| (1, e.clone())).collect(), 0);
    if epsilon_r(&ring, &value, 0) != crate::chow::cf_class(&plain, alpha)? {
        return Err(Error::Invariant(format!("epsilon(f_{alpha}) differs from c_{alpha}")));
    }
    Ok(value)
}
