//! Sparse multivariate polynomials over named variables.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`] in graded
//! lexicographic order, so the largest key is the leading term. Variables are
//! identified by name; the alphabetical order of names fixes the lexicographic
//! tie-break, which keeps the representation independent of which chart a
//! polynomial came from.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;



use crate::symkernel::field::Field;

/// Variable name.
pub type Var = Arc<str>;

/// A power product `x1^e1 * x2^e2 * ...` with exponents > 0, sorted by name.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial {
    powers: Vec<(Var, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { powers: Vec::new() }
    }

    pub fn var(v: &Var, exp: u32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial {
                powers: vec![(v.clone(), exp)],
            }
        }
    }

    pub fn is_one(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        self.powers
            .iter()
            .find(|(w, _)| &**w == v)
            .map_or(0, |(_, e)| *e)
    }

    pub fn powers(&self) -> &[(Var, u32)] {
        &self.powers
    }

    /// The monomial with `v` removed.
    pub fn without(&self, v: &str) -> Monomial {
        Monomial {
            powers: self
                .powers
                .iter()
                .filter(|(w, _)| &**w != v)
                .cloned()
                .collect(),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.powers.len() + other.powers.len());
        let (mut i, mut j) = (0, 0);
        while i < self.powers.len() && j < other.powers.len() {
            let (a, ea) = &self.powers[i];
            let (b, eb) = &other.powers[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.clone(), ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.powers[i..]);
        out.extend_from_slice(&other.powers[j..]);
        Monomial { powers: out }
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.powers.len());
        let mut j = 0;
        for (a, ea) in &self.powers {
            if j < other.powers.len() {
                let (b, eb) = &other.powers[j];
                match a.cmp(b) {
                    Ordering::Greater => return None,
                    Ordering::Equal => {
                        j += 1;
                        match ea.cmp(eb) {
                            Ordering::Less => return None,
                            Ordering::Equal => continue,
                            Ordering::Greater => {
                                out.push((a.clone(), ea - eb));
                                continue;
                            }
                        }
                    }
                    Ordering::Less => {}
                }
            }
            out.push((a.clone(), *ea));
        }
        if j < other.powers.len() {
            return None;
        }
        Some(Monomial { powers: out })
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.powers.len() && j < other.powers.len() {
            let (a, ea) = &self.powers[i];
            let (b, eb) = &other.powers[j];
            match a.cmp(b) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((a.clone(), *ea.min(eb)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial { powers: out }
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            let a = self.powers.get(i);
            let b = other.powers.get(j);
            match (a, b) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    // `va` is absent from `other`, so `other` has exponent 0 there
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        match ea.cmp(eb) {
                            Ordering::Equal => {}
                            ord => return ord,
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.powers.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.powers.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial with coefficients in `K`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly<K: Field> {
    terms: BTreeMap<Monomial, K>,
}

impl<K: Field> Poly<K> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn constant(c: K) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn var(v: &Var) -> Self {
        Self::term(Monomial::var(v, 1), K::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<K> {
        if self.is_zero() {
            Some(K::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &K)> {
        self.terms.iter()
    }

    /// Leading monomial and coefficient in graded lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &K)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        self.terms.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.powers.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.terms.keys().any(|m| m.degree_in(v) > 0)
    }

    fn add_term(&mut self, m: Monomial, c: K) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// `self -= c * m * other`, in place.
    fn sub_scaled(&mut self, other: &Poly<K>, m: &Monomial, c: &K) {
        for (om, oc) in &other.terms {
            self.add_term(om.mul(m), -(oc.clone() * c.clone()));
        }
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(tm, k)| (tm.mul(m), k.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to `v`.
    pub fn derivative(&self, v: &str) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            if e == 0 {
                continue;
            }
            let powers = m
                .powers
                .iter()
                .filter_map(|(w, k)| {
                    if &**w == v {
                        (k > &1).then(|| (w.clone(), k - 1))
                    } else {
                        Some((w.clone(), *k))
                    }
                })
                .collect();
            out.add_term(Monomial { powers }, c.clone() * K::from_i64(e as i64));
        }
        out
    }

    /// Divide by the leading coefficient. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) if !c.is_one() => {
                let inv = K::one() / c.clone();
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly<K>) -> Option<Poly<K>> {
        let (dm, dc) = d.leading()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut q = Self::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(&dm)?;
            let c = rc.clone() / dc.clone();
            r.sub_scaled(d, &m, &c);
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Coefficients as a polynomial in `v`: degree -> coefficient (free of `v`).
    pub fn coefficients_in(&self, v: &str) -> BTreeMap<u32, Poly<K>> {
        let mut out: BTreeMap<u32, Poly<K>> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree_in(v))
                .or_insert_with(Self::zero)
                .add_term(m.without(v), c.clone());
        }
        out
    }

    fn leading_coefficient_in(&self, v: &str) -> (u32, Poly<K>) {
        let d = self.degree_in(v);
        let mut lc = Self::zero();
        for (m, c) in &self.terms {
            if m.degree_in(v) == d {
                lc.add_term(m.without(v), c.clone());
            }
        }
        (d, lc)
    }

    /// Gcd of the coefficients of `self` viewed as a polynomial in `v`.
    fn content_in(&self, v: &str) -> Poly<K> {
        let mut g = Self::zero();
        for c in self.coefficients_in(v).into_values() {
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn primitive_part_in(&self, v: &str) -> Poly<K> {
        let c = self.content_in(v);
        self.exact_div(&c)
            .expect("content divides its polynomial")
            .monic()
    }

    /// Sparse pseudo-remainder of `self` by `b` in the variable `v`.
    fn pseudo_rem(&self, b: &Poly<K>, v: &str) -> Poly<K> {
        let (db, lcb) = b.leading_coefficient_in(v);
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let (dr, lcr) = r.leading_coefficient_in(v);
            if dr < db {
                return r;
            }
            let shift = Monomial::var(&Var::from(v), dr - db);
            r = &(&r * &lcb) - &(&(&lcr * b).mul_monomial(&shift));
        }
    }
}

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
///
/// Recursive primitive remainder sequence: the smallest variable occurring in
/// either argument is the main variable and coefficients are polynomials in the
/// remaining ones.
pub fn gcd<K: Field>(a: &Poly<K>, b: &Poly<K>) -> Poly<K> {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        return monomial_gcd(a, b);
    }
    if b.total_degree() <= a.total_degree() {
        if a.exact_div(b).is_some() {
            return b.monic();
        }
    } else if b.exact_div(a).is_some() {
        return a.monic();
    }

    let va = a.vars();
    let vb = b.vars();
    let v = va
        .union(&vb)
        .next()
        .cloned()
        .expect("non-constant polynomial has a variable");
    match (va.contains(&v), vb.contains(&v)) {
        (true, false) => gcd(&a.content_in(&v), b),
        (false, true) => gcd(a, &b.content_in(&v)),
        _ => {
            let ca = a.content_in(&v);
            let cb = b.content_in(&v);
            let pa = a.exact_div(&ca).expect("content divides");
            let pb = b.exact_div(&cb).expect("content divides");
            let c = gcd(&ca, &cb);
            let g = primitive_gcd_in(pa, pb, &v);
            (&c * &g).monic()
        }
    }
}

fn monomial_gcd<K: Field>(a: &Poly<K>, b: &Poly<K>) -> Poly<K> {
    let mut m: Option<Monomial> = None;
    for (tm, _) in a.terms().chain(b.terms()) {
        m = Some(match m {
            None => tm.clone(),
            Some(acc) => acc.gcd(tm),
        });
        if m.as_ref().is_some_and(Monomial::is_one) {
            break;
        }
    }
    Poly::term(m.unwrap_or_default(), K::one())
}

fn primitive_gcd_in<K: Field>(a: Poly<K>, b: Poly<K>, v: &str) -> Poly<K> {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) {
        (a, b)
    } else {
        (b, a)
    };
    loop {
        let r = a.pseudo_rem(&b, v);
        if r.is_zero() {
            return b.primitive_part_in(v);
        }
        if !r.contains_var(v) {
            return Poly::one();
        }
        a = b;
        b = r.primitive_part_in(v);
    }
}

impl<K: Field> Add for &Poly<K> {
    type Output = Poly<K>;
    fn add(self, rhs: &Poly<K>) -> Poly<K> {
        let (big, small) = if self.terms.len() >= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<K: Field> Sub for &Poly<K> {
    type Output = Poly<K>;
    fn sub(self, rhs: &Poly<K>) -> Poly<K> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<K: Field> Mul for &Poly<K> {
    type Output = Poly<K>;
    fn mul(self, rhs: &Poly<K>) -> Poly<K> {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<K: Field> Neg for &Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl<K: Field> fmt::Display for Poly<K> {
    /// Terms from the leading one down, e.g. `x^2*y - 3/2*x + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = if neg { -c.clone() } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type P = Poly<BigRational>;

    fn v(name: &str) -> P {
        P::var(&Var::from(name))
    }

    fn c(k: i64) -> P {
        P::constant(BigRational::from_i64(k))
    }

    #[test]
    fn grlex_order() {
        let x = Var::from("x");
        let y = Var::from("y");
        let x2 = Monomial::var(&x, 2);
        let xy = Monomial::var(&x, 1).mul(&Monomial::var(&y, 1));
        let y2 = Monomial::var(&y, 2);
        let x1 = Monomial::var(&x, 1);
        assert!(x2 > xy && xy > y2 && y2 > x1 && x1 > Monomial::one());
    }

    #[test]
    fn monomial_division() {
        let x = Var::from("x");
        let y = Var::from("y");
        let x2y = Monomial::var(&x, 2).mul(&Monomial::var(&y, 1));
        assert_eq!(x2y.div(&Monomial::var(&x, 1)), Some(Monomial::var(&x, 1).mul(&Monomial::var(&y, 1))));
        assert_eq!(x2y.div(&Monomial::var(&y, 2)), None);
        assert_eq!(Monomial::var(&x, 1).div(&Monomial::var(&y, 1)), None);
    }

    #[test]
    fn exact_division() {
        let (x, y) = (v("x"), v("y"));
        let a = &(&x + &y) * &(&x - &y);
        assert_eq!(a.exact_div(&(&x - &y)), Some(&x + &y));
        assert_eq!(a.exact_div(&(&x + &c(1))), None);
    }

    #[test]
    fn gcd_of_products() {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        let common = &(&(&x * &y) + &z) * &(&x - &c(2));
        let a = &common * &(&y + &c(1));
        let b = &common * &(&(&x * &z) - &y);
        assert_eq!(gcd(&a, &b), common.monic());
        assert!(gcd(&(&x + &c(1)), &(&x - &c(1))).is_one());
    }

    #[test]
    fn gcd_with_monomials() {
        let (x, y) = (v("x"), v("y"));
        let a = &(&x * &x) * &y;
        let b = &(&x * &y) + &(&x * &x);
        assert_eq!(gcd(&a, &b), x);
    }

    #[test]
    fn derivative_and_pow() {
        let x = v("x");
        let p = (&x + &c(1)).pow(3);
        assert_eq!(p.derivative("x"), (&x + &c(1)).pow(2).scale(&BigRational::from_i64(3)));
    }

    #[test]
    fn display_canonical() {
        let (x, y) = (v("x"), v("y"));
        let p = &(&(&x * &x) * &y) - &(&c(3) * &x);
        assert_eq!(p.to_string(), "x^2*y - 3*x");
    }
}
