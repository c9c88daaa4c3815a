//! Rational functions in canonical form.
//!
//! A [`RatFunc`] is `num / den` with `gcd(num, den) = 1` and `den` monic in
//! graded lexicographic order. Zero is `0 / 1`. With this normalization,
//! structural equality is mathematical equality, which is what every residual
//! check in the engine relies on.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::symkernel::field::Field;
use crate::symkernel::poly::{gcd, Poly, Var};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc<K: Field> {
    num: Poly<K>,
    den: Poly<K>,
}

impl<K: Field> RatFunc<K> {
    /// Build `num / den` and normalize.
    pub fn new(num: Poly<K>, den: Poly<K>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Poly<K>, den: Poly<K>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(c) = den.as_constant() {
            let inv = K::one() / c;
            return RatFunc {
                num: num.scale(&inv),
                den: Poly::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading().map(|(_, c)| c.clone()).expect("nonzero");
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = K::one() / lc;
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn from_poly(p: Poly<K>) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn constant(c: K) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_i64(k: i64) -> Self {
        Self::constant(K::from_i64(k))
    }

    pub fn var(v: &Var) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn numer(&self) -> &Poly<K> {
        &self.num
    }

    pub fn denom(&self) -> &Poly<K> {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<K> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        if e >= 0 {
            let e = e as u32;
            Ok(RatFunc {
                num: self.num.pow(e),
                den: self.den.pow(e),
            })
        } else {
            self.inv()?.pow(-e)
        }
    }

    pub fn derivative(&self, v: &str) -> Self {
        if !self.contains_var(v) {
            return Self::zero();
        }
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative(v));
        }
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        let top = &(&dn * &self.den) - &(&self.num * &dd);
        Self::normalized(top, self.den.pow(2))
    }

    /// Simultaneous substitution of variables by rational functions.
    ///
    /// Fails with [`Error::ZeroDenominator`] when the substituted denominator
    /// vanishes identically.
    pub fn substitute(&self, map: &BTreeMap<Var, RatFunc<K>>) -> Result<Self> {
        let mut cache: BTreeMap<(Var, u32), RatFunc<K>> = BTreeMap::new();
        let num = eval_poly(&self.num, map, &mut cache);
        let den = eval_poly(&self.den, map, &mut cache);
        num.checked_div(&den)
    }
}

fn eval_poly<K: Field>(
    p: &Poly<K>,
    map: &BTreeMap<Var, RatFunc<K>>,
    cache: &mut BTreeMap<(Var, u32), RatFunc<K>>,
) -> RatFunc<K> {
    let mut acc = RatFunc::zero();
    for (m, c) in p.terms() {
        let mut t = RatFunc::constant(c.clone());
        for (v, e) in m.powers() {
            let factor = match map.get(v) {
                None => RatFunc::from_poly(Poly::term(crate::symkernel::poly::Monomial::var(v, *e), K::one())),
                Some(val) => cache
                    .entry((v.clone(), *e))
                    .or_insert_with(|| RatFunc {
                        num: val.num.pow(*e),
                        den: val.den.pow(*e),
                    })
                    .clone(),
            };
            t = &t * &factor;
        }
        acc = &acc + &t;
    }
    acc
}

impl<K: Field> Zero for RatFunc<K> {
    fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<K: Field> One for RatFunc<K> {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

impl<K: Field> Add for &RatFunc<K> {
    type Output = RatFunc<K>;
    fn add(self, rhs: &RatFunc<K>) -> RatFunc<K> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RatFunc::from_poly(num);
            }
            return RatFunc::normalized(num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFunc::normalized(num, &self.den * &rhs.den)
    }
}

impl<K: Field> Sub for &RatFunc<K> {
    type Output = RatFunc<K>;
    fn sub(self, rhs: &RatFunc<K>) -> RatFunc<K> {
        self + &(-rhs)
    }
}

impl<K: Field> Mul for &RatFunc<K> {
    type Output = RatFunc<K>;
    fn mul(self, rhs: &RatFunc<K>) -> RatFunc<K> {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        // cross-cancel so the product is already reduced
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let a = self.num.exact_div(&g1).expect("gcd divides");
        let d = rhs.den.exact_div(&g1).expect("gcd divides");
        let c = rhs.num.exact_div(&g2).expect("gcd divides");
        let b = self.den.exact_div(&g2).expect("gcd divides");
        let num = &a * &c;
        let den = &b * &d;
        let lc = den.leading().map(|(_, k)| k.clone()).expect("nonzero");
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = K::one() / lc;
            RatFunc {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }
}

impl<K: Field> Div for &RatFunc<K> {
    type Output = RatFunc<K>;

    /// Panics on division by zero; use [`RatFunc::checked_div`] otherwise.
    fn div(self, rhs: &RatFunc<K>) -> RatFunc<K> {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

impl<K: Field> Neg for &RatFunc<K> {
    type Output = RatFunc<K>;
    fn neg(self) -> RatFunc<K> {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl<K: Field> $tr for RatFunc<K> {
            type Output = RatFunc<K>;
            fn $m(self, rhs: RatFunc<K>) -> RatFunc<K> {
                (&self).$m(&rhs)
            }
        }
        impl<K: Field> $tr<&RatFunc<K>> for RatFunc<K> {
            type Output = RatFunc<K>;
            fn $m(self, rhs: &RatFunc<K>) -> RatFunc<K> {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl<K: Field> Neg for RatFunc<K> {
    type Output = RatFunc<K>;
    fn neg(self) -> RatFunc<K> {
        -&self
    }
}

impl<K: Field> std::iter::Sum for RatFunc<K> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| &acc + &x)
    }
}

fn needs_parens<K: Field>(p: &Poly<K>) -> bool {
    p.num_terms() > 1
}

fn is_single_power<K: Field>(p: &Poly<K>) -> bool {
    p.num_terms() == 1
        && p
            .leading()
            .is_some_and(|(m, c)| c.is_one() && m.powers().len() == 1)
}

impl<K: Field> fmt::Display for RatFunc<K> {
    /// Reparsable canonical text, e.g. `(x + 1)/(y^2*z)` or `-x/y^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if needs_parens(&self.num) {
            write!(f, "({})", self.num)?;
        } else {
            write!(f, "{}", self.num)?;
        }
        if is_single_power(&self.den) {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type R = RatFunc<BigRational>;

    fn v(name: &str) -> R {
        R::var(&Var::from(name))
    }

    fn k(n: i64) -> R {
        R::from_i64(n)
    }

    #[test]
    fn cancels_common_factor() {
        let x = v("x");
        let num = &(&x * &x) - &k(1);
        let q = num.checked_div(&(&x - &k(1))).unwrap();
        assert_eq!(q, &x + &k(1));
        assert!(q.is_polynomial());
    }

    #[test]
    fn zero_is_unique() {
        let x = v("x");
        let z = R::new(Poly::zero(), Poly::constant(BigRational::from_i64(5))).unwrap();
        assert!(z.is_zero());
        assert_eq!(z, R::zero());
        let a = x.checked_div(&(&x + &k(1))).unwrap();
        assert_eq!(&a - &a, R::zero());
    }

    #[test]
    fn content_is_normalized() {
        let x = v("x");
        let q = (&k(2) * &x).checked_div(&k(4)).unwrap();
        assert_eq!(q.to_string(), "1/2*x");
    }

    #[test]
    fn zero_denominator_rejected() {
        let x = v("x");
        assert!(matches!(k(1).checked_div(&(&x - &x)), Err(Error::ZeroDenominator)));
        assert!(matches!(R::new(Poly::one(), Poly::zero()), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn denominator_is_monic() {
        let (x, y) = (v("x"), v("y"));
        let q = x.checked_div(&(&(&k(-3) * &y) + &k(6))).unwrap();
        assert!(q.denom().leading().unwrap().1.is_one());
        assert_eq!(q, (&k(-1) * &x).checked_div(&(&(&k(3) * &y) - &k(6))).unwrap());
    }

    #[test]
    fn quotient_rule() {
        let x = v("x");
        let f = k(1).checked_div(&x).unwrap();
        let expected = (&k(-1)).checked_div(&(&x * &x)).unwrap();
        assert_eq!(f.derivative("x"), expected);
    }

    #[test]
    fn substitution() {
        let (u, x, y) = (v("u"), v("x"), v("y"));
        let f = &x + &(&y * &y);
        let mut map = BTreeMap::new();
        map.insert(Var::from("x"), u.clone());
        map.insert(Var::from("y"), k(1).checked_div(&u).unwrap());
        let g = f.substitute(&map).unwrap();
        assert_eq!(g, &u + &k(1).checked_div(&(&u * &u)).unwrap());
    }

    #[test]
    fn generic_over_machine_rationals() {
        use num_rational::Rational64;
        let x = RatFunc::<Rational64>::var(&Var::from("x"));
        let one = RatFunc::<Rational64>::one();
        let q = (&(&x * &x) - &one).checked_div(&(&x + &one)).unwrap();
        assert_eq!(q, &x - &one);
    }
}
