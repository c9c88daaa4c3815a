//! Rational-function arithmetic against a numeric oracle, and exterior
//! calculus identities on random tensors.

use std::collections::BTreeMap;

use gcbundle::sample;
use gcbundle::{parse_expr, Chart, ChartMap, KForm, Polyvector, RationalExpr, VectorField, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug)]
enum Tree {
    Const(i64),
    Var(usize),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, u32),
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![(-4i64..=4).prop_map(Tree::Const), (0usize..3).prop_map(Tree::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Div(Box::new(a), Box::new(b))),
            (inner, 0u32..3).prop_map(|(a, e)| Tree::Pow(Box::new(a), e)),
        ]
    })
}

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// `None` when the tree is undefined as a rational function.
fn symbolic(t: &Tree) -> Option<RationalExpr> {
    Some(match t {
        Tree::Const(c) => RationalExpr::from_i64(*c),
        Tree::Var(i) => parse_expr(VARS[*i]).unwrap(),
        Tree::Add(a, b) => &symbolic(a)? + &symbolic(b)?,
        Tree::Sub(a, b) => &symbolic(a)? - &symbolic(b)?,
        Tree::Mul(a, b) => &symbolic(a)? * &symbolic(b)?,
        Tree::Div(a, b) => symbolic(a)?.checked_div(&symbolic(b)?).ok()?,
        Tree::Pow(a, e) => symbolic(a)?.pow(*e as i32).ok()?,
    })
}

/// Value and derivative in `x` at a point, by dual-number evaluation.
fn numeric(t: &Tree, pt: &[Q; 3]) -> Option<(Q, Q)> {
    Some(match t {
        Tree::Const(c) => (q(*c), Q::zero()),
        Tree::Var(i) => (pt[*i].clone(), if *i == 0 { Q::one() } else { Q::zero() }),
        Tree::Add(a, b) => {
            let ((u, du), (v, dv)) = (numeric(a, pt)?, numeric(b, pt)?);
            (u + v, du + dv)
        }
        Tree::Sub(a, b) => {
            let ((u, du), (v, dv)) = (numeric(a, pt)?, numeric(b, pt)?);
            (u - v, du - dv)
        }
        Tree::Mul(a, b) => {
            let ((u, du), (v, dv)) = (numeric(a, pt)?, numeric(b, pt)?);
            (&u * &v, du * &v + &u * dv)
        }
        Tree::Div(a, b) => {
            let ((u, du), (v, dv)) = (numeric(a, pt)?, numeric(b, pt)?);
            if v.is_zero() {
                return None;
            }
            (&u / &v, (du * &v - &u * dv) / (&v * &v))
        }
        Tree::Pow(a, e) => {
            let (u, du) = numeric(a, pt)?;
            let e = *e as i32;
            if e == 0 {
                (Q::one(), Q::zero())
            } else {
                (num_traits::pow(u.clone(), e as usize), q(e as i64) * num_traits::pow(u, e as usize - 1) * du)
            }
        }
    })
}

fn at(f: &RationalExpr, pt: &[Q; 3]) -> Option<Q> {
    let map: BTreeMap<_, _> = VARS
        .iter()
        .zip(pt)
        .map(|(v, c)| (gcbundle::Var::from(*v), RationalExpr::constant(c.clone())))
        .collect();
    f.substitute(&map).ok()?.as_constant()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arithmetic_matches_numeric_oracle(
        t in tree(),
        pt in proptest::array::uniform3(-5i64..=5),
    ) {
        let pt = [q(pt[0]) + Q::new(1.into(), 7.into()), q(pt[1]), q(pt[2]) - Q::new(1.into(), 3.into())];
        if let (Some(f), Some((v, dv))) = (symbolic(&t), numeric(&t, &pt)) {
            prop_assert_eq!(at(&f, &pt), Some(v));
            prop_assert_eq!(at(&f.derivative("x"), &pt), Some(dv));
        }
    }

    #[test]
    fn display_parse_round_trip(t in tree()) {
        if let Some(f) = symbolic(&t) {
            prop_assert_eq!(parse_expr(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn field_laws(a in tree(), b in tree(), c in tree()) {
        if let (Some(a), Some(b), Some(c)) = (symbolic(&a), symbolic(&b), symbolic(&c)) {
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            if !b.is_zero() {
                prop_assert_eq!(&a.checked_div(&b).unwrap() * &b, a);
            }
        }
    }
}

fn chart(n: usize) -> Chart {
    Chart::new(&["x", "y", "z", "w"][..n]).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `dω(Y_0, …, Y_k)` by the invariant formula.
fn d_oracle(w: &KForm, ys: &[VectorField]) -> RationalExpr {
    let k = w.degree();
    let mut acc = RationalExpr::zero();
    for i in 0..=k {
        let rest: Vec<&VectorField> = ys.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y).collect();
        let t = ys[i].apply(&w.eval(&rest));
        acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    for i in 0..=k {
        for j in i + 1..=k {
            let br = ys[i].bracket(&ys[j]);
            let mut rest = vec![&br];
            rest.extend(ys.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, y)| y));
            let t = w.eval(&rest);
            acc = if (i + j) % 2 == 0 { &acc + &t } else { &acc - &t };
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn d_squared_and_invariant_formula(seed: u64, n in 1usize..=4, k in 0usize..=2) {
        let mut r = rng(seed);
        let c = chart(n);
        prop_assume!(k < n);
        let w = sample::kform(&mut r, &c, k, 2);
        prop_assert!(w.d().d().is_zero());
        let ys: Vec<VectorField> = (0..=k).map(|_| sample::vector_field(&mut r, &c, 1)).collect();
        let refs: Vec<&VectorField> = ys.iter().collect();
        prop_assert_eq!(w.d().eval(&refs), d_oracle(&w, &ys));
    }

    #[test]
    fn lie_derivative_of_forms(seed: u64, n in 1usize..=3, k in 1usize..=2) {
        let mut r = rng(seed);
        let c = chart(n);
        prop_assume!(k <= n);
        let w = sample::kform(&mut r, &c, k, 2);
        let x = sample::vector_field(&mut r, &c, 2);
        let y = sample::vector_field(&mut r, &c, 1);
        let ys: Vec<VectorField> = (0..k).map(|_| sample::vector_field(&mut r, &c, 1)).collect();
        let refs: Vec<&VectorField> = ys.iter().collect();
        let mut expected = x.apply(&w.eval(&refs));
        for i in 0..k {
            let br = x.bracket(&ys[i]);
            let mut args = refs.clone();
            args[i] = &br;
            expected = &expected - &w.eval(&args);
        }
        prop_assert_eq!(w.lie(&x).eval(&refs), expected);
        // i_[X,Y] = ℒ_X i_Y - i_Y ℒ_X
        let lhs = w.contract(&x.bracket(&y)).unwrap();
        let rhs = w.contract(&y).unwrap().lie(&x).sub(&w.lie(&x).contract(&y).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wedge_leibniz(seed: u64, n in 2usize..=4, p in 0usize..=2, k in 0usize..=2) {
        let mut r = rng(seed);
        let c = chart(n);
        let a = sample::kform(&mut r, &c, p, 2);
        let b = sample::kform(&mut r, &c, k, 2);
        let sign = if p % 2 == 0 { RationalExpr::one() } else { -RationalExpr::one() };
        let rhs = a.d().wedge(&b).add(&a.wedge(&b.d()).scale(&sign));
        prop_assert_eq!(a.wedge(&b).d(), rhs);
    }

    #[test]
    fn pullback_functorial(seed: u64, n in 1usize..=3, k in 0usize..=2) {
        let mut r = rng(seed);
        let c = chart(n);
        prop_assume!(k <= n);
        let w = sample::kform(&mut r, &c, k, 2);
        let f = sample::chart_map(&mut r, &c, &c, 2);
        let g = sample::triangular_automorphism(&mut r, &c);
        let fg = g.then(&f).unwrap();
        prop_assert_eq!(w.pullback(&fg).unwrap(), w.pullback(&f).unwrap().pullback(&g).unwrap());
        prop_assert_eq!(w.d().pullback(&f).unwrap(), w.pullback(&f).unwrap().d());
        prop_assert_eq!(w.pullback(&ChartMap::identity(&c)).unwrap(), w);
    }

    #[test]
    fn schouten_agrees_with_lie(seed: u64, n in 2usize..=4) {
        let mut r = rng(seed);
        let c = chart(n);
        let p = sample::polyvector(&mut r, &c, 2, 2);
        let x = sample::vector_field(&mut r, &c, 2);
        let grad = |f: &RationalExpr| -> Vec<RationalExpr> { (0..n).map(|i| c.partial(f, i)).collect() };
        let lie = p.lie(&x);
        for a in 0..n {
            for b in 0..n {
                let ea: Vec<RationalExpr> = (0..n).map(|i| RationalExpr::from_i64((i == a) as i64)).collect();
                let eb: Vec<RationalExpr> = (0..n).map(|i| RationalExpr::from_i64((i == b) as i64)).collect();
                let la = grad(x.component(a));
                let lb = grad(x.component(b));
                let expected = &(&x.apply(&p.eval(&[ea.clone(), eb.clone()])) - &p.eval(&[la, eb]))
                    - &p.eval(&[ea, lb]);
                prop_assert_eq!(lie.eval(&[
                    (0..n).map(|i| RationalExpr::from_i64((i == a) as i64)).collect(),
                    (0..n).map(|i| RationalExpr::from_i64((i == b) as i64)).collect(),
                ]), expected);
            }
        }
        // with this sign convention [P, Q] = (-1)^{pq} [Q, P]
        let q2 = sample::polyvector(&mut r, &c, 2, 1);
        prop_assert_eq!(p.schouten(&q2), q2.schouten(&p));
        prop_assert_eq!(x.to_polyvector().schouten(&p), p.schouten(&x.to_polyvector()));
        let y = sample::vector_field(&mut r, &c, 1).to_polyvector();
        prop_assert_eq!(x.to_polyvector().schouten(&y), y.schouten(&x.to_polyvector()).neg());
    }
}

#[test]
fn schouten_worked_example() {
    let c = chart(3);
    let lam = Polyvector::from_components(&c, 2, [(vec![0, 1], parse_expr("1").unwrap()), (vec![0, 2], parse_expr("x").unwrap())])
        .unwrap();
    let expected = Polyvector::from_components(&c, 3, [(vec![0, 1, 2], RationalExpr::from_i64(-2))]).unwrap();
    assert_eq!(lam.schouten(&lam), expected);
}

#[test]
fn zero_denominator_is_rejected() {
    assert!(matches!(parse_expr("1/(x-x)"), Err(gcbundle::Error::ZeroDenominator)));
}
