//! Vector fields, differential forms and multivector fields on a chart.
//!
//! Antisymmetric objects store components on strictly increasing index
//! tuples; a missing entry is zero. Forms are written `Σ ω_I dx^I` and
//! multivectors `Σ P^I ∂_I`, so that `(dx∧dy)(∂x, ∂y) = 1` and
//! `(∂x∧∂y)(dx, dy) = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::symkernel::chart::{Chart, ChartMap};
use crate::{Matrix, RationalExpr};

/// Sort `idx` in place and return the permutation sign, or `None` if an
/// index repeats.
pub(crate) fn sort_with_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn signed(v: &RationalExpr, sign: i64) -> RationalExpr {
    if sign < 0 {
        -v
    } else {
        v.clone()
    }
}

/// Determinant by cofactor expansion; only used for small sizes.
pub(crate) fn det(m: &[Vec<RationalExpr>]) -> RationalExpr {
    match m.len() {
        0 => RationalExpr::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        n => {
            let mut acc = RationalExpr::zero();
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<RationalExpr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][col] * &det(&minor);
                acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

fn coefficient_string(c: &RationalExpr) -> Option<String> {
    if c.is_one() {
        return None;
    }
    let s = c.to_string();
    if c.numer().num_terms() > 1 || !c.is_polynomial() {
        Some(format!("({s})"))
    } else {
        Some(s)
    }
}

/// Shared storage for alternating objects of a fixed degree.
#[derive(Clone, PartialEq, Eq, Debug)]
struct Alt {
    chart: Chart,
    degree: usize,
    comps: BTreeMap<Vec<usize>, RationalExpr>,
}

impl Alt {
    fn zero(chart: &Chart, degree: usize) -> Self {
        Alt {
            chart: chart.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    fn accumulate(&mut self, mut idx: Vec<usize>, v: RationalExpr) {
        debug_assert_eq!(idx.len(), self.degree);
        if v.is_zero() {
            return;
        }
        let Some(sign) = sort_with_sign(&mut idx) else {
            return;
        };
        let v = signed(&v, sign);
        match self.comps.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &v;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn get(&self, idx: &[usize]) -> RationalExpr {
        let mut sorted = idx.to_vec();
        match sort_with_sign(&mut sorted) {
            None => RationalExpr::zero(),
            Some(sign) => self
                .comps
                .get(&sorted)
                .map_or_else(RationalExpr::zero, |v| signed(v, sign)),
        }
    }

    fn check(&self, other: &Alt) {
        assert_eq!(self.chart, other.chart, "objects on different charts");
    }

    fn add(&self, other: &Alt) -> Alt {
        self.check(other);
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.accumulate(k.clone(), v.clone());
        }
        out
    }

    fn neg(&self) -> Alt {
        Alt {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    fn scale(&self, f: &RationalExpr) -> Alt {
        if f.is_zero() {
            return Alt::zero(&self.chart, self.degree);
        }
        Alt {
            chart: self.chart.clone(),
            degree: self.degree,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), v * f)).collect(),
        }
    }

    fn wedge(&self, other: &Alt) -> Alt {
        self.check(other);
        let mut out = Alt::zero(&self.chart, self.degree + other.degree);
        for (i, a) in &self.comps {
            for (j, b) in &other.comps {
                if i.iter().any(|x| j.contains(x)) {
                    continue;
                }
                let mut idx = i.clone();
                idx.extend_from_slice(j);
                out.accumulate(idx, a * b);
            }
        }
        out
    }

    /// Full evaluation against `degree` dual objects given by their components.
    fn eval(&self, args: &[Vec<RationalExpr>]) -> RationalExpr {
        assert_eq!(args.len(), self.degree, "wrong number of arguments");
        let mut acc = RationalExpr::zero();
        for (idx, c) in &self.comps {
            let m: Vec<Vec<RationalExpr>> = idx
                .iter()
                .map(|&i| args.iter().map(|a| a[i].clone()).collect())
                .collect();
            let d = det(&m);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    /// Insert a dual object of degree one in the first slot.
    fn contract_first(&self, v: &[RationalExpr]) -> Alt {
        let mut out = Alt::zero(&self.chart, self.degree - 1);
        for (idx, c) in &self.comps {
            for (pos, &i) in idx.iter().enumerate() {
                if v[i].is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let t = c * &v[i];
                out.accumulate(rest, if pos % 2 == 1 { -t } else { t });
            }
        }
        out
    }

    fn map_components(&self, mut f: impl FnMut(&RationalExpr) -> RationalExpr) -> Alt {
        let mut out = Alt::zero(&self.chart, self.degree);
        for (k, v) in &self.comps {
            out.accumulate(k.clone(), f(v));
        }
        out
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, prefix: &str) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, c)) in self.comps.iter().enumerate() {
            let neg = c.numer().leading().is_some_and(|(_, k)| crate::Field::is_negative(k))
                && c.numer().num_terms() == 1;
            let shown = if neg { -c } else { c.clone() };
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let basis: Vec<String> = idx
                .iter()
                .map(|&i| format!("{prefix}{}", self.chart.name(i)))
                .collect();
            if idx.is_empty() {
                write!(f, "{shown}")?;
            } else {
                if let Some(cs) = coefficient_string(&shown) {
                    write!(f, "{cs}*")?;
                }
                write!(f, "{}", basis.join("∧"))?;
            }
        }
        Ok(())
    }
}

/// A vector field `Σ X^i ∂_i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<RationalExpr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<RationalExpr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::BadArity(format!(
                "vector field on {chart} needs {} components",
                chart.dim()
            )));
        }
        Ok(VectorField {
            chart: chart.clone(),
            comps,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            comps: vec![RationalExpr::zero(); chart.dim()],
        }
    }

    /// `∂_i`.
    pub fn coordinate(chart: &Chart, i: usize) -> Self {
        let mut v = Self::zero(chart);
        v.comps[i] = RationalExpr::one();
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[RationalExpr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &RationalExpr {
        &self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Zero::is_zero)
    }

    /// `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &RationalExpr) -> RationalExpr {
        self.comps
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * &self.chart.partial(f, i))
            .sum()
    }

    /// Lie bracket `[X, Y]`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.chart, other.chart, "objects on different charts");
        let comps = (0..self.chart.dim())
            .map(|j| &self.apply(&other.comps[j]) - &other.apply(&self.comps[j]))
            .collect();
        VectorField {
            chart: self.chart.clone(),
            comps,
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.chart, other.chart, "objects on different charts");
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> VectorField {
        self.scale(&-RationalExpr::one())
    }

    pub fn scale(&self, f: &RationalExpr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c * f).collect(),
        }
    }

    pub fn to_polyvector(&self) -> Polyvector {
        let mut alt = Alt::zero(&self.chart, 1);
        for (i, c) in self.comps.iter().enumerate() {
            alt.accumulate(vec![i], c.clone());
        }
        Polyvector(alt)
    }

    /// Lie derivative of a form along this field.
    pub fn lie_form(&self, form: &KForm) -> KForm {
        form.lie(self)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_polyvector().fmt(f)
    }
}

/// A differential `k`-form `Σ ω_I dx^I`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KForm(Alt);

impl KForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        KForm(Alt::zero(chart, degree))
    }

    /// A function viewed as a 0-form.
    pub fn function(chart: &Chart, f: RationalExpr) -> Self {
        let mut alt = Alt::zero(chart, 0);
        alt.accumulate(Vec::new(), f);
        KForm(alt)
    }

    /// `dx_i`.
    pub fn dx(chart: &Chart, i: usize) -> Self {
        Self::from_components(chart, 1, [(vec![i], RationalExpr::one())]).expect("valid index")
    }

    /// Build from `(indices, coefficient)` pairs; indices may be unsorted and
    /// are normalized with the permutation sign.
    pub fn from_components(
        chart: &Chart,
        degree: usize,
        comps: impl IntoIterator<Item = (Vec<usize>, RationalExpr)>,
    ) -> Result<Self> {
        let mut alt = Alt::zero(chart, degree);
        for (idx, v) in comps {
            if idx.len() != degree || idx.iter().any(|&i| i >= chart.dim()) {
                return Err(Error::BadArity(format!("index {idx:?} for a {degree}-form on {chart}")));
            }
            let mut probe = idx.clone();
            if sort_with_sign(&mut probe).is_none() {
                return Err(Error::BadArity(format!("repeated index in {idx:?}")));
            }
            alt.accumulate(idx, v);
        }
        Ok(KForm(alt))
    }

    /// A 1-form from its components `ω_i`.
    pub fn one_form(chart: &Chart, comps: Vec<RationalExpr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::BadArity("1-form component count".into()));
        }
        Self::from_components(chart, 1, comps.into_iter().enumerate().map(|(i, c)| (vec![i], c)))
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, RationalExpr> {
        &self.0.comps
    }

    /// Component on an arbitrary (possibly unsorted) index tuple.
    pub fn component(&self, idx: &[usize]) -> RationalExpr {
        self.0.get(idx)
    }

    /// Value of a 0-form.
    pub fn as_function(&self) -> RationalExpr {
        assert_eq!(self.degree(), 0, "not a 0-form");
        self.0.get(&[])
    }

    pub fn is_zero(&self) -> bool {
        self.0.comps.is_empty()
    }

    pub fn add(&self, other: &KForm) -> KForm {
        KForm(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &KForm) -> KForm {
        KForm(self.0.add(&other.0.neg()))
    }

    pub fn neg(&self) -> KForm {
        KForm(self.0.neg())
    }

    pub fn scale(&self, f: &RationalExpr) -> KForm {
        KForm(self.0.scale(f))
    }

    pub fn wedge(&self, other: &KForm) -> KForm {
        KForm(self.0.wedge(&other.0))
    }

    /// Exterior derivative.
    pub fn d(&self) -> KForm {
        let chart = self.chart().clone();
        let mut out = Alt::zero(&chart, self.degree() + 1);
        if self.degree() >= chart.dim() {
            return KForm(out);
        }
        for (idx, c) in &self.0.comps {
            for j in 0..chart.dim() {
                if idx.contains(&j) {
                    continue;
                }
                let dc = chart.partial(c, j);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![j];
                full.extend_from_slice(idx);
                out.accumulate(full, dc);
            }
        }
        KForm(out)
    }

    /// Interior product `i_X ω`.
    pub fn contract(&self, x: &VectorField) -> Result<KForm> {
        if self.degree() == 0 {
            return Err(Error::DegreeZero);
        }
        assert_eq!(self.chart(), x.chart(), "objects on different charts");
        Ok(KForm(self.0.contract_first(x.components())))
    }

    /// Lie derivative `ℒ_X ω = i_X dω + d i_X ω`.
    pub fn lie(&self, x: &VectorField) -> KForm {
        if self.degree() == 0 {
            return KForm::function(self.chart(), x.apply(&self.as_function()));
        }
        let a = self.d();
        let a = if a.degree() == 0 || a.is_zero() {
            KForm::zero(self.chart(), self.degree())
        } else {
            a.contract(x).expect("positive degree")
        };
        let b = self.contract(x).expect("positive degree").d();
        a.add(&b)
    }

    /// `ω(X_1, …, X_k)`.
    pub fn eval(&self, args: &[&VectorField]) -> RationalExpr {
        let comps: Vec<Vec<RationalExpr>> = args.iter().map(|v| v.components().to_vec()).collect();
        self.0.eval(&comps)
    }

    /// Pullback along a rational chart map into this form's chart.
    pub fn pullback(&self, map: &ChartMap) -> Result<KForm> {
        if map.target() != self.chart() {
            return Err(Error::ChartMismatch);
        }
        let src = map.source();
        let differentials: Vec<KForm> = map
            .components()
            .iter()
            .map(|f| KForm::function(src, f.clone()).d())
            .collect();
        let mut out = KForm::zero(src, self.degree());
        for (idx, c) in &self.0.comps {
            let mut term = KForm::function(src, map.pull_function(c)?);
            for &i in idx {
                term = term.wedge(&differentials[i]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Restrict the chart by reinterpreting components on `chart`; coordinate
    /// names must agree position by position for the indices in use.
    pub fn map_components(&self, f: impl FnMut(&RationalExpr) -> RationalExpr) -> KForm {
        KForm(self.0.map_components(f))
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "d")
    }
}

/// A multivector field `Σ P^I ∂_I`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polyvector(Alt);

impl Polyvector {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        Polyvector(Alt::zero(chart, degree))
    }

    pub fn function(chart: &Chart, f: RationalExpr) -> Self {
        let mut alt = Alt::zero(chart, 0);
        alt.accumulate(Vec::new(), f);
        Polyvector(alt)
    }

    pub fn from_components(
        chart: &Chart,
        degree: usize,
        comps: impl IntoIterator<Item = (Vec<usize>, RationalExpr)>,
    ) -> Result<Self> {
        KForm::from_components(chart, degree, comps).map(|k| Polyvector(k.0))
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn components(&self) -> &BTreeMap<Vec<usize>, RationalExpr> {
        &self.0.comps
    }

    pub fn component(&self, idx: &[usize]) -> RationalExpr {
        self.0.get(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.0.comps.is_empty()
    }

    pub fn add(&self, other: &Polyvector) -> Polyvector {
        Polyvector(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Polyvector) -> Polyvector {
        Polyvector(self.0.add(&other.0.neg()))
    }

    pub fn neg(&self) -> Polyvector {
        Polyvector(self.0.neg())
    }

    pub fn scale(&self, f: &RationalExpr) -> Polyvector {
        Polyvector(self.0.scale(f))
    }

    pub fn wedge(&self, other: &Polyvector) -> Polyvector {
        Polyvector(self.0.wedge(&other.0))
    }

    /// `P(α_1, …, α_k)` for 1-forms given by component vectors.
    pub fn eval(&self, covectors: &[Vec<RationalExpr>]) -> RationalExpr {
        self.0.eval(covectors)
    }

    /// For a bivector `Λ`, the vector field `Λ♯α` with `β(Λ♯α) = Λ(α, β)`.
    pub fn sharp(&self, alpha: &[RationalExpr]) -> VectorField {
        assert_eq!(self.degree(), 2, "sharp needs a bivector");
        let contracted = self.0.contract_first(alpha);
        let n = self.chart().dim();
        VectorField {
            chart: self.chart().clone(),
            comps: (0..n).map(|j| contracted.get(&[j])).collect(),
        }
    }

    /// The degree-one part as a vector field.
    pub fn as_vector_field(&self) -> VectorField {
        assert_eq!(self.degree(), 1, "not a vector field");
        let n = self.chart().dim();
        VectorField {
            chart: self.chart().clone(),
            comps: (0..n).map(|j| self.0.get(&[j])).collect(),
        }
    }

    /// Derivative with respect to the odd coordinate `∂_i`, taken from the
    /// left or from the right.
    fn odd_derivative(&self, i: usize, from_right: bool) -> Alt {
        let d = self.degree();
        let mut out = Alt::zero(self.chart(), d.saturating_sub(1));
        if d == 0 {
            return out;
        }
        for (idx, c) in &self.0.comps {
            if let Some(pos) = idx.iter().position(|&k| k == i) {
                let mut rest = idx.clone();
                rest.remove(pos);
                let moves = if from_right { d - 1 - pos } else { pos };
                out.accumulate(rest, if moves % 2 == 1 { -c } else { c.clone() });
            }
        }
        out
    }

    fn even_derivative(&self, i: usize) -> Alt {
        let chart = self.chart().clone();
        self.0.map_components(|c| chart.partial(c, i))
    }

    /// Schouten–Nijenhuis bracket `(-1)^{p-1} Σ_i (P∂⃖_{ξ_i} ∂_i Q - ∂_i P ∂⃗_{ξ_i} Q)`.
    /// On vector fields it is the Lie bracket, `[X, P] = ℒ_X P`, and
    /// `[Λ, Λ] = -2∂x∧∂y∧∂z` for `Λ = ∂x∧∂y + x∂x∧∂z`.
    pub fn schouten(&self, other: &Polyvector) -> Polyvector {
        assert_eq!(self.chart(), other.chart(), "objects on different charts");
        let (p, q) = (self.degree(), other.degree());
        let mut out = Alt::zero(self.chart(), (p + q).saturating_sub(1));
        if p + q == 0 {
            return Polyvector(out);
        }
        for i in 0..self.chart().dim() {
            let a = self.odd_derivative(i, true).wedge(&other.even_derivative(i));
            let b = self.even_derivative(i).wedge(&other.odd_derivative(i, false));
            out = out.add(&a).add(&b.neg());
        }
        if p % 2 == 0 {
            out = out.neg();
        }
        Polyvector(out)
    }

    /// `ℒ_X P = [X, P]`.
    pub fn lie(&self, x: &VectorField) -> Polyvector {
        x.to_polyvector().schouten(self)
    }
}

impl fmt::Display for Polyvector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(f, "∂")
    }
}

/// A `(1,1)`-tensor, i.e. an endomorphism `a` of the tangent bundle with
/// `(aX)^i = Σ_j a^i_j X^j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TangentEndo {
    chart: Chart,
    matrix: Matrix,
}

impl TangentEndo {
    pub fn new(chart: &Chart, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != chart.dim() || matrix.cols() != chart.dim() {
            return Err(Error::BadArity("(1,1)-tensor shape".into()));
        }
        Ok(TangentEndo {
            chart: chart.clone(),
            matrix,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        TangentEndo {
            chart: chart.clone(),
            matrix: Matrix::zeros(chart.dim(), chart.dim()),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn apply(&self, x: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            comps: self.matrix.mul_vec(x.components()),
        }
    }

    /// `(ℒ_X a)(Y) = [X, aY] - a[X, Y]`, assembled on coordinate fields.
    pub fn lie(&self, x: &VectorField) -> TangentEndo {
        let n = self.chart.dim();
        let columns: Vec<Vec<RationalExpr>> = (0..n)
            .map(|j| {
                let e = VectorField::coordinate(&self.chart, j);
                x.bracket(&self.apply(&e))
                    .sub(&self.apply(&x.bracket(&e)))
                    .components()
                    .to_vec()
            })
            .collect();
        TangentEndo {
            chart: self.chart.clone(),
            matrix: Matrix::from_columns(n, &columns),
        }
    }
}

impl fmt::Display for TangentEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::expr::parse_expr;

    fn e(s: &str) -> RationalExpr {
        parse_expr(s).unwrap()
    }

    fn r3() -> Chart {
        Chart::new(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn d_of_x_dy() {
        let c = r3();
        let w = KForm::from_components(&c, 1, [(vec![1], e("x"))]).unwrap();
        assert_eq!(w.d(), KForm::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap());
        assert!(KForm::dx(&c, 0).d().is_zero());
    }

    #[test]
    fn d_of_y_dx_dz() {
        // d(y dx∧dz) = dy∧dx∧dz = -dx∧dy∧dz
        let c = r3();
        let w = KForm::from_components(&c, 2, [(vec![0, 2], e("y"))]).unwrap();
        assert_eq!(w.d().component(&[0, 1, 2]), e("-1"));
    }

    #[test]
    fn contraction_examples() {
        let c = r3();
        let dxdy = KForm::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
        assert_eq!(dxdy.contract(&VectorField::coordinate(&c, 0)).unwrap(), KForm::dx(&c, 1));
        assert!(KForm::dx(&c, 0).contract(&VectorField::coordinate(&c, 1)).unwrap().is_zero());
        let x_dy = VectorField::new(&c, vec![e("0"), e("x"), e("0")]).unwrap();
        assert_eq!(dxdy.contract(&x_dy).unwrap(), KForm::dx(&c, 0).scale(&e("-x")));
        assert_eq!(KForm::function(&c, e("x")).contract(&x_dy), Err(Error::DegreeZero));
    }

    #[test]
    fn lie_examples() {
        let c = r3();
        let x_dy = KForm::from_components(&c, 1, [(vec![1], e("x"))]).unwrap();
        assert_eq!(x_dy.lie(&VectorField::coordinate(&c, 0)), KForm::dx(&c, 1));
        let euler_x = VectorField::new(&c, vec![e("x"), e("0"), e("0")]).unwrap();
        assert_eq!(KForm::dx(&c, 0).lie(&euler_x), KForm::dx(&c, 0));
        let f = KForm::function(&c, e("x*y"));
        assert_eq!(f.lie(&euler_x).as_function(), e("x*y"));
    }

    #[test]
    fn pullback_chain_rule() {
        let u = Chart::new(&["u"]).unwrap();
        let xy = Chart::new(&["x", "y"]).unwrap();
        let f = ChartMap::new(u.clone(), xy.clone(), vec![e("u"), e("u^2")]).unwrap();
        let dy = KForm::dx(&xy, 1);
        assert_eq!(dy.pullback(&f).unwrap(), KForm::dx(&u, 0).scale(&e("2*u")));
        let x = KForm::function(&xy, e("x"));
        assert_eq!(x.pullback(&f).unwrap().as_function(), e("u"));
        let w = KForm::from_components(&xy, 1, [(vec![0], e("y")), (vec![1], e("x^2"))]).unwrap();
        assert_eq!(w.pullback(&ChartMap::identity(&xy)).unwrap(), w);
    }

    #[test]
    fn schouten_examples() {
        let c = r3();
        let dx = VectorField::coordinate(&c, 0).to_polyvector();
        let x_dy = VectorField::new(&c, vec![e("0"), e("x"), e("0")]).unwrap().to_polyvector();
        assert_eq!(dx.schouten(&x_dy), VectorField::coordinate(&c, 1).to_polyvector());

        let constant = Polyvector::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
        assert!(constant.schouten(&constant).is_zero());

        let lambda = Polyvector::from_components(&c, 2, [(vec![0, 1], e("1")), (vec![0, 2], e("x"))]).unwrap();
        let expected = Polyvector::from_components(&c, 3, [(vec![0, 1, 2], e("-2"))]).unwrap();
        assert_eq!(lambda.schouten(&lambda), expected);
    }

    #[test]
    fn lie_of_bivector() {
        let c = Chart::new(&["t", "r"]).unwrap();
        let euler = VectorField::new(&c, vec![e("0"), e("r")]).unwrap();
        let p = Polyvector::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
        assert_eq!(p.lie(&euler), p.neg());
        let q = Polyvector::from_components(&c, 2, [(vec![0, 1], e("1/r"))]).unwrap();
        assert_eq!(q.lie(&euler), q.scale(&e("-2")));
    }

    #[test]
    fn bivector_sharp() {
        let c = r3();
        let lambda = Polyvector::from_components(&c, 2, [(vec![0, 1], e("1"))]).unwrap();
        // Λ(dx, dy) = 1, so Λ♯dx = ∂y
        let v = lambda.sharp(&[e("1"), e("0"), e("0")]);
        assert_eq!(v, VectorField::coordinate(&c, 1));
    }

    #[test]
    fn display() {
        let c = r3();
        let w = KForm::from_components(&c, 2, [(vec![0, 1], e("1")), (vec![1, 2], e("-x"))]).unwrap();
        assert_eq!(w.to_string(), "dx∧dy - x*dy∧dz");
        let p = Polyvector::from_components(&c, 3, [(vec![0, 1, 2], e("-2"))]).unwrap();
        assert_eq!(p.to_string(), "-2*∂x∧∂y∧∂z");
    }
}
