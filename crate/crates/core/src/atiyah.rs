//! Atiyah algebroid calculus of a trivialized line bundle `L = M × ℝ`.
//!
//! A derivation is a pair `(X, f)` acting on sections by `X(λ) + fλ`; the
//! identity derivation is `𝟙 = (0, 1)`. An Atiyah `k`-form is a pair
//! `(ω₀, ω₁)` of ordinary forms of degrees `k` and `k-1`, evaluated by
//!
//! ```text
//! ω(Δ₁,…,Δ_k) = ω₀(X₁,…,X_k) + Σ_i (-1)^{i+1} f_i ω₁(X₁,…,X̂_i,…,X_k)
//! ```
//!
//! Frames: `e_i = (∂_i, 0)`, `e_n = 𝟙` for `DL`, and the dual frame
//! `ε_i = (dx_i, 0)`, `ε_n = (0, 1)` for `J¹L`. Bundle maps between these
//! are stored as `(n+1)×(n+1)` matrices acting on frame coefficients.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::report::{Residual, ResidualReport};
use crate::{Chart, ChartMap, KForm, Matrix, Polyvector, RationalExpr, TangentEndo, VectorField};

fn same_chart(a: &Chart, b: &Chart) {
    assert_eq!(a, b, "objects on different charts");
}

/// A derivation `(X, f)` of the trivial line bundle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    symbol: VectorField,
    weight: RationalExpr,
}

impl Derivation {
    pub fn new(symbol: VectorField, weight: RationalExpr) -> Self {
        Derivation { symbol, weight }
    }

    pub fn zero(chart: &Chart) -> Self {
        Derivation::new(VectorField::zero(chart), RationalExpr::zero())
    }

    /// The identity derivation `𝟙 = (0, 1)`.
    pub fn identity(chart: &Chart) -> Self {
        Derivation::new(VectorField::zero(chart), RationalExpr::one())
    }

    /// `(X, 0)`.
    pub fn from_vector(x: VectorField) -> Self {
        Derivation::new(x, RationalExpr::zero())
    }

    /// Frame element `e_a`; `a == n` gives `𝟙`.
    pub fn frame_element(chart: &Chart, a: usize) -> Self {
        if a == chart.dim() {
            Self::identity(chart)
        } else {
            Self::from_vector(VectorField::coordinate(chart, a))
        }
    }

    pub fn frame(chart: &Chart) -> Vec<Derivation> {
        (0..=chart.dim()).map(|a| Self::frame_element(chart, a)).collect()
    }

    pub fn from_coeffs(chart: &Chart, coeffs: &[RationalExpr]) -> Self {
        let n = chart.dim();
        assert_eq!(coeffs.len(), n + 1, "derivation needs n+1 coefficients");
        Derivation::new(
            VectorField::new(chart, coeffs[..n].to_vec()).expect("arity checked"),
            coeffs[n].clone(),
        )
    }

    pub fn coeffs(&self) -> Vec<RationalExpr> {
        let mut v = self.symbol.components().to_vec();
        v.push(self.weight.clone());
        v
    }

    pub fn chart(&self) -> &Chart {
        self.symbol.chart()
    }

    /// The symbol `σΔ`.
    pub fn symbol(&self) -> &VectorField {
        &self.symbol
    }

    pub fn weight(&self) -> &RationalExpr {
        &self.weight
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero() && self.weight.is_zero()
    }

    /// `Δ(λ) = X(λ) + fλ`.
    pub fn apply(&self, lambda: &RationalExpr) -> RationalExpr {
        &self.symbol.apply(lambda) + &(&self.weight * lambda)
    }

    /// Commutator `([X,Y], X(g) - Y(f))`.
    pub fn bracket(&self, other: &Derivation) -> Derivation {
        Derivation::new(
            self.symbol.bracket(&other.symbol),
            &self.symbol.apply(&other.weight) - &other.symbol.apply(&self.weight),
        )
    }

    pub fn add(&self, other: &Derivation) -> Derivation {
        Derivation::new(self.symbol.add(&other.symbol), &self.weight + &other.weight)
    }

    pub fn sub(&self, other: &Derivation) -> Derivation {
        Derivation::new(self.symbol.sub(&other.symbol), &self.weight - &other.weight)
    }

    pub fn neg(&self) -> Derivation {
        Derivation::new(self.symbol.neg(), -&self.weight)
    }

    pub fn scale(&self, f: &RationalExpr) -> Derivation {
        Derivation::new(self.symbol.scale(f), &self.weight * f)
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.symbol, self.weight)
    }
}

/// Whether an Atiyah form takes values in `L` or in the trivial bundle.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum ValueKind {
    Line,
    Real,
}

/// An Atiyah `k`-form `(ω₀, ω₁)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AtiyahForm {
    kind: ValueKind,
    comp0: KForm,
    comp1: Option<KForm>,
}

impl AtiyahForm {
    /// Build from components; `comp1` must have degree one less than
    /// `comp0`, and is absent exactly in degree zero.
    pub fn new(kind: ValueKind, comp0: KForm, comp1: Option<KForm>) -> Result<Self> {
        match (&comp1, comp0.degree()) {
            (None, 0) => {}
            (Some(w1), k) if k >= 1 && w1.degree() == k - 1 => {
                if w1.chart() != comp0.chart() {
                    return Err(Error::ChartMismatch);
                }
            }
            _ => return Err(Error::BadArity("Atiyah form components have incompatible degrees".into())),
        }
        Ok(AtiyahForm { kind, comp0, comp1 })
    }

    fn raw(kind: ValueKind, comp0: KForm, comp1: Option<KForm>) -> Self {
        debug_assert!(Self::new(kind, comp0.clone(), comp1.clone()).is_ok());
        AtiyahForm { kind, comp0, comp1 }
    }

    pub fn zero(chart: &Chart, degree: usize, kind: ValueKind) -> Self {
        let comp1 = (degree > 0).then(|| KForm::zero(chart, degree - 1));
        Self::raw(kind, KForm::zero(chart, degree), comp1)
    }

    /// A section of `L`, i.e. an `L`-valued 0-form.
    pub fn section(chart: &Chart, lambda: RationalExpr) -> Self {
        Self::raw(ValueKind::Line, KForm::function(chart, lambda), None)
    }

    /// A function, i.e. a real-valued 0-form.
    pub fn function(chart: &Chart, f: RationalExpr) -> Self {
        Self::raw(ValueKind::Real, KForm::function(chart, f), None)
    }

    /// `σ*η = (η, 0)`.
    pub fn sigma_star(eta: &KForm, kind: ValueKind) -> Self {
        let k = eta.degree();
        let comp1 = (k > 0).then(|| KForm::zero(eta.chart(), k - 1));
        Self::raw(kind, eta.clone(), comp1)
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.comp0.degree()
    }

    pub fn chart(&self) -> &Chart {
        self.comp0.chart()
    }

    pub fn comp0(&self) -> &KForm {
        &self.comp0
    }

    /// `ω₁`; `None` in degree zero.
    pub fn comp1(&self) -> Option<&KForm> {
        self.comp1.as_ref()
    }

    /// `ω₁`; panics on 0-forms.
    pub fn comp1_or_panic(&self) -> &KForm {
        self.comp1.as_ref().expect("degree-zero Atiyah form has no ω₁")
    }

    /// Value of a 0-form.
    pub fn as_function(&self) -> RationalExpr {
        self.comp0.as_function()
    }

    pub fn is_zero(&self) -> bool {
        self.comp0.is_zero() && self.comp1.as_ref().is_none_or(KForm::is_zero)
    }

    fn zip(&self, other: &AtiyahForm, f: impl Fn(&KForm, &KForm) -> KForm) -> AtiyahForm {
        assert_eq!(self.kind, other.kind, "value kinds differ");
        assert_eq!(self.degree(), other.degree(), "degrees differ");
        let comp1 = match (&self.comp1, &other.comp1) {
            (Some(a), Some(b)) => Some(f(a, b)),
            _ => None,
        };
        Self::raw(self.kind, f(&self.comp0, &other.comp0), comp1)
    }

    pub fn add(&self, other: &AtiyahForm) -> AtiyahForm {
        self.zip(other, KForm::add)
    }

    pub fn sub(&self, other: &AtiyahForm) -> AtiyahForm {
        self.zip(other, KForm::sub)
    }

    pub fn neg(&self) -> AtiyahForm {
        self.scale(&-RationalExpr::one())
    }

    pub fn scale(&self, f: &RationalExpr) -> AtiyahForm {
        Self::raw(self.kind, self.comp0.scale(f), self.comp1.as_ref().map(|w| w.scale(f)))
    }

    /// Reinterpret the values as living in the other bundle.
    pub fn with_kind(&self, kind: ValueKind) -> AtiyahForm {
        AtiyahForm { kind, ..self.clone() }
    }

    /// Evaluate on `k` derivations.
    pub fn eval(&self, args: &[&Derivation]) -> RationalExpr {
        assert_eq!(args.len(), self.degree(), "wrong number of arguments");
        let symbols: Vec<&VectorField> = args.iter().map(|d| d.symbol()).collect();
        let mut acc = self.comp0.eval(&symbols);
        if let Some(w1) = &self.comp1 {
            for (i, d) in args.iter().enumerate() {
                if d.weight().is_zero() {
                    continue;
                }
                let rest: Vec<&VectorField> = symbols
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| *v)
                    .collect();
                let t = d.weight() * &w1.eval(&rest);
                acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
            }
        }
        acc
    }

    /// `d_DL`: `(dω₀, ω₀ - dω₁)` for `L`-valued forms and `(dω₀, -dω₁)` for
    /// real-valued ones.
    pub fn d(&self) -> AtiyahForm {
        let d1 = match &self.comp1 {
            Some(w1) => w1.d(),
            None => KForm::zero(self.chart(), 0),
        };
        let comp1 = match self.kind {
            ValueKind::Line => self.comp0.sub(&d1),
            ValueKind::Real => d1.neg(),
        };
        Self::raw(self.kind, self.comp0.d(), Some(comp1))
    }

    /// `i_Δ ω = (i_X ω₀ + f ω₁, -i_X ω₁)`.
    pub fn contract(&self, delta: &Derivation) -> Result<AtiyahForm> {
        if self.degree() == 0 {
            return Err(Error::DegreeZero);
        }
        same_chart(self.chart(), delta.chart());
        let w1 = self.comp1_or_panic();
        let comp0 = self.comp0.contract(delta.symbol())?.add(&w1.scale(delta.weight()));
        let comp1 = if w1.degree() == 0 {
            None
        } else {
            Some(w1.contract(delta.symbol())?.neg())
        };
        Ok(Self::raw(self.kind, comp0, comp1))
    }

    /// `ℒ_Δ = i_Δ d_DL + d_DL i_Δ`; on 0-forms, the action of `Δ`.
    pub fn lie(&self, delta: &Derivation) -> AtiyahForm {
        if self.degree() == 0 {
            let v = self.as_function();
            let out = match self.kind {
                ValueKind::Line => delta.apply(&v),
                ValueKind::Real => delta.symbol().apply(&v),
            };
            return Self::raw(self.kind, KForm::function(self.chart(), out), None);
        }
        let a = self.d().contract(delta).expect("positive degree");
        let b = self.contract(delta).expect("positive degree").d();
        a.add(&b)
    }

    /// `(a₀ + ε∧a₁) ∧ (b₀ + ε∧b₁)`; two `L`-valued factors are rejected.
    pub fn wedge(&self, other: &AtiyahForm) -> Result<AtiyahForm> {
        let kind = match (self.kind, other.kind) {
            (ValueKind::Line, ValueKind::Line) => return Err(Error::ValueMismatch),
            (ValueKind::Real, ValueKind::Real) => ValueKind::Real,
            _ => ValueKind::Line,
        };
        let (p, q) = (self.degree(), other.degree());
        let comp0 = self.comp0.wedge(&other.comp0);
        if p + q == 0 {
            return Ok(Self::raw(kind, comp0, None));
        }
        let mut comp1 = KForm::zero(self.chart(), p + q - 1);
        if let Some(b1) = &other.comp1 {
            let t = self.comp0.wedge(b1);
            comp1 = if p % 2 == 0 { comp1.add(&t) } else { comp1.sub(&t) };
        }
        if let Some(a1) = &self.comp1 {
            comp1 = comp1.add(&a1.wedge(&other.comp0));
        }
        Ok(Self::raw(kind, comp0, Some(comp1)))
    }

    /// Pullback along `F` covering a bundle map with fiber factor `κ`:
    /// `κ^{-w}(F*ω₀ - (dκ/κ)∧F*ω₁, F*ω₁)` with `w = 1` for `L`-valued forms
    /// and `w = 0` for real-valued ones.
    pub fn pullback(&self, map: &ChartMap, kappa: &RationalExpr) -> Result<AtiyahForm> {
        if kappa.is_zero() {
            return Err(Error::NonInvertibleCocycle);
        }
        let src = map.source();
        let p0 = self.comp0.pullback(map)?;
        let (comp0, comp1) = match &self.comp1 {
            None => (p0, None),
            Some(w1) => {
                let p1 = w1.pullback(map)?;
                let dlog = KForm::function(src, kappa.clone())
                    .d()
                    .scale(&kappa.inv().map_err(|_| Error::NonInvertibleCocycle)?);
                (p0.sub(&dlog.wedge(&p1)), Some(p1))
            }
        };
        let out = Self::raw(self.kind, comp0, comp1);
        Ok(match self.kind {
            ValueKind::Line => out.scale(&kappa.inv().map_err(|_| Error::NonInvertibleCocycle)?),
            ValueKind::Real => out,
        })
    }

    /// The matrix `W[a][b] = ω(e_b, e_a)` of `ω♭`.
    pub fn flat(&self) -> Result<Flat> {
        if self.degree() != 2 {
            return Err(Error::BadArity("flat needs an Atiyah 2-form".into()));
        }
        let frame = Derivation::frame(self.chart());
        let n1 = frame.len();
        let m = Matrix::from_fn(n1, n1, |a, b| {
            if a == b {
                RationalExpr::zero()
            } else {
                self.eval(&[&frame[b], &frame[a]])
            }
        });
        Ok(Flat {
            chart: self.chart().clone(),
            matrix: m,
        })
    }

    /// The `L`-valued 2-form whose flat matrix is `w` (assumed antisymmetric).
    pub fn from_flat(chart: &Chart, w: &Matrix) -> Result<AtiyahForm> {
        let n = chart.dim();
        if w.rows() != n + 1 || w.cols() != n + 1 {
            return Err(Error::BadArity("flat matrix shape".into()));
        }
        let mut c0 = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                c0.push((vec![i, j], w.get(j, i).clone()));
            }
        }
        let comp0 = KForm::from_components(chart, 2, c0)?;
        let comp1 = KForm::one_form(chart, (0..n).map(|i| -w.get(n, i)).collect())?;
        AtiyahForm::new(ValueKind::Line, comp0, Some(comp1))
    }

    /// `(φ*ω)(Δ, ∇) = ω(φΔ, φ∇)` for a 2-form.
    pub fn pull_by_endo(&self, phi: &EndoDL) -> Result<AtiyahForm> {
        let w = self.flat()?.matrix;
        let m = phi.matrix();
        AtiyahForm::from_flat(self.chart(), &m.transpose().mul(&w).mul(m))
            .map(|f| f.with_kind(self.kind))
    }

    /// `ω_φ(Δ, ∇) = ω(φΔ, ∇)` for a 2-form; only antisymmetric when
    /// `ω♭φ = φ†ω♭`, which is not checked here.
    pub fn compose_endo(&self, phi: &EndoDL) -> Result<AtiyahForm> {
        let w = self.flat()?.matrix;
        AtiyahForm::from_flat(self.chart(), &w.mul(phi.matrix())).map(|f| f.with_kind(self.kind))
    }
}

impl fmt::Display for AtiyahForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.comp1 {
            None => write!(f, "{}", self.comp0),
            Some(w1) => write!(f, "({}, {})", self.comp0, w1),
        }
    }
}

/// Direct Chevalley–Eilenberg evaluation of `d_DL ω` on `k+1` derivations.
pub fn ce_differential_eval(omega: &AtiyahForm, args: &[&Derivation]) -> RationalExpr {
    let k = omega.degree();
    assert_eq!(args.len(), k + 1, "wrong number of arguments");
    let act = |d: &Derivation, v: &RationalExpr| match omega.kind() {
        ValueKind::Line => d.apply(v),
        ValueKind::Real => d.symbol().apply(v),
    };
    let mut acc = RationalExpr::zero();
    for i in 0..=k {
        let rest: Vec<&Derivation> = args.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| *d).collect();
        let t = act(args[i], &omega.eval(&rest));
        acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    for i in 0..=k {
        for j in i + 1..=k {
            let br = args[i].bracket(args[j]);
            let mut rest: Vec<&Derivation> = vec![&br];
            rest.extend(args.iter().enumerate().filter(|(l, _)| *l != i && *l != j).map(|(_, d)| *d));
            let t = omega.eval(&rest);
            acc = if (i + j) % 2 == 0 { &acc + &t } else { &acc - &t };
        }
    }
    acc
}

/// Direct evaluation of `(ℒ_Δ ω)(Δ₁,…,Δ_k) = Δ·ω(…) - Σ ω(…,[Δ,Δ_i],…)`.
pub fn lie_derivative_eval(omega: &AtiyahForm, delta: &Derivation, args: &[&Derivation]) -> RationalExpr {
    let v = omega.eval(args);
    let mut acc = match omega.kind() {
        ValueKind::Line => delta.apply(&v),
        ValueKind::Real => delta.symbol().apply(&v),
    };
    for i in 0..args.len() {
        let br = delta.bracket(args[i]);
        let mut replaced = args.to_vec();
        replaced[i] = &br;
        acc = &acc - &omega.eval(&replaced);
    }
    acc
}

/// A section of `J¹L`, stored by its coefficients `(α_1,…,α_n, g)` in the
/// frame `ε`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JetSection {
    chart: Chart,
    coeffs: Vec<RationalExpr>,
}

impl JetSection {
    pub fn new(alpha: &KForm, g: RationalExpr) -> Result<Self> {
        if alpha.degree() != 1 {
            return Err(Error::BadArity("jet one-form part must have degree 1".into()));
        }
        let chart = alpha.chart().clone();
        let mut coeffs: Vec<RationalExpr> = (0..chart.dim()).map(|i| alpha.component(&[i])).collect();
        coeffs.push(g);
        Ok(JetSection { chart, coeffs })
    }

    pub fn zero(chart: &Chart) -> Self {
        JetSection {
            chart: chart.clone(),
            coeffs: vec![RationalExpr::zero(); chart.dim() + 1],
        }
    }

    pub fn from_coeffs(chart: &Chart, coeffs: Vec<RationalExpr>) -> Self {
        assert_eq!(coeffs.len(), chart.dim() + 1, "jet needs n+1 coefficients");
        JetSection {
            chart: chart.clone(),
            coeffs,
        }
    }

    /// Frame element `ε_a`.
    pub fn frame_element(chart: &Chart, a: usize) -> Self {
        let mut j = Self::zero(chart);
        j.coeffs[a] = RationalExpr::one();
        j
    }

    pub fn frame(chart: &Chart) -> Vec<JetSection> {
        (0..=chart.dim()).map(|a| Self::frame_element(chart, a)).collect()
    }

    /// First jet prolongation `j¹λ = (dλ, λ)`.
    pub fn prolong(chart: &Chart, lambda: &RationalExpr) -> Self {
        let mut coeffs: Vec<RationalExpr> = (0..chart.dim()).map(|i| chart.partial(lambda, i)).collect();
        coeffs.push(lambda.clone());
        JetSection {
            chart: chart.clone(),
            coeffs,
        }
    }

    pub fn from_form(form: &AtiyahForm) -> Result<Self> {
        if form.degree() != 1 || form.kind() != ValueKind::Line {
            return Err(Error::BadArity("a jet is an L-valued Atiyah 1-form".into()));
        }
        JetSection::new(form.comp0(), form.comp1_or_panic().as_function())
    }

    pub fn to_form(&self) -> AtiyahForm {
        let n = self.chart.dim();
        AtiyahForm::raw(
            ValueKind::Line,
            KForm::one_form(&self.chart, self.coeffs[..n].to_vec()).expect("arity"),
            Some(KForm::function(&self.chart, self.coeffs[n].clone())),
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[RationalExpr] {
        &self.coeffs
    }

    /// The one-form part `α`.
    pub fn alpha(&self) -> Vec<RationalExpr> {
        self.coeffs[..self.chart.dim()].to_vec()
    }

    /// The function part `g`.
    pub fn g(&self) -> &RationalExpr {
        &self.coeffs[self.chart.dim()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `⟨ψ, Δ⟩ = α(X) + g f`.
    pub fn pair(&self, delta: &Derivation) -> RationalExpr {
        same_chart(&self.chart, delta.chart());
        dot(&self.coeffs, &delta.coeffs())
    }

    pub fn add(&self, other: &JetSection) -> JetSection {
        same_chart(&self.chart, &other.chart);
        JetSection {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &JetSection) -> JetSection {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> JetSection {
        self.scale(&-RationalExpr::one())
    }

    pub fn scale(&self, f: &RationalExpr) -> JetSection {
        JetSection {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    pub fn lie(&self, delta: &Derivation) -> JetSection {
        JetSection::from_form(&self.to_form().lie(delta)).expect("degree preserved")
    }

    pub fn contract(&self, delta: &Derivation) -> RationalExpr {
        self.pair(delta)
    }
}

impl fmt::Display for JetSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_form().fmt(f)
    }
}

pub(crate) fn dot(a: &[RationalExpr], b: &[RationalExpr]) -> RationalExpr {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// A section `(Δ, ψ)` of the omni-Lie algebroid `𝔻L = DL ⊕ J¹L`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OmniSection {
    pub der: Derivation,
    pub jet: JetSection,
}

impl OmniSection {
    pub fn new(der: Derivation, jet: JetSection) -> Self {
        same_chart(der.chart(), jet.chart());
        OmniSection { der, jet }
    }

    pub fn zero(chart: &Chart) -> Self {
        OmniSection::new(Derivation::zero(chart), JetSection::zero(chart))
    }

    pub fn from_der(der: Derivation) -> Self {
        let jet = JetSection::zero(der.chart());
        OmniSection { der, jet }
    }

    pub fn from_jet(jet: JetSection) -> Self {
        let der = Derivation::zero(jet.chart());
        OmniSection { der, jet }
    }

    /// The frame `(e_0,0),…,(e_n,0),(0,ε_0),…,(0,ε_n)`.
    pub fn frame(chart: &Chart) -> Vec<OmniSection> {
        Derivation::frame(chart)
            .into_iter()
            .map(OmniSection::from_der)
            .chain(JetSection::frame(chart).into_iter().map(OmniSection::from_jet))
            .collect()
    }

    pub fn from_coeffs(chart: &Chart, coeffs: &[RationalExpr]) -> Self {
        let n1 = chart.dim() + 1;
        OmniSection::new(
            Derivation::from_coeffs(chart, &coeffs[..n1]),
            JetSection::from_coeffs(chart, coeffs[n1..].to_vec()),
        )
    }

    pub fn coeffs(&self) -> Vec<RationalExpr> {
        let mut v = self.der.coeffs();
        v.extend_from_slice(self.jet.coeffs());
        v
    }

    pub fn chart(&self) -> &Chart {
        self.der.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.der.is_zero() && self.jet.is_zero()
    }

    pub fn add(&self, other: &OmniSection) -> OmniSection {
        OmniSection::new(self.der.add(&other.der), self.jet.add(&other.jet))
    }

    pub fn sub(&self, other: &OmniSection) -> OmniSection {
        OmniSection::new(self.der.sub(&other.der), self.jet.sub(&other.jet))
    }

    pub fn neg(&self) -> OmniSection {
        OmniSection::new(self.der.neg(), self.jet.neg())
    }

    pub fn scale(&self, f: &RationalExpr) -> OmniSection {
        OmniSection::new(self.der.scale(f), self.jet.scale(f))
    }

    /// `⟨⟨(Δ,φ),(∇,ψ)⟩⟩ = ψ(Δ) + φ(∇)`.
    pub fn pairing(&self, other: &OmniSection) -> RationalExpr {
        &other.jet.pair(&self.der) + &self.jet.pair(&other.der)
    }

    /// Dorfman–Jacobi bracket `([Δ,∇], ℒ_Δψ - i_∇ d_DL φ)`.
    pub fn dorfman(&self, other: &OmniSection) -> OmniSection {
        let dphi = self.jet.to_form().d();
        let contracted = dphi.contract(&other.der).expect("degree 2");
        let jet = other.jet.lie(&self.der).sub(&JetSection::from_form(&contracted).expect("degree 1"));
        OmniSection::new(self.der.bracket(&other.der), jet)
    }
}

impl fmt::Display for OmniSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", self.der, self.jet)
    }
}

macro_rules! frame_map {
    ($(#[$meta:meta])* $name:ident, $input:ty, $output:ty, $from:path) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Debug)]
        pub struct $name {
            chart: Chart,
            matrix: Matrix,
        }

        impl $name {
            pub fn from_matrix(chart: &Chart, matrix: Matrix) -> Result<Self> {
                let n1 = chart.dim() + 1;
                if matrix.rows() != n1 || matrix.cols() != n1 {
                    return Err(Error::BadArity(format!(
                        "{} needs an {n1}×{n1} matrix",
                        stringify!($name)
                    )));
                }
                Ok($name {
                    chart: chart.clone(),
                    matrix,
                })
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

            pub fn apply(&self, x: &$input) -> $output {
                same_chart(&self.chart, x.chart());
                let v = self.matrix.mul_vec(&x.coeffs());
                $from(&self.chart, v)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.matrix)
            }
        }
    };
}

fn der_from(chart: &Chart, v: Vec<RationalExpr>) -> Derivation {
    Derivation::from_coeffs(chart, &v)
}

frame_map!(
    /// A bundle endomorphism of `DL`, `φe_b = Σ_a M[a][b] e_a`. In blocks,
    /// `(X, f) ↦ (AX + f b, ξ(X) + c f)`.
    EndoDL,
    Derivation,
    Derivation,
    der_from
);
frame_map!(
    /// A bundle endomorphism of `J¹L` acting on frame coefficients.
    JetEndo,
    JetSection,
    JetSection,
    JetSection::from_coeffs
);
frame_map!(
    /// `ω♭: DL → J¹L`, `Δ ↦ i_Δ ω`.
    Flat,
    Derivation,
    JetSection,
    JetSection::from_coeffs
);
frame_map!(
    /// `J♯: J¹L → DL` with `⟨J♯φ, ψ⟩ = J(φ, ψ)`.
    Sharp,
    JetSection,
    Derivation,
    der_from
);

impl EndoDL {
    pub fn from_blocks(a: &TangentEndo, b: &VectorField, xi: &KForm, c: &RationalExpr) -> Result<Self> {
        let chart = a.chart();
        if b.chart() != chart || xi.chart() != chart {
            return Err(Error::ChartMismatch);
        }
        if xi.degree() != 1 {
            return Err(Error::BadArity("ξ must be a 1-form".into()));
        }
        let n = chart.dim();
        let m = Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => a.matrix().get(i, j).clone(),
            (true, false) => b.component(i).clone(),
            (false, true) => xi.component(&[j]),
            (false, false) => c.clone(),
        });
        Self::from_matrix(chart, m)
    }

    pub fn identity(chart: &Chart) -> Self {
        EndoDL {
            chart: chart.clone(),
            matrix: Matrix::identity(chart.dim() + 1),
        }
    }

    pub fn zero(chart: &Chart) -> Self {
        let n1 = chart.dim() + 1;
        EndoDL {
            chart: chart.clone(),
            matrix: Matrix::zeros(n1, n1),
        }
    }

    pub fn block_a(&self) -> TangentEndo {
        let n = self.chart.dim();
        TangentEndo::new(&self.chart, self.matrix.submatrix(0, 0, n, n)).expect("shape")
    }

    pub fn block_b(&self) -> VectorField {
        let n = self.chart.dim();
        VectorField::new(&self.chart, (0..n).map(|i| self.matrix.get(i, n).clone()).collect()).expect("shape")
    }

    pub fn block_xi(&self) -> KForm {
        let n = self.chart.dim();
        KForm::one_form(&self.chart, (0..n).map(|j| self.matrix.get(n, j).clone()).collect()).expect("shape")
    }

    pub fn block_c(&self) -> RationalExpr {
        let n = self.chart.dim();
        self.matrix.get(n, n).clone()
    }

    pub fn compose(&self, other: &EndoDL) -> EndoDL {
        same_chart(&self.chart, &other.chart);
        EndoDL {
            chart: self.chart.clone(),
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn add(&self, other: &EndoDL) -> EndoDL {
        same_chart(&self.chart, &other.chart);
        EndoDL {
            chart: self.chart.clone(),
            matrix: self.matrix.add(&other.matrix),
        }
    }

    pub fn scale(&self, f: &RationalExpr) -> EndoDL {
        EndoDL {
            chart: self.chart.clone(),
            matrix: self.matrix.scale(f),
        }
    }

    /// `φ†` with `⟨φ†ψ, Δ⟩ = ⟨ψ, φΔ⟩`.
    pub fn adjoint(&self) -> JetEndo {
        JetEndo {
            chart: self.chart.clone(),
            matrix: self.matrix.transpose(),
        }
    }
}

impl Residual for Derivation {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for JetSection {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for OmniSection {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Residual for AtiyahForm {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

/// A 2-form on `J¹L` encoded as `J((α,f),(β,g)) = Λ(α,β) + f β(E) - g α(E)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JacobiBivector {
    pub lambda: Polyvector,
    pub e: VectorField,
}

impl JacobiBivector {
    pub fn new(lambda: Polyvector, e: VectorField) -> Result<Self> {
        if lambda.degree() != 2 {
            return Err(Error::BadArity("Λ must be a bivector".into()));
        }
        if lambda.chart() != e.chart() {
            return Err(Error::ChartMismatch);
        }
        Ok(JacobiBivector { lambda, e })
    }

    pub fn zero(chart: &Chart) -> Self {
        JacobiBivector {
            lambda: Polyvector::zero(chart, 2),
            e: VectorField::zero(chart),
        }
    }

    pub fn chart(&self) -> &Chart {
        self.e.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.is_zero() && self.e.is_zero()
    }

    pub fn eval(&self, phi: &JetSection, psi: &JetSection) -> RationalExpr {
        let (a, b) = (phi.alpha(), psi.alpha());
        let lam = self.lambda.eval(&[a.clone(), b.clone()]);
        let e = self.e.components();
        &(&lam + &(phi.g() * &dot(&b, e))) - &(psi.g() * &dot(&a, e))
    }

    /// `P[a][b] = J(ε_b, ε_a)`.
    pub fn sharp(&self) -> Sharp {
        let chart = self.chart().clone();
        let frame = JetSection::frame(&chart);
        let n1 = frame.len();
        let m = Matrix::from_fn(n1, n1, |a, b| self.eval(&frame[b], &frame[a]));
        Sharp { chart, matrix: m }
    }

    /// Read back `(Λ, E)` from an antisymmetric sharp matrix.
    pub fn from_sharp(sharp: &Sharp) -> Result<Self> {
        let chart = sharp.chart();
        let n = chart.dim();
        let p = sharp.matrix();
        if !p.add(&p.transpose()).is_zero() {
            return Err(Error::BadArity("sharp matrix is not antisymmetric".into()));
        }
        let mut lam = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                lam.push((vec![i, j], p.get(j, i).clone()));
            }
        }
        let e = VectorField::new(chart, (0..n).map(|j| p.get(j, n).clone()).collect())?;
        JacobiBivector::new(Polyvector::from_components(chart, 2, lam)?, e)
    }
}

impl fmt::Display for JacobiBivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ = {}, E = {}", self.lambda, self.e)
    }
}

/// Transition between two trivializing charts: a map `F` from the source
/// chart into the target chart and the fiber factor `κ` on the overlap.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TransitionData {
    pub map: ChartMap,
    pub kappa: RationalExpr,
}

impl TransitionData {
    pub fn new(map: ChartMap, kappa: RationalExpr) -> Result<Self> {
        if kappa.is_zero() {
            return Err(Error::NonInvertibleCocycle);
        }
        let allowed = map.source().name_set();
        for v in kappa.numer().vars().iter().chain(kappa.denom().vars().iter()) {
            if !allowed.contains(&**v) {
                return Err(Error::UndeclaredCoordinate(v.to_string()));
            }
        }
        Ok(TransitionData { map, kappa })
    }
}

/// Residual of `target_form` pulled back along the transition against
/// `source_form`.
pub fn atlas_compat(
    source_form: &AtiyahForm,
    target_form: &AtiyahForm,
    t: &TransitionData,
) -> Result<ResidualReport> {
    if source_form.chart() != t.map.source() || target_form.chart() != t.map.target() {
        return Err(Error::ChartMismatch);
    }
    let pulled = target_form.pullback(&t.map, &t.kappa)?;
    let mut report = ResidualReport::new("atlas");
    let diff = pulled.sub(source_form);
    report.record(|| format!("transition {} -> {}", t.map.source(), t.map.target()), &diff);
    Ok(report)
}

/// Frame elements multiplied by `1, x_1, …, x_n`, with labels.
pub fn test_derivations(chart: &Chart) -> Vec<(String, Derivation)> {
    multiplied(chart, &Derivation::frame(chart), |d, f| d.scale(f), der_label)
}

pub fn test_jets(chart: &Chart) -> Vec<(String, JetSection)> {
    multiplied(chart, &JetSection::frame(chart), |j, f| j.scale(f), jet_label)
}

pub fn test_omni(chart: &Chart) -> Vec<(String, OmniSection)> {
    let n1 = chart.dim() + 1;
    multiplied(chart, &OmniSection::frame(chart), |s, f| s.scale(f), |c, a| {
        if a < n1 {
            der_label(c, a)
        } else {
            jet_label(c, a - n1)
        }
    })
}

fn der_label(chart: &Chart, a: usize) -> String {
    if a == chart.dim() {
        "𝟙".into()
    } else {
        format!("∂{}", chart.name(a))
    }
}

fn jet_label(chart: &Chart, a: usize) -> String {
    if a == chart.dim() {
        "ε".into()
    } else {
        format!("d{}", chart.name(a))
    }
}

fn multiplied<T>(
    chart: &Chart,
    frame: &[T],
    scale: impl Fn(&T, &RationalExpr) -> T,
    label: impl Fn(&Chart, usize) -> String,
) -> Vec<(String, T)> {
    let mut out = Vec::new();
    for (name, f) in chart.test_multipliers() {
        for (a, e) in frame.iter().enumerate() {
            let l = label(chart, a);
            if name == "1" {
                out.push((l, scale(e, &f)));
            } else {
                out.push((format!("{name}*{l}"), scale(e, &f)));
            }
        }
    }
    out
}
