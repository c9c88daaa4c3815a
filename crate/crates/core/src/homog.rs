//! Homogenization: generalized complex data `(a, π, σ)` on `M̃ = M × ℝ^×`
//! with fiber coordinate `r` and Euler field `ℰ = r∂r`.
//!
//! A derivation `(X, f)` corresponds to the degree-0 field `X + f r∂r` and a
//! jet `(α, g)` to the degree-1 form `rα + g dr`. Under this dictionary
//!
//! ```text
//! a(X) = AX + ξ(X) r∂r      a(∂r) = b/r + c ∂r
//! π = Λ/r + ∂r∧E            σ = r ω₀ + dr∧ω₁
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::atiyah::{AtiyahForm, EndoDL, JacobiBivector, ValueKind};
use crate::error::{Error, Result};
use crate::gcs::GacsTriple;
use crate::report::{protocol_pairs, run_cases, CheckSet, Residual, ResidualReport};
use crate::{Chart, KForm, Matrix, Polyvector, RationalExpr, TangentEndo, VectorField};

/// Generalized complex data on `M̃`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GcTriple {
    base: Chart,
    chart: Chart,
    pub a: TangentEndo,
    pub pi: Polyvector,
    pub sigma: KForm,
}

impl GcTriple {
    /// `chart` must be `base` with one extra coordinate appended (the fiber
    /// coordinate).
    pub fn new(base: &Chart, a: TangentEndo, pi: Polyvector, sigma: KForm) -> Result<Self> {
        let chart = a.chart().clone();
        if pi.chart() != &chart || sigma.chart() != &chart {
            return Err(Error::ChartMismatch);
        }
        if chart.dim() != base.dim() + 1 || chart.names()[..base.dim()] != *base.names() {
            return Err(Error::InvalidChart(format!("{chart} does not extend {base} by one coordinate")));
        }
        if pi.degree() != 2 || sigma.degree() != 2 {
            return Err(Error::BadArity("π and σ must have degree 2".into()));
        }
        Ok(GcTriple {
            base: base.clone(),
            chart,
            a,
            pi,
            sigma,
        })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn fiber_name(&self) -> &str {
        self.chart.name(self.base.dim())
    }

    /// `ℰ = r∂r`.
    pub fn euler(&self) -> VectorField {
        let n = self.base.dim();
        VectorField::coordinate(&self.chart, n).scale(&self.chart.coord(n))
    }
}

impl fmt::Display for GcTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a = {}\nπ = {}\nσ = {}", self.a, self.pi, self.sigma)
    }
}

/// The chart of `M̃`: `chart` plus a fresh fiber coordinate (`r` if free).
pub fn total_chart(chart: &Chart) -> Chart {
    let r = chart.fresh_name("r");
    chart.extended(&[r]).expect("fresh name")
}

pub fn homogenize(t: &GacsTriple) -> GcTriple {
    let base = t.chart();
    let chart = total_chart(base);
    let n = base.dim();
    let r = chart.coord(n);
    let rinv = r.inv().expect("r is nonzero");
    let m = t.phi.matrix();
    let a = Matrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => m.get(i, j).clone(),
        (true, false) => m.get(i, n) * &rinv,
        (false, true) => m.get(n, j) * &r,
        (false, false) => m.get(n, n).clone(),
    });
    let a = TangentEndo::new(&chart, a).expect("shape");

    let mut pi = Vec::new();
    for (idx, v) in t.j.lambda.components() {
        pi.push((idx.clone(), v * &rinv));
    }
    for (j, v) in t.j.e.components().iter().enumerate() {
        pi.push((vec![n, j], v.clone()));
    }
    let pi = Polyvector::from_components(&chart, 2, pi).expect("valid");

    let mut sigma = Vec::new();
    for (idx, v) in t.omega.comp0().components() {
        sigma.push((idx.clone(), v * &r));
    }
    let w1 = t.omega.comp1_or_panic();
    for j in 0..n {
        sigma.push((vec![n, j], w1.component(&[j])));
    }
    let sigma = KForm::from_components(&chart, 2, sigma).expect("valid");
    GcTriple {
        base: base.clone(),
        chart,
        a,
        pi,
        sigma,
    }
}

/// `ℒ_ℰ a`, `ℒ_ℰ π + π`, `ℒ_ℰ σ - σ`.
pub fn check_homogeneity(g: &GcTriple) -> ResidualReport {
    let e = g.euler();
    let mut r = ResidualReport::new("homogeneity");
    r.record(|| "ℒ_ℰ a".into(), g.a.lie(&e).matrix());
    r.record(|| "ℒ_ℰ π + π".into(), &g.pi.lie(&e).add(&g.pi));
    r.record(|| "ℒ_ℰ σ - σ".into(), &g.sigma.lie(&e).sub(&g.sigma));
    r
}

/// Read the blocks back at `r = 1`.
pub fn dehomogenize(g: &GcTriple) -> Result<GacsTriple> {
    if !check_homogeneity(g).passed() {
        return Err(Error::NotHomogeneous);
    }
    let base = &g.base;
    let n = base.dim();
    let r = g.chart.coord(n);
    let mut at_one = BTreeMap::new();
    at_one.insert(g.chart.names()[n].clone(), RationalExpr::from_i64(1));
    let eval = |v: &RationalExpr| v.substitute(&at_one);

    let am = g.a.matrix();
    let mut m = Matrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            let v = match (i < n, j < n) {
                (true, false) => am.get(i, j) * &r,
                (false, true) => am.get(i, j) * &r.inv().expect("r is nonzero"),
                _ => am.get(i, j).clone(),
            };
            m.set(i, j, eval(&v)?);
        }
    }
    let phi = EndoDL::from_matrix(base, m)?;

    let mut lam = Vec::new();
    let mut e = vec![RationalExpr::zero(); n];
    for (idx, v) in g.pi.components() {
        if idx[1] == n {
            e[idx[0]] = -eval(v)?;
        } else {
            lam.push((idx.clone(), eval(&(v * &r))?));
        }
    }
    let j = JacobiBivector::new(Polyvector::from_components(base, 2, lam)?, VectorField::new(base, e)?)?;

    let mut w0 = Vec::new();
    let mut w1 = vec![RationalExpr::zero(); n];
    for (idx, v) in g.sigma.components() {
        if idx[1] == n {
            w1[idx[0]] = -eval(v)?;
        } else {
            w0.push((idx.clone(), eval(&(v * &r.inv().expect("r is nonzero")))?));
        }
    }
    let omega = AtiyahForm::new(
        ValueKind::Line,
        KForm::from_components(base, 2, w0)?,
        Some(KForm::one_form(base, w1)?),
    )?;
    GacsTriple::new(phi, j, omega)
}

/// A section `X + η` of `TM̃ ⊕ T*M̃`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenSection {
    pub vector: VectorField,
    pub form: KForm,
}

impl GenSection {
    pub fn new(vector: VectorField, form: KForm) -> Self {
        assert_eq!(vector.chart(), form.chart(), "objects on different charts");
        assert_eq!(form.degree(), 1, "form part must be a 1-form");
        GenSection { vector, form }
    }

    pub fn from_coeffs(chart: &Chart, c: &[RationalExpr]) -> Self {
        let n = chart.dim();
        GenSection::new(
            VectorField::new(chart, c[..n].to_vec()).expect("arity"),
            KForm::one_form(chart, c[n..].to_vec()).expect("arity"),
        )
    }

    pub fn coeffs(&self) -> Vec<RationalExpr> {
        let n = self.vector.chart().dim();
        let mut v = self.vector.components().to_vec();
        v.extend((0..n).map(|i| self.form.component(&[i])));
        v
    }

    pub fn frame(chart: &Chart) -> Vec<GenSection> {
        let n = chart.dim();
        (0..2 * n)
            .map(|a| {
                let mut c = vec![RationalExpr::zero(); 2 * n];
                c[a] = RationalExpr::from_i64(1);
                GenSection::from_coeffs(chart, &c)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.vector.is_zero() && self.form.is_zero()
    }

    pub fn add(&self, o: &GenSection) -> GenSection {
        GenSection::new(self.vector.add(&o.vector), self.form.add(&o.form))
    }

    pub fn sub(&self, o: &GenSection) -> GenSection {
        GenSection::new(self.vector.sub(&o.vector), self.form.sub(&o.form))
    }

    pub fn scale(&self, f: &RationalExpr) -> GenSection {
        GenSection::new(self.vector.scale(f), self.form.scale(f))
    }
}

impl fmt::Display for GenSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}", self.vector, self.form)
    }
}

impl Residual for GenSection {
    fn vanishes(&self) -> bool {
        self.is_zero()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

/// `[[X+ξ, Y+η]] = [X,Y] + ℒ_X η - i_Y dξ`.
pub fn classical_dorfman(u: &GenSection, v: &GenSection) -> GenSection {
    let dxi = u.form.d();
    GenSection::new(
        u.vector.bracket(&v.vector),
        v.form.lie(&u.vector).sub(&dxi.contract(&v.vector).expect("degree 2")),
    )
}

/// `𝒥 = [[a, π♯], [σ♭, -a*]]` on the frame `(∂_0,…, dx_0,…)`, with
/// `σ♭X = i_X σ` and `β(π♯α) = π(α, β)`.
pub fn gc_operator(g: &GcTriple) -> Matrix {
    let n = g.chart.dim();
    let pi = Matrix::from_fn(n, n, |a, b| g.pi.component(&[b, a]));
    let s = Matrix::from_fn(n, n, |a, b| g.sigma.component(&[b, a]));
    let a = g.a.matrix();
    Matrix::blocks(a, &pi, &s, &a.transpose().neg())
}

/// `𝒥² = -id`, skew-symmetry, and the Nijenhuis torsion of `𝒥` with the
/// classical Dorfman bracket on frames and coordinate multiples.
pub fn check_gc(g: &GcTriple) -> CheckSet {
    let n = g.chart.dim();
    let jm = gc_operator(g);
    let mut set = CheckSet::default();

    let mut alg = ResidualReport::new("gc.algebraic");
    alg.record(|| "𝒥² + id".into(), &jm.mul(&jm).add(&Matrix::identity(2 * n)));
    let gram = Matrix::from_fn(2 * n, 2 * n, |i, j| {
        if i + n == j || j + n == i {
            RationalExpr::from_i64(1)
        } else {
            RationalExpr::zero()
        }
    });
    alg.record(|| "𝒥† + 𝒥".into(), &gram.mul(&jm.transpose()).mul(&gram).add(&jm));
    set.push(alg);

    let apply = |s: &GenSection| GenSection::from_coeffs(&g.chart, &jm.mul_vec(&s.coeffs()));
    let frame = GenSection::frame(&g.chart);
    let mut sections: Vec<(String, GenSection)> = Vec::new();
    for (name, f) in g.chart.test_multipliers() {
        for (k, s) in frame.iter().enumerate() {
            let l = if k < n {
                format!("∂{}", g.chart.name(k))
            } else {
                format!("d{}", g.chart.name(k - n))
            };
            let l = if name == "1" { l } else { format!("{name}*{l}") };
            sections.push((l, s.scale(&f)));
        }
    }
    let pairs = protocol_pairs(sections.len(), 2 * n);
    let mut tor = ResidualReport::new("gc.integrable");
    run_cases(
        &mut tor,
        &pairs,
        |&(a, b)| format!("N_𝒥({}, {})", sections[a].0, sections[b].0),
        |&(a, b)| {
            let (u, v) = (&sections[a].1, &sections[b].1);
            let (ju, jv) = (apply(u), apply(v));
            classical_dorfman(&ju, &jv)
                .sub(&classical_dorfman(u, v))
                .sub(&apply(&classical_dorfman(&ju, v)))
                .sub(&apply(&classical_dorfman(u, &jv)))
        },
    );
    set.push(tor);
    set
}

/// Symplectization identities for `φ = 0` triples with structure form `θ`:
/// `σ = -d(rθ)`, and `π` inverse to `σ`. With `σ♭X = i_X σ` the latter
/// reads `π♯σ♭ = -id`; it is `π♯ = (σ♭)⁻¹` for `σ♭X = σ(-, X)`.
pub fn check_symplectization(g: &GcTriple, theta: &KForm) -> ResidualReport {
    let n = g.base.dim();
    let r = g.chart.coord(n);
    let lifted: Vec<(Vec<usize>, RationalExpr)> =
        theta.components().iter().map(|(k, v)| (k.clone(), v * &r)).collect();
    let r_theta = KForm::from_components(&g.chart, 1, lifted).expect("valid");
    let mut rep = ResidualReport::new("symplectization");
    rep.record(|| "σ + d(rθ)".into(), &g.sigma.add(&r_theta.d()));
    let m = g.chart.dim();
    let pi = Matrix::from_fn(m, m, |a, b| g.pi.component(&[b, a]));
    let s = Matrix::from_fn(m, m, |a, b| g.sigma.component(&[b, a]));
    rep.record(|| "π♯σ♭ + id".into(), &pi.mul(&s).add(&Matrix::identity(m)));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitchin::{contact_to_atiyah, gcs_from_hitchin, HitchinPair};
    use crate::parse_expr;

    fn e(s: &str) -> RationalExpr {
        parse_expr(s).unwrap()
    }

    fn complex_r1() -> GacsTriple {
        let c = Chart::new(&["x"]).unwrap();
        let m = Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (1, 0) => e("1"),
            (0, 1) => e("-1"),
            _ => e("0"),
        });
        GacsTriple::new(
            EndoDL::from_matrix(&c, m).unwrap(),
            JacobiBivector::zero(&c),
            AtiyahForm::zero(&c, 2, ValueKind::Line),
        )
        .unwrap()
    }

    #[test]
    fn complex_r1_homogenizes() {
        let t = complex_r1();
        let g = homogenize(&t);
        assert_eq!(g.a.matrix(), &Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (1, 0) => e("r"),
            (0, 1) => e("-1/r"),
            _ => e("0"),
        }));
        assert!(check_homogeneity(&g).passed());
        let set = check_gc(&g);
        for r in &set.reports {
            assert!(r.passed(), "{r}");
        }
        assert_eq!(dehomogenize(&g).unwrap(), t);
    }

    #[test]
    fn contact_symplectization() {
        for names in [vec!["t"], vec!["x", "y", "z"]] {
            let c = Chart::new(&names).unwrap();
            let theta = crate::sample::standard_contact_form(&c);
            let omega = contact_to_atiyah(&theta).unwrap().omega;
            let t = gcs_from_hitchin(&HitchinPair::new(omega, EndoDL::zero(&c)).unwrap()).unwrap();
            let g = homogenize(&t);
            assert!(check_homogeneity(&g).passed(), "{}\n{}", check_homogeneity(&g), g);
            assert!(check_symplectization(&g, &theta).passed(), "{}", check_symplectization(&g, &theta));
            for r in &check_gc(&g).reports {
                assert!(r.passed(), "{r}");
            }
            assert_eq!(dehomogenize(&g).unwrap(), t);
        }
    }

    #[test]
    fn homogeneity_examples() {
        let base = Chart::new(&["t"]).unwrap();
        let c = total_chart(&base);
        let g = GcTriple::new(
            &base,
            TangentEndo::zero(&c),
            Polyvector::zero(&c, 2),
            KForm::from_components(&c, 2, [(vec![1, 0], e("1"))]).unwrap(),
        )
        .unwrap();
        assert!(check_homogeneity(&g).passed());
        let xy = Chart::new(&["x"]).unwrap();
        let c2 = total_chart(&xy);
        let g = GcTriple::new(
            &xy,
            TangentEndo::zero(&c2),
            Polyvector::from_components(&c2, 2, [(vec![0, 1], e("r"))]).unwrap(),
            KForm::zero(&c2, 2),
        )
        .unwrap();
        let rep = check_homogeneity(&g);
        assert_eq!(rep.nonzero.len(), 1);
        assert_eq!(dehomogenize(&g), Err(Error::NotHomogeneous));
    }
}
