//! Generalized almost contact structures in block form.
//!
//! A triple `(φ, J, ω)` determines the endomorphism of `𝔻L`
//!
//! ```text
//! I(Δ, ψ) = (φΔ + J♯ψ, ω♭Δ - φ†ψ)
//! ```
//!
//! With `ω♭Δ = i_Δ ω` and `⟨J♯φ, ψ⟩ = J(φ, ψ)`, the relation
//! `φ² = -id - J♯ω♭` forces `J♯ω♭ = -id` when `φ = 0`, so the integrable
//! triple of a contact form `θ` is `(0, Ω⁻¹, -Ω)` with `Ω = d_DL(θ, 0)`.

use std::fmt;

use num_traits::Zero;

use crate::atiyah::{
    test_derivations, test_jets, test_omni, AtiyahForm, Derivation, EndoDL, JacobiBivector, JetSection,
    OmniSection, Sharp, ValueKind,
};
use crate::error::{Error, Result};
use crate::report::{protocol_pairs, run_cases, CheckSet, Residual, ResidualReport};
use crate::{Chart, Matrix, Polyvector, RationalExpr};

/// Block data `(φ, J, ω)` of a generalized almost contact structure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GacsTriple {
    pub phi: EndoDL,
    pub j: JacobiBivector,
    pub omega: AtiyahForm,
}

impl GacsTriple {
    pub fn new(phi: EndoDL, j: JacobiBivector, omega: AtiyahForm) -> Result<Self> {
        if phi.chart() != j.chart() || phi.chart() != omega.chart() {
            return Err(Error::ChartMismatch);
        }
        if omega.degree() != 2 || omega.kind() != ValueKind::Line {
            return Err(Error::BadArity("ω must be an L-valued Atiyah 2-form".into()));
        }
        Ok(GacsTriple { phi, j, omega })
    }

    pub fn chart(&self) -> &Chart {
        self.phi.chart()
    }

    fn flat_matrix(&self) -> Matrix {
        self.omega.flat().expect("degree 2").matrix().clone()
    }
}

impl fmt::Display for GacsTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ = {}\nJ: {}\nω = {}", self.phi, self.j, self.omega)
    }
}

/// The block operator `I` on `𝔻L`, as a `2(n+1)`-square matrix on the
/// frame `(e_0,…,e_n, ε_0,…,ε_n)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OmniEndo {
    chart: Chart,
    matrix: Matrix,
}

impl OmniEndo {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, s: &OmniSection) -> OmniSection {
        OmniSection::from_coeffs(&self.chart, &self.matrix.mul_vec(&s.coeffs()))
    }

    /// Adjoint with respect to `⟨⟨-,-⟩⟩`, whose Gram matrix swaps the two
    /// halves.
    pub fn adjoint(&self) -> OmniEndo {
        let g = gram(self.chart.dim() + 1);
        OmniEndo {
            chart: self.chart.clone(),
            matrix: g.mul(&self.matrix.transpose()).mul(&g),
        }
    }
}

fn gram(n1: usize) -> Matrix {
    Matrix::from_fn(2 * n1, 2 * n1, |i, j| {
        if (i + n1 == j) || (j + n1 == i) {
            RationalExpr::from_i64(1)
        } else {
            RationalExpr::zero()
        }
    })
}

/// `I = [[φ, J♯], [ω♭, -φ†]]`.
pub fn assemble_endo(t: &GacsTriple) -> OmniEndo {
    let phi = t.phi.matrix();
    let p = t.j.sharp().matrix().clone();
    let w = t.flat_matrix();
    OmniEndo {
        chart: t.chart().clone(),
        matrix: Matrix::blocks(phi, &p, &w, &phi.transpose().neg()),
    }
}

/// Both routes of the almost-structure check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostReport {
    /// The three block relations.
    pub relations: ResidualReport,
    /// `I² + id` and `I† + I`.
    pub operator: ResidualReport,
}

impl AlmostReport {
    pub fn passed(&self) -> bool {
        self.relations.passed() && self.operator.passed()
    }

    pub fn routes_agree(&self) -> bool {
        self.relations.passed() == self.operator.passed()
    }
}

/// Decide `φJ♯ = J♯φ†`, `φ² = -id - J♯ω♭`, `ω♭φ = φ†ω♭`, and separately
/// `I² = -id`, `I† = -I`.
pub fn check_almost(t: &GacsTriple) -> AlmostReport {
    let n1 = t.chart().dim() + 1;
    let phi = t.phi.matrix();
    let phit = phi.transpose();
    let p = t.j.sharp().matrix().clone();
    let w = t.flat_matrix();

    let mut relations = ResidualReport::new("almost.relations");
    relations.record(|| "φJ♯ - J♯φ†".into(), &phi.mul(&p).sub(&p.mul(&phit)));
    relations.record(
        || "φ² + id + J♯ω♭".into(),
        &phi.mul(phi).add(&Matrix::identity(n1)).add(&p.mul(&w)),
    );
    relations.record(|| "ω♭φ - φ†ω♭".into(), &w.mul(phi).sub(&phit.mul(&w)));

    let i = assemble_endo(t);
    let mut operator = ResidualReport::new("almost.operator");
    operator.record(
        || "I² + id".into(),
        &i.matrix.mul(&i.matrix).add(&Matrix::identity(2 * n1)),
    );
    operator.record(|| "I† + I".into(), &i.adjoint().matrix.add(&i.matrix));
    AlmostReport { relations, operator }
}

/// `N_I(a, b) = [[Ia, Ib]] - [[a, b]] - I[[Ia, b]] - I[[a, Ib]]`.
pub fn nijenhuis(i: &OmniEndo, a: &OmniSection, b: &OmniSection) -> OmniSection {
    let (ia, ib) = (i.apply(a), i.apply(b));
    ia.dorfman(&ib)
        .sub(&a.dorfman(b))
        .sub(&i.apply(&ia.dorfman(b)))
        .sub(&i.apply(&a.dorfman(&ib)))
}

/// Nijenhuis torsion on frame pairs and coordinate multiples; requires the
/// almost-structure relations.
pub fn check_integrable(t: &GacsTriple) -> Result<ResidualReport> {
    if !check_almost(t).passed() {
        return Err(Error::NotAlmost);
    }
    Ok(nijenhuis_report(t))
}

fn nijenhuis_report(t: &GacsTriple) -> ResidualReport {
    let i = assemble_endo(t);
    let sections = test_omni(t.chart());
    let base = 2 * (t.chart().dim() + 1);
    let pairs = protocol_pairs(sections.len(), base);
    let mut report = ResidualReport::new("integrable");
    run_cases(
        &mut report,
        &pairs,
        |&(a, b)| format!("N_I({}, {})", sections[a].0, sections[b].0),
        |&(a, b)| nijenhuis(&i, &sections[a].1, &sections[b].1),
    );
    report
}

/// `{λ, μ}_J = J(j¹λ, j¹μ)`.
pub fn jacobi_bracket(j: &JacobiBivector, lambda: &RationalExpr, mu: &RationalExpr) -> RationalExpr {
    let c = j.chart();
    j.eval(&JetSection::prolong(c, lambda), &JetSection::prolong(c, mu))
}

/// `[φ, ψ]_J = ℒ_{J♯φ}ψ - ℒ_{J♯ψ}φ - d_DL J(φ, ψ)`.
pub fn jet_bracket(j: &JacobiBivector, phi: &JetSection, psi: &JetSection) -> JetSection {
    jet_bracket_with(j, &j.sharp(), phi, psi)
}

fn jet_bracket_with(j: &JacobiBivector, sharp: &Sharp, phi: &JetSection, psi: &JetSection) -> JetSection {
    psi.lie(&sharp.apply(phi))
        .sub(&phi.lie(&sharp.apply(psi)))
        .sub(&JetSection::prolong(j.chart(), &j.eval(phi, psi)))
}

/// Two independent verdicts on whether `J` is a Jacobi structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiReport {
    /// Jacobiator of `[-,-]_J` and anchor compatibility of `σJ♯`.
    pub algebroid: ResidualReport,
    /// `[Λ,Λ] - 2E∧Λ` and `[E,Λ]`.
    pub schouten: ResidualReport,
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        self.algebroid.passed() && self.schouten.passed()
    }

    pub fn routes_agree(&self) -> bool {
        self.algebroid.passed() == self.schouten.passed()
    }
}

/// `[Λ,Λ] - 2E∧Λ`.
pub fn schouten_residual(j: &JacobiBivector) -> Polyvector {
    let e = j.e.to_polyvector();
    j.lambda
        .schouten(&j.lambda)
        .sub(&e.wedge(&j.lambda).scale(&RationalExpr::from_i64(2)))
}

pub fn check_jacobi(j: &JacobiBivector) -> JacobiReport {
    let chart = j.chart();
    let sharp = j.sharp();
    let jets = test_jets(chart);
    let n1 = chart.dim() + 1;
    let frame = JetSection::frame(chart);

    let mut algebroid = ResidualReport::new("jacobi.algebroid");
    // the Jacobiator is alternating, so the multiplied slot can be moved first
    let mut triples = Vec::new();
    for a in 0..jets.len() {
        for b in 0..n1 {
            for c in b + 1..n1 {
                triples.push((a, b, c));
            }
        }
    }
    let br = |x: &JetSection, y: &JetSection| jet_bracket_with(j, &sharp, x, y);
    run_cases(
        &mut algebroid,
        &triples,
        |&(a, b, c)| format!("Jac({}, {}, {})", jets[a].0, jets[b].0, jets[c].0),
        |&(a, b, c)| {
            let (x, y, z) = (&jets[a].1, &frame[b], &frame[c]);
            br(x, &br(y, z)).add(&br(y, &br(z, x))).add(&br(z, &br(x, y)))
        },
    );
    let pairs = protocol_pairs(jets.len(), n1);
    run_cases(
        &mut algebroid,
        &pairs,
        |&(a, b)| format!("anchor({}, {})", jets[a].0, jets[b].0),
        |&(a, b)| {
            let (x, y) = (&jets[a].1, &jets[b].1);
            sharp
                .apply(&br(x, y))
                .sub(&sharp.apply(x).bracket(&sharp.apply(y)))
        },
    );

    let mut schouten = ResidualReport::new("jacobi.schouten");
    schouten.record(|| "[Λ,Λ] - 2E∧Λ".into(), &schouten_residual(j));
    schouten.record(|| "[E,Λ]".into(), &j.e.to_polyvector().schouten(&j.lambda));
    JacobiReport { algebroid, schouten }
}

/// `N_φ(Δ,∇) = [φΔ,φ∇] + φ²[Δ,∇] - φ[φΔ,∇] - φ[Δ,φ∇]`.
pub fn nijenhuis_phi(phi: &EndoDL, a: &Derivation, b: &Derivation) -> Derivation {
    let (pa, pb) = (phi.apply(a), phi.apply(b));
    pa.bracket(&pb)
        .add(&phi.apply(&phi.apply(&a.bracket(b))))
        .sub(&phi.apply(&pa.bracket(b)))
        .sub(&phi.apply(&a.bracket(&pb)))
}

/// `ω_φ(Δ, ∇) = ω(φΔ, ∇)`.
pub fn omega_phi(t: &GacsTriple) -> Result<AtiyahForm> {
    t.omega.compose_endo(&t.phi)
}

fn eq3(t: &GacsTriple, sharp: &Sharp) -> ResidualReport {
    let jets = test_jets(t.chart());
    let pairs = protocol_pairs(jets.len(), t.chart().dim() + 1);
    let mut r = ResidualReport::new("eq3");
    run_cases(
        &mut r,
        &pairs,
        |&(a, b)| format!("({}, {})", jets[a].0, jets[b].0),
        |&(a, b)| {
            let (x, y) = (&jets[a].1, &jets[b].1);
            sharp
                .apply(&jet_bracket_with(&t.j, sharp, x, y))
                .sub(&sharp.apply(x).bracket(&sharp.apply(y)))
        },
    );
    r
}

fn eq4(t: &GacsTriple, sharp: &Sharp) -> ResidualReport {
    let jets = test_jets(t.chart());
    let pairs = protocol_pairs(jets.len(), t.chart().dim() + 1);
    let adj = t.phi.adjoint();
    let mut r = ResidualReport::new("eq4");
    run_cases(
        &mut r,
        &pairs,
        |&(a, b)| format!("({}, {})", jets[a].0, jets[b].0),
        |&(a, b)| {
            let (x, y) = (&jets[a].1, &jets[b].1);
            let lhs = adj.apply(&jet_bracket_with(&t.j, sharp, x, y));
            let rhs = adj
                .apply(y)
                .lie(&sharp.apply(x))
                .sub(&adj.apply(x).lie(&sharp.apply(y)))
                .sub(&JetSection::prolong(t.chart(), &t.j.eval(&adj.apply(x), y)));
            lhs.sub(&rhs)
        },
    );
    r
}

fn eq5(t: &GacsTriple, sharp: &Sharp) -> ResidualReport {
    let ders = test_derivations(t.chart());
    let pairs = protocol_pairs(ders.len(), t.chart().dim() + 1);
    let domega = t.omega.d();
    let mut r = ResidualReport::new("eq5");
    run_cases(
        &mut r,
        &pairs,
        |&(a, b)| format!("({}, {})", ders[a].0, ders[b].0),
        |&(a, b)| {
            let (x, y) = (&ders[a].1, &ders[b].1);
            let inner = domega
                .contract(x)
                .and_then(|f| f.contract(y))
                .expect("degree 3");
            let jet = JetSection::from_form(&inner).expect("degree 1");
            nijenhuis_phi(&t.phi, x, y).sub(&sharp.apply(&jet))
        },
    );
    r
}

fn eq6(t: &GacsTriple) -> ResidualReport {
    let mut r = ResidualReport::new("eq6");
    let Ok(wphi) = omega_phi(t) else {
        r.require("ω_φ", false, || "not a 2-form".into());
        return r;
    };
    let dwphi = wphi.d();
    let domega = t.omega.d();
    let ders = test_derivations(t.chart());
    let n1 = t.chart().dim() + 1;
    let mut triples = Vec::new();
    for a in 0..ders.len() {
        for b in 0..n1 {
            for c in b + 1..n1 {
                triples.push((a, b, c));
            }
        }
    }
    let phi = &t.phi;
    run_cases(
        &mut r,
        &triples,
        |&(a, b, c)| format!("({}, {}, {})", ders[a].0, ders[b].0, ders[c].0),
        |&(a, b, c)| {
            let (x, y, z) = (&ders[a].1, &ders[b].1, &ders[c].1);
            let lhs = dwphi.eval(&[x, y, z]);
            let rhs = &(&domega.eval(&[&phi.apply(x), y, z]) + &domega.eval(&[x, &phi.apply(y), z]))
                + &domega.eval(&[x, y, &phi.apply(z)]);
            &lhs - &rhs
        },
    );
    r
}

/// Residuals of the four integrability equations.
pub fn check_equations(t: &GacsTriple) -> Result<CheckSet> {
    if !check_almost(t).passed() {
        return Err(Error::NotAlmost);
    }
    let sharp = t.j.sharp();
    let mut set = CheckSet::default();
    set.push(eq3(t, &sharp));
    set.push(eq4(t, &sharp));
    set.push(eq5(t, &sharp));
    set.push(eq6(t));
    Ok(set)
}

/// `(N_I ≡ 0, equations (3)-(6) hold)`.
pub fn check_prop_equivalence(t: &GacsTriple) -> Result<(bool, bool)> {
    let eqs = check_equations(t)?;
    let n = nijenhuis_report(t);
    Ok((n.passed(), eqs.passed()))
}

/// The subset used on the infinitesimal side of contact-Hitchin groupoids:
/// the first two block relations and equations (3), (4), (5).
pub fn check_theorem47_subset(t: &GacsTriple) -> CheckSet {
    let almost = check_almost(t);
    let mut rel = ResidualReport::new("relations12");
    rel.checked = 2;
    rel.nonzero = almost
        .relations
        .nonzero
        .into_iter()
        .filter(|(l, _)| !l.starts_with("ω♭φ"))
        .collect();
    let sharp = t.j.sharp();
    let mut set = CheckSet::default();
    set.push(rel);
    set.push(eq3(t, &sharp));
    set.push(eq4(t, &sharp));
    set.push(eq5(t, &sharp));
    set
}

impl Residual for OmniEndo {
    fn vanishes(&self) -> bool {
        self.matrix.is_zero()
    }
    fn render(&self) -> String {
        self.matrix.to_string()
    }
}
