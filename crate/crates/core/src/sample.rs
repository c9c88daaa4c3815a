//! Random generators for structures on small charts, used by the
//! randomized identity tests.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::atiyah::{AtiyahForm, Derivation, EndoDL, JacobiBivector, JetSection, OmniSection, ValueKind};
use crate::gcs::GacsTriple;
use crate::hitchin::{contact_to_atiyah, gcs_from_hitchin, invert_atiyah2, HitchinPair};
use crate::imgroupoid::{coboundary, GroupoidPresentation};
use crate::{Chart, ChartMap, KForm, Matrix, Monomial, Poly, Polyvector, RationalExpr, VectorField, Q};

/// A polynomial with at most `terms` terms of total degree `≤ max_deg` and
/// small integer coefficients.
pub fn poly<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32, terms: usize) -> RationalExpr {
    let mut p = Poly::<Q>::zero();
    for _ in 0..rng.gen_range(0..=terms) {
        let mut m = Monomial::one();
        let deg = rng.gen_range(0..=max_deg);
        for _ in 0..deg {
            let i = rng.gen_range(0..chart.dim());
            m = m.mul(&Monomial::var(&chart.names()[i], 1));
        }
        let c: i64 = *[-3, -2, -1, 1, 1, 2, 3].choose(rng).expect("nonempty");
        p = &p + &Poly::term(m, Q::from_integer(c.into()));
    }
    RationalExpr::from_poly(p)
}

/// A polynomial or, one time in four, a quotient by `1 + (polynomial)`.
pub fn rational<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> RationalExpr {
    let num = poly(rng, chart, max_deg, 3);
    if rng.gen_ratio(1, 4) {
        let den = &RationalExpr::from_i64(1) + &poly(rng, chart, 1, 2).pow(2).expect("power");
        num.checked_div(&den).unwrap_or(num)
    } else {
        num
    }
}

pub fn vector_field<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> VectorField {
    let comps = (0..chart.dim()).map(|_| poly(rng, chart, max_deg, 2)).collect();
    VectorField::new(chart, comps).expect("arity")
}

pub fn kform<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, degree: usize, max_deg: u32) -> KForm {
    let mut comps = Vec::new();
    for idx in index_tuples(chart.dim(), degree) {
        comps.push((idx, poly(rng, chart, max_deg, 2)));
    }
    KForm::from_components(chart, degree, comps).expect("valid indices")
}

pub fn polyvector<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, degree: usize, max_deg: u32) -> Polyvector {
    let mut comps = Vec::new();
    for idx in index_tuples(chart.dim(), degree) {
        comps.push((idx, poly(rng, chart, max_deg, 2)));
    }
    Polyvector::from_components(chart, degree, comps).expect("valid indices")
}

/// Strictly increasing index tuples of length `k` in `0..n`.
pub fn index_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

pub fn derivation<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> Derivation {
    Derivation::new(vector_field(rng, chart, max_deg), poly(rng, chart, max_deg, 2))
}

pub fn jet<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> JetSection {
    JetSection::from_coeffs(chart, (0..=chart.dim()).map(|_| poly(rng, chart, max_deg, 2)).collect())
}

pub fn omni<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> OmniSection {
    OmniSection::new(derivation(rng, chart, max_deg), jet(rng, chart, max_deg))
}

pub fn atiyah_form<R: Rng + ?Sized>(
    rng: &mut R,
    chart: &Chart,
    degree: usize,
    kind: ValueKind,
    max_deg: u32,
) -> AtiyahForm {
    let c1 = (degree > 0).then(|| kform(rng, chart, degree - 1, max_deg));
    AtiyahForm::new(kind, kform(rng, chart, degree, max_deg), c1).expect("degrees match")
}

/// A random polynomial map between charts.
pub fn chart_map<R: Rng + ?Sized>(rng: &mut R, source: &Chart, target: &Chart, max_deg: u32) -> ChartMap {
    let comps = (0..target.dim()).map(|_| poly(rng, source, max_deg, 3)).collect();
    ChartMap::new(source.clone(), target.clone(), comps).expect("variables of the source")
}

/// A triangular polynomial automorphism `x_i ↦ x_i + c_i + p_i(x_0..x_{i-1})`.
pub fn triangular_automorphism<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> ChartMap {
    let comps = (0..chart.dim())
        .map(|i| {
            let mut p = &chart.coord(i) + &RationalExpr::from_i64(rng.gen_range(-2..=2));
            if i > 0 {
                let lower = Chart::new(&chart.names()[..i]).expect("prefix of a chart");
                p = &p + &poly(rng, &lower, 2, 2);
            }
            p
        })
        .collect();
    ChartMap::new(chart.clone(), chart.clone(), comps).expect("same chart")
}

/// The standard contact form on a chart of odd dimension `2k+1`:
/// `dz - Σ y_i dx_i` with the last coordinate as `z`.
pub fn standard_contact_form(chart: &Chart) -> KForm {
    let n = chart.dim();
    assert!(n % 2 == 1, "contact charts have odd dimension");
    let k = n / 2;
    let mut comps = vec![(vec![n - 1], RationalExpr::from_i64(1))];
    for i in 0..k {
        comps.push((vec![i], -chart.coord(k + i)));
    }
    KForm::from_components(chart, 1, comps).expect("valid")
}

/// A contact Atiyah 2-form: the standard one moved by a random triangular
/// automorphism and a random change of trivialization `κ`.
pub fn contact_atiyah<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> AtiyahForm {
    let omega = contact_to_atiyah(&standard_contact_form(chart)).expect("1-form").omega;
    let f = triangular_automorphism(rng, chart);
    // a constant κ and a unimodular map keep Ω⁻¹ polynomial
    let kappa = RationalExpr::from_i64(*[1, -1, 2, -3].choose(rng).expect("nonempty"));
    omega.pullback(&f, &kappa).expect("nonzero κ")
}

/// A contact-Hitchin pair `(Ω, Φ)` with `Φ = (Ω♭)⁻¹ (d_DL β)♭ + c·id`,
/// which satisfies both conditions because `Ω_Φ = d_DL β + cΩ`.
pub fn hitchin_pair<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> HitchinPair {
    let omega = contact_atiyah(rng, chart);
    let beta = atiyah_form(rng, chart, 1, ValueKind::Line, 1);
    let b = beta.d().flat().expect("degree 2").matrix().clone();
    let w_inv = omega.flat().expect("degree 2").matrix().inverse().expect("contact");
    let c = RationalExpr::from_i64(rng.gen_range(-1..=1));
    let phi = w_inv.mul(&b).add(&Matrix::identity(chart.dim() + 1).scale(&c));
    HitchinPair::new(omega, EndoDL::from_matrix(chart, phi).expect("shape")).expect("same chart")
}

/// An integrable triple with nondegenerate `J`.
pub fn hitchin_triple<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> GacsTriple {
    gcs_from_hitchin(&hitchin_pair(rng, chart)).expect("valid pair")
}

/// `(φ, 0, 0)` with `φ` conjugate to a constant complex structure; needs an
/// even-rank `DL`, i.e. odd `n`.
pub fn complex_triple<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> GacsTriple {
    let n1 = chart.dim() + 1;
    assert!(n1 % 2 == 0, "DL must have even rank");
    let j0 = Matrix::from_fn(n1, n1, |i, j| {
        if i % 2 == 1 && j == i - 1 {
            RationalExpr::from_i64(1)
        } else if i % 2 == 0 && j == i + 1 {
            RationalExpr::from_i64(-1)
        } else {
            RationalExpr::zero()
        }
    });
    let s = unipotent(rng, chart, max_deg);
    let phi = s.mul(&j0).mul(&s.inverse().expect("unipotent"));
    GacsTriple::new(
        EndoDL::from_matrix(chart, phi).expect("shape"),
        JacobiBivector::zero(chart),
        AtiyahForm::zero(chart, 2, ValueKind::Line),
    )
    .expect("same chart")
}

/// A random unit lower-triangular matrix, possibly permuted; always
/// invertible over the rational-function field.
pub fn unipotent<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, max_deg: u32) -> Matrix {
    let n1 = chart.dim() + 1;
    let l = Matrix::from_fn(n1, n1, |i, j| {
        if i == j {
            RationalExpr::from_i64(1)
        } else if j < i && rng.gen_bool(0.5) {
            poly(rng, chart, max_deg, 2)
        } else {
            RationalExpr::zero()
        }
    });
    let mut perm: Vec<usize> = (0..n1).collect();
    perm.shuffle(rng);
    let p = Matrix::from_fn(n1, n1, |i, j| {
        if perm[i] == j {
            RationalExpr::from_i64(1)
        } else {
            RationalExpr::zero()
        }
    });
    p.mul(&l)
}

/// `e^B`-transform of a triple by an `L`-valued 2-form `B`; integrability is
/// preserved exactly when `B` is closed.
pub fn b_transform(t: &GacsTriple, b: &AtiyahForm) -> GacsTriple {
    let bm = b.flat().expect("degree 2").matrix().clone();
    let p = t.j.sharp().matrix().clone();
    let phi = t.phi.matrix();
    let w = t.omega.flat().expect("degree 2").matrix().clone();
    let phi2 = phi.sub(&p.mul(&bm));
    let w2 = w
        .add(&bm.mul(phi))
        .add(&phi.transpose().mul(&bm))
        .sub(&bm.mul(&p).mul(&bm));
    let chart = t.chart();
    GacsTriple::new(
        EndoDL::from_matrix(chart, phi2).expect("shape"),
        t.j.clone(),
        AtiyahForm::from_flat(chart, &w2).expect("shape"),
    )
    .expect("same chart")
}

/// Conjugation by `(F, F†⁻¹)` for an invertible `F`; keeps the algebraic
/// relations but not integrability in general.
pub fn gauge_transform(t: &GacsTriple, f: &Matrix) -> GacsTriple {
    let fi = f.inverse().expect("invertible");
    let chart = t.chart();
    let phi = f.mul(t.phi.matrix()).mul(&fi);
    let p = f.mul(t.j.sharp().matrix()).mul(&f.transpose());
    let w = fi
        .transpose()
        .mul(t.omega.flat().expect("degree 2").matrix())
        .mul(&fi);
    let sharp = crate::atiyah::Sharp::from_matrix(chart, p).expect("shape");
    GacsTriple::new(
        EndoDL::from_matrix(chart, phi).expect("shape"),
        JacobiBivector::from_sharp(&sharp).expect("antisymmetric"),
        AtiyahForm::from_flat(chart, &w).expect("shape"),
    )
    .expect("same chart")
}

/// A random almost structure drawn from a mixture of constructions, some
/// integrable and some not.
pub fn almost_triple<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> GacsTriple {
    let base = if chart.dim() % 2 == 1 && rng.gen_bool(0.5) {
        if rng.gen_bool(0.5) {
            hitchin_triple(rng, chart)
        } else {
            complex_triple(rng, chart, 1)
        }
    } else {
        hitchin_triple(rng, chart)
    };
    match rng.gen_range(0..4) {
        0 => base,
        1 => {
            let b = atiyah_form(rng, chart, 1, ValueKind::Line, 1).d();
            b_transform(&base, &b)
        }
        2 => {
            let b = atiyah_form(rng, chart, 2, ValueKind::Line, 1);
            b_transform(&base, &b)
        }
        _ => {
            let f = unipotent(rng, chart, 1);
            gauge_transform(&base, &f)
        }
    }
}

/// Random `(Λ, E)`; roughly half are Jacobi by construction (inverses of
/// random contact forms, or constant Poisson bivectors with `E = 0`).
pub fn jacobi_pair<R: Rng + ?Sized>(rng: &mut R, chart: &Chart) -> JacobiBivector {
    match rng.gen_range(0..4) {
        0 if chart.dim() % 2 == 1 => invert_atiyah2(&contact_atiyah(rng, chart)).expect("contact"),
        1 => {
            let lam = polyvector(rng, chart, 2, 0);
            JacobiBivector::new(lam, VectorField::zero(chart)).expect("bivector")
        }
        _ => JacobiBivector::new(polyvector(rng, chart, 2, 1), vector_field(rng, chart, 1)).expect("bivector"),
    }
}

/// `t*η - s*η` for a random `L`-valued `η` on the base.
pub fn multiplicative_coboundary<R: Rng + ?Sized>(
    rng: &mut R,
    g: &GroupoidPresentation,
    degree: usize,
    max_deg: u32,
) -> AtiyahForm {
    let eta = atiyah_form(rng, &g.base, degree, ValueKind::Line, max_deg);
    coboundary(g, &eta).expect("cocycle is invertible")
}

/// `Σ a_i t*η_i + σ*(da_i) ∧ t*ζ_i` on a bundle of groups with fiber
/// coordinates `a_i`; linear in the fiber, hence multiplicative.
pub fn additive_form<R: Rng + ?Sized>(
    rng: &mut R,
    g: &GroupoidPresentation,
    degree: usize,
    max_deg: u32,
) -> AtiyahForm {
    let one = RationalExpr::from_i64(1);
    let n = g.base.dim();
    let mut out = AtiyahForm::zero(&g.arrows, degree, ValueKind::Line);
    for i in 0..g.arrows.dim() - n {
        let a = g.arrows.coord(n + i);
        let eta = atiyah_form(rng, &g.base, degree, ValueKind::Line, max_deg);
        out = out.add(&eta.pullback(&g.t, &one).expect("pullback").scale(&a));
        if degree > 0 {
            let zeta = atiyah_form(rng, &g.base, degree - 1, ValueKind::Line, max_deg);
            let da = AtiyahForm::sigma_star(&KForm::dx(&g.arrows, n + i), ValueKind::Real);
            let term = da.wedge(&zeta.pullback(&g.t, &one).expect("pullback")).expect("real ∧ L-valued");
            out = out.add(&term);
        }
    }
    out
}
