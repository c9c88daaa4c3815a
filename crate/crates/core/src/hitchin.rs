//! Contact forms as Atiyah 2-forms, inversion of nondegenerate 2-forms and
//! the correspondence between contact-Hitchin pairs and generalized contact
//! structures with nondegenerate `J`.

use crate::atiyah::{AtiyahForm, EndoDL, JacobiBivector, Sharp, ValueKind};
use crate::error::{Error, Result};
use crate::gcs::{check_almost, GacsTriple};
use crate::report::{CheckSet, ResidualReport};
use crate::{KForm, Matrix};

/// `Ω = d_DL σ*θ = (dθ, θ)` together with its nondegeneracy flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContactAtiyah {
    pub omega: AtiyahForm,
    pub nondegenerate: bool,
}

pub fn contact_to_atiyah(theta: &KForm) -> Result<ContactAtiyah> {
    if theta.degree() != 1 {
        return Err(Error::BadArity("a structure form is a 1-form".into()));
    }
    let omega = AtiyahForm::sigma_star(theta, ValueKind::Line).d();
    let w = omega.flat()?.matrix().clone();
    let nondegenerate = w.rank() == w.rows();
    Ok(ContactAtiyah { omega, nondegenerate })
}

/// The `J` with `J♯ω♭ = id`.
pub fn invert_atiyah2(omega: &AtiyahForm) -> Result<JacobiBivector> {
    let w = omega.flat()?;
    let p = w.matrix().inverse()?;
    JacobiBivector::from_sharp(&Sharp::from_matrix(omega.chart(), p)?)
}

/// `ω_J = J⁻¹`, the `L`-valued 2-form with `J♯ω_J♭ = id`.
pub fn omega_of_jacobi(j: &JacobiBivector) -> Result<AtiyahForm> {
    let w = j.sharp().matrix().inverse()?;
    AtiyahForm::from_flat(j.chart(), &w)
}

/// Residuals of `J♯ω♭ - id` and `ω♭J♯ - id`.
pub fn inverse_residual(omega: &AtiyahForm, j: &JacobiBivector) -> Result<ResidualReport> {
    let w = omega.flat()?.matrix().clone();
    let p = j.sharp().matrix().clone();
    let id = Matrix::identity(w.rows());
    let mut r = ResidualReport::new("inverse");
    r.record(|| "J♯ω♭ - id".into(), &p.mul(&w).sub(&id));
    r.record(|| "ω♭J♯ - id".into(), &w.mul(&p).sub(&id));
    Ok(r)
}

/// A contact Atiyah 2-form `Ω` and an endomorphism `Φ` of `DL`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitchinPair {
    pub omega: AtiyahForm,
    pub phi: EndoDL,
}

impl HitchinPair {
    pub fn new(omega: AtiyahForm, phi: EndoDL) -> Result<Self> {
        if omega.chart() != phi.chart() {
            return Err(Error::ChartMismatch);
        }
        if omega.degree() != 2 || omega.kind() != ValueKind::Line {
            return Err(Error::BadArity("Ω must be an L-valued Atiyah 2-form".into()));
        }
        Ok(HitchinPair { omega, phi })
    }

    /// `Ω_Φ(Δ, ∇) = Ω(ΦΔ, ∇)`.
    pub fn omega_phi(&self) -> AtiyahForm {
        self.omega.compose_endo(&self.phi).expect("degree 2")
    }
}

/// Conditions `Ω♭Φ = Φ†Ω♭` and `d_DL Ω_Φ = 0`, plus `d_DL Ω = 0` and
/// nondegeneracy of `Ω`.
pub fn check_hitchin_pair(p: &HitchinPair) -> CheckSet {
    let w = p.omega.flat().expect("degree 2").matrix().clone();
    let phi = p.phi.matrix();
    let mut set = CheckSet::default();

    let mut sym = ResidualReport::new("hitchin.symmetric");
    sym.record(|| "Ω♭Φ - Φ†Ω♭".into(), &w.mul(phi).sub(&phi.transpose().mul(&w)));
    set.push(sym);

    let mut closed_phi = ResidualReport::new("hitchin.closed_phi");
    closed_phi.record(|| "d_DL Ω_Φ".into(), &p.omega_phi().d());
    set.push(closed_phi);

    let mut closed = ResidualReport::new("hitchin.closed");
    closed.record(|| "d_DL Ω".into(), &p.omega.d());
    set.push(closed);

    let mut nondeg = ResidualReport::new("hitchin.nondegenerate");
    let rank = w.rank();
    nondeg.require("rank Ω♭", rank == w.rows(), || format!("{rank} < {}", w.rows()));
    set.push(nondeg);
    set
}

/// `(φ, J, ω) = (Φ, Ω⁻¹, -(Ω + Φ*Ω))`.
pub fn gcs_from_hitchin(p: &HitchinPair) -> Result<GacsTriple> {
    if !check_hitchin_pair(p).passed() {
        return Err(Error::NotHitchin);
    }
    let j = invert_atiyah2(&p.omega)?;
    let omega = p.omega.add(&p.omega.pull_by_endo(&p.phi)?).neg();
    GacsTriple::new(p.phi.clone(), j, omega)
}

/// `(Ω, Φ) = (J⁻¹, φ)`.
pub fn hitchin_from_gcs(t: &GacsTriple) -> Result<HitchinPair> {
    let omega = omega_of_jacobi(&t.j)?;
    HitchinPair::new(omega, t.phi.clone())
}

/// Whether `t` is reproduced by the backward-then-forward round trip; the
/// triple must be almost for this to be meaningful.
pub fn round_trip_triple(t: &GacsTriple) -> Result<bool> {
    if !check_almost(t).passed() {
        return Err(Error::NotAlmost);
    }
    let p = hitchin_from_gcs(t)?;
    let omega = p.omega.add(&p.omega.pull_by_endo(&p.phi)?).neg();
    let j = invert_atiyah2(&p.omega)?;
    Ok(omega == t.omega && j == t.j && p.phi == t.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcs::{check_equations, check_integrable, check_jacobi, jacobi_bracket};
    use crate::{parse_expr, Chart, Polyvector, RationalExpr, VectorField};

    fn e(s: &str) -> RationalExpr {
        parse_expr(s).unwrap()
    }

    fn r3() -> Chart {
        Chart::new(&["x", "y", "z"]).unwrap()
    }

    fn standard_theta(c: &Chart) -> KForm {
        KForm::one_form(c, vec![e("-y"), e("0"), e("1")]).unwrap()
    }

    #[test]
    fn standard_contact_inverse() {
        let c = r3();
        let ca = contact_to_atiyah(&standard_theta(&c)).unwrap();
        assert!(ca.nondegenerate);
        let j = invert_atiyah2(&ca.omega).unwrap();
        let lam = Polyvector::from_components(&c, 2, [(vec![1, 0], e("1")), (vec![1, 2], e("y"))]).unwrap();
        assert_eq!(j.lambda, lam);
        assert_eq!(j.e, VectorField::coordinate(&c, 2).neg());
        assert_eq!(jacobi_bracket(&j, &e("x"), &e("y")), e("-1"));
        assert_eq!(jacobi_bracket(&j, &e("z"), &e("1")), e("1"));
        assert!(inverse_residual(&ca.omega, &j).unwrap().passed());
        let jr = check_jacobi(&j);
        assert!(jr.algebroid.passed(), "{}", jr.algebroid);
        assert!(jr.schouten.passed(), "{}", jr.schouten);
    }

    #[test]
    fn degenerate_and_r1() {
        let c = r3();
        let dz = KForm::dx(&c, 2);
        let ca = contact_to_atiyah(&dz).unwrap();
        assert!(!ca.nondegenerate);
        assert_eq!(invert_atiyah2(&ca.omega), Err(Error::Degenerate));
        let t = Chart::new(&["t"]).unwrap();
        let ca = contact_to_atiyah(&KForm::dx(&t, 0)).unwrap();
        assert!(ca.nondegenerate);
        let j = invert_atiyah2(&ca.omega).unwrap();
        assert!(j.lambda.is_zero());
        assert_eq!(j.e, VectorField::coordinate(&t, 0).neg());
    }

    #[test]
    fn contact_triple_is_integrable() {
        let c = r3();
        let omega = contact_to_atiyah(&standard_theta(&c)).unwrap().omega;
        let p = HitchinPair::new(omega.clone(), EndoDL::zero(&c)).unwrap();
        let t = gcs_from_hitchin(&p).unwrap();
        assert_eq!(t.omega, omega.neg());
        assert!(check_almost(&t).passed());
        let n = check_integrable(&t).unwrap();
        assert!(n.passed(), "{n}");
        let eqs = check_equations(&t).unwrap();
        for r in &eqs.reports {
            assert!(r.passed(), "{r}");
        }
        assert_eq!(hitchin_from_gcs(&t).unwrap(), p);
        assert!(round_trip_triple(&t).unwrap());
    }

    #[test]
    fn identity_endo_pair() {
        let c = r3();
        let omega = contact_to_atiyah(&standard_theta(&c)).unwrap().omega;
        let p = HitchinPair::new(omega.clone(), EndoDL::identity(&c)).unwrap();
        assert!(check_hitchin_pair(&p).passed());
        let x_id = EndoDL::from_matrix(&c, Matrix::from_fn(4, 4, |i, j| {
            if i == j && i < 3 { e("x") } else { e("0") }
        }))
        .unwrap();
        let bad = HitchinPair::new(omega, x_id).unwrap();
        assert!(!check_hitchin_pair(&bad).passed());
    }
}
