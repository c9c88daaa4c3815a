//! Lie groupoids and Lie algebroids presented on charts, with a
//! representation on the trivialized line bundle; multiplicative Atiyah
//! forms on the arrows and IM Atiyah forms on the algebroid.
//!
//! An arrow `g` sends the frame of `L` at `s(g)` to `Δ(g)` times the frame at
//! `t(g)`, where `Δ` is the representation cocycle. Pullbacks of
//! `t*L`-valued forms then carry the fiber factors
//!
//! ```text
//! m*, pr₁*, t*, u*:  κ = 1        i*pr₂*:  κ = 1/Δ(g₁)        s*:  κ = 1/Δ(g)
//! ```

use num_traits::{One, Zero};

use crate::atiyah::{AtiyahForm, Derivation, EndoDL, JacobiBivector, JetSection, ValueKind};
use crate::error::{Error, Result};
use crate::gcs::jet_bracket;
use crate::report::{protocol_pairs, run_cases, CheckSet, ResidualReport};
use crate::{Chart, ChartMap, KForm, Matrix, RationalExpr, VectorField};

/// A section of `A` by its coefficients on the frame `e_1, …, e_m`.
pub type AlgSection = Vec<RationalExpr>;

/// A Lie algebroid `A → M` with frame `e_1, …, e_m`, anchor `ρ(e_i)`,
/// structure functions `[e_i, e_j] = Σ_k c^k_{ij} e_k`, and a representation
/// on `L` given by `∇_{e_i} = (ρ(e_i), γ_i)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieAlgebroidPresentation {
    base: Chart,
    anchor: Vec<VectorField>,
    structure: Vec<Vec<Vec<RationalExpr>>>,
    connection: Vec<RationalExpr>,
}

impl LieAlgebroidPresentation {
    /// `anchor` is `m × n` with row `i` holding `ρ(e_i)`; `structure[i][j][k]
    /// = c^k_{ij}` must be antisymmetric in `i, j`.
    pub fn new(
        base: &Chart,
        anchor: &Matrix,
        structure: Vec<Vec<Vec<RationalExpr>>>,
        connection: Vec<RationalExpr>,
    ) -> Result<Self> {
        let m = anchor.rows();
        let bad = |msg: &str| Err(Error::InvalidAlgebroid(msg.into()));
        if m > 0 && anchor.cols() != base.dim() {
            return bad("anchor needs one column per coordinate");
        }
        if connection.len() != m {
            return bad("one connection coefficient per frame element");
        }
        if structure.len() != m || structure.iter().any(|r| r.len() != m || r.iter().any(|c| c.len() != m)) {
            return bad("structure functions must be m × m × m");
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if structure[i][j][k] != -&structure[j][i][k] {
                        return bad("structure functions must be antisymmetric in the lower indices");
                    }
                }
            }
        }
        let anchor = (0..m)
            .map(|i| VectorField::new(base, (0..base.dim()).map(|j| anchor.get(i, j).clone()).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LieAlgebroidPresentation {
            base: base.clone(),
            anchor,
            structure,
            connection,
        })
    }

    /// `TM` with its coordinate frame and the trivial representation.
    pub fn tangent(base: &Chart) -> Self {
        let n = base.dim();
        LieAlgebroidPresentation {
            base: base.clone(),
            anchor: (0..n).map(|i| VectorField::coordinate(base, i)).collect(),
            structure: vec![vec![vec![RationalExpr::zero(); n]; n]; n],
            connection: vec![RationalExpr::zero(); n],
        }
    }

    /// `(J¹L, [-,-]_J, σJ♯)` on the jet frame, represented on `L` by
    /// `∇_ϕ = J♯ϕ`.
    pub fn from_jacobi(j: &JacobiBivector) -> Self {
        let base = j.chart();
        let frame = JetSection::frame(base);
        let sharp = j.sharp();
        let mut structure = vec![vec![Vec::new(); frame.len()]; frame.len()];
        for (a, x) in frame.iter().enumerate() {
            for (b, y) in frame.iter().enumerate() {
                structure[a][b] = jet_bracket(j, x, y).coeffs().to_vec();
            }
        }
        let ders: Vec<Derivation> = frame.iter().map(|x| sharp.apply(x)).collect();
        LieAlgebroidPresentation {
            base: base.clone(),
            anchor: ders.iter().map(|d| d.symbol().clone()).collect(),
            structure,
            connection: ders.iter().map(|d| d.weight().clone()).collect(),
        }
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.anchor.len()
    }

    pub fn structure(&self, i: usize, j: usize, k: usize) -> &RationalExpr {
        &self.structure[i][j][k]
    }

    pub fn connection_coeffs(&self) -> &[RationalExpr] {
        &self.connection
    }

    pub fn anchor_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rank(), self.base.dim(), |i, j| self.anchor[i].component(j).clone())
    }

    pub fn frame_element(&self, i: usize) -> AlgSection {
        let mut c = vec![RationalExpr::zero(); self.rank()];
        c[i] = RationalExpr::one();
        c
    }

    pub fn anchor(&self, a: &[RationalExpr]) -> VectorField {
        a.iter()
            .zip(&self.anchor)
            .fold(VectorField::zero(&self.base), |acc, (f, v)| acc.add(&v.scale(f)))
    }

    /// `∇_α` as a derivation of `L`.
    pub fn nabla(&self, a: &[RationalExpr]) -> Derivation {
        let weight = a
            .iter()
            .zip(&self.connection)
            .fold(RationalExpr::zero(), |acc, (f, g)| &acc + &(f * g));
        Derivation::new(self.anchor(a), weight)
    }

    /// `[Σ a_i e_i, Σ b_j e_j] = Σ a_i b_j c^k_{ij} e_k + ρ(α)(b_k) e_k - ρ(β)(a_k) e_k`.
    pub fn bracket(&self, a: &[RationalExpr], b: &[RationalExpr]) -> AlgSection {
        let m = self.rank();
        let (ra, rb) = (self.anchor(a), self.anchor(b));
        let mut out: AlgSection = (0..m).map(|k| &ra.apply(&b[k]) - &rb.apply(&a[k])).collect();
        for i in 0..m {
            for j in 0..m {
                if a[i].is_zero() || b[j].is_zero() {
                    continue;
                }
                let ab = &a[i] * &b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.structure[i][j][k];
                    if !c.is_zero() {
                        *o = &*o + &(&ab * c);
                    }
                }
            }
        }
        out
    }

    /// Frame elements and their coordinate multiples, with labels; the first
    /// `rank` entries are the bare frame.
    pub fn test_sections(&self) -> Vec<(String, AlgSection)> {
        let mut out = Vec::new();
        for (name, f) in self.base.test_multipliers() {
            for i in 0..self.rank() {
                let mut s = self.frame_element(i);
                s[i] = f.clone();
                let label = if name == "1" {
                    format!("e{}", i + 1)
                } else {
                    format!("{name}*e{}", i + 1)
                };
                out.push((label, s));
            }
        }
        out
    }
}

/// Jacobi identity of the bracket and `ρ[α, β] = [ρα, ρβ]`.
pub fn check_lie_algebroid(a: &LieAlgebroidPresentation) -> ResidualReport {
    let m = a.rank();
    let sections = a.test_sections();
    let mut report = ResidualReport::new("algebroid");
    let mut triples = Vec::new();
    for i in 0..sections.len() {
        for b in 0..m {
            for c in b + 1..m {
                triples.push((i, b, c));
            }
        }
    }
    run_cases(
        &mut report,
        &triples,
        |&(i, b, c)| format!("Jac({}, e{}, e{})", sections[i].0, b + 1, c + 1),
        |&(i, b, c)| {
            let (x, y, z) = (&sections[i].1, &a.frame_element(b), &a.frame_element(c));
            let t1 = a.bracket(x, &a.bracket(y, z));
            let t2 = a.bracket(y, &a.bracket(z, x));
            let t3 = a.bracket(z, &a.bracket(x, y));
            (0..m).map(|k| &(&t1[k] + &t2[k]) + &t3[k]).collect::<AlgSection>()
        },
    );
    let pairs = protocol_pairs(sections.len(), m);
    run_cases(
        &mut report,
        &pairs,
        |&(i, j)| format!("ρ[{}, {}] - [ρ, ρ]", sections[i].0, sections[j].0),
        |&(i, j)| {
            let (x, y) = (&sections[i].1, &sections[j].1);
            a.anchor(&a.bracket(x, y)).sub(&a.anchor(x).bracket(&a.anchor(y)))
        },
    );
    report
}

/// Curvature `[∇_α, ∇_β] - ∇_{[α, β]}` of the representation on `L`.
pub fn check_flat_connection(a: &LieAlgebroidPresentation) -> ResidualReport {
    let sections = a.test_sections();
    let pairs = protocol_pairs(sections.len(), a.rank());
    let mut report = ResidualReport::new("connection");
    run_cases(
        &mut report,
        &pairs,
        |&(i, j)| format!("R({}, {})", sections[i].0, sections[j].0),
        |&(i, j)| {
            let (x, y) = (&sections[i].1, &sections[j].1);
            a.nabla(x).bracket(&a.nabla(y)).sub(&a.nabla(&a.bracket(x, y)))
        },
    );
    report
}

/// `σ*(df)`, the real Atiyah 1-form `(df, 0)`.
fn sigma_df(chart: &Chart, f: &RationalExpr) -> AtiyahForm {
    AtiyahForm::sigma_star(&KForm::function(chart, f.clone()).d(), ValueKind::Real)
}

/// An `L`-valued IM Atiyah `k`-form stored by frame values; `𝐃` extends by
/// `𝐃(Σ f_i e_i) = Σ f_i 𝐃(e_i) + σ*(df_i) ∧ 𝐥(e_i)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ImForm {
    base: Chart,
    degree: usize,
    l: Vec<AtiyahForm>,
    d: Vec<AtiyahForm>,
}

impl ImForm {
    pub fn new(base: &Chart, degree: usize, l: Vec<AtiyahForm>, d: Vec<AtiyahForm>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::BadArity("IM forms have degree at least 1".into()));
        }
        if l.len() != d.len() {
            return Err(Error::BadArity("𝐥 and 𝐃 need one value per frame element".into()));
        }
        for (x, k) in l.iter().map(|x| (x, degree - 1)).chain(d.iter().map(|x| (x, degree))) {
            if x.chart() != base {
                return Err(Error::ChartMismatch);
            }
            if x.degree() != k || x.kind() != ValueKind::Line {
                return Err(Error::BadArity(format!("expected an L-valued Atiyah {k}-form")));
            }
        }
        Ok(ImForm {
            base: base.clone(),
            degree,
            l,
            d,
        })
    }

    pub fn zero(a: &LieAlgebroidPresentation, degree: usize) -> Result<Self> {
        let m = a.rank();
        let l = vec![AtiyahForm::zero(a.base(), degree.saturating_sub(1), ValueKind::Line); m];
        let d = vec![AtiyahForm::zero(a.base(), degree, ValueKind::Line); m];
        ImForm::new(a.base(), degree, l, d)
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.l.len()
    }

    pub fn l_frame(&self) -> &[AtiyahForm] {
        &self.l
    }

    pub fn d_frame(&self) -> &[AtiyahForm] {
        &self.d
    }

    pub fn l_of(&self, a: &[RationalExpr]) -> AtiyahForm {
        a.iter().zip(&self.l).fold(
            AtiyahForm::zero(&self.base, self.degree - 1, ValueKind::Line),
            |acc, (f, x)| acc.add(&x.scale(f)),
        )
    }

    pub fn d_of(&self, a: &[RationalExpr]) -> AtiyahForm {
        let mut out = AtiyahForm::zero(&self.base, self.degree, ValueKind::Line);
        for ((f, d), l) in a.iter().zip(&self.d).zip(&self.l) {
            out = out.add(&d.scale(f));
            let df = sigma_df(&self.base, f);
            if !df.is_zero() {
                out = out.add(&df.wedge(l).expect("real ∧ L-valued"));
            }
        }
        out
    }
}

impl std::fmt::Display for ImForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (l, d)) in self.l.iter().zip(&self.d).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "𝐥(e{}) = {l}\n𝐃(e{}) = {d}", i + 1, i + 1)?;
        }
        Ok(())
    }
}

/// The three IM equations on frame pairs and coordinate multiples. The
/// Leibniz rule holds by the extension rule; see [`RawImForm`] for data
/// that does not impose it.
pub fn check_im_form(a: &LieAlgebroidPresentation, form: &ImForm) -> Result<CheckSet> {
    if a.base() != form.base() {
        return Err(Error::ChartMismatch);
    }
    if a.rank() != form.rank() {
        return Err(Error::InvalidAlgebroid("IM form and algebroid have different ranks".into()));
    }
    let (alg, conn) = (check_lie_algebroid(a), check_flat_connection(a));
    if !alg.passed() || !conn.passed() {
        return Err(Error::InvalidAlgebroid("the presentation fails its own checks".into()));
    }
    let sections = a.test_sections();
    let pairs = protocol_pairs(sections.len(), a.rank());
    let label = |&(i, j): &(usize, usize)| format!("({}, {})", sections[i].0, sections[j].0);
    let mut set = CheckSet::default();

    let mut r2 = ResidualReport::new("im.r2");
    run_cases(&mut r2, &pairs, label, |&(i, j)| {
        let (x, y) = (&sections[i].1, &sections[j].1);
        form.d_of(y)
            .lie(&a.nabla(x))
            .sub(&form.d_of(x).lie(&a.nabla(y)))
            .sub(&form.d_of(&a.bracket(x, y)))
    });
    set.push(r2);

    let mut r3 = ResidualReport::new("im.r3");
    run_cases(&mut r3, &pairs, label, |&(i, j)| {
        let (x, y) = (&sections[i].1, &sections[j].1);
        form.l_of(y)
            .lie(&a.nabla(x))
            .sub(&form.d_of(x).contract(&a.nabla(y)).expect("positive degree"))
            .sub(&form.l_of(&a.bracket(x, y)))
    });
    set.push(r3);

    let mut r4 = ResidualReport::new("im.r4");
    if form.degree() > 1 {
        run_cases(&mut r4, &pairs, label, |&(i, j)| {
            let (x, y) = (&sections[i].1, &sections[j].1);
            let c = |p: &AlgSection, q: &AlgSection| form.l_of(q).contract(&a.nabla(p)).expect("positive degree");
            c(x, y).add(&c(y, x))
        });
    }
    set.push(r4);
    Ok(set)
}

/// IM data entered as a raw table: `𝐥` on the frame and `𝐃` on frame
/// elements and their coordinate multiples, without assuming the Leibniz
/// rule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RawImForm {
    pub form: ImForm,
    /// `(i, j, 𝐃(x_j e_i))`.
    pub multiples: Vec<(usize, usize, AtiyahForm)>,
}

impl RawImForm {
    /// `𝐃(x_j e_i) - x_j 𝐃(e_i) - σ*(dx_j) ∧ 𝐥(e_i)` for every tabled multiple.
    pub fn check_leibniz(&self) -> ResidualReport {
        let base = self.form.base();
        let mut r = ResidualReport::new("im.r1");
        for (i, j, value) in &self.multiples {
            let x = base.coord(*j);
            let mut s = vec![RationalExpr::zero(); self.form.rank()];
            s[*i] = x.clone();
            r.record(|| format!("𝐃({}*e{})", base.name(*j), i + 1), &value.sub(&self.form.d_of(&s)));
        }
        r
    }
}

/// Which built-in family a presentation belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GroupoidKind {
    Pair,
    BundleOfGroups,
    Unit,
    Custom,
}

/// A chart of composable triples with the maps `(g₁,g₂,g₃) ↦ (g₁g₂, g₃)` and
/// `(g₁,g₂,g₃) ↦ (g₁, g₂g₃)` into the chart of pairs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Triples {
    pub chart: Chart,
    pub left: ChartMap,
    pub right: ChartMap,
}

/// A Lie groupoid `𝒢 ⇉ M` on charts: `arrows` for `𝒢`, `pairs` for `𝒢₂`
/// with embeddings `pr₁, pr₂`, a representation cocycle `Δ` on `L`, and a
/// right-invariant frame `α_i^r` of `ker ds` with lifts `(α_i^r, 0)` to
/// `𝒢₂`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupoidPresentation {
    pub kind: GroupoidKind,
    pub base: Chart,
    pub arrows: Chart,
    pub pairs: Chart,
    pub s: ChartMap,
    pub t: ChartMap,
    pub u: ChartMap,
    pub inv: ChartMap,
    pub m: ChartMap,
    pub pr1: ChartMap,
    pub pr2: ChartMap,
    pub cocycle: RationalExpr,
    pub right_frame: Vec<VectorField>,
    pub right_lift: Vec<VectorField>,
    pub triples: Option<Triples>,
    /// `g ↦ (u(t(g)), g)`.
    pub unit_left: Option<ChartMap>,
    /// `g ↦ (g, u(s(g)))`.
    pub unit_right: Option<ChartMap>,
    /// `g ↦ (g, g⁻¹)`.
    pub inverse_pair: Option<ChartMap>,
}

fn suffixed(names: &[String], k: usize) -> Vec<String> {
    names.iter().map(|v| format!("{v}_{k}")).collect()
}

fn map(source: &Chart, target: &Chart, comps: Vec<RationalExpr>) -> Result<ChartMap> {
    ChartMap::new(source.clone(), target.clone(), comps)
}

fn coords_of(chart: &Chart, names: &[String]) -> Vec<RationalExpr> {
    names
        .iter()
        .map(|n| chart.coord(chart.index_of(n).expect("declared")))
        .collect()
}

impl GroupoidPresentation {
    /// The pair groupoid `M × M ⇉ M` with `t(x, x_1) = x`, `s(x, x_1) = x_1`,
    /// composition `(x, x_1)(x_1, x_2) = (x, x_2)` and cocycle
    /// `Δ(x, x_1) = h(x)/h(x_1)`.
    pub fn pair(base: &Chart, h: Option<&RationalExpr>) -> Result<Self> {
        let names: Vec<String> = base.names().iter().map(|v| v.to_string()).collect();
        let p1 = suffixed(&names, 1);
        let p2 = suffixed(&names, 2);
        let p3 = suffixed(&names, 3);
        let arrows = base.extended(&p1)?;
        let pairs = arrows.extended(&p2)?;
        let triple_chart = pairs.extended(&p3)?;
        let (x, x1) = (coords_of(&arrows, &names), coords_of(&arrows, &p1));
        let cat = |a: &[RationalExpr], b: &[RationalExpr]| [a, b].concat();
        let cat3 = |a: &[RationalExpr], b: &[RationalExpr], c: &[RationalExpr]| [a, b, c].concat();

        let t = map(&arrows, base, x.clone())?;
        let s = map(&arrows, base, x1.clone())?;
        let bx = base.coords();
        let u = map(base, &arrows, cat(&bx, &bx))?;
        let inv = map(&arrows, &arrows, cat(&x1, &x))?;
        let (q0, q1, q2) = (
            coords_of(&pairs, &names),
            coords_of(&pairs, &p1),
            coords_of(&pairs, &p2),
        );
        let m = map(&pairs, &arrows, cat(&q0, &q2))?;
        let pr1 = map(&pairs, &arrows, cat(&q0, &q1))?;
        let pr2 = map(&pairs, &arrows, cat(&q1, &q2))?;

        let cocycle = match h {
            None => RationalExpr::one(),
            Some(h) => {
                if h.is_zero() {
                    return Err(Error::NonInvertibleCocycle);
                }
                let at_source = s.pull_function(h)?;
                h.checked_div(&at_source).map_err(|_| Error::NonInvertibleCocycle)?
            }
        };
        let n = base.dim();
        let right_frame = (0..n).map(|i| VectorField::coordinate(&arrows, i)).collect();
        let right_lift = (0..n).map(|i| VectorField::coordinate(&pairs, i)).collect();

        let (w0, w1, w2, w3) = (
            coords_of(&triple_chart, &names),
            coords_of(&triple_chart, &p1),
            coords_of(&triple_chart, &p2),
            coords_of(&triple_chart, &p3),
        );
        let triples = Triples {
            left: map(&triple_chart, &pairs, cat3(&w0, &w2, &w3))?,
            right: map(&triple_chart, &pairs, cat3(&w0, &w1, &w3))?,
            chart: triple_chart,
        };
        Ok(GroupoidPresentation {
            kind: GroupoidKind::Pair,
            base: base.clone(),
            unit_left: Some(map(&arrows, &pairs, cat3(&x, &x, &x1))?),
            unit_right: Some(map(&arrows, &pairs, cat3(&x, &x1, &x1))?),
            inverse_pair: Some(map(&arrows, &pairs, cat3(&x, &x1, &x))?),
            arrows,
            pairs,
            s,
            t,
            u,
            inv,
            m,
            pr1,
            pr2,
            cocycle,
            right_frame,
            right_lift,
            triples: Some(triples),
        })
    }

    /// The bundle of groups `M × ℝ^k ⇉ M` with fiber coordinates `fiber`,
    /// `s = t` the projection, fiberwise addition and trivial cocycle. Pairs
    /// use the fiber coordinates suffixed `_1, _2`.
    pub fn bundle_of_groups(base: &Chart, fiber: &[&str]) -> Result<Self> {
        if fiber.is_empty() {
            return Err(Error::InvalidChart("a bundle of groups needs a fiber coordinate".into()));
        }
        let names: Vec<String> = base.names().iter().map(|v| v.to_string()).collect();
        let f: Vec<String> = fiber.iter().map(|v| v.to_string()).collect();
        let (f1, f2, f3) = (suffixed(&f, 1), suffixed(&f, 2), suffixed(&f, 3));
        let arrows = base.extended(&f)?;
        let pairs = base.extended(&[f1.clone(), f2.clone()].concat())?;
        let triple_chart = base.extended(&[f1.clone(), f2.clone(), f3.clone()].concat())?;
        let k = f.len();
        let add = |a: &[RationalExpr], b: &[RationalExpr]| -> Vec<RationalExpr> {
            a.iter().zip(b).map(|(p, q)| p + q).collect()
        };
        let zeros = vec![RationalExpr::zero(); k];

        let x = coords_of(&arrows, &names);
        let a = coords_of(&arrows, &f);
        let t = map(&arrows, base, x.clone())?;
        let s = t.clone();
        let u = map(base, &arrows, [base.coords(), zeros.clone()].concat())?;
        let neg_a: Vec<RationalExpr> = a.iter().map(|v| -v).collect();
        let inv = map(&arrows, &arrows, [x.clone(), neg_a.clone()].concat())?;
        let (px, a1, a2) = (
            coords_of(&pairs, &names),
            coords_of(&pairs, &f1),
            coords_of(&pairs, &f2),
        );
        let m = map(&pairs, &arrows, [px.clone(), add(&a1, &a2)].concat())?;
        let pr1 = map(&pairs, &arrows, [px.clone(), a1].concat())?;
        let pr2 = map(&pairs, &arrows, [px, a2].concat())?;

        let n = base.dim();
        let right_frame = (0..k).map(|i| VectorField::coordinate(&arrows, n + i)).collect();
        let right_lift = (0..k).map(|i| VectorField::coordinate(&pairs, n + i)).collect();

        let (tx, b1, b2, b3) = (
            coords_of(&triple_chart, &names),
            coords_of(&triple_chart, &f1),
            coords_of(&triple_chart, &f2),
            coords_of(&triple_chart, &f3),
        );
        let triples = Triples {
            left: map(&triple_chart, &pairs, [tx.clone(), add(&b1, &b2), b3.clone()].concat())?,
            right: map(&triple_chart, &pairs, [tx, b1, add(&b2, &b3)].concat())?,
            chart: triple_chart,
        };
        Ok(GroupoidPresentation {
            kind: GroupoidKind::BundleOfGroups,
            base: base.clone(),
            unit_left: Some(map(&arrows, &pairs, [x.clone(), zeros.clone(), a.clone()].concat())?),
            unit_right: Some(map(&arrows, &pairs, [x.clone(), a.clone(), zeros].concat())?),
            inverse_pair: Some(map(&arrows, &pairs, [x, a, neg_a].concat())?),
            arrows,
            pairs,
            s,
            t,
            u,
            inv,
            m,
            pr1,
            pr2,
            cocycle: RationalExpr::one(),
            right_frame,
            right_lift,
            triples: Some(triples),
        })
    }

    /// `M ⇉ M` with only identity arrows.
    pub fn unit(base: &Chart) -> Self {
        let id = ChartMap::identity(base);
        GroupoidPresentation {
            kind: GroupoidKind::Unit,
            base: base.clone(),
            arrows: base.clone(),
            pairs: base.clone(),
            s: id.clone(),
            t: id.clone(),
            u: id.clone(),
            inv: id.clone(),
            m: id.clone(),
            pr1: id.clone(),
            pr2: id.clone(),
            cocycle: RationalExpr::one(),
            right_frame: Vec::new(),
            right_lift: Vec::new(),
            triples: Some(Triples {
                chart: base.clone(),
                left: id.clone(),
                right: id.clone(),
            }),
            unit_left: Some(id.clone()),
            unit_right: Some(id.clone()),
            inverse_pair: Some(id),
        }
    }

    /// Check that every map and field lives on the chart it should.
    pub fn validate(&self) -> Result<()> {
        let ok = |f: &ChartMap, src: &Chart, dst: &Chart| f.source() == src && f.target() == dst;
        let (b, a, p) = (&self.base, &self.arrows, &self.pairs);
        let maps_ok = ok(&self.s, a, b)
            && ok(&self.t, a, b)
            && ok(&self.u, b, a)
            && ok(&self.inv, a, a)
            && ok(&self.m, p, a)
            && ok(&self.pr1, p, a)
            && ok(&self.pr2, p, a)
            && [&self.unit_left, &self.unit_right, &self.inverse_pair]
                .iter()
                .all(|f| f.as_ref().is_none_or(|f| ok(f, a, p)))
            && self
                .triples
                .as_ref()
                .is_none_or(|t| ok(&t.left, &t.chart, p) && ok(&t.right, &t.chart, p));
        let fields_ok = self.right_frame.len() == self.right_lift.len()
            && self.right_frame.iter().all(|v| v.chart() == a)
            && self.right_lift.iter().all(|v| v.chart() == p);
        if !maps_ok || !fields_ok {
            return Err(Error::ChartMismatch);
        }
        let names = a.name_set();
        for v in self.cocycle.numer().vars().iter().chain(self.cocycle.denom().vars().iter()) {
            if !names.contains(&**v) {
                return Err(Error::UndeclaredCoordinate(v.to_string()));
            }
        }
        if self.cocycle.is_zero() {
            return Err(Error::NonInvertibleCocycle);
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.right_frame.len()
    }
}

fn map_diff(f: &ChartMap, g: &ChartMap) -> Vec<RationalExpr> {
    f.components().iter().zip(g.components()).map(|(a, b)| a - b).collect()
}

fn compose(first: &ChartMap, second: &ChartMap) -> ChartMap {
    first.then(second).expect("composable charts")
}

/// `F_*V`, as components on the target expressed in source coordinates.
fn push(f: &ChartMap, v: &VectorField) -> Vec<RationalExpr> {
    f.jacobian().mul_vec(v.components())
}

/// `F_*V - W∘F`.
fn related(f: &ChartMap, v: &VectorField, w: &VectorField) -> Vec<RationalExpr> {
    push(f, v)
        .iter()
        .zip(w.components())
        .map(|(a, b)| a - &f.pull_function(b).expect("substitution"))
        .collect()
}

/// Structure maps, cocycle and right-invariant frame as exact residuals.
pub fn check_groupoid(g: &GroupoidPresentation) -> Result<ResidualReport> {
    g.validate()?;
    let mut r = ResidualReport::new("groupoid");
    let id_m = ChartMap::identity(&g.base);
    let id_g = ChartMap::identity(&g.arrows);
    r.record(|| "s∘u - id".into(), &map_diff(&compose(&g.u, &g.s), &id_m));
    r.record(|| "t∘u - id".into(), &map_diff(&compose(&g.u, &g.t), &id_m));
    r.record(|| "s∘pr₁ - t∘pr₂".into(), &map_diff(&compose(&g.pr1, &g.s), &compose(&g.pr2, &g.t)));
    r.record(|| "s∘m - s∘pr₂".into(), &map_diff(&compose(&g.m, &g.s), &compose(&g.pr2, &g.s)));
    r.record(|| "t∘m - t∘pr₁".into(), &map_diff(&compose(&g.m, &g.t), &compose(&g.pr1, &g.t)));
    r.record(|| "s∘inv - t".into(), &map_diff(&compose(&g.inv, &g.s), &g.t));
    r.record(|| "t∘inv - s".into(), &map_diff(&compose(&g.inv, &g.t), &g.s));

    let delta = &g.cocycle;
    let on = |f: &ChartMap| f.pull_function(delta).expect("substitution");
    r.record(|| "Δ∘m - (Δ∘pr₁)(Δ∘pr₂)".into(), &(&on(&g.m) - &(&on(&g.pr1) * &on(&g.pr2))));
    r.record(|| "Δ∘u - 1".into(), &(&on(&g.u) - &RationalExpr::one()));

    if let Some(tr) = &g.triples {
        r.record(
            || "m(m(g₁,g₂),g₃) - m(g₁,m(g₂,g₃))".into(),
            &map_diff(&compose(&tr.left, &g.m), &compose(&tr.right, &g.m)),
        );
    }
    let ut = compose(&g.t, &g.u);
    let us = compose(&g.s, &g.u);
    if let Some(f) = &g.unit_left {
        r.record(|| "m(u(t(g)), g) - g".into(), &map_diff(&compose(f, &g.m), &id_g));
        r.record(|| "pr₁ of (u(t(g)), g)".into(), &map_diff(&compose(f, &g.pr1), &ut));
        r.record(|| "pr₂ of (u(t(g)), g)".into(), &map_diff(&compose(f, &g.pr2), &id_g));
    }
    if let Some(f) = &g.unit_right {
        r.record(|| "m(g, u(s(g))) - g".into(), &map_diff(&compose(f, &g.m), &id_g));
        r.record(|| "pr₁ of (g, u(s(g)))".into(), &map_diff(&compose(f, &g.pr1), &id_g));
        r.record(|| "pr₂ of (g, u(s(g)))".into(), &map_diff(&compose(f, &g.pr2), &us));
    }
    if let Some(f) = &g.inverse_pair {
        r.record(|| "m(g, g⁻¹) - u(t(g))".into(), &map_diff(&compose(f, &g.m), &ut));
        r.record(|| "pr₁ of (g, g⁻¹)".into(), &map_diff(&compose(f, &g.pr1), &id_g));
        r.record(|| "pr₂ of (g, g⁻¹)".into(), &map_diff(&compose(f, &g.pr2), &g.inv));
    }

    for (i, (v, lift)) in g.right_frame.iter().zip(&g.right_lift).enumerate() {
        r.record(|| format!("ds(α{}ʳ)", i + 1), &push(&g.s, v));
        r.record(|| format!("pr₁ relates the lift of α{}ʳ", i + 1), &related(&g.pr1, lift, v));
        r.record(|| format!("pr₂ kills the lift of α{}ʳ", i + 1), &push(&g.pr2, lift));
        r.record(|| format!("m relates the lift of α{}ʳ", i + 1), &related(&g.m, lift, v));
    }
    Ok(r)
}

fn restrict(g: &GroupoidPresentation, f: &RationalExpr) -> RationalExpr {
    g.u.pull_function(f).expect("substitution")
}

/// The Lie algebroid `ker ds|_M` on the frame `α_i^r|_M`, with anchor
/// `dt`, bracket from `[α_i^r, α_j^r]` and the representation obtained by
/// differentiating the action: `∇_α λ = d/dε (g_ε⁻¹·λ(t(g_ε)))`, i.e.
/// `γ_i = -α_i^r(Δ)` at the units.
pub fn lie_functor(g: &GroupoidPresentation) -> Result<LieAlgebroidPresentation> {
    g.validate()?;
    if g.kind == GroupoidKind::Custom && g.right_frame.is_empty() && g.arrows != g.base {
        return Err(Error::UnsupportedGroupoid("no right-translation data".into()));
    }
    let m = g.rank();
    let n = g.base.dim();
    let dim_g = g.arrows.dim();
    let at_units =
        |v: &[RationalExpr]| -> Vec<RationalExpr> { v.iter().map(|c| restrict(g, c)).collect() };
    let anchor_rows: Vec<Vec<RationalExpr>> = g.right_frame.iter().map(|v| at_units(&push(&g.t, v))).collect();
    let anchor = Matrix::from_fn(m, n, |i, j| anchor_rows[i][j].clone());

    let basis: Vec<Vec<RationalExpr>> = g.right_frame.iter().map(|v| at_units(v.components())).collect();
    let b = Matrix::from_columns(dim_g, &basis);
    let mut structure = vec![vec![vec![RationalExpr::zero(); m]; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let br = at_units(g.right_frame[i].bracket(&g.right_frame[j]).components());
            let rhs = Matrix::from_columns(dim_g, &[br]);
            let c = b.solve(&rhs).ok_or_else(|| {
                Error::InvalidAlgebroid("right-invariant frame is not closed under the bracket".into())
            })?;
            for k in 0..m {
                structure[i][j][k] = c.get(k, 0).clone();
                structure[j][i][k] = -c.get(k, 0);
            }
        }
    }
    let connection = g.right_frame.iter().map(|v| -restrict(g, &v.apply(&g.cocycle))).collect();
    LieAlgebroidPresentation::new(&g.base, &anchor, structure, connection)
}

/// `α^r = Σ (α_i ∘ t) α_i^r`.
pub fn right_invariant_extension(g: &GroupoidPresentation, alpha: &[RationalExpr]) -> Result<VectorField> {
    g.validate()?;
    if alpha.len() != g.rank() {
        return Err(Error::BadArity(format!("section needs {} coefficients", g.rank())));
    }
    let mut out = VectorField::zero(&g.arrows);
    for (f, v) in alpha.iter().zip(&g.right_frame) {
        out = out.add(&v.scale(&g.t.pull_function(f)?));
    }
    Ok(out)
}

/// `∇^𝒢_V = (V, -V(log Δ))` on `t*L`, for `s`-vertical `V`: the sections
/// `g ↦ g·ℓ` along a source fiber are flat.
pub fn groupoid_connection(g: &GroupoidPresentation, v: &VectorField) -> Derivation {
    let dlog = v
        .apply(&g.cocycle)
        .checked_div(&g.cocycle)
        .expect("cocycle is nonzero");
    Derivation::new(v.clone(), -dlog)
}

/// `m*ω - pr₁*ω - i*pr₂*ω` on `𝒢₂`.
pub fn check_multiplicative(g: &GroupoidPresentation, omega: &AtiyahForm) -> Result<ResidualReport> {
    g.validate()?;
    if omega.chart() != &g.arrows {
        return Err(Error::ChartMismatch);
    }
    let one = RationalExpr::one();
    let kappa_i = g.pr1.pull_function(&g.cocycle)?.inv().map_err(|_| Error::NonInvertibleCocycle)?;
    let lhs = omega.pullback(&g.m, &one)?;
    let rhs = omega.pullback(&g.pr1, &one)?.add(&omega.pullback(&g.pr2, &kappa_i)?);
    let mut r = ResidualReport::new("multiplicative");
    r.record(|| "m*ω - pr₁*ω - i*pr₂*ω".into(), &lhs.sub(&rhs));
    Ok(r)
}

/// The IM form of a multiplicative `ω`, the algebroid it lives on, and the
/// residual of `∇_α = t_*(∇^𝒢_{α^r}|_M)` on the frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedIm {
    pub algebroid: LieAlgebroidPresentation,
    pub form: ImForm,
    pub connection: ResidualReport,
}

/// `𝐃(α) = u*(ℒ_{∇^𝒢_{α^r}} ω)`, `𝐥(α) = u*(i_{∇^𝒢_{α^r}} ω)`.
pub fn induced_im_form(g: &GroupoidPresentation, omega: &AtiyahForm) -> Result<InducedIm> {
    if omega.degree() == 0 || omega.kind() != ValueKind::Line {
        return Err(Error::BadArity("induced IM forms need an L-valued form of positive degree".into()));
    }
    if !check_multiplicative(g, omega)?.passed() {
        return Err(Error::NotMultiplicative);
    }
    let algebroid = lie_functor(g)?;
    let one = RationalExpr::one();
    let mut l = Vec::new();
    let mut d = Vec::new();
    let mut connection = ResidualReport::new("im.connection");
    for (i, v) in g.right_frame.iter().enumerate() {
        let nabla_g = groupoid_connection(g, v);
        l.push(omega.contract(&nabla_g)?.pullback(&g.u, &one)?);
        d.push(omega.lie(&nabla_g).pullback(&g.u, &one)?);
        let symbol: Vec<RationalExpr> = push(&g.t, v).iter().map(|c| restrict(g, c)).collect();
        let pushed = Derivation::new(VectorField::new(&g.base, symbol)?, restrict(g, nabla_g.weight()));
        let e = algebroid.frame_element(i);
        connection.record(|| format!("t_*∇^𝒢(α{}ʳ) - ∇(e{})", i + 1, i + 1), &pushed.sub(&algebroid.nabla(&e)));
    }
    let form = ImForm::new(&g.base, omega.degree(), l, d)?;
    Ok(InducedIm {
        algebroid,
        form,
        connection,
    })
}

/// `(μ₀, μ₁)` with `ω = σ*μ₀ + d_DL σ*μ₁`, for an `L`-valued `ω`.
pub fn decompose_atiyah(omega: &AtiyahForm) -> Result<(KForm, Option<KForm>)> {
    if omega.kind() != ValueKind::Line {
        return Err(Error::ValueMismatch);
    }
    match omega.comp1() {
        None => Ok((omega.comp0().clone(), None)),
        Some(w1) => Ok((omega.comp0().sub(&w1.d()), Some(w1.clone()))),
    }
}

/// `σ*μ₀ + d_DL σ*μ₁`.
pub fn recompose_atiyah(mu0: &KForm, mu1: Option<&KForm>) -> Result<AtiyahForm> {
    let base = AtiyahForm::sigma_star(mu0, ValueKind::Line);
    match mu1 {
        None if mu0.degree() == 0 => Ok(base),
        None => Err(Error::BadArity("μ₁ is required in positive degree".into())),
        Some(m1) => {
            if m1.degree() + 1 != mu0.degree() || m1.chart() != mu0.chart() {
                return Err(Error::BadArity("μ₁ must have degree one less than μ₀".into()));
            }
            Ok(base.add(&AtiyahForm::sigma_star(m1, ValueKind::Line).d()))
        }
    }
}

/// `Ω + Φ*Ω - s*ω + t*ω`.
pub fn check_chg_condition3(
    g: &GroupoidPresentation,
    big_omega: &AtiyahForm,
    phi: &EndoDL,
    omega_m: &AtiyahForm,
) -> Result<ResidualReport> {
    g.validate()?;
    if big_omega.chart() != &g.arrows || phi.chart() != &g.arrows || omega_m.chart() != &g.base {
        return Err(Error::ChartMismatch);
    }
    let kappa_s = g.cocycle.inv().map_err(|_| Error::NonInvertibleCocycle)?;
    let lhs = big_omega.add(&big_omega.pull_by_endo(phi)?);
    let rhs = omega_m
        .pullback(&g.s, &kappa_s)?
        .sub(&omega_m.pullback(&g.t, &RationalExpr::one())?);
    let mut r = ResidualReport::new("chg.condition3");
    r.record(|| "Ω + Φ*Ω - s*ω + t*ω".into(), &lhs.sub(&rhs));
    Ok(r)
}

/// `t*η - s*η`, multiplicative for every `L`-valued `η` on `M`.
pub fn coboundary(g: &GroupoidPresentation, eta: &AtiyahForm) -> Result<AtiyahForm> {
    let kappa_s = g.cocycle.inv().map_err(|_| Error::NonInvertibleCocycle)?;
    Ok(eta
        .pullback(&g.t, &RationalExpr::one())?
        .sub(&eta.pullback(&g.s, &kappa_s)?))
}
