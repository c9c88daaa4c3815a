//! Dispatch of checks on a parsed structure and the verdict report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use gcbundle::atiyah::{atlas_compat, AtiyahForm, EndoDL, JacobiBivector, TransitionData, ValueKind};
use gcbundle::gcs::{check_almost, check_equations, check_integrable, check_jacobi, GacsTriple};
use gcbundle::hitchin::{
    check_hitchin_pair, contact_to_atiyah, gcs_from_hitchin, hitchin_from_gcs, invert_atiyah2, HitchinPair,
};
use gcbundle::homog::{check_gc, check_homogeneity, check_symplectization, homogenize};
use gcbundle::imgroupoid::{
    check_flat_connection, check_groupoid, check_im_form, check_lie_algebroid, check_multiplicative, induced_im_form,
};
use gcbundle::report::{CheckSet, ResidualReport};
use gcbundle::{Error, KForm};
use serde::{Deserialize, Serialize};

use crate::format::Structure;

pub const SCHEMA: u32 = 1;

pub const CONVENTIONS: &str = "ω♭Δ = i_Δω; ⟨J♯φ, ψ⟩ = J(φ, ψ); a contact form θ gives the triple \
(0, Ω⁻¹, -Ω) with Ω = (dθ, θ) and J♯ω♭ = -id; on M̃, π♯σ♭ = -id for φ = 0; \
∇^𝒢 = (V, -V(log Δ)) on t*L";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Check {
    Almost,
    Integrable,
    Jacobi,
    Contact,
    Hitchin,
    Gc,
    Im,
    Multiplicative,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Almost,
        Check::Integrable,
        Check::Jacobi,
        Check::Contact,
        Check::Hitchin,
        Check::Gc,
        Check::Im,
        Check::Multiplicative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Almost => "almost",
            Check::Integrable => "integrable",
            Check::Jacobi => "jacobi",
            Check::Contact => "contact",
            Check::Hitchin => "hitchin",
            Check::Gc => "gc",
            Check::Im => "im",
            Check::Multiplicative => "multiplicative",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub label: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub verdict: Verdict,
    pub checked: usize,
    pub nonzero: usize,
    pub residuals: Vec<ResidualEntry>,
    pub truncated: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub file: String,
    pub verdict: Verdict,
    pub conventions: String,
    pub checks: Vec<CheckEntry>,
    pub timing_ms: BTreeMap<String, u64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.file);
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(0);
        for c in &self.checks {
            let pad = " ".repeat(width - c.name.chars().count());
            match &c.error {
                Some(e) => {
                    let _ = writeln!(out, "  {}{pad}  error  {e}", c.name);
                }
                None => {
                    let _ = writeln!(out, "  {}{pad}  {}  ({} residuals)", c.name, c.verdict.as_str(), c.checked);
                }
            }
            for r in &c.residuals {
                let _ = writeln!(out, "      {} = {}", r.label, r.value);
            }
            if c.truncated {
                let _ = writeln!(out, "      ... {} nonzero in total (--full shows all)", c.nonzero);
            }
        }
        let _ = writeln!(out, "verdict: {}", self.verdict.as_str());
        out
    }
}

const MAX_RESIDUALS: usize = 3;
const MAX_CHARS: usize = 160;

fn shorten(s: &str, full: bool) -> String {
    if full || s.chars().count() <= MAX_CHARS {
        return s.to_string();
    }
    let head: String = s.chars().take(MAX_CHARS).collect();
    format!("{head}…")
}

fn entry_from(name: String, r: &ResidualReport, full: bool) -> CheckEntry {
    let keep = if full { r.nonzero.len() } else { r.nonzero.len().min(MAX_RESIDUALS) };
    CheckEntry {
        name,
        verdict: if r.passed() { Verdict::Pass } else { Verdict::Fail },
        checked: r.checked,
        nonzero: r.nonzero.len(),
        residuals: r.nonzero[..keep]
            .iter()
            .map(|(l, v)| ResidualEntry {
                label: shorten(l, full),
                value: shorten(v, full),
            })
            .collect(),
        truncated: keep < r.nonzero.len() || (!full && r.nonzero.iter().any(|(_, v)| v.chars().count() > MAX_CHARS)),
        error: None,
    }
}

fn error_entry(name: impl Into<String>, e: impl ToString) -> CheckEntry {
    CheckEntry {
        name: name.into(),
        verdict: Verdict::Error,
        checked: 0,
        nonzero: 0,
        residuals: Vec::new(),
        truncated: false,
        error: Some(e.to_string()),
    }
}

fn flag(name: &str, ok: bool, detail: impl FnOnce() -> String) -> ResidualReport {
    let mut r = ResidualReport::new(name);
    r.require(name, ok, detail);
    r
}

/// Engine objects derived from a structure file.
struct Derived<'a> {
    st: &'a Structure,
    contact: Option<gcbundle::Result<AtiyahForm>>,
    triple: Option<gcbundle::Result<GacsTriple>>,
}

impl<'a> Derived<'a> {
    fn new(st: &'a Structure) -> Self {
        let contact = st.theta.as_ref().map(contact_omega);
        let chart = &st.chart;
        let triple = if st.phi.is_some() || st.omega.is_some() {
            Some(GacsTriple::new(
                st.phi.clone().unwrap_or_else(|| EndoDL::zero(chart)),
                st.j.clone().unwrap_or_else(|| JacobiBivector::zero(chart)),
                st.omega
                    .clone()
                    .unwrap_or_else(|| AtiyahForm::zero(chart, 2, ValueKind::Line)),
            ))
        } else {
            contact.clone().map(|c| {
                c.and_then(|omega| {
                    let j = invert_atiyah2(&omega)?;
                    GacsTriple::new(st.phi.clone().unwrap_or_else(|| EndoDL::zero(chart)), j, omega.neg())
                })
            })
        };
        Derived { st, contact, triple }
    }

    fn jacobi(&self) -> Option<gcbundle::Result<JacobiBivector>> {
        if let Some(j) = &self.st.j {
            return Some(Ok(j.clone()));
        }
        self.triple.as_ref().map(|t| t.clone().map(|t| t.j))
    }

    fn hitchin(&self) -> Option<gcbundle::Result<HitchinPair>> {
        let chart = &self.st.chart;
        if let Some(c) = &self.contact {
            return Some(c.clone().and_then(|omega| {
                HitchinPair::new(omega, self.st.phi.clone().unwrap_or_else(|| EndoDL::zero(chart)))
            }));
        }
        self.triple.as_ref().map(|t| t.clone().and_then(|t| hitchin_from_gcs(&t)))
    }

    fn applicable(&self, check: Check) -> bool {
        let st = self.st;
        match check {
            Check::Almost | Check::Integrable => self.triple.is_some(),
            Check::Jacobi => self.jacobi().is_some(),
            Check::Contact => st.theta.is_some() || !st.atlas.is_empty(),
            Check::Hitchin => matches!(self.hitchin(), Some(Ok(_))),
            Check::Gc => st.gc.is_some() || self.triple.is_some(),
            Check::Im => st.im.is_some() || (st.groupoid.is_some() && st.form.is_some()),
            Check::Multiplicative => st.groupoid.is_some() && st.form.is_some(),
        }
    }
}

/// The triple on `M` described by a structure file.
pub fn triple_of(st: &Structure) -> Result<GacsTriple, crate::CliError> {
    match Derived::new(st).triple {
        Some(t) => Ok(t?),
        None => Err(crate::CliError::Unsupported(
            "no [phi], [J], [omega] or [theta] section to build a triple from".into(),
        )),
    }
}

fn contact_omega(theta: &KForm) -> gcbundle::Result<AtiyahForm> {
    let c = contact_to_atiyah(theta)?;
    if !c.nondegenerate {
        return Err(Error::Degenerate);
    }
    Ok(c.omega)
}

fn missing(what: &str) -> String {
    format!("not applicable: the file has no {what}")
}

fn push_set(out: &mut Vec<CheckEntry>, prefix: &str, set: &CheckSet, full: bool) {
    for r in &set.reports {
        let name = if r.name.starts_with(prefix) {
            r.name.clone()
        } else {
            format!("{prefix}.{}", r.name)
        };
        out.push(entry_from(name, r, full));
    }
}

fn run_check(d: &Derived, check: Check, full: bool) -> Vec<CheckEntry> {
    let st = d.st;
    let mut out = Vec::new();
    let name = check.name();
    match check {
        Check::Almost => match &d.triple {
            None => out.push(error_entry(name, missing("[phi], [omega] or [theta] section"))),
            Some(Err(e)) => out.push(error_entry(name, e)),
            Some(Ok(t)) => {
                let a = check_almost(t);
                out.push(entry_from("almost.relations".into(), &a.relations, full));
                out.push(entry_from("almost.operator".into(), &a.operator, full));
                let agree = flag("almost.routes", a.routes_agree(), || "the two routes disagree".into());
                out.push(entry_from("almost.routes".into(), &agree, full));
            }
        },
        Check::Integrable => match &d.triple {
            None => out.push(error_entry(name, missing("[phi], [omega] or [theta] section"))),
            Some(Err(e)) => out.push(error_entry(name, e)),
            Some(Ok(t)) => match (check_integrable(t), check_equations(t)) {
                (Ok(n), Ok(eqs)) => {
                    out.push(entry_from("integrable.nijenhuis".into(), &n, full));
                    push_set(&mut out, "integrable", &eqs, full);
                    let agree = flag("integrable.equivalence", n.passed() == eqs.passed(), || {
                        format!("N_I ≡ 0 is {}, equations hold is {}", n.passed(), eqs.passed())
                    });
                    out.push(entry_from("integrable.equivalence".into(), &agree, full));
                }
                (Err(e), _) | (_, Err(e)) => out.push(error_entry(name, e)),
            },
        },
        Check::Jacobi => match d.jacobi() {
            None => out.push(error_entry(name, missing("[J] section"))),
            Some(Err(e)) => out.push(error_entry(name, e)),
            Some(Ok(j)) => {
                let r = check_jacobi(&j);
                out.push(entry_from("jacobi.algebroid".into(), &r.algebroid, full));
                out.push(entry_from("jacobi.schouten".into(), &r.schouten, full));
                let agree = flag("jacobi.routes", r.routes_agree(), || "the two routes disagree".into());
                out.push(entry_from("jacobi.routes".into(), &agree, full));
            }
        },
        Check::Contact => {
            if st.theta.is_none() && st.atlas.is_empty() {
                out.push(error_entry(name, missing("[theta] section")));
            }
            if let Some(theta) = &st.theta {
                let c = contact_to_atiyah(theta);
                match c {
                    Err(e) => out.push(error_entry("contact.nondegenerate", e)),
                    Ok(c) => {
                        let r = flag("contact.nondegenerate", c.nondegenerate, || "Ω♭ is singular".into());
                        out.push(entry_from("contact.nondegenerate".into(), &r, full));
                        let mut closed = ResidualReport::new("contact.closed");
                        closed.record(|| "d_DL Ω".into(), &c.omega.d());
                        out.push(entry_from("contact.closed".into(), &closed, full));
                    }
                }
            }
            for a in &st.atlas {
                out.push(atlas_entry(st, a, full));
            }
        }
        Check::Hitchin => match d.hitchin() {
            None => out.push(error_entry(name, missing("[theta] section or nondegenerate [J]"))),
            Some(Err(e)) => out.push(error_entry(name, e)),
            Some(Ok(p)) => {
                let set = check_hitchin_pair(&p);
                push_set(&mut out, "hitchin", &set, full);
                if set.passed() {
                    let rt = gcs_from_hitchin(&p).and_then(|t| hitchin_from_gcs(&t));
                    match rt {
                        Ok(q) => {
                            let r = flag("hitchin.round_trip", q == p, || "round trip changed the pair".into());
                            out.push(entry_from("hitchin.round_trip".into(), &r, full));
                        }
                        Err(e) => out.push(error_entry("hitchin.round_trip", e)),
                    }
                }
            }
        },
        Check::Gc => {
            let g = match (&st.gc, &d.triple) {
                (Some(g), _) => Ok(g.clone()),
                (None, Some(Ok(t))) => Ok(homogenize(t)),
                (None, Some(Err(e))) => Err(e.to_string()),
                (None, None) => Err(missing("[gc-triple] or structure on M")),
            };
            match g {
                Err(e) => out.push(error_entry(name, e)),
                Ok(g) => {
                    let mut h = check_homogeneity(&g);
                    h.name = "gc.homogeneity".into();
                    out.push(entry_from(h.name.clone(), &h, full));
                    push_set(&mut out, "gc", &check_gc(&g), full);
                    let phi_zero = g.a.is_zero();
                    if let (Some(theta), true, None) = (&st.theta, phi_zero, &st.gc) {
                        let r = check_symplectization(&g, theta);
                        out.push(entry_from("gc.symplectization".into(), &r, full));
                    }
                }
            }
        }
        Check::Im => {
            if let (Some(a), Some(f)) = (&st.algebroid, &st.im) {
                out.push(entry_from("im.algebroid".into(), &check_lie_algebroid(a), full));
                out.push(entry_from("im.connection".into(), &check_flat_connection(a), full));
                match check_im_form(a, f) {
                    Ok(set) => push_set(&mut out, "im", &set, full),
                    Err(e) => out.push(error_entry("im.form", e)),
                }
            } else if let (Some(spec), Some(w)) = (&st.groupoid, &st.form) {
                let res = spec
                    .build(&st.chart)
                    .and_then(|g| induced_im_form(&g, w))
                    .and_then(|ind| Ok((check_im_form(&ind.algebroid, &ind.form)?, ind.connection)));
                match res {
                    Ok((set, conn)) => {
                        out.push(entry_from("im.induced_connection".into(), &conn, full));
                        push_set(&mut out, "im", &set, full);
                    }
                    Err(e) => out.push(error_entry(name, e)),
                }
            } else {
                out.push(error_entry(name, missing("[algebroid] + [im-form] or [groupoid] + [form]")));
            }
        }
        Check::Multiplicative => match (&st.groupoid, &st.form) {
            (Some(spec), Some(w)) => match spec.build(&st.chart) {
                Err(e) => out.push(error_entry(name, e)),
                Ok(g) => {
                    match check_groupoid(&g) {
                        Ok(r) => out.push(entry_from("multiplicative.groupoid".into(), &r, full)),
                        Err(e) => out.push(error_entry("multiplicative.groupoid", e)),
                    }
                    match check_multiplicative(&g, w) {
                        Ok(r) => out.push(entry_from("multiplicative.form".into(), &r, full)),
                        Err(e) => out.push(error_entry("multiplicative.form", e)),
                    }
                }
            },
            _ => out.push(error_entry(name, missing("[groupoid] + [form]"))),
        },
    }
    out
}

fn atlas_entry(st: &Structure, a: &crate::format::AtlasChart, full: bool) -> CheckEntry {
    let name = format!("contact.atlas.{}", a.name);
    let t = match TransitionData::new(a.map.clone(), a.kappa.clone()) {
        Ok(t) => t,
        Err(e) => return error_entry(name, e),
    };
    let mut r = ResidualReport::new(name.clone());
    let mut compared = false;
    if let (Some(local), Some(main)) = (&a.theta, &st.theta) {
        let lift = |th: &KForm| AtiyahForm::sigma_star(th, ValueKind::Line);
        match atlas_compat(&lift(local), &lift(main), &t) {
            Ok(rep) => {
                for (l, v) in rep.nonzero {
                    r.nonzero.push((format!("σ*θ: {l}"), v));
                }
                r.checked += rep.checked;
                compared = true;
            }
            Err(e) => return error_entry(name, e),
        }
    }
    if let (Some(local), Some(main)) = (&a.omega, &st.omega) {
        match atlas_compat(local, main, &t) {
            Ok(rep) => {
                for (l, v) in rep.nonzero {
                    r.nonzero.push((format!("ω: {l}"), v));
                }
                r.checked += rep.checked;
                compared = true;
            }
            Err(e) => return error_entry(name, e),
        }
    }
    if !compared {
        return error_entry(name, "no structure on both charts to compare");
    }
    entry_from(name, &r, full)
}

/// Run `checks` (all applicable ones when empty) and assemble the report.
pub fn run(st: &Structure, file: &str, checks: &[Check], full: bool) -> Report {
    let d = Derived::new(st);
    let selected: Vec<Check> = if checks.is_empty() {
        Check::ALL.into_iter().filter(|c| d.applicable(*c)).collect()
    } else {
        let mut v = checks.to_vec();
        v.sort();
        v.dedup();
        v
    };
    let mut entries = Vec::new();
    let mut timing = BTreeMap::new();
    for c in selected {
        let t0 = Instant::now();
        entries.extend(run_check(&d, c, full));
        timing.insert(c.name().to_string(), t0.elapsed().as_millis() as u64);
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let verdict = if entries.iter().any(|e| e.verdict == Verdict::Error) {
        Verdict::Error
    } else if entries.iter().all(|e| e.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Report {
        schema: SCHEMA,
        file: file.to_string(),
        verdict,
        conventions: CONVENTIONS.to_string(),
        checks: entries,
        timing_ms: timing,
    }
}
