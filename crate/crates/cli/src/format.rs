//! The structure-definition file format.
//!
//! ```text
//! # standard contact structure
//! [manifold]
//! coords = x, y, z
//!
//! [linebundle]
//! kind = trivial
//!
//! [theta]
//! x = -y
//! z = 1
//! ```
//!
//! Sections are `[name]` or `[name tag]`; entries are `key = value`, and `#`
//! starts a comment. Component keys name coordinates, e.g. `w0.x.y` for the
//! `dx∧dy` component of `ω₀`. Frame indices of algebroids are 1-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use gcbundle::atiyah::{AtiyahForm, EndoDL, JacobiBivector, ValueKind};
use gcbundle::homog::GcTriple;
use gcbundle::imgroupoid::{GroupoidPresentation, ImForm, LieAlgebroidPresentation};
use gcbundle::{parse_expr_in, Chart, ChartMap, KForm, Matrix, Polyvector, RationalExpr, TangentEndo, VectorField};
use num_traits::Zero;

use crate::error::CliError;

/// A line bundle chart besides the main one, with the transition into the
/// main chart and structure data on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasChart {
    pub name: String,
    pub chart: Chart,
    /// Main-chart coordinates in terms of this chart's coordinates.
    pub map: ChartMap,
    pub kappa: RationalExpr,
    pub theta: Option<KForm>,
    pub omega: Option<AtiyahForm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupoidSpec {
    /// `Δ(g) = h(t(g))/h(s(g))`; `None` is the trivial cocycle.
    Pair { h: Option<RationalExpr> },
    BundleOfGroups { fiber: Vec<String> },
}

impl GroupoidSpec {
    pub fn build(&self, base: &Chart) -> gcbundle::Result<GroupoidPresentation> {
        match self {
            GroupoidSpec::Pair { h } => GroupoidPresentation::pair(base, h.as_ref()),
            GroupoidSpec::BundleOfGroups { fiber } => {
                let f: Vec<&str> = fiber.iter().map(String::as_str).collect();
                GroupoidPresentation::bundle_of_groups(base, &f)
            }
        }
    }
}

/// A parsed structure file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    pub chart: Chart,
    pub atlas: Vec<AtlasChart>,
    pub theta: Option<KForm>,
    pub phi: Option<EndoDL>,
    pub j: Option<JacobiBivector>,
    pub omega: Option<AtiyahForm>,
    pub gc: Option<GcTriple>,
    pub algebroid: Option<LieAlgebroidPresentation>,
    pub im: Option<ImForm>,
    pub groupoid: Option<GroupoidSpec>,
    /// An `L`-valued Atiyah form on the arrows of `groupoid`.
    pub form: Option<AtiyahForm>,
}

impl Structure {
    pub fn new(chart: Chart) -> Self {
        Structure {
            chart,
            atlas: Vec::new(),
            theta: None,
            phi: None,
            j: None,
            omega: None,
            gc: None,
            algebroid: None,
            im: None,
            groupoid: None,
            form: None,
        }
    }
}

struct RawEntry {
    key: String,
    value: String,
    line: usize,
    column: usize,
}

struct RawSection {
    name: String,
    tag: Option<String>,
    line: usize,
    entries: Vec<RawEntry>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_')
}

fn split_sections(src: &str) -> Result<Vec<RawSection>, CliError> {
    let mut out: Vec<RawSection> = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("");
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = text.chars().count() - text.trim_start().chars().count();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, indent + 1, "section header needs a closing `]`"))?;
            let mut words = inner.split_whitespace();
            let name = words.next().ok_or_else(|| syntax(line, indent + 1, "empty section name"))?;
            let tag = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(syntax(line, indent + 1, "a section header has at most a name and a tag"));
            }
            out.push(RawSection {
                name: name.to_string(),
                tag,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let eq = text
            .find('=')
            .ok_or_else(|| syntax(line, indent + 1, "expected `key = value`"))?;
        let key = text[..eq].trim().to_string();
        if key.is_empty() {
            return Err(syntax(line, indent + 1, "missing key"));
        }
        let after = &text[eq + 1..];
        let lead = after.chars().count() - after.trim_start().chars().count();
        let column = text[..eq].chars().count() + 2 + lead;
        let section = out
            .last_mut()
            .ok_or_else(|| syntax(line, indent + 1, "entry outside of any section"))?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(syntax(line, indent + 1, format!("duplicate key `{key}`")));
        }
        section.entries.push(RawEntry {
            key,
            value: after.trim().to_string(),
            line,
            column,
        });
    }
    Ok(out)
}

fn expr(entry: &RawEntry, coords: &BTreeSet<String>) -> Result<RationalExpr, CliError> {
    parse_expr_in(&entry.value, coords).map_err(|e| match e {
        gcbundle::Error::Parse { column, message } => syntax(entry.line, entry.column + column - 1, message),
        gcbundle::Error::UndeclaredCoordinate(name) => CliError::UndeclaredCoordinate { line: entry.line, name },
        other => CliError::Engine {
            line: entry.line,
            source: other,
        },
    })
}

fn names_list(entry: &RawEntry) -> Result<Vec<String>, CliError> {
    let names: Vec<String> = entry.value.split(',').map(|s| s.trim().to_string()).collect();
    if let Some(bad) = names.iter().find(|n| !is_ident(n)) {
        return Err(syntax(entry.line, entry.column, format!("`{bad}` is not an identifier")));
    }
    Ok(names)
}

fn small_int(entry: &RawEntry) -> Result<usize, CliError> {
    entry
        .value
        .parse()
        .map_err(|_| syntax(entry.line, entry.column, "expected a nonnegative integer"))
}

fn engine(line: usize) -> impl Fn(gcbundle::Error) -> CliError {
    move |source| CliError::Engine { line, source }
}

fn bad_key(entry: &RawEntry, section: &str) -> CliError {
    syntax(entry.line, 1, format!("unknown key `{}` in [{section}]", entry.key))
}

/// Resolve dotted coordinate names after `prefix.` into chart indices.
fn coord_indices(entry: &RawEntry, parts: &[&str], chart: &Chart) -> Result<Vec<usize>, CliError> {
    parts
        .iter()
        .map(|p| {
            chart.index_of(p).ok_or_else(|| CliError::UndeclaredCoordinate {
                line: entry.line,
                name: p.to_string(),
            })
        })
        .collect()
}

fn frame_index(entry: &RawEntry, s: &str, rank: usize) -> Result<usize, CliError> {
    match s.parse::<usize>() {
        Ok(i) if (1..=rank).contains(&i) => Ok(i - 1),
        _ => Err(syntax(entry.line, 1, format!("frame index `{s}` out of range 1..={rank}"))),
    }
}

/// `w0.<idx>` / `w1.<idx>` components of an Atiyah form of `degree`.
#[derive(Default)]
struct FormParts {
    w0: Vec<(Vec<usize>, RationalExpr)>,
    w1: Vec<(Vec<usize>, RationalExpr)>,
}

impl FormParts {
    fn take(&mut self, entry: &RawEntry, rest: &[&str], chart: &Chart, degree: usize) -> Result<(), CliError> {
        let (which, idx) = rest.split_first().ok_or_else(|| syntax(entry.line, 1, "missing w0/w1"))?;
        let want = match *which {
            "w0" => degree,
            "w1" if degree > 0 => degree - 1,
            _ => return Err(syntax(entry.line, 1, format!("unexpected `{which}` for a {degree}-form"))),
        };
        if idx.len() != want {
            return Err(syntax(entry.line, 1, format!("`{which}` of a {degree}-form takes {want} indices")));
        }
        let idx = coord_indices(entry, idx, chart)?;
        let v = expr(entry, &chart.name_set())?;
        if *which == "w0" {
            self.w0.push((idx, v));
        } else {
            self.w1.push((idx, v));
        }
        Ok(())
    }

    fn build(self, chart: &Chart, degree: usize, line: usize) -> Result<AtiyahForm, CliError> {
        let w0 = KForm::from_components(chart, degree, self.w0).map_err(engine(line))?;
        let w1 = if degree > 0 {
            Some(KForm::from_components(chart, degree - 1, self.w1).map_err(engine(line))?)
        } else {
            None
        };
        AtiyahForm::new(ValueKind::Line, w0, w1).map_err(engine(line))
    }
}

fn one_form(sec: &RawSection, chart: &Chart) -> Result<KForm, CliError> {
    let coords = chart.name_set();
    let mut comps = Vec::new();
    for e in &sec.entries {
        let i = chart.index_of(&e.key).ok_or_else(|| CliError::UndeclaredCoordinate {
            line: e.line,
            name: e.key.clone(),
        })?;
        comps.push((vec![i], expr(e, &coords)?));
    }
    KForm::from_components(chart, 1, comps).map_err(engine(sec.line))
}

fn omega_section(sec: &RawSection, chart: &Chart) -> Result<AtiyahForm, CliError> {
    let mut parts = FormParts::default();
    for e in &sec.entries {
        let keys: Vec<&str> = e.key.split('.').collect();
        parts.take(e, &keys, chart, 2)?;
    }
    parts.build(chart, 2, sec.line)
}

fn phi_section(sec: &RawSection, chart: &Chart) -> Result<EndoDL, CliError> {
    let n = chart.dim();
    let coords = chart.name_set();
    let mut m = Matrix::zeros(n + 1, n + 1);
    for e in &sec.entries {
        let keys: Vec<&str> = e.key.split('.').collect();
        let (i, j) = match keys.as_slice() {
            ["a", r, c] => {
                let idx = coord_indices(e, &[r, c], chart)?;
                (idx[0], idx[1])
            }
            ["b", r] => (coord_indices(e, &[r], chart)?[0], n),
            ["xi", c] => (n, coord_indices(e, &[c], chart)?[0]),
            ["c"] => (n, n),
            _ => return Err(bad_key(e, "phi")),
        };
        m.set(i, j, expr(e, &coords)?);
    }
    EndoDL::from_matrix(chart, m).map_err(engine(sec.line))
}

fn jacobi_section(sec: &RawSection, chart: &Chart) -> Result<JacobiBivector, CliError> {
    let coords = chart.name_set();
    let mut lambda = Vec::new();
    let mut e_comps = vec![RationalExpr::zero(); chart.dim()];
    for e in &sec.entries {
        let keys: Vec<&str> = e.key.split('.').collect();
        match keys.as_slice() {
            ["lambda", a, b] => lambda.push((coord_indices(e, &[a, b], chart)?, expr(e, &coords)?)),
            ["E", a] => e_comps[coord_indices(e, &[a], chart)?[0]] = expr(e, &coords)?,
            _ => return Err(bad_key(e, "J")),
        }
    }
    let lambda = Polyvector::from_components(chart, 2, lambda).map_err(engine(sec.line))?;
    let e = VectorField::new(chart, e_comps).map_err(engine(sec.line))?;
    JacobiBivector::new(lambda, e).map_err(engine(sec.line))
}

fn gc_section(sec: &RawSection, base: &Chart) -> Result<GcTriple, CliError> {
    let fiber = sec
        .entries
        .iter()
        .find(|e| e.key == "fiber")
        .ok_or_else(|| syntax(sec.line, 1, "[gc-triple] needs `fiber = <name>`"))?;
    if !is_ident(&fiber.value) {
        return Err(syntax(fiber.line, fiber.column, "fiber coordinate must be an identifier"));
    }
    let chart = base.extended(&[fiber.value.as_str()]).map_err(engine(fiber.line))?;
    let coords = chart.name_set();
    let n = chart.dim();
    let mut a = Matrix::zeros(n, n);
    let mut pi = Vec::new();
    let mut sigma = Vec::new();
    for e in sec.entries.iter().filter(|e| e.key != "fiber") {
        let keys: Vec<&str> = e.key.split('.').collect();
        match keys.as_slice() {
            ["a", r, c] => {
                let idx = coord_indices(e, &[r, c], &chart)?;
                a.set(idx[0], idx[1], expr(e, &coords)?);
            }
            ["pi", p, q] => pi.push((coord_indices(e, &[p, q], &chart)?, expr(e, &coords)?)),
            ["sigma", p, q] => sigma.push((coord_indices(e, &[p, q], &chart)?, expr(e, &coords)?)),
            _ => return Err(bad_key(e, "gc-triple")),
        }
    }
    let line = sec.line;
    let a = TangentEndo::new(&chart, a).map_err(engine(line))?;
    let pi = Polyvector::from_components(&chart, 2, pi).map_err(engine(line))?;
    let sigma = KForm::from_components(&chart, 2, sigma).map_err(engine(line))?;
    GcTriple::new(base, a, pi, sigma).map_err(engine(line))
}

fn algebroid_section(sec: &RawSection, chart: &Chart) -> Result<LieAlgebroidPresentation, CliError> {
    let rank_entry = sec
        .entries
        .iter()
        .find(|e| e.key == "rank")
        .ok_or_else(|| syntax(sec.line, 1, "[algebroid] needs `rank = <m>`"))?;
    let m = small_int(rank_entry)?;
    let n = chart.dim();
    let coords = chart.name_set();
    let mut anchor = Matrix::zeros(m, n);
    let mut c = vec![vec![vec![RationalExpr::zero(); m]; m]; m];
    let mut gamma = vec![RationalExpr::zero(); m];
    for e in sec.entries.iter().filter(|e| e.key != "rank") {
        let keys: Vec<&str> = e.key.split('.').collect();
        match keys.as_slice() {
            ["anchor", i, x] => {
                let i = frame_index(e, i, m)?;
                let x = coord_indices(e, &[x], chart)?[0];
                anchor.set(i, x, expr(e, &coords)?);
            }
            ["c", i, j, k] => {
                let (i, j, k) = (frame_index(e, i, m)?, frame_index(e, j, m)?, frame_index(e, k, m)?);
                if i == j {
                    return Err(syntax(e.line, 1, "structure functions vanish on equal indices"));
                }
                let v = expr(e, &coords)?;
                c[j][i][k] = -&v;
                c[i][j][k] = v;
            }
            ["gamma", i] => gamma[frame_index(e, i, m)?] = expr(e, &coords)?,
            _ => return Err(bad_key(e, "algebroid")),
        }
    }
    LieAlgebroidPresentation::new(chart, &anchor, c, gamma).map_err(engine(sec.line))
}

fn im_section(sec: &RawSection, chart: &Chart, rank: usize) -> Result<ImForm, CliError> {
    let deg_entry = sec
        .entries
        .iter()
        .find(|e| e.key == "degree")
        .ok_or_else(|| syntax(sec.line, 1, "[im-form] needs `degree = <k>`"))?;
    let k = small_int(deg_entry)?;
    if k == 0 {
        return Err(syntax(deg_entry.line, deg_entry.column, "IM forms have degree at least 1"));
    }
    let mut l: Vec<FormParts> = (0..rank).map(|_| FormParts::default()).collect();
    let mut d: Vec<FormParts> = (0..rank).map(|_| FormParts::default()).collect();
    for e in sec.entries.iter().filter(|e| e.key != "degree") {
        let keys: Vec<&str> = e.key.split('.').collect();
        match keys.as_slice() {
            ["l", i, rest @ ..] => l[frame_index(e, i, rank)?].take(e, rest, chart, k - 1)?,
            ["d", i, rest @ ..] => d[frame_index(e, i, rank)?].take(e, rest, chart, k)?,
            _ => return Err(bad_key(e, "im-form")),
        }
    }
    let line = sec.line;
    let l = l.into_iter().map(|p| p.build(chart, k - 1, line)).collect::<Result<Vec<_>, _>>()?;
    let d = d.into_iter().map(|p| p.build(chart, k, line)).collect::<Result<Vec<_>, _>>()?;
    ImForm::new(chart, k, l, d).map_err(engine(line))
}

fn groupoid_section(sec: &RawSection, chart: &Chart) -> Result<GroupoidSpec, CliError> {
    let get = |k: &str| sec.entries.iter().find(|e| e.key == k);
    for e in &sec.entries {
        if !["kind", "cocycle", "fiber"].contains(&e.key.as_str()) {
            return Err(bad_key(e, "groupoid"));
        }
    }
    let kind = get("kind").ok_or_else(|| syntax(sec.line, 1, "[groupoid] needs `kind`"))?;
    match kind.value.as_str() {
        "pair" => {
            if let Some(f) = get("fiber") {
                return Err(syntax(f.line, 1, "pair groupoids have no fiber"));
            }
            let h = get("cocycle").map(|e| expr(e, &chart.name_set())).transpose()?;
            Ok(GroupoidSpec::Pair { h })
        }
        "bundle-of-groups" => {
            if let Some(c) = get("cocycle") {
                return Err(syntax(c.line, 1, "bundles of groups carry the trivial cocycle"));
            }
            let f = get("fiber").ok_or_else(|| syntax(sec.line, 1, "bundle-of-groups needs `fiber`"))?;
            Ok(GroupoidSpec::BundleOfGroups { fiber: names_list(f)? })
        }
        other => Err(syntax(
            kind.line,
            kind.column,
            format!("unknown groupoid kind `{other}` (pair | bundle-of-groups)"),
        )),
    }
}

fn form_section(sec: &RawSection, arrows: &Chart) -> Result<AtiyahForm, CliError> {
    let deg_entry = sec
        .entries
        .iter()
        .find(|e| e.key == "degree")
        .ok_or_else(|| syntax(sec.line, 1, "[form] needs `degree = <k>`"))?;
    let k = small_int(deg_entry)?;
    let mut parts = FormParts::default();
    for e in sec.entries.iter().filter(|e| e.key != "degree") {
        let keys: Vec<&str> = e.key.split('.').collect();
        parts.take(e, &keys, arrows, k)?;
    }
    parts.build(arrows, k, sec.line)
}

fn chart_section(sec: &RawSection, main: &Chart) -> Result<(Chart, ChartMap, RationalExpr), CliError> {
    let name = sec.tag.as_deref().unwrap_or_default();
    let coords_entry = sec
        .entries
        .iter()
        .find(|e| e.key == "coords")
        .ok_or_else(|| syntax(sec.line, 1, format!("[chart {name}] needs `coords`")))?;
    let chart = Chart::new(&names_list(coords_entry)?).map_err(engine(coords_entry.line))?;
    let local = chart.name_set();
    let mut comps: Vec<Option<RationalExpr>> = vec![None; main.dim()];
    let mut kappa = None;
    for e in sec.entries.iter().filter(|e| e.key != "coords") {
        let keys: Vec<&str> = e.key.split('.').collect();
        match keys.as_slice() {
            ["map", x] => comps[coord_indices(e, &[x], main)?[0]] = Some(expr(e, &local)?),
            ["kappa"] => kappa = Some(expr(e, &local)?),
            _ => return Err(bad_key(e, "chart")),
        }
    }
    let comps = comps
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| syntax(sec.line, 1, format!("missing `map.{}`", main.name(i)))))
        .collect::<Result<Vec<_>, _>>()?;
    let kappa = kappa.ok_or_else(|| syntax(sec.line, 1, "missing `kappa`"))?;
    let map = ChartMap::new(chart.clone(), main.clone(), comps).map_err(engine(sec.line))?;
    if kappa.is_zero() {
        return Err(CliError::Engine {
            line: sec.line,
            source: gcbundle::Error::NonInvertibleCocycle,
        });
    }
    Ok((chart, map, kappa))
}

const KNOWN: &[&str] = &[
    "manifold",
    "linebundle",
    "chart",
    "theta",
    "phi",
    "J",
    "omega",
    "gc-triple",
    "algebroid",
    "im-form",
    "groupoid",
    "form",
];

/// Parse a structure file.
pub fn parse(src: &str) -> Result<Structure, CliError> {
    let sections = split_sections(src)?;
    let mut seen = BTreeSet::new();
    for s in &sections {
        if !KNOWN.contains(&s.name.as_str()) {
            return Err(syntax(s.line, 2, format!("unknown section [{}]", s.name)));
        }
        let taggable = matches!(s.name.as_str(), "chart" | "theta" | "omega");
        if s.tag.is_some() && !taggable {
            return Err(syntax(s.line, 2, format!("[{}] takes no tag", s.name)));
        }
        if s.name == "chart" && s.tag.is_none() {
            return Err(syntax(s.line, 2, "[chart] needs a name"));
        }
        if !seen.insert((s.name.clone(), s.tag.clone())) {
            return Err(syntax(s.line, 2, format!("duplicate section [{}]", s.name)));
        }
    }
    let find = |name: &str| sections.iter().find(|s| s.name == name && s.tag.is_none());

    let manifold = find("manifold").ok_or_else(|| syntax(1, 1, "missing [manifold] section"))?;
    let coords = manifold
        .entries
        .iter()
        .find(|e| e.key == "coords")
        .ok_or_else(|| syntax(manifold.line, 1, "[manifold] needs `coords`"))?;
    if let Some(e) = manifold.entries.iter().find(|e| e.key != "coords") {
        return Err(bad_key(e, "manifold"));
    }
    let chart = Chart::new(&names_list(coords)?).map_err(engine(coords.line))?;
    let mut st = Structure::new(chart.clone());

    let atlas_kind = match find("linebundle") {
        None => false,
        Some(lb) => {
            if let Some(e) = lb.entries.iter().find(|e| e.key != "kind") {
                return Err(bad_key(e, "linebundle"));
            }
            match lb.entries.iter().find(|e| e.key == "kind").map(|e| (e, e.value.as_str())) {
                None | Some((_, "trivial")) => false,
                Some((_, "atlas")) => true,
                Some((e, other)) => {
                    return Err(syntax(e.line, e.column, format!("unknown line bundle kind `{other}`")))
                }
            }
        }
    };
    let chart_secs: Vec<&RawSection> = sections.iter().filter(|s| s.name == "chart").collect();
    if atlas_kind && chart_secs.is_empty() {
        return Err(syntax(1, 1, "an atlas line bundle needs at least one [chart <name>]"));
    }
    if !atlas_kind {
        if let Some(s) = chart_secs.first() {
            return Err(syntax(s.line, 2, "[chart] sections need `kind = atlas` in [linebundle]"));
        }
    }
    for s in &sections {
        if let Some(tag) = &s.tag {
            if s.name != "chart" && !chart_secs.iter().any(|c| c.tag.as_ref() == Some(tag)) {
                return Err(syntax(s.line, 2, format!("no chart named `{tag}`")));
            }
        }
    }
    for cs in chart_secs {
        let name = cs.tag.clone().expect("checked above");
        let (local, map, kappa) = chart_section(cs, &chart)?;
        let tagged = |n: &str| sections.iter().find(|s| s.name == n && s.tag.as_deref() == Some(&name));
        let theta = tagged("theta").map(|s| one_form(s, &local)).transpose()?;
        let omega = tagged("omega").map(|s| omega_section(s, &local)).transpose()?;
        st.atlas.push(AtlasChart {
            name,
            chart: local,
            map,
            kappa,
            theta,
            omega,
        });
    }

    st.theta = find("theta").map(|s| one_form(s, &chart)).transpose()?;
    st.phi = find("phi").map(|s| phi_section(s, &chart)).transpose()?;
    st.j = find("J").map(|s| jacobi_section(s, &chart)).transpose()?;
    st.omega = find("omega").map(|s| omega_section(s, &chart)).transpose()?;
    st.gc = find("gc-triple").map(|s| gc_section(s, &chart)).transpose()?;
    st.algebroid = find("algebroid").map(|s| algebroid_section(s, &chart)).transpose()?;
    if let Some(s) = find("im-form") {
        let rank = st
            .algebroid
            .as_ref()
            .ok_or_else(|| syntax(s.line, 1, "[im-form] needs an [algebroid] section"))?
            .rank();
        st.im = Some(im_section(s, &chart, rank)?);
    }
    st.groupoid = find("groupoid").map(|s| groupoid_section(s, &chart)).transpose()?;
    if let Some(s) = find("form") {
        let spec = st
            .groupoid
            .as_ref()
            .ok_or_else(|| syntax(s.line, 1, "[form] needs a [groupoid] section"))?;
        let g = spec.build(&chart).map_err(engine(s.line))?;
        st.form = Some(form_section(s, &g.arrows)?);
    }
    Ok(st)
}

fn join_names(chart: &Chart) -> String {
    chart.names().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn idx_key(chart: &Chart, idx: &[usize]) -> String {
    idx.iter().map(|&i| chart.name(i)).collect::<Vec<_>>().join(".")
}

fn write_kform(out: &mut String, prefix: &str, form: &KForm) {
    for (idx, v) in form.components() {
        if v.is_zero() {
            continue;
        }
        let key = idx_key(form.chart(), idx);
        let key = match (prefix.is_empty(), key.is_empty()) {
            (true, _) => key,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{key}"),
        };
        let _ = writeln!(out, "{key} = {v}");
    }
}

fn write_atiyah(out: &mut String, prefix: &str, form: &AtiyahForm) {
    let p = |w: &str| if prefix.is_empty() { w.to_string() } else { format!("{prefix}.{w}") };
    write_kform(out, &p("w0"), form.comp0());
    if let Some(w1) = form.comp1() {
        write_kform(out, &p("w1"), w1);
    }
}

fn write_matrix(out: &mut String, prefix: &str, chart: &Chart, m: &Matrix) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if !v.is_zero() {
                let _ = writeln!(out, "{prefix}.{}.{} = {v}", chart.name(i), chart.name(j));
            }
        }
    }
}

/// Render in the canonical form accepted by [`parse`].
pub fn serialize(st: &Structure) -> String {
    let chart = &st.chart;
    let n = chart.dim();
    let mut out = String::new();
    let _ = writeln!(out, "[manifold]\ncoords = {}", join_names(chart));
    let kind = if st.atlas.is_empty() { "trivial" } else { "atlas" };
    let _ = writeln!(out, "\n[linebundle]\nkind = {kind}");
    for a in &st.atlas {
        let _ = writeln!(out, "\n[chart {}]\ncoords = {}", a.name, join_names(&a.chart));
        for (i, c) in a.map.components().iter().enumerate() {
            let _ = writeln!(out, "map.{} = {c}", chart.name(i));
        }
        let _ = writeln!(out, "kappa = {}", a.kappa);
        if let Some(t) = &a.theta {
            let _ = writeln!(out, "\n[theta {}]", a.name);
            write_kform(&mut out, "", t);
        }
        if let Some(w) = &a.omega {
            let _ = writeln!(out, "\n[omega {}]", a.name);
            write_atiyah(&mut out, "", w);
        }
    }
    if let Some(t) = &st.theta {
        out.push_str("\n[theta]\n");
        write_kform(&mut out, "", t);
    }
    if let Some(phi) = &st.phi {
        out.push_str("\n[phi]\n");
        let m = phi.matrix();
        write_matrix(&mut out, "a", chart, &m.submatrix(0, 0, n, n));
        for i in 0..n {
            if !m.get(i, n).is_zero() {
                let _ = writeln!(out, "b.{} = {}", chart.name(i), m.get(i, n));
            }
        }
        for j in 0..n {
            if !m.get(n, j).is_zero() {
                let _ = writeln!(out, "xi.{} = {}", chart.name(j), m.get(n, j));
            }
        }
        if !m.get(n, n).is_zero() {
            let _ = writeln!(out, "c = {}", m.get(n, n));
        }
    }
    if let Some(j) = &st.j {
        out.push_str("\n[J]\n");
        for (idx, v) in j.lambda.components() {
            if !v.is_zero() {
                let _ = writeln!(out, "lambda.{} = {v}", idx_key(chart, idx));
            }
        }
        for (i, v) in j.e.components().iter().enumerate() {
            if !v.is_zero() {
                let _ = writeln!(out, "E.{} = {v}", chart.name(i));
            }
        }
    }
    if let Some(w) = &st.omega {
        out.push_str("\n[omega]\n");
        write_atiyah(&mut out, "", w);
    }
    if let Some(g) = &st.gc {
        let total = g.chart();
        let _ = writeln!(out, "\n[gc-triple]\nfiber = {}", g.fiber_name());
        write_matrix(&mut out, "a", total, g.a.matrix());
        for (idx, v) in g.pi.components() {
            if !v.is_zero() {
                let _ = writeln!(out, "pi.{} = {v}", idx_key(total, idx));
            }
        }
        write_kform(&mut out, "sigma", &g.sigma);
    }
    if let Some(a) = &st.algebroid {
        let m = a.rank();
        let _ = writeln!(out, "\n[algebroid]\nrank = {m}");
        let anchor = a.anchor_matrix();
        for i in 0..m {
            for x in 0..n {
                let v = anchor.get(i, x);
                if !v.is_zero() {
                    let _ = writeln!(out, "anchor.{}.{} = {v}", i + 1, chart.name(x));
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                for k in 0..m {
                    let v = a.structure(i, j, k);
                    if !v.is_zero() {
                        let _ = writeln!(out, "c.{}.{}.{} = {v}", i + 1, j + 1, k + 1);
                    }
                }
            }
        }
        for (i, v) in a.connection_coeffs().iter().enumerate() {
            if !v.is_zero() {
                let _ = writeln!(out, "gamma.{} = {v}", i + 1);
            }
        }
    }
    if let Some(f) = &st.im {
        let _ = writeln!(out, "\n[im-form]\ndegree = {}", f.degree());
        for (i, l) in f.l_frame().iter().enumerate() {
            write_atiyah(&mut out, &format!("l.{}", i + 1), l);
        }
        for (i, d) in f.d_frame().iter().enumerate() {
            write_atiyah(&mut out, &format!("d.{}", i + 1), d);
        }
    }
    if let Some(g) = &st.groupoid {
        out.push_str("\n[groupoid]\n");
        match g {
            GroupoidSpec::Pair { h } => {
                out.push_str("kind = pair\n");
                if let Some(h) = h {
                    let _ = writeln!(out, "cocycle = {h}");
                }
            }
            GroupoidSpec::BundleOfGroups { fiber } => {
                let _ = writeln!(out, "kind = bundle-of-groups\nfiber = {}", fiber.join(", "));
            }
        }
    }
    if let Some(w) = &st.form {
        let _ = writeln!(out, "\n[form]\ndegree = {}", w.degree());
        write_atiyah(&mut out, "", w);
    }
    out
}
