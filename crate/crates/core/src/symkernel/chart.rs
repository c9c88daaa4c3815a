use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::symkernel::poly::Var;
use crate::RationalExpr;

/// A coordinate chart: an ordered list of distinct coordinate names.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Chart {
    coords: Arc<[Var]>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidChart("a chart needs at least one coordinate".into()));
        }
        let mut seen = BTreeSet::new();
        for n in names {
            let n = n.as_ref();
            let valid = n
                .chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_')
                && n.chars().all(|c| c.is_alphanumeric() || c == '_');
            if !valid {
                return Err(Error::InvalidChart(format!("`{n}` is not an identifier")));
            }
            if !seen.insert(n.to_string()) {
                return Err(Error::InvalidChart(format!("duplicate coordinate `{n}`")));
            }
        }
        Ok(Chart {
            coords: names.iter().map(|n| Var::from(n.as_ref())).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn names(&self) -> &[Var] {
        &self.coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn name_set(&self) -> BTreeSet<String> {
        self.coords.iter().map(|v| v.to_string()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|v| &**v == name)
    }

    /// The `i`-th coordinate function.
    pub fn coord(&self, i: usize) -> RationalExpr {
        RationalExpr::var(&self.coords[i])
    }

    pub fn coords(&self) -> Vec<RationalExpr> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    /// `∂f/∂x_i`.
    pub fn partial(&self, f: &RationalExpr, i: usize) -> RationalExpr {
        f.derivative(&self.coords[i])
    }

    /// This chart with extra coordinates appended.
    pub fn extended<S: AsRef<str>>(&self, extra: &[S]) -> Result<Chart> {
        let mut names: Vec<String> = self.coords.iter().map(|v| v.to_string()).collect();
        names.extend(extra.iter().map(|s| s.as_ref().to_string()));
        Chart::new(&names)
    }

    /// A name not used by this chart, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut candidate = base.to_string();
        while self.index_of(&candidate).is_some() {
            candidate.push('_');
        }
        candidate
    }

    /// Multipliers used by the residual protocol: `1, x_1, …, x_n`.
    pub fn test_multipliers(&self) -> Vec<(String, RationalExpr)> {
        std::iter::once(("1".to_string(), RationalExpr::from_i64(1)))
            .chain((0..self.dim()).map(|i| (self.name(i).to_string(), self.coord(i))))
            .collect()
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.coords.iter().map(|v| &**v).collect();
        write!(f, "({})", names.join(", "))
    }
}

/// A rational map between charts, given by the target coordinates as
/// functions of the source coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChartMap {
    source: Chart,
    target: Chart,
    comps: Vec<RationalExpr>,
}

impl ChartMap {
    pub fn new(source: Chart, target: Chart, comps: Vec<RationalExpr>) -> Result<Self> {
        if comps.len() != target.dim() {
            return Err(Error::BadArity(format!(
                "map into {target} needs {} components, got {}",
                target.dim(),
                comps.len()
            )));
        }
        let allowed = source.name_set();
        for c in &comps {
            for v in c.numer().vars().iter().chain(c.denom().vars().iter()) {
                if !allowed.contains(&**v) {
                    return Err(Error::UndeclaredCoordinate(v.to_string()));
                }
            }
        }
        Ok(ChartMap {
            source,
            target,
            comps,
        })
    }

    pub fn identity(chart: &Chart) -> Self {
        ChartMap {
            source: chart.clone(),
            target: chart.clone(),
            comps: chart.coords(),
        }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn components(&self) -> &[RationalExpr] {
        &self.comps
    }

    fn substitution(&self) -> BTreeMap<Var, RationalExpr> {
        self.target
            .names()
            .iter()
            .cloned()
            .zip(self.comps.iter().cloned())
            .collect()
    }

    /// `f ∘ F` for a function `f` on the target chart.
    pub fn pull_function(&self, f: &RationalExpr) -> Result<RationalExpr> {
        f.substitute(&self.substitution())
    }

    /// `G ∘ F` where `self = F` and `G: target → …`.
    pub fn then(&self, g: &ChartMap) -> Result<ChartMap> {
        if g.source != self.target {
            return Err(Error::ChartMismatch);
        }
        let comps = g
            .comps
            .iter()
            .map(|c| self.pull_function(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChartMap {
            source: self.source.clone(),
            target: g.target.clone(),
            comps,
        })
    }

    /// Jacobian entries `∂F_i/∂u_j` (rows: target, columns: source).
    pub fn jacobian(&self) -> crate::Matrix {
        crate::Matrix::from_fn(self.target.dim(), self.source.dim(), |i, j| {
            self.source.partial(&self.comps[i], j)
        })
    }
}
