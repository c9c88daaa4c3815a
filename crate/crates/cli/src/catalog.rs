//! The built-in examples, shipped verbatim with the binary.

use serde::Deserialize;
use std::collections::BTreeMap;

use crate::error::CliError;
use crate::run::Verdict;

pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

macro_rules! example {
    ($name:literal, $desc:literal) => {
        Example {
            name: $name,
            description: $desc,
            source: include_str!(concat!("../assets/catalog/", $name, ".gcb")),
        }
    };
}

pub const EXAMPLES: &[Example] = &[
    example!("contact_r3", "standard contact form dz - y dx on R^3"),
    example!("contact_r1", "the contact form dx on R"),
    example!("complex_dl_r1", "J = omega = 0 with phi a complex structure on DL over R"),
    example!("noncoorientable_ptr2", "non-coorientable contact structure on P(T*R^2), two charts"),
    example!("ptr2_wrong_cocycle", "noncoorientable_ptr2 with the cocycle sign broken"),
    example!("non_jacobi", "bivector dx^dy + x dx^dz with E = 0, not Jacobi"),
    example!("nonclosed_omega", "almost structure whose omega is not closed"),
    example!("pair_groupoid_r", "multiplicative coboundary form on the pair groupoid of R"),
    example!("pair_groupoid_nonmult", "non-multiplicative form on the pair groupoid of R"),
    example!("bundle_of_groups", "multiplicative form (da, a) on the bundle of groups R x R"),
];

pub const MANIFEST: &str = include_str!("../assets/catalog/manifest.json");

/// Expected verdicts of one example.
#[derive(Clone, Debug, Deserialize)]
pub struct Expected {
    pub verdict: Verdict,
    pub checks: BTreeMap<String, Verdict>,
}

pub fn manifest() -> BTreeMap<String, Expected> {
    serde_json::from_str(MANIFEST).expect("shipped manifest is valid JSON")
}

pub fn find(name: &str) -> Result<&'static Example, CliError> {
    EXAMPLES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::UnknownExample(name.to_string()))
}

pub fn listing() -> String {
    let w = EXAMPLES.iter().map(|e| e.name.len()).max().unwrap_or(0);
    EXAMPLES
        .iter()
        .map(|e| format!("{:w$}  {}\n", e.name, e.description))
        .collect()
}
