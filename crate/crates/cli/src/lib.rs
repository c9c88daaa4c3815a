//! Command-line front end: structure files, check dispatch, reports and the
//! examples catalog.

pub mod catalog;
pub mod error;
pub mod format;
pub mod run;

use std::path::Path;

use gcbundle::homog::{dehomogenize, homogenize};
use gcbundle::imgroupoid::induced_im_form;

pub use error::CliError;
pub use format::{parse, serialize, Structure};
pub use run::{run, Check, Report, Verdict};

/// Read a structure file. A missing path of the form `examples/NAME` or
/// `NAME` falls back to the built-in catalog.
pub fn load(path: &str) -> Result<(String, Structure), CliError> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            let name = Path::new(path).file_name().and_then(|s| s.to_str()).unwrap_or(path);
            let name = name.strip_suffix(".gcb").unwrap_or(name);
            match catalog::find(name) {
                Ok(ex) => ex.source.to_string(),
                Err(_) => {
                    return Err(CliError::Io {
                        path: path.to_string(),
                        source: e,
                    })
                }
            }
        }
        Err(e) => {
            return Err(CliError::Io {
                path: path.to_string(),
                source: e,
            })
        }
    };
    let st = parse(&src)?;
    Ok((src, st))
}

/// The homogenized structure on `M × R` in file form.
pub fn homogenize_structure(st: &Structure) -> Result<Structure, CliError> {
    let t = run::triple_of(st)?;
    let mut out = Structure::new(st.chart.clone());
    out.gc = Some(homogenize(&t));
    Ok(out)
}

pub fn dehomogenize_structure(st: &Structure) -> Result<Structure, CliError> {
    let g = st
        .gc
        .as_ref()
        .ok_or_else(|| CliError::Unsupported("dehomogenize needs a [gc-triple] section".into()))?;
    let t = dehomogenize(g)?;
    let mut out = Structure::new(st.chart.clone());
    out.phi = Some(t.phi);
    out.j = Some(t.j);
    out.omega = Some(t.omega);
    Ok(out)
}

pub fn induce_im_structure(st: &Structure) -> Result<Structure, CliError> {
    let (Some(spec), Some(w)) = (&st.groupoid, &st.form) else {
        return Err(CliError::Unsupported("induce-im needs [groupoid] and [form] sections".into()));
    };
    let ind = spec
        .build(&st.chart)
        .and_then(|g| induced_im_form(&g, w))
        ?;
    let mut out = Structure::new(st.chart.clone());
    out.algebroid = Some(ind.algebroid);
    out.im = Some(ind.form);
    Ok(out)
}
