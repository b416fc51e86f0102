//! CSV and JSON writers. Numbers in CSV use 17 significant digits; JSON
//! uses the shortest representation that round-trips.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use bnlab::asymptotics::SweepRecord;
use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::Failure;

pub const PROFILE_HEADER: &str = "r,u,du";
pub const SWEEP_HEADER: &str = "eps_tilde,eps,mu,R_tilde,S_eps,blowup_product,deficit,profile_dist,upper_bound_ratio,nehari_residual,pohozaev_residual";

fn row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v:.16e}").unwrap();
    }
    s.push('\n');
    s
}

pub fn profile_csv(rows: &[[f64; 3]]) -> String {
    let mut s = format!("{PROFILE_HEADER}\n");
    for r in rows {
        s += &row(r);
    }
    s
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in records {
        s += &row(&[
            r.eps_tilde,
            r.eps,
            r.mu,
            r.r_tilde,
            r.s_eps,
            r.blowup_product,
            r.deficit,
            r.profile_dist,
            r.upper_bound_ratio,
            r.nehari_residual,
            r.pohozaev_residual,
        ]);
    }
    s
}

/// `{"schema_version": "1", ...body}`
pub fn json_document<T: Serialize>(body: &T) -> Result<String, Failure> {
    let mut value = serde_json::to_value(body).map_err(|e| Failure::Numerical(e.to_string()))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| Failure::Numerical("JSON body is not an object".into()))?;
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Failure::Numerical(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, contents),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}
