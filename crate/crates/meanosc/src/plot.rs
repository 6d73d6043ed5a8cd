//! CSV tables for external plotting.

use std::path::Path;

use meanosc_core::holder::Thm2Record;
use meanosc_core::{AlphaProfile, StepFunction};

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> csv::Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per step: the step's right end, its level, and `f**` there.
pub fn rearrangement(dir: &Path, f: &StepFunction) -> csv::Result<()> {
    write_rows(
        &dir.join("rearrangement.csv"),
        &["t_end", "fstar", "fstarstar"],
        f.steps().map(|(t, level)| {
            let avg = f.average(t).unwrap_or(level);
            vec![t.to_string(), level.to_string(), avg.to_string()]
        }),
    )
}

pub fn alpha_profile(dir: &Path, profile: &[AlphaProfile]) -> csv::Result<()> {
    write_rows(
        &dir.join("alpha_profile.csv"),
        &["beta", "alpha_star"],
        profile
            .iter()
            .map(|p| vec![p.beta.to_string(), p.alpha_star.to_string()]),
    )
}

pub fn theorem2(dir: &Path, records: &[Thm2Record]) -> csv::Result<()> {
    write_rows(
        &dir.join("theorem2.csv"),
        &[
            "t",
            "fstar",
            "fstarstar",
            "k_nominal",
            "k_achieved",
            "holds",
        ],
        records.iter().map(|r| {
            vec![
                r.t.to_string(),
                r.fstar.to_string(),
                r.fstarstar.to_string(),
                r.k_nominal.to_string(),
                r.k_achieved.to_string(),
                r.holds.to_string(),
            ]
        }),
    )
}

pub fn rh_curve(dir: &Path, curve: &[(f64, f64)]) -> csv::Result<()> {
    write_rows(
        &dir.join("rh_constant.csv"),
        &["p", "c_hat"],
        curve
            .iter()
            .map(|(p, c)| vec![p.to_string(), c.to_string()]),
    )
}
