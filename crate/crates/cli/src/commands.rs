//! Single-shot subcommands that emit one JSON document each.

use crate::campaign::admissible_moduli;
use crate::CliError;
use maasslift::charsums::{check_closed_form, gauss_sum};
use maasslift::hecke::{check_inert, check_reps, coset_reps};
use maasslift::ikeda::{fstar_coeff, fstar_plus_check, EigenData};
use maasslift::lift::{keys_upto, maass_coeff, special_jacobi_alpha};
use maasslift::plusform::{eisenstein_star_full, gauss_to_string, QExpansion};
use maasslift::thetamat::{theta_matrix, theta_matrix_closed, Mat2Z};
use maasslift::QuadField;
use num_integer::gcd;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::Path;

fn field(d: u64) -> Result<QuadField, CliError> {
    QuadField::new(d).map_err(|e| CliError::Invalid(e.to_string()))
}

fn check_level(d: u64, n: u64) -> Result<(), CliError> {
    if n == 0 || gcd(n, d) != 1 {
        return Err(CliError::Invalid(format!("level N = {n} must be positive and coprime to D = {d}")));
    }
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn invalid(e: maasslift::Error) -> CliError {
    CliError::Invalid(e.to_string())
}

/// Prints one line to standard output; a closed pipe is not an error.
pub fn print_line(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Failed(e.to_string())),
        _ => Ok(()),
    }
}

/// Writes `doc` to `out`, or to standard output.
fn emit<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc).expect("documents serialize");
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display()))),
        None => print_line(&text),
    }
}

#[derive(Serialize)]
struct LiftEntry {
    ell: u64,
    m: u64,
    t1: i64,
    t2: i64,
    eps: u64,
    ddet: u64,
    value: String,
}

#[derive(Serialize)]
struct LiftTable {
    #[serde(rename = "D")]
    d: u64,
    #[serde(rename = "N")]
    n: u64,
    k: i64,
    /// Every value is the listed Gaussian rational times this factor.
    scale: &'static str,
    entries: Vec<LiftEntry>,
}

pub fn lift(d: u64, n: u64, k: i64, input: Option<&Path>, upto: u64, out: Option<&Path>) -> Result<bool, CliError> {
    let field = field(d)?;
    check_level(d, n)?;
    if k < 4 || k % 2 != 0 {
        return Err(CliError::Invalid(format!("weight k = {k} must be even and at least 4")));
    }
    let max_ddet = d * upto * upto;
    let g: QExpansion = match input {
        Some(path) => read_json(path)?,
        None => eisenstein_star_full(&field, k, max_ddet as usize + 1)?,
    };
    g.validate().map_err(invalid)?;
    if g.weight != k - 1 || g.disc != d {
        return Err(CliError::Invalid(format!(
            "input has weight {} and discriminant {}, expected {} and {d}",
            g.weight,
            g.disc,
            k - 1
        )));
    }
    let alpha = special_jacobi_alpha(&field, n, &g).map_err(invalid)?;
    let mut entries = Vec::new();
    for key in keys_upto(&field, upto, max_ddet) {
        let value = maass_coeff(&field, n, k, &alpha, &key).map_err(invalid)?;
        entries.push(LiftEntry {
            ell: key.ell,
            m: key.m,
            t1: key.t1,
            t2: key.t2,
            eps: key.eps()?,
            ddet: key.ddet(&field)?,
            value: gauss_to_string(&value),
        });
    }
    emit(&LiftTable { d, n, k, scale: "i√D", entries }, out)?;
    Ok(true)
}

pub fn theta_matrix_cmd(d: u64, sigma: &[i64], closed: bool, out: Option<&Path>) -> Result<bool, CliError> {
    let field = field(d)?;
    let [a, b, c, dd] = sigma else {
        return Err(CliError::Invalid("σ needs four entries a,b,c,d".into()));
    };
    let s = Mat2Z::new(*a, *b, *c, *dd);
    if s.det() != 1 {
        return Err(CliError::Invalid(format!("σ must have determinant 1, found {}", s.det())));
    }
    let m = if closed { theta_matrix_closed(&field, s) } else { theta_matrix(&field, s) }.map_err(invalid)?;
    let size = d as usize;
    let entries: Vec<Vec<String>> =
        (0..size).map(|u| (0..size).map(|v| m.get(u, v).to_string()).collect()).collect();
    emit(&json!({ "D": d, "sigma": s.to_array(), "closed": closed, "classes": field.classes(), "entries": entries }), out)?;
    Ok(true)
}

pub fn gauss(d: u64, out: Option<&Path>) -> Result<bool, CliError> {
    let field = field(d)?;
    let mut passed = true;
    let mut rows: Vec<Value> = Vec::new();
    for m in admissible_moduli(d) {
        let psi = field.chi_component(m)?;
        let c = check_closed_form(&psi);
        passed &= c.passed();
        rows.push(json!({
            "m": m,
            "value": gauss_sum(&psi, 1).to_string(),
            "parity": psi.parity(),
            "epsilon_is_i": c.epsilon_is_i,
            "square_ok": c.square_ok,
            "numeric_error": c.numeric_error,
        }));
    }
    emit(&json!({ "D": d, "passed": passed, "moduli": rows }), out)?;
    Ok(passed)
}

pub fn hecke_reps(d: u64, n: u64, p: u64, out: Option<&Path>) -> Result<bool, CliError> {
    let field = field(d)?;
    check_level(d, n)?;
    check_inert(&field, p, n).map_err(invalid)?;
    let reps = coset_reps(&field, p, n)?;
    let report = check_reps(&field, p, n)?;
    let passed = report.passed();
    emit(&json!({ "report": report, "reps": reps }), out)?;
    Ok(passed)
}

pub fn ikeda(
    d: u64,
    input: Option<&Path>,
    k: i64,
    seed: u64,
    ell: u64,
    upto: u64,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let field = field(d)?;
    if ell == 0 || gcd(ell, d) != 1 {
        return Err(CliError::Invalid(format!("ℓ = {ell} must be positive and coprime to D = {d}")));
    }
    let bound = ell * upto;
    let ed: EigenData = match input {
        Some(path) => read_json(path)?,
        None => EigenData::synthetic(&field, k - 1, 1, seed, bound).map_err(invalid)?,
    };
    ed.validate(&field).map_err(invalid)?;
    let coeffs: Vec<String> = (1..=upto)
        .map(|m| fstar_coeff(&ed, &field, ell, m).map(|z| gauss_to_string(&z)))
        .collect::<Result<_, _>>()
        .map_err(|e| match e {
            maasslift::Error::MissingEigenvalue(_) => invalid(e),
            e => e.into(),
        })?;
    let plus = fstar_plus_check(&ed, &field, ell, bound)?;
    emit(&json!({ "D": d, "weight": ed.weight, "level_m": ed.level_m, "ell": ell, "coeffs": coeffs, "plus": plus }), out)?;
    Ok(plus)
}
