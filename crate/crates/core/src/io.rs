//! File formats shared by the library and the CLI.
//!
//! Every population column is labelled by its `n0` value (qubits in `|0⟩`),
//! ascending, so `chi_n0_0` is the fully excited level and `chi_n0_N` the
//! ground level. Floats are written with 17 significant digits, which
//! round-trips every `f64`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::decomposer::{CertificationResult, NotCertifiedReason, Param, SdsDecomposition, Term, Verdict};
use crate::dicke::GdsState;
use crate::error::{Error, Result};
use crate::superradiance::Trajectory;

/// `f64` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV header of a population table: `tau,chi_n0_0,...,chi_n0_N`.
pub fn trajectory_header(n: usize) -> String {
    let mut h = String::from("tau");
    for n0 in 0..=n {
        write!(h, ",chi_n0_{n0}").unwrap();
    }
    h
}

/// Population table, one row per grid point. Values are clipped into
/// `[0, 1]` here and only here.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = trajectory_header(traj.n_qubits);
    out.push('\n');
    for (tau, state) in traj.tau.iter().zip(&traj.states) {
        out.push_str(&fmt_f64(*tau));
        for v in state.populations() {
            out.push(',');
            out.push_str(&fmt_f64(v.clamp(0.0, 1.0)));
        }
        out.push('\n');
    }
    out
}

/// Header of a decomposition sweep:
/// `tau,x_1..x_J,y_1..y_J,residual,certified`.
pub fn decomposition_header(j_max: usize) -> String {
    let mut h = String::from("tau");
    for j in 1..=j_max {
        write!(h, ",x_{j}").unwrap();
    }
    for j in 1..=j_max {
        write!(h, ",y_{j}").unwrap();
    }
    h.push_str(",residual,certified");
    h
}

/// One sweep row. Uses the certificate when present, else the raw solution
/// (real parts); an unsolvable point is written as `NaN` parameters.
pub fn decomposition_row(tau: f64, j_max: usize, result: &CertificationResult) -> String {
    let dec = result.certificate.as_ref().or(result.solution.as_ref());
    let mut row = fmt_f64(tau);
    let terms: Vec<Term> = dec.map(|d| d.terms().to_vec()).unwrap_or_default();
    for j in 0..j_max {
        row.push(',');
        row.push_str(&terms.get(j).map_or("NaN".into(), |t| fmt_f64(t.x.re)));
    }
    for j in 0..j_max {
        row.push(',');
        row.push_str(&terms.get(j).map_or("NaN".into(), |t| fmt_f64(t.y.re)));
    }
    row.push(',');
    row.push_str(&dec.map_or("NaN".into(), |d| fmt_f64(d.residual())));
    row.push(',');
    row.push_str(if result.is_certified() { "true" } else { "false" });
    row
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn term_json(t: &Term) -> Value {
    let mut obj = json!({ "x": number(t.x.re), "y": number(t.y.re) });
    if t.x.im != 0.0 || t.y.im != 0.0 {
        obj["x_im"] = number(t.x.im);
        obj["y_im"] = number(t.y.im);
    }
    obj
}

fn reason_json(reason: &NotCertifiedReason) -> Value {
    match reason {
        NotCertifiedReason::ComplexParameters => json!("ComplexParameters"),
        NotCertifiedReason::SolverDegenerate => json!("SolverDegenerate"),
        NotCertifiedReason::ParameterOutOfRange { index, param, value } => json!({
            "ParameterOutOfRange": {
                "index": index,
                "param": match param { Param::X => "x", Param::Y => "y" },
                "value": number(*value),
            }
        }),
    }
}

pub fn decomposition_json(dec: &SdsDecomposition) -> Value {
    json!({
        "n": dec.n_qubits(),
        "terms": dec.terms().iter().map(term_json).collect::<Vec<_>>(),
        "residual": number(dec.residual()),
        "rank": dec.rank(),
    })
}

/// `{"verdict", "terms", "residual", "reason", "epsilon"}`. Terms come from
/// the certificate, or from the unclamped solution when not certified.
pub fn certificate_json(result: &CertificationResult) -> Value {
    let dec = result.certificate.as_ref().or(result.solution.as_ref());
    json!({
        "verdict": match result.verdict {
            Verdict::CertifiedSeparable => "CertifiedSeparable",
            Verdict::NotCertified => "NotCertified",
        },
        "terms": dec.map(|d| d.terms().iter().map(term_json).collect::<Vec<_>>()).unwrap_or_default(),
        "residual": dec.map_or(Value::Null, |d| number(d.residual())),
        "reason": result.reason.as_ref().map_or(Value::Null, reason_json),
        "epsilon": number(result.epsilon),
    })
}

/// Reads a state from JSON (`{"n": N, "chi": [...]}`) or CSV.
///
/// CSV input is one row of `N + 1` populations ordered by `n0` ascending; an
/// optional header line is skipped, and a leading `tau` column is dropped
/// when the header names it.
pub fn parse_state(text: &str) -> Result<GdsState> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return serde_json::from_str(trimmed).map_err(|e| Error::InvalidState(e.to_string()));
    }
    let mut lines = trimmed.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut first = lines.next().ok_or_else(|| Error::InvalidState("empty input".into()))?;
    let mut skip_tau = false;
    let is_header = first.split(',').next().is_some_and(|c| c.trim().parse::<f64>().is_err());
    if is_header {
        skip_tau = first.split(',').next().is_some_and(|c| c.trim() == "tau");
        first = lines.next().ok_or_else(|| Error::InvalidState("no data row".into()))?;
    }
    let values = first
        .split(',')
        .skip(usize::from(skip_tau))
        .map(|c| c.trim().parse::<f64>().map_err(|_| Error::InvalidState(format!("bad number {c:?}"))))
        .collect::<Result<Vec<_>>>()?;
    GdsState::new(values)
}
