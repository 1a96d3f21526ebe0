//! Exponent calculus for inductive configurations: the recursive link
//! constants c_i, the exponent constant C_R, the correlation floor eps_R,
//! and the diameter condition that separates realizable configurations from
//! degenerate ones.
//!
//! The recursion mirrors the projection in [`crate::geometry`]: projecting a
//! tuple onto the link of its first point maps inner product r to
//! f_c(r) = (r - c^2)/(1 - c^2) with c the first link constant, and the c_i
//! are what successive projections see.

use crate::error::{Error, Result};
use crate::geometry::{GramSpec, InductiveConfiguration};
use serde::{Deserialize, Serialize};

/// Slack around the forbidden boundary c_{k-1} = -1. Rounding noise this
/// close to the boundary would otherwise turn into an astronomically large
/// C_R instead of a loud failure.
pub const DIAMETER_TOL: f64 = 1e-12;

/// f_c(r) = (r - c^2)/(1 - c^2), the inner product seen after projecting
/// onto the link of a point at inner product c from both arguments.
pub fn f_link(c: f64, r: f64) -> Result<f64> {
    if !c.is_finite() || c.abs() >= 1.0 {
        return Err(Error::DegenerateLink(c.abs()));
    }
    let c2 = c * c;
    Ok((r - c2) / (1.0 - c2))
}

/// Link constants c_1 = r_1, c_i = f_{c_{i-1}}(... f_{c_1}(r_i)), applying
/// f_{c_1} first. Only this order reproduces the simplex closed form
/// c_i = r / (1 + (i-1) r). Intermediate constants (all but the last) must
/// stay inside (-1, 1) for the recursion to continue; the last one may land
/// on or below -1, which the diameter check then reports.
pub fn c_sequence(config: &InductiveConfiguration) -> Result<Vec<f64>> {
    let rs = config.r_values();
    let mut cs: Vec<f64> = Vec::with_capacity(rs.len());
    for (i, &r) in rs.iter().enumerate() {
        let mut v = r;
        for &c in cs.iter() {
            v = f_link(c, v).expect("intermediate constants stay inside (-1, 1)");
        }
        let last = i + 1 == rs.len();
        if !last && !(v > -1.0 && v < 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "link constant c_{} = {v} leaves (-1, 1); the induction cannot continue",
                i + 1
            )));
        }
        cs.push(v);
    }
    Ok(cs)
}

/// C_R = sum_i 2/(1-|c_i|) * prod_{j<i} (1+|c_j|)/(1-|c_j|), evaluated with
/// compensated summation. Values near the boundary are reported as they
/// come, however large.
pub fn exponent_c_from_sequence(cs: &[f64]) -> Result<f64> {
    check_sequence(cs)?;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut growth = 1.0;
    for &c in cs {
        let a = c.abs();
        let term = 2.0 / (1.0 - a) * growth;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        growth *= (1.0 + a) / (1.0 - a);
    }
    Ok(sum)
}

/// eps_R = prod_i (1-|c_i|)/(1+|c_i|), in (0, 1], equal to 1 only for the
/// fully uncorrelated configuration.
pub fn exponent_eps_from_sequence(cs: &[f64]) -> Result<f64> {
    check_sequence(cs)?;
    let mut prod = 1.0;
    for &c in cs {
        let a = c.abs();
        prod *= (1.0 - a) / (1.0 + a);
    }
    Ok(prod)
}

fn check_sequence(cs: &[f64]) -> Result<()> {
    if cs.is_empty() {
        return Err(Error::InvalidConfiguration(
            "exponent constants need at least one link constant".into(),
        ));
    }
    for &c in cs {
        if !c.is_finite() || c.abs() >= 1.0 {
            return Err(Error::OutOfRange {
                name: "c",
                value: c,
                range: "(-1, 1)",
            });
        }
    }
    Ok(())
}

pub fn exponent_c(config: &InductiveConfiguration) -> Result<f64> {
    let cs = checked_sequence(config)?;
    exponent_c_from_sequence(&cs)
}

pub fn exponent_eps(config: &InductiveConfiguration) -> Result<f64> {
    let cs = checked_sequence(config)?;
    exponent_eps_from_sequence(&cs)
}

fn checked_sequence(config: &InductiveConfiguration) -> Result<Vec<f64>> {
    let cs = c_sequence(config)?;
    let check = diameter_from_sequence(&cs);
    if !check.satisfied {
        return Err(Error::DiameterCondition(check.reason));
    }
    Ok(cs)
}

/// Outcome of the diameter condition c_{k-1} > -1.
#[derive(Clone, Debug, Serialize)]
pub struct DiameterCheck {
    pub satisfied: bool,
    pub reason: String,
}

fn diameter_from_sequence(cs: &[f64]) -> DiameterCheck {
    let k = cs.len();
    let last = cs[k - 1];
    if last <= -1.0 + DIAMETER_TOL {
        DiameterCheck {
            satisfied: false,
            reason: format!(
                "diameter condition fails: c_{k} = {last} is within {DIAMETER_TOL:e} of -1 \
                 (antipodal or impossible final link)"
            ),
        }
    } else {
        DiameterCheck {
            satisfied: true,
            reason: format!("diameter condition holds: c_{k} = {last} stays above -1"),
        }
    }
}

pub fn check_diameter_condition(config: &InductiveConfiguration) -> DiameterCheck {
    match c_sequence(config) {
        Ok(cs) => diameter_from_sequence(&cs),
        Err(e) => DiameterCheck {
            satisfied: false,
            reason: format!("link recursion failed before the final constant: {e}"),
        },
    }
}

/// The full constant set for one configuration. Exponents are absent when
/// the configuration is invalid; `reason` says why.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c_sequence: Vec<f64>,
    #[serde(rename = "C_R")]
    pub c_r: Option<f64>,
    #[serde(rename = "eps_R")]
    pub eps_r: Option<f64>,
    pub valid: bool,
    pub reason: Option<String>,
}

pub fn derived_constants(config: &InductiveConfiguration) -> DerivedConstants {
    let cs = match c_sequence(config) {
        Ok(cs) => cs,
        Err(e) => {
            return DerivedConstants {
                c_sequence: vec![],
                c_r: None,
                eps_r: None,
                valid: false,
                reason: Some(e.to_string()),
            }
        }
    };
    let check = diameter_from_sequence(&cs);
    if !check.satisfied {
        return DerivedConstants {
            c_sequence: cs,
            c_r: None,
            eps_r: None,
            valid: false,
            reason: Some(check.reason),
        };
    }
    let c_r = exponent_c_from_sequence(&cs).expect("sequence validated");
    let eps_r = exponent_eps_from_sequence(&cs).expect("sequence validated");
    DerivedConstants {
        c_sequence: cs,
        c_r: Some(c_r),
        eps_r: Some(eps_r),
        valid: true,
        reason: None,
    }
}

/// Banded Gram matrix of the configuration, with the positive-semidefinite
/// check that flags inconsistent r values.
pub fn gram_from_inductive(config: &InductiveConfiguration) -> Result<GramSpec> {
    config.gram()
}
