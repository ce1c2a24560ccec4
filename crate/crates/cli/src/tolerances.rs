use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::CliError;

/// Named check tolerances, overridable with `--tol name=value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

pub const DEFAULTS: [(&str, f64, &str); 10] = [
    ("membership", 1e-10, "|<x,x> - 1/c| on the quadric"),
    ("defect", 1e-8, "defect sign and equality threshold"),
    (
        "shape_consistency",
        1e-10,
        "second fundamental form vs shape operators",
    ),
    (
        "structure",
        1e-3,
        "curvatures from connection forms vs Gauss/Ricci",
    ),
    ("codazzi", 1e-4, "Codazzi residual"),
    ("canonical", 1e-8, "equality normal form residual"),
    ("minimal_h2", 1e-9, "|<H,H>| for minimality"),
    ("minimal_h", 1e-6, "coordinate norm of H for minimality"),
    ("laplacian", 1e-3, "absolute Laplacian identity residual"),
    (
        "laplacian_rel",
        5e-3,
        "relative Laplacian identity residual",
    ),
];

/// Finite-difference step for connection forms and Codazzi, in arc length.
pub const FD_STEP: f64 = 1e-3;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances(DEFAULTS.iter().map(|&(k, v, _)| (k, v)).collect())
    }
}

impl Tolerances {
    pub fn from_overrides(overrides: &[String]) -> Result<Self, CliError> {
        let mut tol = Tolerances::default();
        for raw in overrides {
            let (name, value) = raw
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--tol expects name=value, got '{raw}'")))?;
            let name = name.trim();
            let key = DEFAULTS
                .iter()
                .map(|d| d.0)
                .find(|k| *k == name)
                .ok_or_else(|| {
                    let names: Vec<_> = DEFAULTS.iter().map(|d| d.0).collect();
                    CliError::Usage(format!(
                        "unknown tolerance '{name}' (known: {})",
                        names.join(", ")
                    ))
                })?;
            let v: f64 = value.trim().parse().map_err(|_| {
                CliError::Usage(format!("tolerance {name}: '{value}' is not a number"))
            })?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Usage(format!(
                    "tolerance {name} must be finite and non-negative"
                )));
            }
            tol.0.insert(key, v);
        }
        Ok(tol)
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }
}

impl fmt::Display for Tolerances {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v:e}")?;
        }
        Ok(())
    }
}
