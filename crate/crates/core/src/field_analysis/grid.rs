use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature_engine::{analyze_point, CurvatureReport};
use crate::error::{Error, Result};
use crate::surface_catalog::{induced_metric, Domain, Immersion};

/// Arguments at or below this value count as non-positive for logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// Uniform `nx x ny` grid over a domain; `nx` nodes along `s`, `ny` along `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, domain: Domain) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Input(format!(
                "grid {nx}x{ny} needs at least 2 nodes per axis"
            )));
        }
        Ok(Self { nx, ny, domain })
    }

    /// Parse `NxM`.
    pub fn parse_size(text: &str) -> Result<(usize, usize)> {
        let bad = || Error::Input(format!("grid '{text}' is not of the form NxM"));
        let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn s(&self, i: usize) -> f64 {
        Domain::node(self.domain.s0, self.domain.s1, i, self.nx)
    }

    pub fn t(&self, j: usize) -> f64 {
        Domain::node(self.domain.t0, self.domain.t1, j, self.ny)
    }

    pub fn spacing(&self) -> (f64, f64) {
        let d = &self.domain;
        (
            (d.s1 - d.s0) / (self.nx - 1) as f64,
            (d.t1 - d.t0) / (self.ny - 1) as f64,
        )
    }

    /// Nodes in storage order (`s` slowest).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        self.domain.grid(self.nx, self.ny)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} on {}", self.nx, self.ny, self.domain)
    }
}

/// Scalar quantities that can be sampled on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    K,
    KD,
    H2,
    Defect,
    LnKPlus1,
    LnK,
    LnKMinus1,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::K,
        Quantity::KD,
        Quantity::H2,
        Quantity::Defect,
        Quantity::LnKPlus1,
        Quantity::LnK,
        Quantity::LnKMinus1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::K => "K",
            Quantity::KD => "KD",
            Quantity::H2 => "H2",
            Quantity::Defect => "defect",
            Quantity::LnKPlus1 => "ln(K+1)",
            Quantity::LnK => "ln(K)",
            Quantity::LnKMinus1 => "ln(K-1)",
        }
    }

    /// Shift `s0` for `ln(K + s0)`, if logarithmic.
    pub fn log_shift(self) -> Option<f64> {
        match self {
            Quantity::LnKPlus1 => Some(1.0),
            Quantity::LnK => Some(0.0),
            Quantity::LnKMinus1 => Some(-1.0),
            _ => None,
        }
    }

    pub fn evaluate(self, r: &CurvatureReport) -> Result<f64> {
        Ok(match self {
            Quantity::K => r.k,
            Quantity::KD => r.kd,
            Quantity::H2 => r.h2,
            Quantity::Defect => r.defect,
            _ => {
                let arg = r.k + self.log_shift().unwrap();
                if arg <= LOG_FLOOR {
                    return Err(Error::Domain {
                        s: r.s,
                        t: r.t,
                        quantity: self.name().to_string(),
                        value: arg,
                    });
                }
                arg.ln()
            }
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Quantity::ALL
            .into_iter()
            .find(|q| q.name().eq_ignore_ascii_case(&key))
            .ok_or_else(|| {
                let names: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
                Error::Input(format!(
                    "unknown quantity '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Values on a grid together with the metric coefficients at each node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub domain: Domain,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    s: f64,
    t: f64,
    value: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "G")]
    g: f64,
}

impl GridField {
    pub fn new(
        grid: GridSpec,
        values: Vec<f64>,
        e: Vec<f64>,
        f: Vec<f64>,
        g: Vec<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if [values.len(), e.len(), f.len(), g.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Input(format!(
                "grid field arrays must have {n} entries"
            )));
        }
        for (k, (s, t)) in grid.nodes().into_iter().enumerate() {
            if !(e[k] > 0.0 && e[k] * g[k] - f[k] * f[k] > 0.0) {
                return Err(Error::degenerate(
                    s,
                    t,
                    "metric coefficients are not positive definite",
                ));
            }
        }
        Ok(Self {
            domain: grid.domain,
            nx: grid.nx,
            ny: grid.ny,
            values,
            e,
            f,
            g,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            domain: self.domain,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    /// Same grid and metric with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridField::new(
            self.grid(),
            values,
            self.e.clone(),
            self.f.clone(),
            self.g.clone(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "t", "value", "E", "F", "G"])
            .map_err(csv_err)?;
        let grid = self.grid();
        for (k, (s, t)) in grid.nodes().into_iter().enumerate() {
            let row = [s, t, self.values[k], self.e[k], self.f[k], self.g[k]];
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let rows: Vec<CsvRow> = rd
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_err)?;
        let first = rows
            .first()
            .ok_or_else(|| Error::Input("empty grid field CSV".into()))?;
        let ny = rows.iter().take_while(|r| r.s == first.s).count();
        if ny < 2 || !rows.len().is_multiple_of(ny) {
            return Err(Error::Input(
                "CSV rows do not form a rectangular grid".into(),
            ));
        }
        let nx = rows.len() / ny;
        let last = rows.last().unwrap();
        let domain = Domain::new(first.s, last.s, first.t, last.t)?;
        let grid = GridSpec::new(nx, ny, domain)?;
        for (row, (s, t)) in rows.iter().zip(grid.nodes()) {
            if row.s != s || row.t != t {
                return Err(Error::Input(format!(
                    "CSV node ({}, {}) does not match the uniform grid node ({s}, {t})",
                    row.s, row.t
                )));
            }
        }
        GridField::new(
            grid,
            rows.iter().map(|r| r.value).collect(),
            rows.iter().map(|r| r.e).collect(),
            rows.iter().map(|r| r.f).collect(),
            rows.iter().map(|r| r.g).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GridField = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("grid field JSON: {e}")))?;
        GridField::new(raw.grid(), raw.values, raw.e, raw.f, raw.g)
    }
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(e.to_string())
    } else {
        Error::Input(format!("grid field CSV: {e}"))
    }
}

/// Pointwise analysis at every node, in node order.
pub fn sample_reports(imm: &Immersion, grid: &GridSpec) -> Result<Vec<CurvatureReport>> {
    grid.nodes()
        .into_par_iter()
        .map(|p| analyze_point(imm, p))
        .collect()
}

/// Field of `quantity` with the metric stored alongside.
pub fn sample_field(imm: &Immersion, quantity: Quantity, grid: &GridSpec) -> Result<GridField> {
    let reports = sample_reports(imm, grid)?;
    field_from_reports(&reports, quantity, grid)
}

/// Field of `quantity` from already computed reports in node order. The
/// first offending node in that order is reported for logarithms.
pub fn field_from_reports(
    reports: &[CurvatureReport],
    quantity: Quantity,
    grid: &GridSpec,
) -> Result<GridField> {
    let values = reports
        .iter()
        .map(|r| quantity.evaluate(r))
        .collect::<Result<Vec<_>>>()?;
    GridField::new(
        *grid,
        values,
        reports.iter().map(|r| r.metric.e).collect(),
        reports.iter().map(|r| r.metric.f).collect(),
        reports.iter().map(|r| r.metric.g).collect(),
    )
}

/// Field of an arbitrary function of `(s, t)` on the surface's metric.
pub fn field_from_fn(
    imm: &Immersion,
    grid: &GridSpec,
    f: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<GridField> {
    let nodes = grid.nodes();
    let metrics = nodes
        .par_iter()
        .map(|&p| induced_metric(imm, p))
        .collect::<Result<Vec<_>>>()?;
    GridField::new(
        *grid,
        nodes.iter().map(|&(s, t)| f(s, t)).collect(),
        metrics.iter().map(|m| m.e).collect(),
        metrics.iter().map(|m| m.f).collect(),
        metrics.iter().map(|m| m.g).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_catalog::{catalog_get, Params};

    fn phi() -> Immersion {
        catalog_get("phi_h42", &Params::new()).unwrap()
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, Domain::default()).unwrap()
    }

    #[test]
    fn phi_gauss_curvature_field_is_constant() {
        let f = sample_field(&phi(), Quantity::K, &grid(33)).unwrap();
        assert!(f.values.iter().all(|k| (k + 1.0 / 3.0).abs() <= 1e-8));
        let l = sample_field(&phi(), Quantity::LnKPlus1, &grid(9)).unwrap();
        assert!(l
            .values
            .iter()
            .all(|v| (v - (2.0f64 / 3.0).ln()).abs() <= 1e-8));
    }

    #[test]
    fn log_of_vanishing_curvature_is_a_domain_error() {
        let imm = catalog_get("flat_L", &Params::new()).unwrap();
        match sample_field(&imm, Quantity::LnK, &grid(5)) {
            Err(Error::Domain { s, t, quantity, .. }) => {
                assert_eq!((s, t), (-1.0, -1.0));
                assert_eq!(quantity, "ln(K)");
            }
            other => panic!("expected a domain error, got {other:?}"),
        }
    }

    #[test]
    fn csv_and_json_round_trip_bit_exactly() {
        let f = sample_field(
            &phi(),
            Quantity::KD,
            &GridSpec::new(7, 5, Domain::new(-0.3, 0.7, 0.1, 0.9).unwrap()).unwrap(),
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,t,value,E,F,G\n"));
        let back = GridField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let back = GridField::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn grid_size_parsing() {
        assert_eq!(GridSpec::parse_size("33x17").unwrap(), (33, 17));
        assert!(GridSpec::parse_size("33").is_err());
        assert!(GridSpec::parse_size("ax3").is_err());
    }

    #[test]
    fn quantity_names_parse() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
        }
        assert_eq!(
            "ln( K + 1 )".parse::<Quantity>().unwrap(),
            Quantity::LnKPlus1
        );
        assert!("foo".parse::<Quantity>().is_err());
    }
}
