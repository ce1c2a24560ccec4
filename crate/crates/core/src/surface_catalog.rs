//! Ambient space forms and the built-in immersions.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr_parser::{self, BinOp, Constant, Expr, ExprKind, SurfaceDefinition, Var};
use crate::jets::Jet2;
use crate::pseudo_linalg::{PVector, Signature};

/// Samples per axis used to certify that a surface is space-like on its domain.
pub const SPACELIKE_SAMPLES: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AmbientKind {
    /// Neutral flat space, signature (2,2).
    Flat,
    /// Neutral pseudo-sphere `<x,x> = 1/c > 0` inside signature (2,3).
    PseudoSphere,
    /// Neutral pseudo-hyperbolic space `<x,x> = 1/c < 0` inside signature (3,2).
    PseudoHyperbolic,
}

/// A 4-dimensional neutral space form, embedded as a quadric when curved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientSpace {
    kind: AmbientKind,
    signature: Signature,
    curvature: f64,
}

impl AmbientSpace {
    pub fn flat() -> Self {
        Self {
            kind: AmbientKind::Flat,
            signature: Signature::new(2, 4).unwrap(),
            curvature: 0.0,
        }
    }

    pub fn pseudo_sphere(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Input(format!(
                "pseudo-sphere needs curvature c > 0, got {c}"
            )));
        }
        Ok(Self {
            kind: AmbientKind::PseudoSphere,
            signature: Signature::new(2, 5).unwrap(),
            curvature: c,
        })
    }

    pub fn pseudo_hyperbolic(c: f64) -> Result<Self> {
        if !(c < 0.0) || !c.is_finite() {
            return Err(Error::Input(format!(
                "pseudo-hyperbolic space needs curvature c < 0, got {c}"
            )));
        }
        Ok(Self {
            kind: AmbientKind::PseudoHyperbolic,
            signature: Signature::new(3, 5).unwrap(),
            curvature: c,
        })
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn curvature(&self) -> f64 {
        self.curvature
    }

    /// Dimension of the pseudo-Euclidean space the surface is written in.
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn is_flat(&self) -> bool {
        self.kind == AmbientKind::Flat
    }

    /// `1/c` for curved space forms.
    pub fn membership_target(&self) -> Option<f64> {
        (!self.is_flat()).then(|| 1.0 / self.curvature)
    }

    /// Header form used by surface definition files, e.g. `H(3,2; -1)`.
    pub fn descriptor(&self) -> String {
        let s = self.signature;
        match self.kind {
            AmbientKind::Flat => format!("E({},{})", s.negative_count(), s.positive_count()),
            AmbientKind::PseudoSphere => format!(
                "S({},{}; {})",
                s.negative_count(),
                s.positive_count(),
                self.curvature
            ),
            AmbientKind::PseudoHyperbolic => format!(
                "H({},{}; {})",
                s.negative_count(),
                s.positive_count(),
                self.curvature
            ),
        }
    }
}

impl fmt::Display for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

/// Parameter rectangle `[s0, s1] x [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            s0: -1.0,
            s1: 1.0,
            t0: -1.0,
            t1: 1.0,
        }
    }
}

impl Domain {
    pub fn new(s0: f64, s1: f64, t0: f64, t1: f64) -> Result<Self> {
        let ok = [s0, s1, t0, t1].iter().all(|v| v.is_finite()) && s0 < s1 && t0 < t1;
        if !ok {
            return Err(Error::Input(format!(
                "empty or invalid domain [{s0}, {s1}] x [{t0}, {t1}]"
            )));
        }
        Ok(Self { s0, s1, t0, t1 })
    }

    /// Node `i` of `n` evenly spaced nodes on `[a, b]`; the last node is `b` exactly.
    pub fn node(a: f64, b: f64, i: usize, n: usize) -> f64 {
        if n <= 1 {
            return a;
        }
        if i + 1 == n {
            return b;
        }
        a + (b - a) * (i as f64 / (n - 1) as f64)
    }

    /// Row-major `(s, t)` nodes of an `ns x nt` grid, `s` varying slowest.
    pub fn grid(&self, ns: usize, nt: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(ns * nt);
        for i in 0..ns {
            let s = Self::node(self.s0, self.s1, i, ns);
            for j in 0..nt {
                out.push((s, Self::node(self.t0, self.t1, j, nt)));
            }
        }
        out
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        (self.s0..=self.s1).contains(&s) && (self.t0..=self.t1).contains(&t)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{},{}:{}", self.s0, self.s1, self.t0, self.t1)
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    /// Parses `s0:s1,t0:t1`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Input(format!("domain '{text}' is not of the form s0:s1,t0:t1"));
        let (s, t) = text.split_once(',').ok_or_else(bad)?;
        let range = |r: &str| -> Result<(f64, f64)> {
            let (a, b) = r.split_once(':').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        };
        let ((s0, s1), (t0, t1)) = (range(s)?, range(t)?);
        Domain::new(s0, s1, t0, t1)
    }
}

/// Jets of every ambient coordinate at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub signature: Signature,
    pub components: Vec<Jet2>,
}

impl JetPoint {
    fn gather(&self, pick: impl Fn(&Jet2) -> f64) -> PVector {
        PVector::new(self.signature, self.components.iter().map(pick).collect())
            .expect("component count matches ambient dimension")
    }

    pub fn position(&self) -> PVector {
        self.gather(|j| j.val)
    }
    pub fn d_s(&self) -> PVector {
        self.gather(|j| j.d_s)
    }
    pub fn d_t(&self) -> PVector {
        self.gather(|j| j.d_t)
    }
    pub fn d_ss(&self) -> PVector {
        self.gather(|j| j.d_ss)
    }
    pub fn d_st(&self) -> PVector {
        self.gather(|j| j.d_st)
    }
    pub fn d_tt(&self) -> PVector {
        self.gather(|j| j.d_tt)
    }
}

pub type Params = BTreeMap<String, String>;

type Evaluator = Arc<dyn Fn(f64, f64) -> Result<Vec<Jet2>> + Send + Sync>;

/// A parametrized space-like surface `(s, t) -> ambient coordinates`.
#[derive(Clone)]
pub struct Immersion {
    name: String,
    ambient: AmbientSpace,
    domain: Domain,
    params: Params,
    evaluator: Evaluator,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("name", &self.name)
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Immersion {
    pub fn new(
        name: impl Into<String>,
        ambient: AmbientSpace,
        domain: Domain,
        evaluator: impl Fn(f64, f64) -> Result<Vec<Jet2>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            ambient,
            domain,
            params: Params::new(),
            evaluator: Arc::new(evaluator),
        }
    }

    /// Wrap a parsed definition file.
    pub fn from_definition(def: SurfaceDefinition) -> Self {
        let ambient = def.ambient;
        let domain = def.domain;
        let name = def.name.clone();
        Self::new(name, ambient, domain, move |s, t| {
            let (js, jt) = Jet2::seeds(s, t);
            Ok(def.eval_on_jets(js, jt)?)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn evaluate(&self, s: f64, t: f64) -> Result<JetPoint> {
        let components = (self.evaluator)(s, t)?;
        if components.len() != self.ambient.dim() {
            return Err(Error::Input(format!(
                "immersion '{}' returned {} components for a {}-dimensional ambient",
                self.name,
                components.len(),
                self.ambient.dim()
            )));
        }
        Ok(JetPoint {
            signature: self.ambient.signature(),
            components,
        })
    }

    /// The same map multiplied by a constant, e.g. to push it off its quadric.
    pub fn scaled(&self, factor: f64) -> Immersion {
        let inner = self.evaluator.clone();
        let mut out = Immersion::new(
            format!("{}*{factor}", self.name),
            self.ambient,
            self.domain,
            move |s, t| Ok(inner(s, t)?.into_iter().map(|j| j.scale(factor)).collect()),
        );
        out.params = self.params.clone();
        out
    }

    /// Fails unless the induced metric is positive definite on an
    /// `n x n` sample of the domain.
    pub fn ensure_space_like(&self, n: usize) -> Result<()> {
        for (s, t) in self.domain.grid(n, n) {
            induced_metric(self, (s, t))?;
        }
        Ok(())
    }
}

/// First fundamental form in the coordinates `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InducedMetric {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl InducedMetric {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    pub fn is_positive_definite(&self) -> bool {
        self.e > 0.0 && self.det() > 0.0
    }

    /// `sqrt(EG - F^2)`, the area density.
    pub fn area_density(&self) -> f64 {
        self.det().sqrt()
    }

    pub fn from_jets(p: &JetPoint) -> Self {
        let sig = p.signature;
        let (xs, xt) = (p.d_s(), p.d_t());
        Self {
            e: sig.dot(xs.coords(), xs.coords()),
            f: sig.dot(xs.coords(), xt.coords()),
            g: sig.dot(xt.coords(), xt.coords()),
        }
    }
}

/// Induced metric at `p`; fails where the surface is not space-like.
pub fn induced_metric(imm: &Immersion, p: (f64, f64)) -> Result<InducedMetric> {
    let m = InducedMetric::from_jets(&imm.evaluate(p.0, p.1)?);
    if !m.is_positive_definite() {
        return Err(Error::degenerate(
            p.0,
            p.1,
            format!(
                "induced metric (E, F, G) = ({:e}, {:e}, {:e}) is not positive definite",
                m.e, m.f, m.g
            ),
        ));
    }
    Ok(m)
}

/// Largest `|<x,x> - 1/c|` over the given points.
pub fn check_membership(imm: &Immersion, points: &[(f64, f64)]) -> Result<f64> {
    let target = imm.ambient.membership_target().ok_or_else(|| {
        Error::Input(format!(
            "membership check needs a curved ambient; '{}' lives in flat {}",
            imm.name, imm.ambient
        ))
    })?;
    let mut worst: f64 = 0.0;
    for &(s, t) in points {
        let x = imm.evaluate(s, t)?.position();
        worst = worst.max((x.norm_sq() - target).abs());
    }
    Ok(worst)
}

/// One parameter accepted by a catalog entry.
#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: &'static str,
    pub description: &'static str,
}

/// Listing record for a built-in surface.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub ambient: String,
    pub default_domain: Domain,
    pub params: Vec<ParamSpec>,
    pub description: &'static str,
}

pub const CATALOG_NAMES: [&str; 6] = [
    "phi_h42",
    "flat_L",
    "totally_geodesic_h42",
    "holomorphic_graph",
    "umbilical_flat",
    "random_polynomial",
];

pub fn catalog_entries() -> Vec<CatalogEntry> {
    let h = AmbientSpace::pseudo_hyperbolic(-1.0).unwrap().descriptor();
    let e = AmbientSpace::flat().descriptor();
    vec![
        CatalogEntry {
            name: "phi_h42",
            ambient: h.clone(),
            default_domain: Domain::default(),
            params: vec![],
            description: "minimal immersion of the hyperbolic plane H^2(-1/3) into H^4_2(-1); \
                          metric ds^2 + e^(2s/sqrt3) dt^2, K^D = 2K = -2/3",
        },
        CatalogEntry {
            name: "flat_L",
            ambient: h.clone(),
            default_domain: Domain::default(),
            params: vec![],
            description: "flat minimal surface (cosh u, cosh v, 0, sinh u, sinh v)/sqrt2 in H^4_2(-1); \
                          K = K^D = 0",
        },
        CatalogEntry {
            name: "totally_geodesic_h42",
            ambient: h,
            default_domain: Domain::default(),
            params: vec![],
            description: "totally geodesic (cosh u cosh v, 0, 0, cosh u sinh v, sinh u) in H^4_2(-1); \
                          K = -1, K^D = 0",
        },
        CatalogEntry {
            name: "holomorphic_graph",
            ambient: e.clone(),
            default_domain: HOLOMORPHIC_DOMAIN,
            params: vec![ParamSpec {
                name: "f",
                default: "z^2/2",
                description: "complex polynomial in z; the graph z -> (z, f(z)) is space-like where |f'(z)| > 1",
            }],
            description: "holomorphic curve z -> (z, f(z)) in the Lorentzian complex plane; \
                          minimal with K = -K^D",
        },
        CatalogEntry {
            name: "umbilical_flat",
            ambient: e.clone(),
            default_domain: Domain::default(),
            params: vec![ParamSpec {
                name: "r",
                default: "1",
                description: "radius of the hyperboloid -x1^2 + x3^2 + x4^2 = -r^2",
            }],
            description: "totally umbilical hyperbolic plane r(cosh s cosh t, 0, sinh s, cosh s sinh t) in E^4_2",
        },
        CatalogEntry {
            name: "random_polynomial",
            ambient: e,
            default_domain: RANDOM_DOMAIN,
            params: vec![
                ParamSpec {
                    name: "seed",
                    default: "0",
                    description: "generator seed",
                },
                ParamSpec {
                    name: "amplitude",
                    default: "0.1",
                    description: "coefficient bound of the cubic perturbation, at most 0.1",
                },
            ],
            description: "space-like plane (0, 0, s, t) plus a seeded random perturbation of total degree <= 3",
        },
    ]
}

const HOLOMORPHIC_DOMAIN: Domain = Domain {
    s0: 1.2,
    s1: 2.0,
    t0: 0.5,
    t1: 1.5,
};

const RANDOM_DOMAIN: Domain = Domain {
    s0: -0.5,
    s1: 0.5,
    t0: -0.5,
    t1: 0.5,
};

const MAX_RESAMPLES: usize = 100;

fn param_f64(params: &Params, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(raw) => {
            let e = expr_parser::parse_expression(raw)
                .map_err(|e| Error::Input(format!("parameter {key}: {e}")))?;
            if e.uses_variables() {
                return Err(Error::Input(format!("parameter {key} must be a constant")));
            }
            e.eval(0.0, 0.0)
                .map_err(|e| Error::Input(format!("parameter {key}: {e}")))
        }
    }
}

fn reject_unknown(name: &str, params: &Params, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::Input(format!(
            "surface '{name}' has no parameter '{k}' (accepted: {})",
            if allowed.is_empty() {
                "none".to_string()
            } else {
                allowed.join(", ")
            }
        ))),
        None => Ok(()),
    }
}

/// Look up a built-in surface.
pub fn catalog_get(name: &str, params: &Params) -> Result<Immersion> {
    let imm = match name {
        "phi_h42" => {
            reject_unknown(name, params, &[])?;
            phi_h42()
        }
        "flat_L" => {
            reject_unknown(name, params, &[])?;
            flat_l()
        }
        "totally_geodesic_h42" => {
            reject_unknown(name, params, &[])?;
            totally_geodesic_h42()
        }
        "holomorphic_graph" => {
            reject_unknown(name, params, &["f"])?;
            let text = params.get("f").map(String::as_str).unwrap_or("z^2/2");
            let poly = ComplexPolynomial::parse(text)?;
            holomorphic_graph(poly)
        }
        "umbilical_flat" => {
            reject_unknown(name, params, &["r"])?;
            umbilical_flat(param_f64(params, "r", 1.0)?)?
        }
        "random_polynomial" => {
            reject_unknown(name, params, &["seed", "amplitude"])?;
            let seed = param_f64(params, "seed", 0.0)?;
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::Input(format!(
                    "seed must be a non-negative integer, got {seed}"
                )));
            }
            let amplitude = param_f64(params, "amplitude", 0.1)?;
            return Ok(random_polynomial(seed as u64, amplitude)?.with_params(params.clone()));
        }
        other => {
            return Err(Error::Input(format!(
                "unknown surface '{other}' (built-ins: {})",
                CATALOG_NAMES.join(", ")
            )))
        }
    };
    imm.ensure_space_like(SPACELIKE_SAMPLES)?;
    Ok(imm.with_params(params.clone()))
}

fn phi_h42() -> Immersion {
    let ambient = AmbientSpace::pseudo_hyperbolic(-1.0).unwrap();
    Immersion::new("phi_h42", ambient, Domain::default(), |s, t| {
        let (s, t) = Jet2::seeds(s, t);
        let k = 2.0 / 3f64.sqrt();
        let ex = (s * k).exp();
        let sh = (s * k).sinh();
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t2 * t2;
        Ok(vec![
            sh - t2 / 3.0 - (t4 / 18.0 + 7.0 / 8.0) * ex,
            t + (t3 / 3.0 - t / 4.0) * ex,
            0.5 + t2 / 2.0 * ex,
            t + (t3 / 3.0 + t / 4.0) * ex,
            sh - t2 / 3.0 - (t4 / 18.0 + 1.0 / 8.0) * ex,
        ])
    })
}

fn flat_l() -> Immersion {
    let ambient = AmbientSpace::pseudo_hyperbolic(-1.0).unwrap();
    Immersion::new("flat_L", ambient, Domain::default(), |u, v| {
        let (u, v) = Jet2::seeds(u, v);
        let k = FRAC_1_SQRT_2;
        Ok(vec![
            u.cosh() * k,
            v.cosh() * k,
            Jet2::constant(0.0),
            u.sinh() * k,
            v.sinh() * k,
        ])
    })
}

fn totally_geodesic_h42() -> Immersion {
    let ambient = AmbientSpace::pseudo_hyperbolic(-1.0).unwrap();
    Immersion::new(
        "totally_geodesic_h42",
        ambient,
        Domain::default(),
        |u, v| {
            let (u, v) = Jet2::seeds(u, v);
            Ok(vec![
                u.cosh() * v.cosh(),
                Jet2::constant(0.0),
                Jet2::constant(0.0),
                u.cosh() * v.sinh(),
                u.sinh(),
            ])
        },
    )
}

fn umbilical_flat(r: f64) -> Result<Immersion> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Input(format!("radius r must be positive, got {r}")));
    }
    Ok(Immersion::new(
        "umbilical_flat",
        AmbientSpace::flat(),
        Domain::default(),
        move |s, t| {
            let (s, t) = Jet2::seeds(s, t);
            Ok(vec![
                s.cosh() * t.cosh() * r,
                Jet2::constant(0.0),
                s.sinh() * r,
                s.cosh() * t.sinh() * r,
            ])
        },
    ))
}

/// Polynomial `sum c_k z^k` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Parse a polynomial expression in `z`, such as `2*z + z^2/4`.
    pub fn parse(text: &str) -> Result<Self> {
        let e = expr_parser::parse_complex_expression(text)
            .map_err(|e| Error::Input(format!("f = {text}: {e}")))?;
        to_poly(&e)
            .map(Self::new)
            .map_err(|m| Error::Input(format!("f = {text}: {m}")))
    }

    /// `f`, `f'`, `f''` at `z` by Horner's rule.
    pub fn eval_with_derivatives(&self, z: Complex64) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        let (mut f0, mut f1, mut f2) = (zero, zero, zero);
        for c in self.coeffs.iter().rev() {
            f2 = f2 * z + f1 * 2.0;
            f1 = f1 * z + f0;
            f0 = f0 * z + c;
        }
        [f0, f1, f2]
    }
}

fn to_poly(e: &Expr) -> std::result::Result<Vec<Complex64>, String> {
    let constant = |v: f64| vec![Complex64::new(v, 0.0)];
    let add = |a: Vec<Complex64>, b: Vec<Complex64>, sign: f64| {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default() * sign
            })
            .collect::<Vec<_>>()
    };
    let mul = |a: &[Complex64], b: &[Complex64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let as_constant = |p: &[Complex64]| -> Option<Complex64> {
        p.iter().skip(1).all(|c| c.norm() == 0.0).then(|| p[0])
    };
    Ok(match &e.kind {
        ExprKind::Literal(v) => constant(*v),
        ExprKind::Const(Constant::Pi) => constant(std::f64::consts::PI),
        ExprKind::Const(Constant::E) => constant(std::f64::consts::E),
        ExprKind::Var(Var::Z) => vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ExprKind::Var(_) => return Err("only z may appear".into()),
        ExprKind::Neg(a) => to_poly(a)?.into_iter().map(|c| -c).collect(),
        ExprKind::Binary(op, a, b) => {
            let (pa, pb) = (to_poly(a)?, to_poly(b)?);
            match op {
                BinOp::Add => add(pa, pb, 1.0),
                BinOp::Sub => add(pa, pb, -1.0),
                BinOp::Mul => mul(&pa, &pb),
                BinOp::Div => {
                    let d = as_constant(&pb)
                        .filter(|d| d.norm() != 0.0)
                        .ok_or_else(|| format!("{}: divisor must be a nonzero constant", b.span))?;
                    pa.into_iter().map(|c| c / d).collect()
                }
                BinOp::Pow => {
                    let n = as_constant(&pb)
                        .filter(|n| {
                            n.im == 0.0 && n.re.fract() == 0.0 && (0.0..=64.0).contains(&n.re)
                        })
                        .ok_or_else(|| {
                            format!("{}: exponent must be an integer in 0..=64", b.span)
                        })?;
                    let mut acc = constant(1.0);
                    for _ in 0..n.re as usize {
                        acc = mul(&acc, &pa);
                    }
                    acc
                }
            }
        }
        ExprKind::Call(f, _) => {
            return Err(format!(
                "{}: function {} is not polynomial",
                e.span,
                f.name()
            ))
        }
    })
}

/// Graph `z = s + i t -> (z, f(z))` with `z1 = x1 + i x2`, `z2 = x3 + i x4`.
pub fn holomorphic_graph(f: ComplexPolynomial) -> Immersion {
    Immersion::new(
        "holomorphic_graph",
        AmbientSpace::flat(),
        HOLOMORPHIC_DOMAIN,
        move |s, t| {
            let (js, jt) = Jet2::seeds(s, t);
            let [f0, f1, f2] = f.eval_with_derivatives(Complex64::new(s, t));
            // d/ds = d/dz, d/dt = i d/dz for a holomorphic function.
            let re = Jet2 {
                val: f0.re,
                d_s: f1.re,
                d_t: -f1.im,
                d_ss: f2.re,
                d_st: -f2.im,
                d_tt: -f2.re,
            };
            let im = Jet2 {
                val: f0.im,
                d_s: f1.im,
                d_t: f1.re,
                d_ss: f2.im,
                d_st: f2.re,
                d_tt: -f2.im,
            };
            Ok(vec![js, jt, re, im])
        },
    )
}

/// Monomials `s^a t^b` with `a + b <= 3`.
const MONOMIALS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Seeded perturbation of the plane `(0, 0, s, t)`, resampled until space-like.
pub fn random_polynomial(seed: u64, amplitude: f64) -> Result<Immersion> {
    if !(amplitude > 0.0 && amplitude <= 0.1) {
        return Err(Error::Input(format!(
            "amplitude must lie in (0, 0.1], got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESAMPLES {
        let coeffs: Vec<[f64; 10]> = (0..4)
            .map(|_| {
                let mut row = [0.0; 10];
                for c in row.iter_mut() {
                    *c = rng.gen_range(-amplitude..=amplitude);
                }
                row
            })
            .collect();
        let imm = Immersion::new(
            "random_polynomial",
            AmbientSpace::flat(),
            RANDOM_DOMAIN,
            move |s, t| {
                let (js, jt) = Jet2::seeds(s, t);
                let mono: Vec<Jet2> = MONOMIALS
                    .iter()
                    .map(|&(a, b)| js.powi(a as i64).unwrap() * jt.powi(b as i64).unwrap())
                    .collect();
                let base = [Jet2::constant(0.0), Jet2::constant(0.0), js, jt];
                Ok(base
                    .iter()
                    .zip(&coeffs)
                    .map(|(b, row)| {
                        row.iter()
                            .zip(&mono)
                            .fold(*b, |acc, (c, m)| acc + m.scale(*c))
                    })
                    .collect())
            },
        );
        if imm.ensure_space_like(SPACELIKE_SAMPLES).is_ok() {
            return Ok(imm);
        }
    }
    Err(Error::Precondition(format!(
        "no space-like random polynomial surface after {MAX_RESAMPLES} draws (seed {seed})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudo_linalg::inner;

    fn get(name: &str) -> Immersion {
        catalog_get(name, &Params::new()).unwrap()
    }

    fn holo(f: &str) -> Immersion {
        let mut p = Params::new();
        p.insert("f".into(), f.into());
        catalog_get("holomorphic_graph", &p).unwrap()
    }

    /// Central-difference oracle on plain position values.
    fn fd_partials(imm: &Immersion, s: f64, t: f64, h: f64) -> Vec<[f64; 5]> {
        let pos = |s, t| imm.evaluate(s, t).unwrap().position().coords().to_vec();
        let (c, sp, sm, tp, tm) = (
            pos(s, t),
            pos(s + h, t),
            pos(s - h, t),
            pos(s, t + h),
            pos(s, t - h),
        );
        let (pp, pm, mp, mm) = (
            pos(s + h, t + h),
            pos(s + h, t - h),
            pos(s - h, t + h),
            pos(s - h, t - h),
        );
        (0..c.len())
            .map(|k| {
                [
                    (sp[k] - sm[k]) / (2.0 * h),
                    (tp[k] - tm[k]) / (2.0 * h),
                    (sp[k] - 2.0 * c[k] + sm[k]) / (h * h),
                    (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h),
                    (tp[k] - 2.0 * c[k] + tm[k]) / (h * h),
                ]
            })
            .collect()
    }

    #[test]
    fn phi_origin_position() {
        let x = get("phi_h42").evaluate(0.0, 0.0).unwrap().position();
        let want = [-7.0 / 8.0, 0.0, 0.5, 0.0, -1.0 / 8.0];
        for (a, b) in x.coords().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn flat_l_origin_position() {
        let x = get("flat_L").evaluate(0.0, 0.0).unwrap().position();
        assert_eq!(x.coords(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn catalog_jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut surfaces: Vec<Immersion> = CATALOG_NAMES.iter().map(|n| get(n)).collect();
        surfaces.push(holo("z^3/3"));
        for imm in &surfaces {
            let d = imm.domain();
            for _ in 0..100 {
                let s = rng.gen_range(d.s0..=d.s1);
                let t = rng.gen_range(d.t0..=d.t1);
                let jp = imm.evaluate(s, t).unwrap();
                let fd = fd_partials(imm, s, t, 1e-4);
                for (k, j) in jp.components.iter().enumerate() {
                    let got = [j.d_s, j.d_t, j.d_ss, j.d_st, j.d_tt];
                    for (g, w) in got.iter().zip(fd[k]) {
                        assert!(
                            (g - w).abs() <= 1e-5 * w.abs().max(1.0),
                            "{} at ({s},{t}) comp {k}: {g} vs {w}",
                            imm.name()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn membership_of_quadric_surfaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<(f64, f64)> = (0..100)
            .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect();
        for name in ["phi_h42", "flat_L", "totally_geodesic_h42"] {
            assert!(
                check_membership(&get(name), &pts).unwrap() <= 1e-10,
                "{name}"
            );
        }
        let scaled = get("phi_h42").scaled(1.1);
        let r = check_membership(&scaled, &[(0.0, 0.0)]).unwrap();
        assert!((r - 0.21).abs() < 1e-12, "{r}");
        assert!(check_membership(&get("umbilical_flat"), &pts).is_err());
    }

    #[test]
    fn phi_induced_metric_is_warped_product() {
        let imm = get("phi_h42");
        for (s, t) in imm.domain().grid(9, 9) {
            let m = induced_metric(&imm, (s, t)).unwrap();
            assert!((m.e - 1.0).abs() <= 1e-10);
            assert!(m.f.abs() <= 1e-10);
            assert!((m.g - (2.0 * s / 3f64.sqrt()).exp()).abs() <= 1e-10);
        }
    }

    #[test]
    fn totally_geodesic_metric_at_origin() {
        let m = induced_metric(&get("totally_geodesic_h42"), (0.0, 0.0)).unwrap();
        assert_eq!((m.e, m.f, m.g), (1.0, 0.0, 1.0));
    }

    #[test]
    fn holomorphic_graph_metric_is_conformal() {
        let m = induced_metric(&holo("z^2/2"), (2.0, 0.0)).unwrap();
        assert!((m.e - 3.0).abs() < 1e-14 && (m.g - 3.0).abs() < 1e-14 && m.f.abs() < 1e-14);
        // |z| = 2 away from the real axis too
        let (s, t) = (2.0 * 0.6, 2.0 * 0.8);
        let m = induced_metric(&holo("z^2/2"), (s, t)).unwrap();
        assert!((m.e - 3.0).abs() < 1e-13 && m.f.abs() < 1e-13);
    }

    #[test]
    fn holomorphic_graph_rejects_non_space_like_domain() {
        let imm = holomorphic_graph(ComplexPolynomial::parse("z^2/2").unwrap())
            .with_domain(Domain::new(-0.5, 0.5, -0.5, 0.5).unwrap());
        assert!(matches!(
            imm.ensure_space_like(5),
            Err(Error::Degenerate { .. })
        ));
        let mut p = Params::new();
        p.insert("f".into(), "z/2".into());
        assert!(catalog_get("holomorphic_graph", &p).is_err());
    }

    #[test]
    fn polynomial_parsing() {
        let p = ComplexPolynomial::parse("2*z + z^2/4").unwrap();
        let c: Vec<f64> = p.coeffs().iter().map(|c| c.re).collect();
        assert_eq!(c, vec![0.0, 2.0, 0.25]);
        let [f0, f1, f2] = p.eval_with_derivatives(Complex64::new(2.0, 0.0));
        assert_eq!((f0.re, f1.re, f2.re), (5.0, 3.0, 0.5));
        assert!(ComplexPolynomial::parse("exp(z)").is_err());
        assert!(ComplexPolynomial::parse("1/z").is_err());
        assert!(ComplexPolynomial::parse("z^0.5").is_err());
    }

    #[test]
    fn random_polynomial_is_deterministic_and_space_like() {
        let a = random_polynomial(7, 0.1)
            .unwrap()
            .evaluate(0.1, 0.2)
            .unwrap();
        let b = random_polynomial(7, 0.1)
            .unwrap()
            .evaluate(0.1, 0.2)
            .unwrap();
        assert_eq!(a, b);
        let c = random_polynomial(8, 0.1)
            .unwrap()
            .evaluate(0.1, 0.2)
            .unwrap();
        assert_ne!(a, c);
        assert!(random_polynomial(1, 0.5).is_err());
    }

    #[test]
    fn domain_parses_its_display_form() {
        let d: Domain = "1.2:2,0.5:1.5".parse().unwrap();
        assert_eq!(d, HOLOMORPHIC_DOMAIN);
        assert_eq!(d.to_string().parse::<Domain>().unwrap(), d);
        assert!("1:0,0:1".parse::<Domain>().is_err());
        assert!("0:1".parse::<Domain>().is_err());
    }

    #[test]
    fn unknown_names_and_parameters_are_rejected() {
        assert!(catalog_get("nope", &Params::new()).is_err());
        let mut p = Params::new();
        p.insert("q".into(), "1".into());
        assert!(catalog_get("phi_h42", &p).is_err());
    }

    #[test]
    fn umbilical_surface_lies_on_hyperboloid() {
        let imm = get("umbilical_flat");
        for (s, t) in imm.domain().grid(5, 5) {
            let x = imm.evaluate(s, t).unwrap().position();
            assert!((inner(&x, &x).unwrap() + 1.0).abs() < 1e-12);
        }
    }
}
