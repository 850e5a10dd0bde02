//! The sixteen solvable systems and their tabulated data.
//!
//! Finite discrete systems live on `x = 0..=N` with a tridiagonal Hamiltonian
//! built from birth rates `B(x)` and death rates `D(x)`. The sinusoidal
//! coordinate `eta(x)` satisfies a three-term recurrence in the energy basis
//! with coefficients `A_n` (raising), `B_n` (diagonal) and `C_n` (lowering).
//!
//! Boundary values are definitional: `D(0) = 0`, `B(N) = 0`, `C_0 = 0` and
//! `A_N = 0`. The closed forms are only evaluated strictly inside the range.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{parse_rational, Mode, NumericError, Scalar};

/// Probe range for positivity checks on infinite systems.
pub const DEFAULT_PROBE: u32 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown system '{0}'")]
    UnknownSystem(String),
    #[error("{kind}: missing parameter '{name}'")]
    MissingParameter { kind: SystemKind, name: String },
    #[error("{kind}: unexpected parameter '{name}'")]
    UnknownParameter { kind: SystemKind, name: String },
    #[error("{kind}: parameter out of range, requires {constraint}")]
    ParameterOutOfRange { kind: SystemKind, constraint: String },
    #[error("{kind}: positivity violated: {detail}")]
    PositivityViolation { kind: SystemKind, detail: String },
    #[error("{kind}: N must be a positive integer for a finite system")]
    SizeRequired { kind: SystemKind },
    #[error("{kind}: infinite system does not take N")]
    SizeNotAllowed { kind: SystemKind },
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: u32, max: u32 },
    #[error("{kind}: {quantity} is not defined for this system")]
    NotApplicable { kind: SystemKind, quantity: &'static str },
    #[error("{kind}: {quantity} is singular at index {index}")]
    Singular {
        kind: SystemKind,
        quantity: &'static str,
        index: u32,
    },
    #[error("invalid mode '{0}', expected 'exact' or 'bigreal'")]
    InvalidMode(String),
    #[error("invalid system definition: {0}")]
    Definition(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    Krawtchouk,
    Hahn,
    DualHahn,
    Racah,
    QuantumQKrawtchouk,
    QKrawtchouk,
    AffineQKrawtchouk,
    QHahn,
    DualQHahn,
    QRacah,
    Meixner,
    Charlier,
    Hermite,
    Laguerre,
    Gegenbauer,
    Jacobi,
}

use SystemKind::*;

impl SystemKind {
    pub const ALL: [SystemKind; 16] = [
        Krawtchouk,
        Hahn,
        DualHahn,
        Racah,
        QuantumQKrawtchouk,
        QKrawtchouk,
        AffineQKrawtchouk,
        QHahn,
        DualQHahn,
        QRacah,
        Meixner,
        Charlier,
        Hermite,
        Laguerre,
        Gegenbauer,
        Jacobi,
    ];

    pub const FINITE: [SystemKind; 10] = [
        Krawtchouk,
        Hahn,
        DualHahn,
        Racah,
        QuantumQKrawtchouk,
        QKrawtchouk,
        AffineQKrawtchouk,
        QHahn,
        DualQHahn,
        QRacah,
    ];

    pub const INFINITE: [SystemKind; 6] = [Meixner, Charlier, Hermite, Laguerre, Gegenbauer, Jacobi];

    pub fn name(self) -> &'static str {
        match self {
            Krawtchouk => "krawtchouk",
            Hahn => "hahn",
            DualHahn => "dual_hahn",
            Racah => "racah",
            QuantumQKrawtchouk => "quantum_q_krawtchouk",
            QKrawtchouk => "q_krawtchouk",
            AffineQKrawtchouk => "affine_q_krawtchouk",
            QHahn => "q_hahn",
            DualQHahn => "dual_q_hahn",
            QRacah => "q_racah",
            Meixner => "meixner",
            Charlier => "charlier",
            Hermite => "hermite",
            Laguerre => "laguerre",
            Gegenbauer => "gegenbauer",
            Jacobi => "jacobi",
        }
    }

    /// Accepts the snake-case name, with `-` allowed in place of `_`.
    pub fn from_name(s: &str) -> Result<SystemKind, CatalogError> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| CatalogError::UnknownSystem(s.to_string()))
    }

    pub fn is_finite(self) -> bool {
        SystemKind::FINITE.contains(&self)
    }

    /// Meixner and Charlier: infinite but still a birth and death chain.
    pub fn is_discrete(self) -> bool {
        self.is_finite() || matches!(self, Meixner | Charlier)
    }

    pub fn uses_q(self) -> bool {
        matches!(
            self,
            QuantumQKrawtchouk | QKrawtchouk | AffineQKrawtchouk | QHahn | DualQHahn | QRacah
        )
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Krawtchouk => &["p"],
            Hahn | DualHahn => &["a", "b"],
            Racah => &["a", "b", "d"],
            QuantumQKrawtchouk | QKrawtchouk | AffineQKrawtchouk => &["p", "q"],
            QHahn | DualQHahn => &["a", "b", "q"],
            QRacah => &["a", "b", "d", "q"],
            Meixner => &["b", "c"],
            Charlier => &["a"],
            Hermite => &[],
            Laguerre | Gegenbauer => &["g"],
            Jacobi => &["g", "h"],
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raising, diagonal and lowering coefficients of `eta` in the energy basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    pub raising: Scalar,
    pub diagonal: Scalar,
    pub lowering: Scalar,
}

/// Polynomial in the Hamiltonian, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolynomial(pub Vec<Scalar>);

impl HPolynomial {
    pub fn eval(&self, h: &Scalar) -> Scalar {
        let mut acc = h.mode().zero();
        for c in self.0.iter().rev() {
            acc = acc * h + c;
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

/// Serialized form of a system: `{"kind", "N", "params", "mode", "precision"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDefinition {
    pub kind: String,
    #[serde(rename = "N", default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default = "default_mode_name")]
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

fn default_mode_name() -> String {
    "bigreal".to_string()
}

impl SystemDefinition {
    pub fn from_json(s: &str) -> Result<SystemDefinition, CatalogError> {
        serde_json::from_str(s).map_err(|e| CatalogError::Definition(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("definition serializes")
    }

    pub fn resolved_mode(&self) -> Result<Mode, CatalogError> {
        match self.mode.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "bigreal" => match self.precision {
                Some(d) => Ok(Mode::bigreal(d)?),
                None => Ok(Mode::default_bigreal()),
            },
            other => Err(CatalogError::InvalidMode(other.to_string())),
        }
    }

    pub fn build(&self) -> Result<SystemSpec, CatalogError> {
        let kind = SystemKind::from_name(&self.kind)?;
        let mode = self.resolved_mode()?;
        let mut params = BTreeMap::new();
        for (k, v) in &self.params {
            params.insert(k.clone(), parse_rational(v)?);
        }
        SystemSpec::new(kind, self.n, &params, mode)
    }
}

/// A validated system: kind, size, parameters and arithmetic mode.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    kind: SystemKind,
    size: Option<u32>,
    mode: Mode,
    exact_params: BTreeMap<String, BigRational>,
    params: BTreeMap<String, Scalar>,
    dtilde: Option<Scalar>,
}

impl SystemSpec {
    /// Builds and validates a system from exact parameter values.
    pub fn new(
        kind: SystemKind,
        size: Option<u32>,
        params: &BTreeMap<String, BigRational>,
        mode: Mode,
    ) -> Result<SystemSpec, CatalogError> {
        SystemSpec::with_probe(kind, size, params, mode, DEFAULT_PROBE)
    }

    pub fn with_probe(
        kind: SystemKind,
        size: Option<u32>,
        params: &BTreeMap<String, BigRational>,
        mode: Mode,
        probe: u32,
    ) -> Result<SystemSpec, CatalogError> {
        match (kind.is_finite(), size) {
            (true, None) | (true, Some(0)) => return Err(CatalogError::SizeRequired { kind }),
            (false, Some(_)) => return Err(CatalogError::SizeNotAllowed { kind }),
            _ => {}
        }
        for name in kind.param_names() {
            if !params.contains_key(*name) {
                return Err(CatalogError::MissingParameter {
                    kind,
                    name: name.to_string(),
                });
            }
        }
        if let Some(extra) = params.keys().find(|k| !kind.param_names().contains(&k.as_str())) {
            return Err(CatalogError::UnknownParameter {
                kind,
                name: extra.clone(),
            });
        }
        let scalars = params.iter().map(|(k, v)| (k.clone(), mode.rational(v))).collect();
        let mut spec = SystemSpec {
            kind,
            size,
            mode,
            exact_params: params.clone(),
            params: scalars,
            dtilde: None,
        };
        spec.dtilde = spec.compute_dtilde();
        spec.check_ranges()?;
        spec.check_positivity(probe)?;
        Ok(spec)
    }

    /// Convenience constructor from `name=value` string pairs.
    pub fn from_strs(
        kind: SystemKind,
        size: Option<u32>,
        params: &[(&str, &str)],
        mode: Mode,
    ) -> Result<SystemSpec, CatalogError> {
        let mut map = BTreeMap::new();
        for (k, v) in params {
            map.insert(k.to_string(), parse_rational(v)?);
        }
        SystemSpec::new(kind, size, &map, mode)
    }

    /// The same system re-evaluated in another mode.
    pub fn to_mode(&self, mode: Mode) -> Result<SystemSpec, CatalogError> {
        SystemSpec::new(self.kind, self.size, &self.exact_params, mode)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn size(&self) -> Option<u32> {
        self.size
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_finite(&self) -> bool {
        self.kind.is_finite()
    }

    /// Hilbert-space dimension `N+1` of a finite system.
    pub fn dimension(&self) -> Option<usize> {
        self.size.map(|n| n as usize + 1)
    }

    pub fn param(&self, name: &str) -> Option<&Scalar> {
        self.params.get(name)
    }

    pub fn exact_params(&self) -> &BTreeMap<String, BigRational> {
        &self.exact_params
    }

    pub fn definition(&self) -> SystemDefinition {
        SystemDefinition {
            kind: self.kind.name().to_string(),
            n: self.size,
            params: self
                .exact_params
                .iter()
                .map(|(k, v)| (k.clone(), Scalar::Exact(v.clone()).to_string()))
                .collect(),
            mode: if self.mode.is_exact() { "exact" } else { "bigreal" }.to_string(),
            precision: self.mode.digits(),
        }
    }

    /// Human-readable label such as `krawtchouk(N=5, p=1/2)`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.size {
            parts.push(format!("N={n}"));
        }
        for (k, v) in &self.exact_params {
            parts.push(format!("{k}={}", Scalar::Exact(v.clone())));
        }
        format!("{}({})", self.kind, parts.join(", "))
    }

    fn p(&self, name: &str) -> &Scalar {
        &self.params[name]
    }

    fn c(&self, v: i64) -> Scalar {
        self.mode.int(v)
    }

    fn q(&self) -> &Scalar {
        self.p("q")
    }

    fn qp(&self, k: i64) -> Scalar {
        self.q().powi(k as i32)
    }

    fn big_n(&self) -> i64 {
        self.size.unwrap_or(0) as i64
    }

    /// `(q^{-1/2} - q^{1/2})^2 = q^{-1} + q - 2`.
    fn kappa_sq(&self) -> Scalar {
        self.qp(-1) + self.q() - self.c(2)
    }

    fn compute_dtilde(&self) -> Option<Scalar> {
        match self.kind {
            Racah => Some(self.p("a") + self.p("b") - self.c(self.big_n()) - self.p("d") - self.c(1)),
            QRacah => Some(self.p("a") * self.p("b") / self.p("d") * self.qp(-self.big_n() - 1)),
            _ => None,
        }
    }

    /// `d~` of the Racah and q-Racah systems.
    pub fn dtilde(&self) -> Option<&Scalar> {
        self.dtilde.as_ref()
    }

    fn dt(&self) -> &Scalar {
        self.dtilde.as_ref().expect("dtilde defined for Racah systems")
    }

    fn check_ranges(&self) -> Result<(), CatalogError> {
        let zero = self.c(0);
        let one = self.c(1);
        let mut rules: Vec<(String, bool)> = Vec::new();
        if self.kind.uses_q() {
            let q = self.q();
            rules.push(("0<q<1".into(), q > &zero && q < &one));
        }
        let n = self.big_n();
        let gt = |name: &str, v: &Scalar| (format!("{name}>{v}"), self.p(name) > v);
        let lt = |name: &str, v: &Scalar| (format!("{name}<{v}"), self.p(name) < v);
        match self.kind {
            Krawtchouk => {
                rules.push(gt("p", &zero));
                rules.push(lt("p", &one));
            }
            Hahn | DualHahn => {
                rules.push(gt("a", &zero));
                rules.push(gt("b", &zero));
            }
            Racah => {
                let d = self.p("d");
                rules.push(gt("d", &zero));
                rules.push(("a>N+d".into(), self.p("a") > &(self.c(n) + d)));
                rules.push(gt("b", &zero));
                rules.push(("b<1+d".into(), self.p("b") < &(&one + d)));
            }
            QuantumQKrawtchouk => {
                rules.push(("p>q^-N".into(), self.p("p") > &self.qp(-n)));
            }
            QKrawtchouk => rules.push(gt("p", &zero)),
            AffineQKrawtchouk => {
                rules.push(gt("p", &zero));
                rules.push(("p<q^-1".into(), self.p("p") < &self.qp(-1)));
            }
            QHahn | DualQHahn => {
                for name in ["a", "b"] {
                    rules.push(gt(name, &zero));
                    rules.push(lt(name, &one));
                }
            }
            QRacah => {
                let d = self.p("d");
                rules.push(gt("d", &zero));
                rules.push(lt("d", &one));
                rules.push(gt("a", &zero));
                rules.push(("a<q^N*d".into(), self.p("a") < &(self.qp(n) * d)));
                rules.push(("b>q*d".into(), self.p("b") > &(self.q() * d)));
                rules.push(lt("b", &one));
            }
            Meixner => {
                rules.push(gt("c", &zero));
                rules.push(lt("c", &one));
                rules.push(gt("b", &zero));
            }
            Charlier => rules.push(gt("a", &zero)),
            Hermite => {}
            Laguerre | Gegenbauer => rules.push(gt("g", &one)),
            Jacobi => {
                rules.push(gt("g", &one));
                rules.push(gt("h", &one));
            }
        }
        match rules.into_iter().find(|(_, ok)| !ok) {
            Some((constraint, _)) => Err(CatalogError::ParameterOutOfRange {
                kind: self.kind,
                constraint,
            }),
            None => Ok(()),
        }
    }

    fn check_positivity(&self, probe: u32) -> Result<(), CatalogError> {
        let kind = self.kind;
        let fail = |detail: String| Err(CatalogError::PositivityViolation { kind, detail });
        let last = self.size.unwrap_or(probe);
        if kind.is_discrete() {
            for x in 0..last {
                let b = self.birth(x)?;
                if !b.is_positive() {
                    return fail(format!("B({x}) = {b} is not positive"));
                }
                let d = self.death(x + 1)?;
                if !d.is_positive() {
                    return fail(format!("D({}) = {d} is not positive", x + 1));
                }
            }
        }
        for n in 0..last {
            let a = self.recurrence(n)?.raising;
            let c = self.recurrence(n + 1)?.lowering;
            if kind.is_discrete() && (!a.is_negative() || !c.is_negative()) {
                return fail(format!("A_{n} = {a}, C_{} = {c} must both be negative", n + 1));
            }
            let prod = &a * &c;
            if !prod.is_positive() {
                return fail(format!("A_{n} C_{} = {prod} is not positive", n + 1));
            }
        }
        Ok(())
    }

    fn check_index(&self, i: u32) -> Result<(), CatalogError> {
        match self.size {
            Some(n) if i > n => Err(CatalogError::IndexOutOfRange { index: i, max: n }),
            _ => Ok(()),
        }
    }

    fn div(&self, num: Scalar, den: Scalar, quantity: &'static str, index: u32) -> Result<Scalar, CatalogError> {
        num.try_div(&den).map_err(|_| CatalogError::Singular {
            kind: self.kind,
            quantity,
            index,
        })
    }

    /// Birth rate `B(x)`; zero at `x = N`.
    pub fn birth(&self, x: u32) -> Result<Scalar, CatalogError> {
        if !self.kind.is_discrete() {
            return Err(CatalogError::NotApplicable {
                kind: self.kind,
                quantity: "B(x)",
            });
        }
        self.check_index(x)?;
        if self.size == Some(x) {
            return Ok(self.c(0));
        }
        let one = self.c(1);
        let xs = self.c(x as i64);
        let n = self.c(self.big_n());
        let xi = x as i64;
        let nn = self.big_n();
        let v = match self.kind {
            Krawtchouk => self.p("p") * (&n - &xs),
            DualHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                if x == 0 {
                    self.div(a * &n, a + b, "B(x)", x)?
                } else {
                    let num = (&xs + a) * (&xs + a + b - &one) * (&n - &xs);
                    let den = (self.c(2 * xi - 1) + a + b) * (self.c(2 * xi) + a + b);
                    self.div(num, den, "B(x)", x)?
                }
            }
            AffineQKrawtchouk => (self.qp(xi - nn) - &one) * (&one - self.p("p") * self.qp(xi + 1)),
            DualQHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let ab = a * b;
                if x == 0 {
                    self.div((self.qp(-nn) - &one) * (&one - a), &one - &ab, "B(x)", x)?
                } else {
                    let num = (self.qp(xi - nn) - &one) * (&one - a * self.qp(xi)) * (&one - &ab * self.qp(xi - 1));
                    let den = (&one - &ab * self.qp(2 * xi - 1)) * (&one - &ab * self.qp(2 * xi));
                    self.div(num, den, "B(x)", x)?
                }
            }
            QuantumQKrawtchouk => self.p("p").recip()? * self.qp(xi) * (self.qp(xi - nn) - &one),
            QKrawtchouk => self.qp(xi - nn) - &one,
            Hahn => (&xs + self.p("a")) * (&n - &xs),
            Racah => {
                let (a, b, d) = (self.p("a"), self.p("b"), self.p("d"));
                if x == 0 {
                    self.div(a * b * &n, d + &one, "B(x)", x)?
                } else {
                    let num = -((&xs + a) * (&xs + b) * (&xs - &n) * (&xs + d));
                    let den = (self.c(2 * xi) + d) * (self.c(2 * xi + 1) + d);
                    self.div(num, den, "B(x)", x)?
                }
            }
            QHahn => (&one - self.p("a") * self.qp(xi)) * (self.qp(xi - nn) - &one),
            QRacah => {
                let (a, b, d) = (self.p("a"), self.p("b"), self.p("d"));
                if x == 0 {
                    let num = -((&one - a) * (&one - b) * (&one - self.qp(-nn)));
                    self.div(num, &one - d * self.q(), "B(x)", x)?
                } else {
                    let num = -((&one - a * self.qp(xi))
                        * (&one - b * self.qp(xi))
                        * (&one - self.qp(xi - nn))
                        * (&one - d * self.qp(xi)));
                    let den = (&one - d * self.qp(2 * xi)) * (&one - d * self.qp(2 * xi + 1));
                    self.div(num, den, "B(x)", x)?
                }
            }
            Meixner => {
                let c = self.p("c");
                c / (&one - c) * (&xs + self.p("b"))
            }
            Charlier => self.p("a").clone(),
            Hermite | Laguerre | Gegenbauer | Jacobi => unreachable!(),
        };
        Ok(v)
    }

    /// Death rate `D(x)`; zero at `x = 0`.
    pub fn death(&self, x: u32) -> Result<Scalar, CatalogError> {
        if !self.kind.is_discrete() {
            return Err(CatalogError::NotApplicable {
                kind: self.kind,
                quantity: "D(x)",
            });
        }
        self.check_index(x)?;
        if x == 0 {
            return Ok(self.c(0));
        }
        let one = self.c(1);
        let xs = self.c(x as i64);
        let n = self.c(self.big_n());
        let xi = x as i64;
        let nn = self.big_n();
        let v = match self.kind {
            Krawtchouk => (&one - self.p("p")) * &xs,
            DualHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let num = &xs * (&xs + b - &one) * (&xs + a + b + &n - &one);
                let den = (self.c(2 * xi - 2) + a + b) * (self.c(2 * xi - 1) + a + b);
                self.div(num, den, "D(x)", x)?
            }
            AffineQKrawtchouk => self.p("p") * self.qp(xi - nn) * (&one - self.qp(xi)),
            DualQHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let ab = a * b;
                let num = a
                    * self.qp(xi - nn - 1)
                    * (&one - self.qp(xi))
                    * (&one - &ab * self.qp(xi + nn - 1))
                    * (&one - b * self.qp(xi - 1));
                let den = (&one - &ab * self.qp(2 * xi - 2)) * (&one - &ab * self.qp(2 * xi - 1));
                self.div(num, den, "D(x)", x)?
            }
            QuantumQKrawtchouk => (&one - self.qp(xi)) * (&one - self.p("p").recip()? * self.qp(xi - nn - 1)),
            QKrawtchouk => self.p("p") * (&one - self.qp(xi)),
            Hahn => &xs * (self.p("b") + &n - &xs),
            Racah => {
                let (a, b, d) = (self.p("a"), self.p("b"), self.p("d"));
                let num = -((&xs + d - a) * (&xs + d - b) * (&xs + d + &n) * &xs);
                let den = (self.c(2 * xi - 1) + d) * (self.c(2 * xi) + d);
                self.div(num, den, "D(x)", x)?
            }
            QHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                a * self.qp(-1) * (&one - self.qp(xi)) * (self.qp(xi - nn) - b)
            }
            QRacah => {
                let (a, b, d) = (self.p("a"), self.p("b"), self.p("d"));
                let qx = self.qp(xi);
                let num = -(self.dt()
                    * (&one - d / a * &qx)
                    * (&one - d / b * &qx)
                    * (&one - d * self.qp(nn + xi))
                    * (&one - &qx));
                let den = (&one - d * self.qp(2 * xi - 1)) * (&one - d * self.qp(2 * xi));
                self.div(num, den, "D(x)", x)?
            }
            Meixner => &xs / (&one - self.p("c")),
            Charlier => xs,
            Hermite | Laguerre | Gegenbauer | Jacobi => unreachable!(),
        };
        Ok(v)
    }

    /// Sinusoidal coordinate `eta(x)` of a discrete system.
    pub fn sinusoidal(&self, x: u32) -> Result<Scalar, CatalogError> {
        if !self.kind.is_discrete() {
            return Err(CatalogError::NotApplicable {
                kind: self.kind,
                quantity: "eta(x)",
            });
        }
        self.check_index(x)?;
        let one = self.c(1);
        let xs = self.c(x as i64);
        let xi = x as i64;
        let v = match self.kind {
            Krawtchouk | Hahn | Meixner | Charlier => xs,
            DualHahn => &xs * (&xs + self.p("a") + self.p("b") - &one),
            Racah => &xs * (&xs + self.p("d")),
            AffineQKrawtchouk | QuantumQKrawtchouk | QKrawtchouk | QHahn => self.qp(-xi) - &one,
            DualQHahn => (self.qp(-xi) - &one) * (&one - self.p("a") * self.p("b") * self.qp(xi - 1)),
            QRacah => (self.qp(-xi) - &one) * (&one - self.p("d") * self.qp(xi)),
            Hermite | Laguerre | Gegenbauer | Jacobi => unreachable!(),
        };
        Ok(v)
    }

    /// Energy eigenvalue `E(n)`.
    pub fn energy(&self, n: u32) -> Result<Scalar, CatalogError> {
        self.check_index(n)?;
        let one = self.c(1);
        let ns = self.c(n as i64);
        let ni = n as i64;
        let v = match self.kind {
            Krawtchouk | DualHahn | Meixner | Charlier => ns,
            AffineQKrawtchouk | DualQHahn => self.qp(-ni) - &one,
            QuantumQKrawtchouk => &one - self.qp(ni),
            QKrawtchouk => (self.qp(-ni) - &one) * (&one + self.p("p") * self.qp(ni)),
            Hahn => &ns * (&ns + self.p("a") + self.p("b") - &one),
            Racah => &ns * (&ns + self.dt()),
            QHahn => (self.qp(-ni) - &one) * (&one - self.p("a") * self.p("b") * self.qp(ni - 1)),
            QRacah => (self.qp(-ni) - &one) * (&one - self.dt() * self.qp(ni)),
            Hermite => self.c(2) * ns,
            Laguerre => self.c(4) * ns,
            Gegenbauer => &ns * (&ns + self.c(2) * self.p("g")),
            Jacobi => self.c(4) * &ns * (&ns + self.p("g") + self.p("h")),
        };
        Ok(v)
    }

    /// `(alpha_+(E(n)), alpha_-(E(n)))` from the tabulated closed forms.
    pub fn alpha_pm(&self, n: u32) -> Result<(Scalar, Scalar), CatalogError> {
        self.check_index(n)?;
        let one = self.c(1);
        let ns = self.c(n as i64);
        let ni = n as i64;
        let pm = |v: i64| (self.c(v), self.c(-v));
        let v = match self.kind {
            Krawtchouk | DualHahn | Meixner | Charlier => pm(1),
            Hermite => pm(2),
            Laguerre => pm(4),
            AffineQKrawtchouk | DualQHahn => ((self.qp(-1) - &one) * self.qp(-ni), (self.q() - &one) * self.qp(-ni)),
            QuantumQKrawtchouk => ((&one - self.q()) * self.qp(ni), -((self.qp(-1) - &one) * self.qp(ni))),
            QKrawtchouk => {
                let p = self.p("p");
                (
                    (self.qp(-1) - &one) * (self.qp(-ni) + p * self.qp(ni + 1)),
                    -((&one - self.q()) * (self.qp(-ni) + p * self.qp(ni - 1))),
                )
            }
            Hahn => {
                let s = self.p("a") + self.p("b");
                (self.c(2) * &ns + &s, -(self.c(2) * &ns + &s - self.c(2)))
            }
            Racah => (
                self.c(2) * &ns + self.dt() + &one,
                -(self.c(2) * &ns + self.dt() - &one),
            ),
            QHahn => {
                let ab = self.p("a") * self.p("b");
                (
                    (self.qp(-1) - &one) * (self.qp(-ni) - &ab * self.qp(ni)),
                    -((&one - self.q()) * (self.qp(-ni) - &ab * self.qp(ni - 2))),
                )
            }
            QRacah => (
                (self.qp(-1) - &one) * (self.qp(-ni) - self.dt() * self.qp(ni + 1)),
                -((&one - self.q()) * (self.qp(-ni) - self.dt() * self.qp(ni - 1))),
            ),
            Gegenbauer => {
                let g = self.p("g");
                (self.c(2) * (&ns + g) + &one, -(self.c(2) * &ns + self.c(2) * g - &one))
            }
            Jacobi => {
                let s = self.p("g") + self.p("h");
                (
                    self.c(4) * (self.c(2) * &ns + &s + &one),
                    -(self.c(4) * (self.c(2) * &ns + &s - &one)),
                )
            }
        };
        Ok(v)
    }

    /// `R_0` and `R_1` as polynomials in the Hamiltonian.
    pub fn closure_polynomials(&self) -> (HPolynomial, HPolynomial) {
        let c = |v: i64| self.c(v);
        let (r0, r1) = match self.kind {
            Krawtchouk | DualHahn | Meixner | Charlier => (vec![c(1)], vec![c(0)]),
            Hermite => (vec![c(4)], vec![c(0)]),
            Laguerre => (vec![c(16)], vec![c(0)]),
            AffineQKrawtchouk | DualQHahn => shifted_square(self.kappa_sq(), c(1), c(0)),
            QuantumQKrawtchouk => shifted_square(self.kappa_sq(), c(-1), c(0)),
            QKrawtchouk => {
                let p = self.p("p");
                let extra = p * (self.qp(-1) + self.q() + c(2));
                shifted_square(self.kappa_sq(), c(1) - p, extra)
            }
            Hahn => {
                let s = self.p("a") + self.p("b");
                (vec![(&s - c(2)) * &s, c(4)], vec![c(2)])
            }
            Racah => (vec![self.dt().square() - c(1), c(4)], vec![c(2)]),
            QHahn => {
                let ab = self.p("a") * self.p("b");
                let shift = c(1) + &ab * self.qp(-1);
                let extra = -(&ab * (c(1) + self.qp(-1)).square());
                shifted_square(self.kappa_sq(), shift, extra)
            }
            QRacah => {
                let shift = c(1) + self.dt();
                let extra = -((self.qp(-1) + self.q() + c(2)) * self.dt());
                shifted_square(self.kappa_sq(), shift, extra)
            }
            Gegenbauer => (vec![c(4) * self.p("g").square() - c(1), c(4)], vec![c(2)]),
            Jacobi => {
                let s = self.p("g") + self.p("h");
                (vec![c(16) * (s.square() - c(1)), c(16)], vec![c(8)])
            }
        };
        (HPolynomial(r0), HPolynomial(r1))
    }

    /// Three-term recurrence coefficients at level `n`.
    pub fn recurrence(&self, n: u32) -> Result<Recurrence, CatalogError> {
        self.check_index(n)?;
        let raising = if self.size == Some(n) {
            self.c(0)
        } else {
            self.raising(n)?
        };
        let lowering = if n == 0 { self.c(0) } else { self.lowering(n)? };
        let diagonal = match self.kind {
            Hermite | Gegenbauer => self.c(0),
            Laguerre => self.c(2 * n as i64) + self.p("g") + self.mode.ratio(1, 2),
            Jacobi => {
                let (g, h) = (self.p("g"), self.p("h"));
                let s = g + h;
                let ns = self.c(2 * n as i64);
                self.div(
                    (h - g) * (&s - self.c(1)),
                    (&ns + &s - self.c(1)) * (&ns + &s + self.c(1)),
                    "B_n",
                    n,
                )?
            }
            _ => -(&raising + &lowering),
        };
        Ok(Recurrence {
            raising,
            diagonal,
            lowering,
        })
    }

    fn raising(&self, n: u32) -> Result<Scalar, CatalogError> {
        let one = self.c(1);
        let ns = self.c(n as i64);
        let ni = n as i64;
        let nn = self.big_n();
        let big = self.c(nn);
        let v = match self.kind {
            Krawtchouk => -(self.p("p") * (&big - &ns)),
            DualHahn => -((&ns + self.p("a")) * (&big - &ns)),
            AffineQKrawtchouk => -((self.qp(ni - nn) - &one) * (&one - self.p("p") * self.qp(ni + 1))),
            DualQHahn => -((&one - self.p("a") * self.qp(ni)) * (self.qp(ni - nn) - &one)),
            QuantumQKrawtchouk => -(self.p("p").recip()? * self.qp(-ni - nn - 1) * (&one - self.qp(nn - ni))),
            QKrawtchouk => {
                let p = self.p("p");
                if n == 0 {
                    self.div(-(self.qp(-nn) - &one), &one + p * self.q(), "A_n", n)?
                } else {
                    let num = -((self.qp(ni - nn) - &one) * (&one + p * self.qp(ni)));
                    let den = (&one + p * self.qp(2 * ni)) * (&one + p * self.qp(2 * ni + 1));
                    self.div(num, den, "A_n", n)?
                }
            }
            Hahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let s = a + b;
                if n == 0 {
                    self.div(-(a * &big), s, "A_n", n)?
                } else {
                    let num = -((&ns + a) * (&ns + &s - &one) * (&big - &ns));
                    let den = (self.c(2 * ni - 1) + &s) * (self.c(2 * ni) + &s);
                    self.div(num, den, "A_n", n)?
                }
            }
            Racah => {
                let (a, b, dt) = (self.p("a"), self.p("b"), self.dt());
                if n == 0 {
                    self.div(-(a * b * &big), dt + &one, "A_n", n)?
                } else {
                    let num = (&ns + a) * (&ns + b) * (&ns - &big) * (&ns + dt);
                    let den = (self.c(2 * ni) + dt) * (self.c(2 * ni + 1) + dt);
                    self.div(num, den, "A_n", n)?
                }
            }
            QHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let ab = a * b;
                if n == 0 {
                    self.div(-((self.qp(-nn) - &one) * (&one - a)), &one - &ab, "A_n", n)?
                } else {
                    let num = -((self.qp(ni - nn) - &one) * (&one - a * self.qp(ni)) * (&one - &ab * self.qp(ni - 1)));
                    let den = (&one - &ab * self.qp(2 * ni - 1)) * (&one - &ab * self.qp(2 * ni));
                    self.div(num, den, "A_n", n)?
                }
            }
            QRacah => {
                let (a, b, dt) = (self.p("a"), self.p("b"), self.dt());
                if n == 0 {
                    let num = (&one - a) * (&one - b) * (&one - self.qp(-nn));
                    self.div(num, &one - dt * self.q(), "A_n", n)?
                } else {
                    let num = (&one - a * self.qp(ni))
                        * (&one - b * self.qp(ni))
                        * (&one - self.qp(ni - nn))
                        * (&one - dt * self.qp(ni));
                    let den = (&one - dt * self.qp(2 * ni)) * (&one - dt * self.qp(2 * ni + 1));
                    self.div(num, den, "A_n", n)?
                }
            }
            Meixner => {
                let c = self.p("c");
                -(c * (&ns + self.p("b")) / (&one - c))
            }
            Charlier => -self.p("a"),
            Hermite => self.mode.ratio(1, 2),
            Laguerre => -(&ns + &one),
            Gegenbauer => {
                let g = self.p("g");
                self.div(&ns + &one, self.c(2) * (&ns + g), "A_n", n)?
            }
            Jacobi => {
                let s = self.p("g") + self.p("h");
                let two_n = self.c(2 * ni);
                self.div(
                    self.c(2) * (&ns + &one) * (&ns + &s),
                    (&two_n + &s) * (&two_n + &s + &one),
                    "A_n",
                    n,
                )?
            }
        };
        Ok(v)
    }

    fn lowering(&self, n: u32) -> Result<Scalar, CatalogError> {
        let one = self.c(1);
        let ns = self.c(n as i64);
        let ni = n as i64;
        let nn = self.big_n();
        let big = self.c(nn);
        let v = match self.kind {
            Krawtchouk => -((&one - self.p("p")) * &ns),
            DualHahn => -(&ns * (self.p("b") + &big - &ns)),
            AffineQKrawtchouk => -(self.p("p") * self.qp(ni - nn) * (&one - self.qp(ni))),
            DualQHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                -(a * self.qp(-1) * (&one - self.qp(ni)) * (self.qp(ni - nn) - b))
            }
            QuantumQKrawtchouk => -((self.qp(-ni) - &one) * (&one - self.p("p").recip()? * self.qp(-ni))),
            QKrawtchouk => {
                let p = self.p("p");
                let num = -(p * self.qp(2 * ni - nn - 1) * (&one - self.qp(ni)) * (&one + p * self.qp(ni + nn)));
                let den = (&one + p * self.qp(2 * ni - 1)) * (&one + p * self.qp(2 * ni));
                self.div(num, den, "C_n", n)?
            }
            Hahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let s = a + b;
                let num = -(&ns * (&ns + b - &one) * (&ns + &s + &big - &one));
                let den = (self.c(2 * ni - 2) + &s) * (self.c(2 * ni - 1) + &s);
                self.div(num, den, "C_n", n)?
            }
            Racah => {
                let (a, b, dt) = (self.p("a"), self.p("b"), self.dt());
                let num = (&ns + dt - a) * (&ns + dt - b) * (&ns + dt + &big) * &ns;
                let den = (self.c(2 * ni - 1) + dt) * (self.c(2 * ni) + dt);
                self.div(num, den, "C_n", n)?
            }
            QHahn => {
                let (a, b) = (self.p("a"), self.p("b"));
                let ab = a * b;
                let num = -(a
                    * self.qp(ni - nn - 1)
                    * (&one - self.qp(ni))
                    * (&one - &ab * self.qp(ni + nn - 1))
                    * (&one - b * self.qp(ni - 1)));
                let den = (&one - &ab * self.qp(2 * ni - 2)) * (&one - &ab * self.qp(2 * ni - 1));
                self.div(num, den, "C_n", n)?
            }
            QRacah => {
                let (a, b, d, dt) = (self.p("a"), self.p("b"), self.p("d"), self.dt());
                let qn = self.qp(ni);
                let num =
                    d * (&one - dt / a * &qn) * (&one - dt / b * &qn) * (&one - dt * self.qp(ni + nn)) * (&one - &qn);
                let den = (&one - dt * self.qp(2 * ni - 1)) * (&one - dt * self.qp(2 * ni));
                self.div(num, den, "C_n", n)?
            }
            Meixner => -(&ns / (&one - self.p("c"))),
            Charlier => -ns,
            Hermite => ns,
            Laguerre => -(&ns + self.p("g") - self.mode.ratio(1, 2)),
            Gegenbauer => {
                let g = self.p("g");
                self.div(&ns + self.c(2) * g - &one, self.c(2) * (&ns + g), "C_n", n)?
            }
            Jacobi => {
                let (g, h) = (self.p("g"), self.p("h"));
                let s = g + h;
                let half = self.mode.ratio(1, 2);
                let two_n = self.c(2 * ni);
                self.div(
                    self.c(2) * (&ns + g - &half) * (&ns + h - &half),
                    (&two_n + &s - &one) * (&two_n + &s),
                    "C_n",
                    n,
                )?
            }
        };
        Ok(v)
    }

    /// `A_n C_{n+1}`, the squared off-diagonal of `eta` in the energy basis.
    pub fn coupling(&self, n: u32) -> Result<Scalar, CatalogError> {
        Ok(self.recurrence(n)?.raising * self.recurrence(n + 1)?.lowering)
    }

    /// The six spectrum shift relations between `E(n)` and `alpha_pm`, at `1 <= n < N`.
    pub fn spectrum_shift_relations(&self, n: u32) -> Result<bool, CatalogError> {
        if n == 0 {
            return Err(CatalogError::IndexOutOfRange { index: 0, max: 0 });
        }
        if let Some(size) = self.size {
            if n >= size {
                return Err(CatalogError::IndexOutOfRange {
                    index: n,
                    max: size.saturating_sub(1),
                });
            }
        }
        let tol = self.mode.tolerance();
        let e = |k| self.energy(k);
        let (ap_n, am_n) = self.alpha_pm(n)?;
        let (ap_prev, _) = self.alpha_pm(n - 1)?;
        let (_, am_next) = self.alpha_pm(n + 1)?;
        let checks = [
            (e(n + 1)? - e(n)?, ap_n.clone()),
            (e(n - 1)? - e(n)?, am_n.clone()),
            (e(n)? - e(n - 1)?, ap_prev.clone()),
            (e(n)? - e(n + 1)?, am_next.clone()),
            (ap_prev, -&am_n),
            (am_next, -&ap_n),
        ];
        Ok(checks.iter().all(|(l, r)| tol.approx_eq(l, r)))
    }

    /// `R_1(E)^2 + 4 R_0(E) == (alpha_+ - alpha_-)^2` and the root relations at level `n`.
    pub fn discriminant_is_square(&self, n: u32) -> Result<bool, CatalogError> {
        let (r0, r1) = self.closure_polynomials();
        let e = self.energy(n)?;
        let (ap, am) = self.alpha_pm(n)?;
        let r0e = r0.eval(&e);
        let r1e = r1.eval(&e);
        let tol = self.mode.tolerance();
        Ok(tol.approx_eq(&(r1e.square() + self.c(4) * &r0e), &(&ap - &am).square())
            && tol.approx_eq(&(&ap + &am), &r1e)
            && tol.approx_eq(&(&ap * &am), &-r0e))
    }

    /// `sum_x eta(x)^2` of a finite system.
    pub fn eta_norm_sq(&self) -> Result<Scalar, CatalogError> {
        let size = self.size.ok_or(CatalogError::NotApplicable {
            kind: self.kind,
            quantity: "||eta||^2 without thermal weights",
        })?;
        let mut acc = self.c(0);
        for x in 0..=size {
            acc = acc + self.sinusoidal(x)?.square();
        }
        Ok(acc)
    }
}

/// `k (H + s)^2 + k e` and `k (H + s)`, expanded.
fn shifted_square(k: Scalar, s: Scalar, e: Scalar) -> (Vec<Scalar>, Vec<Scalar>) {
    let two = k.mode().int(2);
    let r0 = vec![&k * (s.square() + &e), &k * &two * &s, k.clone()];
    let r1 = vec![&k * &s, k];
    (r0, r1)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow_rat(b: &BigRational, e: u32) -> BigRational {
    num_traits::pow(b.clone(), e as usize)
}

/// Valid rational parameter samples for `kind` at size `n`; the first is the default.
pub fn parameter_samples(kind: SystemKind, n: Option<u32>) -> Vec<BTreeMap<String, BigRational>> {
    let nn = n.unwrap_or(0);
    let nr = BigRational::from_integer(nn.into());
    let sets: Vec<Vec<(&str, BigRational)>> = match kind {
        Krawtchouk => vec![vec![("p", rat(1, 2))], vec![("p", rat(1, 3))], vec![("p", rat(3, 4))]],
        Hahn => vec![
            vec![("a", rat(1, 2)), ("b", rat(3, 2))],
            vec![("a", rat(1, 1)), ("b", rat(2, 1))],
            vec![("a", rat(3, 1)), ("b", rat(5, 2))],
        ],
        DualHahn => vec![
            vec![("a", rat(1, 1)), ("b", rat(2, 1))],
            vec![("a", rat(1, 2)), ("b", rat(3, 1))],
            vec![("a", rat(2, 1)), ("b", rat(2, 1))],
        ],
        Racah => vec![
            vec![("a", &nr + rat(2, 1)), ("b", rat(3, 2)), ("d", rat(1, 1))],
            vec![("a", &nr + rat(1, 1)), ("b", rat(1, 4)), ("d", rat(1, 2))],
            vec![("a", &nr + rat(5, 2)), ("b", rat(5, 2)), ("d", rat(2, 1))],
        ],
        QuantumQKrawtchouk => vec![
            vec![("p", rat(2, 1) * pow_rat(&rat(2, 1), nn)), ("q", rat(1, 2))],
            vec![("p", pow_rat(&rat(3, 1), nn) + rat(1, 1)), ("q", rat(1, 3))],
            vec![("p", pow_rat(&rat(3, 2), nn) + rat(1, 2)), ("q", rat(2, 3))],
        ],
        QKrawtchouk => vec![
            vec![("p", rat(1, 2)), ("q", rat(1, 2))],
            vec![("p", rat(2, 1)), ("q", rat(1, 3))],
            vec![("p", rat(1, 5)), ("q", rat(3, 4))],
        ],
        AffineQKrawtchouk => vec![
            vec![("p", rat(1, 1)), ("q", rat(1, 2))],
            vec![("p", rat(1, 2)), ("q", rat(1, 3))],
            vec![("p", rat(6, 5)), ("q", rat(3, 4))],
        ],
        QHahn | DualQHahn => vec![
            vec![("a", rat(1, 3)), ("b", rat(1, 2)), ("q", rat(1, 2))],
            vec![("a", rat(1, 2)), ("b", rat(1, 4)), ("q", rat(1, 3))],
            vec![("a", rat(2, 3)), ("b", rat(1, 5)), ("q", rat(3, 4))],
        ],
        QRacah => {
            let sample = |q: BigRational, d: BigRational, a_div: i64, b: BigRational| {
                let a = &d * pow_rat(&q, nn) / BigRational::from_integer(a_div.into());
                vec![("a", a), ("b", b), ("d", d), ("q", q)]
            };
            vec![
                sample(rat(1, 2), rat(1, 2), 2, rat(1, 2)),
                sample(rat(1, 3), rat(1, 4), 3, rat(1, 2)),
                sample(rat(2, 3), rat(3, 5), 2, rat(9, 10)),
            ]
        }
        Meixner => vec![
            vec![("b", rat(1, 1)), ("c", rat(1, 2))],
            vec![("b", rat(3, 2)), ("c", rat(1, 3))],
            vec![("b", rat(1, 2)), ("c", rat(2, 3))],
        ],
        Charlier => vec![vec![("a", rat(1, 1))], vec![("a", rat(1, 2))], vec![("a", rat(3, 1))]],
        Hermite => vec![vec![]],
        Laguerre => vec![vec![("g", rat(3, 2))], vec![("g", rat(2, 1))], vec![("g", rat(5, 2))]],
        Gegenbauer => vec![vec![("g", rat(2, 1))], vec![("g", rat(3, 2))], vec![("g", rat(3, 1))]],
        Jacobi => vec![
            vec![("g", rat(2, 1)), ("h", rat(3, 2))],
            vec![("g", rat(3, 2)), ("h", rat(3, 2))],
            vec![("g", rat(3, 1)), ("h", rat(2, 1))],
        ],
    };
    sets.into_iter()
        .map(|s| s.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
        .collect()
}

/// Default system of each kind (N = 5 for finite ones).
pub fn default_system(kind: SystemKind, mode: Mode) -> Result<SystemSpec, CatalogError> {
    let n = kind.is_finite().then_some(5);
    let params = parameter_samples(kind, n).remove(0);
    SystemSpec::new(kind, n, &params, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: i64, d: i64) -> Scalar {
        Mode::Exact.ratio(n, d)
    }

    #[test]
    fn krawtchouk_data() {
        let s = SystemSpec::from_strs(Krawtchouk, Some(5), &[("p", "1/2")], Mode::Exact).unwrap();
        assert_eq!(s.birth(0).unwrap(), ex(5, 2));
        assert_eq!(s.death(5).unwrap(), ex(5, 2));
        assert_eq!(s.recurrence(3).unwrap().raising, ex(-1, 1));
        assert_eq!(s.recurrence(3).unwrap().lowering, ex(-3, 2));
        assert_eq!(s.alpha_pm(4).unwrap(), (ex(1, 1), ex(-1, 1)));
        assert!(s.spectrum_shift_relations(2).unwrap());
    }

    #[test]
    fn out_of_range_parameter() {
        let e = SystemSpec::from_strs(Krawtchouk, Some(5), &[("p", "3/2")], Mode::Exact).unwrap_err();
        assert!(matches!(e, CatalogError::ParameterOutOfRange { ref constraint, .. } if constraint == "p<1"));
        let e =
            SystemSpec::from_strs(Racah, Some(4), &[("a", "5"), ("b", "1/2"), ("d", "1")], Mode::Exact).unwrap_err();
        assert!(matches!(e, CatalogError::ParameterOutOfRange { ref constraint, .. } if constraint == "a>N+d"));
    }

    #[test]
    fn missing_and_unknown_parameters() {
        let e = SystemSpec::from_strs(Hahn, Some(3), &[("a", "1")], Mode::Exact).unwrap_err();
        assert!(matches!(e, CatalogError::MissingParameter { ref name, .. } if name == "b"));
        let e = SystemSpec::from_strs(Charlier, None, &[("a", "1"), ("z", "2")], Mode::Exact).unwrap_err();
        assert!(matches!(e, CatalogError::UnknownParameter { .. }));
        assert!(matches!(
            SystemSpec::from_strs(Charlier, Some(3), &[("a", "1")], Mode::Exact),
            Err(CatalogError::SizeNotAllowed { .. })
        ));
        assert!(matches!(
            SystemSpec::from_strs(Krawtchouk, None, &[("p", "1/2")], Mode::Exact),
            Err(CatalogError::SizeRequired { .. })
        ));
    }

    #[test]
    fn hermite_data() {
        let s = SystemSpec::from_strs(Hermite, None, &[], Mode::Exact).unwrap();
        assert_eq!(s.energy(3).unwrap(), ex(6, 1));
        assert_eq!(s.alpha_pm(7).unwrap(), (ex(2, 1), ex(-2, 1)));
        let r = s.recurrence(4).unwrap();
        assert_eq!((r.raising, r.diagonal, r.lowering), (ex(1, 2), ex(0, 1), ex(4, 1)));
        assert!(matches!(s.birth(0), Err(CatalogError::NotApplicable { .. })));
    }

    #[test]
    fn gegenbauer_alpha() {
        let s = SystemSpec::from_strs(Gegenbauer, None, &[("g", "2")], Mode::Exact).unwrap();
        assert_eq!(s.alpha_pm(3).unwrap(), (ex(11, 1), ex(-9, 1)));
        assert_eq!(s.recurrence(0).unwrap().lowering, ex(0, 1));
    }

    #[test]
    fn q_hahn_alpha_at_zero() {
        let s =
            SystemSpec::from_strs(QHahn, Some(4), &[("a", "1/2"), ("b", "1/2"), ("q", "1/2")], Mode::Exact).unwrap();
        let (ap, am) = s.alpha_pm(0).unwrap();
        assert_eq!(ap, ex(3, 4));
        assert_eq!(am, ex(0, 1));
        let (r0, _) = s.closure_polynomials();
        assert_eq!(&ap * &am, -r0.eval(&s.energy(0).unwrap()));
    }

    #[test]
    fn racah_shift_relations() {
        let s = SystemSpec::from_strs(Racah, Some(6), &[("a", "8"), ("b", "3/2"), ("d", "1")], Mode::Exact).unwrap();
        assert!(s.spectrum_shift_relations(3).unwrap());
        assert!(matches!(
            s.spectrum_shift_relations(6),
            Err(CatalogError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn q_racah_shift_relations() {
        let n = 4;
        let params = parameter_samples(QRacah, Some(n)).remove(0);
        let s = SystemSpec::new(QRacah, Some(n), &params, Mode::Exact).unwrap();
        assert!(s.spectrum_shift_relations(1).unwrap());
        assert_eq!(s.dtilde().unwrap(), &ex(1, 2));
    }

    #[test]
    fn boundary_values_and_eta_at_zero() {
        for kind in SystemKind::FINITE {
            for n in 1..=4 {
                for params in parameter_samples(kind, Some(n)) {
                    let s = SystemSpec::new(kind, Some(n), &params, Mode::Exact).unwrap();
                    assert!(s.death(0).unwrap().is_exact_zero());
                    assert!(s.birth(n).unwrap().is_exact_zero());
                    assert!(s.recurrence(0).unwrap().lowering.is_exact_zero());
                    assert!(s.recurrence(n).unwrap().raising.is_exact_zero());
                    assert!(s.sinusoidal(0).unwrap().is_exact_zero(), "{}", s.label());
                    assert!(s.energy(0).unwrap().is_exact_zero());
                    assert!(s.sinusoidal(1).unwrap().is_positive());
                }
            }
        }
    }

    #[test]
    fn discriminants_are_complete_squares() {
        for kind in SystemKind::FINITE {
            for params in parameter_samples(kind, Some(6)) {
                let s = SystemSpec::new(kind, Some(6), &params, Mode::Exact).unwrap();
                for n in 0..=6 {
                    assert!(s.discriminant_is_square(n).unwrap(), "{} n={n}", s.label());
                }
                for n in 1..6 {
                    assert!(s.spectrum_shift_relations(n).unwrap(), "{} n={n}", s.label());
                }
            }
        }
        for kind in SystemKind::INFINITE {
            for params in parameter_samples(kind, None) {
                let s = SystemSpec::with_probe(kind, None, &params, Mode::Exact, 50).unwrap();
                for n in 0..20 {
                    assert!(s.discriminant_is_square(n).unwrap(), "{} n={n}", s.label());
                }
                for n in 1..20 {
                    assert!(s.spectrum_shift_relations(n).unwrap(), "{} n={n}", s.label());
                }
            }
        }
    }

    #[test]
    fn definition_round_trip() {
        let json = r#"{"kind":"dual-hahn","N":4,"params":{"a":"1","b":"0.5"},"mode":"exact"}"#;
        let s = SystemDefinition::from_json(json).unwrap().build().unwrap();
        assert_eq!(s.kind(), DualHahn);
        assert_eq!(s.param("b").unwrap(), &ex(1, 2));
        let again = SystemDefinition::from_json(&s.definition().to_json())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(again.label(), s.label());
        let bad = r#"{"kind":"krawtchouk","N":4,"params":{"p":"1/2"},"mode":"fuzzy"}"#;
        assert!(matches!(
            SystemDefinition::from_json(bad).unwrap().build(),
            Err(CatalogError::InvalidMode(_))
        ));
    }

    #[test]
    fn bigreal_agrees_with_exact() {
        let m = Mode::bigreal(40).unwrap();
        for kind in SystemKind::FINITE {
            let e = default_system(kind, Mode::Exact).unwrap();
            let r = e.to_mode(m).unwrap();
            let tol = m.tolerance();
            for n in 0..5 {
                let ce = e.coupling(n).unwrap().to_mode(m).unwrap();
                assert!(tol.approx_eq(&ce, &r.coupling(n).unwrap()));
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for k in SystemKind::ALL {
            assert_eq!(SystemKind::from_name(k.name()).unwrap(), k);
        }
        assert_eq!(SystemKind::from_name("q-racah").unwrap(), QRacah);
        assert!(SystemKind::from_name("morse").is_err());
    }
}
