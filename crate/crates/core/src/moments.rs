//! Moment tables `mu_m = (O_0, L^m O_0)`: closed forms for finite and thermal
//! systems, and a brute-force commutator oracle.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogError, SystemSpec};
use crate::numeric::{Mode, NumericError, Scalar};
use crate::operator_space::{build_energy_rep, liouville, DenseOperator, Frame, InnerProduct, OperatorError};

/// Default number of even moments beyond `mu_0` (through `mu_12`).
pub const DEFAULT_K: usize = 6;

/// Iteration cap for thermal sums.
pub const MAX_TERMS: u32 = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("{0} is not a finite discrete system")]
    NotFiniteSystem(String),
    #[error("{0} is not an infinite system")]
    NotInfiniteSystem(String),
    #[error("thermal sums require big-float mode")]
    RequiresBigReal,
    #[error("tail of the {series} sum did not meet the bound within {terms} terms")]
    TailNotConvergent { series: String, terms: u32 },
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(String),
    #[error("K must be positive")]
    ZeroK,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Oracle,
    /// Reconstructed from Lanczos coefficients.
    Jacobi,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::Oracle => "oracle",
            Provenance::Jacobi => "jacobi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub n_max: u32,
    /// Relative bound on the neglected tail, largest over all sums.
    pub tail_bound: Scalar,
}

/// `mu_0 ... mu_{2K}` with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub system: Option<String>,
    pub inner_product: String,
    pub mode: Mode,
    pub values: Vec<Scalar>,
    pub provenance: Provenance,
    pub truncation: Option<Truncation>,
}

#[derive(Serialize)]
struct TableJson<'a> {
    system: Option<&'a str>,
    inner_product: &'a str,
    mode: String,
    provenance: Provenance,
    k: usize,
    n_max: Option<u32>,
    tail_bound: Option<String>,
    values: Vec<String>,
}

impl MomentTable {
    pub fn from_values(values: Vec<Scalar>, provenance: Provenance) -> MomentTable {
        assert!(values.len() % 2 == 1, "moment tables run from mu_0 to an even index");
        MomentTable {
            system: None,
            inner_product: "trace".into(),
            mode: values[0].mode(),
            values,
            provenance,
            truncation: None,
        }
    }

    /// Tables built from `mu_2, mu_4, ...` alone.
    pub fn from_even(even: &[Scalar], provenance: Provenance) -> MomentTable {
        let mode = even.first().map(Scalar::mode).unwrap_or(Mode::Exact);
        let mut values = vec![mode.one()];
        for m in even {
            values.push(mode.zero());
            values.push(m.clone());
        }
        MomentTable::from_values(values, provenance)
    }

    /// Largest `K` with `mu_{2K}` stored.
    pub fn k(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    pub fn mu(&self, m: usize) -> &Scalar {
        &self.values[m]
    }

    /// `mu_{2m}`.
    pub fn even(&self, m: usize) -> &Scalar {
        &self.values[2 * m]
    }

    pub fn scaled(&self, lambda: &Scalar) -> MomentTable {
        let mut t = self.clone();
        let mut f = self.mode.one();
        for v in t.values.iter_mut() {
            *v = &*v * &f;
            f = f * lambda;
        }
        t
    }

    /// `mu_0 = 1`, even entries positive, odd entries zero (within `tol` in big-float mode).
    pub fn check_invariants(&self) -> Result<(), String> {
        let tol = self.mode.tolerance();
        if !tol.approx_eq(&self.values[0], &self.mode.one()) {
            return Err(format!("mu_0 = {}", self.values[0]));
        }
        for (m, v) in self.values.iter().enumerate().skip(1) {
            if m % 2 == 1 && !tol.is_zero(v) {
                return Err(format!("mu_{m} = {v} is not zero"));
            }
            if m % 2 == 0 && !v.is_positive() {
                return Err(format!("mu_{m} = {v} is not positive"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = TableJson {
            system: self.system.as_deref(),
            inner_product: &self.inner_product,
            mode: self.mode.to_string(),
            provenance: self.provenance,
            k: self.k(),
            n_max: self.truncation.as_ref().map(|t| t.n_max),
            tail_bound: self.truncation.as_ref().map(|t| t.tail_bound.to_string_sig(6)),
            values: self.values.iter().map(|v| v.to_string()).collect(),
        };
        serde_json::to_value(j).expect("moment table serializes")
    }

    /// CSV with `# key=value` header lines, then `m,mu_m,provenance,tail_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(s) = &self.system {
            out.push_str(&format!("# system={s}\n"));
        }
        out.push_str(&format!("# inner_product={}\n", self.inner_product));
        out.push_str(&format!("# mode={}\n", self.mode));
        if let Some(t) = &self.truncation {
            out.push_str(&format!("# n_max={}\n", t.n_max));
        }
        let bound = self
            .truncation
            .as_ref()
            .map(|t| t.tail_bound.to_string_sig(6))
            .unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "mu_m", "provenance", "tail_bound"])
            .expect("in-memory write");
        for (m, v) in self.values.iter().enumerate() {
            let b = if m % 2 == 0 && m > 0 { bound.as_str() } else { "" };
            w.write_record([m.to_string().as_str(), &v.to_string(), self.provenance.as_str(), b])
                .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }
}

fn assemble(mode: Mode, even: Vec<Scalar>, provenance: Provenance, label: String, ip: String) -> MomentTable {
    let mut t = MomentTable::from_even(&even, provenance);
    t.mode = mode;
    t.system = Some(label);
    t.inner_product = ip;
    t
}

/// `mu_{2m} = 2 sum_{n<N} A_n C_{n+1} alpha_+(E(n))^{2m} / ||eta||^2` with
/// `||eta||^2 = sum_x eta(x)^2`.
pub fn moments_theorem1(spec: &SystemSpec, k: usize) -> Result<MomentTable, MomentError> {
    if k == 0 {
        return Err(MomentError::ZeroK);
    }
    let size = match (spec.is_finite(), spec.size()) {
        (true, Some(n)) => n,
        _ => return Err(MomentError::NotFiniteSystem(spec.label())),
    };
    let mode = spec.mode();
    let norm = spec.eta_norm_sq()?;
    let mut weights = Vec::with_capacity(size as usize);
    let mut alpha_sq = Vec::with_capacity(size as usize);
    for n in 0..size {
        weights.push(mode.int(2) * spec.coupling(n)?);
        alpha_sq.push(spec.alpha_pm(n)?.0.square());
    }
    let mut even = Vec::with_capacity(k);
    for _ in 1..=k {
        for (w, a) in weights.iter_mut().zip(&alpha_sq) {
            *w = &*w * a;
        }
        even.push(crate::numeric::sum(mode, weights.iter()).try_div(&norm)?);
    }
    Ok(assemble(
        mode,
        even,
        Provenance::ClosedForm,
        spec.label(),
        "trace".into(),
    ))
}

/// Default relative tail tolerance `10^-(digits-5)`.
pub fn default_tail_tol(mode: Mode) -> Scalar {
    match mode.digits() {
        Some(d) => mode.pow10(-(d as i32 - 5)),
        None => mode.zero(),
    }
}

/// Running state of one positive series and its geometric tail majorant.
struct TailedSum {
    name: String,
    total: Scalar,
    last: Option<Scalar>,
    last_ratio: Option<Scalar>,
    bound: Scalar,
    done: bool,
}

impl TailedSum {
    fn new(name: String, mode: Mode) -> TailedSum {
        TailedSum {
            name,
            total: mode.zero(),
            last: None,
            last_ratio: None,
            bound: mode.one(),
            done: false,
        }
    }

    fn push(&mut self, term: Scalar, tol: &Scalar) {
        let mode = term.mode();
        self.total = &self.total + &term;
        if term.is_exact_zero() || !term.is_positive() {
            // identically vanishing series, e.g. B_n = 0 for Hermite
            let zero_so_far = self.total.is_exact_zero();
            self.done = zero_so_far;
            self.bound = mode.zero();
            self.last = None;
            self.last_ratio = None;
            return;
        }
        let ratio = self.last.as_ref().map(|prev| &term / prev);
        let half = mode.ratio(1, 2);
        self.done = false;
        if let Some(r) = &ratio {
            let decreasing = self.last_ratio.as_ref().is_some_and(|lr| r <= lr);
            if *r < half && decreasing {
                let one = mode.one();
                let b = &term * r / (&one - r) / &self.total;
                self.done = b < *tol;
                self.bound = b;
            }
        }
        self.last = Some(term);
        self.last_ratio = ratio;
    }
}

/// Thermal moments `mu_{2m} = tilde mu_{2m} / tilde mu_0` of an infinite system
/// under the Wightman inner product, truncated with a certified tail.
pub fn moments_theorem2(
    spec: &SystemSpec,
    k: usize,
    beta: &Scalar,
    tail_tol: &Scalar,
) -> Result<MomentTable, MomentError> {
    if k == 0 {
        return Err(MomentError::ZeroK);
    }
    if spec.is_finite() {
        return Err(MomentError::NotInfiniteSystem(spec.label()));
    }
    let mode = spec.mode();
    if mode.is_exact() {
        return Err(MomentError::RequiresBigReal);
    }
    if !beta.is_positive() {
        return Err(MomentError::NonPositiveBeta(beta.to_string()));
    }
    let two = mode.int(2);
    let half_beta = beta / &two;
    let mut diag = TailedSum::new("diagonal".into(), mode);
    let mut sums: Vec<TailedSum> = (0..=k).map(|m| TailedSum::new(format!("m={m}"), mode)).collect();
    let mut e_next = spec.energy(0)?;
    let mut n = 0;
    loop {
        if n >= MAX_TERMS {
            let worst = std::iter::once(&diag)
                .chain(sums.iter())
                .find(|s| !s.done)
                .map(|s| s.name.clone())
                .unwrap_or_default();
            return Err(MomentError::TailNotConvergent {
                series: worst,
                terms: MAX_TERMS,
            });
        }
        let e = e_next;
        e_next = spec.energy(n + 1)?;
        let r = spec.recurrence(n)?;
        let b_n = r.diagonal;
        diag.push((-(beta * &e)).exp()? * b_n.square(), tail_tol);
        let weight = (-(&half_beta * (&e + &e_next))).exp()?;
        let mut t = &two * weight * spec.coupling(n)?;
        let a2 = spec.alpha_pm(n)?.0.square();
        for s in sums.iter_mut() {
            s.push(t.clone(), tail_tol);
            t = t * &a2;
        }
        n += 1;
        if n >= 3 && diag.done && sums.iter().all(|s| s.done) {
            break;
        }
    }
    let mu0 = &diag.total + &sums[0].total;
    let even = sums[1..]
        .iter()
        .map(|s| s.total.try_div(&mu0))
        .collect::<Result<Vec<_>, _>>()?;
    let bound = std::iter::once(&diag)
        .chain(sums.iter())
        .fold(mode.zero(), |b, s| b.max(&s.bound));
    let mut table = assemble(
        mode,
        even,
        Provenance::ClosedForm,
        spec.label(),
        format!("wightman(beta={})", beta.to_string_sig(12)),
    );
    table.truncation = Some(Truncation {
        n_max: n - 1,
        tail_bound: bound,
    });
    Ok(table)
}

/// `mu_m = (eta, L^m eta) / (eta, eta)` by repeated commutators.
pub fn moments_oracle(
    h: &DenseOperator,
    eta: &DenseOperator,
    ip: &InnerProduct,
    k: usize,
) -> Result<MomentTable, MomentError> {
    if k == 0 {
        return Err(MomentError::ZeroK);
    }
    let norm = ip.norm_sq(eta)?;
    if norm.is_exact_zero() {
        return Err(OperatorError::ZeroEta.into());
    }
    let mut values = vec![h.mode().one()];
    let mut v = eta.clone();
    for _ in 1..=2 * k {
        v = liouville(h, &v)?;
        values.push(ip.inner(eta, &v)?.try_div(&norm)?);
    }
    let mut t = MomentTable::from_values(values, Provenance::Oracle);
    t.inner_product = ip.kind().label();
    Ok(t)
}

/// `<n|eta|n>` in the energy basis against the cataloged diagonal:
/// `-(A_n + C_n)` for the Leonard-pair systems, `B_n` for the one-dimensional ones.
pub fn diagonal_eta_identity(spec: &SystemSpec, n: u32) -> Result<bool, MomentError> {
    let n_max = match spec.size() {
        Some(size) => {
            if n > size {
                return Err(CatalogError::IndexOutOfRange { index: n, max: size }.into());
            }
            size
        }
        None => (n + 1).max(2),
    };
    let rep = build_energy_rep(spec, n_max, Frame::Gauged)?;
    let r = spec.recurrence(n)?;
    let expected = if spec.kind().is_discrete() {
        -(r.raising + r.lowering)
    } else {
        r.diagonal
    };
    Ok(spec
        .mode()
        .tolerance()
        .approx_eq(rep.eta.get(n as usize, n as usize), &expected))
}
