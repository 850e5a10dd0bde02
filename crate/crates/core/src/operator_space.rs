//! Dense operators on the Hilbert space, the Liouvillian, inner products and
//! operator-space Lanczos.
//!
//! Exact mode cannot hold the square roots in the symmetric Hamiltonian, so
//! tridiagonal operators may be built in a *gauged* frame: a diagonal
//! similarity `S` makes every entry rational. The frame is described by the
//! diagonal metric `g = S^2`; inner products and adjoints account for it, and
//! commutators are frame independent.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogError, SystemSpec};
use crate::numeric::{Complex, Mode, NumericError, Scalar, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("{0} is not a finite discrete system")]
    NotFiniteSystem(String),
    #[error("negative value {0} under square root")]
    NegativeUnderSquareRoot(String),
    #[error("energy truncation n_max={0} is too small (need at least 2)")]
    TruncationTooSmall(u32),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("Wightman inner product requires an energy-basis representation")]
    BasisMismatch,
    #[error("initial operator has zero norm")]
    ZeroEta,
    #[error("operator is not symmetric")]
    NotSymmetric,
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("{0} requires big-float mode")]
    RequiresBigReal(&'static str),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Square real matrix of [`Scalar`]s, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    mode: Mode,
    entries: Vec<Scalar>,
}

impl DenseOperator {
    pub fn zeros(dim: usize, mode: Mode) -> DenseOperator {
        DenseOperator {
            dim,
            mode,
            entries: vec![mode.zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize, mode: Mode) -> DenseOperator {
        DenseOperator::diagonal(&vec![mode.one(); dim], mode)
    }

    pub fn diagonal(d: &[Scalar], mode: Mode) -> DenseOperator {
        let mut m = DenseOperator::zeros(d.len(), mode);
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> DenseOperator {
        let dim = rows.len();
        assert!(dim > 0 && rows.iter().all(|r| r.len() == dim), "square matrix expected");
        let mode = rows[0][0].mode();
        DenseOperator {
            dim,
            mode,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Tridiagonal matrix from diagonal, upper and lower bands.
    pub fn tridiagonal(diag: &[Scalar], upper: &[Scalar], lower: &[Scalar]) -> DenseOperator {
        let n = diag.len();
        assert!(upper.len() + 1 == n && lower.len() + 1 == n, "band lengths");
        let mut m = DenseOperator::zeros(n, diag[0].mode());
        for i in 0..n {
            m.set(i, i, diag[i].clone());
            if i + 1 < n {
                m.set(i, i + 1, upper[i].clone());
                m.set(i + 1, i, lower[i].clone());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn diag(&self) -> Vec<Scalar> {
        (0..self.dim).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).is_exact_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_exact_zero)
    }

    pub fn is_symmetric(&self, tol: &Tolerance) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| tol.approx_eq(self.get(i, j), self.get(j, i))))
    }

    pub fn transpose(&self) -> DenseOperator {
        let mut t = DenseOperator::zeros(self.dim, self.mode);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    fn check_dim(&self, other: &DenseOperator) -> Result<(), OperatorError> {
        if self.dim != other.dim {
            return Err(OperatorError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator, OperatorError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator, OperatorError> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(
        &self,
        other: &DenseOperator,
        f: impl Fn(&Scalar, &Scalar) -> Scalar,
    ) -> Result<DenseOperator, OperatorError> {
        self.check_dim(other)?;
        Ok(DenseOperator {
            dim: self.dim,
            mode: self.mode,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: &Scalar) -> DenseOperator {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> DenseOperator {
        DenseOperator {
            dim: self.dim,
            mode: self.mode,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// `self - s * other`, in place.
    pub fn axpy_neg(&mut self, s: &Scalar, other: &DenseOperator) {
        if s.is_exact_zero() {
            return;
        }
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            if !b.is_exact_zero() {
                *a = &*a - s * b;
            }
        }
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<DenseOperator, OperatorError> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = DenseOperator::zeros(n, self.mode);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_exact_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> Scalar {
        self.entries.iter().fold(self.mode.zero(), |m, x| m.max(&x.abs()))
    }

    pub fn to_mode(&self, mode: Mode) -> Result<DenseOperator, NumericError> {
        Ok(DenseOperator {
            dim: self.dim,
            mode,
            entries: self.entries.iter().map(|x| x.to_mode(mode)).collect::<Result<_, _>>()?,
        })
    }

    /// `{"dim": n, "entries": [..row-major strings..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "entries": self.entries.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value, mode: Mode) -> Result<DenseOperator, OperatorError> {
        let bad = |m: &str| OperatorError::Numeric(NumericError::Parse(m.to_string()));
        let dim = v["dim"].as_u64().ok_or_else(|| bad("dim"))? as usize;
        let entries = v["entries"].as_array().ok_or_else(|| bad("entries"))?;
        if entries.len() != dim * dim || dim == 0 {
            return Err(bad("entries length"));
        }
        let entries = entries
            .iter()
            .map(|e| mode.parse(e.as_str().unwrap_or("")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DenseOperator { dim, mode, entries })
    }
}

/// Operator with complex entries, stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexOperator {
    pub re: DenseOperator,
    pub im: DenseOperator,
}

impl ComplexOperator {
    pub fn from_real(re: DenseOperator) -> ComplexOperator {
        let im = DenseOperator::zeros(re.dim(), re.mode());
        ComplexOperator { re, im }
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        Complex::new(self.re.get(i, j).clone(), self.im.get(i, j).clone())
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex) {
        self.re.set(i, j, z.re);
        self.im.set(i, j, z.im);
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_deviation(&self, other: &ComplexOperator) -> Result<Scalar, OperatorError> {
        let n = self.dim();
        let mut worst = self.re.mode().zero();
        for i in 0..n {
            for j in 0..n {
                let d = self.get(i, j).sub(&other.get(i, j)).abs()?;
                worst = worst.max(&d);
            }
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let entries: Vec<String> = (0..n * n).map(|k| self.get(k / n, k % n).to_string()).collect();
        serde_json::json!({ "dim": n, "entries": entries })
    }
}

/// `[H, V] = HV - VH`, skipping structural zeros of `H`.
pub fn liouville(h: &DenseOperator, v: &DenseOperator) -> Result<DenseOperator, OperatorError> {
    h.check_dim(v)?;
    let n = h.dim();
    let mode = h.mode();
    let nonzero = |at: &dyn Fn(usize) -> (usize, usize)| -> Vec<(usize, Scalar)> {
        (0..n)
            .filter_map(|k| {
                let (r, c) = at(k);
                let x = h.get(r, c);
                (!x.is_exact_zero()).then(|| (k, x.clone()))
            })
            .collect()
    };
    let rows: Vec<_> = (0..n).map(|i| nonzero(&|k| (i, k))).collect();
    let cols: Vec<_> = (0..n).map(|j| nonzero(&|k| (k, j))).collect();
    let mut out = DenseOperator::zeros(n, mode);
    for i in 0..n {
        for j in 0..n {
            let mut acc = mode.zero();
            for (k, hik) in &rows[i] {
                let x = v.get(*k, j);
                if !x.is_exact_zero() {
                    acc = acc + hik * x;
                }
            }
            for (k, hkj) in &cols[j] {
                let x = v.get(i, *k);
                if !x.is_exact_zero() {
                    acc = acc - x * hkj;
                }
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Which operator frame a representation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Real symmetric matrices (square roots on the off-diagonal).
    Symmetric,
    /// Rational entries; metric `g` recovers the symmetric inner product.
    Gauged,
}

impl Frame {
    pub fn natural(mode: Mode) -> Frame {
        if mode.is_exact() {
            Frame::Gauged
        } else {
            Frame::Symmetric
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Position,
    Energy,
}

/// A Hamiltonian, an initial operator and the frame metric they are written in.
#[derive(Debug, Clone)]
pub struct Representation {
    pub h: DenseOperator,
    pub eta: DenseOperator,
    /// Diagonal metric of a gauged frame; `None` for symmetric matrices.
    pub metric: Option<Vec<Scalar>>,
    pub basis: BasisKind,
}

impl Representation {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn mode(&self) -> Mode {
        self.h.mode()
    }

    /// Energies on the diagonal of `H` when the representation is in the energy basis.
    pub fn energies(&self) -> Option<Vec<Scalar>> {
        (self.basis == BasisKind::Energy).then(|| self.h.diag())
    }

    /// The same operators with `H` replaced by `lambda H`.
    pub fn scaled(&self, lambda: &Scalar) -> Representation {
        Representation {
            h: self.h.scale(lambda),
            ..self.clone()
        }
    }
}

fn metric_from_bands(upper: &[Scalar], lower: &[Scalar]) -> Result<Vec<Scalar>, OperatorError> {
    let mode = upper.first().map(Scalar::mode).unwrap_or(Mode::Exact);
    let mut g = vec![mode.one()];
    for (u, l) in upper.iter().zip(lower) {
        let next = g.last().unwrap() * l.try_div(u)?;
        g.push(next);
    }
    Ok(g)
}

fn sym_offdiag(prod: &Scalar, sign: i32) -> Result<Scalar, OperatorError> {
    if prod.is_negative() {
        return Err(OperatorError::NegativeUnderSquareRoot(prod.to_string()));
    }
    let r = prod.sqrt()?;
    Ok(if sign < 0 { -r } else { r })
}

fn require_finite(spec: &SystemSpec) -> Result<u32, OperatorError> {
    match (spec.is_finite(), spec.size()) {
        (true, Some(n)) => Ok(n),
        _ => Err(OperatorError::NotFiniteSystem(spec.label())),
    }
}

/// Position-basis Hamiltonian: diagonal `B(x)+D(x)`, off-diagonal `-sqrt(B(x) D(x+1))`.
pub fn build_hamiltonian(spec: &SystemSpec) -> Result<DenseOperator, OperatorError> {
    Ok(build_position_pair(spec, Frame::Symmetric)?.h)
}

/// `diag(eta(0), ..., eta(N))`.
pub fn build_eta_position(spec: &SystemSpec) -> Result<DenseOperator, OperatorError> {
    let n = require_finite(spec)?;
    let d = (0..=n).map(|x| spec.sinusoidal(x)).collect::<Result<Vec<_>, _>>()?;
    Ok(DenseOperator::diagonal(&d, spec.mode()))
}

/// Position-basis Hamiltonian and `eta` in the requested frame.
pub fn build_position_pair(spec: &SystemSpec, frame: Frame) -> Result<Representation, OperatorError> {
    let n = require_finite(spec)?;
    let mut diag = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for x in 0..=n {
        diag.push(spec.birth(x)? + spec.death(x)?);
        if x < n {
            upper.push(-spec.birth(x)?);
            lower.push(-spec.death(x + 1)?);
        }
    }
    let eta = build_eta_position(spec)?;
    let (h, metric) = match frame {
        Frame::Gauged => {
            let g = metric_from_bands(&upper, &lower)?;
            (DenseOperator::tridiagonal(&diag, &upper, &lower), Some(g))
        }
        Frame::Symmetric => {
            let off = upper
                .iter()
                .zip(&lower)
                .map(|(u, l)| sym_offdiag(&(u * l), -1))
                .collect::<Result<Vec<_>, _>>()?;
            (DenseOperator::tridiagonal(&diag, &off, &off), None)
        }
    };
    Ok(Representation {
        h,
        eta,
        metric,
        basis: BasisKind::Position,
    })
}

/// Energy-basis `H = diag(E(0..=n_max))` and tridiagonal `eta` with
/// off-diagonal `+sqrt(A_n C_{n+1})`.
pub fn build_energy_rep(spec: &SystemSpec, n_max: u32, frame: Frame) -> Result<Representation, OperatorError> {
    if n_max < 2 && !spec.is_finite() {
        return Err(OperatorError::TruncationTooSmall(n_max));
    }
    if let Some(size) = spec.size() {
        if n_max > size {
            return Err(OperatorError::Catalog(CatalogError::IndexOutOfRange {
                index: n_max,
                max: size,
            }));
        }
    }
    let mut energies = Vec::new();
    let mut diag = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for k in 0..=n_max {
        energies.push(spec.energy(k)?);
        let r = spec.recurrence(k)?;
        diag.push(r.diagonal);
        if k < n_max {
            upper.push(r.raising);
            lower.push(spec.recurrence(k + 1)?.lowering);
        }
    }
    let mode = spec.mode();
    let h = DenseOperator::diagonal(&energies, mode);
    let (eta, metric) = match frame {
        Frame::Gauged => {
            let g = metric_from_bands(&upper, &lower)?;
            (DenseOperator::tridiagonal(&diag, &upper, &lower), Some(g))
        }
        Frame::Symmetric => {
            let off = upper
                .iter()
                .zip(&lower)
                .map(|(u, l)| sym_offdiag(&(u * l), 1))
                .collect::<Result<Vec<_>, _>>()?;
            (DenseOperator::tridiagonal(&diag, &off, &off), None)
        }
    };
    Ok(Representation {
        h,
        eta,
        metric,
        basis: BasisKind::Energy,
    })
}

/// Inner-product variant on operator space.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerProductKind {
    Trace,
    Wightman { beta: Scalar },
}

impl InnerProductKind {
    pub fn label(&self) -> String {
        match self {
            InnerProductKind::Trace => "trace".into(),
            InnerProductKind::Wightman { beta } => format!("wightman(beta={beta})"),
        }
    }
}

/// A concrete inner product on one representation.
#[derive(Debug, Clone)]
pub struct InnerProduct {
    kind: InnerProductKind,
    dim: usize,
    /// Factor multiplying `conj(V_rc) W_rc`; `None` means all ones.
    factors: Option<Vec<Scalar>>,
    metric: Option<Vec<Scalar>>,
}

impl InnerProduct {
    /// Plain `Tr(V^T W)` on symmetric matrices.
    pub fn trace(dim: usize) -> InnerProduct {
        InnerProduct {
            kind: InnerProductKind::Trace,
            dim,
            factors: None,
            metric: None,
        }
    }

    /// Inner product of `kind` on `rep`, honoring its frame metric.
    pub fn for_representation(kind: InnerProductKind, rep: &Representation) -> Result<InnerProduct, OperatorError> {
        let weights = match &kind {
            InnerProductKind::Trace => None,
            InnerProductKind::Wightman { beta } => {
                let energies = rep.energies().ok_or(OperatorError::BasisMismatch)?;
                let half = beta * rep.mode().ratio(1, 2);
                let w = energies
                    .iter()
                    .map(|e| (-(&half * e)).exp())
                    .collect::<Result<Vec<_>, _>>()?;
                let z = crate::numeric::sum(rep.mode(), w.iter().map(|x| x.square()).collect::<Vec<_>>().iter());
                Some((w, z))
            }
        };
        let dim = rep.dim();
        let mode = rep.mode();
        let factors = if weights.is_none() && rep.metric.is_none() {
            None
        } else {
            let mut f = Vec::with_capacity(dim * dim);
            for r in 0..dim {
                for c in 0..dim {
                    let mut v = mode.one();
                    if let Some((w, _)) = &weights {
                        v = &v * &w[r] * &w[c];
                    }
                    if let Some(g) = &rep.metric {
                        v = v * &g[c] / &g[r];
                    }
                    f.push(v);
                }
            }
            if let Some((_, z)) = &weights {
                for v in f.iter_mut() {
                    *v = &*v / z;
                }
            }
            Some(f)
        };
        Ok(InnerProduct {
            kind,
            dim,
            factors,
            metric: rep.metric.clone(),
        })
    }

    pub fn kind(&self) -> &InnerProductKind {
        &self.kind
    }

    fn check(&self, v: &DenseOperator) -> Result<(), OperatorError> {
        if v.dim() != self.dim {
            return Err(OperatorError::DimensionMismatch(self.dim, v.dim()));
        }
        Ok(())
    }

    /// `(V, W)` for real operators.
    pub fn inner(&self, v: &DenseOperator, w: &DenseOperator) -> Result<Scalar, OperatorError> {
        self.check(v)?;
        self.check(w)?;
        let mut acc = v.mode().zero();
        for (k, (a, b)) in v.entries().iter().zip(w.entries()).enumerate() {
            if a.is_exact_zero() || b.is_exact_zero() {
                continue;
            }
            let t = a * b;
            acc = match &self.factors {
                Some(f) => acc + t * &f[k],
                None => acc + t,
            };
        }
        Ok(acc)
    }

    pub fn norm_sq(&self, v: &DenseOperator) -> Result<Scalar, OperatorError> {
        self.inner(v, v)
    }

    /// `(V, W)` for complex operators: `sum conj(V) W` with the same weights.
    pub fn inner_complex(&self, v: &ComplexOperator, w: &ComplexOperator) -> Result<Complex, OperatorError> {
        let rr = self.inner(&v.re, &w.re)?;
        let ii = self.inner(&v.im, &w.im)?;
        let ri = self.inner(&v.re, &w.im)?;
        let ir = self.inner(&v.im, &w.re)?;
        Ok(Complex::new(rr + ii, ri - ir))
    }

    /// Adjoint of a real operator in this frame: `G V^T G^{-1}`.
    pub fn adjoint(&self, v: &DenseOperator) -> DenseOperator {
        let t = v.transpose();
        match &self.metric {
            None => t,
            Some(g) => {
                let mut out = t;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let x = out.get(i, j);
                        if !x.is_exact_zero() {
                            let y = x * &g[i] / &g[j];
                            out.set(i, j, y);
                        }
                    }
                }
                out
            }
        }
    }
}

/// Krylov chain produced by [`operator_lanczos`].
///
/// Stored in monic form `P_{k+1} = L P_k - b_k^2 P_{k-1}`, so exact mode never
/// takes a square root. `O_k = P_k / sqrt(norms_sq[k])`.
#[derive(Debug, Clone)]
pub struct OrthonormalChain {
    pub monic: Vec<DenseOperator>,
    pub norms_sq: Vec<Scalar>,
    /// `b_1^2, b_2^2, ...`; `b_squared[k-1]` belongs to `b_k`.
    pub b_squared: Vec<Scalar>,
    pub stopped: bool,
    /// The value declared zero when the chain stopped.
    pub terminal_b_squared: Option<Scalar>,
}

#[derive(Debug, Serialize)]
pub struct ChainDump {
    pub b: Vec<String>,
    pub b_squared: Vec<String>,
    pub stopped: bool,
    pub stop_index: Option<usize>,
}

impl OrthonormalChain {
    pub fn len(&self) -> usize {
        self.monic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monic.is_empty()
    }

    /// Index of the last operator when the chain terminated.
    pub fn stop_index(&self) -> Option<usize> {
        self.stopped.then(|| self.monic.len() - 1)
    }

    /// `b_k` for `k >= 1`.
    pub fn b(&self, k: usize) -> Result<Scalar, NumericError> {
        self.b_squared[k - 1].sqrt()
    }

    /// Normalized `O_k`.
    pub fn op(&self, k: usize) -> Result<DenseOperator, NumericError> {
        let n = self.norms_sq[k].sqrt()?;
        Ok(self.monic[k].map(|x| x / &n))
    }

    pub fn dump(&self) -> ChainDump {
        let b = self
            .b_squared
            .iter()
            .map(|b2| match b2.sqrt() {
                Ok(b) => b.to_string(),
                Err(_) => format!("sqrt({b2})"),
            })
            .collect();
        ChainDump {
            b,
            b_squared: self.b_squared.iter().map(|x| x.to_string()).collect(),
            stopped: self.stopped,
            stop_index: self.stop_index(),
        }
    }
}

/// Lanczos orthonormalization of `eta` under `L = [H, .]`.
///
/// Halts after `k_max` steps, when `b_{k+1}^2` is zero within `tol`, or when
/// the chain reaches `dim^2` operators. Big-float runs fully reorthogonalize.
pub fn operator_lanczos(
    ip: &InnerProduct,
    h: &DenseOperator,
    eta: &DenseOperator,
    k_max: usize,
    tol: &Tolerance,
) -> Result<OrthonormalChain, OperatorError> {
    let n0 = ip.norm_sq(eta)?;
    if n0.is_exact_zero() || tol.is_zero(&n0) {
        return Err(OperatorError::ZeroEta);
    }
    let exact = h.mode().is_exact();
    let limit = k_max.min(h.dim() * h.dim() - 1);
    let mut monic = vec![eta.clone()];
    let mut norms = vec![n0];
    let mut bsq: Vec<Scalar> = Vec::new();
    let mut stopped = false;
    let mut terminal = None;
    for k in 0..limit {
        let mut next = liouville(h, &monic[k])?;
        if k > 0 {
            next.axpy_neg(&bsq[k - 1], &monic[k - 1]);
        }
        if !exact {
            for j in 0..=k {
                let c = ip.inner(&monic[j], &next)? / &norms[j];
                next.axpy_neg(&c, &monic[j]);
            }
        }
        let nn = ip.norm_sq(&next)?;
        let b2 = &nn / &norms[k];
        if tol.is_zero(&b2) {
            stopped = true;
            terminal = Some(b2);
            break;
        }
        monic.push(next);
        norms.push(nn);
        bsq.push(b2);
    }
    Ok(OrthonormalChain {
        monic,
        norms_sq: norms,
        b_squared: bsq,
        stopped,
        terminal_b_squared: terminal,
    })
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascend; eigenvectors are the columns of the returned matrix.
pub fn symmetric_eigen(a: &DenseOperator) -> Result<(Vec<Scalar>, DenseOperator), OperatorError> {
    let mode = a.mode();
    let digits = mode
        .digits()
        .ok_or(OperatorError::RequiresBigReal("eigendecomposition"))?;
    let n = a.dim();
    let loose = Tolerance::for_mode(mode);
    if !a.is_symmetric(&loose) {
        return Err(OperatorError::NotSymmetric);
    }
    let mut m = a.clone();
    let mut v = DenseOperator::identity(n, mode);
    let scale = a.max_abs();
    // off-diagonal target well below the working precision
    let eps = mode.pow10(-(digits as i32) - 8) * &scale;
    let zero = mode.zero();
    let one = mode.one();
    let two = mode.int(2);
    const MAX_SWEEPS: usize = 100;
    let mut converged = scale.is_exact_zero();
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = zero.clone();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(&m.get(p, q).abs());
            }
        }
        if off <= eps {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q).clone();
                if apq.abs() <= eps {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (&two * &apq);
                let t = {
                    let denom = theta.abs() + (theta.square() + &one).sqrt()?;
                    let t = &one / denom;
                    if theta.is_negative() {
                        -t
                    } else {
                        t
                    }
                };
                let c = &one / (t.square() + &one).sqrt()?;
                let s = &t * &c;
                for k in 0..n {
                    let mkp = m.get(k, p).clone();
                    let mkq = m.get(k, q).clone();
                    m.set(k, p, &c * &mkp - &s * &mkq);
                    m.set(k, q, &s * &mkp + &c * &mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k).clone();
                    let mqk = m.get(q, k).clone();
                    m.set(p, k, &c * &mpk - &s * &mqk);
                    m.set(q, k, &s * &mpk + &c * &mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p).clone();
                    let vkq = v.get(k, q).clone();
                    v.set(k, p, &c * &vkp - &s * &vkq);
                    v.set(k, q, &s * &vkp + &c * &vkq);
                }
            }
        }
    }
    if !converged {
        return Err(OperatorError::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(m.get(j, j)).expect("same mode"));
    let values = order.iter().map(|&i| m.get(i, i).clone()).collect();
    let mut vecs = DenseOperator::zeros(n, mode);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, col, v.get(r, src).clone());
        }
    }
    Ok((values, vecs))
}

/// Precomputed Heisenberg evolution `t -> e^{iHt} V e^{-iHt}`.
#[derive(Debug, Clone)]
pub struct HeisenbergEvolution {
    energies: Vec<Scalar>,
    /// Eigenvectors as columns; `None` when `H` is already diagonal.
    basis: Option<DenseOperator>,
    /// `V` in the eigenbasis of `H`.
    v_eigen: DenseOperator,
}

impl HeisenbergEvolution {
    pub fn new(h: &DenseOperator, v: &DenseOperator) -> Result<HeisenbergEvolution, OperatorError> {
        h.check_dim(v)?;
        if h.mode().is_exact() {
            return Err(OperatorError::RequiresBigReal("matrix exponential"));
        }
        if h.is_diagonal() {
            return Ok(HeisenbergEvolution {
                energies: h.diag(),
                basis: None,
                v_eigen: v.clone(),
            });
        }
        let (energies, u) = symmetric_eigen(h)?;
        let v_eigen = u.transpose().matmul(v)?.matmul(&u)?;
        Ok(HeisenbergEvolution {
            energies,
            basis: Some(u),
            v_eigen,
        })
    }

    pub fn energies(&self) -> &[Scalar] {
        &self.energies
    }

    /// Evolved operator in the eigenbasis of `H` (no rotation back).
    pub fn at_eigenbasis(&self, t: &Scalar) -> Result<ComplexOperator, OperatorError> {
        let n = self.energies.len();
        let mode = t.mode();
        let mut out = ComplexOperator::from_real(DenseOperator::zeros(n, mode));
        for a in 0..n {
            for b in 0..n {
                let v = self.v_eigen.get(a, b);
                if v.is_exact_zero() {
                    continue;
                }
                let phase = Complex::cis(&((&self.energies[a] - &self.energies[b]) * t))?;
                out.set(a, b, phase.scale(v));
            }
        }
        Ok(out)
    }

    /// `e^{iHt} V e^{-iHt}` in the original basis.
    pub fn at(&self, t: &Scalar) -> Result<ComplexOperator, OperatorError> {
        let x = self.at_eigenbasis(t)?;
        match &self.basis {
            None => Ok(x),
            Some(u) => {
                let ut = u.transpose();
                Ok(ComplexOperator {
                    re: u.matmul(&x.re)?.matmul(&ut)?,
                    im: u.matmul(&x.im)?.matmul(&ut)?,
                })
            }
        }
    }
}

/// `e^{iHt} V e^{-iHt}` through an eigendecomposition of `H`.
pub fn matrix_exponential_conjugate(
    h: &DenseOperator,
    v: &DenseOperator,
    t: &Scalar,
) -> Result<ComplexOperator, OperatorError> {
    HeisenbergEvolution::new(h, v)?.at(t)
}
