//! Closure relation, closed-form powers of the Liouvillian, the exact
//! Heisenberg solution for `eta`, and Krylov amplitudes and complexity.

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogError, HPolynomial, SystemSpec};
use crate::numeric::{Complex, Mode, NumericError, Scalar, Tolerance};
use crate::operator_space::{
    build_energy_rep, build_position_pair, liouville, matrix_exponential_conjugate, symmetric_eigen, BasisKind,
    ComplexOperator, DenseOperator, Frame, HeisenbergEvolution, InnerProduct, OperatorError, OrthonormalChain,
    Representation,
};
use crate::parallel::Execution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("closure relation violated: {0}")]
    ClosureViolated(String),
    #[error("alpha_+ = alpha_- at level {0}")]
    DegenerateFrequencies(usize),
    #[error("phi_{n}({t}) has imaginary part {imag}")]
    ComplexAmplitude { n: usize, t: String, imag: String },
    #[error("{0} requires big-float mode")]
    RequiresBigReal(&'static str),
    #[error("closed-form evolution needs an energy-basis representation")]
    NeedsEnergyBasis,
    #[error("chain and representation disagree in dimension")]
    ChainMismatch,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// `R_0`, `R_1` from the catalog and `R_{-1}` reconstructed from the residual.
#[derive(Debug, Clone)]
pub struct ClosureData {
    pub r0: HPolynomial,
    pub r1: HPolynomial,
    pub rm1: HPolynomial,
    /// `R_{-1}(E(n))` for each level of the representation.
    pub rm1_diag: Vec<Scalar>,
    pub energies: Vec<Scalar>,
    /// Cataloged `(alpha_+, alpha_-)` at each level.
    pub alphas: Vec<(Scalar, Scalar)>,
}

fn poly_of_matrix(h: &DenseOperator, p: &HPolynomial) -> Result<DenseOperator, OperatorError> {
    let n = h.dim();
    let mode = h.mode();
    if h.is_diagonal() {
        let d: Vec<Scalar> = h.diag().iter().map(|e| p.eval(e)).collect();
        return Ok(DenseOperator::diagonal(&d, mode));
    }
    let mut acc = DenseOperator::zeros(n, mode);
    for c in p.0.iter().rev() {
        acc = acc.matmul(h)?.add(&DenseOperator::identity(n, mode).scale(c))?;
    }
    Ok(acc)
}

/// `X f(H)` with `f(H)` diagonal: scales column `b` by `f[b]`.
fn scale_columns(x: &DenseOperator, f: &[Scalar]) -> DenseOperator {
    let n = x.dim();
    let mut out = x.clone();
    for a in 0..n {
        for b in 0..n {
            let v = x.get(a, b);
            if !v.is_exact_zero() {
                out.set(a, b, v * &f[b]);
            }
        }
    }
    out
}

/// Interpolates `(x_i, y_i)` by a polynomial of degree `< min(3, len)` and
/// checks the remaining points lie on it.
fn fit_quadratic(xs: &[Scalar], ys: &[Scalar], tol: &Tolerance) -> Option<HPolynomial> {
    let mode = xs[0].mode();
    let k = xs.len().min(3);
    // Newton divided differences on the first k points
    let mut dd: Vec<Scalar> = ys[..k].to_vec();
    for j in 1..k {
        for i in (j..k).rev() {
            let den = &xs[i] - &xs[i - j];
            dd[i] = (&dd[i] - &dd[i - 1]).try_div(&den).ok()?;
        }
    }
    // expand c0 + c1 (x - x0) + c2 (x - x0)(x - x1)
    let mut coeffs = vec![mode.zero(); 3];
    coeffs[0] = dd[0].clone();
    if k > 1 {
        coeffs[0] = &coeffs[0] - &dd[1] * &xs[0];
        coeffs[1] = dd[1].clone();
    }
    if k > 2 {
        coeffs[0] = &coeffs[0] + &dd[2] * &xs[0] * &xs[1];
        coeffs[1] = &coeffs[1] - &dd[2] * (&xs[0] + &xs[1]);
        coeffs[2] = dd[2].clone();
    }
    let p = HPolynomial(coeffs);
    xs.iter()
        .zip(ys)
        .all(|(x, y)| tol.approx_eq(&p.eval(x), y))
        .then_some(p)
}

/// Solves a small dense system by Gaussian elimination; `None` if singular.
fn solve(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Option<Vec<Scalar>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_exact_zero())?;
        a.swap(p, c);
        b.swap(p, c);
        for r in 0..n {
            if r == c || a[r][c].is_exact_zero() {
                continue;
            }
            let f = a[r][c].try_div(&a[c][c]).ok()?;
            for k in c..n {
                let v = &a[r][k] - &f * &a[c][k];
                a[r][k] = v;
            }
            b[r] = &b[r] - &f * &b[c];
        }
    }
    (0..n).map(|i| b[i].try_div(&a[i][i]).ok()).collect()
}

fn closure_residual(rep: &Representation, r0: &HPolynomial, r1: &HPolynomial) -> Result<DenseOperator, OperatorError> {
    let l1 = liouville(&rep.h, &rep.eta)?;
    let l2 = liouville(&rep.h, &l1)?;
    let a = rep.eta.matmul(&poly_of_matrix(&rep.h, r0)?)?;
    let b = l1.matmul(&poly_of_matrix(&rep.h, r1)?)?;
    l2.sub(&a)?.sub(&b)
}

/// Checks `L^2 eta - eta R_0(H) - (L eta) R_1(H)` is a polynomial of degree
/// at most 2 in `H` and returns it as `R_{-1}`.
pub fn verify_closure(rep: &Representation, spec: &SystemSpec) -> Result<ClosureData, DynamicsError> {
    let (r0, r1) = spec.closure_polynomials();
    let mode = rep.mode();
    let tol = Tolerance::for_mode(mode);
    let x = closure_residual(rep, &r0, &r1)?;
    let n = rep.dim();
    let energies = (0..n as u32).map(|k| spec.energy(k)).collect::<Result<Vec<_>, _>>()?;
    let rm1 = match rep.basis {
        BasisKind::Energy => {
            for a in 0..n {
                for b in 0..n {
                    if a != b && !tol.is_zero(x.get(a, b)) {
                        return Err(DynamicsError::ClosureViolated(format!(
                            "residual entry ({a},{b}) = {}",
                            x.get(a, b)
                        )));
                    }
                }
            }
            fit_quadratic(&energies, &x.diag(), &tol).ok_or_else(|| {
                DynamicsError::ClosureViolated("residual diagonal is not quadratic in the energy".into())
            })?
        }
        BasisKind::Position => {
            if !liouville(&rep.h, &x)?.entries().iter().all(|v| tol.is_zero(v)) {
                return Err(DynamicsError::ClosureViolated(
                    "residual does not commute with H".into(),
                ));
            }
            let ip = InnerProduct::for_representation(crate::operator_space::InnerProductKind::Trace, rep)?;
            let powers: Vec<DenseOperator> = {
                let mut v = vec![DenseOperator::identity(n, mode)];
                for _ in 1..n.min(3) {
                    let next = v.last().unwrap().matmul(&rep.h)?;
                    v.push(next);
                }
                v
            };
            let gram = powers
                .iter()
                .map(|p| powers.iter().map(|q| ip.inner(p, q)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let rhs = powers.iter().map(|p| ip.inner(p, &x)).collect::<Result<Vec<_>, _>>()?;
            let mut c = solve(gram, rhs)
                .ok_or_else(|| DynamicsError::ClosureViolated("singular Gram matrix for powers of H".into()))?;
            let mut fitted = DenseOperator::zeros(n, mode);
            for (ci, p) in c.iter().zip(&powers) {
                fitted = fitted.add(&p.scale(ci))?;
            }
            if !x.sub(&fitted)?.entries().iter().all(|v| tol.is_zero(v)) {
                return Err(DynamicsError::ClosureViolated("residual is not quadratic in H".into()));
            }
            c.resize(3, mode.zero());
            HPolynomial(c)
        }
    };
    let rm1_diag = energies.iter().map(|e| rm1.eval(e)).collect();
    let alphas = (0..n as u32).map(|k| spec.alpha_pm(k)).collect::<Result<Vec<_>, _>>()?;
    for (k, (ap, am)) in alphas.iter().enumerate() {
        let e = &energies[k];
        let ok = tol.approx_eq(&(ap + am), &r1.eval(e)) && tol.approx_eq(&(ap * am), &-r0.eval(e));
        if !ok {
            return Err(DynamicsError::ClosureViolated(format!(
                "alpha_pm at level {k} are not roots"
            )));
        }
    }
    Ok(ClosureData {
        r0,
        r1,
        rm1,
        rm1_diag,
        energies,
        alphas,
    })
}

/// `-R_{-1}(E(n)) / R_0(E(n))` next to the cataloged `<n|eta|n>` for each level.
///
/// Where `R_0(E(n)) = 0` (a missing neighbour level) the pair is
/// `(R_{-1}(E(n)), -R_0(E(n)) <n|eta|n>)` instead, which must both vanish.
pub fn diagonal_consistency(closure: &ClosureData, spec: &SystemSpec) -> Result<Vec<(Scalar, Scalar)>, DynamicsError> {
    let mut out = Vec::new();
    for (n, e) in closure.energies.iter().enumerate() {
        let r = spec.recurrence(n as u32)?;
        let diag = if spec.kind().is_discrete() {
            -(r.raising + r.lowering)
        } else {
            r.diagonal
        };
        let r0 = closure.r0.eval(e);
        if Tolerance::for_mode(r0.mode()).is_zero(&r0) {
            out.push((closure.rm1_diag[n].clone(), -(r0 * diag)));
        } else {
            out.push((-closure.rm1_diag[n].try_div(&r0)?, diag));
        }
    }
    Ok(out)
}

/// `L^m eta = eta A_m(H) + (L eta) B_m(H) + C_m(H)`.
///
/// Diagonal `H` uses `B_m = (alpha_+^m - alpha_-^m)/(alpha_+ - alpha_-)`,
/// `A_m = R_0 B_{m-1}`, `C_m = R_{-1} B_{m-1}`; otherwise the coefficient
/// matrices follow `A' = R_0 B`, `B' = A + R_1 B`, `C' = R_{-1} B`.
pub fn apply_liouville_power(
    rep: &Representation,
    closure: &ClosureData,
    m: u32,
) -> Result<DenseOperator, DynamicsError> {
    let mode = rep.mode();
    let n = rep.dim();
    if m == 0 {
        return Ok(rep.eta.clone());
    }
    let l1 = liouville(&rep.h, &rep.eta)?;
    if rep.h.is_diagonal() {
        let b_of = |k: u32| -> Result<Vec<Scalar>, DynamicsError> {
            closure
                .alphas
                .iter()
                .enumerate()
                .map(|(lvl, (ap, am))| {
                    if k == 0 {
                        return Ok(mode.zero());
                    }
                    let gap = ap - am;
                    if gap.is_exact_zero() {
                        return Err(DynamicsError::DegenerateFrequencies(lvl));
                    }
                    Ok((ap.powi(k as i32) - am.powi(k as i32)).try_div(&gap)?)
                })
                .collect()
        };
        let bm = b_of(m)?;
        let bm1 = b_of(m - 1)?;
        let am: Vec<Scalar> = bm1
            .iter()
            .zip(&closure.energies)
            .map(|(b, e)| closure.r0.eval(e) * b)
            .collect();
        let cm: Vec<Scalar> = bm1.iter().zip(&closure.rm1_diag).map(|(b, r)| r * b).collect();
        let out = scale_columns(&rep.eta, &am).add(&scale_columns(&l1, &bm))?;
        return Ok(out.add(&DenseOperator::diagonal(&cm, mode))?);
    }
    let r0 = poly_of_matrix(&rep.h, &closure.r0)?;
    let r1 = poly_of_matrix(&rep.h, &closure.r1)?;
    let rm1 = poly_of_matrix(&rep.h, &closure.rm1)?;
    let mut a = DenseOperator::identity(n, mode);
    let mut b = DenseOperator::zeros(n, mode);
    let mut c = DenseOperator::zeros(n, mode);
    for _ in 0..m {
        let na = r0.matmul(&b)?;
        let nb = a.add(&r1.matmul(&b)?)?;
        let nc = rm1.matmul(&b)?;
        a = na;
        b = nb;
        c = nc;
    }
    Ok(rep.eta.matmul(&a)?.add(&l1.matmul(&b)?)?.add(&c)?)
}

/// `e^{iHt} eta e^{-iHt}` from the closure data, in the energy basis:
/// `eta F_A(H) + (L eta) F_B(H) + F_C(H)` with
/// `F_B = (e^{i alpha_+ t} - e^{i alpha_- t})/(alpha_+ - alpha_-)`,
/// `G = ((e^{i alpha_+ t} - 1)/alpha_+ - (e^{i alpha_- t} - 1)/alpha_-)/(alpha_+ - alpha_-)`,
/// `F_A = 1 + R_0 G`, `F_C = R_{-1} G`.
pub fn heisenberg_closed_form(
    rep: &Representation,
    closure: &ClosureData,
    t: &Scalar,
) -> Result<ComplexOperator, DynamicsError> {
    let mode = rep.mode();
    if mode.is_exact() {
        return Err(DynamicsError::RequiresBigReal("the Heisenberg solution"));
    }
    if rep.basis != BasisKind::Energy {
        return Err(DynamicsError::NeedsEnergyBasis);
    }
    let tol = Tolerance::for_mode(mode);
    let n = rep.dim();
    let one = Complex::real(mode.one());
    let mut fa = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    let mut fc = Vec::with_capacity(n);
    for (lvl, (ap, am)) in closure.alphas.iter().enumerate() {
        let gap = ap - am;
        if tol.is_zero(&gap) {
            return Err(DynamicsError::DegenerateFrequencies(lvl));
        }
        let r0 = closure.r0.eval(&closure.energies[lvl]);
        let ep = Complex::cis(&(ap * t))?;
        let em = Complex::cis(&(am * t))?;
        // (e^{i a t} - 1)/a, equal to i t at a = 0
        let drift = |e: &Complex, a: &Scalar| -> Result<Complex, NumericError> {
            if tol.is_zero(a) {
                Ok(Complex::new(mode.zero(), t.clone()))
            } else {
                Ok(e.sub(&one).scale(&a.recip()?))
            }
        };
        let inv_gap = gap.recip()?;
        let b = ep.sub(&em).scale(&inv_gap);
        let g = drift(&ep, ap)?.sub(&drift(&em, am)?).scale(&inv_gap);
        fa.push(one.add(&g.scale(&r0)));
        fb.push(b);
        fc.push(g.scale(&closure.rm1_diag[lvl]));
    }
    let l1 = liouville(&rep.h, &rep.eta)?;
    let mut out = ComplexOperator::from_real(DenseOperator::zeros(n, mode));
    for a in 0..n {
        for b in 0..n {
            let mut z = fa[b].scale(rep.eta.get(a, b)).add(&fb[b].scale(l1.get(a, b)));
            if a == b {
                z = z.add(&fc[b]);
            }
            out.set(a, b, z);
        }
    }
    Ok(out)
}

/// Largest entrywise deviation between the closed form and the
/// exponential-conjugation oracle built from the position-basis data.
pub fn heisenberg_deviation(spec: &SystemSpec, times: &[Scalar]) -> Result<Vec<Scalar>, DynamicsError> {
    let mode = spec.mode();
    if mode.is_exact() {
        return Err(DynamicsError::RequiresBigReal("the Heisenberg check"));
    }
    let size = spec
        .size()
        .ok_or_else(|| OperatorError::NotFiniteSystem(spec.label()))?;
    let pos = build_position_pair(spec, Frame::Symmetric)?;
    let en = build_energy_rep(spec, size, Frame::Symmetric)?;
    let closure = verify_closure(&en, spec)?;
    let (_, mut u) = symmetric_eigen(&pos.h)?;
    // orient eigenvectors so eta has positive off-diagonals in the energy basis
    let n = u.dim();
    for k in 1..n {
        let col_prev: Vec<Scalar> = (0..n).map(|r| u.get(r, k - 1).clone()).collect();
        let col: Vec<Scalar> = (0..n).map(|r| u.get(r, k).clone()).collect();
        let mut s = mode.zero();
        for r in 0..n {
            s = s + &col_prev[r] * pos.eta.get(r, r) * &col[r];
        }
        if s.is_negative() {
            for r in 0..n {
                u.set(r, k, -col[r].clone());
            }
        }
    }
    let ut = u.transpose();
    times
        .iter()
        .map(|t| {
            let closed = heisenberg_closed_form(&en, &closure, t)?;
            let oracle = matrix_exponential_conjugate(&pos.h, &pos.eta, t)?;
            let rotated = ComplexOperator {
                re: ut.matmul(&oracle.re)?.matmul(&u)?,
                im: ut.matmul(&oracle.im)?.matmul(&u)?,
            };
            Ok(closed.max_deviation(&rotated)?)
        })
        .collect()
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: &Scalar, stop: &Scalar, count: usize) -> Vec<Scalar> {
    let mode = start.mode();
    if count <= 1 {
        return vec![start.clone()];
    }
    let step = (stop - start) / mode.int(count as i64 - 1);
    (0..count).map(|i| start + &step * mode.int(i as i64)).collect()
}

/// Amplitudes `phi_n(t_i)` and complexity `K(t_i) = sum_{n>=1} n phi_n^2`.
#[derive(Debug, Clone)]
pub struct KrylovProfile {
    pub times: Vec<Scalar>,
    pub phi: Vec<Vec<Scalar>>,
    pub complexity: Vec<Scalar>,
    /// `sum_n phi_n(t)^2` at each time.
    pub norm: Vec<Scalar>,
    pub stop_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileMeta {
    pub system: String,
    pub inner_product: String,
    pub precision: Option<u32>,
}

impl KrylovProfile {
    pub fn to_csv(&self, meta: &ProfileMeta, digits: usize) -> String {
        let mut out = format!(
            "# system={}\n# inner_product={}\n# precision={}\n# stop_index={}\n",
            meta.system,
            meta.inner_product,
            meta.precision.map(|p| p.to_string()).unwrap_or_else(|| "exact".into()),
            self.stop_index.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        );
        let width = self.phi.first().map_or(0, Vec::len);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string(), "K".to_string()];
        header.extend((0..width).map(|k| format!("phi_{k}")));
        w.write_record(&header).expect("in-memory write");
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string_sig(digits), self.complexity[i].to_string_sig(digits)];
            row.extend(self.phi[i].iter().map(|p| p.to_string_sig(digits)));
            w.write_record(&row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }

    pub fn to_json(&self, meta: &ProfileMeta, digits: usize) -> serde_json::Value {
        let fmt = |v: &[Scalar]| v.iter().map(|x| x.to_string_sig(digits)).collect::<Vec<_>>();
        serde_json::json!({
            "system": meta.system,
            "inner_product": meta.inner_product,
            "precision": meta.precision,
            "stop_index": self.stop_index,
            "times": fmt(&self.times),
            "complexity": fmt(&self.complexity),
            "norm": fmt(&self.norm),
            "phi": self.phi.iter().map(|p| fmt(p)).collect::<Vec<_>>(),
        })
    }
}

/// `phi_n(t) = (i^n O_n, O(t))`, which must be real, and `K(t)`.
pub fn krylov_profile(
    chain: &OrthonormalChain,
    h: &DenseOperator,
    ip: &InnerProduct,
    times: &[Scalar],
    exec: Execution,
) -> Result<KrylovProfile, DynamicsError> {
    let mode = h.mode();
    if mode.is_exact() {
        return Err(DynamicsError::RequiresBigReal("the Krylov profile"));
    }
    if chain.monic[0].dim() != h.dim() {
        return Err(DynamicsError::ChainMismatch);
    }
    let ops: Vec<ComplexOperator> = (0..chain.len())
        .map(|k| chain.op(k).map(ComplexOperator::from_real))
        .collect::<Result<_, _>>()?;
    let o0 = chain.op(0)?;
    let evolution = HeisenbergEvolution::new(h, &o0)?;
    let tol = Tolerance::for_mode(mode);
    let rows = exec.map(
        times.to_vec(),
        |t| -> Result<(Vec<Scalar>, Scalar, Scalar), DynamicsError> {
            let ot = evolution.at(&t)?;
            let mut phi = Vec::with_capacity(ops.len());
            let mut k = mode.zero();
            let mut norm = mode.zero();
            for (n, o) in ops.iter().enumerate() {
                let c = ip.inner_complex(o, &ot)?;
                let z = Complex::i_pow(mode, -(n as i64)).mul(&c);
                if !tol.is_zero(&z.im) {
                    return Err(DynamicsError::ComplexAmplitude {
                        n,
                        t: t.to_string_sig(12),
                        imag: z.im.to_string_sig(6),
                    });
                }
                let sq = z.re.square();
                k = k + mode.int(n as i64) * &sq;
                norm = norm + sq;
                phi.push(z.re);
            }
            Ok((phi, k, norm))
        },
    );
    let mut profile = KrylovProfile {
        times: times.to_vec(),
        phi: Vec::new(),
        complexity: Vec::new(),
        norm: Vec::new(),
        stop_index: chain.stop_index(),
    };
    for r in rows {
        let (phi, k, norm) = r?;
        profile.phi.push(phi);
        profile.complexity.push(k);
        profile.norm.push(norm);
    }
    Ok(profile)
}

/// Mode used by the dynamics checks when the caller asked for exact arithmetic.
pub fn dynamics_mode(mode: Mode) -> Mode {
    if mode.is_exact() {
        Mode::default_bigreal()
    } else {
        mode
    }
}
