//! Per-system invariant suite: every closed form against its oracle.

use serde::Serialize;

use crate::catalog::{SystemKind, SystemSpec};
use crate::dynamics::{
    apply_liouville_power, diagonal_consistency, heisenberg_closed_form, heisenberg_deviation, krylov_profile,
    linspace, verify_closure, KrylovProfile,
};
use crate::lanczos_chain::{b123_closed_forms, hankel_check, moments_to_lanczos, ChainError};
use crate::moments::{default_tail_tol, moments_oracle, moments_theorem1, moments_theorem2, MomentTable};
use crate::numeric::{Mode, Scalar, Tolerance};
use crate::operator_space::{
    build_energy_rep, build_position_pair, liouville, operator_lanczos, ComplexOperator, Frame, HeisenbergEvolution,
    InnerProduct, InnerProductKind, OrthonormalChain, Representation,
};
use crate::parallel::Execution;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: String,
    pub got: String,
    pub passed: bool,
}

impl CheckResult {
    pub fn new(name: &str, expected: impl Into<String>, got: impl Into<String>, passed: bool) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            expected: expected.into(),
            got: got.into(),
            passed,
        }
    }

    fn error(name: &str, expected: impl Into<String>, err: impl std::fmt::Display) -> CheckResult {
        CheckResult::new(name, expected, format!("error: {err}"), false)
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Required for infinite systems.
    pub beta: Option<Scalar>,
    pub k: usize,
    /// Precision for checks that need exponentials.
    pub digits: u32,
    pub execution: Execution,
}

impl VerifyOptions {
    pub fn new(beta: Option<Scalar>, k: usize, digits: u32) -> VerifyOptions {
        VerifyOptions {
            beta,
            k,
            digits,
            execution: Execution::default(),
        }
    }
}

/// Systems whose spectrum is linear in `n`; their chains stop early.
pub fn has_linear_spectrum(kind: SystemKind) -> bool {
    use SystemKind::*;
    matches!(kind, Krawtchouk | DualHahn | Meixner | Charlier | Hermite | Laguerre)
}

/// Absolute bound used for dynamics checks at `digits` digits.
pub fn dynamics_bound(mode: Mode) -> Scalar {
    mode.pow10(-(mode.digits().unwrap_or(50) as i32 - 15))
}

fn sci(x: &Scalar) -> String {
    x.to_string_sig(4)
}

fn max_abs_diff(a: &[Scalar], b: &[Scalar], mode: Mode) -> Scalar {
    a.iter().zip(b).fold(mode.zero(), |m, (x, y)| m.max(&(x - y).abs()))
}

/// Runs the full suite for one system. Errors inside a check become failed rows.
pub fn verify_system(spec: &SystemSpec, opts: &VerifyOptions) -> Vec<CheckResult> {
    if spec.is_finite() {
        verify_finite(spec, opts)
    } else {
        verify_infinite(spec, opts)
    }
}

fn shift_and_discriminant(spec: &SystemSpec, levels: u32, out: &mut Vec<CheckResult>) {
    let mut bad_shift = Vec::new();
    let mut bad_disc = Vec::new();
    for n in 0..=levels {
        if n >= 1 && n < levels && !spec.spectrum_shift_relations(n).unwrap_or(false) {
            bad_shift.push(n);
        }
        if !spec.discriminant_is_square(n).unwrap_or(false) {
            bad_disc.push(n);
        }
    }
    out.push(CheckResult::new(
        "spectrum_shift_relations",
        "all levels",
        if bad_shift.is_empty() {
            "all levels".into()
        } else {
            format!("fails at {bad_shift:?}")
        },
        bad_shift.is_empty(),
    ));
    out.push(CheckResult::new(
        "discriminant_is_square",
        "all levels",
        if bad_disc.is_empty() {
            "all levels".into()
        } else {
            format!("fails at {bad_disc:?}")
        },
        bad_disc.is_empty(),
    ));
}

fn closure_checks(spec: &SystemSpec, rep: &Representation, label: &str, out: &mut Vec<CheckResult>) {
    let name = format!("closure_{label}");
    match verify_closure(rep, spec) {
        Ok(c) => {
            out.push(CheckResult::new(
                &name,
                "residual quadratic in H",
                format!("R_-1 degree {}", c.rm1.degree()),
                true,
            ));
            let tol = Tolerance::for_mode(rep.mode());
            match diagonal_consistency(&c, spec) {
                Ok(pairs) => {
                    let bad: Vec<usize> = pairs
                        .iter()
                        .enumerate()
                        .filter(|(_, (l, r))| !tol.approx_eq(l, r))
                        .map(|(n, _)| n)
                        .collect();
                    out.push(CheckResult::new(
                        &format!("diagonal_eta_{label}"),
                        "-R_-1/R_0 = <n|eta|n>",
                        if bad.is_empty() {
                            "all levels".into()
                        } else {
                            format!("fails at {bad:?}")
                        },
                        bad.is_empty(),
                    ));
                }
                Err(e) => out.push(CheckResult::error(
                    &format!("diagonal_eta_{label}"),
                    "-R_-1/R_0 = <n|eta|n>",
                    e,
                )),
            }
            let mut v = rep.eta.clone();
            let mut worst = None;
            for m in 0..=8 {
                match apply_liouville_power(rep, &c, m) {
                    Ok(p) => {
                        let d = p.sub(&v).map(|x| x.max_abs());
                        if !d.map(|d| tol.is_zero(&d)).unwrap_or(false) {
                            worst.get_or_insert(m);
                        }
                    }
                    Err(_) => {
                        worst.get_or_insert(m);
                    }
                }
                v = match liouville(&rep.h, &v) {
                    Ok(x) => x,
                    Err(e) => {
                        out.push(CheckResult::error(&format!("liouville_powers_{label}"), "m <= 8", e));
                        return;
                    }
                };
            }
            out.push(CheckResult::new(
                &format!("liouville_powers_{label}"),
                "closed form = iterated commutator, m <= 8",
                match worst {
                    None => "equal".into(),
                    Some(m) => format!("differs at m={m}"),
                },
                worst.is_none(),
            ));
        }
        Err(e) => out.push(CheckResult::error(&name, "residual quadratic in H", e)),
    }
}

fn compare_tables(name: &str, a: &MomentTable, b: &MomentTable, rel: Option<&Scalar>, out: &mut Vec<CheckResult>) {
    let mode = a.mode;
    let mut worst = mode.zero();
    let mut equal = true;
    for (x, y) in a.values.iter().zip(&b.values) {
        match rel {
            None => equal &= x == y,
            Some(_) => {
                let scale = x.abs().max(&y.abs()).max(&mode.one());
                worst = worst.max(&((x - y).abs() / scale));
            }
        }
    }
    let (got, passed) = match rel {
        None => (
            if equal {
                "identical".to_string()
            } else {
                "differ".to_string()
            },
            equal,
        ),
        Some(r) => (format!("max rel diff {}", sci(&worst)), worst < *r),
    };
    let expected = match rel {
        None => "identical".to_string(),
        Some(r) => format!("< {}", sci(r)),
    };
    out.push(CheckResult::new(name, expected, got, passed));
}

fn odd_moments(table: &MomentTable, out: &mut Vec<CheckResult>) {
    let tol = Tolerance::for_mode(table.mode);
    let bad: Vec<usize> = (1..table.values.len())
        .step_by(2)
        .filter(|&m| !tol.is_zero(table.mu(m)))
        .collect();
    out.push(CheckResult::new(
        "odd_moments_vanish",
        "0",
        if bad.is_empty() {
            "0".into()
        } else {
            format!("nonzero at {bad:?}")
        },
        bad.is_empty(),
    ));
}

fn chain_checks(table: &MomentTable, kind: SystemKind, bound: &Scalar, out: &mut Vec<CheckResult>) {
    let exact = table.mode.is_exact();
    match b123_closed_forms(table) {
        Ok((_, b2, b3)) => {
            if has_linear_spectrum(kind) {
                let passed = if exact { b3.is_exact_zero() } else { b3.abs() < *bound };
                out.push(CheckResult::new(
                    "b3_is_zero",
                    if exact { "0".into() } else { format!("< {}", sci(bound)) },
                    sci(&b3),
                    passed,
                ));
            } else {
                out.push(CheckResult::new("b3_nonnegative", ">= 0", sci(&b3), !b3.is_negative()));
            }
            let _ = b2;
        }
        Err(ChainError::DegenerateChain) => {
            let b2 = table.even(2) / table.even(1) - table.even(1);
            let passed = if exact { b2.is_exact_zero() } else { b2.abs() < *bound };
            out.push(CheckResult::new(
                "b2_is_zero",
                if exact { "0".into() } else { format!("< {}", sci(bound)) },
                sci(&b2),
                passed,
            ));
        }
        Err(e) => out.push(CheckResult::error("b3_closed_form", "defined", e)),
    }
    match moments_to_lanczos(table) {
        Ok(b) => {
            if let Ok((b1, b2, b3)) = b123_closed_forms(table) {
                let rec: Vec<Scalar> = (1..=3)
                    .map(|k| b.get(k, table.mode).unwrap_or(table.mode.zero()))
                    .collect();
                let diff = max_abs_diff(&rec, &[b1, b2, b3], table.mode);
                let passed = if exact { diff.is_exact_zero() } else { diff < *bound };
                out.push(CheckResult::new("b123_matches_recursion", "equal", sci(&diff), passed));
            }
            if b.len() >= 2 || b.stop_index.is_some() {
                match hankel_check(table, &b, 2) {
                    Ok(h) => out.push(CheckResult::new("hankel_n2", sci(&h.rhs), sci(&h.lhs), h.holds)),
                    Err(e) => out.push(CheckResult::error("hankel_n2", "det = prod b_k^(2(n+1-k))", e)),
                }
            }
        }
        Err(e) => out.push(CheckResult::error("moments_to_lanczos", "positive chain", e)),
    }
}

/// Complete operator Lanczos chain of `rep.eta`, up to the Krylov dimension.
pub fn full_chain(
    ip: &InnerProduct,
    rep: &Representation,
) -> Result<OrthonormalChain, crate::operator_space::OperatorError> {
    let kmax = rep.dim() * rep.dim();
    operator_lanczos(ip, &rep.h, &rep.eta, kmax, &Tolerance::for_mode(rep.mode()))
}

fn profile_checks(profile: &KrylovProfile, chain_len: usize, bound: &Scalar, out: &mut Vec<CheckResult>) {
    let mode = profile.times[0].mode();
    let ones = vec![mode.one(); profile.norm.len()];
    let dev = max_abs_diff(&profile.norm, &ones, mode);
    out.push(CheckResult::new(
        "sum_rule",
        format!("|sum phi^2 - 1| < {}", sci(bound)),
        sci(&dev),
        dev < *bound,
    ));
    let cap = mode.int(chain_len as i64 - 1);
    let kmax = profile.complexity.iter().fold(mode.zero(), |m, k| m.max(k));
    out.push(CheckResult::new(
        "complexity_bounded",
        format!("0 <= K <= {}", chain_len - 1),
        sci(&kmax),
        kmax <= cap + bound && profile.complexity.iter().all(|k| *k > -bound.clone()),
    ));
}

fn verify_finite(spec: &SystemSpec, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let size = spec.size().expect("finite");
    let exact_spec = spec.to_mode(Mode::Exact).ok();
    shift_and_discriminant(spec, size, &mut out);
    let alg = exact_spec.as_ref().unwrap_or(spec);
    let frame = Frame::natural(alg.mode());
    let alg_bound = if alg.mode().is_exact() {
        alg.mode().zero()
    } else {
        dynamics_bound(alg.mode())
    };
    let rel = (!alg.mode().is_exact()).then_some(&alg_bound);
    match (
        moments_theorem1(alg, opts.k),
        build_position_pair(alg, frame),
        build_energy_rep(alg, size, frame),
    ) {
        (Ok(closed), Ok(pos), Ok(en)) => {
            let ip = InnerProduct::for_representation(InnerProductKind::Trace, &pos).expect("trace on position basis");
            match moments_oracle(&pos.h, &pos.eta, &ip, opts.k) {
                Ok(oracle) => {
                    compare_tables("theorem1_equals_oracle", &closed, &oracle, rel, &mut out);
                    odd_moments(&oracle, &mut out);
                }
                Err(e) => out.push(CheckResult::error("theorem1_equals_oracle", "identical", e)),
            }
            let ipe = InnerProduct::for_representation(InnerProductKind::Trace, &en).expect("trace on energy basis");
            match moments_oracle(&en.h, &en.eta, &ipe, opts.k) {
                Ok(oracle) => compare_tables("energy_basis_equals_oracle", &closed, &oracle, rel, &mut out),
                Err(e) => out.push(CheckResult::error("energy_basis_equals_oracle", "identical", e)),
            }
            out.push(match closed.check_invariants() {
                Ok(()) => CheckResult::new("moments_positive", "mu_0 = 1, mu_2m > 0", "ok", true),
                Err(e) => CheckResult::new("moments_positive", "mu_0 = 1, mu_2m > 0", e, false),
            });
            chain_checks(&closed, spec.kind(), &alg_bound, &mut out);
            match (full_chain(&ip, &pos), moments_to_lanczos(&closed)) {
                (Ok(chain), Ok(b)) => {
                    let n = b.len().min(chain.b_squared.len());
                    let same = if alg.mode().is_exact() {
                        chain.b_squared[..n] == b.b_squared[..n]
                    } else {
                        max_abs_diff(&chain.b_squared[..n], &b.b_squared[..n], alg.mode()) < alg_bound
                    };
                    out.push(CheckResult::new(
                        "chain_equals_operator_lanczos",
                        "equal b^2",
                        if same { "equal" } else { "differ" },
                        same,
                    ));
                }
                (Err(e), _) => out.push(CheckResult::error("chain_equals_operator_lanczos", "equal b^2", e)),
                (_, Err(e)) => out.push(CheckResult::error("chain_equals_operator_lanczos", "equal b^2", e)),
            }
            let lam = alg.mode().int(2);
            let scaled = pos.scaled(&lam);
            match moments_oracle(&scaled.h, &scaled.eta, &ip, opts.k) {
                Ok(t) => compare_tables("scaling_covariance", &closed.scaled(&lam), &t, rel, &mut out),
                Err(e) => out.push(CheckResult::error("scaling_covariance", "identical", e)),
            }
            closure_checks(alg, &en, "energy", &mut out);
            closure_checks(alg, &pos, "position", &mut out);
        }
        (a, b, c) => {
            let e = a
                .err()
                .map(|e| e.to_string())
                .or(b.err().map(|e| e.to_string()))
                .or(c.err().map(|e| e.to_string()));
            out.push(CheckResult::error(
                "theorem1_equals_oracle",
                "identical",
                e.unwrap_or_default(),
            ));
        }
    }
    // dynamics in big-float mode
    let dm = Mode::bigreal(opts.digits).unwrap_or_else(|_| Mode::default_bigreal());
    let bound = dynamics_bound(dm);
    let Ok(dspec) = spec.to_mode(dm) else {
        out.push(CheckResult::error("heisenberg_closed_form", "", "cannot change mode"));
        return out;
    };
    let times: Vec<Scalar> = ["0.1", "0.7", "3.14", "10"]
        .iter()
        .map(|t| dm.parse(t).expect("literal"))
        .collect();
    match heisenberg_deviation(&dspec, &times) {
        Ok(devs) => {
            let worst = devs.iter().fold(dm.zero(), |m, d| m.max(d));
            out.push(CheckResult::new(
                "heisenberg_closed_form",
                format!("< {}", sci(&bound)),
                sci(&worst),
                worst < bound,
            ));
        }
        Err(e) => out.push(CheckResult::error(
            "heisenberg_closed_form",
            format!("< {}", sci(&bound)),
            e,
        )),
    }
    let profile = build_position_pair(&dspec, Frame::Symmetric).and_then(|rep| {
        let ip = InnerProduct::for_representation(InnerProductKind::Trace, &rep)?;
        let chain = full_chain(&ip, &rep)?;
        Ok((rep, ip, chain))
    });
    match profile {
        Ok((rep, ip, chain)) => {
            let grid = linspace(&dm.zero(), &dm.int(5), 6);
            match krylov_profile(&chain, &rep.h, &ip, &grid, opts.execution) {
                Ok(p) => profile_checks(&p, chain.len(), &bound, &mut out),
                Err(e) => out.push(CheckResult::error("sum_rule", "1", e)),
            }
        }
        Err(e) => out.push(CheckResult::error("sum_rule", "1", e)),
    }
    out
}

/// Theorem 2 table, truncated energy representation sized by the tail rule,
/// and the Wightman oracle on it.
pub fn thermal_pair(
    spec: &SystemSpec,
    beta: &Scalar,
    k: usize,
) -> Result<(MomentTable, Representation, InnerProduct, MomentTable), String> {
    let closed = moments_theorem2(spec, k, beta, &default_tail_tol(spec.mode())).map_err(|e| e.to_string())?;
    let n_max = closed.truncation.as_ref().map_or(20, |t| t.n_max + 1).max(2);
    let rep = build_energy_rep(spec, n_max, Frame::Symmetric).map_err(|e| e.to_string())?;
    let ip = InnerProduct::for_representation(InnerProductKind::Wightman { beta: beta.clone() }, &rep)
        .map_err(|e| e.to_string())?;
    let oracle = moments_oracle(&rep.h, &rep.eta, &ip, k).map_err(|e| e.to_string())?;
    Ok((closed, rep, ip, oracle))
}

/// Closed-form Heisenberg operator against the eigenbasis propagator on a
/// truncated energy representation, one max deviation per time.
pub fn truncated_heisenberg_deviation(
    spec: &SystemSpec,
    rep: &Representation,
    times: &[Scalar],
) -> Result<Vec<Scalar>, String> {
    let closure = verify_closure(rep, spec).map_err(|e| e.to_string())?;
    let evo = HeisenbergEvolution::new(&rep.h, &rep.eta).map_err(|e| e.to_string())?;
    times
        .iter()
        .map(|t| {
            let o: ComplexOperator = evo.at(t).map_err(|e| e.to_string())?;
            let cf = heisenberg_closed_form(rep, &closure, t).map_err(|e| e.to_string())?;
            cf.max_deviation(&o).map_err(|e| e.to_string())
        })
        .collect()
}

/// Representation, inner product and full chain used for `K(t)`: the
/// symmetric position basis with the trace product for finite systems, the
/// truncated energy basis with the Wightman product otherwise. Without
/// `n_max` the truncation follows the thermal tail rule.
pub fn krylov_setup(
    spec: &SystemSpec,
    beta: Option<&Scalar>,
    n_max: Option<u32>,
) -> Result<(Representation, InnerProduct, OrthonormalChain), String> {
    let (rep, ip) = if spec.is_finite() {
        let rep = build_position_pair(spec, Frame::Symmetric).map_err(|e| e.to_string())?;
        let ip = InnerProduct::for_representation(InnerProductKind::Trace, &rep).map_err(|e| e.to_string())?;
        (rep, ip)
    } else {
        let beta = beta.ok_or("beta is required for infinite systems")?;
        let n = match n_max {
            Some(n) => n,
            None => {
                let t = moments_theorem2(spec, 1, beta, &default_tail_tol(spec.mode())).map_err(|e| e.to_string())?;
                t.truncation.map_or(20, |t| t.n_max + 1).max(2)
            }
        };
        let rep = build_energy_rep(spec, n, Frame::Symmetric).map_err(|e| e.to_string())?;
        let ip = InnerProduct::for_representation(InnerProductKind::Wightman { beta: beta.clone() }, &rep)
            .map_err(|e| e.to_string())?;
        (rep, ip)
    };
    let chain = full_chain(&ip, &rep).map_err(|e| e.to_string())?;
    Ok((rep, ip, chain))
}

fn verify_infinite(spec: &SystemSpec, opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let Some(beta) = opts.beta.clone() else {
        out.push(CheckResult::new("configuration", "beta given", "beta missing", false));
        return out;
    };
    shift_and_discriminant(spec, 20, &mut out);
    if let Ok(exact) = spec.to_mode(Mode::Exact) {
        match build_energy_rep(&exact, 12, Frame::Gauged) {
            Ok(rep) => closure_checks(&exact, &rep, "energy", &mut out),
            Err(e) => out.push(CheckResult::error("closure_energy", "residual quadratic in H", e)),
        }
    }
    let dm = if spec.mode().is_exact() {
        Mode::bigreal(opts.digits).unwrap_or_else(|_| Mode::default_bigreal())
    } else {
        spec.mode()
    };
    let bound = dynamics_bound(dm);
    let Ok(dspec) = spec.to_mode(dm) else {
        return out;
    };
    let Ok(beta) = beta.to_mode(dm) else {
        return out;
    };
    match thermal_pair(&dspec, &beta, opts.k) {
        Ok((closed, rep, ip, oracle)) => {
            compare_tables("theorem2_equals_oracle", &closed, &oracle, Some(&bound), &mut out);
            odd_moments(&oracle, &mut out);
            out.push(match closed.check_invariants() {
                Ok(()) => CheckResult::new("moments_positive", "mu_0 = 1, mu_2m > 0", "ok", true),
                Err(e) => CheckResult::new("moments_positive", "mu_0 = 1, mu_2m > 0", e, false),
            });
            if spec.kind() == SystemKind::Hermite {
                let worst = (1..=closed.k()).fold(dm.zero(), |m, j| {
                    m.max(&((closed.even(j) - dm.int(4).powi(j as i32)).abs()))
                });
                out.push(CheckResult::new(
                    "hermite_moments_4_pow_m",
                    format!("< {}", sci(&bound)),
                    sci(&worst),
                    worst < bound,
                ));
            }
            chain_checks(&closed, spec.kind(), &bound, &mut out);
            let times: Vec<Scalar> = ["0.1", "0.7", "3.14", "10"]
                .iter()
                .map(|t| dm.parse(t).expect("literal"))
                .collect();
            out.push(match truncated_heisenberg_deviation(&dspec, &rep, &times) {
                Ok(devs) => {
                    let worst = devs.iter().fold(dm.zero(), |m, d| m.max(d));
                    CheckResult::new(
                        "heisenberg_closed_form",
                        format!("< {}", sci(&bound)),
                        sci(&worst),
                        worst < bound,
                    )
                }
                Err(e) => CheckResult::error("heisenberg_closed_form", format!("< {}", sci(&bound)), e),
            });
            match full_chain(&ip, &rep) {
                Ok(chain) => {
                    let grid = linspace(&dm.zero(), &dm.int(3), 6);
                    match krylov_profile(&chain, &rep.h, &ip, &grid, opts.execution) {
                        Ok(p) => {
                            profile_checks(&p, chain.len(), &bound, &mut out);
                            if spec.kind() == SystemKind::Hermite {
                                let want: Vec<Scalar> = grid
                                    .iter()
                                    .map(|t| (dm.int(2) * t).sin().expect("big-float sin").square())
                                    .collect();
                                let dev = max_abs_diff(&p.complexity, &want, dm);
                                out.push(CheckResult::new(
                                    "complexity_sin_squared",
                                    format!("< {}", sci(&bound)),
                                    sci(&dev),
                                    dev < bound,
                                ));
                            }
                        }
                        Err(e) => out.push(CheckResult::error("sum_rule", "1", e)),
                    }
                }
                Err(e) => out.push(CheckResult::error("sum_rule", "1", e)),
            }
        }
        Err(e) => out.push(CheckResult::error("theorem2_equals_oracle", "tail bound met", e)),
    }
    out
}

/// Fixed-width table: check, expected, got, status.
pub fn render_table(system: &str, checks: &[CheckResult]) -> String {
    let w0 = checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
    let w1 = checks.iter().map(|c| c.expected.len()).max().unwrap_or(8).max(8);
    let w2 = checks.iter().map(|c| c.got.len()).max().unwrap_or(3).max(3);
    let mut s = format!(
        "# {system}\n{:<w0$}  {:<w1$}  {:<w2$}  status\n",
        "check", "expected", "got"
    );
    for c in checks {
        s.push_str(&format!(
            "{:<w0$}  {:<w1$}  {:<w2$}  {}\n",
            c.name,
            c.expected,
            c.got,
            c.status()
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::default_system;

    #[test]
    fn krawtchouk_suite_passes() {
        let s = default_system(SystemKind::Krawtchouk, Mode::Exact).unwrap();
        let checks = verify_system(&s, &VerifyOptions::new(None, 6, 40));
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.iter().any(|c| c.name == "b3_is_zero"));
        let table = render_table(&s.label(), &checks);
        assert!(table.contains("heisenberg_closed_form"));
    }

    #[test]
    fn hermite_suite_reports_b2() {
        let m = Mode::bigreal(40).unwrap();
        let s = default_system(SystemKind::Hermite, m).unwrap();
        let checks = verify_system(&s, &VerifyOptions::new(Some(m.one()), 6, 40));
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.iter().any(|c| c.name == "b2_is_zero" && c.passed));
        assert!(checks.iter().any(|c| c.name == "complexity_sin_squared"));
    }

    #[test]
    fn missing_beta_fails() {
        let m = Mode::bigreal(30).unwrap();
        let s = default_system(SystemKind::Charlier, m).unwrap();
        let checks = verify_system(&s, &VerifyOptions::new(None, 6, 30));
        assert!(!checks[0].passed);
    }
}
