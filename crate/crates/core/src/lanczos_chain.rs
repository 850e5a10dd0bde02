//! Moments to Lanczos coefficients and back, the low-order closed forms, the
//! Hankel determinant identity and early-stop classification.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::{CatalogError, SystemSpec};
use crate::moments::{
    default_tail_tol, moments_oracle, moments_theorem1, moments_theorem2, MomentError, MomentTable, Provenance,
};
use crate::numeric::{Mode, NumericError, Scalar, Tolerance};
use crate::operator_space::{build_energy_rep, Frame, InnerProduct, InnerProductKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("mu_0 = {0}, expected 1")]
    NonUnitMuZero(String),
    #[error("b_{index}^2 = {value} is negative; the moment sequence is not positive definite")]
    NegativeBSquared { index: usize, value: String },
    #[error("mu_4 = mu_2^2: the chain stops at b_2 and b_3 is undefined")]
    DegenerateChain,
    #[error("need {needed} coefficients, have {have}")]
    TooFewCoefficients { needed: usize, have: usize },
    #[error("need moments through mu_{needed}, have through mu_{have}")]
    TooFewMoments { needed: usize, have: usize },
    #[error("{0} has no trace-class initial operator; use the Wightman inner product")]
    TraceOnInfinite(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// `b_1^2, b_2^2, ...` and where the chain terminated.
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosCoefficients {
    pub b_squared: Vec<Scalar>,
    /// `Some(k)`: `b_{k+1}^2` was declared zero and `O_k` is the last operator.
    pub stop_index: Option<usize>,
}

impl LanczosCoefficients {
    pub fn new(b_squared: Vec<Scalar>, stop_index: Option<usize>) -> LanczosCoefficients {
        LanczosCoefficients { b_squared, stop_index }
    }

    pub fn len(&self) -> usize {
        self.b_squared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_squared.is_empty()
    }

    /// `b_k^2`, zero past a stop.
    pub fn get(&self, k: usize, mode: Mode) -> Option<Scalar> {
        match self.b_squared.get(k - 1) {
            Some(v) => Some(v.clone()),
            None if self.stop_index.is_some() => Some(mode.zero()),
            None => None,
        }
    }
}

/// Viswanath-Muller recursion for even moment sequences:
/// `M_{2l}^{(j)} = M_{2l}^{(j-1)}/b_{j-1}^2 - M_{2l-2}^{(j-2)}/b_{j-2}^2`, `b_j^2 = M_{2j}^{(j)}`.
///
/// A value within tolerance of zero (relative to the two terms it cancels
/// between) stops the chain; a clearly negative value is an error.
pub fn moments_to_lanczos(mu: &MomentTable) -> Result<LanczosCoefficients, ChainError> {
    let mode = mu.mode;
    let tol = Tolerance::for_mode(mode);
    if !tol.approx_eq(mu.mu(0), &mode.one()) {
        return Err(ChainError::NonUnitMuZero(mu.mu(0).to_string()));
    }
    let k = mu.k();
    // rows indexed by l = 0..=k, holding M_{2l}
    let mut prev2: Vec<Scalar> = vec![mode.zero(); k + 1];
    let mut prev: Vec<Scalar> = (0..=k).map(|l| mu.even(l).clone()).collect();
    let mut b_prev2 = mode.one();
    let mut b_prev = mode.one();
    let mut out = Vec::new();
    for j in 1..=k {
        let mut cur = vec![mode.zero(); k + 1];
        let mut scale = mode.zero();
        for l in j..=k {
            let a = prev[l].try_div(&b_prev)?;
            let b = prev2[l - 1].try_div(&b_prev2)?;
            if l == j {
                scale = a.abs().max(&b.abs());
            }
            cur[l] = a - b;
        }
        let bj = cur[j].clone();
        let eps = &tol.zero_eps + &tol.rel_eps * &scale;
        let negligible = if mode.is_exact() {
            bj.is_exact_zero()
        } else {
            bj.abs() <= eps
        };
        if negligible {
            return Ok(LanczosCoefficients::new(out, Some(j - 1)));
        }
        if bj.is_negative() {
            return Err(ChainError::NegativeBSquared {
                index: j,
                value: bj.to_string_sig(12),
            });
        }
        out.push(bj.clone());
        prev2 = prev;
        prev = cur;
        b_prev2 = b_prev;
        b_prev = bj;
    }
    Ok(LanczosCoefficients::new(out, None))
}

/// `mu_{2m} = (e_0, J^{2m} e_0)` for the zero-diagonal Jacobi matrix with
/// off-diagonals `b_n`, iterated in the similar form with upper entries `b_n^2`
/// and lower entries 1 so exact mode stays rational.
pub fn lanczos_to_moments(b: &LanczosCoefficients, k: usize, mode: Mode) -> Result<MomentTable, ChainError> {
    if b.stop_index.is_none() && b.len() < k {
        return Err(ChainError::TooFewCoefficients {
            needed: k,
            have: b.len(),
        });
    }
    let n = b.len().min(k) + 1;
    let upper: Vec<Scalar> = b.b_squared.iter().take(n - 1).cloned().collect();
    let mut v = vec![mode.zero(); n];
    v[0] = mode.one();
    let mut values = vec![mode.one()];
    for _ in 1..=2 * k {
        let mut next = vec![mode.zero(); n];
        for i in 0..n {
            let mut acc = mode.zero();
            if i + 1 < n && !v[i + 1].is_exact_zero() {
                acc = acc + &upper[i] * &v[i + 1];
            }
            if i > 0 {
                acc = acc + &v[i - 1];
            }
            next[i] = acc;
        }
        v = next;
        values.push(v[0].clone());
    }
    Ok(MomentTable::from_values(values, Provenance::Jacobi))
}

/// `b_1^2 = mu_2`, `b_2^2 = mu_4/mu_2 - mu_2`,
/// `b_3^2 = mu_2(mu_6 - 2 mu_2 mu_4 + mu_2^3) / (mu_2(mu_4 - mu_2^2)) - mu_4/mu_2 + mu_2`.
pub fn b123_closed_forms(mu: &MomentTable) -> Result<(Scalar, Scalar, Scalar), ChainError> {
    if mu.k() < 3 {
        return Err(ChainError::TooFewMoments {
            needed: 6,
            have: 2 * mu.k(),
        });
    }
    let (m2, m4, m6) = (mu.even(1), mu.even(2), mu.even(3));
    let gap = m4 - m2.square();
    let tol = Tolerance::for_mode(mu.mode);
    if gap.is_exact_zero() || tol.approx_eq(m4, &m2.square()) {
        return Err(ChainError::DegenerateChain);
    }
    let b1 = m2.clone();
    let b2 = m4.try_div(m2)? - m2;
    let num = m2 * (m6 - mu.mode.int(2) * m2 * m4 + m2.powi(3));
    let b3 = num.try_div(&(m2 * &gap))? - m4.try_div(m2)? + m2;
    Ok((b1, b2, b3))
}

/// Determinant by Gaussian elimination with nonzero (exact) or largest (big-float) pivots.
pub fn determinant(mut a: Vec<Vec<Scalar>>) -> Result<Scalar, NumericError> {
    let n = a.len();
    let mode = a[0][0].mode();
    let mut det = mode.one();
    for c in 0..n {
        let pivot = (c..n).max_by(|&i, &j| {
            let (x, y) = (a[i][c].abs(), a[j][c].abs());
            x.partial_cmp(&y).expect("same mode")
        });
        let p = match pivot {
            Some(p) if !a[p][c].is_exact_zero() => p,
            _ => return Ok(mode.zero()),
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det = det * &piv;
        for r in c + 1..n {
            if a[r][c].is_exact_zero() {
                continue;
            }
            let f = a[r][c].try_div(&piv)?;
            for k in c..n {
                let v = &a[r][k] - &f * &a[c][k];
                a[r][k] = v;
            }
        }
    }
    Ok(det)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HankelCheck {
    pub n: usize,
    pub lhs: Scalar,
    pub rhs: Scalar,
    /// `prod_k b_k^2`, the formula that ignores multiplicities.
    pub naive: Scalar,
    pub holds: bool,
    pub naive_formula_fails: bool,
}

/// `det(mu_{i+j})_{0<=i,j<=n}` against `prod_{k=1}^n b_k^{2(n+1-k)}`.
pub fn hankel_check(mu: &MomentTable, b: &LanczosCoefficients, n: usize) -> Result<HankelCheck, ChainError> {
    if 2 * n > 2 * mu.k() {
        return Err(ChainError::TooFewMoments {
            needed: 2 * n,
            have: 2 * mu.k(),
        });
    }
    let mode = mu.mode;
    let rows = (0..=n)
        .map(|i| (0..=n).map(|j| mu.mu(i + j).clone()).collect())
        .collect();
    let lhs = determinant(rows)?;
    let mut rhs = mode.one();
    let mut naive = mode.one();
    for k in 1..=n {
        let bk = b.get(k, mode).ok_or(ChainError::TooFewCoefficients {
            needed: n,
            have: b.len(),
        })?;
        rhs = rhs * bk.powi((n + 1 - k) as i32);
        naive = naive * bk;
    }
    let tol = Tolerance::for_mode(mode);
    Ok(HankelCheck {
        n,
        holds: tol.approx_eq(&lhs, &rhs),
        naive_formula_fails: !tol.approx_eq(&lhs, &naive),
        lhs,
        rhs,
        naive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    StopsAtO1,
    StopsAtO2,
    StopsAt(usize),
    NoEarlyStop(usize),
}

impl Classification {
    pub fn from_stop(stop_index: Option<usize>, k_checked: usize) -> Classification {
        match stop_index {
            Some(1) => Classification::StopsAtO1,
            Some(2) => Classification::StopsAtO2,
            Some(k) => Classification::StopsAt(k),
            None => Classification::NoEarlyStop(k_checked),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::StopsAtO1 => write!(f, "StopsAtO1"),
            Classification::StopsAtO2 => write!(f, "StopsAtO2"),
            Classification::StopsAt(k) => write!(f, "StopsAtO{k}"),
            Classification::NoEarlyStop(k) => write!(f, "NoEarlyStop({k})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonComplexity {
    pub moments: MomentTable,
    pub coefficients: LanczosCoefficients,
    pub classification: Classification,
}

/// Moments for `spec` under `ip`: closed forms where they apply, otherwise the
/// oracle on the full energy representation of a finite system.
pub fn catalog_moments(spec: &SystemSpec, ip: &InnerProductKind, k: usize) -> Result<MomentTable, ChainError> {
    match (spec.is_finite(), ip) {
        (true, InnerProductKind::Trace) => Ok(moments_theorem1(spec, k)?),
        (false, InnerProductKind::Trace) => Err(ChainError::TraceOnInfinite(spec.label())),
        (false, InnerProductKind::Wightman { beta }) => {
            Ok(moments_theorem2(spec, k, beta, &default_tail_tol(spec.mode()))?)
        }
        (true, InnerProductKind::Wightman { .. }) => {
            let size = spec.size().expect("finite systems have a size");
            let rep = build_energy_rep(spec, size, Frame::natural(spec.mode())).map_err(MomentError::from)?;
            let inner = InnerProduct::for_representation(ip.clone(), &rep).map_err(MomentError::from)?;
            let mut t = moments_oracle(&rep.h, &rep.eta, &inner, k)?;
            t.system = Some(spec.label());
            Ok(t)
        }
    }
}

/// Computes moments, converts them and classifies where the chain stops.
pub fn detect_noncomplexity(spec: &SystemSpec, ip: &InnerProductKind, k: usize) -> Result<NonComplexity, ChainError> {
    let moments = catalog_moments(spec, ip, k)?;
    let coefficients = moments_to_lanczos(&moments)?;
    let classification = Classification::from_stop(coefficients.stop_index, k);
    Ok(NonComplexity {
        moments,
        coefficients,
        classification,
    })
}

#[derive(Serialize)]
pub struct HankelJson {
    pub n: usize,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Serialize)]
pub struct ChainReport {
    pub b_squared: Vec<String>,
    pub stop_index: Option<usize>,
    pub classification: String,
    pub hankel: Option<HankelJson>,
}

impl ChainReport {
    pub fn new(b: &LanczosCoefficients, classification: Classification, hankel: Option<&HankelCheck>) -> ChainReport {
        ChainReport {
            b_squared: b.b_squared.iter().map(|x| x.to_string()).collect(),
            stop_index: b.stop_index,
            classification: classification.to_string(),
            hankel: hankel.map(|h| HankelJson {
                n: h.n,
                lhs: h.lhs.to_string(),
                rhs: h.rhs.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{default_system, parameter_samples, SystemKind};
    use crate::operator_space::{build_position_pair, operator_lanczos};
    use proptest::prelude::*;

    fn ex(n: i64, d: i64) -> Scalar {
        Mode::Exact.ratio(n, d)
    }

    fn table(even: &[Scalar]) -> MomentTable {
        MomentTable::from_even(even, Provenance::ClosedForm)
    }

    #[test]
    fn constant_sequence_stops_at_two() {
        let c = ex(1, 2);
        let b = moments_to_lanczos(&table(&[c.clone(), c.clone(), c.clone()])).unwrap();
        assert_eq!(b.b_squared, vec![ex(1, 2), ex(1, 2)]);
        assert_eq!(b.stop_index, Some(2));
    }

    #[test]
    fn powers_of_four_stop_at_one() {
        let even: Vec<_> = (1..=4).map(|m| ex(4, 1).powi(m)).collect();
        let b = moments_to_lanczos(&table(&even)).unwrap();
        assert_eq!(b.b_squared, vec![ex(4, 1)]);
        assert_eq!(b.stop_index, Some(1));
    }

    #[test]
    fn single_coefficient_moments() {
        let b = LanczosCoefficients::new(vec![ex(3, 1)], Some(1));
        let t = lanczos_to_moments(&b, 4, Mode::Exact).unwrap();
        for m in 1..=4 {
            assert_eq!(t.even(m), &ex(3, 1).powi(m as i32));
            assert!(t.mu(2 * m - 1).is_exact_zero());
        }
        let c = ex(2, 7);
        let b = LanczosCoefficients::new(vec![c.clone(), ex(1, 1) - &c], Some(2));
        let t = lanczos_to_moments(&b, 5, Mode::Exact).unwrap();
        assert!((1..=5).all(|m| t.even(m) == &c));
    }

    #[test]
    fn closed_forms() {
        let c = ex(1, 2);
        let t = table(&[c.clone(), c.clone(), c.clone()]);
        assert_eq!(b123_closed_forms(&t).unwrap(), (ex(1, 2), ex(1, 2), ex(0, 1)));
        let geo: Vec<_> = (1..=3).map(|m| ex(8, 1) * ex(16, 1).powi(m - 1)).collect();
        assert_eq!(b123_closed_forms(&table(&geo)).unwrap(), (ex(8, 1), ex(8, 1), ex(0, 1)));
        let four: Vec<_> = (1..=3).map(|m| ex(4, 1).powi(m)).collect();
        assert_eq!(b123_closed_forms(&table(&four)), Err(ChainError::DegenerateChain));
    }

    #[test]
    fn negative_b_squared_is_an_error() {
        // mu_4 < mu_2^2 is not a moment sequence
        let t = table(&[ex(2, 1), ex(3, 1)]);
        assert!(matches!(
            moments_to_lanczos(&t),
            Err(ChainError::NegativeBSquared { index: 2, .. })
        ));
        let mut bad = table(&[ex(1, 1)]);
        bad.values[0] = ex(2, 1);
        assert!(matches!(moments_to_lanczos(&bad), Err(ChainError::NonUnitMuZero(_))));
    }

    #[test]
    fn hankel_identity() {
        let s = SystemSpec::from_strs(SystemKind::Krawtchouk, Some(5), &[("p", "1/3")], Mode::Exact).unwrap();
        let mu = moments_theorem1(&s, 6).unwrap();
        let b = moments_to_lanczos(&mu).unwrap();
        let h1 = hankel_check(&mu, &b, 1).unwrap();
        assert!(h1.holds && !h1.naive_formula_fails);
        let h2 = hankel_check(&mu, &b, 2).unwrap();
        assert!(h2.holds && h2.naive_formula_fails);
        // independent 3x3 determinant by cofactors
        // det [[1,0,m2],[0,m2,0],[m2,0,m4]] = m2 m4 - m2^3
        let (m2, m4) = (mu.even(1).clone(), mu.even(2).clone());
        let direct = &m2 * &m4 - m2.powi(3);
        assert_eq!(h2.lhs, direct);
        let h3 = hankel_check(&mu, &b, 3).unwrap();
        assert!(h3.lhs.is_exact_zero() && h3.rhs.is_exact_zero());
    }

    #[test]
    fn hankel_scaling() {
        let s = default_system(SystemKind::QRacah, Mode::Exact).unwrap();
        let mu = moments_theorem1(&s, 4).unwrap();
        let b = moments_to_lanczos(&mu).unwrap();
        let lam = ex(2, 1);
        let scaled = mu.scaled(&lam);
        let bs = moments_to_lanczos(&scaled).unwrap();
        for n in 1..=3 {
            let h = hankel_check(&mu, &b, n).unwrap();
            let hs = hankel_check(&scaled, &bs, n).unwrap();
            assert!(h.holds && hs.holds);
            assert_eq!(hs.lhs, &h.lhs * lam.powi((n * (n + 1)) as i32));
        }
    }

    #[test]
    fn chain_matches_operator_lanczos() {
        for kind in SystemKind::FINITE {
            for n in [2, 4] {
                let params = &parameter_samples(kind, Some(n))[1];
                let s = SystemSpec::new(kind, Some(n), params, Mode::Exact).unwrap();
                let rep = build_position_pair(&s, Frame::Gauged).unwrap();
                let ip = InnerProduct::for_representation(InnerProductKind::Trace, &rep).unwrap();
                let kmax = ((n + 1) * (n + 1)) as usize;
                let chain = operator_lanczos(&ip, &rep.h, &rep.eta, kmax, &Mode::Exact.tolerance()).unwrap();
                let mu = moments_oracle(&rep.h, &rep.eta, &ip, chain.len()).unwrap();
                let b = moments_to_lanczos(&mu).unwrap();
                assert_eq!(b.b_squared, chain.b_squared, "{}", s.label());
                assert_eq!(b.stop_index, chain.stop_index(), "{}", s.label());
            }
        }
    }

    #[test]
    fn classifications() {
        let m = Mode::bigreal(40).unwrap();
        let k = default_system(SystemKind::Krawtchouk, Mode::Exact).unwrap();
        let r = detect_noncomplexity(&k, &InnerProductKind::Trace, 6).unwrap();
        assert_eq!(r.classification, Classification::StopsAtO2);
        let qr = default_system(SystemKind::QRacah, Mode::Exact).unwrap();
        let r = detect_noncomplexity(&qr, &InnerProductKind::Trace, 6).unwrap();
        assert_eq!(r.classification, Classification::NoEarlyStop(6));
        let beta = InnerProductKind::Wightman { beta: m.one() };
        let meixner = SystemSpec::from_strs(SystemKind::Meixner, None, &[("b", "1"), ("c", "1/2")], m).unwrap();
        assert_eq!(
            detect_noncomplexity(&meixner, &beta, 6).unwrap().classification,
            Classification::StopsAtO2
        );
        let hermite = default_system(SystemKind::Hermite, m).unwrap();
        assert_eq!(
            detect_noncomplexity(&hermite, &beta, 6).unwrap().classification,
            Classification::StopsAtO1
        );
        assert!(matches!(
            detect_noncomplexity(&hermite, &InnerProductKind::Trace, 6),
            Err(ChainError::TraceOnInfinite(_))
        ));
        assert_eq!(Classification::NoEarlyStop(6).to_string(), "NoEarlyStop(6)");
    }

    #[test]
    fn report_json() {
        let c = ex(1, 2);
        let t = table(&[c.clone(), c.clone(), c.clone()]);
        let b = moments_to_lanczos(&t).unwrap();
        let h = hankel_check(&t, &b, 2).unwrap();
        let j = serde_json::to_value(ChainReport::new(&b, Classification::StopsAtO2, Some(&h))).unwrap();
        assert_eq!(j["b_squared"], serde_json::json!(["1/2", "1/2"]));
        assert_eq!(j["stop_index"], 2);
        assert_eq!(j["classification"], "StopsAtO2");
        assert_eq!(j["hankel"]["n"], 2);
    }

    fn rational_chain() -> impl Strategy<Value = Vec<Scalar>> {
        proptest::collection::vec((1i64..=40, 1i64..=20), 6)
            .prop_map(|v| v.into_iter().map(|(n, d)| ex(n.min(2 * d), d)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn round_trip(b2 in rational_chain()) {
            let b = LanczosCoefficients::new(b2.clone(), None);
            let mu = lanczos_to_moments(&b, 6, Mode::Exact).unwrap();
            let back = moments_to_lanczos(&mu).unwrap();
            prop_assert_eq!(back.b_squared, b2);
            prop_assert_eq!(lanczos_to_moments(&b, 6, Mode::Exact).unwrap().values, mu.values);
        }

        #[test]
        fn closed_forms_agree_with_recursion(b2 in rational_chain()) {
            let mu = lanczos_to_moments(&LanczosCoefficients::new(b2.clone(), None), 3, Mode::Exact).unwrap();
            let (x, y, z) = b123_closed_forms(&mu).unwrap();
            prop_assert_eq!(vec![x, y, z], b2[..3].to_vec());
        }

        #[test]
        fn scaling_scales_b_squared(b2 in rational_chain(), num in 1i64..5, den in 1i64..5) {
            let lam = ex(num, den);
            let mu = lanczos_to_moments(&LanczosCoefficients::new(b2.clone(), None), 6, Mode::Exact).unwrap();
            let scaled = moments_to_lanczos(&mu.scaled(&lam)).unwrap();
            let want: Vec<_> = b2.iter().map(|x| x * lam.square()).collect();
            prop_assert_eq!(scaled.b_squared, want);
        }
    }
}
