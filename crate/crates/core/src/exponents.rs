//! Lebesgue exponents and the admissible-exponent regions, in exact rational arithmetic.
//!
//! Every condition is phrased in terms of reciprocals `1/p`, which live in `[0, 1]`
//! with `1/inf = 0`. Region boundaries are sometimes included and sometimes not,
//! so nothing here touches floating point.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LapError, Result};

/// A Lebesgue exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LebesgueExponent {
    Finite(BigRational),
    Infinite,
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl LebesgueExponent {
    pub fn new(value: BigRational) -> Result<Self> {
        if value < BigRational::one() {
            return Err(LapError::Domain(format!("exponent {value} is below 1")));
        }
        Ok(Self::Finite(value))
    }

    pub fn integer(value: i64) -> Self {
        Self::new(rat(value, 1)).expect("integer exponent must be >= 1")
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(LapError::Domain("zero denominator".into()));
        }
        Self::new(rat(num, den))
    }

    /// Exponent with the given reciprocal; `0` means infinity.
    pub fn from_reciprocal(r: BigRational) -> Result<Self> {
        if r.is_negative() || r > BigRational::one() {
            return Err(LapError::Domain(format!("reciprocal {r} outside [0, 1]")));
        }
        if r.is_zero() {
            Ok(Self::Infinite)
        } else {
            Ok(Self::Finite(r.recip()))
        }
    }

    /// Accepts `"a/b"`, `"a"`, or `"inf"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "inf" | "infinity" | "Inf" | "\u{221e}") {
            return Ok(Self::Infinite);
        }
        let parse_int = |t: &str| -> Result<BigInt> {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| LapError::Domain(format!("cannot parse exponent {s:?}")))
        };
        let value = match s.split_once('/') {
            Some((a, b)) => {
                let den = parse_int(b)?;
                if den.is_zero() {
                    return Err(LapError::Domain(format!("zero denominator in {s:?}")));
                }
                BigRational::new(parse_int(a)?, den)
            }
            None => BigRational::from_integer(parse_int(s)?),
        };
        Self::new(value)
    }

    pub fn reciprocal(&self) -> BigRational {
        match self {
            Self::Finite(p) => p.recip(),
            Self::Infinite => BigRational::zero(),
        }
    }

    /// `None` for infinity.
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            Self::Finite(p) => p.to_f64(),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }
}

impl FromStr for LebesgueExponent {
    type Err = LapError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for LebesgueExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

/// The exponents named in the Maxwell and Helmholtz-system results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentTuple {
    pub n: u32,
    pub p: LebesgueExponent,
    pub p_tilde: Option<LebesgueExponent>,
    pub q: LebesgueExponent,
    pub q1: Option<LebesgueExponent>,
    pub q2: Option<LebesgueExponent>,
    pub kappa: Option<LebesgueExponent>,
    pub kappa_tilde: Option<LebesgueExponent>,
}

impl ExponentTuple {
    pub fn maxwell(p: LebesgueExponent, p_tilde: LebesgueExponent, q: LebesgueExponent) -> Self {
        Self {
            n: 3,
            p,
            p_tilde: Some(p_tilde),
            q,
            q1: None,
            q2: None,
            kappa: None,
            kappa_tilde: None,
        }
    }

    /// Checks the `kappa <= kappa_tilde` invariant when both are present.
    pub fn validate(&self) -> Result<()> {
        if let (Some(k), Some(kt)) = (&self.kappa, &self.kappa_tilde) {
            if k.reciprocal() < kt.reciprocal() {
                return Err(LapError::Domain(format!("kappa = {k} exceeds kappa_tilde = {kt}")));
            }
        }
        Ok(())
    }
}

/// One failed inequality, with the values that made it fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub inequality: &'static str,
    pub detail: ViolationDetail,
}

/// The evaluated sides of a failed inequality, or the excluded point that was hit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationDetail {
    Comparison {
        lhs: BigRational,
        op: &'static str,
        rhs: BigRational,
    },
    Excluded(BigRational, BigRational),
}

impl fmt::Display for ViolationDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Comparison { lhs, op, rhs } => write!(f, "{lhs} {op} {rhs} is false"),
            Self::Excluded(a, b) => write!(f, "point = ({a}, {b})"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.inequality, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub violations: Vec<Violation>,
}

impl CheckResult {
    pub fn admissible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts a failed check into an admissibility error.
    pub fn require(self, system: &'static str) -> Result<()> {
        if self.admissible() {
            Ok(())
        } else {
            Err(LapError::Admissibility {
                system,
                violations: self.violations,
            })
        }
    }
}

#[derive(Clone, Copy)]
enum Rel {
    Lt,
    Le,
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn require(&mut self, label: &'static str, lhs: &BigRational, rel: Rel, rhs: &BigRational) {
        let (ok, op) = match rel {
            Rel::Lt => (lhs < rhs, "<"),
            Rel::Le => (lhs <= rhs, "<="),
        };
        if !ok {
            self.violations.push(Violation {
                inequality: label,
                detail: ViolationDetail::Comparison {
                    lhs: lhs.clone(),
                    op,
                    rhs: rhs.clone(),
                },
            });
        }
    }

    fn exclude(&mut self, label: &'static str, point: (&BigRational, &BigRational), corner: (&BigRational, &BigRational)) {
        if point.0 == corner.0 && point.1 == corner.1 {
            self.violations.push(Violation {
                inequality: label,
                detail: ViolationDetail::Excluded(point.0.clone(), point.1.clone()),
            });
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            violations: self.violations,
        }
    }
}

fn require_dimension(n: u32) -> Result<()> {
    if n < 3 {
        return Err(LapError::Domain(format!("dimension n = {n} below 3")));
    }
    Ok(())
}

fn gutierrez_into(c: &mut Checker, rp: &BigRational, rq: &BigRational, n: i64) {
    let zero = BigRational::zero();
    let one = BigRational::one();
    c.require("1/p > (n+1)/2n", &rat(n + 1, 2 * n), Rel::Lt, rp);
    c.require("1/p <= 1", rp, Rel::Le, &one);
    c.require("1/q >= 0", &zero, Rel::Le, rq);
    c.require("1/q < (n-1)/2n", rq, Rel::Lt, &rat(n - 1, 2 * n));
    let diff = rp - rq;
    c.require("1/p - 1/q >= 2/(n+1)", &rat(2, n + 1), Rel::Le, &diff);
    c.require("1/p - 1/q <= 2/n", &diff, Rel::Le, &rat(2, n));
}

/// Admissible pairs for the uniform free-resolvent bound in dimension `n >= 3`.
pub fn check_gutierrez(p: &LebesgueExponent, q: &LebesgueExponent, n: u32) -> Result<CheckResult> {
    require_dimension(n)?;
    let mut c = Checker::default();
    gutierrez_into(&mut c, &p.reciprocal(), &q.reciprocal(), n as i64);
    Ok(c.finish())
}

/// Exponent conditions of the Maxwell limiting absorption principle (`n = 3`).
pub fn check_maxwell_conditions(
    p: &LebesgueExponent,
    p_tilde: &LebesgueExponent,
    q: &LebesgueExponent,
) -> CheckResult {
    let (rp, rpt, rq) = (p.reciprocal(), p_tilde.reciprocal(), q.reciprocal());
    let mut c = Checker::default();
    c.require("1/p > 2/3", &rat(2, 3), Rel::Lt, &rp);
    c.require("1/p < 1", &rp, Rel::Lt, &BigRational::one());
    c.require("1/q > 1/6", &rat(1, 6), Rel::Lt, &rq);
    c.require("1/q < 1/3", &rq, Rel::Lt, &rat(1, 3));
    let diff = &rp - &rq;
    c.require("1/p - 1/q >= 1/2", &rat(1, 2), Rel::Le, &diff);
    c.require("1/p - 1/q <= 2/3", &diff, Rel::Le, &rat(2, 3));
    let diff_t = &rpt - &rq;
    c.require("1/ptilde - 1/q >= 0", &BigRational::zero(), Rel::Le, &diff_t);
    c.require("1/ptilde - 1/q <= 1/3", &diff_t, Rel::Le, &rat(1, 3));
    c.finish()
}

/// Conditions under which `K(zeta) = -R0(zeta) V` maps `L^q1` compactly into `L^q2`.
pub fn check_compactness_conditions(
    q1: &LebesgueExponent,
    q2: &LebesgueExponent,
    kappa: &LebesgueExponent,
    kappa_tilde: &LebesgueExponent,
    n: u32,
) -> Result<CheckResult> {
    require_dimension(n)?;
    let (rk, rkt) = (kappa.reciprocal(), kappa_tilde.reciprocal());
    if kappa_tilde.is_infinite() || rk < rkt {
        return Err(LapError::Domain(format!(
            "need 1 <= kappa <= kappa_tilde < inf, got kappa = {kappa}, kappa_tilde = {kappa_tilde}"
        )));
    }
    let n = n as i64;
    let (r1, r2) = (q1.reciprocal(), q2.reciprocal());
    let one = BigRational::one();
    let mut c = Checker::default();
    c.require("1/q1 > (n+1)/2n - 1/kappa_tilde", &(rat(n + 1, 2 * n) - &rkt), Rel::Lt, &r1);
    c.require("1/q1 <= 1 - 1/kappa", &r1, Rel::Le, &(&one - &rk));
    c.require("1/q2 >= 0", &BigRational::zero(), Rel::Le, &r2);
    c.require("1/q2 < (n-1)/2n", &r2, Rel::Lt, &rat(n - 1, 2 * n));
    let diff = &r1 - &r2;
    c.require("1/q1 - 1/q2 >= 2/(n+1) - 1/kappa_tilde", &(rat(2, n + 1) - &rkt), Rel::Le, &diff);
    c.require("1/q1 - 1/q2 <= 2/n - 1/kappa", &diff, Rel::Le, &(rat(2, n) - &rk));
    Ok(c.finish())
}

/// The `q1 = q2 = q` specialization for potentials in `L^kappa + L^kappa_tilde`
/// with `n/2 <= kappa_tilde <= (n+1)/2`.
pub fn check_simplified_compactness(
    q: &LebesgueExponent,
    kappa_tilde: &LebesgueExponent,
    n: u32,
) -> Result<CheckResult> {
    require_dimension(n)?;
    let ni = n as i64;
    let rkt = kappa_tilde.reciprocal();
    if rkt > rat(2, ni) || rkt < rat(2, ni + 1) {
        return Err(LapError::Domain(format!(
            "need n/2 <= kappa_tilde <= (n+1)/2, got {kappa_tilde}"
        )));
    }
    let rq = q.reciprocal();
    let mut c = Checker::default();
    c.require("1/q > (n+1)/2n - 1/kappa_tilde", &(rat(ni + 1, 2 * ni) - &rkt), Rel::Lt, &rq);
    c.require("1/q < (n-1)/2n", &rq, Rel::Lt, &rat(ni - 1, 2 * ni));
    Ok(c.finish())
}

/// Exponent conditions for the uniform bound on `R0(zeta) d_j`, including the
/// two excluded corner points of the Bessel-potential range.
pub fn check_derivative_conditions(
    p: &LebesgueExponent,
    p_tilde: &LebesgueExponent,
    q: &LebesgueExponent,
    n: u32,
) -> Result<CheckResult> {
    require_dimension(n)?;
    let ni = n as i64;
    let (rp, rpt, rq) = (p.reciprocal(), p_tilde.reciprocal(), q.reciprocal());
    let mut c = Checker::default();
    gutierrez_into(&mut c, &rp, &rq, ni);
    let diff_t = &rpt - &rq;
    c.require("1/ptilde - 1/q >= 0", &BigRational::zero(), Rel::Le, &diff_t);
    c.require("1/ptilde - 1/q <= 1/n", &diff_t, Rel::Le, &rat(1, ni));
    c.exclude(
        "(1/ptilde, 1/q) != (1, 1 - 1/n)",
        (&rpt, &rq),
        (&BigRational::one(), &rat(ni - 1, ni)),
    );
    c.exclude("(1/ptilde, 1/q) != (1/n, 0)", (&rpt, &rq), (&rat(1, ni), &BigRational::zero()));
    Ok(c.finish())
}

/// Power of `|zeta|` in the free-resolvent bound: `(n/2)(1/p - 1/q - 2/n)`.
pub fn scaling_exponent(p: &LebesgueExponent, q: &LebesgueExponent, n: u32) -> Result<BigRational> {
    let (rp, rq) = (p.reciprocal(), q.reciprocal());
    if rp < rq {
        return Err(LapError::Domain(format!("need p <= q, got p = {p}, q = {q}")));
    }
    let ni = n as i64;
    Ok(rat(ni, 2) * (rp - rq - rat(2, ni)))
}

/// Powers of `|zeta|` in the bound on `R0(zeta) d_j`:
/// `(n/2)(1/p - 1/q - 1/n)` and `(n/2)(1/ptilde - 1/q - 1/n)`.
pub fn derivative_scaling_exponents(
    p: &LebesgueExponent,
    p_tilde: &LebesgueExponent,
    q: &LebesgueExponent,
    n: u32,
) -> (BigRational, BigRational) {
    let ni = n as i64;
    let rq = q.reciprocal();
    let half_n = rat(ni, 2);
    let inv_n = rat(1, ni);
    (
        &half_n * (p.reciprocal() - &rq - &inv_n),
        &half_n * (p_tilde.reciprocal() - &rq - &inv_n),
    )
}

/// Powers of `|zeta|` multiplying `||V1||_kappa` and `||V2||_kappa_tilde` in the
/// bound on `||K(zeta)||_{q1 -> q2}`.
pub fn k_norm_bound_exponents(
    q1: &LebesgueExponent,
    q2: &LebesgueExponent,
    kappa: &LebesgueExponent,
    kappa_tilde: &LebesgueExponent,
    n: u32,
) -> Result<(BigRational, BigRational)> {
    check_compactness_conditions(q1, q2, kappa, kappa_tilde, n)?.require("compactness")?;
    let ni = n as i64;
    let base = q1.reciprocal() - q2.reciprocal() - rat(2, ni);
    let half_n = rat(ni, 2);
    Ok((
        &half_n * (&base + kappa.reciprocal()),
        &half_n * (&base + kappa_tilde.reciprocal()),
    ))
}

/// Exponents `q_0, ..., q_jmax` of the integrability bootstrap.
///
/// `1/q_{j+1} = min{ (1/q_j + (n-1)/2n) / 2, 1/q_j - 2/(n+1) + s }` where
/// `s = 1/kappa_tilde` when `kappa_tilde < (n+1)/2` and `s = 2/n` in the limiting
/// case `kappa_tilde = (n+1)/2` (potential split with a small critical part).
pub fn bootstrap_sequence(
    q0: &LebesgueExponent,
    kappa_tilde: &LebesgueExponent,
    n: u32,
    j_max: usize,
) -> Result<Vec<LebesgueExponent>> {
    require_dimension(n)?;
    let ni = n as i64;
    let limit = rat(ni - 1, 2 * ni);
    let r0 = q0.reciprocal();
    if r0 >= limit {
        return Err(LapError::Domain(format!("need q0 > 2n/(n-1), got q0 = {q0}")));
    }
    let rkt = kappa_tilde.reciprocal();
    if rkt > rat(2, ni) || rkt < rat(2, ni + 1) {
        return Err(LapError::Domain(format!(
            "need n/2 <= kappa_tilde <= (n+1)/2, got {kappa_tilde}"
        )));
    }
    let gain = if rkt == rat(2, ni + 1) { rat(2, ni) } else { rkt };
    let step = gain - rat(2, ni + 1);
    let half = rat(1, 2);
    let mut out = vec![q0.clone()];
    let mut r = r0;
    for _ in 0..j_max {
        let midpoint = (&r + &limit) * &half;
        let jump = &r + &step;
        r = if midpoint < jump { midpoint } else { jump };
        out.push(LebesgueExponent::from_reciprocal(r.clone())?);
    }
    Ok(out)
}

/// A choice of `q1 <= q <= q2` for the two-sided potential hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxwellBracket {
    pub q1: LebesgueExponent,
    pub q2: LebesgueExponent,
}

/// Scans reciprocals `k / scan_denominator` for the widest bracket `q1 <= q <= q2`
/// with `(p, ptilde, q1)` and `(p, ptilde, q2)` admissible.
///
/// Each side falls back to `q` itself when no scanned value is strictly on that
/// side. `None` means the only bracket is the degenerate `q1 = q2 = q`.
pub fn find_maxwell_bracket(
    p: &LebesgueExponent,
    p_tilde: &LebesgueExponent,
    q: &LebesgueExponent,
    scan_denominator: u32,
) -> Result<Option<MaxwellBracket>> {
    check_maxwell_conditions(p, p_tilde, q).require("maxwell")?;
    if scan_denominator == 0 {
        return Err(LapError::Domain("scan denominator must be positive".into()));
    }
    let rq = q.reciprocal();
    let d = scan_denominator as i64;
    let admissible: Vec<BigRational> = (0..=d)
        .map(|k| rat(k, d))
        .filter(|r| {
            let candidate = LebesgueExponent::from_reciprocal(r.clone()).expect("k/d in [0,1]");
            check_maxwell_conditions(p, p_tilde, &candidate).admissible()
        })
        .collect();
    let larger = admissible.iter().filter(|r| **r > rq).max().cloned();
    let smaller = admissible.iter().filter(|r| **r < rq).min().cloned();
    if larger.is_none() && smaller.is_none() {
        return Ok(None);
    }
    let to_exp = |r: Option<BigRational>| -> Result<LebesgueExponent> {
        match r {
            Some(r) => LebesgueExponent::from_reciprocal(r),
            None => Ok(q.clone()),
        }
    };
    Ok(Some(MaxwellBracket {
        q1: to_exp(larger)?,
        q2: to_exp(smaller)?,
    }))
}
