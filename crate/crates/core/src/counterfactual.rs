//! The measured/unmeasured correlation measure.
//!
//! A local observable `a` is measured, a complementary observable `a′` is not.
//! When a remote outcome along `θ` exists, it constrains how often the
//! realized `a` outcomes agree with the unrealized `a′` outcomes. Two routes
//! turn that into a correlation:
//!
//! - [`rho_min_quantum`] assumes nothing beyond a fixed remote record and
//!   gives the smallest correlation compatible with the two match rates.
//! - [`rho_conditional_independence`] assumes the two local outcomes are
//!   independent given the remote outcome, which yields a product rule.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::quantum_model::{correlation_e, dot, match_probability, Direction};

/// Absolute tolerance for orthogonality and for "the correlation changed".
pub const ANALYTIC_TOLERANCE: f64 = 1e-12;

/// Default resolution of the θ scan in [`max_info_direction`], in degrees.
pub const DEFAULT_SCAN_STEP_DEGREES: f64 = 0.01;

/// A non-empty sequence of ±1 outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct OutcomeSequence(Vec<i8>);

impl OutcomeSequence {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| v.abs() != 1) {
            return Err(Error::InvalidOutcome { index, value });
        }
        Ok(Self(values))
    }

    /// Maps bit 0 to +1 and bit 1 to −1, so `A ⊕ B = 0` iff the product is +1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect())
    }

    pub(crate) fn from_vec_unchecked(values: Vec<i8>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.abs() == 1));
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().map(|&v| i64::from(v)).sum::<i64>() as f64 / self.0.len() as f64
    }
}

impl TryFrom<Vec<i8>> for OutcomeSequence {
    type Error = Error;

    fn try_from(values: Vec<i8>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<OutcomeSequence> for Vec<i8> {
    fn from(s: OutcomeSequence) -> Self {
        s.0
    }
}

/// Integer sufficient statistics for the Pearson coefficient of two ±1
/// sequences. Merging is exact, so partial counts can be combined in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairCounts {
    pub n: u64,
    pub sum_m: i64,
    pub sum_u: i64,
    pub sum_mu: i64,
}

impl PairCounts {
    pub fn push(&mut self, m: i8, u: i8) {
        self.n += 1;
        self.sum_m += i64::from(m);
        self.sum_u += i64::from(u);
        self.sum_mu += i64::from(m * u);
    }

    pub fn from_pairs(m: &[i8], u: &[i8]) -> Self {
        let mut counts = Self::default();
        for (&x, &y) in m.iter().zip(u) {
            counts.push(x, y);
        }
        counts
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            n: self.n + other.n,
            sum_m: self.sum_m + other.sum_m,
            sum_u: self.sum_u + other.sum_u,
            sum_mu: self.sum_mu + other.sum_mu,
        }
    }

    /// Pearson coefficient with sample means and deviations.
    pub fn pearson(&self) -> Result<f64> {
        let n = i128::from(self.n);
        let (sm, su, smu) = (
            i128::from(self.sum_m),
            i128::from(self.sum_u),
            i128::from(self.sum_mu),
        );
        // n²·var for ±1 data, since every square is 1
        let var_m = n * n - sm * sm;
        let var_u = n * n - su * su;
        if var_m == 0 || var_u == 0 {
            return Err(Error::DegenerateSequence);
        }
        let cov = n * smu - sm * su;
        let denom = if var_m == var_u {
            var_m as f64
        } else {
            (var_m as f64).sqrt() * (var_u as f64).sqrt()
        };
        Ok((cov as f64 / denom).clamp(-1.0, 1.0))
    }
}

/// The full Pearson coefficient of two equal-length ±1 sequences.
pub fn pearson_pm1(m: &OutcomeSequence, u: &OutcomeSequence) -> Result<f64> {
    if m.len() != u.len() {
        return Err(Error::LengthMismatch {
            left: m.len(),
            right: u.len(),
        });
    }
    PairCounts::from_pairs(m.values(), u.values()).pearson()
}

/// Smallest possible rate at which two events co-occur, given that they
/// match a common reference with rates `p1` and `p2`.
pub fn overlap_lower_bound(p1: f64, p2: f64) -> Result<f64> {
    check_unit_interval("p1", p1)?;
    check_unit_interval("p2", p2)?;
    Ok((p1 + p2 - 1.0).max(0.0))
}

/// Minimum measured/unmeasured correlation between `a` and `a_prime` given
/// a fixed remote record along `theta`.
pub fn rho_min_quantum(theta: Direction, a: Direction, a_prime: Direction) -> f64 {
    let overlap = overlap_lower_bound(match_probability(theta, a), match_probability(theta, a_prime))
        .expect("match probabilities lie in [0, 1]");
    2.0 * overlap - 1.0
}

/// Measured/unmeasured correlation under conditional independence given the
/// remote outcome: `E(θ,a)·E(θ,a′)`.
pub fn rho_conditional_independence(theta: Direction, a: Direction, a_prime: Direction) -> f64 {
    correlation_e(theta, a) * correlation_e(theta, a_prime)
}

/// The product rule for a remote direction `c` coplanar with orthogonal `a`
/// and `a′`, written in terms of `a·c` alone.
pub fn rho_ci_general_direction(c_dot_a: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&c_dot_a) {
        return Err(Error::domain("c_dot_a", c_dot_a, "[-1, 1]"));
    }
    Ok(c_dot_a * (1.0 - c_dot_a * c_dot_a).sqrt())
}

/// Shannon binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit_interval("x", x)?;
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Bits learned about the unmeasured outcome from the measured one, when the
/// two agree with probability `p`.
pub fn info_leakage(p: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(p)?)
}

/// Leakage for remote direction `theta` under conditional independence.
pub fn info_bits_ci(theta: Direction, a: Direction, a_prime: Direction) -> f64 {
    let p = (1.0 + rho_conditional_independence(theta, a, a_prime)) / 2.0;
    info_leakage(p.clamp(0.0, 1.0)).expect("clamped into [0, 1]")
}

fn ensure_orthogonal(a: Direction, a_prime: Direction) -> Result<()> {
    let d = dot(a, a_prime);
    if d.abs() > ANALYTIC_TOLERANCE {
        Err(Error::NotOrthogonal(d))
    } else {
        Ok(())
    }
}

/// Result of maximizing leakage over remote directions between `a` and `a′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoOptimum {
    /// The bisector of `a` and `a′`.
    pub theta: Direction,
    /// Leakage at the bisector.
    pub bits: f64,
    /// `1 + bits`: the measured bit plus the leaked fraction.
    pub total_bits: f64,
    /// Best grid point of the scan, as an offset from `a` towards `a′`.
    pub scan_offset_degrees: f64,
    pub scan_theta: Direction,
    pub scan_bits: f64,
}

/// Scans remote directions from `a` to `a′` in steps of `step_degrees` and
/// confirms the optimum analytically at the bisector.
pub fn max_info_direction_with_step(
    a: Direction,
    a_prime: Direction,
    step_degrees: f64,
) -> Result<InfoOptimum> {
    ensure_orthogonal(a, a_prime)?;
    if !(step_degrees.is_finite() && step_degrees > 0.0 && step_degrees <= 90.0) {
        return Err(Error::domain("step_degrees", step_degrees, "(0, 90]"));
    }
    // rotate from a towards a′, whichever side a′ is on
    let sense = if (a_prime.radians() - a.radians()).sin() >= 0.0 { 1.0 } else { -1.0 };
    let at_offset = |deg: f64| a.rotated(sense * deg.to_radians()).expect("finite angle");

    let points = (90.0 / step_degrees + 1e-9).floor() as u64;
    let (scan_offset_degrees, scan_bits) = (0..=points)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 * step_degrees).min(90.0);
            (t, info_bits_ci(at_offset(t), a, a_prime))
        })
        .reduce_with(|x, y| match x.1.partial_cmp(&y.1) {
            Some(Ordering::Greater) => x,
            Some(Ordering::Less) => y,
            _ => {
                if x.0 <= y.0 {
                    x
                } else {
                    y
                }
            }
        })
        .expect("scan grid is non-empty");

    let theta = a.rotated(sense * FRAC_PI_2 / 2.0)?;
    let bits = info_bits_ci(theta, a, a_prime);
    Ok(InfoOptimum {
        theta,
        bits,
        total_bits: 1.0 + bits,
        scan_offset_degrees,
        scan_theta: at_offset(scan_offset_degrees),
        scan_bits,
    })
}

/// [`max_info_direction_with_step`] at the default 0.01° resolution.
pub fn max_info_direction(a: Direction, a_prime: Direction) -> Result<InfoOptimum> {
    max_info_direction_with_step(a, a_prime, DEFAULT_SCAN_STEP_DEGREES)
}

/// Measured/unmeasured correlation for one remote option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualReport {
    /// `None` means no remote measurement is made.
    pub remote_setting: Option<Direction>,
    pub rho_min: f64,
    pub rho_ci: f64,
    pub info_bits: f64,
    pub total_bits: f64,
    /// This option forces a correlation different from the no-measurement
    /// value of zero.
    pub nonlocal: bool,
}

impl CounterfactualReport {
    pub fn evaluate(
        a: Direction,
        a_prime: Direction,
        remote_setting: Option<Direction>,
        assume_ci: bool,
    ) -> Self {
        let (rho_min, rho_ci) = match remote_setting {
            None => (0.0, 0.0),
            Some(theta) => (
                rho_min_quantum(theta, a, a_prime),
                rho_conditional_independence(theta, a, a_prime),
            ),
        };
        let info_bits = match remote_setting {
            None => 0.0,
            Some(theta) => info_bits_ci(theta, a, a_prime),
        };
        Self {
            remote_setting,
            rho_min,
            rho_ci,
            info_bits,
            total_bits: 1.0 + info_bits,
            nonlocal: rho_min > 0.0 || (assume_ci && rho_ci.abs() > ANALYTIC_TOLERANCE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub reports: Vec<CounterfactualReport>,
    /// Some option forces `ρ_min > 0` with no extra assumption.
    pub assumption_free: bool,
    /// The conditional-independence correlation varies across options.
    /// Always false when the assumption is not requested.
    pub ci_based: bool,
    pub nonlocal: bool,
}

/// Decides whether the local measured/unmeasured correlation necessarily
/// depends on the remote choice. `remote_options` must contain `None`.
pub fn nonlocality_verdict(
    a: Direction,
    a_prime: Direction,
    remote_options: &[Option<Direction>],
    assume_ci: bool,
) -> Result<Verdict> {
    ensure_orthogonal(a, a_prime)?;
    if !remote_options.contains(&None) {
        return Err(Error::MissingNoMeasurementOption);
    }
    let reports: Vec<_> = remote_options
        .iter()
        .map(|&opt| CounterfactualReport::evaluate(a, a_prime, opt, assume_ci))
        .collect();

    let assumption_free = reports.iter().any(|r| r.rho_min > 0.0);
    let (lo, hi) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.rho_ci), hi.max(r.rho_ci))
        });
    let ci_based = assume_ci && hi - lo > ANALYTIC_TOLERANCE;
    Ok(Verdict {
        reports,
        assumption_free,
        ci_based,
        nonlocal: assumption_free || ci_based,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn deg(d: f64) -> Direction {
        Direction::from_degrees(d).unwrap()
    }

    fn seq(v: &[i8]) -> OutcomeSequence {
        OutcomeSequence::new(v.to_vec()).unwrap()
    }

    /// Textbook two-pass Pearson on floats, independent of `PairCounts`.
    fn pearson_oracle(m: &[i8], u: &[i8]) -> f64 {
        let n = m.len() as f64;
        let mm = m.iter().map(|&x| x as f64).sum::<f64>() / n;
        let mu = u.iter().map(|&x| x as f64).sum::<f64>() / n;
        let cov: f64 = m.iter().zip(u).map(|(&x, &y)| (x as f64 - mm) * (y as f64 - mu)).sum();
        let vm: f64 = m.iter().map(|&x| (x as f64 - mm).powi(2)).sum();
        let vu: f64 = u.iter().map(|&y| (y as f64 - mu).powi(2)).sum();
        cov / (vm.sqrt() * vu.sqrt())
    }

    #[test]
    fn sequence_validation() {
        assert_eq!(OutcomeSequence::new(vec![]), Err(Error::EmptySequence));
        assert_eq!(
            OutcomeSequence::new(vec![1, 0, -1]),
            Err(Error::InvalidOutcome { index: 1, value: 0 })
        );
        assert_eq!(OutcomeSequence::from_bits(&[0, 1, 1]).unwrap().values(), &[1, -1, -1]);
    }

    #[test]
    fn pearson_examples() {
        let m = seq(&[1, -1, 1, -1]);
        assert_eq!(pearson_pm1(&m, &m).unwrap(), 1.0);
        assert_eq!(pearson_pm1(&m, &seq(&[-1, 1, -1, 1])).unwrap(), -1.0);
        let a = [1, 1, -1, -1];
        let b = [1, -1, 1, -1];
        assert_eq!(pearson_oracle(&a, &b), 0.0);
        assert_eq!(pearson_pm1(&seq(&a), &seq(&b)).unwrap(), 0.0);
    }

    #[test]
    fn pearson_uses_sample_moments() {
        let m = [1, 1, 1, -1, 1, -1, 1];
        let u = [1, -1, 1, -1, 1, 1, 1];
        let expected = pearson_oracle(&m, &u);
        assert!((pearson_pm1(&seq(&m), &seq(&u)).unwrap() - expected).abs() < 1e-15);
        // the naive mean of M·U would be 3/7 here
        assert!((expected - 3.0 / 7.0).abs() > 0.1);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson_pm1(&seq(&[1, -1]), &seq(&[1, -1, 1])),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        );
        assert_eq!(
            pearson_pm1(&seq(&[1, 1, 1]), &seq(&[1, -1, 1])),
            Err(Error::DegenerateSequence)
        );
        assert_eq!(pearson_pm1(&seq(&[1]), &seq(&[-1])), Err(Error::DegenerateSequence));
    }

    #[test]
    fn overlap_examples() {
        let p = 0.8535533905932737;
        assert!((overlap_lower_bound(p, p).unwrap() - 0.7071067811865475).abs() < 1e-15);
        assert_eq!(overlap_lower_bound(0.5, 0.5).unwrap(), 0.0);
        assert_eq!(overlap_lower_bound(1.0, 1.0).unwrap(), 1.0);
        assert!(matches!(overlap_lower_bound(1.1, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(overlap_lower_bound(0.5, -0.1), Err(Error::Domain { .. })));
        assert!(overlap_lower_bound(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn rho_min_examples() {
        let (a, ap) = (deg(0.0), deg(90.0));
        assert!((rho_min_quantum(deg(45.0), a, ap) - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(rho_min_quantum(deg(0.0), a, ap).abs() < 1e-15);
        // θ opposite to a: p1 = 0, p2 = ½, bound is vacuous
        assert_eq!(rho_min_quantum(deg(180.0), a, ap), -1.0);
    }

    #[test]
    fn rho_ci_examples() {
        let (a, ap) = (deg(0.0), deg(90.0));
        assert!((rho_conditional_independence(deg(45.0), a, ap) - 0.5).abs() < 1e-15);
        let expected = 55f64.to_radians().cos() * 35f64.to_radians().cos();
        let v = rho_conditional_independence(deg(55.0), a, ap);
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.46985).abs() < 1e-5);
        assert!(rho_conditional_independence(deg(0.0), a, ap).abs() < 1e-15);
    }

    #[test]
    fn general_direction_examples() {
        assert!((rho_ci_general_direction(std::f64::consts::FRAC_1_SQRT_2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(rho_ci_general_direction(0.0).unwrap(), 0.0);
        assert_eq!(rho_ci_general_direction(1.0).unwrap(), 0.0);
        assert!(rho_ci_general_direction(1.0 + 1e-9).is_err());
    }

    #[test]
    fn general_direction_peak_grid() {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=20_000 {
            let x = -1.0 + i as f64 * 1e-4;
            let v = rho_ci_general_direction(x.min(1.0)).unwrap();
            assert!(v <= 0.5 + 1e-12);
            if v > best.0 {
                best = (v, x);
            }
        }
        assert!((best.1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-4);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let ln_oracle = -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln()) / 2f64.ln();
        assert!((binary_entropy(0.75).unwrap() - ln_oracle).abs() < 1e-15);
        assert!((binary_entropy(0.75).unwrap() - 0.8112781244591328).abs() < 1e-15);
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn leakage_examples() {
        assert!((info_leakage(0.75).unwrap() - 0.1887218755408672).abs() < 1e-15);
        assert_eq!(info_leakage(0.5).unwrap(), 0.0);
        assert_eq!(info_leakage(1.0).unwrap(), 1.0);
        assert!(info_leakage(2.0).is_err());
    }

    #[test]
    fn max_info_examples() {
        let opt = max_info_direction(deg(0.0), deg(90.0)).unwrap();
        assert!((opt.theta.degrees() - 45.0).abs() < 1e-12);
        assert!((opt.bits - 0.1887218755408672).abs() < 1e-12);
        assert!((opt.total_bits - 1.1887218755408672).abs() < 1e-12);
        assert!((opt.scan_offset_degrees - 45.0).abs() <= 0.01);
        assert!(opt.scan_bits <= opt.bits + 1e-12);

        let c30 = 30f64.to_radians().cos();
        let c60 = 60f64.to_radians().cos();
        let at30 = info_leakage((1.0 + c30 * c60) / 2.0).unwrap();
        assert!(at30 < 0.18872);
        assert!((info_bits_ci(deg(30.0), deg(0.0), deg(90.0)) - at30).abs() < 1e-15);
    }

    #[test]
    fn max_info_other_orientation() {
        // a′ clockwise from a: the optimum is still their bisector
        let opt = max_info_direction_with_step(deg(100.0), deg(10.0), 0.5).unwrap();
        assert!((opt.theta.degrees() - 55.0).abs() < 1e-9);
        assert!((opt.scan_theta.degrees() - 55.0).abs() <= 0.5);
    }

    #[test]
    fn max_info_rejects_non_orthogonal() {
        assert!(matches!(
            max_info_direction(deg(0.0), deg(80.0)),
            Err(Error::NotOrthogonal(_))
        ));
        assert!(max_info_direction_with_step(deg(0.0), deg(90.0), 0.0).is_err());
    }

    #[test]
    fn verdict_examples() {
        let (a, ap) = (deg(0.0), deg(90.0));
        let v = nonlocality_verdict(a, ap, &[None, Some(deg(45.0))], true).unwrap();
        assert!(v.nonlocal && v.assumption_free && v.ci_based);
        assert!((v.reports[1].rho_ci - 0.5).abs() < 1e-15);
        assert!((v.reports[1].rho_min - (2f64.sqrt() - 1.0)).abs() < 1e-12);

        let v = nonlocality_verdict(a, ap, &[None, Some(deg(45.0)), Some(deg(55.0))], true).unwrap();
        let ci: Vec<f64> = v.reports.iter().map(|r| r.rho_ci).collect();
        assert_eq!(ci[0], 0.0);
        assert!((ci[1] - 0.5).abs() < 1e-12);
        assert!((ci[2] - 0.4699).abs() < 1e-4);
        assert!(v.nonlocal);

        let v = nonlocality_verdict(a, ap, &[None], true).unwrap();
        assert!(!v.nonlocal && !v.assumption_free && !v.ci_based);
        let none = v.reports[0];
        assert_eq!((none.rho_min, none.rho_ci, none.info_bits, none.total_bits), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn verdict_routes_reported_separately() {
        let (a, ap) = (deg(0.0), deg(90.0));
        // at 170° the bound is vacuous but the product rule is not zero
        let v = nonlocality_verdict(a, ap, &[None, Some(deg(170.0))], true).unwrap();
        assert!(!v.assumption_free && v.ci_based && v.nonlocal);
        let v = nonlocality_verdict(a, ap, &[None, Some(deg(170.0))], false).unwrap();
        assert!(!v.nonlocal);
    }

    #[test]
    fn verdict_errors() {
        let a = deg(0.0);
        assert!(matches!(
            nonlocality_verdict(a, deg(45.0), &[None], true),
            Err(Error::NotOrthogonal(_))
        ));
        assert_eq!(
            nonlocality_verdict(a, deg(90.0), &[Some(deg(45.0))], true),
            Err(Error::MissingNoMeasurementOption)
        );
    }

    #[test]
    fn bound_below_product_rule_on_grid() {
        let (a, ap) = (deg(0.0), deg(90.0));
        for t in 0..360 {
            let theta = deg(t as f64);
            let lo = rho_min_quantum(theta, a, ap);
            if lo >= 0.0 {
                assert!(lo <= rho_conditional_independence(theta, a, ap) + 1e-15, "θ = {t}°");
            }
        }
    }

    #[test]
    fn verdict_matches_model_on_grid() {
        let (a, ap) = (deg(0.0), deg(90.0));
        let options: Vec<_> = std::iter::once(None)
            .chain((0..360).map(|t| Some(deg(t as f64))))
            .collect();
        let v = nonlocality_verdict(a, ap, &options, true).unwrap();
        for r in &v.reports[1..] {
            let theta = r.remote_setting.unwrap();
            let expected = correlation_e(theta, a) * correlation_e(theta, ap);
            assert_eq!(r.rho_ci.to_bits(), expected.to_bits());
        }
    }

    fn pm1_pairs() -> impl Strategy<Value = (Vec<i8>, Vec<i8>)> {
        (2usize..64).prop_flat_map(|n| {
            let s = proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n);
            (s.clone(), s)
        })
    }

    proptest! {
        #[test]
        fn pearson_self_and_negation(v in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 2..64)) {
            let m = OutcomeSequence::new(v).unwrap();
            prop_assume!(m.values().iter().any(|&x| x != m.values()[0]));
            prop_assert_eq!(pearson_pm1(&m, &m).unwrap(), 1.0);
            prop_assert_eq!(pearson_pm1(&m, &m.negated()).unwrap(), -1.0);
        }

        #[test]
        fn pearson_matches_oracle_and_permutation((m, u) in pm1_pairs(), seed in any::<u64>()) {
            let (ms, us) = (seq(&m), seq(&u));
            match pearson_pm1(&ms, &us) {
                Ok(r) => {
                    prop_assert!((r - pearson_oracle(&m, &u)).abs() < 1e-12);
                    let mut idx: Vec<usize> = (0..m.len()).collect();
                    idx.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
                    let pm = seq(&idx.iter().map(|&i| m[i]).collect::<Vec<_>>());
                    let pu = seq(&idx.iter().map(|&i| u[i]).collect::<Vec<_>>());
                    prop_assert!((pearson_pm1(&pm, &pu).unwrap() - r).abs() < 1e-15);
                }
                Err(e) => prop_assert_eq!(e, Error::DegenerateSequence),
            }
        }

        #[test]
        fn overlap_monotone_symmetric(p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64, d in 0.0..=1.0f64) {
            let v = overlap_lower_bound(p1, p2).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, overlap_lower_bound(p2, p1).unwrap());
            let p1b = (p1 + d).min(1.0);
            prop_assert!(overlap_lower_bound(p1b, p2).unwrap() >= v);
        }

        #[test]
        fn leakage_symmetric(p in 0.0..=1.0f64) {
            prop_assert!((info_leakage(p).unwrap() - info_leakage(1.0 - p).unwrap()).abs() < 1e-12);
        }
    }
}
