//! Bipartite no-signalling boxes `P(A, B | a, b)` with binary inputs and
//! outputs.
//!
//! The CHSH game asks for `A ⊕ B = a·b`. The measured/unmeasured correlation
//! for party A compares its outputs under `a = 0` and `a = 1` while party B's
//! input is held fixed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_unit_interval, Result};
use crate::quantum_model::{CLASSICAL_BOUND, TSIRELSON_BOUND};

/// Absolute tolerance for every box constraint.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-9;

/// Raw table indexed `[a][b][A][B]`.
pub type Table = [[[[f64; 2]; 2]; 2]; 2];

const BITS: [usize; 2] = [0, 1];

fn settings() -> impl Iterator<Item = (usize, usize)> {
    BITS.into_iter().flat_map(|a| BITS.into_iter().map(move |b| (a, b)))
}

/// A conditional probability table over two binary inputs and outputs.
///
/// Construction does not enforce the no-signalling constraints; use
/// [`validate_no_signalling`] or [`NsBox::validated`] for that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsBox {
    table: Table,
}

impl NsBox {
    pub fn from_table(table: Table) -> Self {
        Self { table }
    }

    /// Builds the box and rejects it if any constraint is violated.
    pub fn validated(table: Table) -> std::result::Result<Self, Vec<Violation>> {
        let b = Self::from_table(table);
        validate_no_signalling(&b).map(|()| b)
    }

    /// Builds a box from the per-setting probabilities `P(A = B | a, b)`,
    /// splitting each evenly so that every local marginal is exactly ½.
    pub fn from_match_probabilities(matches: [[f64; 2]; 2]) -> Result<Self> {
        let mut table = Table::default();
        for (a, b) in settings() {
            let m = check_unit_interval("match probability", matches[a][b])?;
            table[a][b] = [[m / 2.0, (1.0 - m) / 2.0], [(1.0 - m) / 2.0, m / 2.0]];
        }
        Ok(Self { table })
    }

    /// Nearest box (in the Euclidean sense, per setting) with uniform local
    /// marginals. Such boxes are automatically no-signalling.
    pub fn project_uniform(raw: &Table) -> Self {
        let mut matches = [[0.0; 2]; 2];
        for (a, b) in settings() {
            let t = &raw[a][b];
            // minimizer of the squared distance to (x, ½−x, ½−x, x), in units of 2x
            let x = (t[0][0] + t[1][1] - t[0][1] - t[1][0] + 1.0) / 4.0;
            matches[a][b] = (2.0 * x).clamp(0.0, 1.0);
        }
        Self::from_match_probabilities(matches).expect("clamped into [0, 1]")
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    /// `P(A = out_a, B = out_b | a, b)`.
    pub fn p(&self, a: usize, b: usize, out_a: usize, out_b: usize) -> f64 {
        self.table[a][b][out_a][out_b]
    }

    pub fn set(&mut self, a: usize, b: usize, out_a: usize, out_b: usize, value: f64) {
        self.table[a][b][out_a][out_b] = value;
    }

    /// `P(A = B | a, b)`.
    pub fn match_probability(&self, a: usize, b: usize) -> f64 {
        self.p(a, b, 0, 0) + self.p(a, b, 1, 1)
    }

    /// `P(A ⊕ B = a·b | a, b)`: the probability of winning the CHSH game.
    pub fn target_probability(&self, a: usize, b: usize) -> f64 {
        if a & b == 0 {
            self.match_probability(a, b)
        } else {
            self.p(a, b, 0, 1) + self.p(a, b, 1, 0)
        }
    }

    /// `E_ab = P(A = B | a, b) − P(A ≠ B | a, b)`.
    pub fn correlator(&self, a: usize, b: usize) -> f64 {
        let same = self.match_probability(a, b);
        let diff = self.p(a, b, 0, 1) + self.p(a, b, 1, 0);
        same - diff
    }

    /// Correlation of the outputs against the CHSH target, `2·P(target) − 1`.
    pub fn target_correlator(&self, a: usize, b: usize) -> f64 {
        2.0 * self.target_probability(a, b) - 1.0
    }

    /// The common target probability, if all four settings share one (within
    /// tolerance) and every setting splits it evenly.
    pub fn isotropic_parameter(&self) -> Option<f64> {
        let p = self.target_probability(0, 0);
        let candidate = make_isotropic(p.clamp(0.0, 1.0)).ok()?;
        let close = settings().all(|(a, b)| {
            BITS.into_iter().all(|x| {
                BITS.into_iter()
                    .all(|y| (self.p(a, b, x, y) - candidate.p(a, b, x, y)).abs() <= CONSTRAINT_TOLERANCE)
            })
        });
        close.then_some(p)
    }
}

/// Isotropic box: every setting wins the CHSH game with probability `p`,
/// with the winning and losing mass split evenly between output pairs.
pub fn make_isotropic(p: f64) -> Result<NsBox> {
    check_unit_interval("p", p)?;
    let mut matches = [[p; 2]; 2];
    matches[1][1] = 1.0 - p;
    NsBox::from_match_probabilities(matches)
}

/// The Popescu–Rohrlich box, `make_isotropic(1)`.
pub fn pr_box() -> NsBox {
    make_isotropic(1.0).expect("1 is a valid parameter")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::A => "A",
            Party::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    /// An entry lies outside `[0, 1]`.
    EntryRange { a: usize, b: usize, out_a: usize, out_b: usize },
    /// `Σ_{A,B} P(A,B|a,b) ≠ 1`.
    Normalization { a: usize, b: usize },
    /// The marginal of `party` for its own `input` and `outcome` changes with
    /// the remote input.
    Signalling { party: Party, input: usize, outcome: usize },
    /// The marginal of `party` differs from ½ when the remote input is
    /// `remote_input`.
    NonUniformMarginal { party: Party, input: usize, remote_input: usize, outcome: usize },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Constraint::EntryRange { a, b, out_a, out_b } => {
                write!(f, "entry P({out_a},{out_b}|{a},{b}) outside [0, 1]")
            }
            Constraint::Normalization { a, b } => write!(f, "normalization for (a,b) = ({a},{b})"),
            Constraint::Signalling { party, input, outcome } => write!(
                f,
                "party {party} marginal P({party}={outcome}|input {input}) depends on the remote input"
            ),
            Constraint::NonUniformMarginal { party, input, remote_input, outcome } => write!(
                f,
                "party {party} marginal P({party}={outcome}|input {input}, remote {remote_input}) is not 1/2"
            ),
        }
    }
}

/// A violated constraint and the absolute size of the violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (residual {:e})", self.constraint, self.residual)
    }
}

fn marginal(bx: &NsBox, party: Party, input: usize, remote: usize, outcome: usize) -> f64 {
    match party {
        Party::A => bx.p(input, remote, outcome, 0) + bx.p(input, remote, outcome, 1),
        Party::B => bx.p(remote, input, 0, outcome) + bx.p(remote, input, 1, outcome),
    }
}

/// Checks range, normalization, no-signalling and uniform marginals, and
/// returns every violated constraint.
pub fn validate_no_signalling(bx: &NsBox) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |constraint, residual: f64| {
        if residual.is_nan() || residual > CONSTRAINT_TOLERANCE {
            out.push(Violation { constraint, residual });
        }
    };

    for (a, b) in settings() {
        for (out_a, out_b) in settings() {
            let v = bx.p(a, b, out_a, out_b);
            let residual = if v.is_nan() { f64::INFINITY } else { (-v).max(v - 1.0).max(0.0) };
            push(Constraint::EntryRange { a, b, out_a, out_b }, residual);
        }
    }
    for (a, b) in settings() {
        let total: f64 = bx.table[a][b].iter().flatten().sum();
        push(Constraint::Normalization { a, b }, (total - 1.0).abs());
    }
    for party in [Party::A, Party::B] {
        for (input, outcome) in settings() {
            let m0 = marginal(bx, party, input, 0, outcome);
            let m1 = marginal(bx, party, input, 1, outcome);
            push(Constraint::Signalling { party, input, outcome }, (m0 - m1).abs());
        }
    }
    for party in [Party::A, Party::B] {
        for (input, remote_input) in settings() {
            for outcome in BITS {
                let m = marginal(bx, party, input, remote_input, outcome);
                push(
                    Constraint::NonUniformMarginal { party, input, remote_input, outcome },
                    (m - 0.5).abs(),
                );
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// `S = |Σ_{a,b} P(A ⊕ B = a·b | a, b)|`; classical bound 3, maximum 4.
pub fn chsh_s_ns(bx: &NsBox) -> f64 {
    settings().map(|(a, b)| bx.target_probability(a, b)).sum::<f64>().abs()
}

/// `S = |E₀₀ + E₀₁ + E₁₀ − E₁₁|`; classical bound 2, maximum 4.
pub fn chsh_s_e(bx: &NsBox) -> f64 {
    (bx.correlator(0, 0) + bx.correlator(0, 1) + bx.correlator(1, 0) - bx.correlator(1, 1)).abs()
}

/// Minimum correlation between party A's measured and unmeasured outputs
/// (`a = 0` versus `a = 1`) when B measured with input `b`.
///
/// For `b = 1` the `a = 1` reference is `A ≠ B`, following the box's target.
pub fn rho_min_ns(bx: &NsBox, b: usize) -> f64 {
    assert!(b < 2, "input b must be 0 or 1");
    let p_min = bx.target_probability(0, b) + bx.target_probability(1, b) - 1.0;
    (2.0 * p_min - 1.0).max(-1.0)
}

/// Measured/unmeasured correlation of an isotropic box under conditional
/// independence: `(2p − 1)²`.
pub fn rho_ci_ns(p: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    Ok((2.0 * p - 1.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxClass {
    Independent,
    LocalCorrelated,
    QuantumRegion,
    SuperQuantum,
}

impl fmt::Display for BoxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoxClass::Independent => "independent",
            BoxClass::LocalCorrelated => "local-correlated",
            BoxClass::QuantumRegion => "quantum-region",
            BoxClass::SuperQuantum => "super-quantum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxClassification {
    pub class: BoxClass,
    /// E-form CHSH value above 2.
    pub chsh_violated: bool,
    /// `rho_min_ns(b) > 0` for `b = 0` or `b = 1`.
    pub rho_min_positive_some_b: bool,
    /// Conditional-independence correlation positive for some `b`. For
    /// isotropic boxes this is `rho_ci_ns(p) > 0`; otherwise the product of
    /// the two target correlators at that `b`.
    pub ci_rho_positive: bool,
}

pub fn classify_box(bx: &NsBox) -> BoxClassification {
    let s = chsh_s_e(bx);
    let independent = settings().all(|(a, b)| bx.correlator(a, b).abs() <= CONSTRAINT_TOLERANCE);
    let class = if independent {
        BoxClass::Independent
    } else if s <= CLASSICAL_BOUND {
        BoxClass::LocalCorrelated
    } else if s <= TSIRELSON_BOUND {
        BoxClass::QuantumRegion
    } else {
        BoxClass::SuperQuantum
    };
    let ci_rho_positive = match bx.isotropic_parameter() {
        Some(p) => rho_ci_ns(p.clamp(0.0, 1.0)).is_ok_and(|r| r > 0.0),
        None => BITS
            .into_iter()
            .any(|b| bx.target_correlator(0, b) * bx.target_correlator(1, b) > 0.0),
    };
    BoxClassification {
        class,
        chsh_violated: s > CLASSICAL_BOUND,
        rho_min_positive_some_b: BITS.into_iter().any(|b| rho_min_ns(bx, b) > 0.0),
        ci_rho_positive,
    }
}

/// Key used for each entry in the serialized form, e.g. `P(0,1|1,0)`.
pub fn entry_label(a: usize, b: usize, out_a: usize, out_b: usize) -> String {
    format!("P({out_a},{out_b}|{a},{b})")
}

fn parse_label(label: &str) -> Option<(usize, usize, usize, usize)> {
    let inner = label.strip_prefix("P(")?.strip_suffix(')')?;
    let (outs, ins) = inner.split_once('|')?;
    let bit = |s: &str| match s.trim() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    };
    let (oa, ob) = outs.split_once(',')?;
    let (a, b) = ins.split_once(',')?;
    Some((bit(a)?, bit(b)?, bit(oa)?, bit(ob)?))
}

impl Serialize for NsBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = BTreeMap::new();
        for (a, b) in settings() {
            for (x, y) in settings() {
                map.insert(entry_label(a, b, x, y), self.p(a, b, x, y));
            }
        }
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NsBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut table = Table::default();
        let mut seen = [[[[false; 2]; 2]; 2]; 2];
        for (key, value) in map {
            let (a, b, x, y) = parse_label(&key)
                .ok_or_else(|| D::Error::custom(format!("unknown box entry `{key}`")))?;
            if seen[a][b][x][y] {
                return Err(D::Error::custom(format!("duplicate box entry `{key}`")));
            }
            seen[a][b][x][y] = true;
            table[a][b][x][y] = value;
        }
        for (a, b) in settings() {
            for (x, y) in settings() {
                if !seen[a][b][x][y] {
                    return Err(D::Error::custom(format!("missing box entry `{}`", entry_label(a, b, x, y))));
                }
            }
        }
        Ok(NsBox { table })
    }
}
