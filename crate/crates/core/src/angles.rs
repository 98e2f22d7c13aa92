//! Exact cone-angle arithmetic and the existence decision.
//!
//! A triple `(θ1, θ2, θ3)` describes cone points of total angle `2πθj` at
//! `0`, `1` and `∞`. Everything in this module is exact: entries are
//! rationals and every predicate is evaluated without tolerances.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngleError {
    #[error("cone parameter θ{index} = {value} must be strictly positive")]
    NonPositive { index: usize, value: String },
    #[error("shift sum m+n+k = {0} is odd; equivalence moves need an even total shift")]
    OddShiftSum(i64),
    #[error("move produces non-positive entry θ{index} = {value}")]
    NonPositiveResult { index: usize, value: String },
    #[error("θ{0} is an integer; canonical triples are defined only for non-integer triples")]
    IntegerEntry(usize),
    #[error("canonical reduction failed for {0}")]
    CanonicalUnreached(String),
    #[error(transparent)]
    Parse(#[from] rational::ParseRationalError),
}

/// Three positive cone parameters, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngleTriple([Rational; 3]);

impl AngleTriple {
    pub fn new(theta1: Rational, theta2: Rational, theta3: Rational) -> Result<Self, AngleError> {
        Self::from_array([theta1, theta2, theta3])
    }

    pub fn from_array(thetas: [Rational; 3]) -> Result<Self, AngleError> {
        for (i, t) in thetas.iter().enumerate() {
            if !t.is_positive() {
                return Err(AngleError::NonPositive {
                    index: i + 1,
                    value: rational::format_rational(t),
                });
            }
        }
        Ok(Self(thetas))
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(r: [(i64, i64); 3]) -> Result<Self, AngleError> {
        Self::from_array(r.map(|(n, d)| Rational::new(n, d)))
    }

    pub fn parse<S: AsRef<str>>(inputs: [S; 3]) -> Result<Self, AngleError> {
        let a = rational::parse_rational(inputs[0].as_ref())?;
        let b = rational::parse_rational(inputs[1].as_ref())?;
        let c = rational::parse_rational(inputs[2].as_ref())?;
        Self::new(a, b, c)
    }

    pub fn theta(&self, index: usize) -> Rational {
        self.0[index]
    }

    pub fn as_array(&self) -> [Rational; 3] {
        self.0
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.0.map(|t| rational::to_f64(&t))
    }

    pub fn sum(&self) -> Rational {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Entry `i` of the result is entry `perm[i]` of `self`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        Self(perm.map(|i| self.0[i]))
    }
}

impl fmt::Display for AngleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            rational::format_rational(&self.0[0]),
            rational::format_rational(&self.0[1]),
            rational::format_rational(&self.0[2])
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleClass {
    /// Zero-based positions of the integer entries, ascending.
    pub integer_positions: Vec<usize>,
}

impl TripleClass {
    pub fn integer_count(&self) -> usize {
        self.integer_positions.len()
    }
}

pub fn classify(t: &AngleTriple) -> TripleClass {
    TripleClass {
        integer_positions: (0..3).filter(|&i| t.0[i].is_integer()).collect(),
    }
}

/// An equivalence move `θj ↦ sj·θj + mj` with `Σ mj` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub signs: [i8; 3],
    pub shifts: [i64; 3],
}

impl Move {
    pub const IDENTITY: Move = Move {
        signs: [1, 1, 1],
        shifts: [0, 0, 0],
    };

    pub fn new(signs: [i8; 3], shifts: [i64; 3]) -> Self {
        Self { signs, shifts }
    }
}

pub fn apply_move(t: &AngleTriple, mv: &Move) -> Result<AngleTriple, AngleError> {
    let total: i64 = mv.shifts.iter().sum();
    if total.rem_euclid(2) != 0 {
        return Err(AngleError::OddShiftSum(total));
    }
    let mut out = [Rational::zero(); 3];
    for i in 0..3 {
        let sign = if mv.signs[i] < 0 { -Rational::one() } else { Rational::one() };
        out[i] = sign * t.0[i] + Rational::from_integer(mv.shifts[i]);
        if !out[i].is_positive() {
            return Err(AngleError::NonPositiveResult {
                index: i + 1,
                value: rational::format_rational(&out[i]),
            });
        }
    }
    Ok(AngleTriple(out))
}

/// A non-integer triple with every pairwise sum in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalTriple([Rational; 3]);

impl CanonicalTriple {
    /// Checks the pairwise-sum condition and non-integrality.
    pub fn new(thetas: [Rational; 3]) -> Option<Self> {
        satisfies_pairwise_bound(&thetas).then_some(Self(thetas))
    }

    pub fn as_array(&self) -> [Rational; 3] {
        self.0
    }

    pub fn sum(&self) -> Rational {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn triple(&self) -> AngleTriple {
        AngleTriple(self.0)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.0.map(|t| rational::to_f64(&t))
    }
}

impl fmt::Display for CanonicalTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        AngleTriple(self.0).fmt(f)
    }
}

fn satisfies_pairwise_bound(t: &[Rational; 3]) -> bool {
    let one = Rational::one();
    t.iter().all(|x| x.is_positive() && !x.is_integer())
        && [(0, 1), (1, 2), (0, 2)]
            .iter()
            .all(|&(i, j)| t[i] + t[j] <= one)
}

/// Distance from `x` to the nearest even integer; lies in `[0, 1]`.
fn distance_to_even(x: &Rational) -> Rational {
    let two = Rational::from_integer(2);
    let r = x - two * Rational::from_integer(rational::floor(&(x / two)));
    if r <= Rational::one() {
        r
    } else {
        two - r
    }
}

/// The four representatives of an equivalence class inside the unit cube:
/// `d` itself and `d` with two entries replaced by `1 - dj`.
fn cube_representatives(d: [Rational; 3]) -> [[Rational; 3]; 4] {
    let one = Rational::one();
    let flip = |mut v: [Rational; 3], i: usize, j: usize| {
        v[i] = one - v[i];
        v[j] = one - v[j];
        v
    };
    [d, flip(d, 0, 1), flip(d, 0, 2), flip(d, 1, 2)]
}

/// Reduces a non-integer triple to its canonical representative.
///
/// Each entry is first replaced by its distance to the nearest even integer
/// (an even shift, possibly with a sign flip). The remaining freedom inside
/// the unit cube is complementing an even number of entries; of those four
/// candidates the ones meeting the pairwise bound are kept. When the bound is
/// met with equality two candidates can qualify; they are permutations of one
/// another with equal sums, and the lexicographically smallest is returned.
pub fn canonicalize(t: &AngleTriple) -> Result<CanonicalTriple, AngleError> {
    if let Some(&i) = classify(t).integer_positions.first() {
        return Err(AngleError::IntegerEntry(i + 1));
    }
    let d = t.0.map(|x| distance_to_even(&x));
    cube_representatives(d)
        .into_iter()
        .filter(satisfies_pairwise_bound)
        .min()
        .map(CanonicalTriple)
        .ok_or_else(|| AngleError::CanonicalUnreached(t.to_string()))
}

/// An explicit move taking `t` to `canonicalize(t)`.
pub fn canonical_move(t: &AngleTriple) -> Result<Move, AngleError> {
    let target = canonicalize(t)?.0;
    for mask in 0..8u8 {
        let signs: [i8; 3] = std::array::from_fn(|i| if mask >> i & 1 == 1 { -1 } else { 1 });
        let mut shifts = [0i64; 3];
        let mut ok = true;
        for i in 0..3 {
            let s = Rational::from_integer(signs[i] as i64);
            let diff = target[i] - s * t.0[i];
            match rational::as_integer(&diff) {
                Some(m) => shifts[i] = m,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && shifts.iter().sum::<i64>().rem_euclid(2) == 0 {
            return Ok(Move { signs, shifts });
        }
    }
    Err(AngleError::CanonicalUnreached(t.to_string()))
}

/// Which of `θ2 + θ3`, `|θ2 − θ3|` supplied the integer in the one-integer test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Sum,
    Difference,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Sum => "sum",
            Branch::Difference => "difference",
        }
    }
}

/// The integer-cone condition: for an integer cone `n ≥ 1` and the other two
/// parameters, returns `m` when `θ2 + θ3` or `|θ2 − θ3|` is an integer `m` of
/// parity opposite to `n` with `m ≤ n − 1`.
pub fn integer_cone_condition(n: i64, theta2: Rational, theta3: Rational) -> Option<(i64, Branch)> {
    let candidates = [
        (theta2 + theta3, Branch::Sum),
        ((theta2 - theta3).abs(), Branch::Difference),
    ];
    candidates.into_iter().find_map(|(value, branch)| {
        let m = rational::as_integer(&value)?;
        ((m - n).rem_euclid(2) == 1 && m <= n - 1).then_some((m, branch))
    })
}

/// Predicate for three integer cones: odd sum and strict triangle inequalities.
pub fn all_integer_condition(thetas: [i64; 3]) -> bool {
    let sum: i64 = thetas.iter().sum();
    sum.rem_euclid(2) == 1 && thetas.iter().all(|&t| 2 * t < sum)
}

/// Which criterion decided the verdict. The wire names match the published
/// JSON schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// No integer entries: the canonical triple must have sum greater than one.
    CanonicalSum,
    /// One or two integer entries: the logarithm-free parity condition.
    IntegerCone,
    /// Three integer entries: a rational developing map must exist.
    AllInteger,
}

impl Rule {
    pub fn wire_name(&self) -> &'static str {
        match self {
            Rule::CanonicalSum => "Theorem1",
            Rule::IntegerCone => "Theorem2",
            Rule::AllInteger => "AllInteger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Canonical(CanonicalTriple),
    IntegerCone {
        /// Zero-based position of the integer entry.
        position: usize,
        n: i64,
        /// The integer `m` and the branch producing it, when the condition holds.
        found: Option<(i64, Branch)>,
    },
    /// Two integer entries force the third to be an integer as well.
    TwoIntegers { positions: [usize; 2] },
    /// Degree `(Σθ − 1)/2` of the rational developing map, when admissible.
    Degree(Option<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceVerdict {
    pub exists: bool,
    pub unique: bool,
    pub rule: Rule,
    pub witness: Witness,
}

impl ExistenceVerdict {
    fn new(exists: bool, rule: Rule, witness: Witness) -> Self {
        // Existence always comes with uniqueness for three cone points.
        Self {
            exists,
            unique: exists,
            rule,
            witness,
        }
    }
}

/// Decides whether a curvature-one metric with cone angles `2πθj` at
/// `0, 1, ∞` exists.
pub fn decide(t: &AngleTriple) -> ExistenceVerdict {
    let class = classify(t);
    match class.integer_positions.as_slice() {
        [] => {
            let canonical = canonicalize(t).expect("non-integer triples always canonicalize");
            let exists = canonical.sum() > Rational::one();
            ExistenceVerdict::new(exists, Rule::CanonicalSum, Witness::Canonical(canonical))
        }
        &[position] => {
            let n = t.0[position].to_integer();
            let others: Vec<Rational> = (0..3).filter(|&i| i != position).map(|i| t.0[i]).collect();
            let found = integer_cone_condition(n, others[0], others[1]);
            ExistenceVerdict::new(
                found.is_some(),
                Rule::IntegerCone,
                Witness::IntegerCone { position, n, found },
            )
        }
        &[i, j] => ExistenceVerdict::new(
            false,
            Rule::IntegerCone,
            Witness::TwoIntegers { positions: [i, j] },
        ),
        _ => {
            let ints = t.0.map(|x| x.to_integer());
            let admissible = all_integer_condition(ints);
            let degree = admissible.then(|| (ints.iter().sum::<i64>() - 1) / 2);
            ExistenceVerdict::new(admissible, Rule::AllInteger, Witness::Degree(degree))
        }
    }
}
