//! Critical exponents of the memory-damped wave equation and the regime
//! classification they induce.
//!
//! For dimension `n` and memory exponent `γ ∈ (0,1)`:
//!
//! ```text
//! p_γ = 1 + 2(2−γ)/(n−2+2γ)₊       p₁ = 1 + 2(3−2γ)/(n−2+2γ)₊
//! p₂  = 1 + 4(3−2γ)/(n−4+4γ)₊      p₃ = 1 + (n+2(5−4γ))/(n−2+4γ)₊
//! p_c = 1 + 2/n                    cap = n/(n−2) for n ≥ 3
//! ```
//!
//! A vanishing positive part means "no upper constraint" and is represented
//! by [`Extended::Infinite`], never by a large float.
//!
//! Every formula is written once over a generic field so that the same code
//! evaluates in `f64` and in exact rationals (see [`exact`]).

use std::cmp::Ordering;
use std::fmt;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// A real number or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(*x),
            Extended::Infinite => None,
        }
    }

    /// Value as `f64`, with `+∞` mapped to `f64::INFINITY` for display only.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.partial_cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Some(Ordering::Less),
            (Extended::Infinite, Extended::Finite(_)) => Some(Ordering::Greater),
            (Extended::Infinite, Extended::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Exponents over a generic scalar; `None` stands for `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponents<T> {
    pub n: u32,
    pub gamma: T,
    pub p_c: T,
    pub p_gamma: Option<T>,
    pub p_1: Option<T>,
    pub p_2: Option<T>,
    pub p_3: Option<T>,
    pub sobolev_cap: Option<T>,
}

fn c<T: FromPrimitive>(x: i64) -> T {
    T::from_i64(x).expect("small integer constants are representable")
}

fn ratio_over_positive_part<T>(num: T, den: T) -> Option<T>
where
    T: Clone + Num + PartialOrd + FromPrimitive,
{
    if den > T::zero() {
        Some(T::one() + num / den)
    } else {
        None
    }
}

impl<T> Exponents<T>
where
    T: Clone + Num + PartialOrd + FromPrimitive,
{
    pub fn evaluate(n: u32, gamma: T) -> Self {
        let nn: T = c(n as i64);
        let g = gamma.clone();
        let two: T = c(2);
        let three: T = c(3);
        let four: T = c(4);
        let five: T = c(5);
        let p_c = T::one() + two.clone() / nn.clone();
        let den_a = nn.clone() - two.clone() + two.clone() * g.clone();
        let p_gamma = ratio_over_positive_part(two.clone() * (two.clone() - g.clone()), den_a.clone());
        let p_1 = ratio_over_positive_part(
            two.clone() * (three.clone() - two.clone() * g.clone()),
            den_a,
        );
        let p_2 = ratio_over_positive_part(
            four.clone() * (three - two.clone() * g.clone()),
            nn.clone() - four.clone() + four.clone() * g.clone(),
        );
        let p_3 = ratio_over_positive_part(
            nn.clone() + two.clone() * (five - four.clone() * g.clone()),
            nn.clone() - two.clone() + four * g.clone(),
        );
        let sobolev_cap = if n >= 3 {
            Some(nn.clone() / (nn - two))
        } else {
            None
        };
        Exponents {
            n,
            gamma,
            p_c,
            p_gamma,
            p_1,
            p_2,
            p_3,
            sobolev_cap,
        }
    }

    /// The global-existence threshold of the dimension: `p₁`, `p₂` or `p₃`.
    pub fn p_n(&self) -> Option<T> {
        match self.n {
            1 => self.p_1.clone(),
            2 => self.p_2.clone(),
            3 => self.p_3.clone(),
            _ => None,
        }
    }
}

/// `(e₁, e₂)` with `e_k = −(α+3−k) p' + n/2 + 1`, `α = 1 − γ`, `p' = p/(p−1)`:
/// the powers of `T` bounding the test-function estimate.
pub fn scaling_exponents_generic<T>(n: u32, gamma: T, p: T) -> (T, T)
where
    T: Clone + Num + FromPrimitive,
{
    let alpha = T::one() - gamma;
    let p_prime = p.clone() / (p - T::one());
    let base = c::<T>(n as i64) / c(2) + T::one();
    let e1 = base.clone() - (alpha.clone() + c(2)) * p_prime.clone();
    let e2 = base - (alpha + T::one()) * p_prime;
    (e1, e2)
}

/// Exponents in `f64` with explicit infinities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentSet {
    pub n: u32,
    pub gamma: f64,
    pub p_c: f64,
    pub p_gamma: Extended,
    pub p_1: Extended,
    pub p_2: Extended,
    pub p_3: Extended,
    pub sobolev_cap: Extended,
}

fn ext(x: Option<f64>) -> Extended {
    x.map_or(Extended::Infinite, Extended::Finite)
}

impl ExponentSet {
    pub fn p_n(&self) -> Extended {
        match self.n {
            1 => self.p_1,
            2 => self.p_2,
            3 => self.p_3,
            _ => Extended::Infinite,
        }
    }

    /// `1/γ`, which coincides with `p_γ` and the Sobolev cap exactly when
    /// `γ = (n−2)/n`.
    pub fn inv_gamma(&self) -> f64 {
        1.0 / self.gamma
    }
}

pub fn compute_exponents(n: u32, gamma: f64) -> Result<ExponentSet> {
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let e = Exponents::<f64>::evaluate(n, gamma);
    Ok(ExponentSet {
        n,
        gamma,
        p_c: e.p_c,
        p_gamma: ext(e.p_gamma),
        p_1: ext(e.p_1),
        p_2: ext(e.p_2),
        p_3: ext(e.p_3),
        sobolev_cap: ext(e.sobolev_cap),
    })
}

/// One rung of the `γ ↑ 1` ladder.
#[derive(Clone, Copy, Debug)]
pub struct LimitRow {
    pub k: u32,
    pub gamma: f64,
    pub exponents: ExponentSet,
    /// `|p_γ − p_c|`
    pub p_gamma_gap: f64,
    /// `|p₁ − p_c|`
    pub p_1_gap: f64,
    /// `|p₂ − 3|` in two dimensions.
    pub p_2_gap: Option<f64>,
    /// `|p₃ − 2|` in three dimensions.
    pub p_3_gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub n: u32,
    pub p_c: f64,
    pub rows: Vec<LimitRow>,
}

/// Evaluates the exponents at `γ = 1 − 10^{−k}`, `k = 2..=6`.
///
/// The targets are `p_γ, p₁ → p_c(n)`, `p₂ → 3` at `n = 2` and `p₃ → 2` at
/// `n = 3`.
pub fn gamma_limits(n: u32) -> Result<LimitReport> {
    if !(1..=3).contains(&n) {
        return Err(Error::domain(format!("limit report covers n = 1..3, got {n}")));
    }
    let mut rows = Vec::new();
    let mut p_c = 0.0;
    for k in 2..=6 {
        let gamma = 1.0 - 10f64.powi(-(k as i32));
        let e = compute_exponents(n, gamma)?;
        p_c = e.p_c;
        let gap = |x: Extended, target: f64| x.finite().map_or(f64::INFINITY, |v| (v - target).abs());
        rows.push(LimitRow {
            k,
            gamma,
            exponents: e,
            p_gamma_gap: gap(e.p_gamma, e.p_c),
            p_1_gap: gap(e.p_1, e.p_c),
            p_2_gap: (n == 2).then(|| gap(e.p_2, 3.0)),
            p_3_gap: (n == 3).then(|| gap(e.p_3, 2.0)),
        });
    }
    Ok(LimitReport { n, p_c, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    GlobalSmallData,
    BlowUpPositiveData,
    OpenRegion,
    OutsideTheoremScope,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::GlobalSmallData => "GlobalSmallData",
            Regime::BlowUpPositiveData => "BlowUpPositiveData",
            Regime::OpenRegion => "OpenRegion",
            Regime::OutsideTheoremScope => "OutsideTheoremScope",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Properties of the initial data that the hypotheses refer to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DataTraits {
    pub positive_mean: bool,
    pub small_data: bool,
    pub compact_support: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeVerdict {
    pub tag: Regime,
    pub citation: String,
    pub notes: String,
}

pub const CITE_BLOWUP_SUBCRITICAL_GAMMA: &str =
    "blow-up: n >= 3, gamma <= (n-2)/n, p <= n/(n-2), positive mean data";
pub const CITE_BLOWUP: &str =
    "blow-up: (n-2)/n < gamma < 1, p <= p_gamma, p <= Sobolev cap, positive mean data";
pub const CITE_GLOBAL: &str =
    "global existence: n <= 3, gamma window, p > p_n, small compactly supported data";
pub const CITE_OPEN: &str = "open: p_gamma < p <= p_n inside the global-existence gamma window";

/// Comparisons used by the classifier; `f64` treats values within a few ulps
/// as equal so that `p = p_γ` lands on the closed side.
pub trait Compare: Clone + Num + PartialOrd + FromPrimitive {
    fn at_most(&self, bound: &Self) -> bool;
}

impl Compare for f64 {
    fn at_most(&self, bound: &Self) -> bool {
        *self <= *bound + 1e-12 * bound.abs().max(1.0)
    }
}

fn at_most_opt<T: Compare>(p: &T, bound: &Option<T>) -> bool {
    match bound {
        Some(b) => p.at_most(b),
        None => true,
    }
}

/// Classification over a generic field; see [`classify`].
pub fn classify_generic<T: Compare>(n: u32, gamma: T, p: T, traits: DataTraits) -> RegimeVerdict {
    let outside = |notes: String| RegimeVerdict {
        tag: Regime::OutsideTheoremScope,
        citation: String::new(),
        notes,
    };
    if n == 0 || !(gamma > T::zero() && gamma < T::one()) || !(p > T::one()) {
        return outside("requires n >= 1, 0 < gamma < 1 and p > 1".into());
    }
    let e = Exponents::evaluate(n, gamma.clone());
    let nn: T = c(n as i64);
    let threshold = (nn.clone() - c(2)) / nn;

    if n >= 3 && gamma.at_most(&threshold) && at_most_opt(&p, &e.sobolev_cap) {
        if traits.positive_mean {
            return RegimeVerdict {
                tag: Regime::BlowUpPositiveData,
                citation: CITE_BLOWUP_SUBCRITICAL_GAMMA.into(),
                notes: "every positive-mean solution blows up".into(),
            };
        }
    } else if gamma > threshold
        && at_most_opt(&p, &e.p_gamma)
        && at_most_opt(&p, &e.sobolev_cap)
        && traits.positive_mean
    {
        return RegimeVerdict {
            tag: Regime::BlowUpPositiveData,
            citation: CITE_BLOWUP.into(),
            notes: "p at or below p_gamma".into(),
        };
    }

    let quarter_window = match n {
        1 | 2 => gamma > c::<T>(1) / c(2),
        3 => gamma > c::<T>(11) / c(16),
        _ => false,
    };
    if quarter_window {
        if let Some(p_n) = e.p_n() {
            if !p.at_most(&p_n) {
                if traits.small_data && traits.compact_support {
                    return RegimeVerdict {
                        tag: Regime::GlobalSmallData,
                        citation: CITE_GLOBAL.into(),
                        notes: "p above p_n".into(),
                    };
                }
                return outside("p above p_n but data not small and compactly supported".into());
            }
            let above_gamma = match &e.p_gamma {
                Some(pg) => !p.at_most(pg),
                None => false,
            };
            if above_gamma {
                return RegimeVerdict {
                    tag: Regime::OpenRegion,
                    citation: CITE_OPEN.into(),
                    notes: "neither blow-up nor global existence is established".into(),
                };
            }
        }
    }
    outside("no hypothesis set applies to these parameters and data traits".into())
}

/// Applies, in order: blow-up for small `γ` (n ≥ 3), blow-up for
/// `p ≤ p_γ`, small-data global existence for `p > p_n`, and the open gap
/// `(p_γ, p_n]`.
pub fn classify(n: u32, gamma: f64, p: f64, traits: DataTraits) -> RegimeVerdict {
    classify_generic(n, gamma, p, traits)
}

pub fn blow_up_scaling_exponents(n: u32, gamma: f64, p: f64) -> (f64, f64) {
    scaling_exponents_generic(n, gamma, p)
}

/// Exact rational evaluation of the exponent algebra.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    use super::*;

    impl Compare for BigRational {
        fn at_most(&self, bound: &Self) -> bool {
            self <= bound
        }
    }

    pub fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn exponents(n: u32, gamma: &BigRational) -> Exponents<BigRational> {
        Exponents::evaluate(n, gamma.clone())
    }

    pub fn scaling_exponents(n: u32, gamma: &BigRational, p: &BigRational) -> (BigRational, BigRational) {
        scaling_exponents_generic(n, gamma.clone(), p.clone())
    }

    pub fn classify(n: u32, gamma: &BigRational, p: &BigRational, traits: DataTraits) -> RegimeVerdict {
        classify_generic(n, gamma.clone(), p.clone(), traits)
    }
}

#[cfg(test)]
mod tests {
    use super::exact::rational;
    use super::*;

    #[test]
    fn fujita_exponent() {
        assert_eq!(compute_exponents(1, 0.5).unwrap().p_c, 3.0);
        assert_eq!(compute_exponents(2, 0.5).unwrap().p_c, 2.0);
    }

    #[test]
    fn vanishing_positive_part_is_infinite() {
        let e = compute_exponents(1, 0.5).unwrap();
        assert_eq!(e.p_gamma, Extended::Infinite);
        assert_eq!(e.p_1, Extended::Infinite);
        assert_eq!(e.sobolev_cap, Extended::Infinite);
        let e = compute_exponents(2, 0.4).unwrap();
        assert!(e.p_gamma.is_finite());
        assert_eq!(e.p_2, Extended::Infinite);
    }

    #[test]
    fn three_dimensional_values() {
        let e = compute_exponents(3, 0.75).unwrap();
        assert!((e.p_gamma.to_f64() - 2.0).abs() < 1e-15);
        assert_eq!(e.sobolev_cap, Extended::Finite(3.0));
        let exact = exact::exponents(3, &rational(11, 16));
        assert_eq!(exact.p_3, Some(rational(3, 1)));
        assert_eq!(exact.p_3, exact.sobolev_cap);
    }

    #[test]
    fn one_dimensional_thresholds() {
        let e = exact::exponents(1, &rational(9, 10));
        assert_eq!(e.p_gamma, Some(rational(15, 4)));
        assert_eq!(e.p_1, Some(rational(4, 1)));
    }

    #[test]
    fn invalid_gamma() {
        assert!(compute_exponents(1, 0.0).is_err());
        assert!(compute_exponents(1, 1.0).is_err());
        assert!(compute_exponents(0, 0.5).is_err());
    }

    #[test]
    fn limit_report_targets() {
        let r = gamma_limits(1).unwrap();
        let last = r.rows.last().unwrap();
        assert!(last.p_gamma_gap < 1e-4 && last.p_1_gap < 1e-4);
        let r = gamma_limits(2).unwrap();
        assert!(r.rows.last().unwrap().p_2_gap.unwrap() < 1e-3);
        let r = gamma_limits(3).unwrap();
        assert!(r.rows.last().unwrap().p_3_gap.unwrap() < 1e-4);
        assert!(gamma_limits(4).is_err());
    }

    #[test]
    fn classification_examples() {
        let pos = DataTraits {
            positive_mean: true,
            ..Default::default()
        };
        let small = DataTraits {
            small_data: true,
            compact_support: true,
            ..Default::default()
        };
        assert_eq!(classify(1, 0.9, 2.0, pos).tag, Regime::BlowUpPositiveData);
        assert_eq!(classify(1, 0.9, 4.5, small).tag, Regime::GlobalSmallData);
        assert_eq!(classify(1, 0.9, 3.9, DataTraits::default()).tag, Regime::OpenRegion);
        // p = p_γ sits on the blow-up side, in floats and exactly.
        assert_eq!(classify(1, 0.9, 3.75, pos).tag, Regime::BlowUpPositiveData);
        assert_eq!(
            exact::classify(1, &rational(9, 10), &rational(15, 4), pos).tag,
            Regime::BlowUpPositiveData
        );
        // p = p₁ is still open (the global result needs p > p₁).
        assert_eq!(
            exact::classify(1, &rational(9, 10), &rational(4, 1), small).tag,
            Regime::OpenRegion
        );
        // Small-γ blow-up in three dimensions.
        assert_eq!(classify(3, 0.2, 2.5, pos).tag, Regime::BlowUpPositiveData);
        assert_eq!(classify(3, 0.2, 3.5, pos).tag, Regime::OutsideTheoremScope);
        // Window endpoints are excluded.
        assert_eq!(classify(1, 0.5, 50.0, small).tag, Regime::OutsideTheoremScope);
        assert_eq!(classify(3, 11.0 / 16.0, 3.5, small).tag, Regime::OutsideTheoremScope);
        assert_eq!(classify(5, 0.9, 1.2, pos).tag, Regime::BlowUpPositiveData);
    }

    #[test]
    fn verdicts_carry_citations() {
        let traits = DataTraits {
            positive_mean: true,
            small_data: true,
            compact_support: true,
        };
        for n in 1..=4 {
            for g in [0.1, 0.3, 0.55, 0.7, 0.8, 0.95] {
                for p in [1.1, 1.5, 2.0, 3.0, 5.0, 20.0] {
                    let v = classify(n, g, p, traits);
                    assert_eq!(v.citation.is_empty(), v.tag == Regime::OutsideTheoremScope);
                }
            }
        }
    }

    #[test]
    fn scaling_example() {
        let (e1, e2) = blow_up_scaling_exponents(1, 0.9, 2.0);
        assert!((e2 + 0.7).abs() < 1e-12);
        assert!(e1 < e2);
    }
}
