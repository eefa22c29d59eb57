//! Threshold regimes. `Paper` uses the theorem constants verbatim; `Practical`
//! replaces the astronomically large ones by parameters so that desk-scale
//! inputs exercise every branch.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{le_scaled_log2, LogCmp};
use crate::hypgeom::{big, big_int, Constants};
use crate::spaces::{ActionSpace, Length};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Paper,
    Practical(PracticalParams),
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Practical(PracticalParams::default())
    }
}

/// Overrides for practical mode. Missing values fall back to the defaults
/// listed on each field.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PracticalParams {
    /// Displacement floor below which the theorems do not apply. Default ρ₀.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub below_floor: Option<Length>,
    /// Concentration radius T. Default κ₀.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub concentration_t: Option<Length>,
    /// Sphere radius r of the reduction lemma. Default: largest multiple of
    /// ρ₀ that is at most κ₀/4, and at least ρ₀.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub reduction_r: Option<Length>,
    /// Periodicity threshold is 3ν[E] + this. Default 0.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub periodic_slack: Option<Length>,
    /// Ping-pong spacing in multiples of [E]. Default 10.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pingpong_spacing: Option<u64>,
    /// Minimal displacement of the hyperbolic witness v in the concentrated
    /// pipeline. Default 4κ₀.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub witness_displacement: Option<Length>,
    /// Distance of m from x₀ along [x₀, v x₀]. Default one edge.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub midpoint_offset: Option<Length>,
    /// U₂ keeps points u·m pairwise farther apart than this. Default 0.
    #[serde(default, with = "length_opt", skip_serializing_if = "Option::is_none")]
    pub u2_spacing: Option<Length>,
}

/// Lengths in configs: an integer or a `"p/q"` string.
pub(crate) mod length_opt {
    use super::Length;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Length>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Length>, D::Error> {
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Int(n)) => Ok(Some(Length::from_integer(n))),
            Some(Raw::Str(s)) => super::parse_length(&s).map(Some).map_err(de::Error::custom),
        }
    }
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_length(s: &str) -> Result<Length, String> {
    let bad = || format!("not a rational length: {s:?}");
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: i64 = p.parse().map_err(|_| bad())?;
    let q: i64 = q.parse().map_err(|_| bad())?;
    if q <= 0 {
        return Err(bad());
    }
    Ok(Length::new(p, q))
}

/// A threshold `coeff · log₂(log_arg)`, or just `coeff` when no log factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub coeff: BigRational,
    pub log_arg: Option<u64>,
}

impl Threshold {
    pub fn plain(coeff: BigRational) -> Self {
        Self { coeff, log_arg: None }
    }

    /// Decides `x ≤ self`.
    pub fn admits(&self, x: &BigRational) -> LogCmp {
        match self.log_arg {
            None => LogCmp {
                holds: *x <= self.coeff,
                exact: true,
            },
            Some(m) => le_scaled_log2(x, &self.coeff, m, 0),
        }
    }

    /// Decides `x < self`.
    pub fn exceeds(&self, x: &BigRational) -> LogCmp {
        match self.log_arg {
            None => LogCmp {
                holds: *x < self.coeff,
                exact: true,
            },
            // log₂ m is rational only for powers of two; for those `<` and
            // `≤` differ at a single point, handled by the exact check.
            Some(m) => {
                let le = le_scaled_log2(x, &self.coeff, m, 0);
                let equal = m.is_power_of_two()
                    && *x == &self.coeff * big_int(m.trailing_zeros() as i64);
                LogCmp {
                    holds: le.holds && !equal,
                    exact: le.exact,
                }
            }
        }
    }

    pub fn approx(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::INFINITY);
        match self.log_arg {
            None => c,
            Some(m) => c * (m as f64).log2(),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log_arg {
            None => write!(f, "{}", self.coeff),
            Some(m) => write!(f, "{}*log2({m})", self.coeff),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The d factor of the general acylindrical case: 1 on trees, log₂(2|U|)
/// on graphs.
pub fn d_log_arg(space: &ActionSpace, n_elements: usize) -> Option<u64> {
    (!space.is_tree()).then_some(2 * n_elements as u64)
}

fn pow10(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(10u32).pow(k))
}

/// Every threshold of a run, resolved against a space and the size of U.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub mode: &'static str,
    pub below_floor: Threshold,
    pub concentration_t: Threshold,
    #[serde(serialize_with = "crate::ser::display")]
    pub reduction_r: Length,
    /// Periodicity threshold is `3ν[E] + periodic_extra`.
    #[serde(serialize_with = "crate::ser::display")]
    pub periodic_extra: BigRational,
    #[serde(skip)]
    pub consts: Constants,
    #[serde(skip)]
    practical: Option<PracticalParams>,
}

impl Resolved {
    pub fn new(space: &ActionSpace, mode: &Mode, n_elements: usize) -> Self {
        let consts = Constants::of(space);
        let c = space.constants();
        let d = d_log_arg(space, n_elements);
        let reduction_default = default_reduction_r(c.rho0, c.kappa0);
        match mode {
            Mode::Paper => Self {
                mode: "paper",
                below_floor: Threshold {
                    coeff: pow10(14) * &consts.kappa0,
                    log_arg: d,
                },
                concentration_t: Threshold {
                    coeff: pow10(10) * &consts.kappa0,
                    log_arg: d,
                },
                reduction_r: reduction_default,
                periodic_extra: &consts.a * &consts.delta + pow10(7) * &consts.delta,
                consts,
                practical: None,
            },
            Mode::Practical(p) => {
                let p = p.clone();
                Self {
                    mode: "practical",
                    below_floor: Threshold::plain(big(p.below_floor.unwrap_or(c.rho0))),
                    concentration_t: Threshold::plain(big(p.concentration_t.unwrap_or(c.kappa0))),
                    reduction_r: p.reduction_r.unwrap_or(reduction_default),
                    periodic_extra: big(p.periodic_slack.unwrap_or(Length::zero())),
                    consts,
                    practical: Some(p),
                }
            }
        }
    }

    pub fn is_paper(&self) -> bool {
        self.practical.is_none()
    }

    /// Threshold of the periodicity definition for a period of translation
    /// length `transl`.
    pub fn periodic_threshold(&self, transl: Length) -> BigRational {
        big_int(3) * &self.consts.nu * big(transl) + &self.periodic_extra
    }

    /// Ping-pong spacing: 10a with a = 3ν[E] + Aδ + 10⁵δ in paper mode,
    /// a multiple of [E] in practical mode.
    pub fn pingpong_spacing(&self, transl: Length) -> BigRational {
        match &self.practical {
            None => {
                let k = &self.consts;
                let a = big_int(3) * &k.nu * big(transl) + &k.a * &k.delta + pow10(5) * &k.delta;
                big_int(10) * a
            }
            Some(p) => big_int(p.pingpong_spacing.unwrap_or(10) as i64) * big(transl),
        }
    }

    /// Minimal displacement of the witness v (paper mode: 10⁴κ₀).
    pub fn witness_displacement(&self) -> BigRational {
        match &self.practical {
            None => pow10(4) * &self.consts.kappa0,
            Some(p) => p
                .witness_displacement
                .map(big)
                .unwrap_or_else(|| big_int(4) * &self.consts.kappa0),
        }
    }

    /// |m − x₀| in the concentrated pipeline (paper mode: 500κ₀).
    pub fn midpoint_offset(&self, edge: Length) -> BigRational {
        match &self.practical {
            None => big_int(500) * &self.consts.kappa0,
            Some(p) => big(p.midpoint_offset.unwrap_or(edge)),
        }
    }

    /// U₂ spacing at m (paper mode: 42κ₀, strict).
    pub fn u2_spacing(&self) -> BigRational {
        match &self.practical {
            None => big_int(42) * &self.consts.kappa0,
            Some(p) => big(p.u2_spacing.unwrap_or(Length::zero())),
        }
    }
}

/// Largest multiple of ρ₀ at most κ₀/4, but never below ρ₀.
pub fn default_reduction_r(rho0: Length, kappa0: Length) -> Length {
    let k = (kappa0 / Length::from_integer(4) / rho0).floor();
    rho0 * k.max(Length::from_integer(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_json() {
        let m: Mode = serde_json::from_str(r#"{"kind":"paper"}"#).unwrap();
        assert_eq!(m, Mode::Paper);
        let m: Mode =
            serde_json::from_str(r#"{"kind":"practical","concentration_t":"1/2","pingpong_spacing":4}"#)
                .unwrap();
        let Mode::Practical(p) = m else { panic!() };
        assert_eq!(p.concentration_t, Some(Length::new(1, 2)));
        assert_eq!(p.pingpong_spacing, Some(4));
        assert!(serde_json::from_str::<Mode>(r#"{"kind":"practical","bogus":1}"#).is_err());
    }

    #[test]
    fn reduction_r_default() {
        let one = Length::from_integer(1);
        assert_eq!(default_reduction_r(one, one), one);
        assert_eq!(default_reduction_r(one, Length::from_integer(9)), Length::from_integer(2));
    }

    #[test]
    fn threshold_with_log() {
        let t = Threshold {
            coeff: big_int(2),
            log_arg: Some(8),
        };
        assert!(t.admits(&big_int(6)).holds);
        assert!(!t.exceeds(&big_int(6)).holds);
        assert!(t.exceeds(&big_int(5)).holds);
    }
}
