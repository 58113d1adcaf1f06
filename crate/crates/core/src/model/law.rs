use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Distribution of the radius multiplier `Y`.
///
/// Textual form (used by the CLI and the JSON config):
/// `det:<c>`, `unif:<a>:<b>`, `disc:<v1>@<w1>,<v2>@<w2>,...`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadiusLaw {
    Deterministic(f64),
    UniformInterval(f64, f64),
    /// Weights need not be normalized.
    FiniteDiscrete { values: Vec<f64>, weights: Vec<f64> },
}

impl RadiusLaw {
    pub fn deterministic(c: f64) -> Result<Self> {
        let law = RadiusLaw::Deterministic(c);
        law.validate()?;
        Ok(law)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let law = RadiusLaw::UniformInterval(a, b);
        law.validate()?;
        Ok(law)
    }

    pub fn discrete(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let law = RadiusLaw::FiniteDiscrete { values, weights };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadiusLaw::Deterministic(c) => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(invalid(format!("deterministic radius must be positive, got {c}")));
                }
            }
            RadiusLaw::UniformInterval(a, b) => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && b > a) {
                    return Err(invalid(format!("uniform law needs 0 <= a < b, got [{a}, {b}]")));
                }
            }
            RadiusLaw::FiniteDiscrete { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(invalid("discrete law needs matching, nonempty values and weights"));
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(invalid("discrete law values must be positive"));
                }
                if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
                    return Err(invalid("discrete law weights must be positive"));
                }
            }
        }
        Ok(())
    }

    /// `E[Y^m]`.
    pub fn moment(&self, m: u32) -> f64 {
        let m = m as i32;
        match self {
            RadiusLaw::Deterministic(c) => c.powi(m),
            RadiusLaw::UniformInterval(a, b) => (b.powi(m + 1) - a.powi(m + 1)) / ((m + 1) as f64 * (b - a)),
            RadiusLaw::FiniteDiscrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| w * v.powi(m)).sum::<f64>() / total
            }
        }
    }

    /// `E[min(Y, cap)^m]`.
    pub fn capped_moment(&self, cap: f64, m: u32) -> f64 {
        let mi = m as i32;
        match self {
            RadiusLaw::Deterministic(c) => c.min(cap).powi(mi),
            RadiusLaw::UniformInterval(a, b) => {
                if cap >= *b {
                    self.moment(m)
                } else if cap <= *a {
                    cap.powi(mi)
                } else {
                    let below = (cap.powi(mi + 1) - a.powi(mi + 1)) / (mi + 1) as f64;
                    let above = cap.powi(mi) * (b - cap);
                    (below + above) / (b - a)
                }
            }
            RadiusLaw::FiniteDiscrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| w * v.min(cap).powi(mi)).sum::<f64>() / total
            }
        }
    }

    /// `P[Y <= level]`.
    pub fn cdf(&self, level: f64) -> f64 {
        match self {
            RadiusLaw::Deterministic(c) => {
                if level >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            RadiusLaw::UniformInterval(a, b) => ((level - a) / (b - a)).clamp(0.0, 1.0),
            RadiusLaw::FiniteDiscrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).filter(|(v, _)| **v <= level).map(|(_, w)| w).sum::<f64>() / total
            }
        }
    }

    /// Essential supremum of `Y`; every supported law is bounded.
    pub fn sup(&self) -> f64 {
        match self {
            RadiusLaw::Deterministic(c) => *c,
            RadiusLaw::UniformInterval(_, b) => *b,
            RadiusLaw::FiniteDiscrete { values, .. } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.sup().is_finite()
    }

    /// Whether `0 < E[Y^{2d-2}] < inf` and `0 < E[Y^{d+eps}] < inf` hold; for
    /// bounded support only positivity needs checking.
    pub fn satisfies_moment_conditions(&self, d: usize) -> bool {
        let m = (2 * d).saturating_sub(2).max(d + 1) as u32;
        self.is_bounded() && self.moment(m) > 0.0 && self.moment(m).is_finite()
    }

    /// Draws one strictly positive mark.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            RadiusLaw::Deterministic(c) => *c,
            RadiusLaw::UniformInterval(a, b) => loop {
                let y = a + (b - a) * rng.random::<f64>();
                if y > 0.0 {
                    break y;
                }
            },
            RadiusLaw::FiniteDiscrete { values, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                for (v, w) in values.iter().zip(weights) {
                    if u < *w {
                        return *v;
                    }
                    u -= w;
                }
                *values.last().expect("validated nonempty")
            }
        }
    }
}

impl fmt::Display for RadiusLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusLaw::Deterministic(c) => write!(f, "det:{c}"),
            RadiusLaw::UniformInterval(a, b) => write!(f, "unif:{a}:{b}"),
            RadiusLaw::FiniteDiscrete { values, weights } => {
                write!(f, "disc:")?;
                for (i, (v, w)) in values.iter().zip(weights).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}@{w}")?;
                }
                Ok(())
            }
        }
    }
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| invalid(format!("cannot parse {what} '{s}' as a number")))
}

impl FromStr for RadiusLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("law '{s}' must look like det:<c>, unif:<a>:<b> or disc:<v>@<w>,...")))?;
        match kind {
            "det" => RadiusLaw::deterministic(num(rest, "radius")?),
            "unif" => {
                let (a, b) = rest
                    .split_once(':')
                    .ok_or_else(|| invalid(format!("uniform law '{s}' needs two bounds")))?;
                RadiusLaw::uniform(num(a, "lower bound")?, num(b, "upper bound")?)
            }
            "disc" => {
                let mut values = Vec::new();
                let mut weights = Vec::new();
                for atom in rest.split(',') {
                    let (v, w) = atom
                        .split_once('@')
                        .ok_or_else(|| invalid(format!("discrete atom '{atom}' must be <value>@<weight>")))?;
                    values.push(num(v, "value")?);
                    weights.push(num(w, "weight")?);
                }
                RadiusLaw::discrete(values, weights)
            }
            other => Err(invalid(format!("unknown law kind '{other}'"))),
        }
    }
}

impl Serialize for RadiusLaw {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RadiusLaw {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moments() {
        assert_eq!(RadiusLaw::Deterministic(2.0).moment(3), 8.0);
        let u = RadiusLaw::uniform(0.0, 1.0).unwrap();
        assert!((u.moment(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((u.moment(1) - 0.5).abs() < 1e-15);
        let d = RadiusLaw::discrete(vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert!((d.moment(2) - (1.0 + 12.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn capped_moment_uniform() {
        let u = RadiusLaw::uniform(0.0, 1.0).unwrap();
        // E[min(Y, 1/2)^2] = int_0^{1/2} y^2 dy + (1/2)^2 * 1/2 = 1/24 + 1/8
        assert!((u.capped_moment(0.5, 2) - (1.0 / 24.0 + 1.0 / 8.0)).abs() < 1e-15);
        assert_eq!(RadiusLaw::Deterministic(1.0).capped_moment(0.5, 2), 0.25);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("det:1".parse::<RadiusLaw>().unwrap(), RadiusLaw::Deterministic(1.0));
        assert_eq!("unif:0:1".parse::<RadiusLaw>().unwrap(), RadiusLaw::UniformInterval(0.0, 1.0));
        let d: RadiusLaw = "disc:1@0.5,2@0.5".parse().unwrap();
        assert_eq!(d.sup(), 2.0);
        assert!("det:-1".parse::<RadiusLaw>().is_err());
        assert!("unif:1:0".parse::<RadiusLaw>().is_err());
        assert!("gamma:1".parse::<RadiusLaw>().is_err());
        assert!("disc:1".parse::<RadiusLaw>().is_err());
    }

    #[test]
    fn serde_as_string() {
        let law = RadiusLaw::uniform(0.5, 1.5).unwrap();
        let js = serde_json::to_string(&law).unwrap();
        assert_eq!(js, "\"unif:0.5:1.5\"");
        let back: RadiusLaw = serde_json::from_str(&js).unwrap();
        assert_eq!(back, law);
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(a in 0.0f64..10.0, w in 0.01f64..5.0, v in 0.01f64..5.0) {
            let laws = [
                RadiusLaw::Deterministic(v),
                RadiusLaw::UniformInterval(a, a + w),
                RadiusLaw::FiniteDiscrete { values: vec![v, v + w], weights: vec![w, 1.0] },
            ];
            for law in laws {
                let back: RadiusLaw = law.to_string().parse().unwrap();
                prop_assert_eq!(back, law);
            }
        }
    }
}
