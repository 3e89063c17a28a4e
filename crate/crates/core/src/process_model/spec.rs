use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The built-in Lévy process families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Wiener,
    SaS,
    Gamma,
    Laplace,
    LayeredStable,
    TemperedStable,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Wiener => "Wiener",
            Family::SaS => "SaS",
            Family::Gamma => "Gamma",
            Family::Laplace => "Laplace",
            Family::LayeredStable => "LayeredStable",
            Family::TemperedStable => "TemperedStable",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "Wiener" => Family::Wiener,
            "SaS" => Family::SaS,
            "Gamma" => Family::Gamma,
            "Laplace" => Family::Laplace,
            "LayeredStable" => Family::LayeredStable,
            "TemperedStable" => Family::TemperedStable,
            other => return Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
        })
    }

    /// JSON parameter names, in canonical order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Wiener => &["sigma2", "mu"],
            Family::SaS => &["alpha", "gamma"],
            Family::Gamma => &["theta", "tau"],
            Family::Laplace => &["scale"],
            Family::LayeredStable => &["alpha0", "alpha_inf", "a0", "a_inf"],
            Family::TemperedStable => &["alpha", "p", "lambda", "c"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A Lévy process: one of the built-in families with validated parameters.
///
/// Build values through the checked constructors or by deserializing JSON of
/// the form `{"family": "SaS", "params": {"alpha": 1.5, "gamma": 1.0}}`.
/// Layered stable processes use the piecewise kernel
/// `q(t) = a0 t^(-alpha0-1)` on `(0, 1]` and `a_inf t^(-alpha_inf-1)` beyond;
/// tempered stable processes use `q(x) = c exp(-lambda x)` evaluated at `|t|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum ProcessSpec {
    Wiener { sigma2: f64, mu: f64 },
    SaS { alpha: f64, gamma: f64 },
    Gamma { theta: f64, tau: f64 },
    Laplace { scale: f64 },
    LayeredStable { alpha0: f64, alpha_inf: f64, a0: f64, a_inf: f64 },
    TemperedStable { alpha: f64, p: f64, lambda: f64, c: f64 },
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidSpec(what()))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    require(v.is_finite() && v > 0.0, || format!("{name} must be a finite positive number, got {v}"))
}

impl ProcessSpec {
    pub fn wiener(sigma2: f64, mu: f64) -> Result<Self> {
        Self::Wiener { sigma2, mu }.validated()
    }

    pub fn sas(alpha: f64, gamma: f64) -> Result<Self> {
        Self::SaS { alpha, gamma }.validated()
    }

    pub fn gamma(theta: f64, tau: f64) -> Result<Self> {
        Self::Gamma { theta, tau }.validated()
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        Self::Laplace { scale }.validated()
    }

    pub fn layered_stable(alpha0: f64, alpha_inf: f64, a0: f64, a_inf: f64) -> Result<Self> {
        Self::LayeredStable { alpha0, alpha_inf, a0, a_inf }.validated()
    }

    pub fn tempered_stable(alpha: f64, p: f64, lambda: f64, c: f64) -> Result<Self> {
        Self::TemperedStable { alpha, p, lambda, c }.validated()
    }

    /// Checks every range constraint of the family.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Wiener { sigma2, mu } => {
                positive("sigma2", sigma2)?;
                require(mu.is_finite(), || format!("mu must be finite, got {mu}"))
            }
            ProcessSpec::SaS { alpha, gamma } => {
                require(alpha > 0.0 && alpha <= 2.0, || format!("alpha must lie in (0, 2], got {alpha}"))?;
                positive("gamma", gamma)
            }
            ProcessSpec::Gamma { theta, tau } => {
                positive("theta", theta)?;
                positive("tau", tau)
            }
            ProcessSpec::Laplace { scale } => positive("scale", scale),
            ProcessSpec::LayeredStable { alpha0, alpha_inf, a0, a_inf } => {
                require(alpha0 > 0.0 && alpha0 < 2.0, || format!("alpha0 must lie in (0, 2), got {alpha0}"))?;
                positive("alpha_inf", alpha_inf)?;
                positive("a0", a0)?;
                positive("a_inf", a_inf)
            }
            ProcessSpec::TemperedStable { alpha, p, lambda, c } => {
                require(alpha > 0.0 && alpha < 2.0, || format!("alpha must lie in (0, 2), got {alpha}"))?;
                positive("p", p)?;
                positive("lambda", lambda)?;
                positive("c", c)
            }
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        match self {
            ProcessSpec::Wiener { .. } => Family::Wiener,
            ProcessSpec::SaS { .. } => Family::SaS,
            ProcessSpec::Gamma { .. } => Family::Gamma,
            ProcessSpec::Laplace { .. } => Family::Laplace,
            ProcessSpec::LayeredStable { .. } => Family::LayeredStable,
            ProcessSpec::TemperedStable { .. } => Family::TemperedStable,
        }
    }

    /// Parameter values in the order of [`Family::param_names`].
    pub fn param_values(&self) -> Vec<f64> {
        match *self {
            ProcessSpec::Wiener { sigma2, mu } => vec![sigma2, mu],
            ProcessSpec::SaS { alpha, gamma } => vec![alpha, gamma],
            ProcessSpec::Gamma { theta, tau } => vec![theta, tau],
            ProcessSpec::Laplace { scale } => vec![scale],
            ProcessSpec::LayeredStable { alpha0, alpha_inf, a0, a_inf } => vec![alpha0, alpha_inf, a0, a_inf],
            ProcessSpec::TemperedStable { alpha, p, lambda, c } => vec![alpha, p, lambda, c],
        }
    }

    /// Whether `L_t` and `-L_t` have the same law.
    pub fn is_symmetric(&self) -> bool {
        match *self {
            ProcessSpec::Wiener { mu, .. } => mu == 0.0,
            ProcessSpec::Gamma { .. } => false,
            _ => true,
        }
    }

    /// Human-readable identifier, stable across runs, e.g. `SaS(alpha=1.5,gamma=1)`.
    pub fn id(&self) -> String {
        let family = self.family();
        let params: Vec<String> =
            family.param_names().iter().zip(self.param_values()).map(|(n, v)| format!("{n}={v}")).collect();
        format!("{}({})", family.name(), params.join(","))
    }

    /// 64-bit FNV-1a hash of [`ProcessSpec::id`]; used to derive RNG streams.
    pub fn stable_hash(&self) -> u64 {
        fnv1a(self.id().as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Wire form of a [`ProcessSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub family: String,
    pub params: BTreeMap<String, f64>,
}

impl TryFrom<RawSpec> for ProcessSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let family = Family::from_name(&raw.family)?;
        let names = family.param_names();
        if let Some(extra) = raw.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::InvalidSpec(format!(
                "unknown parameter {extra:?} for family {family}; expected {names:?}"
            )));
        }
        let get = |name: &str| -> Result<f64> {
            match raw.params.get(name) {
                Some(v) => Ok(*v),
                // drift defaults to zero; everything else is required
                None if family == Family::Wiener && name == "mu" => Ok(0.0),
                None => Err(Error::InvalidSpec(format!("missing parameter {name:?} for family {family}"))),
            }
        };
        let spec = match family {
            Family::Wiener => ProcessSpec::Wiener { sigma2: get("sigma2")?, mu: get("mu")? },
            Family::SaS => ProcessSpec::SaS { alpha: get("alpha")?, gamma: get("gamma")? },
            Family::Gamma => ProcessSpec::Gamma { theta: get("theta")?, tau: get("tau")? },
            Family::Laplace => ProcessSpec::Laplace { scale: get("scale")? },
            Family::LayeredStable => ProcessSpec::LayeredStable {
                alpha0: get("alpha0")?,
                alpha_inf: get("alpha_inf")?,
                a0: get("a0")?,
                a_inf: get("a_inf")?,
            },
            Family::TemperedStable => {
                ProcessSpec::TemperedStable { alpha: get("alpha")?, p: get("p")?, lambda: get("lambda")?, c: get("c")? }
            }
        };
        spec.validated()
    }
}

impl From<ProcessSpec> for RawSpec {
    fn from(spec: ProcessSpec) -> Self {
        let family = spec.family();
        let params = family.param_names().iter().zip(spec.param_values()).map(|(n, v)| (n.to_string(), v)).collect();
        RawSpec { family: family.name().to_string(), params }
    }
}

impl ProcessSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        ProcessSpec::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_reject_out_of_range() {
        assert!(ProcessSpec::sas(3.0, 1.0).is_err());
        assert!(ProcessSpec::sas(2.0, 1.0).is_ok());
        assert!(ProcessSpec::sas(0.0, 1.0).is_err());
        assert!(ProcessSpec::gamma(1.0, -1.0).is_err());
        assert!(ProcessSpec::layered_stable(2.0, 1.0, 1.0, 1.0).is_err());
        assert!(ProcessSpec::layered_stable(1.2, 3.5, 1.0, 1.0).is_ok());
        assert!(ProcessSpec::tempered_stable(1.2, 1.0, 0.0, 1.0).is_err());
        assert!(ProcessSpec::wiener(0.0, 0.0).is_err());
        assert!(ProcessSpec::laplace(f64::NAN).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let spec = ProcessSpec::sas(1.5, 1.0).unwrap();
        let json = spec.to_json();
        assert_eq!(json, r#"{"family":"SaS","params":{"alpha":1.5,"gamma":1.0}}"#);
        assert_eq!(ProcessSpec::from_json(&json).unwrap(), spec);

        let err = ProcessSpec::from_json(r#"{"family":"SaS","params":{"alpha":3,"gamma":1}}"#).unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (0, 2]"), "{err}");
        assert!(ProcessSpec::from_json(r#"{"family":"Cauchy","params":{}}"#).is_err());
        assert!(ProcessSpec::from_json(r#"{"family":"Gamma","params":{"theta":1}}"#).is_err());
        assert!(ProcessSpec::from_json(r#"{"family":"Laplace","params":{"scale":1,"x":2}}"#).is_err());
        let w = ProcessSpec::from_json(r#"{"family":"Wiener","params":{"sigma2":2}}"#).unwrap();
        assert_eq!(w, ProcessSpec::Wiener { sigma2: 2.0, mu: 0.0 });
    }

    #[test]
    fn ids_are_stable() {
        let spec = ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(spec.id(), "TemperedStable(alpha=1.2,p=1,lambda=1,c=1)");
        assert_eq!(spec.stable_hash(), fnv1a(spec.id().as_bytes()));
    }
}
