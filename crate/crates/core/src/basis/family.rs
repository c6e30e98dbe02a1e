use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BasisError;

/// Canonical family names, in the order used by `--families all`.
pub const FAMILY_NAMES: [&str; 18] = [
    "al-salam-carlitz",
    "bannai-ito",
    "askey-wilson",
    "boas-buck",
    "boubaker",
    "charlier",
    "fermat",
    "gottlieb",
    "heptanacci",
    "hexanacci",
    "meixner-pollaczek",
    "narayana",
    "octanacci",
    "pade",
    "pentanacci",
    "tetranacci",
    "tribo",
    "vieta-pell",
];

/// A degree-indexed coefficient sequence: either one value for every index
/// or an explicit finite list.
#[derive(Clone, Debug, PartialEq)]
pub enum Sequence {
    Constant(f64),
    Explicit(Vec<f64>),
}

impl Sequence {
    pub fn get(&self, index: usize) -> Option<f64> {
        match self {
            Sequence::Constant(v) => Some(*v),
            Sequence::Explicit(values) => values.get(index).copied(),
        }
    }

    /// Number of defined indices, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            Sequence::Constant(_) => None,
            Sequence::Explicit(values) => Some(values.len()),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Sequence::Constant(v) => vec![*v],
            Sequence::Explicit(values) => values.clone(),
        }
    }

    fn to_param(&self) -> ParamValue {
        match self {
            Sequence::Constant(v) => ParamValue::Number(*v),
            Sequence::Explicit(values) => ParamValue::List(values.clone()),
        }
    }
}

/// A parameter value as it appears on the command line and in checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Flag(bool),
    Number(f64),
    List(Vec<f64>),
}

impl ParamValue {
    /// Parses `0.5`, `0.5,0.4,0.3` or `true`/`false`.
    pub fn parse(text: &str) -> Result<ParamValue, String> {
        let text = text.trim();
        match text {
            "true" => return Ok(ParamValue::Flag(true)),
            "false" => return Ok(ParamValue::Flag(false)),
            _ => {}
        }
        let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let parts = parts.map_err(|_| format!("cannot parse parameter value `{text}`"))?;
        if parts.len() == 1 {
            Ok(ParamValue::Number(parts[0]))
        } else {
            Ok(ParamValue::List(parts))
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Flag(b) => write!(f, "{b}"),
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::List(values) => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// One of the 18 polynomial families together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    AlSalamCarlitz { a: f64, q: f64 },
    BannaiIto { rho: Sequence, tau: Sequence },
    AskeyWilson { a: f64, b: f64, c: f64, d: f64, q: f64 },
    BoasBuck { a_seq: Sequence, b_seq: Sequence },
    Boubaker,
    Charlier { a: f64 },
    Fermat,
    Gottlieb,
    /// Order-k Fibonacci-type polynomials, k in 3..=8 (Tribo .. Octanacci).
    /// `literal` only affects order 8: it selects the 7-term printed form.
    KBonacci { order: usize, literal: bool },
    MeixnerPollaczek { lambda: f64, phi: f64 },
    Narayana,
    Pade { m: usize, n: usize },
    VietaPell,
}

impl FamilySpec {
    /// The family with its default parameters; the Padé degrees default to
    /// `degree`.
    pub fn default_for(name: &str, degree: usize) -> Result<FamilySpec, BasisError> {
        let spec = match name {
            "al-salam-carlitz" => FamilySpec::AlSalamCarlitz { a: 1.0, q: 0.5 },
            "bannai-ito" => FamilySpec::BannaiIto {
                rho: Sequence::Constant(0.5),
                tau: Sequence::Constant(0.25),
            },
            "askey-wilson" => FamilySpec::AskeyWilson {
                a: 0.5,
                b: 0.5,
                c: 0.5,
                d: 0.5,
                q: 0.5,
            },
            "boas-buck" => FamilySpec::BoasBuck {
                a_seq: Sequence::Constant(1.0),
                b_seq: Sequence::Constant(0.0),
            },
            "boubaker" => FamilySpec::Boubaker,
            "charlier" => FamilySpec::Charlier { a: 2.0 },
            "fermat" => FamilySpec::Fermat,
            "gottlieb" => FamilySpec::Gottlieb,
            "tribo" => FamilySpec::KBonacci { order: 3, literal: false },
            "tetranacci" => FamilySpec::KBonacci { order: 4, literal: false },
            "pentanacci" => FamilySpec::KBonacci { order: 5, literal: false },
            "hexanacci" => FamilySpec::KBonacci { order: 6, literal: false },
            "heptanacci" => FamilySpec::KBonacci { order: 7, literal: false },
            "octanacci" => FamilySpec::KBonacci { order: 8, literal: false },
            "meixner-pollaczek" => FamilySpec::MeixnerPollaczek {
                lambda: 1.0,
                phi: PI / 4.0,
            },
            "narayana" => FamilySpec::Narayana,
            "pade" => FamilySpec::Pade { m: degree, n: degree },
            "vieta-pell" => FamilySpec::VietaPell,
            other => return Err(BasisError::UnknownFamily(other.to_string())),
        };
        Ok(spec)
    }

    /// Builds a family from its name and `key=value` overrides, then validates it.
    pub fn from_params(
        name: &str,
        degree: usize,
        params: &BTreeMap<String, ParamValue>,
    ) -> Result<FamilySpec, BasisError> {
        let mut spec = FamilySpec::default_for(name, degree)?;
        let family = spec.name();
        let bad = |reason: String| BasisError::InvalidParameter { family, reason };
        let number = |key: &str, value: &ParamValue| match value {
            ParamValue::Number(v) => Ok(*v),
            _ => Err(bad(format!("`{key}` expects a single number"))),
        };
        let integer = |key: &str, value: &ParamValue| match value {
            ParamValue::Number(v) if *v >= 0.0 && v.fract() == 0.0 => Ok(*v as usize),
            _ => Err(bad(format!("`{key}` expects a non-negative integer"))),
        };
        let sequence = |value: &ParamValue| match value {
            ParamValue::Number(v) => Ok(Sequence::Constant(*v)),
            ParamValue::List(values) => Ok(Sequence::Explicit(values.clone())),
            ParamValue::Flag(_) => Err(bad("sequence parameters take numbers".to_string())),
        };
        for (key, value) in params {
            match (&mut spec, key.as_str()) {
                (FamilySpec::AlSalamCarlitz { a, .. }, "a") => *a = number(key, value)?,
                (FamilySpec::AlSalamCarlitz { q, .. }, "q") => *q = number(key, value)?,
                (FamilySpec::BannaiIto { rho, .. }, "rho") => *rho = sequence(value)?,
                (FamilySpec::BannaiIto { tau, .. }, "tau") => *tau = sequence(value)?,
                (FamilySpec::AskeyWilson { a, .. }, "a") => *a = number(key, value)?,
                (FamilySpec::AskeyWilson { b, .. }, "b") => *b = number(key, value)?,
                (FamilySpec::AskeyWilson { c, .. }, "c") => *c = number(key, value)?,
                (FamilySpec::AskeyWilson { d, .. }, "d") => *d = number(key, value)?,
                (FamilySpec::AskeyWilson { q, .. }, "q") => *q = number(key, value)?,
                (FamilySpec::BoasBuck { a_seq, .. }, "a") => *a_seq = sequence(value)?,
                (FamilySpec::BoasBuck { b_seq, .. }, "b") => *b_seq = sequence(value)?,
                (FamilySpec::Charlier { a }, "a") => *a = number(key, value)?,
                (FamilySpec::KBonacci { order: 8, literal }, "octanacci-literal") => match value {
                    ParamValue::Flag(b) => *literal = *b,
                    _ => return Err(bad("`octanacci-literal` expects true or false".to_string())),
                },
                (FamilySpec::MeixnerPollaczek { lambda, .. }, "lambda") => {
                    *lambda = number(key, value)?
                }
                (FamilySpec::MeixnerPollaczek { phi, .. }, "phi") => *phi = number(key, value)?,
                (FamilySpec::Pade { m, .. }, "m") => *m = integer(key, value)?,
                (FamilySpec::Pade { n, .. }, "n") => *n = integer(key, value)?,
                _ => {
                    let valid = spec.param_keys();
                    return Err(bad(format!(
                        "unknown parameter `{key}` (valid: {})",
                        if valid.is_empty() { "none".to_string() } else { valid.join(", ") }
                    )));
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::AlSalamCarlitz { .. } => "al-salam-carlitz",
            FamilySpec::BannaiIto { .. } => "bannai-ito",
            FamilySpec::AskeyWilson { .. } => "askey-wilson",
            FamilySpec::BoasBuck { .. } => "boas-buck",
            FamilySpec::Boubaker => "boubaker",
            FamilySpec::Charlier { .. } => "charlier",
            FamilySpec::Fermat => "fermat",
            FamilySpec::Gottlieb => "gottlieb",
            FamilySpec::KBonacci { order, .. } => match order {
                3 => "tribo",
                4 => "tetranacci",
                5 => "pentanacci",
                6 => "hexanacci",
                7 => "heptanacci",
                8 => "octanacci",
                _ => "k-bonacci",
            },
            FamilySpec::MeixnerPollaczek { .. } => "meixner-pollaczek",
            FamilySpec::Narayana => "narayana",
            FamilySpec::Pade { .. } => "pade",
            FamilySpec::VietaPell => "vieta-pell",
        }
    }

    fn param_keys(&self) -> Vec<&'static str> {
        match self {
            FamilySpec::AlSalamCarlitz { .. } => vec!["a", "q"],
            FamilySpec::BannaiIto { .. } => vec!["rho", "tau"],
            FamilySpec::AskeyWilson { .. } => vec!["a", "b", "c", "d", "q"],
            FamilySpec::BoasBuck { .. } => vec!["a", "b"],
            FamilySpec::Charlier { .. } => vec!["a"],
            FamilySpec::KBonacci { order: 8, .. } => vec!["octanacci-literal"],
            FamilySpec::MeixnerPollaczek { .. } => vec!["lambda", "phi"],
            FamilySpec::Pade { .. } => vec!["m", "n"],
            _ => vec![],
        }
    }

    /// Parameters as a key/value map, the inverse of [`FamilySpec::from_params`].
    pub fn params(&self) -> BTreeMap<String, ParamValue> {
        let num = ParamValue::Number;
        let entries: Vec<(&str, ParamValue)> = match self {
            FamilySpec::AlSalamCarlitz { a, q } => vec![("a", num(*a)), ("q", num(*q))],
            FamilySpec::BannaiIto { rho, tau } => vec![("rho", rho.to_param()), ("tau", tau.to_param())],
            FamilySpec::AskeyWilson { a, b, c, d, q } => vec![
                ("a", num(*a)),
                ("b", num(*b)),
                ("c", num(*c)),
                ("d", num(*d)),
                ("q", num(*q)),
            ],
            FamilySpec::BoasBuck { a_seq, b_seq } => {
                vec![("a", a_seq.to_param()), ("b", b_seq.to_param())]
            }
            FamilySpec::Charlier { a } => vec![("a", num(*a))],
            FamilySpec::KBonacci { order: 8, literal } => {
                vec![("octanacci-literal", ParamValue::Flag(*literal))]
            }
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                vec![("lambda", num(*lambda)), ("phi", num(*phi))]
            }
            FamilySpec::Pade { m, n } => vec![("m", num(*m as f64)), ("n", num(*n as f64))],
            _ => vec![],
        };
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Checks the degree-independent parameter invariants.
    pub fn validate(&self) -> Result<(), BasisError> {
        let family = self.name();
        let bad = |reason: &str| {
            Err(BasisError::InvalidParameter {
                family,
                reason: reason.to_string(),
            })
        };
        let all_finite = |values: &[f64]| values.iter().all(|v| v.is_finite());
        match self {
            FamilySpec::AlSalamCarlitz { a, q } => {
                if !all_finite(&[*a, *q]) {
                    return bad("parameters must be finite");
                }
                if q.abs() >= 1.0 {
                    return bad("|q| must be < 1");
                }
            }
            FamilySpec::AskeyWilson { a, b, c, d, q } => {
                if !all_finite(&[*a, *b, *c, *d, *q]) {
                    return bad("parameters must be finite");
                }
                if q.abs() >= 1.0 {
                    return bad("|q| must be < 1");
                }
            }
            FamilySpec::BannaiIto { rho, tau } => {
                if !all_finite(&rho.values()) || !all_finite(&tau.values()) {
                    return bad("sequence entries must be finite");
                }
            }
            FamilySpec::BoasBuck { a_seq, b_seq } => {
                if !all_finite(&a_seq.values()) || !all_finite(&b_seq.values()) {
                    return bad("sequence entries must be finite");
                }
            }
            FamilySpec::Charlier { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return bad("a must be > 0");
                }
            }
            FamilySpec::KBonacci { order, .. } => {
                if !(3..=8).contains(order) {
                    return Err(BasisError::InvalidOrder(*order));
                }
            }
            FamilySpec::MeixnerPollaczek { lambda, phi } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return bad("lambda must be > 0");
                }
                if !(phi.is_finite() && *phi > 0.0 && *phi < PI) {
                    return bad("phi must lie in (0, pi)");
                }
            }
            FamilySpec::Boubaker
            | FamilySpec::Fermat
            | FamilySpec::Gottlieb
            | FamilySpec::Narayana
            | FamilySpec::Pade { .. }
            | FamilySpec::VietaPell => {}
        }
        Ok(())
    }

    /// `true` when the family carries no parameters at all.
    pub fn is_parameter_free(&self) -> bool {
        matches!(
            self,
            FamilySpec::Boubaker
                | FamilySpec::Fermat
                | FamilySpec::Gottlieb
                | FamilySpec::Narayana
                | FamilySpec::VietaPell
                | FamilySpec::KBonacci { order: 3..=7, .. }
                | FamilySpec::KBonacci { literal: false, .. }
        )
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        let params = self.params();
        if !params.is_empty() {
            let parts: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", parts.join(";"))?;
        }
        Ok(())
    }
}
