//! Named boundary functions `s ↦ f(s)` on the fixed boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryFn {
    Constant { value: f64 },
    /// Restriction of the affine map `c0 + c1·x₁ + c2·x₂` to the boundary `x₂ = Φ₀(x₁)`,
    /// stored here for the parabolic boundary as `c0 + c1·s + c2·s²`.
    Polynomial { coeffs: Vec<f64> },
    /// `scale·e^(rate·s)`, optionally capped from above.
    Exp {
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    /// `|s|^p`.
    Power { exponent: f64 },
    Abs,
    /// Indicator of the arc `a ≤ s ≤ b`.
    Indicator { a: f64, b: f64 },
}

fn one() -> f64 {
    1.0
}

impl BoundaryFn {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            BoundaryFn::Constant { value } => *value,
            BoundaryFn::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c),
            BoundaryFn::Exp { rate, scale, cap } => {
                let v = scale * (rate * s).exp();
                cap.map_or(v, |c| v.min(c))
            }
            BoundaryFn::Power { exponent } => s.abs().powf(*exponent),
            BoundaryFn::Abs => s.abs(),
            BoundaryFn::Indicator { a, b } => {
                if s >= *a && s <= *b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn square() -> Self {
        BoundaryFn::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }
    }

    /// `min(e^s, e^cap_at)`.
    pub fn capped_exp(cap_at: f64) -> Self {
        BoundaryFn::Exp { rate: 1.0, scale: 1.0, cap: Some(cap_at.exp()) }
    }

    /// Parses the compact CLI syntax, e.g. `const:2`, `poly:0,1,1`, `exp:1`,
    /// `exp:1:cap=4` (cap at `e⁴`), `power:3`, `abs`, `indicator:-1,1`, `square`.
    pub fn parse(spec: &str) -> Result<Self> {
        let err = |m: &str| Error::Parse {
            field: "function".into(),
            message: format!("{m} in `{spec}`"),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| err("malformed number"));
        let mut parts = spec.splitn(2, ':');
        let name = parts.next().unwrap_or_default().trim();
        let rest = parts.next();
        match (name, rest) {
            ("const", Some(v)) => Ok(BoundaryFn::Constant { value: num(v)? }),
            ("poly", Some(v)) => Ok(BoundaryFn::Polynomial {
                coeffs: v.split(',').map(num).collect::<Result<_>>()?,
            }),
            ("square", None) => Ok(BoundaryFn::square()),
            ("abs", None) => Ok(BoundaryFn::Abs),
            ("power", Some(v)) => Ok(BoundaryFn::Power { exponent: num(v)? }),
            ("exp", Some(v)) => {
                let mut it = v.split(':');
                let rate = num(it.next().unwrap_or_default())?;
                let cap = match it.next() {
                    Some(c) => {
                        let c = c.trim().strip_prefix("cap=").ok_or_else(|| err("expected cap=<s>"))?;
                        Some((rate * num(c)?).exp())
                    }
                    None => None,
                };
                Ok(BoundaryFn::Exp { rate, scale: 1.0, cap })
            }
            ("indicator", Some(v)) => {
                let xs: Vec<f64> = v.split(',').map(num).collect::<Result<_>>()?;
                match xs[..] {
                    [a, b] if a <= b => Ok(BoundaryFn::Indicator { a, b }),
                    _ => Err(err("indicator needs a,b with a ≤ b")),
                }
            }
            _ => Err(err("unknown boundary function")),
        }
    }
}
