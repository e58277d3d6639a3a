//! Scalar curves whose epigraphs bound the strip domains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly convex scalar function `s ↦ Φ(s)` with first and second derivatives.
///
/// Analytic families cover the parabolic strip, power-type pairs and
/// exponential (reverse-Jensen) boundaries; `Tabulated` interpolates samples with a
/// monotone cubic; `Projective` is the image `s·Φ(1/s)` of another curve and
/// `Shifted` adds a constant (used for domain extensions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Curve {
    /// `a·s² + b·s + c`.
    Quadratic { a: f64, b: f64, c: f64 },
    /// `coef·(1 + s²)^(p/2) + shift`, strictly convex for `p ≥ 1`.
    Power { coef: f64, exponent: f64, shift: f64 },
    /// `coef·e^(rate·s) + shift`.
    Exponential { coef: f64, rate: f64, shift: f64 },
    /// `coef·|s|^p` on the half-line `s > 0` (source curves of the projective form).
    HalfLinePower { coef: f64, exponent: f64 },
    /// `coef / s^p` on `s > 0`.
    InversePower { coef: f64, exponent: f64 },
    Tabulated(Tabulated),
    Projective { base: Box<Curve> },
    Shifted { base: Box<Curve>, delta: f64 },
}

impl Curve {
    pub fn parabola(c: f64) -> Self {
        Curve::Quadratic { a: 1.0, b: 0.0, c }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Curve::Quadratic { a, b, c } => (a * s + b) * s + c,
            Curve::Power { coef, exponent, shift } => coef * (1.0 + s * s).powf(0.5 * exponent) + shift,
            Curve::Exponential { coef, rate, shift } => coef * (rate * s).exp() + shift,
            Curve::HalfLinePower { coef, exponent } => coef * s.abs().powf(*exponent),
            Curve::InversePower { coef, exponent } => coef * s.powf(-exponent),
            Curve::Tabulated(t) => t.eval(s),
            Curve::Projective { base } => s * base.eval(1.0 / s),
            Curve::Shifted { base, delta } => base.eval(s) + delta,
        }
    }

    pub fn slope(&self, s: f64) -> f64 {
        match self {
            Curve::Quadratic { a, b, .. } => 2.0 * a * s + b,
            Curve::Power { coef, exponent, .. } => {
                coef * exponent * s * (1.0 + s * s).powf(0.5 * exponent - 1.0)
            }
            Curve::Exponential { coef, rate, .. } => coef * rate * (rate * s).exp(),
            Curve::HalfLinePower { coef, exponent } => {
                coef * exponent * s.signum() * s.abs().powf(exponent - 1.0)
            }
            Curve::InversePower { coef, exponent } => -coef * exponent * s.powf(-exponent - 1.0),
            Curve::Tabulated(t) => t.slope(s),
            Curve::Projective { base } => {
                let u = 1.0 / s;
                base.eval(u) - u * base.slope(u)
            }
            Curve::Shifted { base, .. } => base.slope(s),
        }
    }

    pub fn curvature(&self, s: f64) -> f64 {
        match self {
            Curve::Quadratic { a, .. } => 2.0 * a,
            Curve::Power { coef, exponent, .. } => {
                let p = *exponent;
                let w = 1.0 + s * s;
                coef * p * w.powf(0.5 * p - 2.0) * (1.0 + (p - 1.0) * s * s)
            }
            Curve::Exponential { coef, rate, .. } => coef * rate * rate * (rate * s).exp(),
            Curve::HalfLinePower { coef, exponent } => {
                coef * exponent * (exponent - 1.0) * s.abs().powf(exponent - 2.0)
            }
            Curve::InversePower { coef, exponent } => {
                coef * exponent * (exponent + 1.0) * s.powf(-exponent - 2.0)
            }
            Curve::Tabulated(t) => t.curvature(s),
            Curve::Projective { base } => {
                let u = 1.0 / s;
                base.curvature(u) * u * u * u
            }
            Curve::Shifted { base, .. } => base.curvature(s),
        }
    }

    /// The open or closed interval on which the curve is defined.
    pub fn domain_interval(&self) -> (f64, f64) {
        match self {
            Curve::HalfLinePower { .. } | Curve::InversePower { .. } | Curve::Projective { .. } => {
                (0.0, f64::INFINITY)
            }
            Curve::Tabulated(t) => (t.s[0], t.s[t.s.len() - 1]),
            Curve::Shifted { base, .. } => base.domain_interval(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn shifted(&self, delta: f64) -> Curve {
        match self {
            Curve::Quadratic { a, b, c } => Curve::Quadratic { a: *a, b: *b, c: c + delta },
            Curve::Power { coef, exponent, shift } => Curve::Power {
                coef: *coef,
                exponent: *exponent,
                shift: shift + delta,
            },
            Curve::Exponential { coef, rate, shift } => Curve::Exponential {
                coef: *coef,
                rate: *rate,
                shift: shift + delta,
            },
            Curve::Shifted { base, delta: d } => Curve::Shifted {
                base: base.clone(),
                delta: d + delta,
            },
            other => Curve::Shifted {
                base: Box::new(other.clone()),
                delta,
            },
        }
    }

    pub fn projective(&self) -> Curve {
        match self {
            Curve::Projective { base } => (**base).clone(),
            other => Curve::Projective { base: Box::new(other.clone()) },
        }
    }
}

/// Samples `(s_i, v_i)` interpolated by a monotone (Fritsch–Carlson) cubic Hermite spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    tangents: Vec<f64>,
}

impl Tabulated {
    pub fn new(s: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if s.len() < 3 || s.len() != values.len() {
            return Err(Error::InvalidInput(
                "tabulated curve needs at least 3 samples and matching lengths".into(),
            ));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "tabulated curve abscissae must be strictly increasing".into(),
            ));
        }
        if values.iter().chain(&s).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("tabulated curve has non-finite samples".into()));
        }
        let tangents = fritsch_carlson(&s, &values);
        Ok(Tabulated { s, values, tangents })
    }

    fn tangents(&self) -> std::borrow::Cow<'_, [f64]> {
        if self.tangents.len() == self.s.len() {
            std::borrow::Cow::Borrowed(&self.tangents)
        } else {
            std::borrow::Cow::Owned(fritsch_carlson(&self.s, &self.values))
        }
    }

    fn locate(&self, s: f64) -> usize {
        let n = self.s.len();
        match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    // Hermite basis on [s_i, s_{i+1}] with t ∈ [0, 1]; outside the table the end cubic extrapolates.
    fn segment(&self, s: f64) -> (f64, f64, f64, f64, f64, f64) {
        let i = self.locate(s);
        let m = self.tangents();
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        (t, h, self.values[i], self.values[i + 1], m[i], m[i + 1])
    }

    pub fn eval(&self, s: f64) -> f64 {
        let (t, h, y0, y1, m0, m1) = self.segment(s);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1
    }

    pub fn slope(&self, s: f64) -> f64 {
        let (t, h, y0, y1, m0, m1) = self.segment(s);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1
    }

    pub fn curvature(&self, s: f64) -> f64 {
        let (t, h, y0, y1, m0, m1) = self.segment(s);
        ((12.0 * t - 6.0) * y0 + (6.0 - 12.0 * t) * y1) / (h * h)
            + ((6.0 * t - 4.0) * m0 + (6.0 * t - 2.0) * m1) / h
    }
}

fn fritsch_carlson(s: &[f64], y: &[f64]) -> Vec<f64> {
    let n = s.len();
    let secants: Vec<f64> = (0..n - 1)
        .map(|i| (y[i + 1] - y[i]) / (s[i + 1] - s[i]))
        .collect();
    let mut m = vec![0.0; n];
    m[0] = secants[0];
    m[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (secants[i - 1], secants[i]);
        m[i] = if a * b <= 0.0 { 0.0 } else { 0.5 * (a + b) };
    }
    for i in 0..n - 1 {
        let d = secants[i];
        if d == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d;
        let b = m[i + 1] / d;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * d;
            m[i + 1] = tau * b * d;
        }
    }
    m
}
