//! Scalar fields on chart domains.

use std::fmt;
use std::sync::Arc;

use crate::error::{GjmsError, Result};
use crate::numerics::dot;

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Axis-aligned box `∏ [lo_i, hi_i]`; `None` bounds mean the whole axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; n], hi: vec![half_width; n] }
    }

    /// True when the cube of half-width `reach` around `x` fits inside.
    pub fn contains_with_margin(&self, x: &[f64], reach: f64) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (lo, hi))| v - reach >= *lo && v + reach <= *hi)
    }
}

/// A smooth real function on (a box of) ℝⁿ, cheaply clonable.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<Eval>,
    domain: Option<BoxDomain>,
    name: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ScalarField {
    pub fn new(name: impl Into<String>, eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(eval), domain: None, name: name.into() }
    }

    pub fn with_domain(mut self, domain: BoxDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Option<&BoxDomain> {
        self.domain.as_ref()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Closure view, handy for the finite-difference routines.
    pub fn as_fn(&self) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x| (self.eval)(x)
    }

    /// Fails when a stencil of half-width `reach` around `x` leaves the domain.
    pub fn check_stencil(&self, x: &[f64], reach: f64) -> Result<()> {
        match &self.domain {
            Some(d) if !d.contains_with_margin(x, reach) => Err(GjmsError::OutOfDomain(x.to_vec())),
            _ => Ok(()),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c)
    }

    /// Conformal exponent `ln(2/(1+|x|²))` of the round metric in a
    /// stereographic chart of Sⁿ.
    pub fn round_chart(n: usize) -> Self {
        Self::new(format!("round_chart({n})"), |x| (2.0 / (1.0 + dot(x, x))).ln())
    }

    /// `exp(-a |x|²)`.
    pub fn gaussian(a: f64) -> Self {
        Self::new(format!("gaussian({a})"), move |x| (-a * dot(x, x)).exp())
    }

    /// Radial bump `exp(1 − 1/(1 − |x|²/ρ²))`, equal to 1 at the origin and
    /// supported in the closed ball of radius `ρ`.
    pub fn bump(radius: f64) -> Self {
        let inv = 1.0 / (radius * radius);
        Self::new(format!("bump({radius})"), move |x| {
            let s = dot(x, x) * inv;
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - 1.0 / (1.0 - s)).exp()
            }
        })
    }

    /// Polynomial cutoff `(1 − |x|²/ρ²)^m` on the ball of radius `ρ`, zero
    /// outside. It is `C^{m−1}`, and its stencil error is much smaller than
    /// the bump's, whose derivatives grow without bound near the edge.
    pub fn cutoff(radius: f64, power: u32) -> Self {
        let inv = 1.0 / (radius * radius);
        Self::new(format!("cutoff({radius},{power})"), move |x| {
            let s = dot(x, x) * inv;
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - s).powi(power as i32)
            }
        })
    }

    /// Even radial polynomial `Σ_j c_j |x|^{2j}`.
    pub fn poly(coeffs: Vec<f64>) -> Self {
        let name = format!("poly({coeffs:?})");
        Self::new(name, move |x| {
            let r2 = dot(x, x);
            coeffs.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
        })
    }

    /// Pointwise product.
    pub fn times(&self, other: &ScalarField) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self {
            eval: Arc::new(move |x| a(x) * b(x)),
            domain: intersect(&self.domain, &other.domain),
            name: format!("({})*({})", self.name, other.name),
        }
    }

    /// `self + s · ln(other)`.
    pub fn plus_scaled_log(&self, other: &ScalarField, s: f64) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self {
            eval: Arc::new(move |x| a(x) + s * b(x).ln()),
            domain: intersect(&self.domain, &other.domain),
            name: format!("{} + {s}*ln({})", self.name, other.name),
        }
    }

    /// `a · self + b · other`.
    pub fn linear_combination(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self {
            eval: Arc::new(move |x| a * f(x) + b * g(x)),
            domain: intersect(&self.domain, &other.domain),
            name: format!("{a}*({}) + {b}*({})", self.name, other.name),
        }
    }

    /// Parses the named fields `round_chart(n)`, `gaussian(a)`,
    /// `bump(radius)`, `cutoff(radius,power)`, `poly(c0,c1,...)` and
    /// `const(c)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = spec
            .split_once('(')
            .ok_or_else(|| GjmsError::Parse(format!("expected name(args), got {spec:?}")))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| GjmsError::Parse(format!("missing ')' in {spec:?}")))?;
        let nums: Vec<f64> = args
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|e| GjmsError::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        let one = |what: &str| -> Result<f64> {
            match nums.as_slice() {
                [v] => Ok(*v),
                _ => Err(GjmsError::Parse(format!("{what} takes one argument"))),
            }
        };
        match head.trim() {
            "round_chart" => {
                let n = one("round_chart")?;
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(GjmsError::Parse(format!("round_chart dimension {n}")));
                }
                Ok(Self::round_chart(n as usize))
            }
            "gaussian" => Ok(Self::gaussian(one("gaussian")?)),
            "bump" => {
                let r = one("bump")?;
                if r <= 0.0 {
                    return Err(GjmsError::Parse(format!("bump radius {r}")));
                }
                Ok(Self::bump(r))
            }
            "cutoff" => match nums.as_slice() {
                [r, m] if *r > 0.0 && *m >= 1.0 && m.fract() == 0.0 => Ok(Self::cutoff(*r, *m as u32)),
                _ => Err(GjmsError::Parse(format!("cutoff takes a radius and a positive integer power, got {args:?}"))),
            },
            "const" => Ok(Self::constant(one("const")?)),
            "poly" if !nums.is_empty() => Ok(Self::poly(nums)),
            other => Err(GjmsError::Parse(format!("unknown field {other:?}"))),
        }
    }
}

fn intersect(a: &Option<BoxDomain>, b: &Option<BoxDomain>) -> Option<BoxDomain> {
    match (a, b) {
        (None, None) => None,
        (Some(d), None) | (None, Some(d)) => Some(d.clone()),
        (Some(a), Some(b)) => Some(BoxDomain {
            lo: a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect(),
            hi: a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect(),
        }),
    }
}
