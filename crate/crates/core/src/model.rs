//! Model parameters, the discrete map, and its fixed points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{gamma_fn, Error, Result};

/// The eight ecological parameters of the predator-prey-parasite model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Intrinsic growth rate of susceptible prey (per day).
    pub r: f64,
    /// Carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Force of infection.
    pub lambda: f64,
    /// Maximum predator attack rate.
    pub m: f64,
    /// Total death rate of infected prey.
    pub mu: f64,
    /// Half-saturation constant.
    pub a: f64,
    /// Predator reproductive gain. Only positivity is required.
    pub theta: f64,
    /// Predator death rate.
    pub d: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        k: f64,
        lambda: f64,
        m: f64,
        mu: f64,
        a: f64,
        theta: f64,
        d: f64,
    ) -> Result<Self> {
        let p = Self {
            r,
            k,
            lambda,
            m,
            mu,
            a,
            theta,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r", self.r),
            ("K", self.k),
            ("lambda", self.lambda),
            ("m", self.m),
            ("mu", self.mu),
            ("a", self.a),
            ("theta", self.theta),
            ("d", self.d),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }
}

/// Fractional order and step-size, with the cached map coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    alpha: f64,
    s: f64,
    rho: f64,
}

impl Discretization {
    pub fn new(alpha: f64, s: f64) -> Result<Self> {
        let scale = order_scale(alpha)?;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                reason: "step-size must be finite and strictly positive",
            });
        }
        let rho = if alpha == 1.0 {
            s
        } else {
            s.powf(alpha) / scale
        };
        Ok(Self { alpha, s, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `s^alpha / (alpha Γ(alpha))`.
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// `alpha * Γ(alpha)`, the factor shared by ρ and every step-size threshold.
pub fn order_scale(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "fractional order must lie in (0, 1]",
        });
    }
    Ok(alpha * gamma_fn(alpha)?)
}

/// Population triple.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Infinity-norm distance.
    pub fn dist(&self, other: &State) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for State {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "({:.p$}, {:.p$}, {:.p$})", self.x, self.y, self.z),
            None => write!(f, "({}, {}, {})", self.x, self.y, self.z),
        }
    }
}

/// Per-capita growth rates (the bracketed factors of the vector field).
#[inline]
fn per_capita(p: &ModelParams, st: &State) -> [f64; 3] {
    let sat = st.y / (p.a + st.y);
    [
        p.r * (1.0 - (st.x + st.y) / p.k) - p.lambda * st.y,
        p.lambda * st.x - p.m * st.z / (p.a + st.y) - p.mu,
        p.theta * sat - p.d,
    ]
}

/// Right-hand side of the underlying continuous system.
pub fn vector_field(p: &ModelParams, st: &State) -> State {
    let g = per_capita(p, st);
    State::new(st.x * g[0], st.y * g[1], st.z * g[2])
}

/// One iteration of the discrete map.
///
/// The infected-prey update uses the Holling denominator `a + Y`, the same
/// as the continuous model, the Jacobian and the fixed-point relations.
/// Non-finite output is returned as is; callers detect divergence.
#[inline]
pub fn step(p: &ModelParams, dsc: &Discretization, st: &State) -> State {
    let rho = dsc.rho();
    let g = per_capita(p, st);
    State::new(
        st.x + rho * (st.x * g[0]),
        st.y + rho * (st.y * g[1]),
        st.z + rho * (st.z * g[2]),
    )
}

/// `R0 = lambda K / mu`.
pub fn basic_reproduction_number(p: &ModelParams) -> f64 {
    p.lambda * p.k / p.mu
}

/// Predator-gain threshold for the interior point; `None` when `R0 <= 1`.
pub fn theta_threshold(p: &ModelParams) -> Option<f64> {
    let excess = p.lambda * p.k - p.mu;
    if excess <= 0.0 {
        return None;
    }
    Some(p.d + p.lambda * p.a * p.d * (p.r + p.lambda * p.k) / (p.r * excess))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedPointKind {
    /// E0, the origin.
    Trivial,
    /// E1, prey at carrying capacity.
    Axial,
    /// E2, predator-free.
    Planar,
    /// E*, coexistence.
    Interior,
}

impl FixedPointKind {
    pub const ALL: [FixedPointKind; 4] = [Self::Trivial, Self::Axial, Self::Planar, Self::Interior];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Trivial => "E0",
            Self::Axial => "E1",
            Self::Planar => "E2",
            Self::Interior => "E*",
        }
    }
}

impl fmt::Display for FixedPointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub kind: FixedPointKind,
    pub coords: State,
    pub exists: bool,
    /// Which existence condition failed, empty when the point exists.
    pub existence_note: String,
}

/// All four fixed-point candidates, in the order E0, E1, E2, E*.
///
/// Coordinates are filled in even for non-existing candidates whenever the
/// formulas are defined; otherwise they are NaN.
pub fn fixed_points(p: &ModelParams) -> Vec<FixedPoint> {
    let r0 = basic_reproduction_number(p);
    let mut out = Vec::with_capacity(4);

    out.push(FixedPoint {
        kind: FixedPointKind::Trivial,
        coords: State::new(0.0, 0.0, 0.0),
        exists: true,
        existence_note: String::new(),
    });
    out.push(FixedPoint {
        kind: FixedPointKind::Axial,
        coords: State::new(p.k, 0.0, 0.0),
        exists: true,
        existence_note: String::new(),
    });

    let lk = p.lambda * p.k;
    let planar = State::new(
        p.mu / p.lambda,
        p.r * (lk - p.mu) / (p.lambda * (p.r + lk)),
        0.0,
    );
    let (exists, note) = if r0 > 1.0 {
        (true, String::new())
    } else {
        (false, format!("R0 = {r0} <= 1"))
    };
    out.push(FixedPoint {
        kind: FixedPointKind::Planar,
        coords: planar,
        exists,
        existence_note: note,
    });

    out.push(interior_point(p, r0));
    out
}

fn interior_point(p: &ModelParams, r0: f64) -> FixedPoint {
    let kind = FixedPointKind::Interior;
    if p.theta <= p.d {
        return FixedPoint {
            kind,
            coords: State::new(f64::NAN, f64::NAN, f64::NAN),
            exists: false,
            existence_note: format!("theta = {} <= d = {}", p.theta, p.d),
        };
    }
    let y = p.a * p.d / (p.theta - p.d);
    let x = p.k - (1.0 + p.lambda * p.k / p.r) * y;
    let z = (p.a + y) * (p.lambda * x - p.mu) / p.m;
    let coords = State::new(x, y, z);

    let mut failed = Vec::new();
    if r0 <= 1.0 {
        failed.push(format!("R0 = {r0} <= 1"));
    }
    match theta_threshold(p) {
        Some(t1) if p.theta > t1 => {}
        Some(t1) => failed.push(format!("theta = {} <= theta1 = {t1}", p.theta)),
        None => {}
    }
    if failed.is_empty() && !(x > 0.0 && z > 0.0) {
        failed.push("non-positive coordinate".to_string());
    }
    FixedPoint {
        kind,
        coords,
        exists: failed.is_empty(),
        existence_note: failed.join("; "),
    }
}

/// The fixed point of a given kind.
pub fn fixed_point(p: &ModelParams, kind: FixedPointKind) -> FixedPoint {
    fixed_points(p)
        .into_iter()
        .find(|fp| fp.kind == kind)
        .expect("all kinds are always listed")
}
