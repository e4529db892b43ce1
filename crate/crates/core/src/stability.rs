//! Jacobian of the map, eigenvalue classification and Jury tests.

use std::fmt;

use num_complex::Complex64;

use crate::eigen::{char_poly, eigenvalues_3x3, Matrix3};
use crate::model::{fixed_point, Discretization, FixedPoint, FixedPointKind, ModelParams, State};
use crate::thresholds::planar_window;
use crate::{Error, Result};

/// Distance of an eigenvalue modulus from 1 below which a point is non-hyperbolic.
pub const UNIT_CIRCLE_TOL: f64 = 1e-10;

/// Jacobian of the map; entries (1,3) and (3,1) are structurally zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianMatrix {
    pub entries: Matrix3,
}

impl JacobianMatrix {
    /// Apply to a tangent vector.
    #[inline]
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let e = &self.entries;
        [
            e[0][0] * v[0] + e[0][1] * v[1],
            e[1][0] * v[0] + e[1][1] * v[1] + e[1][2] * v[2],
            e[2][1] * v[1] + e[2][2] * v[2],
        ]
    }

    pub fn eigenvalues(&self) -> [Complex64; 3] {
        eigenvalues_3x3(&self.entries)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()[0].norm()
    }
}

pub fn jacobian(p: &ModelParams, dsc: &Discretization, st: &State) -> Result<JacobianMatrix> {
    let denom = p.a + st.y;
    if denom == 0.0 {
        return Err(Error::SingularJacobian(st.y));
    }
    Ok(jacobian_unchecked(p, dsc.rho(), st))
}

#[inline]
pub(crate) fn jacobian_unchecked(p: &ModelParams, rho: f64, st: &State) -> JacobianMatrix {
    let (x, y, z) = (st.x, st.y, st.z);
    let ay = p.a + y;
    let ay2 = ay * ay;
    let a11 = 1.0 + rho * (p.r * (1.0 - (2.0 * x + y) / p.k) - p.lambda * y);
    let a12 = -rho * x * (p.lambda + p.r / p.k);
    let a21 = rho * p.lambda * y;
    let a22 = 1.0 + rho * (p.lambda * x - p.m * z / ay - p.mu) + rho * p.m * y * z / ay2;
    let a23 = -rho * p.m * y / ay;
    let a32 = rho * p.a * p.theta * z / ay2;
    let a33 = 1.0 + rho * (p.theta * y / ay - p.d);
    JacobianMatrix {
        entries: [[a11, a12, 0.0], [a21, a22, a23], [0.0, a32, a33]],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Sink,
    Source,
    Saddle,
    NonHyperbolic,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Sink => "sink",
            Self::Source => "source",
            Self::Saddle => "saddle",
            Self::NonHyperbolic => "non-hyperbolic",
        };
        f.write_str(s)
    }
}

/// Class of a fixed point from its eigenvalue moduli.
pub fn classify_moduli(moduli: &[f64]) -> Classification {
    if moduli.iter().any(|m| (m - 1.0).abs() < UNIT_CIRCLE_TOL) {
        Classification::NonHyperbolic
    } else if moduli.iter().all(|&m| m < 1.0) {
        Classification::Sink
    } else if moduli.iter().all(|&m| m > 1.0) {
        Classification::Source
    } else {
        Classification::Saddle
    }
}

/// One inequality of a Jury test, held when `margin > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JuryCondition {
    pub name: &'static str,
    pub margin: f64,
}

impl JuryCondition {
    pub fn holds(&self) -> bool {
        self.margin > 0.0
    }
}

/// Jury conditions for `xi^3 + a1 xi^2 + a2 xi + a3`.
pub fn jury_cubic(a1: f64, a2: f64, a3: f64) -> [JuryCondition; 3] {
    [
        JuryCondition {
            name: "p(1) > 0",
            margin: 1.0 + a1 + a2 + a3,
        },
        JuryCondition {
            name: "(-1)^3 p(-1) > 0",
            margin: 1.0 - a1 + a2 - a3,
        },
        JuryCondition {
            name: "1 - A3^2 > |A2 - A3 A1|",
            margin: (1.0 - a3 * a3) - (a2 - a3 * a1).abs(),
        },
    ]
}

/// Jury test for the quadratic `xi^2 - t xi + det`.
pub fn jury_quadratic(trace: f64, det: f64) -> [JuryCondition; 2] {
    [
        JuryCondition {
            name: "a2 < 1",
            margin: 1.0 - det,
        },
        JuryCondition {
            name: "1 + a2 > |a1|",
            margin: 1.0 + det - trace.abs(),
        },
    ]
}

/// The predator-free point's quadratic factor `xi^2 + A xi + B` in the form
/// behind the closed-form step-size window, with its Jury test.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFactorCheck {
    pub a: f64,
    pub b: f64,
    pub conditions: [JuryCondition; 2],
    /// Whether `s` lies in the window `s5 < s < min(s6, s7)` with `d > d1`.
    pub in_factor_window: bool,
    /// Eigenvalue verdict at the same point.
    pub eigen_sink: bool,
}

impl PlanarFactorCheck {
    pub fn disagrees(&self) -> bool {
        self.in_factor_window != self.eigen_sink
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub kind: FixedPointKind,
    pub coords: State,
    pub eigenvalues: [Complex64; 3],
    pub moduli: [f64; 3],
    pub classification: Classification,
    /// Cubic Jury conditions on the characteristic polynomial.
    pub jury: [JuryCondition; 3],
    /// Only for the planar point.
    pub planar_factor: Option<PlanarFactorCheck>,
}

impl StabilityReport {
    pub fn jury_stable(&self) -> bool {
        self.jury.iter().all(JuryCondition::holds)
    }

    pub fn is_sink(&self) -> bool {
        self.classification == Classification::Sink
    }
}

pub fn classify(p: &ModelParams, dsc: &Discretization, fp: &FixedPoint) -> Result<StabilityReport> {
    if !fp.exists {
        return Err(Error::NotExisting(fp.kind.label()));
    }
    let jac = jacobian(p, dsc, &fp.coords)?;
    let eigenvalues = jac.eigenvalues();
    let moduli = eigenvalues.map(|e| e.norm());
    let classification = classify_moduli(&moduli);

    let [a1, a2, a3] = if fp.kind == FixedPointKind::Interior {
        let c = interior_char_coeffs(p, dsc)?;
        [c.a1, c.a2, c.a3]
    } else {
        char_poly(&jac.entries)
    };
    let jury = jury_cubic(a1, a2, a3);

    let planar_factor = (fp.kind == FixedPointKind::Planar).then(|| {
        let rho = dsc.rho();
        let lk = p.lambda * p.k;
        let a = rho * p.r * p.mu / lk - 1.0;
        let b = rho * rho * p.r * p.mu * (lk - p.mu) / lk;
        PlanarFactorCheck {
            a,
            b,
            conditions: jury_quadratic(-a, b),
            in_factor_window: planar_window(p, dsc.alpha())
                .map(|w| w.contains(dsc.s()))
                .unwrap_or(false),
            eigen_sink: classification == Classification::Sink,
        }
    });

    Ok(StabilityReport {
        kind: fp.kind,
        coords: fp.coords,
        eigenvalues,
        moduli,
        classification,
        jury,
        planar_factor,
    })
}

/// Closed-form characteristic coefficients at the interior point, with the
/// closed forms of `p(1)` and `(-1)^3 p(-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub p_at_one: f64,
    pub minus_p_at_minus_one: f64,
}

impl InteriorCoefficients {
    pub fn jury(&self) -> [JuryCondition; 3] {
        jury_cubic(self.a1, self.a2, self.a3)
    }

    /// `(1 - A3^2) - |A2 - A3 A1|`.
    pub fn jury_margin(&self) -> f64 {
        (1.0 - self.a3 * self.a3) - (self.a2 - self.a3 * self.a1).abs()
    }
}

pub fn interior_char_coeffs(p: &ModelParams, dsc: &Discretization) -> Result<InteriorCoefficients> {
    let fp = fixed_point(p, FixedPointKind::Interior);
    if !fp.exists {
        return Err(Error::NotExisting(fp.kind.label()));
    }
    Ok(interior_coeffs_at(p, dsc.rho(), &fp.coords))
}

pub(crate) fn interior_coeffs_at(p: &ModelParams, rho: f64, e: &State) -> InteriorCoefficients {
    let (x, y, z) = (e.x, e.y, e.z);
    let ay2 = (p.a + y) * (p.a + y);
    let h = rho;
    let h2 = h * h;
    // a11 = 1 - h*b1, a22 = 1 + h*b2, a23*a32 = -h^2 c, a12*a21 = -h^2 q
    let b1 = p.r * x / p.k;
    let b2 = p.m * y * z / ay2;
    let c = p.a * p.m * p.d * z / ay2;
    let q = x * y * (p.r * p.lambda / p.k + p.lambda * p.lambda);
    let b12 = p.r * p.m * x * y * z / (p.k * ay2);

    let a1 = h * b1 - h * b2 - 3.0;
    let a2 = 3.0 + 2.0 * h * (b2 - b1) + h2 * (c - b12) + h2 * q;
    let det = (1.0 - h * b1) * (1.0 + h * b2 + h2 * c) + h2 * q;
    let a3 = -det;

    let p_at_one = h2 * h * p.a * p.d * p.r * p.m * x * z / (p.k * ay2);
    let minus_p_at_minus_one = 4.0 * (2.0 - h * b1)
        + h * p.m * z / ay2 * (h * p.a * p.d + 2.0 * y) * (2.0 - h * b1)
        + 2.0 * h2 * q;

    InteriorCoefficients {
        a1,
        a2,
        a3,
        p_at_one,
        minus_p_at_minus_one,
    }
}
