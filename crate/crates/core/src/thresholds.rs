//! Step-size thresholds for the stability of each fixed point.
//!
//! All closed-form thresholds have the shape `(c * alpha * Γ(alpha) / rate)^(1/alpha)`.
//! The last one, `s9`, has no closed form: it is the first zero of the cubic
//! Jury margin `(1 - A3^2) - |A2 - A3 A1|` along `s`, found numerically.

use std::fmt;

use crate::model::{
    basic_reproduction_number, fixed_point, order_scale, theta_threshold, Discretization,
    FixedPointKind, ModelParams,
};
use crate::stability::interior_coeffs_at;
use crate::{Error, Result};

/// Number of grid cells used to bracket `s9` before bisection.
pub const S9_GRID: usize = 1000;
/// Absolute bisection tolerance for `s9`.
pub const S9_TOL: f64 = 1e-6;

/// Outcome of the numeric `s9` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum S9 {
    /// First zero of the Jury margin.
    Found(f64),
    /// The margin stayed positive on the whole search interval `(0, s_max]`.
    AboveMax(f64),
    /// The interior point does not exist.
    Undefined,
}

impl S9 {
    pub fn value(&self) -> Option<f64> {
        match self {
            S9::Found(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for S9 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(4);
        match self {
            S9::Found(v) => write!(f, "{v:.prec$}"),
            S9::AboveMax(m) => write!(f, "> {m:.prec$}"),
            S9::Undefined => f.write_str("undefined"),
        }
    }
}

/// Closed-form stability window `(s5, min(s6, s7))` for the predator-free point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarWindow {
    pub lo: f64,
    pub hi: f64,
}

impl PlanarWindow {
    pub fn contains(&self, s: f64) -> bool {
        self.lo < s && s < self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    pub alpha: f64,
    pub r0: f64,
    pub theta1: Option<f64>,
    pub d1: Option<f64>,
    pub s2: Option<f64>,
    pub s3: Option<f64>,
    pub s4: Option<f64>,
    pub s5: Option<f64>,
    pub s6: Option<f64>,
    pub s7: Option<f64>,
    pub s8: Option<f64>,
    pub s9: S9,
    /// Upper end of the `s9` search interval.
    pub s9_search_max: Option<f64>,
    pub verdicts: Vec<String>,
}

impl ThresholdSet {
    /// Named closed-form entries in table order.
    pub fn entries(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("s2", self.s2),
            ("s3", self.s3),
            ("s4", self.s4),
            ("s5", self.s5),
            ("s6", self.s6),
            ("s7", self.s7),
            ("s8", self.s8),
        ]
    }

    /// `min(s2, s3, s4)` when the axial point can be stable.
    pub fn axial_bound(&self) -> Option<f64> {
        if self.r0 >= 1.0 {
            return None;
        }
        [self.s2, self.s3, self.s4]
            .into_iter()
            .flatten()
            .reduce(f64::min)
    }

    /// `min(s8, s9)`; falls back to `s8` when the margin stays positive up to the search limit.
    pub fn interior_bound(&self) -> Option<f64> {
        let s8 = self.s8?;
        Some(match self.s9 {
            S9::Found(v) => s8.min(v),
            _ => s8,
        })
    }
}

fn root_threshold(scale: f64, numer: f64, rate: f64, alpha: f64) -> Option<f64> {
    (rate > 0.0).then(|| (numer * scale / rate).powf(1.0 / alpha))
}

/// `d1 = theta r (lambda K - mu) / (a lambda (lambda K + r) + r (lambda K - mu))`, defined for `R0 > 1`.
pub fn d1(p: &ModelParams) -> Option<f64> {
    let lk = p.lambda * p.k;
    let excess = lk - p.mu;
    (excess > 0.0).then(|| p.theta * p.r * excess / (p.a * p.lambda * (lk + p.r) + p.r * excess))
}

/// The closed-form window for the predator-free point, defined when `R0 > 1` and `d > d1`.
pub fn planar_window(p: &ModelParams, alpha: f64) -> Option<PlanarWindow> {
    let scale = order_scale(alpha).ok()?;
    let lk = p.lambda * p.k;
    let excess = lk - p.mu;
    let d1 = d1(p)?;
    let s5 = root_threshold(scale, 1.0, excess, alpha)?;
    let s6 = root_threshold(scale, 2.0, p.d - d1, alpha)?;
    let s7 = s7(p, scale, alpha)?;
    Some(PlanarWindow {
        lo: s5,
        hi: s6.min(s7),
    })
}

fn s7(p: &ModelParams, scale: f64, alpha: f64) -> Option<f64> {
    let lk = p.lambda * p.k;
    let excess = lk - p.mu;
    (excess > 0.0).then(|| (lk * scale * scale / (p.mu * p.r * excess)).powf(1.0 / (2.0 * alpha)))
}

/// All thresholds at fractional order `alpha`, with `s9` searched on `(0, 2 min(s8, 1)]`.
pub fn thresholds(p: &ModelParams, alpha: f64) -> Result<ThresholdSet> {
    thresholds_with(p, alpha, None)
}

/// As [`thresholds`], with an explicit upper limit for the `s9` search.
pub fn thresholds_with(p: &ModelParams, alpha: f64, s9_max: Option<f64>) -> Result<ThresholdSet> {
    let scale = order_scale(alpha)?;
    let r0 = basic_reproduction_number(p);
    let lk = p.lambda * p.k;
    let d1 = d1(p);
    let interior = fixed_point(p, FixedPointKind::Interior);

    let s2 = root_threshold(scale, 2.0, p.d, alpha);
    let s3 = root_threshold(scale, 2.0, p.r, alpha);
    let s4 = root_threshold(scale, 2.0, p.mu - lk, alpha);
    let s5 = root_threshold(scale, 1.0, lk - p.mu, alpha);
    let s6 = d1.and_then(|d1| root_threshold(scale, 2.0, p.d - d1, alpha));
    let s7 = s7(p, scale, alpha);
    let s8 = interior
        .exists
        .then(|| root_threshold(scale, 2.0 * p.k, p.r * interior.coords.x, alpha))
        .flatten();

    let (s9, s9_search_max) = match s8 {
        Some(s8) => {
            let s_max = s9_max.unwrap_or(2.0 * s8.min(1.0));
            (find_s9(p, alpha, s_max)?, Some(s_max))
        }
        None => (S9::Undefined, None),
    };

    let mut set = ThresholdSet {
        alpha,
        r0,
        theta1: theta_threshold(p),
        d1,
        s2,
        s3,
        s4,
        s5,
        s6,
        s7,
        s8,
        s9,
        s9_search_max,
        verdicts: Vec::new(),
    };
    set.verdicts = verdicts(&set, p);
    Ok(set)
}

fn verdicts(t: &ThresholdSet, p: &ModelParams) -> Vec<String> {
    let mut out = vec!["E0: unstable for every alpha and s".to_string()];
    out.push(if t.r0 < 1.0 {
        match t.axial_bound() {
            Some(b) => format!("E1: stable for s < min(s2, s3, s4) = {b:.4}"),
            None => "E1: no step-size bound".to_string(),
        }
    } else if t.r0 > 1.0 {
        "E1: unstable for every s (R0 > 1)".to_string()
    } else {
        "E1: non-hyperbolic (R0 = 1)".to_string()
    });
    out.push(match (t.r0 > 1.0, t.d1) {
        (false, _) | (_, None) => "E2: does not exist (R0 <= 1)".to_string(),
        (true, Some(d1)) if p.d > d1 => match planar_window(p, t.alpha) {
            Some(w) => format!(
                "E2: stable for s5 < s < min(s6, s7), i.e. {:.4} < s < {:.4}",
                w.lo, w.hi
            ),
            None => "E2: window undefined".to_string(),
        },
        (true, Some(_)) => "E2: unstable for every s (d <= d1)".to_string(),
    });
    out.push(match t.interior_bound() {
        Some(b) => match t.s9 {
            S9::AboveMax(m) => {
                format!("E*: stable for s < s8 = {b:.4} (Jury margin positive up to {m:.4})")
            }
            _ => format!("E*: stable for s < min(s8, s9) = {b:.4}"),
        },
        None => "E*: does not exist".to_string(),
    });
    out
}

/// First zero of the cubic Jury margin on `(0, s_max]`.
///
/// The margin is sampled on a uniform grid of [`S9_GRID`] cells and the first
/// cell where it stops being positive is bisected to [`S9_TOL`].
pub fn find_s9(p: &ModelParams, alpha: f64, s_max: f64) -> Result<S9> {
    order_scale(alpha)?;
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s_max",
            value: s_max,
            reason: "search limit must be finite and positive",
        });
    }
    let e = fixed_point(p, FixedPointKind::Interior);
    if !e.exists {
        return Err(Error::NotExisting(e.kind.label()));
    }
    let margin = |s: f64| -> f64 {
        let rho = Discretization::new(alpha, s).expect("validated").rho();
        interior_coeffs_at(p, rho, &e.coords).jury_margin()
    };

    let dx = s_max / S9_GRID as f64;
    // The margin vanishes at s = 0 and is lost to cancellation for tiny s,
    // so the scan starts at the first grid node. A non-positive margin there
    // is traced back by halving until it turns positive.
    if margin(dx) <= 0.0 {
        let mut hi = dx;
        for _ in 0..40 {
            let lo = 0.5 * hi;
            if margin(lo) > 0.0 {
                return Ok(S9::Found(bisect(&margin, lo, hi)));
            }
            hi = lo;
        }
        return Ok(S9::Found(hi));
    }
    let mut lo = dx;
    for i in 2..=S9_GRID {
        let hi = if i == S9_GRID { s_max } else { dx * i as f64 };
        if margin(hi) <= 0.0 {
            return Ok(S9::Found(bisect(&margin, lo, hi)));
        }
        lo = hi;
    }
    Ok(S9::AboveMax(s_max))
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > S9_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1_set() -> ModelParams {
        ModelParams::new(2.0, 40.0, 0.005, 0.52, 0.28, 15.0, 0.189, 0.09).unwrap()
    }

    fn e2_set() -> ModelParams {
        ModelParams::new(2.0, 200.0, 0.015, 0.52, 0.28, 15.0, 0.08, 0.09).unwrap()
    }

    fn example2() -> ModelParams {
        ModelParams::new(15.0, 40.0, 0.006, 14.5, 0.0019, 16.0, 11.1, 6.0).unwrap()
    }

    fn example3() -> ModelParams {
        ModelParams::new(22.0, 300.0, 0.06, 15.5, 2.3, 15.0, 10.0, 8.3).unwrap()
    }

    #[test]
    fn axial_row() {
        let t = thresholds(&e1_set(), 0.8).unwrap();
        assert!((t.s2.unwrap() - 44.1464).abs() < 5e-4);
        assert!((t.s3.unwrap() - 0.9150).abs() < 5e-4);
        assert!((t.s4.unwrap() - 51.1488).abs() < 5e-4);
        assert_eq!(t.s5, None);
        assert_eq!(t.s8, None);
        assert_eq!(t.s9, S9::Undefined);
        assert!((t.axial_bound().unwrap() - t.s3.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn planar_row() {
        let t = thresholds(&e2_set(), 0.3).unwrap();
        assert!((t.s5.unwrap() - 0.0248).abs() < 5e-4);
        assert!((t.s6.unwrap() / 1_835_600.0 - 1.0).abs() < 5e-3);
        assert!((t.s7.unwrap() - 2.1578).abs() < 5e-4);
        assert_eq!(t.s4, None);
    }

    #[test]
    fn unit_order_step_equals_two_over_r() {
        let t = thresholds(&e1_set(), 1.0).unwrap();
        assert_eq!(t.s3, Some(1.0));
    }

    #[test]
    fn interior_rows() {
        let t = thresholds(&example2(), 0.95).unwrap();
        assert!((t.s8.unwrap() - 0.2327).abs() < 5e-4);
        let t = thresholds(&example2(), 0.4).unwrap();
        assert!((t.s8.unwrap() - 0.0245).abs() < 5e-4);
        assert!((t.s9.value().unwrap() - 0.00538).abs() < 5e-4);
    }

    #[test]
    fn s9_known_bounds() {
        let s9 = |p: &ModelParams, a: f64| {
            let s8 = thresholds(p, a).unwrap().s8.unwrap();
            find_s9(p, a, 2.0 * s8.min(1.0)).unwrap().value().unwrap()
        };
        assert!((s9(&example2(), 0.8) - 0.07798).abs() < 1e-4);
        assert!((s9(&example3(), 0.85) - 0.0150).abs() < 5e-4);
        assert!((s9(&example3(), 0.45) - 0.0003).abs() < 2e-4);
    }

    #[test]
    fn s9_requires_interior_point() {
        assert_eq!(find_s9(&e1_set(), 0.8, 1.0), Err(Error::NotExisting("E*")));
        assert!(find_s9(&example2(), 0.8, 0.0).is_err());
    }

    #[test]
    fn s9_above_search_limit() {
        assert_eq!(find_s9(&example2(), 0.8, 0.05).unwrap(), S9::AboveMax(0.05));
    }

    #[test]
    fn defined_thresholds_positive() {
        for p in [e1_set(), e2_set(), example2(), example3()] {
            for alpha in [0.3, 0.5, 0.8, 1.0] {
                let t = thresholds(&p, alpha).unwrap();
                for (name, v) in t.entries() {
                    if let Some(v) = v {
                        assert!(v > 0.0, "{name}");
                    }
                }
                if let Some(v) = t.s9.value() {
                    assert!(v > 0.0);
                }
            }
        }
    }

    #[test]
    fn verdict_text() {
        let t = thresholds(&e1_set(), 0.8).unwrap();
        assert!(t.verdicts[1].contains("0.9150"));
        let t = thresholds(&example2(), 0.8).unwrap();
        assert!(t.verdicts[1].contains("unstable"));
        assert!(t.verdicts[3].contains("0.0780"));
    }
}
