//! Closed-form eigenvalues of real 3x3 matrices.
//!
//! The matrix is first shifted by a third of its trace so the characteristic
//! polynomial is already depressed (`t^3 + p t + q`). This keeps clustered
//! eigenvalues near 1, the usual case for `J = I + rho * B` with small rho,
//! from losing accuracy to the shift in the cubic's coefficients.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

pub type Matrix3 = [[f64; 3]; 3];

/// Coefficients `(c2, c1, c0)` of the monic `det(xi I - m) = xi^3 + c2 xi^2 + c1 xi + c0`.
pub fn char_poly(m: &Matrix3) -> [f64; 3] {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    [-trace, minors, -det3(m)]
}

pub fn det3(m: &Matrix3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Evaluate `xi^3 + c2 xi^2 + c1 xi + c0` at a complex point.
pub fn eval_monic_cubic(c: &[f64; 3], xi: Complex64) -> Complex64 {
    ((xi + c[0]) * xi + c[1]) * xi + c[2]
}

/// Eigenvalues sorted by descending modulus; ties broken by real then imaginary part.
pub fn eigenvalues_3x3(m: &Matrix3) -> [Complex64; 3] {
    let shift = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let mut a = *m;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= shift;
    }
    let [_, p, q] = char_poly(&a);
    let mut roots = depressed_cubic_roots(p, q);
    for t in roots.iter_mut() {
        *t = polish(p, q, *t);
        *t += shift;
    }
    sort_eigenvalues(&mut roots);
    roots
}

pub fn sort_eigenvalues(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(Ordering::Equal)
            .then(a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal))
            .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });
}

/// Roots of `t^3 + p t + q`.
fn depressed_cubic_roots(p: f64, q: f64) -> [Complex64; 3] {
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let t1 = if p == 0.0 {
        (-q).cbrt()
    } else if disc > 0.0 {
        // one real root; pick the cube root that avoids cancellation
        let u = (-q / 2.0 - q.signum() * disc.sqrt()).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - p / (3.0 * u)
        }
    } else {
        let rad = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * rad)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let roots = [
            rad * phi.cos(),
            rad * (phi - 2.0 * PI / 3.0).cos(),
            rad * (phi - 4.0 * PI / 3.0).cos(),
        ];
        return roots.map(|t| Complex64::new(t, 0.0));
    };
    let t1 = newton_real(p, q, t1);
    // t^3 + p t + q = (t - t1)(t^2 + t1 t + t1^2 + p)
    let b = t1;
    let c = t1 * t1 + p;
    let half = -b / 2.0;
    let d = half * half - c;
    if d >= 0.0 {
        let sq = d.sqrt();
        // stable quadratic: larger-magnitude root first, then Vieta
        let big = if half >= 0.0 { half + sq } else { half - sq };
        let small = if big != 0.0 { c / big } else { 0.0 };
        [
            Complex64::new(t1, 0.0),
            Complex64::new(big, 0.0),
            Complex64::new(small, 0.0),
        ]
    } else {
        let im = (-d).sqrt();
        [
            Complex64::new(t1, 0.0),
            Complex64::new(half, im),
            Complex64::new(half, -im),
        ]
    }
}

fn newton_real(p: f64, q: f64, mut t: f64) -> f64 {
    for _ in 0..3 {
        let f = (t * t + p) * t + q;
        let df = 3.0 * t * t + p;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = t - f / df;
        if ((next * next + p) * next + q).abs() >= f.abs() {
            break;
        }
        t = next;
    }
    t
}

fn polish(p: f64, q: f64, mut t: Complex64) -> Complex64 {
    for _ in 0..2 {
        let f = (t * t + p) * t + q;
        let df = t * t * 3.0 + p;
        if df.norm() == 0.0 {
            break;
        }
        let next = t - f / df;
        let fn_ = (next * next + p) * next + q;
        if !(fn_.norm() < f.norm()) {
            break;
        }
        t = next;
    }
    t
}
