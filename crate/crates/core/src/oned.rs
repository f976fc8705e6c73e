//! One-dimensional square barrier on `[0, 1]` solved with the R-matrix.
//!
//! Inside the barrier the Neumann basis `1, √2 cos(mπx)` has energies `V0 + m²π²`, so
//!
//! ```text
//! R_rr = R_ll = 1/(E - V0) + Σ_m 2 / (E - V0 - m²π²)
//! R_rl = R_lr = 1/(E - V0) + Σ_m 2 (-1)^m / (E - V0 - m²π²)
//! ```
//!
//! and `S = Φ (1 - ikR)(1 + ikR)^{-1} Φ` with `Φ = diag(1, e^{-ik})`.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::leads::POLE_TOL;

pub const DEFAULT_TRUNCATION: usize = 1000;

/// Analytic transmission through a barrier of height `v0` and unit length.
///
/// Below the barrier `sin` continues to `sinh`; at `E = V0` the limit `T = 1/(1 + V0²/4E)` is used.
pub fn exact_transmission(energy: f64, v0: f64) -> f64 {
    let d = energy - v0;
    // sin²(k₂)/(E - V0), continued through E = V0
    let ratio = if d.abs() < 1e-12 * energy.max(1.0) {
        1.0
    } else if d > 0.0 {
        d.sqrt().sin().powi(2) / d
    } else {
        (-d).sqrt().sinh().powi(2) / -d
    };
    1.0 / (1.0 + v0 * v0 * ratio / (4.0 * energy))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierProblem {
    pub v0: f64,
    pub m_trunc: usize,
}

impl BarrierProblem {
    pub fn new(v0: f64, m_trunc: usize) -> Result<Self> {
        if !(v0 >= 0.0) || !v0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "V0 must be >= 0, got {v0}"
            )));
        }
        if m_trunc == 0 {
            return Err(Error::InvalidParameter("m_trunc must be >= 1".into()));
        }
        Ok(BarrierProblem { v0, m_trunc })
    }

    /// `V0 + m²π²` for `m = 0..=m_trunc`.
    pub fn poles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.m_trunc).map(|m| self.v0 + (m as f64 * PI).powi(2))
    }

    pub fn nearest_pole(&self, energy: f64) -> f64 {
        let m = ((energy - self.v0).max(0.0).sqrt() / PI).round() as usize;
        let m = m.min(self.m_trunc);
        let cands = [m.saturating_sub(1), m, (m + 1).min(self.m_trunc)];
        cands
            .iter()
            .map(|&m| self.v0 + (m as f64 * PI).powi(2))
            .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
            .unwrap()
    }

    /// `[[R_ll, R_lr], [R_rl, R_rr]]`.
    pub fn r_matrix(&self, energy: f64) -> Result<[[f64; 2]; 2]> {
        if !(energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "E must be > 0, got {energy}"
            )));
        }
        let pole = self.nearest_pole(energy);
        if (energy - pole).abs() < POLE_TOL * energy {
            return Err(Error::NearPole {
                energy,
                pole,
                distance: (energy - pole).abs(),
            });
        }
        let d = energy - self.v0;
        let (mut same, mut cross) = (0.0, 0.0);
        for m in (1..=self.m_trunc).rev() {
            let term = 2.0 / (d - (m as f64 * PI).powi(2));
            same += term;
            cross += if m % 2 == 0 { term } else { -term };
        }
        same += 1.0 / d;
        cross += 1.0 / d;
        Ok([[same, cross], [cross, same]])
    }

    pub fn s_matrix(&self, energy: f64) -> Result<[[c64; 2]; 2]> {
        let r = self.r_matrix(energy)?;
        Ok(s_from_r(&r, energy.sqrt()))
    }
}

fn inverse2(m: [[c64; 2]; 2]) -> [[c64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn mul2(a: [[c64; 2]; 2], b: [[c64; 2]; 2]) -> [[c64; 2]; 2] {
    let mut out = [[c64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `Φ (1 - ikR)(1 + ikR)^{-1} Φ` for an arbitrary 2×2 `R`.
pub fn s_from_r(r: &[[f64; 2]; 2], k: f64) -> [[c64; 2]; 2] {
    let one = c64::new(1.0, 0.0);
    let ikr = |i: usize, j: usize| c64::new(0.0, k * r[i][j]);
    let eye = |i: usize, j: usize| if i == j { one } else { c64::new(0.0, 0.0) };
    let minus = [
        [eye(0, 0) - ikr(0, 0), -ikr(0, 1)],
        [-ikr(1, 0), eye(1, 1) - ikr(1, 1)],
    ];
    let plus = [
        [eye(0, 0) + ikr(0, 0), ikr(0, 1)],
        [ikr(1, 0), eye(1, 1) + ikr(1, 1)],
    ];
    let core = mul2(minus, inverse2(plus));
    let phase = [one, c64::cis(-k)];
    let mut s = core;
    for i in 0..2 {
        for j in 0..2 {
            s[i][j] = phase[i] * core[i][j] * phase[j];
        }
    }
    s
}

pub fn transmission_from_s(s: &[[c64; 2]; 2]) -> f64 {
    s[1][0].norm_sqr()
}

pub fn rmatrix_transmission(energy: f64, prob: &BarrierProblem) -> Result<f64> {
    Ok(transmission_from_s(&prob.s_matrix(energy)?))
}

/// Transmitted amplitude `t` for `ψ = e^{ikx} + r e^{-ikx}` left of the barrier and
/// `t e^{ikx}` right of it.
pub fn exact_amplitude(energy: f64, v0: f64) -> c64 {
    let k = energy.sqrt();
    let q = c64::new(energy - v0, 0.0).sqrt();
    let sinc = if q.norm() < 1e-12 {
        c64::new(1.0, 0.0)
    } else {
        q.sin() / q
    };
    let mix = (k * k + q * q) / (2.0 * k) * sinc;
    c64::cis(-k) / (q.cos() - c64::new(0.0, 1.0) * mix)
}

/// One row of a barrier comparison; `rmatrix` is `None` where a pole was skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPoint {
    pub energy: f64,
    pub exact: f64,
    pub rmatrix: Option<f64>,
}

/// `count` energies evenly spaced on `[e_min, e_max]`.
pub fn barrier_scan(
    prob: &BarrierProblem,
    e_min: f64,
    e_max: f64,
    count: usize,
) -> Vec<BarrierPoint> {
    let step = if count > 1 {
        (e_max - e_min) / (count - 1) as f64
    } else {
        0.0
    };
    (0..count)
        .map(|i| {
            let energy = e_min + step * i as f64;
            BarrierPoint {
                energy,
                exact: exact_transmission(energy, prob.v0),
                rmatrix: rmatrix_transmission(energy, prob).ok(),
            }
        })
        .collect()
}
