//! Lead channels, cavity–lead overlaps and the R-matrix.
//!
//! Lead modes are `χ_n(y) = sqrt(2/w) sin(nπ(y - y₀)/w)` with `y₀` the lower wall at the
//! mouth. At `x = 0, L` the cavity basis reduces to `c_m(x) s_n(v) / sqrt(w)` with
//! `v = (y - y₀)/w`, so the overlap of eigenfunction `j` with channel `n` is
//! `Σ_m B^j_{m,n} c_m(x)` exactly.

use faer::Mat;

use crate::cavity::{cos_mode, CavitySolution};
use crate::error::{Error, Result};
use crate::geometry::LEAD_MATCH_TOL;

/// Absolute distance from a channel threshold treated as sitting on it.
pub const THRESHOLD_TOL: f64 = 1e-12;
/// Default relative distance `|E - E_j| / E` treated as sitting on a cavity pole.
pub const POLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Open channels of both leads at one energy (`ħ²/2m = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct LeadSpace {
    energy: f64,
    width: f64,
    wave_vectors: Vec<f64>,
}

impl LeadSpace {
    pub fn energy(&self) -> f64 {
        self.energy
    }
    pub fn width(&self) -> f64 {
        self.width
    }
    /// Open channels per lead.
    pub fn open(&self) -> usize {
        self.wave_vectors.len()
    }
    /// `k_n` for `n = 1..=open()`, stored from index 0.
    pub fn wave_vectors(&self) -> &[f64] {
        &self.wave_vectors
    }
    /// Threshold energy `(nπ/w)²` of channel `n`.
    pub fn threshold(&self, n: usize) -> f64 {
        (n as f64 * std::f64::consts::PI / self.width).powi(2)
    }
}

pub fn channel_space(energy: f64, width: f64) -> Result<LeadSpace> {
    if !(energy > 0.0) || !(width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need E > 0 and w > 0, got E = {energy}, w = {width}"
        )));
    }
    let pi_w = std::f64::consts::PI / width;
    let open = (energy.sqrt() / pi_w).floor() as usize;
    for n in [open, open + 1] {
        if n > 0 && (energy - (n as f64 * pi_w).powi(2)).abs() < THRESHOLD_TOL * energy.max(1.0) {
            return Err(Error::Threshold { energy, channel: n });
        }
    }
    let wave_vectors = (1..=open)
        .map(|n| (energy - (n as f64 * pi_w).powi(2)).sqrt())
        .collect();
    Ok(LeadSpace {
        energy,
        width,
        wave_vectors,
    })
}

/// Overlaps `φ_{j,n}(x_α)`; column `n - 1` for the left mouth, `n_lead + n - 1` for the right.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    n_lead: usize,
    values: Mat<f64>,
}

impl OverlapTable {
    pub fn n_lead(&self) -> usize {
        self.n_lead
    }
    pub fn states(&self) -> usize {
        self.values.nrows()
    }
    pub fn values(&self) -> &Mat<f64> {
        &self.values
    }
    pub fn get(&self, j: usize, side: Side, n: usize) -> f64 {
        let col = match side {
            Side::Left => n - 1,
            Side::Right => self.n_lead + n - 1,
        };
        self.values[(j, col)]
    }
    /// `Σ_j φ_{j,n}(x_α)²`
    pub fn strength(&self, side: Side, n: usize) -> f64 {
        (0..self.states())
            .map(|j| self.get(j, side, n).powi(2))
            .sum()
    }
}

pub fn overlaps(sol: &CavitySolution, n_lead: usize) -> Result<OverlapTable> {
    let basis = sol.basis();
    if n_lead == 0 || n_lead > basis.n_max {
        return Err(Error::InvalidParameter(format!(
            "n_lead = {n_lead} must lie in 1..={}",
            basis.n_max
        )));
    }
    let profile = sol.profile();
    let w = profile.lead_width();
    let l = profile.length();
    for x in [0.0, l] {
        let found = profile.at(x).j();
        if (found - w).abs() > LEAD_MATCH_TOL * w {
            return Err(Error::InterfaceMismatch { expected: w, found });
        }
    }
    let left: Vec<f64> = (0..basis.m_max).map(|m| cos_mode(m, 0.0, l)).collect();
    let right: Vec<f64> = (0..basis.m_max)
        .map(|m| if m % 2 == 0 { left[m] } else { -left[m] })
        .collect();
    let c = sol.coefficients();
    let values = Mat::from_fn(sol.len(), 2 * n_lead, |j, col| {
        let (ends, n) = if col < n_lead {
            (&left, col + 1)
        } else {
            (&right, col - n_lead + 1)
        };
        (0..basis.m_max)
            .map(|m| c[(basis.index(m, n), j)] * ends[m])
            .sum()
    });
    Ok(OverlapTable { n_lead, values })
}

/// `R_{αβ}(n,n') = Σ_j φ_{j,n}(x_α) φ_{j,n'}(x_β) / (E - E_j)` over the open channels,
/// ordered `[L1..LN, R1..RN]`.
pub fn r_matrix(sol: &CavitySolution, table: &OverlapTable, space: &LeadSpace) -> Result<Mat<f64>> {
    r_matrix_with_tol(sol.energies(), table, space, POLE_TOL)
}

pub fn r_matrix_with_tol(
    energies: &[f64],
    table: &OverlapTable,
    space: &LeadSpace,
    pole_tol: f64,
) -> Result<Mat<f64>> {
    let e = space.energy();
    let n = space.open();
    if n == 0 {
        return Err(Error::NoOpenChannels(e));
    }
    if n > table.n_lead() {
        return Err(Error::InvalidParameter(format!(
            "{n} open channels but overlaps only for {}",
            table.n_lead()
        )));
    }
    if let Some(&pole) = energies.iter().find(|&&ej| (e - ej).abs() < pole_tol * e) {
        return Err(Error::NearPole {
            energy: e,
            pole,
            distance: (e - pole).abs(),
        });
    }
    let cols: Vec<usize> = (0..n).chain(table.n_lead()..table.n_lead() + n).collect();
    let phi = table.values();
    let mut r = Mat::<f64>::zeros(2 * n, 2 * n);
    let mut row = vec![0.0; 2 * n];
    for (j, ej) in energies.iter().enumerate().take(table.states()) {
        let d = 1.0 / (e - ej);
        for (a, &c) in cols.iter().enumerate() {
            row[a] = phi[(j, c)];
        }
        for a in 0..2 * n {
            let ra = row[a] * d;
            for b in 0..=a {
                r[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..2 * n {
        for b in 0..a {
            r[(b, a)] = r[(a, b)];
        }
    }
    Ok(r)
}
