//! Closed-form transverse integrals over `v ∈ [0, 1]` with `S_n = sin(nπv)`, `C_n = cos(nπv)`:
//!
//! ```text
//! D1(n,n') = n'π   ∫ S_n C_n' dv        D3(n,n') = nn'π² ∫ C_n C_n' dv
//! D2(n,n') = n'π   ∫ v S_n C_n' dv      D4(n,n') = nn'π² ∫ v C_n C_n' dv
//!                                       D5(n,n') = nn'π² ∫ v² C_n C_n' dv
//! ```
//!
//! Products are split into single harmonics `cos(jπv)`, `sin(jπv)` whose moments
//! are elementary. Off the diagonal D4 and D5 carry the parity `(-1)^(n+n')`; the
//! diagonal of D5 is `n²π²/6 + 1/4`.

use std::f64::consts::PI;

fn parity(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `∫₀¹ v^power cos(jπv) dv`
fn cos_moment(power: u32, j: i64) -> f64 {
    if j == 0 {
        return 1.0 / (power as f64 + 1.0);
    }
    let a = j as f64 * PI;
    match power {
        0 => 0.0,
        1 => (parity(j) - 1.0) / (a * a),
        2 => 2.0 * parity(j) / (a * a),
        _ => unreachable!("only moments up to v² appear"),
    }
}

/// `∫₀¹ v^power sin(jπv) dv`
fn sin_moment(power: u32, j: i64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let a = j as f64 * PI;
    match power {
        0 => (1.0 - parity(j)) / a,
        1 => -parity(j) / a,
        _ => unreachable!("only moments up to v¹ appear"),
    }
}

/// `∫ v^p sin(nπv) cos(n'πv) dv = ½ ∫ v^p [sin((n+n')πv) + sin((n-n')πv)]`
fn sin_cos(power: u32, n: i64, np: i64) -> f64 {
    0.5 * (sin_moment(power, n + np) + sin_moment(power, n - np))
}

/// `∫ v^p cos(nπv) cos(n'πv) dv = ½ ∫ v^p [cos((n-n')πv) + cos((n+n')πv)]`
fn cos_cos(power: u32, n: i64, np: i64) -> f64 {
    0.5 * (cos_moment(power, n - np) + cos_moment(power, n + np))
}

/// Row-major `n_max × n_max` tables indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct VIntegralTables {
    n_max: usize,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
    pub d5: Vec<f64>,
}

impl VIntegralTables {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Entry `(n, n')` of a table, with one-based mode numbers.
    pub fn get(table: &[f64], n_max: usize, n: usize, np: usize) -> f64 {
        table[(n - 1) * n_max + (np - 1)]
    }
}

pub fn build_v_tables(n_max: usize) -> VIntegralTables {
    assert!(n_max >= 1, "need at least one transverse mode");
    let len = n_max * n_max;
    let mut t = VIntegralTables {
        n_max,
        d1: vec![0.0; len],
        d2: vec![0.0; len],
        d3: vec![0.0; len],
        d4: vec![0.0; len],
        d5: vec![0.0; len],
    };
    for n in 1..=n_max as i64 {
        for np in 1..=n_max as i64 {
            let idx = (n as usize - 1) * n_max + (np as usize - 1);
            let (nf, npf) = (n as f64, np as f64);
            t.d1[idx] = npf * PI * sin_cos(0, n, np);
            t.d2[idx] = npf * PI * sin_cos(1, n, np);
            let pref = nf * npf * PI * PI;
            t.d3[idx] = pref * cos_cos(0, n, np);
            t.d4[idx] = pref * cos_cos(1, n, np);
            t.d5[idx] = pref * cos_cos(2, n, np);
        }
    }
    t
}
