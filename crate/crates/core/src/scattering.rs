//! S-matrix from the R-matrix, conductance and energy sweeps.
//!
//! With `K = diag(k_n)` over both leads and `R̃ = K^{1/2} R K^{1/2}`,
//! `S = (1 - iR̃)(1 + iR̃)^{-1}`. Since `R̃` is real symmetric this is evaluated as
//! `U diag((1 - iλ)/(1 + iλ)) Uᵀ`, which is unitary and symmetric to roundoff and
//! stays finite when `E` approaches a cavity pole.
//!
//! The phase reference is the lead interfaces: a straight guide of length `L`
//! gives `t = -e^{ikL}` per channel. [`ScatteringMatrix::origin_referenced`]
//! moves both references to `x = 0`.

use std::sync::Arc;

use faer::{c64, Mat, Side as Triangle};

use crate::cavity::{solve_profile, BasisSpec, CavitySolution};
use crate::error::{Error, Result};
use crate::geometry::BoundaryProfile;
use crate::leads::{channel_space, overlaps, r_matrix, LeadSpace, OverlapTable};

/// `cond(1 + iR̃)` above which a point is reported as ill conditioned.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative distance to a threshold or pole below which sweeps skip a point.
pub const SWEEP_SKIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix {
    energy: f64,
    wave_vectors: Vec<f64>,
    s: Mat<c64>,
}

impl ScatteringMatrix {
    pub fn energy(&self) -> f64 {
        self.energy
    }
    /// Open channels per lead.
    pub fn channels(&self) -> usize {
        self.wave_vectors.len()
    }
    pub fn wave_vectors(&self) -> &[f64] {
        &self.wave_vectors
    }
    /// Full `2N × 2N` matrix in `[L1..LN, R1..RN]` order (rows outgoing, columns incoming).
    pub fn matrix(&self) -> &Mat<c64> {
        &self.s
    }

    fn block(&self, row_right: bool, col_right: bool) -> Mat<c64> {
        let n = self.channels();
        let (r0, c0) = (n * row_right as usize, n * col_right as usize);
        Mat::from_fn(n, n, |i, j| self.s[(r0 + i, c0 + j)])
    }
    /// Reflection back into the left lead.
    pub fn r(&self) -> Mat<c64> {
        self.block(false, false)
    }
    /// Transmission left to right; `t()[(n, m)]` is incoming `m`, outgoing `n`.
    pub fn t(&self) -> Mat<c64> {
        self.block(true, false)
    }
    /// Transmission right to left.
    pub fn t_prime(&self) -> Mat<c64> {
        self.block(false, true)
    }
    pub fn r_prime(&self) -> Mat<c64> {
        self.block(true, true)
    }

    /// `max |S†S - 1|`
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.s.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..d {
                    acc += self.s[(k, i)].conj() * self.s[(k, j)];
                }
                if i == j {
                    acc -= c64::new(1.0, 0.0);
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `max |S - Sᵀ|`
    pub fn reciprocity_defect(&self) -> f64 {
        let d = self.s.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..i {
                worst = worst.max((self.s[(i, j)] - self.s[(j, i)]).norm());
            }
        }
        worst
    }

    /// `Φ S Φ` with `Φ = diag(1, e^{-ik_n L})`, so that both leads measure phase from `x = 0`.
    pub fn origin_referenced(&self, length: f64) -> Mat<c64> {
        let n = self.channels();
        let phase: Vec<c64> = (0..2 * n)
            .map(|a| {
                if a < n {
                    c64::new(1.0, 0.0)
                } else {
                    c64::cis(-self.wave_vectors[a - n] * length)
                }
            })
            .collect();
        Mat::from_fn(2 * n, 2 * n, |i, j| phase[i] * self.s[(i, j)] * phase[j])
    }
}

/// `S` for an R-matrix over the open channels of `space`.
pub fn s_from_r(r: &Mat<f64>, space: &LeadSpace) -> Result<ScatteringMatrix> {
    let n = space.open();
    if n == 0 {
        return Err(Error::NoOpenChannels(space.energy()));
    }
    if r.nrows() != 2 * n || r.ncols() != 2 * n {
        return Err(Error::InvalidParameter(format!(
            "R is {}x{} but {n} channels are open",
            r.nrows(),
            r.ncols()
        )));
    }
    let sqrt_k: Vec<f64> = (0..2 * n)
        .map(|a| space.wave_vectors()[a % n].sqrt())
        .collect();
    let rt = Mat::from_fn(2 * n, 2 * n, |a, b| {
        sqrt_k[a] * 0.5 * (r[(a, b)] + r[(b, a)]) * sqrt_k[b]
    });
    let eig = rt
        .self_adjoint_eigen(Triangle::Lower)
        .map_err(|_| Error::EigenSolver)?;
    let u = eig.U();
    let lambda = eig.S().column_vector();
    let mut lam_max = 0.0f64;
    let z: Vec<c64> = (0..2 * n)
        .map(|i| {
            let l = lambda[i];
            lam_max = lam_max.max(l.abs());
            c64::new(1.0, -l) / c64::new(1.0, l)
        })
        .collect();
    let cond = (1.0 + lam_max * lam_max).sqrt();
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let s = Mat::from_fn(2 * n, 2 * n, |a, b| {
        let mut acc = c64::new(0.0, 0.0);
        for i in 0..2 * n {
            acc += z[i] * (u[(a, i)] * u[(b, i)]);
        }
        acc
    });
    Ok(ScatteringMatrix {
        energy: space.energy(),
        wave_vectors: space.wave_vectors().to_vec(),
        s,
    })
}

/// Landauer conductance `Σ |t_{nm}|²` in units of `2e²/h`.
pub fn conductance(s: &ScatteringMatrix) -> f64 {
    let n = s.channels();
    let m = s.matrix();
    let mut g = 0.0;
    for i in 0..n {
        for j in 0..n {
            g += m[(n + i, j)].norm_sqr();
        }
    }
    g
}

/// Cavity eigenpairs plus lead overlaps, reusable across energies.
#[derive(Debug, Clone)]
pub struct Scatterer {
    solution: Arc<CavitySolution>,
    table: OverlapTable,
}

impl Scatterer {
    /// Prepares overlaps for every transverse mode of the basis.
    pub fn new(solution: Arc<CavitySolution>) -> Result<Self> {
        let n = solution.basis().n_max;
        Self::with_channels(solution, n)
    }

    pub fn with_channels(solution: Arc<CavitySolution>, n_lead: usize) -> Result<Self> {
        let table = overlaps(&solution, n_lead)?;
        Ok(Scatterer { solution, table })
    }

    pub fn solution(&self) -> &CavitySolution {
        &self.solution
    }
    pub fn overlaps(&self) -> &OverlapTable {
        &self.table
    }
    pub fn lead_width(&self) -> f64 {
        self.solution.profile().lead_width()
    }

    pub fn at_energy(&self, energy: f64) -> Result<ScatteringMatrix> {
        let space = channel_space(energy, self.lead_width())?;
        let r = r_matrix(&self.solution, &self.table, &space)?;
        s_from_r(&r, &space)
    }

    /// `k` in units of `π/w`.
    pub fn at_reduced_k(&self, k: f64) -> Result<ScatteringMatrix> {
        self.at_energy(self.energy_of(k))
    }

    pub fn energy_of(&self, reduced_k: f64) -> f64 {
        (reduced_k * std::f64::consts::PI / self.lead_width()).powi(2)
    }

    fn skip_reason(&self, k: f64) -> Option<SkipReason> {
        let e = self.energy_of(k);
        let n = k.round();
        if n >= 1.0 && ((k / n).powi(2) - 1.0).abs() < SWEEP_SKIP_TOL {
            return Some(SkipReason::Threshold(n as usize));
        }
        if k < 1.0 {
            return Some(SkipReason::Closed);
        }
        let energies = self.solution.energies();
        let nearest = energies.partition_point(|&ej| ej < e);
        for j in [nearest.saturating_sub(1), nearest] {
            if let Some(&ej) = energies.get(j) {
                if (e - ej).abs() < SWEEP_SKIP_TOL * e {
                    return Some(SkipReason::Pole(ej));
                }
            }
        }
        None
    }

    /// Scatters at each reduced wave number, recording skipped points instead of failing.
    pub fn sweep(&self, reduced_k: &[f64]) -> Sweep {
        let point = |&k: &f64| -> SweepPoint {
            let outcome = match self.skip_reason(k) {
                Some(reason) => Outcome::Skipped(reason),
                None => match self.at_reduced_k(k) {
                    Ok(s) => Outcome::Computed(s),
                    Err(e) => Outcome::Skipped(SkipReason::Failed(e.to_string())),
                },
            };
            SweepPoint { k, outcome }
        };
        #[cfg(feature = "parallel")]
        let points = {
            use rayon::prelude::*;
            reduced_k.par_iter().map(point).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let points = reduced_k.iter().map(point).collect();
        Sweep {
            lead_width: self.lead_width(),
            length: self.solution.profile().length(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// Below the first lead threshold.
    Closed,
    /// Within the skip tolerance of channel `n` opening.
    Threshold(usize),
    /// Within the skip tolerance of a cavity eigenvalue.
    Pole(f64),
    Failed(String),
}

impl std::fmt::Display for SkipReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SkipReason::Closed => write!(f, "closed"),
            SkipReason::Threshold(n) => write!(f, "threshold {n}"),
            SkipReason::Pole(e) => write!(f, "pole {e:.9e}"),
            SkipReason::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Computed(ScatteringMatrix),
    Skipped(SkipReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Wave number in units of `π/w`.
    pub k: f64,
    pub outcome: Outcome,
}

impl SweepPoint {
    pub fn matrix(&self) -> Option<&ScatteringMatrix> {
        match &self.outcome {
            Outcome::Computed(s) => Some(s),
            Outcome::Skipped(_) => None,
        }
    }
    pub fn conductance(&self) -> Option<f64> {
        self.matrix().map(conductance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub lead_width: f64,
    pub length: f64,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    pub fn reduced_k(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.k).collect()
    }

    /// Absolute wave numbers `k π / w`.
    pub fn wave_numbers(&self) -> Vec<f64> {
        let s = std::f64::consts::PI / self.lead_width;
        self.points.iter().map(|p| p.k * s).collect()
    }

    pub fn skipped(&self) -> usize {
        self.points.iter().filter(|p| p.matrix().is_none()).count()
    }

    pub fn conductance(&self) -> Vec<Option<f64>> {
        self.points.iter().map(SweepPoint::conductance).collect()
    }

    /// Element `t_{n,m}` (one-based, outgoing `n`, incoming `m`) where that channel pair is open.
    pub fn transmission(&self, n: usize, m: usize) -> Vec<Option<c64>> {
        self.points
            .iter()
            .map(|p| {
                p.matrix()
                    .filter(|s| s.channels() >= n.max(m))
                    .map(|s| s.matrix()[(s.channels() + n - 1, m - 1)])
            })
            .collect()
    }

    /// CSV with columns `k_over_piw,T,N_open,unitarity_defect,status`; skipped points keep
    /// their `k` and leave the numeric columns empty.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("k_over_piw,T,N_open,unitarity_defect,status\n");
        for p in &self.points {
            match &p.outcome {
                Outcome::Computed(s) => {
                    let _ = writeln!(
                        out,
                        "{:.10},{:.12},{},{:.3e},ok",
                        p.k,
                        conductance(s),
                        s.channels(),
                        s.unitarity_defect()
                    );
                }
                Outcome::Skipped(r) => {
                    let _ = writeln!(out, "{:.10},,,,skipped {r}", p.k);
                }
            }
        }
        out
    }

    /// The transmission blocks only, as stored on disk.
    pub fn t_store(&self) -> TStore {
        TStore {
            lead_width: self.lead_width,
            length: self.length,
            records: self
                .points
                .iter()
                .map(|p| TRecord {
                    k: p.k,
                    t: p.matrix().map(ScatteringMatrix::t),
                })
                .collect(),
        }
    }
}

pub const T_STORE_MAGIC: &[u8; 8] = b"BILLTST1";

/// One sweep point of a t-store; `t` is `None` for skipped points.
#[derive(Debug, Clone, PartialEq)]
pub struct TRecord {
    pub k: f64,
    pub t: Option<Mat<c64>>,
}

/// Transmission blocks of a sweep.
///
/// Binary layout, little endian: magic, `lead_width: f64`, `length: f64`, `count: u64`,
/// then per record `k: f64`, `N: u64` and `N²` complex entries `(re, im)` of `t` row-major.
/// Skipped points are written with `N = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TStore {
    pub lead_width: f64,
    pub length: f64,
    pub records: Vec<TRecord>,
}

impl TStore {
    pub fn write<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        w.write_all(T_STORE_MAGIC)?;
        w.write_all(&self.lead_width.to_le_bytes())?;
        w.write_all(&self.length.to_le_bytes())?;
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        for r in &self.records {
            w.write_all(&r.k.to_le_bytes())?;
            let n = r.t.as_ref().map_or(0, |t| t.nrows());
            w.write_all(&(n as u64).to_le_bytes())?;
            if let Some(t) = &r.t {
                for i in 0..n {
                    for j in 0..n {
                        w.write_all(&t[(i, j)].re.to_le_bytes())?;
                        w.write_all(&t[(i, j)].im.to_le_bytes())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read<R: std::io::Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != T_STORE_MAGIC {
            return Err(Error::Parse("not a t-store file".into()));
        }
        let mut buf = [0u8; 8];
        let mut f64_at = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut buf)?;
            Ok(f64::from_le_bytes(buf))
        };
        let lead_width = f64_at(&mut r)?;
        let length = f64_at(&mut r)?;
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let count = u64::from_le_bytes(u) as usize;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let k = f64_at(&mut r)?;
            r.read_exact(&mut u)?;
            let n = u64::from_le_bytes(u) as usize;
            if n > 1 << 16 {
                return Err(Error::Parse(format!("implausible channel count {n}")));
            }
            let t = if n == 0 {
                None
            } else {
                let mut t = Mat::<c64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let re = f64_at(&mut r)?;
                        let im = f64_at(&mut r)?;
                        t[(i, j)] = c64::new(re, im);
                    }
                }
                Some(t)
            };
            records.push(TRecord { k, t });
        }
        Ok(Self {
            lead_width,
            length,
            records,
        })
    }
}

/// Disjoint windows, scanned left to right, at least `min_width` wide in `k` over which
/// `Σ |T_{i+1} - T_i|` stays below `max_variation`. Each window is extended as far as it goes.
pub fn find_plateaus(k: &[f64], t: &[f64], min_width: f64, max_variation: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < k.len() {
        let mut variation = 0.0;
        let mut end = None;
        let mut j = i;
        while j + 1 < k.len() {
            variation += (t[j + 1] - t[j]).abs();
            if variation >= max_variation {
                break;
            }
            j += 1;
            if k[j] - k[i] >= min_width {
                end = Some(j);
            }
        }
        match end {
            Some(j) => {
                out.push((k[i], k[j]));
                i = j + 1;
            }
            None => i += 1,
        }
    }
    out
}

/// First `k` where `T` reaches `level` and then stays at or above it for `sustain` in `k`,
/// linearly interpolated between the bracketing samples.
pub fn conductance_onset(k: &[f64], t: &[f64], level: f64, sustain: f64) -> Option<f64> {
    'start: for i in 0..k.len() {
        if t[i] < level {
            continue;
        }
        for j in i..k.len() {
            if k[j] - k[i] > sustain {
                break;
            }
            if t[j] < level {
                continue 'start;
            }
        }
        if k[k.len() - 1] - k[i] < sustain {
            return None;
        }
        if i == 0 {
            return Some(k[0]);
        }
        let s = (level - t[i - 1]) / (t[i] - t[i - 1]);
        return Some(k[i - 1] + s * (k[i] - k[i - 1]));
    }
    None
}

/// Uniform grid of `count` reduced wave numbers from `start` to `stop` inclusive.
pub fn reduced_k_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![start];
    }
    let h = (stop - start) / (count - 1) as f64;
    (0..count).map(|i| start + h * i as f64).collect()
}

/// Solves the cavity and sweeps; `reduced_k` is in units of `π/w`.
pub fn sweep(profile: &BoundaryProfile, basis: &BasisSpec, reduced_k: &[f64]) -> Result<Sweep> {
    let sol = Arc::new(solve_profile(profile, basis)?);
    Ok(Scatterer::new(sol)?.sweep(reduced_k))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::make_rectangle;

    #[test]
    fn cayley_form_matches_direct_inverse() {
        let space = channel_space((2.3 * PI).powi(2), 1.0).unwrap();
        let r = Mat::from_fn(4, 4, |a, b| {
            0.1 * (a + b) as f64 - 0.05 * (a * b) as f64 + 0.02
        });
        let s = s_from_r(&r, &space).unwrap();
        // (1 - iR̃) = S (1 + iR̃)
        let k: Vec<f64> = (0..4).map(|a| space.wave_vectors()[a % 2].sqrt()).collect();
        for a in 0..4 {
            for b in 0..4 {
                let rt = |i: usize, j: usize| k[i] * r[(i, j)] * k[j];
                let lhs = c64::new((a == b) as u8 as f64, -rt(a, b));
                let mut rhs = c64::new(0.0, 0.0);
                for c in 0..4 {
                    rhs += s.matrix()[(a, c)] * c64::new((c == b) as u8 as f64, rt(c, b));
                }
                assert!((lhs - rhs).norm() < 1e-13);
            }
        }
        assert!(s.unitarity_defect() < 1e-14);
        assert!(s.reciprocity_defect() < 1e-14);
    }

    #[test]
    fn straight_guide_is_transparent() {
        let l = 1.3;
        let p = make_rectangle(1.0, l, 512).unwrap();
        let sol = Arc::new(solve_profile(&p, &BasisSpec::full(220, 3)).unwrap());
        let sc = Scatterer::new(sol).unwrap();
        let s = sc.at_reduced_k(2.5).unwrap();
        assert_eq!(s.channels(), 2);
        assert!((conductance(&s) - 2.0).abs() < 2e-3);
        let t = s.t();
        for n in 0..2 {
            let expect = -c64::cis(s.wave_vectors()[n] * l);
            assert!((t[(n, n)] - expect).norm() < 0.05);
        }
        let o = s.origin_referenced(l);
        assert!((o[(2, 0)] + 1.0).norm() < 0.05);
    }

    #[test]
    fn plateau_and_onset_metrics() {
        let k: Vec<f64> = (0..=400).map(|i| i as f64 * 0.01).collect();
        let t: Vec<f64> = k
            .iter()
            .map(|&k| {
                1.0 / (1.0 + (-(k - 1.0) * 40.0).exp()) + 1.0 / (1.0 + (-(k - 3.0) * 40.0).exp())
            })
            .collect();
        let p = find_plateaus(&k, &t, 0.3, 0.15);
        assert_eq!(p.len(), 3);
        assert!(p[1].0 > 1.0 && p[1].1 < 3.0);
        let onset = conductance_onset(&k, &t, 0.05, 0.3).unwrap();
        assert!((onset - (1.0 - (19.0f64).ln() / 40.0)).abs() < 2e-3);
        let mut spike = t.clone();
        spike[50] = 0.5;
        assert!((conductance_onset(&k, &spike, 0.05, 0.3).unwrap() - onset).abs() < 1e-12);
        assert!(conductance_onset(&k, &vec![0.0; k.len()], 0.05, 0.3).is_none());
        let noisy: Vec<f64> = (0..k.len()).map(|i| (i % 2) as f64 * 0.1).collect();
        assert!(find_plateaus(&k, &noisy, 0.3, 0.15).is_empty());
    }

    #[test]
    fn sweep_records_skips() {
        let p = make_rectangle(1.0, 1.0, 256).unwrap();
        let sw = sweep(&p, &BasisSpec::full(10, 3), &[0.5, 1.5, 2.0, 2.7]).unwrap();
        assert!(matches!(
            sw.points[0].outcome,
            Outcome::Skipped(SkipReason::Closed)
        ));
        assert!(sw.points[1].matrix().is_some());
        assert!(matches!(
            sw.points[2].outcome,
            Outcome::Skipped(SkipReason::Threshold(2))
        ));
        assert_eq!(sw.points[3].matrix().unwrap().channels(), 2);
        assert_eq!(sw.skipped(), 2);
        let csv = sw.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(3).unwrap().contains("threshold 2"));
        assert!(csv.starts_with("k_over_piw,T,N_open,unitarity_defect"));

        let store = sw.t_store();
        let mut bytes = Vec::new();
        store.write(&mut bytes).unwrap();
        let back = TStore::read(bytes.as_slice()).unwrap();
        assert_eq!(back, store);
        assert_eq!(back.records[3].t.as_ref().unwrap().nrows(), 2);
        assert!(TStore::read(&bytes[..bytes.len() - 3]).is_err());
    }
}
