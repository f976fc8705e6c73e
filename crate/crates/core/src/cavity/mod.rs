//! Closed-cavity eigenproblem on the rectangle `[0, L] × [0, 1]`.
//!
//! Basis functions are `ψ_{m,n}(u, v) = J(u)^{-1/2} c_m(u) s_n(v)` with
//! `c_m = sqrt(ε_m / L) cos(mπu/L)` (`ε_0 = 1`, `ε_m = 2`) and `s_n = √2 sin(nπv)`.
//! They are orthonormal under the `J`-weighted inner product, Neumann at `u = 0, L`
//! for flat mouths and Dirichlet at `v = 0, 1`. The Hamiltonian matrix is the
//! quadratic form `∫∫ J ∇ψ · g ∇ψ' du dv` of the transformed Laplacian.

mod direct;
mod integrals;
mod io;
mod vtables;

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryProfile, WallPoint};

pub use direct::direct_hamiltonian;
pub use integrals::{fft_cosine_integrals, GridRule, TrigIntegrator};
pub use io::{load_solution, save_solution, SOLUTION_MAGIC};
pub use vtables::{build_v_tables, VIntegralTables};

/// Truncation of the product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisSpec {
    /// Longitudinal cosine modes `m = 0..m_max`.
    pub m_max: usize,
    /// Transverse sine modes `n = 1..=n_max`.
    pub n_max: usize,
    /// Eigenpairs retained after diagonalisation.
    pub k_keep: usize,
}

impl BasisSpec {
    pub const REFERENCE: BasisSpec = BasisSpec {
        m_max: 90,
        n_max: 50,
        k_keep: 3000,
    };

    pub fn new(m_max: usize, n_max: usize, k_keep: usize) -> Result<Self> {
        let spec = Self {
            m_max,
            n_max,
            k_keep,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Keep every eigenpair.
    pub fn full(m_max: usize, n_max: usize) -> Self {
        Self {
            m_max,
            n_max,
            k_keep: m_max * n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 || self.n_max == 0 {
            return Err(Error::InvalidParameter(
                "basis needs m_max, n_max >= 1".into(),
            ));
        }
        if self.k_keep == 0 || self.k_keep > self.dim() {
            return Err(Error::InvalidParameter(format!(
                "k_keep = {} must lie in 1..={}",
                self.k_keep,
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m_max * self.n_max
    }

    /// Composite index of `(m, n)`, `n` one-based.
    pub fn index(&self, m: usize, n: usize) -> usize {
        (n - 1) * self.m_max + m
    }

    /// Inverse of [`BasisSpec::index`].
    pub fn modes(&self, l: usize) -> (usize, usize) {
        (l % self.m_max, l / self.m_max + 1)
    }
}

/// Orthonormal longitudinal factor `c_m(u)`.
pub fn cos_mode(m: usize, u: f64, length: f64) -> f64 {
    let eps = if m == 0 { 1.0 } else { 2.0 };
    (eps / length).sqrt() * (m as f64 * PI * u / length).cos()
}

/// Orthonormal transverse factor `s_n(v)`, `n` one-based.
pub fn sin_mode(n: usize, v: f64) -> f64 {
    std::f64::consts::SQRT_2 * (n as f64 * PI * v).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub rule: GridRule,
    pub endpoint_correction: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            rule: GridRule::Midpoint,
            endpoint_correction: true,
        }
    }
}

/// Symmetric `m_max × m_max` tables of the longitudinal integrals, row-major.
#[derive(Debug, Clone)]
pub struct UIntegralTables {
    m_max: usize,
    /// `ω_m² δ - ∫ g (c_m c'_m' + c'_m c_m') + ∫ g² c_m c_m'` with `g = J_u / 2J`
    pub k1: Vec<f64>,
    /// `∫ (c'_m - g c_m) c_m' Q_u/J`
    pub cross_q: Vec<f64>,
    /// `∫ (c'_m - g c_m) c_m' J_u/J`
    pub cross_j: Vec<f64>,
    /// `∫ c_m c_m' (1 + Q_u²)/J²`
    pub metric0: Vec<f64>,
    /// `∫ c_m c_m' 2 Q_u J_u/J²`
    pub metric1: Vec<f64>,
    /// `∫ c_m c_m' J_u²/J²`
    pub metric2: Vec<f64>,
}

impl UIntegralTables {
    pub fn m_max(&self) -> usize {
        self.m_max
    }
}

/// Builds all longitudinal tables from nine transforms of wall functions.
pub fn build_u_tables(
    profile: &BoundaryProfile,
    m_max: usize,
    options: AssemblyOptions,
) -> Result<UIntegralTables> {
    let grid = profile.grid_size();
    if grid < 2 * m_max {
        return Err(Error::InvalidParameter(format!(
            "grid of {grid} points cannot resolve {m_max} modes (need >= {})",
            2 * m_max
        )));
    }
    let length = profile.length();
    let points: Vec<WallPoint> = match options.rule {
        GridRule::Midpoint => {
            let s = profile.samples();
            (0..grid)
                .map(|i| WallPoint {
                    p: s.p[i],
                    q: s.q[i],
                    p_u: s.p_u[i],
                    q_u: s.q_u[i],
                })
                .collect()
        }
        GridRule::Trapezoid => options
            .rule
            .points(length, grid)
            .into_iter()
            .map(|u| profile.at(u))
            .collect(),
    };
    if let Some((i, w)) = points.iter().enumerate().find(|(_, w)| !(w.j() > 0.0)) {
        return Err(Error::Pinched {
            at: i as f64 * length / grid as f64,
            width: w.j(),
        });
    }

    let integrator = TrigIntegrator::new(options.rule, grid, options.endpoint_correction);
    let count = 2 * m_max - 1;
    let transform = |f: &dyn Fn(&WallPoint) -> f64| {
        let samples: Vec<f64> = points.iter().map(f).collect();
        integrator.integrals(&samples, length, count)
    };
    let half_log = |w: &WallPoint| w.j_u() / (2.0 * w.j());
    let (c_g2, _) = transform(&|w| half_log(w).powi(2));
    let (c_gq, _) = transform(&|w| half_log(w) * w.q_u / w.j());
    let (c_gj, _) = transform(&|w| half_log(w) * w.j_u() / w.j());
    let (c_a0, _) = transform(&|w| (1.0 + w.q_u * w.q_u) / (w.j() * w.j()));
    let (c_a1, _) = transform(&|w| 2.0 * w.q_u * w.j_u() / (w.j() * w.j()));
    let (c_a2, _) = transform(&|w| (w.j_u() / w.j()).powi(2));
    let (_, s_g) = transform(&half_log);
    let (_, s_q) = transform(&|w| w.q_u / w.j());
    let (_, s_j) = transform(&|w| w.j_u() / w.j());

    let norm: Vec<f64> = (0..m_max)
        .map(|m| ((if m == 0 { 1.0 } else { 2.0 }) / length).sqrt())
        .collect();
    let omega: Vec<f64> = (0..m_max).map(|m| m as f64 * PI / length).collect();
    // ∫ c_m c_m' G
    let cc = |hat: &[f64], m: usize, mp: usize| {
        norm[m] * norm[mp] * 0.5 * (hat[m.abs_diff(mp)] + hat[m + mp])
    };
    // ∫ c'_m c_m' G
    let sc = |hat: &[f64], m: usize, mp: usize| {
        let diff = if m >= mp { hat[m - mp] } else { -hat[mp - m] };
        -norm[m] * norm[mp] * omega[m] * 0.5 * (hat[m + mp] + diff)
    };

    let len = m_max * m_max;
    let mut t = UIntegralTables {
        m_max,
        k1: vec![0.0; len],
        cross_q: vec![0.0; len],
        cross_j: vec![0.0; len],
        metric0: vec![0.0; len],
        metric1: vec![0.0; len],
        metric2: vec![0.0; len],
    };
    for m in 0..m_max {
        for mp in 0..m_max {
            let i = m * m_max + mp;
            let kinetic = if m == mp { omega[m] * omega[m] } else { 0.0 };
            t.k1[i] = kinetic - sc(&s_g, mp, m) - sc(&s_g, m, mp) + cc(&c_g2, m, mp);
            t.cross_q[i] = sc(&s_q, m, mp) - cc(&c_gq, m, mp);
            t.cross_j[i] = sc(&s_j, m, mp) - cc(&c_gj, m, mp);
            t.metric0[i] = cc(&c_a0, m, mp);
            t.metric1[i] = cc(&c_a1, m, mp);
            t.metric2[i] = cc(&c_a2, m, mp);
        }
    }
    Ok(t)
}

/// Hamiltonian matrix before the final `(H + Hᵀ)/2`.
pub fn assemble_unsymmetrized(
    profile: &BoundaryProfile,
    basis: &BasisSpec,
    options: AssemblyOptions,
) -> Result<Mat<f64>> {
    basis.validate()?;
    let u = build_u_tables(profile, basis.m_max, options)?;
    let v = build_v_tables(basis.n_max);
    let (mm, nm) = (basis.m_max, basis.n_max);
    let dim = basis.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    let ut = |tab: &[f64], m: usize, mp: usize| tab[m * mm + mp];
    let vt = |tab: &[f64], n: usize, np: usize| tab[(n - 1) * nm + (np - 1)];
    for n in 1..=nm {
        for np in 1..=nm {
            // transverse integrals of the orthonormal sines carry a factor 2
            let a = 2.0 * vt(&v.d1, n, np);
            let a_t = 2.0 * vt(&v.d1, np, n);
            let b = 2.0 * vt(&v.d2, n, np);
            let b_t = 2.0 * vt(&v.d2, np, n);
            let c0 = 2.0 * vt(&v.d3, n, np);
            let c1 = 2.0 * vt(&v.d4, n, np);
            let c2 = 2.0 * vt(&v.d5, n, np);
            for m in 0..mm {
                let row = basis.index(m, n);
                for mp in 0..mm {
                    let col = basis.index(mp, np);
                    let mut e = -(ut(&u.cross_q, m, mp) * a
                        + ut(&u.cross_j, m, mp) * b
                        + ut(&u.cross_q, mp, m) * a_t
                        + ut(&u.cross_j, mp, m) * b_t)
                        + ut(&u.metric0, m, mp) * c0
                        + ut(&u.metric1, m, mp) * c1
                        + ut(&u.metric2, m, mp) * c2;
                    if n == np {
                        e += ut(&u.k1, m, mp);
                    }
                    h[(row, col)] = e;
                }
            }
        }
    }
    Ok(h)
}

/// Real symmetric Hamiltonian matrix in the product basis.
pub fn assemble_hamiltonian(profile: &BoundaryProfile, basis: &BasisSpec) -> Result<Mat<f64>> {
    assemble_hamiltonian_with(profile, basis, AssemblyOptions::default())
}

pub fn assemble_hamiltonian_with(
    profile: &BoundaryProfile,
    basis: &BasisSpec,
    options: AssemblyOptions,
) -> Result<Mat<f64>> {
    let mut h = assemble_unsymmetrized(profile, basis, options)?;
    let n = h.nrows();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = s;
            h[(j, i)] = s;
        }
    }
    Ok(h)
}

/// Lowest eigenpairs of the cavity, shared read-only by leads and scattering.
#[derive(Debug, Clone)]
pub struct CavitySolution {
    profile: Arc<BoundaryProfile>,
    basis: BasisSpec,
    energies: Vec<f64>,
    /// `dim × k_keep`; column `k` holds the coefficients of eigenfunction `k`.
    coefficients: Mat<f64>,
}

impl CavitySolution {
    pub(crate) fn from_parts(
        profile: Arc<BoundaryProfile>,
        basis: BasisSpec,
        energies: Vec<f64>,
        coefficients: Mat<f64>,
    ) -> Self {
        Self {
            profile,
            basis,
            energies,
            coefficients,
        }
    }

    pub fn profile(&self) -> &BoundaryProfile {
        &self.profile
    }
    pub fn profile_arc(&self) -> Arc<BoundaryProfile> {
        Arc::clone(&self.profile)
    }
    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }
    pub fn len(&self) -> usize {
        self.energies.len()
    }
    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
    pub fn coefficients(&self) -> &Mat<f64> {
        &self.coefficients
    }

    /// Coefficient `B^k_{m,n}`.
    pub fn coefficient(&self, k: usize, m: usize, n: usize) -> f64 {
        self.coefficients[(self.basis.index(m, n), k)]
    }

    /// Heuristic largest wave number the retained spectrum resolves, `sqrt(E_max / 2)`.
    pub fn trusted_k_max(&self) -> f64 {
        (0.5 * self.energies.last().copied().unwrap_or(0.0)).sqrt()
    }

    /// `Σ B^k_{m,n} c_m(u) s_n(v)`, the eigenfunction without the `J^{-1/2}` factor.
    pub fn eval_harmonic(&self, k: usize, u: f64, v: f64) -> f64 {
        let l = self.profile.length();
        let cm: Vec<f64> = (0..self.basis.m_max).map(|m| cos_mode(m, u, l)).collect();
        let sn: Vec<f64> = (1..=self.basis.n_max).map(|n| sin_mode(n, v)).collect();
        self.harmonic_from_factors(k, &cm, &sn)
    }

    pub(crate) fn harmonic_from_factors(&self, k: usize, cm: &[f64], sn: &[f64]) -> f64 {
        let col = self.coefficients.col(k);
        let mut acc = 0.0;
        for (ni, s) in sn.iter().enumerate() {
            let base = ni * self.basis.m_max;
            let mut row = 0.0;
            for (m, c) in cm.iter().enumerate() {
                row += col[base + m] * c;
            }
            acc += row * s;
        }
        acc
    }

    /// Eigenfunction `k` (zero-based, ascending energy) at physical points `(x, y)`.
    pub fn eval_wavefunction(&self, k: usize, points: &[(f64, f64)]) -> Result<Vec<f64>> {
        if k >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "state {k} not retained ({} kept)",
                self.len()
            )));
        }
        points
            .iter()
            .map(|&(x, y)| {
                let (u, v) = self
                    .profile
                    .to_rectangle(x, y)
                    .ok_or(Error::OutsideCavity { x, y })?;
                let j = self.profile.at(u).j();
                Ok(self.eval_harmonic(k, u, v) / j.sqrt())
            })
            .collect()
    }
}

/// Full symmetric eigendecomposition; keeps the lowest `k_keep` pairs.
pub fn solve_cavity(
    profile: Arc<BoundaryProfile>,
    hamiltonian: &Mat<f64>,
    basis: &BasisSpec,
) -> Result<CavitySolution> {
    basis.validate()?;
    if hamiltonian.nrows() != basis.dim() || hamiltonian.ncols() != basis.dim() {
        return Err(Error::InvalidParameter(format!(
            "Hamiltonian is {}x{}, basis has dimension {}",
            hamiltonian.nrows(),
            hamiltonian.ncols(),
            basis.dim()
        )));
    }
    let evd = hamiltonian
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenSolver)?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let keep = basis.k_keep;
    let energies: Vec<f64> = (0..keep).map(|k| values[k]).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::EigenSolver);
    }
    if let Some(bad) = energies.iter().find(|e| **e <= 0.0) {
        log::warn!(
            "non-positive cavity eigenvalue {bad}: the assembled matrix is not positive definite"
        );
    }
    let coefficients = vectors.subcols(0, keep).to_owned();
    Ok(CavitySolution::from_parts(
        profile,
        *basis,
        energies,
        coefficients,
    ))
}

/// Assembles and diagonalises in one step.
pub fn solve_profile(profile: &BoundaryProfile, basis: &BasisSpec) -> Result<CavitySolution> {
    let h = assemble_hamiltonian(profile, basis)?;
    solve_cavity(Arc::new(profile.clone()), &h, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_darmstadt, make_rectangle, DarmstadtParams};

    #[test]
    fn basis_index_is_bijective() {
        let b = BasisSpec::new(7, 5, 10).unwrap();
        let mut seen = vec![false; b.dim()];
        for n in 1..=5 {
            for m in 0..7 {
                let l = b.index(m, n);
                assert!(!seen[l]);
                seen[l] = true;
                assert_eq!(b.modes(l), (m, n));
            }
        }
        assert!(BasisSpec::new(3, 3, 10).is_err());
        assert!(BasisSpec::new(0, 3, 1).is_err());
    }

    #[test]
    fn rectangle_matrix_is_diagonal() {
        let r = make_rectangle(1.0, 2.0, 512).unwrap();
        let b = BasisSpec::full(12, 12);
        let h = assemble_hamiltonian(&r, &b).unwrap();
        for i in 0..b.dim() {
            let (m, n) = b.modes(i);
            let expect = (m as f64 * PI / 2.0).powi(2) + (n as f64 * PI).powi(2);
            assert!((h[(i, i)] - expect).abs() < 1e-12 * expect);
            for j in 0..b.dim() {
                if i != j {
                    assert!(h[(i, j)].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn assembly_is_symmetric_before_symmetrization() {
        let p = make_darmstadt(DarmstadtParams::default(), 1024).unwrap();
        let b = BasisSpec::full(10, 8);
        let h = assemble_unsymmetrized(&p, &b, AssemblyOptions::default()).unwrap();
        let mut max = 0.0f64;
        let mut asym = 0.0f64;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                max = max.max(h[(i, j)].abs());
                asym = asym.max((h[(i, j)] - h[(j, i)]).abs());
            }
        }
        assert!(asym < 1e-10 * max);
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let p = make_darmstadt(DarmstadtParams::default(), 256).unwrap();
        assert!(assemble_hamiltonian(&p, &BasisSpec::full(200, 2)).is_err());
    }

    #[test]
    fn trapezoid_rule_agrees_with_midpoint() {
        let p = make_darmstadt(DarmstadtParams::default(), 8192).unwrap();
        let b = BasisSpec::full(8, 6);
        let a = assemble_hamiltonian(&p, &b).unwrap();
        let t = assemble_hamiltonian_with(
            &p,
            &b,
            AssemblyOptions {
                rule: GridRule::Trapezoid,
                endpoint_correction: true,
            },
        )
        .unwrap();
        let scale = (0..b.dim()).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                assert!((a[(i, j)] - t[(i, j)]).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn rectangle_wavefunction_is_separable() {
        let r = make_rectangle(1.0, 2.0, 512).unwrap();
        let b = BasisSpec::full(6, 4);
        let sol = solve_profile(&r, &b).unwrap();
        for k in 0..6 {
            // lowest states are non-degenerate here; identify the mode by its largest coefficient
            let col = sol.coefficients().col(k);
            let (l, _) = (0..b.dim())
                .map(|l| (l, col[l].abs()))
                .fold((0, 0.0), |a, c| if c.1 > a.1 { c } else { a });
            let (m, n) = b.modes(l);
            let sign = col[l].signum();
            let pts = [(0.3, 0.2), (1.1, 0.77), (1.9, 0.5)];
            let vals = sol.eval_wavefunction(k, &pts).unwrap();
            for ((x, y), v) in pts.iter().zip(vals) {
                let exact = sign * cos_mode(m, *x, 2.0) * sin_mode(n, *y);
                assert!((v - exact).abs() < 1e-10);
            }
        }
        assert!(sol.eval_wavefunction(0, &[(1.0, 1.5)]).is_err());
    }
}
