//! Two-particle interaction matrix elements over cavity eigenfunctions.
//!
//! With `ψ = J^{-1/2} φ` and `dx dy = J du dv` the Jacobians cancel, so
//!
//! ```text
//! H_ijkl = ∫ du₁dv₁ du₂dv₂ φ_i(1) φ_j(2) V(x₁ - x₂, y₁ - y₂) φ_k(1) φ_l(2)
//! ```
//!
//! with `φ = Σ B_{m,n} c_m(u) s_n(v)` and `V` evaluated at the mapped physical points.
//! Particles are distinguishable; pair states are ordered `(i, j)`.

use faer::{Mat, Side};

use crate::cavity::{cos_mode, sin_mode, CavitySolution};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

pub const MIN_ORDER: usize = 8;

pub trait PairPotential: Send + Sync {
    /// Interaction for separation `(dx, dy)` in physical coordinates.
    fn value(&self, dx: f64, dy: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Send + Sync> PairPotential for F {
    fn value(&self, dx: f64, dy: f64) -> f64 {
        self(dx, dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    Constant(f64),
    /// `s exp(-r²/range²)`
    Gaussian {
        strength: f64,
        range: f64,
    },
    /// Unit-integral regularised contact, `s exp(-r²/w²) / (π w²)`.
    Contact {
        strength: f64,
        width: f64,
    },
    /// `s exp(-dx²/rx² - dy²/ry²)`, depending on the two separations independently.
    Separated {
        strength: f64,
        range_x: f64,
        range_y: f64,
    },
}

impl PairPotential for Potential {
    fn value(&self, dx: f64, dy: f64) -> f64 {
        let r2 = dx * dx + dy * dy;
        match *self {
            Potential::Constant(c) => c,
            Potential::Gaussian { strength, range } => strength * (-r2 / (range * range)).exp(),
            Potential::Contact { strength, width } => {
                strength / (std::f64::consts::PI * width * width) * (-r2 / (width * width)).exp()
            }
            Potential::Separated {
                strength,
                range_x,
                range_y,
            } => strength * (-(dx / range_x).powi(2) - (dy / range_y).powi(2)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec<P = Potential> {
    pub potential: P,
    /// Gauss points per dimension; the convergence check reruns at twice this.
    pub order: usize,
    /// Single-particle states (zero-based) spanning the pair space.
    pub states: Vec<usize>,
    /// Relative `q` vs `2q` disagreement tolerated.
    pub tolerance: f64,
}

impl<P> InteractionSpec<P> {
    pub fn new(potential: P, order: usize, states: Vec<usize>) -> Self {
        InteractionSpec {
            potential,
            order,
            states,
            tolerance: 1e-6,
        }
    }

    fn validate(&self, sol: &CavitySolution) -> Result<()> {
        if self.order < MIN_ORDER {
            return Err(Error::InvalidParameter(format!(
                "quadrature order {} below {MIN_ORDER}",
                self.order
            )));
        }
        if let Some(&bad) = self.states.iter().find(|&&s| s >= sol.len()) {
            return Err(Error::InvalidParameter(format!(
                "state {bad} not retained ({} kept)",
                sol.len()
            )));
        }
        Ok(())
    }
}

/// Tensor Gauss grid over the rectangle with the potential tabulated between all node pairs.
pub struct InteractionGrid<'a> {
    sol: &'a CavitySolution,
    q: usize,
    weights: Vec<f64>,
    cos_table: Vec<Vec<f64>>,
    sin_table: Vec<Vec<f64>>,
    /// `q² × q²`, row-major.
    potential: Vec<f64>,
    v_max: f64,
}

impl<'a> InteractionGrid<'a> {
    pub fn new<P: PairPotential>(sol: &'a CavitySolution, potential: &P, q: usize) -> Self {
        let profile = sol.profile();
        let l = profile.length();
        let (un, uw) = gauss_legendre_on(q, 0.0, l);
        let (vn, vw) = gauss_legendre_on(q, 0.0, 1.0);
        let basis = sol.basis();
        let cos_table = un
            .iter()
            .map(|&u| (0..basis.m_max).map(|m| cos_mode(m, u, l)).collect())
            .collect();
        let sin_table = vn
            .iter()
            .map(|&v| (1..=basis.n_max).map(|n| sin_mode(n, v)).collect())
            .collect();
        let mut points = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        for (a, &u) in un.iter().enumerate() {
            for (b, &v) in vn.iter().enumerate() {
                points.push(profile.to_physical(u, v));
                weights.push(uw[a] * vw[b]);
            }
        }
        let nodes = q * q;
        let mut table = vec![0.0; nodes * nodes];
        let mut v_max = 0.0f64;
        for a in 0..nodes {
            for b in 0..nodes {
                let v = potential.value(points[a].0 - points[b].0, points[a].1 - points[b].1);
                table[a * nodes + b] = v;
                v_max = v_max.max(v.abs());
            }
        }
        InteractionGrid {
            sol,
            q,
            weights,
            cos_table,
            sin_table,
            potential: table,
            v_max,
        }
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// `φ_k` on the grid nodes.
    pub fn harmonic(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.q * self.q);
        for cm in &self.cos_table {
            for sn in &self.sin_table {
                out.push(self.sol.harmonic_from_factors(k, cm, sn));
            }
        }
        out
    }

    fn density(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .collect()
    }

    fn apply_potential(&self, f: &[f64]) -> Vec<f64> {
        let nodes = f.len();
        (0..nodes)
            .map(|a| {
                let row = &self.potential[a * nodes..(a + 1) * nodes];
                row.iter().zip(f).map(|(v, x)| v * x).sum()
            })
            .collect()
    }

    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (pi, pj, pk, pl) = (
            self.harmonic(i),
            self.harmonic(j),
            self.harmonic(k),
            self.harmonic(l),
        );
        let f1 = self.density(&pi, &pk);
        let f2 = self.density(&pj, &pl);
        let vf = self.apply_potential(&f2);
        f1.iter().zip(&vf).map(|(a, b)| a * b).sum()
    }
}

fn check_converged(coarse: f64, fine: f64, tol: f64, v_max: f64) -> Result<()> {
    let diff = (coarse - fine).abs();
    if diff > tol * fine.abs().max(v_max * 1e-3) {
        return Err(Error::QuadratureNotConverged(diff));
    }
    Ok(())
}

/// `H_ijkl` at order `q`, checked against order `2q`.
pub fn h_ijkl<P: PairPotential>(
    sol: &CavitySolution,
    (i, j, k, l): (usize, usize, usize, usize),
    spec: &InteractionSpec<P>,
) -> Result<f64> {
    spec.validate(sol)?;
    if let Some(&bad) = [i, j, k, l].iter().find(|&&s| s >= sol.len()) {
        return Err(Error::InvalidParameter(format!("state {bad} not retained")));
    }
    let coarse = InteractionGrid::new(sol, &spec.potential, spec.order).element(i, j, k, l);
    let grid = InteractionGrid::new(sol, &spec.potential, 2 * spec.order);
    let fine = grid.element(i, j, k, l);
    check_converged(coarse, fine, spec.tolerance, grid.v_max)?;
    Ok(fine)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSpectrum {
    /// Ordered single-particle labels of each pair basis state.
    pub pairs: Vec<(usize, usize)>,
    /// `E_i + E_j + ⟨ij|V|kl⟩` in the pair basis.
    pub matrix: Mat<f64>,
    /// Pair energies, ascending.
    pub energies: Vec<f64>,
}

/// Assembles and diagonalises the pair Hamiltonian over `spec.states`.
///
/// Elements are computed at order `q`; the element with the highest states is rechecked at `2q`.
pub fn interaction_block<P: PairPotential>(
    sol: &CavitySolution,
    spec: &InteractionSpec<P>,
) -> Result<PairSpectrum> {
    spec.validate(sol)?;
    let states = &spec.states;
    if states.is_empty() {
        return Err(Error::InvalidParameter("empty state set".into()));
    }
    let grid = InteractionGrid::new(sol, &spec.potential, spec.order);
    let phi: Vec<Vec<f64>> = states.iter().map(|&s| grid.harmonic(s)).collect();
    let s = states.len();
    let pairs: Vec<(usize, usize)> = (0..s).flat_map(|a| (0..s).map(move |b| (a, b))).collect();
    // V applied to every second-particle density, reused across first-particle pairs
    let applied: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(b, d)| grid.apply_potential(&grid.density(&phi[b], &phi[d])))
        .collect();
    let densities: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(a, c)| grid.density(&phi[a], &phi[c]))
        .collect();
    let dim = pairs.len();
    let e = sol.energies();
    let mut h = Mat::<f64>::zeros(dim, dim);
    for (p, &(a, b)) in pairs.iter().enumerate() {
        for (r, &(c, d)) in pairs.iter().enumerate().take(p + 1) {
            // ⟨ab|V|cd⟩ pairs particle one (a, c) and particle two (b, d)
            let v: f64 = densities[a * s + c]
                .iter()
                .zip(&applied[b * s + d])
                .map(|(x, y)| x * y)
                .sum();
            h[(p, r)] = v;
            h[(r, p)] = v;
        }
        h[(p, p)] += e[states[a]] + e[states[b]];
    }
    let top = *states.iter().max().unwrap();
    let coarse = grid.element(top, top, top, top);
    let fine_grid = InteractionGrid::new(sol, &spec.potential, 2 * spec.order);
    check_converged(
        coarse,
        fine_grid.element(top, top, top, top),
        spec.tolerance,
        fine_grid.v_max,
    )?;

    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenSolver)?;
    let vals = evd.S().column_vector();
    let energies = (0..dim).map(|i| vals[i]).collect();
    Ok(PairSpectrum {
        pairs: pairs.iter().map(|&(a, b)| (states[a], states[b])).collect(),
        matrix: h,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::{solve_profile, BasisSpec};
    use crate::geometry::make_rectangle;

    fn rect() -> CavitySolution {
        let p = make_rectangle(1.0, 1.6, 256).unwrap();
        solve_profile(&p, &BasisSpec::new(5, 4, 6).unwrap()).unwrap()
    }

    #[test]
    fn zero_and_constant_potentials() {
        let sol = rect();
        let zero = InteractionSpec::new(Potential::Constant(0.0), 12, vec![0, 1, 2]);
        assert_eq!(h_ijkl(&sol, (0, 1, 0, 1), &zero).unwrap(), 0.0);
        let c = 0.7;
        let spec = InteractionSpec::new(Potential::Constant(c), 12, vec![0, 1, 2]);
        for t in [(0, 0, 0, 0), (0, 1, 0, 1), (1, 2, 0, 2), (2, 1, 2, 0)] {
            let h = h_ijkl(&sol, t, &spec).unwrap();
            let expect = if t.0 == t.2 && t.1 == t.3 { c } else { 0.0 };
            assert!((h - expect).abs() < 1e-10, "{t:?}: {h}");
        }
        let block = interaction_block(&sol, &spec).unwrap();
        let mut expect: Vec<f64> = [0, 1, 2]
            .iter()
            .flat_map(|&i| [0, 1, 2].map(|j| sol.energies()[i] + sol.energies()[j] + c))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in block.energies.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn exchange_symmetries() {
        let sol = rect();
        let spec = InteractionSpec::new(
            Potential::Gaussian {
                strength: 1.0,
                range: 0.4,
            },
            10,
            vec![],
        );
        let g = InteractionGrid::new(&sol, &spec.potential, 10);
        let a = g.element(0, 1, 2, 3);
        assert!((a - g.element(2, 3, 0, 1)).abs() < 1e-14);
        assert!((a - g.element(1, 0, 3, 2)).abs() < 1e-14);
    }

    #[test]
    fn under_resolved_contact_is_flagged() {
        let sol = rect();
        let mut spec = InteractionSpec::new(
            Potential::Contact {
                strength: 1.0,
                width: 0.02,
            },
            8,
            vec![0],
        );
        spec.tolerance = 1e-8;
        assert!(matches!(
            h_ijkl(&sol, (0, 0, 0, 0), &spec),
            Err(Error::QuadratureNotConverged(_))
        ));
        spec.order = 4;
        assert!(h_ijkl(&sol, (0, 0, 0, 0), &spec).is_err());
    }
}
