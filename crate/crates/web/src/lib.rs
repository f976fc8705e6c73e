//! wasm-bindgen wrapper used by `www/index.html`.

use std::sync::Arc;

use billiard_core::cavity::{solve_profile, BasisSpec, CavitySolution};
use billiard_core::geometry::{make_darmstadt, make_rectangle, BoundaryProfile, DarmstadtParams};
use billiard_core::oned::{barrier_scan, BarrierProblem};
use billiard_core::scattering::{reduced_k_grid, Scatterer};
use wasm_bindgen::prelude::*;

fn js(e: billiard_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Flattened `[E, T_exact, T_rmatrix]` triples; the R-matrix value is NaN at skipped poles.
#[wasm_bindgen]
pub fn barrier_curves(
    v0: f64,
    m_trunc: usize,
    e_min: f64,
    e_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let prob = BarrierProblem::new(v0, m_trunc).map_err(js)?;
    Ok(barrier_scan(&prob, e_min, e_max, points)
        .into_iter()
        .flat_map(|p| [p.energy, p.exact, p.rmatrix.unwrap_or(f64::NAN)])
        .collect())
}

#[wasm_bindgen]
pub struct Cavity {
    solution: Arc<CavitySolution>,
    scatterer: Scatterer,
}

#[wasm_bindgen]
impl Cavity {
    /// Gaussian-over-parabola cavity; `k_keep` is clamped to the basis size.
    pub fn darmstadt(
        alpha: f64,
        beta: f64,
        gamma: f64,
        lambda: f64,
        m_max: usize,
        n_max: usize,
        k_keep: usize,
    ) -> Result<Cavity, JsError> {
        let params = DarmstadtParams {
            alpha,
            beta,
            gamma,
            lambda,
        };
        let profile = make_darmstadt(params, 2048).map_err(js)?;
        Self::build(profile, m_max, n_max, k_keep)
    }

    pub fn rectangle(
        height: f64,
        length: f64,
        m_max: usize,
        n_max: usize,
        k_keep: usize,
    ) -> Result<Cavity, JsError> {
        let profile = make_rectangle(height, length, 2048).map_err(js)?;
        Self::build(profile, m_max, n_max, k_keep)
    }

    fn build(
        profile: BoundaryProfile,
        m_max: usize,
        n_max: usize,
        k_keep: usize,
    ) -> Result<Cavity, JsError> {
        let basis = BasisSpec::new(m_max, n_max, k_keep.min(m_max * n_max)).map_err(js)?;
        let solution = Arc::new(solve_profile(&profile, &basis).map_err(js)?);
        let scatterer = Scatterer::new(Arc::clone(&solution)).map_err(js)?;
        Ok(Cavity {
            solution,
            scatterer,
        })
    }

    pub fn energies(&self) -> Vec<f64> {
        self.solution.energies().to_vec()
    }

    /// `[x_min, x_max, y_min, y_max]` of the cavity.
    pub fn bounds(&self) -> Vec<f64> {
        let p = self.solution.profile();
        let s = p.samples();
        let y_min = s.q.iter().copied().fold(f64::INFINITY, f64::min);
        let y_max = s.p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vec![0.0, p.length(), y_min, y_max]
    }

    /// Eigenfunction `state` on an `nx × ny` grid over [`Cavity::bounds`], row-major from the
    /// top row; NaN outside the walls.
    pub fn mode_image(&self, state: usize, nx: usize, ny: usize) -> Result<Vec<f64>, JsError> {
        let b = self.bounds();
        let mut out = vec![f64::NAN; nx * ny];
        let p = self.solution.profile();
        let mut inside = Vec::new();
        for row in 0..ny {
            let y = b[3] - (b[3] - b[2]) * (row as f64 + 0.5) / ny as f64;
            for col in 0..nx {
                let x = b[1] * (col as f64 + 0.5) / nx as f64;
                if p.to_rectangle(x, y).is_some() {
                    inside.push((row * nx + col, (x, y)));
                }
            }
        }
        let pts: Vec<(f64, f64)> = inside.iter().map(|i| i.1).collect();
        let vals = self.solution.eval_wavefunction(state, &pts).map_err(js)?;
        for ((idx, _), v) in inside.iter().zip(vals) {
            out[*idx] = v;
        }
        Ok(out)
    }

    /// Flattened `[k, T]` pairs over a uniform grid in units of `π/w`; T is NaN where skipped.
    pub fn conductance(&self, k_min: f64, k_max: f64, points: usize) -> Vec<f64> {
        let sweep = self.scatterer.sweep(&reduced_k_grid(k_min, k_max, points));
        sweep
            .points
            .iter()
            .flat_map(|p| [p.k, p.conductance().unwrap_or(f64::NAN)])
            .collect()
    }

    /// Largest `k` (units of `π/w`) the retained spectrum resolves.
    pub fn trusted_k_max(&self) -> f64 {
        self.solution.trusted_k_max() * self.solution.profile().lead_width() / std::f64::consts::PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barrier_curves_are_triples() {
        let v = barrier_curves(1.0, 200, 0.1, 5.0, 11).unwrap();
        assert_eq!(v.len(), 33);
        assert!((v[1] - v[2]).abs() < 1e-2);
    }

    #[test]
    fn cavity_outputs_have_expected_shapes() {
        let c = Cavity::darmstadt(0.161, 0.2, 0.1, 0.432, 16, 6, 60).unwrap();
        assert_eq!(c.energies().len(), 60);
        let img = c.mode_image(0, 40, 12).unwrap();
        assert_eq!(img.len(), 480);
        assert!(img.iter().any(|v| v.is_nan()) && img.iter().any(|v| v.is_finite()));
        let t = c.conductance(1.5, 2.5, 5);
        assert_eq!(t.len(), 10);
        assert!(t
            .chunks(2)
            .all(|p| p[1].is_nan() || (0.0..=2.0).contains(&p[1])));
    }
}
