#![allow(dead_code)]
//! Independent oracles shared by the integration tests.

use std::f64::consts::PI;

use billiard_core::cavity::{cos_mode, sin_mode, BasisSpec, CavitySolution};
use billiard_core::geometry::BoundaryProfile;
use billiard_core::quadrature::{composite_gauss_legendre, gauss_legendre_on};
use faer::Mat;

/// `c'_m(u)`
fn cos_mode_du(m: usize, u: f64, l: f64) -> f64 {
    if m == 0 {
        0.0
    } else {
        let w = m as f64 * PI / l;
        -(2.0 / l).sqrt() * w * (w * u).sin()
    }
}

fn sin_mode_dv(n: usize, v: f64) -> f64 {
    let w = n as f64 * PI;
    std::f64::consts::SQRT_2 * w * (w * v).cos()
}

/// `∫∫ |∇ψ_a · ∇ψ_b| dx dy` in rectangle coordinates by tensor Gauss quadrature, with
/// `ψ = J^{-1/2} c_m s_n` differentiated directly and the walls evaluated pointwise.
pub fn gauss_hamiltonian(
    profile: &BoundaryProfile,
    basis: &BasisSpec,
    u_panels: usize,
    u_order: usize,
    v_order: usize,
) -> Mat<f64> {
    let l = profile.length();
    let mut breaks = profile.breakpoints();
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        for p in 0..u_panels {
            fine.push(w[0] + (w[1] - w[0]) * p as f64 / u_panels as f64);
        }
    }
    fine.push(l);
    breaks = fine;
    let (un, uw) = composite_gauss_legendre(u_order, &breaks);
    let (vn, vw) = gauss_legendre_on(v_order, 0.0, 1.0);
    let dim = basis.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    let mut psi_u = vec![0.0; dim];
    let mut psi_v = vec![0.0; dim];
    for (ui, &u) in un.iter().enumerate() {
        let wp = profile.at(u);
        let (j, ju, qu) = (wp.j(), wp.j_u(), wp.q_u);
        let g = ju / (2.0 * j);
        let pref = j.powf(-0.5);
        for (vi, &v) in vn.iter().enumerate() {
            let a = qu + v * ju;
            let w = uw[ui] * vw[vi] * j;
            for idx in 0..dim {
                let (m, n) = basis.modes(idx);
                let (c, dc) = (cos_mode(m, u, l), cos_mode_du(m, u, l));
                let (s, ds) = (sin_mode(n, v), sin_mode_dv(n, v));
                psi_u[idx] = pref * (dc - g * c) * s;
                psi_v[idx] = pref * c * ds;
            }
            for p in 0..dim {
                // |∇ψ|² = ψ_u² - 2(a/J) ψ_u ψ_v + (1 + a²)/J² ψ_v²
                let xp = psi_u[p] - a / j * psi_v[p];
                let yp = psi_v[p] / j;
                for q in 0..=p {
                    let xq = psi_u[q] - a / j * psi_v[q];
                    let yq = psi_v[q] / j;
                    h[(p, q)] += w * (xp * xq + yp * yq);
                }
            }
        }
    }
    for p in 0..dim {
        for q in 0..p {
            h[(q, p)] = h[(p, q)];
        }
    }
    h
}

pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> (f64, f64) {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            diff = diff.max((a[(i, j)] - b[(i, j)]).abs());
            scale = scale.max(b[(i, j)].abs());
        }
    }
    (diff, scale)
}

/// Composite Simpson on `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Transmission through the unit barrier by RK4 integration of `ψ'' = (V - E) ψ`
/// from the transmitted wave at `x = 1` back to `x = 0`.
pub fn rk4_barrier_transmission(energy: f64, v0: f64, steps: usize) -> f64 {
    use num_complex::Complex64 as c64;
    let k = energy.sqrt();
    let i = c64::new(0.0, 1.0);
    let mut psi = (i * k).exp();
    let mut dpsi = i * k * psi;
    let h = -1.0 / steps as f64;
    let f = |p: c64| p * (v0 - energy);
    for _ in 0..steps {
        let (k1p, k1d) = (dpsi, f(psi));
        let (k2p, k2d) = (dpsi + 0.5 * h * k1d, f(psi + 0.5 * h * k1p));
        let (k3p, k3d) = (dpsi + 0.5 * h * k2d, f(psi + 0.5 * h * k2p));
        let (k4p, k4d) = (dpsi + h * k3d, f(psi + h * k3p));
        psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    }
    let incoming = 0.5 * (psi + dpsi / (i * k));
    1.0 / incoming.norm_sqr()
}

/// `H_ijkl` as a 4D integral in physical coordinates: `x` Gauss on `[0, L]`, `y` Gauss on
/// `[Q(x), P(x)]`, `ψ = φ / sqrt(J)` evaluated through the inverse map.
pub fn physical_h_ijkl(
    sol: &CavitySolution,
    (i, j, k, l): (usize, usize, usize, usize),
    potential: impl Fn(f64, f64) -> f64,
    nx: usize,
    ny: usize,
) -> f64 {
    let profile = sol.profile();
    let (xn, xw) = gauss_legendre_on(nx, 0.0, profile.length());
    let (yn, yw) = gauss_legendre_on(ny, 0.0, 1.0);
    let mut pts = Vec::new();
    for (a, &x) in xn.iter().enumerate() {
        let wp = profile.at(x);
        let (q, jac) = (wp.q, wp.j());
        for (b, &t) in yn.iter().enumerate() {
            pts.push((x, q + t * jac, xw[a] * yw[b] * jac));
        }
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
    let eval = |s: usize| sol.eval_wavefunction(s, &xy).unwrap();
    let (pi, pj, pk, pl) = (eval(i), eval(j), eval(k), eval(l));
    let mut acc = 0.0;
    for a in 0..pts.len() {
        let fa = pts[a].2 * pi[a] * pk[a];
        if fa == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for b in 0..pts.len() {
            inner += pts[b].2 * pj[b] * pl[b] * potential(pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
        }
        acc += fa * inner;
    }
    acc
}
