//! Slow reference assembly: the quadratic form integrated by tensor Gauss quadrature with
//! the basis functions differentiated directly, bypassing the FFT moments and the v tables.

use std::f64::consts::PI;

use faer::Mat;

use super::{cos_mode, sin_mode, BasisSpec};
use crate::error::Result;
use crate::geometry::BoundaryProfile;
use crate::quadrature::{composite_gauss_legendre, gauss_legendre_on};

/// `panels` Gauss panels of `order` points between each pair of wall breakpoints, `order`
/// points across.
pub fn direct_hamiltonian(
    profile: &BoundaryProfile,
    basis: &BasisSpec,
    panels: usize,
    order: usize,
) -> Result<Mat<f64>> {
    basis.validate()?;
    let l = profile.length();
    let mut breaks = Vec::new();
    for w in profile.breakpoints().windows(2) {
        for p in 0..panels.max(1) {
            breaks.push(w[0] + (w[1] - w[0]) * p as f64 / panels.max(1) as f64);
        }
    }
    breaks.push(l);
    let (un, uw) = composite_gauss_legendre(order, &breaks);
    let (vn, vw) = gauss_legendre_on(order, 0.0, 1.0);
    let dim = basis.dim();
    let mut h = Mat::<f64>::zeros(dim, dim);
    let mut gx = vec![0.0; dim];
    let mut gy = vec![0.0; dim];
    for (&u, &wu) in un.iter().zip(&uw) {
        let wp = profile.at(u);
        let (j, ju) = (wp.j(), wp.j_u());
        let g = ju / (2.0 * j);
        let pref = j.powf(-0.5);
        let c: Vec<(f64, f64)> = (0..basis.m_max)
            .map(|m| {
                let w = m as f64 * PI / l;
                let dc = if m == 0 {
                    0.0
                } else {
                    -(2.0 / l).sqrt() * w * (w * u).sin()
                };
                (cos_mode(m, u, l), dc)
            })
            .collect();
        for (&v, &wv) in vn.iter().zip(&vw) {
            let a = wp.q_u + v * ju;
            for idx in 0..dim {
                let (m, n) = basis.modes(idx);
                let s = sin_mode(n, v);
                let ds = std::f64::consts::SQRT_2 * n as f64 * PI * (n as f64 * PI * v).cos();
                let pu = pref * (c[m].1 - g * c[m].0) * s;
                let pv = pref * c[m].0 * ds;
                gx[idx] = pu - a / j * pv;
                gy[idx] = pv / j;
            }
            let w = wu * wv * j;
            for p in 0..dim {
                for q in 0..=p {
                    h[(p, q)] += w * (gx[p] * gx[q] + gy[p] * gy[q]);
                }
            }
        }
    }
    for p in 0..dim {
        for q in 0..p {
            h[(q, p)] = h[(p, q)];
        }
    }
    Ok(h)
}
