//! Cosine and sine moments `∫₀^L cos(pπu/L) F(u) du`, `∫₀^L sin(pπu/L) F(u) du`
//! for all `p` at once from one even (odd) extension FFT of the sampled integrand.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::quadrature::fornberg_weights;

/// Where the integrand is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridRule {
    /// `u_i = (i + 1/2) L / M`, `M` samples; even extension is a DCT-II.
    #[default]
    Midpoint,
    /// `u_i = i L / M`, `M + 1` samples; symmetric extension about the end points
    /// with the end samples halved (DCT-I).
    Trapezoid,
}

impl GridRule {
    pub fn points(self, length: f64, m: usize) -> Vec<f64> {
        let h = length / m as f64;
        match self {
            GridRule::Midpoint => (0..m).map(|i| (i as f64 + 0.5) * h).collect(),
            GridRule::Trapezoid => (0..=m).map(|i| i as f64 * h).collect(),
        }
    }
}

/// Stencil width for one-sided end-point derivative estimates.
const STENCIL: usize = 8;

#[derive(Clone)]
pub struct TrigIntegrator {
    rule: GridRule,
    endpoint_correction: bool,
    intervals: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TrigIntegrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrigIntegrator")
            .field("rule", &self.rule)
            .field("endpoint_correction", &self.endpoint_correction)
            .field("intervals", &self.intervals)
            .finish()
    }
}

/// Integrand value and first three derivatives at one end.
#[derive(Debug, Clone, Copy, Default)]
struct EndJet([f64; 4]);

impl TrigIntegrator {
    /// Integrator for `intervals` grid cells (`M`).
    pub fn new(rule: GridRule, intervals: usize, endpoint_correction: bool) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * intervals);
        Self {
            rule,
            endpoint_correction,
            intervals,
            fft,
        }
    }

    pub fn rule(&self) -> GridRule {
        self.rule
    }

    pub fn sample_count(&self) -> usize {
        match self.rule {
            GridRule::Midpoint => self.intervals,
            GridRule::Trapezoid => self.intervals + 1,
        }
    }

    fn end_jets(&self, samples: &[f64], length: f64) -> (EndJet, EndJet) {
        let h = length / self.intervals as f64;
        let offset = match self.rule {
            GridRule::Midpoint => 0.5,
            GridRule::Trapezoid => 0.0,
        };
        let pts: Vec<f64> = (0..STENCIL).map(|i| (i as f64 + offset) * h).collect();
        let w = fornberg_weights(0.0, &pts, 3);
        let n = samples.len();
        let jet = |vals: &mut dyn Iterator<Item = f64>, sign: f64| {
            let v: Vec<f64> = vals.take(STENCIL).collect();
            let mut out = [0.0; 4];
            for (d, row) in w.iter().enumerate() {
                let s: f64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
                // the right end stencil runs backwards: odd derivatives flip sign
                out[d] = if d % 2 == 1 { sign * s } else { s };
            }
            EndJet(out)
        };
        let left = jet(&mut samples.iter().copied(), 1.0);
        let right = jet(&mut (0..n).rev().map(|i| samples[i]), -1.0);
        (left, right)
    }

    /// Returns `(∫cos(pπu/L)F, ∫sin(pπu/L)F)` for `p = 0..count`.
    pub fn integrals(&self, samples: &[f64], length: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(
            samples.len(),
            self.sample_count(),
            "sample count does not match grid"
        );
        let m = self.intervals;
        assert!(count <= m, "requested {count} moments from {m} intervals");
        let h = length / m as f64;
        let two_m = 2 * m;
        let mut even = vec![Complex::new(0.0, 0.0); two_m];
        let mut odd = vec![Complex::new(0.0, 0.0); two_m];
        match self.rule {
            GridRule::Midpoint => {
                for (i, &f) in samples.iter().enumerate() {
                    even[i].re = f;
                    even[two_m - 1 - i].re = f;
                    odd[i].re = f;
                    odd[two_m - 1 - i].re = -f;
                }
            }
            GridRule::Trapezoid => {
                even[0].re = samples[0];
                even[m].re = samples[m];
                for i in 1..m {
                    even[i].re = samples[i];
                    even[two_m - i].re = samples[i];
                    odd[i].re = samples[i];
                    odd[two_m - i].re = -samples[i];
                }
            }
        }
        self.fft.process(&mut even);
        self.fft.process(&mut odd);

        let mut cos = Vec::with_capacity(count);
        let mut sin = Vec::with_capacity(count);
        for p in 0..count {
            match self.rule {
                GridRule::Midpoint => {
                    let shift = Complex::from_polar(1.0, -PI * p as f64 / two_m as f64);
                    cos.push(0.5 * h * (shift * even[p]).re);
                    sin.push(-0.5 * h * (shift * odd[p]).im);
                }
                GridRule::Trapezoid => {
                    cos.push(0.5 * h * even[p].re);
                    sin.push(-0.5 * h * odd[p].im);
                }
            }
        }

        if self.endpoint_correction {
            let (left, right) = self.end_jets(samples, length);
            // Euler–Maclaurin: midpoint error  h²/24 [g'] - 7h⁴/5760 [g'''],
            //                  trapezoid error -h²/12 [g'] + h⁴/720 [g'''].
            let (c2, c4) = match self.rule {
                GridRule::Midpoint => (h * h / 24.0, -7.0 * h.powi(4) / 5760.0),
                GridRule::Trapezoid => (-h * h / 12.0, h.powi(4) / 720.0),
            };
            let [f0, d0, dd0, ddd0] = left.0;
            let [fl, dl, ddl, dddl] = right.0;
            for p in 0..count {
                let w = p as f64 * PI / length;
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                // cos(ωu)F: g' = F', g''' = F''' - 3ω²F' at the ends
                let g1 = sign * dl - d0;
                let g3 = sign * (dddl - 3.0 * w * w * dl) - (ddd0 - 3.0 * w * w * d0);
                cos[p] += c2 * g1 + c4 * g3;
                // sin(ωu)F: g' = ωF, g''' = -ω³F + 3ωF''
                let s1 = sign * w * fl - w * f0;
                let s3 =
                    sign * (-w.powi(3) * fl + 3.0 * w * ddl) - (-w.powi(3) * f0 + 3.0 * w * dd0);
                sin[p] += c2 * s1 + c4 * s3;
            }
        }
        (cos, sin)
    }
}

/// `I_m = ∫₀^L cos(mπu/L) F(u) du` for `m = 0..m_max` from midpoint samples of `F`.
pub fn fft_cosine_integrals(samples: &[f64], length: f64, m_max: usize) -> Vec<f64> {
    TrigIntegrator::new(GridRule::Midpoint, samples.len(), true)
        .integrals(samples, length, m_max)
        .0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midpoint_samples(f: impl Fn(f64) -> f64, l: f64, m: usize) -> Vec<f64> {
        GridRule::Midpoint.points(l, m).into_iter().map(f).collect()
    }

    #[test]
    fn constant_and_single_mode() {
        let l = 2.7;
        let ones = midpoint_samples(|_| 1.0, l, 256);
        let i = fft_cosine_integrals(&ones, l, 20);
        assert!((i[0] - l).abs() < 1e-12);
        assert!(i[1..].iter().all(|x| x.abs() < 1e-12));
        let c1 = midpoint_samples(|u| (PI * u / l).cos(), l, 256);
        let i = fft_cosine_integrals(&c1, l, 20);
        assert!((i[1] - l / 2.0).abs() < 1e-12);
        assert!(i.iter().enumerate().all(|(m, x)| m == 1 || x.abs() < 1e-12));
    }

    #[test]
    fn sine_moments_of_smooth_function() {
        // ∫₀^L sin(pπu/L) e^{-u} du in closed form
        let l = 2.0;
        let exact = |p: usize| {
            let w = p as f64 * PI / l;
            let s = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
            w * (1.0 - s * (-l).exp()) / (1.0 + w * w)
        };
        for rule in [GridRule::Midpoint, GridRule::Trapezoid] {
            let integ = TrigIntegrator::new(rule, 1024, true);
            let samples: Vec<f64> = rule.points(l, 1024).iter().map(|u| (-u).exp()).collect();
            let (_, sin) = integ.integrals(&samples, l, 40);
            for p in 0..40 {
                assert!((sin[p] - exact(p)).abs() < 1e-11, "{rule:?} p={p}");
            }
        }
    }

    #[test]
    fn correction_beats_plain_rule() {
        let l = 2.0;
        let exact: f64 = {
            let w = 3.0 * PI / l;
            // ∫ cos(wu) e^{-u} = (1 - e^{-L} cos(wL)) / (1 + w²) since sin(wL)=0
            (1.0 + (-l).exp()) / (1.0 + w * w)
        };
        let samples = midpoint_samples(|u| (-u).exp(), l, 1024);
        let plain = TrigIntegrator::new(GridRule::Midpoint, 1024, false)
            .integrals(&samples, l, 4)
            .0[3];
        let fixed = TrigIntegrator::new(GridRule::Midpoint, 1024, true)
            .integrals(&samples, l, 4)
            .0[3];
        assert!((plain - exact).abs() > 1e-8);
        assert!((fixed - exact).abs() < 1e-13);
    }
}
