//! Length and power spectra of swept transmission amplitudes.
//!
//! `t(L) = ∫ dk t(k) e^{-ikL}` is taken as a plain Riemann sum over a uniform grid of
//! absolute wave numbers, `t(L) = Δk Σ_j t(k_j) e^{-i k_j L}`. After zero-padding to
//! `N` points the FFT gives it on `L_p = 2πp/(NΔk)`, one full period, so that
//! `Σ_p |t(L_p)|² ΔL = 2π Σ_j |t(k_j)|² Δk`.

use std::f64::consts::PI;

use num_complex::Complex64 as c64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scattering::{Sweep, TStore};

/// Relative deviation of a grid step from the mean step tolerated as uniform.
pub const UNIFORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub hann: bool,
    pub zero_pad: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            hann: false,
            zero_pad: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthSpectrum {
    pub lengths: Vec<f64>,
    pub values: Vec<c64>,
    /// Fourier-limited resolution `2π/(k_max - k_min)`.
    pub resolution: f64,
}

impl LengthSpectrum {
    pub fn step(&self) -> f64 {
        self.lengths.get(1).copied().unwrap_or(0.0)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Drops lengths beyond `l_max`.
    pub fn truncated(mut self, l_max: f64) -> Self {
        let keep = self.lengths.partition_point(|&l| l <= l_max);
        self.lengths.truncate(keep);
        self.values.truncate(keep);
        self
    }

    /// CSV with columns `L,re,im,abs`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("L,re,im,abs\n");
        for (l, v) in self.lengths.iter().zip(&self.values) {
            let _ = writeln!(out, "{l:.8},{:.10e},{:.10e},{:.10e}", v.re, v.im, v.norm());
        }
        out
    }
}

fn check_uniform(k: &[f64]) -> Result<f64> {
    if k.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two k samples".into(),
        ));
    }
    let dk = (k[k.len() - 1] - k[0]) / (k.len() - 1) as f64;
    if !(dk > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for w in k.windows(2) {
        if ((w[1] - w[0]) - dk).abs() > UNIFORM_TOL * dk {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(dk)
}

/// `k` are absolute wave numbers on a uniform grid.
pub fn length_spectrum(k: &[f64], t: &[c64], opts: SpectrumOptions) -> Result<LengthSpectrum> {
    if k.len() != t.len() {
        return Err(Error::InvalidParameter(format!(
            "{} wave numbers for {} amplitudes",
            k.len(),
            t.len()
        )));
    }
    let dk = check_uniform(k)?;
    let n = k.len();
    let size = (n * opts.zero_pad.max(1)).next_power_of_two();
    let mut buf = vec![c64::new(0.0, 0.0); size];
    for (j, v) in t.iter().enumerate() {
        let w = if opts.hann {
            0.5 * (1.0 - (2.0 * PI * j as f64 / (n - 1) as f64).cos())
        } else {
            1.0
        };
        buf[j] = v * w;
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let dl = 2.0 * PI / (size as f64 * dk);
    let lengths: Vec<f64> = (0..size).map(|p| p as f64 * dl).collect();
    let values = buf
        .iter()
        .zip(&lengths)
        .map(|(v, &l)| dk * c64::cis(-k[0] * l) * v)
        .collect();
    Ok(LengthSpectrum {
        lengths,
        values,
        resolution: 2.0 * PI / (k[n - 1] - k[0]),
    })
}

/// Fills `None` entries by linear interpolation on the sample index; ends take the nearest value.
pub fn fill_gaps(values: &[Option<c64>]) -> Result<Vec<c64>> {
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    let (&first, &last) = match (known.first(), known.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidParameter(
                "no computed samples to interpolate".into(),
            ))
        }
    };
    let mut out = Vec::with_capacity(values.len());
    let mut next = 0;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            out.push(*v);
            continue;
        }
        if i < first {
            out.push(values[first].unwrap());
        } else if i > last {
            out.push(values[last].unwrap());
        } else {
            while known[next] < i {
                next += 1;
            }
            let (a, b) = (known[next - 1], known[next]);
            let s = (i - a) as f64 / (b - a) as f64;
            out.push(values[a].unwrap() * (1.0 - s) + values[b].unwrap() * s);
        }
    }
    Ok(out)
}

/// Transmission amplitudes on a reduced-k grid, either a live sweep or a t-store.
pub trait TransmissionTable {
    /// Wave numbers in units of `π/w`.
    fn reduced_k(&self) -> Vec<f64>;
    fn lead_width(&self) -> f64;
    /// Open channels per point, `None` where the point was skipped.
    fn channels(&self) -> Vec<Option<usize>>;
    /// `t_{nm}`, one-based, `None` where skipped or closed.
    fn transmission(&self, n: usize, m: usize) -> Vec<Option<c64>>;

    fn wave_numbers(&self) -> Vec<f64> {
        let s = std::f64::consts::PI / self.lead_width();
        self.reduced_k().into_iter().map(|k| k * s).collect()
    }
}

impl TransmissionTable for Sweep {
    fn reduced_k(&self) -> Vec<f64> {
        Sweep::reduced_k(self)
    }
    fn lead_width(&self) -> f64 {
        self.lead_width
    }
    fn channels(&self) -> Vec<Option<usize>> {
        self.points
            .iter()
            .map(|p| p.matrix().map(|s| s.channels()))
            .collect()
    }
    fn transmission(&self, n: usize, m: usize) -> Vec<Option<c64>> {
        Sweep::transmission(self, n, m)
    }
}

impl TransmissionTable for TStore {
    fn reduced_k(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.k).collect()
    }
    fn lead_width(&self) -> f64 {
        self.lead_width
    }
    fn channels(&self) -> Vec<Option<usize>> {
        self.records
            .iter()
            .map(|r| r.t.as_ref().map(|t| t.nrows()))
            .collect()
    }
    fn transmission(&self, n: usize, m: usize) -> Vec<Option<c64>> {
        self.records
            .iter()
            .map(|r| {
                r.t.as_ref()
                    .filter(|t| t.nrows() >= n.max(m))
                    .map(|t| t[(n - 1, m - 1)])
            })
            .collect()
    }
}

/// Indices of points with reduced `k` inside `[k_min, k_max]`.
fn window_indices(k: &[f64], k_min: f64, k_max: f64) -> Vec<usize> {
    let eps = 1e-9 * k_max.abs().max(1.0);
    (0..k.len())
        .filter(|&i| k[i] >= k_min - eps && k[i] <= k_max + eps)
        .collect()
}

/// Length spectrum of `t_{nm}` over a reduced-k window, interpolating skipped points.
pub fn sweep_length_spectrum<S: TransmissionTable + ?Sized>(
    sweep: &S,
    window: (f64, f64),
    n: usize,
    m: usize,
    opts: SpectrumOptions,
) -> Result<LengthSpectrum> {
    let idx = window_indices(&sweep.reduced_k(), window.0, window.1);
    let all = sweep.transmission(n, m);
    let raw: Vec<Option<c64>> = idx.iter().map(|&i| all[i]).collect();
    let t = fill_gaps(&raw)?;
    let k_abs = sweep.wave_numbers();
    let k: Vec<f64> = idx.iter().map(|&i| k_abs[i]).collect();
    length_spectrum(&k, &t, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub lengths: Vec<f64>,
    pub power: Vec<f64>,
    pub resolution: f64,
}

impl PowerSpectrum {
    pub fn truncated(mut self, l_max: f64) -> Self {
        let keep = self.lengths.partition_point(|&l| l <= l_max);
        self.lengths.truncate(keep);
        self.power.truncate(keep);
        self
    }

    /// `∫ P dL` over `[a, b]` by the rectangle rule on the output grid.
    pub fn band_energy(&self, a: f64, b: f64) -> f64 {
        let dl = self.lengths.get(1).copied().unwrap_or(0.0);
        self.lengths
            .iter()
            .zip(&self.power)
            .filter(|(l, _)| **l >= a && **l <= b)
            .map(|(_, p)| p * dl)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("L,P\n");
        for (l, p) in self.lengths.iter().zip(&self.power) {
            let _ = writeln!(out, "{l:.8},{p:.10e}");
        }
        out
    }
}

/// `P(L) = Σ_{n,m ≤ n_modes} |t_{nm}(L)|²` over a reduced-k window.
pub fn power_spectrum<S: TransmissionTable + Sync + ?Sized>(
    sweep: &S,
    window: (f64, f64),
    n_modes: usize,
    opts: SpectrumOptions,
) -> Result<PowerSpectrum> {
    if n_modes == 0 {
        return Err(Error::InvalidParameter("need at least one mode".into()));
    }
    let channels = sweep.channels();
    for i in window_indices(&sweep.reduced_k(), window.0, window.1) {
        if let Some(open) = channels[i] {
            if open < n_modes {
                return Err(Error::TooFewChannels {
                    open,
                    requested: n_modes,
                });
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (1..=n_modes)
        .flat_map(|n| (1..=n_modes).map(move |m| (n, m)))
        .collect();
    let spectrum = |&(n, m): &(usize, usize)| sweep_length_spectrum(sweep, window, n, m, opts);
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<LengthSpectrum>> = {
        use rayon::prelude::*;
        pairs.par_iter().map(spectrum).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<LengthSpectrum>> = pairs.iter().map(spectrum).collect();
    let mut out: Option<PowerSpectrum> = None;
    for part in parts {
        let part = part?;
        let acc = out.get_or_insert_with(|| PowerSpectrum {
            lengths: part.lengths.clone(),
            power: vec![0.0; part.lengths.len()],
            resolution: part.resolution,
        });
        for (p, v) in acc.power.iter_mut().zip(&part.values) {
            *p += v.norm_sqr();
        }
    }
    Ok(out.expect("at least one mode pair"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub length: f64,
    pub height: f64,
}

/// Local maxima of `values` inside `[l_min, l_max]`, tallest first, refined by a parabola
/// through the three samples around each maximum.
pub fn find_peaks(lengths: &[f64], values: &[f64], l_min: f64, l_max: f64) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if lengths[i] < l_min || lengths[i] > l_max {
            continue;
        }
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 {
                0.5 * (a - c) / denom
            } else {
                0.0
            };
            let step = lengths[i + 1] - lengths[i];
            peaks.push(Peak {
                length: lengths[i] + shift * step,
                height: b - 0.25 * (a - c) * shift,
            });
        }
    }
    peaks.sort_by(|p, q| q.height.total_cmp(&p.height));
    peaks
}

/// Drops peaks that sit within `reach` of a peak at least `ratio` times taller, the
/// leakage side lobes a rectangular window leaves around strong peaks.
pub fn suppress_sidelobes(peaks: &[Peak], reach: f64, ratio: f64) -> Vec<Peak> {
    peaks
        .iter()
        .filter(|p| {
            !peaks
                .iter()
                .any(|q| (q.length - p.length).abs() <= reach && q.height >= ratio * p.height)
        })
        .copied()
        .collect()
}

/// First length at which `values` reaches `fraction` of its maximum over the series.
pub fn echo_onset(lengths: &[f64], values: &[f64], fraction: f64) -> Option<f64> {
    let top = values.iter().cloned().fold(0.0f64, f64::max);
    let level = fraction * top;
    let i = values.iter().position(|&v| v >= level && top > 0.0)?;
    if i == 0 {
        return Some(lengths[0]);
    }
    let s = (level - values[i - 1]) / (values[i] - values[i - 1]);
    Some(lengths[i - 1] + s * (lengths[i] - lengths[i - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k0: f64, k1: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| k0 + (k1 - k0) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn constant_gives_sinc_at_origin() {
        let k = grid(3.0, 9.0, 301);
        let t = vec![c64::new(1.0, 0.0); k.len()];
        let s = length_spectrum(&k, &t, SpectrumOptions::default()).unwrap();
        let mag = s.magnitudes();
        let peak = find_peaks(&s.lengths, &mag, 0.5, 20.0);
        assert!((mag[0] - 6.0 * 301.0 / 300.0).abs() < 1e-12);
        assert!(peak.iter().all(|p| p.height < 0.25 * mag[0]));
        assert!((s.resolution - 2.0 * PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn shift_theorem() {
        let l0 = 4.32;
        let k = grid(6.0 * PI, 9.0 * PI, 400);
        let t: Vec<c64> = k.iter().map(|&k| c64::cis(k * l0)).collect();
        let s = length_spectrum(&k, &t, SpectrumOptions::default()).unwrap();
        let best = find_peaks(&s.lengths, &s.magnitudes(), 0.0, 30.0)[0];
        assert!((best.length - l0).abs() < 0.5 * s.resolution);
        let hann = length_spectrum(
            &k,
            &t,
            SpectrumOptions {
                hann: true,
                zero_pad: 8,
            },
        )
        .unwrap();
        let best = find_peaks(&hann.lengths, &hann.magnitudes(), 0.0, 30.0)[0];
        assert!((best.length - l0).abs() < 0.5 * s.resolution);
    }

    #[test]
    fn side_lobes_of_a_single_echo_are_suppressed() {
        let k = grid(6.0 * PI, 9.0 * PI, 400);
        let t: Vec<c64> = k
            .iter()
            .map(|&k| c64::cis(k * 4.9) + 0.4 * c64::cis(k * 8.0))
            .collect();
        let s = length_spectrum(&k, &t, SpectrumOptions::default())
            .unwrap()
            .truncated(15.0);
        let p: Vec<f64> = s.values.iter().map(|v| v.norm_sqr()).collect();
        let raw = find_peaks(&s.lengths, &p, 0.5, 15.0);
        assert!(raw.len() > 2);
        let clean = suppress_sidelobes(&raw, 2.0 * s.resolution, 4.0);
        assert!((clean[0].length - 4.9).abs() < 0.05);
        assert!((clean[1].length - 8.0).abs() < 0.05);
        assert!(clean
            .iter()
            .skip(2)
            .all(|q| q.height < 0.2 * clean[1].height));
        let wide = grid(PI, 19.0 * PI, 3000);
        let t: Vec<c64> = wide.iter().map(|&k| c64::cis(k * 4.9)).collect();
        let s = length_spectrum(&wide, &t, SpectrumOptions::default())
            .unwrap()
            .truncated(15.0);
        let on = echo_onset(&s.lengths, &s.magnitudes(), 0.1).unwrap();
        // rectangular-window leakage reaches 10% about three resolutions early
        assert!(on < 4.9 && on > 4.9 - 4.0 * s.resolution);
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let mut k = grid(1.0, 2.0, 20);
        k[7] += 1e-4;
        let t = vec![c64::new(1.0, 0.0); 20];
        assert!(matches!(
            length_spectrum(&k, &t, SpectrumOptions::default()),
            Err(Error::NonUniformGrid)
        ));
    }

    #[test]
    fn gaps_are_interpolated() {
        let one = Some(c64::new(1.0, 0.0));
        let three = Some(c64::new(3.0, -3.0));
        let v = fill_gaps(&[None, one, None, three, None]).unwrap();
        assert_eq!(v[0], c64::new(1.0, 0.0));
        assert_eq!(v[2], c64::new(2.0, -1.5));
        assert_eq!(v[4], c64::new(3.0, -3.0));
        assert!(fill_gaps(&[None, None]).is_err());
    }
}
