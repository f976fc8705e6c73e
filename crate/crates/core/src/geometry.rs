//! Wall profiles of a two-lead cavity and the bookkeeping of the map
//! `u = x`, `v = (y - Q(x)) / (P(x) - Q(x))` onto the unit-height rectangle.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Relative tolerance on `J(0) = J(L) = w`.
pub const LEAD_MATCH_TOL: f64 = 1e-9;

/// A single-valued wall curve together with its slope.
#[derive(Debug, Clone, PartialEq)]
pub enum Wall {
    Constant(f64),
    /// `scale * exp(-alpha (x - center)^2 / scale^2)`
    Gaussian {
        scale: f64,
        alpha: f64,
        center: f64,
    },
    /// `scale * (offset - curvature (x - center)^2 / scale^2)`
    Parabola {
        scale: f64,
        offset: f64,
        curvature: f64,
        center: f64,
    },
    Spline(CubicSpline),
    /// `amplitude * sin(cycles pi x / length)` switched on over `[start, end]`
    /// with a cubic smoothstep of half-width `blend` at each edge.
    Wiggle {
        amplitude: f64,
        cycles: f64,
        length: f64,
        start: f64,
        end: f64,
        blend: f64,
    },
    Sum(Vec<Wall>),
    /// `inner(length - x)`
    Mirrored {
        inner: Box<Wall>,
        length: f64,
    },
}

fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
    }
}

impl Wall {
    /// Height and slope at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            Wall::Constant(c) => (*c, 0.0),
            Wall::Gaussian {
                scale,
                alpha,
                center,
            } => {
                let d = x - center;
                let e = scale * (-alpha * d * d / (scale * scale)).exp();
                (e, -2.0 * alpha * d / (scale * scale) * e)
            }
            Wall::Parabola {
                scale,
                offset,
                curvature,
                center,
            } => {
                let d = x - center;
                (
                    scale * (offset - curvature * d * d / (scale * scale)),
                    -2.0 * curvature * d / scale,
                )
            }
            Wall::Spline(s) => s.eval(x),
            Wall::Wiggle {
                amplitude,
                cycles,
                length,
                start,
                end,
                blend,
            } => {
                let (on, d_on) = smoothstep((x - start + blend) / (2.0 * blend));
                let (off, d_off) = smoothstep((end + blend - x) / (2.0 * blend));
                let window = on * off;
                if window == 0.0 {
                    return (0.0, 0.0);
                }
                let d_window = (d_on * off - on * d_off) / (2.0 * blend);
                let k = cycles * std::f64::consts::PI / length;
                let (s, c) = (k * x).sin_cos();
                (
                    amplitude * window * s,
                    amplitude * (d_window * s + window * k * c),
                )
            }
            Wall::Sum(parts) => parts.iter().fold((0.0, 0.0), |(v, d), w| {
                let (a, b) = w.eval(x);
                (v + a, d + b)
            }),
            Wall::Mirrored { inner, length } => {
                let (v, d) = inner.eval(length - x);
                (v, -d)
            }
        }
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Wall::Spline(s) => out.extend_from_slice(s.knots()),
            Wall::Wiggle {
                start, end, blend, ..
            } => out.extend([start - blend, start + blend, end - blend, end + blend]),
            Wall::Sum(parts) => parts.iter().for_each(|p| p.collect_breakpoints(out)),
            Wall::Mirrored { inner, length } => {
                let mut inner_pts = Vec::new();
                inner.collect_breakpoints(&mut inner_pts);
                out.extend(inner_pts.into_iter().map(|x| length - x));
            }
            _ => {}
        }
    }
}

/// Parameters of the Gaussian-over-parabola cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarmstadtParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for DarmstadtParams {
    fn default() -> Self {
        Self {
            alpha: 0.161,
            beta: 0.2,
            gamma: 0.1,
            lambda: 0.432,
        }
    }
}

impl DarmstadtParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > self.gamma
            && self.gamma > 0.0
            && self.beta > 0.0
            && self.beta < 1.0
            && self.lambda > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Darmstadt parameters need alpha > gamma > 0, 0 < beta < 1, lambda > 0: {self:?}"
            )))
        }
    }

    /// Distance of the two necks from the cavity centre.
    pub fn neck_offset(&self) -> f64 {
        self.lambda * ((self.alpha / self.gamma).ln() / self.alpha).sqrt()
    }
}

/// Wall samples on the midpoint grid `u_i = (i + 1/2) L / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSamples {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub j: Vec<f64>,
    pub p_u: Vec<f64>,
    pub q_u: Vec<f64>,
    pub j_u: Vec<f64>,
}

/// Point-wise wall data needed by the transformed Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPoint {
    pub p: f64,
    pub q: f64,
    pub p_u: f64,
    pub q_u: f64,
}

impl WallPoint {
    pub fn j(&self) -> f64 {
        self.p - self.q
    }
    pub fn j_u(&self) -> f64 {
        self.p_u - self.q_u
    }
}

/// Upper and lower walls on `[0, L]`, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProfile {
    length: f64,
    upper: Wall,
    lower: Wall,
    lead_width: f64,
    nominal_lead_width: Option<f64>,
    samples: ProfileSamples,
}

impl BoundaryProfile {
    /// Builds a profile on a midpoint grid of `grid_size` points (a power of two).
    pub fn new(length: f64, upper: Wall, lower: Wall, grid_size: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "length must be positive, got {length}"
            )));
        }
        if grid_size < 2 || !grid_size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two, got {grid_size}"
            )));
        }
        let h = length / grid_size as f64;
        let mut s = ProfileSamples {
            u: Vec::with_capacity(grid_size),
            p: Vec::with_capacity(grid_size),
            q: Vec::with_capacity(grid_size),
            j: Vec::with_capacity(grid_size),
            p_u: Vec::with_capacity(grid_size),
            q_u: Vec::with_capacity(grid_size),
            j_u: Vec::with_capacity(grid_size),
        };
        for i in 0..grid_size {
            let u = (i as f64 + 0.5) * h;
            let (p, p_u) = upper.eval(u);
            let (q, q_u) = lower.eval(u);
            s.u.push(u);
            s.p.push(p);
            s.q.push(q);
            s.j.push(p - q);
            s.p_u.push(p_u);
            s.q_u.push(q_u);
            s.j_u.push(p_u - q_u);
        }
        let width_at = |x: f64| upper.eval(x).0 - lower.eval(x).0;
        let (w0, w1) = (width_at(0.0), width_at(length));
        for (u, j) in s.u.iter().zip(&s.j).chain([(&0.0, &w0), (&length, &w1)]) {
            if !(*j > 0.0) {
                return Err(Error::Pinched { at: *u, width: *j });
            }
        }
        if (w1 - w0).abs() > LEAD_MATCH_TOL * w0 {
            return Err(Error::InterfaceMismatch {
                expected: w0,
                found: w1,
            });
        }
        Ok(Self {
            length,
            upper,
            lower,
            lead_width: w0,
            nominal_lead_width: None,
            samples: s,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn lead_width(&self) -> f64 {
        self.lead_width
    }
    /// Lead width quoted for the geometry, when it differs from `J(0)`.
    pub fn nominal_lead_width(&self) -> Option<f64> {
        self.nominal_lead_width
    }
    pub fn grid_size(&self) -> usize {
        self.samples.u.len()
    }
    pub fn samples(&self) -> &ProfileSamples {
        &self.samples
    }
    pub fn upper(&self) -> &Wall {
        &self.upper
    }
    pub fn lower(&self) -> &Wall {
        &self.lower
    }

    pub fn at(&self, x: f64) -> WallPoint {
        let (p, p_u) = self.upper.eval(x);
        let (q, q_u) = self.lower.eval(x);
        WallPoint { p, q, p_u, q_u }
    }

    /// Lower wall and `y`-offset of the lead mouths.
    pub fn interface_floor(&self, right: bool) -> f64 {
        self.lower.eval(if right { self.length } else { 0.0 }).0
    }

    /// Points where the walls are less smooth than analytic (spline knots, blend edges).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.length];
        self.upper.collect_breakpoints(&mut pts);
        self.lower.collect_breakpoints(&mut pts);
        pts.retain(|x| *x >= 0.0 && *x <= self.length);
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * self.length);
        pts
    }

    /// `(u, v)` of a physical point, or `None` outside the cavity.
    pub fn to_rectangle(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        if !(0.0..=self.length).contains(&x) {
            return None;
        }
        let w = self.at(x);
        let v = (y - w.q) / w.j();
        (-1e-12..=1.0 + 1e-12)
            .contains(&v)
            .then_some((x, v.clamp(0.0, 1.0)))
    }

    pub fn to_physical(&self, u: f64, v: f64) -> (f64, f64) {
        let w = self.at(u);
        (u, w.q + v * w.j())
    }

    pub fn min_width(&self) -> f64 {
        self.samples.j.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same cavity reflected about `x = L/2`.
    pub fn mirrored(&self) -> Result<Self> {
        let mirror = |w: &Wall| Wall::Mirrored {
            inner: Box::new(w.clone()),
            length: self.length,
        };
        let mut out = Self::new(
            self.length,
            mirror(&self.upper),
            mirror(&self.lower),
            self.grid_size(),
        )?;
        out.nominal_lead_width = self.nominal_lead_width;
        Ok(out)
    }

    /// Same walls resampled on a different grid.
    pub fn resampled(&self, grid_size: usize) -> Result<Self> {
        let mut out = Self::new(
            self.length,
            self.upper.clone(),
            self.lower.clone(),
            grid_size,
        )?;
        out.nominal_lead_width = self.nominal_lead_width;
        Ok(out)
    }

    /// Walls tabulated at `points + 1` equispaced stations including both ends, as `u,P,Q` CSV.
    pub fn to_csv(&self, points: usize) -> String {
        let mut out = String::from("u,P,Q\n");
        for i in 0..=points {
            let u = self.length * i as f64 / points as f64;
            let w = self.at(u);
            let _ = writeln!(out, "{u:.17e},{:.17e},{:.17e}", w.p, w.q);
        }
        out
    }

    /// Tabulated walls from `u,P,Q` CSV (`#` comments allowed); the first row must be `u = 0`.
    pub fn from_csv(text: &str, grid_size: usize) -> Result<Self> {
        let mut u = Vec::new();
        let mut p = Vec::new();
        let mut q = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {}: expected 3 columns",
                    lineno + 1
                )));
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => {
                    u.push(v[0]);
                    p.push(v[1]);
                    q.push(v[2]);
                }
                Err(_) if u.is_empty() && fields[0].eq_ignore_ascii_case("u") => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            }
        }
        if u.len() < 4 {
            return Err(Error::Parse("need at least four tabulated stations".into()));
        }
        if u[0].abs() > 1e-12 {
            return Err(Error::Parse(format!(
                "first station must be u = 0, got {}",
                u[0]
            )));
        }
        let length = *u.last().unwrap();
        let upper = Wall::Spline(CubicSpline::natural(u.clone(), p)?);
        let lower = Wall::Spline(CubicSpline::natural(u, q)?);
        Self::new(length, upper, lower, grid_size)
    }
}

/// Gaussian upper wall over an inverted-parabola lower wall, centred on `L/2`, `L = 10 lambda`.
pub fn make_darmstadt(params: DarmstadtParams, grid_size: usize) -> Result<BoundaryProfile> {
    params.validate()?;
    if grid_size < 256 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 256, got {grid_size}"
        )));
    }
    let length = 10.0 * params.lambda;
    let center = 0.5 * length;
    let upper = Wall::Gaussian {
        scale: params.lambda,
        alpha: params.alpha,
        center,
    };
    let lower = Wall::Parabola {
        scale: params.lambda,
        offset: params.beta,
        curvature: params.gamma,
        center,
    };
    let mut profile = BoundaryProfile::new(length, upper, lower, grid_size)?;
    // the neck minimum falls between grid points; check it directly
    for x in [center - params.neck_offset(), center + params.neck_offset()] {
        let w = profile.at(x).j();
        if !(w > 0.0) {
            return Err(Error::Pinched { at: x, width: w });
        }
    }
    profile.nominal_lead_width = Some(1.0);
    Ok(profile)
}

pub fn make_rectangle(height: f64, length: f64, grid_size: usize) -> Result<BoundaryProfile> {
    if !(height > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "height must be positive, got {height}"
        )));
    }
    BoundaryProfile::new(
        length,
        Wall::Constant(height),
        Wall::Constant(0.0),
        grid_size,
    )
}

/// Adds a sinusoidal wiggle to the upper wall over `9L/20 < x < 11L/20`.
pub fn apply_wiggle(
    profile: &BoundaryProfile,
    amplitude: f64,
    cycles: u32,
) -> Result<BoundaryProfile> {
    if amplitude == 0.0 {
        return Ok(profile.clone());
    }
    let l = profile.length;
    let wiggle = Wall::Wiggle {
        amplitude,
        cycles: cycles as f64,
        length: l,
        start: 9.0 * l / 20.0,
        end: 11.0 * l / 20.0,
        blend: l / 200.0,
    };
    let upper = Wall::Sum(vec![profile.upper.clone(), wiggle]);
    let mut out = BoundaryProfile::new(l, upper, profile.lower.clone(), profile.grid_size())?;
    out.nominal_lead_width = profile.nominal_lead_width;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisorderDistribution {
    /// Uniform on `[-eta/2, eta/2]`.
    #[default]
    Uniform,
    /// Normal with standard deviation `eta/2`.
    Gaussian,
}

/// Displaces `pieces` segments of the lower wall vertically and joins them with a natural
/// cubic spline through the segment centres; the wall is pinned at both lead mouths.
pub fn apply_surface_disorder(
    profile: &BoundaryProfile,
    eta: f64,
    pieces: usize,
    seed: u64,
) -> Result<BoundaryProfile> {
    apply_surface_disorder_with(profile, eta, pieces, seed, DisorderDistribution::Uniform)
}

pub fn apply_surface_disorder_with(
    profile: &BoundaryProfile,
    eta: f64,
    pieces: usize,
    seed: u64,
    distribution: DisorderDistribution,
) -> Result<BoundaryProfile> {
    if pieces < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 pieces, got {pieces}"
        )));
    }
    if !(eta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    let l = profile.length;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut knots = Vec::with_capacity(pieces + 2);
    let mut shifts = Vec::with_capacity(pieces + 2);
    knots.push(0.0);
    shifts.push(0.0);
    let normal = Normal::new(0.0, 0.5 * eta.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    for k in 0..pieces {
        knots.push((k as f64 + 0.5) * l / pieces as f64);
        let shift = match distribution {
            DisorderDistribution::Uniform => eta * (rng.random::<f64>() - 0.5),
            DisorderDistribution::Gaussian if eta > 0.0 => normal.sample(&mut rng),
            DisorderDistribution::Gaussian => 0.0,
        };
        shifts.push(shift);
    }
    knots.push(l);
    shifts.push(0.0);
    let spline = CubicSpline::natural(knots, shifts)?;
    let lower = Wall::Sum(vec![profile.lower.clone(), Wall::Spline(spline)]);
    let mut out = BoundaryProfile::new(l, profile.upper.clone(), lower, profile.grid_size())?;
    out.nominal_lead_width = profile.nominal_lead_width;
    Ok(out)
}
