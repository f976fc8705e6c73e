//! Run configuration, read from TOML.

use std::path::PathBuf;

use billiard_core::cavity::{AssemblyOptions, BasisSpec, GridRule};
use billiard_core::geometry::{
    apply_surface_disorder_with, apply_wiggle, make_darmstadt, make_rectangle, BoundaryProfile,
    DarmstadtParams, DisorderDistribution,
};
use billiard_core::twobody::Potential;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub cache: bool,
    pub geometry: GeometryConfig,
    pub basis: BasisConfig,
    pub perturbation: PerturbationConfig,
    pub sweep: SweepConfig,
    pub spectrum: SpectrumConfig,
    pub oned: OnedConfig,
    pub twobody: TwoBodyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            cache: true,
            geometry: GeometryConfig::default(),
            basis: BasisConfig::default(),
            perturbation: PerturbationConfig::default(),
            sweep: SweepConfig::default(),
            spectrum: SpectrumConfig::default(),
            oned: OnedConfig::default(),
            twobody: TwoBodyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Darmstadt {
        alpha: f64,
        beta: f64,
        gamma: f64,
        lambda: f64,
    },
    Rectangle {
        height: f64,
        length: f64,
    },
    /// `u,P,Q` CSV, spline interpolated.
    Tabulated {
        path: PathBuf,
    },
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let p = DarmstadtParams::default();
        GeometryConfig::Darmstadt {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            lambda: p.lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleConfig {
    Midpoint,
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisConfig {
    pub m_max: usize,
    pub n_max: usize,
    pub k_keep: usize,
    /// FFT grid size `M`, a power of two.
    pub grid: usize,
    pub rule: RuleConfig,
    pub endpoint_correction: bool,
}

impl Default for BasisConfig {
    fn default() -> Self {
        let b = BasisSpec::REFERENCE;
        Self {
            m_max: b.m_max,
            n_max: b.n_max,
            k_keep: b.k_keep,
            grid: 4096,
            rule: RuleConfig::Midpoint,
            endpoint_correction: true,
        }
    }
}

impl BasisConfig {
    pub fn spec(&self) -> Result<BasisSpec> {
        Ok(BasisSpec::new(self.m_max, self.n_max, self.k_keep)?)
    }

    pub fn assembly(&self) -> AssemblyOptions {
        AssemblyOptions {
            rule: match self.rule {
                RuleConfig::Midpoint => GridRule::Midpoint,
                RuleConfig::Trapezoid => GridRule::Trapezoid,
            },
            endpoint_correction: self.endpoint_correction,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    pub wiggle: Option<WiggleConfig>,
    pub disorder: Option<DisorderConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WiggleConfig {
    pub amplitude: f64,
    #[serde(default = "default_cycles")]
    pub cycles: u32,
}

fn default_cycles() -> u32 {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionConfig {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub eta: f64,
    pub pieces: usize,
    pub seed: u64,
    #[serde(default = "default_distribution")]
    pub distribution: DistributionConfig,
}

fn default_distribution() -> DistributionConfig {
    DistributionConfig::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// In units of `π/w`.
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_min: 1.0,
            k_max: 19.0,
            points: 3601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub windows: Vec<WindowConfig>,
    pub zero_pad: usize,
    pub hann: bool,
    /// Longest length written out.
    pub l_max: f64,
    /// Peaks this many resolutions from a peak `sidelobe_ratio` times taller are dropped.
    pub sidelobe_reach: f64,
    pub sidelobe_ratio: f64,
    pub peaks: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            windows: vec![
                WindowConfig {
                    k_min: 6.0,
                    k_max: 9.0,
                    modes: 6,
                },
                WindowConfig {
                    k_min: 10.0,
                    k_max: 13.0,
                    modes: 10,
                },
            ],
            zero_pad: 8,
            hann: false,
            l_max: 20.0,
            sidelobe_reach: 2.0,
            sidelobe_ratio: 4.0,
            peaks: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OnedConfig {
    pub v0: f64,
    pub m_trunc: usize,
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
}

impl Default for OnedConfig {
    fn default() -> Self {
        Self {
            v0: 1.0,
            m_trunc: 1000,
            e_min: 0.1,
            e_max: 20.0,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant {
        value: f64,
    },
    Gaussian {
        strength: f64,
        range: f64,
    },
    Contact {
        strength: f64,
        width: f64,
    },
    Separated {
        strength: f64,
        range_x: f64,
        range_y: f64,
    },
}

impl PotentialConfig {
    pub fn potential(&self) -> Potential {
        match *self {
            PotentialConfig::Constant { value } => Potential::Constant(value),
            PotentialConfig::Gaussian { strength, range } => {
                Potential::Gaussian { strength, range }
            }
            PotentialConfig::Contact { strength, width } => Potential::Contact { strength, width },
            PotentialConfig::Separated {
                strength,
                range_x,
                range_y,
            } => Potential::Separated {
                strength,
                range_x,
                range_y,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoBodyConfig {
    pub potential: PotentialConfig,
    pub order: usize,
    pub states: usize,
    pub tolerance: f64,
}

impl Default for TwoBodyConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::Gaussian {
                strength: 1.0,
                range: 0.5,
            },
            order: 32,
            states: 4,
            tolerance: 1e-6,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parses `text` and applies `key.path=value` overrides before deserialising,
    /// so overrides obey the same schema as the file.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Checks every parameter that a command could consume.
    pub fn validate(&self) -> Result<()> {
        let b = self.basis.spec()?;
        if !self.basis.grid.is_power_of_two() || self.basis.grid < 256 {
            return bad(format!(
                "basis.grid must be a power of two >= 256, got {}",
                self.basis.grid
            ));
        }
        if self.basis.grid < 2 * b.m_max {
            return bad(format!(
                "basis.grid must be at least 2 m_max = {}",
                2 * b.m_max
            ));
        }
        if let GeometryConfig::Darmstadt { .. } = self.geometry {
            self.darmstadt_params().unwrap().validate()?;
        }
        let s = &self.sweep;
        if !(s.k_min > 0.0 && s.k_max > s.k_min && s.points >= 2) {
            return bad("sweep needs 0 < k_min < k_max and points >= 2".into());
        }
        for w in &self.spectrum.windows {
            if !(w.k_max > w.k_min && w.modes >= 1) {
                return bad(format!("bad spectrum window [{}, {}]", w.k_min, w.k_max));
            }
            if w.k_min < s.k_min - 1e-9 || w.k_max > s.k_max + 1e-9 {
                return bad(format!(
                    "spectrum window [{}, {}] lies outside the sweep",
                    w.k_min, w.k_max
                ));
            }
        }
        if self.spectrum.zero_pad == 0 {
            return bad("spectrum.zero_pad must be >= 1".into());
        }
        let o = &self.oned;
        if !(o.v0 >= 0.0 && o.m_trunc >= 1 && o.e_min > 0.0 && o.e_max > o.e_min && o.points >= 1) {
            return bad("oned needs v0 >= 0, m_trunc >= 1 and 0 < e_min < e_max".into());
        }
        let t = &self.twobody;
        if t.order < billiard_core::twobody::MIN_ORDER || t.states == 0 || t.states > b.k_keep {
            return bad("twobody needs order >= 8 and 1 <= states <= k_keep".into());
        }
        Ok(())
    }

    fn darmstadt_params(&self) -> Option<DarmstadtParams> {
        match self.geometry {
            GeometryConfig::Darmstadt {
                alpha,
                beta,
                gamma,
                lambda,
            } => Some(DarmstadtParams {
                alpha,
                beta,
                gamma,
                lambda,
            }),
            _ => None,
        }
    }

    /// Builds the profile, perturbations included.
    pub fn profile(&self) -> Result<BoundaryProfile> {
        let m = self.basis.grid;
        let mut p = match &self.geometry {
            GeometryConfig::Darmstadt { .. } => {
                make_darmstadt(self.darmstadt_params().unwrap(), m)?
            }
            GeometryConfig::Rectangle { height, length } => make_rectangle(*height, *length, m)?,
            GeometryConfig::Tabulated { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                BoundaryProfile::from_csv(&text, m)?
            }
        };
        if let Some(w) = &self.perturbation.wiggle {
            p = apply_wiggle(&p, w.amplitude, w.cycles)?;
        }
        if let Some(d) = &self.perturbation.disorder {
            let dist = match d.distribution {
                DistributionConfig::Uniform => DisorderDistribution::Uniform,
                DistributionConfig::Gaussian => DisorderDistribution::Gaussian,
            };
            p = apply_surface_disorder_with(&p, d.eta, d.pieces, d.seed, dist)?;
        }
        Ok(p)
    }

    /// Hash of everything that affects results, stamped on every output. The output
    /// directory and the cache switch are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.cache = true;
        digest(&[&c.to_toml()])
    }

    /// Hash of what determines the cavity solution.
    pub fn cavity_key(&self) -> Result<String> {
        let geometry = match &self.geometry {
            GeometryConfig::Tabulated { path } => std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            g => toml::to_string(g).expect("geometry serialises"),
        };
        Ok(digest(&[
            &geometry,
            &toml::to_string(&self.perturbation).expect("perturbation serialises"),
            &toml::to_string(&self.basis).expect("basis serialises"),
        ]))
    }

    /// Hash of what determines a sweep.
    pub fn sweep_key(&self) -> Result<String> {
        Ok(digest(&[
            &self.cavity_key()?,
            &toml::to_string(&self.sweep).expect("sweep serialises"),
        ]))
    }
}

fn bad<T>(msg: String) -> Result<T> {
    Err(CliError::Config(msg))
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one key");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{k}` in `{path}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// A TOML value if `raw` parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("colour = 3").is_err());
        assert!(RunConfig::from_toml("[basis]\nmmax = 3").is_err());
        assert!(RunConfig::from_toml(
            "[geometry]\nkind = \"rectangle\"\nheight = 1.0\nlength = 2.0\nwidth = 1"
        )
        .is_err());
    }

    #[test]
    fn overrides_follow_the_schema() {
        let o = vec![
            "basis.k_keep=200".to_string(),
            "perturbation.wiggle.amplitude=0.01".to_string(),
            "output_dir=runs/a".to_string(),
        ];
        let cfg = RunConfig::from_toml_with("", &o).unwrap();
        assert_eq!(cfg.basis.k_keep, 200);
        assert_eq!(cfg.perturbation.wiggle.as_ref().unwrap().cycles, 10);
        assert_eq!(cfg.output_dir, PathBuf::from("runs/a"));
        assert!(RunConfig::from_toml_with("", &["basis.nope=1".into()]).is_err());
        assert!(RunConfig::from_toml_with("", &["basis".into()]).is_err());
    }

    #[test]
    fn keys_track_relevant_sections() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.spectrum.zero_pad = 4;
        assert_eq!(a.cavity_key().unwrap(), b.cavity_key().unwrap());
        assert_eq!(a.sweep_key().unwrap(), b.sweep_key().unwrap());
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.output_dir = PathBuf::from("elsewhere");
        c.cache = false;
        assert_eq!(a.hash(), c.hash());
        b.sweep.points = 11;
        assert_ne!(a.sweep_key().unwrap(), b.sweep_key().unwrap());
        b.basis.k_keep = 10;
        assert_ne!(a.cavity_key().unwrap(), b.cavity_key().unwrap());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = RunConfig::default();
        cfg.basis.grid = 1000;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.spectrum.windows[0].k_max = 25.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.geometry = GeometryConfig::Darmstadt {
            alpha: 0.05,
            beta: 0.2,
            gamma: 0.1,
            lambda: 0.432,
        };
        assert!(cfg.validate().is_err());
    }
}
