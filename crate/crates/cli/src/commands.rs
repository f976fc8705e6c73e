//! One function per subcommand. Each validates the whole config first.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use billiard_core::cavity::{
    assemble_hamiltonian_with, load_solution, save_solution, solve_cavity, CavitySolution,
};
use billiard_core::oned::{barrier_scan, BarrierProblem};
use billiard_core::scattering::{
    conductance_onset, find_plateaus, reduced_k_grid, Scatterer, TStore,
};
use billiard_core::spectra::{
    find_peaks, length_spectrum, power_spectrum, suppress_sidelobes, sweep_length_spectrum, Peak,
    SpectrumOptions, TransmissionTable,
};
use billiard_core::twobody::{interaction_block, InteractionSpec};
use num_complex::Complex64 as c64;

use crate::config::RunConfig;
use crate::output::{cache_dir, header, window_tag, write, write_csv};
use crate::Result;

/// Onset level and sustain length used in the sweep summary.
pub const ONSET_LEVEL: f64 = 0.05;
pub const ONSET_SUSTAIN: f64 = 0.3;
pub const PLATEAU_WIDTH: f64 = 0.3;
pub const PLATEAU_VARIATION: f64 = 0.15;

pub struct Solved {
    pub solution: Arc<CavitySolution>,
    pub cache_hit: bool,
    pub energies_csv: PathBuf,
}

/// Diagonalises the cavity, or reloads it from the cache.
pub fn solve_cached(cfg: &RunConfig) -> Result<(Arc<CavitySolution>, bool)> {
    let profile = Arc::new(cfg.profile()?);
    let key = cfg.cavity_key()?;
    let dir = cache_dir(cfg);
    let energies = dir.join(format!("cavity-{}.csv", &key[..16]));
    let coefficients = dir.join(format!("cavity-{}.bin", &key[..16]));
    if cfg.cache && energies.exists() && coefficients.exists() {
        match load_solution(Arc::clone(&profile), &energies, &coefficients) {
            Ok(sol) => {
                log::info!("cache hit: cavity {}", &key[..16]);
                return Ok((Arc::new(sol), true));
            }
            Err(e) => log::warn!("ignoring unreadable cache entry: {e}"),
        }
    }
    let basis = cfg.basis.spec()?;
    log::info!("assembling {}x{} basis", basis.m_max, basis.n_max);
    let h = assemble_hamiltonian_with(&profile, &basis, cfg.basis.assembly())?;
    let sol = solve_cavity(profile, &h, &basis)?;
    if cfg.cache {
        std::fs::create_dir_all(&dir)?;
        save_solution(&sol, &energies, &coefficients)?;
        log::info!("cached cavity {}", &key[..16]);
    }
    Ok((Arc::new(sol), false))
}

pub fn cmd_solve_cavity(cfg: &RunConfig) -> Result<Solved> {
    cfg.validate()?;
    let (solution, cache_hit) = solve_cached(cfg)?;
    let w = solution.profile().lead_width();
    let mut body = String::from("index,E,k_over_piw\n");
    for (j, e) in solution.energies().iter().enumerate() {
        let k = e.max(0.0).sqrt() * w / std::f64::consts::PI;
        let _ = writeln!(body, "{j},{e:.15e},{k:.12}");
    }
    let energies_csv = write_csv(
        cfg,
        "energies.csv",
        &header(cfg, "energies", Some(w)),
        &body,
    )?;
    Ok(Solved {
        solution,
        cache_hit,
        energies_csv,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub points: usize,
    pub skipped: usize,
    pub max_unitarity_defect: f64,
    pub onset: Option<f64>,
    pub plateaus: Vec<(f64, f64)>,
    pub csv: PathBuf,
    pub t_store: PathBuf,
}

fn compute_store(cfg: &RunConfig) -> Result<(TStore, SweepOutcome)> {
    let (sol, _) = solve_cached(cfg)?;
    let scatterer = Scatterer::new(sol)?;
    let grid = reduced_k_grid(cfg.sweep.k_min, cfg.sweep.k_max, cfg.sweep.points);
    log::info!("sweeping {} points", grid.len());
    let sweep = scatterer.sweep(&grid);
    let max_defect = sweep
        .points
        .iter()
        .filter_map(|p| p.matrix())
        .map(|s| s.unitarity_defect())
        .fold(0.0, f64::max);
    let outcome = SweepOutcome {
        csv: sweep.to_csv(),
        skipped: sweep.skipped(),
        max_defect,
    };
    Ok((sweep.t_store(), outcome))
}

struct SweepOutcome {
    csv: String,
    skipped: usize,
    max_defect: f64,
}

fn store_path(cfg: &RunConfig) -> Result<PathBuf> {
    Ok(cache_dir(cfg).join(format!("tstore-{}.bin", &cfg.sweep_key()?[..16])))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let (store, outcome) = compute_store(cfg)?;
    let mut bytes = Vec::new();
    store.write(&mut bytes)?;
    if cfg.cache {
        write(&store_path(cfg)?, &bytes)?;
    }
    let t_store = cfg.output_dir.join("tstore.bin");
    write(&t_store, &bytes)?;
    let csv = write_csv(
        cfg,
        "sweep.csv",
        &header(cfg, "sweep", Some(store.lead_width)),
        &outcome.csv,
    )?;

    let (k, t): (Vec<f64>, Vec<f64>) = store
        .records
        .iter()
        .filter_map(|r| r.t.as_ref().map(|t| (r.k, transmission_sum(t))))
        .unzip();
    Ok(SweepSummary {
        points: store.records.len(),
        skipped: outcome.skipped,
        max_unitarity_defect: outcome.max_defect,
        onset: conductance_onset(&k, &t, ONSET_LEVEL, ONSET_SUSTAIN),
        plateaus: find_plateaus(&k, &t, PLATEAU_WIDTH, PLATEAU_VARIATION),
        csv,
        t_store,
    })
}

fn transmission_sum(t: &faer::Mat<c64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            acc += t[(i, j)].norm_sqr();
        }
    }
    acc
}

/// The sweep's t-store from the cache, computing it if absent.
pub fn load_or_sweep(cfg: &RunConfig) -> Result<TStore> {
    let path = store_path(cfg)?;
    if cfg.cache && path.exists() {
        let file = std::fs::File::open(&path)?;
        match TStore::read(std::io::BufReader::new(file)) {
            Ok(s) => {
                log::info!("cache hit: sweep {}", path.display());
                return Ok(s);
            }
            Err(e) => log::warn!("ignoring unreadable t-store: {e}"),
        }
    }
    let (store, _) = compute_store(cfg)?;
    if cfg.cache {
        let mut bytes = Vec::new();
        store.write(&mut bytes)?;
        write(&path, &bytes)?;
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowReport {
    pub k_min: f64,
    pub k_max: f64,
    pub modes: usize,
    pub resolution: f64,
    pub peaks: Vec<Peak>,
    pub t11_onset: Option<f64>,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<WindowReport>> {
    cfg.validate()?;
    let store = load_or_sweep(cfg)?;
    spectra_from_store(cfg, &store)
}

pub fn spectra_from_store<S: TransmissionTable + Sync>(
    cfg: &RunConfig,
    store: &S,
) -> Result<Vec<WindowReport>> {
    let sc = &cfg.spectrum;
    let opts = SpectrumOptions {
        hann: sc.hann,
        zero_pad: sc.zero_pad,
    };
    let head = header(cfg, "spectrum", Some(store.lead_width()));
    let mut reports = Vec::new();
    for w in &sc.windows {
        let tag = window_tag(w.k_min, w.k_max);
        let power = power_spectrum(store, (w.k_min, w.k_max), w.modes, opts)?.truncated(sc.l_max);
        write_csv(cfg, &format!("power_{tag}.csv"), &head, &power.to_csv())?;
        let t11 = sweep_length_spectrum(store, (w.k_min, w.k_max), 1, 1, opts)?.truncated(sc.l_max);
        write_csv(cfg, &format!("t11_{tag}.csv"), &head, &t11.to_csv())?;

        let raw = find_peaks(
            &power.lengths,
            &power.power,
            0.5 * power.resolution,
            sc.l_max,
        );
        let peaks: Vec<Peak> = suppress_sidelobes(
            &raw,
            sc.sidelobe_reach * power.resolution,
            sc.sidelobe_ratio,
        )
        .into_iter()
        .take(sc.peaks)
        .collect();
        let mut body = String::from("rank,L,P\n");
        for (i, p) in peaks.iter().enumerate() {
            let _ = writeln!(body, "{},{:.6},{:.6e}", i + 1, p.length, p.height);
        }
        write_csv(cfg, &format!("peaks_{tag}.csv"), &head, &body)?;
        reports.push(WindowReport {
            k_min: w.k_min,
            k_max: w.k_max,
            modes: w.modes,
            resolution: power.resolution,
            peaks,
            t11_onset: billiard_core::spectra::echo_onset(&t11.lengths, &t11.magnitudes(), 0.1),
        });
    }
    Ok(reports)
}

/// Transforms `e^{ik L0}` over the first window; the main peak should sit at `L0`.
pub fn shift_self_test(cfg: &RunConfig, l0: f64) -> Result<f64> {
    let w = cfg
        .spectrum
        .windows
        .first()
        .map_or((6.0, 9.0), |w| (w.k_min, w.k_max));
    let k: Vec<f64> = reduced_k_grid(w.0 * std::f64::consts::PI, w.1 * std::f64::consts::PI, 1001);
    let t: Vec<c64> = k.iter().map(|&k| c64::cis(k * l0)).collect();
    let opts = SpectrumOptions {
        hann: cfg.spectrum.hann,
        zero_pad: cfg.spectrum.zero_pad,
    };
    let ls = length_spectrum(&k, &t, opts)?;
    let top = find_peaks(&ls.lengths, &ls.magnitudes(), 0.0, f64::INFINITY);
    Ok(top.first().map_or(f64::NAN, |p| p.length))
}

pub struct OnedSummary {
    pub max_error: f64,
    pub skipped: usize,
    pub csv: PathBuf,
}

pub fn cmd_validate_1d(cfg: &RunConfig) -> Result<OnedSummary> {
    cfg.validate()?;
    let o = &cfg.oned;
    let prob = BarrierProblem::new(o.v0, o.m_trunc)?;
    let scan = barrier_scan(&prob, o.e_min, o.e_max, o.points);
    let mut body = String::from("E,T_exact,T_rmatrix\n");
    let mut max_error = 0.0f64;
    let mut skipped = 0;
    for p in &scan {
        match p.rmatrix {
            Some(t) => {
                max_error = max_error.max((t - p.exact).abs());
                let _ = writeln!(body, "{:.10},{:.12},{:.12}", p.energy, p.exact, t);
            }
            None => {
                skipped += 1;
                let _ = writeln!(body, "{:.10},{:.12},", p.energy, p.exact);
            }
        }
    }
    let csv = write_csv(cfg, "oned.csv", &header(cfg, "barrier", None), &body)?;
    Ok(OnedSummary {
        max_error,
        skipped,
        csv,
    })
}

pub fn cmd_two_body(cfg: &RunConfig) -> Result<(Vec<f64>, PathBuf)> {
    cfg.validate()?;
    let (sol, _) = solve_cached(cfg)?;
    let t = &cfg.twobody;
    let mut spec = InteractionSpec::new(t.potential.potential(), t.order, (0..t.states).collect());
    spec.tolerance = t.tolerance;
    let pairs = interaction_block(&sol, &spec)?;
    let mut free: Vec<f64> = pairs
        .pairs
        .iter()
        .map(|&(a, b)| sol.energies()[a] + sol.energies()[b])
        .collect();
    free.sort_by(f64::total_cmp);
    let mut body = String::from("index,E,E_free\n");
    for (j, (e, f)) in pairs.energies.iter().zip(&free).enumerate() {
        let _ = writeln!(body, "{j},{e:.12e},{f:.12e}");
    }
    let w = sol.profile().lead_width();
    let path = write_csv(
        cfg,
        "twobody.csv",
        &header(cfg, "pair energies", Some(w)),
        &body,
    )?;
    Ok((pairs.energies, path))
}
