//! Cache format: an energies CSV next to a little-endian binary coefficient file.
//!
//! Binary layout: 8-byte magic, `m_max`, `n_max`, `k_keep` as `u64`, `L` as `f64`,
//! then `k_keep × m_max·n_max` coefficients row-major (one eigenfunction per row).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use faer::Mat;

use super::{BasisSpec, CavitySolution};
use crate::error::{Error, Result};
use crate::geometry::BoundaryProfile;

pub const SOLUTION_MAGIC: &[u8; 8] = b"BILLCAV1";

pub fn save_solution(
    sol: &CavitySolution,
    energies_csv: &Path,
    coefficients_bin: &Path,
) -> Result<()> {
    let mut csv = String::from("k,E\n");
    for (k, e) in sol.energies().iter().enumerate() {
        let _ = writeln!(csv, "{k},{e:.17e}");
    }
    fs::write(energies_csv, csv)?;

    let b = sol.basis();
    let mut out = BufWriter::new(fs::File::create(coefficients_bin)?);
    out.write_all(SOLUTION_MAGIC)?;
    for v in [b.m_max as u64, b.n_max as u64, b.k_keep as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    out.write_all(&sol.profile().length().to_le_bytes())?;
    let c = sol.coefficients();
    for k in 0..b.k_keep {
        for l in 0..b.dim() {
            out.write_all(&c[(l, k)].to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Reloads a cached solution for `profile`; the stored length must match.
pub fn load_solution(
    profile: Arc<BoundaryProfile>,
    energies_csv: &Path,
    coefficients_bin: &Path,
) -> Result<CavitySolution> {
    let text = fs::read_to_string(energies_csv)?;
    let energies: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .nth(1)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse(format!("bad energy row: {l}")))
        })
        .collect::<Result<_>>()?;

    let mut r = std::io::BufReader::new(fs::File::open(coefficients_bin)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SOLUTION_MAGIC {
        return Err(Error::Parse("not a cavity coefficient file".into()));
    }
    let m_max = read_u64(&mut r)? as usize;
    let n_max = read_u64(&mut r)? as usize;
    let k_keep = read_u64(&mut r)? as usize;
    let length = f64::from_bits(read_u64(&mut r)?);
    let basis = BasisSpec::new(m_max, n_max, k_keep)?;
    if (length - profile.length()).abs() > 1e-12 * length {
        return Err(Error::Parse(format!(
            "cached solution has length {length}, profile has {}",
            profile.length()
        )));
    }
    if energies.len() != k_keep {
        return Err(Error::Parse(format!(
            "{} energies for {k_keep} coefficient rows",
            energies.len()
        )));
    }
    let dim = basis.dim();
    let mut raw = vec![0u8; 8 * dim * k_keep];
    r.read_exact(&mut raw)?;
    let coefficients = Mat::from_fn(dim, k_keep, |l, k| {
        let off = 8 * (k * dim + l);
        f64::from_le_bytes(raw[off..off + 8].try_into().unwrap())
    });
    Ok(CavitySolution::from_parts(
        profile,
        basis,
        energies,
        coefficients,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::solve_profile;
    use crate::geometry::{make_darmstadt, DarmstadtParams};

    #[test]
    fn save_and_reload_is_exact() {
        let p = make_darmstadt(DarmstadtParams::default(), 512).unwrap();
        let sol = solve_profile(&p, &BasisSpec::new(8, 5, 20).unwrap()).unwrap();
        let dir = std::env::temp_dir().join(format!("billiard-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let (e, c) = (dir.join("e.csv"), dir.join("c.bin"));
        save_solution(&sol, &e, &c).unwrap();
        let back = load_solution(Arc::new(p), &e, &c).unwrap();
        assert_eq!(back.energies(), sol.energies());
        assert_eq!(back.coefficients(), sol.coefficients());
        let other = make_darmstadt(
            DarmstadtParams {
                lambda: 0.5,
                ..Default::default()
            },
            512,
        )
        .unwrap();
        assert!(load_solution(Arc::new(other), &e, &c).is_err());
        fs::remove_dir_all(dir).ok();
    }
}
