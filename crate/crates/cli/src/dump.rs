//! Plot-ready dumps of the harmonic map profile and the eigenbasis.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use blowuplab_core::params::{self, ModelParams, SpectrumEntry};
use blowuplab_core::profile::{self, ProfileSummary, TailReport, TrappingReport};
use blowuplab_core::spectral;
use serde::Serialize;

use crate::error::CliResult;
use crate::manifest;
use crate::output::num;

#[derive(Debug, Clone, Serialize)]
pub struct ProfileDump {
    pub dir: PathBuf,
    pub summary: ProfileSummary,
    pub tail: TailReport,
    pub trapping: TrappingSummary,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrappingSummary {
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
    pub min_lower_flux: f64,
    pub min_upper_flux: f64,
}

impl From<&TrappingReport> for TrappingSummary {
    fn from(t: &TrappingReport) -> Self {
        Self {
            max_lower_violation: t.max_lower_violation,
            max_upper_violation: t.max_upper_violation,
            min_lower_flux: t.min_lower_flux,
            min_upper_flux: t.min_upper_flux,
        }
    }
}

/// profile.csv with (x, ξ, v, v', U*) along the orbit, plus profile.json.
pub fn profile_dump(d: f64, k: u32, root: &Path) -> CliResult<ProfileDump> {
    let started = manifest::now();
    let p = ModelParams::new(d, k);
    let sol = profile::solve_profile(&p, &Default::default())?;
    let dir = root.join(format!("profile-d{}-k{}", num(d), k));
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("x,xi,v,v_prime,u\n");
    for (x, v, vp) in sol.orbit() {
        let _ = writeln!(csv, "{x:e},{:e},{v:e},{vp:e},{:e}", x.exp(), 0.5 * (v + std::f64::consts::PI));
    }
    fs::write(dir.join("profile.csv"), csv)?;
    let dump = ProfileDump {
        dir: dir.clone(),
        summary: sol.summary(),
        tail: sol.extract_tail()?,
        trapping: TrappingSummary::from(&sol.check_trapping()),
    };
    fs::write(dir.join("profile.json"), serde_json::to_string_pretty(&dump)?)?;
    manifest::write_manifest(&dir, "profile-dump", None, started)?;
    Ok(dump)
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BasisDump {
    pub dir: PathBuf,
    pub d: f64,
    pub k: u32,
    pub max_n: usize,
    pub spectrum: Vec<SpectrumEntry>,
    pub norm: Vec<f64>,
    /// φ_n(y) ~ c_n y^{−γ} as y → 0.
    pub c_origin: Vec<f64>,
    pub closed_form_c_origin: Vec<f64>,
    pub orthonormality_residual: f64,
}

/// basis.csv with (y, φ_0 … φ_maxN) on a uniform grid, plus basis.json.
pub fn basis_dump(d: f64, k: u32, max_n: usize, y_max: f64, samples: usize, root: &Path) -> CliResult<BasisDump> {
    let started = manifest::now();
    let p = ModelParams::new(d, k);
    let basis = spectral::build_basis(&p, max_n)?;
    let dir = root.join(format!("basis-d{}-k{}", num(d), k));
    fs::create_dir_all(&dir)?;
    let mut csv = String::from("y");
    for n in 0..=max_n {
        let _ = write!(csv, ",phi_{n}");
    }
    csv.push('\n');
    for i in 1..=samples {
        let y = y_max * i as f64 / samples as f64;
        let _ = write!(csv, "{y:e}");
        for n in 0..=max_n {
            let _ = write!(csv, ",{:e}", basis.phi(n, y));
        }
        csv.push('\n');
    }
    fs::write(dir.join("basis.csv"), csv)?;
    let omega = basis.constants.omega;
    let dump = BasisDump {
        dir: dir.clone(),
        d,
        k,
        max_n,
        spectrum: (0..=max_n).map(|n| params::eigenvalue(&p, n)).collect::<Result<Vec<_>, _>>()?,
        norm: basis.norm.clone(),
        c_origin: basis.c_origin.clone(),
        closed_form_c_origin: (0..=max_n).map(|n| spectral::closed_form_origin(omega, n)).collect(),
        orthonormality_residual: basis.orthonormality_residual(),
    };
    fs::write(dir.join("basis.json"), serde_json::to_string_pretty(&dump)?)?;
    manifest::write_manifest(&dir, "basis-dump", None, started)?;
    Ok(dump)
}
