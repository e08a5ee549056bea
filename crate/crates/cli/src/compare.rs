//! Prediction versus experiment: fitted β or C against the asymptotics pipeline,
//! plus plot-ready CSV for the gradient law and the ansatz overlay.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use blowuplab_core::params::ModelParams;
use blowuplab_core::rates::{self, Prediction, RateKind};
use blowuplab_meshsim::config::InitialData;
use blowuplab_meshsim::{io, to_self_similar, DdTime, FitKind, FitResult, Observables, Outcome, SimConfig, Snapshot};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{self, sha256_hex};
use crate::simulate::{read_config, FitSpec};

pub const OVERLAY_SAMPLES: usize = 200;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Predicted {
    pub kind: RateKind,
    #[serde(rename = "N")]
    pub n: usize,
    pub exponent: f64,
    pub beta: Option<f64>,
    /// Predicted C in √(T−t)·∂_ru(0,t) = C(−log(T−t) − s₀)^p.
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OverlayRow {
    pub snapshot: usize,
    pub s: f64,
    pub epsilon: f64,
    /// sup over y ∈ [2ε, 1] of |f(y,s) − f_N(y,s)|.
    pub sup_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunComparison {
    pub dir: PathBuf,
    pub d: f64,
    pub k: u32,
    pub initial_data: String,
    #[serde(rename = "M")]
    pub nodes: usize,
    pub outcome: Outcome,
    pub status: String,
    pub predicted: Option<Predicted>,
    pub fitted: Option<FitResult>,
    /// "beta" for power fits, "C" for log fits.
    pub quantity: Option<String>,
    pub relative_error: Option<f64>,
    /// predicted / fitted.
    pub ratio: Option<f64>,
    pub overlay: Vec<OverlayRow>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CAgreement {
    #[serde(rename = "d")]
    pub d: f64,
    pub k: u32,
    pub values: Vec<f64>,
    pub mean: f64,
    /// (max − min)/mean.
    pub relative_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareReport {
    pub out_dir: PathBuf,
    pub runs: Vec<RunComparison>,
    pub c_agreement: Vec<CAgreement>,
}

impl CompareReport {
    pub fn succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.status == "ok")
    }
}

pub fn blowup_time(rows: &[Observables], fit: &FitResult) -> DdTime {
    rows.last().expect("non-empty trace").time().add(fit.tau_last)
}

pub fn predicted(pred: &Prediction) -> Predicted {
    let r = &pred.rate;
    match r.kind {
        RateKind::Power => Predicted { kind: r.kind, n: r.n, exponent: r.exponent, beta: Some(r.exponent - 0.5), c: None },
        RateKind::Logarithmic => Predicted { kind: r.kind, n: r.n, exponent: r.exponent, beta: None, c: Some(1.0 / r.prefactor) },
    }
}

/// (x, y) = (−log(T−t), √(T−t)·∂_ru(0,t)) for samples before T.
pub fn gradient_law(rows: &[Observables], t_blowup: DdTime) -> Vec<(f64, f64)> {
    rows.iter()
        .filter_map(|o| {
            let tau = t_blowup.diff(o.time());
            (tau > 0.0 && o.dr_u0 > 0.0).then(|| (-tau.ln(), tau.sqrt() * o.dr_u0))
        })
        .collect()
}

/// Log-spaced grid on [2ε, 1].
pub fn overlay_grid(eps: f64, samples: usize) -> Vec<f64> {
    let (a, b) = ((2.0 * eps).ln(), 0.0);
    (0..samples).map(|i| (a + (b - a) * i as f64 / (samples - 1) as f64).exp()).collect()
}

/// Ansatz overlay with ε = 1/(C_s √(T−t) ∂_ru(0,t)). Snapshots with ε > 0.1 are skipped.
/// Returns one summary row per usable snapshot and the sampled (y, f, f_N) curves.
pub fn overlay(snaps: &[Snapshot], t_blowup: DdTime, pred: &Prediction, samples: usize) -> Vec<(OverlayRow, Vec<[f64; 3]>)> {
    let cs = pred.profile.cs;
    let mut out = Vec::new();
    for (i, snap) in snaps.iter().enumerate() {
        if !(t_blowup.diff(snap.obs.time()) > 0.0) {
            continue;
        }
        let ss = to_self_similar(snap, t_blowup);
        let eps = ss.epsilon(cs);
        if !(eps > 0.0 && eps <= 0.1) {
            continue;
        }
        let y = overlay_grid(eps, samples);
        let Ok(a) = rates::assemble_ansatz(&pred.profile, &pred.basis, pred.n, eps, &y) else { continue };
        let curve: Vec<[f64; 3]> = y.iter().zip(&a.f).map(|(&y, &fa)| [y, ss.eval(y), fa]).collect();
        let sup = curve.iter().map(|c| (c[1] - c[2]).abs()).fold(0.0, f64::max);
        out.push((OverlayRow { snapshot: i, s: ss.s, epsilon: eps, sup_distance: sup }, curve));
    }
    out
}

/// Compared quantity, relative error and predicted/fitted ratio.
pub fn score(pred: &Predicted, fit: &FitResult) -> (Option<String>, Option<f64>, Option<f64>) {
    match fit.kind {
        FitKind::PowerFit => match (pred.beta, fit.beta) {
            (Some(p), Some(f)) => (Some("beta".into()), Some((f - p).abs() / p.abs()), Some(p / f)),
            _ => (None, None, None),
        },
        FitKind::LogFit => match (pred.c, fit.c) {
            (Some(p), Some(f)) => (Some("C".into()), Some((f - p).abs() / p.abs()), Some(p / f)),
            _ => (None, None, None),
        },
    }
}

fn label(c: &SimConfig) -> String {
    match &c.initial_data {
        InitialData::Named(n) => n.clone(),
        InitialData::Tabulated { .. } => "table".into(),
    }
}

fn write_csv<const W: usize>(path: &Path, header: [&str; W], rows: impl Iterator<Item = [String; W]>) -> CliResult<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn compare_runs(dirs: &[PathBuf], root: &Path) -> CliResult<CompareReport> {
    if dirs.is_empty() {
        return Err(CliError::Config("compare needs at least one run directory".into()));
    }
    let started = manifest::now();
    let key: Vec<String> = dirs.iter().map(|d| d.display().to_string()).collect();
    let out_dir = root.join(format!("compare-{}", &sha256_hex(key.join("\n").as_bytes())[..10]));
    fs::create_dir_all(&out_dir)?;
    let mut preds: BTreeMap<String, Prediction> = BTreeMap::new();
    let mut runs = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let config = read_config(&dir.join("config.json"))?;
        let rows = io::read_trace(&dir.join("trace.csv"))?;
        let summary: io::RunSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
        let mut rc = RunComparison {
            dir: dir.clone(),
            d: config.d,
            k: config.k,
            initial_data: label(&config),
            nodes: config.nodes,
            outcome: summary.outcome,
            status: "ok".into(),
            predicted: None,
            fitted: None,
            quantity: None,
            relative_error: None,
            ratio: None,
            overlay: Vec::new(),
        };
        let pkey = format!("{}:{}", config.d, config.k);
        if !preds.contains_key(&pkey) {
            match rates::predict(&ModelParams::new(config.d, config.k), None) {
                Ok(p) => {
                    preds.insert(pkey.clone(), p);
                }
                Err(e) => rc.status = format!("prediction failed: {e}"),
            }
        }
        let pred = preds.get(&pkey);
        rc.predicted = pred.map(predicted);
        if summary.outcome != Outcome::Blowup {
            rc.status = format!("{:?}", summary.outcome);
            runs.push(rc);
            continue;
        }
        let fit = match fs::read_to_string(dir.join("fit.json")) {
            Ok(t) => serde_json::from_str::<FitResult>(&t)?,
            Err(_) => FitSpec::for_params(config.d, config.k).apply(&rows)?,
        };
        let tb = blowup_time(&rows, &fit);
        write_csv(
            &out_dir.join(format!("gradient-{i}.csv")),
            ["x", "y"],
            gradient_law(&rows, tb).into_iter().map(|(x, y)| [format!("{x:e}"), format!("{y:e}")]),
        )?;
        if let Some(pred) = pred {
            let (q, rel, ratio) = score(rc.predicted.as_ref().unwrap(), &fit);
            rc.quantity = q;
            rc.relative_error = rel;
            rc.ratio = ratio;
            let snaps = (0..summary.snapshots).map(|j| io::read_snapshot(&dir.join("snapshots"), j)).collect::<Result<Vec<_>, _>>()?;
            let ov = overlay(&snaps, tb, pred, OVERLAY_SAMPLES);
            write_csv(
                &out_dir.join(format!("overlay-{i}.csv")),
                ["snapshot", "s", "epsilon", "y", "f", "f_ansatz"],
                ov.iter().flat_map(|(row, curve)| {
                    curve.iter().map(move |c| {
                        [row.snapshot.to_string(), format!("{:e}", row.s), format!("{:e}", row.epsilon), format!("{:e}", c[0]), format!("{:e}", c[1]), format!("{:e}", c[2])]
                    })
                }),
            )?;
            rc.overlay = ov.into_iter().map(|(r, _)| r).collect();
        }
        rc.fitted = Some(fit);
        runs.push(rc);
    }
    let mut groups: BTreeMap<String, (f64, u32, Vec<f64>)> = BTreeMap::new();
    for r in &runs {
        if let Some(c) = r.fitted.as_ref().and_then(|f| f.c) {
            groups.entry(format!("{}:{}", r.d, r.k)).or_insert((r.d, r.k, Vec::new())).2.push(c);
        }
    }
    let c_agreement = groups
        .into_values()
        .filter(|g| g.2.len() >= 2)
        .map(|(d, k, values)| {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            CAgreement { d, k, values, mean, relative_spread: (hi - lo) / mean }
        })
        .collect();
    let report = CompareReport { out_dir: out_dir.clone(), runs, c_agreement };
    fs::write(out_dir.join("compare.json"), serde_json::to_string_pretty(&report)?)?;
    manifest::write_manifest(&out_dir, "compare", None, started)?;
    Ok(report)
}
