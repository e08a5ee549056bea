//! Run-directory persistence: config.json, trace.csv, snapshots/, fit.json.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{SimError, SimResult};
use crate::fit::FitResult;
use crate::sim::{Observables, RunTrace, Snapshot};

#[derive(Debug, Serialize, Deserialize)]
struct TraceRecord {
    t: f64,
    dr_u0: f64,
    sup_grad: f64,
    energy: f64,
    min_dx: f64,
    t_lo: f64,
    argmax_r: f64,
    layer_nodes: usize,
}

impl From<&Observables> for TraceRecord {
    fn from(o: &Observables) -> Self {
        Self {
            t: o.t,
            dr_u0: o.dr_u0,
            sup_grad: o.sup_grad,
            energy: o.energy,
            min_dx: o.min_dx,
            t_lo: o.t_lo,
            argmax_r: o.argmax_r,
            layer_nodes: o.layer_nodes,
        }
    }
}

impl From<TraceRecord> for Observables {
    fn from(r: TraceRecord) -> Self {
        Observables {
            t: r.t,
            t_lo: r.t_lo,
            dr_u0: r.dr_u0,
            sup_grad: r.sup_grad,
            argmax_r: r.argmax_r,
            energy: r.energy,
            min_dx: r.min_dx,
            layer_nodes: r.layer_nodes,
        }
    }
}

pub fn write_trace(path: &Path, rows: &[Observables]) -> SimResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for o in rows {
        w.serialize(TraceRecord::from(o))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace; t_lo, argmax_r and layer_nodes are optional columns.
pub fn read_trace(path: &Path) -> SimResult<Vec<Observables>> {
    let mut rd = csv::Reader::from_path(path)?;
    let headers = rd.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| SimError::Io(format!("trace missing column {name}")));
    let (ct, cg, cs, ce, cm) = (need("t")?, need("dr_u0")?, need("sup_grad")?, need("energy")?, need("min_dx")?);
    let (clo, ca, cl) = (col("t_lo"), col("argmax_r"), col("layer_nodes"));
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let num = |c: usize| -> SimResult<f64> { rec[c].trim().parse::<f64>().map_err(|e| SimError::Io(format!("bad number {:?}: {e}", &rec[c]))) };
        rows.push(Observables {
            t: num(ct)?,
            t_lo: clo.map(num).transpose()?.unwrap_or(0.0),
            dr_u0: num(cg)?,
            sup_grad: num(cs)?,
            argmax_r: ca.map(num).transpose()?.unwrap_or(0.0),
            energy: num(ce)?,
            min_dx: num(cm)?,
            layer_nodes: cl.map(num).transpose()?.unwrap_or(0.0) as usize,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SnapshotMeta<'a> {
    index: usize,
    step: usize,
    #[serde(flatten)]
    obs: &'a Observables,
}

pub fn write_snapshot(dir: &Path, index: usize, snap: &Snapshot) -> SimResult<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("snap_{index:04}.csv")))?;
    w.write_record(["r", "u"])?;
    for (r, u) in snap.r.iter().zip(&snap.u) {
        w.write_record([format!("{r:e}"), format!("{u:e}")])?;
    }
    w.flush()?;
    let meta = SnapshotMeta { index, step: snap.step, obs: &snap.obs };
    fs::write(dir.join(format!("snap_{index:04}.json")), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, index: usize) -> SimResult<Snapshot> {
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(format!("snap_{index:04}.json")))?)?;
    let obs: Observables = serde_json::from_value(meta.clone())?;
    let step = meta["step"].as_u64().unwrap_or(0) as usize;
    let mut rd = csv::Reader::from_path(dir.join(format!("snap_{index:04}.csv")))?;
    let (mut r, mut u) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec?;
        let p = |i: usize| rec[i].parse::<f64>().map_err(|e| SimError::Io(e.to_string()));
        r.push(p(0)?);
        u.push(p(1)?);
    }
    Ok(Snapshot { step, obs, r, u })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub outcome: crate::sim::Outcome,
    pub steps: usize,
    pub rejected: usize,
    pub max_energy_increase: f64,
    pub snapshots: usize,
}

/// Writes config.json, trace.csv, snapshots/ and summary.json into `dir`.
pub fn write_run(dir: &Path, config: &SimConfig, trace: &RunTrace) -> SimResult<()> {
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
    write_trace(&dir.join("trace.csv"), &trace.rows)?;
    for (i, s) in trace.snapshots.iter().enumerate() {
        write_snapshot(&dir.join("snapshots"), i, s)?;
    }
    let summary = RunSummary {
        outcome: trace.outcome,
        steps: trace.steps,
        rejected: trace.rejected,
        max_energy_increase: trace.max_energy_increase,
        snapshots: trace.snapshots.len(),
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

pub fn write_fit(path: &Path, fit: &FitResult) -> SimResult<()> {
    fs::write(path, serde_json::to_string_pretty(fit)?)?;
    Ok(())
}

pub fn read_config(path: &Path) -> SimResult<SimConfig> {
    let text = fs::read_to_string(path)?;
    let c: SimConfig = serde_json::from_str(&text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    c.validate()?;
    Ok(c)
}
