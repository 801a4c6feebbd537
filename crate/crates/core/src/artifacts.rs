//! Run directories: `trajectory.csv`, `energy.csv` and `summary.json`.
//! Files are written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::dynamics::{ModalState, RunStats, Termination, Trajectory};
use crate::energy::{BlowupParameters, EnergyRecord};
use crate::error::{Error, Result};
use crate::sources::{classify_exponents, RegimeReport};
use crate::spectrum::RobinEigenpair;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const ENERGY_FILE: &str = "energy.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub samples: usize,
    pub final_time: f64,
    pub sup_energy: f64,
    pub stats: RunStats,
    pub blowup_parameters: Option<BlowupParameters>,
    pub regime: RegimeReport,
    pub eigenpairs: Vec<RobinEigenpair>,
    pub timings: Timings,
    pub config: SimulationConfig,
}

impl RunSummary {
    pub fn from_trajectory(traj: &Trajectory, wall_seconds: f64) -> Result<Self> {
        let last = traj
            .samples
            .last()
            .expect("trajectory has an initial sample");
        Ok(Self {
            termination: traj.termination,
            samples: traj.samples.len(),
            final_time: last.state.t,
            sup_energy: traj.sup_energy(),
            stats: traj.stats.clone(),
            blowup_parameters: traj.params,
            regime: classify_exponents(
                traj.config.p,
                traj.config.sources.q,
                traj.config.sources.r,
            )?,
            eigenpairs: traj.basis.pairs().to_vec(),
            timings: Timings { wall_seconds },
            config: traj.config.clone(),
        })
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>> {
    let n = traj.basis.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("c_{j}")));
    header.extend((1..=n).map(|j| format!("v_{j}")));
    w.write_record(&header)?;
    for s in &traj.samples {
        let mut row = Vec::with_capacity(2 * n + 1);
        row.push(s.state.t);
        row.extend_from_slice(&s.state.c);
        row.extend_from_slice(&s.state.v);
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn energy_csv(records: &[EnergyRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(crate::energy::ENERGY_CSV_COLUMNS)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_run(dir: &Path, traj: &Trajectory, wall_seconds: f64) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(TRAJECTORY_FILE), &trajectory_csv(traj)?)?;
    let records: Vec<EnergyRecord> = traj.records().copied().collect();
    write_atomic(&dir.join(ENERGY_FILE), &energy_csv(&records)?)?;
    let summary = RunSummary::from_trajectory(traj, wall_seconds)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_atomic(&dir.join(SUMMARY_FILE), &json)?;
    Ok(summary)
}

pub fn read_summary(dir: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(dir.join(SUMMARY_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_energy(dir: &Path) -> Result<Vec<EnergyRecord>> {
    let mut r = csv::Reader::from_path(dir.join(ENERGY_FILE))?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn read_trajectory(dir: &Path) -> Result<Vec<ModalState>> {
    let mut r = csv::Reader::from_path(dir.join(TRAJECTORY_FILE))?;
    let cols = r.headers()?.len();
    if cols < 3 || cols % 2 == 0 {
        return Err(Error::Config(format!(
            "{TRAJECTORY_FILE} has {cols} columns"
        )));
    }
    let n = (cols - 1) / 2;
    let mut out = Vec::new();
    for rec in r.deserialize::<Vec<f64>>() {
        let row = rec?;
        if row.len() != cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: row.len(),
            });
        }
        out.push(ModalState {
            t: row[0],
            c: row[1..=n].to_vec(),
            v: row[n + 1..].to_vec(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialProfile;
    use crate::dynamics::simulate;

    #[test]
    fn run_directory_round_trip() {
        let mut cfg = SimulationConfig::new(
            2.5,
            1.25,
            1.25,
            1.0,
            4,
            InitialProfile::Eigenmode {
                j: 1,
                amplitude: 0.3,
            },
        );
        cfg.dt0 = 1e-2;
        cfg.t_end = 0.1;
        let traj = simulate(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &traj, 0.0).unwrap();
        let states = read_trajectory(dir.path()).unwrap();
        assert_eq!(states.len(), traj.samples.len());
        for (a, b) in states.iter().zip(&traj.samples) {
            assert_eq!(a, &b.state);
        }
        let recs = read_energy(dir.path()).unwrap();
        for (a, b) in recs.iter().zip(traj.records()) {
            assert_eq!(a.e_pos, b.e_pos);
            assert_eq!(a.t, b.t);
        }
        let s = read_summary(dir.path()).unwrap();
        assert_eq!(s.config, cfg);
        assert_eq!(s.termination, Termination::Completed);
        let header = std::fs::read_to_string(dir.path().join(ENERGY_FILE)).unwrap();
        assert_eq!(
            header.lines().next().unwrap(),
            crate::energy::ENERGY_CSV_COLUMNS.join(",")
        );
        let th = std::fs::read_to_string(dir.path().join(TRAJECTORY_FILE)).unwrap();
        assert_eq!(
            th.lines().next().unwrap(),
            "t,c_1,c_2,c_3,c_4,v_1,v_2,v_3,v_4"
        );
    }
}
