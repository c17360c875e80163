//! Artifact writing: one directory per run keyed by the configuration
//! digest, CSV tables with fixed schemas, and a manifest with per-file
//! checksums.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use qasp_core::estimate::{
    accumulate_curve, EnergyEstimate, MeasurementStats, PostSelectMode, RhoEstimate,
    TrialEnergies,
};
use qasp_core::pipeline::{Ensemble, SweepRow};
use qasp_core::sim::ShotRecord;

pub struct RunWriter {
    dir: PathBuf,
    config: RunConfig,
    started: std::time::Instant,
    artifacts: Vec<(String, String, u64)>,
    rho_rows: Vec<serde_json::Value>,
}

impl RunWriter {
    pub fn create(base: &Path, config: &RunConfig, started: std::time::Instant) -> Result<Self> {
        let dir = base.join(config.digest());
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            config: config.clone(),
            started,
            artifacts: Vec::new(),
            rho_rows: Vec::new(),
        })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>();
        self.artifacts.push((name.to_string(), digest, bytes.len() as u64));
        Ok(())
    }

    pub fn write_ensemble(&mut self, ensemble: &Ensemble) -> Result<()> {
        let doc = serde_json::json!({
            "schema": "qasp-ensemble/1",
            "pairs": ensemble.pairs,
        });
        self.record("ensemble.json", serde_json::to_string(&doc)?.as_bytes())
    }

    pub fn write_shots(&mut self, records: &[ShotRecord]) -> Result<()> {
        let mut body = String::new();
        for r in records {
            body.push_str(&serde_json::to_string(r)?);
            body.push('\n');
        }
        self.record("shots.jsonl", body.as_bytes())
    }

    pub fn write_stats(&mut self, stats: &MeasurementStats) -> Result<()> {
        let mut body = String::new();
        write_stats_csv_to(&mut body, stats);
        self.record("stats.csv", body.as_bytes())
    }

    pub fn write_mode(
        &mut self,
        mode: PostSelectMode,
        rho: &RhoEstimate,
        estimate: &EnergyEstimate,
        trial: &TrialEnergies,
        e_gs: f64,
    ) -> Result<()> {
        let curve = accumulate_curve(rho, trial);
        let mut body = String::from("circuits,energy_ha,delta_mha,se_mha\n");
        for p in &curve {
            body.push_str(&format!(
                "{},{},{},{}\n",
                p.circuits_used,
                p.energy,
                (p.energy - e_gs) * 1e3,
                p.std_error * 1e3
            ));
        }
        self.record(&format!("curve_{}.csv", mode.label()), body.as_bytes())?;
        self.rho_rows.push(serde_json::json!({
            "mode": mode.label(),
            "rho_plus": rho.rho_plus,
            "se_plus": rho.se_plus,
            "rho_minus": rho.rho_minus,
            "se_minus": rho.se_minus,
            "kept": rho.kept,
            "discarded": rho.discarded,
            "energy_ha": estimate.value,
            "delta_mha": (estimate.value - e_gs) * 1e3,
            "se_mha": estimate.std_error * 1e3,
            "window_saturated": estimate.window_saturated,
        }));
        Ok(())
    }

    pub fn write_rep_energies(
        &mut self,
        rows: &[(usize, PostSelectMode, f64, f64)],
        e_gs: f64,
    ) -> Result<()> {
        let mut body = String::from("repetition,mode,energy_ha,delta_mha,se_mha\n");
        for (rep, mode, e, se) in rows {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                rep,
                mode.label(),
                e,
                (e - e_gs) * 1e3,
                se * 1e3
            ));
        }
        self.record("rep_energies.csv", body.as_bytes())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let rho = serde_json::json!({ "schema": "qasp-rho/1", "rows": self.rho_rows });
        self.record("rho.json", serde_json::to_string_pretty(&rho)?.as_bytes())?;
        let manifest = serde_json::json!({
            "schema": "qasp-manifest/1",
            "config": self.config,
            "config_digest": self.config.digest(),
            "code_version": env!("CARGO_PKG_VERSION"),
            "wall_seconds": self.started.elapsed().as_secs_f64(),
            "artifacts": self.artifacts
                .iter()
                .map(|(name, sha, bytes)| serde_json::json!({
                    "name": name, "sha256": sha, "bytes": bytes,
                }))
                .collect::<Vec<_>>(),
        });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(self.dir)
    }
}

fn write_stats_csv_to(body: &mut String, stats: &MeasurementStats) {
    body.push_str("qubit,zeros,ones\n");
    for (q, (zeros, ones)) in stats
        .physical_zeros
        .iter()
        .zip(&stats.physical_ones)
        .enumerate()
    {
        body.push_str(&format!("{},{},{}\n", q + 1, zeros, ones));
    }
    body.push_str(&format!("ancilla,{},{}\n", stats.ancilla_zeros, stats.ancilla_ones));
}

pub fn write_stats_csv(path: &Path, stats: &MeasurementStats) -> Result<()> {
    let mut body = String::new();
    write_stats_csv_to(&mut body, stats);
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s_central", "tau", "admissible", "expected_tqg", "variance_ha2", "mean_energy_ha"])?;
    for r in rows {
        w.write_record([
            r.s_central.to_string(),
            r.tau.to_string(),
            r.admissible.to_string(),
            r.expected_tqg.to_string(),
            r.variance.map(|v| v.to_string()).unwrap_or_default(),
            r.mean_energy.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
