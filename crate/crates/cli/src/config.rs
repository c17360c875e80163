//! Run configuration: preset defaults, a flat key = value file, and flag
//! overrides, in increasing precedence.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Density,
    Leakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Raw,
    Parity,
    Hf,
    All,
}

/// Everything one simulated experiment needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub hamiltonian: String,
    pub t_sweep: f64,
    pub s_central: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub n_circuits: usize,
    pub shots_per_circuit: usize,
    pub lambda_incoh: f64,
    pub lambda_coh: f64,
    pub lambda_leak: f64,
    pub backend: Backend,
    pub mode: ModeArg,
    pub master_seed: u64,
    pub repetitions: usize,
    /// Use exact per-circuit overlaps instead of sampling shots.
    pub exact_overlaps: bool,
}

impl RunConfig {
    /// The published-experiment preset: T = 8, s = 10, τ = 0.1, ε = 0.04,
    /// 346 circuits, 5 shots each.
    pub fn h3plus_paper() -> Self {
        Self {
            hamiltonian: "bundled".into(),
            t_sweep: 8.0,
            s_central: 10.0,
            tau: 0.1,
            epsilon: 0.04,
            n_circuits: 346,
            shots_per_circuit: 5,
            lambda_incoh: 0.0,
            lambda_coh: 0.0,
            lambda_leak: 0.0,
            backend: Backend::Exact,
            mode: ModeArg::All,
            master_seed: 1,
            repetitions: 1,
            exact_overlaps: false,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "h3plus-paper" => Ok(Self::h3plus_paper()),
            other => bail!("unknown preset '{other}' (available: h3plus-paper)"),
        }
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "hamiltonian" => self.hamiltonian = v.to_string(),
            "t_sweep" => self.t_sweep = v.parse().context("t_sweep")?,
            "s_central" => self.s_central = v.parse().context("s_central")?,
            "tau" => self.tau = v.parse().context("tau")?,
            "epsilon" => self.epsilon = v.parse().context("epsilon")?,
            "n_circuits" => self.n_circuits = v.parse().context("n_circuits")?,
            "shots" | "shots_per_circuit" => {
                self.shots_per_circuit = v.parse().context("shots")?
            }
            "lambda_incoh" => self.lambda_incoh = v.parse().context("lambda_incoh")?,
            "lambda_coh" => self.lambda_coh = v.parse().context("lambda_coh")?,
            "lambda_leak" => self.lambda_leak = v.parse().context("lambda_leak")?,
            "backend" => {
                self.backend = match v {
                    "exact" => Backend::Exact,
                    "density" => Backend::Density,
                    "leakage" => Backend::Leakage,
                    other => bail!("unknown backend '{other}'"),
                }
            }
            "mode" => {
                self.mode = match v {
                    "raw" => ModeArg::Raw,
                    "parity" => ModeArg::Parity,
                    "hf" => ModeArg::Hf,
                    "all" => ModeArg::All,
                    other => bail!("unknown mode '{other}'"),
                }
            }
            "seed" | "master_seed" => self.master_seed = v.parse().context("seed")?,
            "repetitions" => self.repetitions = v.parse().context("repetitions")?,
            "exact_overlaps" => self.exact_overlaps = v.parse().context("exact_overlaps")?,
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// Parse a flat configuration file: one `key = value` per line,
    /// `#` comments.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("config line {}: expected key = value", idx + 1))?;
            self.set(key, value)
                .with_context(|| format!("config line {}", idx + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_circuits == 0 {
            bail!("n_circuits must be at least 1");
        }
        if self.shots_per_circuit == 0 && !self.exact_overlaps {
            bail!("shots must be at least 1 (or request exact overlaps)");
        }
        if !(self.tau > 0.0 && self.tau < std::f64::consts::FRAC_PI_2) {
            bail!("tau must lie in (0, pi/2)");
        }
        if self.t_sweep <= 0.0 || self.s_central <= 0.0 || self.epsilon <= 0.0 {
            bail!("t_sweep, s_central and epsilon must be positive");
        }
        for v in [self.lambda_incoh, self.lambda_coh, self.lambda_leak] {
            if !(0.0..=1.0).contains(&v) {
                bail!("noise rates must lie in [0, 1]");
            }
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        Ok(())
    }

    /// Stable hash of the canonical JSON form; keys the output directory.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let out = hasher.finalize();
        out.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_file_over_preset() {
        let mut c = RunConfig::preset("h3plus-paper").unwrap();
        c.apply_file("# comment\nshots = 7\ntau = 0.2\n").unwrap();
        assert_eq!(c.shots_per_circuit, 7);
        assert_eq!(c.tau, 0.2);
        assert_eq!(c.n_circuits, 346);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::h3plus_paper();
        assert!(c.apply_file("bogus = 1").is_err());
        assert!(c.apply_file("tau = fast").is_err());
    }

    #[test]
    fn zero_shots_fail_validation() {
        let mut c = RunConfig::h3plus_paper();
        c.shots_per_circuit = 0;
        assert!(c.validate().is_err());
        c.exact_overlaps = true;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn digest_tracks_content() {
        let a = RunConfig::h3plus_paper();
        let mut b = RunConfig::h3plus_paper();
        assert_eq!(a.digest(), b.digest());
        b.master_seed = 2;
        assert_ne!(a.digest(), b.digest());
    }
}
