use std::path::{Path, PathBuf};

use lrchain::meanfield::ConfigMode;
use lrchain::spinwaves::StationaryKind;
use lrchain::{Alpha, Boundary, ChainSpec, Sites};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every input of a run. All fields are optional so that a config file and
/// the command line can be layered; after [`RunConfig::resolve`] every field
/// the command uses is set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<Sites>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin2: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Alpha>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kac_rescale: Option<bool>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_log: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<StationaryKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ConfigMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins_per_decade: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable_only: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clausen_k: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_units: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other;
            command, n_sites, spin2, alpha, j0, b, boundary, kac_rescale,
            b_min, b_max, b_steps, b_log, levels, kind, mode, bins_per_decade,
            stable_only, phi_b, phi_c, zeta, eta, clausen_k,
            output_dir, format, threads, raw_units);
    }

    /// Fills defaults for everything `command` reads.
    pub fn resolve(&mut self, command: &str) {
        let ring = matches!(command, "dispersion" | "gap" | "sublattice");
        self.command = Some(command.to_string());
        self.output_dir.get_or_insert_with(|| PathBuf::from("."));
        self.format.get_or_insert(Format::Csv);
        self.threads.get_or_insert(0);
        self.raw_units.get_or_insert(false);
        if command == "special" {
            if self.clausen_k.is_some() {
                self.alpha.get_or_insert(Alpha::Finite(1.0));
                self.n_sites.get_or_insert(Sites::Infinite);
            }
            return;
        }
        self.n_sites.get_or_insert(Sites::Finite(8));
        self.spin2.get_or_insert(1);
        self.alpha.get_or_insert(Alpha::Finite(1.0));
        self.j0.get_or_insert(1.0);
        self.b.get_or_insert(0.0);
        self.boundary
            .get_or_insert(if ring { Boundary::Periodic } else { Boundary::Open });
        self.kac_rescale.get_or_insert(false);
        match command {
            "sweep" => self.grid_defaults(0.0, 3.0, 61, false),
            "gap" => {
                self.grid_defaults(0.0, 5.0, 101, false);
                self.kind.get_or_insert(StationaryKind::Uniform);
            }
            "deviation" => {
                self.grid_defaults(1e-2, 1e2, 60, true);
                self.mode.get_or_insert(ConfigMode::EpsOnly);
            }
            "semiclassical" => {
                self.mode.get_or_insert(ConfigMode::EpsOnly);
            }
            "dispersion" => {
                self.kind.get_or_insert(StationaryKind::Uniform);
            }
            "bifurcations" => {
                self.bins_per_decade.get_or_insert(10);
                self.stable_only.get_or_insert(true);
            }
            "sublattice" => {
                self.phi_b.get_or_insert(1.0);
                self.phi_c.get_or_insert(1.0);
            }
            _ => {}
        }
    }

    fn grid_defaults(&mut self, lo: f64, hi: f64, steps: usize, log: bool) {
        self.b_min.get_or_insert(lo);
        self.b_max.get_or_insert(hi);
        self.b_steps.get_or_insert(steps);
        self.b_log.get_or_insert(log);
    }

    pub fn spec(&self) -> ChainSpec {
        let mut spec = match self.n_sites.unwrap_or(Sites::Finite(8)) {
            Sites::Finite(n) => ChainSpec::new(
                n,
                self.spin2.unwrap_or(1),
                self.alpha.unwrap_or(Alpha::Finite(1.0)),
                self.j0.unwrap_or(1.0),
                self.b.unwrap_or(0.0),
            ),
            Sites::Infinite => ChainSpec::infinite_ring(
                self.spin2.unwrap_or(1),
                self.alpha.unwrap_or(Alpha::Finite(1.0)),
                self.j0.unwrap_or(1.0),
                self.b.unwrap_or(0.0),
            ),
        };
        if let Some(bd) = self.boundary {
            spec = spec.with_boundary(bd);
        }
        spec.with_kac(self.kac_rescale.unwrap_or(false))
    }

    /// Field grid from `b_min`, `b_max`, `b_steps` and `b_log`.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi) = (self.b_min.unwrap_or(0.0), self.b_max.unwrap_or(1.0));
        let steps = self.b_steps.unwrap_or(2);
        let log = self.b_log.unwrap_or(false);
        if steps == 0 || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(CliError::Usage(format!(
                "invalid field grid: b_min = {lo}, b_max = {hi}, b_steps = {steps}"
            )));
        }
        if log && !(lo > 0.0) {
            return Err(CliError::Usage("logarithmic grid needs b_min > 0".into()));
        }
        if steps == 1 {
            return Ok(vec![lo]);
        }
        let t = |i: usize| i as f64 / (steps - 1) as f64;
        Ok((0..steps)
            .map(|i| {
                if i == steps - 1 {
                    hi
                } else if log {
                    (lo.ln() + (hi.ln() - lo.ln()) * t(i)).exp()
                } else {
                    lo + (hi - lo) * t(i)
                }
            })
            .collect())
    }

    /// Factor converting energies to output units.
    pub fn energy_scale(&self) -> f64 {
        let j0 = self.j0.unwrap_or(1.0).abs();
        if self.raw_units.unwrap_or(false) || j0 == 0.0 {
            1.0
        } else {
            1.0 / j0
        }
    }

    pub fn energy_unit(&self) -> &'static str {
        if self.energy_scale() == 1.0 && self.raw_units.unwrap_or(false) {
            "raw"
        } else if self.j0.unwrap_or(1.0) == 0.0 {
            "raw (J0 = 0)"
        } else {
            "|J0|"
        }
    }
}
