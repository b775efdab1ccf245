//! Experiment configuration files.
//!
//! ```toml
//! [data]
//! source = "synthetic"      # "synthetic", "csv" or "zero"
//! path = "prices.csv"       # csv only, relative to this file
//! assets = 7                # synthetic only; defaults to n_a
//! days = 210                # synthetic only; defaults to the rows needed
//! seed = 42                 # synthetic only
//! delta_t_days = 30
//!
//! [problem]
//! preset = "xs"             # xs, s, m, l, xl, xxl; fields below override it
//! n_t = 2
//! n_a = 3
//! n_r = 1
//! k_budget = 2.0
//! gamma = 1000.0
//! nu = 0.01
//! rho = 1.0
//! initial_holdings = [0.0, 0.0, 0.0]
//!
//! [run]
//! method = "vqe"            # vqe, exhaustive, sa, sae, random
//! ansatz = "real_amplitudes"
//! reps = 3                  # real_amplitudes and ora
//! ranges = [1, 3]           # cyclic
//! optimizer = "de"          # de or cg
//! pop_size = 10
//! generations = 100
//! elitist_pool = 3000
//! max_iter = 500
//! fd_step = 0.001
//! estimator = "exact"       # exact or shots
//! estimator_shots = 2500
//! shots = 10000             # sampling shots (vqe, sae, random)
//! seed = 0
//! sweeps = 1000             # sa
//! restarts = 16             # sa
//! evolution_time = 7.0      # sae; defaults to the preset's time
//! trotter_steps = 700       # sae; defaults to 100 per unit time
//! checkpoints = 11          # sae
//! qubit_cap = 24
//!
//! [output]
//! directory = "out"         # extra CSV artifacts go here when set
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dpo_vqe::market::{
    build_market_model, generate_synthetic_prices, load_prices_csv, MarketModel, RebalanceGrid,
};
use dpo_vqe::optimize::CgConfig;
use dpo_vqe::problem::{DpoConfig, Preset};
use dpo_vqe::sim::DEFAULT_QUBIT_CAP;
use dpo_vqe::vqe::{AnsatzSpec, EstimatorMode, OptimizerSpec, VqeRunConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    #[default]
    Synthetic,
    Csv,
    Zero,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default)]
    pub source: DataSource,
    pub path: Option<PathBuf>,
    pub assets: Option<usize>,
    pub days: Option<usize>,
    #[serde(default = "default_data_seed")]
    pub seed: u64,
    #[serde(default = "default_delta_t")]
    pub delta_t_days: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: DataSource::default(),
            path: None,
            assets: None,
            days: None,
            seed: default_data_seed(),
            delta_t_days: default_delta_t(),
        }
    }
}

fn default_data_seed() -> u64 {
    42
}

fn default_delta_t() -> usize {
    30
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub preset: Option<String>,
    pub n_t: Option<usize>,
    pub n_a: Option<usize>,
    pub n_r: Option<usize>,
    pub k_budget: Option<f64>,
    pub gamma: Option<f64>,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    pub initial_holdings: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub method: Option<String>,
    pub ansatz: Option<String>,
    pub reps: Option<usize>,
    pub ranges: Option<Vec<usize>>,
    pub optimizer: Option<String>,
    pub pop_size: Option<usize>,
    pub generations: Option<usize>,
    pub elitist_pool: Option<usize>,
    pub max_iter: Option<usize>,
    pub fd_step: Option<f64>,
    pub estimator: Option<String>,
    pub estimator_shots: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub sweeps: Option<usize>,
    pub restarts: Option<usize>,
    pub evolution_time: Option<f64>,
    pub trotter_steps: Option<usize>,
    pub checkpoints: Option<usize>,
    pub qubit_cap: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: Self =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn preset(&self) -> Result<Option<Preset>> {
        self.problem
            .preset
            .as_deref()
            .map(|name| {
                Preset::parse(name).ok_or_else(|| {
                    anyhow!("unknown preset {name:?}; expected one of xs, s, m, l, xl, xxl")
                })
            })
            .transpose()
    }

    pub fn dpo_config(&self) -> Result<DpoConfig> {
        let p = &self.problem;
        let base = self.preset()?.map(|preset| preset.shape());
        let pick = |field: Option<usize>, i: usize, name: &str| -> Result<usize> {
            field
                .or_else(|| base.map(|b| [b.0, b.1, b.2][i]))
                .ok_or_else(|| anyhow!("[problem] needs `{name}` or a preset"))
        };
        let n_t = pick(p.n_t, 0, "n_t")?;
        let n_a = pick(p.n_a, 1, "n_a")?;
        let n_r = pick(p.n_r, 2, "n_r")?;
        let k_budget = p
            .k_budget
            .or(base.map(|b| b.3))
            .ok_or_else(|| anyhow!("[problem] needs `k_budget` or a preset"))?;
        let mut config = DpoConfig::new(n_t, n_a, n_r, k_budget)?;
        if let Some(v) = p.gamma {
            config.gamma = v;
        }
        if let Some(v) = p.nu {
            config.nu = v;
        }
        if let Some(v) = p.rho {
            config.rho = v;
        }
        if let Some(h) = &p.initial_holdings {
            config.initial_holdings = h.clone();
        }
        config.validate()?;
        Ok(config)
    }

    /// Checks the data section without reading or generating anything.
    pub fn validate_data(&self, config: &DpoConfig) -> Result<RebalanceGrid> {
        let d = &self.data;
        let grid = RebalanceGrid::new(d.delta_t_days, config.n_t)?;
        match d.source {
            DataSource::Csv if d.path.is_none() => bail!("[data] source = \"csv\" needs `path`"),
            DataSource::Synthetic => {
                if d.assets.is_some_and(|a| a < config.n_a) {
                    bail!("[data] assets must be at least n_a = {}", config.n_a);
                }
                if d.days.is_some_and(|days| days < grid.required_rows()) {
                    bail!(
                        "[data] days must be at least {} for this grid",
                        grid.required_rows()
                    );
                }
            }
            _ => {}
        }
        Ok(grid)
    }

    pub fn market_model(&self, config: &DpoConfig, grid: &RebalanceGrid) -> Result<MarketModel> {
        let d = &self.data;
        let series = match d.source {
            DataSource::Zero => return Ok(MarketModel::zeros(config.n_t, config.n_a)),
            DataSource::Csv => {
                let path = self.base_dir.join(d.path.as_ref().expect("validated"));
                load_prices_csv(&path)
                    .with_context(|| format!("cannot load prices from {}", path.display()))?
            }
            DataSource::Synthetic => generate_synthetic_prices(
                d.assets.unwrap_or(config.n_a),
                d.days.unwrap_or(grid.required_rows()),
                d.seed,
            )?,
        };
        let series = series.select_assets(config.n_a)?;
        Ok(build_market_model(&series, grid)?)
    }

    pub fn ansatz(&self) -> Result<AnsatzSpec> {
        let r = &self.run;
        let name = r.ansatz.as_deref().unwrap_or("real_amplitudes");
        Self::ansatz_named(name, r.reps, r.ranges.clone())
    }

    pub fn ansatz_named(
        name: &str,
        reps: Option<usize>,
        ranges: Option<Vec<usize>>,
    ) -> Result<AnsatzSpec> {
        Ok(match name {
            "cyclic" => match ranges {
                Some(ranges) => AnsatzSpec::Cyclic { ranges },
                None => AnsatzSpec::cyclic(),
            },
            "real_amplitudes" => AnsatzSpec::RealAmplitudes {
                reps: reps.unwrap_or(3),
            },
            "ora" => match reps {
                Some(reps) => AnsatzSpec::Ora { reps },
                None => AnsatzSpec::ora(),
            },
            "tailored" => AnsatzSpec::Tailored,
            other => bail!(
                "unknown ansatz {other:?}; expected cyclic, real_amplitudes, ora or tailored"
            ),
        })
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }

    pub fn qubit_cap(&self) -> usize {
        self.run.qubit_cap.unwrap_or(DEFAULT_QUBIT_CAP)
    }

    pub fn vqe_run(&self) -> Result<VqeRunConfig> {
        let r = &self.run;
        let optimizer = match r.optimizer.as_deref().unwrap_or("de") {
            "de" => OptimizerSpec::De {
                pop_size: r.pop_size.unwrap_or(10),
                generations: r.generations.unwrap_or(100),
                elitist_pool: r.elitist_pool,
            },
            "cg" => {
                let d = CgConfig::default();
                OptimizerSpec::Cg {
                    max_iter: r.max_iter.unwrap_or(d.max_iter),
                    fd_step: r.fd_step.unwrap_or(d.fd_step),
                }
            }
            other => bail!("unknown optimizer {other:?}; expected de or cg"),
        };
        if let OptimizerSpec::De { pop_size, .. } = optimizer {
            if pop_size < 5 {
                bail!("[run] pop_size must be at least 5, got {pop_size}");
            }
        }
        let estimator = match r.estimator.as_deref().unwrap_or("exact") {
            "exact" => EstimatorMode::Exact,
            "shots" => EstimatorMode::Shots,
            other => bail!("unknown estimator {other:?}; expected exact or shots"),
        };
        let mut run = VqeRunConfig::new(self.ansatz()?, optimizer, self.seed());
        run.estimator = estimator;
        run.estimator_shots = r.estimator_shots;
        run.sampler_shots = r.shots;
        run.qubit_cap = self.qubit_cap();
        Ok(run)
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output
            .directory
            .as_ref()
            .map(|d| self.base_dir.join(d))
    }
}
