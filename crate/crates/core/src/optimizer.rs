//! Ask/tell loop: fit the surrogate, maximise the acquisition ensemble with
//! NSGA-II and pick a batch from the resulting fronts.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acquisition::{ei, pi, robustify, ucb};
use crate::design_space::{Configuration, DesignSpace};
use crate::error::{Error, Result};
use crate::moo::{evolve_seeded, Individual, MooConfig};
use crate::rng::{derive_seed, rng_from};
use crate::surrogate::{FitConfig, FittedGP};

const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeboConfig {
    /// Initial-design size; `None` means `max(4, 2d)`.
    pub n_init: Option<usize>,
    pub sigma_n: f64,
    pub beta: f64,
    pub moo: MooConfig,
    pub fit_restarts: usize,
    pub fit_max_iters: usize,
    pub enable_input_warp: bool,
    pub enable_output_transform: bool,
    pub enable_robust: bool,
    pub enable_moo_ensemble: bool,
}

impl Default for HeboConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl HeboConfig {
    pub fn full() -> Self {
        HeboConfig {
            n_init: None,
            sigma_n: 0.01,
            beta: 1.0,
            moo: MooConfig::default(),
            fit_restarts: 3,
            fit_max_iters: 200,
            enable_input_warp: true,
            enable_output_transform: true,
            enable_robust: true,
            enable_moo_ensemble: true,
        }
    }

    /// Plain single-objective EI optimisation on a stationary GP.
    pub fn bo_base() -> Self {
        HeboConfig {
            enable_input_warp: false,
            enable_output_transform: false,
            enable_robust: false,
            enable_moo_ensemble: false,
            ..Self::full()
        }
    }

    pub fn is_bo_base(&self) -> bool {
        !(self.enable_input_warp || self.enable_output_transform || self.enable_robust || self.enable_moo_ensemble)
    }

    pub fn n_init_for(&self, d: usize) -> usize {
        self.n_init.unwrap_or((2 * d).max(4))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init.is_some_and(|n| n < 2) {
            return Err(Error::Config("n_init must be >= 2".into()));
        }
        if !(self.sigma_n >= 0.0) || !(self.beta >= 0.0) {
            return Err(Error::Config("sigma_n and beta must be >= 0".into()));
        }
        self.moo.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// One round of suggestions. `fallback` carries the reason when the batch
/// came from uniform sampling because the surrogate could not be fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub configs: Vec<Configuration>,
    pub fallback: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Hebo {
    space: DesignSpace,
    config: HeboConfig,
    seed: u64,
    iteration: u64,
    configs: Vec<Configuration>,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    model: Option<FittedGP>,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    space: DesignSpace,
    #[serde(default)]
    config: HeboConfig,
    seed: u64,
    #[serde(default)]
    iteration: u64,
    #[serde(default)]
    history: Vec<(Configuration, f64)>,
}

impl Hebo {
    pub fn new(space: DesignSpace, config: HeboConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Hebo { space, config, seed, iteration: 0, configs: Vec::new(), x: Vec::new(), y: Vec::new(), model: None })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn config(&self) -> &HeboConfig {
        &self.config
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Observed `(configuration, value)` pairs in arrival order.
    pub fn history(&self) -> impl Iterator<Item = (&Configuration, f64)> {
        self.configs.iter().zip(self.y.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The surrogate fitted by the latest `suggest`, if it still matches the history.
    pub fn model(&self) -> Option<&FittedGP> {
        self.model.as_ref()
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            restarts: self.config.fit_restarts,
            max_iters: self.config.fit_max_iters,
            grad_tol: 1e-5,
            seed: derive_seed(self.seed, &[self.iteration, 1]),
            warp: self.config.enable_input_warp,
            output_transform: self.config.enable_output_transform,
        }
    }

    /// Propose `q` configurations. Deterministic in `(seed, iteration)`.
    pub fn suggest(&mut self, q: usize) -> Result<Batch> {
        if q == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        let mut rng = rng_from(self.seed, &[self.iteration, 0]);
        if self.y.len() < self.config.n_init_for(self.space.dim()) {
            return Ok(Batch { configs: self.space.sample_uniform(q, &mut rng), fallback: None });
        }
        if self.model.is_none() {
            match FittedGP::fit(&self.x, &self.y, &self.fit_config()) {
                Ok(m) => self.model = Some(m),
                Err(e) => {
                    return Ok(Batch {
                        configs: self.space.sample_uniform(q, &mut rng),
                        fallback: Some(format!("surrogate fit failed, sampled uniformly: {e}")),
                    })
                }
            }
        }
        let model = self.model.as_ref().expect("model fitted above");
        let incumbent = model.t[model.incumbent_index()];
        let seed_genome = model.x[model.incumbent_index()].clone();
        let cfg = &self.config;
        let sigma_n = if cfg.enable_robust { cfg.sigma_n } else { 0.0 };
        let mut noise_rng = rng_from(self.seed, &[self.iteration, 3]);
        let m = if cfg.enable_moo_ensemble { 3 } else { 1 };
        let objective = |u: &[f64]| {
            let Ok((mu, var)) = model.predict_one(u) else { return vec![f64::NAN; m] };
            let s = var.sqrt();
            if cfg.enable_moo_ensemble {
                vec![
                    robustify(ei(mu, s, incumbent), sigma_n, &mut noise_rng),
                    robustify(pi(mu, s, incumbent), sigma_n, &mut noise_rng),
                    robustify(ucb(mu, s, cfg.beta), sigma_n, &mut noise_rng),
                ]
            } else {
                vec![robustify(ei(mu, s, incumbent), sigma_n, &mut noise_rng)]
            }
        };
        let moo = MooConfig { seed: derive_seed(self.seed, &[self.iteration, 2]), ..cfg.moo };
        let pop = evolve_seeded(objective, self.space.dim(), m, &moo, &[seed_genome])?;
        let mut configs = select_batch(&pop, q, &self.space)?;
        if configs.len() < q {
            configs.extend(self.space.sample_uniform(q - configs.len(), &mut rng));
        }
        Ok(Batch { configs, fallback: None })
    }

    /// Record evaluated configurations. Values are maximised.
    pub fn observe(&mut self, configs: &[Configuration], values: &[f64]) -> Result<()> {
        if configs.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: configs.len(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("observed value must be finite, got {v}")));
        }
        let encoded = configs.iter().map(|c| self.space.encode(c)).collect::<Result<Vec<_>>>()?;
        self.configs.extend(configs.iter().cloned());
        self.x.extend(encoded);
        self.y.extend_from_slice(values);
        self.model = None;
        self.iteration += 1;
        Ok(())
    }

    /// Best observation so far; ties go to the earliest.
    pub fn best(&self) -> Result<(Configuration, f64)> {
        let i = (0..self.y.len()).reduce(|b, i| if self.y[i] > self.y[b] { i } else { b }).ok_or(Error::EmptyHistory)?;
        Ok((self.configs[i].clone(), self.y[i]))
    }

    pub fn to_json(&self) -> Result<String> {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            space: self.space.clone(),
            config: self.config.clone(),
            seed: self.seed,
            iteration: self.iteration,
            history: self.configs.iter().cloned().zip(self.y.iter().copied()).collect(),
        };
        Ok(serde_json::to_string_pretty(&snap)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(text)?;
        if snap.version > SNAPSHOT_VERSION {
            return Err(Error::Config(format!("snapshot version {} is newer than supported {SNAPSHOT_VERSION}", snap.version)));
        }
        let mut h = Hebo::new(snap.space, snap.config, snap.seed)?;
        let (configs, values): (Vec<_>, Vec<_>) = snap.history.into_iter().unzip();
        h.observe(&configs, &values)?;
        h.iteration = snap.iteration;
        Ok(h)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Walk the fronts in rank order, each by descending crowding distance, and
/// keep the first `q` genomes whose decoded configurations are distinct.
/// May return fewer than `q` when the population has too few distinct members.
pub fn select_batch(pop: &[Individual], q: usize, space: &DesignSpace) -> Result<Vec<Configuration>> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[a].rank.cmp(&pop[b].rank).then_with(|| pop[b].crowding.total_cmp(&pop[a].crowding)));
    let mut out: Vec<Configuration> = Vec::with_capacity(q);
    for i in order {
        if out.len() == q {
            break;
        }
        let c = space.decode(&pop[i].genome)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}
