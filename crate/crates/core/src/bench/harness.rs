//! Benchmark plans: run solvers on builtin functions and write one CSV row per evaluation.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::functions::{lookup, BlackBox};
use crate::design_space::Configuration;
use crate::error::{Error, Result};
use crate::optimizer::{Hebo, HeboConfig};
use crate::rng::{derive_seed, name_hash, rng_from};

fn default_iterations() -> usize {
    16
}

fn default_batch() -> usize {
    8
}

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

/// `name` is `random`, `hebo` or `bo_base`. `config` is a partial
/// [`HeboConfig`] merged over the named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl SolverSpec {
    pub fn named(name: &str) -> Self {
        SolverSpec { name: name.to_owned(), label: None, config: None }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    /// `None` for the random solver.
    pub fn hebo_config(&self) -> Result<Option<HeboConfig>> {
        let base = match self.name.as_str() {
            "random" => return Ok(None),
            "hebo" => HeboConfig::full(),
            "bo_base" => HeboConfig::bo_base(),
            other => return Err(Error::Config(format!("unknown solver `{other}`"))),
        };
        let Some(overrides) = &self.config else { return Ok(Some(base)) };
        let mut value = serde_json::to_value(base)?;
        merge(&mut value, overrides);
        let cfg: HeboConfig = serde_json::from_value(value)
            .map_err(|e| Error::Config(format!("solver `{}` config: {e}", self.label())))?;
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

fn merge(base: &mut serde_json::Value, over: &serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

/// Iteration 0 is a uniform initial batch; iterations `1..=iterations` are acquisition steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub functions: Vec<String>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Record wall-clock milliseconds per row. Off keeps output byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

impl Plan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Plan = serde_json::from_str(text).map_err(|e| Error::Parse { field: "plan".into(), message: e.to_string() })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() || self.solvers.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config("plan needs at least one function, solver and seed".into()));
        }
        if self.batch == 0 {
            return Err(Error::Config("batch must be >= 1".into()));
        }
        for f in &self.functions {
            lookup(f)?;
        }
        let mut labels = Vec::new();
        for s in &self.solvers {
            s.hebo_config()?;
            if labels.contains(&s.label()) {
                return Err(Error::Config(format!("duplicate solver label `{}`", s.label())));
            }
            labels.push(s.label());
        }
        Ok(())
    }
}

/// One evaluation. `loss` is NaN when the evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub function: String,
    pub seed: u64,
    pub iteration: u64,
    pub batch_index: u64,
    pub config_json: String,
    pub loss: f64,
    pub best_so_far: f64,
    pub wall_ms: f64,
}

enum Solver {
    Random { seed: u64, iteration: u64 },
    Hebo(Box<Hebo>),
}

impl Solver {
    fn suggest(&mut self, bb: &BlackBox, q: usize) -> Result<Vec<Configuration>> {
        match self {
            Solver::Random { seed, iteration } => {
                let mut rng = rng_from(*seed, &[*iteration, 0]);
                *iteration += 1;
                Ok(bb.space.sample_uniform(q, &mut rng))
            }
            Solver::Hebo(h) => Ok(h.suggest(q)?.configs),
        }
    }

    fn observe(&mut self, configs: &[Configuration], values: &[f64]) -> Result<()> {
        match self {
            Solver::Random { .. } => Ok(()),
            Solver::Hebo(h) => h.observe(configs, values),
        }
    }
}

/// Run one (solver, function, seed) cell.
pub fn run_cell(plan: &Plan, spec: &SolverSpec, bb: &BlackBox, seed: u64) -> Result<Vec<RunRecord>> {
    // Shared by every solver so all of them start from the same initial design.
    let solver_seed = derive_seed(seed, &[name_hash(&bb.name)]);
    let mut solver = match spec.hebo_config()? {
        None => Solver::Random { seed: solver_seed, iteration: 0 },
        Some(cfg) => Solver::Hebo(Box::new(Hebo::new(bb.space.clone(), cfg, solver_seed)?)),
    };
    let mut records = Vec::new();
    let mut best = f64::INFINITY;
    for iteration in 0..=plan.iterations as u64 {
        let start = Instant::now();
        let configs = solver.suggest(bb, plan.batch)?;
        let mut kept = Vec::new();
        let mut values = Vec::new();
        let mut losses = Vec::new();
        for (k, c) in configs.iter().enumerate() {
            let mut noise = rng_from(seed, &[name_hash(&bb.name), iteration, k as u64]);
            let loss = bb.eval(c, &mut noise).ok().filter(|v| v.is_finite()).unwrap_or(f64::NAN);
            if loss.is_finite() {
                kept.push(c.clone());
                values.push(-loss);
            }
            losses.push(loss);
        }
        solver.observe(&kept, &values)?;
        let wall_ms = if plan.timing { start.elapsed().as_secs_f64() * 1e3 / configs.len() as f64 } else { 0.0 };
        for (k, (c, loss)) in configs.iter().zip(losses).enumerate() {
            if loss < best {
                best = loss;
            }
            records.push(RunRecord {
                solver: spec.label().to_owned(),
                function: bb.name.clone(),
                seed,
                iteration,
                batch_index: k as u64,
                config_json: c.to_json(),
                loss,
                best_so_far: best,
                wall_ms,
            });
        }
    }
    Ok(records)
}

/// Run every cell in (solver, function, seed) order.
pub fn run_plan(plan: &Plan) -> Result<Vec<RunRecord>> {
    plan.validate()?;
    let functions = plan.functions.iter().map(|f| lookup(f)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for spec in &plan.solvers {
        for bb in &functions {
            for &seed in &plan.seeds {
                out.extend(run_cell(plan, spec, bb, seed)?);
            }
        }
    }
    Ok(out)
}

pub fn write_records<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan(solvers: &[&str]) -> Plan {
        Plan {
            functions: vec!["branin".into()],
            solvers: solvers.iter().map(|s| SolverSpec::named(s)).collect(),
            iterations: 1,
            batch: 2,
            seeds: vec![0, 1],
            timing: false,
        }
    }

    #[test]
    fn csv_round_trip_and_shape() {
        let mut plan = tiny_plan(&["random"]);
        plan.iterations = 3;
        let records = run_plan(&plan).unwrap();
        assert_eq!(records.len(), 2 * 4 * 2);
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("solver,function,seed,iteration,batch_index,config_json,loss,best_so_far,wall_ms\n"));
        assert_eq!(read_records(&buf[..]).unwrap(), records);
        for w in records.windows(2) {
            if w[0].seed == w[1].seed {
                assert!(w[1].best_so_far <= w[0].best_so_far);
            }
        }
    }

    #[test]
    fn zero_iterations_is_initial_design_only() {
        let mut plan = tiny_plan(&["hebo"]);
        plan.iterations = 0;
        let records = run_plan(&plan).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.iteration == 0));
    }

    #[test]
    fn deterministic_bytes() {
        let plan = tiny_plan(&["random", "bo_base"]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_records(&run_plan(&plan).unwrap(), &mut a).unwrap();
        write_records(&run_plan(&plan).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solvers_share_initial_design() {
        let plan = tiny_plan(&["random", "hebo"]);
        let records = run_plan(&plan).unwrap();
        let first = |s: &str| -> Vec<String> {
            records.iter().filter(|r| r.solver == s && r.iteration == 0).map(|r| r.config_json.clone()).collect()
        };
        assert_eq!(first("random"), first("hebo"));
    }

    #[test]
    fn plan_validation() {
        assert!(Plan::from_json(r#"{"functions":["nope"],"solvers":[{"name":"random"}]}"#).is_err());
        assert!(Plan::from_json(r#"{"functions":["branin"],"solvers":[{"name":"sgd"}]}"#).is_err());
        assert!(Plan::from_json(r#"{"functions":["branin"],"solvers":[{"name":"random"},{"name":"random"}]}"#).is_err());
        let p = Plan::from_json(
            r#"{"functions":["branin"],"solvers":[{"name":"bo_base","label":"ei","config":{"moo":{"pop_size":20}}}]}"#,
        )
        .unwrap();
        assert_eq!((p.iterations, p.batch, p.seeds.len()), (16, 8, 20));
        let cfg = p.solvers[0].hebo_config().unwrap().unwrap();
        assert!(cfg.is_bo_base());
        assert_eq!(cfg.moo.pop_size, 20);
        assert_eq!(cfg.moo.generations, HeboConfig::full().moo.generations);
    }
}
