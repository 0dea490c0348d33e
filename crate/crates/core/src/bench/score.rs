//! Normalised scores: 0 is the optimum, 100 is the random baseline.

use serde::{Deserialize, Serialize};

use crate::bench::functions::lookup;
use crate::bench::harness::RunRecord;
use crate::error::{Error, Result};

/// `100 * (loss - l_star) / (l_rand - l_star)`.
pub fn normalized_score(loss: f64, l_star: f64, l_rand: f64) -> Result<f64> {
    if l_rand == l_star {
        return Err(Error::Degenerate("random baseline equals the optimum, score undefined".into()));
    }
    Ok(100.0 * (loss - l_star) / (l_rand - l_star))
}

/// Linear-interpolation quantile of sorted data, `q` in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub solver: String,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub p40: f64,
    pub p30: f64,
    pub p20: f64,
    pub p5: f64,
    /// `100 - mean`.
    pub improvement: f64,
}

impl ScoreStats {
    fn from_scores(solver: &str, scores: &[f64]) -> Self {
        let n = scores.len();
        let mean = scores.iter().sum::<f64>() / n as f64;
        let std = if n > 1 { (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        ScoreStats {
            solver: solver.to_owned(),
            n,
            mean,
            std,
            median: quantile(&sorted, 0.5),
            p40: quantile(&sorted, 0.4),
            p30: quantile(&sorted, 0.3),
            p20: quantile(&sorted, 0.2),
            p5: quantile(&sorted, 0.05),
            improvement: 100.0 - mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub function: String,
    pub l_star: f64,
    /// True when `l_star` is the known optimum rather than the best observed loss.
    pub l_star_known: bool,
    pub l_rand: f64,
    pub solvers: Vec<ScoreStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    pub solver: String,
    /// Mean over functions of the per-function mean score.
    pub mean_score: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub baseline: String,
    pub functions: Vec<FunctionSummary>,
    pub aggregate: Vec<AggregateScore>,
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_owned());
        }
    }
    out
}

/// Final best loss per seed for one (solver, function) pair, in seed order of appearance.
/// Seeds whose every evaluation failed are dropped.
fn final_bests(records: &[RunRecord], solver: &str, function: &str) -> Vec<f64> {
    let mut seeds: Vec<(u64, f64)> = Vec::new();
    for r in records.iter().filter(|r| r.solver == solver && r.function == function) {
        let slot = match seeds.iter_mut().find(|(s, _)| *s == r.seed) {
            Some(slot) => slot,
            None => {
                seeds.push((r.seed, f64::INFINITY));
                seeds.last_mut().expect("just pushed")
            }
        };
        if r.loss.is_finite() {
            slot.1 = slot.1.min(r.loss);
        }
    }
    seeds.into_iter().map(|(_, b)| b).filter(|b| b.is_finite()).collect()
}

/// Score every solver against `baseline`. `l_rand` is the baseline's mean final best.
pub fn summarize(records: &[RunRecord], baseline: &str) -> Result<Summary> {
    let solvers = first_seen(records.iter().map(|r| r.solver.as_str()));
    if !solvers.iter().any(|s| s == baseline) {
        return Err(Error::Config(format!("baseline solver `{baseline}` not present in results")));
    }
    let mut functions = Vec::new();
    for function in first_seen(records.iter().map(|r| r.function.as_str())) {
        let rand = final_bests(records, baseline, &function);
        if rand.is_empty() {
            return Err(Error::Config(format!("baseline has no successful evaluation on `{function}`")));
        }
        let l_rand = rand.iter().sum::<f64>() / rand.len() as f64;
        let known = lookup(&function).ok().and_then(|b| b.optimum_loss);
        let l_star = known.unwrap_or_else(|| {
            records.iter().filter(|r| r.function == function && r.loss.is_finite()).map(|r| r.loss).fold(f64::INFINITY, f64::min)
        });
        let mut entry =
            FunctionSummary { function: function.clone(), l_star, l_star_known: known.is_some(), l_rand, solvers: vec![], error: None };
        for solver in &solvers {
            let bests = final_bests(records, solver, &function);
            if bests.is_empty() {
                continue;
            }
            match bests.iter().map(|&b| normalized_score(b, l_star, l_rand)).collect::<Result<Vec<_>>>() {
                Ok(scores) => entry.solvers.push(ScoreStats::from_scores(solver, &scores)),
                Err(e) => {
                    entry.error = Some(e.to_string());
                    break;
                }
            }
        }
        functions.push(entry);
    }
    let aggregate = solvers
        .iter()
        .filter_map(|solver| {
            let means: Vec<f64> =
                functions.iter().filter_map(|f| f.solvers.iter().find(|s| &s.solver == solver)).map(|s| s.mean).collect();
            (!means.is_empty()).then(|| {
                let mean_score = means.iter().sum::<f64>() / means.len() as f64;
                AggregateScore { solver: solver.clone(), mean_score, improvement: 100.0 - mean_score }
            })
        })
        .collect();
    Ok(Summary { baseline: baseline.to_owned(), functions, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(solver: &str, function: &str, seed: u64, loss: f64) -> RunRecord {
        RunRecord {
            solver: solver.into(),
            function: function.into(),
            seed,
            iteration: 0,
            batch_index: 0,
            config_json: "{}".into(),
            loss,
            best_so_far: loss,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn score_endpoints() {
        assert_eq!(normalized_score(1.0, 1.0, 5.0).unwrap(), 0.0);
        assert_eq!(normalized_score(5.0, 1.0, 5.0).unwrap(), 100.0);
        assert_eq!(normalized_score(3.0, 1.0, 5.0).unwrap(), 50.0);
        assert!(normalized_score(3.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn quantiles_match_numpy_linear() {
        // numpy.percentile([1, 2, 3, 4, 10], [50, 40, 5]) = [3, 2.6, 1.2]
        let s = [1.0, 2.0, 3.0, 4.0, 10.0];
        assert_eq!(quantile(&s, 0.5), 3.0);
        assert!((quantile(&s, 0.4) - 2.6).abs() < 1e-12);
        assert!((quantile(&s, 0.05) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn baseline_scores_average_to_100() {
        // unknown function name, so l_star is the best observed loss (1.0)
        let records = vec![
            rec("random", "f", 0, 4.0),
            rec("random", "f", 1, 6.0),
            rec("hebo", "f", 0, 1.0),
            rec("hebo", "f", 0, 3.0),
            rec("hebo", "f", 1, 3.0),
            rec("hebo", "f", 1, f64::NAN),
        ];
        let s = summarize(&records, "random").unwrap();
        let f = &s.functions[0];
        assert_eq!((f.l_star, f.l_rand, f.l_star_known), (1.0, 5.0, false));
        let r = &f.solvers[0];
        assert_eq!((r.solver.as_str(), r.mean), ("random", 100.0));
        let h = &f.solvers[1];
        assert_eq!(h.mean, 25.0);
        assert_eq!(h.improvement, 75.0);
        assert_eq!(s.aggregate[1].mean_score, 25.0);
        assert!(summarize(&records, "missing").is_err());
    }

    #[test]
    fn known_optimum_used_and_degenerate_reported() {
        let s = summarize(&[rec("random", "levy10", 0, 2.0)], "random").unwrap();
        assert_eq!((s.functions[0].l_star, s.functions[0].l_star_known), (0.0, true));
        let d = summarize(&[rec("random", "f", 0, 2.0)], "random").unwrap();
        assert!(d.functions[0].error.is_some());
    }
}
