//! NSGA-II on the unit cube (maximisation).

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from, HeboRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MooConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` means `1 / d`.
    pub mutation_prob: Option<f64>,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub seed: u64,
}

impl Default for MooConfig {
    fn default() -> Self {
        MooConfig { pop_size: 100, generations: 100, crossover_prob: 0.9, mutation_prob: None, sbx_eta: 15.0, pm_eta: 20.0, seed: 0 }
    }
}

impl MooConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 || self.pop_size % 2 != 0 {
            return Err(Error::InvalidArgument(format!("pop_size must be even and >= 4, got {}", self.pop_size)));
        }
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.crossover_prob) || !self.mutation_prob.is_none_or(prob_ok) {
            return Err(Error::InvalidArgument("probabilities must lie in [0, 1]".into()));
        }
        if !(self.sbx_eta >= 0.0 && self.pm_eta >= 0.0) {
            return Err(Error::InvalidArgument("distribution indices must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub objectives: Vec<f64>,
    pub rank: usize,
    pub crowding: f64,
}

/// Pareto dominance for maximisation.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Fast non-dominated sort. Each front lists indices in ascending order.
pub fn non_dominated_sort(objectives: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_unchecked(&objectives[i], &objectives[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates_unchecked(&objectives[j], &objectives[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front. Extremes of every
/// objective get `+inf`; objectives with zero or non-finite range add nothing.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]));
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = front[order[n - 1]][k] - front[order[0]][k];
        if !(range > 0.0 && range.is_finite()) {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            if gap.is_finite() {
                dist[order[w]] += gap / range;
            }
        }
    }
    dist
}

fn assign_rank_crowding(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let objs: Vec<Vec<f64>> = pop.iter().map(|p| p.objectives.clone()).collect();
    let fronts = non_dominated_sort(&objs);
    for (r, front) in fronts.iter().enumerate() {
        let fo: Vec<Vec<f64>> = front.iter().map(|&i| objs[i].clone()).collect();
        for (&i, c) in front.iter().zip(crowding_distance(&fo)) {
            pop[i].rank = r;
            pop[i].crowding = c;
        }
    }
    fronts
}

/// Lower rank first, then larger crowding distance.
fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    a.rank.cmp(&b.rank).then_with(|| b.crowding.total_cmp(&a.crowding))
}

fn tournament<'a>(pop: &'a [Individual], rng: &mut HeboRng) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if crowded_cmp(b, a) == Ordering::Less { b } else { a }
}

/// Bounded simulated binary crossover on `[0, 1]`.
fn sbx(p1: &[f64], p2: &[f64], eta: f64, rng: &mut HeboRng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for k in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[k] - p2[k]).abs() <= 1e-14 {
            continue;
        }
        let (y1, y2) = if p1[k] < p2[k] { (p1[k], p2[k]) } else { (p2[k], p1[k]) };
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let beta_lo = 1.0 + 2.0 * y1 / (y2 - y1);
        let beta_hi = 1.0 + 2.0 * (1.0 - y2) / (y2 - y1);
        let lo = (0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1))).clamp(0.0, 1.0);
        let hi = (0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1))).clamp(0.0, 1.0);
        c1[k] = lo;
        c2[k] = hi;
    }
    (c1, c2)
}

/// Bounded polynomial mutation on `[0, 1]`.
fn polynomial_mutation(x: &mut [f64], prob: f64, eta: f64, rng: &mut HeboRng) {
    let pow = 1.0 / (eta + 1.0);
    for y in x.iter_mut() {
        if rng.random::<f64>() >= prob {
            continue;
        }
        let u: f64 = rng.random();
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - *y).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * y.powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        *y = (*y + dq).clamp(0.0, 1.0);
    }
}

fn evaluate<F: FnMut(&[f64]) -> Vec<f64>>(f: &mut F, genome: Vec<f64>, m: usize) -> Result<Individual> {
    let mut objectives = f(&genome);
    if objectives.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: objectives.len() });
    }
    if objectives.iter().any(|v| !v.is_finite()) {
        objectives.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
    }
    Ok(Individual { genome, objectives, rank: 0, crowding: 0.0 })
}

/// Run NSGA-II from a uniform initial population.
pub fn evolve<F: FnMut(&[f64]) -> Vec<f64>>(f: F, d: usize, m: usize, cfg: &MooConfig) -> Result<Vec<Individual>> {
    evolve_seeded(f, d, m, cfg, &[])
}

/// As [`evolve`], with the first members of the initial population replaced
/// by `seeds` (clamped to the cube).
pub fn evolve_seeded<F: FnMut(&[f64]) -> Vec<f64>>(
    mut f: F,
    d: usize,
    m: usize,
    cfg: &MooConfig,
    seeds: &[Vec<f64>],
) -> Result<Vec<Individual>> {
    cfg.validate()?;
    if d == 0 || m == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and m >= 1".into()));
    }
    if let Some(s) = seeds.iter().find(|s| s.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: s.len() });
    }
    let mut rng = rng_from(cfg.seed, &[]);
    let n = cfg.pop_size;
    let pm = cfg.mutation_prob.unwrap_or(1.0 / d as f64);

    let mut pop = Vec::with_capacity(n);
    for i in 0..n {
        let genome = match seeds.get(i) {
            Some(s) => s.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            None => (0..d).map(|_| rng.random::<f64>()).collect(),
        };
        pop.push(evaluate(&mut f, genome, m)?);
    }
    assign_rank_crowding(&mut pop);

    for _ in 0..cfg.generations {
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let p1 = tournament(&pop, &mut rng).genome.clone();
            let p2 = tournament(&pop, &mut rng).genome.clone();
            let (mut c1, mut c2) =
                if rng.random::<f64>() < cfg.crossover_prob { sbx(&p1, &p2, cfg.sbx_eta, &mut rng) } else { (p1, p2) };
            polynomial_mutation(&mut c1, pm, cfg.pm_eta, &mut rng);
            polynomial_mutation(&mut c2, pm, cfg.pm_eta, &mut rng);
            offspring.push(evaluate(&mut f, c1, m)?);
            offspring.push(evaluate(&mut f, c2, m)?);
        }
        pop.extend(offspring);
        let fronts = assign_rank_crowding(&mut pop);
        let mut keep: Vec<usize> = Vec::with_capacity(n);
        for front in fronts {
            if keep.len() + front.len() <= n {
                keep.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| pop[b].crowding.total_cmp(&pop[a].crowding));
                keep.extend(rest.into_iter().take(n - keep.len()));
            }
            if keep.len() == n {
                break;
            }
        }
        keep.sort_unstable();
        let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
        pop = keep.into_iter().map(|i| slots[i].take().expect("index kept once")).collect();
        assign_rank_crowding(&mut pop);
    }
    Ok(pop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Peel fronts by brute force: repeatedly take every point no remaining point dominates.
    fn brute_force_fronts(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let mut remaining: Vec<usize> = (0..objs.len()).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| !remaining.iter().any(|&j| dominates(&objs[j], &objs[i]).unwrap()))
                .collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[2.0, 2.0], &[1.0, 1.0]).unwrap());
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(dominates(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sort_examples() {
        let same = vec![vec![1.0, 1.0]; 5];
        assert_eq!(non_dominated_sort(&same), vec![vec![0, 1, 2, 3, 4]]);
        let chain = vec![vec![3.0, 3.0], vec![2.0, 2.0], vec![1.0, 1.0]];
        assert_eq!(non_dominated_sort(&chain), vec![vec![0], vec![1], vec![2]]);
        let mut rng = rng_from(1, &[]);
        let pts: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        assert_eq!(non_dominated_sort(&pts), brute_force_fronts(&pts));
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[vec![1.0, 2.0]]), vec![f64::INFINITY]);
        assert_eq!(crowding_distance(&[vec![1.0, 2.0], vec![2.0, 1.0]]), vec![f64::INFINITY; 2]);
        let line: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 3.0 - i as f64]).collect();
        let c = crowding_distance(&line);
        assert!(c[0].is_infinite() && c[3].is_infinite());
        assert!((c[1] - c[2]).abs() < 1e-15);
        assert!((c[1] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_objective_optimum() {
        let cfg = MooConfig { pop_size: 40, generations: 50, seed: 3, ..MooConfig::default() };
        let pop = evolve(|u: &[f64]| vec![-(u[0] - 0.5).powi(2)], 1, 1, &cfg).unwrap();
        let best = pop.iter().max_by(|a, b| a.objectives[0].total_cmp(&b.objectives[0])).unwrap();
        assert!((best.genome[0] - 0.5).abs() < 0.02);
    }

    #[test]
    fn trade_off_front_is_spread() {
        let cfg = MooConfig { pop_size: 40, generations: 30, seed: 5, ..MooConfig::default() };
        let pop = evolve(|u: &[f64]| vec![u[0], 1.0 - u[0]], 1, 2, &cfg).unwrap();
        let f0: Vec<f64> = pop.iter().filter(|p| p.rank == 0).map(|p| p.objectives[0]).collect();
        let span = f0.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - f0.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(span >= 0.8, "span {span}");
    }

    #[test]
    fn deterministic_and_in_bounds() {
        let cfg = MooConfig { pop_size: 20, generations: 15, seed: 9, ..MooConfig::default() };
        let f = |u: &[f64]| vec![u[0] * u[1], (1.0 - u[0]) * u[2], -u[1]];
        let a = evolve(f, 3, 3, &cfg).unwrap();
        let b = evolve(f, 3, 3, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.genome.iter().all(|g| (0.0..=1.0).contains(g))));
        let objs: Vec<Vec<f64>> = a.iter().map(|p| p.objectives.clone()).collect();
        for p in a.iter().filter(|p| p.rank == 0) {
            assert!(!objs.iter().any(|o| dominates(o, &p.objectives).unwrap()));
        }
    }

    #[test]
    fn elitism_keeps_best_objective() {
        let mut last = f64::NEG_INFINITY;
        for g in [0, 1, 2, 5, 10, 20] {
            let cfg = MooConfig { pop_size: 20, generations: g, seed: 2, ..MooConfig::default() };
            let pop = evolve(|u: &[f64]| vec![(6.0 * u[0]).sin() * u[1], u[1]], 2, 2, &cfg).unwrap();
            let best = pop.iter().map(|p| p.objectives[0]).fold(f64::NEG_INFINITY, f64::max);
            // same seed: the run with more generations extends the shorter one
            assert!(best >= last);
            last = best;
        }
    }

    #[test]
    fn non_finite_objectives_sink() {
        let cfg = MooConfig { pop_size: 20, generations: 10, seed: 1, ..MooConfig::default() };
        let pop = evolve(|u: &[f64]| if u[0] > 0.5 { vec![f64::NAN] } else { vec![u[0]] }, 1, 1, &cfg).unwrap();
        let best = pop.iter().filter(|p| p.rank == 0).next().unwrap();
        assert!(best.objectives[0].is_finite() && best.genome[0] <= 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(MooConfig { pop_size: 5, ..MooConfig::default() }.validate().is_err());
        assert!(MooConfig { pop_size: 2, ..MooConfig::default() }.validate().is_err());
        assert!(MooConfig { crossover_prob: 1.5, ..MooConfig::default() }.validate().is_err());
        assert!(MooConfig::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn sort_matches_brute_force(pts in proptest::collection::vec(proptest::collection::vec(0u8..6, 2), 1..60)) {
            let objs: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
            prop_assert_eq!(non_dominated_sort(&objs), brute_force_fronts(&objs));
        }

        #[test]
        fn sort_is_permutation_invariant(pts in proptest::collection::vec(proptest::collection::vec(0u8..5, 3), 1..40)) {
            let objs: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
            let rev: Vec<Vec<f64>> = objs.iter().rev().cloned().collect();
            let n = objs.len();
            let mut a: Vec<Vec<usize>> = non_dominated_sort(&objs);
            let mut b: Vec<Vec<usize>> = non_dominated_sort(&rev).into_iter()
                .map(|f| { let mut f: Vec<usize> = f.into_iter().map(|i| n - 1 - i).collect(); f.sort_unstable(); f })
                .collect();
            a.iter_mut().for_each(|f| f.sort_unstable());
            b.iter_mut().for_each(|f| f.sort_unstable());
            prop_assert_eq!(a, b);
        }
    }
}
