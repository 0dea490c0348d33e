//! Variance-homogeneity tests and the paired t-test.

use std::io::Read;

use serde::{Deserialize, Serialize};

use super::special::{chisq_sf, f_sf, normal_quantile, student_t_cdf};
use crate::error::{Error, Result};

/// `k >= 2` groups of replicated observations, each of size `>= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSamples {
    groups: Vec<Vec<f64>>,
}

impl GroupedSamples {
    pub fn new(groups: Vec<Vec<f64>>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 groups, got {}", groups.len())));
        }
        if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
            return Err(Error::InvalidArgument(format!("group {i} has {} observations, need at least 2", g.len())));
        }
        if groups.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("observations must be finite".into()));
        }
        Ok(GroupedSamples { groups })
    }

    pub fn groups(&self) -> &[Vec<f64>] {
        &self.groups
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Read `group,value` rows. Groups keep their order of first appearance;
    /// a header row is skipped when its value column is not numeric.
    pub fn from_csv<R: Read>(reader: R) -> Result<(Vec<String>, Self)> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut names: Vec<String> = Vec::new();
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse { field: format!("line {}", line + 1), message: "expected `group,value`".into() });
            }
            let value: f64 = match record[1].parse() {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Parse { field: format!("line {} value", line + 1), message: e.to_string() }),
            };
            let name = &record[0];
            match names.iter().position(|n| n == name) {
                Some(i) => groups[i].push(value),
                None => {
                    names.push(name.to_owned());
                    groups.push(vec![value]);
                }
            }
        }
        Ok((names, Self::new(groups)?))
    }
}

/// Degrees of freedom of a test's reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dof {
    One(f64),
    Two(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: Dof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    TwoSided,
    Greater,
    Less,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Between-group over within-group dispersion of per-group scores.
/// Returns `(between, within)` sums of squares.
fn one_way_ss(scores: &[Vec<f64>]) -> (f64, f64) {
    let n: usize = scores.iter().map(Vec::len).sum();
    let grand = scores.iter().flatten().sum::<f64>() / n as f64;
    let mut between = 0.0;
    let mut within = 0.0;
    for g in scores {
        let m = mean(g);
        between += g.len() as f64 * (m - grand).powi(2);
        within += g.iter().map(|z| (z - m).powi(2)).sum::<f64>();
    }
    (between, within)
}

/// Levene's test on absolute deviations from the group mean.
/// `W = (N-k)/(k-1) * sum n_i (Z_i. - Z..)^2 / sum sum (Z_ij - Z_i.)^2`, referred to `F(k-1, N-k)`.
pub fn levene_test(g: &GroupedSamples) -> Result<TestResult> {
    let k = g.groups.len() as f64;
    let n = g.total() as f64;
    let z: Vec<Vec<f64>> = g
        .groups
        .iter()
        .map(|grp| {
            let m = mean(grp);
            grp.iter().map(|y| (y - m).abs()).collect()
        })
        .collect();
    let (between, within) = one_way_ss(&z);
    if within <= 0.0 {
        if between <= 0.0 {
            // every deviation set is identical: perfectly homogeneous
            return Ok(TestResult { statistic: 0.0, p_value: 1.0, dof: Dof::Two(k - 1.0, n - k) });
        }
        return Err(Error::Degenerate("zero within-group dispersion of absolute deviations".into()));
    }
    let w = (n - k) / (k - 1.0) * between / within;
    Ok(TestResult { statistic: w, p_value: f_sf(w, k - 1.0, n - k)?.clamp(0.0, 1.0), dof: Dof::Two(k - 1.0, n - k) })
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = 0.5 * ((i + 1) + (j + 1)) as f64;
        for &p in &idx[i..=j] {
            ranks[p] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Fligner-Killeen test: normal scores of the ranks of `|Y_ij - median_i|`,
/// `chi2 = sum n_i (A_i - a)^2 / V^2`, referred to `chi^2(k-1)`.
pub fn fligner_killeen_test(g: &GroupedSamples) -> Result<TestResult> {
    let k = g.groups.len() as f64;
    let n = g.total();
    let dev: Vec<f64> = g
        .groups
        .iter()
        .flat_map(|grp| {
            let m = median(grp);
            grp.iter().map(move |y| (y - m).abs())
        })
        .collect();
    let ranks = average_ranks(&dev);
    let scores: Vec<f64> = ranks
        .iter()
        .map(|r| normal_quantile(0.5 * (1.0 + r / (n as f64 + 1.0))))
        .collect::<Result<_>>()?;
    let grand = mean(&scores);
    let v2 = scores.iter().map(|a| (a - grand).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    if !(v2 > 0.0) {
        return Err(Error::Degenerate("all rank scores are equal".into()));
    }
    let mut offset = 0;
    let mut between = 0.0;
    for grp in &g.groups {
        let s = &scores[offset..offset + grp.len()];
        between += grp.len() as f64 * (mean(s) - grand).powi(2);
        offset += grp.len();
    }
    let stat = between / v2;
    Ok(TestResult { statistic: stat, p_value: chisq_sf(stat, k - 1.0)?.clamp(0.0, 1.0), dof: Dof::One(k - 1.0) })
}

/// Paired t-test on `d = x - y` with `n - 1` degrees of freedom.
pub fn paired_t_test(x: &[f64], y: &[f64], alternative: Alternative) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let m = mean(&d);
    let var = d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::Degenerate("differences have zero variance".into()));
    }
    let t = m / (var / n).sqrt();
    let dof = n - 1.0;
    let lower = student_t_cdf(t, dof)?;
    let p = match alternative {
        Alternative::Less => lower,
        Alternative::Greater => student_t_cdf(-t, dof)?,
        Alternative::TwoSided => 2.0 * lower.min(1.0 - lower),
    };
    Ok(TestResult { statistic: t, p_value: p.clamp(0.0, 1.0), dof: Dof::One(dof) })
}
