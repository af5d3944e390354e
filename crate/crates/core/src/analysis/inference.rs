use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit_graph_spectrum;
use crate::error::{Error, Result};
use crate::generators::{generate, Model, ModelSpec, DEFAULT_WS_DEGREE};
use crate::maxent::{symmetric_kl, EntropicSpectrum, SolverConfig};
use crate::moments::ProbeConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Er,
    Ws,
    Ba,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Er, ModelFamily::Ws, ModelFamily::Ba];
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Er => "er",
            ModelFamily::Ws => "ws",
            ModelFamily::Ba => "ba",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(ModelFamily::Er),
            "ws" => Ok(ModelFamily::Ws),
            "ba" => Ok(ModelFamily::Ba),
            other => Err(format!(
                "unknown model family {other:?} (expected er, ws or ba)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Objective evaluations of the golden-section search over `p`.
    pub evaluations: usize,
    pub p_range: (f64, f64),
    /// Inclusive range for `r`; `1..=n-1` when absent.
    pub r_range: Option<(usize, usize)>,
    /// Points per level of the coarse-to-fine integer grid.
    pub grid_points: usize,
    /// Ring degree of Watts-Strogatz candidates.
    pub ws_k: usize,
    /// Seed shared by every candidate graph.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            evaluations: 20,
            p_range: (0.001, 0.999),
            r_range: None,
            grid_points: 9,
            ws_k: DEFAULT_WS_DEGREE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub parameter: f64,
    /// `None` when the candidate could not be fitted.
    pub divergence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inference {
    pub family: ModelFamily,
    pub n: usize,
    pub parameter: f64,
    pub divergence: f64,
    /// Every evaluated parameter in evaluation order.
    pub evaluations: Vec<Evaluation>,
}

/// Candidate model of `family` at `parameter` (`p` for ER and WS, `r` for BA).
pub fn candidate_model(family: ModelFamily, parameter: f64, ws_k: usize) -> Model {
    match family {
        ModelFamily::Er => Model::Er { p: parameter },
        ModelFamily::Ws => Model::Ws {
            k: ws_k,
            p_rewire: parameter,
        },
        ModelFamily::Ba => Model::Ba {
            r: parameter.round() as usize,
        },
    }
}

struct Objective<'a> {
    target: &'a EntropicSpectrum,
    family: ModelFamily,
    n: usize,
    search: &'a SearchConfig,
    cfg: &'a ProbeConfig,
    solver: &'a SolverConfig,
}

impl Objective<'_> {
    fn eval(&self, parameter: f64) -> Option<f64> {
        let spec = ModelSpec::new(
            candidate_model(self.family, parameter, self.search.ws_k),
            self.search.seed,
        );
        let g = generate(&spec, self.n).ok()?;
        let es = fit_graph_spectrum(
            &g,
            self.target.m(),
            self.target.basis(),
            self.cfg,
            self.solver,
        )
        .ok()?;
        symmetric_kl(self.target, &es)
            .ok()
            .filter(|v| v.is_finite())
    }
}

fn rank(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::INFINITY)
}

/// Golden-section search on `[a, b]` using exactly `evaluations` objective
/// calls (at least two).
fn golden_section(
    obj: &Objective<'_>,
    (mut a, mut b): (f64, f64),
    evaluations: usize,
) -> Vec<Evaluation> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut log = Vec::with_capacity(evaluations);
    let record = |x: f64, log: &mut Vec<Evaluation>| {
        let divergence = obj.eval(x);
        log.push(Evaluation {
            parameter: x,
            divergence,
        });
        rank(divergence)
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = record(c, &mut log);
    let mut fd = record(d, &mut log);
    while log.len() < evaluations {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = record(c, &mut log);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = record(d, &mut log);
        }
    }
    log
}

/// Evenly spread integers of `lo..=hi`, at most `points` of them.
fn integer_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let span = hi - lo;
    if span < points {
        return (lo..=hi).collect();
    }
    let mut g: Vec<usize> = (0..points)
        .map(|i| lo + (i as f64 * span as f64 / (points - 1) as f64).round() as usize)
        .collect();
    g.dedup();
    g
}

/// Coarse-to-fine integer search: evaluate a grid, narrow to the neighbors
/// of the best point, repeat until every remaining integer is evaluated.
fn integer_search(
    obj: &Objective<'_>,
    (mut lo, mut hi): (usize, usize),
    points: usize,
) -> Vec<Evaluation> {
    let points = points.max(3);
    let mut cache: BTreeMap<usize, Option<f64>> = BTreeMap::new();
    let mut log = Vec::new();
    loop {
        let grid = integer_grid(lo, hi, points);
        let fresh: Vec<usize> = grid
            .iter()
            .copied()
            .filter(|r| !cache.contains_key(r))
            .collect();
        let values: Vec<Option<f64>> = fresh.par_iter().map(|&r| obj.eval(r as f64)).collect();
        for (r, v) in fresh.into_iter().zip(values) {
            cache.insert(r, v);
            log.push(Evaluation {
                parameter: r as f64,
                divergence: v,
            });
        }
        if grid.len() == hi - lo + 1 {
            break;
        }
        let best = (0..grid.len())
            .min_by(|&i, &j| rank(cache[&grid[i]]).total_cmp(&rank(cache[&grid[j]])))
            .expect("non-empty grid");
        lo = grid[best.saturating_sub(1)];
        hi = grid[(best + 1).min(grid.len() - 1)];
    }
    log
}

/// Finds the model parameter whose `n`-node candidate graph has the
/// spectrum closest to `target` in symmetric KL divergence. Candidates are
/// fitted with the target's moment count and basis.
pub fn infer_parameter(
    target: &EntropicSpectrum,
    family: ModelFamily,
    n: usize,
    search: &SearchConfig,
    cfg: &ProbeConfig,
    solver: &SolverConfig,
) -> Result<Inference> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "candidate graphs need at least two nodes".into(),
        ));
    }
    let obj = Objective {
        target,
        family,
        n,
        search,
        cfg,
        solver,
    };
    let evaluations = match family {
        ModelFamily::Er | ModelFamily::Ws => {
            let (a, b) = search.p_range;
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "invalid probability range ({a}, {b})"
                )));
            }
            golden_section(&obj, (a, b), search.evaluations.max(2))
        }
        ModelFamily::Ba => {
            let (lo, hi) = search.r_range.unwrap_or((1, n - 1));
            if lo == 0 || lo > hi || hi >= n {
                return Err(Error::InvalidArgument(format!(
                    "invalid attachment range {lo}..={hi}"
                )));
            }
            integer_search(&obj, (lo, hi), search.grid_points)
        }
    };
    let best = evaluations
        .iter()
        .filter_map(|e| e.divergence.map(|d| (e.parameter, d)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::SearchFailed)?;
    Ok(Inference {
        family,
        n,
        parameter: best.0,
        divergence: best.1,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Families in ascending order of their best divergence.
    pub ranked: Vec<Inference>,
    pub failures: Vec<(ModelFamily, String)>,
}

impl Classification {
    pub fn best(&self) -> Option<ModelFamily> {
        self.ranked.first().map(|i| i.family)
    }
}

/// Ranks the ER, WS and BA families by how closely their best-fitting
/// `n0`-node candidate matches `target`.
pub fn classify_network(
    target: &EntropicSpectrum,
    n0: usize,
    search: &SearchConfig,
    cfg: &ProbeConfig,
    solver: &SolverConfig,
) -> Result<Classification> {
    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for family in ModelFamily::ALL {
        match infer_parameter(target, family, n0, search, cfg, solver) {
            Ok(inf) => ranked.push(inf),
            Err(e) => failures.push((family, e.to_string())),
        }
    }
    if ranked.is_empty() {
        return Err(Error::SearchFailed);
    }
    ranked.sort_by(|a, b| a.divergence.total_cmp(&b.divergence));
    Ok(Classification { ranked, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_grid_shape() {
        assert_eq!(integer_grid(1, 5, 9), vec![1, 2, 3, 4, 5]);
        let g = integer_grid(1, 99, 9);
        assert_eq!(g.first(), Some(&1));
        assert_eq!(g.last(), Some(&99));
        assert_eq!(g.len(), 9);
    }

    #[test]
    fn family_names() {
        for f in ModelFamily::ALL {
            assert_eq!(f.to_string().parse::<ModelFamily>().unwrap(), f);
        }
        assert!("sbm".parse::<ModelFamily>().is_err());
    }
}
