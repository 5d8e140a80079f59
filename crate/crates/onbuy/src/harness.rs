//! Deterministic Monte Carlo experiment runner.
//!
//! Trial `t` of a run uses the handle `(base_seed, t)`, so trials are
//! independent, reproducible, and order-free: running them on any number
//! of threads yields bit-identical aggregates because results are reduced
//! in trial-index order with compensated summation.

use crate::purchase::{compute_ck, compute_rho, compute_rho_density, format_g17, RhoTable};
use crate::rng::RngHandle;
use crate::stream::{ItemUniverse, OrderModel, Session};
use crate::strategies::adversary::make_adversary;
use crate::strategies::{
    buy_arborescence_rom, buy_bipartite_pm, buy_clique_rom, buy_hamilton, buy_hamilton_directed,
    buy_path_any, buy_paths_len2_rom, buy_pm_complete, buy_shortest_path_rom, buy_spanning_tree,
    buy_triangle_any, buy_triangle_rom, ArborescenceParams, CliqueParams, HamiltonParams,
    PathParams, StrategyOutcome, TreeParams, WedgeParams,
};
use crate::util::KahanSum;
use crate::{invalid, Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Target structures the harness can simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    /// Buy any `k` of `N` abstract items (`n` is `N` here).
    KPurchase { k: usize },
    ShortestPath,
    PathsLenTwo { l: u64 },
    Triangle,
    Clique { r: usize },
    SpanningTree,
    Arborescence,
    BipartitePm,
    PmComplete,
    Hamilton,
    HamiltonDirected,
}

impl Structure {
    pub fn name(&self) -> &'static str {
        match self {
            Structure::KPurchase { .. } => "k-purchase",
            Structure::ShortestPath => "shortest-path",
            Structure::PathsLenTwo { .. } => "paths-len2",
            Structure::Triangle => "triangle",
            Structure::Clique { .. } => "clique",
            Structure::SpanningTree => "spanning-tree",
            Structure::Arborescence => "arborescence",
            Structure::BipartitePm => "bipartite-pm",
            Structure::PmComplete => "pm-complete",
            Structure::Hamilton => "hamilton",
            Structure::HamiltonDirected => "hamilton-directed",
        }
    }

    /// Parse a structure name; size parameters come from `params`.
    pub fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Structure> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        Ok(match name {
            "k-purchase" => Structure::KPurchase { k: get("k", 1.0) as usize },
            "shortest-path" => Structure::ShortestPath,
            "paths-len2" => Structure::PathsLenTwo { l: get("l", 1.0) as u64 },
            "triangle" => Structure::Triangle,
            "clique" => Structure::Clique { r: get("r", 4.0) as usize },
            "spanning-tree" => Structure::SpanningTree,
            "arborescence" => Structure::Arborescence,
            "bipartite-pm" => Structure::BipartitePm,
            "pm-complete" => Structure::PmComplete,
            "hamilton" => Structure::Hamilton,
            "hamilton-directed" => Structure::HamiltonDirected,
            other => return invalid(format!("unknown structure '{other}'")),
        })
    }

    fn universe(&self, n: u64) -> Result<ItemUniverse> {
        match self {
            Structure::KPurchase { .. } => ItemUniverse::abstract_items(n),
            Structure::Arborescence | Structure::HamiltonDirected => {
                ItemUniverse::directed_arcs(n as u32)
            }
            Structure::BipartitePm => ItemUniverse::bipartite_edges(n as u32),
            _ => ItemUniverse::undirected_edges(n as u32),
        }
    }

    /// ROM-only strategies reject adversarial orders; paths and triangles
    /// switch to their order-agnostic variants under AOM.
    pub fn compatible(&self, order: &OrderModel) -> bool {
        match order {
            OrderModel::Rom | OrderModel::Pom => true,
            OrderModel::Aom(_) => matches!(
                self,
                Structure::KPurchase { .. }
                    | Structure::BipartitePm
                    | Structure::PmComplete
                    | Structure::Hamilton
                    | Structure::HamiltonDirected
                    | Structure::Triangle
                    | Structure::ShortestPath
            ),
        }
    }
}

/// One experiment description.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub structure: Structure,
    /// Vertex count (item count for k-purchase).
    pub n: u64,
    pub order: OrderModel,
    pub trials: u64,
    pub base_seed: u64,
    /// Flat key-value overrides for strategy tunables.
    pub params: BTreeMap<String, f64>,
}

/// Aggregated statistics over the trials of one config.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StatsSummary {
    pub mean: f64,
    /// Absent when a single trial leaves the error undefined.
    pub stderr: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub median: f64,
    pub success_rate: f64,
    pub fallback_rate: f64,
    pub mean_inspections: f64,
}

#[derive(Debug, Clone, Copy)]
struct TrialResult {
    cost: f64,
    success: bool,
    fallback: bool,
    inspections: u64,
}

/// Immutable per-config threshold tables, shared across trials.
pub struct Tables {
    rho_a: Option<RhoTable>,
    rho_b: Option<RhoTable>,
}

fn required_tables(cfg: &TrialConfig) -> Result<Tables> {
    let n = cfg.n as usize;
    let t = match &cfg.structure {
        Structure::KPurchase { k } => Tables {
            rho_a: Some(compute_rho(*k, n.max(*k))?),
            rho_b: None,
        },
        Structure::ShortestPath => {
            let ball = path_params(&cfg.params).ball_size(cfg.n as u32).max(2);
            // Closing classes range over |T| * |T'| pairs.
            let m_max = (4 * ball * ball).max(n);
            Tables { rho_a: Some(compute_rho(ball, m_max)?), rho_b: None }
        }
        Structure::PathsLenTwo { .. } | Structure::Triangle => {
            Tables { rho_a: Some(compute_rho(1, n * n / 2 + 2)?), rho_b: None }
        }
        Structure::Clique { r } => {
            let star = crate::strategies::clique::star_size(
                (*r).max(4),
                cfg.n,
                clique_params(&cfg.params).leaf_coeff,
            ) as usize;
            Tables {
                rho_a: Some(compute_rho(star.max(3), n)?),
                rho_b: Some(compute_rho(1, n * n / 2 + 2)?),
            }
        }
        Structure::SpanningTree => {
            Tables { rho_a: Some(compute_rho(1, n * n / 4 + 2)?), rho_b: None }
        }
        Structure::Arborescence => Tables { rho_a: Some(compute_rho(1, n)?), rho_b: None },
        Structure::BipartitePm | Structure::PmComplete => {
            Tables { rho_a: Some(compute_rho(3, n.max(4))?), rho_b: None }
        }
        Structure::Hamilton => {
            let split = cfg.params.get("split").copied().unwrap_or(10.0);
            Tables { rho_a: Some(compute_rho_density(1, n, split)?), rho_b: None }
        }
        Structure::HamiltonDirected => {
            let split = cfg.params.get("split").copied().unwrap_or(4.0);
            Tables { rho_a: Some(compute_rho_density(1, n, split)?), rho_b: None }
        }
    };
    Ok(t)
}

fn path_params(params: &BTreeMap<String, f64>) -> PathParams {
    let mut p = PathParams::default();
    if let Some(&v) = params.get("alpha") {
        p.alpha = v;
    }
    if let Some(&v) = params.get("layers") {
        p.layers = v as usize;
    }
    if let Some(&v) = params.get("ball_coeff") {
        p.ball_coeff = v;
    }
    if let Some(&v) = params.get("margin") {
        p.margin = v;
    }
    if let Some(&v) = params.get("cost_cap_mult") {
        p.cost_cap_mult = v;
    }
    p
}

fn clique_params(params: &BTreeMap<String, f64>) -> CliqueParams {
    let mut p = CliqueParams::default();
    if let Some(&v) = params.get("leaf_coeff") {
        p.leaf_coeff = v;
    }
    if let Some(&v) = params.get("threshold_mult") {
        p.threshold_mult = v;
    }
    p
}

fn tree_params(params: &BTreeMap<String, f64>) -> TreeParams {
    let mut p = TreeParams::default();
    if let Some(&v) = params.get("alpha") {
        p.alpha = v;
    }
    if let Some(&v) = params.get("beta") {
        p.beta = v;
    }
    p
}

fn wedge_params(params: &BTreeMap<String, f64>) -> WedgeParams {
    let mut p = WedgeParams::default();
    if let Some(&v) = params.get("l") {
        p.l_target = v as u64;
    }
    if let Some(&v) = params.get("k") {
        p.k_target = v as u64;
    }
    if let Some(&v) = params.get("threshold_mult") {
        p.threshold_mult = v;
    }
    p
}

fn hamilton_params(params: &BTreeMap<String, f64>, directed: bool) -> HamiltonParams {
    let mut p = if directed { HamiltonParams::directed_default() } else { HamiltonParams::default() };
    if let Some(&v) = params.get("split") {
        p.split = v as u32;
    }
    if let Some(&v) = params.get("search_budget") {
        p.search_budget = v as u64;
    }
    p
}

fn arborescence_params(params: &BTreeMap<String, f64>) -> ArborescenceParams {
    let mut p = ArborescenceParams::default();
    if let Some(&v) = params.get("eps") {
        p.eps = v;
    }
    if let Some(&v) = params.get("merge_threshold") {
        p.merge_threshold = v;
    }
    if let Some(&v) = params.get("stall_margin") {
        p.stall_margin = v;
    }
    p
}

fn make_session(cfg: &TrialConfig, universe: ItemUniverse, handle: RngHandle) -> Result<Box<dyn Session>> {
    match &cfg.order {
        OrderModel::Rom | OrderModel::Pom => {
            // POM runs ROM strategies by self-randomizing the order.
            Ok(Box::new(crate::stream::RomSession::new(universe, handle)))
        }
        OrderModel::Aom(name) => {
            let adv = make_adversary(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown adversary '{name}'")))?;
            Ok(Box::new(crate::stream::AomSession::new(universe, adv, handle)))
        }
    }
}

/// Run one trial; public so callers can drive custom experiments.
pub fn run_single_trial(cfg: &TrialConfig, tables: &Tables, trial: u64) -> Result<StrategyOutcome> {
    let handle = RngHandle::new(cfg.base_seed, trial);
    let universe = cfg.structure.universe(cfg.n)?;
    let mut session = make_session(cfg, universe, handle)?;
    let strat_handle = handle.derive(100);
    let aom = matches!(cfg.order, OrderModel::Aom(_));
    let outcome = match &cfg.structure {
        Structure::KPurchase { k } => {
            crate::purchase::run_k_purchase(session.as_mut(), *k, tables.rho_a.as_ref().unwrap())?
        }
        Structure::ShortestPath => {
            if aom {
                buy_path_any(
                    cfg.n as u32,
                    session.as_mut(),
                    Default::default(),
                    tables.rho_a.as_ref().unwrap(),
                )?
            } else {
                buy_shortest_path_rom(
                    cfg.n as u32,
                    session.as_mut(),
                    path_params(&cfg.params),
                    tables.rho_a.as_ref().unwrap(),
                )?
            }
        }
        Structure::PathsLenTwo { l } => buy_paths_len2_rom(
            cfg.n as u32,
            *l,
            session.as_mut(),
            wedge_params(&cfg.params),
            tables.rho_a.as_ref().unwrap(),
        )?,
        Structure::Triangle => {
            if aom {
                buy_triangle_any(
                    cfg.n as u32,
                    session.as_mut(),
                    wedge_params(&cfg.params),
                    tables.rho_a.as_ref().unwrap(),
                )?
            } else {
                buy_triangle_rom(
                    cfg.n as u32,
                    session.as_mut(),
                    wedge_params(&cfg.params),
                    tables.rho_a.as_ref().unwrap(),
                )?
            }
        }
        Structure::Clique { r } => buy_clique_rom(
            cfg.n as u32,
            *r,
            session.as_mut(),
            clique_params(&cfg.params),
            tables.rho_a.as_ref().unwrap(),
            tables.rho_b.as_ref().unwrap(),
        )?,
        Structure::SpanningTree => buy_spanning_tree(
            cfg.n as u32,
            session.as_mut(),
            tree_params(&cfg.params),
            tables.rho_a.as_ref().unwrap(),
        )?,
        Structure::Arborescence => {
            buy_arborescence_rom(
                cfg.n as u32,
                session.as_mut(),
                arborescence_params(&cfg.params),
                tables.rho_a.as_ref().unwrap(),
            )?
            .outcome
        }
        Structure::BipartitePm => buy_bipartite_pm(
            cfg.n as u32,
            session.as_mut(),
            tables.rho_a.as_ref().unwrap(),
            strat_handle,
        )?,
        Structure::PmComplete => buy_pm_complete(
            cfg.n as u32,
            session.as_mut(),
            tables.rho_a.as_ref().unwrap(),
            strat_handle,
        )?,
        Structure::Hamilton => {
            buy_hamilton(
                cfg.n as u32,
                session.as_mut(),
                hamilton_params(&cfg.params, false),
                tables.rho_a.as_ref().unwrap(),
                strat_handle,
            )?
            .outcome
        }
        Structure::HamiltonDirected => {
            buy_hamilton_directed(
                cfg.n as u32,
                session.as_mut(),
                hamilton_params(&cfg.params, true),
                tables.rho_a.as_ref().unwrap(),
                strat_handle,
            )?
            .outcome
        }
    };
    Ok(outcome)
}

/// Prepare the shared threshold tables for a config.
pub fn prepare_tables(cfg: &TrialConfig) -> Result<Tables> {
    required_tables(cfg)
}

/// Run all trials of a config and aggregate.
pub fn run_trials(cfg: &TrialConfig) -> Result<StatsSummary> {
    if cfg.trials == 0 {
        return invalid("need at least one trial");
    }
    if !cfg.structure.compatible(&cfg.order) {
        return invalid(format!(
            "structure '{}' does not run under order '{}'",
            cfg.structure.name(),
            cfg.order
        ));
    }
    let tables = required_tables(cfg)?;
    let results = run_pool(cfg, &tables)?;
    Ok(aggregate(&results))
}

fn run_pool(cfg: &TrialConfig, tables: &Tables) -> Result<Vec<TrialResult>> {
    use rayon::prelude::*;
    let threads = std::env::var("ONBUY_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let run = || -> Result<Vec<TrialResult>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let out = run_single_trial(cfg, tables, t)?;
                Ok(TrialResult {
                    cost: out.total_cost(),
                    success: out.success,
                    fallback: out.fallback_used,
                    inspections: out.inspections,
                })
            })
            .collect()
    };
    if threads == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
        pool.install(run)
    }
}

fn aggregate(results: &[TrialResult]) -> StatsSummary {
    let n = results.len() as f64;
    let mut mean_acc = KahanSum::new();
    let mut insp_acc = KahanSum::new();
    let mut successes = 0u64;
    let mut fallbacks = 0u64;
    for r in results {
        mean_acc.add(r.cost);
        insp_acc.add(r.inspections as f64);
        successes += r.success as u64;
        fallbacks += r.fallback as u64;
    }
    let mean = mean_acc.value() / n;
    let mut var_acc = KahanSum::new();
    for r in results {
        var_acc.add((r.cost - mean) * (r.cost - mean));
    }
    let stderr = if results.len() > 1 {
        Some((var_acc.value() / (n - 1.0) / n).sqrt())
    } else {
        None
    };
    let mut sorted: Vec<f64> = results.iter().map(|r| r.cost).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    StatsSummary {
        mean,
        stderr,
        ci95: stderr.map(|se| (mean - 1.96 * se, mean + 1.96 * se)),
        median,
        success_rate: successes as f64 / n,
        fallback_rate: fallbacks as f64 / n,
        mean_inspections: insp_acc.value() / n,
    }
}

// ---------------------------------------------------------------------------
// Analytic bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
    Asymptotic,
}

/// A reference value the Monte Carlo estimate is compared against.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRecord {
    pub name: String,
    pub value: f64,
    pub kind: BoundKind,
    pub source: String,
}

fn bound(name: &str, value: f64, kind: BoundKind, source: &str) -> BoundRecord {
    BoundRecord { name: name.into(), value, kind, source: source.into() }
}

/// Riemann zeta(3) by direct summation (tail below 1e-13).
pub fn zeta3() -> f64 {
    let mut acc = KahanSum::new();
    for k in (1..2_000_000u64).rev() {
        acc.add(1.0 / (k as f64).powi(3));
    }
    acc.value() + 1.0 / (2.0 * (2e6 - 1.0) * (2e6 - 1.0))
}

/// Every applicable analytic bound for a structure at size `n`.
pub fn theory_bounds(structure: &Structure, n: u64) -> Result<Vec<BoundRecord>> {
    let ck = compute_ck(4);
    let nf = n as f64;
    Ok(match structure {
        Structure::KPurchase { k } => {
            let cks = compute_ck((*k).max(1));
            vec![bound(
                "asymptotic value c_k/N",
                cks.c(*k) / nf,
                BoundKind::Asymptotic,
                "k-purchase dynamic program asymptotics",
            )]
        }
        Structure::ShortestPath => vec![bound(
            "asymptotic scale n^(-2/3)",
            nf.powf(-2.0 / 3.0),
            BoundKind::Asymptotic,
            "two-terminal path purchase price",
        )],
        Structure::PathsLenTwo { l } => vec![bound(
            "upper 6 (l/n)^(4/3)",
            6.0 * (*l as f64 / nf).powf(4.0 / 3.0),
            BoundKind::Upper,
            "wedge-collection purchase price",
        )],
        Structure::Triangle => vec![
            bound(
                "upper 10 n^(-4/7)",
                10.0 * nf.powf(-4.0 / 7.0),
                BoundKind::Upper,
                "triangle purchase price upper bound",
            ),
            bound(
                "asymptotic scale n^(-4/7)",
                nf.powf(-4.0 / 7.0),
                BoundKind::Asymptotic,
                "triangle purchase price",
            ),
        ],
        Structure::Clique { r } => {
            let d = crate::purchase::clique_exponent(*r as u32);
            vec![bound(
                "asymptotic scale n^(-d_r)",
                nf.powf(-d),
                BoundKind::Asymptotic,
                "clique purchase price exponent",
            )]
        }
        Structure::SpanningTree => vec![
            bound("lower 1.38", 1.38, BoundKind::Lower, "spanning tree purchase price lower bound"),
            bound(
                "upper 2 zeta(3)",
                2.0 * zeta3(),
                BoundKind::Upper,
                "spanning tree purchase price upper bound",
            ),
            bound(
                "analytic tree cost (alpha=0.69, beta=3.5)",
                crate::strategies::evaluate_buytree_cost(0.69, 3.5)?,
                BoundKind::Upper,
                "two-step tree algorithm analytic cost",
            ),
        ],
        Structure::Arborescence => vec![bound(
            "asymptotic value 2",
            2.0,
            BoundKind::Asymptotic,
            "arborescence purchase price limit",
        )],
        Structure::BipartitePm | Structure::PmComplete => vec![
            bound("lower 2", 2.0, BoundKind::Lower, "perfect matching purchase price lower bound"),
            bound(
                "upper 4 c_3",
                4.0 * ck.c(3),
                BoundKind::Upper,
                "3-out matching construction cost",
            ),
        ],
        Structure::Hamilton => vec![
            bound("lower c_2", ck.c(2), BoundKind::Lower, "tour purchase price lower bound"),
            bound("upper 200", 200.0, BoundKind::Upper, "10-out tour construction cost"),
        ],
        Structure::HamiltonDirected => vec![
            bound("lower 4", 4.0, BoundKind::Lower, "directed tour cost lower bound"),
            bound(
                "upper 4 c_2",
                4.0 * ck.c(2),
                BoundKind::Upper,
                "2-in 2-out tour construction cost",
            ),
        ],
    })
}

/// Least-squares slope of `log(mean)` against `log(n)` with its standard
/// error; the power-law exponent check.
pub fn exponent_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return invalid("exponent fit needs at least 3 points");
    }
    if points.iter().any(|&(n, m)| n <= 0.0 || m <= 0.0) {
        return invalid("exponent fit needs positive sizes and means");
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let se = if points.len() > 2 { (ss_res / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((slope, se))
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

/// CSV row for a summary, under the stable header
/// `structure,n,order,trials,mean,stderr,median,success_rate,fallback_rate`.
pub fn summary_csv(cfg: &TrialConfig, s: &StatsSummary) -> String {
    let mut out = String::from("structure,n,order,trials,mean,stderr,median,success_rate,fallback_rate\n");
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        cfg.structure.name(),
        cfg.n,
        cfg.order,
        cfg.trials,
        format_g17(s.mean),
        s.stderr.map(format_g17).unwrap_or_default(),
        format_g17(s.median),
        format_g17(s.success_rate),
        format_g17(s.fallback_rate),
    ));
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    structure: &'a str,
    n: u64,
    order: String,
    trials: u64,
    seed: u64,
    params: &'a BTreeMap<String, f64>,
    summary: &'a StatsSummary,
    bounds: Vec<BoundRecord>,
}

/// JSON report embedding the analytic bounds.
pub fn summary_json(cfg: &TrialConfig, s: &StatsSummary) -> Result<String> {
    let report = JsonReport {
        structure: cfg.structure.name(),
        n: cfg.n,
        order: cfg.order.to_string(),
        trials: cfg.trials,
        seed: cfg.base_seed,
        params: &cfg.params,
        summary: s,
        bounds: theory_bounds(&cfg.structure, cfg.n)?,
    };
    serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp_config(trials: u64) -> TrialConfig {
        TrialConfig {
            structure: Structure::KPurchase { k: 1 },
            n: 100,
            order: OrderModel::Rom,
            trials,
            base_seed: 42,
            params: BTreeMap::new(),
        }
    }

    #[test]
    fn k_purchase_mean_matches_dp() {
        let cfg = kp_config(100_000);
        let s = run_trials(&cfg).unwrap();
        let rho = compute_rho(1, 100).unwrap();
        let dp = rho.get(1, 100);
        let se = s.stderr.unwrap();
        assert!((s.mean - dp).abs() < 3.0 * se, "mean {} dp {dp} se {se}", s.mean);
        assert_eq!(s.success_rate, 1.0);
    }

    #[test]
    fn identical_configs_identical_summaries() {
        let cfg = kp_config(2000);
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_has_no_stderr() {
        let cfg = kp_config(1);
        let s = run_trials(&cfg).unwrap();
        assert!(s.stderr.is_none());
        assert!(s.ci95.is_none());
    }

    #[test]
    fn stderr_shrinks_with_sqrt_trials() {
        let a = run_trials(&kp_config(20_000)).unwrap();
        let b = run_trials(&TrialConfig { trials: 40_000, ..kp_config(0) }).unwrap();
        let ratio = a.stderr.unwrap() / b.stderr.unwrap();
        assert!((ratio - 2f64.sqrt()).abs() < 0.1 * 2f64.sqrt(), "ratio {ratio}");
    }

    #[test]
    fn incompatible_order_rejected_before_running() {
        let cfg = TrialConfig {
            structure: Structure::SpanningTree,
            n: 50,
            order: OrderModel::Aom("vertex-sweep".into()),
            trials: 5,
            base_seed: 1,
            params: BTreeMap::new(),
        };
        assert!(run_trials(&cfg).is_err());
    }

    #[test]
    fn exponent_fit_synthetic() {
        // Exact power law.
        let pts: Vec<(f64, f64)> =
            [500.0, 1000.0, 2000.0, 4000.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-2.0 / 3.0))).collect();
        let (slope, _) = exponent_fit(&pts).unwrap();
        assert!((slope + 2.0 / 3.0).abs() < 1e-12, "slope {slope}");
        // Constant series.
        let pts: Vec<(f64, f64)> = [500.0, 1000.0, 2000.0].iter().map(|&n| (n, 2.5)).collect();
        let (slope, _) = exponent_fit(&pts).unwrap();
        assert!(slope.abs() < 1e-12);
        // Error paths.
        assert!(exponent_fit(&[(1.0, 1.0)]).is_err());
        assert!(exponent_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn bounds_for_key_structures() {
        let b = theory_bounds(&Structure::SpanningTree, 2000).unwrap();
        let lower = b.iter().find(|r| r.kind == BoundKind::Lower).unwrap();
        assert_eq!(lower.value, 1.38);
        let upper = b.iter().find(|r| r.name.contains("zeta")).unwrap();
        assert!((upper.value - 2.404113806).abs() < 1e-6);
        let analytic = b.iter().find(|r| r.name.contains("analytic")).unwrap();
        assert!(analytic.value < 2.31);

        let b = theory_bounds(&Structure::BipartitePm, 500).unwrap();
        let upper = b.iter().find(|r| r.kind == BoundKind::Upper).unwrap();
        let c3 = {
            let c2 = 3.0 + 5f64.sqrt();
            c2 + 1.0 + (1.0 + 2.0 * c2).sqrt()
        };
        assert!((upper.value - 4.0 * c3).abs() < 1e-9, "upper {}", upper.value);

        let b = theory_bounds(&Structure::Hamilton, 100).unwrap();
        assert!(b.iter().any(|r| r.value == 200.0));
        let lower = b.iter().find(|r| r.kind == BoundKind::Lower).unwrap();
        assert!((lower.value - 5.2360679).abs() < 1e-6);
    }

    #[test]
    fn csv_shape_and_determinism() {
        let cfg = kp_config(50);
        let s = run_trials(&cfg).unwrap();
        let csv = summary_csv(&cfg, &s);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "structure,n,order,trials,mean,stderr,median,success_rate,fallback_rate"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("k-purchase,100,rom,50,"));
        assert_eq!(csv, summary_csv(&cfg, &run_trials(&cfg).unwrap()));
        let json = summary_json(&cfg, &s).unwrap();
        assert!(json.contains("\"bounds\""));
    }
}
