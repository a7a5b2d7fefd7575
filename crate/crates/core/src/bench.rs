//! Corpus generation and per-instance measurements of the full pipeline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::compress;
use crate::dag;
use crate::encode::{self, DiGraph};
use crate::error::Result;
use crate::formula::{Formula, Sequent};
use crate::gen;
use crate::lm::{self, LmConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seed: u64,
    pub count: usize,
    pub max_weight: u64,
    pub bound_mult: u64,
    /// Digraph sizes `1..=max_n` for the ρ_G part; 0 skips it.
    pub max_n: usize,
    /// Search budget for ρ_G instances, which grow quickly with `n`.
    pub graph_node_budget: u64,
    /// Record wall-clock times. Off keeps reports byte-identical across runs.
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { seed: 7, count: 100, max_weight: 40, bound_mult: 2, max_n: 4, graph_node_budget: 1_000, timing: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub index: usize,
    pub source: String,
    pub formula: String,
    pub weight: u64,
    pub h_lm: usize,
    pub h_tree: usize,
    pub h_dag: usize,
    pub phi: u64,
    pub w_tree: u64,
    pub w_dag: u64,
    pub w_star: u64,
    pub verify_ok: bool,
    pub bound_ok: bool,
    pub checker_steps: u64,
    /// Microseconds; 0 when timing is off.
    pub wall_time_us: u64,
    pub error: Option<String>,
}

impl MetricsRecord {
    fn failed(index: usize, source: String, f: Formula, error: String) -> MetricsRecord {
        MetricsRecord {
            index,
            source,
            formula: f.to_string(),
            weight: f.weight(),
            h_lm: 0,
            h_tree: 0,
            h_dag: 0,
            phi: 0,
            w_tree: 0,
            w_dag: 0,
            w_star: 0,
            verify_ok: false,
            bound_ok: false,
            checker_steps: 0,
            wall_time_us: 0,
            error: Some(error),
        }
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// `ln y − (intercept + slope·ln x)` per point, in input order.
    pub residuals: Vec<f64>,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(SlopeFit { slope, intercept, r_squared, points: pts.len(), residuals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSizeRow {
    pub n: usize,
    /// Weight of ρ_G for the edgeless and the complete loop-free digraph.
    pub weight_empty: u64,
    pub weight_complete: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub config: BenchConfig,
    pub records: Vec<MetricsRecord>,
    /// ρ_G instances; most are far beyond the search budget and record why.
    pub graph_records: Vec<MetricsRecord>,
    pub verified_fraction: f64,
    pub bound_fraction: f64,
    /// `checker_steps` against `w_dag` over verified formula records.
    pub fit: Option<SlopeFit>,
    pub rho_sizes: Vec<RhoSizeRow>,
    pub rho_sizes_monotone: bool,
}

/// Runs LM search, translation, compression and certification on one goal.
pub fn run_instance(index: usize, source: String, f: Formula, cfg: &LmConfig, timing: bool) -> MetricsRecord {
    let t0 = Instant::now();
    let mut rec = match pipeline(f, cfg) {
        Ok(r) => r,
        Err(e) => MetricsRecord::failed(index, source.clone(), f, e.to_string()),
    };
    rec.index = index;
    rec.source = source;
    if timing {
        rec.wall_time_us = t0.elapsed().as_micros() as u64;
    }
    rec
}

fn pipeline(f: Formula, cfg: &LmConfig) -> Result<MetricsRecord> {
    let search = lm::prove_with(&Sequent::goal(f), cfg)?;
    let Some(p) = search.proof else {
        return Err(crate::Error::Invalid(format!("unproved at bound {}", search.bound)));
    };
    let tree = lm::translate_lm_to_nd(&p)?;
    let c = compress::compress_and_certify(&tree)?;
    let v = dag::verify_dag_report(&c.dag)?;
    let m = &c.metrics;
    Ok(MetricsRecord {
        index: 0,
        source: String::new(),
        formula: f.to_string(),
        weight: f.weight(),
        h_lm: p.height(),
        h_tree: m.h_tree,
        h_dag: m.h_dag,
        phi: m.phi,
        w_tree: m.w_tree,
        w_dag: m.w_dag,
        w_star: m.w_star,
        verify_ok: c.verified,
        bound_ok: m.bound_ok,
        checker_steps: v.steps,
        wall_time_us: 0,
        error: None,
    })
}

/// The seeded formula corpus: `count` LM-provable formulas of weight at
/// most `max_weight` over the default alphabet.
pub fn formula_corpus(seed: u64, count: usize, max_weight: u64, cfg: &LmConfig) -> Result<Vec<Formula>> {
    let mut rng = gen::rng(seed);
    (0..count).map(|_| gen::random_provable(&mut rng, max_weight, cfg).map(|(f, _)| f)).collect()
}

/// Instances run sequentially: formula identities feed the search order, so
/// a fixed order keeps reports reproducible.
pub fn bench_corpus(cfg: &BenchConfig) -> Result<BenchReport> {
    let lm_cfg = LmConfig { bound_mult: cfg.bound_mult, ..LmConfig::default() };
    let corpus = formula_corpus(cfg.seed, cfg.count, cfg.max_weight, &lm_cfg)?;
    let records: Vec<MetricsRecord> = corpus.into_iter().enumerate().map(|(i, f)| run_instance(i, "random".into(), f, &lm_cfg, cfg.timing)).collect();

    let mut rng = gen::rng(cfg.seed ^ 0x9e37_79b9);
    let graph_cfg = LmConfig { node_budget: cfg.graph_node_budget, escalate_to: None, ..lm_cfg };
    let mut graph_records = Vec::new();
    let mut rho_sizes = Vec::new();
    for n in 1..=cfg.max_n {
        let empty = DiGraph::new(n, vec![])?;
        let complete = DiGraph::new(n, (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))))?;
        rho_sizes.push(RhoSizeRow { n, weight_empty: encode::rho_g(&empty).weight(), weight_complete: encode::rho_g(&complete).weight() });
        let g = gen::random_digraph(&mut rng, n, 0.5);
        let source = format!("rho_g n={n} edges={}", g.edges().len());
        graph_records.push(run_instance(graph_records.len(), source, encode::rho_g(&g), &graph_cfg, cfg.timing));
    }
    let rho_sizes_monotone = rho_sizes.windows(2).all(|w| w[0].weight_empty < w[1].weight_empty && w[0].weight_complete < w[1].weight_complete);

    let total = records.len().max(1) as f64;
    let verified_fraction = records.iter().filter(|r| r.verify_ok).count() as f64 / total;
    let bound_fraction = records.iter().filter(|r| r.bound_ok).count() as f64 / total;
    let ok: Vec<&MetricsRecord> = records.iter().filter(|r| r.verify_ok).collect();
    let xs: Vec<f64> = ok.iter().map(|r| r.w_dag as f64).collect();
    let ys: Vec<f64> = ok.iter().map(|r| r.checker_steps as f64).collect();
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        records,
        graph_records,
        verified_fraction,
        bound_fraction,
        fit: loglog_fit(&xs, &ys),
        rho_sizes,
        rho_sizes_monotone,
    })
}

impl BenchReport {
    /// Plain-text summary with the fitted curve and residuals.
    pub fn summary(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "instances: {}", self.records.len()).unwrap();
        writeln!(s, "verified fraction: {:.4}", self.verified_fraction).unwrap();
        writeln!(s, "bound fraction: {:.4}", self.bound_fraction).unwrap();
        match &self.fit {
            Some(f) => {
                writeln!(s, "fit: ln(steps) = {:.4} + {:.4}·ln(w_dag)  (r² = {:.4}, {} points)", f.intercept, f.slope, f.r_squared, f.points).unwrap();
                let rs: Vec<String> = f.residuals.iter().map(|r| format!("{r:.3}")).collect();
                writeln!(s, "residuals: {}", rs.join(" ")).unwrap();
            }
            None => writeln!(s, "fit: not enough points").unwrap(),
        }
        writeln!(s, "rho_g weights (n, empty, complete):").unwrap();
        for r in &self.rho_sizes {
            writeln!(s, "  {} {} {}", r.n, r.weight_empty, r.weight_complete).unwrap();
        }
        for r in &self.graph_records {
            let status = r.error.as_deref().map_or_else(|| format!("verify_ok={}", r.verify_ok), |e| e.to_string());
            writeln!(s, "  {}: weight {} — {}", r.source, r.weight, status).unwrap();
        }
        s
    }
}
