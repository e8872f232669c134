//! Resource feasibility model and exhaustive design-space exploration.
//!
//! Hardware restricts the scatter/gather PE count `n` to powers of two
//! and the MAC count `m` to squares of powers of two, so the search grid
//! stays tiny and full enumeration is exact. DSP use grows linearly in
//! both; LUT use adds an `n log2(n)` term for the routing network.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::perf::{estimate_throughput, PlatformSpec, Workload};
use crate::sim::{is_square_of_power_of_two, AcceleratorConfig};

/// Left-hand sides of the two resource constraints plus feasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceUsage {
    pub dsp: f64,
    pub lut: f64,
    pub dsp_ok: bool,
    pub lut_ok: bool,
}

impl ResourceUsage {
    pub fn feasible(&self) -> bool {
        self.dsp_ok && self.lut_ok
    }
}

/// Evaluates `lambda1*m + lambda2*n <= N_DSP` and
/// `rho1*m + rho2*n + rho3*n*log2(n) <= N_LUT`.
pub fn check_resources(n: usize, m: usize, platform: &PlatformSpec) -> ResourceUsage {
    let (l1, l2) = platform.lambda;
    let (r1, r2, r3) = platform.rho;
    let nf = n as f64;
    let mf = m as f64;
    let dsp = l1 * mf + l2 * nf;
    let lut = r1 * mf + r2 * nf + r3 * nf * nf.log2();
    ResourceUsage {
        dsp,
        lut,
        dsp_ok: dsp <= platform.dsp_per_die,
        lut_ok: lut <= platform.lut_per_die,
    }
}

/// Search options: hard caps on the candidate grids and whether to keep
/// the per-config evaluation log.
#[derive(Debug, Clone)]
pub struct DseOptions {
    pub n_cap: usize,
    pub m_cap: usize,
    pub log_configs: bool,
}

impl Default for DseOptions {
    fn default() -> Self {
        Self {
            n_cap: 4096,
            m_cap: 1 << 16,
            log_configs: false,
        }
    }
}

fn n_grid(cap: usize) -> impl Iterator<Item = usize> {
    (0..).map(|k| 1usize << k).take_while(move |&n| n <= cap)
}

fn m_grid(cap: usize) -> impl Iterator<Item = usize> {
    (0..)
        .map(|k| 1usize << (2 * k))
        .take_while(move |&m| m <= cap)
}

/// Derives `(n_max, m_max)`: the largest grid values feasible with the
/// other variable at 1. Errors when even `(1, 1)` does not fit.
pub fn construct_search_space(
    platform: &PlatformSpec,
    opts: &DseOptions,
) -> Result<(usize, usize)> {
    if !check_resources(1, 1, platform).feasible() {
        return Err(Error::Infeasible(
            "minimal configuration (n=1, m=1) exceeds the resource budget".into(),
        ));
    }
    let n_max = n_grid(opts.n_cap)
        .filter(|&n| check_resources(n, 1, platform).feasible())
        .last()
        .unwrap();
    let m_max = m_grid(opts.m_cap)
        .filter(|&m| check_resources(1, m, platform).feasible())
        .last()
        .unwrap();
    Ok((n_max, m_max))
}

/// One evaluated configuration (kept when logging is enabled).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigEval {
    pub n: usize,
    pub m: usize,
    pub feasible: bool,
    pub throughput: f64,
}

/// Chosen configuration for one die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DieChoice {
    pub n: usize,
    pub m: usize,
    pub throughput: f64,
    pub usage: ResourceUsage,
}

/// Exploration outcome.
#[derive(Debug, Clone)]
pub struct DseResult {
    pub per_die: Vec<DieChoice>,
    /// System throughput with every die on its chosen configuration.
    pub throughput: f64,
    /// Configurations evaluated per die.
    pub evaluated: usize,
    pub search_space: (usize, usize),
    pub log: Option<Vec<ConfigEval>>,
}

impl DseResult {
    pub fn report_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "search_space n_max={} m_max={} evaluated={}",
            self.search_space.0, self.search_space.1, self.evaluated
        );
        for (d, c) in self.per_die.iter().enumerate() {
            let _ = writeln!(
                out,
                "die={} n={} m={} throughput_nvtps={:.9e} dsp_used={:.1} lut_used={:.1}",
                d, c.n, c.m, c.throughput, c.usage.dsp, c.usage.lut
            );
        }
        let _ = writeln!(out, "throughput_nvtps={:.9e}", self.throughput);
        out
    }
}

// Deterministic, order-free preference: higher throughput, then fewer
// DSPs, then smaller n, then smaller m.
fn better(a: &DieChoice, b: &DieChoice) -> bool {
    if a.throughput != b.throughput {
        return a.throughput > b.throughput;
    }
    if a.usage.dsp != b.usage.dsp {
        return a.usage.dsp < b.usage.dsp;
    }
    if a.n != b.n {
        return a.n < b.n;
    }
    a.m < b.m
}

/// Exhaustively evaluates every grid configuration within the derived
/// search space for each die and keeps the feasible throughput maximum.
///
/// Dies are symmetric in the platform description, so each die performs
/// the same search against its own resource budget and memory channel.
pub fn explore(
    workload: &Workload,
    base_cfg: &AcceleratorConfig,
    platform: &PlatformSpec,
    t_sampling: f64,
    t_lc: f64,
    t_wu: f64,
    opts: &DseOptions,
) -> Result<DseResult> {
    let (n_max, m_max) = construct_search_space(platform, opts)?;
    let mut log = opts.log_configs.then(Vec::new);

    let mut evaluated = 0usize;
    let mut best: Option<DieChoice> = None;
    for n in n_grid(n_max) {
        for m in m_grid(m_max) {
            if !is_square_of_power_of_two(m) {
                continue;
            }
            evaluated += 1;
            let usage = check_resources(n, m, platform);
            let mut throughput = 0.0;
            if usage.feasible() {
                let mut cfg = base_cfg.clone();
                cfg.scatter_gather_pes = n;
                cfg.macs = m;
                cfg.validate()?;
                let est = estimate_throughput(workload, &cfg, platform, t_sampling, t_lc, t_wu);
                throughput = est.throughput;
                let candidate = DieChoice {
                    n,
                    m,
                    throughput,
                    usage,
                };
                if best.as_ref().is_none_or(|b| better(&candidate, b)) {
                    best = Some(candidate);
                }
            }
            if let Some(log) = log.as_mut() {
                log.push(ConfigEval {
                    n,
                    m,
                    feasible: usage.feasible(),
                    throughput,
                });
            }
        }
    }

    let choice = best
        .ok_or_else(|| Error::Infeasible("no feasible configuration in the search space".into()))?;
    Ok(DseResult {
        per_die: vec![choice; platform.dies],
        throughput: choice.throughput,
        evaluated,
        search_space: (n_max, m_max),
        log,
    })
}
