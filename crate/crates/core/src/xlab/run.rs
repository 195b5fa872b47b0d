use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MethodChoice};
use super::XlabError;
use crate::dist::{quantile_b_n, Rng};
use crate::limits::{ks_distance, ks_two_sample, normalize_statistic, reference_with_summands, sorted, ReferenceDistribution, TheoremId};
use crate::mat::{compact_large, decompose, default_thresholds, diagnostics_with_bn, sample_matrix, Regime, SymmetricMatrix, DEFAULT_DELTA};
use crate::norms::{
    ansatz_bounds, ansatz_grothendieck_bounds, boyd_power_method, dual_exponent, grothendieck_value, hypercube_max,
    large_part_value, multistart_ascent, oracle_grothendieck_small, oracle_norm_small, spectral_norm, Method, NormCertificate,
    NormError, NormProblem, EXACT_SPIN_LIMIT,
};

/// Stream of the reference sample; trial streams are indexed by `n >= 1`.
const REFERENCE_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub a_star: f64,
    pub row_sum_ratio: f64,
    pub large_count: usize,
    /// Whether the large part compacts to a paired matrix.
    pub pairable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub theorem: TheoremId,
    pub n: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub stream: u64,
    pub b_n: f64,
    pub raw_statistic: Option<f64>,
    pub normalized_statistic: Option<f64>,
    pub solver_method: Option<String>,
    pub kkt_residual: Option<f64>,
    pub iterations: usize,
    pub sandwich_lower: Option<f64>,
    pub sandwich_upper: Option<f64>,
    /// `(upper - lower)` over the theorem's fluctuation scale.
    pub sandwich_width: Option<f64>,
    /// `b_n^{-1}` times the paired closed form of the large part.
    pub large_part_statistic: Option<f64>,
    pub diagnostics: Option<DiagnosticsSummary>,
    pub wall_time: f64,
    pub error: Option<String>,
}

impl TrialRecord {
    /// Copy with the timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        TrialRecord {
            wall_time: 0.0,
            ..self.clone()
        }
    }

    /// `|raw / b_n - large_part_statistic|` where both share a scale.
    pub fn large_part_gap(&self) -> Option<f64> {
        if self.theorem.uses_mean() {
            return None;
        }
        Some((self.raw_statistic? / self.b_n - self.large_part_statistic?).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub count: usize,
    pub failures: usize,
    /// Distance of the normalized statistics to the reference law.
    pub ks: Option<f64>,
    /// Distance of the large-part statistics to the reference law.
    pub ks_large_part: Option<f64>,
    pub q05: Option<f64>,
    pub q25: Option<f64>,
    pub q50: Option<f64>,
    pub q75: Option<f64>,
    pub q95: Option<f64>,
    /// Median of `(upper - lower) / fluctuation scale`.
    pub median_width: Option<f64>,
    pub median_large_part: Option<f64>,
    pub median_gap: Option<f64>,
    pub median_kkt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub theorem: TheoremId,
    pub rows: Vec<SummaryRow>,
}

pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
    pub reference: Option<ReferenceDistribution>,
}


struct Outcome {
    raw: f64,
    cert: Option<NormCertificate>,
    method: Method,
}

/// Order statistic at level `q` by linear interpolation.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(&sorted(values), 0.5)
}

fn threads_from_env() -> Option<usize> {
    std::env::var("HTLAB_THREADS").ok()?.trim().parse().ok().filter(|&k| k > 0)
}

/// Runs the campaign on at most `HTLAB_THREADS` workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, XlabError> {
    run_experiment_with_threads(cfg, threads_from_env())
}

/// Runs every `(n, trial)` pair, builds the reference law when `mc_size > 0`
/// and summarizes. Output does not depend on `threads`.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput, XlabError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| XlabError::Usage(e.to_string()))?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let (mut records, reference) = pool.install(|| {
        let records: Vec<TrialRecord> = jobs.par_iter().map(|&(n, t)| run_trial(cfg, n, t)).collect();
        let reference = build_reference(cfg);
        (records, reference)
    });
    let reference = reference?;
    records.sort_by_key(|r| (r.n, r.trial_index));
    let summary = summarize(cfg.theorem, &records, reference.as_ref());
    Ok(ExperimentOutput {
        records,
        summary,
        reference,
    })
}

pub fn build_reference(cfg: &ExperimentConfig) -> Result<Option<ReferenceDistribution>, XlabError> {
    if cfg.mc_size == 0 {
        return Ok(None);
    }
    let rng = Rng::new(cfg.master_seed).split(REFERENCE_STREAM);
    let r = reference_with_summands(cfg.theorem, &cfg.params(), &cfg.law, cfg.mc_size, cfg.summands, &rng)?;
    Ok(Some(r))
}

pub fn trial_rng(master_seed: u64, n: usize, t: usize) -> Rng {
    Rng::new(master_seed).split(n as u64).split(t as u64)
}

/// Exponents of the norm problem behind a theorem's statistic.
fn problem_of(id: TheoremId, r: f64, p: f64) -> Result<NormProblem, NormError> {
    if id.is_grothendieck() {
        NormProblem::new(r, dual_exponent(r))
    } else if id == TheoremId::Ground {
        NormProblem::new(f64::INFINITY, 1.0)
    } else {
        NormProblem::new(r, p)
    }
}

fn run_trial(cfg: &ExperimentConfig, n: usize, t: usize) -> TrialRecord {
    let start = Instant::now();
    let mut rng = trial_rng(cfg.master_seed, n, t);
    let b_n = quantile_b_n(&cfg.law, n);
    let mut rec = TrialRecord {
        theorem: cfg.theorem,
        n,
        trial_index: t,
        seed: cfg.master_seed,
        stream: rng.stream(),
        b_n,
        raw_statistic: None,
        normalized_statistic: None,
        solver_method: None,
        kkt_residual: None,
        iterations: 0,
        sandwich_lower: None,
        sandwich_upper: None,
        sandwich_width: None,
        large_part_statistic: None,
        diagnostics: None,
        wall_time: 0.0,
        error: None,
    };
    if let Err(e) = fill_trial(cfg, &mut rec, &mut rng) {
        rec.error = Some(e);
    }
    rec.wall_time = start.elapsed().as_secs_f64();
    rec
}

fn fill_trial(cfg: &ExperimentConfig, rec: &mut TrialRecord, rng: &mut Rng) -> Result<(), String> {
    let id = cfg.theorem;
    let n = rec.n;
    let a = sample_matrix(&cfg.law, n, rng).map_err(|e| e.to_string())?;
    let prob = problem_of(id, cfg.r, cfg.p).map_err(|e| e.to_string())?;

    // Decomposition of the un-shifted sample.
    let regime = if id.uses_mean() || matches!(id, TheoremId::Gro2c | TheoremId::Rtop2c) {
        Regime::CenteredAlpha
    } else {
        Regime::SmallAlpha
    };
    let mut parts = None;
    if id.is_stable() {
        let (eta, zeta) = default_thresholds(regime, cfg.alpha, prob.r, prob.p).map_err(|e| e.to_string())?;
        let d = decompose(&a, cfg.alpha, eta, zeta).map_err(|e| e.to_string())?;
        let rep = diagnostics_with_bn(&a, rec.b_n, cfg.alpha, DEFAULT_DELTA, eta, zeta);
        rec.diagnostics = Some(DiagnosticsSummary {
            a_star: rep.a_star,
            row_sum_ratio: rep.row_sum_ratio,
            large_count: rep.large_count,
            pairable: compact_large(&d.large).is_ok(),
        });
        rec.large_part_statistic = Some(large_part_value(&d.large, id.gamma(&cfg.params())) / rec.b_n);
        if id.uses_mean() {
            let (lo, hi) = if id.is_grothendieck() {
                ansatz_grothendieck_bounds(cfg.mu, &d.inter, &d.large, cfg.r)
            } else {
                ansatz_bounds(cfg.mu, &d.inter, &d.large, &prob)
            }
            .map_err(|e| e.to_string())?;
            rec.sandwich_lower = Some(lo);
            rec.sandwich_upper = Some(hi);
            let scale = id.fluctuation_scale(n, rec.b_n, &cfg.params()).map_err(|e| e.to_string())?;
            rec.sandwich_width = Some((hi - lo) / scale);
        }
        parts = Some(d);
    } else {
        let rep = diagnostics_with_bn(&a, rec.b_n, cfg.alpha, DEFAULT_DELTA, 0.5, 0.25);
        rec.diagnostics = Some(DiagnosticsSummary {
            a_star: rep.a_star,
            row_sum_ratio: rep.row_sum_ratio,
            large_count: rep.large_count,
            pairable: false,
        });
    }

    let outcome = match cfg.solver.method {
        MethodChoice::Bounds => {
            if !id.uses_mean() {
                return Err(format!("method `bounds` applies to shifted theorems, not {id}"));
            }
            Outcome {
                raw: rec.sandwich_lower.expect("bounds computed above"),
                cert: None,
                method: Method::Ansatz,
            }
        }
        MethodChoice::Closed => {
            let d = parts.as_ref().ok_or_else(|| format!("method `closed` needs a stable theorem, not {id}"))?;
            Outcome {
                raw: large_part_value(&d.large, id.gamma(&cfg.params())),
                cert: None,
                method: Method::ClosedForm,
            }
        }
        _ => {
            let b = if id.uses_mean() {
                SymmetricMatrix::from_upper(n, a.upper().iter().map(|v| v + cfg.mu).collect()).map_err(|e| e.to_string())?
            } else {
                a
            };
            let seed = rng.split(1);
            let opts = (cfg.solver.method, cfg.solver.restarts_for(n), cfg.solver.tol, cfg.r);
            match cfg.solver.trial_timeout {
                None => solve(id, &b, &prob, opts, seed)?,
                Some(secs) => {
                    let (tx, rx) = mpsc::channel();
                    std::thread::spawn(move || {
                        let _ = tx.send(solve(id, &b, &prob, opts, seed));
                    });
                    rx.recv_timeout(Duration::from_secs_f64(secs))
                        .map_err(|_| format!("refused: trial exceeded {secs} s"))??
                }
            }
        }
    };
    rec.raw_statistic = Some(outcome.raw);
    rec.solver_method = Some(outcome.method.name().to_string());
    if let Some(c) = &outcome.cert {
        rec.kkt_residual = c.kkt_residual;
        rec.iterations = c.iterations;
    }
    let normalized = normalize_statistic(id, outcome.raw, n, rec.b_n, &cfg.params()).map_err(|e| e.to_string())?;
    rec.normalized_statistic = Some(normalized);
    Ok(())
}

/// The theorem's raw statistic on the (possibly shifted) matrix.
fn solve(
    id: TheoremId,
    b: &SymmetricMatrix,
    prob: &NormProblem,
    (method, restarts, tol, r): (MethodChoice, usize, f64, f64),
    mut rng: Rng,
) -> Result<Outcome, String> {
    let err = |e: NormError| e.to_string();
    let done = |c: NormCertificate| Outcome {
        raw: c.value,
        method: c.method,
        cert: Some(c),
    };
    if id == TheoremId::Ground {
        return Ok(if method == MethodChoice::Oracle || b.n() <= EXACT_SPIN_LIMIT {
            let (v, x) = hypercube_max(b).map_err(err)?;
            done(NormCertificate::new(v, x, None, Method::Hypercube))
        } else {
            // Trace plus the cube maximum of the diagonal-free part, which
            // sits at a vertex.
            let off = b.without_diagonal();
            let c = grothendieck_value(&off, f64::INFINITY, restarts, &mut rng).map_err(err)?;
            done(NormCertificate::new(b.trace() + c.value, c.x, None, Method::Surrogate))
        });
    }
    if id.is_grothendieck() {
        return match method {
            MethodChoice::Oracle => Ok(Outcome {
                raw: oracle_grothendieck_small(b, r).map_err(err)?,
                cert: None,
                method: Method::Oracle,
            }),
            MethodChoice::Power => Err("power method does not apply to Grothendieck values".into()),
            _ => Ok(done(grothendieck_value(b, r, restarts, &mut rng).map_err(err)?)),
        };
    }
    match method {
        MethodChoice::Oracle => Ok(Outcome {
            raw: oracle_norm_small(b, prob).map_err(err)?,
            cert: None,
            method: Method::Oracle,
        }),
        MethodChoice::Power => {
            let c = boyd_power_method(b, prob, tol, 100_000, &vec![1.0; b.n()]).map_err(err)?;
            Ok(done(c))
        }
        MethodChoice::Ascent => Ok(done(multistart_ascent(b, prob, restarts, tol, &mut rng).map_err(err)?)),
        _ => {
            if prob.r == 2.0 && prob.p == 2.0 {
                Ok(done(spectral_norm(b)))
            } else if prob.is_finite_interior() && prob.p <= prob.r && b.is_nonnegative() {
                let c = boyd_power_method(b, prob, tol, 100_000, &vec![1.0; b.n()]).map_err(err)?;
                Ok(done(c))
            } else {
                Ok(done(multistart_ascent(b, prob, restarts, tol, &mut rng).map_err(err)?))
            }
        }
    }
}

/// Per-`n` table of a record set. KS columns need a reference.
pub fn summarize(theorem: TheoremId, records: &[TrialRecord], reference: Option<&ReferenceDistribution>) -> Summary {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let rows = ns
        .into_iter()
        .map(|n| {
            let group: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
            let ok: Vec<&TrialRecord> = group.iter().copied().filter(|r| r.error.is_none()).collect();
            let stats = sorted(&ok.iter().filter_map(|r| r.normalized_statistic).collect::<Vec<_>>());
            let large = sorted(&ok.iter().filter_map(|r| r.large_part_statistic).collect::<Vec<_>>());
            let widths: Vec<f64> = ok.iter().filter_map(|r| r.sandwich_width).collect();
            let gaps: Vec<f64> = ok.iter().filter_map(|r| r.large_part_gap()).collect();
            let kkts: Vec<f64> = ok.iter().filter_map(|r| r.kkt_residual).collect();
            let ks = reference.and_then(|f| match f.kind() {
                crate::limits::ReferenceKind::Frechet { .. } => ks_distance(&stats, |x| f.cdf(x)).ok(),
                _ => ks_two_sample(&stats, f.sample()).ok(),
            });
            let ks_large_part = if theorem.is_stable() && !theorem.uses_mean() {
                reference.and_then(|f| ks_two_sample(&large, f.sample()).ok())
            } else {
                None
            };
            SummaryRow {
                n,
                count: ok.len(),
                failures: group.len() - ok.len(),
                ks,
                ks_large_part,
                q05: quantile(&stats, 0.05),
                q25: quantile(&stats, 0.25),
                q50: quantile(&stats, 0.5),
                q75: quantile(&stats, 0.75),
                q95: quantile(&stats, 0.95),
                median_width: median(&widths),
                median_large_part: quantile(&large, 0.5),
                median_gap: median(&gaps),
                median_kkt: median(&kkts),
            }
        })
        .collect();
    Summary { theorem, rows }
}
