use std::path::Path;

use serde::Serialize;

use super::ks::{empirical_cdf, sorted};
use super::{LimitsError, TheoremId, TheoremParams};
use crate::dist::{frechet_cdf, stable_reference_sample, HeavyTailLaw, Rng};

pub const DEFAULT_MC_SIZE: usize = 5000;
pub const DEFAULT_SUMMANDS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `exp(-x^{-alpha})`.
    Frechet { alpha: f64 },
    /// Law of `(premultiplier * S)^power` where `S` is the normalized sum
    /// with tail index `tail_index`.
    StablePower {
        tail_index: f64,
        premultiplier: f64,
        power: f64,
    },
}

/// Limit law of a normalized statistic: closed form for the Frechet
/// theorems, an empirical Monte Carlo law otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceDistribution {
    kind: ReferenceKind,
    sample: Vec<f64>,
}

impl ReferenceDistribution {
    pub fn frechet(alpha: f64) -> Self {
        ReferenceDistribution {
            kind: ReferenceKind::Frechet { alpha },
            sample: Vec::new(),
        }
    }

    /// Builds the empirical law from draws of `S`.
    pub fn stable_power(tail_index: f64, premultiplier: f64, power: f64, draws: &[f64]) -> Self {
        let values: Vec<f64> = draws.iter().map(|s| (premultiplier * s).powf(power)).collect();
        ReferenceDistribution {
            kind: ReferenceKind::StablePower {
                tail_index,
                premultiplier,
                power,
            },
            sample: sorted(&values),
        }
    }

    pub fn kind(&self) -> ReferenceKind {
        self.kind
    }

    /// Sorted reference draws; empty for a closed-form law.
    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            ReferenceKind::Frechet { alpha } => frechet_cdf(alpha, x),
            ReferenceKind::StablePower { .. } => empirical_cdf(&self.sample, x),
        }
    }

    /// Single-column CSV of the reference draws.
    pub fn write_csv(&self, path: &Path) -> Result<(), LimitsError> {
        let io = |e: csv::Error| LimitsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["x"]).map_err(io)?;
        for v in &self.sample {
            w.write_record([format!("{v:?}")]).map_err(io)?;
        }
        w.flush().map_err(|e| LimitsError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Premultiplier and power applied to the normalized sum for each stable
/// theorem, and the tail index of the summands.
pub fn stable_shape(id: TheoremId, params: &TheoremParams) -> Option<(f64, f64, f64)> {
    if !id.is_stable() {
        return None;
    }
    let g = id.gamma(params);
    let alpha = params.alpha;
    Some(match id {
        TheoremId::Ground => (alpha, 2.0, 1.0),
        TheoremId::Gro3 | TheoremId::Rtop3 => (alpha * g, 2.0 * g * params.mu.abs().powf(1.0 - 1.0 / g), 1.0),
        _ => (alpha * g, 2.0, g),
    })
}

pub fn reference_for(
    id: TheoremId,
    params: &TheoremParams,
    law: &HeavyTailLaw,
    mc_size: usize,
    rng: &Rng,
) -> Result<ReferenceDistribution, LimitsError> {
    reference_with_summands(id, params, law, mc_size, DEFAULT_SUMMANDS, rng)
}

/// [`reference_for`] with an explicit number of summands per draw.
pub fn reference_with_summands(
    id: TheoremId,
    params: &TheoremParams,
    law: &HeavyTailLaw,
    mc_size: usize,
    summands: usize,
    rng: &Rng,
) -> Result<ReferenceDistribution, LimitsError> {
    id.validate(params)?;
    let Some((tail, premultiplier, power)) = stable_shape(id, params) else {
        return Ok(ReferenceDistribution::frechet(params.alpha));
    };
    if mc_size == 0 {
        return Err(LimitsError::EmptySample("reference".into()));
    }
    let law = HeavyTailLaw {
        alpha: params.alpha,
        ..*law
    };
    let draws = stable_reference_sample(tail, mc_size, summands, &law, rng)?;
    Ok(ReferenceDistribution::stable_power(tail, premultiplier, power, &draws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::ks_two_sample;

    #[test]
    fn frechet_reference() {
        let q = TheoremParams::new(1.0, 2.0, 2.0);
        let r = reference_for(TheoremId::Rtop1, &q, &HeavyTailLaw::pareto(1.0), 10, &Rng::new(0)).unwrap();
        assert!((r.cdf(1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!(r.sample().is_empty());
    }

    #[test]
    fn gro2_reference_is_monotone() {
        let q = TheoremParams::new(0.8, 4.0, 1.0);
        let law = HeavyTailLaw::pareto(0.8);
        let r = reference_with_summands(TheoremId::Gro2, &q, &law, 300, 2000, &Rng::new(3)).unwrap();
        assert_eq!(r.kind(), ReferenceKind::StablePower { tail_index: 0.4, premultiplier: 2.0, power: 0.5 });
        let xs: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let f: Vec<f64> = xs.iter().map(|&x| r.cdf(x)).collect();
        assert!(f.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.cdf(f64::INFINITY), 1.0);
        assert_eq!(r.cdf(0.0), 0.0);
    }

    #[test]
    fn reference_rejects_out_of_window() {
        let q = TheoremParams::new(1.9, 4.0, 1.0);
        let law = HeavyTailLaw::pareto(1.9);
        assert!(matches!(
            reference_for(TheoremId::Gro2, &q, &law, 10, &Rng::new(0)),
            Err(LimitsError::Regime(_))
        ));
    }

    #[test]
    fn independent_builds_agree() {
        let q = TheoremParams::new(0.5, 0.0, 0.0);
        let law = HeavyTailLaw::pareto(0.5);
        let a = reference_with_summands(TheoremId::Ground, &q, &law, 2000, 1000, &Rng::new(1)).unwrap();
        let b = reference_with_summands(TheoremId::Ground, &q, &law, 2000, 1000, &Rng::new(2)).unwrap();
        assert!(ks_two_sample(a.sample(), b.sample()).unwrap() < 0.06);
    }
}
