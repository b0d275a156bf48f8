//! Behaviour of the walk's Holder functional across regularity exponents:
//! below the critical exponent the replica quantiles stay flat in n, above
//! one half they grow, and the report classifies each scheduled alpha and
//! checks the classes against what the moment assumptions predict.

use roughwalk_core::metrics::holder_norms_multi;
use roughwalk_core::tightness_exponents;

use crate::config::{Config, DistributionKind};
use crate::experiments::{dump_replica_walks, replica_walks, run_replicas, split_cells};
use crate::report::{ReportBody, SlopeRecord, Table, Verdict};
use crate::stats::{ols_slope, quantile, quantile_with_section_se, SlopeFit};

/// Quantiles within this relative band around their schedule median count
/// as stable.
pub const STABILITY_BAND: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Stable,
    Growing,
    Inconclusive,
}

impl Class {
    fn code(self) -> f64 {
        match self {
            Class::Stable => 0.0,
            Class::Growing => 1.0,
            Class::Inconclusive => 2.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Class::Stable => "stable",
            Class::Growing => "growing",
            Class::Inconclusive => "inconclusive",
        }
    }
}

/// Stable wins when every scheduled quantile sits within the band around
/// the schedule median; otherwise a slope beyond `tol` standard errors
/// reads as growth; otherwise the data are inconclusive.
pub fn classify(quantiles: &[f64], ln_n: &[f64], tol: f64) -> (Class, f64, SlopeFit) {
    let med = quantile(quantiles, 0.5);
    let max_rel_dev = quantiles
        .iter()
        .map(|q| (q - med).abs() / med)
        .fold(0.0, f64::max);
    let ln_q: Vec<f64> = quantiles.iter().map(|q| q.ln()).collect();
    let fit = ols_slope(ln_n, &ln_q);
    let class = if max_rel_dev <= STABILITY_BAND {
        Class::Stable
    } else if fit.slope > tol * fit.stderr {
        Class::Growing
    } else {
        Class::Inconclusive
    };
    (class, max_rel_dev, fit)
}

/// Effective moment order of the increment law: the heavy-tailed law is
/// capped by its dof, everything else has all moments.
fn effective_moment_order(cfg: &Config) -> f64 {
    match cfg.distribution {
        DistributionKind::StudentT => cfg.dof.expect("validated") / 2.0,
        _ => 1000.0,
    }
}

fn expected_class(alpha: f64, alpha_star: Option<f64>) -> Option<Class> {
    if let Some(star) = alpha_star {
        if alpha < star {
            return Some(Class::Stable);
        }
    }
    if alpha > 0.5 {
        return Some(Class::Growing);
    }
    None
}

pub fn run(cfg: &Config) -> anyhow::Result<ReportBody> {
    let mut body = ReportBody::new(cfg);
    let alphas = cfg.alpha_schedule.clone();
    let n_count = cfg.n_schedule.len();
    let a_count = alphas.len();

    let rows = run_replicas(cfg.replicas, |replica| {
        let mut row = Vec::with_capacity(n_count * a_count);
        replica_walks(cfg, replica, |_, _, walk| {
            for eval in holder_norms_multi(&walk, &alphas, cfg.holder_refinement)? {
                row.push(eval.value);
            }
            Ok(())
        })?;
        Ok(row)
    })?;
    let cells = split_cells(rows, n_count * a_count);

    if cfg.dump_paths {
        dump_replica_walks(cfg)?;
    }

    if n_count < 2 {
        body.flags.push(
            "a single n cannot separate stable from growing quantiles; only the \
             quantile table is reported"
                .to_string(),
        );
    }

    let summary = tightness_exponents(effective_moment_order(cfg), cfg.depth)?;
    let alpha_star = summary.alpha_star;
    let ln_n: Vec<f64> = cfg.n_schedule.iter().map(|&n| (n as f64).ln()).collect();

    let mut quantile_table = Table::new(
        "holder_quantiles",
        &["alpha", "n", "quantile", "quantile_se", "replicas"],
    );
    let mut class_table = Table::new(
        "holder_classification",
        &["alpha", "class", "max_rel_dev", "band", "slope", "slope_se", "expected"],
    );

    let mut stable_alphas = Vec::new();
    let mut growing_alphas = Vec::new();
    for (a_idx, &alpha) in alphas.iter().enumerate() {
        let mut points = Vec::with_capacity(n_count);
        for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
            let cell = &cells[n_idx * a_count + a_idx];
            let (point, se) = quantile_with_section_se(cell, cfg.quantile);
            points.push(point);
            quantile_table.push(vec![alpha, n as f64, point, se, cfg.replicas as f64]);
        }
        if n_count < 2 {
            continue;
        }
        let (class, max_rel_dev, fit) = classify(&points, &ln_n, cfg.stat_tolerance_se);
        match class {
            Class::Stable => stable_alphas.push(alpha),
            Class::Growing => growing_alphas.push(alpha),
            Class::Inconclusive => {}
        }
        let expected = expected_class(alpha, alpha_star);
        class_table.push(vec![
            alpha,
            class.code(),
            max_rel_dev,
            STABILITY_BAND,
            fit.slope,
            fit.stderr,
            expected.map_or(-1.0, Class::code),
        ]);
        body.slopes.push(SlopeRecord {
            name: format!("quantile-growth[a{alpha}]"),
            slope: fit.slope,
            stderr: fit.stderr,
            ci95_half_width: fit.ci95_half_width,
            target: None,
        });
        if let Some(expected) = expected {
            body.verdicts.push(Verdict::from_margin(
                &format!("class[a{alpha}]"),
                if class == expected { 0.0 } else { 1.0 },
                0.0,
                format!(
                    "alpha = {alpha} classified {} (max deviation from the schedule \
                     median {:.1}% against the {:.0}% band, slope {:.4} at SE {:.4}); \
                     the moment assumptions predict {}",
                    class.name(),
                    100.0 * max_rel_dev,
                    100.0 * STABILITY_BAND,
                    fit.slope,
                    fit.stderr,
                    expected.name()
                ),
            ));
        }
    }
    body.tables.push(quantile_table);
    body.tables.push(class_table);

    if let Some(&max_stable) = stable_alphas.last() {
        body.verdicts.push(Verdict::from_margin(
            "stable-below-half",
            max_stable,
            0.5,
            format!(
                "no alpha above 1/2 may look stable; largest stable alpha is {max_stable}"
            ),
        ));
    }
    if let (Some(&min_growing), Some(star)) = (growing_alphas.first(), alpha_star) {
        body.verdicts.push(Verdict::from_margin(
            "growing-above-alpha-star",
            star - min_growing,
            0.0,
            format!(
                "no alpha below the critical exponent {star} may grow; smallest \
                 growing alpha is {min_growing}"
            ),
        ));
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ExperimentKind, Overrides, RawConfig};

    #[test]
    fn classifier_reads_flat_and_growing_series() {
        let ln_n: Vec<f64> = [64.0_f64, 256.0, 1024.0].iter().map(|n| n.ln()).collect();
        let (class, dev, _) = classify(&[1.0, 1.04, 0.98], &ln_n, 3.0);
        assert_eq!(class, Class::Stable);
        assert!(dev < 0.06);
        let (class, _, fit) = classify(&[1.0, 2.1, 4.2], &ln_n, 3.0);
        assert_eq!(class, Class::Growing);
        assert!(fit.slope > 0.4);
    }

    #[test]
    fn expectations_follow_the_exponent_summary() {
        assert_eq!(expected_class(0.3, Some(0.375)), Some(Class::Stable));
        assert_eq!(expected_class(0.45, Some(0.375)), None);
        assert_eq!(expected_class(0.75, Some(0.375)), Some(Class::Growing));
        assert_eq!(expected_class(0.45, None), None);
        assert_eq!(expected_class(0.6, None), Some(Class::Growing));
    }

    #[test]
    fn small_gaussian_run_separates_the_two_regimes() {
        let cfg = resolve(
            ExperimentKind::HolderThreshold,
            Some(RawConfig {
                replicas: Some(400),
                n_schedule: Some(vec![32, 64, 128, 256, 512]),
                alpha_schedule: Some(vec![0.35, 0.8]),
                seed: Some(61),
                ..RawConfig::default()
            }),
            Overrides::default(),
        )
        .unwrap();
        let body = run(&cfg).unwrap();
        assert!(body.passed(), "failed: {:?}", body
            .verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| (&v.name, &v.detail))
            .collect::<Vec<_>>());
        let classes = body.tables.iter().find(|t| t.name == "holder_classification").unwrap();
        assert_eq!(classes.rows[0][1], Class::Stable.code());
        assert_eq!(classes.rows[1][1], Class::Growing.code());
    }
}
