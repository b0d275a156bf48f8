//! Endpoint laws of the rescaled walk along the schedule: each coordinate
//! of the time-1 endpoint should approach a standard normal, and in the
//! plane the antisymmetric level-2 coordinate should approach the law with
//! characteristic function sech(l/2).

use crate::config::{Config, DistributionKind};
use crate::experiments::{
    dump_replica_walks, replica_walks, run_replicas, split_cells, standardized_or_flag, zscore,
};
use crate::report::{ReportBody, Table, Verdict};
use crate::stats::{ecf, ks_critical_1pct, ks_statistic_standard_normal, KS_NULL_SD};

pub fn run(cfg: &Config) -> anyhow::Result<ReportBody> {
    let mut body = ReportBody::new(cfg);
    let d = cfg.dim;
    let with_area = d >= 2 && cfg.depth >= 2;
    let cells_per_n = d + usize::from(with_area);
    let n_count = cfg.n_schedule.len();

    let rows = run_replicas(cfg.replicas, |replica| {
        let mut row = Vec::with_capacity(n_count * cells_per_n);
        replica_walks(cfg, replica, |_, _, walk| {
            let log = walk.signature().log();
            row.extend_from_slice(log.level(1)?);
            if with_area {
                row.push(log.bracket_coordinate(0, 1)?);
            }
            Ok(())
        })?;
        Ok(row)
    })?;
    let cells = split_cells(rows, n_count * cells_per_n);
    let coord_cell = |n_idx: usize, coord: usize| &cells[n_idx * cells_per_n + coord];
    let area_cell = |n_idx: usize| &cells[n_idx * cells_per_n + d];

    if cfg.dump_paths {
        dump_replica_walks(cfg)?;
    }

    let hypothesis = standardized_or_flag(cfg, &mut body);
    let tol = cfg.stat_tolerance_se;
    let critical = ks_critical_1pct(cfg.replicas);
    let last = n_count - 1;

    // KS distance to the standard normal, per coordinate and schedule point.
    let mut ks_table = Table::new(
        "endpoint_ks",
        &["n", "coordinate", "ks", "scaled_ks", "critical_1pct", "replicas"],
    );
    let mut scaled = vec![vec![0.0; d]; n_count];
    for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
        for coord in 0..d {
            let ks = ks_statistic_standard_normal(coord_cell(n_idx, coord));
            scaled[n_idx][coord] = ks * (cfg.replicas as f64).sqrt();
            ks_table.push(vec![
                n as f64,
                coord as f64,
                ks,
                scaled[n_idx][coord],
                critical,
                cfg.replicas as f64,
            ]);
        }
    }

    if hypothesis {
        for coord in 0..d {
            let ks = scaled[last][coord] / (cfg.replicas as f64).sqrt();
            body.verdicts.push(Verdict::from_margin(
                &format!("ks-final[k{coord}]"),
                ks,
                critical,
                format!(
                    "KS distance of endpoint coordinate {coord} to the standard normal at \
                     n = {}, against the 1% critical value",
                    cfg.n_schedule[last]
                ),
            ));
            if n_count >= 2 {
                let drop = scaled[last][coord] - scaled[0][coord];
                body.verdicts.push(Verdict::from_margin(
                    &format!("ks-monotone[k{coord}]"),
                    drop,
                    tol * KS_NULL_SD * 2f64.sqrt(),
                    format!(
                        "sqrt(R) * KS must not grow along the schedule beyond null \
                         fluctuations (first n {}, last n {})",
                        cfg.n_schedule[0], cfg.n_schedule[last]
                    ),
                ));
            }
            if cfg.distribution == DistributionKind::Gaussian {
                for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
                    let ks = scaled[n_idx][coord] / (cfg.replicas as f64).sqrt();
                    body.verdicts.push(Verdict::from_margin(
                        &format!("ks-null[n{n},k{coord}]"),
                        ks,
                        critical,
                        "gaussian increments make every endpoint exactly standard normal, \
                         so the KS test must pass at each n"
                            .to_string(),
                    ));
                }
            }
        }
    }

    // Endpoint characteristic function at the last schedule point, against
    // the standard gaussian transform exp(-l^2/2).
    let mut ecf_table = Table::new(
        "endpoint_ecf",
        &["lambda", "coordinate", "real", "real_se", "imag", "imag_se", "reference", "replicas"],
    );
    for &lambda in &cfg.lambda_grid {
        let reference = (-lambda * lambda / 2.0).exp();
        for coord in 0..d {
            let pt = ecf(coord_cell(last, coord), lambda);
            ecf_table.push(vec![
                lambda,
                coord as f64,
                pt.real,
                pt.real_se,
                pt.imag,
                pt.imag_se,
                reference,
                cfg.replicas as f64,
            ]);
            if hypothesis {
                let z = zscore(pt.real - reference, pt.real_se)
                    .max(zscore(pt.imag, pt.imag_se));
                body.verdicts.push(Verdict::from_margin(
                    &format!("ecf[l{lambda},k{coord}]"),
                    z,
                    tol,
                    format!(
                        "endpoint transform at frequency {lambda}, coordinate {coord}, \
                         n = {}, vs exp(-l^2/2); worst z over real and imaginary parts",
                        cfg.n_schedule[last]
                    ),
                ));
            }
        }
    }
    body.tables.push(ks_table);
    body.tables.push(ecf_table);

    if with_area {
        let mut area_table = Table::new(
            "area_ecf",
            &["lambda", "real", "real_se", "imag", "imag_se", "reference", "replicas"],
        );
        for &lambda in &cfg.lambda_grid {
            let reference = 1.0 / (lambda / 2.0).cosh();
            let pt = ecf(area_cell(last), lambda);
            area_table.push(vec![
                lambda,
                pt.real,
                pt.real_se,
                pt.imag,
                pt.imag_se,
                reference,
                cfg.replicas as f64,
            ]);
            if hypothesis {
                let z = zscore(pt.real - reference, pt.real_se)
                    .max(zscore(pt.imag, pt.imag_se));
                body.verdicts.push(Verdict::from_margin(
                    &format!("area-ecf[l{lambda}]"),
                    z,
                    tol,
                    format!(
                        "level-2 antisymmetric coordinate transform at frequency {lambda}, \
                         n = {}, vs sech(l/2)",
                        cfg.n_schedule[last]
                    ),
                ));
            }
        }
        body.tables.push(area_table);
    }

    let final_sd = {
        let xs = coord_cell(last, 0);
        crate::stats::sample_variance(xs).sqrt()
    };
    if final_sd < 1e-6 {
        body.flags.push(format!(
            "endpoint coordinate 0 has standard deviation {final_sd:.2e} at the last n; \
             the increments look degenerate"
        ));
    }
    Ok(body)
}
