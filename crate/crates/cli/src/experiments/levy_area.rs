//! Law of the planar walk's antisymmetric level-2 coordinate against a
//! fine-mesh Brownian reference: characteristic function on a frequency
//! grid, plus first and second moments, all with combined standard errors.

use roughwalk_core::walk::replica_rng;

use crate::config::Config;
use crate::experiments::{
    dump_replica_walks, replica_walks, run_replicas, split_cells, standardized_or_flag, zscore,
};
use crate::oracle::{brownian_area_replica, ORACLE_STREAM_OFFSET};
use crate::report::{ReportBody, Table, Verdict};
use crate::stats::{combined_se, ecf, mean_with_batch_se};

pub fn run(cfg: &Config) -> anyhow::Result<ReportBody> {
    let mut body = ReportBody::new(cfg);
    let n_count = cfg.n_schedule.len();

    let rows = run_replicas(cfg.replicas, |replica| {
        let mut row = Vec::with_capacity(n_count);
        replica_walks(cfg, replica, |_, _, walk| {
            row.push(walk.signature().log().bracket_coordinate(0, 1)?);
            Ok(())
        })?;
        Ok(row)
    })?;
    let cells = split_cells(rows, n_count);

    if cfg.dump_paths {
        dump_replica_walks(cfg)?;
    }

    let mesh = cfg.oracle_mesh;
    let oracle: Vec<f64> = {
        use rayon::prelude::*;
        (0..cfg.oracle_replicas)
            .into_par_iter()
            .map_init(Vec::new, |buf, idx| {
                let mut rng = replica_rng(cfg.seed, ORACLE_STREAM_OFFSET + idx);
                brownian_area_replica(&mut rng, mesh, buf)
            })
            .collect()
    };

    let hypothesis = standardized_or_flag(cfg, &mut body);
    let tol = cfg.stat_tolerance_se;
    let last = n_count - 1;

    let mut ecf_table = Table::new(
        "area_ecf",
        &[
            "n",
            "lambda",
            "walk_real",
            "walk_real_se",
            "walk_imag",
            "walk_imag_se",
            "oracle_real",
            "oracle_real_se",
            "oracle_imag",
            "oracle_imag_se",
            "replicas",
            "oracle_replicas",
        ],
    );
    for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
        for &lambda in &cfg.lambda_grid {
            let w = ecf(&cells[n_idx], lambda);
            let o = ecf(&oracle, lambda);
            ecf_table.push(vec![
                n as f64,
                lambda,
                w.real,
                w.real_se,
                w.imag,
                w.imag_se,
                o.real,
                o.real_se,
                o.imag,
                o.imag_se,
                cfg.replicas as f64,
                cfg.oracle_replicas as f64,
            ]);
            if hypothesis && n_idx == last {
                body.verdicts.push(Verdict::from_margin(
                    &format!("ecf-real[l{lambda}]"),
                    zscore(w.real - o.real, combined_se(w.real_se, o.real_se)),
                    tol,
                    format!(
                        "real part of the area transform at frequency {lambda}, walk n = {n} \
                         vs Brownian polyline at mesh {mesh}"
                    ),
                ));
                body.verdicts.push(Verdict::from_margin(
                    &format!("ecf-imag[l{lambda}]"),
                    zscore(w.imag - o.imag, combined_se(w.imag_se, o.imag_se)),
                    tol,
                    format!(
                        "imaginary part of the area transform at frequency {lambda}; both \
                         laws are symmetric, so this also checks the sign symmetry"
                    ),
                ));
            }
        }
    }
    body.tables.push(ecf_table);

    let mut moments = Table::new(
        "area_moments",
        &[
            "n",
            "walk_mean",
            "walk_mean_se",
            "walk_second",
            "walk_second_se",
            "oracle_mean",
            "oracle_mean_se",
            "oracle_second",
            "oracle_second_se",
            "replicas",
            "oracle_replicas",
        ],
    );
    let squares = |xs: &[f64]| xs.iter().map(|a| a * a).collect::<Vec<f64>>();
    let (o_mean, o_mean_se) = mean_with_batch_se(&oracle);
    let (o_second, o_second_se) = mean_with_batch_se(&squares(&oracle));
    for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
        let (w_mean, w_mean_se) = mean_with_batch_se(&cells[n_idx]);
        let (w_second, w_second_se) = mean_with_batch_se(&squares(&cells[n_idx]));
        moments.push(vec![
            n as f64,
            w_mean,
            w_mean_se,
            w_second,
            w_second_se,
            o_mean,
            o_mean_se,
            o_second,
            o_second_se,
            cfg.replicas as f64,
            cfg.oracle_replicas as f64,
        ]);
        if hypothesis && n_idx == last {
            body.verdicts.push(Verdict::from_margin(
                "mean-zero",
                zscore(w_mean, w_mean_se),
                tol,
                format!("area of the walk at n = {n} has mean zero by symmetry"),
            ));
            body.verdicts.push(Verdict::from_margin(
                "second-moment",
                zscore(w_second - o_second, combined_se(w_second_se, o_second_se)),
                tol,
                format!(
                    "second moment of the area at n = {n} vs the Brownian polyline \
                     (whose exact limit value is 1/4)"
                ),
            ));
        }
    }
    body.tables.push(moments);
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ExperimentKind, Overrides, RawConfig};

    fn small(replicas: u64, oracle_replicas: u64, n: u64, seed: u64) -> Config {
        resolve(
            ExperimentKind::LevyArea,
            Some(RawConfig {
                replicas: Some(replicas),
                oracle_replicas: Some(oracle_replicas),
                oracle_mesh: Some(256),
                n_schedule: Some(vec![n]),
                lambda_grid: Some(vec![0.0, 1.0]),
                seed: Some(seed),
                ..RawConfig::default()
            }),
            Overrides::default(),
        )
        .unwrap()
    }

    #[test]
    fn modest_run_matches_the_oracle() {
        let body = run(&small(1200, 3000, 256, 21)).unwrap();
        assert!(body.passed(), "failed: {:?}", body
            .verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| (&v.name, v.observed, v.tolerance))
            .collect::<Vec<_>>());
    }

    #[test]
    fn lambda_zero_is_exact_for_both_sides() {
        let body = run(&small(100, 100, 32, 3)).unwrap();
        let table = body.tables.iter().find(|t| t.name == "area_ecf").unwrap();
        let row0 = table.rows.iter().find(|r| r[1] == 0.0).unwrap();
        assert_eq!(row0[2], 1.0);
        assert_eq!(row0[6], 1.0);
        let v = body.verdicts.iter().find(|v| v.name == "ecf-real[l0]").unwrap();
        assert_eq!(v.observed, 0.0);
        assert!(v.passed);
    }
}
