//! Differential equations driven by lifted walks against their Stratonovich
//! limits: the walk solutions' smoothed endpoint statistics must approach
//! the averaged-slope reference driven by fine-mesh Brownian paths.

use anyhow::Context as _;
use rayon::prelude::*;

use roughwalk_core::rde::{rde_solve_step2, VectorFieldSet};
use roughwalk_core::walk::replica_rng;

use crate::config::{Config, FieldSetKind};
use crate::experiments::{
    dump_replica_walks, replica_walks, run_replicas, split_cells, standardized_or_flag, zscore,
};
use crate::oracle::{stratonovich_endpoint_replica, uniform_times, ORACLE_STREAM_OFFSET};
use crate::report::{ReportBody, Table, Verdict};
use crate::stats::{combined_se, mean_with_batch_se};

pub fn build_fields(cfg: &Config) -> anyhow::Result<VectorFieldSet> {
    let fields = match cfg.field_set {
        FieldSetKind::PlanarRotation => VectorFieldSet::planar_rotation_pair(),
        FieldSetKind::ScalarLinear => VectorFieldSet::linear(1, vec![vec![1.0]]),
        FieldSetKind::Tanh => VectorFieldSet::tanh_fields(cfg.dim, cfg.dim, 1.0),
    }?;
    Ok(fields)
}

pub fn initial_state(cfg: &Config, fields: &VectorFieldSet) -> Vec<f64> {
    cfg.y0.clone().unwrap_or_else(|| match cfg.field_set {
        FieldSetKind::PlanarRotation => vec![1.0, 0.0],
        FieldSetKind::ScalarLinear => vec![1.0],
        // tanh fields vanish at the origin, so start the state off it
        FieldSetKind::Tanh => vec![0.25; fields.state_dim()],
    })
}

pub fn run(cfg: &Config) -> anyhow::Result<ReportBody> {
    let mut body = ReportBody::new(cfg);
    let fields = build_fields(cfg)?;
    let y0 = initial_state(cfg, &fields);
    let e = fields.state_dim();
    let n_count = cfg.n_schedule.len();

    let rows = run_replicas(cfg.replicas, |replica| {
        let mut row = Vec::with_capacity(n_count * e);
        replica_walks(cfg, replica, |_, n, walk| {
            let solution = rde_solve_step2(&walk, &fields, &y0, cfg.substeps)
                .with_context(|| format!("solving at n = {n}, replica {replica}"))?;
            row.extend(solution.end().iter().map(|y| y.tanh()));
            Ok(())
        })?;
        Ok(row)
    })?;
    let cells = split_cells(rows, n_count * e);

    if cfg.dump_paths {
        dump_replica_walks(cfg)?;
    }

    let times = uniform_times(cfg.oracle_mesh);
    let oracle_rows: Vec<Vec<f64>> = (0..cfg.oracle_replicas)
        .into_par_iter()
        .map_init(Vec::new, |buf, idx| {
            let mut rng = replica_rng(cfg.seed, ORACLE_STREAM_OFFSET + idx);
            let end = stratonovich_endpoint_replica(&mut rng, &fields, &times, &y0, buf)
                .with_context(|| format!("reference solve, replica {idx}"))?;
            Ok(end.iter().map(|y| y.tanh()).collect::<Vec<f64>>())
        })
        .collect::<anyhow::Result<_>>()?;
    let oracle_cells = split_cells(oracle_rows, e);

    let hypothesis = standardized_or_flag(cfg, &mut body);
    let tol = cfg.stat_tolerance_se;
    let last = n_count - 1;

    let mut table = Table::new(
        "sigmoid_endpoint",
        &[
            "n",
            "coordinate",
            "walk_mean",
            "walk_se",
            "oracle_mean",
            "oracle_se",
            "gap",
            "replicas",
            "oracle_replicas",
        ],
    );
    let mut gaps = vec![vec![0.0; e]; n_count];
    let mut walk_ses = vec![vec![0.0; e]; n_count];
    for (n_idx, &n) in cfg.n_schedule.iter().enumerate() {
        for coord in 0..e {
            let (w, w_se) = mean_with_batch_se(&cells[n_idx * e + coord]);
            let (o, o_se) = mean_with_batch_se(&oracle_cells[coord]);
            gaps[n_idx][coord] = (w - o).abs();
            walk_ses[n_idx][coord] = w_se;
            table.push(vec![
                n as f64,
                coord as f64,
                w,
                w_se,
                o,
                o_se,
                gaps[n_idx][coord],
                cfg.replicas as f64,
                cfg.oracle_replicas as f64,
            ]);
            if hypothesis && n_idx == last {
                let (_, o_se) = mean_with_batch_se(&oracle_cells[coord]);
                body.verdicts.push(Verdict::from_margin(
                    &format!("gap[k{coord}]"),
                    zscore(gaps[n_idx][coord], combined_se(w_se, o_se)),
                    tol,
                    format!(
                        "mean tanh of solution coordinate {coord} at n = {n} vs the \
                         averaged-slope reference at mesh {}",
                        cfg.oracle_mesh
                    ),
                ));
            }
        }
    }
    if hypothesis && n_count >= 2 {
        for coord in 0..e {
            let widen = combined_se(walk_ses[0][coord], walk_ses[last][coord]);
            body.verdicts.push(Verdict::from_margin(
                &format!("gap-nonincreasing[k{coord}]"),
                gaps[last][coord] - gaps[0][coord],
                tol * widen,
                format!(
                    "the reference gap of coordinate {coord} must not grow from \
                     n = {} to n = {} beyond sampling noise",
                    cfg.n_schedule[0], cfg.n_schedule[last]
                ),
            ));
        }
    }
    body.tables.push(table);
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ExperimentKind, Overrides, RawConfig};

    fn cfg(raw: RawConfig) -> Config {
        resolve(ExperimentKind::WongZakai, Some(raw), Overrides::default()).unwrap()
    }

    #[test]
    fn planar_pair_converges_to_the_reference() {
        let body = run(&cfg(RawConfig {
            replicas: Some(600),
            oracle_replicas: Some(2500),
            oracle_mesh: Some(512),
            n_schedule: Some(vec![16, 256]),
            seed: Some(33),
            ..RawConfig::default()
        }))
        .unwrap();
        assert!(body.passed(), "failed: {:?}", body
            .verdicts
            .iter()
            .filter(|v| !v.passed)
            .map(|v| (&v.name, v.observed, v.tolerance))
            .collect::<Vec<_>>());
        assert_eq!(body.verdicts.iter().filter(|v| v.name.starts_with("gap[")).count(), 2);
    }

    #[test]
    fn tanh_fields_default_away_from_the_fixed_point() {
        let cfg = cfg(RawConfig {
            field_set: Some(FieldSetKind::Tanh),
            dim: Some(2),
            replicas: Some(50),
            oracle_replicas: Some(50),
            oracle_mesh: Some(64),
            n_schedule: Some(vec![32]),
            ..RawConfig::default()
        });
        let fields = build_fields(&cfg).unwrap();
        assert_eq!(initial_state(&cfg, &fields), vec![0.25, 0.25]);
        let body = run(&cfg).unwrap();
        let table = &body.tables[0];
        // the state must have moved: means differ from tanh(0.25) noticeably
        assert!(table.rows.iter().any(|r| (r[2] - 0.25f64.tanh()).abs() > 1e-3));
    }

    #[test]
    fn scalar_linear_needs_dim_one() {
        assert!(resolve(
            ExperimentKind::WongZakai,
            Some(RawConfig {
                field_set: Some(FieldSetKind::ScalarLinear),
                ..RawConfig::default()
            }),
            Overrides::default(),
        )
        .is_err());
        let ok = cfg(RawConfig {
            field_set: Some(FieldSetKind::ScalarLinear),
            dim: Some(1),
            replicas: Some(40),
            oracle_replicas: Some(40),
            oracle_mesh: Some(64),
            n_schedule: Some(vec![64]),
            ..RawConfig::default()
        });
        let body = run(&ok).unwrap();
        assert_eq!(body.tables[0].rows.len(), 1);
    }
}
