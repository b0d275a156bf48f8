//! The seven experiment drivers. Each takes a resolved config and returns a
//! deterministic report body; shared plumbing (replica fan-out, walk
//! sampling, z-scores, walk dumps) lives here.

use std::path::PathBuf;

use anyhow::Context as _;
use rayon::prelude::*;

use roughwalk_core::walk::{replica_rng, sample_walk, WalkSpec};
use roughwalk_core::LiftedPath;

use crate::config::Config;
use crate::report::ReportBody;

pub mod fdd_clt;
pub mod holder_threshold;
pub mod levy_area;
pub mod moment_scaling;
pub mod stochastic_integral;
pub mod symbolic_audit;
pub mod wong_zakai;

pub fn dispatch(cfg: &Config) -> anyhow::Result<ReportBody> {
    use crate::config::ExperimentKind::*;
    match cfg.experiment {
        FddClt => fdd_clt::run(cfg),
        LevyArea => levy_area::run(cfg),
        MomentScaling => moment_scaling::run(cfg),
        HolderThreshold => holder_threshold::run(cfg),
        WongZakai => wong_zakai::run(cfg),
        StochasticIntegral => stochastic_integral::run(cfg),
        SymbolicAudit => symbolic_audit::run(cfg),
    }
}

/// Maps `f` over replica indices on the installed thread pool. Results come
/// back ordered by replica index, so reductions over the returned vector are
/// independent of the thread count.
pub fn run_replicas<T, F>(replicas: u64, f: F) -> anyhow::Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> anyhow::Result<T> + Send + Sync,
{
    (0..replicas).into_par_iter().map(f).collect()
}

/// Distance over noise: 0 for an exact match even when the noise estimate is
/// zero, +inf when a genuine difference meets a zero standard error.
pub fn zscore(diff: f64, se: f64) -> f64 {
    let diff = diff.abs();
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff / se
    }
}

/// Walks for one replica, one per schedule entry, drawn sequentially from
/// the replica's own rng stream. Every consumer of walk replicas goes
/// through here so that replica 0's walks in a report match the files a
/// `dump_paths` run writes.
pub fn replica_walks(
    cfg: &Config,
    replica: u64,
    mut visit: impl FnMut(usize, u64, LiftedPath) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    let mut rng = replica_rng(cfg.seed, replica);
    let distribution = cfg.increment_distribution();
    for (idx, &n) in cfg.n_schedule.iter().enumerate() {
        let spec = WalkSpec {
            n: n as usize,
            depth: cfg.depth,
            distribution: distribution.clone(),
            interpolation: cfg.interpolation.to_core(),
        };
        let walk = sample_walk(&spec, &mut rng)
            .with_context(|| format!("sampling walk n = {n}, replica {replica}"))?;
        visit(idx, n, walk)?;
    }
    Ok(())
}

/// Writes replica 0's walk for every schedule entry into
/// `<out_dir>/paths/`, in the columnar text format.
pub fn dump_replica_walks(cfg: &Config) -> anyhow::Result<Vec<PathBuf>> {
    let dir = PathBuf::from(&cfg.out_dir).join("paths");
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    replica_walks(cfg, 0, |_, n, walk| {
        let file = dir.join(format!("walk-n{n}.path"));
        crate::pathfile::write(&walk, &file)
            .with_context(|| format!("writing {}", file.display()))?;
        written.push(file);
        Ok(())
    })?;
    Ok(written)
}

/// Columns of per-replica scalars, one column per schedule cell: the value
/// for cell `c` of replica `r` lands in `out[c][r]`.
pub fn split_cells(replica_major: Vec<Vec<f64>>, cells: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(replica_major.len()); cells];
    for row in replica_major {
        assert_eq!(row.len(), cells, "ragged replica row");
        for (c, v) in row.into_iter().enumerate() {
            out[c].push(v);
        }
    }
    out
}

/// Standardization flag shared by the comparison experiments: when the
/// increments are not centered to unit variance the Brownian references do
/// not apply, so verdicts are skipped and the report says why.
pub fn standardized_or_flag(cfg: &Config, body: &mut ReportBody) -> bool {
    if cfg.increment_distribution().is_normalized() {
        true
    } else {
        body.flags.push(
            "increments are not standardized; Brownian references do not apply, \
             so no verdicts were emitted"
                .to_string(),
        );
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, ExperimentKind, Overrides, RawConfig};

    #[test]
    fn zscore_edge_cases() {
        assert_eq!(zscore(0.0, 0.0), 0.0);
        assert_eq!(zscore(0.1, 0.0), f64::INFINITY);
        assert!((zscore(-0.3, 0.1) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn split_cells_transposes() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]];
        let cols = split_cells(rows, 2);
        assert_eq!(cols[0], vec![1.0, 3.0, 5.0]);
        assert_eq!(cols[1], vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn replica_walks_are_reproducible_and_distinct() {
        let cfg = resolve(
            ExperimentKind::FddClt,
            Some(RawConfig {
                n_schedule: Some(vec![8, 16]),
                ..RawConfig::default()
            }),
            Overrides::default(),
        )
        .unwrap();
        let ends = |replica| {
            let mut out = Vec::new();
            replica_walks(&cfg, replica, |_, _, walk| {
                out.push(walk.signature().project(1).unwrap()[0]);
                Ok(())
            })
            .unwrap();
            out
        };
        assert_eq!(ends(0), ends(0));
        assert_ne!(ends(0), ends(1));
    }

    #[test]
    fn run_replicas_orders_results_by_index() {
        let out = run_replicas(100, |r| Ok(r as f64)).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[99], 99.0);
    }
}
