//! Library half of the experiment driver: everything the binary does is
//! callable in-process, which is how the test suite exercises determinism
//! and the statistical criteria without shelling out.

pub mod config;
pub mod experiments;
pub mod oracle;
pub mod pathfile;
pub mod report;
pub mod stats;

pub use config::{Config, ConfigError, ExperimentKind};
pub use report::{Report, ReportBody};

/// Runs one experiment end to end on a resolved config and stamps the
/// wall-clock split apart from the deterministic body.
pub fn run_experiment(config: &Config) -> anyhow::Result<Report> {
    let started = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()?;
    let body = pool.install(|| experiments::dispatch(config))?;
    Ok(Report {
        body,
        timing: report::Timing {
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            threads: config.threads,
        },
    })
}
