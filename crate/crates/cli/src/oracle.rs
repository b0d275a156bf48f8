//! Reference laws for the comparisons: fine-mesh Brownian polylines, their
//! exact signed areas, and Stratonovich endpoints driven by them. Oracle
//! replicas draw from rng streams disjoint from the walk replicas.

use rand::Rng;

use roughwalk_core::rde::{stratonovich_heun, RdeError, VectorFieldSet};
use roughwalk_core::walk::{IncrementDistribution, IncrementKind};

/// How far oracle rng streams sit above walk replica streams; keeps the two
/// families disjoint for any realistic replica count.
pub const ORACLE_STREAM_OFFSET: u64 = 1 << 40;

/// Uniform grid 0, 1/mesh, ..., 1.
pub fn uniform_times(mesh: u64) -> Vec<f64> {
    (0..=mesh).map(|k| k as f64 / mesh as f64).collect()
}

/// Fills `out` (rows of `dim` coordinates, `mesh + 1` rows) with a Brownian
/// polyline on [0, 1] started at the origin: each increment is a standard
/// normal vector scaled by 1/sqrt(mesh).
pub fn sample_brownian_into<R: Rng>(rng: &mut R, dim: usize, mesh: u64, out: &mut [f64]) {
    assert_eq!(out.len(), (mesh as usize + 1) * dim, "buffer shape");
    let gaussian =
        IncrementDistribution::standardized(IncrementKind::Gaussian, dim).expect("gaussian law");
    let step_sd = 1.0 / (mesh as f64).sqrt();
    let mut z = vec![0.0; dim];
    out[..dim].fill(0.0);
    for row in 1..=mesh as usize {
        gaussian.sample_increment(rng, &mut z);
        for c in 0..dim {
            out[row * dim + c] = out[(row - 1) * dim + c] + step_sd * z[c];
        }
    }
}

/// Exact signed area swept by a planar polyline from the origin: the
/// antisymmetric level-2 coordinate of its chordal lift, computed in closed
/// form as 1/2 sum_k (x_k dy_k - y_k dx_k).
pub fn polyline_area(samples: &[f64]) -> f64 {
    assert!(samples.len() % 2 == 0, "planar samples come in pairs");
    let rows = samples.len() / 2;
    let mut area = 0.0;
    for k in 0..rows.saturating_sub(1) {
        let (x, y) = (samples[2 * k], samples[2 * k + 1]);
        let dx = samples[2 * (k + 1)] - x;
        let dy = samples[2 * (k + 1) + 1] - y;
        area += 0.5 * (x * dy - y * dx);
    }
    area
}

/// One Brownian replica of the signed area at the given mesh.
pub fn brownian_area_replica<R: Rng>(rng: &mut R, mesh: u64, buf: &mut Vec<f64>) -> f64 {
    buf.resize((mesh as usize + 1) * 2, 0.0);
    sample_brownian_into(rng, 2, mesh, buf);
    polyline_area(buf)
}

/// One Stratonovich endpoint replica: Brownian polyline at the given mesh
/// fed through the averaged-slope (Heun) scheme.
pub fn stratonovich_endpoint_replica<R: Rng>(
    rng: &mut R,
    fields: &VectorFieldSet,
    times: &[f64],
    y0: &[f64],
    buf: &mut Vec<f64>,
) -> Result<Vec<f64>, RdeError> {
    let dim = fields.driver_dim();
    let mesh = (times.len() - 1) as u64;
    buf.resize(times.len() * dim, 0.0);
    sample_brownian_into(rng, dim, mesh, buf);
    Ok(stratonovich_heun(fields, times, buf, y0)?.end().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use roughwalk_core::walk::replica_rng;
    use roughwalk_core::LiftedPath;

    #[test]
    fn unit_square_loop_sweeps_unit_area() {
        let square = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        assert!((polyline_area(&square) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polyline_area_matches_the_lifted_bracket_coordinate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mesh = 64u64;
        let times = uniform_times(mesh);
        let mut buf = vec![0.0; (mesh as usize + 1) * 2];
        for _ in 0..5 {
            sample_brownian_into(&mut rng, 2, mesh, &mut buf);
            let closed_form = polyline_area(&buf);
            let lifted = LiftedPath::lift_linear_chords_at(2, 2, &times, &buf).unwrap();
            let bracket = lifted.signature().log().bracket_coordinate(0, 1).unwrap();
            assert!(
                (closed_form - bracket).abs() < 1e-12,
                "{closed_form} vs {bracket}"
            );
        }
    }

    #[test]
    fn brownian_samples_have_sqrt_time_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mesh = 256u64;
        let mut buf = vec![0.0; (mesh as usize + 1) * 2];
        let reps = 2000;
        let mut sum_sq = 0.0;
        for _ in 0..reps {
            sample_brownian_into(&mut rng, 2, mesh, &mut buf);
            let (x, y) = (buf[buf.len() - 2], buf[buf.len() - 1]);
            sum_sq += x * x + y * y;
        }
        // E[|B_1|^2] = 2 in the plane; SE of the average is ~ 2/sqrt(reps).
        let avg = sum_sq / reps as f64;
        assert!((avg - 2.0).abs() < 0.15, "avg {avg}");
    }

    #[test]
    fn area_second_moment_matches_the_sech_law() {
        // E[e^{i l A}] = sech(l/2) = 1 - l^2/8 + ..., so E[A^2] = 1/4.
        let mut rng = replica_rng(99, ORACLE_STREAM_OFFSET);
        let mesh = 512u64;
        let mut buf = Vec::new();
        let reps = 4000;
        let mut sum_sq = 0.0;
        for _ in 0..reps {
            let a = brownian_area_replica(&mut rng, mesh, &mut buf);
            sum_sq += a * a;
        }
        let second = sum_sq / reps as f64;
        assert!((second - 0.25).abs() < 0.05, "E[A^2] {second}");
    }

    #[test]
    fn stratonovich_endpoints_stay_finite_and_feel_noise() {
        let fields = VectorFieldSet::planar_rotation_pair().unwrap();
        let times = uniform_times(128);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut buf = Vec::new();
        let a = stratonovich_endpoint_replica(&mut rng, &fields, &times, &[1.0, 0.0], &mut buf)
            .unwrap();
        let b = stratonovich_endpoint_replica(&mut rng, &fields, &times, &[1.0, 0.0], &mut buf)
            .unwrap();
        assert!(a.iter().all(|v| v.is_finite()));
        assert_ne!(a, b);
    }
}
