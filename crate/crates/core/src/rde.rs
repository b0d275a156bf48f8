//! Controlled ODEs driven by lifted paths, a Stratonovich reference scheme,
//! and exact integrals along piecewise-linear paths.
//!
//! The driver hands the solver exactly the data a depth-2 lift carries: over
//! each step [s, t] the state advances by
//!
//! ```text
//! y += sum_i V_i(y) x1_i  +  sum_{i,j} (DV_j V_i)(y) x2_{ij}
//! ```
//!
//! where x1 and x2 are the level-1 and level-2 blocks of the driver's
//! increment. Two drivers with the same endpoints but different level-2
//! blocks therefore steer the state differently whenever the fields fail to
//! commute, which is the whole point of carrying the lift.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::lift::{Interpolation, LiftError, LiftedPath};

#[derive(Debug, Clone, PartialEq)]
pub enum RdeError {
    /// Depth-1 drivers carry no area and are refused: below the step-2
    /// regime the increment scheme has no well-defined limit to follow.
    ShallowDriver { depth: usize },
    DriverMismatch { field_dim: usize, driver_dim: usize },
    BadStateDim { expected: usize, got: usize },
    BadSubsteps,
    BadShape(&'static str),
    /// An analytic derivative disagrees with its finite-difference check.
    JacobianMismatch { field: usize, row: usize, col: usize, analytic: f64, numeric: f64 },
    /// The state left the representable range at the given step.
    Diverged { step: usize, time: f64 },
    NeedsChordalPath,
    Lift(LiftError),
}

impl fmt::Display for RdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RdeError::ShallowDriver { depth } => {
                write!(f, "driver depth {depth} < 2: no level-2 data to integrate against")
            }
            RdeError::DriverMismatch { field_dim, driver_dim } => {
                write!(f, "fields expect a {field_dim}-dimensional driver, got {driver_dim}")
            }
            RdeError::BadStateDim { expected, got } => {
                write!(f, "initial state has dimension {got}, fields expect {expected}")
            }
            RdeError::BadSubsteps => write!(f, "substeps must be >= 1"),
            RdeError::BadShape(what) => write!(f, "{what}"),
            RdeError::JacobianMismatch { field, row, col, analytic, numeric } => write!(
                f,
                "field {field} jacobian entry ({row}, {col}): analytic {analytic} vs \
                 finite difference {numeric}"
            ),
            RdeError::Diverged { step, time } => {
                write!(f, "state diverged at step {step} (time {time})")
            }
            RdeError::NeedsChordalPath => {
                write!(f, "operation requires a chordal (piecewise-linear) lift")
            }
            RdeError::Lift(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RdeError {}

impl From<LiftError> for RdeError {
    fn from(e: LiftError) -> Self {
        RdeError::Lift(e)
    }
}

type FieldFn = Box<dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync>;

/// Checks analytic jacobians against central finite differences on a fixed
/// probe grid in [-1, 1]^domain.
fn validate_jacobians(
    count: usize,
    domain: usize,
    range: usize,
    value: &FieldFn,
    jacobian: &FieldFn,
) -> Result<(), RdeError> {
    const STEP: f64 = 1e-5;
    const TOLERANCE: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1e_2d3c);
    let mut probes: Vec<Vec<f64>> = vec![vec![0.0; domain]];
    for _ in 0..4 {
        let point = (0..domain)
            .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
            .collect();
        probes.push(point);
    }
    let mut plus = vec![0.0; range];
    let mut minus = vec![0.0; range];
    let mut analytic = vec![0.0; domain * range];
    for field in 0..count {
        for probe in &probes {
            jacobian(field, probe, &mut analytic);
            let mut shifted = probe.clone();
            for col in 0..domain {
                shifted[col] = probe[col] + STEP;
                value(field, &shifted, &mut plus);
                shifted[col] = probe[col] - STEP;
                value(field, &shifted, &mut minus);
                shifted[col] = probe[col];
                for row in 0..range {
                    let numeric = (plus[row] - minus[row]) / (2.0 * STEP);
                    let entry = analytic[row * domain + col];
                    let scale = fmath::abs(entry).max(fmath::abs(numeric)).max(1.0);
                    if fmath::abs(entry - numeric) > TOLERANCE * scale {
                        return Err(RdeError::JacobianMismatch {
                            field,
                            row,
                            col,
                            analytic: entry,
                            numeric,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Driving vector fields V_1..V_d on R^e with analytic first derivatives.
///
/// `value(i, y, out)` writes V_i(y) into `out` (length e); `jacobian(i, y,
/// out)` writes DV_i(y) row-major into `out` (length e*e, entry r*e + c
/// holding the derivative of component r by state coordinate c). Derivatives
/// are checked against finite differences at construction.
pub struct VectorFieldSet {
    state_dim: usize,
    driver_dim: usize,
    value: FieldFn,
    jacobian: FieldFn,
}

impl VectorFieldSet {
    pub fn new(
        state_dim: usize,
        driver_dim: usize,
        value: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self, RdeError> {
        if state_dim == 0 || driver_dim == 0 {
            return Err(RdeError::BadShape("state and driver dimensions must be >= 1"));
        }
        let value: FieldFn = Box::new(value);
        let jacobian: FieldFn = Box::new(jacobian);
        validate_jacobians(driver_dim, state_dim, state_dim, &value, &jacobian)?;
        Ok(VectorFieldSet { state_dim, driver_dim, value, jacobian })
    }

    /// Linear fields V_i(y) = A_i y from row-major e x e matrices.
    pub fn linear(state_dim: usize, matrices: Vec<Vec<f64>>) -> Result<Self, RdeError> {
        if matrices.is_empty() {
            return Err(RdeError::BadShape("need at least one matrix"));
        }
        if matrices.iter().any(|m| m.len() != state_dim * state_dim) {
            return Err(RdeError::BadShape("each matrix must be state_dim^2 entries"));
        }
        let driver_dim = matrices.len();
        let value_mats = matrices.clone();
        Self::new(
            state_dim,
            driver_dim,
            move |i, y, out| {
                let a = &value_mats[i];
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot = y
                        .iter()
                        .enumerate()
                        .map(|(c, yc)| a[r * y.len() + c] * yc)
                        .sum();
                }
            },
            move |i, _, out| out.copy_from_slice(&matrices[i]),
        )
    }

    /// Constant fields V_i(y) = c_i.
    pub fn constant(vectors: Vec<Vec<f64>>) -> Result<Self, RdeError> {
        let state_dim = vectors.first().map(Vec::len).unwrap_or(0);
        if state_dim == 0 || vectors.iter().any(|v| v.len() != state_dim) {
            return Err(RdeError::BadShape("constant fields need equal nonempty lengths"));
        }
        let driver_dim = vectors.len();
        Self::new(
            state_dim,
            driver_dim,
            move |i, _, out| out.copy_from_slice(&vectors[i]),
            move |_, _, out| out.fill(0.0),
        )
    }

    /// The standard noncommuting planar pair: a rotation generator and a
    /// stretch along the axes. Their commutator is nonzero, so solutions
    /// feel the driver's area.
    pub fn planar_rotation_pair() -> Result<Self, RdeError> {
        Self::linear(
            2,
            vec![vec![0.0, -1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0, -1.0]],
        )
    }

    /// Bounded smooth nonlinear fields (V_i(y))_r = amplitude *
    /// tanh(y_{(r + i) mod e}): all derivatives bounded.
    pub fn tanh_fields(
        state_dim: usize,
        driver_dim: usize,
        amplitude: f64,
    ) -> Result<Self, RdeError> {
        if !amplitude.is_finite() {
            return Err(RdeError::BadShape("amplitude must be finite"));
        }
        Self::new(
            state_dim,
            driver_dim,
            move |i, y, out| {
                let e = y.len();
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot = amplitude * fmath::tanh(y[(r + i) % e]);
                }
            },
            move |i, y, out| {
                let e = y.len();
                out.fill(0.0);
                for r in 0..e {
                    let src = (r + i) % e;
                    let t = fmath::tanh(y[src]);
                    out[r * e + src] = amplitude * (1.0 - t * t);
                }
            },
        )
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn driver_dim(&self) -> usize {
        self.driver_dim
    }

    pub fn value_into(&self, field: usize, y: &[f64], out: &mut [f64]) {
        (self.value)(field, y, out)
    }

    pub fn jacobian_into(&self, field: usize, y: &[f64], out: &mut [f64]) {
        (self.jacobian)(field, y, out)
    }
}

/// d scalar-argument integrands phi_i : R^d -> R^e with analytic jacobians
/// (e x d, row-major), finite-difference checked at construction.
pub struct IntegrandSet {
    driver_dim: usize,
    range_dim: usize,
    value: FieldFn,
}

impl IntegrandSet {
    pub fn new(
        driver_dim: usize,
        range_dim: usize,
        value: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: impl Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self, RdeError> {
        if driver_dim == 0 || range_dim == 0 {
            return Err(RdeError::BadShape("driver and range dimensions must be >= 1"));
        }
        let value: FieldFn = Box::new(value);
        let jacobian: FieldFn = Box::new(jacobian);
        validate_jacobians(driver_dim, driver_dim, range_dim, &value, &jacobian)?;
        Ok(IntegrandSet { driver_dim, range_dim, value })
    }

    pub fn driver_dim(&self) -> usize {
        self.driver_dim
    }

    pub fn range_dim(&self) -> usize {
        self.range_dim
    }
}

/// A time grid with one state vector per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl StatePath {
    pub fn end(&self) -> &[f64] {
        self.states.last().expect("state paths are never empty")
    }

    /// Largest componentwise deviation on the shared time grid.
    pub fn sup_distance(&self, other: &StatePath) -> Option<f64> {
        if self.times != other.times {
            return None;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.states.iter().zip(&other.states) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(fmath::abs(x - y));
            }
        }
        Some(worst)
    }
}

/// Solves dy = sum_i V_i(y) dx^i along a depth >= 2 lifted driver with the
/// level-2 increment scheme; `substeps` splits every driver mesh cell.
pub fn rde_solve_step2(
    driver: &LiftedPath,
    fields: &VectorFieldSet,
    y0: &[f64],
    substeps: usize,
) -> Result<StatePath, RdeError> {
    if driver.depth() < 2 {
        return Err(RdeError::ShallowDriver { depth: driver.depth() });
    }
    if driver.dim() != fields.driver_dim {
        return Err(RdeError::DriverMismatch {
            field_dim: fields.driver_dim,
            driver_dim: driver.dim(),
        });
    }
    if y0.len() != fields.state_dim {
        return Err(RdeError::BadStateDim { expected: fields.state_dim, got: y0.len() });
    }
    if substeps == 0 {
        return Err(RdeError::BadSubsteps);
    }
    let (e, d) = (fields.state_dim, fields.driver_dim);
    let grid = driver.times();
    let mut times = Vec::with_capacity((grid.len() - 1) * substeps + 1);
    times.push(grid[0]);
    for cell in grid.windows(2) {
        for s in 1..=substeps {
            let theta = s as f64 / substeps as f64;
            let t = if s == substeps { cell[1] } else { cell[0] + theta * (cell[1] - cell[0]) };
            times.push(t);
        }
    }

    let mut states = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    states.push(y.clone());
    let mut values = vec![0.0; d * e];
    let mut jacobians = vec![0.0; d * e * e];
    for (step, window) in times.windows(2).enumerate() {
        let increment = driver.increment(window[0], window[1])?;
        let x1 = increment.series().level(1).map_err(LiftError::from)?;
        let x2 = increment.series().level(2).map_err(LiftError::from)?;
        for i in 0..d {
            (fields.value)(i, &y, &mut values[i * e..(i + 1) * e]);
            (fields.jacobian)(i, &y, &mut jacobians[i * e * e..(i + 1) * e * e]);
        }
        let mut dy = vec![0.0; e];
        for i in 0..d {
            let coef = x1[i];
            if coef != 0.0 {
                for r in 0..e {
                    dy[r] += coef * values[i * e + r];
                }
            }
            for j in 0..d {
                let coef = x2[i * d + j];
                if coef == 0.0 {
                    continue;
                }
                // (DV_j V_i)(y): jacobian of field j applied to V_i(y)
                let jac = &jacobians[j * e * e..(j + 1) * e * e];
                let vi = &values[i * e..(i + 1) * e];
                for r in 0..e {
                    let mut directional = 0.0;
                    for c in 0..e {
                        directional += jac[r * e + c] * vi[c];
                    }
                    dy[r] += coef * directional;
                }
            }
        }
        for (slot, delta) in y.iter_mut().zip(&dy) {
            *slot += delta;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(RdeError::Diverged { step: step + 1, time: window[1] });
        }
        states.push(y.clone());
    }
    Ok(StatePath { times, states })
}

/// Heun (midpoint) scheme for the Stratonovich equation dY = V(Y) o dB on a
/// sampled driver path: predict with an Euler step, correct with the
/// averaged field. Serves as the reference limit law for driver lifts.
pub fn stratonovich_heun(
    fields: &VectorFieldSet,
    times: &[f64],
    samples: &[f64],
    y0: &[f64],
) -> Result<StatePath, RdeError> {
    let (e, d) = (fields.state_dim, fields.driver_dim);
    if times.is_empty() || samples.len() != times.len() * d {
        return Err(RdeError::BadShape("need samples.len() == times.len() * driver_dim"));
    }
    if y0.len() != e {
        return Err(RdeError::BadStateDim { expected: e, got: y0.len() });
    }
    let mut states = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    states.push(y.clone());
    let mut field_at_y = vec![0.0; e];
    let mut field_at_pred = vec![0.0; e];
    for step in 1..times.len() {
        let dx = |i: usize| samples[step * d + i] - samples[(step - 1) * d + i];
        let mut predictor = y.clone();
        for i in 0..d {
            (fields.value)(i, &y, &mut field_at_y);
            for r in 0..e {
                predictor[r] += field_at_y[r] * dx(i);
            }
        }
        let mut correction = vec![0.0; e];
        for i in 0..d {
            (fields.value)(i, &y, &mut field_at_y);
            (fields.value)(i, &predictor, &mut field_at_pred);
            for r in 0..e {
                correction[r] += 0.5 * (field_at_y[r] + field_at_pred[r]) * dx(i);
            }
        }
        for r in 0..e {
            y[r] += correction[r];
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(RdeError::Diverged { step, time: times[step] });
        }
        states.push(y.clone());
    }
    Ok(StatePath { times: times.to_vec(), states })
}

/// Classical high-order reference: RK4 along the piecewise-linear path
/// through the samples, `substeps` Runge-Kutta steps per segment.
pub fn piecewise_linear_reference(
    fields: &VectorFieldSet,
    times: &[f64],
    samples: &[f64],
    y0: &[f64],
    substeps: usize,
) -> Result<StatePath, RdeError> {
    let (e, d) = (fields.state_dim, fields.driver_dim);
    if times.len() < 2 || samples.len() != times.len() * d {
        return Err(RdeError::BadShape("need samples.len() == times.len() * driver_dim"));
    }
    if y0.len() != e {
        return Err(RdeError::BadStateDim { expected: e, got: y0.len() });
    }
    if substeps == 0 {
        return Err(RdeError::BadSubsteps);
    }
    let mut states = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    states.push(y.clone());
    let mut field = vec![0.0; e];
    for step in 1..times.len() {
        // constant velocity of the segment, absorbed into a unit time step
        let velocity: Vec<f64> =
            (0..d).map(|i| samples[step * d + i] - samples[(step - 1) * d + i]).collect();
        let mut drift = |state: &[f64], out: &mut [f64]| {
            out.fill(0.0);
            for (i, v) in velocity.iter().enumerate() {
                (fields.value)(i, state, &mut field);
                for r in 0..e {
                    out[r] += field[r] * v;
                }
            }
        };
        let h = 1.0 / substeps as f64;
        let mut k1 = vec![0.0; e];
        let mut k2 = vec![0.0; e];
        let mut k3 = vec![0.0; e];
        let mut k4 = vec![0.0; e];
        let mut stage = vec![0.0; e];
        for _ in 0..substeps {
            drift(&y, &mut k1);
            for r in 0..e {
                stage[r] = y[r] + 0.5 * h * k1[r];
            }
            drift(&stage, &mut k2);
            for r in 0..e {
                stage[r] = y[r] + 0.5 * h * k2[r];
            }
            drift(&stage, &mut k3);
            for r in 0..e {
                stage[r] = y[r] + h * k3[r];
            }
            drift(&stage, &mut k4);
            for r in 0..e {
                y[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(RdeError::Diverged { step, time: times[step] });
        }
        states.push(y.clone());
    }
    Ok(StatePath { times: times.to_vec(), states })
}

/// Gauss-Legendre nodes and weights on [0, 1], exact through degree 5.
const GAUSS3: [(f64, f64); 3] = [
    (0.11270166537925831, 0.2777777777777778),
    (0.5, 0.4444444444444444),
    (0.8872983346207417, 0.2777777777777778),
];

/// Running integral sum_i int phi_i(x_u) dx^i_u along a chordal lift,
/// evaluated segment by segment with Gauss quadrature on the underlying
/// piecewise-linear trajectory.
pub fn path_integral(
    integrands: &IntegrandSet,
    path: &LiftedPath,
) -> Result<StatePath, RdeError> {
    if path.interpolation() != Interpolation::LinearLift {
        return Err(RdeError::NeedsChordalPath);
    }
    if path.dim() != integrands.driver_dim {
        return Err(RdeError::DriverMismatch {
            field_dim: integrands.driver_dim,
            driver_dim: path.dim(),
        });
    }
    let (d, e) = (integrands.driver_dim, integrands.range_dim);
    let samples = path.level1_samples();
    let mut states = Vec::with_capacity(path.len());
    let mut value = vec![0.0; e];
    states.push(value.clone());
    let mut point = vec![0.0; d];
    let mut phi = vec![0.0; e];
    for step in 1..path.len() {
        let previous = &samples[(step - 1) * d..step * d];
        let delta: Vec<f64> =
            (0..d).map(|i| samples[step * d + i] - previous[i]).collect();
        let mut segment = vec![0.0; e];
        for (node, weight) in GAUSS3 {
            for c in 0..d {
                point[c] = previous[c] + node * delta[c];
            }
            for (i, di) in delta.iter().enumerate() {
                if *di == 0.0 {
                    continue;
                }
                (integrands.value)(i, &point, &mut phi);
                for r in 0..e {
                    segment[r] += weight * di * phi[r];
                }
            }
        }
        for r in 0..e {
            value[r] += segment[r];
        }
        states.push(value.clone());
    }
    Ok(StatePath { times: path.times().to_vec(), states })
}

/// Adjoins the time coordinate as a final (d+1)-th driver component, so a
/// drift term can ride as an extra vector field. Chordal lifts only: the
/// cross integrals of x against t are then determined by the samples.
pub fn adjoin_time(path: &LiftedPath) -> Result<LiftedPath, RdeError> {
    if path.interpolation() != Interpolation::LinearLift {
        return Err(RdeError::NeedsChordalPath);
    }
    let d = path.dim();
    let samples = path.level1_samples();
    let times = path.times();
    let mut augmented = Vec::with_capacity(times.len() * (d + 1));
    for (row, &t) in times.iter().enumerate() {
        augmented.extend_from_slice(&samples[row * d..(row + 1) * d]);
        augmented.push(t - times[0]);
    }
    Ok(LiftedPath::lift_linear_chords_at(d + 1, path.depth(), times, &augmented)?)
}
