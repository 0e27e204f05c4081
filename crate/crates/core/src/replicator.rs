//! Replicator dynamics of three responder types in the 2x2 game:
//! `x1` plays the mixed ESS, `x2` always visits the higher offer, `x3`
//! always visits the lower one. Offers are `s` and `s + delta`.

use serde::{Deserialize, Serialize};

use crate::duopoly::table_entries;
use crate::error::{Error, Result};

/// Tolerance on `x1 + x2 + x3 = 1` for accepted points.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Largest per-step drift off the simplex that is silently renormalized.
pub const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicatorParams {
    s: f64,
    delta: f64,
}

impl ReplicatorParams {
    pub fn new(s: f64, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta <= s && s + delta > 0.0 && s + delta <= 1.0) {
            return Err(Error::OutOfRegion(format!(
                "need 0 <= delta <= s and 0 < s + delta <= 1 (s={s}, delta={delta})"
            )));
        }
        Ok(ReplicatorParams { s, delta })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Payoff matrix between the three types.
    pub fn payoff_matrix(&self) -> [[f64; 3]; 3] {
        table_entries(self.s, self.delta)
    }

    /// Common payoff of all types on the line of equilibria.
    pub fn line_payoff(&self) -> f64 {
        let (s, d) = (self.s, self.delta);
        3.0 * s * (d + s) / (2.0 * (d + 2.0 * s))
    }

    /// Probability of visiting the lower offer under the mixed ESS.
    pub fn p_low(&self) -> f64 {
        (self.s - self.delta) / (2.0 * self.s + self.delta)
    }

    /// Largest `x2` for which the line point stays in the simplex.
    pub fn line_x2_max(&self) -> f64 {
        let (s, d) = (self.s, self.delta);
        (2.0 * d + s) / (d + 2.0 * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl SimplexPoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let ok = [x1, x2, x3].iter().all(|v| v.is_finite() && *v >= 0.0)
            && (x1 + x2 + x3 - 1.0).abs() <= SIMPLEX_TOL;
        if !ok {
            return Err(Error::OutOfRegion(format!(
                "({x1}, {x2}, {x3}) is not on the simplex"
            )));
        }
        Ok(SimplexPoint { x1, x2, x3 })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    fn from_array(a: [f64; 3]) -> Self {
        SimplexPoint { x1: a[0], x2: a[1], x3: a[2] }
    }

    pub fn distance(&self, other: &SimplexPoint) -> f64 {
        let (a, b) = (self.as_array(), other.as_array());
        a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
    }
}

fn closed_form(params: &ReplicatorParams, x: [f64; 3]) -> [f64; 3] {
    let (s, d) = (params.s, params.delta);
    let (x1, x2) = (x[0], x[1]);
    let den = 2.0 * d + 4.0 * s;
    let lin = x1 * (2.0 * d + s) + x2 * (d + 2.0 * s) - 2.0 * d - s;
    let dx1 = x1 * lin * lin / den;
    let quad = d * d
        * (4.0 * x1 * x1 + 4.0 * x1 * x2 - 6.0 * x1 + x2 * x2 - 3.0 * x2 + 2.0)
        + d * s
            * (4.0 * x1 * x1 + 10.0 * x1 * x2 - 9.0 * x1 + 4.0 * x2 * x2 - 9.0 * x2 + 5.0)
        + s * s * (x1 * x1 + 4.0 * x1 * x2 - 3.0 * x1 + 4.0 * x2 * x2 - 6.0 * x2 + 2.0);
    let dx2 = x2 * quad / den;
    [dx1, dx2, -dx1 - dx2]
}

/// Closed-form time derivative at `point`.
pub fn vector_field(params: &ReplicatorParams, point: &SimplexPoint) -> [f64; 3] {
    closed_form(params, point.as_array())
}

/// Type payoffs `(P x)_i` against the population `point`.
pub fn type_payoffs(params: &ReplicatorParams, point: &SimplexPoint) -> [f64; 3] {
    let p = params.payoff_matrix();
    let x = point.as_array();
    let mut out = [0.0; 3];
    for (i, row) in p.iter().enumerate() {
        out[i] = row.iter().zip(&x).map(|(a, b)| a * b).sum();
    }
    out
}

/// `x_i ((P x)_i - x^T P x)` straight from the payoff matrix.
pub fn vector_field_generic(params: &ReplicatorParams, point: &SimplexPoint) -> [f64; 3] {
    let px = type_payoffs(params, point);
    let x = point.as_array();
    let mean: f64 = px.iter().zip(&x).map(|(a, b)| a * b).sum();
    [0, 1, 2].map(|i| x[i] * (px[i] - mean))
}

/// Point on the line of equilibria with the given `x2`.
pub fn line_point(params: &ReplicatorParams, x2: f64) -> Result<SimplexPoint> {
    let (s, d) = (params.s, params.delta);
    if !(0.0..=params.line_x2_max()).contains(&x2) {
        return Err(Error::OutOfRegion(format!(
            "x2 = {x2} outside [0, {}]",
            params.line_x2_max()
        )));
    }
    let x1 = (1.0 - x2 * (d + 2.0 * s) / (2.0 * d + s)).max(0.0);
    let x3 = x2 * (s - d) / (2.0 * d + s);
    Ok(SimplexPoint { x1, x2, x3 })
}

/// Euclidean distance to the equilibrium segment, by projecting onto its
/// parametrization over the feasible `x2` range.
pub fn distance_to_line(params: &ReplicatorParams, point: &SimplexPoint) -> f64 {
    let (s, d) = (params.s, params.delta);
    let dir = [-(d + 2.0 * s) / (2.0 * d + s), 1.0, (s - d) / (2.0 * d + s)];
    let rel = [point.x1 - 1.0, point.x2, point.x3];
    let dot: f64 = rel.iter().zip(&dir).map(|(a, b)| a * b).sum();
    let norm2: f64 = dir.iter().map(|v| v * v).sum();
    let t = (dot / norm2).clamp(0.0, params.line_x2_max());
    rel.iter()
        .zip(&dir)
        .map(|(r, u)| (r - t * u).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Probability that a randomly drawn responder visits the lower offer.
pub fn aggregate_low_probability(params: &ReplicatorParams, point: &SimplexPoint) -> f64 {
    point.x3 + point.x1 * params.p_low()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<SimplexPoint>,
    pub distance_to_line: f64,
    pub terminal_payoffs: [f64; 3],
    /// Largest per-step drift off the simplex before renormalization.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn terminal(&self) -> &SimplexPoint {
        self.points.last().expect("trajectory holds the start point")
    }
}

fn rk4_step(params: &ReplicatorParams, x: [f64; 3], dt: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], h: f64| [a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]];
    let k1 = closed_form(params, x);
    let k2 = closed_form(params, add(x, k1, dt / 2.0));
    let k3 = closed_form(params, add(x, k2, dt / 2.0));
    let k4 = closed_form(params, add(x, k3, dt));
    [0, 1, 2].map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Fixed-step classical Runge-Kutta from `start` to `t_end`, recording
/// every `record_every`-th step (the final point is always kept).
pub fn integrate_recorded(
    params: &ReplicatorParams,
    start: &SimplexPoint,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end >= 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end >= 0 (dt={dt}, t_end={t_end})")));
    }
    let stride = record_every.max(1);
    let steps = (t_end / dt).round() as usize;
    let mut x = start.as_array();
    let mut times = vec![0.0];
    let mut points = vec![*start];
    let mut max_drift: f64 = 0.0;
    for n in 1..=steps {
        let mut next = rk4_step(params, x, dt);
        let t = n as f64 * dt;
        let sum: f64 = next.iter().sum();
        let drift = (sum - 1.0).abs();
        let most_negative = next.iter().copied().fold(0.0, f64::min);
        if drift > DRIFT_TOL || most_negative < -DRIFT_TOL {
            return Err(Error::SimplexDrift { drift: drift.max(-most_negative), time: t });
        }
        max_drift = max_drift.max(drift);
        next = next.map(|v| v.max(0.0));
        let sum: f64 = next.iter().sum();
        x = next.map(|v| v / sum);
        if n % stride == 0 || n == steps {
            times.push(t);
            points.push(SimplexPoint::from_array(x));
        }
    }
    let end = SimplexPoint::from_array(x);
    Ok(Trajectory {
        times,
        points,
        distance_to_line: distance_to_line(params, &end),
        terminal_payoffs: type_payoffs(params, &end),
        max_drift,
    })
}

/// [`integrate_recorded`] keeping every step.
pub fn integrate(
    params: &ReplicatorParams,
    start: &SimplexPoint,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_recorded(params, start, t_end, dt, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: SimplexPoint,
    pub field: [f64; 3],
    pub magnitude: f64,
}

/// Barycentric lattice with `resolution` points per edge and the field at
/// each of them.
pub fn field_grid(params: &ReplicatorParams, resolution: usize) -> Result<Vec<FieldSample>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument("resolution must be at least 2".into()));
    }
    let n = resolution - 1;
    let mut out = Vec::with_capacity(resolution * (resolution + 1) / 2);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let k = n - i - j;
            let point = SimplexPoint {
                x1: i as f64 / n as f64,
                x2: j as f64 / n as f64,
                x3: k as f64 / n as f64,
            };
            let field = vector_field(params, &point);
            let magnitude = field.iter().map(|v| v * v).sum::<f64>().sqrt();
            out.push(FieldSample { point, field, magnitude });
        }
    }
    Ok(out)
}

/// Eigenvalues of the Jacobian of `(dx1, dx2)` in the `(x1, x2)` chart,
/// by central differences. Complex pairs are returned as their real part
/// twice.
pub fn reduced_jacobian_eigenvalues(params: &ReplicatorParams, point: &SimplexPoint) -> [f64; 2] {
    let h = 1e-6;
    let field = |x1: f64, x2: f64| {
        let v = closed_form(params, [x1, x2, 1.0 - x1 - x2]);
        [v[0], v[1]]
    };
    let (x1, x2) = (point.x1, point.x2);
    let (a1, a2) = (field(x1 + h, x2), field(x1 - h, x2));
    let (b1, b2) = (field(x1, x2 + h), field(x1, x2 - h));
    let j11 = (a1[0] - a2[0]) / (2.0 * h);
    let j21 = (a1[1] - a2[1]) / (2.0 * h);
    let j12 = (b1[0] - b2[0]) / (2.0 * h);
    let j22 = (b1[1] - b2[1]) / (2.0 * h);
    let tr = j11 + j22;
    let det = j11 * j22 - j12 * j21;
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [tr / 2.0 - r, tr / 2.0 + r]
    } else {
        [tr / 2.0, tr / 2.0]
    }
}
