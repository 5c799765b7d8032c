//! Independent verification of computed delay orbits: forward integration of
//! the delay equation by the method of steps and a periodicity residual.
//!
//! On each interval the delayed argument refers only to already-computed
//! history, so the equation reduces to an ODE; delayed lookups between nodes
//! use cubic Hermite dense output, which matches the RK4 order.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::field::VectorFieldSpec;
use crate::fourier::PeriodicMap;
use crate::rk4::BLOWUP_NORM;

/// The past of a trajectory on `[-tau, 0]`, extracted from the trigonometric
/// series of a periodic map.
#[derive(Clone)]
pub struct HistorySegment {
    pub tau: f64,
    map: PeriodicMap,
    /// Samples on `[-tau, 0]` at integrator resolution, kept for inspection.
    pub samples: Vec<(f64, Vec<f64>)>,
}

impl HistorySegment {
    pub fn from_map(x: &PeriodicMap, tau: f64, resolution_per_unit: usize) -> Self {
        assert!((0.0..=1.0).contains(&tau), "delay in [0, 1]");
        assert!(resolution_per_unit >= 16, "at least 16 samples per unit time");
        let count = ((tau * resolution_per_unit as f64).ceil() as usize).max(2);
        let samples = (0..=count)
            .map(|i| {
                let t = -tau + tau * i as f64 / count as f64;
                (t, x.eval(t))
            })
            .collect();
        Self { tau, map: x.clone(), samples }
    }

    /// Exact evaluation of the underlying series; valid on `[-tau, 0]`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        self.map.eval(t)
    }
}

struct Node {
    t: f64,
    y: DVector<f64>,
    /// dy/dt at the node, for Hermite interpolation.
    dy: DVector<f64>,
}

fn hermite(n0: &Node, n1: &Node, t: f64) -> DVector<f64> {
    let h = n1.t - n0.t;
    let s = (t - n0.t) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * &n0.y + h10 * h * &n0.dy + h01 * &n1.y + h11 * h * &n1.dy
}

/// Forward integration of `dy/dt = X_t(y(t - tau))` from the given history.
/// Returns the trajectory at the integrator nodes on `[0, duration]`.
pub fn integrate_mos(
    field: &VectorFieldSpec,
    history: &HistorySegment,
    duration: f64,
    steps_per_unit: usize,
) -> Result<Vec<(f64, DVector<f64>)>> {
    assert!(duration <= 4.0, "duration capped at 4 periods");
    let tau = history.tau;
    let h = 1.0 / steps_per_unit as f64;
    if tau <= 0.0 || tau < h {
        return Err(Error::MinDelayTooSmall { tau, step: h });
    }
    let steps = (duration * steps_per_unit as f64).round() as usize;

    let mut nodes: Vec<Node> = Vec::with_capacity(steps + 1);
    let y0 = DVector::from_vec(history.eval(0.0));

    let delayed = |nodes: &[Node], s: f64| -> DVector<f64> {
        if s <= 0.0 {
            DVector::from_vec(history.eval(s))
        } else {
            let mut j = (s / h).floor() as usize;
            if j + 1 >= nodes.len() {
                j = nodes.len() - 2;
            }
            hermite(&nodes[j], &nodes[j + 1], s)
        }
    };

    let dy0 = field.eval(0.0, &delayed(&nodes, -tau));
    nodes.push(Node { t: 0.0, y: y0, dy: dy0 });

    for i in 0..steps {
        let t = i as f64 * h;
        let y = nodes[i].y.clone();
        // RK4 with the delayed term read from history/dense output. Since
        // tau >= h, all stage lookups land in already-computed segments.
        let k1 = field.eval(t, &delayed(&nodes, t - tau));
        let k2 = field.eval(t + 0.5 * h, &delayed(&nodes, t + 0.5 * h - tau));
        // The RHS does not depend on the current state, only on time and the
        // delayed value, so the two midpoint stages coincide and RK4 reduces
        // to Simpson's rule at the same order.
        let k3 = k2.clone();
        let k4 = field.eval(t + h, &delayed(&nodes, t + h - tau));
        let y_next = &y + (h / 6.0) * (&k1 + 2.0 * &k2 + 2.0 * &k3 + &k4);
        if y_next.norm() > BLOWUP_NORM {
            return Err(Error::IntegratorBlowup(y_next.norm()));
        }
        let t_next = t + h;
        let dy_next = field.eval(t_next, &delayed(&nodes, t_next - tau));
        nodes.push(Node { t: t_next, y: y_next, dy: dy_next });
    }
    Ok(nodes.into_iter().map(|n| (n.t, n.y)).collect())
}

/// Maximum deviation over one period between the method-of-steps trajectory
/// started from the history of `x` and `x` itself.
pub fn periodicity_residual(
    field: &VectorFieldSpec,
    x: &PeriodicMap,
    tau: f64,
    steps_per_unit: usize,
) -> Result<f64> {
    let history = HistorySegment::from_map(x, tau, steps_per_unit);
    let trajectory = integrate_mos(field, &history, 1.0, steps_per_unit)?;
    let mut worst = 0.0_f64;
    for (t, y) in &trajectory {
        let reference = DVector::from_vec(x.eval(*t));
        worst = worst.max((y - reference).norm());
    }
    Ok(worst)
}
