//! Plan enumeration, Pareto fronts, and constrained plan selection.

use thiserror::Error;

use crate::cost::{evaluate_plan, CostReport};
use crate::profiles::{ExecutionPlan, SystemProfile};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("no feasible plan: tightest violated constraint is {constraint} ({detail})")]
    Infeasible { constraint: String, detail: String },
    #[error("weighted objective requires weight_delay + weight_energy > 0")]
    InvalidWeights,
    #[error("constraint {field} must be finite and nonnegative")]
    InvalidConstraint { field: &'static str },
}

/// Cost reports for the full (exit, split) grid, sorted by exit then split.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub rows: Vec<CostReport<T>>,
}

impl<T: Scalar> SweepResult<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Evaluates every plan in the grid `exit in 1..=num_exits`,
/// `split in 0..=num_splits`. Deterministic row order: exit-major.
pub fn sweep<T: Scalar>(profile: &SystemProfile<T>, refined: bool) -> SweepResult<T> {
    let topology = &profile.topology;
    let mut rows =
        Vec::with_capacity(topology.num_exits as usize * (topology.num_splits as usize + 1));
    for exit in 1..=topology.num_exits {
        for split in 0..=topology.num_splits {
            rows.push(evaluate_plan(
                ExecutionPlan::new(exit, split),
                profile,
                refined,
            ));
        }
    }
    SweepResult { rows }
}

/// Objective axes; accuracy is negated so every axis minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Delay,
    Energy,
    NegAccuracy,
}

fn axis_value<T: Scalar>(report: &CostReport<T>, axis: Axis) -> T {
    match axis {
        Axis::Delay => report.delay.t_total,
        Axis::Energy => report.energy.e_total,
        Axis::NegAccuracy => -report.accuracy,
    }
}

/// `a` dominates `b` when it is no worse on every axis and strictly better
/// on at least one. Equal points do not dominate each other, so exact ties
/// are all kept on the front.
fn dominates<T: Scalar>(a: &CostReport<T>, b: &CostReport<T>, axes: &[Axis]) -> bool {
    let mut strictly_better = false;
    for &axis in axes {
        let (va, vb) = (axis_value(a, axis), axis_value(b, axis));
        if va > vb {
            return false;
        }
        if va < vb {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Non-dominated subset of the sweep under component-wise comparison on the
/// chosen axes, in the sweep's (exit, split) order.
///
/// Panics when the sweep is empty or fewer than two axes are requested;
/// both indicate a caller bug rather than a data condition.
pub fn pareto_front<T: Scalar>(sweep: &SweepResult<T>, axes: &[Axis]) -> Vec<CostReport<T>> {
    assert!(!sweep.is_empty(), "pareto_front needs a nonempty sweep");
    assert!(axes.len() >= 2, "pareto_front needs at least two axes");

    // Incremental frontier: insert each row, dropping rows the frontier
    // already dominates and evicting rows the newcomer dominates.
    let mut front: Vec<&CostReport<T>> = Vec::new();
    for row in &sweep.rows {
        if front.iter().any(|kept| dominates(kept, row, axes)) {
            continue;
        }
        front.retain(|kept| !dominates(row, kept, axes));
        front.push(row);
    }
    let mut front: Vec<CostReport<T>> = front.into_iter().cloned().collect();
    front.sort_by_key(|r| (r.plan.exit, r.plan.split));
    front
}

/// What to minimize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective<T> {
    MinDelay,
    MinEnergy,
    /// Weighted sum of delay and energy, each normalized by its sweep-wide
    /// maximum so the weights are unitless.
    Weighted { weight_delay: T, weight_energy: T },
}

/// Feasibility bounds; absent bounds are inactive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint<T> {
    pub min_accuracy: Option<T>,
    pub max_delay_s: Option<T>,
    pub max_energy_j: Option<T>,
}

impl<T> Default for Constraint<T> {
    fn default() -> Self {
        Self {
            min_accuracy: None,
            max_delay_s: None,
            max_energy_j: None,
        }
    }
}

impl<T: Scalar> Constraint<T> {
    pub fn none() -> Self {
        Self::default()
    }

    fn validate(&self) -> Result<(), PlannerError> {
        let check = |value: Option<T>, field: &'static str| -> Result<(), PlannerError> {
            match value {
                Some(v) if v.is_finite() && v >= T::zero() => Ok(()),
                None => Ok(()),
                _ => Err(PlannerError::InvalidConstraint { field }),
            }
        };
        check(self.min_accuracy, "min_accuracy")?;
        check(self.max_delay_s, "max_delay")?;
        check(self.max_energy_j, "max_energy")
    }

    fn satisfied_by(&self, report: &CostReport<T>) -> bool {
        self.min_accuracy.map_or(true, |b| report.accuracy >= b)
            && self.max_delay_s.map_or(true, |b| report.delay.t_total <= b)
            && self.max_energy_j.map_or(true, |b| report.energy.e_total <= b)
    }
}

/// Outcome of [`optimize`]: the chosen report plus which constraint was
/// binding (removing it would change the optimum), if any.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome<T> {
    pub report: CostReport<T>,
    pub binding_constraint: Option<String>,
}

/// Returns the feasible plan minimizing the objective. Ties are broken by
/// smaller exit, then smaller split, which the exit-major sweep order gives
/// for free.
pub fn optimize<T: Scalar>(
    profile: &SystemProfile<T>,
    objective: Objective<T>,
    constraint: Constraint<T>,
    refined: bool,
) -> Result<OptimizeOutcome<T>, PlannerError> {
    constraint.validate()?;
    let sweep = sweep(profile, refined);
    let score = score_fn(&sweep, objective)?;

    let best = sweep
        .rows
        .iter()
        .filter(|r| constraint.satisfied_by(r))
        .min_by(|a, b| score(a).partial_cmp(&score(b)).expect("finite scores"))
        .cloned();

    let Some(best) = best else {
        return Err(infeasibility(&sweep, &constraint));
    };

    let binding_constraint = binding_constraint(&sweep, &constraint, &score, &best);
    Ok(OptimizeOutcome {
        report: best,
        binding_constraint,
    })
}

fn score_fn<'a, T: Scalar>(
    sweep: &SweepResult<T>,
    objective: Objective<T>,
) -> Result<Box<dyn Fn(&CostReport<T>) -> T + 'a>, PlannerError> {
    match objective {
        Objective::MinDelay => Ok(Box::new(|r: &CostReport<T>| r.delay.t_total)),
        Objective::MinEnergy => Ok(Box::new(|r: &CostReport<T>| r.energy.e_total)),
        Objective::Weighted {
            weight_delay,
            weight_energy,
        } => {
            if !(weight_delay >= T::zero())
                || !(weight_energy >= T::zero())
                || !(weight_delay + weight_energy > T::zero())
            {
                return Err(PlannerError::InvalidWeights);
            }
            let max_delay = sweep
                .rows
                .iter()
                .map(|r| r.delay.t_total)
                .fold(T::zero(), T::max);
            let max_energy = sweep
                .rows
                .iter()
                .map(|r| r.energy.e_total)
                .fold(T::zero(), T::max);
            Ok(Box::new(move |r: &CostReport<T>| {
                let norm = |value: T, max: T| if max > T::zero() { value / max } else { T::zero() };
                weight_delay * norm(r.delay.t_total, max_delay)
                    + weight_energy * norm(r.energy.e_total, max_energy)
            }))
        }
    }
}

/// Names the violated constraint with the smallest chance of ever being
/// satisfiable: for each active bound, compare it against the best value any
/// plan attains on that axis alone.
fn infeasibility<T: Scalar>(sweep: &SweepResult<T>, constraint: &Constraint<T>) -> PlannerError {
    let mut worst: Option<(f64, String, String)> = None;
    let mut consider = |margin: f64, name: &str, detail: String| {
        if worst.as_ref().map_or(true, |(m, _, _)| margin < *m) {
            worst = Some((margin, name.to_string(), detail));
        }
    };

    if let Some(bound) = constraint.min_accuracy {
        let best = sweep
            .rows
            .iter()
            .map(|r| r.accuracy)
            .fold(T::neg_infinity(), T::max);
        let margin = crate::scalar::to_f64(best - bound);
        consider(
            margin,
            "min_accuracy",
            format!("best reachable accuracy is {best}"),
        );
    }
    if let Some(bound) = constraint.max_delay_s {
        let best = sweep
            .rows
            .iter()
            .map(|r| r.delay.t_total)
            .fold(T::infinity(), T::min);
        let margin = crate::scalar::to_f64(bound - best);
        consider(
            margin,
            "max_delay",
            format!("smallest reachable delay is {best} s"),
        );
    }
    if let Some(bound) = constraint.max_energy_j {
        let best = sweep
            .rows
            .iter()
            .map(|r| r.energy.e_total)
            .fold(T::infinity(), T::min);
        let margin = crate::scalar::to_f64(bound - best);
        consider(
            margin,
            "max_energy",
            format!("smallest reachable energy is {best} J"),
        );
    }

    let (_, constraint, detail) = worst.unwrap_or((
        0.0,
        "<none>".to_string(),
        "constraint set is empty yet no plan exists".to_string(),
    ));
    PlannerError::Infeasible { constraint, detail }
}

/// A constraint is binding when dropping it (alone) changes the optimum.
fn binding_constraint<T: Scalar>(
    sweep: &SweepResult<T>,
    constraint: &Constraint<T>,
    score: &dyn Fn(&CostReport<T>) -> T,
    chosen: &CostReport<T>,
) -> Option<String> {
    let optimum_without = |relaxed: Constraint<T>| -> Option<ExecutionPlan> {
        sweep
            .rows
            .iter()
            .filter(|r| relaxed.satisfied_by(r))
            .min_by(|a, b| score(a).partial_cmp(&score(b)).expect("finite scores"))
            .map(|r| r.plan)
    };

    let candidates: [(&str, Constraint<T>); 3] = [
        (
            "min_accuracy",
            Constraint {
                min_accuracy: None,
                ..*constraint
            },
        ),
        (
            "max_delay",
            Constraint {
                max_delay_s: None,
                ..*constraint
            },
        ),
        (
            "max_energy",
            Constraint {
                max_energy_j: None,
                ..*constraint
            },
        ),
    ];
    for (name, relaxed) in candidates {
        if relaxed == *constraint {
            continue; // bound was not set
        }
        if optimum_without(relaxed) != Some(chosen.plan) {
            return Some(name.to_string());
        }
    }
    None
}
