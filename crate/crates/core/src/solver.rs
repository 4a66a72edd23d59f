//! Exponential-integrator march for `a_t = -a_yyyy + a² - a_y ∫_0^y a`.
//!
//! Each step evaluates the Duhamel convolution with the trapezoid rule in
//! `τ`, freezing the semigroup at the left endpoint, and refines the right
//! endpoint by Picard iteration.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{compatibility_check, cumulative_trapezoid, EnergyReport, DEFAULT_BETA};
use crate::error::{Error, Result};
use crate::grid::Profile;
use crate::kernel::QuadratureSpec;
use crate::semigroup::{KernelOperator, OperatorCache, T_MIN};

/// Blow-up is declared at this multiple of the datum's sup norm unless an
/// absolute ceiling is given.
pub const DEFAULT_BLOWUP_FACTOR: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlowupThreshold {
    Absolute(f64),
    /// Multiple of the datum's sup norm.
    Relative(f64),
}

impl BlowupThreshold {
    pub fn resolve(self, datum_sup: f64) -> f64 {
        match self {
            BlowupThreshold::Absolute(v) => v,
            BlowupThreshold::Relative(_) if datum_sup == 0.0 => f64::INFINITY,
            BlowupThreshold::Relative(r) => r * datum_sup,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub picard_iters: usize,
    pub picard_tol: f64,
    pub blowup_threshold: BlowupThreshold,
    pub snapshot_factor: f64,
    pub max_steps: usize,
    /// `dt ≤ advection_cfl · h / ‖∫_0^y a‖_∞` keeps the transport term stable.
    pub advection_cfl: f64,
    /// Largest boundary trace accepted for the datum.
    pub compat_tol: f64,
    pub beta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-3,
            dt_min: T_MIN,
            picard_iters: 8,
            picard_tol: 1e-12,
            blowup_threshold: BlowupThreshold::Relative(DEFAULT_BLOWUP_FACTOR),
            snapshot_factor: 2.0,
            max_steps: 1_000_000,
            advection_cfl: 0.5,
            compat_tol: 1e-6,
            beta: DEFAULT_BETA,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, datum_sup: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.dt_min >= T_MIN && self.dt_min <= self.dt_initial) {
            return bad(format!(
                "need {T_MIN:e} <= dt_min <= dt_initial, got dt_min={:e}, dt_initial={:e}",
                self.dt_min, self.dt_initial
            ));
        }
        if self.picard_iters == 0 || self.picard_tol.is_nan() || self.picard_tol <= 0.0 {
            return bad("picard_iters and picard_tol must be positive".into());
        }
        if self.snapshot_factor.is_nan() || self.snapshot_factor <= 1.0 {
            return bad(format!("snapshot_factor must exceed 1, got {}", self.snapshot_factor));
        }
        if self.advection_cfl.is_nan() || self.advection_cfl <= 0.0 || self.compat_tol.is_nan() || self.compat_tol < 0.0
        {
            return bad("advection_cfl must be positive and compat_tol nonnegative".into());
        }
        let ceiling = self.blowup_threshold.resolve(datum_sup);
        if ceiling.is_nan() || ceiling <= datum_sup {
            return bad(format!(
                "blow-up threshold {ceiling:e} must exceed the datum sup norm {datum_sup:e}"
            ));
        }
        Ok(())
    }

    /// Largest `dt_initial · 2^{-k}` not exceeding the stability and
    /// nonlinear time-scale limits for `a`.
    pub fn ladder_dt(&self, a: &Profile) -> f64 {
        let sup = a.sup_norm();
        let mut target = self.dt_initial;
        if sup > 0.0 {
            target = target.min(0.5 / sup);
        }
        let v = cumulative_trapezoid(a).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if v > 0.0 {
            target = target.min(self.advection_cfl * a.grid().spacing() / v);
        }
        let mut dt = self.dt_initial;
        while dt > target {
            dt *= 0.5;
        }
        dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TimeReached,
    BlowupDetected,
    StepUnderflow,
    PicardDiverged,
    /// `max_steps` ran out before any other cause.
    StepLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Index into the trace.
    pub index: usize,
    /// Level `n`: the sup norm first reached `factor^n ×` initial here.
    pub level: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub profiles: Vec<Profile>,
    pub reports: Vec<EnergyReport>,
    /// Level 0 is the datum.
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub snapshot_factor: f64,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trace holds the datum")
    }

    pub fn final_profile(&self) -> &Profile {
        self.profiles.last().expect("trace holds the datum")
    }

    /// Snapshots strictly above the datum level.
    pub fn doubling_count(&self) -> usize {
        self.snapshots.iter().filter(|s| s.level > 0).count()
    }
}

pub fn cumulative_integral(a: &Profile) -> Profile {
    Profile::from_parts(*a.grid(), cumulative_trapezoid(a))
}

/// `a² - a_y ∫_0^y a`.
pub fn nonlinear_term(a: &Profile) -> Profile {
    let ay = a.derivative(1);
    let v = cumulative_trapezoid(a);
    let out = a
        .values()
        .iter()
        .zip(ay.values())
        .zip(&v)
        .map(|((a, ay), v)| a * a - ay * v)
        .collect();
    Profile::from_parts(*a.grid(), out)
}

/// One predictor-corrector step with the prebuilt `S(dt)`.
///
/// `ceiling` is the blow-up threshold; iterates beyond ten times it that keep
/// growing are reported as [`Error::PicardDiverged`].
pub fn step(a: &Profile, dt: f64, config: &SolverConfig, s_dt: &KernelOperator, ceiling: f64) -> Result<Profile> {
    let sa = s_dt.apply(a)?;
    let sn = s_dt.apply(&nonlinear_term(a))?;
    let base = sa.combine(1.0, &sn, 0.5 * dt)?;
    let mut current = sa.combine(1.0, &sn, dt)?;
    let limit = 10.0 * ceiling;
    let mut last_sup = current.sup_norm();
    for _ in 0..config.picard_iters {
        let next = base.combine(1.0, &nonlinear_term(&current), 0.5 * dt)?;
        let diff = next.sup_distance(&current)?;
        let sup = next.sup_norm();
        if !sup.is_finite() || (sup > limit && sup > last_sup) {
            return Err(Error::PicardDiverged { sup, limit });
        }
        last_sup = sup;
        current = next;
        if diff < config.picard_tol * (1.0 + sup) {
            break;
        }
    }
    Ok(current)
}

/// March from `a0` to `t_end`, recording every step.
///
/// Operators are built on demand through one cache; the time step is
/// quantized on `dt_initial · 2^{-k}` so only a few distinct operators are
/// ever assembled. The last step is shortened to land on `t_end`.
pub fn evolve(a0: &Profile, t_end: f64, config: &SolverConfig, quad: &QuadratureSpec) -> Result<EvolutionTrace> {
    let mut cache = OperatorCache::new(*quad);
    evolve_with_cache(a0, t_end, config, &mut cache)
}

pub fn evolve_with_cache(
    a0: &Profile,
    t_end: f64,
    config: &SolverConfig,
    cache: &mut OperatorCache,
) -> Result<EvolutionTrace> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let sup0 = a0.sup_norm();
    compatibility_check(a0, config.compat_tol).into_result()?;
    if sup0 > 0.0 {
        config.validate(sup0)?;
    }
    let ceiling = config.blowup_threshold.resolve(sup0);

    let mut trace = EvolutionTrace {
        times: vec![0.0],
        profiles: vec![a0.clone()],
        reports: vec![EnergyReport::evaluate(0.0, a0, config.beta)?],
        snapshots: vec![Snapshot { index: 0, level: 0 }],
        termination: Termination::TimeReached,
        snapshot_factor: config.snapshot_factor,
    };
    let mut next_level = 1u32;
    let mut t = 0.0;
    let mut a = a0.clone();
    let grid = *a0.grid();

    for _ in 0..config.max_steps {
        let remaining = t_end - t;
        if remaining < T_MIN {
            trace.termination = Termination::TimeReached;
            return Ok(trace);
        }
        let ladder = config.ladder_dt(&a);
        if ladder < config.dt_min {
            trace.termination = Termination::StepUnderflow;
            return Ok(trace);
        }
        let dt = if remaining <= ladder * (1.0 + 1e-12) {
            remaining
        } else {
            ladder
        };
        let op = cache.semigroup(&grid, dt)?;
        a = match step(&a, dt, config, &op, ceiling) {
            Ok(next) => next,
            Err(Error::PicardDiverged { .. }) => {
                trace.termination = Termination::PicardDiverged;
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        t = if dt == remaining { t_end } else { t + dt };

        let sup = a.sup_norm();
        trace.times.push(t);
        trace.reports.push(EnergyReport::evaluate(t, &a, config.beta)?);
        trace.profiles.push(a.clone());
        if sup0 > 0.0 {
            let index = trace.times.len() - 1;
            while sup >= config.snapshot_factor.powi(next_level as i32) * sup0 {
                trace.snapshots.push(Snapshot {
                    index,
                    level: next_level,
                });
                next_level += 1;
            }
        }
        if sup >= ceiling {
            trace.termination = Termination::BlowupDetected;
            return Ok(trace);
        }
        if t >= t_end {
            trace.termination = Termination::TimeReached;
            return Ok(trace);
        }
    }
    trace.termination = Termination::StepLimit;
    Ok(trace)
}

/// Sup over interior nodes of the centered time difference minus the
/// right-hand side at `sample_index`.
pub fn residual_check(trace: &EvolutionTrace, sample_index: usize) -> Result<f64> {
    let len = trace.len();
    if sample_index == 0 || sample_index + 1 >= len {
        return Err(Error::IndexOutOfRange {
            index: sample_index,
            len,
        });
    }
    let (prev, cur, next) = (
        &trace.profiles[sample_index - 1],
        &trace.profiles[sample_index],
        &trace.profiles[sample_index + 1],
    );
    let dt = trace.times[sample_index + 1] - trace.times[sample_index - 1];
    let rhs = nonlinear_term(cur).combine(1.0, &cur.derivative(4), -1.0)?;
    let skip = cur.grid().derivative_stencil(4).boundary_width();
    let n = cur.len();
    let mut worst: f64 = 0.0;
    for i in skip..n - skip {
        let at = (next.values()[i] - prev.values()[i]) / dt;
        worst = worst.max((at - rhs.values()[i]).abs());
    }
    Ok(worst)
}
