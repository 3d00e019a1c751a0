//! Learning the RBF width by gradient descent on the maximised dual.
//!
//! The outer loop minimises `D(gamma) = max_a D(a, gamma)` over `gamma`.
//! Each step proposes `gamma - eta * dD/dgamma`, re-solves the dual there and
//! keeps or reverts the step depending on how `D` moved. The rate `eta`
//! follows a bold-driver schedule: multiplied by `zeta_plus` after a
//! successful step and by `zeta_minus` after an overshoot or a rejected
//! (non-positive) proposal.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{rbf_kernel_matrix, squared_distance_matrix, DistanceMatrix, KernelCache};
use crate::solver::{model_from_solution, smo, DualSolution, SolverConfig, SvmModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OksvmConfig {
    pub gamma0: f64,
    pub eta0: f64,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    pub gamma_max: f64,
    pub epsilon: f64,
    pub ws_limit: usize,
    pub max_outer_steps: usize,
    /// Relative change of `D` below which a step counts as stagnant.
    pub stagnation_tolerance: f64,
    /// Start each re-solve from the previous multipliers.
    pub warm_start: bool,
}

pub const DEFAULT_GAMMA0: f64 = 1.0;

impl Default for OksvmConfig {
    fn default() -> Self {
        Self {
            gamma0: DEFAULT_GAMMA0,
            eta0: 0.01,
            zeta_plus: 1.01,
            zeta_minus: 0.1,
            gamma_max: 1000.0,
            epsilon: 0.01,
            ws_limit: 5,
            max_outer_steps: 500,
            stagnation_tolerance: 1e-12,
            warm_start: true,
        }
    }
}

impl OksvmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma0", self.gamma0),
            ("eta0", self.eta0),
            ("gamma_max", self.gamma_max),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.zeta_plus > 1.0 && self.zeta_plus.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "zeta_plus must exceed 1, got {}",
                self.zeta_plus
            )));
        }
        if !(self.zeta_minus > 0.0 && self.zeta_minus < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "zeta_minus must lie in (0, 1), got {}",
                self.zeta_minus
            )));
        }
        if self.ws_limit == 0 {
            return Err(Error::InvalidConfig("ws_limit must be positive".into()));
        }
        if self.stagnation_tolerance.is_nan() || self.stagnation_tolerance < 0.0 {
            return Err(Error::InvalidConfig("stagnation_tolerance must be non-negative".into()));
        }
        if self.gamma0 > self.gamma_max {
            return Err(Error::InvalidConfig(format!(
                "gamma0 {} exceeds gamma_max {}",
                self.gamma0, self.gamma_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Initial,
    /// `D` decreased; step kept, `eta *= zeta_plus`.
    Accepted,
    /// `D` unchanged; step kept, stagnation counter incremented.
    Stagnant,
    /// `D` increased; step reverted, `eta *= zeta_minus`.
    Overshoot,
    /// `D` increased and `gamma` moved less than `epsilon` since the last reference.
    Converged,
    /// Proposal was not positive; `eta *= zeta_minus`.
    RejectedNonpositive,
    /// Proposal exceeded `gamma_max`; run stops at the last valid model.
    GammaExceeded,
}

impl StepEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            StepEvent::Initial => "initial",
            StepEvent::Accepted => "accepted",
            StepEvent::Stagnant => "stagnant",
            StepEvent::Overshoot => "overshoot",
            StepEvent::Converged => "converged",
            StepEvent::RejectedNonpositive => "rejected_nonpositive",
            StepEvent::GammaExceeded => "gamma_exceeded",
        }
    }
}

impl fmt::Display for StepEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    GammaExceeded,
    Stagnated,
    StepCap,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::GammaExceeded => "gamma_exceeded",
            Termination::Stagnated => "stagnated",
            Termination::StepCap => "step_cap",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Termination::Converged),
            "gamma_exceeded" => Ok(Termination::GammaExceeded),
            "stagnated" => Ok(Termination::Stagnated),
            "step_cap" => Ok(Termination::StepCap),
            other => Err(Error::ResultFormat(format!("unknown termination `{other}`"))),
        }
    }
}

/// One outer step. `gamma` and `dual_value` describe the retained state
/// after the step; `proposed_gamma` is the candidate that was evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub t: usize,
    pub gamma: f64,
    pub dual_value: f64,
    pub eta: f64,
    pub ws: usize,
    pub event: StepEvent,
    pub proposed_gamma: f64,
    /// Dual value at `proposed_gamma`, when a solve happened there.
    pub proposed_dual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub t: usize,
    pub gamma_t: f64,
    pub gamma_f: f64,
    pub eta: f64,
    pub ws: usize,
    pub trace: Vec<TraceEntry>,
    pub terminated_by: Option<Termination>,
}

impl OptimizerState {
    fn new(config: &OksvmConfig) -> Self {
        Self {
            t: 0,
            gamma_t: config.gamma0,
            gamma_f: config.gamma0,
            eta: config.eta0,
            ws: 0,
            trace: Vec::new(),
            terminated_by: None,
        }
    }

    fn record(&mut self, dual_value: f64, event: StepEvent, proposed_gamma: f64, proposed_dual: Option<f64>) {
        self.trace.push(TraceEntry {
            t: self.t,
            gamma: self.gamma_t,
            dual_value,
            eta: self.eta,
            ws: self.ws,
            event,
            proposed_gamma,
            proposed_dual,
        });
    }
}

/// `dD/dgamma = 1/2 sum_ij a_i a_j y_i y_j |x_i - x_j|^2 k(x_i, x_j)`.
pub fn dual_gamma_gradient(alphas: &[f64], labels: &[f64], d2: &DistanceMatrix, kernel: &KernelCache) -> f64 {
    let support: Vec<usize> = (0..alphas.len()).filter(|&i| alphas[i] != 0.0).collect();
    let mut total = 0.0;
    for &i in &support {
        let (drow, krow) = (d2.row(i), kernel.row(i));
        let mut acc = 0.0;
        for &j in &support {
            acc += alphas[j] * labels[j] * drow[j] * krow[j];
        }
        total += alphas[i] * labels[i] * acc;
    }
    0.5 * total
}

/// `gamma - eta * gradient`; may be non-positive.
pub fn gamma_step(gamma: f64, eta: f64, gradient: f64) -> f64 {
    gamma - eta * gradient
}

fn is_stagnant(old: f64, new: f64, tol: f64) -> bool {
    (new - old).abs() <= tol * old.abs().max(new.abs())
}

/// Fits an RBF SVM at fixed `C`, learning `gamma` from `config.gamma0`.
pub fn train_oksvm(
    train: &Dataset,
    c: f64,
    config: &OksvmConfig,
    solver_config: &SolverConfig,
) -> Result<(SvmModel, OptimizerState)> {
    config.validate()?;
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let labels = train.labels_f64();
    let d2 = squared_distance_matrix(train.features(), train.n_features());

    let mut state = OptimizerState::new(config);
    let mut kernel = rbf_kernel_matrix(&d2, state.gamma_t)?;
    let mut current: DualSolution = smo(&kernel, &labels, c, solver_config, None)?;
    let mut solver_ok = current.converged;
    state.record(
        current.dual_value,
        StepEvent::Initial,
        state.gamma_t,
        Some(current.dual_value),
    );

    let termination = loop {
        if state.ws >= config.ws_limit {
            break Termination::Stagnated;
        }
        if state.t >= config.max_outer_steps {
            break Termination::StepCap;
        }
        state.t += 1;
        let grad = dual_gamma_gradient(&current.alphas, &labels, &d2, &kernel);
        let proposed = gamma_step(state.gamma_t, state.eta, grad);

        if proposed > config.gamma_max || !proposed.is_finite() {
            state.record(current.dual_value, StepEvent::GammaExceeded, proposed, None);
            break Termination::GammaExceeded;
        }
        if proposed <= 0.0 {
            state.gamma_f = state.gamma_t;
            state.eta *= config.zeta_minus;
            state.record(current.dual_value, StepEvent::RejectedNonpositive, proposed, None);
            continue;
        }

        let next_kernel = rbf_kernel_matrix(&d2, proposed)?;
        let warm = config.warm_start.then_some(current.alphas.as_slice());
        let next = smo(&next_kernel, &labels, c, solver_config, warm)?;
        let next_dual = next.dual_value;

        if is_stagnant(current.dual_value, next_dual, config.stagnation_tolerance) {
            state.ws += 1;
            state.gamma_t = proposed;
            solver_ok = next.converged;
            current = next;
            kernel = next_kernel;
            state.record(current.dual_value, StepEvent::Stagnant, proposed, Some(next_dual));
        } else if next_dual > current.dual_value {
            // minimum passed: keep gamma_t and its multipliers
            if (state.gamma_t - state.gamma_f).abs() < config.epsilon {
                state.record(current.dual_value, StepEvent::Converged, proposed, Some(next_dual));
                break Termination::Converged;
            }
            state.gamma_f = state.gamma_t;
            state.eta *= config.zeta_minus;
            state.record(current.dual_value, StepEvent::Overshoot, proposed, Some(next_dual));
        } else {
            state.eta *= config.zeta_plus;
            state.ws = 0;
            state.gamma_t = proposed;
            solver_ok = next.converged;
            current = next;
            kernel = next_kernel;
            state.record(current.dual_value, StepEvent::Accepted, proposed, Some(next_dual));
        }
    };
    state.terminated_by = Some(termination);

    let mut model = model_from_solution(&current, train, &kernel, c, solver_config)?;
    model.converged = solver_ok;
    Ok((model, state))
}

/// One dual solve at fixed `(C, gamma)`.
pub fn train_svm_baseline(train: &Dataset, c: f64, gamma: f64, solver_config: &SolverConfig) -> Result<SvmModel> {
    let d2 = squared_distance_matrix(train.features(), train.n_features());
    let kernel = rbf_kernel_matrix(&d2, gamma)?;
    crate::solver::solve_dual(&kernel, train, c, solver_config, None)
}

/// Writes the trace as CSV with columns `t,gamma,dual_value,eta,ws,event`.
pub fn write_trace_csv<W: Write>(trace: &[TraceEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "gamma", "dual_value", "eta", "ws", "event"])?;
    for e in trace {
        w.write_record([
            e.t.to_string(),
            e.gamma.to_string(),
            e.dual_value.to_string(),
            e.eta.to_string(),
            e.ws.to_string(),
            e.event.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trace>", e))?;
    Ok(())
}

pub fn write_trace_file(trace: &[TraceEntry], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, std::io::BufWriter::new(file))
}
