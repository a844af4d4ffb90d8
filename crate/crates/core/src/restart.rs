//! Step-size weighted averaging, restart-candidate selection, the three
//! restart triggers and the primal-weight heuristics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::PreparedLp;
use crate::kkt::{convergence_info, kkt_error, ConvergenceInfo};
use crate::linalg::norm2;
use crate::pdhg::PrimalDualIterate;

/// Thresholds of the three restart criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartParams {
    pub beta_sufficient: f64,
    pub beta_necessary: f64,
    pub beta_artificial: f64,
}

impl Default for RestartParams {
    fn default() -> Self {
        RestartParams {
            beta_sufficient: 0.2,
            beta_necessary: 0.8,
            beta_artificial: 0.36,
        }
    }
}

impl RestartParams {
    pub fn is_valid(&self) -> bool {
        0.0 < self.beta_sufficient
            && self.beta_sufficient < self.beta_necessary
            && self.beta_necessary < 1.0
            && 0.0 < self.beta_artificial
            && self.beta_artificial < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestartReason {
    Sufficient,
    NecessaryNoProgress,
    LongLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateKind {
    Current,
    Average,
}

/// Bookkeeping for the current restart period.
#[derive(Debug, Clone)]
pub struct RestartState {
    /// First iterate of the current period.
    pub z_restart_start: PrimalDualIterate,
    /// First iterate of the previous period.
    pub previous_restart_start: PrimalDualIterate,
    pub running_average: PrimalDualIterate,
    pub weight_sum: f64,
    pub kkt_at_restart_start: f64,
    /// KKT error of the candidate at the previous evaluation in this period.
    pub last_candidate_kkt: f64,
    pub inner_iterations: u64,
    pub omega_n: f64,
}

impl RestartState {
    pub fn new(start: PrimalDualIterate, kkt_at_start: f64, omega: f64) -> Self {
        let running_average = PrimalDualIterate::zeros(start.x.len(), start.y.len());
        RestartState {
            previous_restart_start: start.clone(),
            z_restart_start: start,
            running_average,
            weight_sum: 0.0,
            kkt_at_restart_start: kkt_at_start,
            last_candidate_kkt: f64::INFINITY,
            inner_iterations: 0,
            omega_n: omega,
        }
    }

    /// Folds `z_new` into the average with weight `eta_step`.
    pub fn update_average(&mut self, z_new: &PrimalDualIterate, eta_step: f64) -> Result<()> {
        if !(eta_step > 0.0) {
            return Err(Error::InvalidInput(format!(
                "averaging weight must be positive, got {eta_step}"
            )));
        }
        let total = self.weight_sum + eta_step;
        let keep = self.weight_sum / total;
        let add = eta_step / total;
        let avg = &mut self.running_average;
        for (a, z) in avg.x.iter_mut().zip(&z_new.x) {
            *a = keep * *a + add * z;
        }
        for (a, z) in avg.y.iter_mut().zip(&z_new.y) {
            *a = keep * *a + add * z;
        }
        self.weight_sum = total;
        self.inner_iterations += 1;
        Ok(())
    }

    pub fn has_average(&self) -> bool {
        self.weight_sum > 0.0
    }

    /// Starts a new period at `candidate`.
    pub fn restart_to(&mut self, candidate: PrimalDualIterate, kkt_at_candidate: f64) {
        self.previous_restart_start =
            std::mem::replace(&mut self.z_restart_start, candidate);
        self.running_average.x.iter_mut().for_each(|v| *v = 0.0);
        self.running_average.y.iter_mut().for_each(|v| *v = 0.0);
        self.weight_sum = 0.0;
        self.kkt_at_restart_start = kkt_at_candidate;
        self.last_candidate_kkt = f64::INFINITY;
        self.inner_iterations = 0;
    }
}

/// Picks the current iterate unless the average has strictly lower KKT error.
pub fn choose_candidate(kkt_current: f64, kkt_average: f64) -> CandidateKind {
    if kkt_current <= kkt_average {
        CandidateKind::Current
    } else {
        CandidateKind::Average
    }
}

/// A selected restart candidate with its evaluation.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub iterate: PrimalDualIterate,
    pub kkt: f64,
    pub info: ConvergenceInfo,
}

/// Evaluates both points on `lp` and returns the one with lower KKT error.
pub fn restart_candidate(
    current: &PrimalDualIterate,
    average: &PrimalDualIterate,
    lp: &PreparedLp,
    omega: f64,
) -> Result<Candidate> {
    let info_c = convergence_info(lp, &current.x, &current.y);
    let info_a = convergence_info(lp, &average.x, &average.y);
    let kkt_c = kkt_error(&info_c, omega)?;
    let kkt_a = kkt_error(&info_a, omega)?;
    Ok(match choose_candidate(kkt_c, kkt_a) {
        CandidateKind::Current => Candidate {
            kind: CandidateKind::Current,
            iterate: current.clone(),
            kkt: kkt_c,
            info: info_c,
        },
        CandidateKind::Average => Candidate {
            kind: CandidateKind::Average,
            iterate: average.clone(),
            kkt: kkt_a,
            info: info_a,
        },
    })
}

/// Applies the three restart criteria in order.
pub fn should_restart(
    state: &RestartState,
    kkt_candidate: f64,
    total_iterations: u64,
    params: &RestartParams,
) -> Option<RestartReason> {
    let start = state.kkt_at_restart_start;
    if kkt_candidate <= params.beta_sufficient * start {
        return Some(RestartReason::Sufficient);
    }
    if kkt_candidate <= params.beta_necessary * start && kkt_candidate > state.last_candidate_kkt {
        return Some(RestartReason::NecessaryNoProgress);
    }
    if state.inner_iterations as f64 > params.beta_artificial * total_iterations as f64 {
        return Some(RestartReason::LongLoop);
    }
    None
}

/// `||c|| / ||q||` when both norms exceed `eps_zero`, otherwise 1.
pub fn initialize_primal_weight(c: &[f64], q: &[f64], eps_zero: f64) -> f64 {
    let (nc, nq) = (norm2(c), norm2(q));
    if nc > eps_zero && nq > eps_zero {
        nc / nq
    } else {
        1.0
    }
}

/// Geometric mean of the previous weight and the ratio of dual to primal
/// movement between consecutive restart points.
pub fn primal_weight_update(
    x_n: &[f64],
    x_prev: &[f64],
    y_n: &[f64],
    y_prev: &[f64],
    omega_prev: f64,
    eps_zero: f64,
) -> f64 {
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    };
    let dx = dist(x_n, x_prev);
    let dy = dist(y_n, y_prev);
    if dx > eps_zero && dy > eps_zero {
        (0.5 * (dy / dx).ln() + 0.5 * omega_prev.ln()).exp()
    } else {
        omega_prev
    }
}
