//! The full solve: optional fishnet warm start, Ruiz scaling, restarted
//! PDHG with periodic termination, infeasibility and restart checks, and
//! unscaling of the returned point.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fishnet::{run_fishnet, FishnetConfig};
use crate::infeasibility::{detect, DeltaWindow, InfeasibilityStatus, Snapshot};
use crate::instance::PreparedLp;
use crate::kkt::{check_termination, convergence_info, kkt_error, ConvergenceInfo};
use crate::linalg::{proj_box_in_place, proj_dual_cone_in_place, spectral_norm_estimate};
use crate::model::{validate, LpProblem};
use crate::pdhg::{adaptive_step_cached, pdhg_step_cached, PrimalDualIterate, StepSizes};
use crate::restart::{
    choose_candidate, initialize_primal_weight, primal_weight_update, should_restart, CandidateKind,
    RestartParams, RestartReason, RestartState,
};
use crate::scaling::{apply_scaling, ruiz_equilibrate, unscale_iterate, ScalingData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tolerance: f64,
    /// `None` runs until another stopping rule fires.
    pub max_iterations: Option<u64>,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub theta: f64,
    pub check_interval: u64,
    pub enable_scaling: bool,
    pub enable_adaptive_step: bool,
    pub enable_primal_weight_updates: bool,
    pub enable_restarts: bool,
    pub enable_fishnet: bool,
    pub fishnet: FishnetConfig,
    pub eps_zero: f64,
    pub power_iterations: usize,
    pub restart: RestartParams,
    pub ruiz_iterations: usize,
    pub ruiz_tolerance: f64,
    /// Initial step size is this factor over the estimated `||K||`.
    pub step_size_factor: f64,
    pub enable_infeasibility_detection: bool,
    pub infeasibility_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-4,
            max_iterations: Some(100_000),
            time_limit: None,
            theta: 1.0,
            check_interval: 100,
            enable_scaling: true,
            enable_adaptive_step: false,
            enable_primal_weight_updates: false,
            enable_restarts: true,
            enable_fishnet: false,
            fishnet: FishnetConfig::default(),
            eps_zero: 1e-6,
            power_iterations: 20,
            restart: RestartParams::default(),
            ruiz_iterations: 10,
            ruiz_tolerance: 1e-4,
            step_size_factor: 0.9,
            enable_infeasibility_detection: true,
            infeasibility_tolerance: 1e-10,
        }
    }
}

impl SolverConfig {
    /// Plain fixed-step PDHG: no scaling and no restarts.
    pub fn baseline() -> Self {
        SolverConfig {
            enable_scaling: false,
            enable_restarts: false,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if !(self.tolerance > 0.0) {
            issues.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.check_interval == 0 {
            issues.push("check_interval must be at least 1".to_string());
        }
        if !self.restart.is_valid() {
            issues.push("restart thresholds must satisfy 0 < sufficient < necessary < 1 and 0 < artificial < 1".to_string());
        }
        if !self.theta.is_finite() || self.theta < 0.0 {
            issues.push(format!("theta must be finite and nonnegative, got {}", self.theta));
        }
        if let Some(t) = self.time_limit {
            if t.is_nan() || t < 0.0 {
                issues.push(format!("time limit must be nonnegative, got {t}"));
            }
        }
        if self.power_iterations == 0 {
            issues.push("power_iterations must be at least 1".to_string());
        }
        if self.enable_scaling && self.ruiz_iterations == 0 {
            issues.push("ruiz_iterations must be at least 1".to_string());
        }
        if !(self.step_size_factor > 0.0) {
            issues.push("step_size_factor must be positive".to_string());
        }
        if !(self.eps_zero > 0.0) {
            issues.push("eps_zero must be positive".to_string());
        }
        if !(self.infeasibility_tolerance > 0.0) {
            issues.push("infeasibility_tolerance must be positive".to_string());
        }
        if self.enable_fishnet && (self.fishnet.p == 0 || self.fishnet.k == 0) {
            issues.push("fishnet needs p >= 1 and k >= 1".to_string());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(issues.join("; ")))
        }
    }

    /// First 12 hex digits of the SHA-256 of the JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
    TimeLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Includes the objective constant.
    pub primal_objective: f64,
    /// Includes the objective constant.
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `|dual_objective - primal_objective|`.
    pub gap: f64,
    pub iterations: u64,
    pub restarts: u64,
    pub kkt_evaluations: u64,
    pub wall_time: f64,
    pub matvec_count: u64,
    /// Population sizes of the fishnet run, when one was made.
    pub fishnet_trajectory: Option<Vec<usize>>,
}

/// One PDHG step as seen by an observer. Iterates are in scaled space.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub iteration: u64,
    pub previous: &'a PrimalDualIterate,
    pub current: &'a PrimalDualIterate,
    pub eta: f64,
    pub omega: f64,
}

/// Summary of one periodic evaluation.
#[derive(Debug, Clone)]
pub struct CheckEvent {
    pub iteration: u64,
    pub kkt_current: f64,
    pub kkt_average: Option<f64>,
    pub restart: Option<RestartReason>,
    pub omega: f64,
}

/// Hooks into a running solve.
pub trait SolveObserver {
    /// Called once with the scaled problem the iterations run on.
    fn on_start(&mut self, _scaled: &PreparedLp, _steps: StepSizes) {}
    fn on_step(&mut self, _event: &StepEvent<'_>) {}
    fn on_check(&mut self, _event: &CheckEvent) {}
}

/// A problem transformation applied before the solve and undone after.
pub trait Presolve {
    fn presolve(&self, problem: &LpProblem) -> Result<LpProblem>;
    fn postsolve(&self, x: Vec<f64>, y: Vec<f64>) -> (Vec<f64>, Vec<f64>);
}

/// The default transformation, which changes nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPresolve;

impl Presolve for IdentityPresolve {
    fn presolve(&self, problem: &LpProblem) -> Result<LpProblem> {
        Ok(problem.clone())
    }

    fn postsolve(&self, x: Vec<f64>, y: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        (x, y)
    }
}

/// Solves `problem` with `config`.
pub fn solve(problem: &LpProblem, config: &SolverConfig) -> Result<SolveResult> {
    Solver::new(config.clone()).solve(problem)
}

/// Builder for a solve with optional hooks.
pub struct Solver<'a> {
    config: SolverConfig,
    observer: Option<&'a mut dyn SolveObserver>,
    presolve: Option<&'a dyn Presolve>,
    warm_start: Option<PrimalDualIterate>,
}

struct Evaluated {
    x: Vec<f64>,
    y: Vec<f64>,
    info: ConvergenceInfo,
}

impl Evaluated {
    fn snapshot(&self) -> Snapshot {
        Snapshot {
            x: self.x.clone(),
            y: self.y.clone(),
            lambda: self.info.lambda.clone(),
        }
    }
}

fn frobenius(lp: &PreparedLp) -> f64 {
    lp.k.matrix()
        .triplets()
        .map(|(_, _, v)| v * v)
        .sum::<f64>()
        .sqrt()
}

impl<'a> Solver<'a> {
    pub fn new(config: SolverConfig) -> Self {
        Solver {
            config,
            observer: None,
            presolve: None,
            warm_start: None,
        }
    }

    pub fn observer(mut self, observer: &'a mut dyn SolveObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn presolve(mut self, presolve: &'a dyn Presolve) -> Self {
        self.presolve = Some(presolve);
        self
    }

    /// Starting point in the original (unscaled) space. Ignored when
    /// fishnet is enabled.
    pub fn warm_start(mut self, start: PrimalDualIterate) -> Self {
        self.warm_start = Some(start);
        self
    }

    pub fn solve(mut self, problem: &LpProblem) -> Result<SolveResult> {
        let clock = Instant::now();
        let cfg = self.config.clone();
        cfg.validate()?;
        let issues = validate(problem);
        if !issues.is_empty() {
            return Err(Error::InvalidProblem(issues));
        }
        let identity = IdentityPresolve;
        let presolve: &dyn Presolve = self.presolve.unwrap_or(&identity);
        let original = PreparedLp::new(presolve.presolve(problem)?)?;
        let (n, m) = (original.n(), original.m());

        let mut fishnet_trajectory = None;
        let start = if cfg.enable_fishnet {
            let out = run_fishnet(&original, &cfg.fishnet)?;
            fishnet_trajectory = Some(out.trajectory);
            out.start
        } else if let Some(ws) = self.warm_start.take() {
            if ws.x.len() != n || ws.y.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "warm start has {}+{} entries, problem needs {}+{}",
                    ws.x.len(),
                    ws.y.len(),
                    n,
                    m
                )));
            }
            ws
        } else {
            PrimalDualIterate::zeros(n, m)
        };

        let scaling = if cfg.enable_scaling {
            ruiz_equilibrate(&original.k, cfg.ruiz_iterations, cfg.ruiz_tolerance)?
        } else {
            ScalingData::identity(m, n)
        };
        let scaled = PreparedLp::new(apply_scaling(&original.problem, &scaling))?;

        let est = spectral_norm_estimate(&scaled.k, cfg.power_iterations)?;
        let k_norm = if !est.degenerate && est.value > 0.0 {
            est.value
        } else {
            frobenius(&scaled)
        };
        let mut eta = if k_norm > 0.0 {
            cfg.step_size_factor / k_norm
        } else {
            1.0
        };
        let mut omega = initialize_primal_weight(scaled.c(), &scaled.q, cfg.eps_zero);
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.on_start(&scaled, StepSizes::new(eta, omega));
        }

        let (mut sx, mut sy) = scaling.scale_iterate(&start.x, &start.y);
        proj_box_in_place(&mut sx, scaled.lower(), scaled.upper());
        proj_dual_cone_in_place(&mut sy, scaled.m1());
        let mut z = PrimalDualIterate::new(sx, sy);

        let (q_norm, c_norm) = (original.q_norm, original.c_norm);
        let mut kkt_evaluations = 0u64;
        let mut evaluate = |it: &PrimalDualIterate| {
            kkt_evaluations += 1;
            let (mut x, mut y) = unscale_iterate(&it.x, &it.y, &scaling);
            // Unscaling can move a point sitting on a bound by one ulp.
            proj_box_in_place(&mut x, original.lower(), original.upper());
            proj_dual_cone_in_place(&mut y, original.m1());
            let info = convergence_info(&original, &x, &y);
            Evaluated { x, y, info }
        };

        let mut iterations = 0u64;
        let mut restarts = 0u64;
        let first = evaluate(&z);
        let mut state = RestartState::new(z.clone(), kkt_error(&first.info, omega)?, omega);
        let mut previous_snapshot = first.snapshot();
        let mut last_check = z.clone();

        let mut outcome: Option<(SolveStatus, Evaluated)> = None;
        if check_termination(&first.info, q_norm, c_norm, cfg.tolerance) {
            outcome = Some((SolveStatus::Optimal, first));
        } else if cfg.max_iterations == Some(0) {
            outcome = Some((SolveStatus::IterationLimit, first));
        }

        let mut kty = scaled.k.mul_t(&z.y);
        while outcome.is_none() {
            iterations += 1;
            let step = if cfg.enable_adaptive_step {
                adaptive_step_cached(&z, &kty, omega, eta, iterations, &scaled).map(|out| {
                    eta = out.eta_next;
                    (out.iterate, out.kty, out.eta_used)
                })
            } else {
                let (next, next_kty) =
                    pdhg_step_cached(&z, &kty, StepSizes::new(eta, omega), cfg.theta, &scaled);
                Ok((next, next_kty, eta))
            };
            let (next, next_kty, eta_used) = match step {
                Ok(s) => s,
                Err(Error::NumericalFailure(_)) => {
                    outcome = Some((SolveStatus::NumericalFailure, evaluate(&z)));
                    break;
                }
                Err(e) => return Err(e),
            };
            if let Some(obs) = self.observer.as_deref_mut() {
                obs.on_step(&StepEvent {
                    iteration: iterations,
                    previous: &z,
                    current: &next,
                    eta: eta_used,
                    omega,
                });
            }
            z = next;
            kty = next_kty;
            state.update_average(&z, eta_used)?;

            let at_limit = cfg.max_iterations == Some(iterations);
            if iterations.is_multiple_of(cfg.check_interval) || at_limit {
                if !z.is_finite() {
                    outcome = Some((SolveStatus::NumericalFailure, evaluate(&z)));
                    break;
                }
                let current = evaluate(&z);
                if check_termination(&current.info, q_norm, c_norm, cfg.tolerance) {
                    outcome = Some((SolveStatus::Optimal, current));
                    break;
                }
                let average = if cfg.enable_restarts && state.has_average() {
                    let avg = evaluate(&state.running_average);
                    if check_termination(&avg.info, q_norm, c_norm, cfg.tolerance) {
                        outcome = Some((SolveStatus::Optimal, avg));
                        break;
                    }
                    Some(avg)
                } else {
                    None
                };

                if cfg.enable_infeasibility_detection {
                    let snap = current.snapshot();
                    let window = DeltaWindow {
                        previous: &previous_snapshot,
                        current: &snap,
                    };
                    match detect(&window, &original, omega, cfg.infeasibility_tolerance) {
                        InfeasibilityStatus::PrimalInfeasible => {
                            outcome = Some((SolveStatus::PrimalInfeasible, current));
                            break;
                        }
                        InfeasibilityStatus::DualInfeasible => {
                            outcome = Some((SolveStatus::DualInfeasible, current));
                            break;
                        }
                        InfeasibilityStatus::None => previous_snapshot = snap,
                    }
                }

                let kkt_current = kkt_error(&current.info, omega)?;
                let kkt_average = match &average {
                    Some(a) => Some(kkt_error(&a.info, omega)?),
                    None => None,
                };
                let mut fired = None;
                if cfg.enable_restarts {
                    let (kind, kkt_candidate) = match kkt_average {
                        Some(ka) => {
                            let kind = choose_candidate(kkt_current, ka);
                            let kkt = if kind == CandidateKind::Current { kkt_current } else { ka };
                            (kind, kkt)
                        }
                        None => (CandidateKind::Current, kkt_current),
                    };
                    fired = should_restart(&state, kkt_candidate, iterations, &cfg.restart);
                    if fired.is_some() {
                        restarts += 1;
                        let (candidate, evaluated) = match kind {
                            CandidateKind::Current => (z.clone(), current),
                            CandidateKind::Average => (
                                state.running_average.clone(),
                                average.expect("average exists when chosen"),
                            ),
                        };
                        if cfg.enable_primal_weight_updates {
                            omega = primal_weight_update(
                                &candidate.x,
                                &state.z_restart_start.x,
                                &candidate.y,
                                &state.z_restart_start.y,
                                omega,
                                cfg.eps_zero,
                            );
                        }
                        let kkt_new = kkt_error(&evaluated.info, omega)?;
                        state.restart_to(candidate.clone(), kkt_new);
                        state.omega_n = omega;
                        if kind == CandidateKind::Average {
                            kty = scaled.k.mul_t(&candidate.y);
                            z = candidate;
                        }
                        if cfg.enable_infeasibility_detection {
                            previous_snapshot = evaluated.snapshot();
                        }
                    } else {
                        state.last_candidate_kkt = kkt_candidate;
                    }
                } else if cfg.enable_primal_weight_updates {
                    omega = primal_weight_update(
                        &z.x,
                        &last_check.x,
                        &z.y,
                        &last_check.y,
                        omega,
                        cfg.eps_zero,
                    );
                    last_check = z.clone();
                }

                if let Some(obs) = self.observer.as_deref_mut() {
                    obs.on_check(&CheckEvent {
                        iteration: iterations,
                        kkt_current,
                        kkt_average,
                        restart: fired,
                        omega,
                    });
                }
                if at_limit {
                    outcome = Some((SolveStatus::IterationLimit, evaluate(&z)));
                    break;
                }
            }

            if let Some(limit) = cfg.time_limit {
                if clock.elapsed().as_secs_f64() >= limit {
                    outcome = Some((SolveStatus::TimeLimit, evaluate(&z)));
                    break;
                }
            }
        }

        let (status, point) = outcome.expect("loop exits with an outcome");
        let offset = original.problem.objective_offset;
        let info = point.info;
        let (x, y) = presolve.postsolve(point.x, point.y);
        let matvec_count = original.k.product_count() + scaled.k.product_count();
        Ok(SolveResult {
            status,
            x,
            y,
            primal_objective: info.primal_objective + offset,
            dual_objective: info.dual_objective + offset,
            primal_residual: info.primal_residual_norm,
            dual_residual: info.dual_residual_norm,
            gap: info.gap_abs,
            lambda: info.lambda,
            iterations,
            restarts,
            kkt_evaluations,
            wall_time: clock.elapsed().as_secs_f64(),
            matvec_count,
            fishnet_trajectory,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    fn box_sum() -> LpProblem {
        // min x + y  s.t.  x + y >= 1,  0 <= x, y <= 1
        LpProblem {
            name: "sum".into(),
            c: vec![1.0, 1.0],
            g: SparseMatrix::from_dense(&[vec![1.0, 1.0]]).unwrap(),
            h: vec![1.0],
            a: SparseMatrix::zeros(0, 2),
            b: vec![],
            lower: vec![0.0; 2],
            upper: vec![1.0; 2],
            objective_offset: 0.0,
        }
    }

    #[test]
    fn box_sum_is_solved() {
        let r = solve(&box_sum(), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.primal_objective - 1.0).abs() < 1e-3);
    }

    #[test]
    fn fixed_variable_needs_no_iterations() {
        let p = LpProblem {
            name: "fixed".into(),
            c: vec![5.0],
            g: SparseMatrix::zeros(0, 1),
            h: vec![],
            a: SparseMatrix::zeros(0, 1),
            b: vec![],
            lower: vec![2.0],
            upper: vec![2.0],
            objective_offset: 0.0,
        };
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.iterations <= 100);
        assert!((r.primal_objective - 10.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_certified() {
        let p = LpProblem {
            name: "infeasible".into(),
            c: vec![0.0],
            g: SparseMatrix::from_dense(&[vec![1.0], vec![-1.0]]).unwrap(),
            h: vec![1.0, 0.0],
            a: SparseMatrix::zeros(0, 1),
            b: vec![],
            lower: vec![0.0],
            upper: vec![f64::INFINITY],
            objective_offset: 0.0,
        };
        let r = solve(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::PrimalInfeasible);
        assert!(r.iterations < 100_000);
    }

    #[test]
    fn iteration_limit_is_exact() {
        let cfg = SolverConfig {
            max_iterations: Some(7),
            tolerance: 1e-12,
            ..SolverConfig::default()
        };
        let r = solve(&box_sum(), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::IterationLimit);
        assert_eq!(r.iterations, 7);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SolverConfig {
            check_interval: 0,
            ..SolverConfig::default()
        };
        assert!(solve(&box_sum(), &cfg).is_err());
    }

    #[test]
    fn fingerprints_distinguish_configs() {
        let a = SolverConfig::default().fingerprint();
        let b = SolverConfig::baseline().fingerprint();
        assert_eq!(a.len(), 12);
        assert_ne!(a, b);
        assert_eq!(a, SolverConfig::default().fingerprint());
    }
}
