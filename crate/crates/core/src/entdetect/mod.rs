//! Separability tests for bipartite states.
//!
//! Four routes decide whether a post-oracle state is entangled: the
//! analytic ground truth (solution count), the purity of a pure state's
//! marginal, the partial-transpose test, and the threshold test on the
//! structural physical approximation of `I ⊗ Λ` (computed exactly or
//! estimated from simulated copies).

mod estimator;
mod maps;

use serde::{Deserialize, Serialize};

pub use estimator::{error_bound, estimate_min_eigenvalue, CopyEstimatorConfig, SpectrumSampler};
pub use maps::{
    spa_threshold, spa_weight_closed_form, ChoiState, LinearMap, PositiveMapSpec, SpaMap, BISECTION_STEPS,
    DEFAULT_MAX_MAP_DIM, MAX_MAP_DIM,
};

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::linalg::{self, EIGEN_TOL};
use crate::oracle::post_oracle_state;
use crate::qsim::{DensityOp, Mode, RegisterLayout, Subsystem};

/// Largest variable count the analytic route will count exhaustively.
pub const ANALYTIC_MAX_VARS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Separable,
    Entangled,
}

impl Verdict {
    pub fn is_entangled(self) -> bool {
        self == Verdict::Entangled
    }

    fn from_entangled(entangled: bool) -> Self {
        if entangled {
            Verdict::Entangled
        } else {
            Verdict::Separable
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Analytic,
    Purity,
    Ppt,
    SpaExact,
    SpaEstimated,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Analytic => "analytic",
            Route::Purity => "purity",
            Route::Ppt => "ppt",
            Route::SpaExact => "spa-exact",
            Route::SpaEstimated => "spa-estimated",
        }
    }
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionVerdict {
    pub verdict: Verdict,
    pub route: Route,
    /// Minimum eigenvalue, its estimate, or the marginal purity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copies: Option<u64>,
    /// Solutions in the tested range (analytic route only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<u64>,
}

fn check_bipartite(rho: &DensityOp) -> Result<()> {
    let (da, db) = rho.dims();
    if da < 2 || db < 2 {
        return Err(Error::DimensionMismatch {
            expected: "two subsystems of dimension at least 2".into(),
            actual: format!("({da}, {db})"),
        });
    }
    Ok(())
}

/// Peres test: entangled iff the partial transpose on B has an eigenvalue
/// below `-1e-10`. Conclusive on 2⊗2, 2⊗3 and on pure states.
pub fn ppt_test(rho: &DensityOp) -> Result<DetectionVerdict> {
    check_bipartite(rho)?;
    let (da, db) = rho.dims();
    let min = linalg::min_eigenvalue(&linalg::partial_transpose_b(rho.matrix(), da, db));
    Ok(DetectionVerdict {
        verdict: Verdict::from_entangled(min < -EIGEN_TOL),
        route: Route::Ppt,
        statistic: Some(min),
        threshold: Some(0.0),
        copies: None,
        solutions: None,
    })
}

/// A pure state is a product iff its marginal is pure.
pub fn purity_test(rho: &DensityOp) -> Result<DetectionVerdict> {
    check_bipartite(rho)?;
    let global = rho.purity();
    if (global - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("the purity route needs a pure state, got Tr(ρ²) = {global}")));
    }
    Ok(purity_verdict(rho.partial_trace(Subsystem::B).purity()))
}

fn purity_verdict(marginal_purity: f64) -> DetectionVerdict {
    DetectionVerdict {
        verdict: Verdict::from_entangled(marginal_purity < 1.0 - EIGEN_TOL),
        route: Route::Purity,
        statistic: Some(marginal_purity),
        threshold: Some(1.0),
        copies: None,
        solutions: None,
    }
}

/// Separable iff `λ_min((I ⊗ Λ)~(ρ)) ≥ threshold - 1e-10`.
pub fn spa_test_exact(rho: &DensityOp, spa: &SpaMap) -> Result<DetectionVerdict> {
    let min = spa.apply(rho)?.min_eigenvalue();
    Ok(DetectionVerdict {
        verdict: Verdict::from_entangled(min < spa.threshold() - EIGEN_TOL),
        route: Route::SpaExact,
        statistic: Some(min),
        threshold: Some(spa.threshold()),
        copies: None,
        solutions: None,
    })
}

/// Majority vote over `cfg.repetitions` estimates, seeded
/// `cfg.seed + repetition`.
pub fn spa_test_estimated(rho: &DensityOp, spa: &SpaMap, cfg: &CopyEstimatorConfig) -> Result<DetectionVerdict> {
    spa_test_estimated_call(rho, spa, cfg, 0)
}

fn spa_test_estimated_call(
    rho: &DensityOp,
    spa: &SpaMap,
    cfg: &CopyEstimatorConfig,
    call: u64,
) -> Result<DetectionVerdict> {
    cfg.validate()?;
    let sampler = SpectrumSampler::new(&spa.apply(rho)?);
    let threshold = spa.threshold();
    let mut estimates: Vec<f64> =
        (0..cfg.repetitions).map(|rep| sampler.estimate(cfg.copies, cfg.derived_seed(call, rep))).collect();
    let entangled_votes = estimates.iter().filter(|&&e| e < threshold - EIGEN_TOL).count();
    estimates.sort_by(f64::total_cmp);
    Ok(DetectionVerdict {
        verdict: Verdict::from_entangled(2 * entangled_votes > estimates.len()),
        route: Route::SpaEstimated,
        statistic: Some(estimates[estimates.len() / 2]),
        threshold: Some(threshold),
        copies: Some(cfg.copies * cfg.repetitions as u64),
        solutions: None,
    })
}

/// Ground truth: the post-oracle state of `[lo, hi]` is separable iff the
/// range holds no solution, or it is the full space and every assignment is
/// a solution.
pub fn analytic_test(formula: &Formula, lo: u64, hi: u64) -> Result<DetectionVerdict> {
    let n = formula.num_vars();
    if n > ANALYTIC_MAX_VARS {
        return Err(Error::CapExceeded {
            what: "variables (analytic route)",
            value: n as u64,
            cap: ANALYTIC_MAX_VARS as u64,
        });
    }
    let stats = formula.count_solutions(lo, hi)?;
    let full = lo == 0 && hi == formula.space_size() - 1;
    let separable = stats.solutions == 0 || (full && stats.solutions == formula.space_size());
    Ok(DetectionVerdict {
        verdict: Verdict::from_entangled(!separable),
        route: Route::Analytic,
        statistic: None,
        threshold: None,
        copies: None,
        solutions: Some(stats.solutions),
    })
}

/// A configured detection route, applicable to formula ranges and to
/// explicit states.
#[derive(Debug, Clone)]
pub struct Detector {
    route: Route,
    mode: Mode,
    spa: Option<SpaMap>,
    estimator: Option<CopyEstimatorConfig>,
}

impl Detector {
    pub fn analytic() -> Self {
        Self { route: Route::Analytic, mode: Mode::Minimal, spa: None, estimator: None }
    }

    pub fn purity(mode: Mode) -> Self {
        Self { route: Route::Purity, mode, spa: None, estimator: None }
    }

    pub fn ppt(mode: Mode) -> Self {
        Self { route: Route::Ppt, mode, spa: None, estimator: None }
    }

    pub fn spa_exact(mode: Mode, spa: SpaMap) -> Self {
        Self { route: Route::SpaExact, mode, spa: Some(spa), estimator: None }
    }

    pub fn spa_estimated(mode: Mode, spa: SpaMap, cfg: CopyEstimatorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { route: Route::SpaEstimated, mode, spa: Some(spa), estimator: Some(cfg) })
    }

    /// Detector for `route` on `n`-variable range states, building the
    /// transpose SPA at the matching local dimension where needed.
    pub fn for_formula(route: Route, mode: Mode, n: usize, estimator: Option<CopyEstimatorConfig>) -> Result<Self> {
        let spa_for = || -> Result<SpaMap> {
            let layout = RegisterLayout::new(n, mode)?;
            if layout.query_dim() != layout.answer_dim() {
                return Err(Error::DimensionMismatch {
                    expected: "equal query and answer dimensions for the SPA route".into(),
                    actual: format!("({}, {})", layout.query_dim(), layout.answer_dim()),
                });
            }
            SpaMap::transpose(layout.answer_dim())
        };
        Ok(match route {
            Route::Analytic => Self::analytic(),
            Route::Purity => Self::purity(mode),
            Route::Ppt => Self::ppt(mode),
            Route::SpaExact => Self::spa_exact(mode, spa_for()?),
            Route::SpaEstimated => {
                let cfg = estimator.ok_or_else(|| {
                    Error::InvalidArgument("the spa-estimated route needs an estimator config".into())
                })?;
                Self::spa_estimated(mode, spa_for()?, cfg)?
            }
        })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn spa(&self) -> Option<&SpaMap> {
        self.spa.as_ref()
    }

    pub fn estimator(&self) -> Option<&CopyEstimatorConfig> {
        self.estimator.as_ref()
    }

    /// Tests an explicit bipartite state. `call` separates the seeds of
    /// successive estimated calls.
    pub fn test_state(&self, rho: &DensityOp, call: u64) -> Result<DetectionVerdict> {
        match self.route {
            Route::Analytic => Err(Error::InvalidArgument("the analytic route needs a formula and range".into())),
            Route::Purity => purity_test(rho),
            Route::Ppt => ppt_test(rho),
            Route::SpaExact => spa_test_exact(rho, self.spa_map()),
            Route::SpaEstimated => spa_test_estimated_call(rho, self.spa_map(), self.estimator_cfg(), call),
        }
    }

    /// Tests the post-oracle state of `O_[lo,hi]` applied to the uniform
    /// superposition.
    pub fn test_range(&self, formula: &Formula, lo: u64, hi: u64, call: u64) -> Result<DetectionVerdict> {
        if self.route == Route::Analytic {
            return analytic_test(formula, lo, hi);
        }
        let layout = RegisterLayout::new(formula.num_vars(), self.mode)?;
        let psi = post_oracle_state(formula, lo, hi, layout)?;
        if self.route == Route::Purity {
            return Ok(purity_verdict(psi.marginal(Subsystem::B).purity()));
        }
        self.test_state(&DensityOp::from_state(&psi)?, call)
    }

    fn spa_map(&self) -> &SpaMap {
        self.spa.as_ref().expect("SPA routes are built with a map")
    }

    fn estimator_cfg(&self) -> &CopyEstimatorConfig {
        self.estimator.as_ref().expect("the estimated route is built with a config")
    }
}
