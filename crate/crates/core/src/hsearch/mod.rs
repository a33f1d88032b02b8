//! Branch-and-bound search over assignment ranges, pruning every range
//! whose post-oracle state is separable.

mod cost;

use serde::{Deserialize, Serialize};

pub use cost::{cost_model, CostReport};

use crate::entdetect::{CopyEstimatorConfig, DetectionVerdict, Detector, Route, Verdict};
use crate::error::{Error, Result};
use crate::formula::{Assignment, Formula, DEFAULT_EXHAUSTIVE_CAP};
use crate::qsim::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPolicy {
    #[default]
    LowerHalfFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub route: Route,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<CopyEstimatorConfig>,
    pub split: SplitPolicy,
    /// Declare the upper half entangled, without a detector call, when the
    /// parent is entangled and the lower half separable.
    pub infer_complement: bool,
    pub multi_solution: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_solutions: Option<usize>,
    /// Maximum detector calls before giving up.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

impl SearchConfig {
    pub fn new(route: Route) -> Self {
        Self {
            route,
            mode: Mode::Minimal,
            estimator: None,
            split: SplitPolicy::LowerHalfFirst,
            infer_complement: true,
            multi_solution: false,
            max_solutions: None,
            budget: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_estimator(mut self, cfg: CopyEstimatorConfig) -> Self {
        self.estimator = Some(cfg);
        self
    }

    pub fn with_inference(mut self, on: bool) -> Self {
        self.infer_complement = on;
        self
    }

    pub fn with_multi_solution(mut self, on: bool) -> Self {
        self.multi_solution = on;
        self
    }

    pub fn with_max_solutions(mut self, max: usize) -> Self {
        self.max_solutions = Some(max);
        self
    }

    pub fn with_budget(mut self, calls: u64) -> Self {
        self.budget = Some(calls);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (self.route == Route::SpaEstimated, &self.estimator) {
            (true, None) => Err(Error::InvalidArgument("the spa-estimated route needs an estimator config".into())),
            (false, Some(_)) => Err(Error::InvalidArgument(format!(
                "an estimator config is only meaningful for spa-estimated, not {}",
                self.route
            ))),
            (true, Some(cfg)) => cfg.validate(),
            (false, None) => Ok(()),
        }?;
        if self.max_solutions == Some(0) {
            return Err(Error::InvalidArgument("max_solutions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    Detector,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub depth: u32,
    pub lo: u64,
    pub hi: u64,
    pub verdict: Verdict,
    pub route: Route,
    pub evidence: Evidence,
    pub statistic: Option<f64>,
    pub copies: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub events: Vec<TraceEvent>,
    pub oracle_queries: u64,
    pub detector_calls: u64,
    pub classical_evaluations: u64,
    /// Total width of ranges discarded as solution-free.
    pub pruned_mass: u64,
    /// Total width of ranges still pending when the search stopped.
    pub unexplored_mass: u64,
    /// Width-1 ranges judged entangled whose assignment failed the
    /// classical check.
    pub rejected_leaves: u64,
    pub depth_reached: u32,
    /// Width of ranges judged entangled at each depth.
    pub surviving_mass: Vec<u64>,
}

impl SearchTrace {
    fn survive(&mut self, depth: u32, width: u64) {
        let d = depth as usize;
        if self.surviving_mass.len() <= d {
            self.surviving_mass.resize(d + 1, 0);
        }
        self.surviving_mass[d] += width;
    }

    fn record(&mut self, depth: u32, lo: u64, hi: u64, v: &DetectionVerdict, evidence: Evidence) {
        self.depth_reached = self.depth_reached.max(depth);
        if v.verdict.is_entangled() {
            self.survive(depth, hi - lo + 1);
        }
        self.events.push(TraceEvent {
            depth,
            lo,
            hi,
            verdict: v.verdict,
            route: v.route,
            evidence,
            statistic: v.statistic,
            copies: v.copies,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Found,
    NoneExist,
    AllSolutions,
    BudgetExhausted,
}

impl SearchStatus {
    pub fn name(self) -> &'static str {
        match self {
            SearchStatus::Found => "found",
            SearchStatus::NoneExist => "none-exist",
            SearchStatus::AllSolutions => "all-solutions",
            SearchStatus::BudgetExhausted => "budget-exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub solutions: Vec<Assignment>,
    pub status: SearchStatus,
    pub trace: SearchTrace,
}

#[derive(Debug, Clone, Copy)]
enum Knowledge {
    Entangled,
    /// Not yet tested; `sibling_separable` marks an upper half whose lower
    /// sibling already tested separable.
    Unknown {
        sibling_separable: bool,
    },
}

#[derive(Debug, Clone, Copy)]
struct Node {
    lo: u64,
    hi: u64,
    depth: u32,
    knowledge: Knowledge,
}

impl Node {
    fn width(&self) -> u64 {
        self.hi - self.lo + 1
    }
}

struct Run<'a> {
    formula: &'a Formula,
    cfg: &'a SearchConfig,
    detector: Detector,
    trace: SearchTrace,
    solutions: Vec<Assignment>,
}

enum Stop {
    Budget,
}

impl<'a> Run<'a> {
    fn detect(&mut self, lo: u64, hi: u64, depth: u32) -> Result<std::result::Result<Verdict, Stop>> {
        if self.cfg.budget.is_some_and(|b| self.trace.detector_calls >= b) {
            return Ok(Err(Stop::Budget));
        }
        let v = self.detector.test_range(self.formula, lo, hi, self.trace.detector_calls)?;
        self.trace.detector_calls += 1;
        self.trace.oracle_queries += 1;
        self.trace.record(depth, lo, hi, &v, Evidence::Detector);
        Ok(Ok(v.verdict))
    }

    fn verify(&mut self, index: u64) -> bool {
        self.trace.classical_evaluations += 1;
        self.formula.eval_index(index)
    }

    fn enough(&self) -> bool {
        let cap = if self.cfg.multi_solution { self.cfg.max_solutions } else { Some(1) };
        cap.is_some_and(|c| self.solutions.len() >= c)
    }

    fn finish(self, status: SearchStatus) -> SearchOutcome {
        SearchOutcome { solutions: self.solutions, status, trace: self.trace }
    }
}

/// Runs the range search on `formula`.
///
/// The full range is tested first; a separable verdict is resolved into
/// none-exist or all-solutions by evaluating assignment `0…0`. Otherwise
/// entangled ranges are halved depth-first, lower half first, and width-1
/// entangled ranges are classically verified before being reported.
pub fn search(formula: &Formula, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    let n = formula.num_vars();
    let detector = Detector::for_formula(cfg.route, cfg.mode, n, cfg.estimator)?;
    let mut run = Run { formula, cfg, detector, trace: SearchTrace::default(), solutions: Vec::new() };
    let full_hi = formula.space_size() - 1;

    let Ok(root) = run.detect(0, full_hi, 0)? else {
        return Ok(run.finish(SearchStatus::BudgetExhausted));
    };
    if root == Verdict::Separable {
        return Ok(if run.verify(0) {
            run.solutions.push(Assignment::from_index(n, 0)?);
            run.finish(SearchStatus::AllSolutions)
        } else {
            run.trace.pruned_mass = formula.space_size();
            run.finish(SearchStatus::NoneExist)
        });
    }

    let mut stack = vec![Node { lo: 0, hi: full_hi, depth: 0, knowledge: Knowledge::Entangled }];
    while let Some(node) = stack.pop() {
        if run.enough() {
            stack.push(node);
            break;
        }
        if let Knowledge::Unknown { sibling_separable } = node.knowledge {
            let Ok(verdict) = run.detect(node.lo, node.hi, node.depth)? else {
                stack.push(node);
                run.trace.unexplored_mass = stack.iter().map(Node::width).sum();
                return Ok(run.finish(SearchStatus::BudgetExhausted));
            };
            if verdict == Verdict::Separable {
                run.trace.pruned_mass += node.width();
                if sibling_separable {
                    // Both halves of an entangled parent look empty. Ask the
                    // parent again before trusting either answer.
                    let (lo, hi) = (node.lo - node.width(), node.hi);
                    match run.detect(lo, hi, node.depth - 1)? {
                        Ok(Verdict::Separable) => {}
                        _ => {
                            run.trace.unexplored_mass = stack.iter().map(Node::width).sum();
                            return Ok(run.finish(SearchStatus::BudgetExhausted));
                        }
                    }
                }
                continue;
            }
        }

        if node.width() == 1 {
            if run.verify(node.lo) {
                run.solutions.push(Assignment::from_index(n, node.lo)?);
            } else {
                run.trace.rejected_leaves += 1;
                run.trace.pruned_mass += 1;
            }
            continue;
        }

        let half = node.width() / 2;
        let depth = node.depth + 1;
        let lower = (node.lo, node.lo + half - 1);
        let upper = (node.lo + half, node.hi);
        let Ok(lower_verdict) = run.detect(lower.0, lower.1, depth)? else {
            stack.push(node);
            run.trace.unexplored_mass = stack.iter().map(Node::width).sum();
            return Ok(run.finish(SearchStatus::BudgetExhausted));
        };
        let upper_knowledge = match lower_verdict {
            Verdict::Separable => {
                run.trace.pruned_mass += half;
                if cfg.infer_complement {
                    let inferred = DetectionVerdict {
                        verdict: Verdict::Entangled,
                        route: cfg.route,
                        statistic: None,
                        threshold: None,
                        copies: None,
                        solutions: None,
                    };
                    run.trace.record(depth, upper.0, upper.1, &inferred, Evidence::Inferred);
                    Knowledge::Entangled
                } else {
                    Knowledge::Unknown { sibling_separable: true }
                }
            }
            Verdict::Entangled => Knowledge::Unknown { sibling_separable: false },
        };
        stack.push(Node { lo: upper.0, hi: upper.1, depth, knowledge: upper_knowledge });
        if lower_verdict == Verdict::Entangled {
            stack.push(Node { lo: lower.0, hi: lower.1, depth, knowledge: Knowledge::Entangled });
        }
    }

    run.trace.unexplored_mass = stack.iter().map(Node::width).sum();
    let status = if run.solutions.is_empty() { SearchStatus::NoneExist } else { SearchStatus::Found };
    Ok(run.finish(status))
}

/// Exhaustive ascending scan that stops at the first solution.
pub fn classical_baseline(formula: &Formula) -> Result<SearchOutcome> {
    let n = formula.num_vars();
    if n > DEFAULT_EXHAUSTIVE_CAP {
        return Err(Error::CapExceeded { what: "variables", value: n as u64, cap: DEFAULT_EXHAUSTIVE_CAP as u64 });
    }
    let size = formula.space_size();
    let first = (0..size).find(|&x| formula.eval_index(x));
    let evaluations = first.map_or(size, |x| x + 1);
    let trace = SearchTrace {
        oracle_queries: evaluations,
        classical_evaluations: evaluations,
        pruned_mass: evaluations - first.is_some() as u64,
        unexplored_mass: size - evaluations,
        ..SearchTrace::default()
    };
    Ok(match first {
        Some(x) => SearchOutcome { solutions: vec![Assignment::from_index(n, x)?], status: SearchStatus::Found, trace },
        None => SearchOutcome { solutions: Vec::new(), status: SearchStatus::NoneExist, trace },
    })
}
