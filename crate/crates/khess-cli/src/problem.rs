//! JSON schema for `khess solve` problem files. Example:
//!
//! ```json
//! {
//!   "graph": {
//!     "mode": "axisym",
//!     "n": 3,
//!     "resolution": 64,
//!     "profile": { "kind": "sphere", "r0": 1.3 }
//!   },
//!   "equation": {
//!     "k": 2,
//!     "rhs": { "kind": "general", "expr": "3 * cosh(1)^2 / sinh(1)^2" }
//!   },
//!   "solver": { "mode": "newton", "max_iter": 40 }
//! }
//! ```
//!
//! The `rhs` kinds are `general` (an expression in `r`, `theta`, `psi`,
//! `nu_r`, `nu_theta`, `nu_psi`, `u`) and `curvature_measure` (exponent
//! `p` and a position-only `density` expression). The `solver` block is
//! optional; every field defaults to the library configuration for the
//! chosen mode.

use khess::geom::{AxisymProfile, RadialGraph, Sphere2Profile};
use khess::solve::{PrescribedRhs, SolveMode, SolverConfig};
use khess::{Error, Result};
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub graph: GraphSpec,
    pub equation: EquationSpec,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Axisym {
        n: usize,
        resolution: usize,
        profile: AxisymProfileSpec,
    },
    Sphere2 {
        resolution: [usize; 2],
        profile: Sphere2ProfileSpec,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisymProfileSpec {
    Sphere { r0: f64 },
    Perturbed { r0: f64, amp: f64 },
    Trig { r0: f64, a1: f64, a2: f64 },
    Table { values: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sphere2ProfileSpec {
    Sphere { r0: f64 },
    Tilted { r0: f64, a: f64, b: f64 },
    Table { values: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub k: usize,
    pub rhs: RhsSpec,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsSpec {
    General { expr: String },
    CurvatureMeasure { p: f64, density: String },
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub mode: Option<String>,
    pub tau: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub safeguard_frac: Option<f64>,
    pub fd_step: Option<f64>,
}

impl ProblemFile {
    pub fn build_graph(&self) -> Result<RadialGraph> {
        match &self.graph {
            GraphSpec::Axisym {
                n,
                resolution,
                profile,
            } => {
                let profile = match profile {
                    AxisymProfileSpec::Sphere { r0 } => AxisymProfile::Sphere { r0: *r0 },
                    AxisymProfileSpec::Perturbed { r0, amp } => {
                        AxisymProfile::Perturbed { r0: *r0, amp: *amp }
                    }
                    AxisymProfileSpec::Trig { r0, a1, a2 } => AxisymProfile::Trig {
                        r0: *r0,
                        a1: *a1,
                        a2: *a2,
                    },
                    AxisymProfileSpec::Table { values } => AxisymProfile::Table(values.clone()),
                };
                RadialGraph::axisym(*n, *resolution, profile)
            }
            GraphSpec::Sphere2 {
                resolution,
                profile,
            } => {
                let profile = match profile {
                    Sphere2ProfileSpec::Sphere { r0 } => Sphere2Profile::Sphere { r0: *r0 },
                    Sphere2ProfileSpec::Tilted { r0, a, b } => Sphere2Profile::Tilted {
                        r0: *r0,
                        a: *a,
                        b: *b,
                    },
                    Sphere2ProfileSpec::Table { values } => Sphere2Profile::Table(values.clone()),
                };
                RadialGraph::sphere2(resolution[0], resolution[1], profile)
            }
        }
    }

    pub fn build_rhs(&self) -> Result<PrescribedRhs> {
        match &self.equation.rhs {
            RhsSpec::General { expr } => PrescribedRhs::general(expr),
            RhsSpec::CurvatureMeasure { p, density } => {
                PrescribedRhs::curvature_measure(*p, density)
            }
        }
    }

    pub fn build_config(&self) -> Result<SolverConfig> {
        let k = self.equation.k;
        let spec = &self.solver;
        let mut cfg = match spec.mode.as_deref() {
            None | Some("newton") => SolverConfig::newton(k),
            Some("flow") => SolverConfig::flow(k, spec.tau.unwrap_or(0.5)),
            Some(other) => {
                return Err(Error::Parse(format!(
                    "solver mode must be newton or flow, got {other:?}"
                )))
            }
        };
        if let (SolveMode::Newton, Some(_)) = (&cfg.mode, spec.tau) {
            return Err(Error::Parse("tau only applies to flow mode".into()));
        }
        if let Some(v) = spec.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = spec.tol {
            cfg.tol = v;
        }
        if let Some(v) = spec.safeguard_frac {
            cfg.safeguard_frac = v;
        }
        if let Some(v) = spec.fd_step {
            cfg.fd_step = v;
        }
        Ok(cfg)
    }
}
