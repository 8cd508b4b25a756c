//! Prescribed-curvature solves on radial graphs.
//!
//! The unknown is the nodal radius vector of a [`RadialGraph`]; the
//! residual at a node is `sigma_k(kappa) - f` with the right-hand side
//! evaluated from position, outer normal, and support function. A damped
//! Newton iteration with a finite-difference Jacobian drives the sup
//! norm of the residual to tolerance, and every accepted iterate must
//! stay strictly inside the `sigma_k` cone, keep the right-hand side
//! positive, and keep all radii positive. A log-ratio flow update is
//! available as a Jacobian-free alternative.
//!
//! Axisymmetric Jacobians use a 5-coloring of the nodes: a radius only
//! influences residuals within stencil distance two, and the pole
//! reflection keeps that window intact, so columns of the same color
//! never overlap and five graph evaluations assemble the full matrix.
//! The latitude-longitude mode gets one column per node instead; its
//! cross-pole ghost rule shifts columns by half a period, which defeats
//! any congruence coloring near the poles.

mod expr;

pub use expr::{Expr, VarCtx};

use serde::Serialize;

use crate::geom::{FrameOrder, RadialGraph, SurfaceJet};
use crate::symm::{in_gamma_k, sigma};
use crate::{Error, Result};

/// Required relative decrease per unit damping; Armijo-style but on the
/// sup norm.
const SUFFICIENT_DECREASE: f64 = 1e-4;

/// Damping factors below this abort the solve as non-convergent.
const DAMPING_FLOOR: f64 = 1e-12;

/// Right-hand side of `sigma_k(kappa) = f`.
#[derive(Debug, Clone)]
pub enum PrescribedRhs {
    /// `f(X, nu, u)`: the expression may read every node variable.
    General { f: Expr },
    /// `u^p phi(X)` with `p` in `(-inf, 0)` or `(0, 1]`; `phi` may only
    /// read position (`r`, `theta`, `psi`).
    CurvatureMeasure { p: f64, phi: Expr },
}

impl PrescribedRhs {
    pub fn general(src: &str) -> Result<Self> {
        Ok(Self::General { f: Expr::parse(src)? })
    }

    pub fn curvature_measure(p: f64, src: &str) -> Result<Self> {
        if !p.is_finite() || p == 0.0 || p > 1.0 {
            return Err(Error::Domain(format!(
                "measure exponent must be nonzero and at most 1, got {p}"
            )));
        }
        let phi = Expr::parse(src)?;
        for banned in ["nu_r", "nu_theta", "nu_psi", "u"] {
            if phi.uses(banned) {
                return Err(Error::Domain(format!(
                    "measure density may only depend on position, but reads {banned:?}"
                )));
            }
        }
        Ok(Self::CurvatureMeasure { p, phi })
    }

    pub fn eval(&self, ctx: &VarCtx) -> f64 {
        match self {
            Self::General { f } => f.eval(ctx),
            Self::CurvatureMeasure { p, phi } => ctx.u.powf(*p) * phi.eval(ctx),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::General { f } => f.source().to_string(),
            Self::CurvatureMeasure { p, phi } => format!("u^{p} * ({})", phi.source()),
        }
    }
}

fn ctx_from_jet(jet: &SurfaceJet) -> VarCtx {
    VarCtx {
        r: jet.radius,
        theta: jet.theta,
        psi: jet.psi.unwrap_or(0.0),
        nu_r: jet.nu[0],
        nu_theta: jet.nu.get(1).copied().unwrap_or(0.0),
        nu_psi: jet.nu.get(2).copied().unwrap_or(0.0),
        u: jet.u,
    }
}

/// Residual of `sigma_k(kappa) = f` over a graph, with cone diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub residual: Vec<f64>,
    pub sup_norm: f64,
    /// Smallest per-node cone margin; positive iff `admissible`.
    pub cone_margin: f64,
    pub admissible: bool,
    pub rhs_min: f64,
}

/// Evaluates the residual without judging it; non-finite right-hand
/// sides poison `rhs_min` and `sup_norm` so callers reject uniformly.
fn eval_field(graph: &RadialGraph, rhs: &PrescribedRhs, k: usize) -> Result<ResidualField> {
    let jets = graph.jets(0, FrameOrder::Standard)?;
    let mut residual = Vec::with_capacity(jets.len());
    let mut sup = 0.0_f64;
    let mut margin = f64::INFINITY;
    let mut admissible = true;
    let mut rhs_min = f64::INFINITY;
    for jet in &jets {
        let lam = jet.kappa_vector()?;
        let value = sigma(&lam, k)?;
        let cone = in_gamma_k(&lam, k)?;
        margin = margin.min(cone.margin);
        admissible &= cone.in_cone;
        let f = rhs.eval(&ctx_from_jet(jet));
        if f.is_finite() {
            rhs_min = rhs_min.min(f);
        } else {
            rhs_min = f64::NEG_INFINITY;
        }
        let res = value - f;
        if res.is_finite() {
            sup = sup.max(res.abs());
        } else {
            sup = f64::INFINITY;
        }
        residual.push(res);
    }
    Ok(ResidualField { residual, sup_norm: sup, cone_margin: margin, admissible, rhs_min })
}

/// Residual field for reporting. The right-hand side must be positive
/// everywhere; cone membership is reported, not required.
pub fn residual_field(graph: &RadialGraph, rhs: &PrescribedRhs, k: usize) -> Result<ResidualField> {
    check_order(graph, k)?;
    let field = eval_field(graph, rhs, k)?;
    if !(field.rhs_min > 0.0) {
        return Err(Error::Domain(format!(
            "right-hand side must be positive on the surface; minimum is {:e}",
            field.rhs_min
        )));
    }
    Ok(field)
}

fn check_order(graph: &RadialGraph, k: usize) -> Result<()> {
    let n = graph.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "curvature order k = {k} outside 1..={n} for an {n}-dimensional graph"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SolveMode {
    Newton,
    /// Nodewise radial update `r += tau (ln sigma_k - ln f)`.
    Flow { tau: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub k: usize,
    pub mode: SolveMode,
    pub max_iter: usize,
    /// Convergence threshold on the residual sup norm.
    pub tol: f64,
    /// Accepted iterates must keep at least this fraction of the current
    /// cone margin.
    pub safeguard_frac: f64,
    /// Relative central-difference step for Jacobian columns.
    pub fd_step: f64,
}

impl SolverConfig {
    pub fn newton(k: usize) -> Self {
        Self {
            k,
            mode: SolveMode::Newton,
            max_iter: 50,
            tol: 1e-10,
            safeguard_frac: 0.1,
            fd_step: 1e-6,
        }
    }

    /// Flow updates converge linearly, so the budget is larger and the
    /// default target looser than Newton's.
    pub fn flow(k: usize, tau: f64) -> Self {
        Self {
            k,
            mode: SolveMode::Flow { tau },
            max_iter: 400,
            tol: 1e-8,
            safeguard_frac: 0.1,
            fd_step: 1e-6,
        }
    }

    fn validate(&self, graph: &RadialGraph) -> Result<()> {
        check_order(graph, self.k)?;
        if self.max_iter == 0 {
            return Err(Error::Domain("iteration budget must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(0.0..1.0).contains(&self.safeguard_frac) {
            return Err(Error::Domain(format!(
                "margin safeguard fraction must lie in [0, 1), got {}",
                self.safeguard_frac
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Domain(format!(
                "finite-difference step must be positive, got {}",
                self.fd_step
            )));
        }
        if let SolveMode::Flow { tau } = self.mode {
            if !(tau > 0.0) {
                return Err(Error::Domain(format!("flow step must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace {
    pub iterations: usize,
    /// Residual sup norms; the first entry is the initial state.
    pub residual_history: Vec<f64>,
    /// Cone margins alongside `residual_history`.
    pub margin_history: Vec<f64>,
    /// Accepted damping factor per iteration.
    pub step_sizes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Table-backed graph holding the final radii.
    pub graph: RadialGraph,
    pub trace: SolveTrace,
}

pub fn solve(start: &RadialGraph, rhs: &PrescribedRhs, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate(start)?;
    let mut values = start.values();
    let mut graph = start.with_values(&values)?;
    let mut field = eval_field(&graph, rhs, cfg.k)?;
    if !field.admissible {
        return Err(Error::Precondition(format!(
            "initial surface leaves the sigma_{} cone; margin {:e}",
            cfg.k, field.cone_margin
        )));
    }
    if !(field.rhs_min > 0.0) {
        return Err(Error::Domain(format!(
            "right-hand side must be positive on the initial surface; minimum is {:e}",
            field.rhs_min
        )));
    }

    let mut history = vec![field.sup_norm];
    let mut margins = vec![field.cone_margin];
    let mut steps = Vec::new();
    let mut iterations = 0;
    loop {
        if field.sup_norm <= cfg.tol {
            let trace = SolveTrace {
                iterations,
                residual_history: history,
                margin_history: margins,
                step_sizes: steps,
            };
            return Ok(Solution { graph, trace });
        }
        if iterations == cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                reason: format!(
                    "residual sup norm {:.3e} above tolerance {:.3e}",
                    field.sup_norm, cfg.tol
                ),
                history,
            });
        }

        let direction = match cfg.mode {
            SolveMode::Newton => match newton_direction(&graph, rhs, cfg, &field)? {
                Some(d) => d,
                None => {
                    return Err(Error::NonConvergence {
                        iterations,
                        reason: "singular Jacobian".into(),
                        history,
                    })
                }
            },
            SolveMode::Flow { tau } => flow_direction(&graph, rhs, cfg.k, tau)?,
        };

        let mut t = 1.0_f64;
        let accepted = loop {
            let trial: Vec<f64> =
                values.iter().zip(&direction).map(|(v, d)| v + t * d).collect();
            if let Some(hit) = admissible_trial(&graph, &trial, rhs, cfg, &field, t) {
                break Some((hit, trial));
            }
            t *= 0.5;
            if t < DAMPING_FLOOR {
                break None;
            }
        };
        let Some(((next_graph, next_field), trial)) = accepted else {
            return Err(Error::NonConvergence {
                iterations,
                reason: format!("damping underflow below {DAMPING_FLOOR:e}"),
                history,
            });
        };
        graph = next_graph;
        field = next_field;
        values = trial;
        history.push(field.sup_norm);
        margins.push(field.cone_margin);
        steps.push(t);
        iterations += 1;
    }
}

/// A trial state is accepted when it decreases the sup norm enough for
/// the damping spent (or already meets the tolerance) without leaving
/// the cone, losing right-hand-side positivity, or touching nonpositive
/// radii. Evaluation failures reject the trial instead of erroring; the
/// damping floor converts persistent rejection into `NonConvergence`.
fn admissible_trial(
    graph: &RadialGraph,
    trial: &[f64],
    rhs: &PrescribedRhs,
    cfg: &SolverConfig,
    current: &ResidualField,
    t: f64,
) -> Option<(RadialGraph, ResidualField)> {
    if trial.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let next = graph.with_values(trial).ok()?;
    let field = eval_field(&next, rhs, cfg.k).ok()?;
    let decreased = field.sup_norm <= current.sup_norm * (1.0 - SUFFICIENT_DECREASE * t);
    let converged = field.sup_norm <= cfg.tol;
    let safe = field.admissible
        && field.sup_norm.is_finite()
        && field.rhs_min > 0.0
        && field.cone_margin >= cfg.safeguard_frac * current.cone_margin;
    if (decreased || converged) && safe {
        Some((next, field))
    } else {
        None
    }
}

/// Jacobian column step for a nodal radius.
fn column_step(fd_step: f64, radius: f64) -> f64 {
    fd_step * radius.abs().max(1.0)
}

/// Radial shapes of the ambient translations of a centered sphere:
/// moving the center by `eps` changes the radial graph by
/// `eps cos(angle to the translation axis)` to first order, for every
/// radius. At a constant right-hand side these are exact null directions
/// of the linearized operator (translates of a solution sphere solve the
/// same equation), and near one they are nearly null, so an unmodified
/// Newton step can wander arbitrarily far along them.
fn translation_modes(graph: &RadialGraph) -> Vec<Vec<f64>> {
    let sites = graph.sites();
    match graph {
        RadialGraph::Axisym(_) => {
            vec![sites.iter().map(|(theta, _)| theta.cos()).collect()]
        }
        RadialGraph::Sphere2(_) => vec![
            sites.iter().map(|(theta, _)| theta.cos()).collect(),
            sites.iter().map(|(theta, psi)| theta.sin() * psi.unwrap().cos()).collect(),
            sites.iter().map(|(theta, psi)| theta.sin() * psi.unwrap().sin()).collect(),
        ],
    }
}

/// Removes the span of `modes` from `direction` by modified
/// Gram-Schmidt. This pins the center of the solution family; residual
/// content along the translation modes is left for the damping loop to
/// judge, so right-hand sides that genuinely force a translation stall
/// with an honest non-convergence error instead of drifting.
fn project_off_modes(direction: &mut [f64], modes: &[Vec<f64>]) {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(modes.len());
    for mode in modes {
        let mut v = mode.clone();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    for b in &basis {
        let dot: f64 = direction.iter().zip(b).map(|(x, y)| x * y).sum();
        for (x, y) in direction.iter_mut().zip(b) {
            *x -= dot * y;
        }
    }
}

fn newton_direction(
    graph: &RadialGraph,
    rhs: &PrescribedRhs,
    cfg: &SolverConfig,
    base: &ResidualField,
) -> Result<Option<Vec<f64>>> {
    let m = graph.site_count();
    let jac = match graph {
        RadialGraph::Axisym(_) => jacobian_colored(graph, rhs, cfg)?,
        RadialGraph::Sphere2(_) => jacobian_by_column(graph, rhs, cfg)?,
    };
    let matrix = nalgebra::DMatrix::from_row_slice(m, m, &jac);
    let minus_f = nalgebra::DVector::from_iterator(m, base.residual.iter().map(|r| -r));
    Ok(matrix.lu().solve(&minus_f).map(|d| {
        let mut direction = d.as_slice().to_vec();
        project_off_modes(&mut direction, &translation_modes(graph));
        direction
    }))
}

/// Residual stencils reach two nodes each way, and the pole reflection
/// maps ghost offsets back into that same window, so nodes five apart
/// never share a residual row. Perturbing every fifth node at once
/// yields the exact Jacobian in ten evaluations; rows outside a
/// column's window are bitwise unchanged and stay zero.
///
/// The columns are central differences. A one-sided difference at the
/// same step leaves truncation of order `fd_step` times the diagonal
/// second derivatives of the residual, which the curvature stencil
/// blows up by the fourth power of the grid frequency; the resulting
/// rough error in the Newton direction can feed back through the same
/// stencil and outrun the residual decrease the damping loop demands.
fn jacobian_colored(
    graph: &RadialGraph,
    rhs: &PrescribedRhs,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let m = graph.site_count();
    let base_values = graph.values();
    let mut jac = vec![0.0; m * m];
    for color in 0..5 {
        let mut plus = base_values.clone();
        let mut minus = base_values.clone();
        let mut steps = vec![0.0; m];
        for s in (color..m).step_by(5) {
            let h = column_step(cfg.fd_step, base_values[s]);
            plus[s] += h;
            minus[s] -= h;
            steps[s] = h;
        }
        let f_plus = eval_field(&graph.with_values(&plus)?, rhs, cfg.k)?;
        let f_minus = eval_field(&graph.with_values(&minus)?, rhs, cfg.k)?;
        for s in (color..m).step_by(5) {
            let lo = s.saturating_sub(2);
            let hi = (s + 2).min(m - 1);
            for i in lo..=hi {
                jac[i * m + s] =
                    (f_plus.residual[i] - f_minus.residual[i]) / (2.0 * steps[s]);
            }
        }
    }
    Ok(jac)
}

fn jacobian_by_column(
    graph: &RadialGraph,
    rhs: &PrescribedRhs,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let m = graph.site_count();
    let base_values = graph.values();
    let mut jac = vec![0.0; m * m];
    let mut pert = base_values.clone();
    for s in 0..m {
        let h = column_step(cfg.fd_step, base_values[s]);
        pert[s] = base_values[s] + h;
        let f_plus = eval_field(&graph.with_values(&pert)?, rhs, cfg.k)?;
        pert[s] = base_values[s] - h;
        let f_minus = eval_field(&graph.with_values(&pert)?, rhs, cfg.k)?;
        pert[s] = base_values[s];
        for i in 0..m {
            jac[i * m + s] = (f_plus.residual[i] - f_minus.residual[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Log-ratio update direction. Callers hold admissible iterates, so
/// `sigma_k > 0` and the logarithm is defined; a nonpositive right-hand
/// side would have been rejected already.
fn flow_direction(
    graph: &RadialGraph,
    rhs: &PrescribedRhs,
    k: usize,
    tau: f64,
) -> Result<Vec<f64>> {
    let jets = graph.jets(0, FrameOrder::Standard)?;
    let mut out = Vec::with_capacity(jets.len());
    for jet in &jets {
        let value = sigma(&jet.kappa_vector()?, k)?;
        let f = rhs.eval(&ctx_from_jet(jet));
        out.push(tau * (value.ln() - f.ln()));
    }
    Ok(out)
}

/// Exact for the small arguments used here: every intermediate product
/// stays far below 2^53 and each division is integer-valued.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for j in 0..k {
        out = out * (n - j) as f64 / (j + 1) as f64;
    }
    out
}

/// Radius of the geodesic sphere with constant `sigma_k = c`. Spheres
/// have `sigma_k = C(n, k) coth^k r`, so `r = arcoth((c / C)^{1/k})`;
/// `coth > 1` makes values at or below `C(n, k)` unattainable.
pub fn sphere_oracle(c: f64, n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!("curvature order k = {k} outside 1..={n}")));
    }
    let cnk = binomial(n, k);
    if !(c > cnk) {
        return Err(Error::Domain(format!(
            "sigma_{k} = {c} is not attained by any geodesic sphere; the infimum over radii is {cnk}"
        )));
    }
    let x = (c / cnk).powf(1.0 / k as f64);
    Ok(0.5 * ((x + 1.0) / (x - 1.0)).ln())
}

/// Weights of the interior gradient test quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QWeights {
    /// Exponent `N` on the support function in the general-kind quantity.
    pub support_exponent: f64,
    /// Coefficient `alpha` on the warp potential.
    pub potential_weight: f64,
}

impl Default for QWeights {
    fn default() -> Self {
        Self { support_exponent: 2.0, potential_weight: 8.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub sites: usize,
    pub max_abs_kappa: f64,
    /// Smallest `K >= 0` with `kappa_i + K >= 0` at every node.
    pub semiconvexity: f64,
    /// Smallest per-node `sigma_k` cone margin for the requested order.
    pub cone_margin: f64,
    pub admissible: bool,
    pub support_min: f64,
    pub support_max: f64,
    /// Shift `a = support_min / 2` entering the measure-kind quantity.
    pub measure_shift: f64,
    /// Sup over nodes with `kappa_max > 0` of
    /// `ln kappa_max - N ln u + alpha Phi`.
    pub q_general: f64,
    /// Sup of `ln kappa_max - ln(u - a) + alpha Phi` over the same nodes.
    pub q_measure: f64,
    /// Node attaining `q_general`, with its coordinates.
    pub q_argmax: usize,
    pub q_theta: f64,
    pub q_psi: Option<f64>,
    /// Nodes with `kappa_max <= 0`, excluded from both suprema.
    pub excluded_sites: usize,
}

pub fn diagnostics(graph: &RadialGraph, k: usize, weights: QWeights) -> Result<DiagnosticsReport> {
    check_order(graph, k)?;
    let jets = graph.jets(0, FrameOrder::Standard)?;
    let mut max_abs_kappa = 0.0_f64;
    let mut min_kappa = f64::INFINITY;
    let mut cone_margin = f64::INFINITY;
    let mut admissible = true;
    let mut support_min = f64::INFINITY;
    let mut support_max = f64::NEG_INFINITY;
    for jet in &jets {
        for &kap in &jet.kappa {
            max_abs_kappa = max_abs_kappa.max(kap.abs());
            min_kappa = min_kappa.min(kap);
        }
        let cone = in_gamma_k(&jet.kappa_vector()?, k)?;
        cone_margin = cone_margin.min(cone.margin);
        admissible &= cone.in_cone;
        support_min = support_min.min(jet.u);
        support_max = support_max.max(jet.u);
    }
    let measure_shift = 0.5 * support_min;
    let mut q_general = f64::NEG_INFINITY;
    let mut q_measure = f64::NEG_INFINITY;
    let mut q_argmax = 0;
    let mut excluded = 0;
    for (site, jet) in jets.iter().enumerate() {
        let kappa_max = jet.kappa[0];
        if kappa_max <= 0.0 {
            excluded += 1;
            continue;
        }
        let pot = weights.potential_weight * jet.warp.big_phi;
        let qg = kappa_max.ln() - weights.support_exponent * jet.u.ln() + pot;
        let qm = kappa_max.ln() - (jet.u - measure_shift).ln() + pot;
        if qg > q_general {
            q_general = qg;
            q_argmax = site;
        }
        q_measure = q_measure.max(qm);
    }
    Ok(DiagnosticsReport {
        sites: jets.len(),
        max_abs_kappa,
        semiconvexity: (-min_kappa).max(0.0),
        cone_margin,
        admissible,
        support_min,
        support_max,
        measure_shift,
        q_general,
        q_measure,
        q_argmax,
        q_theta: jets[q_argmax].theta,
        q_psi: jets[q_argmax].psi,
        excluded_sites: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::AxisymProfile;

    fn unit_sphere(n: usize) -> RadialGraph {
        RadialGraph::axisym(n, 32, AxisymProfile::Sphere { r0: 1.0 }).unwrap()
    }

    #[test]
    fn binomial_matches_pascal() {
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(6, 6), 1.0);
    }

    #[test]
    fn sphere_oracle_round_trips_closed_form() {
        for (n, k) in [(2, 1), (2, 2), (3, 2), (5, 3)] {
            for r0 in [0.5_f64, 1.0, 2.0] {
                let c = binomial(n, k) * (1.0 / r0.tanh()).powi(k as i32);
                let r = sphere_oracle(c, n, k).unwrap();
                assert!((r - r0).abs() < 1e-12, "n={n} k={k} r0={r0}: got {r}");
            }
        }
        assert!(matches!(sphere_oracle(1.0, 3, 2), Err(Error::Domain(_))));
        assert!(matches!(sphere_oracle(3.0, 3, 2), Err(Error::Domain(_))));
        assert!(matches!(sphere_oracle(10.0, 3, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_vanishes_on_the_matching_sphere() {
        let c = 3.0 * (1.0_f64 / 1.0_f64.tanh()).powi(2);
        let rhs = PrescribedRhs::general(&format!("{c:.17e}")).unwrap();
        let field = residual_field(&unit_sphere(3), &rhs, 2).unwrap();
        assert!(field.sup_norm < 1e-12, "sup {}", field.sup_norm);
        assert!(field.admissible && field.cone_margin > 0.0);
    }

    #[test]
    fn rhs_kinds_evaluate_identically() {
        let measure = PrescribedRhs::curvature_measure(-1.0, "2 + sin(theta)").unwrap();
        let general = PrescribedRhs::general("u^-1 * (2 + sin(theta))").unwrap();
        let graph =
            RadialGraph::axisym(2, 32, AxisymProfile::Perturbed { r0: 1.0, amp: 0.1 }).unwrap();
        let a = residual_field(&graph, &measure, 2).unwrap();
        let b = residual_field(&graph, &general, 2).unwrap();
        for (x, y) in a.residual.iter().zip(&b.residual) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn measure_kind_validates_exponent_and_density() {
        assert!(PrescribedRhs::curvature_measure(0.0, "1").is_err());
        assert!(PrescribedRhs::curvature_measure(1.5, "1").is_err());
        assert!(PrescribedRhs::curvature_measure(f64::NAN, "1").is_err());
        assert!(PrescribedRhs::curvature_measure(1.0, "u * 2").is_err());
        assert!(PrescribedRhs::curvature_measure(-2.0, "nu_theta").is_err());
        assert!(PrescribedRhs::curvature_measure(0.5, "cosh(r) * sin(theta)").is_ok());
        assert!(PrescribedRhs::curvature_measure(1.0, "1").is_ok());
    }

    #[test]
    fn nonpositive_rhs_is_a_domain_error() {
        let rhs = PrescribedRhs::general("-1").unwrap();
        assert!(matches!(
            residual_field(&unit_sphere(2), &rhs, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn order_bounds_are_enforced() {
        let rhs = PrescribedRhs::general("1").unwrap();
        assert!(matches!(residual_field(&unit_sphere(2), &rhs, 0), Err(Error::Domain(_))));
        assert!(matches!(residual_field(&unit_sphere(2), &rhs, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn colored_jacobian_matches_dedicated_columns() {
        // Rows influenced by a perturbed node are bitwise unaffected by
        // the other nodes of its color class, so the five-evaluation
        // Jacobian must equal the one-column-per-node Jacobian exactly,
        // not just approximately.
        let m = 32;
        let values: Vec<f64> =
            (0..m).map(|i| 1.0 + 0.08 * (i as f64 * 0.37).sin()).collect();
        let base_graph = RadialGraph::axisym(2, m, AxisymProfile::Sphere { r0: 1.0 })
            .unwrap()
            .with_values(&values)
            .unwrap();
        let rhs = PrescribedRhs::general("0.5 + 0.3 / u + 0.05 * cos(theta)").unwrap();
        let cfg = SolverConfig::newton(2);
        let colored = jacobian_colored(&base_graph, &rhs, &cfg).unwrap();
        let dense = jacobian_by_column(&base_graph, &rhs, &cfg).unwrap();
        let mut worst = (0.0f64, 0, 0);
        for i in 0..m {
            for s in 0..m {
                let d = (colored[i * m + s] - dense[i * m + s]).abs();
                if d > worst.0 {
                    worst = (d, i, s);
                }
            }
        }
        assert_eq!(worst.0, 0.0, "row {} col {} differs by {}", worst.1, worst.2, worst.0);
    }

    #[test]
    fn diagnostics_report_sphere_closed_forms() {
        let r0 = 1.0_f64;
        let report = diagnostics(&unit_sphere(3), 2, QWeights::default()).unwrap();
        let coth = 1.0 / r0.tanh();
        assert!((report.max_abs_kappa - coth).abs() < 1e-12);
        assert_eq!(report.semiconvexity, 0.0);
        assert!(report.admissible && report.cone_margin > 0.0);
        assert!((report.support_min - r0.sinh()).abs() < 1e-12);
        assert!((report.support_max - r0.sinh()).abs() < 1e-12);
        assert_eq!(report.excluded_sites, 0);
        let expect_q = coth.ln() - 2.0 * r0.sinh().ln() + 8.0 * (r0.cosh() - 1.0);
        assert!((report.q_general - expect_q).abs() < 1e-10, "{}", report.q_general);
        assert!(report.q_measure.is_finite());
    }
}
