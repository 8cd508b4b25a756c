//! Star-shaped hypersurfaces in hyperbolic space, realized as radial graphs
//! over the round sphere.
//!
//! The ambient space is the warped product `dr^2 + sinh^2(r) d sigma^2` on
//! `(0, inf) x S^n`; a hypersurface is the graph `{ (rho(x), x) }` of a
//! positive radial function. Two discretizations are supported:
//!
//! * axisymmetric profiles `rho(theta)` on a staggered polar grid, for any
//!   hypersurface dimension `n >= 2` (the fibers carry a multiplicity-(n-1)
//!   principal curvature), and
//! * full latitude-longitude grids `rho(theta, psi)` for `n = 2`.
//!
//! Both produce [`SurfaceJet`]s: the induced metric, second fundamental
//! form, principal curvatures, outer normal, and support function at a
//! site, optionally with first and second covariant derivatives of the
//! second fundamental form in a deterministic orthonormal frame. The
//! residual checks at the bottom of this module evaluate the structural
//! identities these geometric quantities satisfy (warp-potential Hessian,
//! support-function derivatives, Gauss, Codazzi, and the second-derivative
//! interchange rule); each check returns the Frobenius norm of the residual
//! tensor in the frame, which makes the reported numbers invariant under
//! the frame choice.
//!
//! Derivatives of grid data are fourth-order central differences. Poles are
//! handled by staggering (no node sits on a pole) plus exact reflection
//! ghosts, so no one-sided stencils are needed and smooth graphs keep the
//! scheme order away from the pole rings.

mod axisym;
mod sphere2;

pub use axisym::AxisymProfile;
pub use sphere2::Sphere2Profile;

use serde::Serialize;

use crate::{Error, Result};

/// Warping data of hyperbolic space at geodesic radius `r`: the warp factor
/// `phi = sinh r`, its derivative, and the potential `Phi = cosh r - 1`
/// normalized to vanish at the origin. The conformal field `V = phi d/dr`
/// enters only through its magnitude `phi` and the support pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Warping {
    pub r: f64,
    pub phi: f64,
    pub phi_prime: f64,
    pub big_phi: f64,
}

/// Evaluates the warping data. `r = 0` is permitted (degenerate but useful
/// for identity checks); negative radii are rejected.
pub fn warping(r: f64) -> Result<Warping> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be finite and >= 0, got {r}")));
    }
    Ok(Warping {
        r,
        phi: r.sinh(),
        phi_prime: r.cosh(),
        big_phi: r.cosh() - 1.0,
    })
}

/// Orthonormal frame order used when expressing tensors in components. The
/// standard order is Gram-Schmidt on the coordinate basis as given; the
/// reversed order starts from the last coordinate direction. Ordinary use
/// never needs `Reversed`; it exists so tests can confirm the reported
/// residual norms do not depend on the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameOrder {
    Standard,
    Reversed,
}

/// Pointwise geometric data of a radial graph at one grid site.
///
/// `g`, `g_inv`, and `h` are `n x n` row-major matrices in a pointwise
/// orthogonal coordinate basis; `h_frame` and every derivative field are in
/// the orthonormal frame (index 0 is the first frame vector). `nu` holds
/// the ambient components of the outer unit normal in the orthonormal
/// ambient basis `(d/dr, e_theta, e_psi, ...)`, padded with zeros in
/// directions the mode cannot see. Fields that need grid derivatives beyond
/// the requested depth are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceJet {
    /// Hypersurface dimension.
    pub n: usize,
    pub site: usize,
    pub theta: f64,
    pub psi: Option<f64>,
    pub radius: f64,
    pub warp: Warping,
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub h: Vec<f64>,
    /// Second fundamental form in the orthonormal frame.
    pub h_frame: Vec<f64>,
    /// Principal curvatures sorted descending.
    pub kappa: Vec<f64>,
    /// Ambient orthonormal components of the outer normal, length `n + 1`.
    pub nu: Vec<f64>,
    /// Support function `<V, nu> = phi^2 / w`, positive on star-shaped
    /// graphs.
    pub u: f64,
    /// Frame gradient of `Phi(rho)` restricted to the surface (depth >= 1).
    pub grad_big_phi: Option<Vec<f64>>,
    /// Frame covariant Hessian of `Phi(rho)` (depth >= 1).
    pub hess_big_phi: Option<Vec<f64>>,
    pub grad_u: Option<Vec<f64>>,
    pub hess_u: Option<Vec<f64>>,
    /// `h_{ij;k}` with the derivative index last (depth >= 1), `n^3`.
    pub h_cov1: Option<Vec<f64>>,
    /// `h_{ij;kl}`, derivative indices in application order (depth 2), `n^4`.
    pub h_cov2: Option<Vec<f64>>,
    /// Intrinsic curvature `R_{ijkl}` from the induced metric (depth >= 1),
    /// `n^4`, sign convention `R_{1212} > 0` on round spheres.
    pub riemann: Option<Vec<f64>>,
}

impl SurfaceJet {
    /// Principal curvature spectrum as a sorted vector for the symmetric
    /// function layer.
    pub fn kappa_vector(&self) -> Result<crate::symm::EigenVector> {
        crate::symm::EigenVector::from_sorted(self.kappa.clone())
    }
}

/// Discretized radial graph in either mode.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialGraph {
    Axisym(axisym::AxisymGraph),
    Sphere2(sphere2::Sphere2Graph),
}

impl RadialGraph {
    pub fn axisym(n: usize, m: usize, profile: AxisymProfile) -> Result<Self> {
        Ok(Self::Axisym(axisym::AxisymGraph::new(n, m, profile)?))
    }

    pub fn sphere2(n_theta: usize, n_psi: usize, profile: Sphere2Profile) -> Result<Self> {
        Ok(Self::Sphere2(sphere2::Sphere2Graph::new(
            n_theta, n_psi, profile,
        )?))
    }

    /// Hypersurface dimension.
    pub fn dim(&self) -> usize {
        match self {
            Self::Axisym(g) => g.n,
            Self::Sphere2(_) => 2,
        }
    }

    pub fn site_count(&self) -> usize {
        match self {
            Self::Axisym(g) => g.m,
            Self::Sphere2(g) => g.n_theta * g.n_psi,
        }
    }

    /// Radii at all sites in site order.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Axisym(g) => g.values(),
            Self::Sphere2(g) => g.values(),
        }
    }

    /// Same grid with replaced radii (graph becomes table-backed).
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        match self {
            Self::Axisym(g) => Ok(Self::Axisym(g.with_values(values)?)),
            Self::Sphere2(g) => Ok(Self::Sphere2(g.with_values(values)?)),
        }
    }

    /// Doubles the grid resolution. Only preset-backed graphs know their
    /// values between nodes, so table-backed graphs refuse.
    pub fn refine(&self) -> Result<Self> {
        match self {
            Self::Axisym(g) => Ok(Self::Axisym(g.refine()?)),
            Self::Sphere2(g) => Ok(Self::Sphere2(g.refine()?)),
        }
    }

    /// `(theta, psi)` coordinates of every site in site order.
    pub fn sites(&self) -> Vec<(f64, Option<f64>)> {
        match self {
            Self::Axisym(g) => g.thetas().into_iter().map(|t| (t, None)).collect(),
            Self::Sphere2(g) => g.sites(),
        }
    }

    /// Jets at every site. `depth` 0 stops at curvature data, 1 adds first
    /// covariant derivatives and the intrinsic curvature, 2 adds the second
    /// covariant derivative of the second fundamental form.
    pub fn jets(&self, depth: u8, frame: FrameOrder) -> Result<Vec<SurfaceJet>> {
        if depth > 2 {
            return Err(Error::Domain(format!("depth must be 0, 1, or 2, got {depth}")));
        }
        match self {
            Self::Axisym(g) => g.jets(depth, frame),
            Self::Sphere2(g) => g.jets(depth, frame),
        }
    }

    /// Single-site jet; evaluates the whole grid, so sweeps should call
    /// [`RadialGraph::jets`] once instead.
    pub fn jet(&self, site: usize, depth: u8, frame: FrameOrder) -> Result<SurfaceJet> {
        let mut jets = self.jets(depth, frame)?;
        if site >= jets.len() {
            return Err(Error::Domain(format!(
                "site {site} out of range for {} sites",
                jets.len()
            )));
        }
        Ok(jets.swap_remove(site))
    }
}

fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn need<'a, T>(field: &'a Option<T>, what: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("jet lacks {what}; request a deeper jet")))
}

/// Residual of the warp-potential Hessian identity
/// `Phi_{;ij} = phi' g_ij - u h_ij` (orthonormal frame, Frobenius norm).
pub fn check_phi_hessian(jet: &SurfaceJet) -> Result<f64> {
    let hess = need(&jet.hess_big_phi, "the Hessian of Phi")?;
    let n = jet.n;
    let mut ss = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = jet.warp.phi_prime * kronecker(i, j) - jet.u * jet.h_frame[i * n + j];
            ss += (hess[i * n + j] - target).powi(2);
        }
    }
    Ok(ss.sqrt())
}

/// Residuals of the support-function derivative identities
/// `u_{;i} = h_i^m Phi_{;m}` and
/// `u_{;ij} = h_{ij;m} Phi_{;m} + phi' h_ij - (h^2)_ij u`
/// (orthonormal frame, Frobenius norms).
pub fn check_support_derivs(jet: &SurfaceJet) -> Result<(f64, f64)> {
    let n = jet.n;
    let grad_phi = need(&jet.grad_big_phi, "the gradient of Phi")?;
    let grad_u = need(&jet.grad_u, "the gradient of u")?;
    let hess_u = need(&jet.hess_u, "the Hessian of u")?;
    let hc1 = need(&jet.h_cov1, "first derivatives of h")?;

    let mut first = 0.0;
    for i in 0..n {
        let mut rhs = 0.0;
        for m in 0..n {
            rhs += jet.h_frame[i * n + m] * grad_phi[m];
        }
        first += (grad_u[i] - rhs).powi(2);
    }

    let mut second = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut rhs = jet.warp.phi_prime * jet.h_frame[i * n + j];
            for m in 0..n {
                rhs += hc1[(i * n + j) * n + m] * grad_phi[m];
                rhs -= jet.h_frame[i * n + m] * jet.h_frame[m * n + j] * jet.u;
            }
            second += (hess_u[i * n + j] - rhs).powi(2);
        }
    }
    Ok((first.sqrt(), second.sqrt()))
}

/// Residuals of the Gauss equation
/// `R_ijkl = -(d_ik d_jl - d_il d_jk) + h_ik h_jl - h_il h_jk`
/// and of the Codazzi symmetry `h_{ij;k} = h_{ik;j}` (Frobenius norms).
pub fn check_gauss_codazzi(jet: &SurfaceJet) -> Result<(f64, f64)> {
    let n = jet.n;
    let riemann = need(&jet.riemann, "the intrinsic curvature")?;
    let hc1 = need(&jet.h_cov1, "first derivatives of h")?;
    let h = &jet.h_frame;

    let mut gauss = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let target = -(kronecker(i, k) * kronecker(j, l)
                        - kronecker(i, l) * kronecker(j, k))
                        + h[i * n + k] * h[j * n + l]
                        - h[i * n + l] * h[j * n + k];
                    gauss += (riemann[((i * n + j) * n + k) * n + l] - target).powi(2);
                }
            }
        }
    }

    let mut codazzi = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                codazzi += (hc1[(i * n + j) * n + k] - hc1[(i * n + k) * n + j]).powi(2);
            }
        }
    }
    Ok((gauss.sqrt(), codazzi.sqrt()))
}

/// Residual of the derivative interchange rule for the second fundamental
/// form in a space form of curvature `-1`:
///
/// ```text
/// h_{kl;ij} = h_{ij;kl}
///   - [h_il d_jk - h_ij d_kl + h_kl d_ij - h_jk d_il]
///   + [(h^2)_il h_jk - h_kl (h^2)_ij + (h^2)_kl h_ij - h_il (h^2)_jk]
/// ```
///
/// On umbilic surfaces both brackets cancel pairwise and the rule reduces
/// to the symmetry of fourth derivatives. Frobenius norm over all index
/// tuples.
pub fn check_interchange(jet: &SurfaceJet) -> Result<f64> {
    let n = jet.n;
    let hc2 = need(&jet.h_cov2, "second derivatives of h")?;
    let h = &jet.h_frame;
    let mut h2 = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for m in 0..n {
                s += h[i * n + m] * h[m * n + j];
            }
            h2[i * n + j] = s;
        }
    }
    const AMBIENT_CURV: f64 = -1.0;

    let at4 = |t: &[f64], i: usize, j: usize, k: usize, l: usize| t[((i * n + j) * n + k) * n + l];
    let mut ss = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let correction = AMBIENT_CURV
                        * (h[i * n + l] * kronecker(j, k) - h[i * n + j] * kronecker(k, l)
                            + h[k * n + l] * kronecker(i, j)
                            - h[j * n + k] * kronecker(i, l))
                        + (h2[i * n + l] * h[j * n + k] - h[k * n + l] * h2[i * n + j]
                            + h2[k * n + l] * h[i * n + j]
                            - h[i * n + l] * h2[j * n + k]);
                    let res = at4(hc2, k, l, i, j) - at4(hc2, i, j, k, l) - correction;
                    ss += res * res;
                }
            }
        }
    }
    Ok(ss.sqrt())
}

/// Per-site residual record for sweeps and CSV reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteResiduals {
    pub site: usize,
    pub theta: f64,
    pub psi: Option<f64>,
    pub phi_hessian: f64,
    pub support_first: f64,
    pub support_second: f64,
    pub gauss: f64,
    pub codazzi: f64,
    pub interchange: Option<f64>,
}

/// Maxima of the residual checks over the sampled sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeomResiduals {
    pub phi_hessian: f64,
    pub support_first: f64,
    pub support_second: f64,
    pub gauss: f64,
    pub codazzi: f64,
    pub interchange: Option<f64>,
    pub sites_sampled: usize,
}

/// Pole exclusion band for residual reporting: sites with
/// `theta < SAMPLE_MARGIN` or `theta > pi - SAMPLE_MARGIN` are skipped.
/// The fields there are finite and the solver uses them, but one fiber
/// metric factor degenerates like `sin theta`, which costs roughly one
/// order of finite-difference accuracy on the outermost rings.
pub const SAMPLE_MARGIN: f64 = 0.25;

/// Evaluates every residual check at each sampled site. `depth` must be 1
/// (all checks except interchange) or 2 (all checks).
pub fn residual_rows(
    graph: &RadialGraph,
    depth: u8,
    frame: FrameOrder,
) -> Result<Vec<SiteResiduals>> {
    if !(1..=2).contains(&depth) {
        return Err(Error::Domain(format!(
            "residual checks need depth 1 or 2, got {depth}"
        )));
    }
    let jets = graph.jets(depth, frame)?;
    let mut rows = Vec::new();
    for jet in &jets {
        if jet.theta < SAMPLE_MARGIN || jet.theta > std::f64::consts::PI - SAMPLE_MARGIN {
            continue;
        }
        let (support_first, support_second) = check_support_derivs(jet)?;
        let (gauss, codazzi) = check_gauss_codazzi(jet)?;
        rows.push(SiteResiduals {
            site: jet.site,
            theta: jet.theta,
            psi: jet.psi,
            phi_hessian: check_phi_hessian(jet)?,
            support_first,
            support_second,
            gauss,
            codazzi,
            interchange: if depth == 2 {
                Some(check_interchange(jet)?)
            } else {
                None
            },
        });
    }
    Ok(rows)
}

/// Maxima of [`residual_rows`] over the sampled sites.
pub fn residual_sweep(graph: &RadialGraph, depth: u8, frame: FrameOrder) -> Result<GeomResiduals> {
    let rows = residual_rows(graph, depth, frame)?;
    if rows.is_empty() {
        return Err(Error::Geometry("no sites inside the sampling band".into()));
    }
    let mut out = GeomResiduals {
        phi_hessian: 0.0,
        support_first: 0.0,
        support_second: 0.0,
        gauss: 0.0,
        codazzi: 0.0,
        interchange: if depth == 2 { Some(0.0) } else { None },
        sites_sampled: rows.len(),
    };
    for r in &rows {
        out.phi_hessian = out.phi_hessian.max(r.phi_hessian);
        out.support_first = out.support_first.max(r.support_first);
        out.support_second = out.support_second.max(r.support_second);
        out.gauss = out.gauss.max(r.gauss);
        out.codazzi = out.codazzi.max(r.codazzi);
        if let (Some(acc), Some(v)) = (out.interchange.as_mut(), r.interchange) {
            *acc = acc.max(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warping_anchor_values() {
        let w0 = warping(0.0).unwrap();
        assert_eq!((w0.phi, w0.phi_prime, w0.big_phi), (0.0, 1.0, 0.0));
        let w1 = warping(1.0).unwrap();
        assert!((w1.phi - 1.1752011936438014).abs() < 1e-12);
        assert!((w1.phi_prime - 1.5430806348152437).abs() < 1e-12);
        assert!((w1.big_phi - 0.5430806348152437).abs() < 1e-12);
        assert!(warping(-0.1).is_err());
        assert!(warping(f64::NAN).is_err());
    }

    #[test]
    fn warping_hyperbolic_identity() {
        for r in [0.1, 1.0, 5.0] {
            let w = warping(r).unwrap();
            let scale = w.phi_prime * w.phi_prime;
            assert!((w.phi_prime * w.phi_prime - w.phi * w.phi - 1.0).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn warping_potential_is_increasing() {
        let mut prev = -1.0;
        for i in 0..50 {
            let w = warping(i as f64 * 0.1).unwrap();
            assert!(w.big_phi > prev);
            prev = w.big_phi;
        }
    }
}
