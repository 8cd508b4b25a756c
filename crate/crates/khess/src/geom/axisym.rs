//! Axisymmetric radial graphs.
//!
//! The profile `rho(theta)` lives on the staggered grid
//! `theta_i = (i + 1/2) pi / m`, so no node sits on a pole. The induced
//! metric is the warped product `A^2 dtheta^2 + B^2 dOmega^2` with
//! `A = w = sqrt(phi^2 + rho'^2)` and `B = phi sin theta` over a round
//! `S^{n-1}` fiber. Every SO(n)-invariant tensor is determined by scalar
//! profiles of `theta`, and covariant derivatives reduce to
//!
//! * `s(f) = f' / A` along the meridian unit vector, and
//! * the connection coefficient `mu = B' / (A B)`, which rotates meridian
//!   and fiber slots into each other along fiber directions.
//!
//! The fiber-direction derivative of an invariant tensor `T` picks up
//! `-mu T[.. slot -> fiber ..]` for each meridian slot and
//! `+mu T[.. slot -> meridian ..]` for each slot matching the direction;
//! the intrinsic fiber Christoffel terms cancel on tensors built from
//! Kronecker deltas. This single rule produces the first and second
//! covariant derivatives of the second fundamental form and the scalar
//! Hessians used by the residual checks.
//!
//! Ghost nodes extend every scalar profile across the poles by the exact
//! reflection `rho(-theta) = rho(theta)`, `rho(pi + t) = rho(pi - t)`; on
//! the staggered grid the reflected angles land on grid nodes, so ghost
//! values of tabulated profiles are exact copies and parity is preserved
//! to the last bit.

use serde::Serialize;

use super::{warping, FrameOrder, SurfaceJet};
use crate::{Error, Result};

/// Radial profile of an axisymmetric graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxisymProfile {
    /// Geodesic sphere `rho = r0`.
    Sphere { r0: f64 },
    /// `rho = r0 + amp cos theta`, a first-harmonic perturbation.
    Perturbed { r0: f64, amp: f64 },
    /// `rho = r0 + a1 cos theta + a2 cos 2 theta`.
    Trig { r0: f64, a1: f64, a2: f64 },
    /// Tabulated radii at the staggered nodes.
    Table(Vec<f64>),
}

impl AxisymProfile {
    fn eval(&self, theta: f64) -> f64 {
        match self {
            Self::Sphere { r0 } => *r0,
            Self::Perturbed { r0, amp } => r0 + amp * theta.cos(),
            Self::Trig { r0, a1, a2 } => r0 + a1 * theta.cos() + a2 * (2.0 * theta).cos(),
            Self::Table(_) => unreachable!("tables are indexed, not evaluated"),
        }
    }
}

/// Widest ghost extension any jet depth needs: two nodes per finite
/// difference level, three levels deep (second covariant derivatives).
const GHOST_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct AxisymGraph {
    /// Hypersurface dimension; the fiber sphere has dimension `n - 1`.
    pub n: usize,
    /// Node count of the staggered polar grid.
    pub m: usize,
    profile: AxisymProfile,
}

impl AxisymGraph {
    pub fn new(n: usize, m: usize, profile: AxisymProfile) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("hypersurface dimension must be >= 2, got {n}")));
        }
        if m < 16 {
            return Err(Error::Domain(format!("grid needs at least 16 nodes, got {m}")));
        }
        if let AxisymProfile::Table(values) = &profile {
            if values.len() != m {
                return Err(Error::Domain(format!(
                    "table length {} does not match grid size {m}",
                    values.len()
                )));
            }
        }
        let graph = Self { n, m, profile };
        for (idx, &r) in graph.extended_radii(GHOST_MAX).iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Geometry(format!(
                    "radial profile must stay finite and positive, found {r} at extended node {idx}"
                )));
            }
        }
        Ok(graph)
    }

    /// Staggered node angles.
    pub fn thetas(&self) -> Vec<f64> {
        let h = std::f64::consts::PI / self.m as f64;
        (0..self.m).map(|i| (i as f64 + 0.5) * h).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        match &self.profile {
            AxisymProfile::Table(v) => v.clone(),
            preset => self.thetas().iter().map(|&t| preset.eval(t)).collect(),
        }
    }

    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        Self::new(self.n, self.m, AxisymProfile::Table(values.to_vec()))
    }

    pub fn refine(&self) -> Result<Self> {
        match &self.profile {
            AxisymProfile::Table(_) => Err(Error::Precondition(
                "refinement needs a preset-backed graph; tabulated radii carry no values between nodes"
                    .into(),
            )),
            preset => Self::new(self.n, self.m * 2, preset.clone()),
        }
    }

    /// Radii on the grid extended by `g` ghost nodes past each pole.
    ///
    /// Ghosts always come from reflection of the nodal values, also for
    /// presets: evaluating a preset formula at angles beyond the poles
    /// would differ from the reflected value in the last bits, and the
    /// solver needs table-backed graphs to reproduce preset graphs
    /// exactly.
    fn extended_radii(&self, g: usize) -> Vec<f64> {
        let values = self.values();
        let m = self.m as isize;
        (0..self.m + 2 * g)
            .map(|e| {
                let mut idx = e as isize - g as isize;
                if idx < 0 {
                    idx = -1 - idx;
                }
                if idx >= m {
                    idx = 2 * m - 1 - idx;
                }
                values[idx as usize]
            })
            .collect()
    }

    pub(super) fn jets(&self, depth: u8, frame: FrameOrder) -> Result<Vec<SurfaceJet>> {
        let n = self.n;
        let m = self.m;
        let g = if depth == 0 { 2 } else { GHOST_MAX };
        let len = m + 2 * g;
        let h = std::f64::consts::PI / m as f64;

        let theta: Vec<f64> = (0..len)
            .map(|e| (e as f64 - g as f64 + 0.5) * h)
            .collect();
        let r = self.extended_radii(g);
        let phi: Vec<f64> = r.iter().map(|x| x.sinh()).collect();
        let phip: Vec<f64> = r.iter().map(|x| x.cosh()).collect();
        let pot: Vec<f64> = r.iter().map(|x| x.cosh() - 1.0).collect();

        let r1 = d1_field(&r, h);
        let r2 = d2_field(&r, h);

        // Level-one fields, valid wherever the first derivatives are.
        let mut a_w = vec![f64::NAN; len];
        let mut b_warp = vec![f64::NAN; len];
        let mut km = vec![f64::NAN; len];
        let mut kf = vec![f64::NAN; len];
        let mut u = vec![f64::NAN; len];
        for e in 2..len - 2 {
            let w = (phi[e] * phi[e] + r1[e] * r1[e]).sqrt();
            a_w[e] = w;
            b_warp[e] = phi[e] * theta[e].sin();
            km[e] = (-phi[e] * r2[e] + 2.0 * phip[e] * r1[e] * r1[e] + phi[e] * phi[e] * phip[e])
                / (w * w * w);
            kf[e] = (phip[e] - r1[e] * theta[e].cos() / (theta[e].sin() * phi[e])) / w;
            u[e] = phi[e] * phi[e] / w;
        }

        let deriv = if depth >= 1 {
            let s_km = s_field(&km, &a_w, h);
            let s_kf = s_field(&kf, &a_w, h);
            let s_b = s_field(&b_warp, &a_w, h);
            let s_u = s_field(&u, &a_w, h);
            let s_pot = s_field(&pot, &a_w, h);
            let mut mu = vec![f64::NAN; len];
            let mut t_mix = vec![f64::NAN; len];
            for e in 4..len - 4 {
                mu[e] = s_b[e] / b_warp[e];
                t_mix[e] = mu[e] * (km[e] - kf[e]);
            }
            let ss_b = s_field(&s_b, &a_w, h);
            let ss_u = s_field(&s_u, &a_w, h);
            let ss_pot = s_field(&s_pot, &a_w, h);
            let second = if depth == 2 {
                Some((
                    s_field(&s_km, &a_w, h),
                    s_field(&s_kf, &a_w, h),
                    s_field(&t_mix, &a_w, h),
                ))
            } else {
                None
            };
            Some(DerivFields {
                s_km,
                s_kf,
                s_b,
                s_u,
                s_pot,
                mu,
                t_mix,
                ss_b,
                ss_u,
                ss_pot,
                second,
            })
        } else {
            None
        };

        let perm: Vec<usize> = match frame {
            FrameOrder::Standard => (0..n).collect(),
            FrameOrder::Reversed => (0..n).rev().collect(),
        };

        let mut jets = Vec::with_capacity(m);
        for i in 0..m {
            let e = i + g;
            let w = a_w[e];
            let warp = warping(r[e])?;

            let mut gm = vec![0.0; n * n];
            let mut gi = vec![0.0; n * n];
            let mut hm = vec![0.0; n * n];
            let fiber_g = b_warp[e] * b_warp[e];
            gm[0] = w * w;
            gi[0] = 1.0 / (w * w);
            hm[0] = km[e] * w * w;
            for a in 1..n {
                gm[a * n + a] = fiber_g;
                gi[a * n + a] = 1.0 / fiber_g;
                hm[a * n + a] = kf[e] * fiber_g;
            }

            let mut h_frame_c = vec![0.0; n * n];
            h_frame_c[0] = km[e];
            for a in 1..n {
                h_frame_c[a * n + a] = kf[e];
            }

            let mut kappa = vec![km[e]; 1];
            kappa.extend(std::iter::repeat(kf[e]).take(n - 1));
            kappa.sort_by(|x, y| y.partial_cmp(x).expect("finite curvatures"));

            let mut nu = vec![0.0; n + 1];
            nu[0] = phi[e] / w;
            nu[1] = -r1[e] / w;

            let support = u[e];
            if !(support > 0.0) {
                return Err(Error::Geometry(format!(
                    "support function must be positive, got {support} at site {i}"
                )));
            }

            let mut jet = SurfaceJet {
                n,
                site: i,
                theta: theta[e],
                psi: None,
                radius: r[e],
                warp,
                g: gm,
                g_inv: gi,
                h: hm,
                h_frame: permute2(&h_frame_c, &perm, n),
                kappa,
                nu,
                u: support,
                grad_big_phi: None,
                hess_big_phi: None,
                grad_u: None,
                hess_u: None,
                h_cov1: None,
                h_cov2: None,
                riemann: None,
            };

            if let Some(d) = &deriv {
                let mu = d.mu[e];

                let mut grad_pot = vec![0.0; n];
                grad_pot[0] = d.s_pot[e];
                let mut hess_pot = vec![0.0; n * n];
                hess_pot[0] = d.ss_pot[e];
                for a in 1..n {
                    hess_pot[a * n + a] = mu * d.s_pot[e];
                }
                let mut grad_u = vec![0.0; n];
                grad_u[0] = d.s_u[e];
                let mut hess_u = vec![0.0; n * n];
                hess_u[0] = d.ss_u[e];
                for a in 1..n {
                    hess_u[a * n + a] = mu * d.s_u[e];
                }

                let hc1 = invariant_rank3(n, d.s_km[e], d.s_kf[e], d.t_mix[e]);

                let k_mix = -d.ss_b[e] / b_warp[e];
                let k_fib = (1.0 - d.s_b[e] * d.s_b[e]) / (b_warp[e] * b_warp[e]);
                let riemann = warped_riemann(n, k_mix, k_fib);

                jet.grad_big_phi = Some(permute1(&grad_pot, &perm));
                jet.hess_big_phi = Some(permute2(&hess_pot, &perm, n));
                jet.grad_u = Some(permute1(&grad_u, &perm));
                jet.hess_u = Some(permute2(&hess_u, &perm, n));
                jet.h_cov1 = Some(permute3(&hc1, &perm, n));
                jet.riemann = Some(permute4(&riemann, &perm, n));

                if let Some((s_s_km, s_s_kf, s_t_mix)) = &d.second {
                    let hc2 = invariant_rank4(
                        n,
                        &hc1,
                        mu,
                        s_s_km[e],
                        s_s_kf[e],
                        s_t_mix[e],
                    );
                    jet.h_cov2 = Some(permute4(&hc2, &perm, n));
                }
            }

            validate_finite(&jet, i)?;
            jets.push(jet);
        }
        Ok(jets)
    }
}

struct DerivFields {
    s_km: Vec<f64>,
    s_kf: Vec<f64>,
    s_b: Vec<f64>,
    s_u: Vec<f64>,
    s_pot: Vec<f64>,
    mu: Vec<f64>,
    t_mix: Vec<f64>,
    ss_b: Vec<f64>,
    ss_u: Vec<f64>,
    ss_pot: Vec<f64>,
    second: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

/// First covariant derivative of the second fundamental form as an
/// invariant rank-3 array (meridian slot 0, derivative index last):
/// `T[000] = s(km)`, `T[aa0] = s(kf)`, `T[0aa] = T[a0a] = mu (km - kf)`.
fn invariant_rank3(n: usize, s_km: f64, s_kf: f64, t_mix: f64) -> Vec<f64> {
    let mut t = vec![0.0; n * n * n];
    t[0] = s_km;
    for a in 1..n {
        t[(a * n + a) * n] = s_kf;
        t[a * n + a] = t_mix;
        t[(a * n) * n + a] = t_mix;
    }
    t
}

/// Second covariant derivative: meridian-direction components are the
/// `s(.)` derivatives of the rank-3 component profiles; fiber-direction
/// components follow the invariant-tensor rotation rule with coefficient
/// `mu` applied to the concrete rank-3 array.
fn invariant_rank4(
    n: usize,
    t3: &[f64],
    mu: f64,
    s_s_km: f64,
    s_s_kf: f64,
    s_t_mix: f64,
) -> Vec<f64> {
    let at3 = |i: usize, j: usize, k: usize| t3[(i * n + j) * n + k];
    let mut t4 = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // Meridian derivative of the (i, j, k) component profile.
                let s_val = if (i, j, k) == (0, 0, 0) {
                    s_s_km
                } else if i == j && i > 0 && k == 0 {
                    s_s_kf
                } else if (i == 0 && j == k && j > 0) || (j == 0 && i == k && i > 0) {
                    s_t_mix
                } else {
                    0.0
                };
                t4[((i * n + j) * n + k) * n] = s_val;
                for d in 1..n {
                    let mut v = 0.0;
                    if i == 0 {
                        v -= mu * at3(d, j, k);
                    } else if i == d {
                        v += mu * at3(0, j, k);
                    }
                    if j == 0 {
                        v -= mu * at3(i, d, k);
                    } else if j == d {
                        v += mu * at3(i, 0, k);
                    }
                    if k == 0 {
                        v -= mu * at3(i, j, d);
                    } else if k == d {
                        v += mu * at3(i, j, 0);
                    }
                    t4[((i * n + j) * n + k) * n + d] = v;
                }
            }
        }
    }
    t4
}

/// Curvature tensor of the warped metric in the frame: `K_mix` on planes
/// containing the meridian, `K_fib` on fiber planes, arranged so that
/// `R[i j i j] = K` for each plane.
fn warped_riemann(n: usize, k_mix: f64, k_fib: f64) -> Vec<f64> {
    let fiber = |i: usize, j: usize| {
        if i == j && i > 0 {
            1.0
        } else {
            0.0
        }
    };
    let mer = |i: usize| if i == 0 { 1.0 } else { 0.0 };
    let mut t = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let fib_part = fiber(i, k) * fiber(j, l) - fiber(i, l) * fiber(j, k);
                    let mix_part = mer(i) * mer(k) * fiber(j, l) + mer(j) * mer(l) * fiber(i, k)
                        - mer(i) * mer(l) * fiber(j, k)
                        - mer(j) * mer(k) * fiber(i, l);
                    t[((i * n + j) * n + k) * n + l] = k_fib * fib_part + k_mix * mix_part;
                }
            }
        }
    }
    t
}

fn validate_finite(jet: &SurfaceJet, site: usize) -> Result<()> {
    let mut ok = jet.radius.is_finite() && jet.u.is_finite();
    let check = |v: &[f64]| v.iter().all(|x| x.is_finite());
    ok &= check(&jet.g) && check(&jet.h) && check(&jet.h_frame) && check(&jet.kappa) && check(&jet.nu);
    for opt in [
        &jet.grad_big_phi,
        &jet.grad_u,
        &jet.hess_big_phi,
        &jet.hess_u,
        &jet.h_cov1,
        &jet.h_cov2,
        &jet.riemann,
    ] {
        if let Some(v) = opt {
            ok &= check(v);
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Error::Geometry(format!(
            "non-finite field in jet at site {site}; grid too coarse or profile degenerate"
        )))
    }
}

fn permute1(src: &[f64], perm: &[usize]) -> Vec<f64> {
    perm.iter().map(|&p| src[p]).collect()
}

fn permute2(src: &[f64], perm: &[usize], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = src[perm[i] * n + perm[j]];
        }
    }
    out
}

fn permute3(src: &[f64], perm: &[usize], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = src[(perm[i] * n + perm[j]) * n + perm[k]];
            }
        }
    }
    out
}

fn permute4(src: &[f64], perm: &[usize], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] =
                        src[((perm[i] * n + perm[j]) * n + perm[k]) * n + perm[l]];
                }
            }
        }
    }
    out
}

/// Fourth-order first derivative on the uniform grid; the outermost two
/// entries stay NaN and must be covered by ghost margin.
fn d1_field(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![f64::NAN; f.len()];
    for i in 2..f.len() - 2 {
        out[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    }
    out
}

/// Fourth-order second derivative.
fn d2_field(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![f64::NAN; f.len()];
    for i in 2..f.len() - 2 {
        out[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2])
            / (12.0 * h * h);
    }
    out
}

/// Unit-speed meridian derivative `s(f) = f' / A`, shrinking the valid
/// range by two nodes.
fn s_field(f: &[f64], a_w: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![f64::NAN; f.len()];
    for i in 2..f.len() - 2 {
        if f[i - 2].is_finite() && f[i + 2].is_finite() {
            out[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h * a_w[i]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RadialGraph;
    use crate::symm::sigma;

    fn sphere_graph(n: usize, r0: f64) -> RadialGraph {
        RadialGraph::axisym(n, 32, AxisymProfile::Sphere { r0 }).unwrap()
    }

    #[test]
    fn geodesic_sphere_curvatures_are_exact() {
        for r0 in [0.5_f64, 1.0, 2.0] {
            let jets = sphere_graph(3, r0).jets(0, FrameOrder::Standard).unwrap();
            let coth = r0.cosh() / r0.sinh();
            for jet in &jets {
                for &k in &jet.kappa {
                    assert!((k - coth).abs() <= 1e-12 * coth, "kappa {k} vs {coth}");
                }
                assert!((jet.u - r0.sinh()).abs() <= 1e-12 * r0.sinh());
                assert!((jet.nu[0] - 1.0).abs() <= 1e-14);
                assert!(jet.nu[1].abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn geodesic_sphere_sigma_matches_binomial_closed_form() {
        let r0 = 1.0_f64;
        let coth = r0.cosh() / r0.sinh();
        for n in [2usize, 3, 4] {
            let jets = sphere_graph(n, r0).jets(0, FrameOrder::Standard).unwrap();
            for k in 1..=n {
                let binom = (1..=k).fold(1.0, |acc, j| acc * (n - j + 1) as f64 / j as f64);
                let expect = binom * coth.powi(k as i32);
                let got = sigma(&jets[5].kappa_vector().unwrap(), k).unwrap();
                assert!(
                    (got - expect).abs() <= 1e-10 * expect.abs(),
                    "sigma_{k} on sphere: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn table_round_trip_reproduces_preset_jets_bitwise() {
        let preset =
            RadialGraph::axisym(2, 48, AxisymProfile::Perturbed { r0: 1.0, amp: 0.1 }).unwrap();
        let table = preset.with_values(&preset.values()).unwrap();
        let a = preset.jets(2, FrameOrder::Standard).unwrap();
        let b = table.jets(2, FrameOrder::Standard).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_gates_derivative_fields() {
        let g = sphere_graph(2, 1.0);
        let j0 = &g.jets(0, FrameOrder::Standard).unwrap()[3];
        assert!(j0.h_cov1.is_none() && j0.riemann.is_none() && j0.grad_big_phi.is_none());
        let j1 = &g.jets(1, FrameOrder::Standard).unwrap()[3];
        assert!(j1.h_cov1.is_some() && j1.riemann.is_some() && j1.h_cov2.is_none());
        let j2 = &g.jets(2, FrameOrder::Standard).unwrap()[3];
        assert!(j2.h_cov2.is_some());
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(AxisymGraph::new(1, 32, AxisymProfile::Sphere { r0: 1.0 }).is_err());
        assert!(AxisymGraph::new(2, 8, AxisymProfile::Sphere { r0: 1.0 }).is_err());
        assert!(AxisymGraph::new(2, 32, AxisymProfile::Sphere { r0: -1.0 }).is_err());
        // Amplitude large enough to push the profile through the origin.
        assert!(AxisymGraph::new(2, 32, AxisymProfile::Perturbed { r0: 0.5, amp: 0.6 }).is_err());
        let short = AxisymProfile::Table(vec![1.0; 20]);
        assert!(AxisymGraph::new(2, 32, short).is_err());
    }

    #[test]
    fn refine_doubles_presets_and_rejects_tables() {
        let g = RadialGraph::axisym(2, 32, AxisymProfile::Trig { r0: 1.0, a1: 0.05, a2: 0.03 })
            .unwrap();
        let fine = g.refine().unwrap();
        assert_eq!(fine.site_count(), 64);
        let table = g.with_values(&g.values()).unwrap();
        assert!(table.refine().is_err());
    }

    #[test]
    fn reversed_frame_moves_meridian_to_last_slot() {
        let g = RadialGraph::axisym(3, 32, AxisymProfile::Perturbed { r0: 1.0, amp: 0.1 })
            .unwrap();
        let std = &g.jets(1, FrameOrder::Standard).unwrap()[7];
        let rev = &g.jets(1, FrameOrder::Reversed).unwrap()[7];
        let n = 3;
        assert_eq!(std.h_frame[0], rev.h_frame[(n - 1) * n + (n - 1)]);
        assert_eq!(std.kappa, rev.kappa);
        let gp_std = std.grad_big_phi.as_ref().unwrap();
        let gp_rev = rev.grad_big_phi.as_ref().unwrap();
        assert_eq!(gp_std[0], gp_rev[n - 1]);
    }
}
