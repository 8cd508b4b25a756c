//! Full latitude-longitude radial graphs for surface dimension 2.
//!
//! The radial function `rho(theta, psi)` lives on the staggered grid
//! `theta_i = (i + 1/2) pi / n_theta`, `psi_j = 2 pi j / n_psi` with
//! `n_psi` even. Longitude wraps periodically; latitude is extended past
//! the poles by the exact chart identity
//! `rho(-theta, psi) = rho(theta, psi + pi)`, which on this grid is a pure
//! index relabeling (row reflection plus a half-turn column rotation), so
//! ghost values are bitwise copies of interior values and no one-sided
//! stencils appear.
//!
//! Unlike the axisymmetric mode there is no invariant-tensor shortcut
//! here: Christoffel symbols of the induced metric come from fourth-order
//! finite differences of the metric fields, covariant derivatives of the
//! second fundamental form follow the coordinate formula, and the
//! intrinsic curvature is assembled from derivatives of the Christoffels.
//! Components are reported in the Gram-Schmidt frame of the coordinate
//! basis, in the order requested by [`FrameOrder`].

use serde::Serialize;

use super::{warping, FrameOrder, SurfaceJet};
use crate::{Error, Result};

/// Radial profile of a full-sphere graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sphere2Profile {
    Sphere { r0: f64 },
    /// `rho = r0 + a sin theta cos psi + b cos theta`: a first-harmonic
    /// graph whose symmetry axis is tilted away from the grid axis, so
    /// every field genuinely depends on both coordinates.
    Tilted { r0: f64, a: f64, b: f64 },
    /// Tabulated radii in row-major site order.
    Table(Vec<f64>),
}

impl Sphere2Profile {
    fn eval(&self, theta: f64, psi: f64) -> f64 {
        match self {
            Self::Sphere { r0 } => *r0,
            Self::Tilted { r0, a, b } => r0 + a * theta.sin() * psi.cos() + b * theta.cos(),
            Self::Table(_) => unreachable!("tables are indexed, not evaluated"),
        }
    }
}

/// Ghost rows per side; covers three finite-difference levels.
const GHOST_MAX: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Sphere2Graph {
    pub n_theta: usize,
    pub n_psi: usize,
    profile: Sphere2Profile,
}

/// Scalar field on the ghost-extended grid: `rows = n_theta + 2 g` rows of
/// `n_psi` periodic columns. Entries outside a stencil's reach stay NaN;
/// jet assembly re-validates finiteness.
#[derive(Clone)]
struct Field {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Field {
    fn nan(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![f64::NAN; rows * cols] }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] = v;
    }

    /// Pointwise map over another field's valid entries.
    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    fn d_theta(&self, h: f64) -> Self {
        let mut out = Self::nan(self.rows, self.cols);
        for i in 2..self.rows.saturating_sub(2) {
            for j in 0..self.cols {
                let v = (-self.at(i + 2, j) + 8.0 * self.at(i + 1, j) - 8.0 * self.at(i - 1, j)
                    + self.at(i - 2, j))
                    / (12.0 * h);
                out.set(i, j, v);
            }
        }
        out
    }

    fn d2_theta(&self, h: f64) -> Self {
        let mut out = Self::nan(self.rows, self.cols);
        for i in 2..self.rows.saturating_sub(2) {
            for j in 0..self.cols {
                let v = (-self.at(i + 2, j) + 16.0 * self.at(i + 1, j) - 30.0 * self.at(i, j)
                    + 16.0 * self.at(i - 1, j)
                    - self.at(i - 2, j))
                    / (12.0 * h * h);
                out.set(i, j, v);
            }
        }
        out
    }

    fn d_psi(&self, h: f64) -> Self {
        let mut out = Self::nan(self.rows, self.cols);
        let c = self.cols;
        for i in 0..self.rows {
            for j in 0..c {
                let v = (-self.at(i, (j + 2) % c) + 8.0 * self.at(i, (j + 1) % c)
                    - 8.0 * self.at(i, (j + c - 1) % c)
                    + self.at(i, (j + c - 2) % c))
                    / (12.0 * h);
                out.set(i, j, v);
            }
        }
        out
    }

    fn d2_psi(&self, h: f64) -> Self {
        let mut out = Self::nan(self.rows, self.cols);
        let c = self.cols;
        for i in 0..self.rows {
            for j in 0..c {
                let v = (-self.at(i, (j + 2) % c) + 16.0 * self.at(i, (j + 1) % c)
                    - 30.0 * self.at(i, j)
                    + 16.0 * self.at(i, (j + c - 1) % c)
                    - self.at(i, (j + c - 2) % c))
                    / (12.0 * h * h);
                out.set(i, j, v);
            }
        }
        out
    }
}

impl Sphere2Graph {
    pub fn new(n_theta: usize, n_psi: usize, profile: Sphere2Profile) -> Result<Self> {
        if n_theta < 12 {
            return Err(Error::Domain(format!(
                "latitude grid needs at least 12 rows, got {n_theta}"
            )));
        }
        if n_psi < 8 || n_psi % 2 != 0 {
            return Err(Error::Domain(format!(
                "longitude grid needs an even count >= 8, got {n_psi}"
            )));
        }
        if let Sphere2Profile::Table(values) = &profile {
            if values.len() != n_theta * n_psi {
                return Err(Error::Domain(format!(
                    "table length {} does not match {n_theta} x {n_psi} grid",
                    values.len()
                )));
            }
        }
        let graph = Self { n_theta, n_psi, profile };
        for (idx, &r) in graph.values().iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Geometry(format!(
                    "radial profile must stay finite and positive, found {r} at site {idx}"
                )));
            }
        }
        Ok(graph)
    }

    pub fn values(&self) -> Vec<f64> {
        match &self.profile {
            Sphere2Profile::Table(v) => v.clone(),
            preset => {
                let h_t = std::f64::consts::PI / self.n_theta as f64;
                let h_p = 2.0 * std::f64::consts::PI / self.n_psi as f64;
                let mut out = Vec::with_capacity(self.n_theta * self.n_psi);
                for i in 0..self.n_theta {
                    for j in 0..self.n_psi {
                        out.push(preset.eval((i as f64 + 0.5) * h_t, j as f64 * h_p));
                    }
                }
                out
            }
        }
    }

    pub fn sites(&self) -> Vec<(f64, Option<f64>)> {
        let h_t = std::f64::consts::PI / self.n_theta as f64;
        let h_p = 2.0 * std::f64::consts::PI / self.n_psi as f64;
        let mut out = Vec::with_capacity(self.n_theta * self.n_psi);
        for i in 0..self.n_theta {
            for j in 0..self.n_psi {
                out.push(((i as f64 + 0.5) * h_t, Some(j as f64 * h_p)));
            }
        }
        out
    }

    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        Self::new(self.n_theta, self.n_psi, Sphere2Profile::Table(values.to_vec()))
    }

    pub fn refine(&self) -> Result<Self> {
        match &self.profile {
            Sphere2Profile::Table(_) => Err(Error::Precondition(
                "refinement needs a preset-backed graph; tabulated radii carry no values between nodes"
                    .into(),
            )),
            preset => Self::new(self.n_theta * 2, self.n_psi * 2, preset.clone()),
        }
    }

    /// Radii on the grid extended by `g` ghost rows past each pole via the
    /// cross-pole relabeling; always built from the nodal values so preset
    /// and table-backed graphs share one code path.
    fn extended_field(&self, g: usize) -> Field {
        let values = self.values();
        let nt = self.n_theta as isize;
        let np = self.n_psi;
        let mut f = Field::nan(self.n_theta + 2 * g, np);
        for e in 0..f.rows {
            let i = e as isize - g as isize;
            let (row, shift) = if i < 0 {
                (-1 - i, np / 2)
            } else if i >= nt {
                (2 * nt - 1 - i, np / 2)
            } else {
                (i, 0)
            };
            for j in 0..np {
                f.set(e, j, values[row as usize * np + (j + shift) % np]);
            }
        }
        f
    }

    pub(super) fn jets(&self, depth: u8, frame: FrameOrder) -> Result<Vec<SurfaceJet>> {
        let g = if depth == 0 { 2 } else { GHOST_MAX };
        let nt = self.n_theta;
        let np = self.n_psi;
        let h_t = std::f64::consts::PI / nt as f64;
        let h_p = 2.0 * std::f64::consts::PI / np as f64;
        let rows = nt + 2 * g;

        let theta_of = |e: usize| (e as f64 - g as f64 + 0.5) * h_t;

        let rho = self.extended_field(g);
        let phi = rho.map(f64::sinh);
        let phip = rho.map(f64::cosh);
        let pot = rho.map(|x| x.cosh() - 1.0);

        let rho_t = rho.d_theta(h_t);
        let rho_p = rho.d_psi(h_p);
        let rho_tt = rho.d2_theta(h_t);
        let rho_pp = rho.d2_psi(h_p);
        let rho_tp = rho_p.d_theta(h_t);

        // First fundamental quantities, valid two rows in from the edges.
        let mut g_tt = Field::nan(rows, np);
        let mut g_tp = Field::nan(rows, np);
        let mut g_pp = Field::nan(rows, np);
        let mut h_tt = Field::nan(rows, np);
        let mut h_tp = Field::nan(rows, np);
        let mut h_pp = Field::nan(rows, np);
        let mut u_f = Field::nan(rows, np);
        for e in 2..rows - 2 {
            let theta = theta_of(e);
            let (st, ct) = (theta.sin(), theta.cos());
            for j in 0..np {
                let (p, pp) = (phi.at(e, j), phip.at(e, j));
                let (rt, rp) = (rho_t.at(e, j), rho_p.at(e, j));
                let grad2 = rt * rt + rp * rp / (st * st);
                let w = (p * p + grad2).sqrt();
                g_tt.set(e, j, p * p + rt * rt);
                g_tp.set(e, j, rt * rp);
                g_pp.set(e, j, p * p * st * st + rp * rp);
                // Covariant Hessian of rho on the round sphere.
                let c_tt = rho_tt.at(e, j);
                let c_tp = rho_tp.at(e, j) - ct / st * rp;
                let c_pp = rho_pp.at(e, j) + st * ct * rt;
                h_tt.set(e, j, (-p * c_tt + 2.0 * pp * rt * rt + p * p * pp) / w);
                h_tp.set(e, j, (-p * c_tp + 2.0 * pp * rt * rp) / w);
                h_pp.set(e, j, (-p * c_pp + 2.0 * pp * rp * rp + p * p * pp * st * st) / w);
                u_f.set(e, j, p * p / w);
            }
        }

        let deeper = if depth >= 1 {
            Some(self.derivative_fields(
                g, h_t, h_p, &g_tt, &g_tp, &g_pp, &h_tt, &h_tp, &h_pp, &pot, &u_f,
            ))
        } else {
            None
        };

        let mut jets = Vec::with_capacity(nt * np);
        for i in 0..nt {
            let e = i + g;
            let theta = theta_of(e);
            let st = theta.sin();
            for j in 0..np {
                let site = i * np + j;
                let psi = j as f64 * h_p;
                let warp = warping(rho.at(e, j))?;

                let gm = [g_tt.at(e, j), g_tp.at(e, j), g_tp.at(e, j), g_pp.at(e, j)];
                let det = gm[0] * gm[3] - gm[1] * gm[2];
                if !(det > 0.0) {
                    return Err(Error::Geometry(format!(
                        "induced metric degenerates at site {site} (det {det})"
                    )));
                }
                let gi = [gm[3] / det, -gm[1] / det, -gm[2] / det, gm[0] / det];
                let hm = [h_tt.at(e, j), h_tp.at(e, j), h_tp.at(e, j), h_pp.at(e, j)];

                let fr = frame_matrix(&gm, frame);
                let h_frame = frame2(&hm, &fr);

                let kappa = principal_pair(&gm, &hm);

                let (p, rt, rp) = (phi.at(e, j), rho_t.at(e, j), rho_p.at(e, j));
                let w = p * p / u_f.at(e, j);
                let nu = vec![p / w, -rt / w, -rp / (w * st)];

                let support = u_f.at(e, j);
                if !(support > 0.0) {
                    return Err(Error::Geometry(format!(
                        "support function must be positive, got {support} at site {site}"
                    )));
                }

                let mut jet = SurfaceJet {
                    n: 2,
                    site,
                    theta,
                    psi: Some(psi),
                    radius: rho.at(e, j),
                    warp,
                    g: gm.to_vec(),
                    g_inv: gi.to_vec(),
                    h: hm.to_vec(),
                    h_frame: h_frame.to_vec(),
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

                if let Some(d) = &deeper {
                    jet.grad_big_phi = Some(frame1(&[d.pot_t.at(e, j), d.pot_p.at(e, j)], &fr).to_vec());
                    jet.grad_u = Some(frame1(&[d.u_t.at(e, j), d.u_p.at(e, j)], &fr).to_vec());
                    jet.hess_big_phi = Some(
                        frame2(
                            &scalar_hessian(d, e, j, &d.pot_t, &d.pot_p, &d.pot_tt, &d.pot_tp, &d.pot_pp),
                            &fr,
                        )
                        .to_vec(),
                    );
                    jet.hess_u = Some(
                        frame2(
                            &scalar_hessian(d, e, j, &d.u_t, &d.u_p, &d.u_tt, &d.u_tp, &d.u_pp),
                            &fr,
                        )
                        .to_vec(),
                    );
                    jet.h_cov1 = Some(frame3(&d.hcov1_at(e, j), &fr).to_vec());
                    jet.riemann = Some(frame4(&d.riemann_at(e, j), &fr).to_vec());
                    if depth == 2 {
                        jet.h_cov2 = Some(frame4(&d.hcov2_at(e, j), &fr).to_vec());
                    }
                }

                validate_finite(&jet)?;
                jets.push(jet);
            }
        }
        Ok(jets)
    }

    /// Builds every field that needs metric derivatives: Christoffels,
    /// covariant derivatives of h, scalar second derivatives, and the
    /// Christoffel derivatives the curvature assembly needs.
    #[allow(clippy::too_many_arguments)]
    fn derivative_fields(
        &self,
        g: usize,
        h_t: f64,
        h_p: f64,
        g_tt: &Field,
        g_tp: &Field,
        g_pp: &Field,
        h_tt: &Field,
        h_tp: &Field,
        h_pp: &Field,
        pot: &Field,
        u_f: &Field,
    ) -> DeepFields {
        let rows = self.n_theta + 2 * g;
        let np = self.n_psi;

        let dg = [
            [g_tt.d_theta(h_t), g_tp.d_theta(h_t), g_pp.d_theta(h_t)],
            [g_tt.d_psi(h_p), g_tp.d_psi(h_p), g_pp.d_psi(h_p)],
        ];

        // Christoffel fields, indexed [upper][lower pair tt, tp, pp].
        let mut gamma = [[(); 3]; 2].map(|row| row.map(|_| Field::nan(rows, np)));
        for e in 4..rows - 4 {
            for j in 0..np {
                let gm = [g_tt.at(e, j), g_tp.at(e, j), g_tp.at(e, j), g_pp.at(e, j)];
                let det = gm[0] * gm[3] - gm[1] * gm[2];
                let gi = [gm[3] / det, -gm[1] / det, -gm[2] / det, gm[0] / det];
                // dg[c][ab]: derivative along c of g_{ab}.
                let dgv = |c: usize, a: usize, b: usize| dg[c][pair_idx(a, b)].at(e, j);
                for up in 0..2 {
                    for a in 0..2 {
                        for b in a..2 {
                            let mut s = 0.0;
                            for d in 0..2 {
                                s += gi[up * 2 + d] * (dgv(a, b, d) + dgv(b, a, d) - dgv(d, a, b));
                            }
                            gamma[up][pair_idx(a, b)].set(e, j, 0.5 * s);
                        }
                    }
                }
            }
        }

        let dh = [
            [h_tt.d_theta(h_t), h_tp.d_theta(h_t), h_pp.d_theta(h_t)],
            [h_tt.d_psi(h_p), h_tp.d_psi(h_p), h_pp.d_psi(h_p)],
        ];
        // h_{ab;c} stored per (ab pair, c).
        let mut hcov1 = [[(); 2]; 3].map(|row| row.map(|_| Field::nan(rows, np)));
        for e in 4..rows - 4 {
            for j in 0..np {
                let h_at = [h_tt.at(e, j), h_tp.at(e, j), h_tp.at(e, j), h_pp.at(e, j)];
                for a in 0..2 {
                    for b in a..2 {
                        for c in 0..2 {
                            let mut v = dh[c][pair_idx(a, b)].at(e, j);
                            for d in 0..2 {
                                v -= gamma[d][pair_idx(c, a)].at(e, j) * h_at[d * 2 + b];
                                v -= gamma[d][pair_idx(c, b)].at(e, j) * h_at[a * 2 + d];
                            }
                            hcov1[pair_idx(a, b)][c].set(e, j, v);
                        }
                    }
                }
            }
        }

        // Second covariant derivative needs coordinate derivatives of the
        // hcov1 fields; build them per (ab, c) pair.
        let dhc: Vec<[Field; 2]> = (0..6)
            .map(|flat| {
                let (p, c) = (flat / 2, flat % 2);
                [hcov1[p][c].d_theta(h_t), hcov1[p][c].d_psi(h_p)]
            })
            .collect();

        // Second coordinate derivatives of the metric for the curvature
        // tensor, indexed [metric pair][derivative pair]. The curvature is
        // assembled from these plus Christoffel products rather than from
        // Christoffel derivatives: the Christoffel fields inherit the
        // cot(theta) coordinate singularity of the chart, so their finite
        // differences lose accuracy near the poles, while the metric
        // fields stay smooth.
        let ddg = [g_tt, g_tp, g_pp].map(|comp| {
            [
                comp.d2_theta(h_t),
                comp.d_psi(h_p).d_theta(h_t),
                comp.d2_psi(h_p),
            ]
        });

        let pot_t = pot.d_theta(h_t);
        let pot_p = pot.d_psi(h_p);
        let pot_tt = pot.d2_theta(h_t);
        let pot_pp = pot.d2_psi(h_p);
        let pot_tp = pot_p.d_theta(h_t);
        let u_t = u_f.d_theta(h_t);
        let u_p = u_f.d_psi(h_p);
        let u_tt = u_f.d2_theta(h_t);
        let u_pp = u_f.d2_psi(h_p);
        let u_tp = u_p.d_theta(h_t);

        DeepFields {
            g_tt: g_tt.clone(),
            g_tp: g_tp.clone(),
            g_pp: g_pp.clone(),
            gamma,
            hcov1,
            dhc,
            ddg,
            pot_t,
            pot_p,
            pot_tt,
            pot_tp,
            pot_pp,
            u_t,
            u_p,
            u_tt,
            u_tp,
            u_pp,
        }
    }
}

struct DeepFields {
    g_tt: Field,
    g_tp: Field,
    g_pp: Field,
    gamma: [[Field; 3]; 2],
    hcov1: [[Field; 2]; 3],
    dhc: Vec<[Field; 2]>,
    ddg: [[Field; 3]; 3],
    pot_t: Field,
    pot_p: Field,
    pot_tt: Field,
    pot_tp: Field,
    pot_pp: Field,
    u_t: Field,
    u_p: Field,
    u_tt: Field,
    u_tp: Field,
    u_pp: Field,
}

impl DeepFields {
    fn gamma_at(&self, e: usize, j: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        for up in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[(up * 2 + a) * 2 + b] = self.gamma[up][pair_idx(a, b)].at(e, j);
                }
            }
        }
        out
    }

    /// Coordinate `h_{ab;c}` as a full rank-3 array.
    fn hcov1_at(&self, e: usize, j: usize) -> [f64; 8] {
        let mut out = [0.0; 8];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    out[(a * 2 + b) * 2 + c] = self.hcov1[pair_idx(a, b)][c].at(e, j);
                }
            }
        }
        out
    }

    /// Coordinate `h_{ab;cd}` by one more covariant derivative of the
    /// rank-3 field.
    fn hcov2_at(&self, e: usize, j: usize) -> [f64; 16] {
        let gam = self.gamma_at(e, j);
        let t3 = self.hcov1_at(e, j);
        let mut out = [0.0; 16];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let mut v = self.dhc[pair_idx(a, b) * 2 + c][d].at(e, j);
                        for m in 0..2 {
                            v -= gam[(m * 2 + d) * 2 + a] * t3[(m * 2 + b) * 2 + c];
                            v -= gam[(m * 2 + d) * 2 + b] * t3[(a * 2 + m) * 2 + c];
                            v -= gam[(m * 2 + d) * 2 + c] * t3[(a * 2 + b) * 2 + m];
                        }
                        out[((a * 2 + b) * 2 + c) * 2 + d] = v;
                    }
                }
            }
        }
        out
    }

    /// Coordinate curvature in the fully covariant arrangement
    ///
    /// ```text
    /// R_abcd = (g_ad,cb + g_bc,da - g_bd,ca - g_ac,db) / 2
    ///        + g_ef (G^e_da G^f_cb - G^e_ca G^f_db)
    /// ```
    ///
    /// which on round spheres gives `R_tptp = + sin^2(theta)` scale, i.e.
    /// positive sectional curvature.
    fn riemann_at(&self, e: usize, j: usize) -> [f64; 16] {
        let gam = self.gamma_at(e, j);
        let gm = [
            self.g_tt.at(e, j),
            self.g_tp.at(e, j),
            self.g_tp.at(e, j),
            self.g_pp.at(e, j),
        ];
        // Second derivative along (c, d) of the metric component (a, b).
        let ddg = |a: usize, b: usize, c: usize, d: usize| {
            self.ddg[pair_idx(a, b)][pair_idx(c, d)].at(e, j)
        };
        let mut out = [0.0; 16];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let mut v = 0.5
                            * (ddg(a, d, c, b) + ddg(b, c, d, a)
                                - ddg(b, d, c, a)
                                - ddg(a, c, d, b));
                        for ee in 0..2 {
                            for f in 0..2 {
                                v += gm[ee * 2 + f]
                                    * (gam[(ee * 2 + d) * 2 + a] * gam[(f * 2 + c) * 2 + b]
                                        - gam[(ee * 2 + c) * 2 + a] * gam[(f * 2 + d) * 2 + b]);
                            }
                        }
                        out[((a * 2 + b) * 2 + c) * 2 + d] = v;
                    }
                }
            }
        }
        out
    }
}

/// Flat index of the symmetric pair (tt, tp, pp).
#[inline]
fn pair_idx(a: usize, b: usize) -> usize {
    a + b
}

/// Scalar covariant Hessian in coordinates.
fn scalar_hessian(
    d: &DeepFields,
    e: usize,
    j: usize,
    f_t: &Field,
    f_p: &Field,
    f_tt: &Field,
    f_tp: &Field,
    f_pp: &Field,
) -> [f64; 4] {
    let grad = [f_t.at(e, j), f_p.at(e, j)];
    let second = [
        f_tt.at(e, j),
        f_tp.at(e, j),
        f_tp.at(e, j),
        f_pp.at(e, j),
    ];
    let mut out = [0.0; 4];
    for a in 0..2 {
        for b in 0..2 {
            let mut v = second[a * 2 + b];
            for c in 0..2 {
                v -= d.gamma[c][pair_idx(a, b)].at(e, j) * grad[c];
            }
            out[a * 2 + b] = v;
        }
    }
    out
}

/// Gram-Schmidt frame as a 2x2 matrix `E` whose column `i` holds the
/// coordinate coefficients of frame vector `i`.
fn frame_matrix(gm: &[f64; 4], order: FrameOrder) -> [f64; 4] {
    match order {
        FrameOrder::Standard => {
            let n1 = gm[0].sqrt();
            let proj = gm[1] / gm[0];
            let n2 = (gm[3] - gm[1] * gm[1] / gm[0]).sqrt();
            // E1 = d_theta / n1, E2 = (d_psi - proj d_theta) / n2.
            [1.0 / n1, -proj / n2, 0.0, 1.0 / n2]
        }
        FrameOrder::Reversed => {
            let n1 = gm[3].sqrt();
            let proj = gm[1] / gm[3];
            let n2 = (gm[0] - gm[1] * gm[1] / gm[3]).sqrt();
            // E1 = d_psi / n1, E2 = (d_theta - proj d_psi) / n2.
            [0.0, 1.0 / n2, 1.0 / n1, -proj / n2]
        }
    }
}

fn frame1(t: &[f64; 2], fr: &[f64; 4]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for i in 0..2 {
        for a in 0..2 {
            out[i] += fr[a * 2 + i] * t[a];
        }
    }
    out
}

fn frame2(t: &[f64; 4], fr: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            let mut v = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    v += fr[a * 2 + i] * fr[b * 2 + j] * t[a * 2 + b];
                }
            }
            out[i * 2 + j] = v;
        }
    }
    out
}

fn frame3(t: &[f64; 8], fr: &[f64; 4]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let mut v = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        for c in 0..2 {
                            v += fr[a * 2 + i] * fr[b * 2 + j] * fr[c * 2 + k]
                                * t[(a * 2 + b) * 2 + c];
                        }
                    }
                }
                out[(i * 2 + j) * 2 + k] = v;
            }
        }
    }
    out
}

fn frame4(t: &[f64; 16], fr: &[f64; 4]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut v = 0.0;
                    for a in 0..2 {
                        for b in 0..2 {
                            for c in 0..2 {
                                for d in 0..2 {
                                    v += fr[a * 2 + i]
                                        * fr[b * 2 + j]
                                        * fr[c * 2 + k]
                                        * fr[d * 2 + l]
                                        * t[((a * 2 + b) * 2 + c) * 2 + d];
                                }
                            }
                        }
                    }
                    out[((i * 2 + j) * 2 + k) * 2 + l] = v;
                }
            }
        }
    }
    out
}

/// Principal curvatures of the 2x2 pencil `(h, g)`, sorted descending.
///
/// Solved as the symmetric eigenproblem of `S = g^{-1/2} h g^{-1/2}`; the
/// quadratic formula on `det(h - kappa g)` loses half the digits at
/// umbilic points, where its discriminant cancels to roundoff before the
/// square root.
fn principal_pair(gm: &[f64; 4], hm: &[f64; 4]) -> Vec<f64> {
    let det = gm[0] * gm[3] - gm[1] * gm[2];
    let s = det.sqrt();
    let t = (gm[0] + gm[3] + 2.0 * s).sqrt();
    // g^{-1/2} = adj(g + s I) / (s t) for SPD 2x2.
    let st = s * t;
    let a = [(gm[3] + s) / st, -gm[1] / st, -gm[2] / st, (gm[0] + s) / st];
    let mut ah = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            ah[i * 2 + j] = a[i * 2] * hm[j] + a[i * 2 + 1] * hm[2 + j];
        }
    }
    let mut sm = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            sm[i * 2 + j] = ah[i * 2] * a[j] + ah[i * 2 + 1] * a[2 + j];
        }
    }
    let mean = 0.5 * (sm[0] + sm[3]);
    let half_gap = 0.5 * (sm[0] - sm[3]);
    let off = 0.5 * (sm[1] + sm[2]);
    let disc = (half_gap * half_gap + off * off).sqrt();
    vec![mean + disc, mean - disc]
}

fn validate_finite(jet: &SurfaceJet) -> Result<()> {
    let check = |v: &[f64]| v.iter().all(|x| x.is_finite());
    let mut ok = jet.radius.is_finite() && jet.u.is_finite();
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
            "non-finite field in jet at site {}; grid too coarse or profile degenerate",
            jet.site
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::RadialGraph;

    #[test]
    fn sphere_jets_recover_closed_forms() {
        let graph = RadialGraph::sphere2(16, 16, Sphere2Profile::Sphere { r0: 1.0 }).unwrap();
        let coth = 1.0_f64.cosh() / 1.0_f64.sinh();
        for jet in graph.jets(0, FrameOrder::Standard).unwrap() {
            for k in &jet.kappa {
                assert!((k - coth).abs() <= 1e-12, "kappa {k}");
            }
            assert!((jet.u - 1.0_f64.sinh()).abs() <= 1e-12);
            assert!((jet.nu[0] - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn table_round_trip_reproduces_preset_jets_bitwise() {
        let preset = RadialGraph::sphere2(
            16,
            24,
            Sphere2Profile::Tilted { r0: 1.0, a: 0.05, b: 0.05 },
        )
        .unwrap();
        let table = preset.with_values(&preset.values()).unwrap();
        assert_eq!(
            preset.jets(2, FrameOrder::Standard).unwrap(),
            table.jets(2, FrameOrder::Standard).unwrap()
        );
    }

    #[test]
    fn grid_validation_rejects_bad_shapes() {
        assert!(Sphere2Graph::new(8, 16, Sphere2Profile::Sphere { r0: 1.0 }).is_err());
        assert!(Sphere2Graph::new(16, 9, Sphere2Profile::Sphere { r0: 1.0 }).is_err());
        assert!(Sphere2Graph::new(16, 16, Sphere2Profile::Sphere { r0: 0.0 }).is_err());
        assert!(Sphere2Graph::new(16, 16, Sphere2Profile::Table(vec![1.0; 7])).is_err());
    }

    #[test]
    fn cross_pole_ghosts_relabel_exactly() {
        let graph = Sphere2Graph::new(
            16,
            16,
            Sphere2Profile::Tilted { r0: 1.0, a: 0.1, b: 0.02 },
        )
        .unwrap();
        let f = graph.extended_field(4);
        let values = graph.values();
        // Ghost row -1 equals interior row 0 rotated half a turn.
        for j in 0..16 {
            assert_eq!(f.at(3, j), values[(j + 8) % 16]);
            assert_eq!(f.at(4, j), values[j]);
        }
    }
}
