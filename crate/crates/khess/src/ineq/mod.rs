//! Sampled verification of the inequality battery behind `sigma_k`
//! concavity estimates.
//!
//! Every statement here is about `lambda` in the Garding cone `Gamma_k` and
//! a direction `xi` in R^n, evaluated through the deletion-minor derivative
//! calculus of [`crate::symm`]. The quantities on both sides of an
//! inequality can range over many orders of magnitude within one sweep, so
//! each evaluation carries its own scale `1 + |LHS| + |RHS|` and the
//! nonnegativity contract is `gap >= -REL_TOL * scale`.
//!
//! The centerpiece is the pinched-spectrum concavity bound: for spectra with
//! a head bounded below (`lambda_l >= delta * lambda_1`) and a tail bounded
//! above (`lambda_{l+1} <= delta_prime * lambda_1`), the negative log-Hessian
//! of `sigma_k` along a diagonal direction dominates an explicit barrier.
//! The statement is an existence result in `delta_prime`; no closed-form
//! threshold is known, so [`search_delta_prime`] bisects downward and
//! reports the largest level that survives a full sample budget, together
//! with the counterexample found just above it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::symm::{
    in_gamma_k, sigma, sigma_jet_diag, sigma_minor, EigenVector, SigmaDerivatives, REL_TOL,
};
use crate::{Error, Result};

/// Smallest tail threshold the bisection search will try. Below this the
/// search gives up and reports a failure outcome instead of recursing into
/// floating point noise.
pub const DELTA_PRIME_FLOOR: f64 = 1e-8;

/// Proposal count after which a constrained sampler with cumulative
/// acceptance below [`STARVATION_RATE`] reports starvation.
const STARVATION_WINDOW: u64 = 1_000_000;
const STARVATION_RATE: f64 = 1e-4;

/// Derives a decorrelated substream seed (splitmix64 step), so independent
/// sampling stages never share a stream even when `base` values are small
/// consecutive integers.
pub fn substream_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameters of the pinched-spectrum concavity statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityParams {
    pub n: usize,
    pub k: usize,
    /// Split index: entries `1..=l` are the head, `l+1..=n` the tail.
    pub l: usize,
    pub eps: f64,
    pub delta: f64,
    pub delta0: f64,
    pub delta_prime: f64,
}

impl ConcavityParams {
    pub fn new(
        n: usize,
        k: usize,
        l: usize,
        eps: f64,
        delta: f64,
        delta0: f64,
        delta_prime: f64,
    ) -> Result<Self> {
        if n < 2 || !(1..k).contains(&l) || k > n {
            return Err(Error::Domain(format!(
                "need 1 <= l < k <= n with n >= 2, got n = {n}, k = {k}, l = {l}"
            )));
        }
        for (name, v) in [("eps", eps), ("delta", delta), ("delta0", delta0)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(delta_prime > 0.0 && delta_prime < delta) {
            return Err(Error::Domain(format!(
                "delta_prime must lie in (0, delta), got {delta_prime} with delta = {delta}"
            )));
        }
        Ok(Self {
            n,
            k,
            l,
            eps,
            delta,
            delta0,
            delta_prime,
        })
    }
}

/// How the constrained sampler proposes tail entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalMix {
    /// Tails uniform over the full admissible box
    /// `[-(n-k)/k * lambda_1, delta_prime * lambda_1]`. Starves at small
    /// `delta_prime` because the cone forces tails into a sliver of the box;
    /// kept for the starvation diagnostics and as a coverage reference.
    BoxOnly,
    /// Mixture of the full box (1/4), strictly positive tails (1/2), and
    /// symmetric small tails in `[-delta_prime, delta_prime] * lambda_1`
    /// (1/4). The positive component always lands in the cone, so the
    /// mixture cannot starve while still visiting the negative-tail
    /// boundary region the box targets.
    Mixture,
}

/// Deterministic sampling budget: `seed` fixes the entire stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBudget {
    /// Number of accepted `lambda` samples per evaluation pass.
    pub count: usize,
    pub seed: u64,
    /// Overall scale of `lambda_1` proposals.
    pub lambda_scale: f64,
    pub proposal: ProposalMix,
}

impl SampleBudget {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            lambda_scale: 1.0,
            proposal: ProposalMix::Mixture,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Domain("sample count must be >= 1".into()));
        }
        if !(self.lambda_scale > 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::Domain(format!(
                "lambda_scale must be a positive real, got {}",
                self.lambda_scale
            )));
        }
        Ok(())
    }
}

/// One gap evaluation with its tolerance scale and the pinch-hypothesis
/// flags of the sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapTerms {
    /// `LHS - RHS`; the statement claims this is `>= -REL_TOL * scale`
    /// whenever both pinch flags hold at a surviving `delta_prime`.
    pub gap: f64,
    /// `1 + |LHS| + |RHS|`.
    pub scale: f64,
    /// `lambda_l >= delta * lambda_1`.
    pub head_pinched: bool,
    /// `lambda_{l+1} <= delta_prime * lambda_1`.
    pub tail_pinched: bool,
}

/// Caches the `sigma_k` derivative jet of one spectrum so a battery of
/// directions can be evaluated without recomputing minors.
pub struct ConcavityEvaluator {
    jet: SigmaDerivatives,
    lambda_1: f64,
    params: ConcavityParams,
    head_pinched: bool,
    tail_pinched: bool,
}

impl ConcavityEvaluator {
    pub fn new(lam: &EigenVector, params: &ConcavityParams) -> Result<Self> {
        if lam.dim() != params.n {
            return Err(Error::Domain(format!(
                "spectrum dimension {} does not match n = {}",
                lam.dim(),
                params.n
            )));
        }
        let cone = in_gamma_k(lam, params.k)?;
        if !cone.in_cone {
            return Err(Error::Precondition(format!(
                "concavity gap needs lambda in Gamma_{}, margin was {:.3e}",
                params.k, cone.margin
            )));
        }
        let lambda_1 = lam.get(0);
        if lambda_1 <= 0.0 {
            return Err(Error::Precondition("lambda_1 must be positive".into()));
        }
        Ok(Self {
            jet: sigma_jet_diag(lam, params.k)?,
            lambda_1,
            params: *params,
            head_pinched: lam.get(params.l - 1) >= params.delta * lambda_1,
            tail_pinched: lam.get(params.l) <= params.delta_prime * lambda_1,
        })
    }

    /// `xi` is expressed in the sorted (descending) eigenvalue order.
    ///
    /// `LHS` is the negative second derivative of `log sigma_k` along the
    /// diagonal direction `xi`; `RHS` is the barrier
    /// `(1 - eps) xi_1^2 / lambda_1^2
    ///  - delta0 sum_{i>l} sigma_k^{ii} xi_i^2 / (lambda_1 sigma_k)`.
    pub fn gap(&self, xi: &[f64]) -> GapTerms {
        let n = self.params.n;
        debug_assert_eq!(xi.len(), n);
        let sigma_k = self.jet.value;

        let mut pair = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                pair += 2.0 * self.jet.diag_pair(p, q) * xi[p] * xi[q];
            }
        }
        let dot: f64 = (0..n).map(|i| self.jet.grad_diag[i] * xi[i]).sum();
        let lhs = -pair / sigma_k + (dot / sigma_k).powi(2);

        let tail: f64 = (self.params.l..n)
            .map(|i| self.jet.grad_diag[i] * xi[i] * xi[i])
            .sum();
        let rhs = (1.0 - self.params.eps) * (xi[0] / self.lambda_1).powi(2)
            - self.params.delta0 * tail / (self.lambda_1 * sigma_k);

        GapTerms {
            gap: lhs - rhs,
            scale: 1.0 + lhs.abs() + rhs.abs(),
            head_pinched: self.head_pinched,
            tail_pinched: self.tail_pinched,
        }
    }
}

/// One-shot form of [`ConcavityEvaluator`] for a single direction.
pub fn log_concavity_gap(
    lam: &EigenVector,
    xi: &[f64],
    params: &ConcavityParams,
) -> Result<GapTerms> {
    Ok(ConcavityEvaluator::new(lam, params)?.gap(xi))
}

/// Gap and scale of the log-quotient concavity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientGap {
    pub gap: f64,
    pub scale: f64,
}

/// Nonnegativity gap of the concavity comparison between `log sigma_k` and
/// `log sigma_l` along a diagonal direction: the returned gap equals
/// `-d^2/dt^2 log(sigma_k / sigma_l)(lambda + t xi)` at `t = 0`, which is
/// nonnegative on `Gamma_k` for `l < k`.
pub fn log_quotient_concavity_gap(
    lam: &EigenVector,
    xi: &[f64],
    k: usize,
    l: usize,
) -> Result<QuotientGap> {
    let n = lam.dim();
    if !(1..k).contains(&l) || k > n {
        return Err(Error::Domain(format!(
            "need 1 <= l < k <= n, got k = {k}, l = {l}, n = {n}"
        )));
    }
    if xi.len() != n {
        return Err(Error::Domain(format!(
            "direction dimension {} does not match n = {n}",
            xi.len()
        )));
    }
    let cone = in_gamma_k(lam, k)?;
    if !cone.in_cone {
        return Err(Error::Precondition(format!(
            "quotient gap needs lambda in Gamma_{k}, margin was {:.3e}",
            cone.margin
        )));
    }
    let jet_k = sigma_jet_diag(lam, k)?;
    let jet_l = sigma_jet_diag(lam, l)?;

    let pair_sum = |jet: &SigmaDerivatives| {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * jet.diag_pair(p, q) * xi[p] * xi[q];
            }
        }
        s
    };
    let dot = |jet: &SigmaDerivatives| -> f64 {
        (0..n).map(|i| jet.grad_diag[i] * xi[i]).sum()
    };

    let lhs = -pair_sum(&jet_k) / jet_k.value + pair_sum(&jet_l) / jet_l.value;
    let rhs = -(dot(&jet_k) / jet_k.value).powi(2) + (dot(&jet_l) / jet_l.value).powi(2);
    Ok(QuotientGap {
        gap: lhs - rhs,
        scale: 1.0 + lhs.abs() + rhs.abs(),
    })
}

/// The two algebraically equal forms of the Newton-type minor bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonMinorGap {
    /// `sigma_l^{pp} sigma_l^{qq} - sigma_l sigma_l^{pp,qq}`.
    pub value: f64,
    /// `sigma_{l-1}^2(lambda|pq) - sigma_l(lambda|pq) sigma_{l-2}(lambda|pq)`.
    pub alt_value: f64,
    /// One plus the magnitudes of every product entering either form. The
    /// first form cancels terms of size `lambda_p lambda_q sigma_{l-2}^2`
    /// down to the second, so its roundoff is relative to those products,
    /// not to the gap itself.
    pub scale: f64,
}

/// Evaluates `sigma_l^{pp} sigma_l^{qq} - sigma_l sigma_l^{pp,qq}` in both
/// of its algebraic forms. The quantity is nonnegative for every real
/// spectrum (not only in the cone): expanding both `sigma` factors along the
/// entries `p, q` reduces it to `sigma_{l-1}^2 - sigma_l sigma_{l-2}` of the
/// two-deletion minor, which Newton's inequalities bound below by zero.
pub fn newton_minor_gap(lam: &EigenVector, l: usize, p: usize, q: usize) -> Result<NewtonMinorGap> {
    let n = lam.dim();
    if p == q {
        return Err(Error::Domain(format!("indices must be distinct, got p = q = {p}")));
    }
    if p >= n || q >= n {
        return Err(Error::Domain(format!(
            "indices ({p}, {q}) out of range for dimension {n}"
        )));
    }
    if !(2..=n).contains(&l) {
        return Err(Error::Domain(format!("need 2 <= l <= {n}, got l = {l}")));
    }
    let s_l = sigma(lam, l)?;
    let g_p = sigma_minor(lam, l - 1, &[p])?;
    let g_q = sigma_minor(lam, l - 1, &[q])?;
    let m2 = sigma_minor(lam, l - 2, &[p, q])?;
    let value = g_p * g_q - s_l * m2;

    // Minors of dimension n - 2 vanish identically for orders above n - 2.
    let minor_at = |order: usize| -> Result<f64> {
        if order > n - 2 {
            Ok(0.0)
        } else {
            sigma_minor(lam, order, &[p, q])
        }
    };
    let m1 = minor_at(l - 1)?;
    let m0 = minor_at(l)?;
    let alt_value = m1 * m1 - m0 * m2;

    Ok(NewtonMinorGap {
        value,
        alt_value,
        scale: 1.0 + (g_p * g_q).abs() + (s_l * m2).abs() + m1 * m1 + (m0 * m2).abs(),
    })
}

/// Draws one spectrum from the interior of `Gamma_k`, biased toward the
/// cone boundary.
///
/// A Gaussian vector `g` is shifted along the all-ones direction, which is
/// a recession direction of the cone, so `{ c : g + c * 1 in Gamma_k }` is
/// an open half line `(c_*, inf)`. The entry point `c_*` is bisected and
/// the sample taken at `c_* + t^2 (c_hi - c_*)` with `t` uniform; squaring
/// concentrates mass near the boundary where the inequalities are tight.
pub fn sample_cone(n: usize, k: usize, rng: &mut impl Rng) -> Result<EigenVector> {
    if n < 2 || k == 0 || k > n {
        return Err(Error::Domain(format!(
            "cone sampling needs 1 <= k <= n, n >= 2, got n = {n}, k = {k}"
        )));
    }
    for _ in 0..64 {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mean = g.iter().sum::<f64>() / n as f64;
        let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        // All entries >= 1 lands in every Gamma_k; sigma_1 < 0 is outside
        // Gamma_1 and hence outside Gamma_k.
        let mut hi = -min + 1.0;
        let mut lo = -mean - 1.0;
        let in_cone = |c: f64| -> bool {
            let shifted: Vec<f64> = g.iter().map(|&v| v + c).collect();
            let lam = EigenVector::new(&shifted).expect("finite shifted Gaussian vector");
            in_gamma_k(&lam, k).expect("validated k").in_cone
        };
        let c_hi = hi;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if in_cone(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t: f64 = rng.random();
        let c = hi + (1e-9 + t * t) * (c_hi - hi).max(1e-9);
        let shifted: Vec<f64> = g.iter().map(|&v| v + c).collect();
        let lam = EigenVector::new(&shifted)?;
        if in_gamma_k(&lam, k)?.in_cone {
            return Ok(lam);
        }
    }
    Err(Error::Precondition(
        "cone sampling failed to clear the boundary after 64 attempts".into(),
    ))
}

/// Rejection sampler for pinched cone spectra: `lambda_1 > 0`,
/// `lambda_l >= delta * lambda_1`, `lambda_{l+1} <= delta_prime * lambda_1`,
/// `lambda in Gamma_k`. Every emitted sample re-validates all four
/// constraints.
pub struct ConstrainedConeSampler {
    n: usize,
    k: usize,
    l: usize,
    delta: f64,
    delta_prime: f64,
    lambda_scale: f64,
    proposal: ProposalMix,
    rng: ChaCha8Rng,
    proposed: u64,
    accepted: u64,
}

impl ConstrainedConeSampler {
    pub fn new(
        n: usize,
        k: usize,
        l: usize,
        delta: f64,
        delta_prime: f64,
        seed: u64,
        lambda_scale: f64,
        proposal: ProposalMix,
    ) -> Result<Self> {
        if n < 2 || !(1..k).contains(&l) || k > n {
            return Err(Error::Domain(format!(
                "need 1 <= l < k <= n with n >= 2, got n = {n}, k = {k}, l = {l}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) || !(delta_prime > 0.0 && delta_prime < delta) {
            return Err(Error::Domain(format!(
                "need 0 < delta_prime < delta < 1, got delta = {delta}, delta_prime = {delta_prime}"
            )));
        }
        if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
            return Err(Error::Domain(format!(
                "lambda_scale must be a positive real, got {lambda_scale}"
            )));
        }
        Ok(Self {
            n,
            k,
            l,
            delta,
            delta_prime,
            lambda_scale,
            proposal,
            rng: ChaCha8Rng::seed_from_u64(seed),
            proposed: 0,
            accepted: 0,
        })
    }

    /// (accepted, proposed) counts since construction.
    pub fn stats(&self) -> (u64, u64) {
        (self.accepted, self.proposed)
    }

    fn propose(&mut self) -> Vec<f64> {
        let lambda_1 = self.lambda_scale * self.rng.random_range(0.5..2.0);
        let mut v = Vec::with_capacity(self.n);
        v.push(lambda_1);
        for _ in 1..self.l {
            v.push(self.rng.random_range(self.delta * lambda_1..=lambda_1));
        }
        let tail_cap = self.delta_prime * lambda_1;
        let tail_floor = -((self.n - self.k) as f64 / self.k as f64) * lambda_1;
        let component = match self.proposal {
            ProposalMix::BoxOnly => 0,
            ProposalMix::Mixture => {
                let u: f64 = self.rng.random();
                if u < 0.25 {
                    0
                } else if u < 0.75 {
                    1
                } else {
                    2
                }
            }
        };
        for _ in self.l..self.n {
            let t = match component {
                // Full admissible box.
                0 => self.rng.random_range(tail_floor..=tail_cap),
                // Strictly positive tail, always inside the cone.
                1 => tail_cap * (1.0 - self.rng.random::<f64>()),
                // Symmetric sliver around zero.
                _ => self.rng.random_range(-tail_cap..=tail_cap),
            };
            v.push(t);
        }
        v
    }

    pub fn next_sample(&mut self) -> Result<EigenVector> {
        loop {
            self.proposed += 1;
            let mut v = self.propose();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let lam = EigenVector::from_sorted(v)?;
            let lambda_1 = lam.get(0);
            let ok = lambda_1 > 0.0
                && lam.get(self.l - 1) >= self.delta * lambda_1
                && lam.get(self.l) <= self.delta_prime * lambda_1
                && in_gamma_k(&lam, self.k)?.in_cone;
            if ok {
                self.accepted += 1;
                return Ok(lam);
            }
            if self.proposed >= STARVATION_WINDOW {
                let rate = self.accepted as f64 / self.proposed as f64;
                if rate < STARVATION_RATE {
                    return Err(Error::SamplerStarved {
                        accepted: self.accepted,
                        proposed: self.proposed,
                        rate,
                        floor: STARVATION_RATE,
                    });
                }
            }
        }
    }
}

/// Direction battery evaluated against each sampled spectrum: one uniform
/// sphere draw, every axis, and the two-coordinate stencils `e_1 +- e_i`
/// that the proof's extremal directions concentrate on.
pub fn xi_battery(n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * n - 1);
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(g.iter().map(|v| v / norm).collect());
            break;
        }
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    for i in 1..n {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e[i] = sign;
            out.push(e);
        }
    }
    out
}

/// Worst sample found by [`tail_constant_sup`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSample {
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
    pub required: f64,
}

/// Result of the empirical tail-constant search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailConstantReport {
    /// Smallest constant making the claim hold on every sample; infinite if
    /// some sample with a vanishing tail term violated the remaining terms.
    pub constant: f64,
    pub finite: bool,
    pub worst: Option<WorstSample>,
    pub lambda_samples: u64,
    pub evaluations: u64,
}

/// Empirical constant in the head/tail splitting bound for `sigma_l`: over
/// pinched cone samples, the claim
///
/// ```text
/// sum_{p != q} (sigma_l^{pp} sigma_l^{qq} - sigma_l sigma_l^{pp,qq}) xi_p xi_q
///   >= -eps/2 sum_{i <= l} (sigma_l^{ii} xi_i)^2
///      - C/eps sum_{i > l} (sigma_l^{ii} xi_i)^2
/// ```
///
/// pins down, per sample, the least admissible `C`; the report carries the
/// supremum and the sample attaining it.
pub fn tail_constant_sup(
    params: &ConcavityParams,
    budget: &SampleBudget,
) -> Result<TailConstantReport> {
    budget.validate()?;
    let mut sampler = ConstrainedConeSampler::new(
        params.n,
        params.k,
        params.l,
        params.delta,
        params.delta_prime,
        substream_seed(budget.seed, 0),
        budget.lambda_scale,
        budget.proposal,
    )?;
    let mut xi_rng = ChaCha8Rng::seed_from_u64(substream_seed(budget.seed, 1));

    let n = params.n;
    let l = params.l;
    let eps = params.eps;
    let mut constant = 0.0_f64;
    let mut finite = true;
    let mut worst: Option<WorstSample> = None;
    let mut evaluations = 0u64;

    for _ in 0..budget.count {
        let lam = sampler.next_sample()?;
        let jet = sigma_jet_diag(&lam, l)?;
        for xi in xi_battery(n, &mut xi_rng) {
            evaluations += 1;
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0
                        * (jet.grad_diag[p] * jet.grad_diag[q] - jet.value * jet.diag_pair(p, q))
                        * xi[p]
                        * xi[q];
                }
            }
            let t1: f64 = (0..l).map(|i| (jet.grad_diag[i] * xi[i]).powi(2)).sum();
            let t2: f64 = (l..n).map(|i| (jet.grad_diag[i] * xi[i]).powi(2)).sum();
            let slack = s + 0.5 * eps * t1;
            let required = if t2 > 0.0 {
                (eps * (-slack) / t2).max(0.0)
            } else if slack >= -REL_TOL * (1.0 + s.abs() + t1) {
                0.0
            } else {
                f64::INFINITY
            };
            if required > constant {
                constant = required;
                finite = required.is_finite();
                worst = Some(WorstSample {
                    lambda: lam.values().to_vec(),
                    xi: xi.clone(),
                    required,
                });
            }
        }
    }
    Ok(TailConstantReport {
        constant,
        finite,
        worst,
        lambda_samples: budget.count as u64,
        evaluations,
    })
}

/// Violation record from a failed bisection level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// The tail threshold at which the violation was found.
    pub delta_prime: f64,
    pub lambda: Vec<f64>,
    pub xi: Vec<f64>,
    pub gap: f64,
    pub scale: f64,
}

/// Per-level trace of the bisection search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRecord {
    pub delta_prime: f64,
    pub min_gap: f64,
    /// `lambda` samples drawn at this level; failed levels stop at the
    /// first violation, so only a surviving level exhausts the budget.
    pub samples: u64,
    pub survived: bool,
}

/// Outcome of [`search_delta_prime`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    /// Largest tail threshold surviving a full budget; 0 when the search
    /// hit [`DELTA_PRIME_FLOOR`] without a survivor.
    pub delta_prime_found: f64,
    pub survived: bool,
    /// Total `lambda` samples drawn across all levels.
    pub samples_checked: u64,
    /// Smallest gap observed at the reported level.
    pub min_gap: f64,
    /// Violation from the smallest failed level (just above the survivor),
    /// if any level failed.
    pub counterexample: Option<Counterexample>,
    pub levels: Vec<LevelRecord>,
}

/// Bisects the tail threshold `delta_prime` downward from `delta / 2`
/// until a level survives `budget.count` pinched samples (each tested
/// against the full direction battery) with no gap below
/// `-REL_TOL * scale`. A positive threshold exists for every admissible
/// `(n, k, l)`; the level returned here is the empirical one for this
/// sample budget.
pub fn search_delta_prime(
    n: usize,
    k: usize,
    l: usize,
    eps: f64,
    delta: f64,
    delta0: f64,
    budget: &SampleBudget,
) -> Result<SearchOutcome> {
    budget.validate()?;
    // Validates every parameter range; the candidate delta / 2 is a valid
    // delta_prime by construction.
    ConcavityParams::new(n, k, l, eps, delta, delta0, delta / 2.0)?;

    let mut candidate = delta / 2.0;
    let mut level_idx = 0u64;
    let mut total_samples = 0u64;
    let mut levels = Vec::new();
    let mut counterexample: Option<Counterexample> = None;

    while candidate >= DELTA_PRIME_FLOOR {
        let params = ConcavityParams::new(n, k, l, eps, delta, delta0, candidate)?;
        let mut sampler = ConstrainedConeSampler::new(
            n,
            k,
            l,
            delta,
            candidate,
            substream_seed(budget.seed, 2 * level_idx),
            budget.lambda_scale,
            budget.proposal,
        )?;
        let mut xi_rng =
            ChaCha8Rng::seed_from_u64(substream_seed(budget.seed, 2 * level_idx + 1));

        let mut min_gap = f64::INFINITY;
        let mut samples = 0u64;
        let mut violation: Option<Counterexample> = None;
        'level: for _ in 0..budget.count {
            let lam = sampler.next_sample()?;
            samples += 1;
            let ev = ConcavityEvaluator::new(&lam, &params)?;
            for xi in xi_battery(n, &mut xi_rng) {
                let g = ev.gap(&xi);
                min_gap = min_gap.min(g.gap);
                if g.gap < -REL_TOL * g.scale {
                    violation = Some(Counterexample {
                        delta_prime: candidate,
                        lambda: lam.values().to_vec(),
                        xi,
                        gap: g.gap,
                        scale: g.scale,
                    });
                    break 'level;
                }
            }
        }
        total_samples += samples;
        let survived = violation.is_none();
        levels.push(LevelRecord {
            delta_prime: candidate,
            min_gap,
            samples,
            survived,
        });
        if survived {
            return Ok(SearchOutcome {
                delta_prime_found: candidate,
                survived: true,
                samples_checked: total_samples,
                min_gap,
                counterexample,
                levels,
            });
        }
        counterexample = violation;
        candidate /= 2.0;
        level_idx += 1;
    }

    let min_gap = levels.last().map_or(f64::INFINITY, |r| r.min_gap);
    Ok(SearchOutcome {
        delta_prime_found: 0.0,
        survived: false,
        samples_checked: total_samples,
        min_gap,
        counterexample,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, l: usize) -> ConcavityParams {
        ConcavityParams::new(n, k, l, 0.5, 0.5, 0.5, 0.01).unwrap()
    }

    #[test]
    fn params_validation_rejects_bad_ranges() {
        assert!(ConcavityParams::new(3, 2, 2, 0.5, 0.5, 0.5, 0.01).is_err());
        assert!(ConcavityParams::new(3, 4, 1, 0.5, 0.5, 0.5, 0.01).is_err());
        assert!(ConcavityParams::new(3, 2, 1, 1.5, 0.5, 0.5, 0.01).is_err());
        assert!(ConcavityParams::new(3, 2, 1, 0.5, 0.5, 0.5, 0.6).is_err());
        assert!(ConcavityParams::new(3, 2, 1, 0.5, 0.5, 0.5, 0.01).is_ok());
    }

    #[test]
    fn quotient_gap_hand_anchor() {
        // All-ones, k = 2, l = 1, xi = (1, 1, 1): LHS = -2, RHS = -3.
        let lam = EigenVector::new(&[1.0, 1.0, 1.0]).unwrap();
        let g = log_quotient_concavity_gap(&lam, &[1.0, 1.0, 1.0], 2, 1).unwrap();
        assert!((g.gap - 1.0).abs() <= 1e-12, "gap = {}", g.gap);
        assert!((g.scale - 6.0).abs() <= 1e-12);
    }

    #[test]
    fn quotient_gap_vanishes_at_zero_direction() {
        let lam = EigenVector::new(&[2.0, 1.0, 0.5]).unwrap();
        let g = log_quotient_concavity_gap(&lam, &[0.0, 0.0, 0.0], 2, 1).unwrap();
        assert_eq!(g.gap, 0.0);
    }

    #[test]
    fn quotient_gap_rejects_cone_exit() {
        let lam = EigenVector::new(&[3.0, 1.0, -1.0]).unwrap();
        assert!(matches!(
            log_quotient_concavity_gap(&lam, &[1.0, 0.0, 0.0], 2, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn newton_minor_gap_hand_anchor() {
        let lam = EigenVector::new(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let g = newton_minor_gap(&lam, 2, 0, 1).unwrap();
        assert_eq!(g.value, 3.0);
        assert_eq!(g.alt_value, 3.0);
        assert!(newton_minor_gap(&lam, 2, 1, 1).is_err());
    }

    #[test]
    fn newton_minor_gap_top_order_degenerates_to_zero() {
        let lam = EigenVector::new(&[2.0, 1.0]).unwrap();
        let g = newton_minor_gap(&lam, 2, 0, 1).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.alt_value, 0.0);
    }

    #[test]
    fn concavity_gap_vanishes_at_zero_direction() {
        let lam = EigenVector::new(&[1.0, 0.001, 0.001]).unwrap();
        let g = log_concavity_gap(&lam, &[0.0; 3], &params(3, 2, 1)).unwrap();
        assert_eq!(g.gap, 0.0);
        assert_eq!(g.scale, 1.0);
    }

    #[test]
    fn concavity_gap_near_degenerate_tail_along_first_axis() {
        // lambda = (1, t, t) with a tiny tail: the leading term of the LHS
        // approaches 1 / lambda_1^2 and dominates (1 - eps) / lambda_1^2.
        let lam = EigenVector::new(&[1.0, 1e-3, 1e-3]).unwrap();
        let g = log_concavity_gap(&lam, &[1.0, 0.0, 0.0], &params(3, 2, 1)).unwrap();
        assert!(g.head_pinched);
        assert!(g.tail_pinched);
        assert!(g.gap > 0.4, "gap = {}", g.gap);
    }

    #[test]
    fn concavity_gap_flags_track_hypotheses() {
        // Tail entry above delta_prime * lambda_1: tail flag must drop.
        let lam = EigenVector::new(&[1.0, 0.2, 0.1]).unwrap();
        let g = log_concavity_gap(&lam, &[1.0, 0.0, 0.0], &params(3, 2, 1)).unwrap();
        assert!(g.head_pinched);
        assert!(!g.tail_pinched);
    }

    #[test]
    fn concavity_gap_is_scaling_invariant() {
        let lam = EigenVector::new(&[1.3, 0.9, 0.004, -0.002]).unwrap();
        let p = params(4, 3, 2);
        let xi = [0.7, -0.4, 1.1, 0.3];
        let base = log_concavity_gap(&lam, &xi, &p).unwrap();
        for t in [1e-2, 1e2] {
            let lam_t =
                EigenVector::new(&lam.values().iter().map(|v| t * v).collect::<Vec<_>>()).unwrap();
            let xi_t: Vec<f64> = xi.iter().map(|v| t * v).collect();
            let g = log_concavity_gap(&lam_t, &xi_t, &p).unwrap();
            assert!(
                (g.gap - base.gap).abs() <= 1e-12 * base.scale,
                "t = {t}: {} vs {}",
                g.gap,
                base.gap
            );
        }
    }

    #[test]
    fn cone_sampler_emits_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(n, k) in &[(3, 2), (5, 3), (8, 4)] {
            for _ in 0..50 {
                let lam = sample_cone(n, k, &mut rng).unwrap();
                assert!(in_gamma_k(&lam, k).unwrap().in_cone);
            }
        }
    }

    #[test]
    fn constrained_sampler_validates_and_reproduces() {
        let mk = || {
            ConstrainedConeSampler::new(4, 3, 1, 0.5, 0.01, 42, 1.0, ProposalMix::Mixture).unwrap()
        };
        let mut a = mk();
        let mut b = mk();
        for _ in 0..20 {
            let la = a.next_sample().unwrap();
            let lb = b.next_sample().unwrap();
            assert_eq!(la.values(), lb.values());
            let l1 = la.get(0);
            assert!(l1 > 0.0);
            assert!(la.get(0) >= 0.5 * l1);
            assert!(la.get(1) <= 0.01 * l1);
            assert!(in_gamma_k(&la, 3).unwrap().in_cone);
        }
        let (acc, prop) = a.stats();
        assert_eq!(acc, 20);
        assert!(prop >= 20);
    }

    #[test]
    fn box_only_proposals_starve_at_tiny_tail_threshold() {
        let mut s =
            ConstrainedConeSampler::new(3, 2, 1, 0.5, 1e-6, 9, 1.0, ProposalMix::BoxOnly).unwrap();
        let mut starved = false;
        for _ in 0..200 {
            match s.next_sample() {
                Ok(_) => {}
                Err(Error::SamplerStarved { rate, floor, .. }) => {
                    assert!(rate < floor);
                    starved = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(starved, "expected starvation at delta_prime = 1e-6");
    }

    #[test]
    fn battery_has_expected_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = xi_battery(4, &mut rng);
        assert_eq!(b.len(), 3 * 4 - 1);
        let norm: f64 = b[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        assert_eq!(b[1], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(b[5], vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(b[6], vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn search_survives_on_small_case() {
        let budget = SampleBudget::new(300, 11);
        let out = search_delta_prime(3, 2, 1, 0.5, 0.5, 0.5, &budget).unwrap();
        assert!(out.survived);
        assert!(out.delta_prime_found >= DELTA_PRIME_FLOOR);
        assert!(out.min_gap >= -1e-10);
        assert_eq!(
            out.levels.last().unwrap().samples,
            300,
            "surviving level must exhaust the budget"
        );
    }

    #[test]
    fn search_is_deterministic() {
        let budget = SampleBudget::new(120, 5);
        let a = search_delta_prime(4, 3, 2, 0.25, 0.75, 0.25, &budget).unwrap();
        let b = search_delta_prime(4, 3, 2, 0.25, 0.75, 0.25, &budget).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counterexamples_reproduce_their_gap() {
        // A tight eps forces early levels to fail, producing a trace.
        let budget = SampleBudget::new(400, 17);
        let out = search_delta_prime(3, 2, 1, 0.05, 0.75, 0.25, &budget).unwrap();
        if let Some(cex) = &out.counterexample {
            let params =
                ConcavityParams::new(3, 2, 1, 0.05, 0.75, 0.25, cex.delta_prime).unwrap();
            let lam = EigenVector::new(&cex.lambda).unwrap();
            let g = log_concavity_gap(&lam, &cex.xi, &params).unwrap();
            assert_eq!(g.gap.to_bits(), cex.gap.to_bits());
            assert!(cex.gap < -REL_TOL * cex.scale);
        }
    }

    #[test]
    fn tail_constant_is_nonnegative_and_reproducible() {
        let p = ConcavityParams::new(4, 3, 1, 0.5, 0.9, 0.5, 0.01).unwrap();
        let budget = SampleBudget::new(200, 23);
        let a = tail_constant_sup(&p, &budget).unwrap();
        let b = tail_constant_sup(&p, &budget).unwrap();
        assert_eq!(a, b);
        assert!(a.constant >= 0.0);
        assert!(a.finite);
        if let Some(w) = &a.worst {
            assert_eq!(w.required, a.constant);
        }
    }
}
