//! Elementary symmetric functions and their derivative structure.
//!
//! For `lambda` in R^n the k-th elementary symmetric function is the sum of
//! all k-fold products of distinct entries, with `sigma_0 = 1` and
//! `sigma_k = 0` for `k > n`. Everything here rests on the prefix recursion
//!
//! ```text
//! e_k(m) = e_k(m-1) + lambda_m e_{k-1}(m-1)
//! ```
//!
//! which costs O(nk) and never enumerates subsets, so dimensions well past
//! the subset-enumeration horizon stay cheap.
//!
//! Deletion minors `sigma_k(lambda | i)` and `sigma_k(lambda | ij)` (the
//! function with one or two entries removed) carry the derivative calculus:
//! at a diagonal matrix with diagonal `lambda`,
//!
//! ```text
//! d sigma_k / d a_pp            = sigma_{k-1}(lambda | p)
//! d^2 sigma_k / d a_pp d a_rr   = sigma_{k-2}(lambda | pr)    (p != r)
//! d^2 sigma_k / d a_pq d a_qp   = -sigma_{k-2}(lambda | pq)   (p != q)
//! ```
//!
//! and every other second derivative vanishes. The same minors appear in the
//! expansion identities checked by [`identity_residuals`]:
//!
//! ```text
//! sigma_k(lambda) = lambda_i sigma_{k-1}(lambda | i) + sigma_k(lambda | i)
//! sum_i sigma_k(lambda | i)            = (n - k) sigma_k(lambda)
//! sum_i lambda_i sigma_{k-1}(lambda | i) = k sigma_k(lambda)
//! ```
//!
//! The Garding cone `Gamma_k = { lambda : sigma_j(lambda) > 0 for j <= k }`
//! is where `sigma_k^{1/k}` is concave; [`in_gamma_k`] reports membership
//! together with the margin `min_j sigma_j` that the inequality lab
//! conditions on.
//!
//! All functions are pure and take arguments by shared reference; nothing
//! here holds interior mutability, so values can be shared across threads
//! freely.

mod matrix;

pub use matrix::{sigma_grad_matrix, sigma_hessian_form, SymMatrix};

use crate::{Error, Result};

/// Relative tolerance used when a nonnegativity claim is evaluated on
/// floating point data. Margins above `-REL_TOL * scale` count as holding.
pub const REL_TOL: f64 = 1e-10;

/// Argument vector for the symmetric function machinery: finite entries,
/// dimension at least 2, stored sorted in descending order. The sort
/// permutation is retained so callers working in a matrix eigenbasis can map
/// per-entry results back to their own ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenVector {
    values: Vec<f64>,
    perm: Vec<usize>,
}

impl EigenVector {
    /// Sorts `input` descending and records where each slot came from.
    /// Ties keep their input order, so construction is deterministic.
    pub fn new(input: &[f64]) -> Result<Self> {
        if input.len() < 2 {
            return Err(Error::Domain(format!(
                "eigenvalue vector needs dimension >= 2, got {}",
                input.len()
            )));
        }
        if let Some(bad) = input.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry {bad}")));
        }
        let mut perm: Vec<usize> = (0..input.len()).collect();
        perm.sort_by(|&a, &b| input[b].partial_cmp(&input[a]).unwrap().then(a.cmp(&b)));
        let values = perm.iter().map(|&i| input[i]).collect();
        Ok(Self { values, perm })
    }

    /// Wraps a vector that is already sorted descending (identity
    /// permutation). Used by samplers that construct sorted output directly.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "eigenvalue vector needs dimension >= 2, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite entry {bad}")));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(
                "from_sorted requires descending order".into(),
            ));
        }
        let perm = (0..values.len()).collect();
        Ok(Self { values, perm })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Entries in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `perm()[i]` is the position in the constructor input that now sits at
    /// sorted slot `i`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// All prefix values `e_0 .. e_{k_max}` of the elementary symmetric
/// functions of `values`, by the O(nk) recursion. `e_j = 0` for
/// `j > values.len()` comes out naturally.
pub(crate) fn elementary_all(values: &[f64], k_max: usize) -> Vec<f64> {
    let mut e = vec![0.0; k_max + 1];
    e[0] = 1.0;
    for (m, &v) in values.iter().enumerate() {
        let top = k_max.min(m + 1);
        for j in (1..=top).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

/// `sigma_k` of a raw slice, entry order irrelevant.
pub(crate) fn sigma_raw(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    elementary_all(values, k)[k]
}

/// `sigma_k` of the slice with position `skip` removed.
pub(crate) fn sigma_raw_minor(values: &[f64], k: usize, skip: usize) -> f64 {
    let minor: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, &v)| v)
        .collect();
    sigma_raw(&minor, k)
}

/// `sigma_k(lambda)`. `k = 0` gives 1; `k > n` is a domain error.
pub fn sigma(lam: &EigenVector, k: usize) -> Result<f64> {
    let n = lam.dim();
    if k > n {
        return Err(Error::Domain(format!("sigma_{k} undefined for dimension {n}")));
    }
    Ok(elementary_all(lam.values(), k)[k])
}

/// `sigma_k` of `lambda` with the entries at the (sorted-order, 0-based)
/// positions in `drop` removed. At most two positions may be dropped.
pub fn sigma_minor(lam: &EigenVector, k: usize, drop: &[usize]) -> Result<f64> {
    let n = lam.dim();
    if drop.len() > 2 {
        return Err(Error::Domain(format!(
            "at most two entries can be dropped, got {}",
            drop.len()
        )));
    }
    if drop.len() == 2 && drop[0] == drop[1] {
        return Err(Error::Domain(format!("duplicate drop index {}", drop[0])));
    }
    if let Some(&bad) = drop.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("drop index {bad} out of range for dimension {n}")));
    }
    let m = n - drop.len();
    if k > m {
        return Err(Error::Domain(format!(
            "sigma_{k} undefined for minor of dimension {m}"
        )));
    }
    let minor: Vec<f64> = lam
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, &v)| v)
        .collect();
    Ok(elementary_all(&minor, k)[k])
}

/// Garding cone membership report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeReport {
    pub in_cone: bool,
    /// `min_{1 <= j <= k} sigma_j(lambda)`; positive iff `in_cone`.
    pub margin: f64,
}

/// Membership of `lambda` in `Gamma_k` together with the margin.
pub fn in_gamma_k(lam: &EigenVector, k: usize) -> Result<ConeReport> {
    let n = lam.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "Gamma_k needs 1 <= k <= {n}, got k = {k}"
        )));
    }
    let e = elementary_all(lam.values(), k);
    let margin = e[1..=k].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ConeReport {
        in_cone: margin > 0.0,
        margin,
    })
}

/// Value, gradient, and second derivatives of `A -> sigma_k(eigenvalues(A))`
/// at a diagonal matrix, expressed through deletion minors.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaDerivatives {
    pub value: f64,
    /// `grad_diag[p] = sigma_{k-1}(lambda | p)`.
    pub grad_diag: Vec<f64>,
    /// Row-major `n x n` table of `sigma_{k-2}(lambda | pr)` for `p != r`,
    /// zero on the diagonal. See [`SigmaDerivatives::diag_pair`] and
    /// [`SigmaDerivatives::off_pair`] for the two second-derivative species.
    hess_pairs: Vec<f64>,
    n: usize,
}

impl SigmaDerivatives {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `d^2 sigma_k / d a_pp d a_rr = sigma_{k-2}(lambda | pr)`, `p != r`.
    /// Zero when `p == r`.
    pub fn diag_pair(&self, p: usize, r: usize) -> f64 {
        self.hess_pairs[p * self.n + r]
    }

    /// `d^2 sigma_k / d a_pq d a_qp = -sigma_{k-2}(lambda | pq)`, `p != q`.
    pub fn off_pair(&self, p: usize, q: usize) -> f64 {
        -self.hess_pairs[p * self.n + q]
    }
}

/// Full derivative jet of `sigma_k` at the diagonal matrix `diag(lambda)`.
/// `k = 0` is the constant 1 with vanishing derivatives.
pub fn sigma_jet_diag(lam: &EigenVector, k: usize) -> Result<SigmaDerivatives> {
    let n = lam.dim();
    if k > n {
        return Err(Error::Domain(format!("sigma_{k} undefined for dimension {n}")));
    }
    let values = lam.values();
    let value = elementary_all(values, k)[k];
    let mut grad_diag = vec![0.0; n];
    if k >= 1 {
        for p in 0..n {
            grad_diag[p] = sigma_raw_minor(values, k - 1, p);
        }
    }
    let mut hess_pairs = vec![0.0; n * n];
    if k >= 2 {
        for p in 0..n {
            for r in (p + 1)..n {
                let minor: Vec<f64> = values
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != p && *i != r)
                    .map(|(_, &v)| v)
                    .collect();
                let s = sigma_raw(&minor, k - 2);
                hess_pairs[p * n + r] = s;
                hess_pairs[r * n + p] = s;
            }
        }
    }
    Ok(SigmaDerivatives {
        value,
        grad_diag,
        hess_pairs,
        n,
    })
}

/// Absolute residuals of the three expansion identities, with the common
/// scale `max(1, |sigma_k|)` they should be compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `max_i | sigma_k - lambda_i sigma_{k-1}(lambda|i) - sigma_k(lambda|i) |`
    pub expansion: f64,
    /// `| sum_i sigma_k(lambda|i) - (n - k) sigma_k |`
    pub minor_sum: f64,
    /// `| sum_i lambda_i sigma_{k-1}(lambda|i) - k sigma_k |`
    pub weighted_sum: f64,
    pub scale: f64,
}

/// Evaluates the three identities for `1 <= k <= n`. At `k = n` the minors
/// of dimension `n - 1` make `sigma_n(lambda | i) = 0`, and both sides of
/// the minor-sum identity vanish.
pub fn identity_residuals(lam: &EigenVector, k: usize) -> Result<IdentityResiduals> {
    let n = lam.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "identities need 1 <= k <= {n}, got k = {k}"
        )));
    }
    let values = lam.values();
    let sigma_k = elementary_all(values, k)[k];

    let mut expansion = 0.0_f64;
    let mut minor_total = 0.0_f64;
    let mut weighted_total = 0.0_f64;
    for i in 0..n {
        let minor: Vec<f64> = values
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &v)| v)
            .collect();
        let e = elementary_all(&minor, k);
        let sigma_k_minor = e[k];
        let sigma_km1_minor = e[k - 1];
        expansion = expansion.max((sigma_k - values[i] * sigma_km1_minor - sigma_k_minor).abs());
        minor_total += sigma_k_minor;
        weighted_total += values[i] * sigma_km1_minor;
    }
    let minor_sum = (minor_total - (n - k) as f64 * sigma_k).abs();
    let weighted_sum = (weighted_total - k as f64 * sigma_k).abs();
    Ok(IdentityResiduals {
        expansion,
        minor_sum,
        weighted_sum,
        scale: sigma_k.abs().max(1.0),
    })
}

/// Structural bounds that hold for sorted `lambda` in `Gamma_k`, evaluated
/// with explicit margins. The top-term ratio has no known sharp dimensional
/// constant, so it is reported rather than judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaKBounds {
    /// `min over { i : lambda_i <= 0 }` of `((n-k)/k) lambda_1 + lambda_i`;
    /// `((n-k)/k) lambda_1` when no entry is nonpositive. Nonnegative iff
    /// every nonpositive entry obeys `-lambda_i <= ((n-k)/k) lambda_1`.
    pub neg_entry_margin: f64,
    pub neg_entry_holds: bool,
    /// `min over 1 <= l < k` of `sigma_l - lambda_1 ... lambda_l`; infinite
    /// when `k = 1` leaves nothing to check.
    pub leading_product_margin: f64,
    pub leading_product_holds: bool,
    /// `lambda_1 sigma_{k-1}(lambda | 1) / sigma_k`. Its empirical infimum
    /// over the cone is the dimensional constant in the top-term lower
    /// bound.
    pub top_term_ratio: f64,
    /// `sum_i lambda_i^2 sigma_{k-1}(lambda | i) - (k/n) sigma_1 sigma_k`.
    pub weighted_square_margin: f64,
    pub weighted_square_holds: bool,
}

/// Evaluates the cone bounds for `lambda` in `Gamma_k` (checked).
pub fn cone_bounds_report(lam: &EigenVector, k: usize) -> Result<GammaKBounds> {
    let n = lam.dim();
    let cone = in_gamma_k(lam, k)?;
    if !cone.in_cone {
        return Err(Error::Precondition(format!(
            "cone bounds need lambda in Gamma_{k}, margin was {:.3e}",
            cone.margin
        )));
    }
    let values = lam.values();
    let lambda_1 = values[0];
    let scale = lambda_1.abs().max(1.0);
    let ratio_bound = (n - k) as f64 / k as f64 * lambda_1;

    let neg_entry_margin = values
        .iter()
        .filter(|&&v| v <= 0.0)
        .map(|&v| ratio_bound + v)
        .fold(ratio_bound, f64::min);
    let neg_entry_holds = neg_entry_margin >= -REL_TOL * scale;

    let mut leading_product_margin = f64::INFINITY;
    let mut product = 1.0;
    let e = elementary_all(values, k);
    for l in 1..k {
        product *= values[l - 1];
        leading_product_margin = leading_product_margin.min(e[l] - product);
    }
    let leading_product_holds =
        leading_product_margin == f64::INFINITY || leading_product_margin >= -REL_TOL * scale.powi(k as i32);

    let sigma_k = e[k];
    let top_term_ratio = lambda_1 * sigma_raw_minor(values, k - 1, 0) / sigma_k;

    let mut weighted = 0.0;
    for i in 0..n {
        weighted += values[i] * values[i] * sigma_raw_minor(values, k - 1, i);
    }
    let weighted_square_margin = weighted - k as f64 / n as f64 * e[1] * sigma_k;
    let weighted_square_holds = weighted_square_margin >= -REL_TOL * scale.powi(k as i32 + 1);

    Ok(GammaKBounds {
        neg_entry_margin,
        neg_entry_holds,
        leading_product_margin,
        leading_product_holds,
        top_term_ratio,
        weighted_square_margin,
        weighted_square_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_descending_and_tracks_permutation() {
        let v = EigenVector::new(&[1.0, 3.0, -1.0]).unwrap();
        assert_eq!(v.values(), &[3.0, 1.0, -1.0]);
        assert_eq!(v.perm(), &[1, 0, 2]);
    }

    #[test]
    fn rejects_tiny_and_nonfinite_input() {
        assert!(EigenVector::new(&[1.0]).is_err());
        assert!(EigenVector::new(&[1.0, f64::NAN]).is_err());
        assert!(EigenVector::from_sorted(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn sigma_anchor_values() {
        let ones = EigenVector::new(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(sigma(&ones, 0).unwrap(), 1.0);
        assert_eq!(sigma(&ones, 2).unwrap(), 6.0);
        let mixed = EigenVector::new(&[3.0, 1.0, -1.0]).unwrap();
        assert_eq!(sigma(&mixed, 2).unwrap(), -1.0);
        assert!(sigma(&mixed, 4).is_err());
    }

    #[test]
    fn minor_drops_by_sorted_position() {
        let v = EigenVector::new(&[3.0, 2.0, 1.0]).unwrap();
        // dropping the middle entry leaves (3, 1)
        assert_eq!(sigma_minor(&v, 1, &[1]).unwrap(), 4.0);
        assert_eq!(sigma_minor(&v, 1, &[0, 2]).unwrap(), 2.0);
        assert!(sigma_minor(&v, 1, &[1, 1]).is_err());
        assert!(sigma_minor(&v, 2, &[0, 1]).is_err());
        assert!(sigma_minor(&v, 1, &[3]).is_err());
    }

    #[test]
    fn cone_membership_and_margin() {
        let v = EigenVector::new(&[3.0, 1.0, -1.0]).unwrap();
        let r1 = in_gamma_k(&v, 1).unwrap();
        assert!(r1.in_cone);
        assert_eq!(r1.margin, 3.0);
        let r2 = in_gamma_k(&v, 2).unwrap();
        assert!(!r2.in_cone);
        assert_eq!(r2.margin, -1.0);
        assert!(in_gamma_k(&v, 0).is_err());
    }

    #[test]
    fn jet_gradient_and_pair_table() {
        let v = EigenVector::new(&[3.0, 2.0, 1.0]).unwrap();
        let jet = sigma_jet_diag(&v, 2).unwrap();
        assert_eq!(jet.value, 11.0);
        assert_eq!(jet.grad_diag, vec![3.0, 4.0, 5.0]);
        // sigma_0 of any minor is 1
        assert_eq!(jet.diag_pair(0, 1), 1.0);
        assert_eq!(jet.off_pair(0, 1), -1.0);
        assert_eq!(jet.diag_pair(1, 1), 0.0);
    }

    #[test]
    fn jet_at_k_zero_and_k_n() {
        let v = EigenVector::new(&[2.0, 1.0]).unwrap();
        let j0 = sigma_jet_diag(&v, 0).unwrap();
        assert_eq!(j0.value, 1.0);
        assert_eq!(j0.grad_diag, vec![0.0, 0.0]);
        let jn = sigma_jet_diag(&v, 2).unwrap();
        assert_eq!(jn.value, 2.0);
        assert_eq!(jn.grad_diag, vec![1.0, 2.0]);
        assert_eq!(jn.diag_pair(0, 1), 1.0);
    }

    #[test]
    fn identities_vanish_on_exact_arithmetic_inputs() {
        let v = EigenVector::new(&[3.0, 1.0, -1.0]).unwrap();
        for k in 1..=3 {
            let r = identity_residuals(&v, k).unwrap();
            assert_eq!(r.expansion, 0.0, "k = {k}");
            assert_eq!(r.minor_sum, 0.0, "k = {k}");
            assert_eq!(r.weighted_sum, 0.0, "k = {k}");
        }
    }

    #[test]
    fn cone_bounds_worked_example() {
        // (2, 2, -1/2) lies in Gamma_2 with sigma_2 = 2.
        let v = EigenVector::new(&[2.0, 2.0, -0.5]).unwrap();
        let b = cone_bounds_report(&v, 2).unwrap();
        assert!(b.neg_entry_holds);
        assert!((b.neg_entry_margin - 0.5).abs() < 1e-15);
        assert!(b.leading_product_holds);
        assert!(b.weighted_square_holds);
        assert!(b.top_term_ratio.is_finite());
    }

    #[test]
    fn cone_bounds_equality_case() {
        // All-ones in Gamma_3: the weighted square bound is met with equality.
        let v = EigenVector::new(&[1.0, 1.0, 1.0]).unwrap();
        let b = cone_bounds_report(&v, 3).unwrap();
        assert!(b.weighted_square_margin.abs() < 1e-14);
        // sigma_2 = 3 >= lambda_1 lambda_2 = 1
        assert!((b.leading_product_margin - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cone_bounds_reject_outside_cone() {
        let v = EigenVector::new(&[3.0, 1.0, -1.0]).unwrap();
        assert!(matches!(
            cone_bounds_report(&v, 2),
            Err(Error::Precondition(_))
        ));
    }
}
