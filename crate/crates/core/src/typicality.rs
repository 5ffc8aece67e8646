//! Method-of-types analysis of outcome sequences: group signatures,
//! relative entropy, exact and Stirling sequence weights, Gaussian
//! separation bounds, typical-neighborhood weights over the simplex grid,
//! and the resulting error bounds.
//!
//! All combinatorics run in the log domain with compensated summation;
//! simplex enumeration is lexicographic so outputs are deterministic.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
// f64 math comes from the Float trait in no_std builds; toolchains that
// can see std resolve the same methods inherently and mark this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::povm::CanonicalDecomposition;

/// Empirical outcome counts of a length-m sequence; f_i = counts_i / m.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrequencyDistribution {
    counts: Vec<u64>,
}

impl FrequencyDistribution {
    pub fn new(counts: Vec<u64>) -> Result<Self, Error> {
        if counts.is_empty() {
            return Err(Error::LengthMismatch { left: 0, right: 1 });
        }
        Ok(FrequencyDistribution { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sequence length m.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn outcomes(&self) -> usize {
        self.counts.len()
    }

    pub fn probs(&self) -> Vec<f64> {
        let m = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / m).collect()
    }
}

/// The outcome distribution F_k = (|c~_{ik}|^2) attached to a group; the
/// typical sequences realizing that group's projection concentrate here.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GroupSignature {
    probs: Vec<f64>,
}

impl GroupSignature {
    pub fn new(probs: Vec<f64>) -> Result<Self, Error> {
        if probs.is_empty() {
            return Err(Error::LengthMismatch { left: 0, right: 1 });
        }
        if probs.iter().any(|&p| !(-1e-12..=1.0 + 1e-12).contains(&p)) {
            return Err(Error::NonFinite);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                norm: sum,
                tol: 1e-12,
            });
        }
        Ok(GroupSignature { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn outcomes(&self) -> usize {
        self.probs.len()
    }
}

/// Signatures of all s groups, in group order.
pub fn group_signatures(canon: &CanonicalDecomposition) -> Vec<GroupSignature> {
    canon
        .representatives()
        .iter()
        .map(|rep| {
            let probs: Vec<f64> = rep.as_slice().iter().map(|z| z.norm_sqr()).collect();
            // Unit representatives sum to 1 up to rounding; renormalize the
            // last few ulps so downstream validation is exact.
            let sum: f64 = probs.iter().sum();
            GroupSignature {
                probs: probs.into_iter().map(|p| p / sum).collect(),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Relative entropy S(F||G) = sum f_i ln(f_i / g_i), with 0 ln 0 = 0 and
/// +infinity when F puts mass where G has none. Never negative.
pub fn relative_entropy(f: &[f64], g: &[f64]) -> Result<f64, Error> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: g.len(),
        });
    }
    let mut acc = Kahan::default();
    for (&fi, &gi) in f.iter().zip(g) {
        if fi == 0.0 {
            continue;
        }
        if gi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc.add(fi * (fi / gi).ln());
    }
    Ok(acc.value().max(0.0))
}

fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// ln of the multinomial type count C(m + r - 1, r - 1).
pub fn ln_type_count(m: u64, r: usize) -> f64 {
    libm::lgamma((m + r as u64) as f64) - ln_factorial(m) - ln_factorial(r as u64 - 1)
}

/// Exact probability that an i.i.d. G-sequence of length m lands in the
/// type class of `counts`: multinomial(m; counts) * prod g_i^{counts_i}.
/// Computed in the log domain.
pub fn sequence_weight_exact(fd: &FrequencyDistribution, g: &GroupSignature) -> Result<f64, Error> {
    if fd.outcomes() != g.outcomes() {
        return Err(Error::LengthMismatch {
            left: fd.outcomes(),
            right: g.outcomes(),
        });
    }
    let mut log = ln_factorial(fd.total());
    for (&mi, &gi) in fd.counts().iter().zip(g.probs()) {
        if mi == 0 {
            continue;
        }
        if gi == 0.0 {
            return Ok(0.0);
        }
        log -= ln_factorial(mi);
        log += mi as f64 * gi.ln();
    }
    Ok(log.exp().min(1.0))
}

/// Stirling approximation of the same weight: e^{-m S(F||G)}. Always an
/// upper bound on the exact weight.
pub fn sequence_weight_stirling(
    fd: &FrequencyDistribution,
    g: &GroupSignature,
) -> Result<f64, Error> {
    let s = relative_entropy(&fd.probs(), g.probs())?;
    Ok((-(fd.total() as f64) * s).exp())
}

/// One curvature term (f_j - f_k)^2 / denom with the zero-denominator
/// convention: a vanishing numerator contributes nothing, otherwise the
/// curvature is infinite and the width along this line collapses to zero.
fn curvature_term(num_sq: f64, denom: f64) -> f64 {
    if num_sq == 0.0 {
        0.0
    } else if denom == 0.0 {
        f64::INFINITY
    } else {
        num_sq / denom
    }
}

fn curvature_sum(f_num: &[f64], f_other: &[f64], denom: &[f64]) -> f64 {
    let mut acc = Kahan::default();
    let mut infinite = false;
    for i in 0..f_num.len() {
        let diff = f_num[i] - f_other[i];
        let t = curvature_term(diff * diff, denom[i]);
        if t.is_infinite() {
            infinite = true;
        } else {
            acc.add(t);
        }
    }
    if infinite {
        f64::INFINITY
    } else {
        acc.value()
    }
}

/// Half widths (dt_j, dt_k) of the two Gaussians around F_j and F_k along
/// the straight line joining them, at height ratio eta:
/// dt = sqrt(2 |ln eta| / m) * (sum_i (f_ji - f_ki)^2 / f_i)^{-1/2}.
pub fn gaussian_half_width(
    fj: &GroupSignature,
    fk: &GroupSignature,
    m: u64,
    eta: f64,
) -> Result<(f64, f64), Error> {
    if fj.outcomes() != fk.outcomes() {
        return Err(Error::LengthMismatch {
            left: fj.outcomes(),
            right: fk.outcomes(),
        });
    }
    let sj = curvature_sum(fj.probs(), fk.probs(), fj.probs());
    let sk = curvature_sum(fj.probs(), fk.probs(), fk.probs());
    if sj == 0.0 && sk == 0.0 {
        return Err(Error::IdenticalSignatures { j: 0, k: 1 });
    }
    let amp = (2.0 * eta.ln().abs() / m as f64).sqrt();
    let width = |s: f64| if s.is_infinite() { 0.0 } else { amp / s.sqrt() };
    Ok((width(sj), width(sk)))
}

/// True when the two eta-level Gaussian half widths fit inside the unit
/// line segment joining the signatures, i.e. dt_j + dt_k < 1.
pub fn gaussians_separated(
    fj: &GroupSignature,
    fk: &GroupSignature,
    m: u64,
    eta: f64,
) -> Result<bool, Error> {
    let (dj, dk) = gaussian_half_width(fj, fk, m, eta)?;
    Ok(dj + dk < 1.0)
}

/// Lower bound on the number of rounds for all Gaussians to be separated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeparationBound {
    /// Smallest integer strictly above `bound`.
    pub m_min: u64,
    pub bound: f64,
    /// The pair of signatures that sets the bound.
    pub limiting_pair: (usize, usize),
    /// Pairs with equal signatures, excluded from the bound.
    pub coinciding_pairs: Vec<(usize, usize)>,
}

fn signatures_coincide(a: &GroupSignature, b: &GroupSignature, tol: f64) -> bool {
    a.probs()
        .iter()
        .zip(b.probs())
        .all(|(&x, &y)| (x - y).abs() <= tol)
}

/// m > 2 |ln eta| max_{j != k} [S_j^{-1/2} + S_k^{-1/2}]^2 with
/// S_j = sum_i (f_ji - f_ki)^2 / f_ji. Coinciding signature pairs are
/// excluded and reported; with none left the bound is undefined.
pub fn separation_m_min(
    signatures: &[GroupSignature],
    eta: f64,
    coincide_tol: f64,
) -> Result<SeparationBound, Error> {
    if signatures.len() < 2 {
        return Err(Error::NoDistinctSignatures);
    }
    let mut coinciding = Vec::new();
    let mut bound = f64::NEG_INFINITY;
    let mut limiting = (0usize, 0usize);
    for j in 0..signatures.len() {
        for k in j + 1..signatures.len() {
            if signatures_coincide(&signatures[j], &signatures[k], coincide_tol) {
                coinciding.push((j, k));
                continue;
            }
            let sj = curvature_sum(
                signatures[j].probs(),
                signatures[k].probs(),
                signatures[j].probs(),
            );
            let sk = curvature_sum(
                signatures[j].probs(),
                signatures[k].probs(),
                signatures[k].probs(),
            );
            let radius = |s: f64| if s.is_infinite() { 0.0 } else { 1.0 / s.sqrt() };
            let pair_bound =
                2.0 * eta.ln().abs() * (radius(sj) + radius(sk)) * (radius(sj) + radius(sk));
            if pair_bound > bound {
                bound = pair_bound;
                limiting = (j, k);
            }
        }
    }
    if bound == f64::NEG_INFINITY {
        return Err(Error::NoDistinctSignatures);
    }
    let m_min = (bound.max(0.0).floor() as u64) + 1;
    Ok(SeparationBound {
        m_min,
        bound,
        limiting_pair: limiting,
        coinciding_pairs: coinciding,
    })
}

/// Number of grid points (types) of denominator m on the r-simplex, or
/// `None` on overflow.
pub fn simplex_grid_len(m: u64, r: usize) -> Option<u128> {
    let mut c: u128 = 1;
    for i in 1..r as u128 {
        c = c.checked_mul(m as u128 + i)? / i;
    }
    Some(c)
}

/// Lexicographically ascending iterator over all count vectors of length r
/// summing to m.
pub fn simplex_grid(m: u64, r: usize) -> SimplexGrid {
    let mut first = vec![0u64; r];
    first[r - 1] = m;
    SimplexGrid { next: Some(first) }
}

pub struct SimplexGrid {
    next: Option<Vec<u64>>,
}

impl Iterator for SimplexGrid {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let r = current.len();
        if r > 1 {
            let mut succ = current.clone();
            // Increment the rightmost position that still has mass to its
            // right; dump the remainder into the last slot.
            let mut suffix: u64 = 0;
            let mut pivot = None;
            for i in (0..r - 1).rev() {
                suffix += succ[i + 1];
                if suffix > 0 {
                    pivot = Some(i);
                    break;
                }
            }
            if let Some(i) = pivot {
                succ[i] += 1;
                for x in succ.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                succ[r - 1] = suffix - 1;
                self.next = Some(succ);
            }
        }
        Some(current)
    }
}

/// Everything the neighborhood enumeration produces in one pass over the
/// simplex grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NeighborhoodWeights {
    /// w_jk (exact multinomial variant): total G_k-probability of the type
    /// classes inside neighborhood j. Column sums never exceed 1.
    pub exact: Vec<Vec<f64>>,
    /// Stirling variant w_jk = sum_{F in ball j} e^{-m S(F||F_k)}.
    pub stirling: Vec<Vec<f64>>,
    /// Per group j: min of S(F||F_j) over grid points outside its
    /// neighborhood (infinite when the neighborhood covers the grid).
    pub boundary_exponents: Vec<f64>,
    /// The minimizing grid point for each boundary exponent.
    pub boundary_points: Vec<Option<Vec<u64>>>,
    /// Grid points inside each neighborhood.
    pub member_counts: Vec<u64>,
    pub grid_points: u64,
}

/// Sums sequence weights over the disjoint relative-entropy balls
/// F_j^delta = {F : S(F||F_j) <= delta}. Fails if the grid exceeds `cap`
/// or any grid point falls into two balls (delta too large).
pub fn typical_neighborhood_weights(
    signatures: &[GroupSignature],
    m: u64,
    delta: f64,
    cap: u64,
) -> Result<NeighborhoodWeights, Error> {
    let s = signatures.len();
    let r = signatures[0].outcomes();
    let points = simplex_grid_len(m, r).unwrap_or(u128::MAX);
    if points > cap as u128 {
        return Err(Error::GridTooLarge { points, cap });
    }

    let mut exact = vec![vec![Kahan::default(); s]; s];
    let mut stirling = vec![vec![Kahan::default(); s]; s];
    let mut boundary_exponents = vec![f64::INFINITY; s];
    let mut boundary_points: Vec<Option<Vec<u64>>> = vec![None; s];
    let mut member_counts = vec![0u64; s];
    let mut grid_points = 0u64;

    let mut entropies = vec![0.0f64; s];
    for counts in simplex_grid(m, r) {
        grid_points += 1;
        let fd = FrequencyDistribution { counts };
        let probs = fd.probs();
        let mut member: Option<usize> = None;
        for (k, sig) in signatures.iter().enumerate() {
            let sk = relative_entropy(&probs, sig.probs())?;
            entropies[k] = sk;
            if sk <= delta {
                if let Some(prev) = member {
                    return Err(Error::OverlappingNeighborhoods {
                        j: prev,
                        k,
                        point: format!("{:?}", fd.counts()),
                    });
                }
                member = Some(k);
            }
        }
        for k in 0..s {
            if entropies[k] > delta && entropies[k] < boundary_exponents[k] {
                boundary_exponents[k] = entropies[k];
                boundary_points[k] = Some(fd.counts().to_vec());
            }
        }
        if let Some(j) = member {
            member_counts[j] += 1;
            for (k, sig) in signatures.iter().enumerate() {
                exact[j][k].add(sequence_weight_exact(&fd, sig)?);
                stirling[j][k].add((-(m as f64) * entropies[k]).exp());
            }
        }
    }

    Ok(NeighborhoodWeights {
        exact: exact
            .into_iter()
            .map(|row| row.into_iter().map(Kahan::value).collect())
            .collect(),
        stirling: stirling
            .into_iter()
            .map(|row| row.into_iter().map(Kahan::value).collect())
            .collect(),
        boundary_exponents,
        boundary_points,
        member_counts,
        grid_points,
    })
}

/// Sanov-style tail bound C(m + r - 1, r - 1) e^{-m s_star}, log-domain.
pub fn sanov_count_bound(m: u64, r: usize, s_star: f64) -> f64 {
    if s_star.is_infinite() {
        return 0.0;
    }
    (ln_type_count(m, r) - m as f64 * s_star).exp()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GroupErrorBound {
    /// Exponent: min S(F||F_j) over grid points outside the neighborhood.
    pub s_star: f64,
    pub boundary_point: Option<Vec<u64>>,
    /// The count-prefactor bound on 1 - w_jj.
    pub count_bound: f64,
    /// Measured 1 - w_jj from the exact enumeration.
    pub measured_tail: f64,
    /// The bound says nothing when it exceeds 1.
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ErrorBoundReport {
    pub per_group: Vec<GroupErrorBound>,
    /// Bound on the trace-distance-style sum over groups of (1 - w_kk).
    pub trace_distance_bound: f64,
    pub measured_trace_sum: f64,
    pub trace_bound_vacuous: bool,
}

/// Tail bounds for approximating each projection by its typical
/// neighborhood.
pub fn error_bound(
    signatures: &[GroupSignature],
    m: u64,
    delta: f64,
    cap: u64,
) -> Result<ErrorBoundReport, Error> {
    let weights = typical_neighborhood_weights(signatures, m, delta, cap)?;
    error_bound_from_weights(signatures, m, &weights)
}

pub fn error_bound_from_weights(
    signatures: &[GroupSignature],
    m: u64,
    weights: &NeighborhoodWeights,
) -> Result<ErrorBoundReport, Error> {
    let r = signatures[0].outcomes();
    let mut per_group = Vec::with_capacity(signatures.len());
    let mut trace_bound = Kahan::default();
    let mut measured_trace = Kahan::default();
    for j in 0..signatures.len() {
        let s_star = weights.boundary_exponents[j];
        let count_bound = sanov_count_bound(m, r, s_star);
        let measured_tail = (1.0 - weights.exact[j][j]).max(0.0);
        trace_bound.add(count_bound);
        measured_trace.add(measured_tail);
        per_group.push(GroupErrorBound {
            s_star,
            boundary_point: weights.boundary_points[j].clone(),
            count_bound,
            measured_tail,
            vacuous: count_bound > 1.0,
        });
    }
    let trace_distance_bound = trace_bound.value();
    Ok(ErrorBoundReport {
        per_group,
        trace_distance_bound,
        measured_trace_sum: measured_trace.value(),
        trace_bound_vacuous: trace_distance_bound > 1.0,
    })
}

/// Classification of a frequency vector against the group signatures.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Classification {
    pub group: usize,
    /// Relative entropy to the winner.
    pub divergence: f64,
    /// Second-best minus best divergence; infinite with one signature.
    pub margin: f64,
}

/// argmin_k S(F||F_k); ties break to the lowest group index.
pub fn classify_frequency(
    probs: &[f64],
    signatures: &[GroupSignature],
) -> Result<Classification, Error> {
    let mut best: Option<(usize, f64)> = None;
    let mut second = f64::INFINITY;
    for (k, sig) in signatures.iter().enumerate() {
        let s = relative_entropy(probs, sig.probs())?;
        match best {
            None => best = Some((k, s)),
            Some((_, bs)) if s < bs => {
                second = bs;
                best = Some((k, s));
            }
            Some(_) => second = second.min(s),
        }
    }
    let (group, divergence) = best.ok_or(Error::NoDistinctSignatures)?;
    if divergence.is_infinite() {
        return Err(Error::Unclassifiable);
    }
    Ok(Classification {
        group,
        divergence,
        margin: second - divergence,
    })
}

/// Everything the typicality CLI surface reports in one place.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TypicalityReport {
    pub signatures: Vec<Vec<f64>>,
    pub m: u64,
    pub eta: f64,
    pub delta: f64,
    pub m_min: Option<u64>,
    pub separation_bound: Option<f64>,
    /// Exact-multinomial neighborhood weights w_jk.
    pub weights: Vec<Vec<f64>>,
    pub weights_stirling: Vec<Vec<f64>>,
    pub error_bounds: ErrorBoundReport,
    pub coinciding_pairs: Vec<(usize, usize)>,
}

/// Runs the full typicality analysis for the given signatures.
pub fn typicality_report(
    signatures: &[GroupSignature],
    m: u64,
    eta: f64,
    delta: f64,
    cap: u64,
) -> Result<TypicalityReport, Error> {
    let weights = typical_neighborhood_weights(signatures, m, delta, cap)?;
    let bounds = error_bound_from_weights(signatures, m, &weights)?;
    let (m_min, separation_bound, coinciding) = match separation_m_min(signatures, eta, 1e-12) {
        Ok(sep) => (Some(sep.m_min), Some(sep.bound), sep.coinciding_pairs),
        Err(Error::NoDistinctSignatures) => (None, None, coinciding_pairs(signatures)),
        Err(e) => return Err(e),
    };
    Ok(TypicalityReport {
        signatures: signatures.iter().map(|s| s.probs().to_vec()).collect(),
        m,
        eta,
        delta,
        m_min,
        separation_bound,
        weights: weights.exact,
        weights_stirling: weights.stirling,
        error_bounds: bounds,
        coinciding_pairs: coinciding,
    })
}

fn coinciding_pairs(signatures: &[GroupSignature]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for j in 0..signatures.len() {
        for k in j + 1..signatures.len() {
            if signatures_coincide(&signatures[j], &signatures[k], 1e-12) {
                pairs.push((j, k));
            }
        }
    }
    pairs
}
