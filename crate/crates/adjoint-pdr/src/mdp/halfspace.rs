//! Half-space down-sets of the frame lattice.
//!
//! A negative witness for the MDP instance is a set of frames cut out of
//! the box `[0,1]^S` by one linear inequality with nonnegative
//! coefficients: `{d | Σ_s r_s·d(s) ≤ r}`. Such a set is downward closed,
//! and emptiness is exactly `r < 0` (the box contains the zero frame).
//! Membership, maximization of a nonnegative linear form (fractional
//! knapsack), inclusion, and generator enumeration are all exact.

use num::{One, Signed, Zero};

use crate::mdp::Frame;
use crate::rational::{format_rational, Rational};

/// Raised when an operation needs a nonempty half-space.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("operation undefined on the empty half-space")]
pub struct EmptySet;

/// `{d ∈ [0,1]^S | Σ_s coeffs[s]·d(s) ≤ bound}` with `coeffs[s] ≥ 0`.
///
/// Coefficients and bound are stored as produced — no rescaling — so two
/// values can denote the same set; use [`HalfSpaceDownSet::is_subset`] /
/// [`HalfSpaceDownSet::set_eq`] for semantic comparisons. The empty set is
/// normalized on construction to all-zero coefficients and bound −1 for
/// stable serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSpaceDownSet {
    coeffs: Vec<Rational>,
    bound: Rational,
}

impl HalfSpaceDownSet {
    /// Builds a half-space. Panics on a negative coefficient (callers only
    /// produce nonnegative ones); any negative bound is normalized to the
    /// canonical empty form.
    pub fn new(coeffs: Vec<Rational>, bound: Rational) -> Self {
        assert!(
            coeffs.iter().all(|c| !c.is_negative()),
            "half-space coefficients must be nonnegative"
        );
        if bound.is_negative() {
            HalfSpaceDownSet {
                coeffs: vec![Rational::zero(); coeffs.len()],
                bound: -Rational::one(),
            }
        } else {
            HalfSpaceDownSet { coeffs, bound }
        }
    }

    /// The canonical empty half-space over `num_states` coordinates.
    pub fn empty(num_states: usize) -> Self {
        HalfSpaceDownSet::new(vec![Rational::zero(); num_states], -Rational::one())
    }

    /// The full box (no effective constraint).
    pub fn full(num_states: usize) -> Self {
        HalfSpaceDownSet::new(vec![Rational::zero(); num_states], Rational::zero())
    }

    /// Coefficient vector `r_s`.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Right-hand bound `r`.
    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// True iff the set is empty (`bound < 0`).
    pub fn is_empty(&self) -> bool {
        self.bound.is_negative()
    }

    /// Membership test: `Σ r_s·d(s) ≤ bound`.
    pub fn member(&self, d: &Frame) -> bool {
        assert_eq!(d.len(), self.dim(), "frame dimension mismatch");
        let mut lhs = Rational::zero();
        for (c, v) in self.coeffs.iter().zip(d.entries()) {
            lhs += c * v;
        }
        lhs <= self.bound
    }

    /// Exact maximum of `Σ w_s·d(s)` over this set, for nonnegative
    /// weights, by fractional-knapsack greedy: free coordinates
    /// (`r_s = 0`) take 1, the rest fill to 1 in decreasing `w_s/r_s`
    /// order, the marginal coordinate taking the fractional remainder.
    pub fn max_linear(&self, weights: &[Rational]) -> Result<Rational, EmptySet> {
        assert_eq!(weights.len(), self.dim(), "weight dimension mismatch");
        debug_assert!(weights.iter().all(|w| !w.is_negative()));
        if self.is_empty() {
            return Err(EmptySet);
        }
        let mut total = Rational::zero();
        let mut constrained: Vec<usize> = Vec::new();
        for (s, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                total += &weights[s];
            } else if !weights[s].is_zero() {
                constrained.push(s);
            }
        }
        // Decreasing value density w_s / r_s; ties in any fixed order are
        // equally optimal, so the sort need not be stabilized further.
        constrained.sort_by(|&a, &b| {
            let da = &weights[a] / &self.coeffs[a];
            let db = &weights[b] / &self.coeffs[b];
            db.cmp(&da)
        });
        let mut budget = self.bound.clone();
        for s in constrained {
            if budget.is_zero() {
                break;
            }
            let cost = &self.coeffs[s];
            if *cost <= budget {
                total += &weights[s];
                budget -= cost;
            } else {
                total += &weights[s] * (&budget / cost);
                budget = Rational::zero();
            }
        }
        Ok(total)
    }

    /// Inclusion test: is this set contained in `other`? An empty set is
    /// contained in everything; a nonempty set is contained in `other` iff
    /// `other` is nonempty and the maximum of `other`'s linear form over
    /// this set respects `other`'s bound.
    pub fn is_subset(&self, other: &HalfSpaceDownSet) -> bool {
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        match self.max_linear(other.coeffs()) {
            Ok(max) => max <= *other.bound(),
            Err(EmptySet) => unreachable!("emptiness checked above"),
        }
    }

    /// Semantic equality: mutual inclusion.
    pub fn set_eq(&self, other: &HalfSpaceDownSet) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }
}

impl std::fmt::Display for HalfSpaceDownSet {
    /// Renders as `sum{ s1:1/2 s2:1/2 } <= 1/4`, listing nonzero
    /// coefficients in state order; the braces stay empty when every
    /// coefficient is zero.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sum{{")?;
        for (s, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                write!(f, " s{s}:{}", format_rational(c))?;
            }
        }
        write!(f, " }} <= {}", format_rational(&self.bound))
    }
}

/// The generator set `Z`: every vertex of the half-space-in-box polytope
/// that dominates `lower` and is maximal in the constrained directions.
///
/// Concretely, a generator assigns each zero-coefficient coordinate a value
/// in `{0, 1}` (forced to 1 when `lower` is positive there, since the
/// result must dominate `lower`), and each positive-coefficient coordinate
/// a value in `{0, 1}` or at most one fractional residual value, such that
/// every coordinate dominates `lower`, the constraint is satisfied, and no
/// constrained coordinate can be raised (the constraint is tight, or every
/// constrained coordinate is already 1). The degenerate all-zero-coefficient
/// half-space is the full box, whose unique generator is the all-ones frame.
///
/// Returns the empty list when the half-space is empty, and also when
/// `lower` itself lies outside it (nothing in the set dominates `lower`).
/// The result is sorted lexicographically.
pub fn enumerate_dominating_generators(hs: &HalfSpaceDownSet, lower: &Frame) -> Vec<Frame> {
    assert_eq!(lower.len(), hs.dim(), "frame dimension mismatch");
    if hs.is_empty() {
        return Vec::new();
    }
    let n = hs.dim();
    let constrained: Vec<usize> = (0..n).filter(|&s| !hs.coeffs()[s].is_zero()).collect();
    let free: Vec<usize> = (0..n).filter(|&s| hs.coeffs()[s].is_zero()).collect();

    // Options per free coordinate: must dominate lower, so 0 is only
    // available when lower(s) = 0.
    let free_options: Vec<Vec<Rational>> = free
        .iter()
        .map(|&s| {
            if lower.get(s).is_zero() {
                vec![Rational::zero(), Rational::one()]
            } else {
                vec![Rational::one()]
            }
        })
        .collect();

    // Per-fiber maximal assignments of the constrained coordinates. The
    // constraint only involves these, so the set is shared by all fibers.
    if constrained.is_empty() {
        // Full box: the single generator is the all-ones frame (every
        // coordinate free, nothing to enumerate beyond domination).
        return vec![Frame::ones(n)];
    }
    let constrained_patterns = constrained_assignments(hs, lower, &constrained);

    let mut out: Vec<Frame> = Vec::new();
    let mut free_choice = vec![0usize; free.len()];
    loop {
        for pattern in &constrained_patterns {
            let mut values = vec![Rational::zero(); n];
            for (i, &s) in constrained.iter().enumerate() {
                values[s] = pattern[i].clone();
            }
            for (i, &s) in free.iter().enumerate() {
                values[s] = free_options[i][free_choice[i]].clone();
            }
            out.push(Frame::from_vec(values));
        }
        // Odometer over the free-coordinate options.
        let mut pos = 0;
        loop {
            if pos == free.len() {
                out.sort_by(|a, b| a.entries().cmp(b.entries()));
                out.dedup();
                return out;
            }
            free_choice[pos] += 1;
            if free_choice[pos] < free_options[pos].len() {
                break;
            }
            free_choice[pos] = 0;
            pos += 1;
        }
    }
}

/// All maximal assignments of the constrained coordinates: 0/1 patterns
/// that dominate `lower`, fit the bound, and cannot be raised (tight
/// constraint or all ones), plus, for each choice of one fractional
/// coordinate, the 0/1 patterns of the others whose exact residual for it
/// lies strictly between 0 and 1 — those are tight by construction. The
/// value of a fractional coordinate depends on every other coordinate, so
/// it must be computed after the rest of the pattern is fixed.
fn constrained_assignments(
    hs: &HalfSpaceDownSet,
    lower: &Frame,
    constrained: &[usize],
) -> Vec<Vec<Rational>> {
    let m = constrained.len();
    assert!(m < 32, "too many constrained coordinates to enumerate");
    let mut out: Vec<Vec<Rational>> = Vec::new();

    // A coordinate set to 0 must still dominate lower there.
    let zero_ok = |s: usize| lower.get(s).is_zero();

    for mask in 0u32..(1u32 << m) {
        let bit = |i: usize| mask & (1 << i) != 0;
        if (0..m).any(|i| !bit(i) && !zero_ok(constrained[i])) {
            continue;
        }
        let mut cost = Rational::zero();
        for i in 0..m {
            if bit(i) {
                cost += &hs.coeffs()[constrained[i]];
            }
        }
        if cost > *hs.bound() {
            continue;
        }
        let tight = cost == *hs.bound();
        let all_ones = mask == (1 << m) - 1;
        if tight || all_ones {
            out.push(
                (0..m)
                    .map(|i| {
                        if bit(i) {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            );
        }
    }

    for f in 0..m {
        let others: Vec<usize> = (0..m).filter(|&i| i != f).collect();
        for mask in 0u32..(1u32 << others.len()) {
            let bit = |j: usize| mask & (1 << j) != 0;
            if others
                .iter()
                .enumerate()
                .any(|(j, &i)| !bit(j) && !zero_ok(constrained[i]))
            {
                continue;
            }
            let mut cost = Rational::zero();
            for (j, &i) in others.iter().enumerate() {
                if bit(j) {
                    cost += &hs.coeffs()[constrained[i]];
                }
            }
            let residual = (hs.bound() - &cost) / &hs.coeffs()[constrained[f]];
            if residual > Rational::zero()
                && residual < Rational::one()
                && residual >= *lower.get(constrained[f])
            {
                let mut pattern = vec![Rational::zero(); m];
                for (j, &i) in others.iter().enumerate() {
                    if bit(j) {
                        pattern[i] = Rational::one();
                    }
                }
                pattern[f] = residual;
                out.push(pattern);
            }
        }
    }
    out
}
