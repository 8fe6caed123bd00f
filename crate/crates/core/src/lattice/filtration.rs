use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::order::FiniteLattice;
use crate::error::{input, Result};

/// Labeled chain `bottom = a₀ < … < aₙ = top` with `λ₁ < … < λₙ`; `λ_k`
/// belongs to the step `[a_{k−1}, a_k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RFiltration {
    pub chain: Vec<usize>,
    pub labels: Vec<f64>,
}

impl RFiltration {
    pub fn trivial(l: &FiniteLattice) -> Self {
        RFiltration { chain: vec![l.bottom(), l.top()], labels: vec![0.0] }
    }

    pub fn steps(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self, l: &FiniteLattice) -> Result<()> {
        if self.chain.len() != self.labels.len() + 1 {
            return input("filtration chain must have one more element than labels");
        }
        if self.chain[0] != l.bottom() || *self.chain.last().unwrap() != l.top() {
            return input("filtration must run from bottom to top");
        }
        if self.chain.windows(2).any(|w| !l.lt(w[0], w[1])) {
            return input("filtration chain is not strictly increasing");
        }
        if self.labels.windows(2).any(|w| w[0] >= w[1]) {
            return input("filtration labels are not strictly increasing");
        }
        Ok(())
    }

    /// For every `k ≤ l` with `λ_l − λ_k < 1`, `[a_{k−1}, a_l]` is complemented.
    pub fn is_paracomplemented(&self, l: &FiniteLattice) -> bool {
        let n = self.labels.len();
        (0..n).all(|k| {
            (k..n).all(|j| {
                self.labels[j] - self.labels[k] >= 1.0 - LABEL_TOL
                    || l.is_complemented_interval(self.chain[k], self.chain[j + 1]).unwrap()
            })
        })
    }
}

/// Labels closer than this are treated as equal (merging, gap tests).
pub const LABEL_TOL: f64 = 1e-9;

/// Coefficients of a growth rate on `(log t, log log t, …)`, optionally with a
/// leading `t` coefficient. Ordered lexicographically.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct IteratedLabel {
    pub coeffs: Vec<f64>,
}

impl IteratedLabel {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last().is_some_and(|c| c.abs() <= LABEL_TOL) {
            coeffs.pop();
        }
        IteratedLabel { coeffs }
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }
}

impl PartialEq for IteratedLabel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for IteratedLabel {}

impl PartialOrd for IteratedLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IteratedLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.coeffs.len().max(other.coeffs.len());
        for i in 0..n {
            let (a, b) = (self.coeff(i), other.coeff(i));
            if (a - b).abs() > LABEL_TOL {
                return a.total_cmp(&b);
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterated_label_order() {
        let a = IteratedLabel::new(vec![1.0, -3.0]);
        let b = IteratedLabel::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(b.coeffs, vec![1.0]);
        assert!(a < b);
        assert!(IteratedLabel::new(vec![0.5]) < IteratedLabel::new(vec![1.0, -100.0]));
        assert_eq!(IteratedLabel::new(vec![]), IteratedLabel::new(vec![0.0, 0.0]));
    }

    #[test]
    fn paracomplemented_on_chain() {
        let c = FiniteLattice::chain(3).unwrap();
        assert!(!RFiltration::trivial(&c).is_paracomplemented(&c));
        let f = RFiltration { chain: vec![0, 1, 2], labels: vec![-0.5, 0.5] };
        assert!(f.validate(&c).is_ok());
        assert!(f.is_paracomplemented(&c));
        let g = RFiltration { chain: vec![0, 1, 2], labels: vec![-0.5, 0.4] };
        assert!(!g.is_paracomplemented(&c));
    }

    #[test]
    fn validate_rejects_bad_shapes() {
        let c = FiniteLattice::chain(3).unwrap();
        let bad_labels = RFiltration { chain: vec![0, 1, 2], labels: vec![1.0, 0.0] };
        assert!(bad_labels.validate(&c).is_err());
        let short = RFiltration { chain: vec![0, 1], labels: vec![0.0] };
        assert!(short.validate(&c).is_err());
    }
}
