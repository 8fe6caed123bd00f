use std::collections::HashMap;

use num_complex::Complex64;

use super::filtration::{IteratedLabel, RFiltration, LABEL_TOL};
use super::order::{FiniteLattice, MAX_ELEMENTS};
use super::polarized::{PolarizedLattice, PHASE_TOL};
use super::qp::{min_weighted_norm, DiffConstraint};
use crate::error::{domain, internal, Error, Result};

/// Upper bound on maximal chains examined by the weight-filtration search.
pub const MAX_CHAINS: usize = 1 << 20;

/// Recursion cap for the iterated weight filtration.
pub const MAX_DEPTH: usize = 5;

/// The lattice `M(a, λ)` of tuples `b_k ∈ [a_{k−1}, a_k]`, with
/// `[b_k, b_l]` complemented whenever `λ_l − λ_k ≤ 1`.
#[derive(Clone, Debug)]
pub struct AssociatedLattice {
    pub lattice: PolarizedLattice,
    pub tuples: Vec<Vec<usize>>,
}

struct ComplementCache<'a> {
    l: &'a FiniteLattice,
    memo: HashMap<(usize, usize), bool>,
}

impl<'a> ComplementCache<'a> {
    fn new(l: &'a FiniteLattice) -> Self {
        ComplementCache { l, memo: HashMap::new() }
    }

    fn get(&mut self, a: usize, b: usize) -> bool {
        let l = self.l;
        *self.memo.entry((a, b)).or_insert_with(|| l.is_complemented_interval(a, b).unwrap())
    }
}

fn require_real(pl: &PolarizedLattice) -> Result<()> {
    if pl.is_real() {
        Ok(())
    } else {
        domain("weight filtration needs a real polarization")
    }
}

pub fn associated_lattice(pl: &PolarizedLattice, f: &RFiltration) -> Result<AssociatedLattice> {
    require_real(pl)?;
    let l = pl.lattice();
    f.validate(l)?;
    let n = f.steps();
    let ranges: Vec<Vec<usize>> = (0..n).map(|k| l.interval(f.chain[k], f.chain[k + 1])).collect();
    let mut cache = ComplementCache::new(l);
    let mut tuples = Vec::new();
    let mut cur = Vec::with_capacity(n);
    enumerate_tuples(&ranges, &f.labels, &mut cache, &mut cur, &mut tuples)?;

    let m = tuples.len();
    let leq = |i: usize, j: usize| tuples[i].iter().zip(&tuples[j]).all(|(&x, &y)| l.leq(x, y));
    let lat = FiniteLattice::from_order(m, leq)?;
    let x = |e: usize| pl.value(e).re;
    let zm: Vec<Complex64> = tuples
        .iter()
        .map(|t| {
            (0..n)
                .map(|k| Complex64::new(1.0, f.labels[k]) * (x(t[k]) - x(f.chain[k])))
                .sum()
        })
        .collect();
    let lattice = PolarizedLattice::from_cover_values(lat, |a, b| zm[b] - zm[a])?;
    Ok(AssociatedLattice { lattice, tuples })
}

fn enumerate_tuples(
    ranges: &[Vec<usize>],
    labels: &[f64],
    cache: &mut ComplementCache,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    let k = cur.len();
    if k == ranges.len() {
        if out.len() >= MAX_ELEMENTS {
            return Err(Error::Size(format!("M(a,λ) exceeds {MAX_ELEMENTS} elements")));
        }
        out.push(cur.clone());
        return Ok(());
    }
    for &b in &ranges[k] {
        let ok = (0..k).all(|j| labels[k] - labels[j] > 1.0 + LABEL_TOL || cache.get(cur[j], b));
        if ok {
            cur.push(b);
            enumerate_tuples(ranges, labels, cache, cur, out)?;
            cur.pop();
        }
    }
    Ok(())
}

/// Whether `M(a, λ)` is semistable of phase 0.
pub fn is_phase_zero_semistable(m: &AssociatedLattice) -> bool {
    let pl = &m.lattice;
    let top = pl.lattice().top();
    let z = pl.value(top);
    z.im.abs() <= PHASE_TOL * z.re && pl.is_semistable()
}

/// Definitional certificate: paracomplemented and `M(a, λ)` semistable of phase 0.
pub fn certify_weight_filtration(pl: &PolarizedLattice, f: &RFiltration) -> Result<bool> {
    if !f.is_paracomplemented(pl.lattice()) {
        return Ok(false);
    }
    Ok(is_phase_zero_semistable(&associated_lattice(pl, f)?))
}

/// Minimum-norm labeling of one maximal chain: minimize `Σ x_k λ_k²` subject to
/// monotone labels and unit gaps across every non-complemented span.
fn chain_labels(
    pl: &PolarizedLattice,
    chain: &[usize],
    cache: &mut ComplementCache,
) -> Result<(Vec<f64>, f64)> {
    let n = chain.len() - 1;
    let x: Vec<f64> = chain.windows(2).map(|w| pl.z(w[0], w[1]).re).collect();
    let mut cons: Vec<DiffConstraint> =
        (0..n.saturating_sub(1)).map(|k| DiffConstraint { lo: k, hi: k + 1, bound: 0.0 }).collect();
    for k in 0..n {
        for j in k + 1..n {
            if !cache.get(chain[k], chain[j + 1]) {
                cons.push(DiffConstraint { lo: k, hi: j, bound: 1.0 });
            }
        }
    }
    let start: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let lam = min_weighted_norm(&x, &cons, &start)?;
    let obj = x.iter().zip(&lam).map(|(w, l)| w * l * l).sum();
    Ok((lam, obj))
}

/// The weight filtration of a lattice with real polarization, certified
/// against its definition before being returned.
pub fn weight_filtration(pl: &PolarizedLattice) -> Result<RFiltration> {
    require_real(pl)?;
    let l = pl.lattice();
    if l.len() == 1 {
        return internal("weight filtration of the one-element lattice is empty");
    }
    let f = if l.is_complemented() {
        RFiltration::trivial(l)
    } else {
        let chains = l.maximal_chains(l.bottom(), l.top(), MAX_CHAINS)?;
        let mut cache = ComplementCache::new(l);
        let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
        for chain in chains {
            let (lam, obj) = chain_labels(pl, &chain, &mut cache)?;
            if best.as_ref().is_none_or(|b| obj < b.2 - 1e-12 * (1.0 + b.2.abs())) {
                best = Some((chain, lam, obj));
            }
        }
        let (chain, lam, _) = best.unwrap();
        merge_steps(&chain, &lam)
    };
    if !certify_weight_filtration(pl, &f)? {
        return internal(format!("weight filtration candidate {f:?} fails its certificate"));
    }
    Ok(f)
}

fn merge_steps(chain: &[usize], lam: &[f64]) -> RFiltration {
    let mut out_chain = vec![chain[0]];
    let mut labels: Vec<f64> = Vec::new();
    for (k, &v) in lam.iter().enumerate() {
        match labels.last() {
            Some(&last) if (v - last).abs() <= LABEL_TOL => {
                *out_chain.last_mut().unwrap() = chain[k + 1];
            }
            _ => {
                labels.push(v);
                out_chain.push(chain[k + 1]);
            }
        }
    }
    RFiltration { chain: out_chain, labels }
}

/// `M(a, λ)⁰`: bottom plus the elements of phase exactly 0, with the
/// restricted (real) polarization. Returns the map to `M(a, λ)` indices.
pub fn phase_zero_sublattice(m: &AssociatedLattice) -> Result<(PolarizedLattice, Vec<usize>)> {
    let pl = &m.lattice;
    let lat = pl.lattice();
    let scale = 1.0 + pl.value(lat.top()).norm();
    let keep: Vec<bool> =
        (0..lat.len()).map(|x| x == lat.bottom() || pl.value(x).im.abs() <= 1e-9 * scale).collect();
    let (sub, map) = lat.sublattice(&keep)?;
    let re = |x: usize| pl.value(map[x]).re;
    let sub_pl = PolarizedLattice::from_cover_values(sub, |a, b| (re(b) - re(a)).into())?;
    Ok((sub_pl, map))
}

/// Chain in `L` labeled by iterated-logarithm coefficients `(log t, log log t, …)`.
#[derive(Clone, Debug)]
pub struct IteratedFiltration {
    pub chain: Vec<usize>,
    pub labels: Vec<IteratedLabel>,
    /// Number of non-trivial weight-filtration passes.
    pub depth: usize,
    /// Set when the recursion stopped at `MAX_DEPTH` without reaching a complemented lattice.
    pub capped: bool,
}

struct Level {
    chain: Vec<usize>,
    labels: Vec<Vec<f64>>,
    depth: usize,
    capped: bool,
}

fn iterate(pl: &PolarizedLattice, budget: usize) -> Result<Level> {
    let l = pl.lattice();
    if l.is_complemented() || budget == 0 {
        return Ok(Level {
            chain: vec![l.bottom(), l.top()],
            labels: vec![vec![]],
            depth: 0,
            capped: !l.is_complemented(),
        });
    }
    let f = weight_filtration(pl)?;
    let m = associated_lattice(pl, &f)?;
    let (m0, map) = phase_zero_sublattice(&m)?;
    let inner = iterate(&m0, budget - 1)?;
    let mut chain = vec![l.bottom()];
    let mut labels = Vec::new();
    for (k, &lam) in f.labels.iter().enumerate() {
        for (j, &e) in inner.chain.iter().enumerate().skip(1) {
            let elem = m.tuples[map[e]][k];
            if elem != *chain.last().unwrap() {
                chain.push(elem);
                let mut lab = vec![lam];
                lab.extend_from_slice(&inner.labels[j - 1]);
                labels.push(lab);
            }
        }
    }
    Ok(Level { chain, labels, depth: inner.depth + 1, capped: inner.capped })
}

/// Iterated weight filtration: refine by the weight filtration of the
/// phase-0 part of `M(a, λ)` until a complemented lattice is reached.
pub fn iterated_weight_filtration(pl: &PolarizedLattice) -> Result<IteratedFiltration> {
    require_real(pl)?;
    let lv = iterate(pl, MAX_DEPTH)?;
    let labels: Vec<IteratedLabel> = lv.labels.into_iter().map(IteratedLabel::new).collect();
    let l = pl.lattice();
    if lv.chain.windows(2).any(|w| !l.lt(w[0], w[1])) || labels.windows(2).any(|w| w[0] >= w[1]) {
        return internal("iterated filtration is not strictly increasing");
    }
    Ok(IteratedFiltration { chain: lv.chain, labels, depth: lv.depth, capped: lv.capped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_chain(masses: &[f64]) -> PolarizedLattice {
        let l = FiniteLattice::chain(masses.len() + 1).unwrap();
        PolarizedLattice::from_cover_values(l, |a, _| masses[a].into()).unwrap()
    }

    #[test]
    fn two_step_chain() {
        let pl = real_chain(&[1.0, 1.0]);
        let f = weight_filtration(&pl).unwrap();
        assert_eq!(f.chain, vec![0, 1, 2]);
        assert!((f.labels[0] + 0.5).abs() < 1e-12 && (f.labels[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn three_step_chain_is_equally_spaced() {
        // Every span of a chain is non-complemented, so adjacent gaps are 1
        // and balance fixes the offset: λ = (−1, 0, 1) for equal masses.
        let pl = real_chain(&[2.0, 2.0, 2.0]);
        let f = weight_filtration(&pl).unwrap();
        for (l, e) in f.labels.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((l - e).abs() < 1e-12);
        }
    }

    #[test]
    fn complemented_is_trivial() {
        let c2 = FiniteLattice::chain(2).unwrap();
        let sq = c2.product(&c2).unwrap();
        let pl = PolarizedLattice::from_cover_values(sq, |a, b| (1.0 + (b - a) as f64).into()).unwrap();
        let f = weight_filtration(&pl).unwrap();
        assert_eq!(f.labels, vec![0.0]);
        let it = iterated_weight_filtration(&pl).unwrap();
        assert_eq!(it.depth, 0);
        assert_eq!(it.labels, vec![IteratedLabel::new(vec![0.0])]);
    }

    #[test]
    fn wrong_labels_fail_certificate() {
        let pl = real_chain(&[1.0, 1.0]);
        let bad = RFiltration { chain: vec![0, 1, 2], labels: vec![-1.0, 1.0] };
        assert!(!certify_weight_filtration(&pl, &bad).unwrap());
        let unbalanced = RFiltration { chain: vec![0, 1, 2], labels: vec![0.0, 1.0] };
        assert!(!certify_weight_filtration(&pl, &unbalanced).unwrap());
    }

    #[test]
    fn complex_polarization_rejected() {
        let l = FiniteLattice::chain(2).unwrap();
        let pl = PolarizedLattice::from_cover_values(l, |_, _| Complex64::new(1.0, 1.0)).unwrap();
        assert!(matches!(weight_filtration(&pl), Err(Error::Domain(_))));
    }
}
