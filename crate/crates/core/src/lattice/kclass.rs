use std::collections::HashMap;

use super::order::FiniteLattice;
use crate::error::{domain, Result};

/// Class in the free abelian group generated by projectivity classes of
/// covers. Coordinates are composition-factor multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KClass(pub Vec<i64>);

impl KClass {
    pub fn zero(dim: usize) -> Self {
        KClass(vec![0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn add(&self, other: &KClass) -> KClass {
        KClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Partition of the covers of a modular lattice into projectivity classes
/// (the simple classes of the K-group).
#[derive(Clone, Debug)]
pub struct KClasses {
    cover_class: HashMap<(u32, u32), usize>,
    count: usize,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl KClasses {
    pub fn compute(l: &FiniteLattice) -> Self {
        let mut index = HashMap::new();
        let mut covers = Vec::new();
        for a in 0..l.len() {
            for &b in l.upper_covers(a) {
                index.insert((a as u32, b as u32), covers.len());
                covers.push((a, b));
            }
        }
        let mut parent: Vec<usize> = (0..covers.len()).collect();
        // [c, b] with c = a ∧ b transposes up to [a, a ∨ b].
        for &(c, b) in &covers {
            for a in 0..l.len() {
                if a == c || l.meet(a, b) != c {
                    continue;
                }
                let j = l.join(a, b);
                if let Some(&i2) = index.get(&(a as u32, j as u32)) {
                    let i1 = index[&(c as u32, b as u32)];
                    let (r1, r2) = (find(&mut parent, i1), find(&mut parent, i2));
                    parent[r1] = r2;
                }
            }
        }
        let mut label = HashMap::new();
        let mut cover_class = HashMap::new();
        for (i, &(a, b)) in covers.iter().enumerate() {
            let r = find(&mut parent, i);
            let next = label.len();
            let id = *label.entry(r).or_insert(next);
            cover_class.insert((a as u32, b as u32), id);
        }
        KClasses { cover_class, count: label.len() }
    }

    /// Number of simple classes (rank of the K-group).
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn class_of_cover(&self, a: usize, b: usize) -> Option<usize> {
        self.cover_class.get(&(a as u32, b as u32)).copied()
    }

    /// Class of the interval `[a, b]`, accumulated along a maximal chain.
    pub fn kclass(&self, l: &FiniteLattice, a: usize, b: usize) -> Result<KClass> {
        if !l.leq(a, b) {
            return domain(format!("kclass: {a} is not below {b}"));
        }
        let chain = l.maximal_chain(a, b)?;
        let mut out = KClass::zero(self.count);
        for w in chain.windows(2) {
            out.0[self.class_of_cover(w[0], w[1]).expect("chain steps are covers")] += 1;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_classes_are_distinct() {
        let c = FiniteLattice::chain(4).unwrap();
        let k = KClasses::compute(&c);
        assert_eq!(k.len(), 3);
        assert_eq!(k.kclass(&c, 0, 3).unwrap().0, vec![1, 1, 1]);
        assert!(k.kclass(&c, 2, 2).unwrap().is_zero());
        assert!(k.kclass(&c, 3, 1).is_err());
    }

    #[test]
    fn m3_has_one_class() {
        // All five covers of M₃ are projective to each other.
        let m3 = FiniteLattice::from_order(5, |x, y| x == y || x == 0 || y == 4).unwrap();
        let k = KClasses::compute(&m3);
        assert_eq!(k.len(), 1);
        assert_eq!(k.kclass(&m3, 0, 4).unwrap().0, vec![2]);
    }

    #[test]
    fn square_has_two_classes() {
        let c2 = FiniteLattice::chain(2).unwrap();
        let sq = c2.product(&c2).unwrap();
        let k = KClasses::compute(&sq);
        assert_eq!(k.len(), 2);
        // Opposite sides of the square share a class.
        assert_eq!(k.class_of_cover(0, 1), k.class_of_cover(2, 3));
        assert_eq!(k.class_of_cover(0, 2), k.class_of_cover(1, 3));
    }
}
