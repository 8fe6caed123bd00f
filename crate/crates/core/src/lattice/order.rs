use crate::error::{Error, Result};

/// Hard cap on explicitly enumerated lattices. Meet/join tables are quadratic
/// in the element count, so 2¹² keeps a full lattice under ~130 MB.
pub const MAX_ELEMENTS: usize = 1 << 12;

/// A finite lattice stored as explicit meet/join tables plus down-set bitsets.
#[derive(Clone, Debug)]
pub struct FiniteLattice {
    n: usize,
    words: usize,
    down: Vec<u64>,
    up: Vec<u64>,
    meet: Vec<u32>,
    join: Vec<u32>,
    bottom: usize,
    top: usize,
    upper_covers: Vec<Vec<usize>>,
    lower_covers: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Input("lattice must have at least one element".into()));
    }
    if n > MAX_ELEMENTS {
        return Err(Error::Size(format!("{n} elements exceeds the cap of {MAX_ELEMENTS}")));
    }
    Ok(())
}

#[inline]
fn bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

impl FiniteLattice {
    /// Builds a lattice from a partial order; fails if some pair lacks a
    /// meet or a join.
    pub fn from_order(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        check_size(n)?;
        let words = n.div_ceil(64);
        let mut down = vec![0u64; n * words];
        let mut up = vec![0u64; n * words];
        for x in 0..n {
            for y in 0..n {
                if leq(y, x) {
                    down[x * words + y / 64] |= 1 << (y % 64);
                    up[y * words + x / 64] |= 1 << (x % 64);
                }
            }
        }
        for x in 0..n {
            if !bit(&down[x * words..(x + 1) * words], x) {
                return Err(Error::Input(format!("order relation is not reflexive at {x}")));
            }
        }
        let card = |sets: &[u64], x: usize| -> u32 {
            sets[x * words..(x + 1) * words].iter().map(|w| w.count_ones()).sum()
        };
        let down_card: Vec<u32> = (0..n).map(|x| card(&down, x)).collect();
        let up_card: Vec<u32> = (0..n).map(|x| card(&up, x)).collect();
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        let mut scratch = vec![0u64; words];
        for a in 0..n {
            for b in a..n {
                for (sense, table) in [(true, &mut meet), (false, &mut join)] {
                    let (sets, cards) = if sense { (&down, &down_card) } else { (&up, &up_card) };
                    let mut total = 0u32;
                    for w in 0..words {
                        scratch[w] = sets[a * words + w] & sets[b * words + w];
                        total += scratch[w].count_ones();
                    }
                    // The glb is the common lower bound whose own down-set is the
                    // whole set of common lower bounds, i.e. the one of maximal size.
                    let mut best = None;
                    for (w, &word) in scratch.iter().enumerate() {
                        let mut word = word;
                        while word != 0 {
                            let z = w * 64 + word.trailing_zeros() as usize;
                            word &= word - 1;
                            if best.is_none_or(|bz: usize| cards[z] > cards[bz]) {
                                best = Some(z);
                            }
                        }
                    }
                    match best {
                        Some(z) if cards[z] == total => {
                            table[a * n + b] = z as u32;
                            table[b * n + a] = z as u32;
                        }
                        _ => {
                            let what = if sense { "meet" } else { "join" };
                            return Err(Error::Input(format!("elements {a} and {b} have no {what}")));
                        }
                    }
                }
            }
        }
        Self::finish(n, words, down, up, meet, join)
    }

    /// Builds a lattice from meet and join tables (row-major `n × n`).
    pub fn from_tables(n: usize, meet: Vec<u32>, join: Vec<u32>) -> Result<Self> {
        check_size(n)?;
        if meet.len() != n * n || join.len() != n * n {
            return Err(Error::Input("meet/join tables must be n×n".into()));
        }
        let words = n.div_ceil(64);
        let mut down = vec![0u64; n * words];
        let mut up = vec![0u64; n * words];
        for x in 0..n {
            for y in 0..n {
                if meet[x * n + y] as usize == y {
                    down[x * words + y / 64] |= 1 << (y % 64);
                    up[y * words + x / 64] |= 1 << (x % 64);
                }
            }
        }
        let lat = Self::finish(n, words, down, up, meet, join)?;
        lat.check_laws()?;
        Ok(lat)
    }

    /// As [`from_tables`](Self::from_tables) but without the cubic law check;
    /// for constructions whose tables are lattice operations by design.
    pub(crate) fn from_tables_trusted(n: usize, meet: Vec<u32>, join: Vec<u32>) -> Result<Self> {
        check_size(n)?;
        let words = n.div_ceil(64);
        let mut down = vec![0u64; n * words];
        let mut up = vec![0u64; n * words];
        for x in 0..n {
            for y in 0..n {
                if meet[x * n + y] as usize == y {
                    down[x * words + y / 64] |= 1 << (y % 64);
                    up[y * words + x / 64] |= 1 << (x % 64);
                }
            }
        }
        Self::finish(n, words, down, up, meet, join)
    }

    fn finish(
        n: usize,
        words: usize,
        down: Vec<u64>,
        up: Vec<u64>,
        meet: Vec<u32>,
        join: Vec<u32>,
    ) -> Result<Self> {
        let count = |sets: &[u64], x: usize| -> usize {
            sets[x * words..(x + 1) * words].iter().map(|w| w.count_ones() as usize).sum()
        };
        let bottom = (0..n).find(|&x| count(&up, x) == n);
        let top = (0..n).find(|&x| count(&down, x) == n);
        let (Some(bottom), Some(top)) = (bottom, top) else {
            return Err(Error::Input("order has no bottom or no top".into()));
        };
        let mut upper_covers = vec![Vec::new(); n];
        let mut lower_covers = vec![Vec::new(); n];
        for x in 0..n {
            let ux = &up[x * words..(x + 1) * words];
            for y in 0..n {
                if y == x || !bit(ux, y) {
                    continue;
                }
                let dy = &down[y * words..(y + 1) * words];
                let between: u32 = (0..words).map(|w| (ux[w] & dy[w]).count_ones()).sum();
                if between == 2 {
                    upper_covers[x].push(y);
                    lower_covers[y].push(x);
                }
            }
        }
        // Longest-path rank from the bottom; equals the height function when
        // the lattice is graded (always the case for modular lattices).
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| count(&down, x));
        let mut rank = vec![0usize; n];
        for &x in &order {
            for &y in &upper_covers[x] {
                rank[y] = rank[y].max(rank[x] + 1);
            }
        }
        Ok(Self { n, words, down, up, meet, join, bottom, top, upper_covers, lower_covers, rank })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        bit(&self.down[b * self.words..(b + 1) * self.words], a)
    }

    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    #[inline]
    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b] as usize
    }

    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.n + b] as usize
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.upper_covers[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.lower_covers[x]
    }

    pub fn is_cover(&self, a: usize, b: usize) -> bool {
        self.upper_covers[a].contains(&b)
    }

    /// Height of `x` above the bottom.
    pub fn rank(&self, x: usize) -> usize {
        self.rank[x]
    }

    /// Length of the lattice (rank of the top).
    pub fn height(&self) -> usize {
        self.rank[self.top]
    }

    /// Elements of the interval `[a, b]`, in increasing rank order.
    pub fn interval(&self, a: usize, b: usize) -> Vec<usize> {
        let ua = &self.up[a * self.words..(a + 1) * self.words];
        let db = &self.down[b * self.words..(b + 1) * self.words];
        let mut out: Vec<usize> = (0..self.n).filter(|&x| bit(ua, x) && bit(db, x)).collect();
        out.sort_by_key(|&x| self.rank[x]);
        out
    }

    /// One maximal chain from `a` to `b` (greedy through upper covers).
    pub fn maximal_chain(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        if !self.leq(a, b) {
            return Err(Error::Domain(format!("{a} is not below {b}")));
        }
        let mut chain = vec![a];
        let mut cur = a;
        while cur != b {
            cur = *self.upper_covers[cur]
                .iter()
                .find(|&&c| self.leq(c, b))
                .expect("an upper cover below b exists whenever cur < b");
            chain.push(cur);
        }
        Ok(chain)
    }

    /// Every maximal chain from `a` to `b`. Exponential; intended for small lattices.
    pub fn maximal_chains(&self, a: usize, b: usize, limit: usize) -> Result<Vec<Vec<usize>>> {
        if !self.leq(a, b) {
            return Err(Error::Domain(format!("{a} is not below {b}")));
        }
        let mut out = Vec::new();
        let mut stack = vec![a];
        self.chains_rec(b, &mut stack, &mut out, limit)?;
        Ok(out)
    }

    fn chains_rec(
        &self,
        b: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> Result<()> {
        let cur = *stack.last().unwrap();
        if cur == b {
            if out.len() >= limit {
                return Err(Error::Size(format!("more than {limit} maximal chains")));
            }
            out.push(stack.clone());
            return Ok(());
        }
        for &c in &self.upper_covers[cur] {
            if self.leq(c, b) {
                stack.push(c);
                self.chains_rec(b, stack, out, limit)?;
                stack.pop();
            }
        }
        Ok(())
    }

    /// Checks the lattice laws on all pairs/triples; returns the first violation.
    pub fn check_laws(&self) -> Result<()> {
        let n = self.n;
        for a in 0..n {
            if self.meet(a, a) != a || self.join(a, a) != a {
                return Err(Error::Input(format!("idempotence fails at {a}")));
            }
            for b in 0..n {
                let m = self.meet(a, b);
                let j = self.join(a, b);
                if m != self.meet(b, a) || j != self.join(b, a) {
                    return Err(Error::Input(format!("commutativity fails at ({a},{b})")));
                }
                if (m == a) != self.leq(a, b) || (j == b) != self.leq(a, b) {
                    return Err(Error::Input(format!("order inconsistent with tables at ({a},{b})")));
                }
                if self.join(a, m) != a || self.meet(a, j) != a {
                    return Err(Error::Input(format!("absorption fails at ({a},{b})")));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab_m = self.meet(a, b);
                let ab_j = self.join(a, b);
                for c in 0..n {
                    if self.meet(ab_m, c) != self.meet(a, self.meet(b, c))
                        || self.join(ab_j, c) != self.join(a, self.join(b, c))
                    {
                        return Err(Error::Input(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Exhaustive modular-law check: `(x∧b)∨(a∧b) = ((x∧b)∨a)∧b` for all triples.
    pub fn modular_violation(&self) -> Option<(usize, usize, usize)> {
        for x in 0..self.n {
            for b in 0..self.n {
                let xb = self.meet(x, b);
                for a in 0..self.n {
                    let lhs = self.join(xb, self.meet(a, b));
                    let rhs = self.meet(self.join(xb, a), b);
                    if lhs != rhs {
                        return Some((x, a, b));
                    }
                }
            }
        }
        None
    }

    pub fn is_modular(&self) -> bool {
        self.modular_violation().is_none()
    }

    pub fn is_distributive(&self) -> bool {
        (0..self.n).all(|a| {
            (0..self.n).all(|b| {
                (0..self.n).all(|c| {
                    self.meet(a, self.join(b, c)) == self.join(self.meet(a, b), self.meet(a, c))
                })
            })
        })
    }

    /// Whether `x` has a complement inside the interval `[a, b]`.
    pub fn has_complement_in(&self, a: usize, b: usize, x: usize) -> bool {
        self.interval(a, b)
            .into_iter()
            .any(|y| self.meet(x, y) == a && self.join(x, y) == b)
    }

    /// Whether the interval `[a, b]` is a complemented lattice.
    pub fn is_complemented_interval(&self, a: usize, b: usize) -> Result<bool> {
        if !self.leq(a, b) {
            return Err(Error::Domain(format!("{a} is not below {b}")));
        }
        let elems = self.interval(a, b);
        Ok(elems.iter().all(|&x| {
            elems.iter().any(|&y| self.meet(x, y) == a && self.join(x, y) == b)
        }))
    }

    pub fn is_complemented(&self) -> bool {
        self.is_complemented_interval(self.bottom, self.top).unwrap()
    }

    /// Sublattice on the elements flagged in `keep`; returns the new lattice and
    /// the map new-index → old-index. Fails if `keep` is not closed under meet/join.
    pub fn sublattice(&self, keep: &[bool]) -> Result<(FiniteLattice, Vec<usize>)> {
        let old: Vec<usize> = (0..self.n).filter(|&x| keep[x]).collect();
        let mut new_of = vec![usize::MAX; self.n];
        for (i, &x) in old.iter().enumerate() {
            new_of[x] = i;
        }
        let k = old.len();
        let mut meet = vec![0u32; k * k];
        let mut join = vec![0u32; k * k];
        for (i, &x) in old.iter().enumerate() {
            for (j, &y) in old.iter().enumerate() {
                let m = new_of[self.meet(x, y)];
                let jn = new_of[self.join(x, y)];
                if m == usize::MAX || jn == usize::MAX {
                    return Err(Error::Domain("subset is not closed under meet and join".into()));
                }
                meet[i * k + j] = m as u32;
                join[i * k + j] = jn as u32;
            }
        }
        Ok((FiniteLattice::from_tables(k, meet, join)?, old))
    }

    /// Chain 0 < 1 < … < n−1.
    pub fn chain(n: usize) -> Result<Self> {
        Self::from_order(n, |a, b| a <= b)
    }

    /// Product order on `self × other`; element `(i, j)` has index `i * other.len() + j`.
    pub fn product(&self, other: &FiniteLattice) -> Result<Self> {
        let m = other.len();
        let n = self.n * m;
        check_size(n)?;
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        for x in 0..n {
            for y in 0..n {
                let (xi, xj) = (x / m, x % m);
                let (yi, yj) = (y / m, y % m);
                meet[x * n + y] = (self.meet(xi, yi) * m + other.meet(xj, yj)) as u32;
                join[x * n + y] = (self.join(xi, yi) * m + other.join(xj, yj)) as u32;
            }
        }
        Self::from_tables(n, meet, join)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond_m3() -> FiniteLattice {
        // 0 < a, b, c < 1 with a, b, c pairwise incomparable.
        FiniteLattice::from_order(5, |x, y| x == y || x == 0 || y == 4).unwrap()
    }

    fn pentagon_n5() -> FiniteLattice {
        // 0 < a < c < 1, 0 < b < 1; the smallest non-modular lattice.
        let rel = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 4), (3, 4)];
        FiniteLattice::from_order(5, |x, y| x == y || rel.contains(&(x, y))).unwrap()
    }

    #[test]
    fn chain_basics() {
        let c = FiniteLattice::chain(4).unwrap();
        assert_eq!(c.bottom(), 0);
        assert_eq!(c.top(), 3);
        assert_eq!(c.height(), 3);
        assert_eq!(c.meet(1, 3), 1);
        assert_eq!(c.join(1, 3), 3);
        assert!(c.is_modular());
        assert!(!c.is_complemented());
        assert_eq!(c.maximal_chains(0, 3, 10).unwrap().len(), 1);
    }

    #[test]
    fn m3_is_modular_complemented_not_distributive() {
        let m3 = diamond_m3();
        assert!(m3.is_modular());
        assert!(!m3.is_distributive());
        assert!(m3.is_complemented());
        assert_eq!(m3.upper_covers(0).len(), 3);
        assert_eq!(m3.maximal_chains(0, 4, 10).unwrap().len(), 3);
    }

    #[test]
    fn n5_is_not_modular() {
        let n5 = pentagon_n5();
        assert!(n5.check_laws().is_ok());
        assert!(n5.modular_violation().is_some());
    }

    #[test]
    fn non_lattice_order_rejected() {
        // Two incomparable maximal elements: no top.
        assert!(FiniteLattice::from_order(3, |x, y| x == y || x == 0).is_err());
        // Bowtie: atoms 1, 2 both below 3 and 4, so 1 ∨ 2 does not exist.
        let bowtie = |x: usize, y: usize| {
            x == y || x == 0 || y == 5 || (matches!(x, 1 | 2) && matches!(y, 3 | 4))
        };
        assert!(FiniteLattice::from_order(6, bowtie).is_err());
    }

    #[test]
    fn product_of_chains() {
        let c2 = FiniteLattice::chain(2).unwrap();
        let c3 = FiniteLattice::chain(3).unwrap();
        let p = c2.product(&c3).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.is_distributive());
        assert_eq!(p.height(), 3);
        assert_eq!(p.maximal_chains(p.bottom(), p.top(), 100).unwrap().len(), 3);
    }

    #[test]
    fn interval_and_sublattice() {
        let b2 = FiniteLattice::chain(2).unwrap();
        let b4 = b2.product(&b2).unwrap().product(&b2).unwrap();
        assert_eq!(b4.len(), 8);
        assert!(b4.is_complemented());
        let iv = b4.interval(0, 3);
        assert_eq!(iv, vec![0, 1, 2, 3]);
        let keep: Vec<bool> = (0..8).map(|x| x == 0 || x == 3 || x == 7).collect();
        let (sub, map) = b4.sublattice(&keep).unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(map, vec![0, 3, 7]);
        let not_closed: Vec<bool> = (0..8).map(|x| x == 1 || x == 2 || x == 0).collect();
        assert!(b4.sublattice(&not_closed).is_err());
    }

    #[test]
    fn size_cap() {
        assert!(matches!(FiniteLattice::chain(MAX_ELEMENTS + 1), Err(Error::Size(_))));
    }
}
