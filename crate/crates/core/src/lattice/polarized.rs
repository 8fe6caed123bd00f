use num_complex::Complex64;

use super::kclass::{KClass, KClasses};
use super::order::FiniteLattice;
use crate::error::{domain, input, Error, Result};

/// Phase comparisons are made with this absolute slack (radians).
pub const PHASE_TOL: f64 = 1e-10;

/// Argument of a central charge in the right half-plane.
pub fn phase(z: Complex64) -> f64 {
    (z.im / z.re).atan()
}

/// Additive central charge, given by its values on the simple classes.
#[derive(Clone, Debug, PartialEq)]
pub struct Polarization {
    pub values: Vec<Complex64>,
}

impl Polarization {
    pub fn eval(&self, c: &KClass) -> Complex64 {
        c.0.iter().zip(&self.values).map(|(&n, z)| *z * n as f64).sum()
    }

    pub fn phase(&self, c: &KClass) -> Result<f64> {
        if c.is_zero() {
            return domain("phase of the zero class");
        }
        if !c.is_nonnegative() {
            return domain("phase of a class outside K⁺");
        }
        Ok(phase(self.eval(c)))
    }
}

/// A finite modular lattice with a polarization.
#[derive(Clone, Debug)]
pub struct PolarizedLattice {
    lattice: FiniteLattice,
    classes: KClasses,
    pol: Polarization,
    values: Vec<Complex64>,
}

/// Harder–Narasimhan chain with its (strictly decreasing) phases.
#[derive(Clone, Debug, PartialEq)]
pub struct HnFiltration {
    pub chain: Vec<usize>,
    pub phases: Vec<f64>,
}

impl PolarizedLattice {
    pub fn new(lattice: FiniteLattice, classes: KClasses, pol: Polarization) -> Result<Self> {
        if pol.values.len() != classes.len() {
            return input(format!(
                "polarization has {} values for {} classes",
                pol.values.len(),
                classes.len()
            ));
        }
        if let Some(z) = pol.values.iter().find(|z| !(z.re > 0.0) || !z.im.is_finite()) {
            return input(format!("polarization value {z} is not in the right half-plane"));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); lattice.len()];
        let mut order: Vec<usize> = (0..lattice.len()).collect();
        order.sort_by_key(|&x| lattice.rank(x));
        for &x in &order {
            if let Some(&c) = lattice.lower_covers(x).first() {
                let k = classes.class_of_cover(c, x).unwrap();
                values[x] = values[c] + pol.values[k];
            }
        }
        Ok(Self { lattice, classes, pol, values })
    }

    /// Polarization from a value on each cover; values on projective covers must agree.
    pub fn from_cover_values(
        lattice: FiniteLattice,
        f: impl Fn(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let classes = KClasses::compute(&lattice);
        let mut vals: Vec<Option<Complex64>> = vec![None; classes.len()];
        for a in 0..lattice.len() {
            for &b in lattice.upper_covers(a) {
                let k = classes.class_of_cover(a, b).unwrap();
                let z = f(a, b);
                match vals[k] {
                    None => vals[k] = Some(z),
                    Some(prev) if (prev - z).norm() <= 1e-12 * (1.0 + prev.norm()) => {}
                    Some(prev) => {
                        return input(format!(
                            "cover ({a},{b}) has value {z} but its class already has {prev}"
                        ))
                    }
                }
            }
        }
        let values = vals.into_iter().map(|v| v.unwrap()).collect();
        Self::new(lattice, classes, Polarization { values })
    }

    pub fn lattice(&self) -> &FiniteLattice {
        &self.lattice
    }

    pub fn classes(&self) -> &KClasses {
        &self.classes
    }

    pub fn polarization(&self) -> &Polarization {
        &self.pol
    }

    pub fn is_real(&self) -> bool {
        self.pol.values.iter().all(|z| z.im == 0.0)
    }

    /// Same lattice with the imaginary part dropped.
    pub fn real_part(&self) -> Self {
        let pol = Polarization { values: self.pol.values.iter().map(|z| z.re.into()).collect() };
        Self::new(self.lattice.clone(), self.classes.clone(), pol).unwrap()
    }

    /// `Z([bottom, x])`.
    pub fn value(&self, x: usize) -> Complex64 {
        self.values[x]
    }

    /// `Z([a, b])`.
    pub fn z(&self, a: usize, b: usize) -> Complex64 {
        self.values[b] - self.values[a]
    }

    pub fn phase(&self, a: usize, b: usize) -> Result<f64> {
        if !self.lattice.lt(a, b) {
            return domain(format!("phase of [{a},{b}] requires {a} < {b}"));
        }
        Ok(phase(self.z(a, b)))
    }

    /// Whether `[a, b]` is semistable: `φ([a, x]) ≤ φ([a, b])` for all `a < x ≤ b`.
    pub fn is_semistable_interval(&self, a: usize, b: usize) -> Result<bool> {
        if !self.lattice.leq(a, b) {
            return domain(format!("{a} is not below {b}"));
        }
        if a == b {
            return Ok(true);
        }
        let top = phase(self.z(a, b));
        Ok(self
            .lattice
            .interval(a, b)
            .into_iter()
            .filter(|&x| x != a)
            .all(|x| phase(self.z(a, x)) <= top + PHASE_TOL))
    }

    pub fn is_semistable(&self) -> bool {
        self.is_semistable_interval(self.lattice.bottom(), self.lattice.top()).unwrap()
    }

    /// Whole-lattice phase.
    pub fn total_phase(&self) -> f64 {
        if self.lattice.len() == 1 {
            0.0
        } else {
            phase(self.values[self.lattice.top()])
        }
    }

    /// Harder–Narasimhan filtration: each step is the largest element of
    /// maximal phase above the previous step.
    pub fn harder_narasimhan(&self) -> HnFiltration {
        let l = &self.lattice;
        let mut chain = vec![l.bottom()];
        let mut phases = Vec::new();
        let mut cur = l.bottom();
        while cur != l.top() {
            let above: Vec<usize> = l.interval(cur, l.top()).into_iter().filter(|&x| x != cur).collect();
            let best = above.iter().map(|&x| phase(self.z(cur, x))).fold(f64::NEG_INFINITY, f64::max);
            let next = above
                .iter()
                .filter(|&&x| phase(self.z(cur, x)) >= best - PHASE_TOL)
                .fold(cur, |acc, &x| l.join(acc, x));
            phases.push(phase(self.z(cur, next)));
            chain.push(next);
            cur = next;
        }
        HnFiltration { chain, phases }
    }

    /// Exhaustive search over all chains for those with semistable steps and
    /// strictly decreasing phases. A correct lattice yields exactly one.
    pub fn hn_candidates_by_search(&self, limit: usize) -> Result<Vec<HnFiltration>> {
        let mut out = Vec::new();
        let mut chain = vec![self.lattice.bottom()];
        let mut phases = Vec::new();
        self.search(&mut chain, &mut phases, &mut out, limit)?;
        Ok(out)
    }

    fn search(
        &self,
        chain: &mut Vec<usize>,
        phases: &mut Vec<f64>,
        out: &mut Vec<HnFiltration>,
        limit: usize,
    ) -> Result<()> {
        let l = &self.lattice;
        let cur = *chain.last().unwrap();
        if cur == l.top() {
            if out.len() >= limit {
                return Err(Error::Size(format!("more than {limit} HN candidates")));
            }
            out.push(HnFiltration { chain: chain.clone(), phases: phases.clone() });
            return Ok(());
        }
        for x in l.interval(cur, l.top()) {
            if x == cur {
                continue;
            }
            let p = phase(self.z(cur, x));
            let decreasing = phases.last().is_none_or(|&q| p < q - PHASE_TOL);
            if decreasing && self.is_semistable_interval(cur, x)? {
                chain.push(x);
                phases.push(p);
                self.search(chain, phases, out, limit)?;
                chain.pop();
                phases.pop();
            }
        }
        Ok(())
    }
}
