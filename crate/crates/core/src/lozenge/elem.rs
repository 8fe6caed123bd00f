use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C = Complex64;
pub type CMat = DMatrix<C>;
pub type CVec = DVector<C>;

pub const I: C = C::new(0.0, 1.0);

/// Shape of a quiver-built algebra: vertex dimensions and masses, arrows `s → t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub dims: Vec<usize>,
    pub masses: Vec<f64>,
    pub arrows: Vec<(usize, usize)>,
}

/// Component index: `A⁰`, `A^{1,0}`, `A^{0,1}`, `A²`.
pub const COMPONENTS: [usize; 4] = [0, 1, 2, 3];

pub fn component_degree(k: usize) -> i32 {
    [0, 1, 1, 2][k]
}

impl Layout {
    pub fn n_vertices(&self) -> usize {
        self.dims.len()
    }

    pub fn component_dim(&self, k: usize) -> usize {
        match k {
            0 | 3 => self.dims.iter().map(|d| d * d).sum(),
            _ => self.arrows.iter().map(|&(s, t)| self.dims[s] * self.dims[t]).sum(),
        }
    }

    pub fn dim(&self) -> usize {
        COMPONENTS.iter().map(|&k| self.component_dim(k)).sum()
    }

    pub fn offset(&self, k: usize) -> usize {
        (0..k).map(|j| self.component_dim(j)).sum()
    }
}

/// Element of the ambient algebra. `a0[v]` and `a2[v]` are `d_v × d_v`
/// (`a2` stores `c` for the 2-form `ω·c`); `p[a]` is the `(1,0)` part of arrow
/// `a: s → t` as a `d_s × d_t` block and `pp[a]` the `(0,1)` part, `d_t × d_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Elem {
    pub a0: Vec<CMat>,
    pub p: Vec<CMat>,
    pub pp: Vec<CMat>,
    pub a2: Vec<CMat>,
}

impl Elem {
    pub fn zero(l: &Layout) -> Self {
        let sq = |d: usize| CMat::zeros(d, d);
        Elem {
            a0: l.dims.iter().map(|&d| sq(d)).collect(),
            p: l.arrows.iter().map(|&(s, t)| CMat::zeros(l.dims[s], l.dims[t])).collect(),
            pp: l.arrows.iter().map(|&(s, t)| CMat::zeros(l.dims[t], l.dims[s])).collect(),
            a2: l.dims.iter().map(|&d| sq(d)).collect(),
        }
    }

    pub fn identity(l: &Layout) -> Self {
        let mut e = Self::zero(l);
        for (b, &d) in e.a0.iter_mut().zip(&l.dims) {
            *b = CMat::identity(d, d);
        }
        e
    }

    /// `ω` itself: identity blocks in `A²`.
    pub fn omega(l: &Layout) -> Self {
        let mut e = Self::zero(l);
        for (b, &d) in e.a2.iter_mut().zip(&l.dims) {
            *b = CMat::identity(d, d);
        }
        e
    }

    pub fn from_a0(l: &Layout, blocks: Vec<CMat>) -> Self {
        Elem { a0: blocks, ..Self::zero(l) }
    }

    pub fn from_a2(l: &Layout, blocks: Vec<CMat>) -> Self {
        Elem { a2: blocks, ..Self::zero(l) }
    }

    pub fn from_pp(l: &Layout, blocks: Vec<CMat>) -> Self {
        Elem { pp: blocks, ..Self::zero(l) }
    }

    fn zip(&self, o: &Elem, f: impl Fn(&CMat, &CMat) -> CMat) -> Elem {
        let z = |a: &[CMat], b: &[CMat]| a.iter().zip(b).map(|(x, y)| f(x, y)).collect();
        Elem { a0: z(&self.a0, &o.a0), p: z(&self.p, &o.p), pp: z(&self.pp, &o.pp), a2: z(&self.a2, &o.a2) }
    }

    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Elem {
        let m = |a: &[CMat]| a.iter().map(&f).collect();
        Elem { a0: m(&self.a0), p: m(&self.p), pp: m(&self.pp), a2: m(&self.a2) }
    }

    pub fn add(&self, o: &Elem) -> Elem {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Elem) -> Elem {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, c: C) -> Elem {
        self.map(|a| a * c)
    }

    pub fn scale_re(&self, c: f64) -> Elem {
        self.scale(C::new(c, 0.0))
    }

    /// Keeps only component `k`.
    pub fn part(&self, l: &Layout, k: usize) -> Elem {
        let mut e = Self::zero(l);
        match k {
            0 => e.a0 = self.a0.clone(),
            1 => e.p = self.p.clone(),
            2 => e.pp = self.pp.clone(),
            _ => e.a2 = self.a2.clone(),
        }
        e
    }

    /// Degree-`deg` part (`A¹` keeps both bidegrees).
    pub fn degree_part(&self, l: &Layout, deg: i32) -> Elem {
        match deg {
            0 => self.part(l, 0),
            1 => self.part(l, 1).add(&self.part(l, 2)),
            _ => self.part(l, 3),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        [&self.a0, &self.p, &self.pp, &self.a2]
            .iter()
            .flat_map(|v| v.iter())
            .map(|b| b.norm_squared())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        [&self.a0, &self.p, &self.pp, &self.a2]
            .iter()
            .flat_map(|v| v.iter())
            .flat_map(|b| b.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Antilinear involution: blockwise adjoint, swapping `(1,0)` and `(0,1)` parts.
    pub fn star(&self) -> Elem {
        let adj = |a: &[CMat]| a.iter().map(|b| b.adjoint()).collect();
        Elem { a0: adj(&self.a0), p: adj(&self.pp), pp: adj(&self.p), a2: adj(&self.a2) }
    }
}

/// Product in the ambient algebra. The only `A¹·A¹` terms pair the two
/// bidegrees of the same arrow: `x''y'` lands at the target and `x'y''` at the source.
pub fn mul(l: &Layout, x: &Elem, y: &Elem) -> Elem {
    let mut z = Elem::zero(l);
    for v in 0..l.n_vertices() {
        z.a0[v] = &x.a0[v] * &y.a0[v];
        z.a2[v] = &x.a0[v] * &y.a2[v] + &x.a2[v] * &y.a0[v];
    }
    for (a, &(s, t)) in l.arrows.iter().enumerate() {
        z.p[a] = &x.a0[s] * &y.p[a] + &x.p[a] * &y.a0[t];
        z.pp[a] = &x.a0[t] * &y.pp[a] + &x.pp[a] * &y.a0[s];
        z.a2[t] += (&x.pp[a] * &y.p[a]) * (I / l.masses[t]);
        z.a2[s] -= (&x.p[a] * &y.pp[a]) * (I / l.masses[s]);
    }
    z
}

/// Supercommutator `[x, y] = xy − (−1)^{|x||y|} yx`, extended bilinearly over degrees.
pub fn supercomm(l: &Layout, x: &Elem, y: &Elem) -> Elem {
    let mut out = Elem::zero(l);
    for dx in 0..=2 {
        let xp = x.degree_part(l, dx);
        if xp.max_abs() == 0.0 {
            continue;
        }
        for dy in 0..=2 {
            if dx + dy > 2 {
                continue;
            }
            let yp = y.degree_part(l, dy);
            let sign = if (dx * dy) % 2 == 0 { 1.0 } else { -1.0 };
            out = out.add(&mul(l, &xp, &yp).sub(&mul(l, &yp, &xp).scale_re(sign)));
        }
    }
    out
}

/// Orthonormal coordinates: `√m_v`-weighted entries on `A⁰`/`A²`, raw entries on `A¹`.
pub fn to_coords(l: &Layout, e: &Elem) -> CVec {
    let mut v = Vec::with_capacity(l.dim());
    let push = |v: &mut Vec<C>, b: &CMat, w: f64| {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                v.push(b[(i, j)] * w);
            }
        }
    };
    for (b, m) in e.a0.iter().zip(&l.masses) {
        push(&mut v, b, m.sqrt());
    }
    for b in &e.p {
        push(&mut v, b, 1.0);
    }
    for b in &e.pp {
        push(&mut v, b, 1.0);
    }
    for (b, m) in e.a2.iter().zip(&l.masses) {
        push(&mut v, b, m.sqrt());
    }
    CVec::from_vec(v)
}

pub fn from_coords(l: &Layout, v: &CVec) -> Elem {
    let mut e = Elem::zero(l);
    let mut i = 0;
    let mut fill = |b: &mut CMat, w: f64| {
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                b[(r, c)] = v[i] / w;
                i += 1;
            }
        }
    };
    for (b, m) in e.a0.iter_mut().zip(&l.masses) {
        fill(b, m.sqrt());
    }
    for b in e.p.iter_mut() {
        fill(b, 1.0);
    }
    for b in e.pp.iter_mut() {
        fill(b, 1.0);
    }
    for (b, m) in e.a2.iter_mut().zip(&l.masses) {
        fill(b, m.sqrt());
    }
    e
}
