use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::blocks::Blocks;
use crate::error::{Error, Result};
use crate::lattice::{build_ideal_lattice, DirectedGraph, FiniteLattice, PolarizedLattice, MAX_ELEMENTS};
use crate::lozenge::{CMat, Elem, Layout, QuiverData, C};

/// Longest arrow word used to generate candidate subspaces.
pub const MAX_WORD: usize = 6;

const RANK_TOL: f64 = 1e-9;
const SAME_TOL: f64 = 1e-8;

/// Lattice of subrepresentations `p` (`p² = p = p*`, `(1−p)α''p = 0`),
/// stored as vertexwise orthogonal projectors, with `Z([p,q]) = τ((ω−θ)(q−p))`.
#[derive(Clone, Debug)]
pub struct ProjectorLattice {
    pub polarized: PolarizedLattice,
    pub projectors: Vec<Blocks>,
    /// Whether the enumeration is exhaustive (thin representations).
    pub exact: bool,
}

impl ProjectorLattice {
    pub fn lattice(&self) -> &FiniteLattice {
        self.polarized.lattice()
    }

    pub fn element(&self, l: &Layout, i: usize) -> Elem {
        Elem::from_a0(l, self.projectors[i].clone())
    }

    pub fn ranks(&self, i: usize) -> Vec<usize> {
        self.projectors[i].iter().map(|p| p.trace().re.round() as usize).collect()
    }
}

fn arrow_is_zero(a: &CMat) -> bool {
    a.iter().all(|z| z.norm() == 0.0)
}

pub fn projector_lattice(q: &QuiverData) -> Result<ProjectorLattice> {
    q.validate()?;
    if q.is_thin() {
        thin_lattice(q)
    } else {
        word_lattice(q)
    }
}

fn thin_lattice(q: &QuiverData) -> Result<ProjectorLattice> {
    let n = q.vertices.len();
    let edges = q.arrows.iter().filter(|a| !arrow_is_zero(&a.alpha)).map(|a| (a.source, a.target)).collect();
    let mut g = DirectedGraph::new(q.vertices.iter().map(|v| v.mass).collect(), edges);
    g.imag = q.vertices.iter().map(|v| v.mass * v.rho).collect();
    let il = build_ideal_lattice(&g)?;
    let projectors = il
        .masks
        .iter()
        .map(|&m| (0..n).map(|v| CMat::from_element(1, 1, C::new((m >> v & 1) as f64, 0.0))).collect())
        .collect();
    Ok(ProjectorLattice { polarized: il.polarized, projectors, exact: true })
}

/// Orthonormal basis of the column span.
fn span(m: &CMat) -> CMat {
    let n = m.nrows();
    if m.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let gram = m * m.adjoint();
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<_> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > RANK_TOL * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

fn kernel(m: &CMat) -> CMat {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<_> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= RANK_TOL * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        CMat::zeros(n, 0)
    } else {
        CMat::from_columns(&cols)
    }
}

fn projector(basis: &CMat) -> CMat {
    basis * basis.adjoint()
}

fn same(a: &Blocks, b: &Blocks) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).iter().all(|z| z.norm() < SAME_TOL))
}

fn contained(a: &Blocks, b: &Blocks) -> bool {
    a.iter().zip(b).all(|(pa, pb)| (pa - pb * pa).iter().all(|z| z.norm() < SAME_TOL))
}

/// Smallest subrepresentation containing the given vertex subspaces.
fn generate(q: &QuiverData, mut bases: Vec<CMat>) -> Blocks {
    loop {
        let mut grew = false;
        for a in &q.arrows {
            let img = &a.alpha * &bases[a.source];
            let joined = span(&concat(&bases[a.target], &img));
            if joined.ncols() > bases[a.target].ncols() {
                bases[a.target] = joined;
                grew = true;
            }
        }
        if !grew {
            return bases.iter().map(projector).collect();
        }
    }
}

fn concat(a: &CMat, b: &CMat) -> CMat {
    let mut m = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.columns_mut(0, a.ncols()).copy_from(a);
    m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    m
}

fn meet(a: &Blocks, b: &Blocks) -> Blocks {
    a.iter()
        .zip(b)
        .map(|(pa, pb)| {
            let n = pa.nrows();
            let id = CMat::identity(n, n);
            projector(&kernel(&(&id - pa + &id - pb)))
        })
        .collect()
}

fn join(a: &Blocks, b: &Blocks) -> Blocks {
    a.iter().zip(b).map(|(pa, pb)| projector(&span(&concat(pa, pb)))).collect()
}

/// Words (paths) of length `1..=MAX_WORD` as `(start, end, matrix)`.
fn words(q: &QuiverData) -> Vec<(usize, usize, CMat)> {
    let mut out: Vec<(usize, usize, CMat)> = Vec::new();
    let mut frontier: Vec<(usize, usize, CMat)> =
        q.arrows.iter().map(|a| (a.source, a.target, a.alpha.clone())).collect();
    for _ in 0..MAX_WORD {
        out.extend(frontier.iter().cloned());
        let mut next = Vec::new();
        for (s, t, m) in &frontier {
            for a in q.arrows.iter().filter(|a| a.source == *t) {
                next.push((*s, a.target, &a.alpha * m));
            }
        }
        if next.is_empty() || out.len() + next.len() > 20_000 {
            break;
        }
        frontier = next;
    }
    out
}

/// Subrepresentations generated by kernels and images of arrow words,
/// closed under intersection and sum.
pub fn word_lattice(q: &QuiverData) -> Result<ProjectorLattice> {
    q.validate()?;
    let dims: Vec<usize> = q.vertices.iter().map(|v| v.dim).collect();
    let n = dims.len();
    let zero = |v: usize| CMat::zeros(dims[v], 0);
    let mut seeds: Vec<(usize, CMat)> = Vec::new();
    for v in 0..n {
        seeds.push((v, CMat::identity(dims[v], dims[v])));
    }
    for (s, t, m) in words(q) {
        seeds.push((s, kernel(&m)));
        seeds.push((t, span(&m)));
    }
    let mut elems: Vec<Blocks> = vec![dims.iter().map(|&d| CMat::zeros(d, d)).collect()];
    let push = |elems: &mut Vec<Blocks>, p: Blocks| -> Result<bool> {
        if elems.iter().any(|e| same(e, &p)) {
            return Ok(false);
        }
        if elems.len() >= MAX_ELEMENTS {
            return Err(Error::Size(format!("more than {MAX_ELEMENTS} subrepresentations")));
        }
        elems.push(p);
        Ok(true)
    };
    for (v, basis) in seeds {
        if basis.ncols() == 0 {
            continue;
        }
        let bases: Vec<CMat> = (0..n).map(|u| if u == v { basis.clone() } else { zero(u) }).collect();
        push(&mut elems, generate(q, bases))?;
    }
    let mut start = 0;
    loop {
        let len = elems.len();
        let mut added = false;
        for i in 0..len {
            for j in (i + 1).max(start)..len {
                let (m, jn) = (meet(&elems[i], &elems[j]), join(&elems[i], &elems[j]));
                added |= push(&mut elems, m)?;
                added |= push(&mut elems, jn)?;
            }
        }
        if !added {
            break;
        }
        start = len;
    }
    let lat = FiniteLattice::from_order(elems.len(), |a, b| contained(&elems[a], &elems[b]))?;
    let z = |p: &Blocks| -> Complex64 {
        p.iter()
            .zip(&q.vertices)
            .map(|(b, v)| Complex64::new(v.mass, v.mass * v.rho) * b.trace().re.round())
            .sum()
    };
    let values: Vec<Complex64> = elems.iter().map(z).collect();
    let polarized = PolarizedLattice::from_cover_values(lat, |a, b| values[b] - values[a])?;
    Ok(ProjectorLattice { polarized, projectors: elems, exact: false })
}
