use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::elem::{
    component_degree, from_coords, mul, supercomm, to_coords, CMat, CVec, Elem, Layout, C, COMPONENTS, I,
};
use super::quiver::QuiverData;
use crate::error::{domain, internal, Result};

/// Eigenvalues of `Δ` below this (relative to its spectral radius) count as harmonic.
pub const KERNEL_TOL: f64 = 1e-9;

/// A lozenge algebra realized inside the algebra of a quiver: each component
/// is a subspace of the ambient component (orthonormal basis in ambient
/// coordinates), `d = ad_δ` for a twist `δ`, and products are projected back
/// onto the subspace.
#[derive(Clone, Debug)]
pub struct LozengeAlgebra {
    layout: Layout,
    trace_weights: Vec<f64>,
    basis: [CMat; 4],
    full: bool,
    twist: Elem,
    theta: Elem,
}

/// Kähler-identity adjoints as operator matrices in algebra coordinates.
#[derive(Clone, Debug)]
pub struct Adjoints {
    pub del_star: CMat,
    pub delbar_star: CMat,
    pub d_star: CMat,
}

#[derive(Clone, Debug)]
pub struct Laplacians {
    pub full: CMat,
    pub del: CMat,
    pub delbar: CMat,
}

/// Harmonic projector and Green's operator.
#[derive(Clone, Debug)]
pub struct Hodge {
    pub p: CMat,
    pub g: CMat,
    pub kernel_dims: [usize; 4],
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn max_violation(&self) -> f64 {
        self.checks.iter().map(|c| c.violation).fold(0.0, f64::max)
    }

    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !(c.violation <= tol)).map(|c| c.name).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.violation)
    }
}

pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.clone().singular_values().max()
    }
}

impl LozengeAlgebra {
    /// `A⁰ = ⊕ End(E_v)`, `A^{0,1} = ⊕ Hom(E_s, E_t)`, `A² = ω·A⁰`,
    /// `τ(ωb) = Σ m_v tr b_v`, `θ = −iωρ`, `d = 0`.
    pub fn build_from_quiver(q: &QuiverData) -> Result<Self> {
        q.validate()?;
        let layout = q.layout();
        let basis = COMPONENTS.map(|k| {
            let n = layout.component_dim(k);
            CMat::identity(n, n)
        });
        let theta = Elem::from_a2(
            &layout,
            q.vertices
                .iter()
                .map(|v| CMat::identity(v.dim, v.dim) * (-I * v.rho))
                .collect(),
        );
        let alg = LozengeAlgebra {
            trace_weights: layout.masses.clone(),
            twist: Elem::zero(&layout),
            layout,
            basis,
            full: true,
            theta,
        };
        let report = alg.check_axioms();
        if let Some(name) = report.failures(1e-10).first() {
            return internal(format!("constructed algebra violates axiom: {name}"));
        }
        Ok(alg)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn dims(&self) -> [usize; 4] {
        COMPONENTS.map(|k| self.basis[k].ncols())
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().sum()
    }

    fn sub_offset(&self, k: usize) -> usize {
        self.dims()[..k].iter().sum()
    }

    pub fn twist(&self) -> &Elem {
        &self.twist
    }

    pub fn theta(&self) -> &Elem {
        &self.theta
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    /// Same algebra with `d = ad_δ`.
    pub fn with_twist(&self, delta: Elem) -> Self {
        LozengeAlgebra { twist: delta, ..self.clone() }
    }

    /// Twists the differential by `α` and replaces `θ` by the curvature `θ + dα + α²`.
    pub fn twist_by(&self, alpha: &Elem) -> Self {
        let alpha = alpha.degree_part(&self.layout, 1);
        let theta = super::gauge::curvature(self, &alpha);
        LozengeAlgebra { twist: self.twist.add(&alpha), theta, ..self.clone() }
    }

    pub fn with_theta(&self, theta: Elem) -> Self {
        LozengeAlgebra { theta, ..self.clone() }
    }

    pub fn with_trace_weights(&self, tw: Vec<f64>) -> Self {
        LozengeAlgebra { trace_weights: tw, ..self.clone() }
    }

    pub fn component_of(&self, i: usize) -> usize {
        let d = self.dims();
        let mut acc = 0;
        for k in COMPONENTS {
            acc += d[k];
            if i < acc {
                return k;
            }
        }
        3
    }

    /// Algebra coordinates of an ambient element (orthogonal projection).
    pub fn coords(&self, e: &Elem) -> CVec {
        let amb = to_coords(&self.layout, e);
        let mut out = CVec::zeros(self.dim());
        for k in COMPONENTS {
            let (o, n) = (self.layout.offset(k), self.layout.component_dim(k));
            let part = self.basis[k].adjoint() * amb.rows(o, n);
            out.rows_mut(self.sub_offset(k), part.len()).copy_from(&part);
        }
        out
    }

    pub fn embed(&self, v: &CVec) -> Elem {
        let mut amb = CVec::zeros(self.layout.dim());
        for k in COMPONENTS {
            let nk = self.basis[k].ncols();
            let part = &self.basis[k] * v.rows(self.sub_offset(k), nk);
            amb.rows_mut(self.layout.offset(k), part.len()).copy_from(&part);
        }
        from_coords(&self.layout, &amb)
    }

    pub fn project(&self, e: &Elem) -> Elem {
        if self.full {
            e.clone()
        } else {
            self.embed(&self.coords(e))
        }
    }

    pub fn basis_elem(&self, i: usize) -> Elem {
        let mut v = CVec::zeros(self.dim());
        v[i] = C::new(1.0, 0.0);
        self.embed(&v)
    }

    pub fn basis_of(&self, k: usize) -> Vec<Elem> {
        let o = self.sub_offset(k);
        (o..o + self.dims()[k]).map(|i| self.basis_elem(i)).collect()
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        self.project(&mul(&self.layout, x, y))
    }

    pub fn comm(&self, x: &Elem, y: &Elem) -> Elem {
        self.project(&supercomm(&self.layout, x, y))
    }

    pub fn tau(&self, e: &Elem) -> C {
        e.a2.iter().zip(&self.trace_weights).map(|(b, w)| b.trace() * *w).sum()
    }

    pub fn omega(&self) -> Elem {
        Elem::omega(&self.layout)
    }

    pub fn identity(&self) -> Elem {
        Elem::identity(&self.layout)
    }

    /// `Λ = L⁻¹`: `ω·c ↦ c`, zero on other degrees.
    pub fn lambda(&self, e: &Elem) -> Elem {
        Elem::from_a0(&self.layout, e.a2.clone())
    }

    /// `L: a ↦ ω a` on `A⁰`.
    pub fn lefschetz(&self, e: &Elem) -> Elem {
        Elem::from_a2(&self.layout, e.a0.clone())
    }

    /// `λ = τ(θ)/τ(ω)`.
    pub fn lambda_const(&self) -> C {
        self.tau(&self.theta) / self.tau(&self.omega())
    }

    pub fn d(&self, x: &Elem) -> Elem {
        self.comm(&self.twist, x)
    }

    pub fn del(&self, x: &Elem) -> Elem {
        self.comm(&self.twist.part(&self.layout, 1), x)
    }

    pub fn delbar(&self, x: &Elem) -> Elem {
        self.comm(&self.twist.part(&self.layout, 2), x)
    }

    /// Matrix of a linear map in algebra coordinates.
    pub fn op_matrix(&self, f: impl Fn(&Elem) -> Elem) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            let col = self.coords(&f(&self.basis_elem(j)));
            m.set_column(j, &col);
        }
        m
    }

    pub fn d_mat(&self) -> CMat {
        self.op_matrix(|x| self.d(x))
    }

    pub fn del_mat(&self) -> CMat {
        self.op_matrix(|x| self.del(x))
    }

    pub fn delbar_mat(&self) -> CMat {
        self.op_matrix(|x| self.delbar(x))
    }

    pub fn lambda_mat(&self) -> CMat {
        self.op_matrix(|x| self.lambda(x))
    }

    /// `∂* = i[Λ,∂̄]`, `∂̄* = −i[Λ,∂]`, `d* = i[Λ,∂̄−∂]`.
    pub fn adjoints(&self) -> Adjoints {
        let lam = self.lambda_mat();
        let del = self.del_mat();
        let delbar = self.delbar_mat();
        let comm = |a: &CMat, b: &CMat| a * b - b * a;
        let del_star = comm(&lam, &delbar) * I;
        let delbar_star = comm(&lam, &del) * (-I);
        let d_star = comm(&lam, &(&delbar - &del)) * I;
        Adjoints { del_star, delbar_star, d_star }
    }

    /// Gram matrix of the defining sesquilinear forms on the algebra basis,
    /// evaluated through `τ`, `*` and the product.
    pub fn gram(&self) -> CMat {
        let n = self.dim();
        let basis: Vec<Elem> = (0..n).map(|i| self.basis_elem(i)).collect();
        let omega = self.omega();
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            let ki = self.component_of(i);
            let xs = basis[i].star();
            let lxs = self.lambda(&basis[i]).star();
            for j in 0..n {
                if self.component_of(j) != ki {
                    continue;
                }
                let y = &basis[j];
                g[(i, j)] = match ki {
                    0 => self.tau(&mul(&self.layout, &omega, &mul(&self.layout, &xs, y))),
                    1 => -I * self.tau(&mul(&self.layout, &xs, y)),
                    2 => I * self.tau(&mul(&self.layout, &xs, y)),
                    _ => {
                        let ly = self.lambda(y);
                        self.tau(&mul(&self.layout, &omega, &mul(&self.layout, &lxs, &ly)))
                    }
                };
            }
        }
        g
    }

    /// Adjoint of an operator with respect to the Gram matrix: `G⁻¹ Mᴴ G`.
    pub fn gram_adjoint(&self, m: &CMat) -> Result<CMat> {
        let g = self.gram();
        let Some(ginv) = g.clone().try_inverse() else {
            return domain("Gram matrix is singular");
        };
        Ok(ginv * m.adjoint() * g)
    }

    pub fn d_squared_norm(&self) -> f64 {
        let d = self.d_mat();
        op_norm(&(&d * &d))
    }

    pub fn laplacians(&self) -> Result<Laplacians> {
        let d2 = self.d_squared_norm();
        if d2 > 1e-10 {
            return domain(format!("d² ≠ 0 (‖d²‖ = {d2:.3e})"));
        }
        let adj = self.adjoints();
        let (d, del, delbar) = (self.d_mat(), self.del_mat(), self.delbar_mat());
        Ok(Laplacians {
            full: &d * &adj.d_star + &adj.d_star * &d,
            del: &del * &adj.del_star + &adj.del_star * &del,
            delbar: &delbar * &adj.delbar_star + &adj.delbar_star * &delbar,
        })
    }

    /// Per-component eigendecomposition of `Δ`, returning (kernel, rest, rest eigenvalues)
    /// bases in algebra coordinates of each component.
    fn spectral_blocks(&self, lap: &CMat) -> [(CMat, CMat, Vec<f64>); 4] {
        let dims = self.dims();
        let scale = op_norm(lap).max(1.0);
        COMPONENTS.map(|k| {
            let (o, n) = (self.sub_offset(k), dims[k]);
            if n == 0 {
                return (CMat::zeros(0, 0), CMat::zeros(0, 0), vec![]);
            }
            let block = lap.view((o, o), (n, n)).into_owned();
            let herm = (&block + block.adjoint()) * C::new(0.5, 0.0);
            let eig = SymmetricEigen::new(herm);
            let (mut ker, mut rest, mut vals) = (Vec::new(), Vec::new(), Vec::new());
            for (i, &e) in eig.eigenvalues.iter().enumerate() {
                let v = eig.eigenvectors.column(i).into_owned();
                if e.abs() <= KERNEL_TOL * scale {
                    ker.push(v);
                } else {
                    rest.push(v);
                    vals.push(e);
                }
            }
            let stack = |cols: &[CVec]| {
                if cols.is_empty() {
                    CMat::zeros(n, 0)
                } else {
                    CMat::from_columns(cols)
                }
            };
            (stack(&ker), stack(&rest), vals)
        })
    }

    /// Orthogonal projector onto `Ker Δ` and the Green's operator.
    pub fn hodge(&self) -> Result<Hodge> {
        let lap = self.laplacians()?.full;
        let n = self.dim();
        let mut p = CMat::zeros(n, n);
        let mut g = CMat::zeros(n, n);
        let blocks = self.spectral_blocks(&lap);
        let mut kernel_dims = [0; 4];
        for k in COMPONENTS {
            let (ker, rest, vals) = &blocks[k];
            let o = self.sub_offset(k);
            let nk = self.dims()[k];
            kernel_dims[k] = ker.ncols();
            let pk = ker * ker.adjoint();
            let mut gk = CMat::zeros(nk, nk);
            for (i, &e) in vals.iter().enumerate() {
                let v = rest.column(i);
                gk += v * v.adjoint() * C::new(1.0 / e, 0.0);
            }
            p.view_mut((o, o), (nk, nk)).copy_from(&pk);
            g.view_mut((o, o), (nk, nk)).copy_from(&gk);
        }
        Ok(Hodge { p, g, kernel_dims })
    }

    /// Restriction to the subspaces spanned by `cols[k]` (algebra coordinates of component `k`).
    fn restricted(&self, cols: [CMat; 4], twist: Elem, theta: Elem) -> Self {
        let basis = COMPONENTS.map(|k| &self.basis[k] * &cols[k]);
        LozengeAlgebra {
            layout: self.layout.clone(),
            trace_weights: self.trace_weights.clone(),
            basis,
            full: false,
            twist,
            theta,
        }
    }

    /// `Ker Δ` with `d = 0`, the same `ω`, `θ`, `τ`, and product followed by harmonic projection.
    pub fn harmonic_algebra(&self) -> Result<Self> {
        if self.twist.max_abs() == 0.0 {
            return Ok(self.clone());
        }
        let lap = self.laplacians()?.full;
        let blocks = self.spectral_blocks(&lap);
        let cols = COMPONENTS.map(|k| blocks[k].0.clone());
        let h = self.restricted(cols, Elem::zero(&self.layout), self.theta.clone());
        let report = h.check_axioms();
        if let Some(name) = report.failures(1e-8).first() {
            return internal(format!("harmonic algebra violates axiom: {name}"));
        }
        Ok(h)
    }

    /// Harmonic elements of prescribed `ad_r` eigenvalue in each component,
    /// with `d = 0` and curvature `theta`.
    pub fn graded_harmonic_subalgebra(&self, r: &Elem, degrees: [f64; 4], theta: Elem) -> Result<Self> {
        let h = self.harmonic_algebra()?;
        let ad = h.op_matrix(|x| h.comm(r, x));
        let dims = h.dims();
        let cols = COMPONENTS.map(|k| {
            let (o, n) = (h.sub_offset(k), dims[k]);
            if n == 0 {
                return CMat::zeros(0, 0);
            }
            let block = ad.view((o, o), (n, n)).into_owned();
            let herm = (&block + block.adjoint()) * C::new(0.5, 0.0);
            let eig = SymmetricEigen::new(herm);
            let sel: Vec<CVec> = eig
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &e)| (e - degrees[k]).abs() < 1e-8)
                .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
                .collect();
            if sel.is_empty() {
                CMat::zeros(n, 0)
            } else {
                CMat::from_columns(&sel)
            }
        });
        let sub = h.restricted(cols, Elem::zero(&self.layout), theta);
        let report = sub.check_axioms();
        if let Some(name) = report.failures(1e-8).first() {
            return internal(format!("graded subalgebra violates axiom: {name}"));
        }
        Ok(sub)
    }

    /// Sizes `d_v` of the matrix factors of `A⁰`, recovered numerically from
    /// the center and the left regular representation.
    pub fn matrix_factors(&self) -> Vec<usize> {
        let a0 = self.basis_of(0);
        let n = a0.len();
        // Center: kernel of a ↦ ([a, e_j])_j.
        let mut rows = CMat::zeros(n * n, n);
        for (i, x) in a0.iter().enumerate() {
            for (j, y) in a0.iter().enumerate() {
                let c = self.coords(&self.comm(x, y));
                for r in 0..n {
                    rows[(j * n + r, i)] = c[r];
                }
            }
        }
        let gram = rows.adjoint() * &rows;
        let eig = SymmetricEigen::new(gram);
        let scale = eig.eigenvalues.amax().max(1.0);
        let center: Vec<CVec> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &e)| e.abs() < 1e-9 * scale)
            .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
            .collect();
        // A generic self-adjoint central element separates the factors.
        let mut z = Elem::zero(&self.layout);
        for (i, v) in center.iter().enumerate() {
            let w = C::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.0);
            let e = self.embed(&self.pad(v, 0));
            z = z.add(&e.add(&e.star()).scale(w));
        }
        let lz = self.op_matrix(|x| self.mul(&z, &x.part(&self.layout, 0)));
        let block = lz.view((0, 0), (n, n)).into_owned();
        let herm = (&block + block.adjoint()) * C::new(0.5, 0.0);
        let mut vals: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        let mut sizes = Vec::new();
        let mut i = 0;
        while i < vals.len() {
            let mut j = i;
            while j < vals.len() && (vals[j] - vals[i]).abs() < 1e-7 {
                j += 1;
            }
            sizes.push(((j - i) as f64).sqrt().round() as usize);
            i = j;
        }
        sizes.sort_unstable();
        sizes
    }

    fn pad(&self, v: &CVec, k: usize) -> CVec {
        let mut out = CVec::zeros(self.dim());
        out.rows_mut(self.sub_offset(k), v.len()).copy_from(v);
        out
    }

    /// Evaluates every defining property on basis elements.
    pub fn check_axioms(&self) -> AxiomReport {
        let l = &self.layout;
        let n = self.dim();
        let basis: Vec<Elem> = (0..n).map(|i| self.basis_elem(i)).collect();
        let deg: Vec<i32> = (0..n).map(|i| component_degree(self.component_of(i))).collect();
        let omega = self.omega();
        let mut checks = Vec::new();
        let mut push = |name: &'static str, v: f64| checks.push(AxiomCheck { name, violation: v });

        let mut closure = 0.0f64;
        let mut a10sq = 0.0f64;
        let mut star_mul = 0.0f64;
        let mut tau_comm = 0.0f64;
        let mut leibniz = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if deg[i] + deg[j] > 2 {
                    continue;
                }
                let (x, y) = (&basis[i], &basis[j]);
                let raw = mul(l, x, y);
                let xy = self.project(&raw);
                if !(deg[i] == 1 && deg[j] == 1) {
                    closure = closure.max(raw.sub(&xy).max_abs());
                }
                if self.component_of(i) == 1 && self.component_of(j) == 1 {
                    a10sq = a10sq.max(raw.max_abs());
                }
                let sign = if deg[i] * deg[j] % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = self.mul(&y.star(), &x.star()).scale_re(sign);
                star_mul = star_mul.max(xy.star().sub(&rhs).max_abs());
                if deg[i] + deg[j] == 2 {
                    tau_comm = tau_comm.max(self.tau(&self.comm(x, y)).norm());
                }
                let lhs = self.d(&xy);
                let s = if deg[i] % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = self.mul(&self.d(x), y).add(&self.mul(x, &self.d(y)).scale_re(s));
                leibniz = leibniz.max(lhs.sub(&rhs).max_abs());
            }
        }
        push("product closure", closure);
        push("A^{1,0}·A^{1,0} = 0", a10sq);
        push("(ab)* = ±b*a*", star_mul);
        push("τ([a,b]) = 0", tau_comm);
        push("Leibniz rule", leibniz);

        let mut star_swap = 0.0f64;
        for x in self.basis_of(1) {
            let xs = x.star();
            star_swap = star_swap.max(xs.sub(&self.project(&xs)).max_abs());
            star_swap = star_swap.max(xs.part(l, 1).max_abs());
        }
        push("(A^{1,0})* = A^{0,1}", star_swap);
        let dims = self.dims();
        push("dim A^{1,0} = dim A^{0,1}", (dims[1] as f64 - dims[2] as f64).abs());

        let tau_d = self.basis_of(1).iter().chain(self.basis_of(2).iter())
            .map(|x| self.tau(&self.d(x)).norm())
            .fold(0.0, f64::max);
        push("τ(da) = 0", tau_d);
        let tau_star = self
            .basis_of(3)
            .iter()
            .map(|x| (self.tau(&x.star()) - self.tau(x).conj()).norm())
            .fold(0.0, f64::max);
        push("τ(a*) = conj τ(a)", tau_star);

        push("ω ∈ A²", omega.sub(&self.project(&omega)).max_abs());
        push("ω* = ω", omega.star().sub(&omega).max_abs());
        let omega_central = basis.iter().map(|x| supercomm(l, &omega, x).max_abs()).fold(0.0, f64::max);
        push("[ω,a] = 0", omega_central);
        let lam_inv = self
            .basis_of(0)
            .iter()
            .map(|a| {
                let la = self.lefschetz(a);
                la.sub(&self.project(&la)).max_abs() + self.lambda(&la).sub(a).max_abs()
            })
            .fold(0.0, f64::max);
        push("L invertible", lam_inv + (dims[0] as f64 - dims[3] as f64).abs());

        let theta = &self.theta;
        push("θ ∈ A²", theta.sub(&self.project(theta)).max_abs() + theta.degree_part(l, 0).max_abs());
        push("θ* = −θ", theta.star().add(theta).max_abs());
        let theta_central = basis.iter().map(|x| supercomm(l, theta, x).max_abs()).fold(0.0, f64::max);
        push("θ central", theta_central);

        let g = self.gram();
        let herm = (&g + g.adjoint()) * C::new(0.5, 0.0);
        push("pairings Hermitian", (&g - g.adjoint()).camax());
        for (k, name) in [(0, "⟨·,·⟩ on A⁰ positive"), (1, "⟨·,·⟩ on A^{1,0} positive"), (2, "⟨·,·⟩ on A^{0,1} positive")] {
            let (o, nk) = (self.sub_offset(k), dims[k]);
            if nk == 0 {
                push(name, 0.0);
                continue;
            }
            let block = herm.view((o, o), (nk, nk)).into_owned();
            let min = SymmetricEigen::new(block).eigenvalues.min();
            push(name, if min > 1e-12 { 0.0 } else { 1e-12 - min });
        }

        let d = self.d_mat();
        push("d² = 0", op_norm(&(&d * &d)));
        push("(da)* = d(a*)", basis.iter().map(|x| self.d(x).star().sub(&self.d(&x.star())).max_abs()).fold(0.0, f64::max));
        push("dΛθ = 0", self.d(&self.lambda(theta)).max_abs());

        AxiomReport { checks }
    }
}
