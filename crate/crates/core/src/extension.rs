//! Comodules, symmetric normalized 2-cocycles and the coalgebra extensions
//! `C̃ = C ⊕ X` they define.
//!
//! The left coaction is never stored: for the cocommutative extensions handled
//! here it is the flip of the right coaction, `ρ_l(x) = Σ x₍₁₎ ⊗ x₍₀₎`.

use std::sync::Arc;

use crate::coalgebra::{Coalgebra, GroupLikeSet, Tensor};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;

/// Term `(j, c, v)` of `ρ_r(x_i) = Σ v · x_j ⊗ e_c`.
pub type CoactionTerm = (usize, usize, Scalar);

/// A right comodule `(X, ρ_r)` over a coalgebra `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comodule {
    base: Arc<Coalgebra>,
    names: Vec<String>,
    coaction: Vec<Vec<CoactionTerm>>,
}

impl Comodule {
    /// Builds and validates a comodule from `(i, j, c, v)` entries meaning
    /// `ρ_r(x_i) ∋ v · x_j ⊗ e_c`.
    pub fn new(
        base: Arc<Coalgebra>,
        names: Vec<String>,
        entries: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
    ) -> Result<Comodule> {
        let m = Comodule::unchecked(base, names, entries)?;
        m.validate()?;
        Ok(m)
    }

    /// Like [`Comodule::new`] without checking the comodule axioms.
    pub fn unchecked(
        base: Arc<Coalgebra>,
        names: Vec<String>,
        entries: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
    ) -> Result<Comodule> {
        let dim = names.len();
        if dim == 0 {
            return Err(Error::InvalidComodule("comodule must be nonzero".into()));
        }
        let field = base.field();
        let mut acc = vec![std::collections::BTreeMap::<(usize, usize), Scalar>::new(); dim];
        for (i, j, c, v) in entries {
            if i >= dim || j >= dim || c >= base.dim() {
                return Err(Error::ShapeError(format!("coaction entry ({i},{j},{c}) out of range")));
            }
            if v.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), v.field().to_string()));
            }
            *acc[i].entry((j, c)).or_insert_with(|| field.zero()) += &v;
        }
        let coaction = acc
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|((j, c), v)| (j, c, v))
                    .collect()
            })
            .collect();
        Ok(Comodule { base, names, coaction })
    }

    /// `X` with `ρ_r(x) = x ⊗ g` for a fixed group-like vector `g`.
    pub fn along_grouplike(base: Arc<Coalgebra>, names: Vec<String>, g: &[Scalar]) -> Result<Comodule> {
        let dim = names.len();
        let entries: Vec<_> = (0..dim)
            .flat_map(|i| {
                g.iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero())
                    .map(move |(c, s)| (i, i, c, s.clone()))
            })
            .collect();
        Comodule::new(base, names, entries)
    }

    pub fn base(&self) -> &Arc<Coalgebra> {
        &self.base
    }

    pub fn field(&self) -> Field {
        self.base.field()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coaction_of(&self, i: usize) -> &[CoactionTerm] {
        &self.coaction[i]
    }

    /// All entries `(i, j, c, v)`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Scalar)> {
        self.coaction
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |(j, c, v)| (i, *j, *c, v.clone())))
            .collect()
    }

    /// Checks coassociativity `(ρ⊗C)ρ = (X⊗Δ)ρ` and the counit law.
    pub fn validate(&self) -> Result<()> {
        let f = self.field();
        let (dx, dc) = (self.dim(), self.base.dim());
        for i in 0..dx {
            let mut lhs = vec![f.zero(); dx * dc * dc];
            let mut rhs = vec![f.zero(); dx * dc * dc];
            let mut counit = vec![f.zero(); dx];
            for (j, c, v) in &self.coaction[i] {
                for (j2, c2, v2) in &self.coaction[*j] {
                    lhs[(j2 * dc + c2) * dc + c].add_mul(v, v2);
                }
                for (a, b, mu) in self.base.delta_of(*c) {
                    rhs[(j * dc + a) * dc + b].add_mul(v, mu);
                }
                counit[*j].add_mul(v, &self.base.counit()[*c]);
            }
            if lhs != rhs {
                return Err(Error::InvalidComodule(format!(
                    "coassociativity fails at {}",
                    self.names[i]
                )));
            }
            let mut e = vec![f.zero(); dx];
            e[i] = f.one();
            if counit != e {
                return Err(Error::InvalidComodule(format!("counit law fails at {}", self.names[i])));
            }
        }
        Ok(())
    }

    /// Matrix of `x ↦ α ⇀ x = Σ α(x₍₁₎) x₍₀₎` for a functional `α` on `C`.
    pub fn action(&self, alpha: &[Scalar]) -> Matrix {
        let f = self.field();
        let mut m = Matrix::zeros(f, self.dim(), self.dim());
        for (i, terms) in self.coaction.iter().enumerate() {
            for (j, c, v) in terms {
                m.entry_mut(*j, i).add_mul(v, &alpha[*c]);
            }
        }
        m
    }
}

/// Term `(j, k, v)` of `ω(x_i) = Σ v · e_j ⊗ e_k`.
pub type OmegaTerm = (usize, usize, Scalar);

/// A 2-cocycle `ω: X → C ⊗ C` with coefficients in a comodule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle2 {
    comodule: Comodule,
    omega: Vec<Vec<OmegaTerm>>,
}

impl Cocycle2 {
    /// Builds `ω` from `(i, j, k, v)` entries meaning `ω(x_i) ∋ v · e_j ⊗ e_k` and
    /// checks normalization, symmetry and the cocycle identity.
    pub fn new(
        comodule: Comodule,
        entries: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
    ) -> Result<Cocycle2> {
        let w = Cocycle2::unchecked(comodule, entries)?;
        w.validate()?;
        Ok(w)
    }

    pub fn unchecked(
        comodule: Comodule,
        entries: impl IntoIterator<Item = (usize, usize, usize, Scalar)>,
    ) -> Result<Cocycle2> {
        let field = comodule.field();
        let dc = comodule.base.dim();
        let mut acc = vec![std::collections::BTreeMap::<(usize, usize), Scalar>::new(); comodule.dim()];
        for (i, j, k, v) in entries {
            if i >= comodule.dim() || j >= dc || k >= dc {
                return Err(Error::ShapeError(format!("cocycle entry ({i},{j},{k}) out of range")));
            }
            if v.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), v.field().to_string()));
            }
            *acc[i].entry((j, k)).or_insert_with(|| field.zero()) += &v;
        }
        let omega = acc
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|((j, k), v)| (j, k, v))
                    .collect()
            })
            .collect();
        Ok(Cocycle2 { comodule, omega })
    }

    /// The zero cocycle.
    pub fn zero(comodule: Comodule) -> Cocycle2 {
        let omega = vec![Vec::new(); comodule.dim()];
        Cocycle2 { comodule, omega }
    }

    pub fn comodule(&self) -> &Comodule {
        &self.comodule
    }

    pub fn base(&self) -> &Arc<Coalgebra> {
        &self.comodule.base
    }

    pub fn omega_of(&self, i: usize) -> &[OmegaTerm] {
        &self.omega[i]
    }

    pub fn entries(&self) -> Vec<(usize, usize, usize, Scalar)> {
        self.omega
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |(j, k, v)| (i, *j, *k, v.clone())))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.omega.iter().all(Vec::is_empty)
    }

    pub fn validate(&self) -> Result<()> {
        self.comodule.validate()?;
        let c = &self.comodule.base;
        let f = c.field();
        let dc = c.dim();
        for (i, terms) in self.omega.iter().enumerate() {
            let name = &self.comodule.names[i];
            let mut left = vec![f.zero(); dc];
            let mut right = vec![f.zero(); dc];
            for (j, k, v) in terms {
                left[*k].add_mul(&c.counit()[*j], v);
                right[*j].add_mul(&c.counit()[*k], v);
            }
            if left.iter().chain(&right).any(|s| !s.is_zero()) {
                return Err(Error::CocycleViolation(format!("normalization fails at {name}")));
            }
            let mut flipped: Vec<OmegaTerm> = terms.iter().map(|(j, k, v)| (*k, *j, v.clone())).collect();
            flipped.sort_by_key(|t| (t.0, t.1));
            if flipped != *terms {
                return Err(Error::CocycleViolation(format!("symmetry fails at {name}")));
            }
            let total = self.cocycle_defect(i);
            if total.iter().any(|s| !s.is_zero()) {
                return Err(Error::CocycleViolation(format!("2-cocycle identity fails at {name}")));
            }
        }
        Ok(())
    }

    /// `(C⊗ω)ρ_l − (Δ⊗C)ω + (C⊗Δ)ω − (ω⊗C)ρ_r` evaluated at `x_i`, with `ρ_l` the
    /// flip of `ρ_r`.
    fn cocycle_defect(&self, i: usize) -> Vector {
        let c = &self.comodule.base;
        let f = c.field();
        let dc = c.dim();
        let at = |a: usize, b: usize, d: usize| (a * dc + b) * dc + d;
        let mut out = vec![f.zero(); dc * dc * dc];
        let minus_one = -f.one();
        for (j, cc, v) in &self.comodule.coaction[i] {
            for (a, b, w) in &self.omega[*j] {
                out[at(*cc, *a, *b)].add_mul(v, w);
                out[at(*a, *b, *cc)].add_mul(&(v * &minus_one), w);
            }
        }
        for (j, k, v) in &self.omega[i] {
            for (a, b, mu) in c.delta_of(*j) {
                out[at(*a, *b, *k)].add_mul(&(v * &minus_one), mu);
            }
            for (a, b, mu) in c.delta_of(*k) {
                out[at(*j, *a, *b)].add_mul(v, mu);
            }
        }
        out
    }
}

/// An extension `ι: C → C̃ = C ⊕ X` with its canonical block maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    cocycle: Cocycle2,
    total: Arc<Coalgebra>,
    iota: Matrix,
    lambda: Matrix,
    proj: Matrix,
    phi: Matrix,
}

impl Extension {
    pub fn base(&self) -> &Arc<Coalgebra> {
        self.cocycle.base()
    }

    pub fn comodule(&self) -> &Comodule {
        self.cocycle.comodule()
    }

    pub fn cocycle(&self) -> &Cocycle2 {
        &self.cocycle
    }

    /// The extended coalgebra `C̃` (basis of `C` first, then basis of `X`).
    pub fn total(&self) -> &Arc<Coalgebra> {
        &self.total
    }

    /// Inclusion `C → C̃`, a `dim C̃ × dim C` matrix.
    pub fn iota(&self) -> &Matrix {
        &self.iota
    }

    /// Normalized retract `C̃ → C`.
    pub fn lambda(&self) -> &Matrix {
        &self.lambda
    }

    /// Projection `C̃ → X`.
    pub fn proj(&self) -> &Matrix {
        &self.proj
    }

    /// `φ = ι ∘ λ`.
    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    /// Index of `x_i` in the basis of `C̃`.
    pub fn x_index(&self, i: usize) -> usize {
        self.base().dim() + i
    }

    pub fn is_trivial_cocycle(&self) -> bool {
        self.cocycle.is_zero()
    }

    /// Re-checks every structural invariant.
    pub fn check_invariants(&self) -> Result<()> {
        let c = self.base();
        let f = c.field();
        if &self.lambda * &self.iota != Matrix::identity(f, c.dim()) {
            return Err(Error::RetractNotNormalized("λ∘ι ≠ id".into()));
        }
        if !(&self.proj * &self.iota).is_zero() {
            return Err(Error::NotAnExtension("p∘ι ≠ 0".into()));
        }
        let eps_lambda = Matrix::column(f, c.counit()).transpose().checked_mul(&self.lambda)?;
        if eps_lambda.row(0) != self.total.counit() {
            return Err(Error::RetractNotNormalized("ε_C∘λ ≠ ε_C̃".into()));
        }
        let report = self.total.validate();
        if !report.is_valid() || !report.cocommutative {
            return Err(Error::NotAnExtension("C̃ is not a cocommutative coalgebra".into()));
        }
        satisfies_extension_condition(&self.total, &self.iota)
    }
}

/// `Δ(C̃) ⊆ C̃ ⊗ ι(C) + ι(C) ⊗ C̃`.
fn satisfies_extension_condition(total: &Coalgebra, iota: &Matrix) -> Result<()> {
    let f = total.field();
    let n = total.dim();
    let image = Subspace::column_space(iota);
    let full = Subspace::full(f, n);
    let target = full.tensor(&image).sum(&image.tensor(&full))?;
    if !full.image(&total.delta_matrix())?.is_subspace_of(&target) {
        return Err(Error::NotAnExtension("Δ(C̃) ⊄ C̃⊗ι(C) + ι(C)⊗C̃".into()));
    }
    Ok(())
}

/// Builds `C̃ = C ⊕ X` with
/// `Δ(0,x) = Σ (x₍₁₎,0)⊗(0,x₍₀₎) + Σ (0,x₍₀₎)⊗(x₍₁₎,0) + Σ (ω₁(x),0)⊗(ω₂(x),0)` and
/// `ε(c,x) = ε_C(c)`.
pub fn build_extension(w: &Cocycle2) -> Result<Extension> {
    w.validate()?;
    let c = w.base();
    let x = w.comodule();
    let f = c.field();
    let (dc, dx) = (c.dim(), x.dim());
    let mut names: Vec<String> = c.names().to_vec();
    for n in x.names() {
        if names.contains(n) {
            return Err(Error::InvalidComodule(format!(
                "basis name {n:?} is used by both C and X"
            )));
        }
        names.push(n.clone());
    }
    let mut triples = c.triples();
    for i in 0..dx {
        for (j, cc, v) in x.coaction_of(i) {
            triples.push((dc + i, *cc, dc + j, v.clone()));
            triples.push((dc + i, dc + j, *cc, v.clone()));
        }
        for (a, b, v) in w.omega_of(i) {
            triples.push((dc + i, *a, *b, v.clone()));
        }
    }
    let mut counit = c.counit().to_vec();
    counit.extend(std::iter::repeat_with(|| f.zero()).take(dx));
    let total = Coalgebra::new(f, names, triples, counit)?;
    let n = dc + dx;
    let iota = Matrix::from_fn(f, n, dc, |r, col| if r == col { f.one() } else { f.zero() });
    let lambda = iota.transpose();
    let proj = Matrix::from_fn(f, dx, n, |r, col| if col == dc + r { f.one() } else { f.zero() });
    let phi = &iota * &lambda;
    let e = Extension {
        cocycle: w.clone(),
        total: Arc::new(total),
        iota,
        lambda,
        proj,
        phi,
    };
    e.check_invariants()?;
    Ok(e)
}

/// Recovers `(ρ_r, ω)` from an extension `ι: C → C̃` and a normalized retract `λ`,
/// via `ρ_r∘p = (p⊗λ)∘Δ_C̃` and `ω∘p = (λ⊗λ)∘Δ_C̃ − Δ_C∘λ`. The comodule `X` is
/// realized as `ker λ` with its canonical (RREF) basis; the returned vectors are
/// that basis in coordinates of `C̃`.
pub fn split_extension(
    total: &Coalgebra,
    base: &Arc<Coalgebra>,
    iota: &Matrix,
    lambda: &Matrix,
) -> Result<(Cocycle2, Vec<Vector>)> {
    let f = total.field();
    let (n, dc) = (total.dim(), base.dim());
    if iota.shape() != (n, dc) || lambda.shape() != (dc, n) {
        return Err(Error::ShapeError(
            "ι must be dim C̃ × dim C and λ its transpose shape".into(),
        ));
    }
    if lambda * iota != Matrix::identity(f, dc) {
        return Err(Error::RetractNotNormalized("λ∘ι ≠ id".into()));
    }
    let eps_lambda = Matrix::column(f, base.counit()).transpose().checked_mul(lambda)?;
    if eps_lambda.row(0) != total.counit() {
        return Err(Error::RetractNotNormalized("ε_C∘λ ≠ ε_C̃".into()));
    }
    // ι must be a coalgebra map.
    let dt = total.delta_matrix();
    if &dt * iota != &iota.kron(iota) * &base.delta_matrix() {
        return Err(Error::NotAnExtension("ι is not a coalgebra morphism".into()));
    }
    satisfies_extension_condition(total, iota)?;

    let kernel = Subspace::span(f, n, lambda.kernel())?;
    let kvecs = kernel.basis_vectors();
    let dx = kvecs.len();
    if dx == 0 {
        return Err(Error::NotAnExtension("ι is surjective; the cokernel is zero".into()));
    }
    let kmat = Matrix::from_row_vectors(f, n, kvecs.clone())?.transpose();
    let phi = iota * lambda;
    let complement = &Matrix::identity(f, n) - &phi;
    let proj = kmat
        .solve(&complement)?
        .ok_or_else(|| Error::NotAnExtension("ker λ does not complement ι(C)".into()))?
        .particular;

    let names = kvecs
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let support: Vec<usize> = (0..n).filter(|&z| !v[z].is_zero()).collect();
            match support.as_slice() {
                [z] if v[*z].is_one() => total.names()[*z].clone(),
                _ => format!("x{i}"),
            }
        })
        .collect();

    let p_lambda = proj.kron(lambda);
    let l_lambda = lambda.kron(lambda);
    let mut coaction = Vec::new();
    let mut omega = Vec::new();
    for (i, k) in kvecs.iter().enumerate() {
        let dk = dt.mul_vec(k);
        let rho = p_lambda.mul_vec(&dk);
        for j in 0..dx {
            for cc in 0..dc {
                let v = &rho[j * dc + cc];
                if !v.is_zero() {
                    coaction.push((i, j, cc, v.clone()));
                }
            }
        }
        // λ(k) = 0, so the Δ_C∘λ term drops out.
        let om = l_lambda.mul_vec(&dk);
        for a in 0..dc {
            for b in 0..dc {
                let v = &om[a * dc + b];
                if !v.is_zero() {
                    omega.push((i, a, b, v.clone()));
                }
            }
        }
    }
    let comodule = Comodule::new(base.clone(), names, coaction)?;
    Ok((Cocycle2::new(comodule, omega)?, kvecs))
}

/// The extension `D_{<n} ⊆ D_{≤n}` of a graded coalgebra: `X = D^n`,
/// `ρ_r(x) = Σ x₍₁,ₙ₎ ⊗ x₍₂,₀₎`, `ω(x) = Σ_{0<i<n} Δ^{i,n−i}(x)`.
/// `C̃` carries the grading and equals the subcoalgebra `D_{≤n}` with basis
/// ordered as `D_{<n}` then `D^n`.
pub fn graded_extension(d: &Coalgebra, n: usize) -> Result<Extension> {
    let deg = d.grading().ok_or(Error::NotGraded)?.to_vec();
    let lower: Vec<usize> = (0..d.dim()).filter(|&i| deg[i] < n).collect();
    let layer = d.degree_indices(n)?;
    if layer.is_empty() || n == 0 {
        return Err(Error::EmptyLayer(n));
    }
    let base = Arc::new(d.restrict(&lower)?);
    let pos_c = |i: usize| lower.iter().position(|&l| l == i).expect("lower-degree index");
    let pos_x = |i: usize| layer.iter().position(|&l| l == i).expect("degree-n index");
    let mut coaction = Vec::new();
    let mut omega = Vec::new();
    for (xi, &i) in layer.iter().enumerate() {
        for (j, k, v) in d.delta_of(i) {
            match (deg[*j], deg[*k]) {
                (a, 0) if a == n => coaction.push((xi, pos_x(*j), pos_c(*k), v.clone())),
                (0, _) => {}
                _ => omega.push((xi, pos_c(*j), pos_c(*k), v.clone())),
            }
        }
    }
    let names = layer.iter().map(|&i| d.names()[i].clone()).collect();
    let comodule = Comodule::new(base, names, coaction)?;
    let w = Cocycle2::new(comodule, omega)?;
    let mut e = build_extension(&w)?;
    let mut degrees: Vec<usize> = lower.iter().map(|&i| deg[i]).collect();
    degrees.extend(std::iter::repeat_n(n, layer.len()));
    let total = (*e.total).clone().with_grading(degrees)?;
    let order: Vec<usize> = lower.iter().chain(&layer).copied().collect();
    if total != d.restrict(&order)? {
        return Err(Error::NotAnExtension("built C̃ differs from D_{≤n}".into()));
    }
    e.total = Arc::new(total);
    Ok(e)
}

/// Writes `ρ_r(x) = Σ_g T_g(x) ⊗ g` over the supplied group-likes and returns a
/// basis of each image of `T_g`, paired with `g`. `None` when the images do not
/// fill `X`.
pub fn decompose_completely_reducible(x: &Comodule, g: &GroupLikeSet) -> Result<Option<Vec<(Vector, Vector)>>> {
    let ops = grouplike_projectors(x, g)?;
    let f = x.field();
    let mut out = Vec::new();
    for (t, gv) in ops.iter().zip(&g.elements) {
        for v in Subspace::column_space(t).basis_vectors() {
            out.push((v, gv.clone()));
        }
    }
    if out.len() < x.dim() {
        return Ok(None);
    }
    debug_assert!(out
        .iter()
        .all(|(v, _)| v.len() == x.dim() && v.iter().all(|s| s.field() == f)));
    Ok(Some(out))
}

/// The operators `T_g` with `ρ_r(x) = Σ_g T_g(x) ⊗ g`; checks that they form a
/// complete system of orthogonal idempotents.
pub fn grouplike_projectors(x: &Comodule, g: &GroupLikeSet) -> Result<Vec<Matrix>> {
    let f = x.field();
    let dc = x.base().dim();
    let dx = x.dim();
    let m = g.elements.len();
    if m == 0 {
        return Err(Error::UnsupportedCoaction("no group-like elements supplied".into()));
    }
    let gmat = Matrix::from_row_vectors(f, dc, g.elements.clone())?.transpose();
    if gmat.rank() < m {
        return Err(Error::UnsupportedCoaction("group-likes are linearly dependent".into()));
    }
    let mut ops = vec![Matrix::zeros(f, dx, dx); m];
    for i in 0..dx {
        // Collect the C-coefficient of each x_j in ρ_r(x_i).
        let mut coeffs = vec![vec![f.zero(); dc]; dx];
        for (j, c, v) in x.coaction_of(i) {
            coeffs[*j][*c] += v;
        }
        for (j, w) in coeffs.iter().enumerate() {
            if w.iter().all(Scalar::is_zero) {
                continue;
            }
            let (a, _) = gmat
                .solve_vec(w)
                .ok_or_else(|| Error::UnsupportedCoaction(format!("ρ_r({}) leaves span(G)", x.names()[i])))?;
            for (gi, s) in a.into_iter().enumerate() {
                ops[gi].set(j, i, s);
            }
        }
    }
    let id = Matrix::identity(f, dx);
    let sum = ops.iter().fold(Matrix::zeros(f, dx, dx), |acc, t| &acc + t);
    if sum != id {
        return Err(Error::InvalidComodule("Σ_g T_g ≠ id".into()));
    }
    for (a, ta) in ops.iter().enumerate() {
        for (b, tb) in ops.iter().enumerate() {
            let prod = ta * tb;
            let ok = if a == b { prod == *ta } else { prod.is_zero() };
            if !ok {
                return Err(Error::InvalidComodule("T_g are not orthogonal idempotents".into()));
            }
        }
    }
    Ok(ops)
}

/// Applies `Δ` of `C̃` to a vector; handy for tests of the extension formula.
pub fn delta_total(e: &Extension, z: &[Scalar]) -> Tensor {
    e.total().iterated_delta(z, 2)
}
