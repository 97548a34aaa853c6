//! The cochain complex `C*_X(A, m)` of an algebra in `ℳ_C` with coefficients in a
//! comodule `X`, and its cohomology.
//!
//! A cochain of degree `n` assigns to each basis vector of `X` a map `A^⊗n → A`.
//! Flattened cochains are `X`-index major, then the `a × a^n` matrix row-major.

use std::sync::Arc;

use crate::coalgebra::Coalgebra;
use crate::convolution::{is_associative, ConvMorphism, MultiMap};
use crate::error::{Error, Result};
use crate::extension::Comodule;
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Field, Scalar};
use crate::subspace::Subspace;

/// Complexes are materialized as matrices only up to this degree.
pub const MAX_DEGREE: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    degree: usize,
    a_dim: usize,
    values: Vec<MultiMap>,
}

impl Cochain {
    pub fn new(degree: usize, a_dim: usize, values: Vec<MultiMap>) -> Result<Cochain> {
        if values.is_empty() {
            return Err(Error::InvalidCochain(
                "a cochain needs one value per basis vector of X".into(),
            ));
        }
        for v in &values {
            if (v.a_dim(), v.source_arity(), v.target_arity()) != (a_dim, degree, 1) {
                return Err(Error::InvalidCochain(format!("value is not a map A^{degree} → A")));
            }
        }
        Ok(Cochain { degree, a_dim, values })
    }

    pub fn zero(field: Field, degree: usize, a_dim: usize, x_dim: usize) -> Cochain {
        Cochain {
            degree,
            a_dim,
            values: vec![MultiMap::zero(field, a_dim, degree, 1); x_dim],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    pub fn x_dim(&self) -> usize {
        self.values.len()
    }

    pub fn field(&self) -> Field {
        self.values[0].field()
    }

    pub fn values(&self) -> &[MultiMap] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &MultiMap {
        &self.values[i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(MultiMap::is_zero)
    }

    pub fn flatten(&self) -> Vector {
        self.values
            .iter()
            .flat_map(|v| v.matrix().entries().iter().cloned())
            .collect()
    }

    pub fn from_flat(field: Field, degree: usize, a_dim: usize, x_dim: usize, flat: &[Scalar]) -> Result<Cochain> {
        let per = a_dim.pow(degree as u32 + 1);
        if flat.len() != per * x_dim {
            return Err(Error::InvalidCochain(format!(
                "expected {} coordinates, got {}",
                per * x_dim,
                flat.len()
            )));
        }
        let values = flat
            .chunks(per)
            .map(|chunk| {
                let m = Matrix::from_entries(field, a_dim, per / a_dim, chunk.to_vec())?;
                MultiMap::new(a_dim, degree, 1, m)
            })
            .collect::<Result<_>>()?;
        Ok(Cochain { degree, a_dim, values })
    }

    fn check(&self, other: &Cochain) -> Result<()> {
        if (self.degree, self.a_dim, self.x_dim()) != (other.degree, other.a_dim, other.x_dim()) {
            return Err(Error::InvalidCochain("cochains of different shapes".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Cochain { values, ..*self })
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.check(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        Ok(Cochain { values, ..*self })
    }

    pub fn scale(&self, s: &Scalar) -> Cochain {
        Cochain {
            values: self.values.iter().map(|v| v.scale(s)).collect(),
            ..*self
        }
    }

    /// `ν ↼ α`: `x ↦ ν(α ⇀ x)` for a functional `α` on `C`.
    pub fn act(&self, x: &Comodule, alpha: &[Scalar]) -> Result<Cochain> {
        if x.dim() != self.x_dim() {
            return Err(Error::InvalidCochain("cochain and comodule disagree on dim X".into()));
        }
        let r = x.action(alpha);
        let f = self.field();
        let values = (0..self.x_dim())
            .map(|i| {
                let mut acc = MultiMap::zero(f, self.a_dim, self.degree, 1);
                for j in 0..self.x_dim() {
                    let s = r.get(j, i);
                    if !s.is_zero() {
                        acc = acc.add(&self.values[j].scale(s))?;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(Cochain { values, ..*self })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyResult {
    pub degree: usize,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
    pub representatives: Vec<Cochain>,
    /// `d^{n−1}` (zero columns when `n = 0`).
    pub d_prev: Matrix,
    pub d_next: Matrix,
    pub cocycles: Subspace,
    pub coboundaries: Subspace,
}

impl CohomologyResult {
    /// Coordinates of `[ν]` along `representatives`, or `None` when `ν` is not a cocycle.
    pub fn class_of(&self, nu: &Cochain) -> Result<Option<Vector>> {
        let flat = nu.flatten();
        if flat.len() != self.cocycles.ambient() {
            return Err(Error::ShapeError(format!(
                "cochain of length {} in degree {}",
                flat.len(),
                self.degree
            )));
        }
        if !self.cocycles.contains(&flat) {
            return Ok(None);
        }
        let mut cols: Vec<Vector> = self.representatives.iter().map(Cochain::flatten).collect();
        cols.extend(self.coboundaries.basis_vectors());
        let f = nu.field();
        if cols.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let a = Matrix::from_row_vectors(f, flat.len(), cols)?.transpose();
        let (x, _) = a
            .solve_vec(&flat)
            .ok_or_else(|| Error::ShapeError("cocycle outside Z".into()))?;
        Ok(Some(x[..self.representatives.len()].to_vec()))
    }
}

/// `C*_X(A, m)` for an associative `m: C → Hom(A⊗A, A)` and a right comodule `X`.
#[derive(Clone, Debug)]
pub struct Complex {
    m: ConvMorphism,
    x: Comodule,
}

impl Complex {
    pub fn new(m: ConvMorphism, x: Comodule) -> Result<Complex> {
        if (m.source_arity(), m.target_arity()) != (2, 1) {
            return Err(Error::ShapeError("m must map A⊗A → A".into()));
        }
        if **m.coalgebra() != **x.base() {
            return Err(Error::CoalgebraMismatch(
                "m and X live over different coalgebras".into(),
            ));
        }
        x.validate()?;
        if !is_associative(&m)? {
            return Err(Error::NotAssociative("m∗(m⊗A) ≠ m∗(A⊗m)".into()));
        }
        Ok(Complex { m, x })
    }

    /// Hochschild complex of `(A, m0)`: `C = 𝕜`, `X = 𝕜`.
    pub fn hochschild(m0: &MultiMap) -> Result<Complex> {
        let k = Arc::new(Coalgebra::trivial(m0.field()));
        let m = ConvMorphism::epsilon_embed(m0, k.clone());
        let x = Comodule::along_grouplike(k, vec!["x".into()], &[m0.field().one()])?;
        Complex::new(m, x)
    }

    pub fn m(&self) -> &ConvMorphism {
        &self.m
    }

    pub fn comodule(&self) -> &Comodule {
        &self.x
    }

    pub fn field(&self) -> Field {
        self.m.field()
    }

    pub fn a_dim(&self) -> usize {
        self.m.a_dim()
    }

    pub fn cochain_dim(&self, n: usize) -> usize {
        self.x.dim() * self.a_dim().pow(n as u32 + 1)
    }

    fn check_cochain(&self, nu: &Cochain, n: usize) -> Result<()> {
        if nu.degree != n || nu.a_dim != self.a_dim() || nu.x_dim() != self.x.dim() {
            return Err(Error::InvalidCochain(format!(
                "not a degree-{n} cochain of this complex"
            )));
        }
        Ok(())
    }

    /// `T_{i,c}(φ)`: the `i`-th coface pattern for a single map `φ: A^⊗n → A`,
    /// with `m(c)` in the multiplication slot.
    fn coface_term(&self, i: usize, n: usize, mc: &MultiMap, phi: &MultiMap) -> Result<MultiMap> {
        let f = self.field();
        let a = self.a_dim();
        let id = MultiMap::identity(f, a, 1);
        if i == 0 {
            mc.compose(&id.tensor(phi)?)
        } else if i == n + 1 {
            mc.compose(&phi.tensor(&id)?)
        } else {
            let k = MultiMap::identity(f, a, i - 1)
                .tensor(mc)?
                .tensor(&MultiMap::identity(f, a, n - i))?;
            phi.compose(&k)
        }
    }

    /// `d_i^n(ν)(x) = Σ T_{i,x₍₁₎}(ν(x₍₀₎))`.
    pub fn coface(&self, i: usize, n: usize, nu: &Cochain) -> Result<Cochain> {
        if i > n + 1 {
            return Err(Error::IndexOutOfRange { index: i, degree: n });
        }
        self.check_cochain(nu, n)?;
        let f = self.field();
        let mut values = Vec::with_capacity(self.x.dim());
        for l in 0..self.x.dim() {
            let mut acc = MultiMap::zero(f, self.a_dim(), n + 1, 1);
            for (j, c, v) in self.x.coaction_of(l) {
                let t = self.coface_term(i, n, self.m.component(*c), &nu.values[*j])?;
                acc = acc.add(&t.scale(v))?;
            }
            values.push(acc);
        }
        Ok(Cochain {
            degree: n + 1,
            a_dim: self.a_dim(),
            values,
        })
    }

    /// `d^n = Σ_i (−1)^i d_i^n`.
    pub fn differential(&self, n: usize, nu: &Cochain) -> Result<Cochain> {
        self.check_cochain(nu, n)?;
        let f = self.field();
        let mut out = Cochain::zero(f, n + 1, self.a_dim(), self.x.dim());
        for i in 0..=n + 1 {
            let t = self.coface(i, n, nu)?;
            out = if i % 2 == 0 { out.add(&t)? } else { out.sub(&t)? };
        }
        Ok(out)
    }

    /// Matrix of `d^n` on flattened cochains (`cochain_dim(n+1) × cochain_dim(n)`).
    pub fn differential_matrix(&self, n: usize) -> Result<Matrix> {
        if n > MAX_DEGREE {
            return Err(Error::ShapeError(format!(
                "complex is materialized up to degree {MAX_DEGREE}"
            )));
        }
        let f = self.field();
        let a = self.a_dim();
        let dx = self.x.dim();
        let per_in = a.pow(n as u32 + 1);
        let per_out = a.pow(n as u32 + 2);
        let mut out = Matrix::zeros(f, dx * per_out, dx * per_in);
        let mut support: Vec<usize> = self.x.entries().iter().map(|e| e.2).collect();
        support.sort_unstable();
        support.dedup();
        // S_c(E) = Σ_i (−1)^i T_{i,c}(E) for each elementary map E.
        let mut images: std::collections::HashMap<usize, Vec<Vector>> = Default::default();
        for &c in &support {
            let mc = self.m.component(c);
            let mut cols = Vec::with_capacity(per_in);
            for e in 0..per_in {
                let mut em = Matrix::zeros(f, a, per_in / a);
                em.set(e / (per_in / a), e % (per_in / a), f.one());
                let phi = MultiMap::new(a, n, 1, em)?;
                let mut acc = MultiMap::zero(f, a, n + 1, 1);
                for i in 0..=n + 1 {
                    let t = self.coface_term(i, n, mc, &phi)?;
                    acc = if i % 2 == 0 { acc.add(&t)? } else { acc.sub(&t)? };
                }
                cols.push(acc.matrix().entries().to_vec());
            }
            images.insert(c, cols);
        }
        for (l, j, c, v) in self.x.entries() {
            let cols = &images[&c];
            for (e, col) in cols.iter().enumerate() {
                for (r, s) in col.iter().enumerate() {
                    if !s.is_zero() {
                        out.entry_mut(l * per_out + r, j * per_in + e).add_mul(&v, s);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn cohomology(&self, n: usize) -> Result<CohomologyResult> {
        let f = self.field();
        let d_next = self.differential_matrix(n)?;
        let d_prev = if n == 0 {
            Matrix::zeros(f, self.cochain_dim(0), 0)
        } else {
            self.differential_matrix(n - 1)?
        };
        let dim = self.cochain_dim(n);
        let cocycles = Subspace::span(f, dim, d_next.kernel())?;
        let coboundaries = if n == 0 {
            Subspace::zero(f, dim)
        } else {
            Subspace::column_space(&d_prev)
        };
        let representatives = coboundaries
            .complement_in(&cocycles)
            .iter()
            .map(|v| Cochain::from_flat(f, n, self.a_dim(), self.x.dim(), v))
            .collect::<Result<Vec<_>>>()?;
        Ok(CohomologyResult {
            degree: n,
            dim_z: cocycles.dim(),
            dim_b: coboundaries.dim(),
            dim_h: cocycles.dim() - coboundaries.dim(),
            representatives,
            d_prev,
            d_next,
            cocycles,
            coboundaries,
        })
    }

    /// Factors the differential through `↼χ` when `m` has rank one on the span
    /// of the coaction coefficients. `χ` defaults to the functional determined by
    /// the first nonzero value of `m` there.
    pub fn rank1_reduce(&self, chi: Option<&[Scalar]>, max_degree: usize) -> Result<Rank1Reduction> {
        let f = self.field();
        let dc = self.x.base().dim();
        let dx = self.x.dim();
        // Coefficient vectors w_{ij} with ρ_r(x_i) = Σ_j x_j ⊗ w_{ij}.
        let mut coeffs = Vec::new();
        for i in 0..dx {
            let mut w = vec![vec![f.zero(); dc]; dx];
            for (j, c, v) in self.x.coaction_of(i) {
                w[*j][*c] += v;
            }
            coeffs.extend(w);
        }
        let support = Subspace::span(f, dc, coeffs)?;
        let values: Vec<MultiMap> = support.basis_vectors().iter().map(|w| self.m.eval(w)).collect();
        let flat: Vec<Vector> = values.iter().map(|m| m.matrix().entries().to_vec()).collect();
        let rank = Subspace::span(f, flat[0].len(), flat)?.dim();
        if rank != 1 {
            return Err(Error::NotRankOne(rank));
        }
        let basis = support.basis_vectors();
        let chi: Vector = match chi {
            Some(chi) => chi.to_vec(),
            None => {
                let m0 = values.iter().find(|m| !m.is_zero()).expect("rank one");
                let pivot = m0
                    .matrix()
                    .entries()
                    .iter()
                    .position(|s| !s.is_zero())
                    .expect("nonzero");
                let target: Vec<Scalar> = values
                    .iter()
                    .map(|m| {
                        m.matrix().entries()[pivot]
                            .checked_div(&m0.matrix().entries()[pivot])
                            .expect("nonzero pivot")
                    })
                    .collect();
                let sys = Matrix::from_row_vectors(f, dc, basis.clone())?;
                sys.solve_vec(&target).expect("support basis is independent").0
            }
        };
        if chi.len() != dc {
            return Err(Error::ShapeError("χ must be a functional on C".into()));
        }
        let anchor = basis
            .iter()
            .zip(&values)
            .find(|(w, _)| !dot(&chi, w).is_zero())
            .ok_or_else(|| Error::SpecMismatch("χ vanishes on the coaction support".into()))?;
        let m0 = anchor.1.scale(&dot(&chi, anchor.0).inv().expect("nonzero"));
        for (w, m) in basis.iter().zip(&values) {
            if *m != m0.scale(&dot(&chi, w)) {
                return Err(Error::SpecMismatch("m(c) ≠ χ(c)·m⁰ on the coaction support".into()));
            }
        }
        let hochschild = Complex::hochschild(&m0)?;
        let action = self.x.action(&chi);
        let mut boundaries = Vec::new();
        for n in 0..=max_degree {
            let partial = hochschild.differential_matrix(n)?;
            let per = self.a_dim().pow(n as u32 + 1);
            let factored =
                &Matrix::identity(f, dx).kron(&partial) * &action.transpose().kron(&Matrix::identity(f, per));
            if factored != self.differential_matrix(n)? {
                return Err(Error::SpecMismatch(format!("d^{n} does not factor through ↼χ")));
            }
            boundaries.push(partial);
        }
        Ok(Rank1Reduction {
            m0,
            chi,
            action,
            boundaries,
            hochschild,
        })
    }

    /// Cohomology of each one-dimensional line `x_i` with `ρ_r(x_i) = x_i ⊗ g_i`,
    /// computed as Hochschild cohomology of `(A, m(g_i))`, next to the direct
    /// computation on `X`.
    pub fn product_decompose(&self, lines: Option<&[(Vector, Vector)]>, n: usize) -> Result<ProductDecomposition> {
        let lines = lines.ok_or(Error::NotCompletelyReducible)?;
        let mut parts = Vec::with_capacity(lines.len());
        for (x, g) in lines {
            let mg = self.m.eval(g);
            let h = Complex::hochschild(&mg)?.cohomology(n)?;
            parts.push(LineCohomology {
                x: x.clone(),
                g: g.clone(),
                m: mg,
                cohomology: h,
            });
        }
        Ok(ProductDecomposition {
            degree: n,
            lines: parts,
            direct: self.cohomology(n)?,
        })
    }
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let mut s = a[0].field().zero();
    for (x, y) in a.iter().zip(b) {
        s.add_mul(x, y);
    }
    s
}

#[derive(Clone, Debug)]
pub struct Rank1Reduction {
    pub m0: MultiMap,
    pub chi: Vector,
    /// `α ⇀ −` on `X` for `α = χ`, columns indexed by the input basis vector.
    pub action: Matrix,
    /// `∂^0, …, ∂^N` of the Hochschild complex of `(A, m⁰)`.
    pub boundaries: Vec<Matrix>,
    pub hochschild: Complex,
}

#[derive(Clone, Debug)]
pub struct LineCohomology {
    pub x: Vector,
    pub g: Vector,
    pub m: MultiMap,
    pub cohomology: CohomologyResult,
}

#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    pub degree: usize,
    pub lines: Vec<LineCohomology>,
    pub direct: CohomologyResult,
}

impl ProductDecomposition {
    pub fn sum_of_lines(&self) -> usize {
        self.lines.iter().map(|l| l.cohomology.dim_h).sum()
    }

    pub fn is_consistent(&self) -> bool {
        self.sum_of_lines() == self.direct.dim_h
    }
}
