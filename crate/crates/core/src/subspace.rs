//! Subspaces in canonical (reduced row-echelon) form.
//!
//! Two [`Subspace`] values describing the same subspace compare equal with
//! `==`: the basis is the nonzero part of the RREF of any spanning set.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::{Field, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::zeros(field, 0, ambient),
        }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::identity(field, ambient),
        }
    }

    /// Span of the given vectors.
    pub fn span(field: Field, ambient: usize, vectors: Vec<Vector>) -> Result<Subspace> {
        let m = Matrix::from_row_vectors(field, ambient, vectors)?;
        Ok(Subspace::row_space(&m))
    }

    /// Span of the coordinate vectors `e_i` for the given indices.
    pub fn coordinate(field: Field, ambient: usize, indices: impl IntoIterator<Item = usize>) -> Subspace {
        let vecs = indices
            .into_iter()
            .map(|i| {
                let mut v = vec![field.zero(); ambient];
                v[i] = field.one();
                v
            })
            .collect();
        Subspace::span(field, ambient, vecs).expect("coordinate vectors are well-formed")
    }

    pub fn row_space(m: &Matrix) -> Subspace {
        let r = m.rref();
        Subspace {
            ambient: m.cols(),
            basis: r.matrix.submatrix(0..r.rank, 0..m.cols()),
        }
    }

    pub fn column_space(m: &Matrix) -> Subspace {
        Subspace::row_space(&m.transpose())
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Basis rows, in echelon order.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis.row_vectors()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    fn check(&self, other: &Subspace) -> Result<()> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch(
                self.field().to_string(),
                other.field().to_string(),
            ));
        }
        if self.ambient != other.ambient {
            return Err(Error::ShapeError(format!(
                "ambient dimensions {} and {} differ",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient, "vector length differs from ambient dimension");
        if v.iter().all(Scalar::is_zero) {
            return true;
        }
        let extended = self
            .basis
            .vstack(&Matrix::from_row_vectors(self.field(), self.ambient, vec![v.to_vec()]).expect("checked length"))
            .expect("same width");
        extended.rank() == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis_vectors().iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        Ok(Subspace::row_space(&self.basis.vstack(&other.basis)?))
    }

    /// The annihilator `{y : <u, y> = 0 for all u}` under the standard pairing.
    pub fn annihilator(&self) -> Subspace {
        let k = self.basis.kernel();
        Subspace::span(self.field(), self.ambient, k).expect("kernel vectors have ambient length")
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check(other)?;
        Ok(self.annihilator().sum(&other.annihilator())?.annihilator())
    }

    /// `{x : L x ∈ U}` for a linear map `L` given as a matrix acting on columns.
    pub fn preimage(l: &Matrix, u: &Subspace) -> Result<Subspace> {
        if l.rows() != u.ambient {
            return Err(Error::ShapeError(format!(
                "map has {} rows but subspace lives in dimension {}",
                l.rows(),
                u.ambient
            )));
        }
        if l.field() != u.field() {
            return Err(Error::FieldMismatch(l.field().to_string(), u.field().to_string()));
        }
        let ann = u.annihilator();
        let constraints = ann.basis.checked_mul(l)?;
        let k = constraints.kernel();
        Subspace::span(l.field(), l.cols(), k)
    }

    /// Image of this subspace under `L`.
    pub fn image(&self, l: &Matrix) -> Result<Subspace> {
        if l.cols() != self.ambient {
            return Err(Error::ShapeError("map domain differs from ambient dimension".into()));
        }
        let vecs = self.basis_vectors().iter().map(|v| l.mul_vec(v)).collect();
        Subspace::span(l.field(), l.rows(), vecs)
    }

    /// `dim V − dim U` for `U ⊆ V`.
    pub fn quotient_dim(u: &Subspace, v: &Subspace) -> Result<usize> {
        u.check(v)?;
        if !u.is_subspace_of(v) {
            return Err(Error::NotASubspace("quotient requires U ⊆ V".into()));
        }
        Ok(v.dim() - u.dim())
    }

    /// `U ⊗ V` inside the tensor product of the ambient spaces.
    pub fn tensor(&self, other: &Subspace) -> Subspace {
        let field = self.field();
        let mut vecs = Vec::new();
        for u in self.basis_vectors() {
            for v in other.basis_vectors() {
                vecs.push(u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect());
            }
        }
        Subspace::span(field, self.ambient * other.ambient, vecs).expect("tensor vectors well-formed")
    }

    /// Completes a basis of `self` inside `sup` deterministically: returns the
    /// basis vectors of `sup` (in echelon order) not already in the running span.
    pub fn complement_in(&self, sup: &Subspace) -> Vec<Vector> {
        let mut current = self.clone();
        let mut out = Vec::new();
        for v in sup.basis_vectors() {
            if !current.contains(&v) {
                current = current
                    .sum(&Subspace::span(self.field(), self.ambient, vec![v.clone()]).expect("well-formed"))
                    .expect("same ambient");
                out.push(v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;

    fn e(i: usize, n: usize) -> Vector {
        let mut v = vec![Q.zero(); n];
        v[i] = Q.one();
        v
    }

    #[test]
    fn sum_is_idempotent_and_preimage_of_identity() {
        let u = Subspace::span(Q, 3, vec![vec![Q.one(), Q.from_i64(2), Q.zero()]]).unwrap();
        assert_eq!(u.sum(&u).unwrap(), u);
        assert_eq!(Subspace::preimage(&Matrix::identity(Q, 3), &u).unwrap(), u);
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let u = Subspace::span(Q, 3, vec![e(0, 3), e(1, 3)]).unwrap();
        let v = Subspace::span(Q, 3, vec![e(1, 3), e(2, 3)]).unwrap();
        let w = u.intersect(&v).unwrap();
        assert_eq!(w, Subspace::span(Q, 3, vec![e(1, 3)]).unwrap());
        assert!(u.contains(&e(1, 3)) && v.contains(&e(1, 3)));
        assert!(!w.contains(&e(0, 3)));
    }

    #[test]
    fn quotient_requires_containment() {
        let u = Subspace::span(Q, 2, vec![e(0, 2)]).unwrap();
        let v = Subspace::span(Q, 2, vec![e(1, 2)]).unwrap();
        assert!(matches!(Subspace::quotient_dim(&u, &v), Err(Error::NotASubspace(_))));
        assert_eq!(Subspace::quotient_dim(&u, &Subspace::full(Q, 2)).unwrap(), 1);
    }

    #[test]
    fn canonical_form_is_bitwise() {
        let a = Subspace::span(Q, 2, vec![vec![Q.from_i64(2), Q.from_i64(4)]]).unwrap();
        let b = Subspace::span(
            Q,
            2,
            vec![vec![Q.from_i64(-1), Q.from_i64(-2)], vec![Q.zero(), Q.zero()]],
        )
        .unwrap();
        assert_eq!(a, b);
    }

    fn vectors(n: usize) -> impl Strategy<Value = Vec<Vector>> {
        proptest::collection::vec(proptest::collection::vec(-2i64..3, n), 0..4).prop_map(|vs| {
            vs.into_iter()
                .map(|v| v.into_iter().map(|x| Q.from_i64(x)).collect())
                .collect()
        })
    }

    proptest! {
        #[test]
        fn dimension_formula(a in vectors(4), b in vectors(4)) {
            let u = Subspace::span(Q, 4, a).unwrap();
            let v = Subspace::span(Q, 4, b).unwrap();
            let s = u.sum(&v).unwrap();
            let i = u.intersect(&v).unwrap();
            prop_assert_eq!(s.dim() + i.dim(), u.dim() + v.dim());
            prop_assert!(i.is_subspace_of(&u) && i.is_subspace_of(&v));
        }

        #[test]
        fn preimage_of_image_is_everything(vals in proptest::collection::vec(-2i64..3, 12)) {
            let l = Matrix::from_fn(Q, 3, 4, |i, j| Q.from_i64(vals[i * 4 + j]));
            let img = Subspace::column_space(&l);
            prop_assert_eq!(Subspace::preimage(&l, &img).unwrap().dim(), 4);
        }
    }
}
