use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::matrix::Matrix;
use super::{HomalgError, RingElem};

/// Finitely generated free chain complex `C_0 <- C_1 <- ... <- C_top` with
/// labelled bases. `boundary(k)` maps degree `k` to degree `k - 1` and has
/// shape `(dim C_{k-1}, dim C_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedComplex<R: RingElem> {
    ctx: R::Ctx,
    bases: Vec<Vec<String>>,
    boundaries: Vec<Matrix<R>>,
}

impl<R: RingElem> BasedComplex<R> {
    /// `boundaries[k]` is `d_k`; `boundaries[0]` must be `0 x dim C_0`.
    /// Checks shapes and `d o d = 0` at the precision of `ctx`.
    pub fn new(ctx: R::Ctx, bases: Vec<Vec<String>>, boundaries: Vec<Matrix<R>>) -> Result<Self, HomalgError> {
        let c = Self { ctx, bases, boundaries };
        c.check_shapes()?;
        c.check_square_zero()?;
        Ok(c)
    }

    /// Builds from the boundaries `d_1 .. d_top` only.
    pub fn from_boundaries(
        ctx: R::Ctx,
        bases: Vec<Vec<String>>,
        upper: Vec<Matrix<R>>,
    ) -> Result<Self, HomalgError> {
        let mut boundaries = Vec::with_capacity(bases.len());
        boundaries.push(Matrix::zeros(0, bases.first().map_or(0, Vec::len)));
        boundaries.extend(upper);
        Self::new(ctx, bases, boundaries)
    }

    pub fn zero_complex(ctx: R::Ctx) -> Self {
        Self { ctx, bases: vec![Vec::new()], boundaries: vec![Matrix::zeros(0, 0)] }
    }

    fn check_shapes(&self) -> Result<(), HomalgError> {
        if self.bases.len() != self.boundaries.len() {
            return Err(HomalgError::ShapeMismatch {
                degree: self.bases.len(),
                expected: (self.bases.len(), 0),
                got: (self.boundaries.len(), 0),
            });
        }
        for k in 0..self.bases.len() {
            let expected = (if k == 0 { 0 } else { self.bases[k - 1].len() }, self.bases[k].len());
            let got = self.boundaries[k].shape();
            if expected != got {
                return Err(HomalgError::ShapeMismatch { degree: k, expected, got });
            }
        }
        Ok(())
    }

    fn check_square_zero(&self) -> Result<(), HomalgError> {
        for k in 2..self.bases.len() {
            let sq = self.boundaries[k - 1].mul(&self.boundaries[k]);
            if let Some((row, col)) = sq.first_nonnegligible(&self.ctx) {
                return Err(HomalgError::BoundarySquareNonzero { upper: k, lower: k - 1, row, col });
            }
        }
        Ok(())
    }

    pub fn ctx(&self) -> &R::Ctx {
        &self.ctx
    }

    /// Highest degree present (possibly with an empty basis).
    pub fn top_degree(&self) -> usize {
        self.bases.len().saturating_sub(1)
    }

    pub fn num_degrees(&self) -> usize {
        self.bases.len()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.bases.get(k).map_or(0, Vec::len)
    }

    pub fn basis(&self, k: usize) -> &[String] {
        self.bases.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn bases(&self) -> &[Vec<String>] {
        &self.bases
    }

    /// `d_k`; a zero matrix of the right shape outside the stored range.
    pub fn boundary(&self, k: usize) -> Matrix<R> {
        match self.boundaries.get(k) {
            Some(m) => m.clone(),
            None => Matrix::zeros(if k == 0 { 0 } else { self.dim(k - 1) }, self.dim(k)),
        }
    }

    pub fn boundary_ref(&self, k: usize) -> Option<&Matrix<R>> {
        self.boundaries.get(k)
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(Vec::len).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.bases
            .iter()
            .enumerate()
            .map(|(k, b)| if k % 2 == 0 { b.len() as i64 } else { -(b.len() as i64) })
            .sum()
    }

    /// Pads with empty degrees up to `top`.
    pub fn extended_to(&self, top: usize) -> Self {
        let mut c = self.clone();
        while c.bases.len() <= top {
            let prev = c.bases.last().map_or(0, Vec::len);
            c.bases.push(Vec::new());
            c.boundaries.push(Matrix::zeros(prev, 0));
        }
        c
    }

    /// Same labels and identical boundary entries: the operational form of a
    /// basis-preserving isomorphism.
    pub fn basis_preserving_equal(&self, other: &Self) -> bool {
        let top = self.top_degree().max(other.top_degree());
        let a = self.extended_to(top);
        let b = other.extended_to(top);
        a.bases == b.bases && (0..=top).all(|k| a.boundaries[k] == b.boundaries[k])
    }

    /// Applies `f` entrywise (e.g. truncation or change of rings).
    pub fn map_ring<S: RingElem>(&self, ctx: S::Ctx, f: impl Fn(&R) -> S) -> Result<BasedComplex<S>, HomalgError> {
        BasedComplex::new(ctx, self.bases.clone(), self.boundaries.iter().map(|m| m.map(&f)).collect())
    }

    pub fn to_json(&self) -> Value {
        let mut degrees = Map::new();
        for (k, basis) in self.bases.iter().enumerate() {
            let trip: Vec<Value> = self.boundaries[k]
                .triplets()
                .into_iter()
                .map(|(i, j, v)| json!([i, j, v.to_json()]))
                .collect();
            degrees.insert(k.to_string(), json!({ "basis": basis, "boundary": trip }));
        }
        json!({ "ring": R::ring_name(&self.ctx), "degrees": degrees })
    }
}

impl<R: RingElem> Serialize for BasedComplex<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Degreewise map `F_k: S_k -> T_k` with `d^T F = F d^S`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap<R: RingElem> {
    source: BasedComplex<R>,
    target: BasedComplex<R>,
    components: Vec<Matrix<R>>,
}

impl<R: RingElem> ChainMap<R> {
    /// `components[k]` has shape `(dim T_k, dim S_k)`; missing degrees are zero.
    pub fn new(
        source: BasedComplex<R>,
        target: BasedComplex<R>,
        mut components: Vec<Matrix<R>>,
    ) -> Result<Self, HomalgError> {
        let top = source.top_degree().max(target.top_degree());
        let source = source.extended_to(top);
        let target = target.extended_to(top);
        while components.len() <= top {
            let k = components.len();
            components.push(Matrix::zeros(target.dim(k), source.dim(k)));
        }
        for (k, m) in components.iter().enumerate() {
            let expected = (target.dim(k), source.dim(k));
            if m.shape() != expected {
                return Err(HomalgError::ShapeMismatch { degree: k, expected, got: m.shape() });
            }
        }
        let f = Self { source, target, components };
        f.check_commutes()?;
        Ok(f)
    }

    pub fn identity(c: &BasedComplex<R>) -> Self {
        let comps = (0..c.num_degrees()).map(|k| Matrix::identity(c.dim(k), c.ctx())).collect();
        Self { source: c.clone(), target: c.clone(), components: comps }
    }

    fn check_commutes(&self) -> Result<(), HomalgError> {
        let ctx = self.target.ctx().clone();
        for k in 1..self.components.len() {
            let lhs = self.target.boundary(k).mul(&self.components[k]);
            let rhs = self.components[k - 1].mul(&self.source.boundary(k));
            if let Some((row, col)) = lhs.sub(&rhs).first_nonnegligible(&ctx) {
                return Err(HomalgError::ChainMapViolation { degree: k, row, col });
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &BasedComplex<R> {
        &self.source
    }

    pub fn target(&self) -> &BasedComplex<R> {
        &self.target
    }

    pub fn component(&self, k: usize) -> &Matrix<R> {
        &self.components[k]
    }

    pub fn components(&self) -> &[Matrix<R>] {
        &self.components
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self, HomalgError> {
        let top = self.components.len().max(other.components.len());
        let comps = (0..top)
            .map(|k| {
                let a = self.components.get(k).cloned().unwrap_or_else(|| Matrix::zeros(self.target.dim(k), self.source.dim(k)));
                let b = other.components.get(k).cloned().unwrap_or_else(|| Matrix::zeros(other.target.dim(k), other.source.dim(k)));
                a.mul(&b)
            })
            .collect();
        Self::new(other.source.clone(), self.target.clone(), comps)
    }

    pub fn to_json(&self) -> Value {
        let comps: Map<String, Value> = self
            .components
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let trip: Vec<Value> = m.triplets().into_iter().map(|(i, j, v)| json!([i, j, v.to_json()])).collect();
                (k.to_string(), Value::Array(trip))
            })
            .collect();
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "components": comps,
        })
    }
}

impl<R: RingElem> Serialize for ChainMap<R> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ChainMap", 1)?;
        st.serialize_field("map", &self.to_json())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{p}{i}")).collect()
    }

    #[test]
    fn rejects_nonzero_square() {
        let d1 = Matrix::from_rows(vec![vec![1i64]]);
        let d2 = Matrix::from_rows(vec![vec![1i64]]);
        let err = BasedComplex::from_boundaries((), vec![labels(1, "a"), labels(1, "b"), labels(1, "c")], vec![d1, d2]);
        assert!(matches!(err, Err(HomalgError::BoundarySquareNonzero { upper: 2, lower: 1, .. })));
    }

    #[test]
    fn rejects_bad_shape() {
        let d1 = Matrix::from_rows(vec![vec![1i64, 2]]);
        let err = BasedComplex::from_boundaries((), vec![labels(1, "a"), labels(1, "b")], vec![d1]);
        assert!(matches!(err, Err(HomalgError::ShapeMismatch { degree: 1, .. })));
    }

    #[test]
    fn chain_map_check() {
        let c = BasedComplex::from_boundaries((), vec![labels(1, "a"), labels(1, "b")], vec![Matrix::from_rows(vec![vec![2i64]])]).unwrap();
        let bad = ChainMap::new(c.clone(), c.clone(), vec![Matrix::from_rows(vec![vec![1]]), Matrix::from_rows(vec![vec![2]])]);
        assert!(matches!(bad, Err(HomalgError::ChainMapViolation { degree: 1, .. })));
        let id = ChainMap::identity(&c);
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn json_layout() {
        let c = BasedComplex::from_boundaries((), vec![labels(1, "m"), labels(1, "s")], vec![Matrix::from_rows(vec![vec![2i64]])]).unwrap();
        let v = c.to_json();
        assert_eq!(v["ring"], "Z");
        assert_eq!(v["degrees"]["1"]["basis"], json!(["s0"]));
        assert_eq!(v["degrees"]["1"]["boundary"], json!([[0, 0, 2]]));
    }
}
