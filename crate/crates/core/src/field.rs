//! Scalar, vector and matrix valued fields evaluated on jets.
//!
//! Implementors write one generic body against [`Scalar`] via the `*Expr`
//! traits; blanket impls lift that body to the object-safe `*Field` traits
//! used throughout the pipeline, which evaluate at both jet depths.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::{Jet1, Jet2, Scalar};

/// Object-safe scalar field: pure, deterministic, jet-transparent.
pub trait ScalarField: Send + Sync {
    fn arity(&self) -> usize;
    fn eval1(&self, point: &[Jet1]) -> Result<Jet1>;
    fn eval2(&self, point: &[Jet2]) -> Result<Jet2>;
}

/// Object-safe vector field.
pub trait VectorField: Send + Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    fn eval1(&self, point: &[Jet1]) -> Result<Vec<Jet1>>;
    fn eval2(&self, point: &[Jet2]) -> Result<Vec<Jet2>>;
}

/// Object-safe square-matrix field (row-major entries).
pub trait MatrixField: Send + Sync {
    fn size(&self) -> usize;
    fn eval1(&self, point: &[Jet1]) -> Result<Vec<Jet1>>;
    fn eval2(&self, point: &[Jet2]) -> Result<Vec<Jet2>>;
}

/// Generic scalar body; implement this once, get `ScalarField` for free.
pub trait FieldExpr: Send + Sync {
    fn arity(&self) -> usize;
    fn expr<S: Scalar>(&self, point: &[S]) -> S;
}

/// Generic vector body.
pub trait VectorExpr: Send + Sync {
    fn arity(&self) -> usize;
    fn dim(&self) -> usize;
    fn expr<S: Scalar>(&self, point: &[S]) -> Vec<S>;
}

/// Generic matrix body.
pub trait MatrixExpr: Send + Sync {
    fn size(&self) -> usize;
    fn expr<S: Scalar>(&self, point: &[S]) -> Vec<S>;
}

fn check_arity(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Arity { expected, got })
    }
}

impl<T: FieldExpr> ScalarField for T {
    fn arity(&self) -> usize {
        FieldExpr::arity(self)
    }
    fn eval1(&self, point: &[Jet1]) -> Result<Jet1> {
        check_arity(FieldExpr::arity(self), point.len())?;
        Ok(self.expr(point))
    }
    fn eval2(&self, point: &[Jet2]) -> Result<Jet2> {
        check_arity(FieldExpr::arity(self), point.len())?;
        Ok(self.expr(point))
    }
}

impl<T: VectorExpr> VectorField for T {
    fn arity(&self) -> usize {
        VectorExpr::arity(self)
    }
    fn dim(&self) -> usize {
        VectorExpr::dim(self)
    }
    fn eval1(&self, point: &[Jet1]) -> Result<Vec<Jet1>> {
        check_arity(VectorExpr::arity(self), point.len())?;
        Ok(self.expr(point))
    }
    fn eval2(&self, point: &[Jet2]) -> Result<Vec<Jet2>> {
        check_arity(VectorExpr::arity(self), point.len())?;
        Ok(self.expr(point))
    }
}

impl<T: MatrixExpr> MatrixField for T {
    fn size(&self) -> usize {
        MatrixExpr::size(self)
    }
    fn eval1(&self, point: &[Jet1]) -> Result<Vec<Jet1>> {
        check_arity(MatrixExpr::size(self), point.len())?;
        Ok(self.expr(point))
    }
    fn eval2(&self, point: &[Jet2]) -> Result<Vec<Jet2>> {
        check_arity(MatrixExpr::size(self), point.len())?;
        Ok(self.expr(point))
    }
}

/// Jet depths the chart machinery is generic over.
pub trait JetScalar: Scalar {
    fn scalar_field(f: &dyn ScalarField, point: &[Self]) -> Result<Self>;
    fn vector_field(f: &dyn VectorField, point: &[Self]) -> Result<Vec<Self>>;
    fn matrix_field(f: &dyn MatrixField, point: &[Self]) -> Result<Vec<Self>>;
}

impl JetScalar for Jet1 {
    fn scalar_field(f: &dyn ScalarField, point: &[Self]) -> Result<Self> {
        f.eval1(point)
    }
    fn vector_field(f: &dyn VectorField, point: &[Self]) -> Result<Vec<Self>> {
        f.eval1(point)
    }
    fn matrix_field(f: &dyn MatrixField, point: &[Self]) -> Result<Vec<Self>> {
        f.eval1(point)
    }
}

impl JetScalar for Jet2 {
    fn scalar_field(f: &dyn ScalarField, point: &[Self]) -> Result<Self> {
        f.eval2(point)
    }
    fn vector_field(f: &dyn VectorField, point: &[Self]) -> Result<Vec<Self>> {
        f.eval2(point)
    }
    fn matrix_field(f: &dyn MatrixField, point: &[Self]) -> Result<Vec<Self>> {
        f.eval2(point)
    }
}

/// Field evaluation with arity and seed-uniformity validated up front.
pub fn jet_eval(field: &dyn ScalarField, point: &[Jet1]) -> Result<Jet1> {
    check_arity(field.arity(), point.len())?;
    let mut seeds: Option<usize> = None;
    for jet in point {
        let m = jet.seed_count();
        if m == 0 {
            continue; // constants broadcast
        }
        match seeds {
            None => seeds = Some(m),
            Some(expected) if expected != m => {
                return Err(Error::SeedCount { expected, got: m })
            }
            _ => {}
        }
    }
    field.eval1(point)
}

/// Constant scalar field of any arity.
pub struct ConstField {
    pub arity: usize,
    pub value: f64,
}

impl FieldExpr for ConstField {
    fn arity(&self) -> usize {
        self.arity
    }
    fn expr<S: Scalar>(&self, _point: &[S]) -> S {
        S::from_f64(self.value)
    }
}

/// Constant square matrix field.
pub struct ConstMatrixField {
    pub size: usize,
    pub entries: Vec<f64>,
}

impl MatrixExpr for ConstMatrixField {
    fn size(&self) -> usize {
        self.size
    }
    fn expr<S: Scalar>(&self, _point: &[S]) -> Vec<S> {
        self.entries.iter().map(|&v| S::from_f64(v)).collect()
    }
}

/// The rank-2 canonical structure matrix: one symplectic 2x2 block, zeros
/// elsewhere.
pub fn darboux_matrix(n: usize) -> ConstMatrixField {
    let mut entries = alloc::vec![0.0; n * n];
    entries[1] = 1.0;
    entries[n] = -1.0;
    ConstMatrixField { size: n, entries }
}

pub type BoxedScalarField = Box<dyn ScalarField>;
pub type BoxedVectorField = Box<dyn VectorField>;
pub type BoxedMatrixField = Box<dyn MatrixField>;
