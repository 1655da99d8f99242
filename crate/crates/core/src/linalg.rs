//! Dense solves for the small drift systems.
//!
//! Partial-pivoting LU followed by a few rounds of iterative refinement with
//! a compensated residual, so the solution is accurate to a few ulps even
//! when the system is moderately ill-conditioned.

use nalgebra::{Const, DimMin, SMatrix, SVector};

use crate::error::{Error, Result};

/// Systems with a 1-norm condition estimate above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

const REFINE_STEPS: usize = 4;

/// `a * b` as an unevaluated sum `hi + lo`.
#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a + b` as an unevaluated sum `hi + lo`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `b - A x` evaluated in roughly twice the working precision.
fn residual<const D: usize>(
    a: &SMatrix<f64, D, D>,
    x: &SVector<f64, D>,
    b: &SVector<f64, D>,
) -> SVector<f64, D> {
    SVector::from_fn(|i, _| {
        let (mut hi, mut lo) = (b[i], 0.0);
        for j in 0..D {
            let (p, pe) = two_product(-a[(i, j)], x[j]);
            let (s, se) = two_sum(hi, p);
            hi = s;
            lo += pe + se;
        }
        hi + lo
    })
}

fn norm1<const D: usize>(m: &SMatrix<f64, D, D>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number `|A|_1 |A^-1|_1`; infinite for singular matrices.
pub fn condition_1<const D: usize>(a: &SMatrix<f64, D, D>) -> f64
where
    Const<D>: DimMin<Const<D>, Output = Const<D>>,
{
    match a.lu().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Solves `A x = b`, refusing singular or badly conditioned `A`.
pub fn solve<const D: usize>(a: &SMatrix<f64, D, D>, b: &SVector<f64, D>) -> Result<SVector<f64, D>>
where
    Const<D>: DimMin<Const<D>, Output = Const<D>>,
{
    let lu = a.lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(a) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }

    let mut x = lu.solve(b).ok_or(Error::Singular { condition })?;
    for _ in 0..REFINE_STEPS {
        let r = residual(a, &x, b);
        let dx = lu.solve(&r).ok_or(Error::Singular { condition })?;
        x += dx;
        if dx.amax() <= f64::EPSILON * x.amax() {
            break;
        }
    }
    Ok(x)
}
