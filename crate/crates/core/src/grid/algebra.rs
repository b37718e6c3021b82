//! Pointwise tensor algebra on fields.

use super::Field;
use crate::error::{Error, Result};

/// `(a ⊗ b)_{ij} = a_i b_j`, stored row-major (`i * l_b + j`).
pub fn tensor_product(a: &Field, b: &Field) -> Result<Field> {
    if a.grid() != b.grid() {
        return Err(Error::ShapeMismatch("tensor product of fields on different grids".into()));
    }
    let (la, lb) = (a.components(), b.components());
    let mut values = Vec::with_capacity(a.grid().sites() * la * lb);
    for s in 0..a.grid().sites() {
        let (x, y) = (a.at(s), b.at(s));
        for xi in x {
            for yj in y {
                values.push(xi * yj);
            }
        }
    }
    Ok(Field::from_parts(*a.grid(), la * lb, values))
}

/// `(∇d ⊗ ∇d)_{ij} = ∇_i d · ∇_j d` from a gradient field with layout
/// `a * n + i`.
pub fn grad_outer(grad_d: &Field) -> Result<Field> {
    let n = grad_d.grid().dim;
    let g = grad_d.components();
    if g % n != 0 {
        return Err(Error::ShapeMismatch(format!(
            "gradient stack with {g} components is not a multiple of n = {n}"
        )));
    }
    let l = g / n;
    let mut values = Vec::with_capacity(grad_d.grid().sites() * n * n);
    for s in 0..grad_d.grid().sites() {
        let v = grad_d.at(s);
        for i in 0..n {
            for j in 0..n {
                values.push((0..l).map(|a| v[a * n + i] * v[a * n + j]).sum());
            }
        }
    }
    Ok(Field::from_parts(*grad_d.grid(), n * n, values))
}

/// Directional derivative `(u·∇)d_a = sum_i u_i d_i d_a`.
pub fn transport(u: &Field, grad_d: &Field) -> Result<Field> {
    let n = u.grid().dim;
    if u.components() != n || grad_d.components() % n != 0 || u.grid() != grad_d.grid() {
        return Err(Error::ShapeMismatch(
            "transport needs an n-vector field and a gradient stack on the same grid".into(),
        ));
    }
    let l = grad_d.components() / n;
    let mut values = Vec::with_capacity(u.grid().sites() * l);
    for s in 0..u.grid().sites() {
        let (w, g) = (u.at(s), grad_d.at(s));
        for a in 0..l {
            values.push((0..n).map(|i| w[i] * g[a * n + i]).sum());
        }
    }
    Ok(Field::from_parts(*u.grid(), l, values))
}
