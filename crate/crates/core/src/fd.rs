//! Finite-difference estimates of mixed partials, used to cross-check the
//! jet engine. Only pointwise evaluations of the field are used.

use crate::error::{Error, Result};
use crate::jet::MultiIndex;
use crate::point::BasePoint;

pub const MIN_STEP: f64 = 1e-8;

/// Central-difference weights for a derivative of order `e` with unit spacing.
fn stencil(e: u8) -> &'static [(i32, f64)] {
    match e {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!("orders above 3 are rejected"),
    }
}

fn tensor_stencil(field: &dyn Fn(&BasePoint) -> Result<f64>, base: &[f64], exps: &[u8], h: f64) -> Result<f64> {
    let active: Vec<(usize, &'static [(i32, f64)])> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| (v, stencil(e)))
        .collect();
    let degree: i32 = exps.iter().map(|&e| e as i32).sum();
    let mut counters = vec![0usize; active.len()];
    let mut total = 0.0;
    let mut coords = base.to_vec();
    loop {
        let mut weight = 1.0;
        for (slot, (v, weights)) in active.iter().enumerate() {
            let (offset, w) = weights[counters[slot]];
            coords[*v] = base[*v] + offset as f64 * h;
            weight *= w;
        }
        total += weight * field(&BasePoint::from_coords(&coords))?;
        let mut slot = 0;
        while slot < active.len() {
            counters[slot] += 1;
            if counters[slot] < active[slot].1.len() {
                break;
            }
            counters[slot] = 0;
            slot += 1;
        }
        if slot == active.len() {
            break;
        }
    }
    Ok(total / h.powi(degree))
}

/// Estimates `∂^|m| f / ∂x^α ∂y^β` at `base` from central differences with
/// spacing `step`, combined with the `2·step` estimate by one Richardson step
/// (both stencils are second-order accurate).
pub fn fd_oracle(
    field: &dyn Fn(&BasePoint) -> Result<f64>,
    base: &BasePoint,
    m: &MultiIndex,
    step: f64,
) -> Result<f64> {
    if !(step >= MIN_STEP) {
        return Err(Error::StepUnderflow(step));
    }
    if m.degree() > 3 {
        return Err(Error::OrderExceeded {
            needed: m.degree(),
            available: 3,
        });
    }
    let coords = base.coords();
    let exps = m.exponents();
    if m.degree() == 0 {
        return field(base);
    }
    let fine = tensor_stencil(field, &coords, &exps, step)?;
    let coarse = tensor_stencil(field, &coords, &exps, 2.0 * step)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
