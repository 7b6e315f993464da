//! Student-cosine basis `phi_k = C_k o F_nu`.
//!
//! `C_k(u) = prod_l c_{k_l}(u_l)` with `c_0 = 1` and `c_k(u) = sqrt(2) cos(k pi u)`
//! is orthonormal on `[0,1]^d`; composing with the marginal CDFs of the sampling
//! measure makes `phi_k` orthonormal in `L^2(nu)`.

use std::f64::consts::{PI, SQRT_2};

use crate::dist::SamplingMeasure;
use crate::error::{Error, Result};
use crate::mindex::MultiIndexSet;

/// One-dimensional cosine element `c_k(u)` on `[0, 1]`.
pub fn cosine_eval(k: u32, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("cosine basis needs u in [0,1], got {u}")));
    }
    Ok(if k == 0 {
        1.0
    } else {
        SQRT_2 * (f64::from(k) * PI * u).cos()
    })
}

/// `phi_k(x)` for a single multi-index.
pub fn phi_eval(k: &[u32], x: &[f64], measure: &SamplingMeasure) -> Result<f64> {
    if k.len() != x.len() || x.len() != measure.dim() {
        return Err(Error::Contract(format!(
            "dimension mismatch: index {}, point {}, measure {}",
            k.len(),
            x.len(),
            measure.dim()
        )));
    }
    let mut prod = 1.0;
    for (l, (&kl, &xl)) in k.iter().zip(x).enumerate() {
        if !xl.is_finite() {
            return Err(Error::Domain(format!("basis evaluation at non-finite x[{l}] = {xl}")));
        }
        prod *= cosine_eval(kl, measure.cdf(l, xl))?;
    }
    Ok(prod)
}

/// `L_Gamma = sum_k ||phi_k||_inf^2 = sum_k 2^{#nonzero(k)}`.
pub fn christoffel(gamma: &MultiIndexSet) -> f64 {
    gamma
        .iter()
        .map(|k| {
            let nz = k.iter().filter(|&&v| v != 0).count() as i32;
            2f64.powi(nz)
        })
        .sum()
}

/// Measure plus index set: everything needed to evaluate a truncated series.
#[derive(Clone, Debug)]
pub struct BasisContext {
    measure: SamplingMeasure,
    gamma: MultiIndexSet,
    max_deg: Vec<u32>,
}

impl BasisContext {
    pub fn new(measure: SamplingMeasure, gamma: MultiIndexSet) -> Result<Self> {
        if measure.dim() != gamma.dim() {
            return Err(Error::Contract(format!(
                "measure has dimension {} but index set has {}",
                measure.dim(),
                gamma.dim()
            )));
        }
        let max_deg = gamma.max_per_coord();
        Ok(Self {
            measure,
            gamma,
            max_deg,
        })
    }

    pub fn measure(&self) -> &SamplingMeasure {
        &self.measure
    }

    pub fn gamma(&self) -> &MultiIndexSet {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn scratch(&self) -> BasisScratch {
        BasisScratch {
            tables: self.max_deg.iter().map(|&m| vec![0.0; m as usize + 1]).collect(),
        }
    }

    /// Fills the per-coordinate cosine tables for point `x`. Each coordinate's
    /// CDF is evaluated once and the cosines follow from the Chebyshev recurrence.
    pub fn load_point(&self, x: &[f64], scratch: &mut BasisScratch) {
        for (l, table) in scratch.tables.iter_mut().enumerate() {
            let u = self.measure.cdf(l, x[l]);
            fill_cosines(u, table);
        }
    }

    /// Writes `phi_k(x)` for every `k` in the set, in set order.
    pub fn phi_all(&self, x: &[f64], scratch: &mut BasisScratch, out: &mut [f64]) {
        self.load_point(x, scratch);
        let tables = &scratch.tables;
        for (o, k) in out.iter_mut().zip(self.gamma.iter()) {
            *o = k.iter().zip(tables).map(|(&kl, t)| t[kl as usize]).product();
        }
    }

    /// `sum_k coeffs[k] phi_k(x)` without allocating. Lengths are not checked.
    pub fn series(&self, coeffs: &[f64], x: &[f64], scratch: &mut BasisScratch) -> f64 {
        self.load_point(x, scratch);
        let tables = &scratch.tables;
        if let [t] = tables.as_slice() {
            // d = 1: the set is 0..=K in order.
            return coeffs.iter().zip(t).map(|(a, c)| a * c).sum();
        }
        coeffs
            .iter()
            .zip(self.gamma.iter())
            .map(|(a, k)| a * k.iter().zip(tables).map(|(&kl, t)| t[kl as usize]).product::<f64>())
            .sum()
    }

    /// Checked series evaluation.
    pub fn eval_series(&self, coeffs: &[f64], x: &[f64]) -> Result<f64> {
        if coeffs.len() != self.len() {
            return Err(Error::Contract(format!(
                "{} coefficients for an index set of size {}",
                coeffs.len(),
                self.len()
            )));
        }
        if x.len() != self.dim() {
            return Err(Error::Contract(format!(
                "point of dimension {} for a basis of dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("series evaluation at non-finite point ({bad})")));
        }
        let mut scratch = self.scratch();
        Ok(self.series(coeffs, x, &mut scratch))
    }
}

/// Reusable per-worker buffers for basis evaluation.
#[derive(Clone, Debug)]
pub struct BasisScratch {
    tables: Vec<Vec<f64>>,
}

fn fill_cosines(u: f64, table: &mut [f64]) {
    let c1 = (PI * u).cos();
    let two_c1 = 2.0 * c1;
    let (mut prev, mut cur) = (1.0, c1);
    table[0] = 1.0;
    for slot in table.iter_mut().skip(1) {
        *slot = SQRT_2 * cur;
        let next = two_c1 * cur - prev;
        prev = cur;
        cur = next;
    }
}
