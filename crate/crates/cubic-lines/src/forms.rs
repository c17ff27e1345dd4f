//! Integer forms attached to lines on diagonal cubic hypersurfaces.
//!
//! A line `{x + t y : t rational}` lies on the hypersurface
//! `c_1 z_1^3 + ... + c_s z_s^3 = 0` exactly when the four coefficient forms
//! of `sum_i c_i (x_i + t y_i)^3` vanish simultaneously:
//!
//! ```text
//! sum c_i x_i^3,   sum c_i x_i^2 y_i,   sum c_i x_i y_i^2,   sum c_i y_i^3.
//! ```
//!
//! This module evaluates those forms, the degree-`d` monomial vectors
//! `nu_d(x, y) = (x^d, x^{d-1} y, ..., y^d)` behind them, and the signed
//! difference functionals driving the mean-value counts. All arithmetic is
//! checked 128-bit: overflow is an error, never a wraparound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonzero integer coefficients `c_1..c_s` of a diagonal cubic form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientVector(Vec<i64>);

impl CoefficientVector {
    pub fn new(c: Vec<i64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidInput(
                "coefficient vector must have at least one entry".into(),
            ));
        }
        if c.contains(&0) {
            return Err(Error::InvalidInput(
                "coefficient vector entries must be nonzero".into(),
            ));
        }
        Ok(CoefficientVector(c))
    }

    pub fn ones(s: usize) -> Self {
        assert!(s >= 1);
        CoefficientVector(vec![1; s])
    }

    pub fn s(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().expect("nonempty")
    }
}

impl fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for CoefficientVector {
    type Err = Error;

    /// Parses a comma-separated signed integer list, e.g. `1,-1,2`.
    fn from_str(text: &str) -> Result<Self> {
        let entries = text
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<i64>, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad coefficient list {text:?}: {e}")))?;
        CoefficientVector::new(entries)
    }
}

/// `nu_d(x, y)` for `d` in `1..=3`, components ordered by decreasing
/// exponent of `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VeroneseVector {
    degree: u32,
    components: [i128; 4],
}

impl VeroneseVector {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[i128] {
        &self.components[..=self.degree as usize]
    }
}

fn checked_pow_product(context: &'static str, x: i128, xe: u32, y: i128, ye: u32) -> Result<i128> {
    let mut acc: i128 = 1;
    for _ in 0..xe {
        acc = acc.checked_mul(x).ok_or(Error::Overflow { context })?;
    }
    for _ in 0..ye {
        acc = acc.checked_mul(y).ok_or(Error::Overflow { context })?;
    }
    Ok(acc)
}

/// The monomial vector `(x^d, x^{d-1} y, ..., y^d)`.
pub fn veronese(degree: u32, x: i64, y: i64) -> Result<VeroneseVector> {
    if !(1..=3).contains(&degree) {
        return Err(Error::InvalidInput(format!(
            "veronese degree must be 1, 2, or 3, got {degree}"
        )));
    }
    let mut components = [0i128; 4];
    for (l, slot) in components.iter_mut().take(degree as usize + 1).enumerate() {
        let xe = degree - l as u32;
        *slot = checked_pow_product("veronese", x as i128, xe, y as i128, l as u32)?;
    }
    Ok(VeroneseVector { degree, components })
}

/// Signed difference of one monomial-vector component over `2s` pairs:
/// pairs `1..=s` count positively, pairs `s+1..=2s` negatively.
///
/// `component` is 1-based; component `l` of `nu_d` is `x^{d+1-l} y^{l-1}`.
pub fn sigma(s: usize, degree: u32, component: usize, x: &[i64], y: &[i64]) -> Result<i128> {
    if s == 0 {
        return Err(Error::InvalidInput("sigma requires s >= 1".into()));
    }
    if x.len() != 2 * s || y.len() != 2 * s {
        return Err(Error::InvalidInput(format!(
            "sigma over s = {s} needs 2s = {} coordinates per side, got {} and {}",
            2 * s,
            x.len(),
            y.len()
        )));
    }
    if !(1..=3).contains(&degree) || component == 0 || component > degree as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "component index {component} is out of range for degree {degree}"
        )));
    }
    let xe = degree - (component as u32 - 1);
    let ye = component as u32 - 1;
    let mut acc: i128 = 0;
    for i in 0..2 * s {
        let term = checked_pow_product("sigma", x[i] as i128, xe, y[i] as i128, ye)?;
        acc = if i < s {
            acc.checked_add(term)
        } else {
            acc.checked_sub(term)
        }
        .ok_or(Error::Overflow { context: "sigma" })?;
    }
    Ok(acc)
}

/// Values of the four line forms, in degree order of `y`:
/// `(sum c x^3, sum c x^2 y, sum c x y^2, sum c y^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormValues(pub [i128; 4]);

impl FormValues {
    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }
}

/// Evaluates the four line forms at `(x, y)`; `x` and `y` each carry one
/// coordinate per coefficient.
pub fn system_values(c: &CoefficientVector, x: &[i64], y: &[i64]) -> Result<FormValues> {
    let s = c.s();
    if x.len() != s || y.len() != s {
        return Err(Error::InvalidInput(format!(
            "system over s = {s} needs {s} coordinates per side, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut values = [0i128; 4];
    for i in 0..s {
        let ci = c.as_slice()[i] as i128;
        let nu = veronese(3, x[i], y[i])?;
        for (value, &component) in values.iter_mut().zip(&nu.components) {
            let term = ci.checked_mul(component).ok_or(Error::Overflow {
                context: "system_values",
            })?;
            *value = value.checked_add(term).ok_or(Error::Overflow {
                context: "system_values",
            })?;
        }
    }
    Ok(FormValues(values))
}

/// Shift data for the differenced cubic system: offsets `h` left over in the
/// degree-2 conditions, and the box shifts `z1` (of `x`) and `z2` (of `y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftForms {
    pub h: [i64; 3],
    pub z1: i64,
    pub z2: i64,
}

/// Scalar ring for the phase-side formulas, so the same code runs on `f64`
/// in production and on exact rationals in tests.
pub trait LinearScalar: Copy {
    fn add(self, rhs: Self) -> Self;
    fn mul(self, rhs: Self) -> Self;
    fn from_i128(v: i128) -> Self;
}

impl LinearScalar for f64 {
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn mul(self, rhs: Self) -> Self {
        self * rhs
    }
    fn from_i128(v: i128) -> Self {
        v as f64
    }
}

/// `L1 = 3 h1 a1 + 2 h2 a2 + h3 a3`, `L2 = h1 a2 + 2 h2 a3 + 3 h3 a4`,
/// `L3 = b1 h1 + b2 h2 + b3 h3`.
pub fn linear_forms_in<T: LinearScalar>(h: [i64; 3], alpha: [T; 4], beta: [T; 3]) -> [T; 3] {
    let hv = |i: usize, k: i128| T::from_i128(h[i] as i128 * k);
    let l1 = hv(0, 3)
        .mul(alpha[0])
        .add(hv(1, 2).mul(alpha[1]))
        .add(hv(2, 1).mul(alpha[2]));
    let l2 = hv(0, 1)
        .mul(alpha[1])
        .add(hv(1, 2).mul(alpha[2]))
        .add(hv(2, 3).mul(alpha[3]));
    let l3 = beta[0]
        .mul(hv(0, 1))
        .add(beta[1].mul(hv(1, 1)))
        .add(beta[2].mul(hv(2, 1)));
    [l1, l2, l3]
}

pub fn linear_forms(h: [i64; 3], alpha: [f64; 4], beta: [f64; 3]) -> [f64; 3] {
    linear_forms_in(h, alpha, beta)
}

/// Phase correction produced by shifting the summation box: equal to
/// `z1 L1 + z2 L2`, i.e.
/// `3 h1 z1 a1 + (h1 z2 + 2 h2 z1) a2 + (h3 z1 + 2 h2 z2) a3 + 3 h3 z2 a4`.
pub fn shift_correction_in<T: LinearScalar>(shift: ShiftForms, alpha: [T; 4]) -> T {
    let ShiftForms { h, z1, z2 } = shift;
    let (h1, h2, h3) = (h[0] as i128, h[1] as i128, h[2] as i128);
    let (z1, z2) = (z1 as i128, z2 as i128);
    let c = T::from_i128;
    c(3 * h1 * z1)
        .mul(alpha[0])
        .add(c(h1 * z2 + 2 * h2 * z1).mul(alpha[1]))
        .add(c(h3 * z1 + 2 * h2 * z2).mul(alpha[2]))
        .add(c(3 * h3 * z2).mul(alpha[3]))
}

pub fn shift_correction(shift: ShiftForms, alpha: [f64; 4]) -> f64 {
    shift_correction_in(shift, alpha)
}
