//! Grothendieck classes that are polynomials in the Lefschetz class `L`.
//!
//! An [`LPoly`] is only ever produced for a variety by the constructors in
//! this module (projective spaces, quadrics, coordinate arrangements, joins
//! and cones); the certificate engine tracks everything else as a residue
//! modulo `L`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::mpoly::{parse_with, PolyError};

/// `c_0 + c_1 L + … + c_d L^d` with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LPoly {
    coeffs: Vec<BigInt>,
}

impl LPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = LPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        LPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::new(vec![c.into()])
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    /// The Lefschetz class itself.
    pub fn l() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `L^n`, the class of `A^n`.
    pub fn l_pow(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        LPoly { coeffs: c }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Counting specialization `L ↦ q`.
    pub fn eval_at(&self, q: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * q + c)
    }

    /// Residue modulo the ideal `(L)`: the constant coefficient.
    pub fn mod_l(&self) -> BigInt {
        self.coeffs.first().cloned().unwrap_or_default()
    }

    pub fn pow(&self, e: u32) -> LPoly {
        (0..e).fold(LPoly::one(), |acc, _| &acc * self)
    }
}

impl Add for &LPoly {
    type Output = LPoly;
    fn add(self, rhs: &LPoly) -> LPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c = (0..n)
            .map(|i| {
                self.coeffs.get(i).cloned().unwrap_or_default()
                    + rhs.coeffs.get(i).cloned().unwrap_or_default()
            })
            .collect();
        LPoly::new(c)
    }
}

impl Neg for &LPoly {
    type Output = LPoly;
    fn neg(self) -> LPoly {
        LPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &LPoly {
    type Output = LPoly;
    fn sub(self, rhs: &LPoly) -> LPoly {
        self + &(-rhs)
    }
}

impl Mul for &LPoly {
    type Output = LPoly;
    fn mul(self, rhs: &LPoly) -> LPoly {
        if self.is_zero() || rhs.is_zero() {
            return LPoly::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        LPoly::new(c)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for LPoly {
            type Output = LPoly;
            fn $m(self, rhs: LPoly) -> LPoly { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let a = c.abs();
            let power = match i {
                0 => String::new(),
                1 => "L".to_string(),
                _ => format!("L^{i}"),
            };
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "{power}")?,
                _ => write!(f, "{a}*{power}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for LPoly {
    type Err = PolyError;

    /// Accepts any polynomial expression in the single variable `L`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = parse_with(s, 1, &|name| (name == "L").then_some(0))?;
        let deg = p.total_degree().finite().map_or(0, |d| d as usize + 1);
        let mut c = vec![BigInt::zero(); deg];
        for (m, coef) in p.terms() {
            c[m.exponents()[0] as usize] = coef.clone();
        }
        Ok(LPoly::new(c))
    }
}

/// `[P^n] = 1 + L + … + L^n`.
pub fn class_projective_space(n: usize) -> LPoly {
    LPoly::new(vec![BigInt::one(); n + 1])
}

/// Join of `X` and `Y` along disjoint lines: `[X][Y](L-1) + [X] + [Y]`.
pub fn class_join(a: &LPoly, b: &LPoly) -> LPoly {
    let lm1 = LPoly::from_ints(&[-1, 1]);
    &(&(a * b) * &lm1) + &(a + b)
}

/// `r`-fold iterated projective cone: `a ↦ L·a + 1`, `r >= 1`.
pub fn class_cone(a: &LPoly, r: usize) -> LPoly {
    assert!(r >= 1, "cone iteration count must be positive");
    let l = LPoly::l();
    (0..r).fold(a.clone(), |acc, _| &(&l * &acc) + &LPoly::one())
}

/// Affine cone in `A^{n+1}` over `X ⊂ P^n`: `[X](L-1) + 1`.
pub fn class_affine_cone(a: &LPoly) -> LPoly {
    &(a * &LPoly::from_ints(&[-1, 1])) + &LPoly::one()
}

/// Classes `[Q_0..=Q_n]` and `[Y_0..=Y_n]` from the stratification
/// recursion, seeded with `Q_0 = 2`, `Q_1 = L + 1`, `Y_0 = 2`, `Y_1 = L - 1`.
fn quadric_sphere_tables(n: usize) -> (Vec<LPoly>, Vec<LPoly>) {
    let mut q = vec![LPoly::constant(2), LPoly::from_ints(&[1, 1])];
    let mut y = vec![LPoly::constant(2), LPoly::from_ints(&[-1, 1])];
    let lm1 = LPoly::from_ints(&[-1, 1]);
    for k in 2..=n {
        // [Y_k] = L^k - [Y_{k-1}] + 1 + (L-1)[Q_{k-2}]
        let yk = &(&(&LPoly::l_pow(k) - &y[k - 1]) + &LPoly::one()) + &(&lm1 * &q[k - 2]);
        let qk = &q[k - 1] + &yk;
        y.push(yk);
        q.push(qk);
    }
    (q, y)
}

/// Smooth quadric `Q_n: x_0^2 + … + x_{n+1}^2 = 0` in `P^{n+1}`.
pub fn class_smooth_quadric(n: usize) -> LPoly {
    quadric_sphere_tables(n).0.swap_remove(n)
}

/// Affine sphere `Y_n: y_1^2 + … + y_{n+1}^2 = 1` in `A^{n+1}`.
pub fn class_affine_sphere(n: usize) -> LPoly {
    quadric_sphere_tables(n).1.swap_remove(n)
}

/// Union of the `n` coordinate hyperplanes in `P^{n-1}`:
/// `[P^{n-1}] - (L-1)^{n-1}`.
pub fn class_coordinate_hyperplane_union(n: usize) -> LPoly {
    assert!(n >= 1, "need at least one hyperplane");
    let torus = LPoly::from_ints(&[-1, 1]).pow(n as u32 - 1);
    &class_projective_space(n - 1) - &torus
}
