//! Scalar abstraction for the closed-form math.
//!
//! Bounds, information measures and redundancy constants are written against
//! [`Real`] so they can be evaluated in `f64`, or in [`num_bigfloat::BigFloat`]
//! (about 40 significant digits) when probing slowly converging asymptotics.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by the generic evaluators: `f32`, `f64` or `BigFloat`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Lossy conversion from `f64`; exact for every value the crate feeds in.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// `log2(e)`.
    fn log2_e() -> Self {
        <Self as FloatConst>::LOG2_E()
    }

    /// Widening conversion back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
impl Real for num_bigfloat::BigFloat {}

/// `x·log2(x)` with the `0·log 0 = 0` convention.
pub fn xlog2x<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}

/// Binary entropy `h2(p)` in bits.
pub fn binary_entropy<T: Real>(p: T) -> T {
    -(xlog2x(p) + xlog2x(T::one() - p))
}

/// Shannon entropy in bits of a probability vector.
pub fn entropy<T: Real>(probs: &[T]) -> T {
    probs.iter().fold(T::zero(), |acc, &p| acc - xlog2x(p))
}

/// `D(p || q)` in bits; `+inf` when `p` puts mass where `q` does not.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> T {
    let mut acc = T::zero();
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= T::zero() {
            continue;
        }
        if qi <= T::zero() {
            return T::infinity();
        }
        acc = acc + pi * (pi / qi).log2();
    }
    acc
}

/// Neumaier compensated accumulator. Summation order is the caller's order,
/// so results are bit-stable for a fixed input sequence.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigfloat::BigFloat;

    #[test]
    fn binary_entropy_known_values() {
        assert!((binary_entropy(0.11_f64) - 0.499_916_6).abs() < 1e-6);
        assert_eq!(binary_entropy(0.0_f64), 0.0);
        assert_eq!(binary_entropy(1.0_f64), 0.0);
        assert!((binary_entropy(0.5_f32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn entropy_agrees_across_scalars() {
        let p = [0.2, 0.3, 0.5];
        let pe: Vec<BigFloat> = p.iter().map(|&x| BigFloat::from_f64(x)).collect();
        let h64 = entropy(&p);
        let hx = entropy(&pe);
        assert!((hx.to_f64_lossy() - h64).abs() < 1e-14);
    }

    #[test]
    fn kl_infinite_on_support_mismatch() {
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_infinite());
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
