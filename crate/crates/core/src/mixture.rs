//! Jeffreys-mixture conditional probability assignment `p_U(x^t | y^t)`.
//!
//! With a Dirichlet(1/2, …, 1/2) weight on every column of the backward
//! channel, the mixture integral collapses to a product of per-output-column
//! Gamma ratios, and its sequential form is the add-half (KT) predictor
//! `(N(x,y) + 1/2) / (N(·,y) + |X|/2)`.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::scalar::Real;

pub const JEFFREYS_PSEUDOCOUNT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixtureError {
    #[error("symbol ({x}, {y}) out of range for a {x_size}x{y_size} count matrix")]
    SymbolOutOfRange { x: usize, y: usize, x_size: usize, y_size: usize },
    #[error("redundancy bound needs t >= 1")]
    NonPositiveT,
    #[error("alphabet sizes must be at least 1 (|X| >= 2), got {x_size}x{y_size}")]
    BadAlphabet { x_size: usize, y_size: usize },
}

/// Joint counts `N(x^t, y^t; i, j)` with cached column totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    x_size: usize,
    y_size: usize,
    counts: Vec<u32>,
    column_totals: Vec<u32>,
    total: u64,
}

impl CountMatrix {
    pub fn new(x_size: usize, y_size: usize) -> Self {
        Self {
            x_size,
            y_size,
            counts: vec![0; x_size * y_size],
            column_totals: vec![0; y_size],
            total: 0,
        }
    }

    /// Counts for the pairs `(x_k, y_k)`.
    pub fn from_pairs(x_size: usize, y_size: usize, xs: &[usize], ys: &[usize]) -> Result<Self, MixtureError> {
        let mut cm = Self::new(x_size, y_size);
        for (&x, &y) in xs.iter().zip(ys) {
            cm.check(x, y)?;
            cm.increment(x, y);
        }
        Ok(cm)
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Self {
        let x_size = rows.len();
        let y_size = rows.first().map_or(0, Vec::len);
        let mut cm = Self::new(x_size, y_size);
        for (i, row) in rows.iter().enumerate() {
            for (j, &n) in row.iter().enumerate() {
                cm.counts[i * y_size + j] = n;
                cm.column_totals[j] += n;
                cm.total += u64::from(n);
            }
        }
        cm
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.counts[x * self.y_size + y]
    }

    #[inline]
    pub fn column_total(&self, y: usize) -> u32 {
        self.column_totals[y]
    }

    #[inline]
    pub fn increment(&mut self, x: usize, y: usize) {
        self.counts[x * self.y_size + y] += 1;
        self.column_totals[y] += 1;
        self.total += 1;
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.column_totals.iter_mut().for_each(|c| *c = 0);
        self.total = 0;
    }

    fn check(&self, x: usize, y: usize) -> Result<(), MixtureError> {
        if x >= self.x_size || y >= self.y_size {
            Err(MixtureError::SymbolOutOfRange { x, y, x_size: self.x_size, y_size: self.y_size })
        } else {
            Ok(())
        }
    }
}

/// One-step predictive probability of `x` given context `y`.
pub fn kt_conditional(cm: &CountMatrix, x: usize, y: usize) -> Result<f64, MixtureError> {
    cm.check(x, y)?;
    let half = JEFFREYS_PSEUDOCOUNT;
    Ok((f64::from(cm.get(x, y)) + half) / (f64::from(cm.column_total(y)) + half * cm.x_size as f64))
}

/// `log2 p_U(x^t | y^t)` from the Gamma-function closed form.
pub fn mixture_log_prob(cm: &CountMatrix) -> f64 {
    dirichlet_log_prob(cm, JEFFREYS_PSEUDOCOUNT)
}

/// Per-column Dirichlet(`pseudocount`) marginal likelihood in bits.
///
/// Only the Jeffreys value is used for decoding; other pseudocounts exist so
/// verification can inject a wrong constant and watch the oracle check fail.
#[doc(hidden)]
pub fn dirichlet_log_prob(cm: &CountMatrix, pseudocount: f64) -> f64 {
    let a = pseudocount;
    let xa = a * cm.x_size as f64;
    let ln_a = ln_gamma(a);
    let ln_xa = ln_gamma(xa);
    let mut nats = 0.0;
    for j in 0..cm.y_size {
        let col = cm.column_total(j);
        if col == 0 {
            continue;
        }
        for i in 0..cm.x_size {
            let n = cm.get(i, j);
            if n > 0 {
                nats += ln_gamma(f64::from(n) + a) - ln_a;
            }
        }
        nats += ln_xa - ln_gamma(f64::from(col) + xa);
    }
    nats * std::f64::consts::LOG2_E
}

/// `log2` of the maximum-likelihood backward-channel probability of the counts.
pub fn ml_log_prob(cm: &CountMatrix) -> f64 {
    let mut bits = 0.0;
    for j in 0..cm.y_size {
        let col = f64::from(cm.column_total(j));
        for i in 0..cm.x_size {
            let n = f64::from(cm.get(i, j));
            if n > 0.0 {
                bits += n * (n / col).log2();
            }
        }
    }
    bits
}

/// `log2 Γ(n/2)` for a positive integer `n`, by the half-integer recursion.
fn log2_gamma_half<T: Real>(n: usize) -> T {
    // Γ(1) = 1, Γ(1/2) = √π, Γ(z+1) = zΓ(z)
    let (mut z, mut acc) = if n.is_multiple_of(2) {
        (T::one(), T::zero())
    } else {
        (T::lit(0.5), T::PI().sqrt().log2())
    };
    let target = T::from_usize_lossy(n) / T::lit(2.0);
    while z < target {
        acc = acc + z.log2();
        z = z + T::one();
    }
    acc
}

/// Constants of the per-column redundancy bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RedundancyConstants<T> {
    pub x_size: usize,
    pub y_size: usize,
    /// `log2(Γ(1/2)^|X| / Γ(|X|/2))`.
    pub kappa: T,
    /// Additive constant once the bound is written as `dim_coeff·log2 t + beta`.
    pub beta: T,
    /// `(|X| - 1)|Y| / 2`.
    pub dim_coeff: T,
    /// `|X||Y| / 2`, the looser coefficient carried into the stopping-time algebra.
    pub loose_coeff: T,
}

pub fn kappa<T: Real>(x_size: usize) -> T {
    T::from_usize_lossy(x_size) * T::PI().sqrt().log2() - log2_gamma_half::<T>(x_size)
}

pub fn redundancy_constants<T: Real>(x_size: usize, y_size: usize) -> Result<RedundancyConstants<T>, MixtureError> {
    if x_size < 2 || y_size < 1 {
        return Err(MixtureError::BadAlphabet { x_size, y_size });
    }
    let xs = T::from_usize_lossy(x_size);
    let ys = T::from_usize_lossy(y_size);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let kappa = kappa::<T>(x_size);
    let dim_coeff = (xs - T::one()) * ys / two;
    let loose_coeff = xs * ys / two;
    let e_coeff = xs * xs * ys / four + xs * ys / two;
    let beta = ys * kappa + e_coeff * T::log2_e() - dim_coeff * (two * T::PI()).log2();
    Ok(RedundancyConstants { x_size, y_size, kappa, beta, dim_coeff, loose_coeff })
}

/// Upper bound on `ml_log_prob - mixture_log_prob` after `t` symbols.
pub fn redundancy_bound<T: Real>(t: u64, x_size: usize, y_size: usize) -> Result<T, MixtureError> {
    if t == 0 {
        return Err(MixtureError::NonPositiveT);
    }
    let c = redundancy_constants::<T>(x_size, y_size)?;
    let t = T::from_u64(t).expect("t representable");
    Ok(c.dim_coeff * t.log2() + c.beta)
}

/// Precomputed `log2(n + 1/2)` and `log2(n + |X|/2)` so the sequential
/// update costs two table reads per message per symbol.
#[derive(Clone, Debug)]
pub struct KtLogTable {
    x_size: usize,
    numer: Vec<f64>,
    denom: Vec<f64>,
}

impl KtLogTable {
    pub fn new(x_size: usize, capacity: usize) -> Self {
        let mut table = Self { x_size, numer: Vec::new(), denom: Vec::new() };
        table.ensure(capacity);
        table
    }

    pub fn ensure(&mut self, n: usize) {
        let half = JEFFREYS_PSEUDOCOUNT;
        let col_offset = half * self.x_size as f64;
        for k in self.numer.len()..=n {
            self.numer.push((k as f64 + half).log2());
            self.denom.push((k as f64 + col_offset).log2());
        }
    }

    pub fn len(&self) -> usize {
        self.numer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numer.is_empty()
    }

    /// `log2 kt_conditional` for a pair count `n_xy` inside a column of total `n_y`.
    #[inline]
    pub fn log2_kt(&self, n_xy: u32, n_y: u32) -> f64 {
        self.numer[n_xy as usize] - self.denom[n_y as usize]
    }
}
