//! In-place iterative radix-2 decimation-in-time FFT.
//!
//! Transforms run as a bit-reversal permutation followed by `log2(N)`
//! butterfly stages over a precomputed [`TwiddleTable`]. The forward
//! transform is unnormalized; the inverse carries the `1/N` factor.

use std::ops::{Deref, DerefMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Contiguous complex samples, the unit of transform work.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexBuffer<T>(Vec<Complex<T>>);

impl<T: Sample> ComplexBuffer<T> {
    pub fn zeros(len: usize) -> Self {
        ComplexBuffer(vec![Complex::new(T::zero(), T::zero()); len])
    }

    /// Real samples widened to complex, zero-padded to `len`.
    pub fn from_real_padded(samples: &[T], len: usize) -> Result<Self> {
        if samples.len() > len {
            return Err(Error::shape(format!(
                "{} samples do not fit a buffer of length {len}",
                samples.len()
            )));
        }
        let mut buf = Self::zeros(len);
        for (dst, &s) in buf.0.iter_mut().zip(samples) {
            dst.re = s;
        }
        Ok(buf)
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }
}

impl<T> From<Vec<Complex<T>>> for ComplexBuffer<T> {
    fn from(v: Vec<Complex<T>>) -> Self {
        ComplexBuffer(v)
    }
}

impl<T> Deref for ComplexBuffer<T> {
    type Target = [Complex<T>];

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl<T> DerefMut for ComplexBuffer<T> {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

/// Roots of unity `e^(-2πik/n)` for `k = 0..n/2`, shared read-only by every
/// transform of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwiddleTable<T> {
    factors: Vec<Complex<T>>,
    n: usize,
}

impl<T: Sample> TwiddleTable<T> {
    /// Builds the table for transforms of length `n` (power of two, `n >= 2`).
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::shape(format!(
                "twiddle table length must be a power of two >= 2, got {n}"
            )));
        }
        let factors = (0..n / 2)
            .map(|k| {
                // Quarter-turn points are pinned so small transforms stay exact.
                if k == 0 {
                    Complex::new(T::one(), T::zero())
                } else if 4 * k == n {
                    Complex::new(T::zero(), -T::one())
                } else {
                    let angle = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    Complex::new(T::narrow(angle.cos()), T::narrow(angle.sin()))
                }
            })
            .collect();
        Ok(TwiddleTable { factors, n })
    }

    /// Like [`TwiddleTable::new`] but rejects lengths above `max_len`.
    pub fn with_max_len(n: usize, max_len: usize) -> Result<Self> {
        if n > max_len {
            return Err(Error::shape(format!(
                "transform length {n} exceeds configured maximum {max_len}"
            )));
        }
        Self::new(n)
    }

    /// Transform length this table serves.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn factors(&self) -> &[Complex<T>] {
        &self.factors
    }
}

/// Reverses the `bits`-bit binary representation of `i`.
#[inline]
fn reverse_index(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Moves element `i` to position `bit_reverse(i)`. An involution.
pub fn bit_reverse_permute<T>(buf: &mut [T]) -> Result<()> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::shape(format!(
            "bit reversal needs a power-of-two length, got {n}"
        )));
    }
    permute_unchecked(buf);
    Ok(())
}

fn permute_unchecked<T>(buf: &mut [T]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = reverse_index(i, bits);
        if i < j {
            buf.swap(i, j);
        }
    }
}

fn check_len<T>(buf: &[Complex<T>], tw: &TwiddleTable<T>) -> Result<()> {
    if buf.len() != tw.n {
        return Err(Error::shape(format!(
            "buffer length {} does not match twiddle table length {}",
            buf.len(),
            tw.n
        )));
    }
    Ok(())
}

fn butterflies<T: Sample, const INVERSE: bool>(buf: &mut [Complex<T>], tw: &TwiddleTable<T>) {
    let n = buf.len();
    let mut half = 1;
    while half < n {
        let span = 2 * half;
        let stride = n / span;
        for block in buf.chunks_exact_mut(span) {
            let (lo, hi) = block.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let w = tw.factors[k * stride];
                let w = if INVERSE { w.conj() } else { w };
                let t = w * *b;
                *b = *a - t;
                *a = *a + t;
            }
        }
        half = span;
    }
}

/// Unnormalized forward DFT, in place: `X[k] = Σ x[n]·e^(-2πikn/N)`.
pub fn fft_forward<T: Sample>(buf: &mut [Complex<T>], tw: &TwiddleTable<T>) -> Result<()> {
    check_len(buf, tw)?;
    forward_unchecked(buf, tw);
    Ok(())
}

/// Normalized inverse DFT, in place, so that `fft_inverse(fft_forward(x)) ≈ x`.
pub fn fft_inverse<T: Sample>(buf: &mut [Complex<T>], tw: &TwiddleTable<T>) -> Result<()> {
    check_len(buf, tw)?;
    inverse_unchecked(buf, tw);
    Ok(())
}

// Callers guarantee `buf.len() == tw.len()`.
pub(crate) fn forward_unchecked<T: Sample>(buf: &mut [Complex<T>], tw: &TwiddleTable<T>) {
    debug_assert_eq!(buf.len(), tw.n);
    permute_unchecked(buf);
    butterflies::<T, false>(buf, tw);
}

pub(crate) fn inverse_unchecked<T: Sample>(buf: &mut [Complex<T>], tw: &TwiddleTable<T>) {
    debug_assert_eq!(buf.len(), tw.n);
    permute_unchecked(buf);
    butterflies::<T, true>(buf, tw);
    let scale = T::one() / T::narrow(buf.len() as f64);
    for v in buf.iter_mut() {
        *v = v.scale(scale);
    }
}
