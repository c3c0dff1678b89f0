use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unnormalized transform `x ↦ (Σ_t ψ(wt) x(t))_w` of length `p`, backed by a
/// planned FFT.
#[derive(Clone)]
pub struct Dft {
    fft: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(p: usize) -> Self {
        let mut planner = FftPlanner::new();
        // rustfft's inverse direction uses the kernel exp(+2πi wt/p) = ψ(wt)
        Self {
            fft: planner.plan_fft_inverse(p),
        }
    }

    pub fn len(&self) -> usize {
        self.fft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fft.len() == 0
    }

    /// Transforms every consecutive chunk of length `p` in place.
    pub fn process(&self, buffer: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let need = self.fft.get_inplace_scratch_len();
        if scratch.len() < need {
            scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        self.fft.process_with_scratch(buffer, &mut scratch[..need]);
    }

    pub fn transform(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut buf = input.to_vec();
        let mut scratch = Vec::new();
        self.process(&mut buf, &mut scratch);
        buf
    }
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dft({})", self.fft.len())
    }
}
