use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const ROWS_PER_TASK: usize = 16;

/// Row-major 2D FFT for an `nx × nz` array stored with `z` fastest.
///
/// The forward transform leaves the spectrum transposed (`kx` fastest), which
/// saves a transpose on each side of a pointwise spectral multiply.
pub(crate) struct Fft2 {
    nx: usize,
    nz: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_z: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_z: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(nx: usize, nz: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            nz,
            fwd_x: planner.plan_fft_forward(nx),
            fwd_z: planner.plan_fft_forward(nz),
            inv_x: planner.plan_fft_inverse(nx),
            inv_z: planner.plan_fft_inverse(nz),
        }
    }

    fn rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], len: usize) {
        data.par_chunks_mut(len * ROWS_PER_TASK)
            .for_each(|chunk| fft.process(chunk));
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
            for (r, v) in out.iter_mut().enumerate() {
                *v = src[r * cols + c];
            }
        });
    }

    /// Position layout `data[ix*nz + iz]` to spectrum `spec[kz*nx + kx]`. Unnormalized.
    pub(crate) fn forward(&self, data: &mut [Complex64], spec: &mut [Complex64]) {
        Self::rows(&self.fwd_z, data, self.nz);
        Self::transpose(data, spec, self.nx, self.nz);
        Self::rows(&self.fwd_x, spec, self.nx);
    }

    /// Inverse of [`Fft2::forward`] without the `1/(nx nz)` factor.
    pub(crate) fn inverse(&self, spec: &mut [Complex64], data: &mut [Complex64]) {
        Self::rows(&self.inv_x, spec, self.nx);
        Self::transpose(spec, data, self.nz, self.nx);
        Self::rows(&self.inv_z, data, self.nz);
    }
}

/// Angular wavenumbers in FFT order for `n` points spaced `d`.
pub(crate) fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * d);
    (0..n)
        .map(|j| {
            let j = if j < n / 2 {
                j as f64
            } else {
                j as f64 - n as f64
            };
            j * scale
        })
        .collect()
}
