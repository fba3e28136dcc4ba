//! n-dimensional transforms as successive 1-D passes along each axis.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::GridSpec;

/// In-place unnormalised transform of a row-major `Nⁿ` array.
pub(crate) fn transform(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let m = grid.points;
    assert_eq!(data.len(), grid.len());
    let fft = FftPlanner::new().plan_fft(m, direction);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..grid.n {
        let stride = m.pow((grid.n - 1 - axis) as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

/// Physical samples `u_j = L^{−n} Σ_k û_k e^{iξ_k·x_j}` from a spectrum.
pub fn to_physical(grid: &GridSpec, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut data = spectrum.to_vec();
    transform(grid, &mut data, FftDirection::Inverse);
    let scale = grid.extent.powi(-(grid.n as i32));
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Spectrum `û_k = (L/N)ⁿ Σ_j u_j e^{−iξ_k·x_j}`; inverse of [`to_physical`].
pub fn to_spectral(grid: &GridSpec, samples: &[Complex64]) -> Vec<Complex64> {
    let mut data = samples.to_vec();
    transform(grid, &mut data, FftDirection::Forward);
    let scale = grid.cell_volume();
    data.iter_mut().for_each(|v| *v *= scale);
    data
}
