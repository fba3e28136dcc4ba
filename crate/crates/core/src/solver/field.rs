use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fft;
use super::grid::GridSpec;
use super::preset::DataPreset;
use crate::bounds::{variant_value, Variant};
use crate::error::{Error, Result};
use crate::symbol::{check_region_parameter, in_dr, Mode, MAX_DERIVATIVE_ORDER};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMeta {
    /// Preset the arrays were synthesised from, evolved by `time`.
    pub preset: Option<DataPreset>,
    /// Largest `|ξᵢ|` carrying data.
    pub band_limit: f64,
    pub r: Option<f64>,
    /// Time elapsed since the preset data.
    pub time: f64,
}

/// Initial data `(û₀, û₁)` on the dual grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    u0_hat: Vec<Complex64>,
    u1_hat: Vec<Complex64>,
    meta: FieldMeta,
}

/// `(∂_t + |ξ|²)Ĝ`-type and `Ĝ`-type multipliers of `∂_t^l û` at one node.
#[inline]
pub(crate) fn duhamel_multipliers(mode: Mode, t: f64, l: usize) -> (f64, f64) {
    let mut d = [0.0; MAX_DERIVATIVE_ORDER + 2];
    let d = &mut d[..l + 2];
    mode.derivatives_into(t, d);
    (variant_value(Variant::HeatG, l, mode, t, d), d[l])
}

fn check_l(l: u32) -> Result<usize> {
    if l as usize > MAX_DERIVATIVE_ORDER - 1 {
        return Err(Error::invalid(
            "l",
            format!("time-derivative order {l} is too large"),
        ));
    }
    Ok(l as usize)
}

impl SpectralField {
    /// Field from explicit arrays (row-major, FFT order on every axis).
    pub fn from_arrays(
        grid: GridSpec,
        u0_hat: Vec<Complex64>,
        u1_hat: Vec<Complex64>,
    ) -> Result<Self> {
        grid.validate()?;
        if u0_hat.len() != grid.len() || u1_hat.len() != grid.len() {
            return Err(Error::invalid(
                "spectral arrays",
                format!("need {} values each", grid.len()),
            ));
        }
        if u0_hat
            .iter()
            .chain(&u1_hat)
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::invalid("spectral arrays", "entries must be finite"));
        }
        let mut xi = vec![0.0; grid.n];
        let mut band: f64 = 0.0;
        for idx in 0..grid.len() {
            if u0_hat[idx] != ZERO || u1_hat[idx] != ZERO {
                grid.wavevector(idx, &mut xi);
                band = xi.iter().fold(band, |b, x| b.max(x.abs()));
            }
        }
        Ok(Self {
            grid,
            u0_hat,
            u1_hat,
            meta: FieldMeta {
                preset: None,
                band_limit: band,
                r: None,
                time: 0.0,
            },
        })
    }

    /// Sample a preset on the dual grid.
    pub fn synthesize(preset: DataPreset, grid: GridSpec, r: f64) -> Result<Self> {
        grid.validate()?;
        preset.validate()?;
        check_region_parameter(r)?;
        let band = preset.axis_band_limit();
        grid.check_band_limit(band)?;
        let samples: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; grid.n],
                |xi, idx| {
                    grid.wavevector(idx, xi);
                    preset.value(r, xi)
                },
            )
            .collect();
        if matches!(preset.kind, super::preset::PresetKind::DrBump { .. }) {
            let mut xi = vec![0.0; grid.n];
            for (idx, v) in samples.iter().enumerate() {
                grid.wavevector(idx, &mut xi);
                let s: f64 = xi.iter().map(|x| x * x).sum();
                if *v != 0.0 && s > 0.0 && !in_dr(Mode::new(xi[0], s), r) {
                    return Err(Error::Guard(format!(
                        "D_r bump has a node outside D_{r}: {xi:?}"
                    )));
                }
            }
        }
        let lift = |on: bool| -> Vec<Complex64> {
            if on {
                samples.iter().map(|&v| Complex64::new(v, 0.0)).collect()
            } else {
                vec![ZERO; grid.len()]
            }
        };
        Ok(Self {
            grid,
            u0_hat: lift(preset.which.has_u0()),
            u1_hat: lift(preset.which.has_u1()),
            meta: FieldMeta {
                preset: Some(preset),
                band_limit: band,
                r: Some(r),
                time: 0.0,
            },
        })
    }

    /// Real random data with spectrum restricted to `|ξᵢ| ≤ band` on every axis.
    pub fn random_band_limited(grid: GridSpec, band: f64, seed: u64) -> Result<Self> {
        grid.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<Complex64> {
            let phys: Vec<Complex64> = (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
                .collect();
            fft::to_spectral(&grid, &phys)
        };
        let (mut a, mut b) = (draw(), draw());
        let mut xi = vec![0.0; grid.n];
        let nyquist = grid.xi_max() - 0.5 * grid.d_xi();
        for idx in 0..grid.len() {
            grid.wavevector(idx, &mut xi);
            if xi.iter().any(|x| x.abs() > band || x.abs() > nyquist) {
                a[idx] = ZERO;
                b[idx] = ZERO;
            }
        }
        // restore exact symmetry lost to round-off in the forward transform
        for idx in 0..grid.len() {
            let m = grid.mirror(idx);
            if m > idx {
                a[m] = a[idx].conj();
                b[m] = b[idx].conj();
            } else if m == idx {
                a[idx].im = 0.0;
                b[idx].im = 0.0;
            }
        }
        Self::from_arrays(grid, a, b)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn u0_hat(&self) -> &[Complex64] {
        &self.u0_hat
    }

    pub fn u1_hat(&self) -> &[Complex64] {
        &self.u1_hat
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    /// `max |û(−ξ) − conj û(ξ)|` over both arrays, relative to the largest entry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for arr in [&self.u0_hat, &self.u1_hat] {
            for idx in 0..arr.len() {
                let m = self.grid.mirror(idx);
                defect = defect.max((arr[m] - arr[idx].conj()).norm());
                scale = scale.max(arr[idx].norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }

    /// `a·self + b·other` on the same grid.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        if f.grid != g.grid {
            return Err(Error::invalid("field combination", "grids differ"));
        }
        let mix = |x: &[Complex64], y: &[Complex64]| {
            x.iter().zip(y).map(|(u, v)| u * a + v * b).collect()
        };
        let mut out =
            Self::from_arrays(f.grid, mix(&f.u0_hat, &g.u0_hat), mix(&f.u1_hat, &g.u1_hat))?;
        if f.meta.time == g.meta.time {
            out.meta.time = f.meta.time;
        }
        Ok(out)
    }

    /// State `(û(t), û_t(t))` after time `t`, stored as a new field whose
    /// first array is `û(t)` and second is `û_t(t)`.
    pub fn evolve(&self, t: f64) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("time", format!("need t ≥ 0, got {t}")));
        }
        let u = self.time_derivative(t, 0)?;
        let ut = self.time_derivative(t, 1)?;
        let mut meta = self.meta.clone();
        meta.time += t;
        Ok(Self {
            grid: self.grid,
            u0_hat: u,
            u1_hat: ut,
            meta,
        })
    }

    /// `∂_t^l û(ξ, t)` at every node.
    pub fn time_derivative(&self, t: f64, l: u32) -> Result<Vec<Complex64>> {
        self.derivative_spectrum(t, None, l)
    }

    /// `(iξ)^α ∂_t^l û(ξ, t)` at every node. Nyquist slots are cleared on
    /// axes where `α` is odd.
    pub fn derivative_spectrum(
        &self,
        t: f64,
        alpha: Option<&[u32]>,
        l: u32,
    ) -> Result<Vec<Complex64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid("time", format!("need t ≥ 0, got {t}")));
        }
        let l = check_l(l)?;
        if let Some(a) = alpha {
            if a.len() != self.grid.n {
                return Err(Error::invalid(
                    "alpha",
                    format!("need {} entries", self.grid.n),
                ));
            }
        }
        let grid = self.grid;
        let degree: u32 = alpha.map_or(0, |a| a.iter().sum());
        let phase = match degree % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let nyquist = -grid.xi_max();
        Ok((0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; grid.n],
                |xi, idx| {
                    let (u0, u1) = (self.u0_hat[idx], self.u1_hat[idx]);
                    if u0 == ZERO && u1 == ZERO {
                        return ZERO;
                    }
                    grid.wavevector(idx, xi);
                    let mut weight = 1.0;
                    if let Some(a) = alpha {
                        for (x, &k) in xi.iter().zip(a) {
                            if k % 2 == 1 && *x == nyquist {
                                return ZERO;
                            }
                            weight *= x.powi(k as i32);
                        }
                    }
                    let s: f64 = xi.iter().map(|x| x * x).sum();
                    let (h, g) = duhamel_multipliers(Mode::new(xi[0], s), t, l);
                    phase * weight * (u0 * h + u1 * g)
                },
            )
            .collect())
    }

    /// Write `<base>.bin` (little-endian `(re, im)` f64 pairs, row-major,
    /// `û₀` then `û₁`) and `<base>.json` (grid and metadata).
    pub fn write_snapshot(&self, base: &Path) -> Result<(PathBuf, PathBuf)> {
        let bin = base.with_extension("bin");
        let json = base.with_extension("json");
        let mut bytes = Vec::with_capacity(32 * self.grid.len());
        for v in self.u0_hat.iter().chain(&self.u1_hat) {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        fs::write(&bin, bytes)?;
        let sidecar = Sidecar {
            grid: self.grid,
            meta: self.meta.clone(),
            layout: SNAPSHOT_LAYOUT.to_string(),
        };
        let mut f = fs::File::create(&json)?;
        serde_json::to_writer_pretty(&mut f, &sidecar)?;
        f.write_all(b"\n")?;
        Ok((bin, json))
    }

    pub fn read_snapshot(base: &Path) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_slice(&fs::read(base.with_extension("json"))?)?;
        if sidecar.layout != SNAPSHOT_LAYOUT {
            return Err(Error::invalid("snapshot layout", sidecar.layout));
        }
        let bytes = fs::read(base.with_extension("bin"))?;
        let n = sidecar.grid.len();
        if bytes.len() != 32 * n {
            return Err(Error::invalid(
                "snapshot",
                format!("expected {} bytes, found {}", 32 * n, bytes.len()),
            ));
        }
        let values: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        let (a, b) = values.split_at(n);
        let mut field = Self::from_arrays(sidecar.grid, a.to_vec(), b.to_vec())?;
        field.meta = sidecar.meta;
        Ok(field)
    }
}

const SNAPSHOT_LAYOUT: &str = "row-major complex f64 (re, im) little-endian; u0_hat then u1_hat";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    grid: GridSpec,
    meta: FieldMeta,
    layout: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::build_grid;
    use crate::solver::preset::{PresetKind, Which};
    use crate::symbol::{rk4_mode_oracle, rk4_recommended_steps, FrequencyPoint};
    use std::f64::consts::PI;

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_u1_only() {
        let g = build_grid(3, 16.0, 32).unwrap();
        let p = DataPreset::new(PresetKind::GaussianPair { sigma: 0.3 }, Which::U1only).unwrap();
        let f = SpectralField::synthesize(p, g, 3.0).unwrap();
        assert!(f.u0_hat().iter().all(|v| *v == ZERO));
        assert_eq!(f.u1_hat()[0], Complex64::new(1.0, 0.0));
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn band_limit_guard() {
        let g = build_grid(3, 32.0, 16).unwrap();
        let p = DataPreset::new(PresetKind::GaussianPair { sigma: 1.0 }, Which::Both).unwrap();
        assert!(matches!(
            SpectralField::synthesize(p, g, 3.0),
            Err(Error::Guard(_))
        ));
    }

    #[test]
    fn dr_bump_nodes_lie_in_dr() {
        let g = build_grid(3, 40.0, 32).unwrap();
        let p = DataPreset::new(PresetKind::DrBump { radius: 1.0 }, Which::Both).unwrap();
        let f = SpectralField::synthesize(p, g, 3.0).unwrap();
        let mut xi = [0.0; 3];
        let mut nonzero = 0;
        for (idx, v) in f.u0_hat().iter().enumerate() {
            if *v != ZERO {
                g.wavevector(idx, &mut xi);
                let s: f64 = xi.iter().map(|x| x * x).sum();
                assert!(s <= 3.0 * xi[0].abs() || s == 0.0);
                nonzero += 1;
            }
        }
        assert!(nonzero > 10);
    }

    #[test]
    fn inverse_transform_is_real() {
        let g = build_grid(3, 12.0, 32).unwrap();
        for kind in [
            PresetKind::GaussianPair { sigma: 0.5 },
            PresetKind::DrBump { radius: 1.5 },
            PresetKind::Separable { width: 2.0 },
        ] {
            let f = SpectralField::synthesize(DataPreset::new(kind, Which::Both).unwrap(), g, 3.0)
                .unwrap();
            let phys = fft::to_physical(&g, f.u0_hat());
            let scale = phys.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
            let imag = phys.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
            assert!(imag <= 1e-12 * scale, "{kind:?}: {imag} vs {scale}");
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let g = build_grid(2, 10.0, 16).unwrap();
        let f = SpectralField::random_band_limited(g, 3.0, 1).unwrap();
        let e = f.evolve(0.0).unwrap();
        assert!(max_diff(e.u0_hat(), f.u0_hat()) <= 1e-12);
        assert!(max_diff(e.u1_hat(), f.u1_hat()) <= 1e-12);
    }

    #[test]
    fn single_mode_closed_form() {
        let g = build_grid(3, 2.0 * PI, 8).unwrap();
        let mut u1 = vec![ZERO; g.len()];
        // ξ = (0, 1, 0): row-major index (0, 1, 0)
        u1[8] = Complex64::new(1.0, 0.0);
        let f = SpectralField::from_arrays(g, vec![ZERO; g.len()], u1).unwrap();
        for t in [0.5, 2.0, 7.0] {
            let e = f.evolve(t).unwrap();
            assert!((e.u0_hat()[8].re - (1.0 - (-t).exp())).abs() < 1e-14);
            assert!((e.u1_hat()[8].re - (-t).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn evolve_matches_rk4_per_node() {
        let g = build_grid(2, 6.0, 8).unwrap();
        let f = SpectralField::random_band_limited(g, 10.0, 3).unwrap();
        let t = 2.0;
        let e = f.evolve(t).unwrap();
        let mut xi = [0.0; 2];
        for idx in 0..g.len() {
            g.wavevector(idx, &mut xi);
            let p = FrequencyPoint::new(xi.to_vec()).unwrap();
            let steps = 4 * rk4_recommended_steps(&p, t);
            let (gg, gt) = rk4_mode_oracle(&p, t, steps).unwrap();
            // û = (Ĝ_t + |ξ|²Ĝ)û₀ + Ĝû₁ and û_t = −ξ₁²Ĝû₀ + Ĝ_tû₁
            let s = p.norm_sq();
            let u = f.u0_hat()[idx] * (gt + s * gg) + f.u1_hat()[idx] * gg;
            let ut = f.u0_hat()[idx] * (-xi[0] * xi[0] * gg) + f.u1_hat()[idx] * gt;
            let scale = 1.0 + f.u0_hat()[idx].norm() + f.u1_hat()[idx].norm();
            assert!((u - e.u0_hat()[idx]).norm() <= 1e-6 * scale);
            assert!((ut - e.u1_hat()[idx]).norm() <= 1e-6 * scale);
        }
    }

    #[test]
    fn evolution_is_a_semigroup() {
        let g = build_grid(3, 12.0, 8).unwrap();
        let f = SpectralField::random_band_limited(g, 10.0, 8).unwrap();
        let once = f.evolve(1.7).unwrap();
        let twice = f.evolve(0.6).unwrap().evolve(1.1).unwrap();
        let scale = once.u0_hat().iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_diff(once.u0_hat(), twice.u0_hat()) < 1e-12 * scale);
        assert!(max_diff(once.u1_hat(), twice.u1_hat()) < 1e-12 * scale);
        assert!((twice.meta().time - 1.7).abs() < 1e-15);
    }

    #[test]
    fn derivative_spectrum_of_even_data_is_odd() {
        let g = build_grid(3, 8.0, 16).unwrap();
        let p = DataPreset::new(PresetKind::GaussianPair { sigma: 0.4 }, Which::Both).unwrap();
        let f = SpectralField::synthesize(p, g, 3.0).unwrap();
        let d = f.derivative_spectrum(1.0, Some(&[1, 0, 0]), 0).unwrap();
        let phys = fft::to_physical(&g, &d);
        // u(−x) = −u(x) on the torus: index j ↦ (N − j) mod N per axis
        for idx in 0..g.len() {
            let m = g.mirror(idx);
            assert!((phys[idx].re + phys[m].re).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = build_grid(2, 9.0, 8).unwrap();
        let p = DataPreset::new(PresetKind::DrBump { radius: 1.0 }, Which::U0only).unwrap();
        let f = SpectralField::synthesize(p, build_grid(2, 30.0, 16).unwrap(), 3.0).unwrap();
        let base = dir.path().join("field");
        let (bin, _) = f.write_snapshot(&base).unwrap();
        assert_eq!(std::fs::metadata(bin).unwrap().len(), 32 * 256);
        assert_eq!(SpectralField::read_snapshot(&base).unwrap(), f);
        let r = SpectralField::random_band_limited(g, 2.0, 4).unwrap();
        r.write_snapshot(&base).unwrap();
        assert_eq!(SpectralField::read_snapshot(&base).unwrap(), r);
    }

    #[test]
    fn rejects_bad_arrays() {
        let g = build_grid(1, 1.0, 4).unwrap();
        assert!(SpectralField::from_arrays(g, vec![ZERO; 3], vec![ZERO; 4]).is_err());
        let mut bad = vec![ZERO; 4];
        bad[1] = Complex64::new(f64::NAN, 0.0);
        assert!(SpectralField::from_arrays(g, bad, vec![ZERO; 4]).is_err());
    }
}
