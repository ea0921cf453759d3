//! Periodic-box fields, their discrete transforms and on-disk formats.

use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::radial::fmt17;

const MAGIC: &[u8; 4] = b"MLF1";

/// Uniform grid on the centred box [−L/2, L/2)^d with n points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub d: u32,
    pub n: usize,
    pub box_length: f64,
}

impl BoxGrid {
    pub fn new(d: u32, n: usize, box_length: f64) -> Result<Self> {
        let g = BoxGrid { d, n, box_length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(invalid(format!("field dimension must be 1, 2 or 3, got {}", self.d)));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(invalid(format!("points per axis must be a power of two, got {}", self.n)));
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(invalid("box length must be positive"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of grid index i along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    /// Signed frequency index of FFT slot k.
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Multi-index of a row-major flat index.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.d as usize).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    /// |x| at a flat index.
    pub fn radius(&self, flat: usize) -> f64 {
        let idx = self.unflatten(flat);
        (0..self.d as usize)
            .map(|a| self.coordinate(idx[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Point coordinates at a flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        (0..self.d as usize).map(|a| self.coordinate(idx[a])).collect()
    }

    /// Squared integer wavenumber |k|² at a flat FFT index; |ξ| = |k|/L.
    pub fn wavenumber_sq(&self, flat: usize) -> i64 {
        let idx = self.unflatten(flat);
        (0..self.d as usize).map(|a| self.wavenumber(idx[a]).pow(2)).sum()
    }

    pub fn frequency(&self, flat: usize) -> f64 {
        (self.wavenumber_sq(flat) as f64).sqrt() / self.box_length
    }
}

/// Complex samples of a field on a [`BoxGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: BoxGrid,
    pub values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: BoxGrid, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field values must be finite".into()));
        }
        Ok(SpectralField { grid, values })
    }

    pub fn zeros(grid: BoxGrid) -> Self {
        SpectralField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn sample<F: Fn(&[f64]) -> Complex64>(grid: BoxGrid, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        SpectralField::new(grid, values)
    }

    pub fn d(&self) -> u32 {
        self.grid.d
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete L^p norm: (Σ|u|^p h^d)^{1/p}; p = ∞ gives the maximum.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_inf();
        }
        let cell = self.grid.spacing().powi(self.grid.d as i32);
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * cell).powf(1.0 / p)
    }

    /// Largest |u| on the outer 5% layer of the box divided by the global maximum.
    pub fn boundary_fraction(&self) -> f64 {
        let max = self.norm_inf();
        if max == 0.0 {
            return 0.0;
        }
        let edge = 0.45 * self.grid.box_length;
        let mut worst: f64 = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let idx = self.grid.unflatten(i);
            let outer = (0..self.grid.d as usize).any(|a| self.grid.coordinate(idx[a]).abs() >= edge);
            if outer {
                worst = worst.max(v.norm());
            }
        }
        worst / max
    }

    /// Errors with "domain too small" when the field reaches the box boundary.
    pub fn check_box(&self, tolerance: f64) -> Result<()> {
        let frac = self.boundary_fraction();
        if frac > tolerance {
            return Err(Error::DomainTooSmall(format!(
                "field is {frac:.3e} of its maximum on the boundary layer of a box of side {}",
                self.grid.box_length
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header: Vec<String> = (0..self.grid.d).map(|a| format!("i{a}")).collect();
        header.push("re".into());
        header.push("im".into());
        w.write_record(&header).map_err(io)?;
        for (i, v) in self.values.iter().enumerate() {
            let idx = self.grid.unflatten(i);
            let mut row: Vec<String> = (0..self.grid.d as usize).map(|a| idx[a].to_string()).collect();
            row.push(fmt17(v.re));
            row.push(fmt17(v.im));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(Error::Io)
    }

    /// Header `MLF1`, u32 d, u32 n, f64 box length, then interleaved little-endian re/im.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&self.grid.d.to_le_bytes())?;
        out.write_all(&(self.grid.n as u32).to_le_bytes())?;
        out.write_all(&self.grid.box_length.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("missing MLF1 magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b4)?;
        let d = u32::from_le_bytes(b4);
        input.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        input.read_exact(&mut b8)?;
        let box_length = f64::from_le_bytes(b8);
        let grid = BoxGrid::new(d, n, box_length).map_err(|e| Error::Parse(e.to_string()))?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            input.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            input.read_exact(&mut b8)?;
            values.push(Complex64::new(re, f64::from_le_bytes(b8)));
        }
        SpectralField::new(grid, values)
    }
}

/// In-place d-dimensional FFT along every axis; `inverse` also divides by n^d.
pub fn fft_nd(grid: &BoxGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let d = grid.d as usize;
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[start + k * stride] = *v;
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(BoxGrid::new(1, 100, 1.0).is_err());
        assert!(BoxGrid::new(4, 8, 1.0).is_err());
        assert!(BoxGrid::new(2, 8, -1.0).is_err());
        let g = BoxGrid::new(2, 8, 4.0).unwrap();
        assert_eq!(g.coordinate(4), 0.0);
        assert_eq!(g.wavenumber(5), -3);
        assert_eq!(g.unflatten(13), [1, 5, 0]);
    }

    #[test]
    fn fft_round_trip_and_mode() {
        let g = BoxGrid::new(2, 16, 2.0).unwrap();
        let f = SpectralField::sample(g, |x| Complex64::new((-x[0] * x[0] - 2.0 * x[1] * x[1]).exp(), x[0])).unwrap();
        let mut data = f.values.clone();
        fft_nd(&g, &mut data, false);
        fft_nd(&g, &mut data, true);
        let err = data.iter().zip(&f.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-14);
        // a single Fourier mode lands in one slot
        let m = SpectralField::sample(g, |x| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 3.0 * x[1] / 2.0)).unwrap();
        let mut data = m.values.clone();
        fft_nd(&g, &mut data, false);
        let peak = data.iter().enumerate().max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap()).unwrap();
        assert_eq!(g.wavenumber_sq(peak.0), 9);
    }

    #[test]
    fn binary_round_trip() {
        let g = BoxGrid::new(1, 8, 3.0).unwrap();
        let f = SpectralField::sample(g, |x| Complex64::new(x[0].sin(), 1.0 / 3.0)).unwrap();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"MLF1");
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 16 * 8);
        assert_eq!(SpectralField::read_binary(&buf[..]).unwrap(), f);
        assert!(SpectralField::read_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn norms_of_gaussian() {
        let g = BoxGrid::new(1, 256, 20.0).unwrap();
        let f = SpectralField::sample(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0)).unwrap();
        assert!((f.norm(1.0) - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((f.norm(f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!(f.check_box(1e-6).is_ok());
        let wide = SpectralField::sample(g, |x| Complex64::new((-x[0] * x[0] / 50.0).exp(), 0.0)).unwrap();
        assert!(matches!(wide.check_box(1e-6), Err(Error::DomainTooSmall(_))));
    }
}
