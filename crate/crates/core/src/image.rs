use crate::error::{Error, Result};

/// Row-major `height x width x channels` float image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}x{channels}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::invalid("image dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width}x{channels} image needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0 && channels > 0);
        Image {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(height * width * channels);
        for i in 0..height {
            for j in 0..width {
                for c in 0..channels {
                    data.push(f(i, j, c));
                }
            }
        }
        Image {
            height,
            width,
            channels,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, c: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, c: usize, value: f64) {
        self.data[(row * self.width + col) * self.channels + c] = value;
    }

    /// Channel values of pixel `(row, col)`.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    /// 2x2 box-filter downsampling. An odd trailing row or column is dropped.
    pub fn downsample(&self) -> Result<Image> {
        let (h, w) = (self.height / 2, self.width / 2);
        if h == 0 || w == 0 {
            return Err(Error::invalid(format!(
                "cannot downsample {}x{} image",
                self.height, self.width
            )));
        }
        let c = self.channels;
        Ok(Image::from_fn(h, w, c, |i, j, ch| {
            let (r, s) = (2 * i, 2 * j);
            0.25 * (self.get(r, s, ch)
                + self.get(r, s + 1, ch)
                + self.get(r + 1, s, ch)
                + self.get(r + 1, s + 1, ch))
        }))
    }
}

/// Adjoint of [`Image::downsample`] for a single-channel `h x w` grid: spreads
/// each coarse gradient over its 2x2 block with weight 1/4.
pub fn downsample_adjoint(coarse: &[f64], fine_h: usize, fine_w: usize) -> Vec<f64> {
    let (h, w) = (fine_h / 2, fine_w / 2);
    debug_assert_eq!(coarse.len(), h * w);
    let mut fine = vec![0.0; fine_h * fine_w];
    for i in 0..h {
        for j in 0..w {
            let g = 0.25 * coarse[i * w + j];
            let (r, s) = (2 * i, 2 * j);
            fine[r * fine_w + s] += g;
            fine[r * fine_w + s + 1] += g;
            fine[(r + 1) * fine_w + s] += g;
            fine[(r + 1) * fine_w + s + 1] += g;
        }
    }
    fine
}
