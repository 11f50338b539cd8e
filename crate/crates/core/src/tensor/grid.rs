use crate::error::{Error, Result};

/// Dense row-major `f64` array of rank 2 to 5.
///
/// Used for images `[H, W]`, feature maps `[C, H, W]`, kernels `[O, C, k, k]`,
/// scale-stacked maps `[S, C, H, W]` and per-scale kernel banks `[S, O, C, k, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    data: Vec<f64>,
}

pub const MIN_RANK: usize = 2;
pub const MAX_RANK: usize = 5;

fn check_shape(shape: &[usize]) -> Result<usize> {
    if !(MIN_RANK..=MAX_RANK).contains(&shape.len()) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: format!("rank must be in {MIN_RANK}..={MAX_RANK}"),
        });
    }
    if shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "all extents must be >= 1".into(),
        });
    }
    Ok(shape.iter().product())
}

impl Grid {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let len = check_shape(shape)?;
        if data.len() != len {
            return Err(Error::ShapeMismatch {
                context: "Grid::new",
                dim: "data length",
                expected: len,
                actual: data.len(),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Zero-filled grid. Panics on an invalid shape; use [`Grid::new`] for
    /// untrusted shapes.
    pub fn zeros(shape: &[usize]) -> Self {
        let len = check_shape(shape).expect("invalid grid shape");
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let mut g = Self::zeros(shape);
        g.data.fill(value);
        g
    }

    pub fn from_fn2(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                data.push(f(y, x));
            }
        }
        Self::new(&[height, width], data).expect("invalid grid shape")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
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

    /// Height and width of a rank-2 grid, or of the trailing two axes otherwise.
    pub fn hw(&self) -> (usize, usize) {
        let r = self.rank();
        (self.shape[r - 2], self.shape[r - 1])
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.rank(), "index rank mismatch");
        let mut off = 0;
        for (&i, &e) in index.iter().zip(&self.shape) {
            assert!(i < e, "index {index:?} out of bounds for shape {:?}", self.shape);
            off = off * e + i;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let off = self.offset(index);
        self.data[off] = value;
    }

    /// Pixel of a rank-2 grid at row `y`, column `x`.
    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f64 {
        debug_assert_eq!(self.rank(), 2);
        self.data[y * self.shape[1] + x]
    }

    /// Number of elements in one slice along the leading axis.
    pub fn slice_len(&self) -> usize {
        self.shape[1..].iter().product()
    }

    /// Contiguous data of slice `i` along the leading axis.
    pub fn slice(&self, i: usize) -> &[f64] {
        let n = self.slice_len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn slice_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.slice_len();
        &mut self.data[i * n..(i + 1) * n]
    }

    /// Slice `i` along the leading axis as an owned grid of rank `r - 1`.
    pub fn sub(&self, i: usize) -> Grid {
        assert!(self.rank() > MIN_RANK, "cannot take a sub-grid of a rank-2 grid");
        Grid {
            shape: self.shape[1..].to_vec(),
            data: self.slice(i).to_vec(),
        }
    }

    /// Stack equally-shaped grids along a new leading axis.
    pub fn stack(parts: &[Grid]) -> Result<Grid> {
        let first = parts.first().ok_or_else(|| Error::invalid("parts", "cannot stack zero grids"))?;
        let mut shape = vec![parts.len()];
        shape.extend_from_slice(first.shape());
        let mut data = Vec::with_capacity(first.len() * parts.len());
        for p in parts {
            if p.shape() != first.shape() {
                return Err(Error::InvalidShape {
                    shape: p.shape().to_vec(),
                    reason: format!("stack expects every part shaped {:?}", first.shape()),
                });
            }
            data.extend_from_slice(p.data());
        }
        Grid::new(&shape, data)
    }

    pub fn reshape(self, shape: &[usize]) -> Result<Grid> {
        Grid::new(shape, self.data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Grid {
        self.map(|v| v * c)
    }

    /// Elementwise `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Grid, b: f64) -> Result<Grid> {
        self.require_same_shape(other, "Grid::lin_comb")?;
        Ok(Grid {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn require_same_shape(&self, other: &Grid, context: &'static str) -> Result<()> {
        if self.rank() != other.rank() {
            return Err(Error::ShapeMismatch {
                context,
                dim: "rank",
                expected: self.rank(),
                actual: other.rank(),
            });
        }
        for (axis, (&a, &b)) in self.shape.iter().zip(other.shape()).enumerate() {
            if a != b {
                return Err(Error::ShapeMismatch {
                    context,
                    dim: AXIS_NAMES[axis.min(AXIS_NAMES.len() - 1)],
                    expected: a,
                    actual: b,
                });
            }
        }
        Ok(())
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sum_sq().sqrt()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Grid) -> f64 {
        assert_eq!(self.shape, other.shape, "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Bitwise equality, distinguishing `-0.0` from `0.0` and comparing NaNs by payload.
    pub fn bit_eq(&self, other: &Grid) -> bool {
        self.shape == other.shape
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

const AXIS_NAMES: [&str; 5] = ["axis 0", "axis 1", "axis 2", "axis 3", "axis 4"];
