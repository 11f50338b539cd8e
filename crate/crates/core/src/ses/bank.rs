use std::sync::Arc;

use crate::basis::SteerableBasis;
use crate::error::{Error, Result};
use crate::tensor::Grid;

/// Trainable weights `[O, C, B]` combined with a shared multi-scale basis into
/// per-scale kernels `[S, O, C, k, k]`.
#[derive(Debug, Clone)]
pub struct SesFilterBank {
    weights: Grid,
    basis: Arc<SteerableBasis>,
    kernels: Grid,
    per_scale: Vec<Grid>,
}

impl SesFilterBank {
    pub fn combine(weights: Grid, basis: Arc<SteerableBasis>) -> Result<Self> {
        if weights.rank() != 3 {
            return Err(Error::ShapeMismatch {
                context: "combine weights",
                dim: "rank",
                expected: 3,
                actual: weights.rank(),
            });
        }
        let (o, c, b) = (weights.shape()[0], weights.shape()[1], weights.shape()[2]);
        if b != basis.num_members() {
            return Err(Error::ShapeMismatch {
                context: "combine",
                dim: "basis members",
                expected: basis.num_members(),
                actual: b,
            });
        }
        let k = basis.k();
        let kk = k * k;
        let filters = basis.filters();
        let mut per_scale = Vec::with_capacity(basis.num_scales());
        for s in 0..basis.num_scales() {
            let members = filters.slice(s);
            let mut data = vec![0.0; o * c * kk];
            for (oc, kernel) in data.chunks_exact_mut(kk).enumerate() {
                let w = &weights.data()[oc * b..(oc + 1) * b];
                for (bi, &wb) in w.iter().enumerate() {
                    let f = &members[bi * kk..(bi + 1) * kk];
                    for (acc, &fv) in kernel.iter_mut().zip(f) {
                        *acc += wb * fv;
                    }
                }
            }
            per_scale.push(Grid::new(&[o, c, k, k], data)?);
        }
        let kernels = Grid::stack(&per_scale)?;
        Ok(Self {
            weights,
            basis,
            kernels,
            per_scale,
        })
    }

    pub fn weights(&self) -> &Grid {
        &self.weights
    }

    pub fn basis(&self) -> &Arc<SteerableBasis> {
        &self.basis
    }

    /// All synthesized kernels, `[S, O, C, k, k]`.
    pub fn kernels(&self) -> &Grid {
        &self.kernels
    }

    /// Kernels of scale index `s`, `[O, C, k, k]`.
    pub fn kernels_at(&self, s: usize) -> &Grid {
        &self.per_scale[s]
    }

    pub fn num_scales(&self) -> usize {
        self.per_scale.len()
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    /// Number of trainable weights. Does not depend on the number of scales.
    pub fn param_count(&self) -> usize {
        self.weights.len()
    }
}
