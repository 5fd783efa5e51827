//! Symmetric block-sparse matrices and a block Cholesky factorization.
//!
//! Storage is by block column, lower triangle only. Factorization is
//! right-looking and creates fill-in blocks on demand; with the natural
//! time ordering used by the estimator the fill stays inside the band.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[derive(Clone)]
pub(crate) struct BlockSparseSym {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    cols: Vec<BTreeMap<usize, DMatrix<f64>>>,
}

impl BlockSparseSym {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let cols = vec![BTreeMap::new(); dims.len()];
        BlockSparseSym {
            dims,
            offsets,
            cols,
        }
    }

    /// Accumulates `m` into block `(i, j)`; symmetric entries are folded
    /// into the lower triangle.
    pub fn add_block(&mut self, i: usize, j: usize, m: &DMatrix<f64>) {
        let (r, c, target) = if i >= j { (i, j, None) } else { (j, i, Some(())) };
        let entry = self.cols[c]
            .entry(r)
            .or_insert_with(|| DMatrix::zeros(self.dims[r], self.dims[c]));
        match target {
            None => *entry += m,
            Some(()) => *entry += m.transpose(),
        }
    }

    /// Returns a damped copy `H + lambda * clamp(diag(H))`.
    pub fn damped(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        if lambda == 0.0 {
            return out;
        }
        for j in 0..out.dims.len() {
            let dim = out.dims[j];
            let entry = out.cols[j]
                .entry(j)
                .or_insert_with(|| DMatrix::zeros(dim, dim));
            for k in 0..dim {
                let d = entry[(k, k)].clamp(1e-6, 1e32);
                entry[(k, k)] += lambda * d;
            }
        }
        out
    }

    /// Block Cholesky `H = L L^T`; `None` if any pivot block fails.
    pub fn factorize(mut self) -> Option<BlockCholeskyFactor> {
        let b = self.dims.len();
        let mut pivots: Vec<Option<Cholesky<f64, Dyn>>> = vec![None; b];
        for j in 0..b {
            let diag = self.cols[j].remove(&j)?;
            let chol = Cholesky::new(diag)?;
            let below: Vec<usize> = self.cols[j].keys().cloned().collect();
            // L_ij = A_ij L_jj^{-T}
            for &i in &below {
                let a = self.cols[j].remove(&i).unwrap();
                let solved = chol.l_dirty().solve_lower_triangular(&a.transpose())?;
                self.cols[j].insert(i, solved.transpose());
            }
            // Trailing update: A_{i1,i2} -= L_{i1,j} L_{i2,j}^T for i1 >= i2.
            for (a, &i1) in below.iter().enumerate() {
                let l1 = self.cols[j].get(&i1).unwrap().clone();
                for &i2 in below.iter().take(a + 1) {
                    let l2 = self.cols[j].get(&i2).unwrap();
                    let update = &l1 * l2.transpose();
                    let entry = self.cols[i2]
                        .entry(i1)
                        .or_insert_with(|| DMatrix::zeros(self.dims[i1], self.dims[i2]));
                    *entry -= update;
                }
            }
            pivots[j] = Some(chol);
        }
        Some(BlockCholeskyFactor {
            dims: self.dims,
            offsets: self.offsets,
            cols: self.cols,
            pivots: pivots.into_iter().map(|p| p.unwrap()).collect(),
        })
    }
}

pub(crate) struct BlockCholeskyFactor {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    cols: Vec<BTreeMap<usize, DMatrix<f64>>>,
    pivots: Vec<Cholesky<f64, Dyn>>,
}

impl BlockCholeskyFactor {
    /// Solves `L L^T x = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let b = self.dims.len();
        let mut work = rhs.clone();
        // Forward: y = L^{-1} rhs, pushing updates right.
        for j in 0..b {
            let (off, dim) = (self.offsets[j], self.dims[j]);
            let yj = self.pivots[j]
                .l_dirty()
                .solve_lower_triangular(&work.rows(off, dim).into_owned())
                .expect("pivot blocks are nonsingular");
            work.rows_mut(off, dim).copy_from(&yj);
            for (&i, l) in &self.cols[j] {
                let update = l * &yj;
                let mut seg = work.rows_mut(self.offsets[i], self.dims[i]);
                seg -= update;
            }
        }
        // Backward: x = L^{-T} y.
        for j in (0..b).rev() {
            let (off, dim) = (self.offsets[j], self.dims[j]);
            let mut acc = work.rows(off, dim).into_owned();
            for (&i, l) in &self.cols[j] {
                acc -= l.transpose() * work.rows(self.offsets[i], self.dims[i]).into_owned();
            }
            let xj = self.pivots[j]
                .l_dirty()
                .transpose()
                .solve_upper_triangular(&acc)
                .expect("pivot blocks are nonsingular");
            work.rows_mut(off, dim).copy_from(&xj);
        }
        work
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_spd_block_matrix(
        rng: &mut StdRng,
        dims: &[usize],
        band: usize,
    ) -> (BlockSparseSym, DMatrix<f64>) {
        let total: usize = dims.iter().sum();
        let mut offsets = vec![0];
        for &d in dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut dense = DMatrix::zeros(total, total);
        let mut sparse = BlockSparseSym::new(dims.to_vec());
        for j in 0..dims.len() {
            for i in j..(j + band + 1).min(dims.len()) {
                let m = DMatrix::from_fn(dims[i], dims[j], |_, _| rng.gen_range(-1.0..1.0));
                dense
                    .view_mut((offsets[i], offsets[j]), (dims[i], dims[j]))
                    .copy_from(&m);
                dense
                    .view_mut((offsets[j], offsets[i]), (dims[j], dims[i]))
                    .copy_from(&m.transpose());
                if i == j {
                    let spd = &m * m.transpose() + DMatrix::identity(dims[i], dims[i]) * 8.0;
                    dense
                        .view_mut((offsets[i], offsets[j]), (dims[i], dims[j]))
                        .copy_from(&spd);
                    sparse.add_block(i, j, &spd);
                } else {
                    sparse.add_block(i, j, &m);
                }
            }
        }
        (sparse, dense)
    }

    #[test]
    fn solves_match_dense_cholesky() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let nblocks = rng.gen_range(2..8);
            let dims: Vec<usize> = (0..nblocks).map(|_| rng.gen_range(1..5)).collect();
            let band = rng.gen_range(1..3);
            let (sparse, dense) = random_spd_block_matrix(&mut rng, &dims, band);
            let total = dense.nrows();
            let rhs = DVector::from_fn(total, |_, _| rng.gen_range(-1.0..1.0));
            let x_sparse = sparse.factorize().unwrap().solve(&rhs);
            let x_dense = dense.cholesky().unwrap().solve(&rhs);
            assert_relative_eq!(x_sparse, x_dense, epsilon = 1e-9);
        }
    }

    #[test]
    fn indefinite_matrix_fails_to_factorize() {
        let mut m = BlockSparseSym::new(vec![2, 2]);
        m.add_block(0, 0, &DMatrix::identity(2, 2));
        m.add_block(1, 1, &(-DMatrix::<f64>::identity(2, 2)));
        assert!(m.factorize().is_none());
    }

    #[test]
    fn missing_diagonal_block_fails() {
        let mut m = BlockSparseSym::new(vec![2, 2]);
        m.add_block(0, 0, &DMatrix::identity(2, 2));
        m.add_block(1, 0, &DMatrix::from_element(2, 2, 0.1));
        assert!(m.factorize().is_none());
    }

    #[test]
    fn damping_regularizes_a_singular_matrix() {
        let mut m = BlockSparseSym::new(vec![2]);
        m.add_block(0, 0, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(m.clone().factorize().is_none());
        assert!(m.damped(1e-4).factorize().is_some());
    }

    #[test]
    fn symmetric_entries_fold_into_lower_triangle() {
        let mut m = BlockSparseSym::new(vec![1, 1]);
        m.add_block(0, 0, &DMatrix::from_element(1, 1, 4.0));
        m.add_block(1, 1, &DMatrix::from_element(1, 1, 4.0));
        m.add_block(0, 1, &DMatrix::from_element(1, 1, 1.0));
        let rhs = DVector::from_column_slice(&[5.0, 5.0]);
        let x = m.factorize().unwrap().solve(&rhs);
        assert_relative_eq!(x, DVector::from_column_slice(&[1.0, 1.0]), epsilon = 1e-12);
    }
}
