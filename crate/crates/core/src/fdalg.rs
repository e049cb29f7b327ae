//! Plain finite-dimensional block algebras: direct sums of full matrix
//! algebras, their elements, and multiplicity morphisms between them.
//!
//! Elements are stored block by block. The flattened coordinate order (blocks
//! in sequence, each block row-major) is the ambient convention shared with
//! the discretization layer, so a linear map produced here can be consumed
//! there without reindexing.

use crate::linalg::{self, CMat, CVec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FdError {
    #[error("block sizes must be at least 1")]
    ZeroBlockSize,
    #[error("element has {found} blocks, shape has {expected}")]
    BlockCountMismatch { found: usize, expected: usize },
    #[error("block {index} is {rows}x{cols}, expected {size}x{size}")]
    BlockSizeMismatch { index: usize, rows: usize, cols: usize, size: u32 },
    #[error("multiplicity matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    MultiplicityShape { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("target block {block} of size {have} cannot hold {needed} embedded rows")]
    Overflow { block: usize, needed: u32, have: u32 },
    #[error("unitary {index} is {rows}x{cols}, expected {size}x{size}")]
    UnitaryShape { index: usize, rows: usize, cols: usize, size: u32 },
    #[error("unitary {index} deviates from unitarity by {residual:.3e}")]
    NotUnitary { index: usize, residual: f64 },
    #[error("cannot compose: source shape {outer:?} differs from target shape {inner:?}")]
    ComposeShape { outer: Vec<u32>, inner: Vec<u32> },
    #[error("cannot kill block {index}; shape has {count} blocks")]
    BadBlockIndex { index: usize, count: usize },
    #[error("vector has length {found}, ambient dimension is {expected}")]
    AmbientMismatch { found: usize, expected: usize },
}

/// Shape of a finite-dimensional block algebra: the list of block sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub sizes: Vec<u32>,
}

impl BlockShape {
    pub fn new(sizes: Vec<u32>) -> Result<Self, FdError> {
        if sizes.iter().any(|&s| s == 0) {
            return Err(FdError::ZeroBlockSize);
        }
        Ok(BlockShape { sizes })
    }

    /// Linear dimension: sum of squared block sizes.
    pub fn ambient_dim(&self) -> usize {
        self.sizes.iter().map(|&s| (s as usize) * (s as usize)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn identity(&self) -> Element {
        Element {
            blocks: self.sizes.iter().map(|&s| CMat::identity(s as usize, s as usize)).collect(),
        }
    }

    pub fn zero(&self) -> Element {
        Element {
            blocks: self.sizes.iter().map(|&s| CMat::zeros(s as usize, s as usize)).collect(),
        }
    }

    /// Matrix unit: 1 in entry (r, c) of the given block, 0 elsewhere.
    pub fn matrix_unit(&self, block: usize, r: usize, c: usize) -> Element {
        let mut e = self.zero();
        e.blocks[block][(r, c)] = linalg::cone();
        e
    }

    /// Offset of a block in the flattened coordinate order.
    pub fn block_offset(&self, block: usize) -> usize {
        self.sizes[..block].iter().map(|&s| (s as usize) * (s as usize)).sum()
    }

    pub fn check(&self, e: &Element) -> Result<(), FdError> {
        if e.blocks.len() != self.sizes.len() {
            return Err(FdError::BlockCountMismatch {
                found: e.blocks.len(),
                expected: self.sizes.len(),
            });
        }
        for (i, (b, &s)) in e.blocks.iter().zip(&self.sizes).enumerate() {
            if b.nrows() != s as usize || b.ncols() != s as usize {
                return Err(FdError::BlockSizeMismatch {
                    index: i,
                    rows: b.nrows(),
                    cols: b.ncols(),
                    size: s,
                });
            }
        }
        Ok(())
    }
}

/// Element of a block algebra: one square matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub blocks: Vec<CMat>,
}

impl Element {
    pub fn add(&self, other: &Element) -> Element {
        Element {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn mul(&self, other: &Element) -> Element {
        Element {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn adjoint(&self) -> Element {
        Element { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Element {
        Element { blocks: self.blocks.iter().map(|b| b * c).collect() }
    }

    /// C*-norm: the largest operator norm over the blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    pub fn flatten(&self) -> CVec {
        let total: usize = self.blocks.iter().map(|b| b.len()).sum();
        let mut v = CVec::zeros(total);
        let mut at = 0;
        for b in &self.blocks {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    v[at] = b[(r, c)];
                    at += 1;
                }
            }
        }
        v
    }

    pub fn unflatten(shape: &BlockShape, v: &CVec) -> Result<Element, FdError> {
        if v.len() != shape.ambient_dim() {
            return Err(FdError::AmbientMismatch { found: v.len(), expected: shape.ambient_dim() });
        }
        let mut blocks = Vec::with_capacity(shape.sizes.len());
        let mut at = 0;
        for &s in &shape.sizes {
            let s = s as usize;
            let mut b = CMat::zeros(s, s);
            for r in 0..s {
                for c in 0..s {
                    b[(r, c)] = v[at];
                    at += 1;
                }
            }
            blocks.push(b);
        }
        Ok(Element { blocks })
    }
}

/// Morphism between block algebras given by a multiplicity matrix and an
/// optional unitary per target block. Source block `i` appears
/// `mult[j][i]` times along the diagonal of target block `j`, zero-padded,
/// then conjugated by the block's unitary when present.
#[derive(Debug, Clone)]
pub struct MultiplicityMorphism {
    pub src: BlockShape,
    pub dst: BlockShape,
    pub mult: Vec<Vec<u32>>,
    pub unitaries: Option<Vec<CMat>>,
}

impl MultiplicityMorphism {
    pub fn new(
        src: BlockShape,
        dst: BlockShape,
        mult: Vec<Vec<u32>>,
        unitaries: Option<Vec<CMat>>,
    ) -> Result<Self, FdError> {
        if mult.len() != dst.sizes.len() || mult.iter().any(|row| row.len() != src.sizes.len()) {
            return Err(FdError::MultiplicityShape {
                rows: mult.len(),
                cols: mult.first().map_or(0, |r| r.len()),
                expected_rows: dst.sizes.len(),
                expected_cols: src.sizes.len(),
            });
        }
        for (j, row) in mult.iter().enumerate() {
            let needed: u32 = row.iter().zip(&src.sizes).map(|(m, n)| m * n).sum();
            if needed > dst.sizes[j] {
                return Err(FdError::Overflow { block: j, needed, have: dst.sizes[j] });
            }
        }
        if let Some(us) = &unitaries {
            if us.len() != dst.sizes.len() {
                return Err(FdError::MultiplicityShape {
                    rows: us.len(),
                    cols: 0,
                    expected_rows: dst.sizes.len(),
                    expected_cols: 0,
                });
            }
            for (j, u) in us.iter().enumerate() {
                let s = dst.sizes[j] as usize;
                if u.nrows() != s || u.ncols() != s {
                    return Err(FdError::UnitaryShape {
                        index: j,
                        rows: u.nrows(),
                        cols: u.ncols(),
                        size: dst.sizes[j],
                    });
                }
                let res = linalg::unitary_residual(u);
                if res > 1e-10 {
                    return Err(FdError::NotUnitary { index: j, residual: res });
                }
            }
        }
        Ok(MultiplicityMorphism { src, dst, mult, unitaries })
    }

    pub fn standard(src: BlockShape, dst: BlockShape, mult: Vec<Vec<u32>>) -> Result<Self, FdError> {
        MultiplicityMorphism::new(src, dst, mult, None)
    }

    pub fn identity(shape: BlockShape) -> Self {
        let n = shape.sizes.len();
        let mut mult = vec![vec![0; n]; n];
        for (i, row) in mult.iter_mut().enumerate() {
            row[i] = 1;
        }
        MultiplicityMorphism { src: shape.clone(), dst: shape, mult, unitaries: None }
    }

    pub fn zero(src: BlockShape, dst: BlockShape) -> Self {
        let mult = vec![vec![0; src.sizes.len()]; dst.sizes.len()];
        MultiplicityMorphism { src, dst, mult, unitaries: None }
    }

    /// Unital exactly when the embedded copies fill every target block.
    pub fn is_unital(&self) -> bool {
        self.mult.iter().zip(&self.dst.sizes).all(|(row, &m)| {
            let used: u32 = row.iter().zip(&self.src.sizes).map(|(c, n)| c * n).sum();
            used == m
        })
    }

    /// Injective exactly when every source block lands somewhere.
    pub fn is_injective(&self) -> bool {
        (0..self.src.sizes.len()).all(|i| self.mult.iter().any(|row| row[i] > 0))
    }

    pub fn apply(&self, x: &Element) -> Result<Element, FdError> {
        self.src.check(x)?;
        let mut out = self.dst.zero();
        for (j, row) in self.mult.iter().enumerate() {
            let mut at = 0usize;
            for (i, &copies) in row.iter().enumerate() {
                let n = self.src.sizes[i] as usize;
                for _ in 0..copies {
                    for r in 0..n {
                        for c in 0..n {
                            out.blocks[j][(at + r, at + c)] = x.blocks[i][(r, c)];
                        }
                    }
                    at += n;
                }
            }
            if let Some(us) = &self.unitaries {
                out.blocks[j] = &us[j] * &out.blocks[j] * us[j].adjoint();
            }
        }
        Ok(out)
    }

    /// Matrix of the morphism on flattened coordinates.
    pub fn linear_matrix(&self) -> CMat {
        let d_src = self.src.ambient_dim();
        let d_dst = self.dst.ambient_dim();
        let mut m = CMat::zeros(d_dst, d_src);
        let mut col = 0;
        for (i, &s) in self.src.sizes.iter().enumerate() {
            for r in 0..s as usize {
                for c in 0..s as usize {
                    let e = self.src.matrix_unit(i, r, c);
                    let out = self.apply(&e).expect("shape checked in constructor");
                    m.set_column(col, &out.flatten());
                    col += 1;
                }
            }
        }
        m
    }

    /// Composite `self` after `inner`, again as a multiplicity morphism.
    ///
    /// The multiplicity matrix multiplies; the composite unitary per target
    /// block is assembled from the inner unitaries (repeated per copy), the
    /// outer unitary, and the permutation that regroups the interleaved
    /// copies of source blocks into the canonical source-major layout.
    pub fn compose(&self, inner: &MultiplicityMorphism) -> Result<MultiplicityMorphism, FdError> {
        if inner.dst != self.src {
            return Err(FdError::ComposeShape {
                outer: self.src.sizes.clone(),
                inner: inner.dst.sizes.clone(),
            });
        }
        let s = inner.src.sizes.len();
        let t = self.src.sizes.len();
        let mut mult = vec![vec![0u32; s]; self.dst.sizes.len()];
        for (k, row) in mult.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                *cell = (0..t).map(|j| self.mult[k][j] * inner.mult[j][i]).sum();
            }
        }
        let needs_unitary = self.unitaries.is_some() || inner.unitaries.is_some() || {
            // Even without unitaries the copy interleaving can differ from the
            // canonical layout, so a permutation may be required.
            !self.dst.sizes.is_empty()
        };
        let unitaries = if needs_unitary {
            let mut us = Vec::with_capacity(self.dst.sizes.len());
            for (k, &pk) in self.dst.sizes.iter().enumerate() {
                us.push(self.composite_block_unitary(inner, k, pk as usize, &mult[k]));
            }
            Some(us)
        } else {
            None
        };
        let out = MultiplicityMorphism { src: inner.src.clone(), dst: self.dst.clone(), mult, unitaries };
        Ok(out)
    }

    fn composite_block_unitary(
        &self,
        inner: &MultiplicityMorphism,
        k: usize,
        pk: usize,
        composite_row: &[u32],
    ) -> CMat {
        let src_sizes = &inner.src.sizes;
        // Slot descriptors for the canonical source-major layout of the
        // composite row: Some(i) marks one diagonal copy of source block i.
        let mut canonical: Vec<Option<usize>> = Vec::new();
        for (i, &copies) in composite_row.iter().enumerate() {
            for _ in 0..copies {
                canonical.push(Some(i));
            }
        }
        let used: usize =
            canonical.iter().map(|slot| src_sizes[slot.unwrap()] as usize).sum();
        let canon_pad = pk - used;

        // Actual layout after expanding self over inner: mid-major order, each
        // copy of mid block j carrying inner's layout for that block
        // (including inner's padding), then self's padding for block k.
        // Record, for each actual slot, which canonical slot it realizes.
        let mut copy_cursor: Vec<usize> = vec![0; src_sizes.len()];
        let mut canon_offsets: Vec<usize> = Vec::with_capacity(canonical.len());
        {
            let mut at = 0;
            for slot in &canonical {
                canon_offsets.push(at);
                at += src_sizes[slot.unwrap()] as usize;
            }
        }
        // Copies of source block i in canonical order: occurrence c sits at
        // canonical index canon_index[i][c].
        let mut canon_index: Vec<Vec<usize>> = vec![Vec::new(); src_sizes.len()];
        for (idx, slot) in canonical.iter().enumerate() {
            canon_index[slot.unwrap()].push(idx);
        }

        let mut perm = CMat::zeros(pk, pk);
        let mut actual_at = 0usize;
        let mut pad_at = used; // canonical padding starts after all copies
        fn place_pad(perm: &mut CMat, actual_at: &mut usize, pad_at: &mut usize, len: usize) {
            for d in 0..len {
                perm[(*actual_at + d, *pad_at + d)] = linalg::cone();
            }
            *actual_at += len;
            *pad_at += len;
        }
        for (j, &mj) in inner.dst.sizes.iter().enumerate() {
            for _ in 0..self.mult[k][j] {
                // One copy of mid block j: inner's row j layout.
                for (i, &c1) in inner.mult[j].iter().enumerate() {
                    let n = src_sizes[i] as usize;
                    for _ in 0..c1 {
                        let occurrence = copy_cursor[i];
                        copy_cursor[i] += 1;
                        let canon_slot = canon_index[i][occurrence];
                        let canon_off = canon_offsets[canon_slot];
                        for d in 0..n {
                            perm[(actual_at + d, canon_off + d)] = linalg::cone();
                        }
                        actual_at += n;
                    }
                }
                let inner_used: usize = inner.mult[j]
                    .iter()
                    .zip(src_sizes)
                    .map(|(c, &n)| (*c as usize) * (n as usize))
                    .sum();
                place_pad(&mut perm, &mut actual_at, &mut pad_at, mj as usize - inner_used);
            }
        }
        let tail = pk - actual_at;
        place_pad(&mut perm, &mut actual_at, &mut pad_at, tail);
        debug_assert_eq!(pad_at, used + canon_pad);

        // Expand inner unitaries over the copies of mid blocks, identity on
        // self's padding.
        let mut mid_expand = CMat::identity(pk, pk);
        if let Some(inner_us) = &inner.unitaries {
            let mut at = 0usize;
            for (j, &mj) in inner.dst.sizes.iter().enumerate() {
                for _ in 0..self.mult[k][j] {
                    let u = &inner_us[j];
                    for r in 0..mj as usize {
                        for c in 0..mj as usize {
                            mid_expand[(at + r, at + c)] = u[(r, c)];
                        }
                    }
                    at += mj as usize;
                }
            }
        }

        let outer = match &self.unitaries {
            Some(us) => us[k].clone(),
            None => CMat::identity(pk, pk),
        };
        outer * mid_expand * perm
    }
}

/// Smallest *-subalgebra containing the generators (no unit adjoined).
/// Returns an orthonormal basis of its flattened coordinate span.
pub fn generated_subalgebra(shape: &BlockShape, gens: &[Element], rank_tol: f64) -> Result<CMat, FdError> {
    for g in gens {
        shape.check(g)?;
    }
    let ambient = shape.ambient_dim();
    let mut seed: Vec<CVec> = Vec::new();
    for g in gens {
        seed.push(g.flatten());
        seed.push(g.adjoint().flatten());
    }
    let mut basis = orthonormal_from(&seed, ambient, rank_tol);
    loop {
        let dim = basis.ncols();
        if dim == 0 || dim == ambient {
            return Ok(basis);
        }
        let elems: Vec<Element> = (0..dim)
            .map(|c| Element::unflatten(shape, &CVec::from(basis.column(c))).unwrap())
            .collect();
        let mut vecs: Vec<CVec> = (0..dim).map(|c| CVec::from(basis.column(c))).collect();
        for p in &elems {
            for q in &elems {
                vecs.push(p.mul(q).flatten());
            }
        }
        let grown = orthonormal_from(&vecs, ambient, rank_tol);
        if grown.ncols() == dim {
            return Ok(grown);
        }
        basis = grown;
    }
}

fn orthonormal_from(vecs: &[CVec], ambient: usize, rank_tol: f64) -> CMat {
    if vecs.is_empty() {
        return CMat::zeros(ambient, 0);
    }
    let mut m = CMat::zeros(ambient, vecs.len());
    for (c, v) in vecs.iter().enumerate() {
        m.set_column(c, v);
    }
    linalg::column_space(&m, rank_tol)
}

/// Quotient by the ideal spanned by the listed blocks: the surjection onto
/// the remaining blocks. The kernel has dimension equal to the summed squares
/// of the killed block sizes.
pub fn quotient_by_blocks(
    shape: &BlockShape,
    killed: &[usize],
) -> Result<MultiplicityMorphism, FdError> {
    for &i in killed {
        if i >= shape.sizes.len() {
            return Err(FdError::BadBlockIndex { index: i, count: shape.sizes.len() });
        }
    }
    let kept: Vec<usize> =
        (0..shape.sizes.len()).filter(|i| !killed.contains(i)).collect();
    let dst = BlockShape::new(kept.iter().map(|&i| shape.sizes[i]).collect())?;
    let mut mult = vec![vec![0u32; shape.sizes.len()]; kept.len()];
    for (j, &i) in kept.iter().enumerate() {
        mult[j][i] = 1;
    }
    MultiplicityMorphism::standard(shape.clone(), dst, mult)
}

/// Orthonormal basis of the ideal supported on the listed blocks.
pub fn ideal_on_blocks(shape: &BlockShape, support: &[usize]) -> Result<CMat, FdError> {
    for &i in support {
        if i >= shape.sizes.len() {
            return Err(FdError::BadBlockIndex { index: i, count: shape.sizes.len() });
        }
    }
    let ambient = shape.ambient_dim();
    let dim: usize = support.iter().map(|&i| {
        let s = shape.sizes[i] as usize;
        s * s
    }).sum();
    let mut basis = CMat::zeros(ambient, dim);
    let mut col = 0;
    for &i in support {
        let off = shape.block_offset(i);
        let s = shape.sizes[i] as usize;
        for d in 0..s * s {
            basis[(off + d, col)] = linalg::cone();
            col += 1;
        }
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_is_the_largest_block_operator_norm() {
        let shape = BlockShape::new(vec![2]).unwrap();
        let mut x = shape.zero();
        x.blocks[0][(0, 0)] = Complex64::new(3.0, 0.0);
        x.blocks[0][(1, 1)] = Complex64::new(-4.0, 0.0);
        assert!((x.norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn multiplicity_two_embedding_is_unital_into_m2() {
        let src = BlockShape::new(vec![1]).unwrap();
        let dst = BlockShape::new(vec![2]).unwrap();
        let phi = MultiplicityMorphism::standard(src, dst, vec![vec![2]]).unwrap();
        assert!(phi.is_unital());
        let one = phi.src.identity();
        let img = phi.apply(&one).unwrap();
        assert_eq!(img, phi.dst.identity());
    }

    #[test]
    fn composite_multiplicities_multiply() {
        let a = BlockShape::new(vec![1]).unwrap();
        let b = BlockShape::new(vec![3]).unwrap();
        let c = BlockShape::new(vec![6]).unwrap();
        let phi = MultiplicityMorphism::standard(a, b.clone(), vec![vec![3]]).unwrap();
        let psi = MultiplicityMorphism::standard(b, c, vec![vec![2]]).unwrap();
        let comp = psi.compose(&phi).unwrap();
        assert_eq!(comp.mult, vec![vec![6]]);
        // The composite must agree with applying the two maps in sequence.
        let x = comp.src.matrix_unit(0, 0, 0);
        let via_comp = comp.apply(&x).unwrap();
        let via_steps = psi.apply(&phi.apply(&x).unwrap()).unwrap();
        let diff = (&via_comp.blocks[0] - &via_steps.blocks[0]).norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn composite_with_interleaved_copies_matches_sequential_application() {
        // Two source blocks embedded with mixed multiplicities force the
        // permutation bookkeeping to regroup copies.
        let a = BlockShape::new(vec![1, 2]).unwrap();
        let b = BlockShape::new(vec![3, 4]).unwrap();
        let c = BlockShape::new(vec![11]).unwrap();
        let phi =
            MultiplicityMorphism::standard(a.clone(), b.clone(), vec![vec![1, 1], vec![2, 1]])
                .unwrap();
        let psi = MultiplicityMorphism::standard(b, c, vec![vec![1, 2]]).unwrap();
        let comp = psi.compose(&phi).unwrap();
        assert_eq!(comp.mult, vec![vec![5, 3]]);
        for (i, r, cc) in [(0usize, 0usize, 0usize), (1, 0, 1), (1, 1, 0)] {
            let x = a.matrix_unit(i, r, cc);
            let via_comp = comp.apply(&x).unwrap();
            let via_steps = psi.apply(&phi.apply(&x).unwrap()).unwrap();
            let diff = (&via_comp.blocks[0] - &via_steps.blocks[0]).norm();
            assert!(diff < 1e-12, "mismatch at unit ({i},{r},{cc}): {diff}");
        }
    }

    #[test]
    fn quotient_of_two_blocks_keeps_the_survivor() {
        let shape = BlockShape::new(vec![2, 3]).unwrap();
        let q = quotient_by_blocks(&shape, &[0]).unwrap();
        assert_eq!(q.dst.sizes, vec![3]);
        assert!(q.is_unital());
    }
}
