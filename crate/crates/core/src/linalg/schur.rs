//! Canonical block form of orthogonal and skew-symmetric matrices.
//!
//! Both kinds of matrix are normal, so their real Schur form is block diagonal:
//! `1x1` blocks for real eigenvalues and `2x2` rotation-type blocks for
//! conjugate pairs. The block form is standardized so that every `2x2` block
//! carries a nonnegative angle.

use std::f64::consts::PI;

use nalgebra::Schur;

use super::{check_square_finite, orthogonality_residual, Mat, ORTH_TOL, PHASE_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockKind {
    /// Eigenvalue `+1` (phase 0), or a zero eigenvalue of a skew generator.
    Identity,
    /// A single unpaired eigenvalue `-1` (phase π).
    Reflection,
    /// `[[cos r, -sin r], [sin r, cos r]]` for an orthogonal matrix, or
    /// `[[0, -r], [r, 0]]` for a skew generator; `r ≥ 0`.
    Rotation(f64),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match self {
            BlockKind::Rotation(_) => 2,
            _ => 1,
        }
    }

    pub fn angle(&self) -> f64 {
        match *self {
            BlockKind::Identity => 0.0,
            BlockKind::Reflection => PI,
            BlockKind::Rotation(r) => r,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CanonicalBlock {
    /// First column of `P` spanned by this block.
    pub start: usize,
    pub kind: BlockKind,
}

/// `Q = P D Pᵀ` with `P` orthogonal and `D` block diagonal.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    p: Mat,
    blocks: Vec<CanonicalBlock>,
}

impl CanonicalForm {
    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn blocks(&self) -> &[CanonicalBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// One `(block start, angle)` entry per block; conjugate pairs are stored once.
    pub fn angles(&self) -> Vec<(usize, f64)> {
        self.blocks.iter().map(|b| (b.start, b.kind.angle())).collect()
    }

    /// The full phase vector `φ = (r₁, …, r_n)`: one entry per eigenvalue, so
    /// a rotation block contributes `r` and `-r`.
    pub fn phases(&self) -> Vec<f64> {
        let mut phi = Vec::with_capacity(self.dim());
        for b in &self.blocks {
            match b.kind {
                BlockKind::Identity => phi.push(0.0),
                BlockKind::Reflection => phi.push(PI),
                BlockKind::Rotation(r) => {
                    phi.push(r);
                    phi.push(-r);
                }
            }
        }
        phi
    }

    /// `|φ|₂`.
    pub fn phase_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Identity => 0.0,
                BlockKind::Reflection => PI * PI,
                BlockKind::Rotation(r) => 2.0 * r * r,
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `|r|_max`.
    pub fn max_abs_phase(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.kind.angle())
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues equal to `-1`.
    pub fn pi_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b.kind {
                BlockKind::Reflection => 1,
                BlockKind::Rotation(r) if r == PI => 2,
                _ => 0,
            })
            .sum()
    }

    pub fn has_reflection(&self) -> bool {
        self.blocks
            .iter()
            .any(|b| matches!(b.kind, BlockKind::Reflection))
    }

    /// Reassembles `P D Pᵀ` reading every block as an orthogonal block.
    pub fn rotation(&self) -> Mat {
        self.assemble(|kind| match kind {
            BlockKind::Identity => [1.0, 0.0, 0.0, 0.0],
            BlockKind::Reflection => [-1.0, 0.0, 0.0, 0.0],
            BlockKind::Rotation(r) => {
                let (s, c) = r.sin_cos();
                [c, -s, s, c]
            }
        })
    }

    /// Reassembles `P L Pᵀ` with `L` the block logarithm of `D`: `0` for
    /// identity blocks, `[[0, -r], [r, 0]]` for rotations. `None` when a
    /// lone `-1` eigenvalue has no real logarithm.
    pub fn generator(&self) -> Option<Mat> {
        if self.has_reflection() {
            return None;
        }
        Some(self.assemble(|kind| match kind {
            BlockKind::Rotation(r) => [0.0, -r, r, 0.0],
            _ => [0.0, 0.0, 0.0, 0.0],
        }))
    }

    /// Same basis with every rotation angle mapped through `f`.
    pub fn map_angles(&self, f: impl Fn(f64) -> f64) -> CanonicalForm {
        let blocks = self
            .blocks
            .iter()
            .map(|b| CanonicalBlock {
                start: b.start,
                kind: match b.kind {
                    BlockKind::Rotation(r) => BlockKind::Rotation(f(r)),
                    other => other,
                },
            })
            .collect();
        CanonicalForm {
            p: self.p.clone(),
            blocks,
        }
    }

    /// `P B Pᵀ` where `B` is block diagonal with blocks given row-major by `block`.
    /// `1x1` blocks read only the first entry.
    fn assemble(&self, block: impl Fn(BlockKind) -> [f64; 4]) -> Mat {
        let n = self.dim();
        let mut pb = Mat::zeros(n, n);
        for b in &self.blocks {
            let [a, bb, c, d] = block(b.kind);
            let i = b.start;
            match b.kind.size() {
                1 => {
                    if a != 0.0 {
                        pb.column_mut(i).axpy(a, &self.p.column(i), 0.0);
                    }
                }
                _ => {
                    let (pi, pj) = (self.p.column(i), self.p.column(i + 1));
                    let mut col = pi * a;
                    col.axpy(c, &pj, 1.0);
                    pb.set_column(i, &col);
                    let mut col = pi * bb;
                    col.axpy(d, &pj, 1.0);
                    pb.set_column(i + 1, &col);
                }
            }
        }
        pb * self.p.transpose()
    }
}

/// Real Schur form `m = Z T Zᵀ`, retried on shifted copies `m + αI` (same Schur
/// vectors) when the Francis iteration stalls.
/// Real Schur form of `m`, computed on `(m - center·I)/s + α·I` for the first
/// shift `α` that converges, where `s` normalizes the centered matrix. Working
/// on the centered, normalized matrix keeps tightly clustered spectra (an
/// orthogonal matrix close to `I`, a tiny skew matrix) resolvable.
// The Francis iteration stalls when a shift dwarfs the spread of the
// normalized spectrum, so only small retry shifts are used.
const SHIFTS: &[f64] = &[0.0, 0.1, -0.07, 0.2, 0.03];

fn real_schur(m: &Mat, center: f64, shifts: &[f64]) -> Result<(Mat, Mat)> {
    let n = m.nrows();
    let mut centered = m.clone();
    for i in 0..n {
        centered[(i, i)] -= center;
    }
    let scale = centered.norm();
    if scale == 0.0 {
        return Ok((Mat::identity(n, n), m.clone()));
    }
    centered /= scale;
    for &alpha in shifts {
        let mut shifted = centered.clone();
        for i in 0..n {
            shifted[(i, i)] += alpha;
        }
        if let Some(s) = Schur::try_new(shifted, f64::EPSILON, 100 * n + 100) {
            let (z, mut t) = s.unpack();
            for i in 0..n {
                t[(i, i)] -= alpha;
            }
            t *= scale;
            for i in 0..n {
                t[(i, i)] += center;
            }
            return Ok((z, t));
        }
    }
    Err(Error::Factorization("real Schur iteration did not converge"))
}

fn is_block_start(t: &Mat, i: usize) -> bool {
    i + 1 < t.nrows() && t[(i + 1, i)] != 0.0
}

/// Canonical form `Q = P D Pᵀ` of an orthogonal matrix.
///
/// Rotation angles lie in `(0, π]`; angles within [`PHASE_TOL`] of π are
/// snapped to π. Pairs of `-1` eigenvalues are grouped into π-rotation blocks,
/// so at most one [`BlockKind::Reflection`] remains (exactly when `det Q = -1`).
pub fn orthogonal_schur(q: &Mat) -> Result<CanonicalForm> {
    check_square_finite(q)?;
    let residual = orthogonality_residual(q);
    if residual > ORTH_TOL {
        return Err(Error::NotOrthogonal { residual });
    }
    let n = q.nrows();
    let (mut z, t) = real_schur(q, 1.0, SHIFTS)?;

    let mut order = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    let mut pending_reflection: Option<usize> = None;
    let mut i = 0;
    while i < n {
        if is_block_start(&t, i) {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mut r = (0.5 * (c - b)).atan2(0.5 * (a + d));
            if r < 0.0 {
                z.column_mut(i + 1).neg_mut();
                r = -r;
            }
            if PI - r <= PHASE_TOL {
                r = PI;
            }
            if r == 0.0 {
                for k in [i, i + 1] {
                    blocks.push(CanonicalBlock {
                        start: order.len(),
                        kind: BlockKind::Identity,
                    });
                    order.push(k);
                }
            } else {
                blocks.push(CanonicalBlock {
                    start: order.len(),
                    kind: BlockKind::Rotation(r),
                });
                order.push(i);
                order.push(i + 1);
            }
            i += 2;
        } else {
            if t[(i, i)] >= 0.0 {
                blocks.push(CanonicalBlock {
                    start: order.len(),
                    kind: BlockKind::Identity,
                });
                order.push(i);
            } else {
                match pending_reflection.take() {
                    None => pending_reflection = Some(i),
                    Some(j) => {
                        blocks.push(CanonicalBlock {
                            start: order.len(),
                            kind: BlockKind::Rotation(PI),
                        });
                        order.push(j);
                        order.push(i);
                    }
                }
            }
            i += 1;
        }
    }
    if let Some(j) = pending_reflection {
        blocks.push(CanonicalBlock {
            start: order.len(),
            kind: BlockKind::Reflection,
        });
        order.push(j);
    }
    let p = Mat::from_fn(n, n, |r, c| z[(r, order[c])]);
    Ok(CanonicalForm { p, blocks })
}

/// Canonical form `Ω = P L Pᵀ` of a skew-symmetric matrix, `L` built from
/// `[[0, -θ], [θ, 0]]` blocks with `θ ≥ 0` and zeros.
///
/// The returned form reads the same angles as rotations, so
/// [`CanonicalForm::rotation`] is `exp_m(Ω)` and [`CanonicalForm::generator`]
/// gives `Ω` back (up to the clamping of no angle: θ may exceed π here).
pub fn skew_canonical(omega: &Mat) -> Result<CanonicalForm> {
    check_square_finite(omega)?;
    let n = omega.nrows();
    let (mut z, t) = real_schur(omega, 0.0, SHIFTS)?;
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if is_block_start(&t, i) {
            let mut theta = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            if theta < 0.0 {
                z.column_mut(i + 1).neg_mut();
                theta = -theta;
            }
            blocks.push(CanonicalBlock {
                start: i,
                kind: BlockKind::Rotation(theta),
            });
            i += 2;
        } else {
            blocks.push(CanonicalBlock {
                start: i,
                kind: BlockKind::Identity,
            });
            i += 1;
        }
    }
    Ok(CanonicalForm { p: z, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det_sign, orthonormalize, skew};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn rot2(theta: f64) -> Mat {
        let (s, c) = theta.sin_cos();
        Mat::from_row_slice(2, 2, &[c, -s, s, c])
    }

    fn haar(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        orthonormalize(&Mat::from_fn(n, n, |_, _| StandardNormal.sample(rng)))
    }

    #[test]
    fn identity_has_zero_angles() {
        let cf = orthogonal_schur(&Mat::identity(3, 3)).unwrap();
        assert_eq!(cf.phases(), vec![0.0, 0.0, 0.0]);
        assert_eq!(cf.pi_count(), 0);
    }

    #[test]
    fn planar_rotation_pairs() {
        let cf = orthogonal_schur(&rot2(0.7)).unwrap();
        let angles = cf.angles();
        assert_eq!(angles.len(), 1);
        assert!((angles[0].1 - 0.7).abs() < 1e-14);
        let mut phi = cf.phases();
        phi.sort_by(f64::total_cmp);
        assert!((phi[0] + 0.7).abs() < 1e-14 && (phi[1] - 0.7).abs() < 1e-14);
        assert!((cf.rotation() - rot2(0.7)).norm() < 1e-14);
    }

    #[test]
    fn paired_minus_ones_form_a_pi_block() {
        let q = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0]));
        let cf = orthogonal_schur(&q).unwrap();
        assert_eq!(
            cf.blocks(),
            &[
                CanonicalBlock { start: 0, kind: BlockKind::Identity },
                CanonicalBlock { start: 1, kind: BlockKind::Rotation(PI) },
            ]
        );
        assert_eq!(cf.pi_count(), 2);
        assert!((cf.rotation() - &q).norm() < 1e-14);
    }

    #[test]
    fn odd_reflection_count_matches_determinant() {
        let q = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, -1.0, -1.0]));
        let cf = orthogonal_schur(&q).unwrap();
        assert_eq!(cf.pi_count(), 3);
        assert!(cf.has_reflection());
        assert!(cf.generator().is_none());
    }

    #[test]
    fn rejects_non_orthogonal() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(orthogonal_schur(&m), Err(Error::NotOrthogonal { .. })));
    }

    #[test]
    fn cyclic_permutation_converges() {
        for n in 2..9 {
            let q = Mat::from_fn(n, n, |i, j| if (j + 1) % n == i { 1.0 } else { 0.0 });
            let cf = orthogonal_schur(&q).unwrap();
            assert!((cf.rotation() - &q).norm() < 1e-12, "n = {n}");
            assert_eq!(cf.pi_count() % 2 == 1, det_sign(&q) < 0);
        }
    }

    #[test]
    fn haar_reconstruction_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=50 {
            let q = haar(n, &mut rng);
            let cf = orthogonal_schur(&q).unwrap();
            assert!((cf.rotation() - &q).norm() <= 1e-10, "n = {n}");
            assert!(orthogonality_residual(cf.p()) < 1e-12);
            assert_eq!(cf.pi_count() % 2 == 1, det_sign(&q) < 0, "n = {n}");
            let phi = cf.phases();
            assert_eq!(phi.len(), n);
            for (_, r) in cf.angles() {
                assert!((0.0..=PI).contains(&r));
            }
        }
    }

    #[test]
    fn skew_canonical_exponentiates() {
        let theta = 0.9;
        let omega = Mat::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0]);
        let cf = skew_canonical(&omega).unwrap();
        assert!((cf.rotation() - rot2(theta)).norm() < 1e-14);
        assert!((cf.generator().unwrap() - &omega).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 3, 6, 17] {
            let w = skew(&Mat::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng)));
            let cf = skew_canonical(&w).unwrap();
            assert!((cf.generator().unwrap() - &w).norm() < 1e-12);
            let e = cf.rotation();
            assert!(orthogonality_residual(&e) < 1e-12);
            // Taylor series reference for the exponential.
            let mut term = Mat::identity(n, n);
            let mut sum = Mat::identity(n, n);
            for k in 1..60 {
                term = &term * &w / k as f64;
                sum += &term;
            }
            assert!((e - sum).norm() < 1e-11, "n = {n}");
        }
    }
}
