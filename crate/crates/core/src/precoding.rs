//! Downlink precoders: normalized MF and ZF, and their block-diagonalized
//! variants that transmit only inside the null space of the inter-cell
//! matrix `A^_i`.
//!
//! All precoders are normalized so that `Tr(W^H W) = K`.

use nalgebra::SVD;

use crate::config::PrecoderKind;
use crate::error::{Result, SimError};
use crate::linalg::{frobenius_sq, hpd_inverse, CMatrix};

/// Orthonormal basis of the null space of `A^` (rows are channel transposes).
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceBasis {
    /// M x (M - rank), orthonormal columns.
    pub basis: CMatrix,
    pub rank: usize,
    /// Singular values above the rank cutoff, descending.
    pub singular_values: Vec<f64>,
}

fn rank_cutoff(sigma_max: f64, rows: usize, cols: usize) -> f64 {
    sigma_max * rows.max(cols) as f64 * f64::EPSILON
}

fn numerical_rank(singular: &[f64], rows: usize, cols: usize) -> usize {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    let cut = rank_cutoff(max, rows, cols);
    singular.iter().filter(|&&s| s > cut).count()
}

/// Null space of `a` (n x M) from a full SVD. Rows are zero-padded to M so
/// that all M right singular vectors are available.
pub fn null_space(a: &CMatrix, antennas: usize) -> NullSpaceBasis {
    let n = a.nrows();
    if n == 0 {
        return NullSpaceBasis {
            basis: CMatrix::identity(antennas, antennas),
            rank: 0,
            singular_values: Vec::new(),
        };
    }
    let rows = n.max(antennas);
    let mut padded = CMatrix::zeros(rows, antennas);
    padded.rows_mut(0, n).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let rank = numerical_rank(&sv, n, antennas);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let basis = v_t.rows(rank, antennas - rank).adjoint();
    NullSpaceBasis {
        basis,
        rank,
        singular_values: sv[..rank].to_vec(),
    }
}

/// `P = B B^H`.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// `P = I - V_r V_r^H` from a thin SVD of `A^`, applied without forming P.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceProjector {
    antennas: usize,
    /// `V_r^H` (rank x M): conjugated row-space basis to remove.
    row_space: CMatrix,
}

impl NullSpaceProjector {
    pub fn identity(antennas: usize) -> Self {
        NullSpaceProjector {
            antennas,
            row_space: CMatrix::zeros(0, antennas),
        }
    }

    pub fn from_intercell(a: &CMatrix, antennas: usize) -> Self {
        if a.nrows() == 0 {
            return Self::identity(antennas);
        }
        let svd = SVD::new(a.clone(), false, true);
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let rank = numerical_rank(&sv, a.nrows(), antennas);
        let v_t = svd.v_t.expect("right singular vectors requested");
        // singular values are sorted descending by nalgebra
        NullSpaceProjector {
            antennas,
            row_space: v_t.rows(0, rank).into_owned(),
        }
    }

    pub fn rank(&self) -> usize {
        self.row_space.nrows()
    }

    pub fn null_dim(&self) -> usize {
        self.antennas - self.rank()
    }

    /// `P x`.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        if self.rank() == 0 {
            return x.clone();
        }
        x - self.row_space.adjoint() * (&self.row_space * x)
    }

    pub fn to_dense(&self) -> CMatrix {
        self.apply(&CMatrix::identity(self.antennas, self.antennas))
    }
}

/// Precoding matrix `W` (M x K) with its normalization factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub w: CMatrix,
    pub gamma: f64,
    pub kind: PrecoderKind,
}

fn degenerate(gamma: f64, estimate: &CMatrix) -> bool {
    let k = estimate.ncols().max(1) as f64;
    !(gamma > 1e-12 * frobenius_sq(estimate) / k) || !gamma.is_finite()
}

/// `W = P H^* / sqrt(gamma)`, `gamma = Tr(H^T P H^*) / K`.
fn matched(estimate: &CMatrix, proj: &NullSpaceProjector, kind: PrecoderKind, cell: usize) -> Result<Precoder> {
    let x = proj.apply(&estimate.conjugate());
    let gamma = frobenius_sq(&x) / estimate.ncols() as f64;
    if proj.null_dim() == 0 || degenerate(gamma, estimate) {
        return Err(SimError::Degenerate {
            cell,
            what: if proj.rank() == 0 { "MF precoder" } else { "MF-MBD projection" },
        });
    }
    Ok(Precoder {
        w: x.unscale(gamma.sqrt()),
        gamma,
        kind,
    })
}

/// `W = P H^* (H^T P H^*)^-1 / sqrt(gamma)`, `gamma = Tr((H^T P H^*)^-1) / K`.
fn zero_forcing(
    estimate: &CMatrix,
    proj: &NullSpaceProjector,
    kind: PrecoderKind,
    cell: usize,
) -> Result<Precoder> {
    let what = if proj.rank() == 0 { "ZF precoder Gram matrix" } else { "ZF-MBD projected Gram matrix" };
    let x = proj.apply(&estimate.conjugate());
    // the projected channels span at most null_dim dimensions
    let k = estimate.ncols() as f64;
    if proj.null_dim() < estimate.ncols() || degenerate(frobenius_sq(&x) / k, estimate) {
        return Err(SimError::Singular { cell, what });
    }
    // P is Hermitian and idempotent, so H^T P H^* = X^H X
    let gram = x.adjoint() * &x;
    let inv = hpd_inverse(&gram).ok_or(SimError::Singular { cell, what })?;
    let gamma = crate::linalg::trace_re(&inv) / k;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(SimError::Degenerate { cell, what: "ZF normalization" });
    }
    Ok(Precoder {
        w: (x * inv).unscale(gamma.sqrt()),
        gamma,
        kind,
    })
}

pub fn mf_precoder(estimate: &CMatrix, cell: usize) -> Result<Precoder> {
    matched(estimate, &NullSpaceProjector::identity(estimate.nrows()), PrecoderKind::Mf, cell)
}

pub fn zf_precoder(estimate: &CMatrix, cell: usize) -> Result<Precoder> {
    zero_forcing(estimate, &NullSpaceProjector::identity(estimate.nrows()), PrecoderKind::Zf, cell)
}

pub fn mf_mbd(estimate: &CMatrix, proj: &NullSpaceProjector, cell: usize) -> Result<Precoder> {
    matched(estimate, proj, PrecoderKind::MfMbd, cell)
}

pub fn zf_mbd(estimate: &CMatrix, proj: &NullSpaceProjector, cell: usize) -> Result<Precoder> {
    zero_forcing(estimate, proj, PrecoderKind::ZfMbd, cell)
}

/// Builds the requested precoder; `intercell` is only read by MBD kinds.
pub fn build_precoder(
    kind: PrecoderKind,
    estimate: &CMatrix,
    intercell: &CMatrix,
    cell: usize,
) -> Result<Precoder> {
    match kind {
        PrecoderKind::Mf => mf_precoder(estimate, cell),
        PrecoderKind::Zf => zf_precoder(estimate, cell),
        PrecoderKind::MfMbd | PrecoderKind::ZfMbd => {
            let proj = NullSpaceProjector::from_intercell(intercell, estimate.nrows());
            if kind == PrecoderKind::MfMbd {
                mf_mbd(estimate, &proj, cell)
            } else {
                zf_mbd(estimate, &proj, cell)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, frobenius, trace_re, C64};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn power(w: &CMatrix) -> f64 {
        trace_re(&(w.adjoint() * w))
    }

    #[test]
    fn zero_matrix_has_full_null_space() {
        let b = null_space(&CMatrix::zeros(1, 6), 6);
        assert_eq!(b.rank, 0);
        assert_eq!(b.basis.ncols(), 6);
        assert!(frobenius(&(projector(&b.basis) - CMatrix::identity(6, 6))) < 1e-12);
    }

    #[test]
    fn unit_row_null_space() {
        let mut a = CMatrix::zeros(1, 5);
        a[(0, 0)] = C64::new(1.0, 0.0);
        let b = null_space(&a, 5);
        assert_eq!(b.rank, 1);
        assert_eq!(b.basis.ncols(), 4);
        assert!(frobenius(&(&a * &b.basis)) < 1e-14);
        assert!(b.basis.row(0).norm() < 1e-14);
    }

    #[test]
    fn random_wide_matrix_null_space() {
        let a = complex_gaussian(&mut rng(1), 12, 64, 1.0);
        let b = null_space(&a, 64);
        assert_eq!(b.rank, 12);
        assert_eq!(b.basis.shape(), (64, 52));
        assert!(frobenius(&(&a * &b.basis)) / frobenius(&a) < 1e-10);
        let gram = b.basis.adjoint() * &b.basis;
        assert!(frobenius(&(gram - CMatrix::identity(52, 52))) < 1e-10);
        // thin and full SVD projectors agree
        let p_thin = NullSpaceProjector::from_intercell(&a, 64).to_dense();
        assert!(frobenius(&(p_thin - projector(&b.basis))) < 1e-10);
    }

    /// Gram-Schmidt complement of the conjugated rows of `a`.
    fn gram_schmidt_null(a: &CMatrix, m: usize) -> CMatrix {
        let mut basis: Vec<CMatrix> = Vec::new();
        let push = |v: CMatrix, basis: &mut Vec<CMatrix>| {
            let mut v = v;
            for _ in 0..2 {
                for u in basis.iter() {
                    let c = u.dotc(&v);
                    v -= u * c;
                }
            }
            let n = v.norm();
            if n > 1e-9 {
                basis.push(v / C64::new(n, 0.0));
            }
        };
        for r in 0..a.nrows() {
            push(a.rows(r, 1).adjoint(), &mut basis);
        }
        let rank = basis.len();
        for e in 0..m {
            let mut v = CMatrix::zeros(m, 1);
            v[(e, 0)] = C64::new(1.0, 0.0);
            push(v, &mut basis);
        }
        let cols: Vec<CMatrix> = basis.split_off(rank);
        CMatrix::from_fn(m, cols.len(), |r, c| cols[c][(r, 0)])
    }

    #[test]
    fn svd_and_gram_schmidt_span_same_subspace() {
        let a = complex_gaussian(&mut rng(2), 2, 8, 1.0);
        let svd_basis = null_space(&a, 8).basis;
        let gs = gram_schmidt_null(&a, 8);
        assert_eq!(gs.ncols(), 6);
        // all cosines of principal angles equal one
        let sv = (gs.adjoint() * &svd_basis).singular_values();
        for s in sv.iter() {
            assert!((s - 1.0).abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn projector_identities() {
        let a = complex_gaussian(&mut rng(3), 5, 16, 1.0);
        let b = null_space(&a, 16).basis;
        let p = projector(&b);
        assert!(frobenius(&(&p * &p - &p)) < 1e-10);
        assert!(frobenius(&(p.adjoint() - &p)) < 1e-10);
        let x = &b * complex_gaussian(&mut rng(4), 11, 1, 1.0);
        assert!(frobenius(&(&p * &x - &x)) < 1e-10);
        assert!(frobenius(&(projector(&CMatrix::identity(4, 4)) - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn mf_unit_columns() {
        // every column has squared norm M
        let m = 16;
        let mut h = complex_gaussian(&mut rng(5), m, 3, 1.0);
        for k in 0..3 {
            let n = h.column(k).norm();
            h.column_mut(k).scale_mut((m as f64).sqrt() / n);
        }
        let p = mf_precoder(&h, 0).unwrap();
        assert!((p.gamma - m as f64).abs() < 1e-10);
        assert!((power(&p.w) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn zf_effective_channel_is_scaled_identity() {
        let h = complex_gaussian(&mut rng(6), 32, 6, 1.0);
        let p = zf_precoder(&h, 0).unwrap();
        let eff = h.transpose() * &p.w * C64::new(p.gamma.sqrt(), 0.0);
        assert!(frobenius(&(eff - CMatrix::identity(6, 6))) < 1e-8);
        assert!((power(&p.w) - 6.0).abs() < 1e-8);
    }

    #[test]
    fn single_user_zf_aligns_with_mf() {
        let h = complex_gaussian(&mut rng(7), 12, 1, 1.0);
        let mf = mf_precoder(&h, 0).unwrap();
        let zf = zf_precoder(&h, 0).unwrap();
        assert!(frobenius(&(mf.w - zf.w)) < 1e-10);
    }

    #[test]
    fn mbd_with_identity_projector_matches_plain() {
        let h = complex_gaussian(&mut rng(8), 16, 4, 1.0);
        let id = NullSpaceProjector::identity(16);
        assert_eq!(mf_mbd(&h, &id, 0).unwrap().w, mf_precoder(&h, 0).unwrap().w);
        assert_eq!(zf_mbd(&h, &id, 0).unwrap().w, zf_precoder(&h, 0).unwrap().w);
        let empty = NullSpaceProjector::from_intercell(&CMatrix::zeros(0, 16), 16);
        assert_eq!(empty.rank(), 0);
    }

    #[test]
    fn mbd_precoders_null_the_intercell_rows() {
        let h = complex_gaussian(&mut rng(9), 32, 5, 1.0);
        let a = complex_gaussian(&mut rng(10), 10, 32, 1.0);
        let proj = NullSpaceProjector::from_intercell(&a, 32);
        for p in [mf_mbd(&h, &proj, 0).unwrap(), zf_mbd(&h, &proj, 0).unwrap()] {
            let leak = frobenius(&(&a * &p.w));
            assert!(leak <= 1e-8 * frobenius(&a) * frobenius(&p.w), "{leak}");
            assert!((power(&p.w) - 5.0).abs() < 1e-8);
        }
        let zf = zf_mbd(&h, &proj, 0).unwrap();
        let eff = h.transpose() * &zf.w * C64::new(zf.gamma.sqrt(), 0.0);
        assert!(frobenius(&(eff - CMatrix::identity(5, 5))) < 1e-8);
    }

    #[test]
    fn exhausted_null_space_errors() {
        let h = complex_gaussian(&mut rng(11), 8, 3, 1.0);
        let a = complex_gaussian(&mut rng(12), 8, 8, 1.0);
        assert!(matches!(
            build_precoder(PrecoderKind::MfMbd, &h, &a, 4),
            Err(SimError::Degenerate { cell: 4, .. })
        ));
        let a6 = complex_gaussian(&mut rng(13), 6, 8, 1.0);
        assert!(matches!(
            build_precoder(PrecoderKind::ZfMbd, &h, &a6, 2),
            Err(SimError::Singular { cell: 2, .. })
        ));
        assert!(matches!(
            mf_precoder(&CMatrix::zeros(8, 2), 1),
            Err(SimError::Degenerate { cell: 1, .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn every_kind_has_unit_average_power(seed in 0u64..10_000, k in 1usize..6, r in 0usize..8) {
            let h = complex_gaussian(&mut rng(seed), 24, k, 1.0);
            let a = complex_gaussian(&mut rng(seed + 1), r, 24, 1.0);
            for kind in [PrecoderKind::Mf, PrecoderKind::Zf, PrecoderKind::MfMbd, PrecoderKind::ZfMbd] {
                let p = build_precoder(kind, &h, &a, 0).unwrap();
                prop_assert!((power(&p.w) - k as f64).abs() < 1e-8 * k as f64);
            }
        }
    }
}
