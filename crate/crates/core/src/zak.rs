//! Discrete Zak transform pair in time and frequency domains, the bridge
//! between prototype pulses and modulation windows.

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::numerics::{reshape_v, ComplexGrid, ComplexVec};

/// Which side of the DFT the stored grid lives on. The TD and FD Zak
/// grids carry different scalings, so misuse is a checkable error rather
/// than silent corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZakDomain {
    Time,
    Frequency,
}

impl std::fmt::Display for ZakDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZakDomain::Time => write!(f, "time"),
            ZakDomain::Frequency => write!(f, "frequency"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZakGrid {
    pub grid: ComplexGrid,
    pub domain: ZakDomain,
}

impl ZakGrid {
    pub fn p(&self) -> usize {
        self.grid.rows()
    }

    pub fn q(&self) -> usize {
        self.grid.cols()
    }
}

/// Time-domain DZT: `Z_{P,Q}(a) = F_P V_{P,Q}(a)`, a P-point DFT down
/// each column of the reshape.
pub fn dzt(a: &[Complex64], p: usize, q: usize) -> Result<ZakGrid> {
    let v = reshape_v(a, p, q)?;
    Ok(ZakGrid {
        grid: v.dft_cols(FftDirection::Forward),
        domain: ZakDomain::Time,
    })
}

/// Inverse of [`dzt`]: `vec_t((1/P) F_P^H Z)`.
pub fn idzt(z: &ZakGrid) -> Result<ComplexVec> {
    if z.domain != ZakDomain::Time {
        return Err(Error::Domain {
            expected: "time".into(),
            got: z.domain.to_string(),
        });
    }
    let p = z.p();
    let back = z.grid.dft_cols(FftDirection::Inverse).scale(1.0 / p as f64);
    Ok(back.vec_t())
}

/// Frequency-domain DZT of an N-point spectrum:
/// `Zbar_{Q,P}(a~) = (1/Q) F_Q^H V_{Q,P}(a~)`.
pub fn dzt_freq(a_tilde: &[Complex64], q: usize, p: usize) -> Result<ZakGrid> {
    let v = reshape_v(a_tilde, q, p)?;
    Ok(ZakGrid {
        grid: v.dft_cols(FftDirection::Inverse).scale(1.0 / q as f64),
        domain: ZakDomain::Frequency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dense, dft, max_abs_diff, norm_sq};
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(n: usize, seed: u64) -> ComplexVec {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn dzt_of_impulse() {
        let mut a = vec![c(0.0, 0.0); 12];
        a[0] = c(1.0, 0.0);
        let z = dzt(&a, 3, 4).unwrap();
        for p in 0..3 {
            for q in 0..4 {
                let want = if q == 0 { 1.0 } else { 0.0 };
                assert!((z.grid.get(p, q) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dzt_of_ones_2x2() {
        let a = vec![c(1.0, 0.0); 4];
        let z = dzt(&a, 2, 2).unwrap();
        assert!((z.grid.get(0, 0) - c(2.0, 0.0)).norm() < 1e-12);
        assert!((z.grid.get(0, 1) - c(2.0, 0.0)).norm() < 1e-12);
        assert!(z.grid.get(1, 0).norm() < 1e-12);
        assert!(z.grid.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn dzt_matches_dense_oracle() {
        let a = random_vec(16, 42);
        let z = dzt(&a, 4, 4).unwrap();
        let f = dense::dft_matrix(4);
        let v = reshape_v(&a, 4, 4).unwrap();
        for q in 0..4 {
            let col: Vec<_> = (0..4).map(|p| v.get(p, q)).collect();
            let want = dense::mat_vec(&f, &col);
            for p in 0..4 {
                assert!((z.grid.get(p, q) - want[p]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn idzt_roundtrip() {
        let a = random_vec(128, 9);
        let z = dzt(&a, 16, 8).unwrap();
        let back = idzt(&z).unwrap();
        assert!(max_abs_diff(&a, &back) < 1e-10);
    }

    #[test]
    fn idzt_zero_and_impulse() {
        let zero = ZakGrid {
            grid: ComplexGrid::zeros(3, 4),
            domain: ZakDomain::Time,
        };
        assert!(norm_sq(&idzt(&zero).unwrap()) < 1e-30);

        let mut a = vec![c(0.0, 0.0); 12];
        a[0] = c(1.0, 0.0);
        let z = dzt(&a, 3, 4).unwrap();
        let back = idzt(&z).unwrap();
        assert!(max_abs_diff(&a, &back) < 1e-12);
    }

    #[test]
    fn idzt_rejects_frequency_domain() {
        let z = ZakGrid {
            grid: ComplexGrid::zeros(2, 2),
            domain: ZakDomain::Frequency,
        };
        assert!(matches!(idzt(&z), Err(crate::error::Error::Domain { .. })));
    }

    #[test]
    fn dzt_freq_dc_columns() {
        // a~ = dft(impulse) = all-ones, (Q,P)=(2,2)
        let a_tilde = vec![c(1.0, 0.0); 4];
        let z = dzt_freq(&a_tilde, 2, 2).unwrap();
        assert!((z.grid.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((z.grid.get(0, 1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!(z.grid.get(1, 0).norm() < 1e-12);
        assert!(z.grid.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn dzt_freq_zero() {
        let z = dzt_freq(&vec![c(0.0, 0.0); 8], 2, 4).unwrap();
        assert!(z.grid.frobenius_norm_sq() < 1e-30);
        assert_eq!(z.domain, ZakDomain::Frequency);
    }

    #[test]
    fn dzt_freq_matches_dense_oracle() {
        // N = P*Q = 24, (Q,P) = (4,6)
        let (q, p) = (4usize, 6usize);
        let a = random_vec(p * q, 77);
        let a_tilde = dft(&a).unwrap();
        let z = dzt_freq(&a_tilde, q, p).unwrap();
        let fq_h = dense::conj_transpose(&dense::dft_matrix(q));
        let v = reshape_v(&a_tilde, q, p).unwrap();
        for col in 0..p {
            let cvec: Vec<_> = (0..q).map(|r| v.get(r, col)).collect();
            let want = dense::mat_vec(&fq_h, &cvec);
            for r in 0..q {
                let got = z.grid.get(r, col);
                assert!((got - want[r] / q as f64).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dzt_energy() {
        let a = random_vec(48, 5);
        let z = dzt(&a, 6, 8).unwrap();
        let lhs = z.grid.frobenius_norm_sq();
        let rhs = 6.0 * norm_sq(&a);
        assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }
}
