//! Local operators. The atom basis is `0 = |g>`, `1 = |e>`; bosons use the
//! Fock basis truncated at `d - 1` quanta.

use ndarray::Array2;
use num_complex::Complex64 as C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> Array2<C64> {
    Array2::eye(d)
}

/// Boson annihilator.
pub fn annihilator(d: usize) -> Array2<C64> {
    let mut a = Array2::zeros((d, d));
    for n in 1..d {
        a[[n - 1, n]] = c((n as f64).sqrt());
    }
    a
}

pub fn number(d: usize) -> Array2<C64> {
    Array2::from_diag(&(0..d).map(|n| c(n as f64)).collect::<ndarray::Array1<_>>())
}

/// `(-1)^n`.
pub fn boson_parity(d: usize) -> Array2<C64> {
    Array2::from_diag(&(0..d).map(|n| c(if n % 2 == 0 { 1.0 } else { -1.0 })).collect::<ndarray::Array1<_>>())
}

/// Projector on the highest Fock level.
pub fn top_level(d: usize) -> Array2<C64> {
    let mut p = Array2::zeros((d, d));
    p[[d - 1, d - 1]] = c(1.0);
    p
}

/// `|e><g|`.
pub fn sigma_plus() -> Array2<C64> {
    let mut s = Array2::zeros((2, 2));
    s[[1, 0]] = c(1.0);
    s
}

pub fn sigma_minus() -> Array2<C64> {
    sigma_plus().t().to_owned()
}

pub fn sigma_x() -> Array2<C64> {
    sigma_plus() + sigma_minus()
}

pub fn sigma_y() -> Array2<C64> {
    sigma_plus() * C64::new(0.0, -1.0) + sigma_minus() * C64::new(0.0, 1.0)
}

pub fn sigma_z() -> Array2<C64> {
    Array2::from_diag(&ndarray::arr1(&[c(-1.0), c(1.0)]))
}

/// `|e><e|`.
pub fn excited_projector() -> Array2<C64> {
    Array2::from_diag(&ndarray::arr1(&[c(0.0), c(1.0)]))
}

/// Kronecker product with the first factor as the slow index.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let x = a[[i, j]];
            if x == c(0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = x * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}
