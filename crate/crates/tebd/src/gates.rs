//! Two-site Trotter gates for the emitter-chain Hamiltonian
//! `delta |e><e| + coupling + sum eps_n n_n + sum t_n (a_n^+ a_{n+1} + h.c.)`.

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use bandgap_core::chain::ChainCoefficients;

use crate::error::{linalg, Result};
use crate::ops::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `g sigma_x (a + a^+)`.
    Full,
    /// `g (sigma^+ a + sigma^- a^+)`.
    Rwa,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Rwa => "rwa",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Mode::Full),
            "rwa" => Ok(Mode::Rwa),
            _ => Err(format!("unknown mode '{s}' (expected full or rwa)")),
        }
    }
}

/// Physical dimensions: the atom then `n` bosons.
pub fn site_dims(n: usize, d_b: usize) -> Vec<usize> {
    std::iter::once(2).chain(std::iter::repeat_n(d_b, n)).collect()
}

/// Hamiltonian of every bond `(i, i+1)`. Boson on-site energies are split
/// evenly between the two bonds touching a site; the last site keeps its
/// whole share on its single bond. Summed over bonds this is the full `H`.
pub fn bond_hamiltonians(c: &ChainCoefficients, delta: f64, d_b: usize, mode: Mode) -> Vec<Array2<C64>> {
    let n = c.n;
    let a = annihilator(d_b);
    let ad = dagger(&a);
    let num = number(d_b);
    let id_b = identity(d_b);
    let share = |site: usize| if site == n { 1.0 } else { 0.5 };
    let mut out = Vec::with_capacity(n);
    let coupling = match mode {
        Mode::Full => kron(&sigma_x(), &(&a + &ad)),
        Mode::Rwa => kron(&sigma_plus(), &a) + kron(&sigma_minus(), &ad),
    };
    let h0 = kron(&excited_projector(), &id_b) * C64::new(delta, 0.0)
        + kron(&identity(2), &num) * C64::new(share(1) * c.eps[0], 0.0)
        + coupling * C64::new(c.g, 0.0);
    out.push(h0);
    for i in 1..n {
        // sites i and i+1 carry eps[i-1], eps[i]; hopping t[i-1]
        let h = kron(&num, &id_b) * C64::new(0.5 * c.eps[i - 1], 0.0)
            + kron(&id_b, &num) * C64::new(share(i + 1) * c.eps[i], 0.0)
            + (kron(&ad, &a) + kron(&a, &ad)) * C64::new(c.t[i - 1], 0.0);
        out.push(h);
    }
    out
}

/// `exp(-i h tau)` for Hermitian `h`.
pub fn exp_hermitian(h: &Array2<C64>, tau: f64) -> Result<Array2<C64>> {
    let (e, v) = h.eigh(UPLO::Lower).map_err(linalg)?;
    let mut vd = v.clone();
    for (k, ek) in e.iter().enumerate() {
        let ph = C64::new(0.0, -ek * tau).exp();
        vd.column_mut(k).mapv_inplace(|z| z * ph);
    }
    Ok(vd.dot(&dagger(&v)))
}

/// Gates for one Strang step of length `dt`, indexed by bond.
#[derive(Debug, Clone)]
pub struct Gates {
    pub dt: f64,
    pub mode: Mode,
    pub dims: Vec<usize>,
    /// `exp(-i h dt/2)`, used on even bonds at the ends of a block.
    pub half: Vec<Array2<C64>>,
    /// `exp(-i h dt)`.
    pub full: Vec<Array2<C64>>,
    pub hamiltonians: Vec<Array2<C64>>,
}

impl Gates {
    pub fn bonds(&self) -> usize {
        self.full.len()
    }
}

pub fn build_gates(c: &ChainCoefficients, delta: f64, d_b: usize, dt: f64, mode: Mode) -> Result<Gates> {
    let hamiltonians = bond_hamiltonians(c, delta, d_b, mode);
    let half = hamiltonians.iter().map(|h| exp_hermitian(h, 0.5 * dt)).collect::<Result<Vec<_>>>()?;
    let full = hamiltonians.iter().map(|h| exp_hermitian(h, dt)).collect::<Result<Vec<_>>>()?;
    Ok(Gates { dt, mode, dims: site_dims(c.n, d_b), half, full, hamiltonians })
}

/// Two-site piece of the conserved charge on bond `(i, i+1)`: total
/// excitation number under the RWA, the parity `sigma_z (-1)^n` otherwise.
pub fn bond_charge(i: usize, d_b: usize, mode: Mode) -> Array2<C64> {
    let left_atom = i == 0;
    match mode {
        Mode::Rwa => {
            let (nl, idl) = if left_atom { (excited_projector(), identity(2)) } else { (number(d_b), identity(d_b)) };
            kron(&nl, &identity(d_b)) + kron(&idl, &number(d_b))
        }
        Mode::Full => {
            let pl = if left_atom { sigma_z() } else { boson_parity(d_b) };
            kron(&pl, &boson_parity(d_b))
        }
    }
}
