//! Open-boundary matrix-product state kept in mixed canonical form around
//! a single orthogonality centre.

use ndarray::{s, Array2, Array3, Array4, Axis};
use ndarray_linalg::{JobSvd, QR, SVDDC};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{linalg, Error, Result};
use crate::ops::dagger;

/// Weight outside the Fock vacuum below which a site counts as untouched.
pub const VACUUM_TOL: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomState {
    Excited,
    /// `(|g> + |e>)/sqrt(2)`.
    PlusSuperposition,
    Ground,
}

impl AtomState {
    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            AtomState::Excited => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            AtomState::PlusSuperposition => [C64::new(h, 0.0), C64::new(h, 0.0)],
            AtomState::Ground => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }
}

impl std::str::FromStr for AtomState {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "excited" => Ok(AtomState::Excited),
            "plus" | "plus_superposition" => Ok(AtomState::PlusSuperposition),
            "ground" => Ok(AtomState::Ground),
            _ => Err(format!("unknown atom state '{s}' (expected excited, plus or ground)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub chi_max: usize,
    /// Largest discarded weight per bond.
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Leave the centre on the right site of the bond.
    Right,
    Left,
}

/// Outcome of one two-site update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReport {
    pub discarded: f64,
    /// `1 - |psi|^2` before renormalisation.
    pub norm_loss: f64,
    pub bond: usize,
}

#[derive(Debug, Clone)]
pub struct MpsState {
    /// `(left bond, physical, right bond)`.
    pub tensors: Vec<Array3<C64>>,
    pub center: usize,
    /// Last site carrying any weight outside the vacuum; sites beyond it
    /// are product vacua with unit bonds.
    pub front: usize,
    pub cumulative_discarded: f64,
}

fn vacuum_site(d: usize) -> Array3<C64> {
    let mut t = Array3::zeros((1, d, 1));
    t[[0, 0, 0]] = C64::new(1.0, 0.0);
    t
}

fn as_matrix(t: &Array3<C64>, left: bool) -> Array2<C64> {
    let (a, d, b) = t.dim();
    let t = t.as_standard_layout();
    if left {
        t.to_shape((a * d, b)).unwrap().to_owned()
    } else {
        t.to_shape((a, d * b)).unwrap().to_owned()
    }
}

fn from_matrix(m: Array2<C64>, a: usize, d: usize, b: usize) -> Array3<C64> {
    m.as_standard_layout().to_shape((a, d, b)).unwrap().to_owned()
}

impl MpsState {
    /// Atom in `atom`, every boson in the vacuum.
    pub fn product(dims: &[usize], atom: AtomState) -> Self {
        assert!(dims.len() >= 2 && dims[0] == 2);
        let mut tensors: Vec<Array3<C64>> = dims.iter().map(|d| vacuum_site(*d)).collect();
        let amp = atom.amplitudes();
        tensors[0][[0, 0, 0]] = amp[0];
        tensors[0][[0, 1, 0]] = amp[1];
        Self { tensors, center: 0, front: 0, cumulative_discarded: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.dim().1).collect()
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.dim().2).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Norm from the centre tensor.
    pub fn norm_sqr(&self) -> f64 {
        self.tensors[self.center].iter().map(|z| z.norm_sqr()).sum()
    }

    fn shift_right(&mut self) -> Result<()> {
        let c = self.center;
        let (a, d, b) = self.tensors[c].dim();
        let (q, r) = as_matrix(&self.tensors[c], true).qr().map_err(linalg)?;
        let k = q.ncols();
        self.tensors[c] = from_matrix(q, a, d, k);
        let (_, d2, b2) = self.tensors[c + 1].dim();
        let next = r.dot(&as_matrix(&self.tensors[c + 1], false));
        debug_assert_eq!(r.ncols(), b);
        self.tensors[c + 1] = from_matrix(next, k, d2, b2);
        self.center = c + 1;
        Ok(())
    }

    fn shift_left(&mut self) -> Result<()> {
        let c = self.center;
        let (a, d, b) = self.tensors[c].dim();
        // M = R^+ Q^+ from the QR of M^+
        let (q, r) = dagger(&as_matrix(&self.tensors[c], false)).qr().map_err(linalg)?;
        let k = q.ncols();
        self.tensors[c] = from_matrix(dagger(&q), k, d, b);
        let (a0, d0, _) = self.tensors[c - 1].dim();
        let prev = as_matrix(&self.tensors[c - 1], true).dot(&dagger(&r));
        debug_assert_eq!(r.ncols(), a);
        self.tensors[c - 1] = from_matrix(prev, a0, d0, k);
        self.center = c - 1;
        Ok(())
    }

    pub fn move_center(&mut self, to: usize) -> Result<()> {
        if to >= self.len() {
            return Err(Error::SiteOutOfRange { site: to, len: self.len() });
        }
        while self.center < to {
            self.shift_right()?;
        }
        while self.center > to {
            self.shift_left()?;
        }
        Ok(())
    }

    /// Two-site wavefunction on `(i, i+1)`, shaped `(chi_l, d1, d2, chi_r)`.
    fn theta(&self, i: usize) -> Array4<C64> {
        let (a, d1, _) = self.tensors[i].dim();
        let (_, d2, b) = self.tensors[i + 1].dim();
        let m = as_matrix(&self.tensors[i], true).dot(&as_matrix(&self.tensors[i + 1], false));
        m.as_standard_layout().into_owned().into_shape_with_order((a, d1, d2, b)).unwrap()
    }

    /// Applies `gate` on bond `(i, i+1)`; the centre must sit on `i` or `i+1`.
    pub fn apply_gate(&mut self, i: usize, gate: &Array2<C64>, sweep: Sweep, trunc: &Truncation) -> Result<GateReport> {
        debug_assert!(self.center == i || self.center == i + 1);
        let theta = self.theta(i);
        let (a, d1, d2, b) = theta.dim();
        if gate.nrows() != d1 * d2 {
            return Err(Error::DimensionMismatch { expected: d1 * d2, got: gate.nrows() });
        }
        let mixed = theta.permuted_axes([1, 2, 0, 3]).as_standard_layout().into_owned();
        let mixed = mixed.into_shape_with_order((d1 * d2, a * b)).unwrap();
        let out = gate.dot(&mixed).as_standard_layout().into_owned().into_shape_with_order((d1, d2, a, b)).unwrap();
        let out = out.permuted_axes([2, 0, 1, 3]).as_standard_layout().into_owned();
        if i + 1 > self.front {
            let w: f64 = out.slice(s![.., .., 1.., ..]).iter().map(|z| z.norm_sqr()).sum();
            if w > VACUUM_TOL {
                self.front = i + 1;
            }
        }
        let m = out.into_shape_with_order((a * d1, d2 * b)).unwrap();
        let (u, sv, vt) = m.svddc(JobSvd::Some).map_err(linalg)?;
        let (u, vt) = (u.unwrap(), vt.unwrap());
        let total: f64 = sv.iter().map(|x| x * x).sum();
        // keep the smallest set whose discarded tail stays under the threshold
        let mut keep = sv.len();
        let mut tail = 0.0;
        while keep > 1 {
            let w = sv[keep - 1] * sv[keep - 1];
            if tail + w > trunc.threshold * total {
                break;
            }
            tail += w;
            keep -= 1;
        }
        keep = keep.min(trunc.chi_max);
        let kept: f64 = sv.iter().take(keep).map(|x| x * x).sum();
        let discarded = if total > 0.0 { (total - kept) / total } else { 0.0 };
        let scale = 1.0 / kept.sqrt();
        let u = u.slice(s![.., ..keep]).to_owned();
        let vt = vt.slice(s![..keep, ..]).to_owned();
        let svals: Vec<f64> = sv.iter().take(keep).map(|x| x * scale).collect();
        match sweep {
            Sweep::Right => {
                let mut r = vt;
                for (k, mut row) in r.axis_iter_mut(Axis(0)).enumerate() {
                    row.mapv_inplace(|z| z * svals[k]);
                }
                self.tensors[i] = from_matrix(u, a, d1, keep);
                self.tensors[i + 1] = from_matrix(r, keep, d2, b);
                self.center = i + 1;
            }
            Sweep::Left => {
                let mut l = u;
                for (k, mut col) in l.axis_iter_mut(Axis(1)).enumerate() {
                    col.mapv_inplace(|z| z * svals[k]);
                }
                self.tensors[i] = from_matrix(l, a, d1, keep);
                self.tensors[i + 1] = from_matrix(vt, keep, d2, b);
                self.center = i;
            }
        }
        self.cumulative_discarded += discarded;
        Ok(GateReport { discarded, norm_loss: 1.0 - kept, bond: i })
    }

    /// `<O>` on one site at the centre.
    pub fn local_at_center(&self, op: &Array2<C64>) -> Result<C64> {
        let t = &self.tensors[self.center];
        let (a, d, b) = t.dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..a {
            for y in 0..b {
                for s in 0..d {
                    let bra = t[[x, s, y]].conj();
                    if bra == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s2 in 0..d {
                        acc += bra * op[[s, s2]] * t[[x, s2, y]];
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `<O>` on the bond `(center - 1, center)`, with `O` acting on both sites.
    pub fn bond_at_center(&self, op: &Array2<C64>) -> Result<C64> {
        let c = self.center;
        let theta = self.theta(c - 1);
        let (a, d1, d2, b) = theta.dim();
        if op.nrows() != d1 * d2 {
            return Err(Error::DimensionMismatch { expected: d1 * d2, got: op.nrows() });
        }
        let m = theta.permuted_axes([1, 2, 0, 3]).as_standard_layout().into_owned();
        let m = m.into_shape_with_order((d1 * d2, a * b)).unwrap();
        let om = op.dot(&m);
        Ok(m.iter().zip(om.iter()).map(|(x, y)| x.conj() * y).sum())
    }

    /// Moves the centre to `site` and measures `op` there.
    pub fn measure(&mut self, site: usize, op: &Array2<C64>) -> Result<C64> {
        self.move_center(site)?;
        self.local_at_center(op)
    }

    /// `<prod_j O_j>` for one operator per site, by transfer matrices.
    pub fn expect_product(&self, ops: &[Array2<C64>]) -> Result<C64> {
        if ops.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: ops.len() });
        }
        let mut env = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for (t, op) in self.tensors.iter().zip(ops) {
            let (a, d, b) = t.dim();
            if op.nrows() != d {
                return Err(Error::DimensionMismatch { expected: d, got: op.nrows() });
            }
            let mut next = Array2::zeros((b, b));
            for s in 0..d {
                let bra = t.slice(s![.., s, ..]).mapv(|z| z.conj());
                let left = env.t().dot(&bra);
                for s2 in 0..d {
                    let o = op[[s, s2]];
                    if o == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let ket = t.slice(s![.., s2, ..]);
                    next = next + left.t().dot(&ket) * o;
                }
            }
            debug_assert_eq!(env.dim(), (a, a));
            env = next;
        }
        Ok(env[[0, 0]])
    }

    /// Dense state vector, for tests on small chains.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut v = self.tensors[0].clone().into_shape_with_order((self.tensors[0].dim().1, self.tensors[0].dim().2)).unwrap();
        for t in &self.tensors[1..] {
            let (_, d, b) = t.dim();
            let rows = v.nrows() * d;
            v = v.dot(&as_matrix(t, false)).as_standard_layout().into_owned().into_shape_with_order((rows, b)).unwrap();
        }
        v.into_iter().collect()
    }
}
