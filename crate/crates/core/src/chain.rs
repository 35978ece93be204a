//! Orthogonal-polynomial mapping of the band onto a semi-infinite chain.
//!
//! The band `[omega_b, omega_b + omega_c]` is parametrised by `k` in `[0, 1]`
//! with `w(k) = omega_b + omega_c k` and weight `h^2(k) = omega_c J(w(k)) / pi`.
//! The weight is discretised with composite Gauss–Legendre panels and the
//! recurrence coefficients come from a discretised Stieltjes procedure that
//! carries orthonormal vectors, so nothing overflows at large `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spectral::{spectral_density, ModelParams};

const PANEL_ORDER: usize = 16;
const GEOMETRIC_PANELS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedWeight {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DiscretizedWeight {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Panel edges on [0, 1]: cosine-graded towards both ends, plus geometric
/// refinement into `k = 0`.
fn panel_edges(m: usize) -> Vec<f64> {
    let panels = m.div_ceil(PANEL_ORDER).max(GEOMETRIC_PANELS + 2);
    let nc = panels - GEOMETRIC_PANELS;
    let cos_edge = |j: usize| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / nc as f64).cos());
    let first = cos_edge(1);
    let mut edges = vec![0.0];
    for k in (0..GEOMETRIC_PANELS).rev() {
        edges.push(first * 0.5f64.powi(k as i32 + 1));
    }
    for j in 1..=nc {
        edges.push(cos_edge(j));
    }
    edges
}

/// Discretises an arbitrary non-negative weight on [0, 1] with `m` (rounded
/// up to whole panels) nodes.
pub fn discretize_fn<F: Fn(f64) -> f64>(weight: F, m: usize) -> Result<DiscretizedWeight> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {m}")));
    }
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let edges = panel_edges(m);
    let mut nodes = Vec::with_capacity(edges.len() * PANEL_ORDER);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        let h = 0.5 * (b - a);
        for (xi, wi) in x.iter().zip(&w) {
            let k = a + h * (xi + 1.0);
            nodes.push(k);
            weights.push(h * wi * weight(k));
        }
    }
    let d = DiscretizedWeight { nodes, weights };
    if !(d.total() > 0.0) {
        return Err(Error::ZeroWeight);
    }
    Ok(d)
}

/// Discretisation of `h^2(k) = omega_c J(omega_b + omega_c k) / pi`.
pub fn discretize_weight(p: &ModelParams, m: usize) -> Result<DiscretizedWeight> {
    if p.alpha == 0.0 {
        return Err(Error::ZeroWeight);
    }
    let wc = p.omega_c;
    let pp = *p;
    discretize_fn(move |k| wc * spectral_density(&pp, pp.omega_b + wc * k) / std::f64::consts::PI, m)
}

/// Monic recurrence `pi_{n+1} = (k - alpha_n) pi_n - beta_n pi_{n-1}`;
/// `beta[0]` holds the total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn stieltjes_recurrence(w: &DiscretizedWeight, n: usize) -> Result<Recurrence> {
    let m = w.len();
    if n == 0 || n * 10 > m {
        return Err(Error::InsufficientOversampling { m, n });
    }
    let b0 = w.total();
    if !(b0 > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    beta.push(b0);
    let mut prev = vec![0.0; m];
    let mut cur = vec![1.0 / b0.sqrt(); m];
    let mut next = vec![0.0; m];
    for j in 0..n {
        let a: f64 = (0..m).map(|i| w.weights[i] * w.nodes[i] * cur[i] * cur[i]).sum();
        alpha.push(a);
        if j + 1 == n {
            break;
        }
        let sb = if j == 0 { 0.0 } else { beta[j].sqrt() };
        for i in 0..m {
            next[i] = (w.nodes[i] - a) * cur[i] - sb * prev[i];
        }
        let b: f64 = (0..m).map(|i| w.weights[i] * next[i] * next[i]).sum();
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::LossOfOrthogonality { n: j + 1, beta: b });
        }
        let s = 1.0 / b.sqrt();
        for x in next.iter_mut() {
            *x *= s;
        }
        beta.push(b);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Recurrence { alpha, beta })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCoefficients {
    pub g: f64,
    /// Absolute on-site frequencies, length `n`.
    pub eps: Vec<f64>,
    /// Hoppings, length `n - 1`.
    pub t: Vec<f64>,
    pub n: usize,
    /// `∫ J dw` over the band.
    pub weight_norm: f64,
    /// Quadrature nodes used for the mapping.
    pub m: usize,
    pub params: ModelParams,
}

impl ChainCoefficients {
    pub fn from_recurrence(p: &ModelParams, rec: &Recurrence, m: usize) -> Self {
        let n = rec.alpha.len();
        let eps = rec.alpha.iter().map(|a| p.omega_b + p.omega_c * a).collect();
        let t = rec.beta[1..].iter().map(|b| p.omega_c * b.sqrt()).collect();
        Self {
            g: rec.beta[0].sqrt(),
            eps,
            t,
            n,
            weight_norm: std::f64::consts::PI * rec.beta[0],
            m,
            params: *p,
        }
    }

    /// First `n` sites of the chain.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.clamp(1, self.n);
        Self {
            eps: self.eps[..n].to_vec(),
            t: self.t[..n - 1].to_vec(),
            n,
            ..self.clone()
        }
    }

    /// The same chain with the head coupling rescaled to `g`.
    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn max_hopping(&self) -> f64 {
        self.t.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_onsite(&self) -> f64 {
        self.eps.iter().copied().fold(0.0, f64::max)
    }
}

/// Default quadrature size for an `n`-site chain.
pub fn default_nodes(n: usize) -> usize {
    (10 * n).max(2000)
}

pub fn map_to_chain(p: &ModelParams, n: usize) -> Result<ChainCoefficients> {
    map_to_chain_with(p, n, default_nodes(n))
}

pub fn map_to_chain_with(p: &ModelParams, n: usize, m: usize) -> Result<ChainCoefficients> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chain length must be >= 2, got {n}")));
    }
    p.validate()?;
    let w = discretize_weight(p, m)?;
    let rec = stieltjes_recurrence(&w, n)?;
    Ok(ChainCoefficients::from_recurrence(p, &rec, w.len()))
}

/// Sites needed so a disturbance travelling at speed `2 max t_n` cannot
/// reach the chain end within `t_max`.
pub fn light_cone_length(max_hopping: f64, t_max: f64) -> usize {
    (2.0 * t_max * max_hopping).ceil() as usize + 50
}
