//! Binary restricted Boltzmann machine: parameters, energies, conditionals
//! and Gibbs sampling.
//!
//! The energy of a joint state is `E(v, h) = -aᵀv - bᵀh - hᵀWv` with `W`
//! stored as an `n_h × n_v` matrix. All functions are pure in their inputs and
//! the generator they are handed.

mod batch;
mod hyper;
pub mod persist;

pub use batch::BinaryBatch;
pub use hyper::{Hyperparameters, WarmupScope};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, AsArray, Axis, Ix1};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};

/// Weights and biases of a binary RBM.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmParameters {
    weights: Array2<f64>,
    visible_bias: Array1<f64>,
    hidden_bias: Array1<f64>,
}

impl RbmParameters {
    /// `weights` is `n_h × n_v`; bias lengths must match.
    pub fn new(weights: Array2<f64>, visible_bias: Array1<f64>, hidden_bias: Array1<f64>) -> Result<Self> {
        let (n_h, n_v) = weights.dim();
        if visible_bias.len() != n_v {
            return Err(Error::dim("visible bias", n_v, visible_bias.len()));
        }
        if hidden_bias.len() != n_h {
            return Err(Error::dim("hidden bias", n_h, hidden_bias.len()));
        }
        let params = Self {
            weights,
            visible_bias,
            hidden_bias,
        };
        if !params.is_finite() {
            return Err(Error::Domain("parameters contain NaN or infinite values".into()));
        }
        Ok(params)
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            weights: Array2::zeros((n_hidden, n_visible)),
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
        }
    }

    pub fn n_visible(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn visible_bias(&self) -> ArrayView1<'_, f64> {
        self.visible_bias.view()
    }

    pub fn hidden_bias(&self) -> ArrayView1<'_, f64> {
        self.hidden_bias.view()
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
        (self.weights, self.visible_bias, self.hidden_bias)
    }

    /// Number of scalars: `n_v·n_h + n_v + n_h`.
    pub fn scalar_count(&self) -> usize {
        self.weights.len() + self.visible_bias.len() + self.hidden_bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.visible_bias)
            .chain(&self.hidden_bias)
            .all(|x| x.is_finite())
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Array2<f64>, &mut Array1<f64>, &mut Array1<f64>) {
        (&mut self.weights, &mut self.visible_bias, &mut self.hidden_bias)
    }

    fn check_visible(&self, len: usize) -> Result<()> {
        if len == self.n_visible() {
            Ok(())
        } else {
            Err(Error::dim("visible vector", self.n_visible(), len))
        }
    }

    fn check_hidden(&self, len: usize) -> Result<()> {
        if len == self.n_hidden() {
            Ok(())
        } else {
            Err(Error::dim("hidden vector", self.n_hidden(), len))
        }
    }
}

/// Draw every weight and bias from `N(0, init_std)`.
pub fn init_params<R: Rng + ?Sized>(n_visible: usize, n_hidden: usize, init_std: f64, rng: &mut R) -> Result<RbmParameters> {
    if n_visible == 0 || n_hidden == 0 {
        return Err(Error::Config(format!(
            "RBM needs at least one unit per layer (n_v={n_visible}, n_h={n_hidden})"
        )));
    }
    let normal = Normal::new(0.0, init_std)
        .map_err(|e| Error::Config(format!("init_std {init_std}: {e}")))?;
    let weights = Array2::from_shape_simple_fn((n_hidden, n_visible), || normal.sample(rng));
    let visible_bias = Array1::from_shape_simple_fn(n_visible, || normal.sample(rng));
    let hidden_bias = Array1::from_shape_simple_fn(n_hidden, || normal.sample(rng));
    RbmParameters::new(weights, visible_bias, hidden_bias)
}

/// `E(v, h) = -aᵀv - bᵀh - hᵀWv`.
pub fn energy<'a, 'b>(
    params: &RbmParameters,
    v: impl AsArray<'a, f64, Ix1>,
    h: impl AsArray<'b, f64, Ix1>,
) -> Result<f64> {
    let (v, h) = (v.into(), h.into());
    params.check_visible(v.len())?;
    params.check_hidden(h.len())?;
    let interaction = h.dot(&params.weights.dot(&v));
    Ok(-params.visible_bias.dot(&v) - params.hidden_bias.dot(&h) - interaction)
}

/// `F(v) = -aᵀv - Σ_j softplus(b_j + W_j·v)`, so that `exp(-F(v)) = Σ_h exp(-E(v, h))`.
pub fn free_energy<'a>(params: &RbmParameters, v: impl AsArray<'a, f64, Ix1>) -> Result<f64> {
    let v = v.into();
    params.check_visible(v.len())?;
    let pre = params.weights.dot(&v) + &params.hidden_bias;
    Ok(-params.visible_bias.dot(&v) - pre.iter().map(|&x| softplus(x)).sum::<f64>())
}

/// Hidden-side free energy `-bᵀh - Σ_i softplus(a_i + (Wᵀh)_i)`, the
/// mirror image of [`free_energy`] obtained by summing out the visible layer.
pub fn hidden_free_energy<'a>(params: &RbmParameters, h: impl AsArray<'a, f64, Ix1>) -> Result<f64> {
    let h = h.into();
    params.check_hidden(h.len())?;
    let pre = params.weights.t().dot(&h) + &params.visible_bias;
    Ok(-params.hidden_bias.dot(&h) - pre.iter().map(|&x| softplus(x)).sum::<f64>())
}

/// [`free_energy`] of every row of a `rows × n_v` matrix.
pub fn free_energy_batch(params: &RbmParameters, v: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    params.check_visible(v.ncols())?;
    let pre = v.dot(&params.weights.t()) + &params.hidden_bias;
    let linear = v.dot(&params.visible_bias);
    Ok(Array1::from_shape_fn(v.nrows(), |r| {
        -linear[r] - pre.row(r).iter().map(|&x| softplus(x)).sum::<f64>()
    }))
}

/// `P(h = 1 | v) = sigmoid(b + Wv)`. Accepts real-valued `v` in `[0, 1]`.
pub fn hidden_probs<'a>(params: &RbmParameters, v: impl AsArray<'a, f64, Ix1>) -> Result<Array1<f64>> {
    let v = v.into();
    params.check_visible(v.len())?;
    let mut pre = params.weights.dot(&v) + &params.hidden_bias;
    pre.mapv_inplace(sigmoid);
    Ok(pre)
}

/// `P(v = 1 | h) = sigmoid(a + Wᵀh)`. Accepts real-valued `h` in `[0, 1]`.
pub fn visible_probs<'a>(params: &RbmParameters, h: impl AsArray<'a, f64, Ix1>) -> Result<Array1<f64>> {
    let h = h.into();
    params.check_hidden(h.len())?;
    let mut pre = params.weights.t().dot(&h) + &params.visible_bias;
    pre.mapv_inplace(sigmoid);
    Ok(pre)
}

/// Independent Bernoulli draws, one per entry of `probs`.
pub fn sample_bernoulli<'a, R: Rng + ?Sized>(probs: impl AsArray<'a, f64, Ix1>, rng: &mut R) -> Result<Array1<f64>> {
    let probs = probs.into();
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(probs.mapv(|p| bernoulli(p, rng)))
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

/// Alternating Gibbs chain seeded from a (possibly real-valued) hidden state.
///
/// Each step samples `v ~ P(v | h)` and then `h ~ P(h | v)`. Returns the
/// binary visible and hidden states after the last step.
pub fn gibbs_from_hidden<'a, R: Rng + ?Sized>(
    params: &RbmParameters,
    h_init: impl AsArray<'a, f64, Ix1>,
    n_steps: usize,
    rng: &mut R,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let h_init = h_init.into();
    params.check_hidden(h_init.len())?;
    if n_steps == 0 {
        return Err(Error::Config("Gibbs chain needs at least one step".into()));
    }
    let mut h = h_init.to_owned();
    let mut v = Array1::zeros(params.n_visible());
    for _ in 0..n_steps {
        v = visible_probs(params, &h)?.mapv(|p| bernoulli(p, rng));
        h = hidden_probs(params, &v)?.mapv(|p| bernoulli(p, rng));
    }
    Ok((v, h))
}

/// Row-wise [`hidden_probs`] for a `rows × n_v` matrix.
pub fn hidden_probs_batch(params: &RbmParameters, v: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    params.check_visible(v.ncols())?;
    Ok(conditional(v.dot(&params.weights.t()), params.hidden_bias.view(), 1.0))
}

/// Row-wise [`visible_probs`] for a `rows × n_h` matrix.
pub fn visible_probs_batch(params: &RbmParameters, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    params.check_hidden(h.ncols())?;
    Ok(conditional(h.dot(&params.weights), params.visible_bias.view(), 1.0))
}

/// `sigmoid(scale · product + bias)` row by row.
pub(crate) fn conditional(mut product: Array2<f64>, bias: ArrayView1<'_, f64>, scale: f64) -> Array2<f64> {
    for mut row in product.axis_iter_mut(Axis(0)) {
        row.zip_mut_with(&bias, |x, &c| *x = sigmoid(scale * *x + c));
    }
    product
}

/// Bernoulli draws for a matrix of probabilities, consumed in row-major order.
pub(crate) fn sample_matrix<R: Rng + ?Sized>(probs: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    probs.mapv(|p| bernoulli(p, rng))
}
