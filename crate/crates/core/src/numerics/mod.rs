//! Deterministic `f64` kernels with analytic gradients and a
//! finite-difference checking harness.
//!
//! Every reduction runs in a fixed index order, so results are
//! bit-reproducible across runs.

mod conv;
mod gradcheck;
mod kernels;
mod params;
mod tensor;

pub use conv::{
    conv_over_time, conv_over_time_backward, max_pool_backward, max_pool_over_time, ConvGrads,
};
pub use gradcheck::{
    grad_check, grad_check_fn, relative_error, GradCheckConfig, GradCheckReport, Probe,
    TensorCheck, VecParams,
};
pub use kernels::{
    affine, affine_backward, capped_relu, clip_gradients, sigmoid, softmax, softmax_backward,
    softplus, tanh_act, Activation, AffineGrads,
};
pub use params::{Grad, Gradients, ParamKind, Parameters};
pub use tensor::{add_outer_into, axpy, dot, norm_sq, FeatureColumns, Tensor};
