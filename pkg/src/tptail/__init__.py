"""T-product tensor algebra and tail bounds for sums of random T-product tensors."""
from .bounds import BOUNDS, BoundQuery, BoundValue, binary_divergence, evaluate, solve_delta_opt
from .spectral import (
    d_max,
    d_min,
    eig_hermitian,
    is_hermitian,
    lambda_max,
    lambda_min,
    loewner_leq,
    spectral_norm,
    t_svd,
    tensor_function,
    vec_norm,
)
from .tensor import (
    DenseTensor3,
    ShapeError,
    TensorShape,
    TransformedTensor,
    conj_transpose,
    dilation,
    fdiag,
    identity,
    t_product,
    trace,
)

__version__ = "0.1.0"
