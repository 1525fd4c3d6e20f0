"""LSMI 의존성 추정 패키지."""

from .kernels import (
    gaussian_gram,
    gram_vjp,
    median_heuristic,
    pairwise_sq_dists,
)
from .lsmi import (
    BandwidthRule,
    LsmiConfig,
    LsmiEstimate,
    cross_validate,
    lsmi_estimate,
    lsmi_gradient,
    resolve_hyperparameters,
)
from .oracles import (
    MiEstimate,
    discrete_smi,
    finite_diff_grad,
    gaussian_mi,
    gaussian_smi,
    kde_mi,
    ksg_mi,
)
