"""Sylvester graphical lasso: per-mode sparse graphs for tensor-valued data."""

from .kron import (
    kron_product_materialize,
    kron_sum_apply,
    kron_sum_materialize,
    ks_eigen,
    spectral_apply,
    squared_ks_precision,
)
from .metrics import confusion, fpr_fnr, mcc, rel_frob_error, support_of, threshold_to_sparsity
from .solver import (
    FactorSet,
    FitReport,
    SolverConfig,
    diag_update,
    fit,
    lambda_max,
    objective,
    offdiag_update,
    reconstruct_omega,
    soft_threshold,
)
from .sygt import read_sygt, write_sygt
from .synth import (
    GraphSpec,
    gen_ar1,
    gen_erdos_renyi,
    gen_star_block,
    sample_precision,
    sample_sylvester,
    standardize,
)
from .tensor import devectorize, fold, matricize, mode_product, multi_mode_product, vectorize

__version__ = "0.1.0"
