"""Reduced-biquaternion matrix algebra and non-negative factorization.

The package covers the commutative four-dimensional hypercomplex number
system (scalars and dense matrices), alternating projected-gradient
solvers for the non-negative factorization of such matrices, a
per-channel real NMF baseline, and a color face recognition pipeline
built on the learned basis.
"""

from .algebra import E1, E2, E1E2Scalar, RBScalar
from .matrix import (E1E2Matrix, RBMatrix, ShapeMismatchError,
                     SingularComponentError, cond_components, hstack, inner,
                     inverse, matmul, re_inner, unvec)
from .io import load_rbm, save_rbm, write_history_csv
from .solver import (ConfigError, FactorizationResult, FeasibilityError,
                     IterationRecord, RealFactorizationResult, SolverConfig,
                     gradient_check, grad_h, grad_w, init_factors,
                     kkt_residual, make_synthetic_instance, objective,
                     project_nonneg, project_nonneg_j, real_kkt_residual,
                     solve, solve_rbipg, solve_rbpg, solve_real_nmf)
from .recognition import (ColorSample, EncodingFailedError, Gallery,
                          RecognitionReport, ZeroEncodingError, build_gallery,
                          classify, compute_basis_sparsity, compute_res,
                          compute_sec, cosine_similarity, encode_face,
                          evaluate_gallery, solve_encoding)

__version__ = "0.1.0"
