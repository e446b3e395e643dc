"""Numerical tolerances shared across the package.

Every value here can be overridden per run through ``RunConfig.tolerances``
(``--tol name=value`` on the command line).
"""

SYMMETRY_RTOL = 1e-12
ORTHOGONALITY_ATOL = 1e-10
EIGEN_RESIDUAL_ATOL = 1e-8
NORM_ATOL = 1e-10
INGEST_ASYMMETRY_RTOL = 1e-10
INGEST_REJECT_RTOL = 1e-6
IDENTITY_ATOL = 1e-10
COHERENT_LEAKAGE = 1e-12

DEFAULT_TAU_MAX = 20.0
DEFAULT_TAU_STEPS = 2001
DEFAULT_SEED = 1234
MAX_BOSON_DIM = 100_000
MAX_MATRIX_DIM = 50_000

BESSEL_SWITCH = 12.0

TOLERANCES = {
    "symmetry_rtol": SYMMETRY_RTOL,
    "orthogonality_atol": ORTHOGONALITY_ATOL,
    "eigen_residual_atol": EIGEN_RESIDUAL_ATOL,
    "norm_atol": NORM_ATOL,
    "ingest_asymmetry_rtol": INGEST_ASYMMETRY_RTOL,
    "ingest_reject_rtol": INGEST_REJECT_RTOL,
    "identity_atol": IDENTITY_ATOL,
    "coherent_leakage": COHERENT_LEAKAGE,
}


def resolve_tolerances(overrides=None):
    tol = dict(TOLERANCES)
    for key, value in (overrides or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance {key!r}; known: {sorted(tol)}")
        tol[key] = float(value)
    return tol
