"""Dense matrices, the singular system of an operator, and CSV I/O.

Matrices and vectors are plain ``numpy.ndarray`` objects of dtype float64.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DecompositionError, DomainError, ShapeError

__all__ = [
    "SingularSystem",
    "svd",
    "pseudo_solve",
    "matvec",
    "inner",
    "norm2",
    "as_matrix",
    "as_vector",
    "read_csv_matrix",
    "read_csv_vector",
    "write_csv",
    "rank_tolerance",
]


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(F, name="F"):
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2 or F.shape[0] < 1 or F.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise DomainError(f"{name} contains non-finite entries")
    return F


def as_vector(x, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and 1 in x.shape:
        x = x.reshape(-1)
    if x.ndim != 1 or x.size < 1:
        raise ShapeError(f"{name} must be a non-empty 1-D array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True, eq=False)
class SingularSystem:
    """Compact singular system ``F = U diag(sigma) V'`` restricted to the numerical rank.

    ``U`` is n x r, ``sigma`` has length r (strictly positive, non-increasing)
    and ``V`` is m x r.  ``matrix`` keeps the source operator when known so
    that residuals can be evaluated against ``F`` itself rather than its
    truncated reconstruction.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "U", _frozen(self.U))
        object.__setattr__(self, "sigma", _frozen(self.sigma))
        object.__setattr__(self, "V", _frozen(self.V))
        if self.matrix is not None:
            object.__setattr__(self, "matrix", _frozen(self.matrix))
        r = self.sigma.shape[0]
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != r or self.V.shape[1] != r:
            raise ShapeError(
                f"inconsistent singular system: U {self.U.shape}, sigma {self.sigma.shape}, "
                f"V {self.V.shape}"
            )

    @property
    def n(self):
        return self.U.shape[0]

    @property
    def m(self):
        return self.V.shape[0]

    @property
    def rank(self):
        return self.sigma.shape[0]

    def data_coeffs(self, y):
        """Return ``U'y``, the data coordinates ``u_i'y``."""
        y = as_vector(y, "y")
        if y.shape[0] != self.n:
            raise ShapeError(f"y has length {y.shape[0]}, operator has {self.n} rows")
        return self.U.T @ y

    def source_coeffs(self, x):
        """Return ``V'x``, the coordinates ``v_i'x``."""
        x = as_vector(x, "x")
        if x.shape[0] != self.m:
            raise ShapeError(f"x has length {x.shape[0]}, operator has {self.m} columns")
        return self.V.T @ x

    def synthesize(self, coeffs):
        """Return ``sum_i coeffs_i v_i``."""
        return self.V @ coeffs

    def apply(self, x):
        """Apply the operator: ``F x`` if the source is known, else ``U diag(sigma) V' x``."""
        x = as_vector(x, "x")
        if x.shape[0] != self.m:
            raise ShapeError(f"x has length {x.shape[0]}, operator has {self.m} columns")
        if self.matrix is not None:
            return self.matrix @ x
        return self.U @ (self.sigma * (self.V.T @ x))

    def residual_norm(self, y, x):
        return float(np.linalg.norm(as_vector(y, "y") - self.apply(x)))


def rank_tolerance(sigma_max, shape):
    return max(shape) * np.finfo(np.float64).eps * sigma_max


def svd(F):
    """Singular system of ``F`` with numerically-zero singular values excluded.

    A singular value is dropped when it does not exceed
    ``max(n, m) * machine_eps * sigma_max``.
    """
    F = as_matrix(F)
    try:
        U, s, Vt = np.linalg.svd(F, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        n, m = F.shape
        raise DecompositionError(f"SVD did not converge for {n}x{m} matrix") from exc
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tolerance(s[0], F.shape)))
    return SingularSystem(U[:, :r], s[:r], Vt[:r].T, matrix=F)


def pseudo_solve(S, y):
    """Minimum-norm least-squares solution ``sum_i (u_i'y / sigma_i) v_i``."""
    b = S.data_coeffs(y)
    return S.synthesize(b / S.sigma)


def matvec(F, x):
    F = as_matrix(F)
    x = as_vector(x)
    if F.shape[1] != x.shape[0]:
        raise ShapeError(f"cannot multiply {F.shape[0]}x{F.shape[1]} matrix by vector of length {x.shape[0]}")
    return F @ x


def inner(a, b):
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(a @ b)


def norm2(a):
    return float(np.sqrt(inner(a, a)))


# --- CSV -----------------------------------------------------------------


def read_csv_matrix(path):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise DomainError(f"{path}: not a numeric CSV matrix ({exc})") from exc
    if data.size == 0:
        raise ShapeError(f"{path}: empty matrix")
    if not np.all(np.isfinite(data)):
        raise DomainError(f"{path}: NaN or Inf entries are not allowed")
    return data


def read_csv_vector(path):
    data = read_csv_matrix(path)
    if data.shape[1] != 1:
        raise ShapeError(f"{path}: expected a single-column vector file, got {data.shape[1]} columns")
    return data[:, 0]


def write_csv(path, a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    np.savetxt(path, a, delimiter=",", fmt="%.17g")
