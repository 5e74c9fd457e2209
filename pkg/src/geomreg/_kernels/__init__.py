"""Hot inner loops, dispatched to numba or numpy by ``geomreg._backend``."""
from .. import _backend
from . import _numpy

if _backend.USE_NUMBA:
    from . import _numba as _impl
else:
    _impl = _numpy

gaussian_toeplitz = _impl.gaussian_toeplitz
tikhonov_sweep = _impl.tikhonov_sweep
geom_sweep = _impl.geom_sweep
fixed_point_coeffs = _impl.fixed_point_coeffs
arc_menger_curvature = _impl.arc_menger_curvature

__all__ = [
    "gaussian_toeplitz",
    "tikhonov_sweep",
    "geom_sweep",
    "fixed_point_coeffs",
    "arc_menger_curvature",
]
