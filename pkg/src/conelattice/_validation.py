"""Input checking shared by all modules."""

import numpy as np

DEFAULT_TOL = 1e-9


class DimensionError(ValueError):
    """Raised when vector or matrix dimensions are inconsistent."""


class SchemaError(ValueError):
    """Raised when a serialized object does not follow the expected schema."""


def as_vector(x, dim=None, name="x"):
    """Return ``x`` as a fresh float array whose last axis has length ``dim``.

    Batches of points are accepted as arrays of shape ``(n, dim)``.
    """
    arr = np.array(x, dtype=float, copy=True)
    if arr.ndim == 0:
        raise DimensionError(f"{name} must be a vector, got a scalar")
    if arr.shape[-1] == 0:
        raise DimensionError(f"{name} must have positive dimension")
    if dim is not None and arr.shape[-1] != dim:
        raise DimensionError(f"{name} has dimension {arr.shape[-1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_same_dim(*arrays):
    dims = {a.shape[-1] for a in arrays}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def check_tol(tol):
    if not tol >= 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    return float(tol)
