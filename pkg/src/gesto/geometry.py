"""Small vector and quaternion helpers used throughout the engine.

Quaternions are stored as (w, x, y, z) and expected to be unit norm.
"""

import numpy as np

QUAT_NORM_TOL = 1e-6


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def as_quat(q) -> np.ndarray:
    a = np.asarray(q, dtype=np.float64)
    if a.shape != (4,):
        raise ValueError(f"expected a (w,x,y,z) quaternion, got shape {a.shape}")
    return a


def quat_is_unit(q: np.ndarray, tol: float = QUAT_NORM_TOL) -> bool:
    return bool(abs(np.linalg.norm(q) - 1.0) <= tol)


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector ``v`` by unit quaternion ``q``.

    Uses v' = v + 2*u x (u x v + w*v) with u the vector part, which avoids
    building the full rotation matrix.
    """
    w = q[0]
    u = q[1:]
    t = np.cross(u, v)
    return v + 2.0 * np.cross(u, t + w * v)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix for unit quaternion ``q``."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


def normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def perpendicular(v: np.ndarray) -> np.ndarray:
    """Any unit vector perpendicular to unit vector ``v``; deterministic."""
    ref = np.array([0.0, 1.0, 0.0]) if abs(v[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
    return normalize(np.cross(ref, v))


def readonly(a: np.ndarray) -> np.ndarray:
    """Return ``a`` as a C-contiguous float array with the write flag cleared."""
    out = np.ascontiguousarray(a)
    out.setflags(write=False)
    return out
