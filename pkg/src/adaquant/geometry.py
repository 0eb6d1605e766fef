"""Box-shaped parameter domain and the A-weighted projection onto it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_SWEEPS = 10_000
SWEEP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned box ``lower <= x <= upper`` (closed, bounded)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "_center", (lo + hi) / 2)
        object.__setattr__(self, "_half", (hi - lo) / 2)

    @classmethod
    def cube(cls, d: int, c: float = 1.0) -> "BoxDomain":
        return cls(np.full(d, -c), np.full(d, c))

    @property
    def dim(self) -> int:
        return self.lower.size

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def interior(self, x) -> bool:
        x = _vector(x, self)
        return bool(np.all(x > self.lower) and np.all(x < self.upper))


def _vector(x, box: BoxDomain) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != box.dim:
        raise ValueError(f"dimension mismatch: got {x.size}, box has {box.dim}")
    return x


def contains(x, box: BoxDomain) -> bool:
    x = _vector(x, box)
    return bool(np.all(x >= box.lower) and np.all(x <= box.upper))


def support_bound(phi, box: BoxDomain) -> float:
    """Exact ``max_{x in box} |phi^T x|``.

    Over the box, ``phi^T x`` ranges over ``phi^T center +/- |phi|^T half``,
    so the largest magnitude is ``|phi^T center| + |phi|^T half``.
    """
    phi = _vector(phi, box)
    return abs(float(phi @ box._center)) + float(np.abs(phi) @ box._half)


def check_weight_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("weight matrix must be square")
    scale = np.abs(A).max() if A.size else 0.0
    if np.abs(A - A.T).max() > 1e-12 * max(scale, 1.0):
        raise ValueError("weight matrix is not symmetric")
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise ValueError("weight matrix is not positive definite") from None
    return A


def project_weighted(x, A, box: BoxDomain, check: bool = True) -> np.ndarray:
    """Minimise ``(x - y)^T A (x - y)`` over ``y`` in ``box``.

    Points already in the box are returned unchanged (as a copy). Otherwise
    the strictly convex bound-constrained QP is solved by cyclic coordinate
    minimisation; each coordinate step is an exact 1-D minimiser followed by
    a clamp. Set ``check=False`` when ``A`` is SPD by construction.
    """
    x = _vector(x, box)
    if check:
        A = check_weight_matrix(A)
        if A.shape[0] != box.dim:
            raise ValueError("weight matrix dimension mismatch")
    lo, hi = box.lower, box.upper
    if np.all(x >= lo) and np.all(x <= hi):
        return x.copy()

    y = np.clip(x, lo, hi)
    d = x.size
    if d == 1:
        return y
    diag = np.diag(A).copy()
    for _ in range(MAX_SWEEPS):
        r = A @ (y - x)  # half-gradient, refreshed per sweep against drift
        moved = 0.0
        for j in range(d):
            yj = y[j]
            target = yj - r[j] / diag[j]
            new = min(max(target, lo[j]), hi[j])
            step = new - yj
            if step != 0.0:
                y[j] = new
                r += A[:, j] * step
                moved = max(moved, abs(step))
        if moved < SWEEP_TOL:
            break
    return y
