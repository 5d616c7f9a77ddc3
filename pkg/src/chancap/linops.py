"""Labeled multipartite operators and the tensor/trace/purification primitives.

Conventions used throughout the package:

- Subsystem order is significant; no operation ever silently reorders labels.
- Composite indices are row-major, matching ``numpy.kron``: the first label is
  the most significant index.
- All entropies downstream are base 2 (bits).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Invariant tolerances: double precision with headroom for arithmetic at
# total dimension <= 64.
TOL_HERM = 1e-8
TOL_TRACE = 1e-8
TOL_NORM = 1e-8
# Eigenvalues in [-EIG_CLIP, 0) are numerical noise and get clipped to zero;
# anything more negative is a genuine invariant violation.
EIG_CLIP = 1e-10


class InvariantViolation(ValueError):
    """A state, channel or operator failed one of its defining invariants."""


def _as_complex(mat) -> np.ndarray:
    return np.array(mat, dtype=complex)


def dag(mat: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return mat.conj().T


@dataclass(frozen=True)
class SystemDims:
    """Ordered subsystem labels with their local dimensions."""

    labels: tuple
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.labels) != len(self.dims):
            raise InvariantViolation("labels and dims must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise InvariantViolation(f"duplicate subsystem labels: {self.labels}")
        if any(d < 1 for d in self.dims):
            raise InvariantViolation(f"dimensions must be positive: {self.dims}")

    @property
    def total(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def index_of(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvariantViolation(
                f"unknown subsystem label {label!r}; have {self.labels}"
            ) from None

    def dim_of(self, label) -> int:
        return self.dims[self.index_of(label)]

    def concat(self, other: "SystemDims") -> "SystemDims":
        return SystemDims(self.labels + other.labels, self.dims + other.dims)


def single(label, dim: int) -> SystemDims:
    """SystemDims for a single subsystem."""
    return SystemDims((label,), (dim,))


def _check_density(matrix: np.ndarray, total: int):
    if matrix.shape != (total, total):
        raise InvariantViolation(
            f"matrix shape {matrix.shape} does not match total dimension {total}"
        )
    if not np.all(np.isfinite(matrix)):
        raise InvariantViolation("matrix has non-finite entries")
    herm_defect = np.max(np.abs(matrix - dag(matrix)))
    if herm_defect > TOL_HERM:
        raise InvariantViolation(f"not Hermitian: defect {herm_defect:.3e}")
    trace_defect = abs(matrix.trace() - 1.0)
    if trace_defect > TOL_TRACE:
        raise InvariantViolation(f"trace differs from 1 by {trace_defect:.3e}")
    min_eig = float(np.linalg.eigvalsh((matrix + dag(matrix)) / 2).min())
    if min_eig < -EIG_CLIP:
        raise InvariantViolation(f"negative eigenvalue {min_eig:.3e}")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, unit-trace operator on a labeled composite system."""

    matrix: np.ndarray
    dims: SystemDims

    def __post_init__(self):
        mat = _as_complex(self.matrix)
        _check_density(mat, self.dims.total)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def labels(self):
        return self.dims.labels

    def relabel(self, labels) -> "DensityMatrix":
        return DensityMatrix(self.matrix, SystemDims(labels, self.dims.dims))


@dataclass(frozen=True)
class PureState:
    """Unit vector on a labeled composite system."""

    vector: np.ndarray
    dims: SystemDims

    def __post_init__(self):
        vec = np.array(self.vector, dtype=complex).reshape(-1)
        if vec.shape != (self.dims.total,):
            raise InvariantViolation(
                f"vector length {vec.shape[0]} does not match dimension {self.dims.total}"
            )
        norm_defect = abs(np.linalg.norm(vec) - 1.0)
        if norm_defect > TOL_NORM:
            raise InvariantViolation(f"norm differs from 1 by {norm_defect:.3e}")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def labels(self):
        return self.dims.labels

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.dims)


# --- core array-level operations -------------------------------------------

def kron_all(mats) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def ptrace_array(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace of a square array over the subsystems not in ``keep``.

    ``dims`` is the tuple of local dimensions, ``keep`` a sequence of
    subsystem positions (0-based, order preserved from ``dims``).
    """
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    tensor = mat.reshape(dims + dims)
    # Trace out the dropped subsystems one at a time, highest index first so
    # positions stay valid.
    dropped = [i for i in range(n) if i not in keep]
    for i in reversed(dropped):
        m = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=i, axis2=i + m)
    d_keep = 1
    for i in keep:
        d_keep *= dims[i]
    return tensor.reshape(d_keep, d_keep)


def tensor(a, b):
    """Kronecker product; for DensityMatrix inputs the labels concatenate."""
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims.concat(b.dims))
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.vector, b.vector), a.dims.concat(b.dims))
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the kept labels (order preserved)."""
    keep = list(keep) if not isinstance(keep, (str, bytes)) else [keep]
    positions = [rho.dims.index_of(lb) for lb in keep]
    positions_sorted = sorted(positions)
    reduced = ptrace_array(rho.matrix, rho.dims.dims, positions_sorted)
    kept_labels = tuple(rho.dims.labels[i] for i in positions_sorted)
    kept_dims = tuple(rho.dims.dims[i] for i in positions_sorted)
    return DensityMatrix(reduced, SystemDims(kept_labels, kept_dims))


def eigvals_clipped(mat: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix with the PSD-noise clipping policy.

    Values in [-EIG_CLIP, 0) become 0; more negative values raise.
    """
    eigs = np.linalg.eigvalsh((mat + dag(mat)) / 2)
    low = float(eigs.min())
    if low < -EIG_CLIP:
        raise InvariantViolation(f"eigenvalue {low:.3e} below clipping window")
    return np.clip(eigs, 0.0, None)


def purify(rho: DensityMatrix, ref_label="R") -> PureState:
    """Pure state on R (x) A with tr_R equal to ``rho``; dim(R) = rank(rho)."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else _as_complex(rho)
    eigs, vecs = np.linalg.eigh((mat + dag(mat)) / 2)
    mask = eigs > 1e-12
    eigs = eigs[mask]
    vecs = vecs[:, mask]
    rank = int(mask.sum())
    d = mat.shape[0]
    # |phi> = sum_k sqrt(l_k) |k>_R |v_k>_A, index (k, a) row-major.
    phi = (vecs * np.sqrt(eigs)).T.reshape(rank * d)
    if isinstance(rho, DensityMatrix):
        dims = SystemDims((ref_label,) + rho.dims.labels, (rank,) + rho.dims.dims)
    else:
        dims = SystemDims((ref_label, "A"), (rank, d))
    return PureState(phi, dims)


def random_density(dims, seed) -> DensityMatrix:
    """Ginibre-induced random state, deterministic given the seed."""
    if isinstance(dims, int):
        dims = single("A", dims)
    elif not isinstance(dims, SystemDims):
        dims = SystemDims(tuple(f"S{i}" for i in range(len(dims))), tuple(dims))
    rng = np.random.default_rng(seed)
    d = dims.total
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ dag(m)
    return DensityMatrix(rho / rho.trace().real, dims)


def random_isometry(d_in: int, d_out: int, seed) -> np.ndarray:
    """Haar-ish isometry with d_out >= d_in, deterministic given the seed."""
    if d_out < d_in:
        raise InvariantViolation(f"isometry needs d_out >= d_in, got {d_out} < {d_in}")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d_out, d_in)) + 1j * rng.normal(size=(d_out, d_in))
    q, r = np.linalg.qr(g)
    # Fix the phase freedom so the output is unique and seed-stable.
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases.conj()


def random_pure(dim: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
