"""Channel representations: Kraus (source of truth), Stinespring, Choi.

The i-th Kraus operator is attached to environment basis vector |i>, which
fixes the complementary channel up to the usual unitary freedom on E and
keeps every derived quantity deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linops import (
    InvariantViolation,
    SystemDims,
    DensityMatrix,
    dag,
    _as_complex,
    single,
)

TOL_CPTP = 1e-8
CHOI_RANK_CUTOFF = 1e-10


class CptpViolation(InvariantViolation):
    """A map that was required to be CPTP is not."""


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map stored as a tuple of d_out x d_in Kraus operators."""

    kraus: tuple
    d_in: int
    d_out: int
    name: str = ""

    def __post_init__(self):
        ops = tuple(_as_complex(k) for k in self.kraus)
        if not ops:
            raise InvariantViolation("Kraus list must be non-empty")
        for k in ops:
            if k.shape != (self.d_out, self.d_in):
                raise InvariantViolation(
                    f"Kraus operator shape {k.shape} != ({self.d_out}, {self.d_in})"
                )
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @classmethod
    def from_kraus(cls, ops, name: str = "") -> "KrausChannel":
        ops = [_as_complex(k) for k in ops]
        d_out, d_in = ops[0].shape
        return cls(tuple(ops), d_in, d_out, name)

    @property
    def n_kraus(self) -> int:
        return len(self.kraus)

    def stack(self) -> np.ndarray:
        """(k, d_out, d_in) array of the Kraus operators."""
        return np.stack(self.kraus, axis=0)

    def cptp_defect(self) -> float:
        acc = sum(dag(k) @ k for k in self.kraus)
        return float(np.linalg.norm(acc - np.eye(self.d_in), ord=2))

    def require_cptp(self, tol: float = TOL_CPTP):
        defect = self.cptp_defect()
        if defect > tol:
            raise CptpViolation(
                f"channel {self.name or '<anon>'} violates CPTP: defect {defect:.3e}"
            )


@dataclass(frozen=True)
class CptpReport:
    passed: bool
    deviation: float


def validate_cptp(ch, tol: float = TOL_CPTP) -> CptpReport:
    """Report whether sum_i K_i^dag K_i = 1 holds within tolerance."""
    if not isinstance(ch, KrausChannel):
        ch = KrausChannel.from_kraus(list(ch))
    deviation = ch.cptp_defect()
    return CptpReport(passed=deviation <= tol, deviation=deviation)


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry A -> B (x) E realizing a channel and its complement."""

    matrix: np.ndarray
    dims: SystemDims  # labels ("B", "E")

    def __post_init__(self):
        mat = _as_complex(self.matrix)
        defect = np.linalg.norm(dag(mat) @ mat - np.eye(mat.shape[1]), ord=2)
        if defect > TOL_CPTP:
            raise InvariantViolation(f"not an isometry: defect {defect:.3e}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def d_out(self) -> int:
        return self.dims.dim_of("B")

    @property
    def d_env(self) -> int:
        return self.dims.dim_of("E")


def kraus_to_stinespring(ch: KrausChannel) -> StinespringIsometry:
    """U = sum_i |i>^E K_i, with output index order (B, E)."""
    ch.require_cptp()
    k = ch.n_kraus
    u = np.stack(ch.kraus, axis=1).reshape(ch.d_out * k, ch.d_in)
    return StinespringIsometry(u, SystemDims(("B", "E"), (ch.d_out, k)))


def complementary(ch: KrausChannel) -> KrausChannel:
    """Channel to the environment, tr_B U rho U^dag, in the fixed basis."""
    ch.require_cptp()
    stack = ch.stack()  # (k, d_out, d_in)
    comp = np.transpose(stack, (1, 0, 2))  # (d_out, k, d_in)
    return KrausChannel.from_kraus(list(comp), name=f"{ch.name}^c" if ch.name else "")


def apply_arr(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    out = np.zeros((ch.d_out, ch.d_out), dtype=complex)
    for k in ch.kraus:
        out += k @ rho @ dag(k)
    return out


def apply(ch: KrausChannel, rho, out_label="B") -> DensityMatrix:
    """Apply the channel to a state on the full input system."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else _as_complex(rho)
    if mat.shape[0] != ch.d_in:
        raise InvariantViolation(
            f"input dimension {mat.shape[0]} != channel d_in {ch.d_in}"
        )
    return DensityMatrix(apply_arr(ch, mat), single(out_label, ch.d_out))


def apply_to_half(ch: KrausChannel, rho_ra: DensityMatrix, out_label="B") -> DensityMatrix:
    """Act as id (x) N, the channel taking the last subsystem label."""
    labels = rho_ra.dims.labels
    if len(labels) < 2:
        raise InvariantViolation("apply_to_half needs at least two subsystems")
    d_a = rho_ra.dims.dims[-1]
    if d_a != ch.d_in:
        raise InvariantViolation(
            f"last subsystem dimension {d_a} != channel d_in {ch.d_in}"
        )
    d_r = rho_ra.dims.total // d_a
    eye = np.eye(d_r)
    out = np.zeros((d_r * ch.d_out, d_r * ch.d_out), dtype=complex)
    for k in ch.kraus:
        kk = np.kron(eye, k)
        out += kk @ rho_ra.matrix @ dag(kk)
    dims = SystemDims(
        labels[:-1] + (out_label,), rho_ra.dims.dims[:-1] + (ch.d_out,)
    )
    return DensityMatrix(out, dims)


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """Kraus set {K_i (x) L_j}; dimensions multiply."""
    ops = [np.kron(ka, kb) for ka in a.kraus for kb in b.kraus]
    name = f"{a.name}(x){b.name}" if (a.name or b.name) else ""
    return KrausChannel(tuple(ops), a.d_in * b.d_in, a.d_out * b.d_out, name)


def kraus_rotate(ch: KrausChannel, u: np.ndarray) -> KrausChannel:
    """Same channel under the isometric Kraus freedom K'_j = sum_i u_ji K_i.

    ``u`` must be an m x k isometry (m >= k, u^dag u = 1) acting on the Kraus
    index; the Choi matrix is unchanged.
    """
    u = _as_complex(u)
    k = ch.n_kraus
    if u.ndim != 2 or u.shape[1] != k or u.shape[0] < k:
        raise InvariantViolation(
            f"rotation must be m x {k} with m >= {k}, got {u.shape}"
        )
    defect = np.linalg.norm(dag(u) @ u - np.eye(k), ord=2)
    if defect > TOL_CPTP:
        raise InvariantViolation(f"rotation is not an isometry: defect {defect:.3e}")
    stack = ch.stack()
    rotated = np.einsum("ji,iab->jab", u, stack)
    return KrausChannel.from_kraus(list(rotated), name=ch.name)


@dataclass(frozen=True)
class ChoiMatrix:
    """Channel dual state on A (x) B; trace-one normalization by default."""

    matrix: np.ndarray
    d_in: int
    d_out: int
    trace_one: bool = True

    def __post_init__(self):
        mat = _as_complex(self.matrix)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + dag(self.matrix)) / 2)


def choi_of(ch: KrausChannel, trace_one: bool = True) -> ChoiMatrix:
    """J = (id (x) N)(Phi) with Phi the maximally entangled state on A A'."""
    d = ch.d_in
    j = np.zeros((d * ch.d_out, d * ch.d_out), dtype=complex)
    for k in ch.kraus:
        # (id (x) K) vec gives columns K[:, i] in slot i.
        v = k.T.reshape(-1)  # vector with index (i, b) = K[b, i]
        j += np.outer(v, v.conj())
    if trace_one:
        j /= d
    return ChoiMatrix(j, ch.d_in, ch.d_out, trace_one)


def kraus_from_choi(choi: ChoiMatrix, name: str = "") -> KrausChannel:
    """Minimal Kraus set from the Choi eigendecomposition (cutoff 1e-10)."""
    j = choi.matrix * (choi.d_in if choi.trace_one else 1.0)
    eigs, vecs = np.linalg.eigh((j + dag(j)) / 2)
    if eigs.min() < -TOL_CPTP:
        raise InvariantViolation(f"Choi matrix not PSD: min eig {eigs.min():.3e}")
    tp = ptrace_b(j, choi.d_in, choi.d_out)
    if np.linalg.norm(tp - np.eye(choi.d_in), ord=2) > 1e-6:
        raise InvariantViolation("Choi matrix is not trace-preserving")
    ops = []
    for lam, v in zip(eigs, vecs.T):
        if lam <= CHOI_RANK_CUTOFF:
            continue
        k = np.sqrt(lam) * v.reshape(choi.d_in, choi.d_out).T
        ops.append(k)
    return KrausChannel.from_kraus(ops, name=name)


def ptrace_b(j: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    t = j.reshape(d_a, d_b, d_a, d_b)
    return np.trace(t, axis1=1, axis2=3)


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    """Frobenius distance between trace-one Choi matrices."""
    ja = choi_of(a).matrix
    jb = choi_of(b).matrix
    return float(np.linalg.norm(ja - jb))


def compose(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """after o before, applied right-to-left."""
    if before.d_out != after.d_in:
        raise InvariantViolation(
            f"composition mismatch: {before.d_out} -> {after.d_in}"
        )
    ops = [a @ b for a in after.kraus for b in before.kraus]
    return KrausChannel.from_kraus(ops)


def minimal_kraus(ch: KrausChannel) -> KrausChannel:
    """Re-derive a minimal Kraus representation through the Choi matrix."""
    return kraus_from_choi(choi_of(ch), name=ch.name)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel.from_kraus([np.eye(d)], name=f"identity({d})")
