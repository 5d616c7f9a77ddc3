"""Parametrized channel constructions used across experiments and the CLI."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .channels import KrausChannel
from .linops import InvariantViolation, random_isometry

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel.from_kraus([np.eye(d)], name=f"identity({d})")


def dephasing_channel(p: float) -> KrausChannel:
    """Qubit dephasing with Kraus {sqrt(1-p) I, sqrt(p) Z}."""
    _check_prob(p, "p")
    ops = [np.sqrt(1 - p) * np.eye(2)]
    if p > 0:
        ops.append(np.sqrt(p) * PAULI_Z)
    return KrausChannel.from_kraus(ops, name=f"dephasing({p:g})")


def depolarizing_channel(p: float, d: int = 2) -> KrausChannel:
    """rho -> (1-p) rho + p I/d via the discrete Weyl (shift/clock) set."""
    _check_prob(p, "p")
    ops = []
    # The (0,0) Weyl term is the identity, so its weight folds into the
    # unaffected branch: c0 = 1 - p + p/d^2 keeps the map exactly CPTP.
    c0 = 1 - p + p / (d * d)
    if c0 > 0:
        ops.append(np.sqrt(c0) * np.eye(d))
    if p > 0:
        shift = np.roll(np.eye(d), 1, axis=0)
        clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        for a in range(d):
            for b in range(d):
                if (a, b) != (0, 0):
                    w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
                    ops.append(np.sqrt(p / (d * d)) * w)
    return KrausChannel.from_kraus(ops, name=f"depolarizing({p:g},{d})")


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    _check_prob(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    ops = [k0, k1] if gamma > 0 else [k0]
    return KrausChannel.from_kraus(ops, name=f"amplitude_damping({gamma:g})")


def erasure_channel(p: float, d: int = 2) -> KrausChannel:
    """d-dim input to (d+1)-dim output with an orthogonal erasure flag."""
    _check_prob(p, "p")
    embed = np.zeros((d + 1, d), dtype=complex)
    embed[:d, :] = np.eye(d)
    ops = []
    if p < 1:
        ops.append(np.sqrt(1 - p) * embed)
    if p > 0:
        for i in range(d):
            k = np.zeros((d + 1, d), dtype=complex)
            k[d, i] = np.sqrt(p)
            ops.append(k)
    return KrausChannel.from_kraus(ops, name=f"erasure({p:g},{d})")


def full_dephasing_channel(d: int = 2) -> KrausChannel:
    """Complete decoherence in the computational basis."""
    ops = []
    for i in range(d):
        k = np.zeros((d, d), dtype=complex)
        k[i, i] = 1.0
        ops.append(k)
    return KrausChannel.from_kraus(ops, name=f"full_dephasing({d})")


def measure_prepare_channel(d: int = 2, basis: str = "computational") -> KrausChannel:
    """Measure in a basis and prepare the outcome state; entanglement-breaking."""
    if basis == "computational":
        vecs = np.eye(d, dtype=complex)
    elif basis in ("x", "fourier"):
        vecs = np.array(
            [[np.exp(2j * np.pi * i * j / d) / np.sqrt(d) for j in range(d)] for i in range(d)]
        ).T
    else:
        raise InvariantViolation(f"unknown basis {basis!r}")
    ops = [np.outer(vecs[:, i], vecs[:, i].conj()) for i in range(d)]
    return KrausChannel.from_kraus(ops, name=f"measure_prepare({d},{basis})")


def constant_channel(d_in: int = 2, out_index: int = 0, d_out: int = None) -> KrausChannel:
    """Every input maps to the fixed pure state |out_index>."""
    d_out = d_out or d_in
    ops = []
    for i in range(d_in):
        k = np.zeros((d_out, d_in), dtype=complex)
        k[out_index, i] = 1.0
        ops.append(k)
    return KrausChannel.from_kraus(ops, name=f"constant({d_in})")


def random_channel(d_in: int, d_out: int, k: int, seed) -> KrausChannel:
    """Haar-ish random channel with k Kraus operators (exactly CPTP)."""
    iso = random_isometry(d_in, d_out * k, seed)
    ops = [iso.reshape(d_out, k, d_in)[:, i, :] for i in range(k)]
    return KrausChannel.from_kraus(ops, name=f"random({d_in},{d_out},{k},{seed})")


def _check_prob(p, name):
    if not (0.0 <= p <= 1.0):
        raise InvariantViolation(f"{name} must lie in [0, 1], got {p}")


# --- ChannelSpec parsing ------------------------------------------------------

@dataclass(frozen=True)
class ChannelSpec:
    kind: str
    params: tuple = field(default_factory=tuple)

    def __str__(self):
        if not self.params:
            return self.kind
        return f"{self.kind}({','.join(str(p) for p in self.params)})"


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$")

_KINDS = {
    "identity": (identity_channel, (int,), (2,)),
    "dephasing": (dephasing_channel, (float,), None),
    "depolarizing": (depolarizing_channel, (float, int), (None, 2)),
    "amplitude_damping": (amplitude_damping_channel, (float,), None),
    "erasure": (erasure_channel, (float, int), (None, 2)),
    "measure_prepare": (measure_prepare_channel, (int, str), (2, "computational")),
    "full_dephasing": (full_dephasing_channel, (int,), (2,)),
    "constant": (constant_channel, (int,), (2,)),
    "random": (random_channel, (int, int, int, int), None),
}


def parse_channel_spec(text: str) -> ChannelSpec:
    m = _SPEC_RE.match(text)
    if not m:
        raise InvariantViolation(f"cannot parse channel spec {text!r}")
    kind = m.group(1)
    if kind not in _KINDS and kind != "custom":
        raise InvariantViolation(f"unknown channel kind {kind!r}")
    raw = [s.strip() for s in (m.group(2) or "").split(",") if s.strip()]
    if kind == "custom":
        return ChannelSpec("custom", tuple(raw))
    _, types, defaults = _KINDS[kind]
    params = []
    for i, typ in enumerate(types):
        if i < len(raw):
            params.append(typ(raw[i]) if typ is not str else raw[i])
        elif defaults is not None and defaults[i] is not None:
            params.append(defaults[i])
        elif defaults is None and i >= len(raw):
            raise InvariantViolation(f"spec {text!r} is missing required parameters")
    return ChannelSpec(kind, tuple(params))


def zoo(spec) -> KrausChannel:
    """Build the channel described by a ChannelSpec or spec string."""
    if isinstance(spec, str):
        spec = parse_channel_spec(spec)
    if spec.kind == "custom":
        from .serialize import load_channel

        return load_channel(spec.params[0])
    builder, _, _ = _KINDS[spec.kind]
    ch = builder(*spec.params)
    report_defect = ch.cptp_defect()
    if report_defect > 1e-12:
        raise InvariantViolation(f"zoo channel {spec} has CPTP defect {report_defect:.3e}")
    return ch


def standard_zoo(d: int = 2):
    """The default qubit test corpus."""
    return [
        identity_channel(2),
        dephasing_channel(0.1),
        dephasing_channel(0.3),
        depolarizing_channel(0.5, 2),
        depolarizing_channel(1.0, 2),
        amplitude_damping_channel(0.3),
        full_dephasing_channel(2),
        erasure_channel(0.5, 2),
    ]
