"""Shared multi-restart optimization machinery and parametrizations.

All searches are deterministic given (inputs, seed, restart schedule): restart
r draws its initial point from a generator seeded by hashing (seed, r), and
the result is the best over restarts.  Local descent is scipy L-BFGS-B; where
no analytic gradient is supplied, central differences with step 1e-5 are used.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

FD_STEP = 1e-5


def derive_seed(master, *parts) -> int:
    """Stable 63-bit seed from a master seed and a tag path."""
    text = repr((int(master),) + tuple(str(p) for p in parts))
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class OptimOptions:
    """Knobs shared by every optimizer in the package."""

    restarts: int = 20
    max_iters: int = 300
    seed: int = 0
    ftol: float = 1e-12
    gtol: float = 1e-9

    def but(self, **kw) -> "OptimOptions":
        return replace(self, **kw)


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    restart_values: list
    n_iters: int

    @property
    def diagnostics(self) -> dict:
        return {
            "restarts": len(self.restart_values),
            "restart_values": [float(v) for v in self.restart_values],
            "iterations": int(self.n_iters),
        }


def central_diff_grad(f, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (f(xp) - f(xm)) / (2 * step)
    return g


def minimize_restarts(f, sampler, opts: OptimOptions, jac=None, warm_starts=()):
    """Best local minimum over warm starts plus seeded random restarts.

    ``sampler(rng)`` draws an initial parameter vector; ``jac`` may be a
    callable, or None for central differences.
    """
    if jac is None:
        jac_arg = lambda x: central_diff_grad(f, x)
    else:
        jac_arg = jac
    starts = [np.asarray(w, dtype=float) for w in warm_starts]
    n_random = max(opts.restarts - len(starts), 0)
    for r in range(n_random):
        rng = np.random.default_rng(derive_seed(opts.seed, "restart", r))
        starts.append(np.asarray(sampler(rng), dtype=float))
    best = None
    values = []
    total_iters = 0
    for x0 in starts:
        res = minimize(
            f,
            x0,
            jac=jac_arg,
            method="L-BFGS-B",
            options={"maxiter": opts.max_iters, "ftol": opts.ftol, "gtol": opts.gtol},
        )
        values.append(float(res.fun))
        total_iters += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
    return OptimResult(best.x, float(best.fun), values, total_iters)


# --- parameter vector <-> complex structure maps ----------------------------

def complex_from_reals(x: np.ndarray, shape) -> np.ndarray:
    n = int(np.prod(shape))
    return (x[:n] + 1j * x[n : 2 * n]).reshape(shape)


def reals_from_complex(m: np.ndarray) -> np.ndarray:
    return np.concatenate([m.real.reshape(-1), m.imag.reshape(-1)])


def n_density_params(d: int) -> int:
    return 2 * d * d


def density_from_params(x: np.ndarray, d: int):
    """rho = M M^dag / tr with M an unconstrained complex d x d matrix."""
    m = complex_from_reals(x, (d, d))
    mm = m @ m.conj().T
    t = mm.trace().real
    return mm / t, m, t


def params_from_density(rho: np.ndarray) -> np.ndarray:
    """Warm-start parameters whose density_from_params reproduces ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    eigs, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    eigs = np.clip(eigs, 0.0, None)
    m = (vecs * np.sqrt(eigs)) @ vecs.conj().T
    return reals_from_complex(m)


def n_stiefel_params(m: int, k: int) -> int:
    return 2 * m * k


def stiefel_from_params(x: np.ndarray, m: int, k: int) -> np.ndarray:
    """m x k isometry via phase-fixed QR of an unconstrained complex matrix."""
    z = complex_from_reals(x, (m, k))
    q, r = np.linalg.qr(z)
    diag = np.diag(r).copy()
    diag[np.abs(diag) < 1e-12] = 1.0
    phases = diag / np.abs(diag)
    return q * phases.conj()


def params_from_stiefel(u: np.ndarray) -> np.ndarray:
    """Parameters that map back to ``u`` (its columns are already orthonormal)."""
    return reals_from_complex(np.asarray(u, dtype=complex))


def n_antiherm_params(m: int) -> int:
    return m * m


def _antiherm_from_params(x: np.ndarray, m: int) -> np.ndarray:
    diag = x[:m]
    n_off = m * (m - 1) // 2
    re = x[m : m + n_off]
    im = x[m + n_off : m + 2 * n_off]
    a = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    a[iu] = re + 1j * im
    a = a - a.conj().T
    a[np.diag_indices(m)] = 1j * diag
    return a


def isometry_from_antiherm(x: np.ndarray, m: int, k: int) -> np.ndarray:
    """First k columns of exp(A) for an anti-Hermitian A built from x."""
    return expm(_antiherm_from_params(x, m))[:, :k]


def expm_isometry_with_pullback(x: np.ndarray, m: int, k: int):
    """Isometry u = exp(A)[:, :k] plus the exact gradient pullback.

    The returned ``pullback`` maps the Wirtinger gradient G_U = df/d(u.conj())
    to the gradient with respect to the real parameter vector, using the
    eigendecomposition form of the exponential's differential (A is normal).
    """
    a = _antiherm_from_params(x, m)
    theta, v = np.linalg.eigh(a / 1j)  # A = i V diag(theta) V^dag
    phase = np.exp(1j * theta)
    u_full = (v * phase) @ v.conj().T
    u = u_full[:, :k]

    # Phi_ij = (e^{i a} - e^{i b}) / (i(a - b)) = e^{i(a+b)/2} sinc((a-b)/2)
    half_sum = 0.5 * (theta[:, None] + theta[None, :])
    half_diff = 0.5 * (theta[:, None] - theta[None, :])
    phi = np.exp(1j * half_sum) * np.sinc(half_diff / np.pi)

    iu = np.triu_indices(m, 1)

    def pullback(g_u: np.ndarray) -> np.ndarray:
        g_tilde = np.zeros((m, m), dtype=complex)
        g_tilde[:, :k] = g_u
        c = v.conj().T @ g_tilde @ v
        g_a = v @ (c * phi.conj()) @ v.conj().T
        grad = np.zeros_like(x)
        grad[:m] = 2 * np.imag(np.diagonal(g_a))
        n_off = m * (m - 1) // 2
        grad[m : m + n_off] = 2 * (g_a[iu].real - g_a[(iu[1], iu[0])].real)
        grad[m + n_off : m + 2 * n_off] = 2 * (g_a[iu].imag + g_a[(iu[1], iu[0])].imag)
        return grad

    return u, pullback


def antiherm_params_from_unitary(u: np.ndarray) -> np.ndarray:
    """Parameters whose exp(A) reproduces a given unitary (principal log)."""
    from scipy.linalg import logm

    a = logm(np.asarray(u, dtype=complex))
    a = (a - a.conj().T) / 2
    m = a.shape[0]
    iu = np.triu_indices(m, 1)
    return np.concatenate([np.imag(np.diagonal(a)), a[iu].real, a[iu].imag])


def pure_from_params(x: np.ndarray, d: int):
    v = complex_from_reals(x, (d,))
    nrm = np.linalg.norm(v)
    return v / nrm, v, nrm


def params_from_pure(v: np.ndarray) -> np.ndarray:
    return reals_from_complex(np.asarray(v, dtype=complex))


def probs_from_weights(w: np.ndarray):
    w2 = w * w
    total = w2.sum()
    if total <= 0:
        w2 = np.ones_like(w2)
        total = w2.sum()
    return w2 / total, total
