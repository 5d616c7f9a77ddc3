"""Independent oracles for expected values: brute-force index loops, closed
forms, and grid searches.  Nothing here imports the optimizers under test."""
import numpy as np


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def shannon(probs) -> float:
    probs = np.asarray(probs, dtype=float)
    nz = probs[probs > 0]
    return float(-np.sum(nz * np.log2(nz)))


def vn_entropy(mat) -> float:
    eigs = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    return shannon(np.clip(eigs, 0, None))


def kron_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Direct four-index loop Kronecker product."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def ptrace_oracle(mat: np.ndarray, dims, keep_first: bool) -> np.ndarray:
    """Explicit double-index summation partial trace for two subsystems."""
    da, db = dims
    if keep_first:
        out = np.zeros((da, da), dtype=complex)
        for i in range(da):
            for j in range(da):
                for k in range(db):
                    out[i, j] += mat[i * db + k, j * db + k]
    else:
        out = np.zeros((db, db), dtype=complex)
        for i in range(db):
            for j in range(db):
                for k in range(da):
                    out[i, j] += mat[k * db + i, k * db + j]
    return out


def wootters_eof(rho: np.ndarray) -> float:
    """Two-qubit entanglement of formation via the concurrence closed form."""
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    rho_tilde = yy @ rho.conj() @ yy
    vals = np.linalg.eigvals(rho @ rho_tilde)
    lam = np.sort(np.sqrt(np.clip(vals.real, 0.0, None)))[::-1]
    c = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
    x = (1 + np.sqrt(max(0.0, 1 - c * c))) / 2
    return binary_entropy(x)


def random_state(d: int, rank: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = m @ m.conj().T
    return rho / rho.trace().real


def random_pure(d: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


# --- channel-level oracles, built from scratch -------------------------------

def depolarize(rho: np.ndarray, p: float) -> np.ndarray:
    return (1 - p) * rho + p * np.trace(rho) * np.eye(2) / 2


def holevo_two_state_grid(p: float, n_theta: int = 40, n_w: int = 21) -> float:
    """Grid search over two-pure-state ensembles for the depolarizing channel.

    Bloch symmetry lets the grid run over a single relative angle and the
    ensemble weight.
    """
    best = 0.0
    for theta in np.linspace(0, np.pi, n_theta):
        kets = [np.array([1.0, 0.0]), np.array([np.cos(theta), np.sin(theta)])]
        outs = [depolarize(np.outer(k, k), p) for k in kets]
        for w in np.linspace(0.0, 1.0, n_w):
            avg = w * outs[0] + (1 - w) * outs[1]
            val = vn_entropy(avg) - (w * vn_entropy(outs[0]) + (1 - w) * vn_entropy(outs[1]))
            best = max(best, val)
    return best


def ce_depolarizing_grid(p: float, n_r: int = 2001) -> float:
    """I(R:B) for the depolarizing channel over Bloch-symmetric inputs.

    Builds the joint output of id (x) N on the purification directly: for
    rho = diag(a, 1-a), the purification is sqrt(a)|00> + sqrt(1-a)|11>.
    """
    best = 0.0
    for a in np.linspace(1e-6, 0.5, n_r):
        vec = np.zeros(4)
        vec[0] = np.sqrt(a)
        vec[3] = np.sqrt(1 - a)
        phi = np.outer(vec, vec)
        # apply N to the second factor blockwise
        out = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                block = phi[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                out[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = (
                    (1 - p) * block + p * np.trace(block) * np.eye(2) / 2
                )
        s_r = shannon([a, 1 - a])
        s_b = vn_entropy(ptrace_oracle(out, (2, 2), keep_first=False))
        s_rb = vn_entropy(out)
        best = max(best, s_r + s_b - s_rb)
    return best


def projective_min_conditional_grid(sigma: np.ndarray, n: int = 60) -> float:
    """min over rank-1 projective measurements on a qubit E of the average
    post-measurement entropy of B (exhaustive grid)."""
    d_b = sigma.shape[0] // 2
    t = sigma.reshape(d_b, 2, d_b, 2)
    best = np.inf
    for theta in np.linspace(0, np.pi, n):
        for phase in np.linspace(0, 2 * np.pi, 2 * n, endpoint=False):
            a0 = np.array([np.cos(theta / 2), np.exp(1j * phase) * np.sin(theta / 2)])
            a1 = np.array([-np.exp(-1j * phase) * np.sin(theta / 2), np.cos(theta / 2)])
            total = 0.0
            for a in (a0, a1):
                m = np.einsum("benf,e,f->bn", t, a.conj(), a)
                r = np.real(np.trace(m))
                if r > 1e-12:
                    total += r * vn_entropy(m / r)
            best = min(best, total)
    return float(best)


def isotropic_state(v: float) -> np.ndarray:
    bell = np.zeros((4, 4))
    vec = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = np.outer(vec, vec)
    return v * bell + (1 - v) * np.eye(4) / 4


def amplitude_damping_dilation(gamma: float) -> np.ndarray:
    """Stinespring isometry for amplitude damping, rows ordered (b, e)."""
    u = np.zeros((4, 2))
    u[0, 0] = 1.0  # |0> -> |0>_B |0>_E
    u[2, 1] = np.sqrt(1 - gamma)  # |1> -> sqrt(1-g) |1>_B |0>_E
    u[1, 1] = np.sqrt(gamma)  # ... + sqrt(g) |0>_B |1>_E
    return u
