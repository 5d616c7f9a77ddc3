"""Entropy functionals (base 2) used by every capacity formula.

Everything goes through Hermitian eigendecompositions; matrix logs of
near-singular operators are never formed, so rank-deficient states (which the
equality cases produce deliberately) stay stable.
"""
from __future__ import annotations

import numpy as np

from .linops import DensityMatrix, InvariantViolation, dag, eigvals_clipped
from .channels import KrausChannel, apply_arr, complementary

LN2 = np.log(2.0)


def _matrix_of(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def entropy_of_probs(p: np.ndarray) -> float:
    """Shannon entropy in bits with the 0 log 0 := 0 convention."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def entropy(rho) -> float:
    """von Neumann entropy -tr rho log2 rho."""
    eigs = eigvals_clipped(_matrix_of(rho))
    return entropy_of_probs(eigs)


def conditional_entropy(rho: DensityMatrix, a_labels, b_labels) -> float:
    """S(A|B) = S(AB) - S(B)."""
    from .linops import partial_trace

    a_labels = [a_labels] if isinstance(a_labels, str) else list(a_labels)
    b_labels = [b_labels] if isinstance(b_labels, str) else list(b_labels)
    if set(a_labels) & set(b_labels):
        raise InvariantViolation("conditional entropy labels must be disjoint")
    rho_ab = partial_trace(rho, a_labels + b_labels)
    rho_b = partial_trace(rho, b_labels)
    return entropy(rho_ab) - entropy(rho_b)


def mutual_information(rho: DensityMatrix, a_labels, b_labels) -> float:
    """I(A:B) = S(A) + S(B) - S(AB)."""
    from .linops import partial_trace

    a_labels = [a_labels] if isinstance(a_labels, str) else list(a_labels)
    b_labels = [b_labels] if isinstance(b_labels, str) else list(b_labels)
    rho_a = partial_trace(rho, a_labels)
    rho_b = partial_trace(rho, b_labels)
    rho_ab = partial_trace(rho, a_labels + b_labels)
    return entropy(rho_a) + entropy(rho_b) - entropy(rho_ab)


def conditional_mutual_information(rho: DensityMatrix, a_labels, b_labels, c_labels) -> float:
    """I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)."""
    from .linops import partial_trace

    a_labels = [a_labels] if isinstance(a_labels, str) else list(a_labels)
    b_labels = [b_labels] if isinstance(b_labels, str) else list(b_labels)
    c_labels = [c_labels] if isinstance(c_labels, str) else list(c_labels)
    s_ac = entropy(partial_trace(rho, a_labels + c_labels))
    s_bc = entropy(partial_trace(rho, b_labels + c_labels))
    s_abc = entropy(partial_trace(rho, a_labels + b_labels + c_labels))
    s_c = entropy(partial_trace(rho, c_labels))
    return s_ac + s_bc - s_abc - s_c


def coherent_information(ch: KrausChannel, rho) -> float:
    """S(B) - S(E) for the dilated output U rho U^dag."""
    mat = _matrix_of(rho)
    if mat.shape[0] != ch.d_in:
        raise InvariantViolation(
            f"input dimension {mat.shape[0]} != channel d_in {ch.d_in}"
        )
    s_b = entropy(apply_arr(ch, mat))
    s_e = entropy(apply_arr(complementary(ch), mat))
    return s_b - s_e


# --- internal: entropy with gradient, for the optimizers --------------------

def entropy_and_gradmat(sigma: np.ndarray, floor: float = 1e-15):
    """Return S(sigma) in bits and G with dS = tr(G dsigma).

    G = -(log2 sigma + 1/ln2); eigenvalues are floored before the log so the
    gradient stays finite at rank-deficient points.
    """
    sigma = (sigma + dag(sigma)) / 2
    eigs, vecs = np.linalg.eigh(sigma)
    clipped = np.clip(eigs, 0.0, None)
    nz = clipped[clipped > 0.0]
    s = float(-np.sum(nz * np.log2(nz)))
    log_eigs = np.log2(np.clip(eigs, floor, None))
    g = -(vecs * (log_eigs + 1.0 / LN2)) @ dag(vecs)
    return s, g


def stack_entropy_terms_with_grad(mats: np.ndarray, floor: float = 1e-18):
    """sum_j p_j S(M_j / p_j) over a stack of unnormalized PSD matrices, plus
    the per-matrix gradient stack G_j with d(term_j) = tr(G_j dM_j).

    G_j = -log2 M_j + log2(tr M_j); the 1/ln2 pieces of the two chain terms
    cancel exactly.
    """
    mats = (mats + np.conj(np.transpose(mats, (0, 2, 1)))) / 2
    eigs, vecs = np.linalg.eigh(mats)
    clipped = np.clip(eigs, 0.0, None)
    p = clipped.sum(axis=1)
    nz = clipped[clipped > 0.0]
    val = float(-np.sum(nz * np.log2(nz)))
    pnz = p[p > 0.0]
    val += float(np.sum(pnz * np.log2(pnz)))
    diag = -np.log2(np.clip(eigs, floor, None)) + np.log2(np.clip(p, floor, None))[:, None]
    grads = np.einsum("jab,jb,jcb->jac", vecs, diag, vecs.conj(), optimize=True)
    return val, grads
