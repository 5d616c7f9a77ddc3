"""Bipartite entanglement measures: entanglement of formation, the
measurement-based one-way correlation C_<-, the ensemble measure G built on
it, and PPT screening.

Decompositions of a rank-r state are parametrized by m x r isometries acting
on the eigen-purification vectors, which spans exactly the size-m
decompositions.  The optimizers are multi-restart local searches with
central-difference gradients; E_F results are certified upper bounds (any
decomposition is feasible), while C_<- and G are heuristic values and every
report carries that flag.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linops import DensityMatrix, InvariantViolation, dag
from .entropics import entropy, stack_entropy_terms_with_grad
from .optim import (
    OptimOptions,
    antiherm_params_from_unitary,
    derive_seed,
    expm_isometry_with_pullback,
    minimize_restarts,
    n_antiherm_params,
)

TOL_DECOMP = 1e-7
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class Decomposition:
    """Pure-state decomposition sum_i p_i |phi_i><phi_i| of a bipartite state."""

    probs: np.ndarray
    states: tuple  # vectors on B (x) E
    dims: tuple

    def reconstruct(self) -> np.ndarray:
        d = self.dims[0] * self.dims[1]
        out = np.zeros((d, d), dtype=complex)
        for p, v in zip(self.probs, self.states):
            out += p * np.outer(v, v.conj())
        return out

    def check(self, target: np.ndarray, tol: float = TOL_DECOMP) -> bool:
        return float(np.linalg.norm(self.reconstruct() - target)) <= tol


@dataclass(frozen=True)
class POVM:
    """PSD elements summing to the identity on one subsystem."""

    elements: tuple

    def validate(self, tol: float = 1e-8) -> bool:
        total = sum(self.elements)
        d = total.shape[0]
        if np.linalg.norm(total - np.eye(d), ord=2) > tol:
            return False
        for p in self.elements:
            if np.linalg.eigvalsh((p + dag(p)) / 2).min() < -1e-10:
                return False
        return True


@dataclass
class MeasureResult:
    value: float
    bound_direction: str = "heuristic"
    decomposition: Decomposition = None
    diagnostics: dict = field(default_factory=dict)


def _state_and_dims(rho, dims):
    if isinstance(rho, DensityMatrix):
        if len(rho.dims.dims) != 2:
            raise InvariantViolation("bipartite state required (two labels)")
        return rho.matrix, rho.dims.dims
    mat = np.asarray(rho, dtype=complex)
    if dims is None:
        raise InvariantViolation("dims=(d_B, d_E) required for raw arrays")
    d_b, d_e = int(dims[0]), int(dims[1])
    if mat.shape != (d_b * d_e, d_b * d_e):
        raise InvariantViolation(f"shape {mat.shape} does not match dims {dims}")
    return mat, (d_b, d_e)


def _eigen_vectors(mat: np.ndarray):
    """Scaled eigen-purification vectors w_k = sqrt(l_k) |e_k> (columns)."""
    eigs, vecs = np.linalg.eigh((mat + dag(mat)) / 2)
    mask = eigs > RANK_CUTOFF
    return vecs[:, mask] * np.sqrt(eigs[mask])


def default_decomposition_size(rank: int) -> int:
    """Default ensemble size: capped at rank^2, trimmed for desk-scale runs."""
    if rank <= 1:
        return 1
    return min(rank * rank, 2 * rank)


def _unnormalized_entropy_terms(mats: np.ndarray) -> float:
    """sum_i p_i S(M_i / p_i) for a stack of unnormalized PSD matrices."""
    return stack_entropy_terms_with_grad(mats)[0]


def _decomposition_from_u(w: np.ndarray, u: np.ndarray, dims) -> Decomposition:
    phi = w @ u.T  # columns are unnormalized member vectors
    norms2 = np.sum(np.abs(phi) ** 2, axis=0)
    probs, states = [], []
    for i in range(phi.shape[1]):
        if norms2[i] < 1e-14:
            continue
        probs.append(norms2[i])
        states.append(phi[:, i] / np.sqrt(norms2[i]))
    return Decomposition(np.array(probs), tuple(states), tuple(dims))


def entanglement_of_formation(rho, dims=None, opts: OptimOptions = None, size: int = None) -> MeasureResult:
    """min over decompositions of the average member entanglement.

    The result is a certified upper bound on E_F: the reported decomposition
    is feasible and achieves it.
    """
    mat, (d_b, d_e) = _state_and_dims(rho, dims)
    opts = opts if opts is not None else OptimOptions()
    w = _eigen_vectors(mat)
    r = w.shape[1]
    if r == 1:
        v = w[:, 0] / np.linalg.norm(w[:, 0])
        x = v.reshape(d_b, d_e)
        val = entropy(x @ dag(x))
        dec = Decomposition(np.array([1.0]), (v,), (d_b, d_e))
        return MeasureResult(val, "certified_upper", dec, {"pure_state": True})
    m = size or default_decomposition_size(r)
    m = max(m, r)
    npar = n_antiherm_params(m)

    def value_and_grad(x):
        u, pullback = expm_isometry_with_pullback(x, m, r)
        phi = w @ u.T
        xs = phi.T.reshape(m, d_b, d_e)
        mats = xs @ xs.conj().transpose(0, 2, 1)
        val, ghat = stack_entropy_terms_with_grad(mats)
        # df/d(phi_i.conj) = Ghat_i X_i flattened; pull back through phi = W u^T
        gphi = np.einsum("iab,ibe->iae", ghat, xs).reshape(m, d_b * d_e)
        return val, pullback(gphi @ w.conj())

    def fun(x):
        return value_and_grad(x)[0]

    def jac(x):
        return value_and_grad(x)[1]

    def sampler(rng):
        return rng.normal(size=npar)

    res = minimize_restarts(fun, sampler, opts, jac=jac, warm_starts=[np.zeros(npar)])
    u_best = expm_isometry_with_pullback(res.x, m, r)[0]
    dec = _decomposition_from_u(w, u_best, (d_b, d_e))
    diag = res.diagnostics
    diag["size"] = m
    diag["rank"] = r
    return MeasureResult(float(res.fun), "certified_upper", dec, diag)


# --- C_arrow: one-way measured correlation ----------------------------------

def _conditional_terms(sigma_t: np.ndarray, a: np.ndarray) -> float:
    # M_j = (1 (x) a_j^dag) sigma (1 (x) a_j), stacked over j
    mats = np.einsum("benf,je,jf->jbn", sigma_t, a.conj(), a, optimize=True)
    return _unnormalized_entropy_terms(mats)


def _conditional_terms_with_grad(sigma_t: np.ndarray, a: np.ndarray):
    """Value and df/d(a_j.conj) for the averaged post-measurement entropy."""
    mats = np.einsum("benf,je,jf->jbn", sigma_t, a.conj(), a, optimize=True)
    val, ghat = stack_entropy_terms_with_grad(mats)
    t = np.einsum("jnb,benf->jef", ghat, sigma_t, optimize=True)
    g_a = np.einsum("jef,jf->je", t, a, optimize=True)
    return val, g_a


def _is_pure(mat: np.ndarray) -> bool:
    return float(np.real(np.trace(mat @ mat))) > 1.0 - 1e-9


def c_arrow(sigma, dims=None, opts: OptimOptions = None) -> MeasureResult:
    """S(sigma_B) minus the best average conditional entropy after a POVM on E.

    Pure inputs short-circuit to the entropy of entanglement (the Schmidt
    measurement attains zero residual entropy exactly).
    """
    mat, (d_b, d_e) = _state_and_dims(sigma, dims)
    opts = opts if opts is not None else OptimOptions()
    sigma_t = mat.reshape(d_b, d_e, d_b, d_e)
    rho_b = np.trace(sigma_t, axis1=1, axis2=3)
    s_b = entropy(rho_b)
    if _is_pure(mat):
        return MeasureResult(s_b, "heuristic", None, {"pure_closed_form": True})

    # POVM elements outside supp(sigma_E) never fire, so the search runs on
    # the support-projected state.
    rho_e = np.trace(sigma_t, axis1=0, axis2=2)
    eigs_e, vecs_e = np.linalg.eigh((rho_e + dag(rho_e)) / 2)
    keep = eigs_e > 1e-12
    v_supp = vecs_e[:, keep]
    d_s = int(keep.sum())
    proj = np.kron(np.eye(d_b), v_supp)
    mat_s = dag(proj) @ mat @ proj
    sigma_s = mat_s.reshape(d_b, d_s, d_b, d_s)
    m = d_s * d_s
    npar = n_antiherm_params(m)

    def value_and_grad(x):
        u, pullback = expm_isometry_with_pullback(x, m, d_s)
        a = u.conj()  # rows are the POVM vectors; completeness from u^dag u = 1
        val, g_a = _conditional_terms_with_grad(sigma_s, a)
        return val, pullback(g_a.conj())

    def fun(x):
        return value_and_grad(x)[0]

    def jac(x):
        return value_and_grad(x)[1]

    # In the projected frame the E marginal is diagonal, so the zero start is
    # the eigenbasis measurement.  Projective measurements are stationary
    # points of the POVM manifold, so each deterministic start also gets a
    # slightly perturbed copy that can descend away from saddles.
    warm = [np.zeros(npar)]
    fourier = np.array(
        [[np.exp(2j * np.pi * i * j / d_s) / np.sqrt(d_s) for j in range(d_s)] for i in range(d_s)]
    )
    full = np.eye(m, dtype=complex)
    full[:d_s, :d_s] = fourier
    q, _ = np.linalg.qr(full)
    warm.append(antiherm_params_from_unitary(q))
    rng0 = np.random.default_rng(derive_seed(opts.seed, "carrow-perturb"))
    warm += [w + 0.05 * rng0.normal(size=npar) for w in list(warm)]
    eff_opts = opts.but(restarts=max(opts.restarts, len(warm) + 2))

    def sampler(rng):
        return rng.normal(size=npar)

    res = minimize_restarts(fun, sampler, eff_opts, jac=jac, warm_starts=warm)
    a_s = expm_isometry_with_pullback(res.x, m, d_s)[0].conj()
    elements = [v_supp @ np.outer(v, v.conj()) @ dag(v_supp) for v in a_s]
    if d_s < d_e:
        elements.append(np.eye(d_e) - v_supp @ dag(v_supp))
    povm = POVM(tuple(elements))
    diag = res.diagnostics
    diag["min_conditional"] = float(res.fun)
    diag["povm"] = povm
    value = max(s_b - float(res.fun), 0.0)
    return MeasureResult(value, "heuristic", None, diag)


# --- G measure ----------------------------------------------------------------

def _pair_partitions(m: int):
    """Two-group splits of range(m), lighter than the full partition lattice."""
    idx = list(range(m))
    seen = set()
    for size in range(1, m // 2 + 1):
        for left in combinations(idx, size):
            right = tuple(i for i in idx if i not in left)
            key = (left, right) if left < right else (right, left)
            if key not in seen and left and right:
                seen.add(key)
                yield [list(left), list(right)]


def g_measure(rho, dims=None, opts: OptimOptions = None, size: int = None, include_pairings: bool = True) -> MeasureResult:
    """min over mixed-state ensembles of the average C_<-.

    Ensembles are realized as partial mixtures of a size-m pure decomposition
    grouped by a partition parameter.  Candidates evaluated: all-singleton
    groups (pure members, C_<- closed form), the trivial single group (plain
    C_<- of the state), and two-group partitions when the decomposition is
    small.  Heuristic value; a local minimum with restart diagnostics.
    """
    mat, (d_b, d_e) = _state_and_dims(rho, dims)
    opts = opts if opts is not None else OptimOptions()
    if _is_pure(mat):
        res = c_arrow(mat, (d_b, d_e))
        res.diagnostics["candidates"] = {"pure": res.value}
        return res
    w = _eigen_vectors(mat)
    r = w.shape[1]
    m = size or default_decomposition_size(r)
    m = max(m, r)
    candidates = {}

    # Candidate 1: all singletons -> average entanglement of pure members,
    # which is exactly the E_F search space.
    ef = entanglement_of_formation(mat, (d_b, d_e), opts=opts, size=m)
    candidates["singletons"] = ef.value
    best_value = ef.value
    best_tag = "singletons"

    # Candidate 2: one group, i.e. C_<- of the state itself.
    ca = c_arrow(mat, (d_b, d_e), opts=opts.but(restarts=max(opts.restarts // 2, 4)))
    candidates["whole"] = ca.value
    if ca.value < best_value:
        best_value, best_tag = ca.value, "whole"

    # Candidate 3: two-group partitions, optimizing the decomposition and
    # both group POVMs jointly (central-difference gradients; small spaces).
    if include_pairings and m <= 6:
        n_u = n_antiherm_params(m)
        m_povm = d_e * d_e
        n_p = n_antiherm_params(m_povm)
        pair_opts = opts.but(restarts=max(opts.restarts // 4, 2), max_iters=120)
        pair_values = []
        for groups in _pair_partitions(m):
            def fun(x, groups=groups):
                u = expm_isometry_with_pullback(x[:n_u], m, r)[0]
                phi = w @ u.T
                total = 0.0
                for g_i, g in enumerate(groups):
                    block = phi[:, g]
                    r_g = block @ dag(block)  # unnormalized group state
                    p_g = float(np.real(np.trace(r_g)))
                    if p_g < 1e-12:
                        continue
                    rt = r_g.reshape(d_b, d_e, d_b, d_e)
                    xb = np.trace(rt, axis1=1, axis2=3)
                    eigs = np.clip(np.linalg.eigvalsh(xb), 0.0, None)
                    nz = eigs[eigs > 0]
                    s_b_un = float(-np.sum(nz * np.log2(nz))) + p_g * np.log2(p_g)
                    a = expm_isometry_with_pullback(
                        x[n_u + g_i * n_p : n_u + (g_i + 1) * n_p], m_povm, d_e
                    )[0].conj()
                    total += s_b_un - _conditional_terms(rt, a)
                return total

            def sampler(rng, groups=groups):
                return rng.normal(size=n_u + len(groups) * n_p)

            warm = [np.zeros(n_u + len(groups) * n_p)]
            res = minimize_restarts(fun, sampler, pair_opts, warm_starts=warm)
            pair_values.append(float(res.fun))
        if pair_values:
            candidates["pairings"] = min(pair_values)
            if candidates["pairings"] < best_value:
                best_value, best_tag = candidates["pairings"], "pairings"

    diag = {"candidates": candidates, "best_candidate": best_tag, "size": m}
    dec = ef.decomposition if best_tag == "singletons" else None
    return MeasureResult(float(max(best_value, 0.0)), "heuristic", dec, diag)


# --- PPT screening -------------------------------------------------------------

@dataclass(frozen=True)
class PptReport:
    is_ppt: bool
    min_eigenvalue: float
    decidable: str  # "decidable" for 2x2 / 2x3 cuts, else "ppt_only"


def partial_transpose(mat: np.ndarray, dims) -> np.ndarray:
    d_b, d_e = dims
    t = mat.reshape(d_b, d_e, d_b, d_e)
    return t.transpose(0, 3, 2, 1).reshape(d_b * d_e, d_b * d_e)


def ppt_check(rho, dims=None) -> PptReport:
    """Partial-transpose spectrum check on the declared bipartition."""
    mat, (d_b, d_e) = _state_and_dims(rho, dims)
    pt = partial_transpose(mat, (d_b, d_e))
    min_eig = float(np.linalg.eigvalsh((pt + dag(pt)) / 2).min())
    decidable = "decidable" if sorted((d_b, d_e)) in ([2, 2], [2, 3]) else "ppt_only"
    return PptReport(is_ppt=min_eig >= -1e-10, min_eigenvalue=min_eig, decidable=decidable)
