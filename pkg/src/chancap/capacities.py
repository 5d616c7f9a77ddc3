"""Single-letter capacity optimizers: chi, Q1, P1, C_E, Q_A, and the
MSW-identity cross-check.

Nonconcave objectives (chi, Q1, P1) report certified lower bounds: any
ensemble/input is feasible, so the best value found is achievable.  Concave
objectives (C_E, Q_A) carry a convergence certificate instead.  Input states
are parametrized as rho = M M^dag / tr(M M^dag) so the optimizers roam the
interior of the state space without projections.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .channels import KrausChannel, apply_arr, complementary
from .entropics import entropy, entropy_and_gradmat
from .linops import dag
from .optim import (
    OptimOptions,
    central_diff_grad,
    complex_from_reals,
    density_from_params,
    derive_seed,
    minimize_restarts,
    n_density_params,
    params_from_density,
    probs_from_weights,
    reals_from_complex,
)

BOUND_CERT_LOWER = "certified_lower"
BOUND_CERT_EXACT = "certified_exact"
BOUND_HEURISTIC = "heuristic"


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted list of states on a fixed input system."""

    probs: np.ndarray
    states: tuple  # density matrices (pure members stored as projectors)

    def average(self) -> np.ndarray:
        return sum(p * s for p, s in zip(self.probs, self.states))


@dataclass
class CapacityReport:
    quantity: str
    value: float
    bound_direction: str
    raw_value: float = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.raw_value is None:
            self.raw_value = self.value


def _capacity_opts(opts) -> OptimOptions:
    return opts if opts is not None else OptimOptions(restarts=8)


# --- shared gradient plumbing ------------------------------------------------

def _apply_stack(stack: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("kab,bc,kdc->ad", stack, rho, stack.conj(), optimize=True)


def _adjoint_stack(stack: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.einsum("kba,bc,kcd->ad", stack.conj(), g, stack, optimize=True)


def _density_chain(h: np.ndarray, m: np.ndarray, rho: np.ndarray, t: float) -> np.ndarray:
    """Real-parameter gradient of f at rho = M M^dag / t given H = df/drho."""
    c = (h @ m) / t - (np.real(np.trace(h @ rho)) / t) * m
    return np.concatenate([2 * c.real.reshape(-1), 2 * c.imag.reshape(-1)])


def _state_sampler(d: int):
    def sample(rng):
        return rng.normal(size=n_density_params(d))

    return sample


# --- coherent information Q1 -------------------------------------------------

def q1(ch: KrausChannel, opts: OptimOptions = None, warm_inputs=()) -> CapacityReport:
    """max_rho S(B) - S(E); raw maximum may be negative, value is clamped."""
    ch.require_cptp()
    opts = _capacity_opts(opts)
    d = ch.d_in
    stack = ch.stack()
    cstack = complementary(ch).stack()

    def split(x):
        rho, m, t = density_from_params(x, d)
        s_b, g_b = entropy_and_gradmat(_apply_stack(stack, rho))
        s_e, g_e = entropy_and_gradmat(_apply_stack(cstack, rho))
        return rho, m, t, s_b, g_b, s_e, g_e

    def fun(x):
        _, _, _, s_b, _, s_e, _ = split(x)
        return -(s_b - s_e)

    def jac(x):
        rho, m, t, _, g_b, _, g_e = split(x)
        h = _adjoint_stack(stack, g_b) - _adjoint_stack(cstack, g_e)
        return -_density_chain(h, m, rho, t)

    warm = [params_from_density(np.eye(d) / d)]
    warm += [params_from_density(np.asarray(r)) for r in warm_inputs]
    res = minimize_restarts(fun, _state_sampler(d), opts, jac=jac, warm_starts=warm)
    raw = -res.fun
    rho_best, _, _ = density_from_params(res.x, d)
    diag = res.diagnostics
    diag["best_input"] = rho_best
    return CapacityReport("q1", max(raw, 0.0), BOUND_CERT_LOWER, raw_value=raw, diagnostics=diag)


# --- Holevo capacity chi -----------------------------------------------------

def _ensemble_from_params(x: np.ndarray, m: int, d: int):
    w = x[:m]
    p, w_total = probs_from_weights(w)
    v = complex_from_reals(x[m:], (m, d))
    norms = np.linalg.norm(v, axis=1)
    norms = np.where(norms < 1e-12, 1.0, norms)
    phi = v / norms[:, None]
    return p, phi, w, w_total, v, norms


def _ensemble_params(probs, states) -> np.ndarray:
    w = np.sqrt(np.asarray(probs, dtype=float))
    v = np.asarray(states, dtype=complex)
    return np.concatenate([w, v.real.reshape(-1), v.imag.reshape(-1)])


def holevo_capacity(ch: KrausChannel, opts: OptimOptions = None, warm_ensembles=()) -> CapacityReport:
    """max over pure-state ensembles of S(sum p N(phi)) - sum p S(N(phi))."""
    ch.require_cptp()
    opts = _capacity_opts(opts)
    d = ch.d_in
    m = d * d
    stack = ch.stack()

    def pieces(x):
        p, phi, w, w_total, v, norms = _ensemble_from_params(x, m, d)
        y = np.einsum("kab,ib->ika", stack, phi, optimize=True)
        sig = np.einsum("ika,ikb->iab", y, y.conj(), optimize=True)
        sbar = np.einsum("i,iab->ab", p, sig)
        return p, phi, w, w_total, v, norms, sig, sbar

    def fun(x):
        p, _, _, _, _, _, sig, sbar = pieces(x)
        s_bar, _ = entropy_and_gradmat(sbar)
        s_i = np.array([entropy_and_gradmat(s)[0] for s in sig])
        return -(s_bar - float(p @ s_i))

    def jac(x):
        p, phi, w, w_total, v, norms, sig, sbar = pieces(x)
        _, g_bar = entropy_and_gradmat(sbar)
        grads = np.zeros_like(x)
        c = np.zeros(m)
        for i in range(m):
            s_i, g_i = entropy_and_gradmat(sig[i])
            c[i] = np.real(np.trace(g_bar @ sig[i])) - s_i
            h_i = p[i] * _adjoint_stack(stack, g_bar - g_i)
            hv = h_i @ phi[i]
            coef = np.real(np.vdot(phi[i], hv))
            cv = (hv - coef * phi[i]) / norms[i]
            grads[m + i * d : m + (i + 1) * d] = 2 * cv.real
            start = m + m * d
            grads[start + i * d : start + (i + 1) * d] = 2 * cv.imag
        cbar = float(p @ c)
        grads[:m] = (2 * w / w_total) * (c - cbar)
        return -grads

    def sampler(rng):
        return np.concatenate(
            [rng.normal(size=m), rng.normal(size=2 * m * d)]
        )

    # computational-basis ensemble as a deterministic warm start
    basis = np.zeros((m, d), dtype=complex)
    for i in range(m):
        basis[i, i % d] = 1.0
    warm = [_ensemble_params(np.ones(m) / m, basis)]
    for probs, states in warm_ensembles:
        pr = np.zeros(m)
        st = np.zeros((m, d), dtype=complex)
        kk = min(len(probs), m)
        pr[:kk] = np.asarray(probs[:kk])
        st[:kk] = np.asarray(states[:kk])
        st[kk:] = basis[kk:]
        warm.append(_ensemble_params(pr, st))
    res = minimize_restarts(fun, sampler, opts, jac=jac, warm_starts=warm)
    raw = -res.fun
    p, phi, *_ = _ensemble_from_params(res.x, m, d)
    diag = res.diagnostics
    diag["best_ensemble"] = Ensemble(p, tuple(np.outer(f, f.conj()) for f in phi))
    diag["best_states"] = phi
    diag["best_input"] = np.einsum("i,ia,ib->ab", p, phi, phi.conj())
    return CapacityReport("chi", max(raw, 0.0), BOUND_CERT_LOWER, raw_value=raw, diagnostics=diag)


# --- private information P1 --------------------------------------------------

def p1(ch: KrausChannel, opts: OptimOptions = None, warm_inputs=(), t_count: int = None) -> CapacityReport:
    """max over cq ensembles {p_t, rho_t} of I(T:B) - I(T:E)."""
    ch.require_cptp()
    opts = _capacity_opts(opts)
    d = ch.d_in
    t_count = t_count or d * d
    stack = ch.stack()
    cstack = complementary(ch).stack()
    npar_m = 2 * d * d

    def unpack(x):
        w = x[:t_count]
        p, w_total = probs_from_weights(w)
        ms = [complex_from_reals(x[t_count + t * npar_m : t_count + (t + 1) * npar_m], (d, d)) for t in range(t_count)]
        rhos, taus = [], []
        for mt in ms:
            mm = mt @ mt.conj().T
            tau = mm.trace().real
            if tau < 1e-14:
                tau = 1.0
                mm = np.eye(d) / d
            rhos.append(mm / tau)
            taus.append(tau)
        return w, p, w_total, ms, rhos, taus

    def pieces(x):
        w, p, w_total, ms, rhos, taus = unpack(x)
        sig_b = [_apply_stack(stack, r) for r in rhos]
        sig_e = [_apply_stack(cstack, r) for r in rhos]
        bar_b = sum(pt * s for pt, s in zip(p, sig_b))
        bar_e = sum(pt * s for pt, s in zip(p, sig_e))
        return w, p, w_total, ms, rhos, taus, sig_b, sig_e, bar_b, bar_e

    def fun(x):
        _, p, _, _, _, _, sig_b, sig_e, bar_b, bar_e = pieces(x)
        val = entropy_and_gradmat(bar_b)[0] - entropy_and_gradmat(bar_e)[0]
        for pt, sb, se in zip(p, sig_b, sig_e):
            val -= pt * (entropy_and_gradmat(sb)[0] - entropy_and_gradmat(se)[0])
        return -val

    def jac(x):
        w, p, w_total, ms, rhos, taus, sig_b, sig_e, bar_b, bar_e = pieces(x)
        _, gbar_b = entropy_and_gradmat(bar_b)
        _, gbar_e = entropy_and_gradmat(bar_e)
        grads = np.zeros_like(x)
        c = np.zeros(t_count)
        for t in range(t_count):
            s_tb, g_tb = entropy_and_gradmat(sig_b[t])
            s_te, g_te = entropy_and_gradmat(sig_e[t])
            c[t] = (
                np.real(np.trace(gbar_b @ sig_b[t])) - s_tb
                - np.real(np.trace(gbar_e @ sig_e[t])) + s_te
            )
            h_t = p[t] * (
                _adjoint_stack(stack, gbar_b - g_tb)
                - _adjoint_stack(cstack, gbar_e - g_te)
            )
            grads[t_count + t * npar_m : t_count + (t + 1) * npar_m] = _density_chain(
                h_t, ms[t], rhos[t], taus[t]
            )
        cbar = float(p @ c)
        grads[:t_count] = (2 * w / w_total) * (c - cbar)
        return -grads

    def sampler(rng):
        return np.concatenate([rng.normal(size=t_count), rng.normal(size=t_count * npar_m)])

    warm = []
    for rho_in in warm_inputs:
        # spectral ensemble of a promising input: pure members realize the
        # coherent information of that input
        eigs, vecs = np.linalg.eigh(np.asarray(rho_in))
        x0 = np.zeros(t_count + t_count * npar_m)
        probs = np.zeros(t_count)
        kk = min(len(eigs), t_count)
        probs[:kk] = np.clip(eigs[:kk], 0.0, None)
        x0[:t_count] = np.sqrt(probs / max(probs.sum(), 1e-12))
        for t in range(t_count):
            proj = (
                np.outer(vecs[:, t % len(eigs)], vecs[:, t % len(eigs)].conj())
                if t < kk
                else np.eye(d) / d
            )
            x0[t_count + t * npar_m : t_count + (t + 1) * npar_m] = params_from_density(proj)
        warm.append(x0)
    res = minimize_restarts(fun, sampler, opts, jac=jac, warm_starts=warm)
    raw = -res.fun
    _, p_best, _, _, rhos_best, _ = unpack(res.x)
    diag = res.diagnostics
    diag["best_ensemble"] = Ensemble(p_best, tuple(rhos_best))
    diag["best_input"] = sum(pt * r for pt, r in zip(p_best, rhos_best))
    return CapacityReport("p1", max(raw, 0.0), BOUND_CERT_LOWER, raw_value=raw, diagnostics=diag)


# --- entanglement-assisted capacity C_E ---------------------------------------

def c_e(ch: KrausChannel, opts: OptimOptions = None) -> CapacityReport:
    """max_rho I(R:B) = S(rho) + S(N(rho)) - S(N^c(rho)); concave objective."""
    ch.require_cptp()
    opts = opts if opts is not None else OptimOptions(restarts=3)
    d = ch.d_in
    stack = ch.stack()
    cstack = complementary(ch).stack()

    def split(x):
        rho, m, t = density_from_params(x, d)
        s_r, g_r = entropy_and_gradmat(rho)
        s_b, g_b = entropy_and_gradmat(_apply_stack(stack, rho))
        s_e, g_e = entropy_and_gradmat(_apply_stack(cstack, rho))
        return rho, m, t, s_r, g_r, s_b, g_b, s_e, g_e

    def fun(x):
        _, _, _, s_r, _, s_b, _, s_e, _ = split(x)
        return -(s_r + s_b - s_e)

    def jac(x):
        rho, m, t, _, g_r, _, g_b, _, g_e = split(x)
        h = g_r + _adjoint_stack(stack, g_b) - _adjoint_stack(cstack, g_e)
        return -_density_chain(h, m, rho, t)

    warm = [params_from_density(np.eye(d) / d)]
    res = minimize_restarts(fun, _state_sampler(d), opts, jac=jac, warm_starts=warm)
    grad_norm = float(np.linalg.norm(jac(res.x)))
    rho_best, _, _ = density_from_params(res.x, d)
    diag = res.diagnostics
    diag["gradient_norm"] = grad_norm
    diag["best_input"] = rho_best
    direction = BOUND_CERT_EXACT if grad_norm < 1e-7 else BOUND_CERT_LOWER
    return CapacityReport("c_e", max(-res.fun, 0.0), direction, raw_value=-res.fun, diagnostics=diag)


# --- environment-assisted capacity Q_A ---------------------------------------

def q_a(ch: KrausChannel, opts: OptimOptions = None) -> CapacityReport:
    """max_rho min{S(rho), S(N(rho))}; max of a min of concave functionals."""
    ch.require_cptp()
    opts = opts if opts is not None else OptimOptions(restarts=4)
    d = ch.d_in
    stack = ch.stack()
    npar = n_density_params(d)

    def split(x):
        rho, m, t = density_from_params(x[:npar], d)
        s_in, g_in = entropy_and_gradmat(rho)
        s_out, g_out = entropy_and_gradmat(_apply_stack(stack, rho))
        return rho, m, t, s_in, g_in, s_out, g_out

    def neg_s(x):
        return -x[npar]

    def neg_s_grad(x):
        g = np.zeros_like(x)
        g[npar] = -1.0
        return g

    def con_in(x):
        _, _, _, s_in, _, _, _ = split(x)
        return s_in - x[npar]

    def con_in_grad(x):
        rho, m, t, _, g_in, _, _ = split(x)
        g = np.zeros_like(x)
        g[:npar] = _density_chain(g_in, m, rho, t)
        g[npar] = -1.0
        return g

    def con_out(x):
        _, _, _, _, _, s_out, _ = split(x)
        return s_out - x[npar]

    def con_out_grad(x):
        rho, m, t, _, _, _, g_out = split(x)
        g = np.zeros_like(x)
        g[:npar] = _density_chain(_adjoint_stack(stack, g_out), m, rho, t)
        g[npar] = -1.0
        return g

    constraints = [
        {"type": "ineq", "fun": con_in, "jac": con_in_grad},
        {"type": "ineq", "fun": con_out, "jac": con_out_grad},
    ]

    def solve(x0):
        return minimize(
            neg_s,
            x0,
            jac=neg_s_grad,
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": opts.max_iters, "ftol": 1e-12},
        )

    def value_at(xp):
        rho, _, _ = density_from_params(xp, d)
        return min(entropy(rho), entropy(_apply_stack(stack, rho))), rho

    starts = [params_from_density(np.eye(d) / d)]
    for r in range(opts.restarts):
        rng = np.random.default_rng(derive_seed(opts.seed, "qa", r))
        starts.append(rng.normal(size=npar))
    best_val, best_rho, values = -1.0, None, []
    for x0 in starts:
        v0, _ = value_at(x0)
        res = solve(np.concatenate([x0, [v0]]))
        val, rho = value_at(res.x[:npar])
        values.append(float(val))
        if val > best_val:
            best_val, best_rho = val, rho
    diag = {"restart_values": values, "best_input": best_rho, "restarts": len(starts)}
    return CapacityReport("q_a", float(best_val), BOUND_CERT_EXACT, diagnostics=diag)


# --- MSW identity cross-check --------------------------------------------------

def msw_chi(ch: KrausChannel, opts: OptimOptions = None) -> CapacityReport:
    """max_rho S(B) - E_F(B:E) on the dilated output; cross-check for chi."""
    from .entanglement import entanglement_of_formation
    from .channels import kraus_to_stinespring

    ch.require_cptp()
    opts = opts if opts is not None else OptimOptions(restarts=2, max_iters=50)
    d = ch.d_in
    stack = ch.stack()
    u = kraus_to_stinespring(ch)
    d_out, d_env = u.d_out, u.d_env
    umat = u.matrix
    ef_opts = OptimOptions(restarts=3, max_iters=100, seed=derive_seed(opts.seed, "msw-ef"))

    def objective(x):
        rho, _, _ = density_from_params(x, d)
        s_b = entropy(_apply_stack(stack, rho))
        rho_be = umat @ rho @ dag(umat)
        ef = entanglement_of_formation(rho_be, (d_out, d_env), opts=ef_opts)
        return -(s_b - ef.value)

    chi_rep = holevo_capacity(ch, OptimOptions(restarts=6, seed=derive_seed(opts.seed, "msw-chi")))
    starts = [params_from_density(chi_rep.diagnostics["best_input"]), params_from_density(np.eye(d) / d)]
    for r in range(max(opts.restarts - 2, 0)):
        rng = np.random.default_rng(derive_seed(opts.seed, "msw", r))
        starts.append(rng.normal(size=n_density_params(d)))
    best_val, best_x, values = -np.inf, None, []
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": opts.max_iters, "xatol": 1e-6, "fatol": 1e-9},
        )
        values.append(float(-res.fun))
        if -res.fun > best_val:
            best_val, best_x = -res.fun, res.x
    rho_best, _, _ = density_from_params(best_x, d)
    diag = {
        "restart_values": values,
        "best_input": rho_best,
        "holevo_cross_check": chi_rep.value,
    }
    return CapacityReport("msw_chi", float(best_val), BOUND_HEURISTIC, diagnostics=diag)
