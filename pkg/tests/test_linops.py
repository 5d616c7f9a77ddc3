import numpy as np
import pytest

from chancap.linops import (
    DensityMatrix,
    InvariantViolation,
    PureState,
    SystemDims,
    eigvals_clipped,
    partial_trace,
    purify,
    random_density,
    random_isometry,
    single,
    tensor,
)

from oracles import kron_oracle, ptrace_oracle

BELL = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2


def bell_dm():
    return DensityMatrix(BELL, SystemDims(("A", "B"), (2, 2)))


def test_system_dims_invariants():
    with pytest.raises(InvariantViolation):
        SystemDims(("A", "A"), (2, 2))
    with pytest.raises(InvariantViolation):
        SystemDims(("A", "B"), (2, 0))
    dims = SystemDims(("A", "B", "C"), (2, 3, 2))
    assert dims.total == 12
    assert dims.dim_of("B") == 3


def test_tensor_identity_case():
    out = tensor(np.eye(2), np.eye(2))
    assert np.allclose(out, np.eye(4))


def test_tensor_trace_multiplies(rng):
    rho = random_density(2, 1).matrix
    sigma = random_density(3, 2).matrix
    prod = tensor(rho, sigma)
    assert np.isclose(prod.trace(), rho.trace() * sigma.trace())


def test_tensor_matches_index_oracle(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(tensor(a, b), kron_oracle(a, b))


def test_tensor_density_concatenates_labels():
    rho = random_density(single("A", 2), 1)
    sigma = random_density(single("B", 3), 2)
    prod = tensor(rho, sigma)
    assert prod.labels == ("A", "B")
    assert prod.dims.dims == (2, 3)


def test_partial_trace_bell():
    reduced = partial_trace(bell_dm(), ["A"])
    assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_product():
    rho = random_density(single("A", 2), 3)
    sigma = random_density(single("B", 2), 4)
    back = partial_trace(tensor(rho, sigma), ["A"])
    assert np.allclose(back.matrix, rho.matrix, atol=1e-12)


def test_partial_trace_matches_sum_oracle():
    rho = random_density(SystemDims(("A", "B"), (2, 3)), 5)
    left = partial_trace(rho, ["A"]).matrix
    right = partial_trace(rho, ["B"]).matrix
    assert np.allclose(left, ptrace_oracle(rho.matrix, (2, 3), keep_first=True), atol=1e-12)
    assert np.allclose(right, ptrace_oracle(rho.matrix, (2, 3), keep_first=False), atol=1e-12)


def test_partial_trace_unknown_label():
    with pytest.raises(InvariantViolation):
        partial_trace(bell_dm(), ["C"])


def test_partial_trace_preserves_order():
    rho = random_density(SystemDims(("A", "B", "C"), (2, 2, 2)), 9)
    out = partial_trace(rho, ["C", "A"])
    assert out.labels == ("A", "C")


def test_purify_maximally_mixed():
    rho = DensityMatrix(np.eye(2) / 2, single("A", 2))
    phi = purify(rho)
    assert phi.dims.labels == ("R", "A")
    back = partial_trace(phi.to_density(), ["A"])
    assert np.allclose(back.matrix, np.eye(2) / 2, atol=1e-10)


def test_purify_pure_state_trivial_reference():
    rho = DensityMatrix(np.diag([1.0, 0.0]), single("A", 2))
    phi = purify(rho)
    assert phi.dims.dim_of("R") == 1


def test_purify_spectrum():
    rho = DensityMatrix(np.diag([0.25, 0.75]), single("A", 2))
    phi = purify(rho)
    red = partial_trace(phi.to_density(), ["R"])
    assert np.allclose(np.sort(np.linalg.eigvalsh(red.matrix)), [0.25, 0.75], atol=1e-10)


@pytest.mark.parametrize("dim", [2, 3, 4, 6])
def test_purify_roundtrip_random(dim):
    rho = random_density(dim, 100 + dim)
    back = partial_trace(purify(rho).to_density(), list(rho.labels))
    assert np.max(np.abs(back.matrix - rho.matrix)) < 1e-10


def test_random_density_deterministic():
    a = random_density(3, 7)
    b = random_density(3, 7)
    assert np.array_equal(a.matrix, b.matrix)
    eigs = np.linalg.eigvalsh(a.matrix)
    assert eigs.min() >= -1e-12
    assert np.isclose(eigs.sum(), 1.0)


def test_random_isometry_deterministic():
    a = random_isometry(2, 6, 3)
    b = random_isometry(2, 6, 3)
    assert np.array_equal(a, b)
    assert np.linalg.norm(a.conj().T @ a - np.eye(2)) < 1e-10
    with pytest.raises(InvariantViolation):
        random_isometry(4, 2, 0)


def test_density_invariants_enforced():
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.diag([0.6, 0.6]), single("A", 2))  # trace
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.array([[0.5, 0.5], [0.1, 0.5]]), single("A", 2))  # herm
    with pytest.raises(InvariantViolation):
        DensityMatrix(np.diag([1.2, -0.2]), single("A", 2))  # negativity


def test_eigenvalue_clipping_window():
    # inside the window: clipped to zero
    vals = eigvals_clipped(np.diag([1.0, -5e-11]))
    assert vals.min() == 0.0
    # outside the window: raises
    with pytest.raises(InvariantViolation):
        eigvals_clipped(np.diag([1.0, -1e-8]))


def test_pure_state_norm_check():
    with pytest.raises(InvariantViolation):
        PureState(np.array([1.0, 1.0]), single("A", 2))
