import numpy as np
import pytest

from chancap.entropics import (
    coherent_information,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from chancap.linops import (
    DensityMatrix,
    SystemDims,
    dag,
    partial_trace,
    purify,
    random_density,
    random_isometry,
    single,
    tensor,
)
from chancap.zoo import amplitude_damping_channel, full_dephasing_channel, identity_channel

from oracles import amplitude_damping_dilation, binary_entropy, ptrace_oracle, vn_entropy

BELL = DensityMatrix(np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2, SystemDims(("A", "B"), (2, 2)))


def test_entropy_maximally_mixed():
    assert np.isclose(entropy(np.eye(2) / 2), 1.0)


def test_entropy_pure():
    assert np.isclose(entropy(np.diag([1.0, 0.0])), 0.0)


def test_entropy_binary_closed_form():
    assert np.isclose(entropy(np.diag([0.25, 0.75])), binary_entropy(0.25), atol=1e-12)
    assert np.isclose(binary_entropy(0.25), 0.8112781244591328)


def test_entropy_unitary_invariance():
    rho = random_density(4, 3)
    v = random_isometry(4, 4, 5)
    assert np.isclose(entropy(v @ rho.matrix @ dag(v)), entropy(rho), atol=1e-9)


def test_entropy_concavity():
    for seed in range(4):
        rho = random_density(3, seed).matrix
        sig = random_density(3, seed + 50).matrix
        lam = 0.3
        mix = lam * rho + (1 - lam) * sig
        assert entropy(mix) >= lam * entropy(rho) + (1 - lam) * entropy(sig) - 1e-9


def test_conditional_entropy_bell():
    assert np.isclose(conditional_entropy(BELL, "A", "B"), -1.0, atol=1e-10)


def test_conditional_entropy_product():
    rho = tensor(
        DensityMatrix(np.eye(2) / 2, single("A", 2)),
        DensityMatrix(np.eye(2) / 2, single("B", 2)),
    )
    assert np.isclose(conditional_entropy(rho, "A", "B"), 1.0, atol=1e-10)


def test_conditional_entropy_matches_difference():
    rho = random_density(SystemDims(("A", "B"), (2, 2)), 31)
    expect = entropy(rho) - entropy(partial_trace(rho, ["B"]))
    assert np.isclose(conditional_entropy(rho, "A", "B"), expect, atol=1e-12)


def test_mutual_information_bell_and_product():
    assert np.isclose(mutual_information(BELL, "A", "B"), 2.0, atol=1e-10)
    rho = tensor(random_density(single("A", 2), 1), random_density(single("B", 2), 2))
    assert np.isclose(mutual_information(rho, "A", "B"), 0.0, atol=1e-10)


def test_cmi_strong_subadditivity():
    for seed in range(5):
        rho = random_density(SystemDims(("A", "B", "C"), (2, 2, 2)), seed)
        assert conditional_mutual_information(rho, "A", "B", "C") >= -1e-9


def test_coherent_information_identity():
    assert np.isclose(coherent_information(identity_channel(2), np.eye(2) / 2), 1.0)


def test_coherent_information_full_dephasing_diagonal():
    ch = full_dephasing_channel(2)
    for p in (0.1, 0.5, 0.8):
        assert abs(coherent_information(ch, np.diag([p, 1 - p]))) < 1e-12


def test_coherent_information_amplitude_damping_oracle():
    gamma = 0.3
    u = amplitude_damping_dilation(gamma)
    rho = np.eye(2) / 2
    out = u @ rho @ u.conj().T
    s_b = vn_entropy(ptrace_oracle(out, (2, 2), keep_first=True))
    s_e = vn_entropy(ptrace_oracle(out, (2, 2), keep_first=False))
    expect = s_b - s_e
    got = coherent_information(amplitude_damping_channel(gamma), rho)
    assert expect > 0
    assert np.isclose(got, expect, atol=1e-10)


def test_coherent_information_equals_negative_conditional_entropy():
    ch = amplitude_damping_channel(0.4)
    rho = random_density(single("A", 2), 77)
    phi = purify(rho)
    from chancap.channels import apply_to_half

    joint = apply_to_half(ch, phi.to_density())
    lhs = coherent_information(ch, rho)
    rhs = -conditional_entropy(joint, "R", "B")
    assert np.isclose(lhs, rhs, atol=1e-9)
