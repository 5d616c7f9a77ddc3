import numpy as np
import pytest

from chancap.channels import (
    CptpViolation,
    KrausChannel,
    apply,
    apply_to_half,
    choi_of,
    complementary,
    compose,
    kraus_from_choi,
    kraus_rotate,
    kraus_to_stinespring,
    minimal_kraus,
    tensor_channels,
    validate_cptp,
)
from chancap.linops import DensityMatrix, SystemDims, dag, random_density, single
from chancap.zoo import (
    amplitude_damping_channel,
    full_dephasing_channel,
    identity_channel,
    random_channel,
)

P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def test_validate_identity():
    assert validate_cptp([np.eye(2)]).passed


def test_validate_projectors():
    assert validate_cptp([P0, P1]).passed


def test_validate_trace_decreasing_fails():
    report = validate_cptp([np.sqrt(0.5) * np.eye(2)])
    assert not report.passed
    assert np.isclose(report.deviation, 0.5)


def test_stinespring_identity():
    u = kraus_to_stinespring(identity_channel(2))
    assert u.d_env == 1
    assert np.allclose(u.matrix, np.eye(2))


def test_stinespring_full_dephasing_basis_action():
    u = kraus_to_stinespring(full_dephasing_channel(2))
    # U|i> = |i>_B |i>_E with rows ordered (b, e)
    expect = np.zeros((4, 2))
    expect[0, 0] = 1.0  # (b=0,e=0)
    expect[3, 1] = 1.0  # (b=1,e=1)
    assert np.allclose(u.matrix, expect)


def test_stinespring_reproduces_channel():
    ch = random_channel(2, 2, 3, seed=8)
    u = kraus_to_stinespring(ch)
    rho = random_density(2, 21).matrix
    out = u.matrix @ rho @ dag(u.matrix)
    from chancap.linops import ptrace_array

    reduced = ptrace_array(out, (2, 3), [0])
    direct = sum(k @ rho @ dag(k) for k in ch.kraus)
    assert np.max(np.abs(reduced - direct)) < 1e-10


def test_complementary_identity_is_constant():
    comp = complementary(identity_channel(2))
    assert comp.d_out == 1
    rho = random_density(2, 2).matrix
    assert np.allclose(sum(k @ rho @ dag(k) for k in comp.kraus), [[1.0]])


def test_complementary_full_dephasing_self():
    ch = full_dephasing_channel(2)
    comp = complementary(ch)
    rho = random_density(2, 3).matrix
    out = sum(k @ rho @ dag(k) for k in comp.kraus)
    assert np.allclose(out, np.diag(np.diag(rho)), atol=1e-12)


def test_complementary_amplitude_damping_choi_spectrum():
    comp = complementary(amplitude_damping_channel(0.3))
    other = amplitude_damping_channel(0.7)
    s1 = np.sort(choi_of(comp).spectrum())
    s2 = np.sort(choi_of(other).spectrum())
    assert np.allclose(s1, s2, atol=1e-10)


def test_double_complement_choi_spectrum():
    for seed in (1, 2):
        ch = random_channel(2, 3, 2, seed=seed)
        cc = complementary(complementary(ch))
        s1 = np.sort(choi_of(ch).spectrum())
        s2 = np.sort(choi_of(cc).spectrum())
        assert np.allclose(s1, s2, atol=1e-8)


def test_apply_identity_and_depolarizing():
    rho = random_density(2, 5)
    assert np.allclose(apply(identity_channel(2), rho).matrix, rho.matrix)
    from chancap.zoo import depolarizing_channel

    out = apply(depolarizing_channel(1.0, 2), rho)
    assert np.allclose(out.matrix, np.eye(2) / 2, atol=1e-12)


def test_apply_matches_choi_contraction():
    ch = random_channel(2, 2, 3, seed=4)
    rho = random_density(2, 6).matrix
    direct = sum(k @ rho @ dag(k) for k in ch.kraus)
    # Choi contraction: N(rho) = d * tr_A[(rho^T (x) 1) J]
    j = choi_of(ch).matrix
    lifted = np.kron(rho.T, np.eye(2))
    contracted = 2 * np.trace((lifted @ j).reshape(2, 2, 2, 2), axis1=0, axis2=2)
    assert np.max(np.abs(direct - contracted)) < 1e-10


def test_apply_dimension_mismatch():
    from chancap.linops import InvariantViolation

    with pytest.raises(InvariantViolation):
        apply(identity_channel(2), random_density(3, 0))


def test_apply_to_half():
    ch = random_channel(2, 2, 2, seed=9)
    rho = random_density(SystemDims(("R", "A"), (2, 2)), 11)
    out = apply_to_half(ch, rho)
    assert out.labels == ("R", "B")
    # tracing R commutes with the channel action
    from chancap.linops import partial_trace

    left = partial_trace(out, ["B"]).matrix
    right = sum(k @ partial_trace(rho, ["A"]).matrix @ dag(k) for k in ch.kraus)
    assert np.max(np.abs(left - right)) < 1e-10


def test_tensor_channels_identity():
    joint = tensor_channels(identity_channel(2), identity_channel(2))
    rho = random_density(4, 13).matrix
    out = sum(k @ rho @ dag(k) for k in joint.kraus)
    assert np.allclose(out, rho)


def test_tensor_channels_product_factorization():
    a = random_channel(2, 2, 2, seed=1)
    b = random_channel(2, 2, 2, seed=2)
    joint = tensor_channels(a, b)
    assert joint.n_kraus == a.n_kraus * b.n_kraus
    assert validate_cptp(joint).passed
    rho = random_density(2, 3).matrix
    sig = random_density(2, 4).matrix
    left = sum(k @ np.kron(rho, sig) @ dag(k) for k in joint.kraus)
    right = np.kron(
        sum(k @ rho @ dag(k) for k in a.kraus), sum(k @ sig @ dag(k) for k in b.kraus)
    )
    assert np.max(np.abs(left - right)) < 1e-10


def test_tensor_channels_matches_stinespring_tensor():
    a = random_channel(2, 2, 2, seed=5)
    b = random_channel(2, 2, 2, seed=6)
    joint = tensor_channels(a, b)
    ua = kraus_to_stinespring(a).matrix
    ub = kraus_to_stinespring(b).matrix
    rho = random_density(4, 7).matrix
    # apply via the tensored isometries, then trace both environments
    big = np.kron(ua, ub) @ rho @ dag(np.kron(ua, ub))
    from chancap.linops import ptrace_array

    # row index order (b1, e1, b2, e2): keep slots 0 and 2
    reduced = ptrace_array(big, (2, 2, 2, 2), [0, 2])
    direct = sum(k @ rho @ dag(k) for k in joint.kraus)
    assert np.max(np.abs(reduced - direct)) < 1e-10


def test_kraus_rotate_identity_and_hadamard():
    ch = full_dephasing_channel(2)
    assert np.allclose(kraus_rotate(ch, np.eye(2)).kraus[0], ch.kraus[0])
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    rotated = kraus_rotate(ch, h)
    assert np.allclose(rotated.kraus[0], (P0 + P1) / np.sqrt(2))
    assert np.allclose(rotated.kraus[1], (P0 - P1) / np.sqrt(2))
    assert np.max(np.abs(choi_of(rotated).matrix - choi_of(ch).matrix)) < 1e-12


def test_kraus_rotate_preserves_choi_random():
    from chancap.linops import random_isometry

    ch = random_channel(2, 2, 2, seed=3)
    u = random_isometry(2, 5, seed=17)
    rotated = kraus_rotate(ch, u)
    assert rotated.n_kraus == 5
    assert np.max(np.abs(choi_of(rotated).matrix - choi_of(ch).matrix)) < 1e-10


def test_kraus_rotate_rejects_non_isometry():
    from chancap.linops import InvariantViolation

    with pytest.raises(InvariantViolation):
        kraus_rotate(full_dephasing_channel(2), np.array([[1, 1], [0, 1.0]]))


def test_choi_identity_maximally_entangled():
    j = choi_of(identity_channel(2)).matrix
    vec = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(j, np.outer(vec, vec))


def test_choi_depolarizing_scaled_identity():
    from chancap.zoo import depolarizing_channel

    j = choi_of(depolarizing_channel(1.0, 2)).matrix
    assert np.allclose(j, np.eye(4) / 4, atol=1e-12)


def test_choi_roundtrip_random():
    ch = random_channel(2, 3, 2, seed=12)
    back = kraus_from_choi(choi_of(ch))
    assert np.max(np.abs(choi_of(back).matrix - choi_of(ch).matrix)) < 1e-8
    assert back.n_kraus == 2  # rank of the Choi matrix


def test_minimal_kraus_prunes_redundant():
    ch = KrausChannel.from_kraus([P0, P1, np.zeros((2, 2))])
    assert minimal_kraus(ch).n_kraus == 2


def test_compose_dimensions():
    a = random_channel(2, 3, 2, seed=1)
    b = random_channel(3, 2, 2, seed=2)
    both = compose(b, a)
    assert both.d_in == 2 and both.d_out == 2
    assert validate_cptp(both).passed


def test_cptp_required_for_derived_representations():
    bad = KrausChannel.from_kraus([np.sqrt(0.5) * np.eye(2)])
    with pytest.raises(CptpViolation):
        kraus_to_stinespring(bad)
    with pytest.raises(CptpViolation):
        complementary(bad)
