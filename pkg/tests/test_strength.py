import numpy as np
import pytest

from bellstrength.classical import DeterministicVertex, cglmp_inequality, classical_max, evaluate, vertex_law
from bellstrength.errors import IterationCapExceeded, NotConverged, ZeroDivergence
from bellstrength.quantum import born_law, cglmp_model, ghz_model, ghz_pi, with_detection_efficiency
from bellstrength.scenario import Scenario, SettingDistribution, add_noise, mix, permute_law, uniform_law
from bellstrength.strength import (detection_threshold, discounted_strength, divergence_bits, extract_face,
                                   inf_divergence, ladder_law, optimize_ladder_angles)
from oracles import em_divergence, random_no_signalling_laws, vertex_matrix

CHSH = 0.0462738469


@pytest.fixture(scope="module")
def chsh_law():
    return born_law(cglmp_model(2))


@pytest.fixture(scope="module")
def chsh_result(chsh_law):
    return inf_divergence(chsh_law)


def test_vertex_law_has_zero_divergence():
    sc = Scenario(2, 2, 3)
    pi = SettingDistribution.uniform(sc)
    law = vertex_law(DeterministicVertex.from_index(sc, 17), pi)
    res = inf_divergence(law)
    assert res.divergence <= 1e-12
    assert np.allclose(res.closest_law.entries, law.entries)


def test_uniform_law_is_classical():
    res = inf_divergence(uniform_law(SettingDistribution.uniform(Scenario(3, 2, 2))))
    assert res.divergence <= 1e-9


def test_chsh_value_and_kkt(chsh_law, chsh_result):
    assert np.isclose(chsh_result.divergence, CHSH, atol=1e-9)
    assert chsh_result.converged and chsh_result.kkt_slack <= 1e-9
    assert np.isclose(sum(chsh_result.mixture_weights.values()), 1.0)
    assert np.isclose(divergence_bits(chsh_law, chsh_result.closest_law), chsh_result.divergence)
    v = vertex_matrix(chsh_law.scenario, chsh_law.pi.weights)
    q = chsh_law.entries.reshape(-1)
    scores = v @ (q / chsh_result.closest_law.entries.reshape(-1))
    assert scores.max() <= 1 + 1e-9
    for vid in chsh_result.mixture_weights:
        assert np.isclose(scores[vid], 1.0, atol=1e-8)


def test_matches_em_oracle(chsh_law):
    v = vertex_matrix(chsh_law.scenario, chsh_law.pi.weights)
    assert np.isclose(em_divergence(chsh_law.entries, v), inf_divergence(chsh_law).divergence, atol=1e-6)


def test_ghz_value():
    res = inf_divergence(born_law(ghz_model(), ghz_pi()))
    assert np.isclose(res.divergence, np.log2(4 / 3), atol=1e-9)


def test_joint_convexity():
    laws = random_no_signalling_laws(Scenario(2, 2, 2), 4, seed=3)
    laws.append(born_law(cglmp_model(2)))
    values = np.array([inf_divergence(q).divergence for q in laws])
    rng = np.random.default_rng(8)
    for _ in range(100):
        w = rng.dirichlet(np.ones(len(laws)))
        assert inf_divergence(mix(laws, w)).divergence <= w @ values + 1e-9


def test_relabel_invariance(chsh_law, chsh_result):
    relabelled = permute_law(chsh_law, party_perm=[1, 0], setting_perms=[[1, 0], [0, 1]],
                             outcome_perms=[[1, 0], [1, 0]])
    assert np.isclose(inf_divergence(relabelled).divergence, chsh_result.divergence, atol=1e-10)


def test_noise_monotone(chsh_law):
    values = [inf_divergence(add_noise(chsh_law, w)).divergence for w in np.linspace(0, 1, 11)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] <= 1e-9
    # the CHSH law stops violating at noise weight 1 - 1/sqrt(2)
    assert values[3] <= 1e-9 < values[2]


def test_iteration_cap(chsh_law):
    with pytest.raises(IterationCapExceeded) as info:
        inf_divergence(chsh_law, max_iter=1)
    assert info.value.result is not None


def test_face_support(chsh_law, chsh_result):
    face = extract_face(chsh_law, chsh_result)
    assert face.support_gap <= 1e-8
    assert face.quantum_value > face.classical_bound
    assert np.all(face.inequality.coefficients[:, 0] == 0)
    # same face as CGLMP(2) up to affine maps on no-signalling laws
    laws = random_no_signalling_laws(chsh_law.scenario, 50, seed=21)
    a = [evaluate(face.inequality, q) for q in laws]
    b = [evaluate(cglmp_inequality(2), q) for q in laws]
    assert np.corrcoef(a, b)[0, 1] > 1 - 1e-8


def test_face_errors(chsh_law, chsh_result):
    classical = uniform_law(chsh_law.pi)
    with pytest.raises(ZeroDivergence):
        extract_face(classical, inf_divergence(classical))
    res = inf_divergence(chsh_law)
    res.converged = False
    with pytest.raises(NotConverged):
        extract_face(chsh_law, res)


def test_ghz_face_brute_force():
    q = born_law(ghz_model(), ghz_pi())
    face = extract_face(q, inf_divergence(q))
    v = vertex_matrix(q.scenario, q.pi.weights)
    assert v.shape[0] == 64
    values = v @ face.inequality.coefficients.reshape(-1)
    assert np.isclose(values.max(), face.classical_bound, atol=1e-12)
    assert face.quantum_value > face.classical_bound + 0.3


def test_no_event_face():
    q = with_detection_efficiency(born_law(cglmp_model(2)), 0.9)
    res = inf_divergence(q)
    face = extract_face(q, res)
    assert 0 < res.divergence < CHSH
    assert np.all(face.inequality.coefficients[:, 0] == 0)
    assert abs(face.classical_bound) <= 1e-9
    value, _ = classical_max(face.inequality)
    assert np.isclose(value, face.classical_bound, atol=1e-12)


def test_detection_threshold():
    m = cglmp_model(2)
    eta = detection_threshold(m)
    assert 0 < eta < 1
    assert abs(eta - 2 / (1 + np.sqrt(2))) < 1e-3
    base = born_law(m)
    values = [inf_divergence(with_detection_efficiency(base, e)).divergence for e in np.linspace(0.8, 1.0, 10)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert np.isclose(values[-1], CHSH, atol=1e-9)


def test_discounting():
    assert discounted_strength(0.0423) == 0.0423
    assert np.isclose(discounted_strength(0.4, 4, 0.5), 0.05)
    with pytest.raises(ValueError):
        discounted_strength(0.1, 0, 1)


def test_ladder_policies_coincide_for_one_rung():
    a, b, res = optimize_ladder_angles(1)
    assert np.isclose(res.divergence, CHSH, atol=1e-7)
    both = inf_divergence(ladder_law(1, a, b, "all")).divergence
    assert np.isclose(both, res.divergence, atol=1e-12)


def test_schmidt_optimum_for_qubits_is_maximally_entangled():
    from bellstrength.strength import optimize_schmidt

    state, res = optimize_schmidt(2)
    assert np.allclose(state.coefficients, [2 ** -0.5, 2 ** -0.5], atol=1e-4)
    assert np.isclose(res.divergence, CHSH, atol=1e-8)
