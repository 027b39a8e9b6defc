"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line (printed, and repeated in the terminal
summary) before asserting.
"""
import io
import json
import time
from contextlib import redirect_stdout
from functools import lru_cache

import numpy as np
import pytest

from bellstrength import cli
from bellstrength.classical import canonicalize, cglmp_inequality, classical_max, evaluate, BellInequality
from bellstrength.quantum import born_law, cglmp_model, ghz_model, ghz_pi, maximally_entangled, \
    with_detection_efficiency, SchmidtState
from bellstrength.scenario import Scenario, check_no_signalling
from bellstrength.strength import (discounted_strength, extract_face, inf_divergence, ladder_law, ladder_sweep,
                                   optimize_ladder_angles, optimize_schmidt)
from conftest import BORN_LAWS
from oracles import brute_force_max, projected_gradient_divergence, random_no_signalling_laws, vertex_matrix

CHSH_PAPER = 0.0423


def run_cli(*argv):
    buf = io.StringIO()
    start = time.perf_counter()
    with redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, json.loads(buf.getvalue()), time.perf_counter() - start


@lru_cache(maxsize=None)
def named_strength(name):
    return run_cli("strength", "--named", name)


@lru_cache(maxsize=None)
def schmidt_optimum(d):
    state, res = optimize_schmidt(d)
    return state, res


@lru_cache(maxsize=None)
def ladder_rows():
    start = time.perf_counter()
    rows = ladder_sweep(4)
    return rows, time.perf_counter() - start


def test_criterion_01_chsh_strength(record):
    code, out, seconds = named_strength("chsh")
    d = out["divergence_bits"]
    ok = code == 0 and abs(d - 0.0423) <= 5e-4 and seconds < 60
    record(1, ok, f"CHSH divergence {d:.6f} bits (target 0.0423 +- 0.0005), {seconds:.2f} s, exit {code}")
    assert ok


def test_criterion_02_ghz_strength(record):
    code, out, seconds = named_strength("ghz")
    d = out["divergence_bits"]
    ok = code == 0 and abs(d - 0.400) <= 1e-3 and seconds < 60
    record(2, ok, f"GHZ divergence {d:.6f} bits (target 0.400 +- 0.001), {seconds:.2f} s, exit {code}")
    assert ok


def test_criterion_03_ghz_discount(record):
    value = discounted_strength(0.400, 4, 0.5)
    ok = value == 0.05
    record(3, ok, f"discounted_strength(0.400, 4, 0.5) = {value!r}")
    assert ok


def test_criterion_04_ghz_law_exact(record):
    law = born_law(ghz_model(), ghz_pi())
    sc = law.scenario
    worst = 0.0
    for pattern, sign in [((0, 1, 1), 1), ((1, 0, 1), 1), ((1, 1, 0), 1), ((0, 0, 0), -1)]:
        cond = law.conditional(pattern)
        # outcome index 0 is the eigenvalue +1
        parity = np.array([(-1) ** int(np.sum(o)) for o in sc.outcome_patterns])
        worst = max(worst, abs(1.0 - cond[parity == sign].sum()))
    ok = worst <= 1e-12
    record(4, ok, f"max deviation of parity probabilities from 1: {worst:.2e}")
    assert ok


def test_criterion_05_cglmp_violation(record):
    details, ok = [], True
    for d in range(2, 6):
        start = time.perf_counter()
        ineq = cglmp_inequality(d)
        q = born_law(cglmp_model(d))
        bound, _ = brute_force_max(ineq.coefficients, ineq.scenario, ineq.setting_distribution.weights)
        own, _ = classical_max(ineq)
        value = evaluate(ineq, q)
        seconds = time.perf_counter() - start
        good = value > bound + 1e-9 and abs(own - bound) <= 1e-12 and bound <= ineq.bound + 1e-12 and seconds < 30
        ok &= good
        details.append(f"d={d}: {value:.5f} > {bound:.1e} ({seconds:.2f} s)")
    record(5, ok, "; ".join(details))
    assert ok


def test_criterion_06_u_shape(record):
    details, ok = [], True
    for d in (3, 4):
        state, res = schmidt_optimum(d)
        c = np.array(state.coefficients)
        maxent = inf_divergence(born_law(cglmp_model(d, maximally_entangled(d)))).divergence
        asym = float(np.max(np.abs(c - c[::-1])))
        middle = c[(d - 1) // 2: d // 2 + 1]
        good = asym <= 1e-4 and c[0] > middle.max() and res.divergence - maxent > 1e-5
        ok &= good
        details.append(f"d={d}: c={np.round(c, 5).tolist()} asym {asym:.1e}, D {res.divergence:.6f} vs maxent {maxent:.6f}")
    record(6, ok, "; ".join(details))
    assert ok


def test_criterion_07_ladder_ordering(record):
    rows, seconds = ladder_rows()
    table = {(k, pol): d for k, pol, d in rows}
    surviving, every = table[(4, "surviving")], table[(4, "all")]
    ok = surviving > CHSH_PAPER and every < CHSH_PAPER and seconds < 600
    record(7, ok, f"K=4 surviving {surviving:.6f} > 0.0423, all {every:.6f} < 0.0423 (sweep {seconds:.1f} s)")
    assert ok


def _kkt_check(q, res):
    """Independent recomputation of the vertex scores at p_hat."""
    v = vertex_matrix(q.scenario, q.pi.weights)
    qe = q.entries.reshape(-1)
    pe = res.closest_law.entries.reshape(-1)
    pos = qe > 0
    scores = v[:, pos] @ (qe[pos] / pe[pos])
    slack = float(scores.max() - 1.0)
    support = [vid for vid, w in res.mixture_weights.items() if w > 1e-12]
    gap = float(np.max(np.abs(scores[support] - 1.0)))
    return slack, gap


def test_criterion_08_kkt_certificates(record):
    laws = {
        "chsh": born_law(cglmp_model(2)),
        "ghz": born_law(ghz_model(), ghz_pi()),
    }
    for d in range(2, 6):
        laws[f"cglmp{d}"] = born_law(cglmp_model(d))
    for d in (3, 4):
        state, _ = schmidt_optimum(d)
        laws[f"schmidt{d}"] = born_law(cglmp_model(d, state))
    for k in range(1, 5):
        a, b, _ = optimize_ladder_angles(k)
        laws[f"ladder{k}"] = ladder_law(k, a, b, "surviving")
        laws[f"ladder{k}-all"] = ladder_law(k, a, b, "all")
    worst_slack, worst_gap, ok = -np.inf, 0.0, True
    for name, q in laws.items():
        res = inf_divergence(q)
        slack, gap = _kkt_check(q, res)
        worst_slack, worst_gap = max(worst_slack, slack), max(worst_gap, gap)
        ok &= res.converged and slack <= 1e-9 and gap <= 1e-8 and res.kkt_slack <= 1e-9
    record(8, ok, f"{len(laws)} solves: max vertex slack {worst_slack:.1e}, max support gap {worst_gap:.1e}")
    assert ok


def test_criterion_09_oracle_equivalence(record):
    sc = Scenario(2, 2, 2)
    laws = random_no_signalling_laws(sc, 25, seed=2024)
    v = vertex_matrix(sc, laws[0].pi.weights)
    diffs = []
    for q in laws:
        ours = inf_divergence(q).divergence
        oracle = projected_gradient_divergence(q.entries, v, starts=20, seed=0)
        diffs.append(abs(ours - oracle))
    worst = max(diffs)
    ok = worst <= 1e-6
    record(9, ok, f"25 random laws: max |solver - projected-gradient oracle| = {worst:.1e} bits")
    assert ok


def _raw_face(q, res):
    pos = q.entries > 0
    ratio = np.zeros(q.scenario.shape)
    ratio[pos] = q.entries[pos] / res.closest_law.entries[pos]
    raw = BellInequality(q.scenario, ratio, 1.0, "raw", q.pi)
    bound, _ = classical_max(raw)
    return BellInequality(q.scenario, ratio, bound, "raw", q.pi)


def test_criterion_10_canonicalization(record):
    cglmp = cglmp_inequality(2)
    canon_cglmp = canonicalize(cglmp)
    q = with_detection_efficiency(born_law(cglmp_model(2)), 0.9)
    res = inf_divergence(q)
    face = extract_face(q, res)
    pairs = [("CGLMP(2)", cglmp, canon_cglmp), ("eta=0.9 face", _raw_face(q, res), face.inequality)]
    details, ok = [], True
    for (name, raw, canon), laws in zip(pairs, [random_no_signalling_laws(Scenario(2, 2, 2), 50, seed=11),
                                                random_no_signalling_laws(Scenario(2, 2, 3), 50, seed=12)]):
        zero_entry = canon.coefficients[:, 0]  # outcome pattern (0, 0) under every setting pattern
        worst = max(abs((evaluate(raw, p) - raw.bound) - (evaluate(canon, p) - canon.bound)) for p in laws)
        good = np.all(zero_entry == 0.0) and abs(canon.bound) <= 1e-9 and worst <= 1e-12
        ok &= bool(good)
        details.append(f"{name}: bound {canon.bound:.1e}, max |outcome-0 coeff| {np.max(np.abs(zero_entry)):.1e}, "
                       f"raw/canonical mismatch {worst:.1e}")
    record(10, ok, "; ".join(details))
    assert ok


@pytest.mark.run_last
def test_criterion_11_no_signalling(record):
    # make sure the named laws are included even when this test runs alone
    born_law(cglmp_model(2))
    born_law(ghz_model(), ghz_pi())
    born_law(cglmp_model(3, SchmidtState.normalized([1, 0.6, 1])))
    worst = max(check_no_signalling(law, 1e-10).max_violation for law in BORN_LAWS)
    ok = worst <= 1e-10
    record(11, ok, f"{len(BORN_LAWS)} Born laws checked, max no-signalling violation {worst:.1e}")
    assert ok
