"""Independent reference computations used by the tests.

Nothing here calls the package's solver; vertex laws are built by hand
from the definition so the oracles stay independent of the vertex tables.
"""
from __future__ import annotations

import itertools

import numpy as np


def vertex_matrix(scenario, pi_weights):
    """Rows are vertex laws (flattened absolute entries) in lexicographic assignment order."""
    p, q, r = scenario.parties, scenario.settings, scenario.outcomes
    rows = []
    for digits in itertools.product(range(r), repeat=p * q):
        assign = np.array(digits).reshape(p, q)
        law = np.zeros((q ** p, r ** p))
        for s, pattern in enumerate(itertools.product(range(q), repeat=p)):
            o = 0
            for k in range(p):
                o = o * r + assign[k, pattern[k]]
            law[s, o] = pi_weights[s]
        rows.append(law.reshape(-1))
    return np.array(rows)


def brute_force_max(coefficients, scenario, pi_weights):
    v = vertex_matrix(scenario, pi_weights)
    values = v @ np.asarray(coefficients).reshape(-1)
    return float(values.max()), int(np.argmax(values))


def _project_simplex(y):
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, y.size + 1)
    rho = np.flatnonzero(u - (css - 1) / k > 0)[-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.clip(y - theta, 0.0, None)


def kl_bits(q, p):
    pos = q > 0
    if np.any(p[pos] <= 0):
        return np.inf
    return float(np.sum(q[pos] * np.log2(q[pos] / p[pos])))


def projected_gradient_divergence(q_entries, vertices, starts=20, seed=0, max_iter=2000, gap_tol=1e-7):
    """min over mixture weights of D(q : V^T w) by projected gradient from random starts.

    Each run stops when the Frank-Wolfe gap (an upper bound on the
    suboptimality in bits) drops below ``gap_tol``.
    """
    q = np.asarray(q_entries).reshape(-1)
    pos = q > 0
    v = vertices[:, pos]
    qp = q[pos]
    rng = np.random.default_rng(seed)
    best = np.inf

    def f(w):
        p = w @ v
        if np.any(p <= 0):
            return np.inf
        return float(np.sum(qp * np.log2(qp / p)))

    for _ in range(starts):
        w = rng.dirichlet(np.ones(vertices.shape[0]))
        step = 1.0
        fw = f(w)
        for _ in range(max_iter):
            grad = -(v @ (qp / (w @ v))) / np.log(2)
            gap = float(grad @ w - grad.min())
            if gap <= gap_tol:
                break
            while True:
                cand = _project_simplex(w - step * grad)
                fc = f(cand)
                if fc <= fw - 0.5 / step * np.sum((cand - w) ** 2) or step < 1e-12:
                    break
                step *= 0.5
            w, fw = cand, fc
            step *= 2.0
        best = min(best, fw)
    return best


def em_divergence(q_entries, vertices, iters=20000):
    """Plain EM on the vertex mixture from the uniform start."""
    q = np.asarray(q_entries).reshape(-1)
    pos = q > 0
    v = vertices[:, pos]
    qp = q[pos]
    w = np.full(vertices.shape[0], 1.0 / vertices.shape[0])
    for _ in range(iters):
        w = w * (v @ (qp / (w @ v)))
        w /= w.sum()
    return kl_bits(q, w @ vertices)


def random_no_signalling_laws(scenario, n, seed):
    """Born laws of random pure states and projective measurements (uniform pi)."""
    from bellstrength.quantum import born_law, random_model

    rng = np.random.default_rng(seed)
    return [born_law(random_model(scenario, rng)) for _ in range(n)]


def explicit_born(state, families, scenario):
    """Conditional probabilities from full tensor-product projectors, no shortcuts."""
    out = np.zeros(scenario.shape)
    for s, pattern in enumerate(itertools.product(range(scenario.settings), repeat=scenario.parties)):
        for o, outcome in enumerate(itertools.product(range(scenario.outcomes), repeat=scenario.parties)):
            op = np.ones((1, 1), dtype=complex)
            for k in range(scenario.parties):
                op = np.kron(op, families[k][pattern[k]][outcome[k]])
            out[s, o] = float(np.real(np.vdot(state, op @ state)))
    return out
