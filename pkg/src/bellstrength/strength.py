"""Statistical strength: the divergence from a law to the classical polytope.

The inner problem ``inf_p D(q : p)`` over the local polytope is the
nonparametric maximum likelihood problem for a mixture over deterministic
vertices: maximize ``sum q log p`` with ``p = sum_v w_v vertex_v``.
Dropping the simplex constraint in favour of the penalty ``- sum w`` leaves
the optimum unchanged (every vertex law has total mass 1), and the first
order conditions become ``g_v <= 1`` for all vertices with equality on the
support, where ``g_v = sum_entries q * vertex_v / p``.  The solver is a
vertex-direction scheme: add the vertex with the largest ``g_v`` by a
line-searched conditional-gradient step, then re-optimize the weights on
the current support by damped Newton steps that drop atoms reaching zero,
with multiplicative EM updates as the fallback step.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .classical import (BellInequality, DeterministicVertex, canonicalize, classical_max, check_vertex_cap,
                        evaluate, iter_vertex_chunks, ladder_pairs, ladder_policy_pi, outcome_index_table)
from .errors import IterationCapExceeded, NoConvergence, NotConverged, ZeroDivergence
from .linalg import hermitian_eig
from .quantum import (SchmidtState, born_law, cglmp_measurements, cglmp_model, default_ladder_angles, ladder_model,
                      maximally_entangled, with_detection_efficiency)
from .scenario import ProbabilityLaw, Scenario

EPSILON = 1e-9
MAX_INNER_ITER = 100_000
MAX_OUTER_ITER = 200
PRUNE_TOL = 1e-14
SUPPORT_TOL = 1e-8
SUPPORT_WEIGHT = 1e-12
ZERO_DIVERGENCE = 1e-12
DETECTION_LEVEL = 1e-7
SCHMIDT_STARTS = 5
POLISH_STEP_FLOOR = 1e-6
LADDER_MAX_RUNGS = 6
# vertex outcome tables are kept in memory below this many entries
TABLE_CACHE_ENTRIES = 1 << 24


def worker_count() -> int:
    """Worker cap from ``BELL_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("BELL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class StrengthResult:
    divergence: float
    closest_law: ProbabilityLaw
    mixture_weights: dict[int, float]
    kkt_slack: float
    iterations: int
    converged: bool = True
    support_gap: float = 0.0

    def to_dict(self) -> dict:
        return {
            "divergence_bits": self.divergence,
            "kkt_slack": self.kkt_slack,
            "iterations": self.iterations,
            "converged": self.converged,
            "mixture": [{"vertex": int(v), "weight": float(w)} for v, w in sorted(self.mixture_weights.items())],
        }


@dataclass
class FaceCertificate:
    inequality: BellInequality
    log_ratio: np.ndarray = field(repr=False)
    quantum_value: float
    classical_bound: float
    support_gap: float = 0.0

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality.to_dict(),
            "log_ratio": self.log_ratio.tolist(),
            "quantum_value": self.quantum_value,
            "classical_bound": self.classical_bound,
        }


def divergence_bits(q: ProbabilityLaw, p: ProbabilityLaw) -> float:
    """``D(q : p)`` in bits; entries with ``q = 0`` contribute nothing."""
    pos = q.entries > 0
    if np.any(p.entries[pos] <= 0):
        return float("inf")
    return float(np.sum(q.entries[pos] * np.log2(q.entries[pos] / p.entries[pos])))


class _MixtureProblem:
    """Vertex bookkeeping for one target law ``q``."""

    def __init__(self, q: ProbabilityLaw):
        sc = q.scenario
        check_vertex_cap(sc)
        self.q = q
        self.scenario = sc
        w = q.pi.weights
        self.observed = np.flatnonzero(w > 0)
        self.pi_obs = w[self.observed]
        self.n_out = sc.n_outcome_patterns
        self.q_obs = q.entries[self.observed]
        self.pos = self.q_obs > 0
        self.q_pos = self.q_obs[self.pos]
        # flat position of every positive-q entry among the observed block
        self.pos_index = -np.ones(self.q_obs.size, dtype=np.int64)
        self.pos_index[np.flatnonzero(self.pos.reshape(-1))] = np.arange(self.q_pos.size)
        self.row_offsets = np.arange(self.observed.size, dtype=np.int64) * self.n_out
        self.table = None
        if sc.n_vertices * max(1, self.observed.size) <= TABLE_CACHE_ENTRIES:
            self.table = outcome_index_table(sc, np.arange(sc.n_vertices, dtype=np.int64), self.observed)

    def vertex_table(self, ids: np.ndarray) -> np.ndarray:
        if self.table is not None:
            return self.table[ids]
        return outcome_index_table(self.scenario, ids, self.observed)

    def columns(self, ids: np.ndarray) -> np.ndarray:
        """Vertex laws restricted to positive-q entries, one column per vertex."""
        a = np.zeros((self.q_pos.size, len(ids)))
        flat = self.vertex_table(np.asarray(ids, dtype=np.int64)) + self.row_offsets[None, :]
        rows = self.pos_index[flat]
        for col in range(len(ids)):
            hit = rows[col] >= 0
            a[rows[col][hit], col] = self.pi_obs[hit]
        return a

    def full_law(self, ids: np.ndarray, weights: np.ndarray) -> np.ndarray:
        entries = np.zeros(self.scenario.shape)
        tab = self.vertex_table(np.asarray(ids, dtype=np.int64))
        block = np.zeros(self.q_obs.shape)
        for col in range(len(ids)):
            block[np.arange(self.observed.size), tab[col]] += weights[col] * self.pi_obs
        entries[self.observed] = block
        return entries

    def best_vertex(self, ratio_obs: np.ndarray) -> tuple[int, float]:
        """Vertex maximizing ``g_v``; the smallest index wins ties."""
        weighted = ratio_obs * self.pi_obs[:, None]
        cols = np.arange(self.observed.size)[None, :]
        if self.table is not None:
            g = weighted[cols, self.table].sum(axis=1)
            i = int(np.argmax(g))
            return i, float(g[i])
        chunks = list(iter_vertex_chunks(self.scenario, self.observed))

        def score(item):
            start, tab = item
            g = weighted[cols, tab].sum(axis=1)
            i = int(np.argmax(g))
            return start + i, float(g[i])

        workers = worker_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                found = list(pool.map(score, chunks))
        else:
            found = [score(c) for c in chunks]
        best_id, best_g = found[0]
        for vid, g in found[1:]:
            if g > best_g:
                best_id, best_g = vid, g
        return best_id, best_g

    def ratio_obs(self, p_pos: np.ndarray) -> np.ndarray:
        r = np.zeros(self.q_obs.shape)
        r[self.pos] = self.q_pos / p_pos
        return r

    def barycenter_ids(self) -> np.ndarray:
        """Vertices on which each party ignores its setting; their uniform mix is the uniform law."""
        sc = self.scenario
        ids = []
        for k in range(sc.outcomes ** sc.parties):
            digits = [(k // sc.outcomes ** (sc.parties - 1 - j)) % sc.outcomes for j in range(sc.parties)]
            ids.append(DeterministicVertex(sc, tuple((x,) * sc.settings for x in digits)).index)
        return np.array(sorted(ids), dtype=np.int64)


def _support_gap(g: np.ndarray, w: np.ndarray) -> float:
    """Largest ``|g_v - 1|`` over atoms carrying weight above ``SUPPORT_WEIGHT``."""
    heavy = w > SUPPORT_WEIGHT * max(float(w.sum()), 1e-300)
    return float(np.max(np.abs(g[heavy] - 1.0), initial=0.0))


def _covers(a: np.ndarray) -> bool:
    """Whether the columns of ``a`` leave no positive-q entry uncovered."""
    return bool(np.all(a.sum(axis=1) > 0))


def _objective(q_pos: np.ndarray, p: np.ndarray, w: np.ndarray) -> float:
    if np.any(p <= 0):
        return -np.inf
    return float(np.dot(q_pos, np.log(p)) - np.sum(w))


def inf_divergence(q: ProbabilityLaw, epsilon: float = EPSILON, max_iter: int = MAX_INNER_ITER,
                   warm_start: dict[int, float] | None = None) -> StrengthResult:
    """Minimize ``D(q : p)`` over the classical polytope.

    Converged when the largest vertex score exceeds 1 by at most
    ``epsilon`` (so the divergence is within ``log2(1 + epsilon)`` of the
    optimum) and every support vertex scores 1 within ``SUPPORT_TOL``.
    Raises IterationCapExceeded carrying the best point found otherwise.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    prob = _MixtureProblem(q)
    if prob.q_pos.size == 0:
        raise ValueError("q has no positive entries")

    ids = prob.barycenter_ids()
    w = np.full(ids.size, 1.0 / ids.size)
    if warm_start:
        wid = np.array(sorted(warm_start), dtype=np.int64)
        ww = np.array([warm_start[int(v)] for v in wid], dtype=float)
        ww = np.clip(ww, 0.0, None)
        if ww.sum() > 0:
            # a little barycenter mass keeps p positive wherever q is
            merged = dict(zip(ids.tolist(), (1e-6 * w).tolist()))
            for v, x in zip(wid.tolist(), (ww / ww.sum() * (1 - 1e-6)).tolist()):
                merged[v] = merged.get(v, 0.0) + x
            ids = np.array(sorted(merged), dtype=np.int64)
            w = np.array([merged[v] for v in ids.tolist()])
    a = prob.columns(ids)

    it = 0
    slack = np.inf
    gap = np.inf
    while True:
        p = a @ w
        ratio_pos = prob.q_pos / p
        g_support = a.T @ ratio_pos
        gap = _support_gap(g_support, w)
        best_id, best_g = prob.best_vertex(prob.ratio_obs(p))
        slack = best_g - 1.0
        if slack <= epsilon and gap <= SUPPORT_TOL:
            break
        if it >= max_iter:
            break
        it += 1
        if slack > epsilon:
            if best_id not in set(ids.tolist()):
                ids = np.append(ids, best_id)
                a = np.hstack([a, prob.columns(np.array([best_id]))])
                w = np.append(w, 0.0)
            j = int(np.flatnonzero(ids == best_id)[0])
            w = _vertex_step(prob.q_pos, a, w, j)
        ids, a, w = _newton_support(prob.q_pos, ids, a, w)

    w_sum = float(w.sum())
    w = w / w_sum
    keep = w > PRUNE_TOL
    if not _covers(a[:, keep]):
        keep = w > 0
    ids, a, w = ids[keep], a[:, keep], w[keep] / w[keep].sum()
    p = a @ w
    best_id, best_g = prob.best_vertex(prob.ratio_obs(p))
    slack = best_g - 1.0
    gap = _support_gap(a.T @ (prob.q_pos / p), w)
    order = np.argsort(ids)
    closest = ProbabilityLaw(q.scenario, q.pi, prob.full_law(ids[order], w[order]), validate=False)
    result = StrengthResult(
        divergence=max(0.0, divergence_bits(q, closest)),
        closest_law=closest,
        mixture_weights={int(v): float(x) for v, x in zip(ids[order], w[order])},
        kkt_slack=float(slack),
        iterations=it,
        converged=bool(slack <= epsilon and gap <= SUPPORT_TOL),
        support_gap=gap,
    )
    if not result.converged:
        raise IterationCapExceeded(f"inner solver stopped after {it} iterations with slack {slack:.3e}",
                                   result=result)
    return result


def _vertex_step(q_pos: np.ndarray, a: np.ndarray, w: np.ndarray, j: int) -> np.ndarray:
    """Move mass toward atom ``j``: ``w <- (1 - t) w + t s e_j`` with ``s = sum(w)`` and the best ``t``."""
    p = a @ w
    s = w.sum()
    d = s * a[:, j] - p

    def deriv(t):
        return float(np.dot(q_pos, d / (p + t * d)))

    if deriv(0.0) <= 0:
        return w
    if np.all(p + d > 0) and deriv(1.0) >= 0:
        t = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if deriv(mid) > 0:
                lo = mid
            else:
                hi = mid
        t = lo
    out = (1.0 - t) * w
    out[j] += t * s
    return out


def _newton_support(q_pos: np.ndarray, ids: np.ndarray, a: np.ndarray, w: np.ndarray,
                    max_steps: int = 50):
    """Damped Newton ascent on the support weights; atoms reaching zero are dropped."""
    for _ in range(max_steps):
        p = a @ w
        grad = a.T @ (q_pos / p) - 1.0
        # atoms that are negligible and pulled further down leave the support
        keep = (w > 0) & ~((w <= PRUNE_TOL) & (grad < 0))
        if not np.all(keep) and _covers(a[:, keep]):
            ids, a, w = ids[keep], a[:, keep], w[keep]
            p = a @ w
            grad = a.T @ (q_pos / p) - 1.0
        if float(np.max(np.abs(grad))) <= 1e-14:
            break
        h = (a * (q_pos / p ** 2)[:, None]).T @ a
        step, *_ = np.linalg.lstsq(h, grad, rcond=None)
        slope = float(np.dot(grad, step))
        if not np.isfinite(slope) or slope <= 0:
            # EM update as the fallback ascent step
            w = w * (grad + 1.0)
            continue
        neg = step < 0
        t_max = float(np.min(-w[neg] / step[neg])) if np.any(neg) else np.inf
        leaving = int(np.argmin(np.where(neg, -w / np.where(neg, step, 1.0), np.inf))) if np.any(neg) else -1
        t = min(1.0, t_max)
        base = _objective(q_pos, p, w)
        while t > 1e-16:
            trial = np.clip(w + t * step, 0.0, None)
            if t >= t_max:
                trial[leaving] = 0.0
            if _objective(q_pos, a @ trial, w + t * step) >= base + 1e-4 * t * slope:
                break
            t *= 0.5
        if t <= 1e-16:
            w = w * (grad + 1.0)
            continue
        w = trial
        if t * float(np.max(np.abs(step))) <= 1e-16 * max(1.0, float(np.max(w))):
            break
    keep = w > 0
    return ids[keep], a[:, keep], w[keep]


# ----------------------------------------------------------------- faces

def extract_face(q: ProbabilityLaw, res: StrengthResult, reference: int = 0) -> FaceCertificate:
    """The face of the polytope closest to ``q`` as a canonical Bell inequality.

    The raw coefficients are ``q / p_hat`` (0 where ``q = 0``): the
    supporting hyperplane ``sum (q / p_hat) p <= 1`` touches the polytope at
    ``p_hat`` and every mixture vertex lies on it.  ``q`` itself scores
    ``sum q^2 / p_hat > 1``.
    """
    if not res.converged:
        raise NotConverged("face extraction needs a converged solve")
    if res.divergence <= ZERO_DIVERGENCE:
        raise ZeroDivergence("q lies in the classical polytope; there is no separating face")
    sc = q.scenario
    pos = q.entries > 0
    ratio = np.zeros(sc.shape)
    ratio[pos] = q.entries[pos] / res.closest_law.entries[pos]
    log_ratio = np.zeros(sc.shape)
    log_ratio[pos] = np.log2(ratio[pos])
    raw = BellInequality(sc, ratio, 1.0, "raw", q.pi)
    bound, _ = classical_max(raw)
    raw = BellInequality(sc, ratio, bound, "raw", q.pi)
    canon = canonicalize(raw, reference)
    classical_bound, _ = classical_max(canon)
    canon = BellInequality(sc, canon.coefficients, classical_bound, "canonical", q.pi, reference)
    support = np.array(sorted(res.mixture_weights), dtype=np.int64)
    support_vals = np.array([evaluate(canon, _vertex_law_by_id(sc, q, v)) for v in support])
    return FaceCertificate(
        inequality=canon,
        log_ratio=log_ratio,
        quantum_value=evaluate(canon, q),
        classical_bound=float(classical_bound),
        support_gap=float(np.max(np.abs(support_vals - classical_bound))),
    )


def _vertex_law_by_id(sc: Scenario, q: ProbabilityLaw, vid: int) -> ProbabilityLaw:
    from .classical import vertex_law

    return vertex_law(DeterministicVertex.from_index(sc, int(vid)), q.pi)


# --------------------------------------------------------- Schmidt states

def _cglmp_amplitudes(d: int, convention: str = "cglmp") -> tuple[np.ndarray, np.ndarray]:
    """``a[s, e, x]``: amplitude of outcome pair ``e`` under pattern ``s`` per unit ``c_x``."""
    alice, bob = cglmp_measurements(d, convention=convention)
    sc = Scenario(2, 2, d)
    amps = np.zeros((sc.n_setting_patterns, d * d, d), dtype=complex)
    for s, (i, j) in enumerate(sc.setting_patterns):
        ba, bb = alice[i].basis, bob[j].basis
        # <b_k (x) b'_l | x x> = conj(ba[x, k]) conj(bb[x, l])
        amps[s] = (np.conj(ba).T[:, None, :] * np.conj(bb).T[None, :, :]).reshape(d * d, d)
    return amps, np.full(sc.n_setting_patterns, 1.0 / sc.n_setting_patterns)


class _SchmidtObjective:
    def __init__(self, d: int, epsilon: float):
        self.d = d
        self.epsilon = epsilon
        self.scenario = Scenario(2, 2, d)
        self.amps, self.pi = _cglmp_amplitudes(d)
        self.warm: dict[int, float] | None = None
        self.model_pi = None

    def law(self, c: np.ndarray) -> ProbabilityLaw:
        m = cglmp_model(self.d, SchmidtState.normalized(c))
        return born_law(m)

    def solve(self, c: np.ndarray) -> StrengthResult:
        try:
            res = inf_divergence(self.law(c), self.epsilon, warm_start=self.warm)
        except IterationCapExceeded as exc:
            res = exc.result
        self.warm = res.mixture_weights
        return res

    def bell_operator(self, res: StrengthResult, q: ProbabilityLaw) -> np.ndarray:
        pos = q.entries > 0
        g = np.zeros(q.entries.shape)
        g[pos] = np.log2(q.entries[pos] / res.closest_law.entries[pos])
        b = np.einsum("se,sex,sey->xy", g * self.pi[:, None], np.conj(self.amps), self.amps)
        return np.real(0.5 * (b + b.T))

    def gradient(self, c: np.ndarray, res: StrengthResult, q: ProbabilityLaw) -> np.ndarray:
        """Envelope gradient of the divergence with respect to unnormalized ``c``."""
        return 2.0 * self.bell_operator(res, q) @ c


def _unit(x: np.ndarray) -> np.ndarray:
    x = np.abs(np.asarray(x, dtype=float))
    return x / np.linalg.norm(x)


def _optimize_from(obj: _SchmidtObjective, c0: np.ndarray, epsilon: float,
                   max_outer: int) -> tuple[np.ndarray, StrengthResult, bool]:
    c = _unit(c0)
    res = obj.solve(c)
    converged = False
    # eigenvalue alternation: the Bell operator of the current face, then its top eigenvector
    for _ in range(max_outer):
        q = obj.law(c)
        w, v = hermitian_eig(obj.bell_operator(res, q))
        top = _unit(v[:, -1].real)
        lam, moved = 1.0, False
        while lam >= 1.0 / 64:
            trial = _unit((1.0 - lam) * c + lam * top)
            r = obj.solve(trial)
            if r.divergence > res.divergence:
                change = r.divergence - res.divergence
                c, res, moved = trial, r, True
                break
            lam *= 0.5
        if not moved or change < epsilon:
            converged = True
            break

    # gradient polish on the sphere, then coordinate search
    def fun(x):
        cu = _unit(x)
        r = obj.solve(cu)
        q = obj.law(cu)
        grad_c = obj.gradient(cu, r, q)
        # chain rule through |x| / ||x||
        n = np.linalg.norm(x)
        jac = (grad_c - cu * np.dot(cu, grad_c)) / n * np.sign(np.where(x == 0, 1.0, x))
        return -r.divergence, -jac

    opt = minimize(fun, c, jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": max_outer})
    cand = _unit(opt.x)
    r = obj.solve(cand)
    if r.divergence >= res.divergence:
        c, res = cand, r
    c, res = _coordinate_search(lambda x: obj.solve(_unit(x)), c, res, step=1e-2)
    return _unit(c), res, converged


def _coordinate_search(solve, x: np.ndarray, res: StrengthResult, step: float,
                       floor: float = POLISH_STEP_FLOOR):
    """Derivative-free polish: try +/- step on each coordinate, halve the step on failure."""
    x = np.array(x, dtype=float)
    while step >= floor:
        improved = False
        for i in range(x.size):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * step
                r = solve(trial)
                if r.divergence > res.divergence + 1e-15:
                    x, res, improved = trial, r, True
                    break
        if not improved:
            step *= 0.5
    return x, res


def optimize_schmidt(d: int, epsilon: float = EPSILON, seed: int = 0, starts: int = SCHMIDT_STARTS,
                     max_outer: int = MAX_OUTER_ITER) -> tuple[SchmidtState, StrengthResult]:
    """Best Schmidt coefficients for the CGLMP measurements, over several starts.

    Start 0 is the maximally entangled state, the rest are random (seeded).
    Raises NoConvergence carrying the best state when no start converged.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    rng = np.random.default_rng(seed)
    inits = [np.ones(d)] + [np.abs(rng.standard_normal(d)) + 1e-3 for _ in range(max(0, starts - 1))]

    def run(c0):
        return _optimize_from(_SchmidtObjective(d, epsilon), c0, epsilon, max_outer)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, inits))
    else:
        outcomes = [run(c0) for c0 in inits]
    best = max(range(len(outcomes)), key=lambda i: (outcomes[i][1].divergence, -i))
    c, res, converged = outcomes[best]
    state = SchmidtState.normalized(c)
    if not any(o[2] for o in outcomes):
        err = NoConvergence("Schmidt optimization hit the outer iteration cap")
        err.result = (state, res)
        raise err
    return state, res


# ---------------------------------------------------------------- ladders

def ladder_law(rungs: int, alice_angles, bob_angles, policy: str = "surviving") -> ProbabilityLaw:
    return born_law(ladder_model(alice_angles, bob_angles), ladder_policy_pi(rungs, policy))


def optimize_ladder_angles(rungs: int, policy: str = "surviving", epsilon: float = EPSILON):
    """Coordinate search over all ``2 (rungs + 1)`` angles under ``policy``."""
    a0, b0 = default_ladder_angles(rungs)
    n = rungs + 1
    warm: dict = {}

    def solve(x):
        try:
            r = inf_divergence(ladder_law(rungs, x[:n], x[n:], policy), epsilon, warm_start=warm.get("w"))
        except IterationCapExceeded as exc:
            r = exc.result
        warm["w"] = r.mixture_weights
        return r

    x = np.concatenate([a0, b0])
    res = solve(x)
    x, res = _coordinate_search(solve, x, res, step=np.pi / 32)
    return x[:n], x[n:], res


def ladder_sweep(max_rungs: int, epsilon: float = EPSILON) -> list[tuple[int, str, float]]:
    """Rows ``(K, policy, divergence)`` for K = 1..max_rungs.

    The angles are optimized for the surviving-pairs policy; the "all"
    row runs the same experiment with every setting pair equally likely.
    """
    if not 1 <= max_rungs <= LADDER_MAX_RUNGS:
        raise ValueError(f"max_rungs must lie in 1..{LADDER_MAX_RUNGS}")
    rows = []
    for k in range(1, max_rungs + 1):
        a, b, res = optimize_ladder_angles(k, "surviving", epsilon)
        rows.append((k, "surviving", res.divergence))
        rows.append((k, "all", inf_divergence(ladder_law(k, a, b, "all"), epsilon).divergence))
    return rows


# ------------------------------------------------------------- efficiency

def detection_threshold(m, tol: float = 1e-4, epsilon: float = EPSILON, pi=None) -> float:
    """Smallest detection efficiency with divergence above ``DETECTION_LEVEL``, by bisection."""
    if m.scenario.parties != 2:
        raise ValueError("detection_threshold needs a two-party model")
    base = born_law(m, pi)

    def strength(eta):
        return inf_divergence(with_detection_efficiency(base, eta), epsilon).divergence

    if strength(1.0) <= DETECTION_LEVEL:
        raise ZeroDivergence("the lossless law is already classical")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if strength(mid) > DETECTION_LEVEL:
            hi = mid
        else:
            lo = mid
    return hi


def discounted_strength(divergence: float, pairs_per_trial: float = 1, setting_acceptance: float = 1.0) -> float:
    """Divergence per resource unit: ``divergence * setting_acceptance / pairs_per_trial``."""
    if divergence < 0 or pairs_per_trial <= 0 or setting_acceptance <= 0:
        raise ValueError("divergence must be nonnegative and the factors positive")
    return divergence * setting_acceptance / pairs_per_trial


def maxent_divergence(d: int, epsilon: float = EPSILON) -> float:
    return inf_divergence(born_law(cglmp_model(d, maximally_entangled(d))), epsilon).divergence


__all__ = [
    "EPSILON", "StrengthResult", "FaceCertificate", "divergence_bits", "inf_divergence", "extract_face",
    "optimize_schmidt", "ladder_law", "optimize_ladder_angles", "ladder_sweep", "default_ladder_angles",
    "detection_threshold", "discounted_strength", "maxent_divergence", "worker_count", "ladder_pairs",
]
