"""The classical (local-realist) polytope and Bell inequalities on it.

A deterministic vertex fixes one outcome for every (party, setting).  Vertex
``v`` is numbered by reading its assignment as a base-``r`` integer with
(party 0, setting 0) the most significant digit, which is also the
lexicographic order in which vertices are enumerated.

Inequalities are stored over absolute joint entries ``p(s; o)``: a
coefficient array of the law's shape together with a bound, read as
``sum(coefficients * entries) <= bound`` under local realism.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np

from .errors import ShapeMismatch, TooManyVertices, ValidityCheckFailed
from .scenario import ProbabilityLaw, Scenario, SettingDistribution, _digits

VERTEX_CAP = 2 ** 24
CHUNK = 1 << 15
TIE_TOL = 1e-12
LADDER_CERTIFY_MAX_RUNGS = 10


@dataclass(frozen=True)
class DeterministicVertex:
    scenario: Scenario
    assignment: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sc = self.scenario
        a = tuple(tuple(int(x) for x in row) for row in self.assignment)
        if len(a) != sc.parties or any(len(row) != sc.settings for row in a):
            raise ShapeMismatch("assignment must give one outcome per (party, setting)")
        if any(x < 0 or x >= sc.outcomes for row in a for x in row):
            raise ShapeMismatch("assignment outcome out of range")
        object.__setattr__(self, "assignment", a)

    @property
    def index(self) -> int:
        idx = 0
        for row in self.assignment:
            for x in row:
                idx = idx * self.scenario.outcomes + x
        return idx

    @classmethod
    def from_index(cls, scenario: Scenario, index: int) -> "DeterministicVertex":
        digits = _digits(np.array([index]), scenario.outcomes, scenario.parties * scenario.settings)[0]
        return cls(scenario, tuple(map(tuple, digits.reshape(scenario.parties, scenario.settings))))

    def outcome_indices(self) -> np.ndarray:
        """Outcome-pattern index this vertex produces for every setting pattern."""
        return outcome_index_table(self.scenario, np.array([self.index]))[0]


def check_vertex_cap(scenario: Scenario, cap: int = VERTEX_CAP) -> None:
    if scenario.n_vertices > cap:
        raise TooManyVertices(f"{scenario.n_vertices} vertices exceed the cap {cap}")


def enumerate_vertices(scenario: Scenario, cap: int = VERTEX_CAP) -> Iterator[DeterministicVertex]:
    check_vertex_cap(scenario, cap)
    sc = scenario
    for digits in itertools.product(range(sc.outcomes), repeat=sc.parties * sc.settings):
        yield DeterministicVertex(sc, tuple(tuple(digits[k * sc.settings:(k + 1) * sc.settings])
                                            for k in range(sc.parties)))


def outcome_index_table(scenario: Scenario, vertex_ids: np.ndarray,
                        patterns: np.ndarray | None = None) -> np.ndarray:
    """``table[i, j]`` = outcome pattern index vertex ``vertex_ids[i]`` yields on setting pattern ``j``.

    ``patterns`` restricts the columns to the given setting-pattern indices.
    """
    sc = scenario
    assign = _digits(vertex_ids, sc.outcomes, sc.parties * sc.settings).reshape(-1, sc.parties, sc.settings)
    sp = sc.setting_patterns if patterns is None else sc.setting_patterns[patterns]
    out = np.zeros((assign.shape[0], sp.shape[0]), dtype=np.int64)
    for k in range(sc.parties):
        out = out * sc.outcomes + assign[:, k, sp[:, k]]
    return out


def iter_vertex_chunks(scenario: Scenario, patterns: np.ndarray | None = None,
                       chunk: int = CHUNK, cap: int = VERTEX_CAP):
    """Yield ``(first_vertex_id, outcome_index_table)`` over all vertices, in order."""
    check_vertex_cap(scenario, cap)
    n = scenario.n_vertices
    for start in range(0, n, chunk):
        ids = np.arange(start, min(n, start + chunk), dtype=np.int64)
        yield start, outcome_index_table(scenario, ids, patterns)


def vertex_law(v: DeterministicVertex, pi: SettingDistribution) -> ProbabilityLaw:
    if v.scenario != pi.scenario:
        raise ShapeMismatch("vertex and pi belong to different scenarios")
    sc = v.scenario
    entries = np.zeros(sc.shape)
    entries[np.arange(sc.n_setting_patterns), v.outcome_indices()] = pi.weights
    return ProbabilityLaw(sc, pi, entries)


@dataclass(frozen=True, eq=False)
class BellInequality:
    """``sum(coefficients * p) <= bound`` over absolute joint entries.

    ``pi`` records the setting distribution the coefficients were built
    for (builders divide conditional coefficients by it); ``None`` means
    uniform.
    """
    scenario: Scenario
    coefficients: np.ndarray
    bound: float = 0.0
    form: Literal["raw", "canonical"] = "raw"
    pi: SettingDistribution | None = field(default=None)
    reference: int = 0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.size != self.scenario.n_setting_patterns * self.scenario.n_outcome_patterns:
            raise ShapeMismatch(f"coefficients have {c.size} values, expected shape {self.scenario.shape}")
        c = c.reshape(self.scenario.shape)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "bound", float(self.bound))
        if self.form not in ("raw", "canonical"):
            raise ValueError(f"unknown form {self.form!r}")
        if self.pi is not None and self.pi.scenario != self.scenario:
            raise ShapeMismatch("pi belongs to a different scenario")

    @property
    def setting_distribution(self) -> SettingDistribution:
        return self.pi if self.pi is not None else SettingDistribution.uniform(self.scenario)

    def conditional_coefficients(self) -> np.ndarray:
        """Coefficients on conditional probabilities ``p(o|s)`` (absolute ones times pi)."""
        return self.coefficients * self.setting_distribution.weights[:, None]

    def active_setting_patterns(self) -> np.ndarray:
        return np.flatnonzero(np.any(self.coefficients != 0, axis=1))

    def to_dict(self) -> dict:
        d = {"scenario": self.scenario.to_dict(),
             "coefficients": self.coefficients.reshape(-1).tolist(),
             "bound": self.bound,
             "form": self.form}
        if self.pi is not None:
            d["pi"] = self.pi.weights.tolist()
        if self.form == "canonical":
            d["reference"] = self.reference
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BellInequality":
        for key in ("scenario", "coefficients", "bound"):
            if key not in d:
                raise ShapeMismatch(f"inequality file is missing field {key!r}")
        sc = Scenario.from_dict(d["scenario"])
        pi = SettingDistribution(sc, d["pi"]) if d.get("pi") is not None else None
        return cls(sc, np.asarray(d["coefficients"], dtype=float), float(d["bound"]),
                   d.get("form", "raw"), pi, int(d.get("reference", 0)))


def evaluate(ineq: BellInequality, law: ProbabilityLaw) -> float:
    if ineq.scenario != law.scenario:
        raise ShapeMismatch("inequality and law belong to different scenarios")
    return float(np.sum(ineq.coefficients * law.entries))


def vertex_values(ineq: BellInequality, pi: SettingDistribution | None = None,
                  cap: int = VERTEX_CAP) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_vertex_id, values)`` chunks of the inequality on every vertex law."""
    pi = pi or ineq.setting_distribution
    if pi.scenario != ineq.scenario:
        raise ShapeMismatch("pi belongs to a different scenario")
    weighted = ineq.coefficients * pi.weights[:, None]
    active = np.flatnonzero(np.any(weighted != 0, axis=1))
    rows = weighted[active]
    for start, table in iter_vertex_chunks(ineq.scenario, active, cap=cap):
        if active.size == 0:
            yield start, np.zeros(table.shape[0])
        else:
            yield start, rows[np.arange(active.size)[None, :], table].sum(axis=1)


def classical_max(ineq: BellInequality, pi: SettingDistribution | None = None,
                  cap: int = VERTEX_CAP) -> tuple[float, DeterministicVertex]:
    """Exact maximum over the vertex laws; ties go to the first vertex in order."""
    best_val = -np.inf
    best_id = 0
    for start, values in vertex_values(ineq, pi, cap):
        i = int(np.argmax(values))
        if best_val == -np.inf or values[i] > best_val + TIE_TOL * max(1.0, abs(best_val)):
            best_val, best_id = float(values[i]), start + i
    return best_val, DeterministicVertex.from_index(ineq.scenario, best_id)


# ---------------------------------------------------------------- builders

def _lt_mask(d: int, swap: bool = False) -> np.ndarray:
    """Indicator over (x, y) of ``x < y`` (or ``y < x`` with ``swap``)."""
    x, y = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return (y < x) if swap else (x < y)


def _from_conditional_terms(scenario: Scenario, terms, pi: SettingDistribution,
                            bound: float = 0.0) -> BellInequality:
    """Sum ``weight * Pr(event | a, b)`` terms into absolute coefficients."""
    cond = np.zeros(scenario.shape)
    for (a, b), mask, weight in terms:
        cond[scenario.setting_index((a, b))] += weight * mask.reshape(-1)
    w = pi.weights
    active = np.any(cond != 0, axis=1)
    if np.any(active & (w <= 0)):
        raise ShapeMismatch("pi is zero on a setting pattern the inequality uses")
    coeffs = np.zeros_like(cond)
    coeffs[active] = cond[active] / w[active, None]
    return BellInequality(scenario, coeffs, bound, "raw", pi)


def cglmp_inequality(d: int, pi: SettingDistribution | None = None) -> BellInequality:
    """``Pr(X1<Y1) - Pr(X1<Y2) - Pr(Y2<X2) - Pr(X2<Y1) <= 0`` on 2 x 2 x d.

    X is Alice, Y is Bob; setting "1" is index 0 and outcome values are the
    outcome indices.  If none of the three right-hand events happens then
    ``X1 >= Y2 >= X2 >= Y1``, so the left-hand event cannot happen either.
    The bound 0 is tight for every d (all-equal outcomes reach it), and at
    d = 2 the inequality is a CHSH facet.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    sc = Scenario(2, 2, d)
    pi = pi or SettingDistribution.uniform(sc)
    lt, gt = _lt_mask(d), _lt_mask(d, swap=True)
    terms = [((0, 0), lt, 1.0), ((0, 1), lt, -1.0), ((1, 1), gt, -1.0), ((1, 0), lt, -1.0)]
    return _from_conditional_terms(sc, terms, pi, bound=0.0)


def chsh_inequality(pi: SettingDistribution | None = None) -> BellInequality:
    """Correlator form ``-E00 + E01 + E10 + E11 <= 2`` with outcome 0 read as +1.

    The odd term sits on settings (0, 0), the same labels as the CGLMP(2) form.
    """
    sc = Scenario(2, 2, 2)
    pi = pi or SettingDistribution.uniform(sc)
    corr = np.array([[1.0, -1.0], [-1.0, 1.0]])
    terms = [((0, 0), corr, -1.0), ((0, 1), corr, 1.0), ((1, 0), corr, 1.0), ((1, 1), corr, 1.0)]
    return _from_conditional_terms(sc, terms, pi, bound=2.0)


def ladder_pairs(rungs: int) -> list[tuple[int, int]]:
    """Setting pairs (Alice, Bob) that survive in the ``rungs``-rung ladder."""
    n = rungs + 1
    pairs = {(0, 0), (n - 1, n - 1)}
    for i in range(rungs):
        pairs.add((i, i + 1))
        pairs.add((i + 1, i))
    return sorted(pairs)


def ladder_policy_pi(rungs: int, policy: str) -> SettingDistribution:
    sc = Scenario(2, rungs + 1, 2)
    if policy == "surviving":
        return SettingDistribution.on_patterns(sc, ladder_pairs(rungs))
    if policy == "all":
        return SettingDistribution.uniform(sc)
    raise ValueError(f"unknown setting policy {policy!r}")


def ladder_inequality(rungs: int, pi: SettingDistribution | None = None,
                      certify: bool | None = None) -> BellInequality:
    """Chain of ``rungs`` CGLMP(2) inequalities over settings i, i+1.

    Odd rungs swap the roles of X and Y so that each intermediate
    horizontal term ``Pr(Y_i < X_i)`` / ``Pr(X_i < Y_i)`` cancels against
    the next rung's left-hand side.  Every rung is bounded by 0, hence so
    is the sum; this is checked on every vertex when
    ``rungs <= LADDER_CERTIFY_MAX_RUNGS``.
    """
    if rungs < 1:
        raise ValueError("rungs must be at least 1")
    sc = Scenario(2, rungs + 1, 2)
    pi = pi or ladder_policy_pi(rungs, "surviving")
    lt, gt = _lt_mask(2), _lt_mask(2, swap=True)
    terms = []
    for i in range(rungs):
        j = i + 1
        if i % 2 == 0:
            # Pr(Xi<Yi) <= Pr(Xi<Yj) + Pr(Yj<Xj) + Pr(Xj<Yi)
            terms += [((i, i), lt, 1.0), ((i, j), lt, -1.0), ((j, j), gt, -1.0), ((j, i), lt, -1.0)]
        else:
            # Pr(Yi<Xi) <= Pr(Yi<Xj) + Pr(Xj<Yj) + Pr(Yj<Xi)
            terms += [((i, i), gt, 1.0), ((j, i), gt, -1.0), ((j, j), lt, -1.0), ((i, j), gt, -1.0)]
    cond = np.zeros(sc.shape)
    for (a, b), mask, weight in terms:
        cond[sc.setting_index((a, b))] += weight * mask.reshape(-1)
    cond[np.abs(cond) < 1e-15] = 0.0
    active = np.any(cond != 0, axis=1)
    if np.any(active & (pi.weights <= 0)):
        raise ShapeMismatch("pi is zero on a setting pair the ladder uses")
    coeffs = np.zeros_like(cond)
    coeffs[active] = cond[active] / pi.weights[active, None]
    ineq = BellInequality(sc, coeffs, 0.0, "raw", pi)
    if certify is None:
        certify = rungs <= LADDER_CERTIFY_MAX_RUNGS
    if certify:
        value, vertex = classical_max(ineq)
        if value > ineq.bound + 1e-12:
            raise ValidityCheckFailed(f"ladder({rungs}) is violated by vertex {vertex.index}: {value}")
    return ineq


def zero_inequality(scenario: Scenario, pi: SettingDistribution | None = None) -> BellInequality:
    return BellInequality(scenario, np.zeros(scenario.shape), 0.0, "raw", pi)


# ------------------------------------------------------------ canonical form

def _marginal_terms(scenario: Scenario, pi_w: np.ndarray, reference: int) -> np.ndarray:
    """Columns are absolute marginals ``Pr(s_S, o_S)`` with every ``o_S != reference``."""
    sc = scenario
    sp, op = sc.setting_patterns, sc.outcome_patterns
    observed = pi_w > 0
    cols = []
    for size in range(1, sc.parties + 1):
        for subset in itertools.combinations(range(sc.parties), size):
            sub = list(subset)
            s_keys = sp[:, sub]
            o_keys = op[:, sub]
            o_ok = np.all(o_keys != reference, axis=1)
            for s_sub in itertools.product(range(sc.settings), repeat=size):
                s_match = np.all(s_keys == np.array(s_sub), axis=1) & observed
                if not s_match.any():
                    continue
                for o_sub in itertools.product([x for x in range(sc.outcomes) if x != reference],
                                               repeat=size):
                    o_match = o_ok & np.all(o_keys == np.array(o_sub), axis=1)
                    cols.append(np.outer(s_match, o_match).reshape(-1))
    return np.array(cols, dtype=float).T


def constraint_matrix(scenario: Scenario, pi: SettingDistribution) -> np.ndarray:
    """Rows spanning normalization and no-signalling on observed patterns.

    Rows act on the flattened entries; normalization rows have right-hand
    side pi(s), no-signalling rows zero.  Only the left-hand sides are
    returned since canonicalization needs the row space alone.
    """
    sc = scenario
    w = pi.weights
    n_s, n_o = sc.shape
    sp, op = sc.setting_patterns, sc.outcome_patterns
    observed = np.flatnonzero(w > 0)
    rows = []
    for s in range(n_s):
        r = np.zeros(sc.shape)
        r[s, :] = 1.0
        rows.append(r.reshape(-1))
    for s in np.flatnonzero(w <= 0):
        for o in range(n_o):
            r = np.zeros(sc.shape)
            r[s, o] = 1.0
            rows.append(r.reshape(-1))
    for size in range(1, sc.parties):
        for subset in itertools.combinations(range(sc.parties), size):
            sub = list(subset)
            groups: dict[tuple, list[int]] = {}
            for s in observed:
                groups.setdefault(tuple(sp[s, sub]), []).append(int(s))
            o_keys = op[:, sub]
            for members in groups.values():
                for s0, s1 in zip(members, members[1:]):
                    for o_sub in itertools.product(range(sc.outcomes), repeat=size):
                        match = np.all(o_keys == np.array(o_sub), axis=1)
                        r = np.zeros(sc.shape)
                        r[s0, match] = 1.0 / w[s0]
                        r[s1, match] = -1.0 / w[s1]
                        rows.append(r.reshape(-1))
    return np.array(rows)


def reference_vertex_law(scenario: Scenario, pi: SettingDistribution, reference: int) -> ProbabilityLaw:
    v = DeterministicVertex(scenario, tuple((reference,) * scenario.settings for _ in range(scenario.parties)))
    return vertex_law(v, pi)


def canonicalize(ineq: BellInequality, reference: int = 0) -> BellInequality:
    """Rewrite the inequality without joint terms whose outcomes all equal ``reference``.

    On the no-signalling subspace of ``ineq.pi`` the coefficients are
    re-expressed through absolute marginals ``Pr(s_S, o_S)`` over party
    subsets S with every outcome different from ``reference`` (the full
    party set giving the joint terms).  Each marginal spreads its
    coefficient over the joint entries it sums, so the only entries left
    with zero coefficient are those where all outcomes equal the
    reference.  The constant absorbed by the substitution is removed from
    the bound: the new bound is ``bound - raw(reference vertex)``, which is
    zero exactly when the reference vertex lies on the face.
    """
    sc = ineq.scenario
    if not 0 <= reference < sc.outcomes:
        raise ValueError("reference outcome out of range")
    pi = ineq.setting_distribution
    c = np.where(pi.weights[:, None] > 0, ineq.coefficients, 0.0).reshape(-1)
    terms = _marginal_terms(sc, pi.weights, reference)
    cons = constraint_matrix(sc, pi)
    system = np.hstack([terms, cons.T])
    sol, *_ = np.linalg.lstsq(system, c, rcond=None)
    canon = terms @ sol[:terms.shape[1]]
    residual = float(np.max(np.abs(system @ sol - c), initial=0.0))
    if residual > 1e-9 * max(1.0, float(np.max(np.abs(c), initial=0.0))):
        raise ValidityCheckFailed(f"canonical substitution left residual {residual:.3e}")
    canon[np.abs(canon) < 1e-13 * max(1.0, float(np.max(np.abs(canon), initial=0.0)))] = 0.0
    shift = float(np.sum(ineq.coefficients * reference_vertex_law(sc, pi, reference).entries))
    return BellInequality(sc, canon.reshape(sc.shape) + 0.0, ineq.bound - shift, "canonical", ineq.pi, reference)


def membership_gap(law: ProbabilityLaw, epsilon: float = 1e-9) -> float:
    """Divergence (bits) from ``law`` to the classical polytope; 0 iff classical."""
    from .strength import inf_divergence

    return inf_divergence(law, epsilon).divergence
