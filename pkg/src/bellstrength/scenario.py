"""The p x q x r Bell experiment data model.

Setting patterns ``(a, b, ...)`` and outcome patterns ``(x, y, ...)`` are
flattened as mixed-radix integers with party 0 the most significant digit.
Settings are 0-based here (the usual "setting 1" is index 0).  A law is
stored as a dense ``(q**p, r**p)`` array of absolute probabilities
``p(a, b, ...; x, y, ...) = pi(a, b, ...) * p(x, y, ... | a, b, ...)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidLaw, ShapeMismatch, ZeroSettingWeight

MAX_PARTIES = 4
MAX_SETTINGS = 8
MAX_OUTCOMES = 128

PI_TOL = 1e-12
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Scenario:
    parties: int
    settings: int
    outcomes: int

    def __post_init__(self):
        for name, value, cap in (("parties", self.parties, MAX_PARTIES),
                                 ("settings", self.settings, MAX_SETTINGS),
                                 ("outcomes", self.outcomes, MAX_OUTCOMES)):
            if int(value) != value or value < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {value!r}")
            if value > cap:
                raise ValueError(f"{name}={value} exceeds the configured cap {cap}")

    @property
    def n_setting_patterns(self) -> int:
        return self.settings ** self.parties

    @property
    def n_outcome_patterns(self) -> int:
        return self.outcomes ** self.parties

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_setting_patterns, self.n_outcome_patterns)

    @property
    def n_vertices(self) -> int:
        return self.outcomes ** (self.parties * self.settings)

    @cached_property
    def setting_patterns(self) -> np.ndarray:
        """All setting patterns, shape ``(q**p, p)``, in index order."""
        return _digits(np.arange(self.n_setting_patterns), self.settings, self.parties)

    @cached_property
    def outcome_patterns(self) -> np.ndarray:
        return _digits(np.arange(self.n_outcome_patterns), self.outcomes, self.parties)

    def setting_index(self, pattern: Sequence[int]) -> int:
        return _index(pattern, self.settings, self.parties)

    def outcome_index(self, pattern: Sequence[int]) -> int:
        return _index(pattern, self.outcomes, self.parties)

    def tensor_shape(self) -> tuple[int, ...]:
        return (self.settings,) * self.parties + (self.outcomes,) * self.parties

    def to_dict(self) -> dict:
        return {"parties": self.parties, "settings": self.settings, "outcomes": self.outcomes}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            return cls(int(d["parties"]), int(d["settings"]), int(d["outcomes"]))
        except KeyError as exc:
            raise InvalidLaw(f"scenario is missing field {exc.args[0]!r}") from None


def _digits(values: np.ndarray, base: int, width: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    powers = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (values[:, None] // powers[None, :]) % base


def _index(pattern: Sequence[int], base: int, width: int) -> int:
    pattern = tuple(int(v) for v in pattern)
    if len(pattern) != width or any(v < 0 or v >= base for v in pattern):
        raise ShapeMismatch(f"pattern {pattern} is not valid for base {base}, width {width}")
    idx = 0
    for v in pattern:
        idx = idx * base + v
    return idx


@dataclass(frozen=True, eq=False)
class SettingDistribution:
    scenario: Scenario
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.shape != (self.scenario.n_setting_patterns,):
            raise ShapeMismatch(f"pi has {w.size} weights, expected {self.scenario.n_setting_patterns}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidLaw("pi has negative or non-finite weights")
        if abs(w.sum() - 1.0) > PI_TOL:
            raise InvalidLaw(f"pi weights sum to {w.sum():.15g}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, scenario: Scenario) -> "SettingDistribution":
        n = scenario.n_setting_patterns
        return cls(scenario, np.full(n, 1.0 / n))

    @classmethod
    def on_patterns(cls, scenario: Scenario, patterns: Iterable[Sequence[int]]) -> "SettingDistribution":
        """Uniform over the given setting patterns, zero elsewhere."""
        idx = sorted({scenario.setting_index(p) for p in patterns})
        w = np.zeros(scenario.n_setting_patterns)
        w[idx] = 1.0 / len(idx)
        return cls(scenario, w)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def __eq__(self, other):
        return (isinstance(other, SettingDistribution) and self.scenario == other.scenario
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.scenario, self.weights.tobytes()))


@dataclass(frozen=True, eq=False)
class ProbabilityLaw:
    scenario: Scenario
    pi: SettingDistribution
    entries: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.size != self.scenario.n_setting_patterns * self.scenario.n_outcome_patterns:
            raise ShapeMismatch(f"law has {e.size} entries, expected shape {self.scenario.shape}")
        e = e.reshape(self.scenario.shape)
        if self.pi.scenario != self.scenario:
            raise ShapeMismatch("pi belongs to a different scenario")
        if self.validate:
            problem = _law_problem(self.pi.weights, e)
            if problem:
                raise InvalidLaw(problem)
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def conditional(self, pattern) -> np.ndarray:
        return conditional(self, pattern)

    def tensor(self) -> np.ndarray:
        return self.entries.reshape(self.scenario.tensor_shape())

    def to_dict(self) -> dict:
        return {"scenario": self.scenario.to_dict(),
                "pi": self.pi.weights.tolist(),
                "entries": self.entries.reshape(-1).tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ProbabilityLaw":
        for key in ("scenario", "pi", "entries"):
            if key not in d:
                raise InvalidLaw(f"law file is missing field {key!r}")
        scenario = Scenario.from_dict(d["scenario"])
        pi = np.asarray(d["pi"], dtype=float)
        entries = np.asarray(d["entries"], dtype=float)
        if pi.size != scenario.n_setting_patterns:
            raise InvalidLaw(f"pi has {pi.size} weights, expected {scenario.n_setting_patterns}")
        if entries.size != scenario.n_setting_patterns * scenario.n_outcome_patterns:
            raise InvalidLaw(f"entries has {entries.size} values, expected "
                             f"{scenario.n_setting_patterns * scenario.n_outcome_patterns}")
        return cls(scenario, SettingDistribution(scenario, pi), entries)

    def __eq__(self, other):
        return (isinstance(other, ProbabilityLaw) and self.pi == other.pi
                and np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.pi, self.entries.tobytes()))


def _law_problem(pi: np.ndarray, entries: np.ndarray) -> str | None:
    if not np.all(np.isfinite(entries)):
        return "entries contain non-finite values"
    if np.any(entries < 0):
        s, o = np.argwhere(entries < 0)[0]
        return f"entry (setting {s}, outcome {o}) is negative: {entries[s, o]:.3e}"
    sums = entries.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - pi) > NORMALIZATION_TOL)
    if bad.size:
        s = bad[0]
        return (f"entries for setting pattern {s} sum to {sums[s]:.15g} "
                f"but pi({s}) = {pi[s]:.15g}")
    return None


def law_from_conditionals(pi: SettingDistribution, cond: np.ndarray) -> ProbabilityLaw:
    """Build ``pi(s) * p(o|s)`` from a ``(q**p, r**p)`` array of conditionals."""
    cond = np.asarray(cond, dtype=float).reshape(pi.scenario.shape)
    entries = pi.weights[:, None] * cond
    return ProbabilityLaw(pi.scenario, pi, entries)


def conditional(law: ProbabilityLaw, pattern) -> np.ndarray:
    """``p(x, y, ... | a, b, ...)`` for one setting pattern (tuple or flat index)."""
    s = pattern if isinstance(pattern, (int, np.integer)) else law.scenario.setting_index(pattern)
    weight = law.pi.weights[s]
    if weight <= 0:
        raise ZeroSettingWeight(f"pi is zero on setting pattern {s}")
    return law.entries[s] / weight


@dataclass(frozen=True)
class NoSignallingReport:
    max_violation: float
    parties: tuple[int, ...] = ()
    settings: tuple[int, ...] = ()

    def ok(self, tol: float) -> bool:
        return self.max_violation <= tol


def check_no_signalling(law: ProbabilityLaw, tol: float = 1e-10) -> NoSignallingReport:
    """Largest disagreement of a marginal across settings of the parties summed out.

    For every proper subset of parties the conditional marginal on that
    subset must depend only on the subset's own settings.  With a
    full-support pi this reduces to the drop-one-party conditions; with a
    sparse pi (e.g. GHZ) the general form is needed because no two
    observed patterns differ in a single party.
    """
    sc = law.scenario
    p = sc.parties
    support = law.pi.support
    if support.size == 0:
        return NoSignallingReport(0.0)
    cond = law.entries[support] / law.pi.weights[support][:, None]
    cond = cond.reshape((support.size,) + (sc.outcomes,) * p)
    patterns = sc.setting_patterns[support]
    worst = NoSignallingReport(0.0)
    for size in range(1, p):
        for subset in itertools.combinations(range(p), size):
            dropped = tuple(1 + k for k in range(p) if k not in subset)
            marg = cond.sum(axis=dropped).reshape(support.size, -1)
            keys = [tuple(row) for row in patterns[:, list(subset)]]
            groups: dict[tuple, list[int]] = {}
            for i, key in enumerate(keys):
                groups.setdefault(key, []).append(i)
            for key, members in groups.items():
                if len(members) < 2:
                    continue
                block = marg[members]
                spread = float(np.max(block.max(axis=0) - block.min(axis=0)))
                if spread > worst.max_violation:
                    worst = NoSignallingReport(spread, subset, key)
    return worst


def mix(laws: Sequence[ProbabilityLaw], weights: Sequence[float]) -> ProbabilityLaw:
    laws = list(laws)
    w = np.asarray(weights, dtype=float)
    if not laws or w.shape != (len(laws),):
        raise ShapeMismatch("need one weight per law")
    if np.any(w < 0) or abs(w.sum() - 1.0) > PI_TOL:
        raise ShapeMismatch("mixture weights must lie on the simplex")
    pi = laws[0].pi
    for law in laws[1:]:
        if law.pi != pi:
            raise ShapeMismatch("laws do not share scenario and pi")
    entries = np.tensordot(w, np.stack([law.entries for law in laws]), axes=1)
    return ProbabilityLaw(pi.scenario, pi, entries)


def uniform_law(pi: SettingDistribution) -> ProbabilityLaw:
    sc = pi.scenario
    cond = np.full(sc.shape, 1.0 / sc.n_outcome_patterns)
    return law_from_conditionals(pi, cond)


def add_noise(law: ProbabilityLaw, noise_weight: float) -> ProbabilityLaw:
    if not 0.0 <= noise_weight <= 1.0:
        raise ValueError("noise_weight must lie in [0, 1]")
    noise = uniform_law(law.pi)
    entries = (1.0 - noise_weight) * law.entries + noise_weight * noise.entries
    return ProbabilityLaw(law.scenario, law.pi, entries)


def permute_table(scenario: Scenario, table: np.ndarray, party_perm=None,
                  setting_perms=None, outcome_perms=None) -> np.ndarray:
    """Relabel a ``(q**p, r**p)`` table (law entries or inequality coefficients).

    ``party_perm[k]`` is the old party that becomes new party ``k``;
    ``setting_perms[k][j]`` is the old setting of (old) party ``k`` that
    becomes setting ``j``; likewise for outcomes.
    """
    p = scenario.parties
    t = np.asarray(table).reshape(scenario.tensor_shape())
    for k in range(p):
        if setting_perms is not None:
            t = np.take(t, np.asarray(setting_perms[k]), axis=k)
        if outcome_perms is not None:
            t = np.take(t, np.asarray(outcome_perms[k]), axis=p + k)
    if party_perm is not None:
        perm = list(party_perm)
        t = np.transpose(t, perm + [p + k for k in perm])
    return np.ascontiguousarray(t).reshape(scenario.shape)


def permute_pi(pi: SettingDistribution, party_perm=None, setting_perms=None) -> SettingDistribution:
    sc = pi.scenario
    t = pi.weights.reshape((sc.settings,) * sc.parties)
    for k in range(sc.parties):
        if setting_perms is not None:
            t = np.take(t, np.asarray(setting_perms[k]), axis=k)
    if party_perm is not None:
        t = np.transpose(t, list(party_perm))
    return SettingDistribution(sc, np.ascontiguousarray(t).reshape(-1))


def permute_law(law: ProbabilityLaw, party_perm=None, setting_perms=None,
                outcome_perms=None) -> ProbabilityLaw:
    pi = permute_pi(law.pi, party_perm, setting_perms)
    entries = permute_table(law.scenario, law.entries, party_perm, setting_perms, outcome_perms)
    return ProbabilityLaw(law.scenario, pi, entries)
