"""Quantum models and the Born rule.

A model is a pure state on the tensor product of the parties' spaces plus,
for every (party, setting), a complete family of orthogonal projectors.
Families built from a unitary (measure in the computational basis after
applying ``U``) also keep the measured basis vectors, which lets
:func:`born_law` contract amplitudes directly instead of forming projectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateEigenvector, InvalidModel
from .linalg import IDENTITY_2, SIGMA_1, SIGMA_2, dagger, hermitian_eig, kron_all
from .scenario import ProbabilityLaw, Scenario, SettingDistribution

PROJECTOR_TOL = 1e-10
STATE_NORM_TOL = 1e-12
BORN_ZERO_TOL = 1e-15

# Alice's settings are listed so that her first setting pairs with Bob's
# first one in the left-hand term of cglmp_inequality.
CHSH_ALICE_ANGLES = (np.pi / 4, 0.0)
CHSH_BOB_ANGLES = (np.pi / 8, -np.pi / 8)
GHZ_PATTERNS = ((0, 1, 1), (1, 0, 1), (1, 1, 0), (0, 0, 0))


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    projectors: tuple[np.ndarray, ...]
    basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        ps = tuple(np.asarray(p, dtype=complex) for p in self.projectors)
        if not ps:
            raise InvalidModel("a projector family needs at least one member")
        dim = ps[0].shape[0]
        eye = np.eye(dim)
        total = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(ps):
            if p.shape != (dim, dim):
                raise InvalidModel("projectors must be square and of equal size")
            if np.max(np.abs(p - dagger(p))) > PROJECTOR_TOL:
                raise InvalidModel(f"projector {i} is not Hermitian")
            if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
                raise InvalidModel(f"projector {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ ps[j])) > PROJECTOR_TOL:
                    raise InvalidModel(f"projectors {j} and {i} are not orthogonal")
            total += p
        if np.max(np.abs(total - eye)) > PROJECTOR_TOL:
            raise InvalidModel("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", ps)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def size(self) -> int:
        return len(self.projectors)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "ProjectorFamily":
        """Computational-basis measurement after applying ``u``: ``P_k = u^dagger |k><k| u``."""
        u = np.asarray(u, dtype=complex)
        vecs = dagger(u)  # column k is u^dagger |k>
        projs = tuple(np.outer(vecs[:, k], np.conj(vecs[:, k])) for k in range(u.shape[0]))
        return cls(projs, basis=vecs)

    @classmethod
    def from_hermitian(cls, h: np.ndarray, descending: bool = True) -> "ProjectorFamily":
        """Eigenprojectors of ``h`` grouped by eigenvalue (largest first by default)."""
        w, v = hermitian_eig(h)
        order = np.argsort(-w if descending else w, kind="stable")
        w, v = w[order], v[:, order]
        groups: list[list[int]] = []
        for i, val in enumerate(w):
            if groups and abs(val - w[groups[-1][0]]) < 1e-9:
                groups[-1].append(i)
            else:
                groups.append([i])
        projs = tuple(v[:, g] @ dagger(v[:, g]) for g in groups)
        basis = v if all(len(g) == 1 for g in groups) else None
        return cls(projs, basis=basis)


@dataclass(frozen=True)
class SchmidtState:
    coefficients: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coefficients)
        if not c:
            raise ValueError("need at least one Schmidt coefficient")
        if any(x < 0 for x in c):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if abs(sum(x * x for x in c) - 1.0) > STATE_NORM_TOL:
            raise ValueError("Schmidt coefficients must have unit 2-norm")
        object.__setattr__(self, "coefficients", c)

    @property
    def d(self) -> int:
        return len(self.coefficients)

    @classmethod
    def normalized(cls, values: Sequence[float]) -> "SchmidtState":
        c = np.abs(np.asarray(values, dtype=float))
        return cls(tuple(c / np.linalg.norm(c)))

    def vector(self) -> np.ndarray:
        d = self.d
        psi = np.zeros(d * d, dtype=complex)
        psi[np.arange(d) * (d + 1)] = self.coefficients
        return psi


def maximally_entangled(d: int) -> SchmidtState:
    if d < 1:
        raise ValueError("d must be positive")
    return SchmidtState((1.0 / np.sqrt(d),) * d)


@dataclass(frozen=True, eq=False)
class QuantumModel:
    scenario: Scenario
    party_dims: tuple[int, ...]
    state: np.ndarray
    measurements: tuple[tuple[ProjectorFamily, ...], ...]

    def __post_init__(self):
        sc = self.scenario
        dims = tuple(int(d) for d in self.party_dims)
        psi = np.asarray(self.state, dtype=complex).reshape(-1)
        if len(dims) != sc.parties:
            raise InvalidModel("need one dimension per party")
        if psi.size != int(np.prod(dims)):
            raise InvalidModel(f"state has dimension {psi.size}, expected {int(np.prod(dims))}")
        if abs(np.linalg.norm(psi) - 1.0) > STATE_NORM_TOL:
            raise InvalidModel(f"state norm {np.linalg.norm(psi):.15g} is not 1")
        meas = tuple(tuple(row) for row in self.measurements)
        if len(meas) != sc.parties or any(len(row) != sc.settings for row in meas):
            raise InvalidModel("need a projector family for every (party, setting)")
        for k, row in enumerate(meas):
            for fam in row:
                if fam.dim != dims[k]:
                    raise InvalidModel(f"party {k} projectors have dimension {fam.dim}, expected {dims[k]}")
                if fam.size != sc.outcomes:
                    raise InvalidModel(f"party {k} family has {fam.size} members, expected {sc.outcomes}")
        object.__setattr__(self, "party_dims", dims)
        object.__setattr__(self, "state", psi)
        object.__setattr__(self, "measurements", meas)

    def outcome_probabilities(self, pattern: Sequence[int]) -> np.ndarray:
        """``p(o | pattern)`` over flattened outcome patterns."""
        psi = self.state.reshape(self.party_dims)
        fams = [self.measurements[k][a] for k, a in enumerate(pattern)]
        if all(f.basis is not None for f in fams):
            amp = psi
            for k, f in enumerate(fams):
                # amplitude <b_o| psi> on axis k; move the outcome axis back into place
                amp = np.moveaxis(np.tensordot(np.conj(f.basis).T, amp, axes=([1], [k])), 0, k)
            return (np.abs(amp) ** 2).reshape(-1)
        # general projectors: t axes are (dims..., outcomes so far...)
        t = psi
        p = len(fams)
        for k, f in enumerate(fams):
            t = np.tensordot(np.stack(f.projectors), t, axes=([2], [k]))
            t = np.moveaxis(np.moveaxis(t, 1, k + 1), 0, -1)
        probs = np.sum(np.abs(t) ** 2, axis=tuple(range(p)))
        return probs.reshape(-1)


def born_law(m: QuantumModel, pi: SettingDistribution | None = None) -> ProbabilityLaw:
    """``p(s; o) = pi(s) * ||(P_{o_1}^{s_1} x ... x P_{o_p}^{s_p}) psi||^2``."""
    sc = m.scenario
    pi = pi or SettingDistribution.uniform(sc)
    if pi.scenario != sc:
        raise InvalidModel("pi belongs to a different scenario")
    cond = np.zeros(sc.shape)
    for s, pattern in enumerate(sc.setting_patterns):
        cond[s] = m.outcome_probabilities(pattern)
    # values this small are rounding noise on exact zeros
    cond[cond < BORN_ZERO_TOL] = 0.0
    cond /= cond.sum(axis=1, keepdims=True)
    return ProbabilityLaw(sc, pi, pi.weights[:, None] * cond)


# ----------------------------------------------------------- named models

def qft(d: int) -> np.ndarray:
    x = np.arange(d)
    return np.exp(2j * np.pi * np.outer(x, x) / d) / np.sqrt(d)


PHASE_CONVENTIONS = ("cglmp", "doubled", "literal")


def phase_diagonal(d: int, theta: float, convention: str = "cglmp") -> np.ndarray:
    """Diagonal unitary ``diag(exp(i x k theta))`` for ``x = 0..d-1``.

    ``cglmp``: ``k = 4/d``, the Collins et al. measurement (alpha = 2 theta / pi).
    ``doubled``: ``k = 2``, independent of d.
    ``literal``: ``k = 1/d``.
    The first two agree at d = 2, where they give the CHSH polarizer angles.
    """
    x = np.arange(d)
    if convention == "cglmp":
        k = 4.0 / d
    elif convention == "doubled":
        k = 2.0
    elif convention == "literal":
        k = 1.0 / d
    else:
        raise ValueError(f"unknown phase convention {convention!r}")
    return np.diag(np.exp(1j * k * x * theta))


def cglmp_measurements(d: int, alice_angles=CHSH_ALICE_ANGLES, bob_angles=CHSH_BOB_ANGLES,
                       convention: str = "cglmp"):
    q = qft(d)
    alice = tuple(ProjectorFamily.from_unitary(q @ phase_diagonal(d, a, convention)) for a in alice_angles)
    bob = tuple(ProjectorFamily.from_unitary(dagger(q) @ phase_diagonal(d, b, convention)) for b in bob_angles)
    return alice, bob


def cglmp_model(d: int, state: SchmidtState | None = None, convention: str = "cglmp",
                alice_angles=CHSH_ALICE_ANGLES, bob_angles=CHSH_BOB_ANGLES) -> QuantumModel:
    if d < 2:
        raise ValueError("d must be at least 2")
    state = state or maximally_entangled(d)
    if state.d != d:
        raise InvalidModel(f"Schmidt state has {state.d} coefficients, expected {d}")
    if len(alice_angles) != len(bob_angles):
        raise InvalidModel("Alice and Bob need the same number of settings")
    alice, bob = cglmp_measurements(d, alice_angles, bob_angles, convention)
    return QuantumModel(Scenario(2, len(alice_angles), d), (d, d), state.vector(), (alice, bob))


def ghz_operators() -> dict[str, np.ndarray]:
    i2 = IDENTITY_2
    return {
        "X1": kron_all(SIGMA_1, i2, i2), "X2": kron_all(SIGMA_2, i2, i2),
        "Y1": kron_all(i2, SIGMA_1, i2), "Y2": kron_all(i2, SIGMA_2, i2),
        "Z1": kron_all(i2, i2, SIGMA_1), "Z2": kron_all(i2, i2, SIGMA_2),
    }


def ghz_products() -> list[np.ndarray]:
    """X1Y2Z2, X2Y1Z2, X2Y2Z1, X1Y1Z1 in that order."""
    o = ghz_operators()
    return [o["X1"] @ o["Y2"] @ o["Z2"], o["X2"] @ o["Y1"] @ o["Z2"],
            o["X2"] @ o["Y2"] @ o["Z1"], o["X1"] @ o["Y1"] @ o["Z1"]]


def ghz_bell_operator() -> np.ndarray:
    a, b, c, d = ghz_products()
    return a + b + c - d


def ghz_state() -> np.ndarray:
    w, v = hermitian_eig(ghz_bell_operator())
    top = np.flatnonzero(np.abs(w - 4.0) < 1e-8)
    if top.size != 1:
        raise DegenerateEigenvector(f"eigenvalue 4 has multiplicity {top.size}")
    psi = v[:, top[0]]
    # fix the global phase so the largest component is real and positive
    j = int(np.argmax(np.abs(psi)))
    return psi * np.conj(psi[j]) / abs(psi[j])


def ghz_pi() -> SettingDistribution:
    return SettingDistribution.on_patterns(Scenario(3, 2, 2), GHZ_PATTERNS)


def ghz_model() -> QuantumModel:
    """Setting 0 measures sigma_1, setting 1 sigma_2; outcome 0 is eigenvalue +1."""
    fam = (ProjectorFamily.from_hermitian(SIGMA_1), ProjectorFamily.from_hermitian(SIGMA_2))
    return QuantumModel(Scenario(3, 2, 2), (2, 2, 2), ghz_state(), (fam, fam, fam))


def default_ladder_angles(rungs: int) -> tuple[np.ndarray, np.ndarray]:
    """Starting angles for a ``rungs``-rung ladder; ``rungs = 1`` gives the CHSH angles.

    The outcome statistics depend on ``alpha + beta``.  The first pair gets
    ``pi/2 - e`` (outcomes nearly always differ), every crossing pair gets
    ``+-e`` with the sign alternating per rung, and ``e = pi / (4 (rungs + 1))``
    spreads the unavoidable error evenly, leaving the last pair at ``+-e``.
    """
    if rungs < 1:
        raise ValueError("rungs must be at least 1")
    e = np.pi / (4 * (rungs + 1))
    a = np.zeros(rungs + 1)
    b = np.zeros(rungs + 1)
    b[0] = np.pi / 2 - e
    for i in range(rungs):
        sign = 1.0 if i % 2 == 0 else -1.0
        b[i + 1] = sign * e - a[i]
        a[i + 1] = sign * e - b[i]
    shift = CHSH_ALICE_ANGLES[0]
    return a + shift, b - shift


def ladder_model(alice_angles: Sequence[float], bob_angles: Sequence[float]) -> QuantumModel:
    """Maximally entangled qubits with one phase-angle measurement per setting."""
    return cglmp_model(2, maximally_entangled(2), "cglmp", tuple(alice_angles), tuple(bob_angles))


def with_detection_efficiency(m: QuantumModel | ProbabilityLaw, eta: float,
                              pi: SettingDistribution | None = None) -> ProbabilityLaw:
    """Lossy version of a law: each party independently reports "no event" with prob ``1 - eta``.

    "No event" is the new last outcome index ``r``.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    law = m if isinstance(m, ProbabilityLaw) else born_law(m, pi)
    sc = law.scenario
    p, r = sc.parties, sc.outcomes
    new = Scenario(p, sc.settings, r + 1)
    w = law.pi.weights
    cond = np.zeros_like(law.entries)
    observed = w > 0
    cond[observed] = law.entries[observed] / w[observed, None]
    t = cond.reshape((sc.n_setting_patterns,) + (r,) * p)
    # per party: outcome x -> eta * delta_x on old outcomes, (1 - eta) on "no event"
    loss = np.zeros((r + 1, r))
    loss[:r, :r] = eta * np.eye(r)
    loss[r, :] = 1.0 - eta
    for k in range(p):
        t = np.moveaxis(np.tensordot(loss, t, axes=([1], [1 + k])), 0, 1 + k)
    new_pi = SettingDistribution(new, w)
    entries = w[:, None] * t.reshape(sc.n_setting_patterns, -1)
    return ProbabilityLaw(new, new_pi, entries)


def random_model(scenario: Scenario, rng: np.random.Generator, dim: int | None = None) -> QuantumModel:
    """Haar-ish random pure state and random rank-1 projective measurements."""
    d = dim or scenario.outcomes
    if d < scenario.outcomes:
        raise InvalidModel("local dimension must be at least the number of outcomes")
    n = d ** scenario.parties
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi /= np.linalg.norm(psi)
    meas = []
    for _ in range(scenario.parties):
        row = []
        for _ in range(scenario.settings):
            z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            u, _ = np.linalg.qr(z)
            row.append(_coarse_family(u, scenario.outcomes))
        meas.append(tuple(row))
    return QuantumModel(scenario, (d,) * scenario.parties, psi, tuple(meas))


def _coarse_family(u: np.ndarray, r: int) -> ProjectorFamily:
    d = u.shape[0]
    if r == d:
        return ProjectorFamily.from_unitary(dagger(u))
    groups = np.array_split(np.arange(d), r)
    return ProjectorFamily(tuple(u[:, g] @ dagger(u[:, g]) for g in groups))


# -------------------------------------------------------------- JSON I/O

def _complex_to_json(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _complex_from_json(d) -> np.ndarray:
    try:
        return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d.get("im", 0.0), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidModel(f"bad complex array: {exc}") from exc


def model_to_dict(m: QuantumModel) -> dict:
    return {
        "scenario": m.scenario.to_dict(),
        "party_dims": list(m.party_dims),
        "state": _complex_to_json(m.state),
        "measurements": [[[_complex_to_json(p) for p in fam.projectors] for fam in row]
                         for row in m.measurements],
    }


def model_from_dict(d: dict) -> tuple[QuantumModel, SettingDistribution | None]:
    """Read an explicit or named model; returns the model and its default pi (or None).

    Named shorthands: ``{"named": "cglmp", "d": 3, "schmidt": [...]}``,
    ``{"named": "ghz"}``, ``{"named": "ladder", "rungs": 4}`` (optionally
    with "alice_angles"/"bob_angles" and "policy").
    """
    from .classical import ladder_policy_pi

    if not isinstance(d, dict):
        raise InvalidModel("model JSON must be an object")
    pi = None
    named = d.get("named")
    if named == "cglmp":
        n = int(d.get("d", 2))
        state = SchmidtState.normalized(d["schmidt"]) if d.get("schmidt") is not None else maximally_entangled(n)
        m = cglmp_model(n, state, d.get("convention", "cglmp"))
    elif named == "ghz":
        return ghz_model(), ghz_pi()
    elif named == "ladder":
        rungs = int(d.get("rungs", 1))
        a, b = default_ladder_angles(rungs)
        a = d.get("alice_angles", a)
        b = d.get("bob_angles", b)
        m = ladder_model(a, b)
        pi = ladder_policy_pi(rungs, d.get("policy", "surviving"))
    elif named is not None:
        raise InvalidModel(f"unknown named model {named!r}")
    else:
        try:
            sc = Scenario.from_dict(d["scenario"])
            dims = tuple(int(x) for x in d["party_dims"])
            state = _complex_from_json(d["state"]).reshape(-1)
            meas = tuple(tuple(ProjectorFamily(tuple(_complex_from_json(p) for p in fam)) for fam in row)
                         for row in d["measurements"])
        except KeyError as exc:
            raise InvalidModel(f"model JSON is missing {exc}") from exc
        m = QuantumModel(sc, dims, state, meas)
    if "pi" in d:
        pi = SettingDistribution(m.scenario, np.asarray(d["pi"], dtype=float))
    return m, pi
