"""Interference and insecurity degrees with witness extraction.

The unbounded supremum over all action sequences is never computed; every
analysis enumerates sequences up to a depth bound and reports either the
exact bounded degree or an explicitly labelled lower bound.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .automaton import Policy, QuantumSystem, nabla, with_initial
from .errors import EnsembleError, ModelError
from .linalg import Ensemble, VALIDATION_TOL, mix, trace_distance_matrix

STALL_TOL = 1e-9


@dataclass(frozen=True)
class EnumerationLimits:
    """Hard caps on the (|A| * |C|)^t enumeration cost."""

    max_depth: int = 8
    max_actions: int = 12


DEFAULT_LIMITS = EnumerationLimits()


@dataclass(frozen=True)
class InterferenceQuery:
    """Which commands of which group are tested for influence on which observers."""

    g1: frozenset
    d: frozenset
    g2: frozenset
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "g1", frozenset(str(a) for a in self.g1))
        object.__setattr__(self, "d", frozenset(str(c) for c in self.d))
        object.__setattr__(self, "g2", frozenset(str(a) for a in self.g2))
        if not self.g1 or not self.g2:
            raise ModelError("both agent groups of an interference query must be nonempty")
        if self.depth < 0:
            raise ModelError("depth must be nonnegative")


@dataclass(frozen=True)
class Witness:
    agent: str
    alpha: tuple
    povm: str  # POVM name, or "trace-distance" for unrestricted observers


@dataclass(frozen=True)
class SecurityReport:
    value: float
    witness: Witness
    depth: int
    per_depth: tuple
    kind: str = "bounded-exact"
    stalled: bool | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "depth": self.depth,
            "per_depth": list(self.per_depth),
            "kind": self.kind,
            "stalled": self.stalled,
            "witness": {
                "agent": self.witness.agent,
                "alpha": [[a.agent, a.command] for a in self.witness.alpha],
                "povm": self.witness.povm,
            },
        }


class _Observer:
    """Per-agent observation machinery: POVM effect stacks or trace distance."""

    def __init__(self, system: QuantumSystem, agent: str):
        self.agent = agent
        self.unrestricted = agent in system.unrestricted
        self.povms = []
        for povm in system.measure.get(agent, ()):
            self.povms.append((povm.name, povm.effect_stack()))

    def default_label(self) -> str:
        if self.unrestricted:
            return "trace-distance"
        return self.povms[0][0] if self.povms else "none"

    def probs(self, mat: np.ndarray) -> list:
        return [np.einsum("kij,ji->k", stack, mat).real for _, stack in self.povms]

    def distance(self, mat_a, probs_a, mat_b, probs_b):
        """Observable gap between two states, with the maximising POVM's name."""
        if self.unrestricted:
            return trace_distance_matrix(mat_a, mat_b), "trace-distance"
        best, label = 0.0, self.default_label()
        for (name, _), pa, pb in zip(self.povms, probs_a, probs_b):
            d = 0.5 * float(np.abs(pa - pb).sum())
            if d > best:
                best, label = d, name
        return best, label


def _check_limits(system: QuantumSystem, depth: int, limits: EnumerationLimits):
    n_actions = len(system.agents) * len(system.commands)
    if depth > limits.max_depth:
        raise ModelError(f"depth {depth} exceeds the enumeration cap {limits.max_depth}")
    if n_actions > limits.max_actions:
        raise ModelError(
            f"{n_actions} actions exceed the enumeration cap {limits.max_actions}"
        )


def _bounded_sup(
    system: QuantumSystem,
    observers,
    deletes,
    depth: int,
    jobs: int = 1,
    stall_window: int | None = None,
    limits: EnumerationLimits = DEFAULT_LIMITS,
):
    """Max over |alpha| <= depth and observers of d_a(run(alpha), run(deleted alpha)).

    ``deletes`` maps each observer name to a predicate selecting the actions to
    purge for that observer.  Enumeration is breadth-first with actions in
    (agent, command) order; ties in the maximum keep the first witness found.
    Returns (value, witness, per_depth, stalled).
    """
    _check_limits(system, depth, limits)
    obs = [_Observer(system, a) for a in sorted(observers)]
    acts = system.actions()
    rho0 = system.initial.matrix

    purged_states = {(): rho0}
    purged_probs = {}  # (obs index, purged tuple) -> per-povm probs

    def probs_for(i, tup):
        key = (i, tup)
        if key not in purged_probs:
            purged_probs[key] = obs[i].probs(purged_states[tup])
        return purged_probs[key]

    best = 0.0
    witness = Witness(obs[0].agent if obs else "", (), obs[0].default_label() if obs else "none")
    per_depth = []
    stalled = False

    # frontier entries: (alpha, state, per-observer purged alpha)
    frontier = [((), rho0, tuple(() for _ in obs))]
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for level in range(1, depth + 1):
            tasks = [
                (alpha + (act,), mat, act, purged)
                for alpha, mat, purged in frontier
                for act in acts
            ]
            if pool is not None:
                new_states = list(
                    pool.map(lambda t: system.channel(t[2]).apply_matrix(t[1]), tasks)
                )
            else:
                new_states = [system.channel(act).apply_matrix(mat) for _, mat, act, _ in tasks]

            nxt = []
            for (alpha, _, act, purged), state in zip(tasks, new_states):
                new_purged = []
                for i, ob in enumerate(obs):
                    if deletes[ob.agent](act):
                        new_purged.append(purged[i])
                    else:
                        tup = purged[i] + (act,)
                        if tup not in purged_states:
                            purged_states[tup] = system.channel(act).apply_matrix(
                                purged_states[purged[i]]
                            )
                        new_purged.append(tup)
                new_purged = tuple(new_purged)
                nxt.append((alpha, state, new_purged))

                state_probs = {}
                for i, ob in enumerate(obs):
                    if new_purged[i] == alpha:
                        continue  # nothing purged, the gap is exactly zero
                    if ob.unrestricted:
                        d, label = ob.distance(state, None, purged_states[new_purged[i]], None)
                    else:
                        if i not in state_probs:
                            state_probs[i] = ob.probs(state)
                        d, label = ob.distance(
                            state, state_probs[i], purged_states[new_purged[i]], probs_for(i, new_purged[i])
                        )
                    if d > best:
                        best = d
                        witness = Witness(ob.agent, alpha, label)
            frontier = nxt
            per_depth.append(best)
            if (
                stall_window is not None
                and level > stall_window
                and per_depth[-1] - per_depth[-1 - stall_window] <= STALL_TOL
            ):
                stalled = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return best, witness, tuple(per_depth), stalled


def interference_degree(
    s: QuantumSystem,
    q: InterferenceQuery,
    jobs: int = 1,
    limits: EnumerationLimits = DEFAULT_LIMITS,
) -> SecurityReport:
    """Exact bounded interference of agents ``g1`` using commands ``d`` on ``g2``."""
    for a in q.g1 | q.g2:
        if a not in s.agents:
            raise ModelError(f"unknown agent {a!r}")
    for c in q.d:
        if c not in s.commands:
            raise ModelError(f"unknown command {c!r}")
    deletes = {a: (lambda act: act.agent in q.g1 and act.command in q.d) for a in q.g2}
    value, witness, per_depth, _ = _bounded_sup(s, q.g2, deletes, q.depth, jobs=jobs, limits=limits)
    return SecurityReport(value, witness, q.depth, per_depth)


def insecurity_bounded(
    s: QuantumSystem,
    p: Policy,
    depth: int,
    jobs: int = 1,
    limits: EnumerationLimits = DEFAULT_LIMITS,
) -> SecurityReport:
    """Bounded insecurity degree: worst observable purge gap over all agents."""
    if p.agents != frozenset(s.agents):
        raise ModelError("policy agents do not match the system's agents")
    forbidden = {a: nabla(p, a) for a in s.agents}
    deletes = {a: (lambda act, f=forbidden[a]: act.agent in f) for a in s.agents}
    value, witness, per_depth, _ = _bounded_sup(s, s.agents, deletes, depth, jobs=jobs, limits=limits)
    return SecurityReport(value, witness, depth, per_depth)


def insecurity_estimate(
    s: QuantumSystem,
    p: Policy,
    max_depth: int,
    stall_window: int = 2,
    jobs: int = 1,
    limits: EnumerationLimits = DEFAULT_LIMITS,
) -> SecurityReport:
    """Monotone lower bound for the unbounded insecurity degree.

    Deepens until ``max_depth`` or until the value has not moved for
    ``stall_window`` consecutive depths.  The result is only ever a
    certified lower bound; no upper-bound claim is made.
    """
    if max_depth < 1:
        raise ModelError("max_depth must be at least 1")
    if p.agents != frozenset(s.agents):
        raise ModelError("policy agents do not match the system's agents")
    forbidden = {a: nabla(p, a) for a in s.agents}
    deletes = {a: (lambda act, f=forbidden[a]: act.agent in f) for a in s.agents}
    value, witness, per_depth, stalled = _bounded_sup(
        s, s.agents, deletes, max_depth, jobs=jobs, stall_window=stall_window, limits=limits
    )
    return SecurityReport(
        value, witness, len(per_depth), per_depth, kind="lower-bound", stalled=stalled
    )


def strong_insecurity_bounded(
    s: QuantumSystem,
    p: Policy,
    decompositions,
    depth: int,
    jobs: int = 1,
    limits: EnumerationLimits = DEFAULT_LIMITS,
) -> float:
    """Best ensemble-weighted bounded insecurity over the declared decompositions.

    The trivial decomposition {(1, rho0)} is always included, so the result
    dominates the plain bounded insecurity.  Because only declared ensembles
    are searched, this is a lower bound on the strong degree.
    """
    ensembles = [Ensemble(((1.0, s.initial),))]
    for e in decompositions:
        mixed = mix(e)
        gap = float(np.max(np.abs(mixed.matrix - s.initial.matrix)))
        if gap > VALIDATION_TOL:
            raise EnsembleError(
                f"declared ensemble mixes to a state {gap:.3e} away from the initial state"
            )
        ensembles.append(e)
    best = 0.0
    for e in ensembles:
        total = 0.0
        for w, rho in e.components:
            if w == 0.0:
                continue
            total += w * insecurity_bounded(with_initial(s, rho), p, depth, jobs=jobs, limits=limits).value
        best = max(best, total)
    return best
