"""Agent/command automata over density operators: systems, runs, purging, policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, ModelError
from .linalg import (
    DIM_CAP,
    DensityOperator,
    KrausChannel,
    POVM,
    require_valid,
    trace_distance_matrix,
)

# Trace-distance threshold under which two enumerated states are merged.
DEDUP_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Action:
    agent: str
    command: str


def seq(*pairs) -> tuple:
    """Build an action sequence from (agent, command) pairs."""
    return tuple(Action(a, c) for a, c in pairs)


@dataclass(frozen=True)
class Policy:
    """Reflexive may-flow relation between agents."""

    agents: frozenset
    edges: frozenset

    def __post_init__(self):
        agents = frozenset(self.agents)
        edges = frozenset((str(a), str(b)) for a, b in self.edges)
        for a, b in edges:
            if a not in agents or b not in agents:
                raise ModelError(f"policy edge ({a}, {b}) mentions an unknown agent")
        missing = [a for a in agents if (a, a) not in edges]
        if missing:
            raise ModelError(f"policy is not reflexive: missing self-edges for {sorted(missing)}")
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "edges", edges)

    @classmethod
    def closure(cls, agents, edges=()) -> "Policy":
        """Build a policy, adding any missing reflexive edges."""
        agents = frozenset(str(a) for a in agents)
        all_edges = frozenset((str(a), str(b)) for a, b in edges) | {(a, a) for a in agents}
        return cls(agents, all_edges)

    @classmethod
    def complete(cls, agents) -> "Policy":
        agents = frozenset(str(a) for a in agents)
        return cls(agents, frozenset((a, b) for a in agents for b in agents))

    def allows(self, src: str, dst: str) -> bool:
        return (src, dst) in self.edges


def nabla(p: Policy, a: str) -> frozenset:
    """Agents forbidden from influencing ``a``: every b with no b->a edge."""
    if a not in p.agents:
        raise ModelError(f"unknown agent {a!r}")
    return frozenset(b for b in p.agents if (b, a) not in p.edges)


@dataclass(frozen=True, eq=False)
class QuantumSystem:
    """A finite quantum automaton: state space, initial state, agents, commands,
    a total command-semantics map and per-agent measurement capabilities.

    ``do`` entries omitted at construction default to the identity channel so
    the map is total.  Agents listed in ``unrestricted`` are treated as able
    to perform any POVM, which collapses their observation distance to the
    trace distance.
    """

    dims: tuple
    initial: DensityOperator
    agents: tuple
    commands: tuple
    do: dict
    measure: dict
    unrestricted: frozenset = frozenset()

    def __post_init__(self):
        dims = tuple(int(d) for d in (self.dims if hasattr(self.dims, "__iter__") else (self.dims,)))
        dim = math.prod(dims)
        if dim > DIM_CAP:
            raise ModelError(f"system dimension {dim} exceeds the cap {DIM_CAP}")
        if self.initial.dim != dim:
            raise DimensionError(f"initial state has dim {self.initial.dim}, system factors give {dim}")
        agents = tuple(sorted(str(a) for a in self.agents))
        commands = tuple(sorted(str(c) for c in self.commands))
        if len(set(agents)) != len(agents):
            raise ModelError("duplicate agent names")
        if len(set(commands)) != len(commands):
            raise ModelError("duplicate command names")
        do = {}
        for (a, c), ch in self.do.items():
            if a not in agents or c not in commands:
                raise ModelError(f"do entry ({a}, {c}) mentions an unknown agent or command")
            if ch.dim_in != dim or ch.dim_out != dim:
                raise DimensionError(f"channel for ({a}, {c}) acts on dim {ch.dim_in}, system has dim {dim}")
            do[(a, c)] = ch
        identity = KrausChannel.identity(dim)
        for a in agents:
            for c in commands:
                do.setdefault((a, c), identity)
        measure = {}
        for a, povms in self.measure.items():
            if a not in agents:
                raise ModelError(f"measure entry for unknown agent {a!r}")
            povms = tuple(povms)
            for m in povms:
                if m.dim != dim:
                    raise DimensionError(f"POVM {m.name} of agent {a} acts on dim {m.dim}, system has dim {dim}")
            measure[a] = povms
        for a in agents:
            measure.setdefault(a, ())
        unrestricted = frozenset(str(a) for a in self.unrestricted)
        for a in unrestricted:
            if a not in agents:
                raise ModelError(f"unrestricted flag for unknown agent {a!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "commands", commands)
        object.__setattr__(self, "do", do)
        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "unrestricted", unrestricted)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def channel(self, action: Action) -> KrausChannel:
        try:
            return self.do[(action.agent, action.command)]
        except KeyError:
            raise ModelError(f"unknown agent or command in action ({action.agent}, {action.command})") from None

    def actions(self) -> tuple:
        """All actions in deterministic (agent, command) lexicographic order."""
        return tuple(Action(a, c) for a in self.agents for c in self.commands)

    def validate_initial(self):
        require_valid(self.initial, "initial state")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuantumSystem)
            and self.dims == other.dims
            and self.initial == other.initial
            and self.agents == other.agents
            and self.commands == other.commands
            and self.do == other.do
            and self.measure == other.measure
            and self.unrestricted == other.unrestricted
        )


def purge(alpha, agents, commands) -> tuple:
    """Delete every action whose agent is in ``agents`` and command in ``commands``."""
    agents = frozenset(agents)
    commands = frozenset(commands)
    return tuple(x for x in alpha if not (x.agent in agents and x.command in commands))


def purge_group(alpha, agents, system: QuantumSystem) -> tuple:
    """Purge a group with every command of the system (the plain group purge)."""
    return purge(alpha, agents, system.commands)


def run(s: QuantumSystem, alpha) -> DensityOperator:
    """Apply the channels of ``alpha`` in order to the initial state."""
    rho = s.initial.matrix
    for action in alpha:
        rho = s.channel(action).apply_matrix(rho)
    return DensityOperator(rho)


def with_initial(s: QuantumSystem, rho: DensityOperator) -> QuantumSystem:
    if rho.dim != s.dim:
        raise DimensionError(f"replacement state has dim {rho.dim}, system has dim {s.dim}")
    return replace(s, initial=rho)


def match_state(mat: np.ndarray, stack: np.ndarray, tol: float = DEDUP_TOL) -> int | None:
    """Index of the first state in ``stack`` within ``tol`` trace distance, if any."""
    if len(stack) == 0:
        return None
    diffs = stack - mat[None, :, :]
    dists = 0.5 * np.abs(np.linalg.eigvalsh(0.5 * (diffs + diffs.conj().transpose(0, 2, 1)))).sum(axis=1)
    hits = np.nonzero(dists <= tol)[0]
    return int(hits[0]) if hits.size else None


def reachable(s: QuantumSystem, depth: int, dedup_tol: float = DEDUP_TOL) -> list:
    """All states E_alpha(rho0) for |alpha| <= depth, merged within ``dedup_tol``.

    Returns (witness sequence, state) pairs; the witness is the first sequence
    reaching the state in breadth-first (shortest-then-lexicographic) order.
    Only newly seen states are expanded: channels are trace-distance
    contractive, so successors of a merged-away duplicate stay within the
    tolerance of the kept branch's successors.
    """
    acts = s.actions()
    kept: list = [((), s.initial)]
    stack = s.initial.matrix[None, :, :]
    frontier = [((), s.initial.matrix)]
    for _ in range(depth):
        nxt = []
        for alpha, mat in frontier:
            for act in acts:
                new_mat = s.channel(act).apply_matrix(mat)
                if match_state(new_mat, stack, dedup_tol) is None:
                    new_alpha = alpha + (act,)
                    kept.append((new_alpha, DensityOperator(new_mat)))
                    stack = np.concatenate([stack, new_mat[None, :, :]])
                    nxt.append((new_alpha, new_mat))
        frontier = nxt
    return kept
