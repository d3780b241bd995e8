"""Finite-dimensional complex linear algebra: states, channels, measurements, distances.

All values are immutable after construction and every operation is a pure
function, so everything here is safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EnsembleError

# Invariant checks (hermiticity, positivity, trace, completeness).
VALIDATION_TOL = 1e-9
# Entrywise arithmetic comparisons.
COMPARE_TOL = 1e-12
# Default Hilbert-space dimension cap (6 qubits); enumeration cost, not
# linear algebra, is what blows up first, but the cap keeps mistakes loud.
DIM_CAP = 64


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex ndarray without copying when possible."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of rank {a.ndim}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Positive unit-trace operator describing a possibly mixed state.

    Construction does not enforce the invariants; ``validate`` reports them
    and analysis entry points treat failures as fatal.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density operator must be square, got {m.shape}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, DensityOperator) and np.array_equal(self.matrix, other.matrix)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


def pure_state(vector) -> DensityOperator:
    """Projector |v><v| onto a (normalised) state vector."""
    v = np.asarray(vector, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n < COMPARE_TOL:
        raise DimensionError("cannot normalise the zero vector")
    v = v / n
    return DensityOperator(np.outer(v, v.conj()))


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving super-operator in Kraus form: rho -> sum_i K_i rho K_i^dag."""

    kraus: tuple

    def __post_init__(self):
        ops = tuple(_frozen(as_complex_matrix(k)) for k in self.kraus)
        if not ops:
            raise DimensionError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        for k in ops:
            if k.shape != shape:
                raise DimensionError("all Kraus operators must share one shape")
        object.__setattr__(self, "kraus", ops)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls((np.eye(dim),))

    @classmethod
    def from_unitary(cls, u) -> "KrausChannel":
        return cls((as_complex_matrix(u),))

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        """Raw-ndarray fast path used by the enumeration engines."""
        out = np.zeros((self.dim_out, self.dim_out), dtype=complex)
        for k in self.kraus:
            out += k @ rho @ k.conj().T
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, KrausChannel)
            and len(self.kraus) == len(other.kraus)
            and all(np.array_equal(a, b) for a, b in zip(self.kraus, other.kraus))
        )


@dataclass(frozen=True, eq=False)
class POVM:
    """Positive-operator valued measure: labelled effects summing to identity."""

    outcomes: tuple
    name: str = "povm"

    def __post_init__(self):
        outs = tuple((str(label), _frozen(as_complex_matrix(e))) for label, e in self.outcomes)
        if not outs:
            raise DimensionError("a POVM needs at least one outcome")
        d = outs[0][1].shape[0]
        for _, e in outs:
            if e.shape != (d, d):
                raise DimensionError("all effects must be square of one dimension")
        object.__setattr__(self, "outcomes", outs)

    @property
    def dim(self) -> int:
        return self.outcomes[0][1].shape[0]

    @property
    def labels(self) -> tuple:
        return tuple(label for label, _ in self.outcomes)

    def effect_stack(self) -> np.ndarray:
        """Effects stacked as an (n_outcomes, dim, dim) array."""
        return np.stack([e for _, e in self.outcomes])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, POVM)
            and self.name == other.name
            and self.labels == other.labels
            and all(np.array_equal(a[1], b[1]) for a, b in zip(self.outcomes, other.outcomes))
        )


@dataclass(frozen=True)
class Ensemble:
    """Weighted mixture {(p_i, rho_i)} of density operators."""

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), rho) for w, rho in self.components)
        if not comps:
            raise EnsembleError("an ensemble needs at least one component")
        d = comps[0][1].dim
        for w, rho in comps:
            if rho.dim != d:
                raise DimensionError("all ensemble states must share one dimension")
            if w < -VALIDATION_TOL or w > 1 + VALIDATION_TOL:
                raise EnsembleError(f"weight {w} outside [0, 1]")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim


# ---------------------------------------------------------------------------
# operations


def tensor(a, b) -> np.ndarray:
    """Kronecker product; the left factor owns the slow (big-endian) index."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def tensor_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, as_complex_matrix(m))
    return out


def partial_trace_matrix(mat: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every factor not in ``keep``; kept factors keep their order."""
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    total = math.prod(dims)
    if mat.shape != (total, total):
        raise DimensionError(f"matrix of shape {mat.shape} does not factor as {dims}")
    keep = sorted(set(int(i) for i in keep))
    if not keep or any(i < 0 or i >= n for i in keep):
        raise DimensionError(f"keep={keep} is not a nonempty subset of factor indices 0..{n - 1}")
    t = mat.reshape(dims + dims)
    m = n
    for ax in sorted((i for i in range(n) if i not in keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + m)
        m -= 1
    kept = math.prod(dims[i] for i in keep)
    return t.reshape(kept, kept)


def partial_trace(rho: DensityOperator, dims, keep) -> DensityOperator:
    return DensityOperator(partial_trace_matrix(rho.matrix, dims, keep))


def apply_channel(e: KrausChannel, rho: DensityOperator) -> DensityOperator:
    if e.dim_in != rho.dim:
        raise DimensionError(f"channel acts on dim {e.dim_in}, state has dim {rho.dim}")
    return DensityOperator(e.apply_matrix(rho.matrix))


def measure_povm(m: POVM, rho: DensityOperator) -> dict:
    """Outcome distribution p(label) = tr(E_label rho), clamped to [0, 1]."""
    if m.dim != rho.dim:
        raise DimensionError(f"POVM acts on dim {m.dim}, state has dim {rho.dim}")
    probs = {}
    for label, effect in m.outcomes:
        p = float(np.trace(effect @ rho.matrix).real)
        probs[label] = min(max(p, 0.0), 1.0)
    return probs


def measure_and_collapse(measurement_ops, rho: DensityOperator):
    """Outcomes of an ordinary measurement {M_label} with post-measurement states.

    Convenience only: the noninterference analyses never consume the collapsed
    states because observation happens once, at the end of a run.
    """
    results = []
    for label, op in measurement_ops:
        op = as_complex_matrix(op)
        post = op @ rho.matrix @ op.conj().T
        p = float(np.trace(post).real)
        state = DensityOperator(post / p) if p > VALIDATION_TOL else None
        results.append((label, max(p, 0.0), state))
    return results


def distribution_distance(p: dict, q: dict) -> float:
    """Total-variation distance (1/2) sum |p(x) - q(x)| over merged labels."""
    labels = set(p) | set(q)
    return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in labels)


def trace_distance_matrix(a: np.ndarray, b: np.ndarray) -> float:
    diff = a - b
    # rho - sigma is Hermitian, so |.| reduces to absolute eigenvalues
    eigs = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.sum(np.abs(eigs)))


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """(1/2) tr |rho - sigma| via Hermitian eigendecomposition of the difference."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"states have different dims {rho.dim} != {sigma.dim}")
    return trace_distance_matrix(rho.matrix, sigma.matrix)


def measurement_distance(ms, rho: DensityOperator, sigma: DensityOperator) -> float:
    """Largest outcome-distribution gap detectable with the POVM family ``ms``.

    An empty family yields 0: the pseudo-distance degenerates when nothing
    can be measured.  Never exceeds the trace distance.
    """
    value, _ = measurement_distance_witnessed(ms, rho, sigma)
    return value


def measurement_distance_witnessed(ms, rho: DensityOperator, sigma: DensityOperator):
    """Measurement distance together with the name of a maximising POVM."""
    if rho.dim != sigma.dim:
        raise DimensionError(f"states have different dims {rho.dim} != {sigma.dim}")
    best = 0.0
    best_name = ""
    for povm in ms:
        if povm.dim != rho.dim:
            raise DimensionError(f"POVM {povm.name} acts on dim {povm.dim}, states have dim {rho.dim}")
        d = distribution_distance(measure_povm(povm, rho), measure_povm(povm, sigma))
        if d > best:
            best = d
            best_name = povm.name
        elif not best_name:
            best_name = povm.name
    return best, best_name


def mix(e: Ensemble) -> DensityOperator:
    """Mixture sum_i p_i rho_i of an ensemble."""
    total = sum(w for w, _ in e.components)
    if abs(total - 1.0) > VALIDATION_TOL:
        raise EnsembleError(f"ensemble weights sum to {total}, expected 1")
    out = np.zeros((e.dim, e.dim), dtype=complex)
    for w, rho in e.components:
        out += w * rho.matrix
    return DensityOperator(out)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    subject: str
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def worst(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual} for c in self.checks
            ],
        }


def _check(name, residual, tol):
    r = float(residual)
    return CheckResult(name, r <= tol, r)


def validate(x, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Report each invariant of a state, channel or POVM with its residual.

    Failures are non-fatal here; analysis entry points raise on a bad report.
    """
    if isinstance(x, DensityOperator):
        m = x.matrix
        herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        sym = 0.5 * (m + m.conj().T)
        min_eig = float(np.min(np.linalg.eigvalsh(sym)))
        checks = (
            _check("hermitian", herm, tol),
            _check("positive", max(0.0, -min_eig), tol),
            _check("unit_trace", abs(np.trace(m) - 1.0), tol),
        )
        return ValidationReport("density_operator", checks)
    if isinstance(x, KrausChannel):
        acc = np.zeros((x.dim_in, x.dim_in), dtype=complex)
        for k in x.kraus:
            acc += k.conj().T @ k
        resid = float(np.max(np.abs(acc - np.eye(x.dim_in))))
        return ValidationReport("kraus_channel", (_check("trace_preserving", resid, tol),))
    if isinstance(x, POVM):
        checks = []
        total = np.zeros((x.dim, x.dim), dtype=complex)
        for label, e in x.outcomes:
            herm = float(np.max(np.abs(e - e.conj().T)))
            min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (e + e.conj().T))))
            checks.append(_check(f"effect_{label}_hermitian", herm, tol))
            checks.append(_check(f"effect_{label}_positive", max(0.0, -min_eig), tol))
            total += e
        checks.append(_check("completeness", float(np.max(np.abs(total - np.eye(x.dim)))), tol))
        return ValidationReport(f"povm:{x.name}", tuple(checks))
    if isinstance(x, Ensemble):
        total = sum(w for w, _ in x.components)
        checks = [_check("weights_sum", abs(total - 1.0), tol)]
        for i, (w, rho) in enumerate(x.components):
            checks.append(_check(f"component_{i}_weight_range", max(0.0, -w, w - 1.0), tol))
        return ValidationReport("ensemble", tuple(checks))
    raise TypeError(f"cannot validate object of type {type(x).__name__}")


def require_valid(x, what: str = "", tol: float = VALIDATION_TOL):
    """Raise on a failed validation; used at analysis entry points."""
    from .errors import ModelError

    report = validate(x, tol=tol)
    if not report.ok:
        bad = ", ".join(f"{c.name} (residual {c.residual:.3e})" for c in report.checks if not c.passed)
        prefix = f"{what}: " if what else ""
        exc = EnsembleError if isinstance(x, Ensemble) else ModelError
        raise exc(f"{prefix}{report.subject} failed {bad}")
    return x
