"""Finite event spaces and dense tables over their joint states.

Joint states are indexed in mixed radix with the first descriptor most
significant, so ``(1, 0, 1)`` over three binary descriptors has index 5.
Every table in this module is immutable once built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import CapacityError, DomainError

DEFAULT_MAX_STATES = 2 ** 20
DEFAULT_TOL = 1e-9


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Descriptor:
    """A finite-valued variable with states ``0 .. arity - 1``."""

    name: str
    arity: int

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name or any(c.isspace() for c in self.name):
            raise DomainError(f"descriptor name must be a nonempty token, got {self.name!r}")
        if isinstance(self.arity, bool) or not isinstance(self.arity, (int, np.integer)):
            raise DomainError(f"arity of {self.name} must be an integer")
        if self.arity < 2:
            raise DomainError(f"arity of {self.name} must be at least 2, got {self.arity}")


class EventSpace:
    """Ordered sequence of descriptors defining the joint state lattice.

    Parameters
    ----------
    descriptors : iterable of Descriptor or (name, arity) pairs
    max_states : int
        Spaces with more joint states than this are rejected with
        :class:`CapacityError`, since every distribution is stored densely.
    """

    def __init__(self, descriptors: Iterable, max_states: int = DEFAULT_MAX_STATES):
        items = []
        for d in descriptors:
            items.append(d if isinstance(d, Descriptor) else Descriptor(*d))
        if not items:
            raise DomainError("an event space needs at least one descriptor")
        names = [d.name for d in items]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DomainError(f"duplicate descriptor names: {', '.join(dup)}")
        n_states = math.prod(d.arity for d in items)
        if n_states > max_states:
            raise CapacityError(
                f"event space has {n_states} joint states, above the cap of {max_states}")
        self.descriptors = tuple(items)
        self.max_states = max_states
        self._pos = {d.name: i for i, d in enumerate(items)}

    @property
    def names(self) -> tuple:
        return tuple(d.name for d in self.descriptors)

    @property
    def arities(self) -> tuple:
        return tuple(d.arity for d in self.descriptors)

    shape = arities

    @property
    def n_states(self) -> int:
        return math.prod(self.arities)

    def __len__(self):
        return len(self.descriptors)

    def __iter__(self):
        return iter(self.descriptors)

    def __contains__(self, name):
        return name in self._pos

    def __getitem__(self, name) -> Descriptor:
        return self.descriptors[self.position(name)]

    def __eq__(self, other):
        return isinstance(other, EventSpace) and self.descriptors == other.descriptors

    def __hash__(self):
        return hash(self.descriptors)

    def __repr__(self):
        inner = ", ".join(f"{d.name}:{d.arity}" for d in self.descriptors)
        return f"EventSpace({inner})"

    def position(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise DomainError(f"unknown descriptor {name!r}") from None

    def positions(self, names: Iterable[str]) -> tuple:
        names = tuple(names)
        if len(set(names)) != len(names):
            raise DomainError(f"repeated descriptor in {names}")
        return tuple(self.position(n) for n in names)

    def arities_of(self, names: Iterable[str]) -> tuple:
        return tuple(self[n].arity for n in names)

    def subspace(self, names: Iterable[str]) -> "EventSpace":
        return EventSpace([self[n] for n in names], max_states=self.max_states)

    def index_of(self, states: Sequence[int]) -> int:
        states = tuple(states)
        if len(states) != len(self):
            raise DomainError(f"expected {len(self)} states, got {len(states)}")
        index = 0
        for s, d in zip(states, self.descriptors):
            if not 0 <= s < d.arity:
                raise DomainError(f"state {s} out of range for {d.name} (arity {d.arity})")
            index = index * d.arity + int(s)
        return index

    def assignment_of(self, index: int) -> "JointAssignment":
        if not 0 <= index < self.n_states:
            raise DomainError(f"joint index {index} out of range [0, {self.n_states})")
        states = []
        for a in reversed(self.arities):
            index, s = divmod(index, a)
            states.append(s)
        return JointAssignment(self, tuple(reversed(states)))


@dataclass(frozen=True)
class JointAssignment:
    """One state per descriptor, in space order."""

    space: EventSpace
    states: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        # index_of does the range checks
        self.space.index_of(self.states)

    @property
    def index(self) -> int:
        return self.space.index_of(self.states)


def index_of(assignment: JointAssignment) -> int:
    return assignment.space.index_of(assignment.states)


def assignment_of(space: EventSpace, index: int) -> JointAssignment:
    return space.assignment_of(index)


def marginal_array(table: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Sum ``table`` down to ``axes`` and order the result by ``axes``."""
    axes = tuple(axes)
    drop = tuple(i for i in range(table.ndim) if i not in axes)
    summed = table.sum(axis=drop) if drop else table
    kept = sorted(axes)
    return np.transpose(summed, [kept.index(a) for a in axes])


def expand_to(arr: np.ndarray, axes: Sequence[int], ndim: int) -> np.ndarray:
    """Reshape an array over ``axes`` (in that order) so it broadcasts over ``ndim`` axes."""
    axes = tuple(axes)
    order = sorted(range(len(axes)), key=lambda k: axes[k])
    moved = np.transpose(arr, order)
    shape = [1] * ndim
    for k, a in enumerate(sorted(axes)):
        shape[a] = moved.shape[k]
    return moved.reshape(shape)


class JointDistribution:
    """Dense probability table over every joint state of a space.

    Raises
    ------
    DomainError
        If the table has the wrong length, a negative or non-finite entry,
        or does not sum to 1 within ``tol``.
    """

    def __init__(self, space: EventSpace, probabilities, tol: float = DEFAULT_TOL):
        p = np.asarray(probabilities, dtype=float).reshape(-1)
        if p.size != space.n_states:
            raise DomainError(f"expected {space.n_states} probabilities, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise DomainError("probabilities must be finite")
        if np.any(p < 0):
            raise DomainError(f"negative probability {p.min()!r}")
        total = p.sum()
        if abs(total - 1.0) > tol:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        self.space = space
        self.tol = tol
        self.probabilities = _frozen(p)

    @classmethod
    def uniform(cls, space: EventSpace) -> "JointDistribution":
        return cls(space, np.full(space.n_states, 1.0 / space.n_states))

    @property
    def table(self) -> np.ndarray:
        """Probabilities reshaped to one axis per descriptor."""
        return self.probabilities.reshape(self.space.shape)

    def prob(self, states: Sequence[int]) -> float:
        return float(self.probabilities[self.space.index_of(states)])

    def __repr__(self):
        return f"JointDistribution({self.space!r}, {self.probabilities.tolist()})"


class MarginalTable:
    """Distribution over the joint states of an ordered descriptor subset.

    Normalization is not enforced here; call :meth:`violations`.
    """

    def __init__(self, descriptors: Sequence[str], arities: Sequence[int], probabilities):
        self.descriptors = tuple(descriptors)
        self.arities = tuple(int(a) for a in arities)
        if len(self.descriptors) != len(self.arities) or not self.descriptors:
            raise DomainError("marginal table needs one arity per descriptor")
        p = np.asarray(probabilities, dtype=float).reshape(-1)
        if p.size != math.prod(self.arities):
            raise DomainError(
                f"table over {' '.join(self.descriptors)} needs {math.prod(self.arities)} "
                f"entries, got {p.size}")
        self.probabilities = _frozen(p)

    @property
    def array(self) -> np.ndarray:
        return self.probabilities.reshape(self.arities)

    def violations(self, tol: float = DEFAULT_TOL) -> list:
        return _row_violations(self.probabilities[None, :], tol, "")

    def __eq__(self, other):
        return (isinstance(other, MarginalTable) and self.descriptors == other.descriptors
                and self.arities == other.arities
                and np.array_equal(self.probabilities, other.probabilities))

    def __repr__(self):
        return f"MarginalTable({self.descriptors}, {self.probabilities.tolist()})"


class ConditionalTable:
    """Rows ``P(targets | givens = w)``, one per joint state ``w`` of the givens.

    ``rows`` has shape ``(n_given_states, n_target_states)``.  Rows whose
    conditioning event had zero probability are undefined; pass them as
    ``None`` (or mark them in ``defined``).  Undefined rows hold no numbers
    and :meth:`row` returns ``None`` for them.
    """

    def __init__(self, targets: Sequence[str], givens: Sequence[str],
                 target_arities: Sequence[int], given_arities: Sequence[int],
                 rows, defined=None):
        self.targets = tuple(targets)
        self.givens = tuple(givens)
        self.target_arities = tuple(int(a) for a in target_arities)
        self.given_arities = tuple(int(a) for a in given_arities)
        if not self.targets or not self.givens:
            raise DomainError("conditional table needs nonempty targets and givens")
        if set(self.targets) & set(self.givens):
            raise DomainError("targets and givens of a conditional table must be disjoint")
        n_w = math.prod(self.given_arities)
        n_z = math.prod(self.target_arities)
        if isinstance(rows, np.ndarray):
            rows = list(rows.reshape(n_w, -1)) if rows.size == n_w * n_z else list(rows)
        rows = list(rows)
        if len(rows) != n_w:
            raise DomainError(f"conditional table needs {n_w} rows, got {len(rows)}")
        mask = np.array([r is not None for r in rows], dtype=bool)
        if defined is not None:
            mask &= np.asarray(defined, dtype=bool)
        data = np.zeros((n_w, n_z))
        for k, r in enumerate(rows):
            if r is None or not mask[k]:
                continue
            r = np.asarray(r, dtype=float).reshape(-1)
            if r.size != n_z:
                raise DomainError(f"row {k} needs {n_z} entries, got {r.size}")
            data[k] = r
        self.rows = _frozen(data)
        self.defined = _frozen(mask, dtype=bool)

    def row(self, w_index: int):
        return self.rows[w_index] if self.defined[w_index] else None

    def violations(self, tol: float = DEFAULT_TOL) -> list:
        out = []
        for k in np.flatnonzero(self.defined):
            out += _row_violations(self.rows[k:k + 1], tol, f"row {k}: ")
        return out

    def __eq__(self, other):
        return (isinstance(other, ConditionalTable) and self.targets == other.targets
                and self.givens == other.givens
                and self.target_arities == other.target_arities
                and self.given_arities == other.given_arities
                and np.array_equal(self.defined, other.defined)
                and np.array_equal(self.rows, other.rows))

    def __repr__(self):
        rows = [r.tolist() if d else None for r, d in zip(self.rows, self.defined)]
        return f"ConditionalTable({self.targets} | {self.givens}, {rows})"


def _row_violations(rows: np.ndarray, tol: float, prefix: str) -> list:
    out = []
    for r in rows:
        if not np.all(np.isfinite(r)):
            out.append(f"{prefix}non-finite entry")
            continue
        if np.any(r < 0):
            out.append(f"{prefix}negative entry {r.min()!r}")
        s = r.sum()
        if abs(s - 1.0) > tol:
            out.append(f"{prefix}row sums to {s:.12g}, not 1")
    return out


def _as_table(p) -> np.ndarray:
    if isinstance(p, JointDistribution):
        return p.table
    return np.asarray(p, dtype=float)


def marginalize(p: JointDistribution, y: Sequence[str]) -> MarginalTable:
    """Marginal of ``p`` on the descriptors ``y``, in the order given."""
    y = tuple(y)
    if not y:
        raise DomainError("cannot marginalize onto an empty descriptor set")
    axes = p.space.positions(y)
    arr = marginal_array(p.table, axes)
    return MarginalTable(y, p.space.arities_of(y), arr)


def conditionalize(p: JointDistribution, z: Sequence[str], w: Sequence[str]) -> ConditionalTable:
    """Conditional table ``P(z | w)``; rows with ``P(w) = 0`` are undefined."""
    z, w = tuple(z), tuple(w)
    if not z or not w:
        raise DomainError("conditionalize needs nonempty target and given sets")
    if set(z) & set(w):
        raise DomainError(f"target and given sets overlap: {sorted(set(z) & set(w))}")
    space = p.space
    za, wa = space.arities_of(z), space.arities_of(w)
    joint = marginal_array(p.table, space.positions(z + w))
    joint = joint.reshape(math.prod(za), math.prod(wa)).T
    denom = joint.sum(axis=1)
    rows = [joint[k] / denom[k] if denom[k] > 0 else None for k in range(len(denom))]
    return ConditionalTable(z, w, za, wa, rows)


def entropy(p) -> float:
    """Shannon entropy in nats, with ``0 ln 0 = 0``."""
    arr = _as_table(p).reshape(-1)
    pos = arr[arr > 0]
    return float(-np.sum(pos * np.log(pos)))


def conditionally_independent(p: JointDistribution, i: str, j: str, tol: float = 1e-9) -> bool:
    """Test ``P(xi, xj | r) = P(xi | r) P(xj | r)`` for every remaining-state ``r``.

    ``r`` ranges over joint states of all descriptors other than ``i`` and
    ``j``; zero-probability states of ``r`` are skipped.
    """
    if i == j:
        raise DomainError("conditional independence needs two distinct descriptors")
    pi, pj = p.space.position(i), p.space.position(j)
    t = np.moveaxis(p.table, [pi, pj], [0, 1])
    t = t.reshape(t.shape[0], t.shape[1], -1)
    pr = t.sum(axis=(0, 1))
    keep = pr > 0
    cond = t[:, :, keep] / pr[keep]
    diff = cond - cond.sum(axis=1)[:, None, :] * cond.sum(axis=0)[None, :, :]
    return bool(np.all(np.abs(diff) <= tol))
