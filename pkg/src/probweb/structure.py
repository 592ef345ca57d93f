"""Components, structures and their classification by peeling.

A structure is peeled by repeatedly removing a *terminal* component: one
whose fresh part ``Z`` is covered by no other remaining component and whose
connecting part ``W`` is covered by the rest.  A structure is a web when it
peels down to a single absolute component.  Forests and conditional webs
are webs admitting a peel in which every step passes an extra test.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .event_space import EventSpace
from .exceptions import CapacityError, DomainError

MAX_FOREST_COMPONENTS = 20

WEB = "web"
FOREST = "forest"
CONDITIONAL = "conditional"


@dataclass(frozen=True, eq=False)
class Component:
    """Absolute component ``(Y)`` or conditional component ``(Z|W)``.

    ``givens`` is empty exactly for absolute components.  Descriptor order is
    kept because it fixes the layout of the attached table; equality and
    hashing only look at the two descriptor sets.
    """

    targets: tuple
    givens: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "givens", tuple(self.givens))
        if not self.targets:
            raise DomainError("a component needs at least one target descriptor")
        if len(set(self.targets)) != len(self.targets) or len(set(self.givens)) != len(self.givens):
            raise DomainError(f"repeated descriptor in component {self}")
        if set(self.targets) & set(self.givens):
            raise DomainError(f"targets and givens overlap in component {self}")

    @classmethod
    def absolute(cls, *names: str) -> "Component":
        return cls(tuple(names))

    @classmethod
    def conditional(cls, targets: Sequence[str], givens: Sequence[str]) -> "Component":
        if not givens:
            raise DomainError("a conditional component needs a nonempty given set")
        return cls(tuple(targets), tuple(givens))

    @property
    def is_conditional(self) -> bool:
        return bool(self.givens)

    @property
    def kind(self) -> str:
        return "conditional" if self.givens else "absolute"

    @property
    def descriptors(self) -> frozenset:
        return frozenset(self.targets) | frozenset(self.givens)

    def _key(self):
        return frozenset(self.targets), frozenset(self.givens)

    def __eq__(self, other):
        return isinstance(other, Component) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __str__(self):
        if self.givens:
            return f"({','.join(self.targets)}|{','.join(self.givens)})"
        return f"({','.join(self.targets)})"


class Structure:
    """Ordered collection of distinct components over an event space."""

    def __init__(self, space: EventSpace, components: Iterable[Component]):
        comps = tuple(components)
        for c in comps:
            for name in c.targets + c.givens:
                if name not in space:
                    raise DomainError(f"component {c} mentions unknown descriptor {name!r}")
        if len(set(comps)) != len(comps):
            raise DomainError("structure contains duplicate components")
        self.space = space
        self.components = comps

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.space == other.space
                and self.components == other.components)

    def __repr__(self):
        return "Structure(" + ", ".join(map(str, self.components)) + ")"

    def index(self, component: Component) -> int:
        try:
            return self.components.index(component)
        except ValueError:
            raise DomainError(f"component {component} is not in the structure") from None

    def without(self, component: Component) -> "Structure":
        k = self.index(component)
        return Structure(self.space, self.components[:k] + self.components[k + 1:])

    def subset(self, mask: int) -> "Structure":
        return Structure(self.space, [c for k, c in enumerate(self.components) if mask >> k & 1])


@dataclass(frozen=True)
class TerminalSplit:
    """Fresh part ``z`` and connecting part ``w`` of a terminal component."""

    component: Component
    z: frozenset
    w: frozenset


@dataclass(frozen=True)
class Classification:
    is_web: bool
    is_forest: bool
    is_conditional_web: bool
    is_bayes_net_shape: bool
    unpack_order: Optional[tuple] = None
    absolutes_disjoint: bool = False
    peel: Optional[tuple] = field(default=None, repr=False)

    def summary(self) -> str:
        yn = {True: "yes", False: "no"}
        return (f"web: {yn[self.is_web]}, forest: {yn[self.is_forest]}, "
                f"conditional-web: {yn[self.is_conditional_web]}, "
                f"bayes-net: {yn[self.is_bayes_net_shape]}")


def covered(c) -> frozenset:
    """Every descriptor mentioned by some component of ``c``."""
    out = frozenset()
    for comp in c:
        out |= comp.descriptors
    return out


def _split_of(comp: Component, rest: frozenset) -> Optional[TerminalSplit]:
    if comp.is_conditional:
        z, w = frozenset(comp.targets), frozenset(comp.givens)
        if z & rest or not w <= rest:
            return None
        return TerminalSplit(comp, z, w)
    y = frozenset(comp.targets)
    z = y - rest
    if not z:
        return None
    return TerminalSplit(comp, z, y & rest)


def terminal_split(c: Structure, y: Component) -> Optional[TerminalSplit]:
    """Split of ``y`` into fresh and connecting parts, or ``None`` if not terminal."""
    rest = covered(c.without(y))
    return _split_of(y, rest)


class _Peeler:
    """Peel search over component bitmasks for one structure and one mode."""

    def __init__(self, components: Sequence[Component], mode: str):
        self.comps = tuple(components)
        self.mode = mode
        self.descs = [c.descriptors for c in self.comps]
        self._memo = {}

    def _members(self, mask):
        return [k for k in range(len(self.comps)) if mask >> k & 1]

    def candidates(self, mask):
        """Terminal peels allowed by the mode, as (index, split) in input order."""
        members = self._members(mask)
        out = []
        for k in members:
            others = [j for j in members if j != k]
            rest = frozenset().union(*(self.descs[j] for j in others))
            split = _split_of(self.comps[k], rest)
            if split is None:
                continue
            if self.mode == FOREST and split.w and not any(split.w <= self.descs[j] for j in others):
                continue
            if self.mode == CONDITIONAL and not self.comps[k].is_conditional and split.w:
                continue
            out.append((k, split))
        return out

    def _base(self, mask):
        members = self._members(mask)
        if len(members) == 1 and not self.comps[members[0]].is_conditional:
            comp = self.comps[members[0]]
            return ((members[0], TerminalSplit(comp, frozenset(comp.targets), frozenset())),)
        return None

    def search(self, mask=None):
        """Backtracking peel; returns a tuple of (index, split) or ``None``."""
        if mask is None:
            mask = (1 << len(self.comps)) - 1
        if mask in self._memo:
            return self._memo[mask]
        result = None
        if mask and (mask & (mask - 1)) == 0:
            result = self._base(mask)
        elif mask:
            # last-first, so the unpacked order follows input order where free
            for k, split in reversed(self.candidates(mask)):
                tail = self.search(mask & ~(1 << k))
                if tail is not None:
                    result = ((k, split),) + tail
                    break
        self._memo[mask] = result
        return result

    def greedy(self):
        """Always peel the first available terminal; no backtracking."""
        mask = (1 << len(self.comps)) - 1
        seq = []
        while mask and (mask & (mask - 1)):
            cands = self.candidates(mask)
            if not cands:
                return None
            k, split = cands[0]
            seq.append((k, split))
            mask &= ~(1 << k)
        base = self._base(mask) if mask else None
        return None if base is None else tuple(seq) + base


def _absolutes_disjoint(components) -> bool:
    seen = set()
    for comp in components:
        if comp.is_conditional:
            continue
        if seen & set(comp.targets):
            return False
        seen |= set(comp.targets)
    return True


def classify(c: Structure) -> Classification:
    """Decide web, forest, conditional-web and Bayesian-network shape.

    A conditional web here is a web with a peel in which every absolute
    component is unconnected (``W`` empty) when removed.  That implies the
    absolute components are pairwise disjoint, and it is what makes the plain
    product of the component tables a joint distribution extending them.
    """
    if not len(c):
        raise DomainError("cannot classify an empty structure")
    comps = c.components
    peel = _Peeler(comps, WEB).search()
    is_web = peel is not None
    is_forest = is_web and _Peeler(comps, FOREST).search() is not None
    is_cond = is_web and _Peeler(comps, CONDITIONAL).search() is not None
    is_bn = is_cond and all(len(comp.targets) == 1 for comp in comps if comp.is_conditional)
    order = tuple(comps[k] for k, _ in reversed(peel)) if is_web else None
    return Classification(is_web, is_forest, is_cond, is_bn, order,
                          _absolutes_disjoint(comps),
                          tuple(split for _, split in peel) if is_web else None)


def greedy_classify(c: Structure) -> tuple:
    """``(is_web, is_forest)`` by greedy peeling, for cross-checking :func:`classify`."""
    return (_Peeler(c.components, WEB).greedy() is not None,
            _Peeler(c.components, FOREST).greedy() is not None)


def unpack(c: Structure, mode: str = WEB) -> list:
    """Peel sequence ``[(component, split), ...]`` witnessing that ``c`` is a web.

    The first element is peeled first; the last is the base absolute
    component.  ``mode`` may also be ``"forest"`` or ``"conditional"`` to get
    a peel satisfying that stricter test.
    """
    if not len(c):
        raise DomainError("cannot unpack an empty structure")
    peel = _Peeler(c.components, mode).search()
    if peel is None:
        raise DomainError(f"structure is not a {mode if mode != WEB else 'web'}: {c!r}")
    return [(split.component, split) for _, split in peel]


def subforest_masks(c: Structure) -> list:
    """Subset masks (bit ``k`` = component ``k``) of every nonempty subforest, ascending."""
    k = len(c)
    if k > MAX_FOREST_COMPONENTS:
        raise CapacityError(
            f"{k} components exceed the subforest enumeration cap of {MAX_FOREST_COMPONENTS}")
    comps = c.components
    return [mask for mask in range(1, 1 << k)
            if _Peeler([comps[j] for j in range(k) if mask >> j & 1], FOREST).search() is not None]


def enumerate_subforests(c: Structure) -> list:
    """Every nonempty sub-structure that is a forest, by ascending subset mask."""
    return [c.subset(mask) for mask in subforest_masks(c)]
