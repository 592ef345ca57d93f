"""Extending a probability system to a full joint distribution.

Two extensions are provided.  The product extension multiplies the
component tables together and is defined for conditional webs.  The
maximum-entropy extension is the most uniform distribution compatible with
the system, found by cyclic information projection onto one component's
constraints at a time (iterative scaling).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .event_space import (JointDistribution, conditionalize, conditionally_independent, entropy,
                          expand_to)
from .exceptions import ConvergenceError, DomainError, InconsistentSystemError, PreconditionError
from .structure import WEB, Component, Structure, classify, covered, subforest_masks, unpack
from .system import (CONSISTENT, INCONSISTENT, ComponentTable, ProbabilitySystem, check_system,
                     feasible_support, lp_report, target_array)

PRODUCT = "product"
MAXENT = "maxent"


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule and step control for :func:`maxent_extension`.

    A run stops once the largest constraint residual is at most ``tol`` and
    the entropy moved by at most ``entropy_tol`` (relative) over one sweep.
    ``damping`` raises every scaling factor to that power.
    """

    tol: float = 1e-8
    entropy_tol: float = 1e-9
    max_iter: int = 100_000
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol > 0 or not self.entropy_tol > 0:
            raise DomainError("solver tolerances must be positive")
        if int(self.max_iter) < 1:
            raise DomainError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise DomainError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class ExtensionResult:
    distribution: JointDistribution
    method: str
    iterations: int
    max_residual: float
    entropy: float
    converged: bool = True
    notes: tuple = ()


@dataclass(frozen=True)
class InfoReport:
    value: float
    distribution: JointDistribution
    iterations: int = 0
    max_residual: float = 0.0


@dataclass(frozen=True)
class ForestSearchResult:
    best: Structure
    best_mask: int
    value: float
    loss: Optional[float]
    full_value: Optional[float]
    evaluated: tuple = field(default=(), repr=False)


# -- shared array plumbing -------------------------------------------------

class _Step:
    """One component's constraints, pre-broadcast over the joint table."""

    def __init__(self, entry: ComponentTable, space):
        ndim = len(space)
        axes, arr = target_array(entry, space)
        self.component = entry.component
        self.conditional = entry.component.is_conditional
        self.target = expand_to(arr, axes, ndim)
        self.drop = tuple(i for i in range(ndim) if i not in axes)
        if self.conditional:
            self.z_axes = space.positions(entry.component.targets)
            self.defined = ~np.isnan(self.target).any(axis=self.z_axes, keepdims=True)
            self.c = np.nan_to_num(self.target)

    def _sum(self, q):
        return q.sum(axis=self.drop, keepdims=True) if self.drop else q

    def residual(self, q) -> float:
        m = self._sum(q)
        if not self.conditional:
            return float(np.max(np.abs(m - self.target)))
        qw = m.sum(axis=self.z_axes, keepdims=True)
        dev = np.abs(m - self.c * qw) * self.defined
        return float(np.max(dev))

    def apply(self, q, damping):
        m = self._sum(q)
        if not self.conditional:
            factor = np.divide(self.target, m, out=np.zeros_like(m), where=m > 0)
        else:
            factor = self._conditional_factor(m)
        if damping != 1.0:
            factor = factor ** damping
        q = q * factor
        total = q.sum()
        return q / total if total > 0 else q

    def _conditional_factor(self, m):
        # I-projection onto {p(z,w) = c(z|w) p(w)} for every defined w:
        # within slice w, p ∝ q * c/q(z|w) * exp(-KL(c || q(.|w))), outside p ∝ q.
        qw = m.sum(axis=self.z_axes, keepdims=True)
        live = (qw > 0) & self.defined
        cond = np.divide(m, qw, out=np.zeros_like(m), where=qw > 0)
        c = self.c
        pos_c = c > 0
        blocked = (pos_c & (cond <= 0)).any(axis=self.z_axes, keepdims=True)
        ok = pos_c & (cond > 0)
        ratio = np.divide(c, cond, out=np.zeros_like(m), where=ok)
        log_ratio = np.log(ratio, out=np.zeros_like(m), where=ok)
        kl = np.sum(c * log_ratio, axis=self.z_axes, keepdims=True)
        scale = np.where(blocked, 0.0, np.exp(-kl))
        return np.where(live, ratio * scale, 1.0)


def _max_residual(steps, q) -> float:
    return max((s.residual(q) for s in steps), default=0.0)


# -- product extension -----------------------------------------------------

def product_extension(pc: ProbabilitySystem, tol: float = 1e-9) -> ExtensionResult:
    """Multiply the component tables of a conditional web.

    Undefined conditional rows are filled with the uniform row.

    Raises
    ------
    PreconditionError
        If the structure is not a conditional web.
    """
    check_system(pc, tol)
    if not len(pc):
        raise PreconditionError("product extension needs at least one component")
    cls = classify(pc.structure)
    if not cls.is_web:
        raise PreconditionError("product extension needs a conditional web; structure is not a web")
    if not cls.is_conditional_web:
        raise PreconditionError(
            "product extension needs a conditional web; structure is a web but some absolute "
            "component overlaps the rest when peeled (see as_conditional_web)")
    space = pc.space
    q = np.ones(space.shape)
    steps = []
    for e in pc.entries:
        step = _Step(e, space)
        steps.append(step)
        if step.conditional:
            n_z = math.prod(space.arities_of(e.component.targets))
            q = q * np.where(step.defined, step.c, 1.0 / n_z)
        else:
            q = q * step.target
    uncovered = [d.name for d in space if d.name not in covered(pc.structure)]
    if uncovered:
        # descriptors outside every component are left uniform
        q = q / math.prod(space.arities_of(uncovered))
    dist = JointDistribution(space, q.reshape(-1), tol=1e-10)
    notes = (f"uncovered descriptors uniform: {' '.join(uncovered)}",) if uncovered else ()
    return ExtensionResult(dist, PRODUCT, 0, _max_residual(steps, q), entropy(dist), True, notes)


def as_conditional_web(pc: ProbabilitySystem) -> tuple:
    """Rewrite overlapping absolute components of a web as conditionals.

    Each absolute component that is connected to the rest when peeled is
    replaced by ``(Z|W)``, with ``P(Z|W)`` read off its own table.  Returns
    ``(system, converted)`` where ``converted`` lists ``(old, new)``
    component pairs.
    """
    check_system(pc)
    peel = unpack(pc.structure, WEB)
    replace = {}
    for comp, split in peel:
        if comp.is_conditional or not split.w:
            continue
        z = tuple(n for n in comp.targets if n in split.z)
        w = tuple(n for n in comp.targets if n in split.w)
        entry = pc.entries[pc.structure.index(comp)]
        sub = pc.space.subspace(comp.targets)
        joint = JointDistribution(sub, entry.table.probabilities, tol=1e-6)
        replace[comp] = ComponentTable(Component.conditional(z, w), conditionalize(joint, z, w))
    entries = [replace.get(e.component, e) for e in pc.entries]
    converted = tuple((old, new.component) for old, new in replace.items())
    return ProbabilitySystem(pc.space, entries), converted


# -- maximum entropy -------------------------------------------------------

def maxent_extension(pc: ProbabilitySystem, config: Optional[SolverConfig] = None, *,
                     check: bool = True, support: Optional[np.ndarray] = None) -> ExtensionResult:
    """Maximum-entropy joint distribution compatible with ``pc``.

    Sweeps the components in declaration order, replacing the iterate by its
    information projection onto each component's constraint set.  For a
    marginal this is the usual proportional rescaling; for a conditional
    ``(Z|W)`` each slice ``w`` is rescaled to the target row and its mass
    shrunk by ``exp(-KL(target || current row))``.

    The iterate starts uniform over the states some compatible distribution
    can make positive.  With ``check`` (the default) a linear program first
    confirms consistency and finds that support; pass ``check=False`` to
    skip it, optionally supplying ``support`` directly.

    Raises
    ------
    InconsistentSystemError
        If ``check`` finds no compatible distribution.
    ConvergenceError
        If ``config.max_iter`` sweeps do not reach the tolerances.
    """
    cfg = config or SolverConfig()
    check_system(pc)
    space = pc.space
    if check:
        report = lp_report(pc)
        if report.status == INCONSISTENT:
            raise InconsistentSystemError(report)
        if report.status == CONSISTENT:
            support = feasible_support(pc)
    steps = [_Step(e, space) for e in pc.entries]
    if support is None:
        q = np.full(space.shape, 1.0 / space.n_states)
    else:
        mask = np.asarray(support, dtype=bool).reshape(space.shape)
        q = mask / mask.sum()
    h_prev = entropy(q)
    residual = math.inf
    for it in range(1, int(cfg.max_iter) + 1):
        for step in steps:
            q = step.apply(q, cfg.damping)
        residual = _max_residual(steps, q)
        h = entropy(q)
        if residual <= cfg.tol and abs(h - h_prev) <= cfg.entropy_tol * max(1.0, abs(h)):
            dist = JointDistribution(space, q.reshape(-1), tol=1e-9)
            return ExtensionResult(dist, MAXENT, it, residual, entropy(dist))
        h_prev = h
    raise ConvergenceError(
        f"maxent solver did not converge in {cfg.max_iter} sweeps "
        f"(max residual {residual:.3g})", last_iterate=q.reshape(-1), residual=residual,
        iterations=int(cfg.max_iter))


def information(pc: ProbabilitySystem, config: Optional[SolverConfig] = None) -> InfoReport:
    """Largest entropy (nats) over all distributions compatible with ``pc``."""
    res = maxent_extension(pc, config)
    return InfoReport(res.entropy, res.distribution, res.iterations, res.max_residual)


def most_informative_forest(pc: ProbabilitySystem, config: Optional[SolverConfig] = None,
                            tie_tol: float = 1e-7) -> ForestSearchResult:
    """Subforest of ``pc`` with the lowest information value.

    Every subforest is evaluated exhaustively.  Values within ``tie_tol`` of
    each other tie; ties go to the subforest keeping more components, then
    to the smaller subset mask.  ``loss`` is the best value minus the full
    system's value, or ``None`` if the full system is inconsistent.  When no
    nonempty subset is a forest the empty forest (mask 0, uniform joint) is
    returned.
    """
    from .system import is_consistent

    check_system(pc)
    evaluated = []
    # the empty forest is the fallback when no nonempty subset is a forest
    for mask in subforest_masks(pc.structure) or [0]:
        sub = pc.subsystem(mask)
        evaluated.append((sub.structure, mask, information(sub, config).value))
    best = None
    for item in evaluated:
        if best is None:
            best = item
            continue
        if item[2] < best[2] - tie_tol:
            best = item
        elif abs(item[2] - best[2]) <= tie_tol and bin(item[1]).count("1") > bin(best[1]).count("1"):
            best = item
    full_value = None
    if is_consistent(pc, config=config).consistent:
        full_value = information(pc, config).value
    loss = None if full_value is None else best[2] - full_value
    return ForestSearchResult(best[0], best[1], best[2], loss, full_value, tuple(evaluated))


# -- the web that is not a forest -------------------------------------------

# Reference joints in index order (0,0,0), (0,0,1), ..., (1,1,1)
COUNTEREXAMPLE_PRODUCT = (0.25, 0.0, 0.125, 0.125, 0.125, 0.125, 0.0, 0.25)
COUNTEREXAMPLE_MAXENT = (1 / 6, 0.0, 1 / 6, 1 / 6, 1 / 6, 1 / 6, 0.0, 1 / 6)
PRODUCT_ENTROPY = 1.7329
MAXENT_ENTROPY = 1.7918


def counterexample_system() -> ProbabilitySystem:
    """``(X1), (X2), (X3|X1,X2)`` with fair marginals and a deterministic-or-fair X3."""
    from .event_space import EventSpace

    space = EventSpace([("X1", 2), ("X2", 2), ("X3", 2)])
    # rows for (X1,X2) = 00, 01, 10, 11; entries P(X3=0), P(X3=1)
    rows = [(1.0, 0.0), (0.5, 0.5), (0.5, 0.5), (0.0, 1.0)]
    return ProbabilitySystem(space, [
        ComponentTable.absolute(space, ["X1"], [0.5, 0.5]),
        ComponentTable.absolute(space, ["X2"], [0.5, 0.5]),
        ComponentTable.conditional(space, ["X3"], ["X1", "X2"], rows),
    ])


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(abs(self.value - self.expected) <= self.tol)


@dataclass(frozen=True)
class CounterexampleReport:
    product: ExtensionResult
    maxent: ExtensionResult
    classification: object
    checks: tuple
    flags: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and all(ok for _, ok in self.flags)


def _cond(p: JointDistribution, event: dict, given: dict) -> float:
    t = p.table
    pos = {n: p.space.position(n) for n in list(event) + list(given)}

    def mass(assign):
        idx = [slice(None)] * len(p.space)
        for n, s in assign.items():
            idx[pos[n]] = s
        return float(t[tuple(idx)].sum())

    return mass({**event, **given}) / mass(given)


def verify_counterexample(tol: Optional[float] = None,
                          config: Optional[SolverConfig] = None) -> CounterexampleReport:
    """Rebuild both reference joints and every derived number for the web that is not a forest.

    ``tol`` overrides every numeric tolerance; the built-in ones are 1e-12
    for product entries, 1e-3 for maxent entries and conditional
    probabilities, 5e-5 for the product entropy, 1e-3 for the maxent entropy
    and 2e-3 for their gap.
    """
    pc = counterexample_system()
    prod = product_extension(pc)
    hat = maxent_extension(pc, config)
    cls = classify(pc.structure)

    def tl(default):
        return default if tol is None else tol

    checks = []
    for k in range(8):
        s = "".join(map(str, pc.space.assignment_of(k).states))
        checks.append(Check(f"P*({s})", float(prod.distribution.probabilities[k]),
                            COUNTEREXAMPLE_PRODUCT[k], tl(1e-12)))
    for k in range(8):
        s = "".join(map(str, pc.space.assignment_of(k).states))
        checks.append(Check(f"Pmax({s})", float(hat.distribution.probabilities[k]),
                            COUNTEREXAMPLE_MAXENT[k], tl(1e-3)))
    checks.append(Check("entropy(P*)", prod.entropy, PRODUCT_ENTROPY, tl(5e-5)))
    checks.append(Check("entropy(Pmax)", hat.entropy, MAXENT_ENTROPY, tl(1e-3)))
    checks.append(Check("entropy gap", hat.entropy - prod.entropy,
                        round(MAXENT_ENTROPY - PRODUCT_ENTROPY, 4), tl(2e-3)))
    p1 = _cond(hat.distribution, {"X1": 1}, {"X3": 1})
    p2 = _cond(hat.distribution, {"X2": 1}, {"X3": 1})
    p12 = _cond(hat.distribution, {"X1": 1, "X2": 1}, {"X3": 1})
    checks.append(Check("Pmax(x1|x3)", p1, 2 / 3, tl(1e-3)))
    checks.append(Check("Pmax(x2|x3)", p2, 2 / 3, tl(1e-3)))
    checks.append(Check("Pmax(x1,x2|x3)", p12, 1 / 3, tl(1e-3)))
    checks.append(Check("Pmax(x1|x3)*Pmax(x2|x3)", p1 * p2, 4 / 9, tl(1e-3)))
    flags = (
        ("web", cls.is_web),
        ("not forest", not cls.is_forest),
        ("X1, X2 dependent given X3 under Pmax",
         not conditionally_independent(hat.distribution, "X1", "X2", 1e-3)),
    )
    return CounterexampleReport(prod, hat, cls, tuple(checks), flags)
