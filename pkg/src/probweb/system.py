"""Probability systems: a structure plus one table per component.

The set of joint distributions compatible with a system is a polytope.
:func:`constraints` writes it as linear equalities over the joint-state
probabilities, and :func:`is_consistent` decides whether it is empty by
solving a small linear program.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .event_space import (DEFAULT_TOL, ConditionalTable, EventSpace, JointDistribution,
                          MarginalTable, marginal_array)
from .exceptions import CapacityError, DomainError, ValidationError
from .structure import Component, Structure

FEASIBLE_TOL = 1e-8
INFEASIBLE_TOL = 1e-6

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INDETERMINATE = "indeterminate"


class ComponentTable:
    """A component together with its marginal or conditional table."""

    def __init__(self, component: Component, table):
        if component.is_conditional:
            if not isinstance(table, ConditionalTable):
                raise DomainError(f"{component} needs a ConditionalTable")
            if table.targets != component.targets or table.givens != component.givens:
                raise DomainError(f"table descriptors do not match component {component}")
        else:
            if not isinstance(table, MarginalTable):
                raise DomainError(f"{component} needs a MarginalTable")
            if table.descriptors != component.targets:
                raise DomainError(f"table descriptors do not match component {component}")
        self.component = component
        self.table = table

    @classmethod
    def absolute(cls, space: EventSpace, names: Sequence[str], probabilities) -> "ComponentTable":
        names = tuple(names)
        space.positions(names)
        return cls(Component(names), MarginalTable(names, space.arities_of(names), probabilities))

    @classmethod
    def conditional(cls, space: EventSpace, targets: Sequence[str], givens: Sequence[str],
                    rows) -> "ComponentTable":
        targets, givens = tuple(targets), tuple(givens)
        space.positions(targets + givens)
        comp = Component.conditional(targets, givens)
        table = ConditionalTable(targets, givens, space.arities_of(targets),
                                 space.arities_of(givens), rows)
        return cls(comp, table)

    def __eq__(self, other):
        return (isinstance(other, ComponentTable) and self.component == other.component
                and self.table == other.table)

    def __repr__(self):
        return f"ComponentTable({self.component}, {self.table!r})"


class ProbabilitySystem:
    """Structure plus tables; the object most operations take as input."""

    def __init__(self, space: EventSpace, entries: Sequence[ComponentTable]):
        self.space = space
        self.entries = tuple(entries)
        self.structure = Structure(space, [e.component for e in self.entries])
        for e in self.entries:
            t = e.table
            if isinstance(t, MarginalTable):
                expected = space.arities_of(t.descriptors)
                got = t.arities
            else:
                expected = space.arities_of(t.targets + t.givens)
                got = t.target_arities + t.given_arities
            if expected != got:
                raise DomainError(f"arity mismatch in table of {e.component}: "
                                  f"space has {expected}, table has {got}")

    @property
    def components(self) -> tuple:
        return self.structure.components

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return (isinstance(other, ProbabilitySystem) and self.space == other.space
                and self.entries == other.entries)

    def __repr__(self):
        return f"ProbabilitySystem({self.space!r}, {list(self.entries)!r})"

    def subsystem(self, mask: int) -> "ProbabilitySystem":
        return ProbabilitySystem(self.space, [e for k, e in enumerate(self.entries) if mask >> k & 1])

    def restrict_to(self, structure: Structure) -> "ProbabilitySystem":
        """Entries whose components appear in ``structure``, in its order."""
        by_comp = {e.component: e for e in self.entries}
        try:
            return ProbabilitySystem(self.space, [by_comp[c] for c in structure])
        except KeyError as exc:
            raise DomainError(f"component {exc.args[0]} is not in the system") from None


def system_from_joint(p: JointDistribution, structure: Structure) -> ProbabilitySystem:
    """Read every component table of ``structure`` off the joint ``p``."""
    from .event_space import conditionalize, marginalize

    entries = []
    for comp in structure:
        if comp.is_conditional:
            entries.append(ComponentTable(comp, conditionalize(p, comp.targets, comp.givens)))
        else:
            entries.append(ComponentTable(comp, marginalize(p, comp.targets)))
    return ProbabilitySystem(p.space, entries)


def validate(pc: ProbabilitySystem, tol: float = DEFAULT_TOL) -> list:
    """List every normalization violation; an empty list means valid."""
    out = []
    for e in pc.entries:
        out += [f"{e.component}: {v}" for v in e.table.violations(tol)]
    return out


def check_system(pc: ProbabilitySystem, tol: float = DEFAULT_TOL) -> ProbabilitySystem:
    """Raise :class:`ValidationError` unless ``pc`` is valid; return it otherwise."""
    if not isinstance(pc, ProbabilitySystem):
        raise DomainError(f"expected a ProbabilitySystem, got {type(pc).__name__}")
    violations = validate(pc, tol)
    if violations:
        raise ValidationError(violations)
    return pc


# -- dense helpers shared with the solver ---------------------------------

def target_array(entry: ComponentTable, space: EventSpace) -> tuple:
    """Table of ``entry`` broadcastable over the space's joint table.

    Returns ``(axes, array)`` where ``axes`` lists the space positions the
    array is laid out over.  Conditional arrays are shaped
    ``(*given_shape, *target_shape)`` and undefined rows are NaN.
    """
    t = entry.table
    if isinstance(t, MarginalTable):
        return space.positions(t.descriptors), t.array
    rows = np.where(t.defined[:, None], t.rows, np.nan)
    arr = rows.reshape(t.given_arities + t.target_arities)
    return space.positions(t.givens + t.targets), arr


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    max_residual: float
    worst: Optional[str] = None

    def __bool__(self):
        return self.ok


def compatible(p: JointDistribution, pc: ProbabilitySystem, tol: float = 1e-9) -> CompatibilityReport:
    """Check that ``p`` reproduces every marginal and conditional table of ``pc``.

    Conditional rows whose conditioning probability is below ``tol`` are
    treated as satisfied.
    """
    if p.space != pc.space:
        raise DomainError("distribution and system live on different event spaces")
    table = p.table
    worst, worst_where = 0.0, None
    for e in pc.entries:
        t = e.table
        if isinstance(t, MarginalTable):
            m = marginal_array(table, pc.space.positions(t.descriptors)).reshape(-1)
            dev = np.abs(m - t.probabilities)
            k = int(np.argmax(dev))
            if dev[k] > worst:
                worst, worst_where = float(dev[k]), f"{e.component} state {k}"
            continue
        joint = marginal_array(table, pc.space.positions(t.givens + t.targets))
        joint = joint.reshape(len(t.rows), -1)
        denom = joint.sum(axis=1)
        for w in range(len(denom)):
            if denom[w] < tol or not t.defined[w]:
                continue
            dev = np.abs(joint[w] / denom[w] - t.rows[w])
            k = int(np.argmax(dev))
            if dev[k] > worst:
                worst, worst_where = float(dev[k]), f"{e.component} row {w} state {k}"
    return CompatibilityReport(worst <= tol, worst, worst_where)


class ConstraintTag(NamedTuple):
    entry: int
    component: str
    target_state: int
    given_state: Optional[int]

    def __str__(self):
        if self.given_state is None:
            return f"{self.component}[{self.target_state}]"
        return f"{self.component}[{self.target_state} | {self.given_state}]"


@dataclass(frozen=True)
class ConstraintSet:
    """Equalities ``A p = b`` plus ``sum(p) = 1`` and ``p >= 0``.

    ``A`` is a sparse matrix with one column per joint state.
    """

    n_vars: int
    A: sparse.csr_matrix
    b: np.ndarray
    tags: tuple = field(default=())

    @property
    def n_equalities(self) -> int:
        return self.A.shape[0]

    def residuals(self, p) -> np.ndarray:
        """Signed residual ``A p - b`` of each equality (normalization excluded)."""
        p = p.probabilities if isinstance(p, JointDistribution) else np.asarray(p, dtype=float)
        return self.A @ p - self.b

    def dense(self) -> tuple:
        """``(A_eq, b_eq)`` with the normalization row appended."""
        A = np.vstack([self.A.toarray(), np.ones((1, self.n_vars))])
        return A, np.append(self.b, 1.0)


def _codes(space: EventSpace, names: Sequence[str]) -> np.ndarray:
    """Index of each joint state's restriction to ``names``."""
    if not names:
        return np.zeros(space.n_states, dtype=np.int64)
    grid = np.indices(space.shape).reshape(len(space), -1)
    pos = space.positions(names)
    return np.ravel_multi_index(tuple(grid[list(pos)]), space.arities_of(names))


def constraints(pc: ProbabilitySystem, keep_redundant: bool = False) -> ConstraintSet:
    """Linear equalities whose solutions (on the simplex) form the compatible set.

    Marginal state ``y`` gives ``sum_{x ~ y} p_x = P(y)``.  Conditional entry
    ``P(z | w)`` gives the homogeneous ``sum_{x ~ z,w} p_x - P(z|w) sum_{x ~ w} p_x = 0``,
    which any distribution with ``P(w) = 0`` satisfies.  Undefined rows give
    nothing.  Unless ``keep_redundant``, the last state of each table row is
    dropped, since normalization already implies it.
    """
    space = pc.space
    M = space.n_states
    cols = np.arange(M)
    rows_i, cols_i, vals, b, tags = [], [], [], [], []
    n_rows = 0
    for k, e in enumerate(pc.entries):
        t = e.table
        label = str(e.component)
        if isinstance(t, MarginalTable):
            code = _codes(space, t.descriptors)
            n_y = t.probabilities.size
            keep = n_y if keep_redundant else n_y - 1
            sel = code < keep
            rows_i.append(n_rows + code[sel])
            cols_i.append(cols[sel])
            vals.append(np.ones(sel.sum()))
            b += t.probabilities[:keep].tolist()
            tags += [ConstraintTag(k, label, y, None) for y in range(keep)]
            n_rows += keep
            continue
        zc, wc = _codes(space, t.targets), _codes(space, t.givens)
        n_z = t.rows.shape[1]
        keep = n_z if keep_redundant else n_z - 1
        row_of = {}
        for w in np.flatnonzero(t.defined):
            for z in range(keep):
                row_of[(w, z)] = n_rows
                tags.append(ConstraintTag(k, label, z, int(w)))
                b.append(0.0)
                n_rows += 1
        if keep == 0 or not row_of:
            continue
        defined = t.defined[wc]
        for z in range(keep):
            idx = np.array([row_of.get((w, z), -1) for w in range(len(t.rows))])
            r = idx[wc]
            coef = (zc == z).astype(float) - t.rows[wc, z]
            nz = defined & (coef != 0)
            rows_i.append(r[nz])
            cols_i.append(cols[nz])
            vals.append(coef[nz])
    if rows_i:
        A = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows_i), np.concatenate(cols_i))),
                              shape=(n_rows, M))
    else:
        A = sparse.csr_matrix((n_rows, M))
    return ConstraintSet(M, A, np.array(b, dtype=float), tuple(tags))


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of :func:`is_consistent`.

    ``max_residual`` is the witness residual when consistent and the proven
    minimum over the simplex of the largest constraint residual otherwise.
    ``vacuous_rows`` names conditional rows the witness satisfies only
    because it gives their conditioning event zero probability.
    """

    status: str
    max_residual: float
    witness: Optional[JointDistribution] = None
    witness_method: Optional[str] = None
    certificate: tuple = ()
    lower_bound: float = 0.0
    vacuous_rows: tuple = ()

    @property
    def consistent(self) -> bool:
        return self.status == CONSISTENT

    def __bool__(self):
        return self.consistent


def _check_capacity(pc: ProbabilitySystem):
    if pc.space.n_states > pc.space.max_states:
        raise CapacityError(f"{pc.space.n_states} joint states exceed the cap")


def _minmax_lp(cs: ConstraintSet):
    """Minimize the largest absolute residual over the simplex."""
    M, m = cs.n_vars, cs.n_equalities
    c = np.zeros(M + 1)
    c[-1] = 1.0
    bounds = [(0, None)] * (M + 1)
    A_eq = sparse.hstack([sparse.csr_matrix(np.ones((1, M))), sparse.csr_matrix((1, 1))])
    if m == 0:
        return linprog(c, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    neg_t = sparse.csr_matrix(-np.ones((m, 1)))
    A_ub = sparse.vstack([sparse.hstack([cs.A, neg_t]), sparse.hstack([-cs.A, neg_t])]).tocsr()
    b_ub = np.concatenate([cs.b, -cs.b])
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")


def feasible_support(pc: ProbabilitySystem, cs: Optional[ConstraintSet] = None) -> np.ndarray:
    """Boolean mask of joint states that some compatible distribution makes positive.

    Solves one linear program over the homogenized cone
    ``{y >= 0, t >= 0 : A y = b t, sum(y) = t}``, maximizing
    ``sum(min(y, 1))``; a state reaches 1 exactly when it is not forced to 0.
    Assumes ``pc`` is consistent.
    """
    cs = cs if cs is not None else constraints(pc)
    M, m = cs.n_vars, cs.n_equalities
    # variables: y (M), s (M), t
    c = np.concatenate([np.zeros(M), -np.ones(M), [0.0]])
    eye = sparse.identity(M, format="csr")
    A_ub = sparse.hstack([-eye, eye, sparse.csr_matrix((M, 1))]).tocsr()
    b_ub = np.zeros(M)
    eq_rows = [sparse.hstack([sparse.csr_matrix(np.ones((1, M))), sparse.csr_matrix((1, M)),
                              sparse.csr_matrix([[-1.0]])])]
    if m:
        eq_rows.insert(0, sparse.hstack([cs.A, sparse.csr_matrix((m, M)),
                                         sparse.csr_matrix(-cs.b.reshape(-1, 1))]))
    A_eq = sparse.vstack(eq_rows).tocsr()
    b_eq = np.zeros(A_eq.shape[0])
    bounds = [(0, None)] * M + [(0, 1)] * M + [(0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return np.ones(M, dtype=bool)
    return res.x[M:2 * M] > 0.5


def vacuous_rows(p: JointDistribution, pc: ProbabilitySystem, tol: float = 1e-12) -> tuple:
    """Conditional rows of ``pc`` whose conditioning event has probability below ``tol`` under ``p``."""
    out = []
    for e in pc.entries:
        t = e.table
        if isinstance(t, MarginalTable):
            continue
        pw = marginal_array(p.table, pc.space.positions(t.givens)).reshape(-1)
        out += [f"{e.component} row {w}" for w in np.flatnonzero((pw < tol) & t.defined)]
    return tuple(out)


def lp_report(pc: ProbabilitySystem, feasible_tol: float = FEASIBLE_TOL,
              infeasible_tol: float = INFEASIBLE_TOL) -> ConsistencyReport:
    """Consistency status from the min-max-residual linear program alone, without a witness."""
    return _lp_stage(pc, feasible_tol, infeasible_tol)[0]


def _lp_stage(pc, feasible_tol, infeasible_tol):
    _check_capacity(pc)
    cs = constraints(pc, keep_redundant=True)
    res = _minmax_lp(cs)
    if res.status != 0:
        return ConsistencyReport(INDETERMINATE, math.inf), cs, res
    r = float(max(res.fun, 0.0))
    if r >= infeasible_tol:
        duals = np.asarray(res.ineqlin.marginals)
        m = cs.n_equalities
        weight = np.abs(duals[:m]) + np.abs(duals[m:])
        cert = tuple(str(cs.tags[i]) for i in np.flatnonzero(weight > 1e-12))
        return ConsistencyReport(INCONSISTENT, r, certificate=cert, lower_bound=r), cs, res
    if r > feasible_tol:
        return ConsistencyReport(INDETERMINATE, r), cs, res
    return ConsistencyReport(CONSISTENT, r), cs, res


def is_consistent(pc: ProbabilitySystem, feasible_tol: float = FEASIBLE_TOL,
                  infeasible_tol: float = INFEASIBLE_TOL, config=None) -> ConsistencyReport:
    """Decide whether some joint distribution is compatible with ``pc``.

    A linear program finds the smallest achievable largest residual ``r``.
    ``r <= feasible_tol`` means consistent, and the maximum-entropy extension
    is returned as the witness (falling back to the LP point if the solver
    misses the tolerance).  ``r >= infeasible_tol`` means inconsistent, with
    ``r`` as a proven lower bound and the constraints carrying nonzero dual
    weight as certificate.  Anything in between is indeterminate.
    """
    report, cs, res = _lp_stage(pc, feasible_tol, infeasible_tol)
    if report.status != CONSISTENT:
        return report

    from .exceptions import ConvergenceError
    from .extension import SolverConfig, maxent_extension

    witness, method = None, None
    try:
        result = maxent_extension(pc, config or SolverConfig(), check=False,
                                  support=feasible_support(pc, cs))
        if result.max_residual <= feasible_tol:
            witness, method = result.distribution, "maxent"
    except ConvergenceError:
        pass
    if witness is None:
        x = np.clip(res.x[:-1], 0.0, None)
        witness, method = JointDistribution(pc.space, x / x.sum(), tol=1e-6), "lp"
    resid = float(np.max(np.abs(cs.residuals(witness)), initial=0.0))
    return ConsistencyReport(CONSISTENT, resid, witness, method,
                             vacuous_rows=vacuous_rows(witness, pc))
