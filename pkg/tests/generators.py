"""Random probability systems for property tests."""
import math

import numpy as np

from probweb import ComponentTable, EventSpace, ProbabilitySystem


def random_rows(rng, n_rows, n_cols, zero_rate=0.15):
    """Dirichlet(1) rows, each entry zeroed with ``zero_rate`` (one entry always kept)."""
    rows = rng.dirichlet(np.ones(n_cols), size=n_rows)
    if zero_rate:
        mask = rng.random(rows.shape) < zero_rate
        keep = rng.integers(n_cols, size=n_rows)
        mask[np.arange(n_rows), keep] = False
        rows[mask] = 0.0
        rows /= rows.sum(axis=1, keepdims=True)
    return rows


def random_space(rng, max_desc=4, max_arity=3, min_desc=2):
    n = int(rng.integers(min_desc, max_desc + 1))
    return EventSpace([(f"X{i + 1}", int(rng.integers(2, max_arity + 1))) for i in range(n)])


def random_conditional_web(rng, forest=False, max_desc=4, max_arity=3, zero_rate=0.15):
    """Grow a conditional web component by component, then shuffle the order.

    Each step adds either an unconnected absolute component over fresh
    descriptors or a conditional ``(Z|W)`` with ``Z`` fresh and ``W`` inside
    what is already covered (inside one component when ``forest``).
    """
    space = random_space(rng, max_desc, max_arity)
    names = list(space.names)
    rng.shuffle(names)
    comps = []

    def take_fresh():
        k = int(rng.integers(1, min(2, len(names)) + 1))
        return [names.pop() for _ in range(k)]

    comps.append(("abs", take_fresh(), []))
    while names:
        covered = sorted({n for _, z, w in comps for n in z + w})
        if rng.random() < 0.25:
            comps.append(("abs", take_fresh(), []))
            continue
        if forest:
            _, z0, w0 = comps[int(rng.integers(len(comps)))]
            pool = z0 + w0
        else:
            pool = covered
        k = int(rng.integers(1, len(pool) + 1))
        givens = list(rng.choice(pool, size=k, replace=False))
        comps.append(("cond", take_fresh(), givens))
    order = rng.permutation(len(comps))
    entries = []
    for i in order:
        kind, z, w = comps[i]
        za = space.arities_of(z)
        if kind == "abs":
            p = random_rows(rng, 1, math.prod(za), zero_rate)[0]
            entries.append(ComponentTable.absolute(space, z, p))
        else:
            n_w = math.prod(space.arities_of(w))
            entries.append(ComponentTable.conditional(
                space, z, w, random_rows(rng, n_w, math.prod(za), zero_rate)))
    return ProbabilitySystem(space, entries)


def random_structure(rng, max_components=6, max_desc=5):
    """Arbitrary distinct components over up to ``max_desc`` binary descriptors."""
    from probweb import Component, Structure

    n = int(rng.integers(2, max_desc + 1))
    space = EventSpace([(f"X{i + 1}", 2) for i in range(n)])
    names = list(space.names)
    comps = []
    target = int(rng.integers(1, max_components + 1))
    attempts = 0
    while len(comps) < target and attempts < 50:
        attempts += 1
        size = int(rng.integers(1, min(3, n) + 1))
        chosen = list(rng.choice(names, size=size, replace=False))
        if size > 1 and rng.random() < 0.5:
            cut = int(rng.integers(1, size))
            comp = Component(chosen[:cut], chosen[cut:])
        else:
            comp = Component(chosen)
        if comp not in comps:
            comps.append(comp)
    return Structure(space, comps)
