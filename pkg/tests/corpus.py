"""Fixed regression corpus: 25 consistent systems over at most three binary descriptors."""
import numpy as np

from probweb import Component, EventSpace, JointDistribution, Structure, system_from_joint
from probweb.extension import counterexample_system

A, C = Component.absolute, Component.conditional

TEMPLATES_3 = [
    [A("X1", "X2"), A("X2", "X3"), A("X1", "X3")],
    [A("X1"), A("X2"), C(["X3"], ["X1", "X2"])],
    [A("X1", "X2"), A("X2", "X3")],
    [A("X1")],
    [A("X1"), A("X2"), A("X3")],
    [A("X1"), C(["X3"], ["X1"]), C(["X3"], ["X2"])],
    [C(["X1", "X2"], ["X3"])],
    [A("X1", "X3"), C(["X2"], ["X1"])],
    [A("X1", "X2"), C(["X3"], ["X1", "X2"])],
    [C(["X1"], ["X2"]), C(["X2"], ["X3"]), A("X3")],
    [A("X1", "X2"), A("X3"), C(["X3"], ["X2"])],
]
TEMPLATES_2 = [
    [A("X1"), A("X2")],
    [C(["X2"], ["X1"])],
    [A("X1"), C(["X2"], ["X1"])],
]


def _joint(rng, space, zeros):
    p = rng.dirichlet(np.ones(space.n_states))
    if zeros:
        p[rng.choice(space.n_states, size=zeros, replace=False)] = 0.0
        p /= p.sum()
    return JointDistribution(space, p)


def regression_corpus():
    rng = np.random.default_rng(20240601)
    space3 = EventSpace([("X1", 2), ("X2", 2), ("X3", 2)])
    space2 = EventSpace([("X1", 2), ("X2", 2)])
    out = [counterexample_system()]
    k = 0
    while len(out) < 25:
        if k % 4 == 3:
            space, comps = space2, TEMPLATES_2[(k // 4) % len(TEMPLATES_2)]
        else:
            space, comps = space3, TEMPLATES_3[k % len(TEMPLATES_3)]
        zeros = (0, 0, 1, 2)[k % 4] if space is space3 else k % 2
        out.append(system_from_joint(_joint(rng, space, zeros), Structure(space, comps)))
        k += 1
    return out
