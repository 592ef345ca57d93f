import math

import numpy as np
import pytest

from corpus import regression_corpus
from generators import random_conditional_web
from oracles import brute_conditional, brute_force_maxent, counterexample_line_search
from probweb import (Component, ComponentTable, ConvergenceError, DomainError, EventSpace,
                     InconsistentSystemError, JointDistribution, PreconditionError,
                     ProbabilitySystem, SolverConfig, Structure, as_conditional_web, classify,
                     compatible, entropy, information, maxent_extension, most_informative_forest,
                     product_extension, system_from_joint, verify_counterexample)
from probweb.extension import COUNTEREXAMPLE_MAXENT, COUNTEREXAMPLE_PRODUCT

A, C = Component.absolute, Component.conditional


@pytest.fixture
def space3():
    return EventSpace([("X1", 2), ("X2", 2), ("X3", 2)])


@pytest.fixture
def chain_forest(space3):
    # (X1,X2) uniform, X3 copies X2
    return ProbabilitySystem(space3, [
        ComponentTable.absolute(space3, ["X1", "X2"], [0.25] * 4),
        ComponentTable.conditional(space3, ["X3"], ["X2"], [[1, 0], [0, 1]])])


class TestSolverConfig:
    @pytest.mark.parametrize("kw", [{"tol": 0}, {"entropy_tol": -1}, {"max_iter": 0},
                                    {"damping": 0}, {"damping": 1.5}])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SolverConfig(**kw)


class TestProductExtension:
    def test_table_ii(self, counterexample):
        res = product_extension(counterexample)
        assert np.max(np.abs(res.distribution.probabilities - COUNTEREXAMPLE_PRODUCT)) <= 1e-12
        assert res.entropy == pytest.approx(1.7329, abs=5e-5)

    def test_fair_coins(self):
        space = EventSpace([("X1", 2), ("X2", 2)])
        pc = ProbabilitySystem(space, [ComponentTable.absolute(space, ["X1"], [0.5, 0.5]),
                                       ComponentTable.absolute(space, ["X2"], [0.5, 0.5])])
        assert np.allclose(product_extension(pc).distribution.probabilities, 0.25, atol=1e-15)

    def test_chain_forest(self, chain_forest):
        p = product_extension(chain_forest).distribution.probabilities
        # nonzero exactly where x3 == x2
        expect = [0.25 if (k >> 1 & 1) == (k & 1) else 0.0 for k in range(8)]
        assert np.array_equal(p, expect)

    def test_not_web(self, space3):
        pc = ProbabilitySystem(space3, [ComponentTable.conditional(
            space3, ["X1"], ["X2"], [[0.5, 0.5], [0.5, 0.5]])])
        with pytest.raises(PreconditionError, match="not a web"):
            product_extension(pc)

    def test_overlapping_absolutes(self, space3):
        pc = ProbabilitySystem(space3, [
            ComponentTable.absolute(space3, ["X1", "X2"], [0.25] * 4),
            ComponentTable.absolute(space3, ["X2", "X3"], [0.25] * 4)])
        with pytest.raises(PreconditionError, match="conditional web"):
            product_extension(pc)

    def test_conversion_for_overlapping_forest(self, space3, rng):
        p0 = JointDistribution(space3, rng.dirichlet(np.ones(8)))
        pc = system_from_joint(p0, Structure(space3, [A("X1", "X2"), A("X2", "X3")]))
        conv, converted = as_conditional_web(pc)
        assert converted == ((A("X2", "X3"), C(["X3"], ["X2"])),)
        assert classify(conv.structure).is_conditional_web
        res = product_extension(conv)
        assert compatible(res.distribution, pc, 1e-12)
        assert np.allclose(res.distribution.probabilities,
                           maxent_extension(pc).distribution.probabilities, atol=1e-8)

    def test_properties_a_and_b(self, rng):
        for _ in range(200):
            pc = random_conditional_web(rng)
            p = product_extension(pc).distribution
            assert abs(p.probabilities.sum() - 1) <= 1e-10
            assert compatible(p, pc, 1e-9)


class TestMaxent:
    def test_counterexample_matches_line_oracle(self, counterexample):
        a, h = counterexample_line_search()
        assert a == pytest.approx(1 / 6, abs=1e-9)
        res = maxent_extension(counterexample)
        p = res.distribution.probabilities
        assert p[7] == pytest.approx(a, abs=1e-8) and p[0] == pytest.approx(a, abs=1e-8)
        assert np.max(np.abs(p - COUNTEREXAMPLE_MAXENT)) <= 1e-9
        assert res.entropy == pytest.approx(h, abs=1e-9)
        assert res.entropy == pytest.approx(1.7918, abs=1e-4)
        assert res.max_residual <= 1e-8

    def test_single_marginal_gives_uniform(self, space3):
        pc = ProbabilitySystem(space3, [ComponentTable.absolute(space3, ["X1"], [0.5, 0.5])])
        res = maxent_extension(pc)
        assert np.allclose(res.distribution.probabilities, 0.125, atol=1e-12)
        assert res.entropy == pytest.approx(math.log(8), abs=1e-12)

    def test_forest_equals_product(self, chain_forest):
        a = maxent_extension(chain_forest).distribution.probabilities
        b = product_extension(chain_forest).distribution.probabilities
        assert np.max(np.abs(a - b)) <= 1e-6

    def test_inconsistent(self):
        space = EventSpace([("X1", 2), ("X2", 2)])
        pc = ProbabilitySystem(space, [
            ComponentTable.absolute(space, ["X1"], [0.4, 0.6]),
            ComponentTable.absolute(space, ["X1", "X2"], [0.3, 0.3, 0.2, 0.2])])
        with pytest.raises(InconsistentSystemError) as info:
            maxent_extension(pc)
        assert info.value.report.status == "inconsistent"

    def test_budget_exhausted(self, rng):
        pc = regression_corpus()[1]
        with pytest.raises(ConvergenceError) as info:
            maxent_extension(pc, SolverConfig(max_iter=1))
        assert info.value.last_iterate is not None and info.value.residual > 0

    def test_damping_converges_to_same_point(self, counterexample):
        res = maxent_extension(counterexample, SolverConfig(damping=0.5))
        assert np.max(np.abs(res.distribution.probabilities - COUNTEREXAMPLE_MAXENT)) <= 1e-7

    def test_oracle_corpus(self):
        for pc in regression_corpus():
            ours = maxent_extension(pc).distribution.probabilities
            assert np.max(np.abs(ours - brute_force_maxent(pc))) <= 1e-3

    def test_dominance_and_forest_theorem(self, rng):
        for k in range(100):
            pc = random_conditional_web(rng, forest=k % 2 == 0)
            prod = product_extension(pc)
            hat = maxent_extension(pc)
            assert hat.entropy >= prod.entropy - 1e-6
            if k % 2 == 0:
                assert np.max(np.abs(hat.distribution.probabilities
                                     - prod.distribution.probabilities)) <= 1e-4

    def test_constraint_monotonicity(self, rng):
        for pc in regression_corpus()[:12]:
            full = information(pc).value
            for k in range(len(pc)):
                mask = ((1 << len(pc)) - 1) & ~(1 << k)
                if mask:
                    assert information(pc.subsystem(mask)).value >= full - 1e-8

    def test_deterministic(self, counterexample):
        pc = regression_corpus()[17]
        a, b = maxent_extension(pc), maxent_extension(pc)
        assert a.distribution.probabilities.tobytes() == b.distribution.probabilities.tobytes()
        assert a.iterations == b.iterations and a.entropy == b.entropy


class TestInformation:
    def test_counterexample(self, counterexample):
        rep = information(counterexample)
        assert rep.value == pytest.approx(1.7918, abs=1e-4)
        assert entropy(rep.distribution) == rep.value
        assert compatible(rep.distribution, counterexample, 1e-8)

    def test_two_fair_marginals(self, space3):
        pc = ProbabilitySystem(space3, [ComponentTable.absolute(space3, ["X1"], [0.5, 0.5]),
                                        ComponentTable.absolute(space3, ["X2"], [0.5, 0.5])])
        assert information(pc).value == pytest.approx(math.log(8), abs=1e-12)

    def test_pinned(self, space3, rng):
        p0 = JointDistribution(space3, rng.dirichlet(np.ones(8)))
        pc = system_from_joint(p0, Structure(space3, [A("X1", "X2", "X3")]))
        assert information(pc).value == pytest.approx(entropy(p0), abs=1e-12)


class TestMostInformativeForest:
    def test_counterexample(self, counterexample):
        res = most_informative_forest(counterexample)
        assert list(res.best) == [A("X1"), A("X2")]
        assert res.value == pytest.approx(math.log(8), abs=1e-9)
        assert res.loss == pytest.approx(math.log(4 / 3), abs=1e-9)
        # every subforest leaves the joint uniform
        assert [round(v, 9) for _, _, v in res.evaluated] == [round(math.log(8), 9)] * 3

    def test_forest_keeps_everything(self, chain_forest):
        res = most_informative_forest(chain_forest)
        assert res.best == chain_forest.structure and res.loss == pytest.approx(0, abs=1e-9)

    def test_single_component(self, space3):
        pc = ProbabilitySystem(space3, [ComponentTable.absolute(space3, ["X1"], [0.3, 0.7])])
        res = most_informative_forest(pc)
        assert list(res.best) == [A("X1")] and res.loss == pytest.approx(0, abs=1e-12)

    def test_loss_nonnegative(self, rng):
        for pc in regression_corpus()[:10]:
            res = most_informative_forest(pc)
            if res.loss is not None:
                assert res.loss >= -1e-8


def test_verify_counterexample():
    rep = verify_counterexample()
    assert rep.passed
    by_name = {c.name: c for c in rep.checks}
    assert by_name["entropy(P*)"].expected == 1.7329
    assert by_name["entropy(Pmax)"].expected == 1.7918
    assert by_name["Pmax(x1,x2|x3)"].value == pytest.approx(
        brute_conditional(rep.maxent.distribution, {"X1": 1, "X2": 1}, {"X3": 1}))


def test_verify_counterexample_strict_tolerance_fails():
    rep = verify_counterexample(tol=1e-12)
    assert not rep.passed
    failed = {c.name for c in rep.checks if not c.passed}
    assert {"entropy(P*)", "entropy(Pmax)"} <= failed
    assert not any(n.startswith("P*(") for n in failed)


def test_no_subforest_falls_back_to_empty():
    space = EventSpace([("X1", 2), ("X2", 2)])
    pc = ProbabilitySystem(space, [ComponentTable.conditional(
        space, ["X1"], ["X2"], [[0.3, 0.7], [0.5, 0.5]])])
    res = most_informative_forest(pc)
    assert res.best_mask == 0 and len(res.best) == 0
    assert res.value == pytest.approx(math.log(4), abs=1e-12)
    assert res.loss > 0
