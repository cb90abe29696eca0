"""Lagrangian evaluation and both players' best responses."""

import itertools

import numpy as np
import pytest

from pairfair.classifiers import (RandomizedClassifier, TabularHypothesis,
                                  positive_rates, single, tabular_from_code)
from pairfair.csc import CscInstance, ExhaustiveTabularOracle, csc_objective
from pairfair.data import ConstraintSet, Dataset
from pairfair.lagrangian import (DualVars, FairnessParams, GuaranteeBudgets,
                                 PrimalVars, best_response_alpha,
                                 best_response_dual, best_response_primal,
                                 build_costs, error_from_rates,
                                 lagrangian_value, penalty)


def toy_problem():
    ds = Dataset(features=np.array([[0.0], [1.0]]),
                 labels=np.array([0, 0]), feature_names=["x"])
    cs = ConstraintSet(n=2, pairs=np.array([[0, 1]]),
                       counts=np.array([1]), num_judges=1)
    # rates (0.4, 0.0): mixture of [1,0] at weight 0.4 and [0,0] at 0.6
    clf = RandomizedClassifier(
        [TabularHypothesis([1, 0]), TabularHypothesis([0, 0])],
        np.array([0.4, 0.6]))
    return ds, cs, clf


def rand_problem(rng, n=5, m=3, num_judges=2):
    ds = Dataset(features=rng.normal(size=(n, 2)),
                 labels=rng.integers(0, 2, size=n),
                 feature_names=["a", "b"])
    pool = list(itertools.combinations(range(n), 2))
    idx = rng.choice(len(pool), size=m, replace=False)
    pairs = np.array([pool[i] for i in idx])
    counts = rng.integers(1, num_judges + 1, size=m)
    cs = ConstraintSet(n=n, pairs=pairs, counts=counts, num_judges=num_judges)
    return ds, cs


def rand_primal(rng, cs, n):
    ncomp = int(rng.integers(1, 4))
    hyps = [TabularHypothesis(rng.integers(0, 2, size=n))
            for _ in range(ncomp)]
    clf = RandomizedClassifier(hyps, rng.dirichlet(np.ones(ncomp)))
    return PrimalVars(clf, rng.random(cs.num_ordered))


def brute_lagrangian(primal, dual, ds, cs, params):
    """Independent term-by-term recomputation, scalar loops only."""
    rates = positive_rates(primal.classifier, ds.features)
    err = np.mean([1.0 - rates[i] if ds.labels[i] == 1 else rates[i]
                   for i in range(ds.n)])
    op = cs.ordered_pairs()
    w = cs.ordered_weights()
    q = len(op)
    total = err
    for k, (i, j) in enumerate(op):
        disp = rates[i] - rates[j]
        total += dual.lam[k] * (disp - primal.alpha[k] - params.gamma)
    if q:
        total += dual.tau * (sum(w[k] * primal.alpha[k]
                                 for k in range(q)) / q - params.eta)
    return float(total)


def test_params_validation():
    with pytest.raises(ValueError):
        FairnessParams(gamma=-0.1)
    with pytest.raises(ValueError):
        FairnessParams(gamma=0.5, eta=1.2)
    with pytest.raises(ValueError):
        GuaranteeBudgets(c_lambda=0.0, c_tau=1.0, nu=0.1)
    with pytest.raises(ValueError):
        DualVars(np.array([-0.5]), 0.0)
    with pytest.raises(ValueError):
        PrimalVars(single(TabularHypothesis([0])), np.array([1.5]))


def test_error_from_rates():
    rates = np.array([0.2, 0.9, 0.0, 1.0])
    labels = np.array([0, 1, 1, 0])
    # per point: 0.2, 0.1, 1.0, 1.0
    assert abs(error_from_rates(rates, labels) - 0.575) < 1e-12


def test_lagrangian_zero_duals_is_error():
    ds, cs, clf = toy_problem()
    primal = PrimalVars(clf, np.zeros(2))
    dual = DualVars(np.zeros(2), 0.0)
    val = lagrangian_value(primal, dual, ds, cs, FairnessParams(0.3, 0.1))
    assert abs(val - 0.2) < 1e-12  # err = mean rates on all-zero labels


def test_lagrangian_single_pair_arithmetic():
    ds, cs, clf = toy_problem()
    primal = PrimalVars(clf, np.zeros(2))
    # ordered pairs are [(0,1), (1,0)]; put unit weight on (0,1)
    dual = DualVars(np.array([1.0, 0.0]), 0.0)
    val = lagrangian_value(primal, dual, ds, cs, FairnessParams(0.1, 0.0))
    err = 0.2
    assert abs(val - (err + (0.4 - 0.0 - 0.1))) < 1e-12


def test_lagrangian_matches_brute_force():
    rng = np.random.default_rng(21)
    for _ in range(40):
        ds, cs = rand_problem(rng)
        primal = rand_primal(rng, cs, ds.n)
        dual = DualVars(rng.random(cs.num_ordered),
                        float(rng.random()))
        params = FairnessParams(float(rng.random()), float(rng.random()))
        got = lagrangian_value(primal, dual, ds, cs, params)
        want = brute_lagrangian(primal, dual, ds, cs, params)
        assert abs(got - want) < 1e-12
        pen = penalty(primal, dual, ds, cs, params)
        rates = positive_rates(primal.classifier, ds.features)
        assert abs(pen - (got - error_from_rates(rates, ds.labels))) < 1e-12


def test_build_costs_zero_duals():
    ds = Dataset(features=np.zeros((4, 1)),
                 labels=np.array([0, 1, 0, 1]), feature_names=["x"])
    cs = ConstraintSet(n=4, pairs=np.array([[0, 1]]),
                       counts=np.array([1]), num_judges=1)
    inst = build_costs(ds, cs, np.zeros(2))
    # y=0 rows: (0, 1/n); y=1 rows: (1/n, 0)
    assert inst.costs0.tolist() == [0.0, 0.25, 0.0, 0.25]
    assert inst.costs1.tolist() == [0.25, 0.0, 0.25, 0.0]


def test_build_costs_net_flow():
    ds = Dataset(features=np.zeros((3, 1)), labels=np.array([1, 0, 0]),
                 feature_names=["x"])
    cs = ConstraintSet(n=3, pairs=np.array([[0, 1]]),
                       counts=np.array([1]), num_judges=1)
    # ordered pairs [(0,1), (1,0)]: lam_01 = 0.5, lam_10 = 0.2
    inst = build_costs(ds, cs, np.array([0.5, 0.2]))
    assert abs(inst.costs1[0] - 0.3) < 1e-12     # y=1: net = 0.5 - 0.2
    assert abs(inst.costs0[0] - 1 / 3) < 1e-12
    assert abs(inst.costs1[1] - (1 / 3 - 0.3)) < 1e-12  # y=0: 1/n + net
    assert inst.costs0[1] == 0.0
    assert abs(inst.costs1[2] - 1 / 3) < 1e-12   # uninvolved row
    with pytest.raises(ValueError):
        build_costs(ds, cs, np.zeros(3))


def test_separability_identity():
    """csc objective of the reduction costs = err + lam . disparities."""
    rng = np.random.default_rng(22)
    for _ in range(40):
        ds, cs = rand_problem(rng)
        lam = rng.random(cs.num_ordered)
        inst = build_costs(ds, cs, lam)
        h = TabularHypothesis(rng.integers(0, 2, size=ds.n))
        rates = positive_rates(single(h), ds.features)
        op = cs.ordered_pairs()
        disp = rates[op[:, 0]] - rates[op[:, 1]]
        want = error_from_rates(rates, ds.labels) + float(lam @ disp)
        assert abs(csc_objective(h, inst) - want) < 1e-12


def test_alpha_best_response_rule():
    cs = ConstraintSet(n=3, pairs=np.array([[0, 1], [1, 2]]),
                       counts=np.array([1, 1]), num_judges=1)
    # tau*w/|A| = 0.01 < lam = 0.5 -> alpha stays 1
    alpha = best_response_alpha(np.full(4, 0.5), 0.04, cs)
    assert alpha.tolist() == [1.0] * 4
    # lam = 0 and tau > 0 -> alpha drops to 0
    alpha = best_response_alpha(np.zeros(4), 1.0, cs)
    assert alpha.tolist() == [0.0] * 4
    # exact tie takes 1
    alpha = best_response_alpha(np.full(4, 0.25), 1.0, cs)
    assert alpha.tolist() == [1.0] * 4


def test_primal_best_response_zero_duals_is_erm():
    rng = np.random.default_rng(23)
    ds, cs = rand_problem(rng)
    oracle = ExhaustiveTabularOracle(ds.n)
    primal = best_response_primal(DualVars(np.zeros(cs.num_ordered), 0.0),
                                  ds, cs, FairnessParams(0.1), oracle)
    assert len(primal.classifier) == 1
    assert primal.classifier.hypotheses[0].values.tolist() == ds.labels.tolist()
    assert primal.alpha.tolist() == [1.0] * cs.num_ordered


def test_primal_best_response_dominates_enumeration():
    rng = np.random.default_rng(24)
    params = FairnessParams(0.2, 0.05)
    for _ in range(30):
        ds, cs = rand_problem(rng, n=5)
        oracle = ExhaustiveTabularOracle(5)
        lam = rng.random(cs.num_ordered) * rng.choice([0.0, 0.5, 2.0])
        dual = DualVars(lam, float(rng.random() * 2))
        br = best_response_primal(dual, ds, cs, params, oracle)
        best = lagrangian_value(br, dual, ds, cs, params)
        q = cs.num_ordered
        for code in range(2 ** 5):
            h = tabular_from_code(code, 5)
            for bits in itertools.product((0.0, 1.0), repeat=q):
                cand = PrimalVars(single(h), np.array(bits))
                val = lagrangian_value(cand, dual, ds, cs, params)
                assert best <= val + 1e-9


def test_dual_best_response_feasible_point_is_zero():
    ds, cs, clf = toy_problem()
    budgets = GuaranteeBudgets(5.0, 5.0, 0.1)
    # alpha = 1 absorbs the disparity; weighted slack 1 > eta=0 prices tau up,
    # so pick eta = 1 to make the slack constraint loose too
    primal = PrimalVars(clf, np.ones(2))
    dual = best_response_dual(primal, ds, cs, FairnessParams(0.0, 1.0), budgets)
    assert dual.lam.tolist() == [0.0, 0.0] and dual.tau == 0.0
    assert penalty(primal, dual, ds, cs, FairnessParams(0.0, 1.0)) == 0.0


def test_dual_best_response_single_violation():
    ds, cs, clf = toy_problem()
    budgets = GuaranteeBudgets(4.0, 4.0, 0.1)
    params = FairnessParams(0.2, 1.0)
    primal = PrimalVars(clf, np.zeros(2))
    # disparity(0,1) = 0.4 > gamma: margin 0.2 on pair (0,1), -0.6 on (1,0)
    dual = best_response_dual(primal, ds, cs, params, budgets)
    assert dual.lam.tolist() == [4.0, 0.0]
    assert dual.tau == 0.0
    pen = penalty(primal, dual, ds, cs, params)
    assert abs(pen - 4.0 * 0.2) < 1e-12


def test_dual_best_response_dominates_vertices():
    rng = np.random.default_rng(25)
    budgets = GuaranteeBudgets(3.0, 2.0, 0.1)
    for _ in range(30):
        ds, cs = rand_problem(rng)
        params = FairnessParams(float(rng.random() * 0.5),
                                float(rng.random() * 0.5))
        primal = rand_primal(rng, cs, ds.n)
        br = best_response_dual(primal, ds, cs, params, budgets)
        best = lagrangian_value(primal, br, ds, cs, params)
        q = cs.num_ordered
        lams = [np.zeros(q)]
        for k in range(q):
            e = np.zeros(q)
            e[k] = budgets.c_lambda
            lams.append(e)
        for lam in lams:
            for tau in (0.0, budgets.c_tau):
                val = lagrangian_value(primal, DualVars(lam, tau),
                                       ds, cs, params)
                assert best >= val - 1e-9
        assert penalty(primal, br, ds, cs, params) >= 0.0


def test_no_pairs_degenerates_cleanly():
    ds = Dataset(features=np.zeros((3, 1)), labels=np.array([0, 1, 0]),
                 feature_names=["x"])
    cs = ConstraintSet(n=3, pairs=np.empty((0, 2), dtype=int),
                       counts=np.empty(0, dtype=int), num_judges=1)
    primal = PrimalVars(single(TabularHypothesis([0, 1, 0])), np.empty(0))
    dual = best_response_dual(primal, ds, cs, FairnessParams(0.0),
                              GuaranteeBudgets(1.0, 1.0, 0.1))
    assert dual.lam.shape == (0,) and dual.tau == 0.0
    assert lagrangian_value(primal, dual, ds, cs, FairnessParams(0.0)) == 0.0
