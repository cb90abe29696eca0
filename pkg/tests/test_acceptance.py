"""End-to-end acceptance checks, one test per guarantee.

The solver trials compare against an independent linear program over the
full labeling simplex, so everything here runs on small tabular pools or
synthetic data. The final test needs the external recidivism export and
is skipped unless PAIRFAIR_COMPAS_CSV points at the prepared table.
"""

import os
import time

import numpy as np
import pytest
from lp_oracle import exact_optimum, full_labeling_matrix
from make_instances import random_instance

from pairfair.classifiers import (LinearThreshold, RandomizedClassifier,
                                  positive_rates, single, sparsify,
                                  sparsify_size, tabular_from_code)
from pairfair.csc import (ExhaustiveTabularOracle, LeastSquaresOracle,
                          csc_objective)
from pairfair.data import (ConstraintSet, Dataset, SyntheticJudgeSpec,
                           build_constraints, load_dataset, sample_pairs,
                           simulate_judge, stable_seed)
from pairfair.lagrangian import (DualVars, FairnessParams, GuaranteeBudgets,
                                 PrimalVars, best_response_dual,
                                 best_response_primal, build_costs,
                                 lagrangian_value)
from pairfair.metrics import (BoundInputs, fairness_generalization_bound,
                              fairness_loss_set)
from pairfair.solver import SolverConfig, certify, pareto_sweep, solve

TRIAL_BUDGETS = GuaranteeBudgets(c_lambda=20.0, c_tau=20.0, nu=0.05)


def empty_constraints(n: int) -> ConstraintSet:
    return ConstraintSet(n=n, pairs=np.empty((0, 2), dtype=np.int64),
                         counts=np.empty(0, dtype=np.int64), num_judges=1)


def blob_dataset(rng, n):
    half = n // 2
    X = np.vstack([rng.normal([-1.0, 0.0], 0.6, size=(half, 2)),
                   rng.normal([1.0, 0.0], 0.6, size=(half, 2))])
    y = np.array([0] * half + [1] * half)
    perm = rng.permutation(n)
    return Dataset(features=X[perm], labels=y[perm].astype(np.int8),
                   feature_names=("f0", "f1"))


@pytest.fixture(scope="module")
def dynamics_trials():
    """50 random instances solved once, shared by the next three tests."""
    rng = np.random.default_rng(20240817)
    rows = []
    start = time.time()
    for _ in range(50):
        ds, cs, gamma, eta = random_instance(rng)
        params = FairnessParams(gamma=gamma, eta=eta)
        config = SolverConfig(params=params, budgets=TRIAL_BUDGETS)
        report = solve(ds, cs, config, ExhaustiveTabularOracle(ds.n))
        cert = certify(report, ds, cs, params, TRIAL_BUDGETS)
        opt = exact_optimum(ds.labels, cs.ordered_pairs(),
                            cs.ordered_weights(), gamma, eta)
        rows.append((params, report, cert, opt))
    print(f"\n50 trials solved in {time.time() - start:.1f}s")
    return rows


def test_error_within_two_nu_of_lp_optimum(dynamics_trials):
    gaps = [report.train_error - opt
            for _, report, _, opt in dynamics_trials]
    worst = max(gaps)
    print(f"optimality: worst error-minus-OPT gap {worst:+.3e} "
          f"(allowed {2 * TRIAL_BUDGETS.nu:.2f})")
    assert worst <= 2 * TRIAL_BUDGETS.nu + 1e-6


def test_feasibility_within_budget_caps(dynamics_trials):
    viol_cap = (1.0 + 2.0 * TRIAL_BUDGETS.nu) / TRIAL_BUDGETS.c_lambda
    slack_cap = (1.0 + 2.0 * TRIAL_BUDGETS.nu) / TRIAL_BUDGETS.c_tau
    worst_viol = max(r.max_violation for _, r, _, _ in dynamics_trials)
    worst_slack = max(r.weighted_slack - p.eta
                      for p, r, _, _ in dynamics_trials)
    print(f"feasibility: worst violation {worst_viol:+.3e} "
          f"(cap {viol_cap:.3f}), worst slack excess {worst_slack:+.3e} "
          f"(cap {slack_cap:.3f})")
    assert worst_viol <= viol_cap + 1e-6
    assert worst_slack <= slack_cap + 1e-6


def test_dual_regrets_within_closed_form_bounds(dynamics_trials):
    worst_lam = max(c["regret_lambda"] - c["regret_bound_lambda"]
                    for _, _, c, _ in dynamics_trials)
    worst_tau = max(c["regret_tau"] - c["regret_bound_tau"]
                    for _, _, c, _ in dynamics_trials)
    print(f"regret: worst margins lambda {worst_lam:+.3e}, "
          f"tau {worst_tau:+.3e} (never above zero)")
    assert worst_lam <= 0.0
    assert worst_tau <= 0.0
    assert all(c["max_violation_consistent"]
               for _, _, c, _ in dynamics_trials)


def test_best_responses_match_exhaustive_enumeration():
    rng = np.random.default_rng(11)
    budgets = GuaranteeBudgets(20.0, 20.0, 0.05)

    for _ in range(200):
        ds, cs, gamma, eta = random_instance(rng, n_range=(3, 5))
        params = FairnessParams(gamma, eta)
        q = cs.num_ordered
        dual = DualVars(rng.uniform(0.0, budgets.c_lambda, size=q),
                        float(rng.uniform(0.0, budgets.c_tau)))
        primal = best_response_primal(dual, ds, cs, params,
                                      ExhaustiveTabularOracle(ds.n))
        achieved = lagrangian_value(primal, dual, ds, cs, params)

        # full table of the objective over every (labeling, alpha-vertex)
        H = full_labeling_matrix(ds.n)
        errs = (H != ds.labels[None, :]).mean(axis=1)
        op = cs.ordered_pairs()
        disp = H[:, op[:, 0]] - H[:, op[:, 1]]
        V = full_labeling_matrix(q)
        w = cs.ordered_weights()
        table = (errs[:, None] + (disp @ dual.lam)[:, None]
                 - (V @ dual.lam)[None, :]
                 - float(dual.lam.sum()) * params.gamma
                 + dual.tau * ((V @ w) / q - params.eta)[None, :])
        assert achieved <= table.min() + 1e-9

    for _ in range(200):
        ds, cs, gamma, eta = random_instance(rng, n_range=(3, 5))
        params = FairnessParams(gamma, eta)
        q = cs.num_ordered
        k = int(rng.integers(1, 4))
        hyps = [tabular_from_code(int(c), ds.n)
                for c in rng.integers(0, 2 ** ds.n, size=k)]
        primal = PrimalVars(RandomizedClassifier(hyps, rng.dirichlet(np.ones(k))),
                            rng.uniform(0.0, 1.0, size=q))
        response = best_response_dual(primal, ds, cs, params, budgets)
        achieved = lagrangian_value(primal, response, ds, cs, params)
        vertices = [np.zeros(q)] + [budgets.c_lambda * v
                                    for v in np.eye(q)]
        best = max(lagrangian_value(primal, DualVars(lam, tau), ds, cs, params)
                   for lam in vertices for tau in (0.0, budgets.c_tau))
        assert achieved >= best - 1e-9
    print("best responses matched enumeration on 200 + 200 draws")


def test_lagrangian_separates_into_cost_objective_plus_offset():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        ds, cs, gamma, eta = random_instance(rng, n_range=(3, 7))
        params = FairnessParams(gamma, eta)
        q = cs.num_ordered
        lam = rng.uniform(0.0, 10.0, size=q)
        tau = float(rng.uniform(0.0, 10.0))
        hyp = tabular_from_code(int(rng.integers(0, 2 ** ds.n)), ds.n)
        alpha = rng.uniform(0.0, 1.0, size=q)
        primal = PrimalVars(single(hyp), alpha)
        total = lagrangian_value(primal, DualVars(lam, tau), ds, cs, params)

        w = cs.ordered_weights()
        offset = (-float(lam @ (alpha + params.gamma))
                  + tau * (float(w @ alpha) / q - params.eta))
        split = csc_objective(hyp, build_costs(ds, cs, lam)) + offset
        worst = max(worst, abs(total - split))
    print(f"separability: worst split error {worst:.2e} over 1000 states")
    assert worst <= 1e-12


def test_violation_trajectory_saturates_at_allowed_level():
    rng = np.random.default_rng(42)
    ds = blob_dataset(rng, 500)
    pair_set = sample_pairs(500, 300, seed=7)
    judge = SyntheticJudgeSpec(kind="metric-threshold",
                               feature_weights=[1.0, 1.0], threshold=2.5,
                               seed=3)
    cs = build_constraints(simulate_judge(ds, pair_set, judge), pair_set, 1)
    config = SolverConfig(params=FairnessParams(gamma=0.3, eta=0.0),
                          budgets=GuaranteeBudgets(30.0, 600.0, 0.05),
                          t_override=6000, trajectory_stride=25)
    report = solve(ds, cs, config, LeastSquaresOracle())
    tail = [d for t, _, d in report.trajectory if t >= 2000]
    assert tail
    print(f"convergence: {cs.num_ordered} ordered pairs, tail max disparity "
          f"{max(tail):.3f} (allowed 0.32), error {report.train_error:.3f}")
    assert max(tail) <= 0.32


def test_tradeoff_curve_endpoints_and_monotonicity():
    n = 20
    feats = np.linspace(-1.0, 1.0, n).reshape(-1, 1)
    labels = (np.arange(n) >= n // 2).astype(np.int8)
    ds = Dataset(features=feats, labels=labels, feature_names=("x",))
    pairs = np.sort(np.array([[i, n - 1 - i] for i in range(n // 2)],
                             dtype=np.int64), axis=1)
    cs = ConstraintSet(n=n, pairs=pairs,
                       counts=np.ones(n // 2, dtype=np.int64), num_judges=1)
    budgets = GuaranteeBudgets(c_lambda=5.0, c_tau=5.0, nu=0.008)
    config = SolverConfig(params=FairnessParams(0.0, 0.0), budgets=budgets)
    gammas = [round(0.1 * k, 1) for k in range(11)]
    points = pareto_sweep(ds, cs, config, gammas, [0.0],
                          ExhaustiveTabularOracle(n))
    assert all(p.ok for p in points)

    erm = solve(ds, empty_constraints(n), config, ExhaustiveTabularOracle(n))
    assert points[-1].error == erm.train_error  # vacuous endpoint is plain ERM
    assert points[-1].error == 0.0

    prev = None
    for p in points:
        assert p.error <= (1.0 - p.gamma) / 2.0 + 0.02  # mixing baseline
        if prev is not None:
            assert p.error <= prev + 2 * budgets.nu + 1e-3
        prev = p.error
    print("tradeoff curve: " + " ".join(f"{p.error:.3f}" for p in points))


def test_sparsify_twenty_of_twenty_seeds_with_full_scan():
    rng = np.random.default_rng(123)
    n, d, pool = 50, 3, 300
    feats = rng.normal(size=(n, d))
    hyps = [LinearThreshold(weights=rng.normal(size=d),
                            bias=float(rng.normal())) for _ in range(pool)]
    clf = RandomizedClassifier(hypotheses=hyps,
                               weights=rng.dirichlet(np.ones(pool)))
    dense = positive_rates(clf, feats)
    assert sparsify_size(n, 0.2) == 427

    worst = 0.0
    for seed in range(20):
        res = sparsify(clf, feats, eps=0.2, seed=seed)
        assert res.k == 427
        assert res.attempts <= 100
        sparse = positive_rates(res.classifier, feats)
        scan = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    scan = max(scan, abs((dense[i] - dense[j])
                                         - (sparse[i] - sparse[j])))
        assert abs(scan - res.deviation) <= 1e-12
        assert scan <= 0.2
        worst = max(worst, scan)
    print(f"sparsify: 20/20 seeds, worst scanned deviation {worst:.4f}")


def test_train_heldout_fairness_gap_and_reported_bound():
    gamma = 0.3
    budgets = GuaranteeBudgets(c_lambda=30.0, c_tau=600.0, nu=0.05)
    gaps = []
    for seed in range(20):
        rng = np.random.default_rng(stable_seed("genexp", seed))
        full = blob_dataset(rng, 400)
        train = Dataset(features=full.features[:200],
                        labels=full.labels[:200],
                        feature_names=full.feature_names)
        held = Dataset(features=full.features[200:],
                       labels=full.labels[200:],
                       feature_names=full.feature_names)
        judge = SyntheticJudgeSpec(kind="metric-threshold",
                                   feature_weights=[1.0, 1.0], threshold=2.5,
                                   seed=seed)
        ps_train = sample_pairs(200, 150,
                                seed=stable_seed("genexp-pairs", seed, 0))
        cs_train = build_constraints(simulate_judge(train, ps_train, judge),
                                     ps_train, 1)
        config = SolverConfig(params=FairnessParams(gamma=gamma, eta=0.0),
                              budgets=budgets, t_override=2000,
                              trajectory_stride=100)
        report = solve(train, cs_train, config, LeastSquaresOracle())
        ps_held = sample_pairs(200, 150,
                               seed=stable_seed("genexp-pairs", seed, 1))
        cs_held = build_constraints(simulate_judge(held, ps_held, judge),
                                    ps_held, 1)
        loss_train = fairness_loss_set(report.classifier, train, cs_train,
                                       gamma).mean
        loss_held = fairness_loss_set(report.classifier, held, cs_held,
                                      gamma).mean
        gaps.append(abs(loss_train - loss_held))
    gaps = np.array(gaps)
    passed = int((gaps <= 0.1).sum())

    bound = fairness_generalization_bound(
        BoundInputs(n=200, m=150, vc_dim=3, epsilon=0.1))
    print(f"generalization: {passed}/20 gaps <= 0.1 (max {gaps.max():.4f}); "
          f"formal bound log-value {bound.log_value:.1f}, "
          f"vacuous: {bound.vacuous}")
    assert passed >= 18
    assert bound.vacuous  # the formal guarantee says nothing at n = 200


@pytest.mark.skipif("PAIRFAIR_COMPAS_CSV" not in os.environ,
                    reason="set PAIRFAIR_COMPAS_CSV to the table written by "
                           "scripts/prepare_compas.py")
def test_recidivism_export_headline_numbers():
    """Optional external-data check; takes a minute or two.

    The published subject judgments are not available, so the worst-case
    endpoint uses an adversarial pairing of the highest- and lowest-score
    records, which forces near-random accuracy at gamma = 0.
    """
    ds = load_dataset(os.environ["PAIRFAIR_COMPAS_CSV"])
    assert ds.n == 5829
    base_rate = float(ds.labels.mean())
    assert abs(base_rate - 0.46) <= 0.005

    budgets = GuaranteeBudgets(c_lambda=30.0, c_tau=600.0, nu=0.05)
    erm_config = SolverConfig(params=FairnessParams(1.0, 0.0),
                              budgets=budgets, t_override=1)
    erm = solve(ds, empty_constraints(ds.n), erm_config, LeastSquaresOracle())
    assert abs(erm.train_error - 0.32) <= 0.02

    model = erm.classifier.hypotheses[0]
    scores = ds.features @ model.weights + model.bias
    order = np.argsort(scores)
    pairs = np.sort(np.array([[order[k], order[-1 - k]] for k in range(50)],
                             dtype=np.int64), axis=1)
    cs = ConstraintSet(n=ds.n, pairs=pairs,
                       counts=np.ones(50, dtype=np.int64), num_judges=1)
    hard_config = SolverConfig(params=FairnessParams(0.0, 0.0),
                               budgets=budgets, t_override=3000,
                               trajectory_stride=100)
    hard = solve(ds, cs, hard_config, LeastSquaresOracle())
    print(f"external data: base rate {base_rate:.3f}, erm error "
          f"{erm.train_error:.3f}, hard gamma=0 error {hard.train_error:.3f}")
    assert abs(hard.train_error - 0.5) <= 0.06
