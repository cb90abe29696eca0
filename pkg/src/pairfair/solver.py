"""No-regret dynamics for the fairness-constrained training game.

Each round plays the dual (pair prices via exponentiated gradient, the
slack-budget price via projected gradient) against an exact or heuristic
cost-sensitive best response, and the round averages form the output
classifier. Iteration counts, step sizes, and the reported certificates
follow the closed forms that make the averaged play an approximate saddle
point; natural log is used throughout.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .classifiers import (RandomizedClassifier, pair_disparities,
                          positive_rates, single, tabular_from_code)
from .csc import ExhaustiveTabularOracle
from .data import ConstraintSet, Dataset
from .lagrangian import (FairnessParams, GuaranteeBudgets, best_response_alpha,
                         build_costs, error_from_rates)


@dataclass(frozen=True)
class SolverConfig:
    params: FairnessParams
    budgets: GuaranteeBudgets
    t_override: int | None = None
    seed: int = 0
    trajectory_stride: int | None = None

    def __post_init__(self):
        if self.t_override is not None and self.t_override < 1:
            raise ValueError("t_override must be >= 1")
        if self.trajectory_stride is not None and self.trajectory_stride < 1:
            raise ValueError("trajectory_stride must be >= 1")


@dataclass
class GameState:
    """One trajectory's mutable state.

    primal_history keeps the played hypotheses compacted by duplicate
    prediction vectors, with play counts alongside; counts divided by the
    round number recover the uniform average over rounds without storing
    millions of repeats.
    """

    theta: np.ndarray
    tau: float
    iteration: int
    primal_history: list = field(default_factory=list)


def compute_iterations(budgets: GuaranteeBudgets, n: int) -> int:
    """Rounds needed for the target approximation slack nu.

    ceil(((2 c_lambda sqrt(ln n) + c_tau) / nu)^2), natural log.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    root = (2.0 * budgets.c_lambda * math.sqrt(math.log(n)) + budgets.c_tau)
    return math.ceil((root / budgets.nu) ** 2)


def step_sizes(budgets: GuaranteeBudgets, n: int, T: int) -> tuple[float, float]:
    """(mu_lambda, mu_tau) for a T-round run on n points."""
    mu_lambda = math.sqrt(math.log(n) / T) / budgets.c_lambda
    mu_tau = budgets.c_tau / math.sqrt(T)
    return mu_lambda, mu_tau


def lambda_from_theta(theta: np.ndarray, c_lambda: float) -> np.ndarray:
    """Pair prices from EG state: c_lambda * exp(theta) / (1 + sum exp(theta)).

    The +1 term is the implicit no-charge null coordinate. Computed with a
    max shift so large theta cannot overflow: the shift multiplies numerator
    and denominator by exp(-max theta), turning the +1 into exp(-max theta).
    """
    if not len(theta):
        return np.zeros(0, dtype=np.float64)
    m = max(float(theta.max()), 0.0)
    expd = np.exp(theta - m)
    return c_lambda * expd / (math.exp(-m) + float(expd.sum()))


def eg_update(theta: np.ndarray, disparities: np.ndarray, alpha: np.ndarray,
              gamma: float, mu_lambda: float,
              c_lambda: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponentiated-gradient step on the pair prices.

    The step size mu_lambda = (1/c_lambda) sqrt(ln n / T) is stated for the
    cap-scaled simplex, so the exponent moves by mu_lambda * c_lambda per
    unit violation margin: theta += mu_lambda * c_lambda * (disparity -
    alpha - gamma). Only this scaling gives the price player its
    2 c_lambda sqrt(T ln n) regret bound; feeding the raw step into the
    exponent would slow the decay of prices on satisfied constraints by a
    factor of c_lambda and realized regret would overshoot the bound by the
    same factor. Returns the new state and the prices it induces for the
    next round.
    """
    new_theta = theta + mu_lambda * c_lambda * (disparities - alpha - gamma)
    return new_theta, lambda_from_theta(new_theta, c_lambda)


def ogd_update(tau: float, alpha: np.ndarray, constraints: ConstraintSet,
               params: FairnessParams, mu_tau: float, c_tau: float) -> float:
    """Projected gradient step on the slack-budget price."""
    q = constraints.num_ordered
    if q == 0:
        gradient = 0.0
    else:
        gradient = float(constraints.ordered_weights() @ alpha) / q - params.eta
    return min(max(tau + mu_tau * gradient, 0.0), c_tau)


@dataclass
class SolveReport:
    """Averaged play of one run plus everything needed to audit it."""

    classifier: RandomizedClassifier
    avg_alpha: np.ndarray
    train_error: float
    max_violation: float
    weighted_slack: float
    certificate: dict
    trajectory: list[tuple[int, float, float]]
    iterations: int
    params: FairnessParams
    budgets: GuaranteeBudgets
    seed: int
    num_ordered_pairs: int
    constrained: bool = True

    def to_dict(self) -> dict:
        return {
            "classifier": self.classifier.to_dict(),
            "avg_alpha": [float(a) for a in self.avg_alpha],
            "train_error": self.train_error,
            "max_violation": self.max_violation,
            "weighted_slack": self.weighted_slack,
            "certificate": self.certificate,
            "trajectory": [[int(t), float(e), float(d)]
                           for t, e, d in self.trajectory],
            "iterations": self.iterations,
            "gamma": self.params.gamma,
            "eta": self.params.eta,
            "c_lambda": self.budgets.c_lambda,
            "c_tau": self.budgets.c_tau,
            "nu": self.budgets.nu,
            "seed": self.seed,
            "num_ordered_pairs": self.num_ordered_pairs,
            "constrained": self.constrained,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SolveReport":
        return cls(
            classifier=RandomizedClassifier.from_dict(payload["classifier"]),
            avg_alpha=np.asarray(payload["avg_alpha"], dtype=np.float64),
            train_error=float(payload["train_error"]),
            max_violation=float(payload["max_violation"]),
            weighted_slack=float(payload["weighted_slack"]),
            certificate=dict(payload["certificate"]),
            trajectory=[(int(t), float(e), float(d))
                        for t, e, d in payload["trajectory"]],
            iterations=int(payload["iterations"]),
            params=FairnessParams(payload["gamma"], payload["eta"]),
            budgets=GuaranteeBudgets(payload["c_lambda"], payload["c_tau"],
                                     payload["nu"]),
            seed=int(payload["seed"]),
            num_ordered_pairs=int(payload["num_ordered_pairs"]),
            constrained=bool(payload["constrained"]),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "SolveReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _certificate(T: int, n: int, budgets: GuaranteeBudgets,
                 realized_lambda: float, realized_tau: float,
                 max_margin: float, slack_excess: float,
                 mu_lambda: float, mu_tau: float) -> dict:
    """Realized dual regrets against the best fixed vertex in hindsight."""
    hindsight_lambda = T * budgets.c_lambda * max(0.0, max_margin)
    hindsight_tau = T * budgets.c_tau * max(0.0, slack_excess)
    regret_lambda = hindsight_lambda - realized_lambda
    regret_tau = hindsight_tau - realized_tau
    bound_lambda = 2.0 * budgets.c_lambda * math.sqrt(T * math.log(n))
    bound_tau = budgets.c_tau * math.sqrt(T)
    return {
        "realized_lambda_payoff": realized_lambda,
        "realized_tau_payoff": realized_tau,
        "regret_lambda": regret_lambda,
        "regret_tau": regret_tau,
        "regret_bound_lambda": bound_lambda,
        "regret_bound_tau": bound_tau,
        "xi_realized": (regret_lambda + regret_tau) / T,
        "xi_bound": (bound_lambda + bound_tau) / T,
        "mu_lambda": mu_lambda,
        "mu_tau": mu_tau,
        "n": n,
    }


def _unconstrained_report(dataset: Dataset, constraints: ConstraintSet,
                          config: SolverConfig, oracle, T: int,
                          mu_lambda: float, mu_tau: float) -> SolveReport:
    """Cases where the program is plain risk minimization.

    Either no pair carries a constraint, or gamma >= 1 makes every pair
    constraint vacuous (disparities live in [-1, 1], so disparity <= alpha
    + gamma holds at alpha = 0 whatever eta is). One oracle call on
    zero-price costs gives the exact optimum; the report keeps alpha = 0
    and states the true disparities of that single hypothesis.
    """
    empty = ConstraintSet(n=dataset.n, pairs=np.empty((0, 2), dtype=np.int64),
                          counts=np.empty(0, dtype=np.int64), num_judges=1)
    inst = build_costs(dataset, empty, np.zeros(0))
    hypothesis = oracle.solve(inst)
    preds = hypothesis.predictions(dataset.features)
    err = float((preds != dataset.labels).mean())
    q = constraints.num_ordered
    if q:
        op = constraints.ordered_pairs()
        disp = (preds[op[:, 0]] - preds[op[:, 1]]).astype(np.float64)
        max_violation = float((disp - config.params.gamma).max())
        max_margin = max_violation
    else:
        max_violation = 0.0
        max_margin = 0.0
    certificate = _certificate(T, dataset.n, config.budgets, 0.0, 0.0,
                               min(max_margin, 0.0), -config.params.eta,
                               mu_lambda, mu_tau)
    return SolveReport(
        classifier=single(hypothesis), avg_alpha=np.zeros(q),
        train_error=err, max_violation=max_violation, weighted_slack=0.0,
        certificate=certificate, trajectory=[(T, err, 0.0)], iterations=T,
        params=config.params, budgets=config.budgets, seed=config.seed,
        num_ordered_pairs=q, constrained=False)


def solve(dataset: Dataset, constraints: ConstraintSet, config: SolverConfig,
          oracle) -> SolveReport:
    """Run the dynamics and return the averaged classifier with certificates.

    Deterministic: identical inputs give identical reports. The compiled
    fast path handles the exhaustive tabular oracle; every other oracle goes
    through the generic loop. Both paths implement the same update order:
    prices from the previous round's state, then the best response, then
    the price-state step.
    """
    if constraints.n != dataset.n:
        raise ValueError("constraints were built for a different dataset size")
    n = dataset.n
    T = config.t_override or compute_iterations(config.budgets, n)
    mu_lambda, mu_tau = step_sizes(config.budgets, n, T)
    stride = config.trajectory_stride or max(1, T // 512)
    params, budgets = config.params, config.budgets

    q = constraints.num_ordered
    if q == 0 or params.gamma >= 1.0:
        return _unconstrained_report(dataset, constraints, config, oracle, T,
                                     mu_lambda, mu_tau)

    op = constraints.ordered_pairs()
    w_ord = constraints.ordered_weights()
    pair_i = np.ascontiguousarray(op[:, 0])
    pair_j = np.ascontiguousarray(op[:, 1])

    use_kernel = (_kernels.HAVE_NUMBA
                  and isinstance(oracle, ExhaustiveTabularOracle)
                  and n <= 20)
    if use_kernel:
        (counts, alpha_sum, disp_sum, lam_sum, tau_sum, err_sum,
         realized_lam, realized_tau, traj_iter, traj_err, traj_disp) = (
            _kernels.run_tabular_dynamics(
                dataset.labels.astype(np.int8), pair_i, pair_j, w_ord,
                params.gamma, params.eta, budgets.c_lambda, budgets.c_tau,
                T, mu_lambda, mu_tau, stride))
        codes = np.flatnonzero(counts)
        hyps = [tabular_from_code(int(c), n) for c in codes]
        weights = counts[codes] / T
        trajectory = [(int(t), float(e), float(d))
                      for t, e, d in zip(traj_iter, traj_err, traj_disp)]
    else:
        (hyps, weights, alpha_sum, disp_sum, err_sum, realized_lam,
         realized_tau, trajectory) = _generic_loop(
            dataset, constraints, params, budgets, oracle, T,
            mu_lambda, mu_tau, stride, pair_i, pair_j, w_ord)

    avg_alpha = alpha_sum / T
    disp_avg = disp_sum / T
    margins = disp_avg - avg_alpha - params.gamma
    max_violation = float(margins.max())
    weighted_slack = float(w_ord @ avg_alpha) / q
    certificate = _certificate(T, n, budgets, realized_lam, realized_tau,
                               float(margins.max()),
                               weighted_slack - params.eta, mu_lambda, mu_tau)
    classifier = RandomizedClassifier(hyps, np.asarray(weights, dtype=np.float64))
    return SolveReport(
        classifier=classifier, avg_alpha=avg_alpha,
        train_error=err_sum / T, max_violation=max_violation,
        weighted_slack=weighted_slack, certificate=certificate,
        trajectory=trajectory, iterations=T, params=params, budgets=budgets,
        seed=config.seed, num_ordered_pairs=q, constrained=True)


def _generic_loop(dataset, constraints, params, budgets, oracle, T,
                  mu_lambda, mu_tau, stride, pair_i, pair_j, w_ord):
    """Reference implementation of the round loop for arbitrary oracles."""
    n, q = dataset.n, len(w_ord)
    labels = dataset.labels
    state = GameState(theta=np.zeros(q, dtype=np.float64), tau=0.0,
                      iteration=0)
    lam = lambda_from_theta(state.theta, budgets.c_lambda)
    alpha = np.zeros(q, dtype=np.float64)

    reps: dict[bytes, int] = {}
    hyp_counts: list[int] = []
    alpha_sum = np.zeros(q, dtype=np.float64)
    disp_sum = np.zeros(q, dtype=np.float64)
    err_sum = 0.0
    realized_lam = 0.0
    realized_tau = 0.0
    trajectory: list[tuple[int, float, float]] = []

    for t in range(1, T + 1):
        state.iteration = t
        state.tau = ogd_update(state.tau, alpha, constraints, params, mu_tau,
                               budgets.c_tau)
        inst = build_costs(dataset, constraints, lam)
        try:
            hypothesis = oracle.solve(inst)
        except Exception as exc:
            raise RuntimeError(f"oracle failed at iteration {t}: {exc}") from exc
        preds = hypothesis.predictions(dataset.features)
        alpha = best_response_alpha(lam, state.tau, constraints)
        disp = (preds[pair_i] - preds[pair_j]).astype(np.float64)
        margins = disp - alpha - params.gamma
        realized_lam += float(lam @ margins)
        realized_tau += state.tau * (float(w_ord @ alpha) / q - params.eta)

        key = np.ascontiguousarray(preds).tobytes()
        idx = reps.get(key)
        if idx is None:
            reps[key] = len(state.primal_history)
            state.primal_history.append(hypothesis)
            hyp_counts.append(1)
        else:
            hyp_counts[idx] += 1
        err_sum += float((preds != labels).mean())
        alpha_sum += alpha
        disp_sum += disp

        state.theta, lam = eg_update(state.theta, disp, alpha, params.gamma,
                                     mu_lambda, budgets.c_lambda)
        if t % stride == 0 or t == T:
            trajectory.append((t, err_sum / t, float(disp_sum.max()) / t))

    weights = np.array(hyp_counts, dtype=np.float64) / T
    return (state.primal_history, weights, alpha_sum, disp_sum, err_sum,
            realized_lam, realized_tau, trajectory)


def certify(report: SolveReport, dataset: Dataset, constraints: ConstraintSet,
            params: FairnessParams, budgets: GuaranteeBudgets) -> dict:
    """Recompute the dual-regret certificate from the report and raw inputs.

    Independently re-derives the best fixed dual vertex in hindsight from
    the averaged classifier's disparities and compares realized regrets
    against the closed-form online-learning bounds.
    """
    if not report.trajectory:
        raise ValueError("report has no trajectory; rerun solve with retention")
    T = report.iterations
    n = dataset.n
    op = constraints.ordered_pairs()
    q = len(op)
    if q:
        disp = pair_disparities(report.classifier, dataset.features, op)
        margins = disp - report.avg_alpha - params.gamma
        max_margin = float(margins.max())
        slack_excess = (float(constraints.ordered_weights() @ report.avg_alpha)
                        / q - params.eta)
    else:
        max_margin, slack_excess = 0.0, -params.eta
    cert = report.certificate
    hindsight_lambda = T * budgets.c_lambda * max(0.0, max_margin)
    hindsight_tau = T * budgets.c_tau * max(0.0, slack_excess)
    regret_lambda = hindsight_lambda - cert["realized_lambda_payoff"]
    regret_tau = hindsight_tau - cert["realized_tau_payoff"]
    bound_lambda = 2.0 * budgets.c_lambda * math.sqrt(T * math.log(n))
    bound_tau = budgets.c_tau * math.sqrt(T)
    rates = positive_rates(report.classifier, dataset.features)
    return {
        "regret_lambda": regret_lambda,
        "regret_tau": regret_tau,
        "regret_bound_lambda": bound_lambda,
        "regret_bound_tau": bound_tau,
        "lambda_within_bound": regret_lambda <= bound_lambda,
        "tau_within_bound": regret_tau <= bound_tau,
        "xi_realized": (regret_lambda + regret_tau) / T,
        "max_violation_recomputed": max_margin,
        "train_error_recomputed": error_from_rates(rates, dataset.labels),
        "max_violation_consistent":
            abs(max_margin - report.max_violation) <= 1e-9,
    }


@dataclass
class SweepPoint:
    gamma: float
    eta: float
    error: float = math.nan
    max_violation: float = math.nan
    weighted_slack: float = math.nan
    fairness_loss: float = math.nan
    ok: bool = True
    message: str = ""


def _solve_point(args) -> SweepPoint:
    dataset, constraints, config, oracle, gamma, eta = args
    from .metrics import fairness_loss_set

    try:
        point_config = replace(config, params=FairnessParams(gamma, eta))
        report = solve(dataset, constraints, point_config, oracle)
        if constraints.num_ordered:
            loss = fairness_loss_set(report.classifier, dataset, constraints,
                                     gamma).mean
        else:
            loss = 0.0
        return SweepPoint(gamma, eta, report.train_error,
                          report.max_violation, report.weighted_slack, loss)
    except Exception as exc:
        return SweepPoint(gamma, eta, ok=False, message=str(exc))


def pareto_sweep(dataset: Dataset, constraints: ConstraintSet,
                 config: SolverConfig, gamma_grid, eta_grid, oracle,
                 workers: int = 1) -> list[SweepPoint]:
    """One solve per (gamma, eta) grid point; failures recorded, sweep continues.

    Rows come back in grid order: gamma outer, eta inner.
    """
    gammas = [float(g) for g in gamma_grid]
    etas = [float(e) for e in eta_grid]
    if not gammas or not etas:
        raise ValueError("grids must be non-empty")
    if any(not 0.0 <= g <= 1.0 for g in gammas + etas):
        raise ValueError("grid values must lie in [0, 1]")
    jobs = [(dataset, constraints, config, oracle, g, e)
            for g in gammas for e in etas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_point, jobs))
    return [_solve_point(j) for j in jobs]


def write_curve(path: str, points: list[SweepPoint]) -> None:
    """Plot-ready comma-separated rows, one per grid point."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gamma,eta,error,max_violation,weighted_slack,fairness_loss\n")
        for p in points:
            fh.write(f"{p.gamma!r},{p.eta!r},{p.error!r},{p.max_violation!r},"
                     f"{p.weighted_slack!r},{p.fairness_loss!r}\n")


def read_curve(path: str) -> list[SweepPoint]:
    points = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        expected = ["gamma", "eta", "error", "max_violation",
                    "weighted_slack", "fairness_loss"]
        if header != expected:
            raise ValueError(f"unexpected curve header: {header}")
        for line in fh:
            if not line.strip():
                continue
            g, e, err, mv, ws, fl = (float(v) for v in line.strip().split(","))
            points.append(SweepPoint(g, e, err, mv, ws, fl,
                                     ok=not math.isnan(err)))
    return points
