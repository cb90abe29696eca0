"""Compiled inner loop for the exhaustive-tabular-oracle dynamics.

The closed-form per-row oracle lets the whole iteration run without object
dispatch, which matters because the guarantee-driven iteration counts reach
millions. Semantics match the generic loop in solver.solve exactly; the
equivalence is covered by tests.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def run_tabular_dynamics(labels, pair_i, pair_j, w_ord, gamma, eta,
                         c_lambda, c_tau, T, mu_lambda, mu_tau, stride):
    """Run the full T-round game for the all-labelings oracle.

    Returns accumulators sufficient to reconstruct the averaged classifier
    (labeling-code counts), the average slacks, disparities, realized dual
    payoffs, and trajectory samples of the running average.
    """
    n = labels.shape[0]
    q = pair_i.shape[0]
    inv_n = 1.0 / n
    inv_q = 1.0 / q
    # the stated price step acts on the cap-scaled simplex, so the exponent
    # moves by mu_lambda * c_lambda per unit margin (see solver.eg_update)
    mu_theta = mu_lambda * c_lambda

    theta = np.zeros(q, dtype=np.float64)
    lam = np.zeros(q, dtype=np.float64)
    alpha_prev = np.zeros(q, dtype=np.float64)
    net = np.zeros(n, dtype=np.float64)
    preds = np.zeros(n, dtype=np.int8)

    counts = np.zeros(2 ** n, dtype=np.int64)
    alpha_sum = np.zeros(q, dtype=np.float64)
    disp_sum = np.zeros(q, dtype=np.float64)
    lam_sum = np.zeros(q, dtype=np.float64)
    tau_sum = 0.0
    err_sum = 0.0
    realized_lam = 0.0
    realized_tau = 0.0
    tau = 0.0

    n_rows = T // stride + (1 if T % stride != 0 else 0)
    traj_iter = np.zeros(n_rows, dtype=np.int64)
    traj_err = np.zeros(n_rows, dtype=np.float64)
    traj_disp = np.zeros(n_rows, dtype=np.float64)
    row = 0

    for t in range(1, T + 1):
        # lambda for this round, from theta of the previous round; the +1
        # null coordinate is shifted consistently so exp never overflows
        m = 0.0
        for k in range(q):
            if theta[k] > m:
                m = theta[k]
        z = np.exp(-m)
        for k in range(q):
            lam[k] = np.exp(theta[k] - m)
            z += lam[k]
        scale = c_lambda / z
        for k in range(q):
            lam[k] *= scale

        # tau for this round, projected step on the previous round's alpha
        g = 0.0
        for k in range(q):
            g += w_ord[k] * alpha_prev[k]
        tau += mu_tau * (g * inv_q - eta)
        if tau < 0.0:
            tau = 0.0
        elif tau > c_tau:
            tau = c_tau

        # classifier best response: per-row cost comparison
        for i in range(n):
            net[i] = 0.0
        for k in range(q):
            net[pair_i[k]] += lam[k]
            net[pair_j[k]] -= lam[k]
        code = 0
        err_round = 0.0
        for i in range(n):
            if labels[i] == 0:
                c0 = 0.0
                c1 = inv_n + net[i]
            else:
                c0 = inv_n
                c1 = net[i]
            if c1 < c0:
                preds[i] = 1
                code |= 1 << i
                if labels[i] == 0:
                    err_round += inv_n
            else:
                preds[i] = 0
                if labels[i] == 1:
                    err_round += inv_n
        counts[code] += 1
        err_sum += err_round

        # slack best response, payoffs, and the theta step for next round
        slack_w = 0.0
        for k in range(q):
            a = 1.0 if tau * w_ord[k] * inv_q - lam[k] <= 0.0 else 0.0
            alpha_prev[k] = a
            alpha_sum[k] += a
            d = float(preds[pair_i[k]]) - float(preds[pair_j[k]])
            disp_sum[k] += d
            margin = d - a - gamma
            realized_lam += lam[k] * margin
            theta[k] += mu_theta * margin
            lam_sum[k] += lam[k]
            slack_w += w_ord[k] * a
        realized_tau += tau * (slack_w * inv_q - eta)
        tau_sum += tau

        if t % stride == 0 or t == T:
            max_disp = disp_sum[0]
            for k in range(1, q):
                if disp_sum[k] > max_disp:
                    max_disp = disp_sum[k]
            traj_iter[row] = t
            traj_err[row] = err_sum / t
            traj_disp[row] = max_disp / t
            row += 1

    return (counts, alpha_sum, disp_sum, lam_sum, tau_sum, err_sum,
            realized_lam, realized_tau,
            traj_iter[:row], traj_err[:row], traj_disp[:row])
