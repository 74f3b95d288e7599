"""Reference computations that share no code with the package under test.

Everything here works on plain dicts, itertools and numpy so that agreement
with the engine is evidence rather than tautology.
"""
import itertools
from fractions import Fraction

import numpy as np


def bayes_by_enumeration(prior, likelihood, datum):
    """Posterior over hypotheses after ``datum``: ``prior[h] * likelihood[h][datum]``
    normalised by brute force."""
    unnorm = {h: prior[h] * likelihood[h].get(datum, Fraction(0)) for h in prior}
    total = sum(unnorm.values())
    return {h: w / total for h, w in unnorm.items()}


def monty_joint(choice="1"):
    """Exhaustive joint over (prize, opened) for a fixed contestant choice.

    The host opens a door that is neither the chosen one nor the prize door,
    picking uniformly when two such doors exist.
    """
    doors = ("1", "2", "3")
    joint = {}
    for prize in doors:
        allowed = [d for d in doors if d != choice and d != prize]
        for opened in allowed:
            joint[(prize, opened)] = Fraction(1, 3) / len(allowed)
    return joint


def monty_posterior(opened, choice="1"):
    joint = monty_joint(choice)
    mass = {p: w for (p, o), w in joint.items() if o == opened}
    total = sum(mass.values())
    return {p: w / total for p, w in mass.items()}


def hmm_filter_by_paths(initial, transitions, sensors, observations):
    """Filtered state laws from summing over every state path.

    ``initial`` maps state -> weight, ``transitions[k][s][s2]`` and
    ``sensors[k][s][y]`` are nested dicts.
    """
    out = []
    for t in range(len(observations)):
        acc = {}
        for path in itertools.product(*[list(initial)] * (t + 1)):
            w = initial[path[0]]
            for k in range(t):
                w *= transitions[k][path[k]][path[k + 1]]
            for k in range(t + 1):
                w *= sensors[k][path[k]][observations[k]]
            acc[path[-1]] = acc.get(path[-1], Fraction(0)) + w
        total = sum(acc.values())
        out.append({s: w / total for s, w in acc.items()})
    return out


def textbook_kalman(A, Q, H, R, m0, P0, ys):
    """Gain-form Kalman filter with a Joseph-form covariance update."""
    A, Q, H, R = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (A, Q, H, R))
    m = np.atleast_1d(np.asarray(m0, dtype=float))
    P = np.atleast_2d(np.asarray(P0, dtype=float))
    n = m.shape[0]
    trace = []
    for y in ys:
        m = A @ m
        P = A @ P @ A.T + Q
        S = H @ P @ H.T + R
        K = np.linalg.solve(S.T, (P @ H.T).T).T
        m = m + K @ (np.atleast_1d(y) - H @ m)
        IKH = np.eye(n) - K @ H
        P = IKH @ P @ IKH.T + K @ R @ K.T
        trace.append((m.copy(), P.copy()))
    return trace


def grid_condition_2d(mean, cov, x1, half_width=12.0, num=24001):
    """Mean and variance of the second coordinate given the first equals ``x1``,
    from the joint density sliced on a fine grid and integrated numerically."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    prec = np.linalg.inv(cov)
    sd = np.sqrt(cov[1, 1])
    x2 = np.linspace(mean[1] - half_width * sd, mean[1] + half_width * sd, num)
    d = np.stack([np.full_like(x2, x1 - mean[0]), x2 - mean[1]])
    dens = np.exp(-0.5 * np.einsum("in,ij,jn->n", d, prec, d))
    z = np.trapezoid(dens, x2)
    m = np.trapezoid(x2 * dens, x2) / z
    v = np.trapezoid((x2 - m) ** 2 * dens, x2) / z
    return m, v


def quadrature_posterior_1d(prior_mean, prior_var, y, noise_var, half_width=12.0, num=40001):
    """Posterior mean and variance of ``f`` given ``y = f + noise`` by quadrature."""
    sd = np.sqrt(prior_var)
    f = np.linspace(prior_mean - half_width * sd, prior_mean + half_width * sd, num)
    dens = np.exp(-0.5 * (f - prior_mean) ** 2 / prior_var - 0.5 * (y - f) ** 2 / noise_var)
    z = np.trapezoid(dens, f)
    m = np.trapezoid(f * dens, f) / z
    return m, np.trapezoid((f - m) ** 2 * dens, f) / z


def compose_dense(first, second):
    """Chapman-Kolmogorov on nested lists of Fractions."""
    return [
        [sum(row[k] * second[k][j] for k in range(len(second))) for j in range(len(second[0]))]
        for row in first
    ]
