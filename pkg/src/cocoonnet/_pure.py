"""Numpy implementations of the hot kernels.

Signatures mirror ``_kernels.pyx`` exactly so ``_backend`` can swap them.
Attitude codes: 0 positive, 1 neutral, 2 negative. Susceptibility codes:
1 susceptible, 0 insusceptible.
"""
import numpy as np

NAME = "python"


def jacobi_eigh(a, tol, max_sweeps):
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvalues in
    diagonal order (unsorted). ``sweeps`` is ``-1`` when the off-diagonal
    norm is still above ``tol * ||a||_F`` after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=float, order="C")
    n = a.shape[0]
    v = np.eye(n)
    target = tol * np.sqrt(np.sum(a * a))
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= target:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(diff) > 1e150 * abs(apq):
                    # theta*theta would overflow; t ~ 1 / (2 theta)
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = ap - s * (aq + tau * ap)
                a[:, q] = aq + s * (ap - tau * aq)
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = ap[p] - t * apq
                a[q, q] = aq[q] + t * apq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = vp - s * (vq + tau * vp)
                v[:, q] = vq + s * (vp - tau * vq)
    return np.diag(a).copy(), v, -1


def _neighbour_counts(indptr, indices, mask):
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    return np.bincount(rows, weights=mask[indices].astype(float), minlength=n)


def transition_rates(indptr1, indices1, indptr2, indices2, att, sus,
                     alpha, gamma1, diff_rate, gamma2):
    """Exposure probabilities ``(lambda_P, lambda_N, lambda_S)`` per node."""
    att = np.asarray(att)
    sus = np.asarray(sus)
    g1 = np.where(sus == 1, gamma1, 1.0)
    g2 = np.where(att == 1, gamma2, 1.0)
    n_pos = _neighbour_counts(indptr1, indices1, att == 0)
    n_neg = _neighbour_counts(indptr1, indices1, att == 2)
    n_sus = _neighbour_counts(indptr2, indices2, sus == 1)
    lp = 1.0 - (1.0 - g1 * alpha) ** n_pos
    ln = 1.0 - (1.0 - g1 * alpha) ** n_neg
    ls = 1.0 - (1.0 - g2 * diff_rate) ** n_sus
    return lp, ln, ls


def sim_step(indptr1, indices1, indptr2, indices2, att, sus, frozen, u1, u2, u3,
             alpha, beta, r1, gamma1, diff_rate, s_rate, r2, gamma2):
    """One synchronous update of both layers; returns ``(att, sus)``."""
    att = np.asarray(att, dtype=np.int8)
    sus = np.asarray(sus, dtype=np.int8)
    lp, ln, ls = transition_rates(indptr1, indices1, indptr2, indices2, att, sus,
                                  alpha, gamma1, diff_rate, gamma2)
    new_att = att.copy()
    pos, neu, neg = att == 0, att == 1, att == 2
    new_att[pos & (u1 < beta * ln)] = 1
    new_att[neg & (u1 < beta * lp)] = 1
    to_pos = neu & (u1 < r1 * lp)
    to_neg = neu & ~to_pos & (u1 < r1 * lp + r1 * ln)
    new_att[to_pos] = 0
    new_att[to_neg] = 2
    keep = np.asarray(frozen, dtype=bool)
    new_att[keep] = att[keep]

    new_sus = sus.copy()
    new_sus[(sus == 1) & (u2 < r2)] = 0
    new_sus[(sus == 0) & (u2 < ls)] = 1
    flip = u3 < s_rate
    new_sus[flip] = 1 - new_sus[flip]
    return new_att, new_sus
