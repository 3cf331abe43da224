"""Exact stepsize along a direction as the zero of a piecewise-affine slope.

The merit function along the Newton direction is piecewise quadratic; its
derivative

    psi'(tau) = eta*tau + beta + <delta, [delta*tau - alpha]_+>

is monotonically increasing with slope at least eta > 0, so it has a unique
zero. The zero is found by sorting the hinge breakpoints and interpolating
on the bracketing affine piece.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PwaDerivative:
    eta: float
    beta: float
    delta: np.ndarray
    alpha: np.ndarray

    def __call__(self, tau):
        hinge = np.maximum(self.delta * tau - self.alpha, 0.0)
        return self.eta * tau + self.beta + self.delta @ hinge


def build_derivative(x, xhat, d, y, sigma_y, sigma_x_inv, problem) -> PwaDerivative:
    """Coefficients of psi'(tau) for the merit along x + tau*d.

    Hinge pairs whose breakpoint offset is +inf (an infinite bound on an
    untouched side) never activate for finite tau and are dropped.
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    qd = problem.Q.matvec(d)
    qx = problem.Q.matvec(x)
    eta = float(d @ qd + d @ (sigma_x_inv * d))
    beta = float(d @ (qx + sigma_x_inv * (x - xhat) + problem.q))
    ad = problem.A.matvec(d)
    ax = problem.A.matvec(x)
    root = np.sqrt(sigma_y)
    s = root * ad
    delta = np.concatenate([-s, s])
    with np.errstate(invalid="ignore"):
        lower = (y + sigma_y * (ax - problem.l)) / root
        upper = (sigma_y * (problem.u - ax) - y) / root
    alpha = np.concatenate([lower, upper])
    keep = alpha < np.inf
    return PwaDerivative(eta, beta, delta[keep], alpha[keep])


def exact_linesearch(pwa: PwaDerivative) -> float:
    """Unique zero of the monotone piecewise-affine derivative.

    Breakpoints (negative ones included) are sorted and walked from the
    left; the zero is recovered by interpolation on the first piece whose
    right endpoint has nonnegative slope value, extending with the final
    affine piece when every breakpoint value is negative. If psi'(0) >= 0
    the same formula applies and the result may be nonpositive.
    """
    eta, beta = pwa.eta, pwa.beta
    if eta <= 0:
        raise ValueError("the subproblem slope coefficient must be positive")
    nz = pwa.delta != 0.0
    delta = pwa.delta[nz]
    alpha = pwa.alpha[nz]
    if delta.size == 0:
        return -beta / eta

    ts = alpha / delta
    order = np.argsort(ts, kind="stable")
    ts = ts[order]
    dlt = delta[order]
    alp = alpha[order]

    # Collapse duplicate breakpoints so every interval has positive length.
    ts, first = np.unique(ts, return_index=True)
    groups = np.append(first, dlt.size)

    # Slope/intercept left of all breakpoints: hinges with delta<0 active.
    neg = dlt < 0
    slope = eta + float(dlt[neg] @ dlt[neg])
    intercept = beta - float(dlt[neg] @ alp[neg])
    sign = np.sign(dlt)
    dslope = sign * dlt * dlt
    dintercept = -sign * dlt * alp

    prev_t = 0.0
    prev_val = None
    for i, t in enumerate(ts):
        val = slope * t + intercept
        if val >= 0.0:
            if prev_val is None:
                prev_t = 0.0
                prev_val = float(pwa(0.0))
            if val == prev_val:
                return prev_t
            return prev_t - (t - prev_t) / (val - prev_val) * prev_val
        lo, hi = groups[i], groups[i + 1]
        slope += float(np.sum(dslope[lo:hi]))
        intercept += float(np.sum(dintercept[lo:hi]))
        prev_t, prev_val = t, val
    # Zero lies beyond the last breakpoint on the final affine piece.
    return prev_t - prev_val / slope
