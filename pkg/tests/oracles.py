"""Independent reference implementations used to pin test expectations.

Everything here is deliberately slow and explicit: dense matrices built
with index loops, LAPACK eigendecompositions, damped Newton with dense
Jacobians, and brute-force grid scans.  No code is shared with the
package beyond numpy/scipy, so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eig
from scipy.optimize import minimize_scalar


# ---------------------------------------------------------------------------
# Dense principal eigenpairs
# ---------------------------------------------------------------------------


def dense_operator_1d(
    gamma: np.ndarray, d: float, h: float, rho: float = 0.0
) -> np.ndarray:
    """-d u'' + 2 d rho u' - (d rho^2 + gamma) u on the periodic grid."""
    n = gamma.size
    A = np.zeros((n, n))
    for j in range(n):
        A[j, j] = 2.0 * d / h**2 - d * rho * rho - gamma[j]
        A[j, (j - 1) % n] += -d / h**2 - d * rho / h
        A[j, (j + 1) % n] += -d / h**2 + d * rho / h
    return A


def dense_operator_2d(
    gamma: np.ndarray, d: float, h: float, rho: tuple[float, float] = (0.0, 0.0)
) -> np.ndarray:
    """Same operator on an n-by-n periodic grid, flat C-order unknowns."""
    n = int(round(np.sqrt(gamma.size)))
    assert n * n == gamma.size
    rx, ry = rho
    rho_sq = rx * rx + ry * ry
    A = np.zeros((n * n, n * n))
    for jx in range(n):
        for jy in range(n):
            row = jx * n + jy
            A[row, row] = 4.0 * d / h**2 - d * rho_sq - gamma[row]
            A[row, ((jx - 1) % n) * n + jy] += -d / h**2 - d * rx / h
            A[row, ((jx + 1) % n) * n + jy] += -d / h**2 + d * rx / h
            A[row, jx * n + (jy - 1) % n] += -d / h**2 - d * ry / h
            A[row, jx * n + (jy + 1) % n] += -d / h**2 + d * ry / h
    return A


def dense_principal(A: np.ndarray) -> tuple[float, np.ndarray]:
    """Eigenvalue of smallest real part; checks it carries a positive
    eigenvector (Perron root of the shifted inverse)."""
    values, vectors = eig(A)
    idx = int(np.argmin(values.real))
    lam = values[idx]
    assert abs(lam.imag) < 1e-9 * max(1.0, abs(lam.real))
    v = vectors[:, idx].real
    if v.sum() < 0:
        v = -v
    assert v.min() > 0, "principal eigenvector is not strictly positive"
    return float(lam.real), v / v.max()


def oracle_eigenvalue_1d(
    gamma: np.ndarray, d: float, h: float, rho: float = 0.0
) -> float:
    return dense_principal(dense_operator_1d(gamma, d, h, rho))[0]


def oracle_eigenvalue_2d(
    gamma: np.ndarray, d: float, h: float, rho: tuple[float, float] = (0.0, 0.0)
) -> float:
    return dense_principal(dense_operator_2d(gamma, d, h, rho))[0]


# ---------------------------------------------------------------------------
# Brute-force directional speed
# ---------------------------------------------------------------------------


def oracle_speed_1d(gamma: np.ndarray, d: float, h: float) -> float:
    """min over r > 0 of -k(r)/r by 200-point log scan plus bounded refine."""

    def ray(r: float) -> float:
        return -oracle_eigenvalue_1d(gamma, d, h, rho=r) / r

    rates = np.geomspace(1e-2, 1e2, 200)
    values = np.array([ray(r) for r in rates])
    i = int(np.argmin(values))
    assert 0 < i < len(rates) - 1, "oracle speed minimum hit the scan edge"
    res = minimize_scalar(
        ray, bounds=(rates[i - 1], rates[i + 1]), method="bounded",
        options={"xatol": 1e-10},
    )
    return float(min(res.fun, values[i]))


# ---------------------------------------------------------------------------
# Dense stationary solves
# ---------------------------------------------------------------------------


def dense_laplacian_1d(n: int, h: float) -> np.ndarray:
    L = np.zeros((n, n))
    for j in range(n):
        L[j, j] = -2.0 / h**2
        L[j, (j - 1) % n] += 1.0 / h**2
        L[j, (j + 1) % n] += 1.0 / h**2
    return L


def oracle_recovered(
    infected: np.ndarray, mu: np.ndarray, lam: np.ndarray, d: float, h: float
) -> np.ndarray:
    """Dense solve of (-d Lap + lam) R = mu * I."""
    n = infected.size
    A = -d * dense_laplacian_1d(n, h) + np.diag(lam)
    return np.linalg.solve(A, mu * infected)


def _damped_newton(F, J, x0: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    x = x0.copy()
    res = F(x)
    norm = np.abs(res).max()
    for _ in range(200):
        if norm < tol:
            return x
        delta = np.linalg.solve(J(x), res)
        step = 1.0
        while step > 1e-12:
            trial = x - step * delta
            trial_res = F(trial)
            trial_norm = np.abs(trial_res).max()
            if trial_norm < (1.0 - 0.5 * step) * norm + tol:
                x, res, norm = trial, trial_res, trial_norm
                break
            step *= 0.5
        else:
            raise AssertionError("oracle Newton line search stalled")
    raise AssertionError(f"oracle Newton did not converge (residual {norm:.3e})")


def oracle_logistic(
    alpha: np.ndarray, capacity: np.ndarray, d: float, h: float
) -> np.ndarray:
    """Largest nonnegative solution of -d u'' = alpha u (capacity - u)."""
    n = alpha.size
    L = dense_laplacian_1d(n, h)
    lam1 = dense_principal(-d * L - np.diag(alpha * capacity))[0]
    if lam1 >= 0.0:
        return np.zeros(n)

    def F(u: np.ndarray) -> np.ndarray:
        return -d * (L @ u) - alpha * u * (capacity - u)

    def J(u: np.ndarray) -> np.ndarray:
        return -d * L - np.diag(alpha * (capacity - 2.0 * u))

    ceiling = max(float(capacity.max()), 0.0) + 1.0
    # the residual floor scales with the stencil magnitude d/h^2
    u = _damped_newton(F, J, np.full(n, ceiling), tol=1e-13 * (1.0 + d / h**2))
    assert u.min() > 0
    return u


def oracle_stationary(
    alpha: np.ndarray,
    mu: np.ndarray,
    lam: np.ndarray,
    gamma: np.ndarray,
    d: float,
    h: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Coupled Newton on the stationary infected/recovered system.

    Solves -d I'' = gamma I - alpha I^2 - alpha I R and
           -d R'' = mu I - lam R  as one 2n-unknown root find.
    """
    n = alpha.size
    L = dense_laplacian_1d(n, h)

    def F(x: np.ndarray) -> np.ndarray:
        I, R = x[:n], x[n:]
        fI = -d * (L @ I) - gamma * I + alpha * I * I + alpha * I * R
        fR = -d * (L @ R) - mu * I + lam * R
        return np.concatenate([fI, fR])

    def J(x: np.ndarray) -> np.ndarray:
        I, R = x[:n], x[n:]
        top = np.hstack(
            [
                -d * L - np.diag(gamma - 2.0 * alpha * I - alpha * R),
                np.diag(alpha * I),
            ]
        )
        bottom = np.hstack([-np.diag(mu), -d * L + np.diag(lam)])
        return np.vstack([top, bottom])

    infected0 = oracle_logistic(alpha, gamma / alpha, d, h)
    assert infected0.max() > 0, "oracle stationary called in the extinct regime"
    recovered0 = oracle_recovered(infected0, mu, lam, d, h)
    x = _damped_newton(
        F,
        J,
        np.concatenate([infected0, recovered0]),
        tol=1e-13 * (1.0 + d / h**2),
    )
    infected, recovered = x[:n], x[n:]
    assert infected.min() > 0 and recovered.min() > 0
    return infected, recovered


# ---------------------------------------------------------------------------
# Oracle threshold bisection
# ---------------------------------------------------------------------------


def oracle_critical_s0(
    alpha: np.ndarray,
    mu: np.ndarray,
    d: float,
    h: float,
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Mean susceptible level where the dense eigenvalue changes sign."""

    def f(s0: float) -> float:
        return oracle_eigenvalue_1d(alpha * s0 - mu, d, h)

    f_lo, f_hi = f(lo), f(hi)
    assert np.sign(f_lo) != np.sign(f_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if np.sign(f(mid)) == np.sign(f_lo):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
