"""Shared numerical kernels.

Modified Bessel functions of the second kind, a Levenberg-Marquardt solver
with bounded and shared parameters, checked central differences, one-sided
periodograms and reproducible random streams.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special


class BesselUnderflowWarning(RuntimeWarning):
    """K0 or K1 fell below the smallest representable double."""


class FitError(RuntimeError):
    """Base class for least-squares failures."""


class ConvergenceError(FitError):
    """Maximum number of iterations reached without meeting a criterion."""


class SingularJacobianError(FitError):
    """Jacobian is rank deficient at the solution; parameters not identifiable."""


class NaNResidualError(FitError):
    """Residual function returned non-finite values at the starting point."""


# ---------------------------------------------------------------------------
# Bessel functions


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("modified Bessel K_nu requires x > 0")
    return x


def _finish(values, x):
    if np.any((values == 0.0) & np.isfinite(x)):
        warnings.warn("K_nu(x) underflowed to 0", BesselUnderflowWarning, stacklevel=3)
    return values if values.ndim else float(values)


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0.

    Raises ``ValueError`` for ``x <= 0``. Values below the double-precision
    range are returned as 0 with a :class:`BesselUnderflowWarning`.
    """
    x = _check_positive(x)
    return _finish(special.k0(x), x)


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1."""
    x = _check_positive(x)
    return _finish(special.k1(x), x)


def bessel_k0e(x):
    """Exponentially scaled ``exp(x) * K0(x)``; never underflows."""
    x = _check_positive(x)
    out = special.k0e(x)
    return out if out.ndim else float(out)


def bessel_k1e(x):
    """Exponentially scaled ``exp(x) * K1(x)``; never underflows."""
    x = _check_positive(x)
    out = special.k1e(x)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Finite differences


class Derivative(NamedTuple):
    value: float
    halved: float
    curvature: float
    curvature_halved: float
    ok: bool


def central_difference(
    fn: Callable[[float], float],
    x: float,
    h: float,
    rtol: float = 1e-6,
    atol: float = 0.0,
) -> Derivative:
    """Central difference with a step-halving consistency check.

    The first derivative is estimated at steps ``h`` and ``h/2``; the
    symmetric second difference is estimated at both steps as well. ``ok`` is
    true when both pairs agree to ``rtol`` (with ``atol`` as an absolute floor
    for the first derivative and a round-off floor for the curvature). A kink
    at ``x`` leaves the first derivative symmetric but makes the second
    difference scale like ``1/h``, so it fails the check.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    pts = [x - h, x - h / 2, x, x + h / 2, x + h]
    vals = [float(fn(p)) for p in pts]
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"non-finite function value near x={x}")
    fm, fmh, f0, fph, fp = vals
    d1 = (fp - fm) / (2 * h)
    d2 = (fph - fmh) / h
    c1 = (fp - 2 * f0 + fm) / h**2
    c2 = (fph - 2 * f0 + fmh) / (h / 2) ** 2
    scale = max(abs(v) for v in vals)
    roundoff = 1e3 * np.finfo(float).eps * scale
    first_ok = abs(d1 - d2) <= rtol * max(abs(d1), abs(d2)) + atol + roundoff / h
    curv_ok = abs(c1 - c2) <= rtol * max(abs(c1), abs(c2)) + 4 * roundoff / h**2
    return Derivative(d1, d2, c1, c2, bool(first_ok and curv_ok))


# ---------------------------------------------------------------------------
# Levenberg-Marquardt


@dataclass
class Parameter:
    """Descriptor for one fit parameter.

    Parameters sharing a ``group`` tag are tied to one optimizer variable;
    the first member's ``value`` seeds it. ``vary=False`` holds a parameter
    at its initial value.
    """

    name: str
    value: float
    lower: float = -math.inf
    upper: float = math.inf
    group: str | None = None
    vary: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: bounds out of order")
        if not self.lower <= self.value <= self.upper:
            raise ValueError(f"{self.name}: initial value outside bounds")


@dataclass
class FitProblem:
    residual: Callable[[dict], np.ndarray]
    parameters: Sequence[Parameter]
    max_iter: int = 200
    gtol: float = 1e-10
    xtol: float = 1e-12
    ftol: float = 1e-15
    scale_covariance: bool = True


@dataclass
class FitResult:
    values: dict
    errors: dict
    covariance: np.ndarray
    variables: list
    cost: float
    residual: np.ndarray
    n_iter: int
    n_eval: int
    history: list = field(default_factory=list)
    message: str = ""


class _Transform:
    """Maps an unconstrained optimizer variable onto a bounded parameter."""

    def __init__(self, lower, upper):
        self.lower, self.upper = lower, upper
        lo, hi = math.isfinite(lower), math.isfinite(upper)
        self.kind = {(False, False): "free", (True, False): "lower",
                     (False, True): "upper", (True, True): "both"}[(lo, hi)]

    def to_internal(self, p):
        lo, hi = self.lower, self.upper
        if self.kind == "free":
            return p
        if self.kind == "lower":
            return math.log(max(p - lo, 1e-300))
        if self.kind == "upper":
            return math.log(max(hi - p, 1e-300))
        t = min(max((p - lo) / (hi - lo), 1e-15), 1 - 1e-15)
        return math.log(t / (1 - t))

    def to_external(self, u):
        lo, hi = self.lower, self.upper
        if self.kind == "free":
            return u
        if self.kind == "lower":
            return lo + math.exp(min(u, 700.0))
        if self.kind == "upper":
            return hi - math.exp(min(u, 700.0))
        return lo + (hi - lo) / (1 + math.exp(-min(max(u, -700.0), 700.0)))

    def derivative(self, u):
        lo, hi = self.lower, self.upper
        if self.kind == "free":
            return 1.0
        if self.kind == "lower":
            return math.exp(min(u, 700.0))
        if self.kind == "upper":
            return -math.exp(min(u, 700.0))
        s = 1 / (1 + math.exp(-min(max(u, -700.0), 700.0)))
        return (hi - lo) * s * (1 - s)


def _trial(evaluate, u, step, g, A, cost):
    """Evaluate ``u + step``; return the new state and the gain ratio rho."""
    u_new = u + step
    r_new = evaluate(u_new)
    cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
    predicted = -(step @ g) - 0.5 * step @ A @ step
    if cost_new < cost:
        rho = (cost - cost_new) / predicted if predicted > 0 else 1.0
    else:
        rho = -math.inf
    return step, u_new, r_new, cost_new, rho


def levmar_fit(problem: FitProblem) -> FitResult:
    """Damped least squares over bounded, possibly shared parameters.

    Minimizes ``0.5 * sum(residual**2)``. The Jacobian is taken by central
    differences in the internal (unconstrained) variables with step
    ``max(1e-7, 1e-7*|u|)``. Each iteration first tries the undamped
    Gauss-Newton step and keeps it when the gain ratio is at least 0.75;
    otherwise a damped step is taken, with Nielsen's damping update and
    Marquardt's diagonal scaling. Only steps that lower the cost are
    accepted, so ``history`` (cost after each accepted step) is strictly
    decreasing.

    Raises
    ------
    NaNResidualError
        Residual not finite at the starting point.
    ConvergenceError
        ``max_iter`` reached.
    SingularJacobianError
        Jacobian rank deficient at the solution.
    """
    params = list(problem.parameters)
    if not params:
        raise ValueError("no parameters")
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise ValueError("duplicate parameter names")

    # one optimizer variable per free parameter or shared group
    variables: list[str] = []
    var_of: dict[str, int] = {}
    transforms: list[_Transform] = []
    u0: list[float] = []
    fixed: dict[str, float] = {}
    for p in params:
        if not p.vary:
            fixed[p.name] = p.value
            continue
        key = p.group if p.group is not None else p.name
        if key not in variables:
            variables.append(key)
            tr = _Transform(p.lower, p.upper)
            transforms.append(tr)
            u0.append(tr.to_internal(p.value))
        var_of[p.name] = variables.index(key)
    if not variables:
        raise ValueError("at least one parameter must vary")

    n = len(variables)
    n_eval = 0

    def external(u):
        vals = dict(fixed)
        for name, i in var_of.items():
            vals[name] = transforms[i].to_external(u[i])
        return vals

    def evaluate(u):
        nonlocal n_eval
        n_eval += 1
        r = np.asarray(problem.residual(external(u)), dtype=float).ravel()
        return r

    def jacobian(u):
        cols = []
        for i in range(n):
            h = max(1e-7, 1e-7 * abs(u[i]))
            up, um = u.copy(), u.copy()
            up[i] += h
            um[i] -= h
            cols.append((evaluate(up) - evaluate(um)) / (2 * h))
        return np.column_stack(cols)

    u = np.array(u0, dtype=float)
    r = evaluate(u)
    if not np.all(np.isfinite(r)):
        raise NaNResidualError("residual not finite at initial parameters")
    m = r.size
    cost = 0.5 * float(r @ r)
    J = jacobian(u)
    A = J.T @ J
    lam = 1e-3 * max(float(np.max(np.diag(A))), 1e-300)
    nu = 2.0
    history = [cost]
    message = ""
    converged = False
    it = 0
    while it < problem.max_iter:
        it += 1
        g = J.T @ r
        rnorm = math.sqrt(2 * cost)
        colnorm = np.sqrt(np.diag(A))
        if rnorm == 0.0:
            converged, message = True, "zero residual"
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            cosine = np.where(colnorm > 0, np.abs(g) / (colnorm * rnorm), 0.0)
        if float(np.max(cosine)) <= problem.gtol:
            converged, message = True, "gradient tolerance"
            break
        # undamped Gauss-Newton step first; kept only if the linear model predicted it well
        gn = np.linalg.lstsq(J, -r, rcond=None)[0]
        if np.linalg.norm(gn) <= problem.xtol * (np.linalg.norm(u) + problem.xtol):
            converged, message = True, "step tolerance"
            break
        step, u_new, r_new, cost_new, rho = _trial(evaluate, u, gn, g, A, cost)
        if not rho >= 0.75:
            diag = np.maximum(np.diag(A), 1e-12 * max(float(np.max(np.diag(A))), 1e-300))
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2
                continue
            if np.linalg.norm(step) <= problem.xtol * (np.linalg.norm(u) + problem.xtol):
                converged, message = True, "step tolerance"
                break
            step, u_new, r_new, cost_new, rho = _trial(evaluate, u, step, g, A, cost)
        if cost_new < cost:
            rel = (cost - cost_new) / cost
            u, r, cost = u_new, r_new, cost_new
            history.append(cost)
            lam *= max(1 / 3, 1 - (2 * rho - 1) ** 3)
            nu = 2.0
            if rel <= problem.ftol:
                converged, message = True, "cost tolerance"
                break
            J = jacobian(u)
            A = J.T @ J
        else:
            lam *= nu
            nu *= 2
            if lam > 1e300:
                converged, message = True, "damping saturated"
                break
    if not converged:
        raise ConvergenceError(f"no convergence in {problem.max_iter} iterations")

    J = jacobian(u)
    sv = np.linalg.svd(J, compute_uv=False)
    if sv.size < n or sv[-1] <= 1e-12 * sv[0] or sv[0] == 0:
        raise SingularJacobianError(
            "Jacobian rank deficient at solution: " + ", ".join(variables)
        )
    cov_u = np.linalg.inv(J.T @ J)
    if problem.scale_covariance and m > n:
        cov_u *= 2 * cost / (m - n)
    D = np.diag([transforms[i].derivative(u[i]) for i in range(n)])
    cov = D @ cov_u @ D
    values = external(u)
    errors = {name: 0.0 for name in fixed}
    for name, i in var_of.items():
        errors[name] = float(math.sqrt(max(cov[i, i], 0.0)))
    return FitResult(
        values=values,
        errors=errors,
        covariance=cov,
        variables=variables,
        cost=cost,
        residual=r,
        n_iter=it,
        n_eval=n_eval,
        history=history,
        message=message,
    )


# ---------------------------------------------------------------------------
# Spectral primitives


def periodogram(x, dt: float, window: str | None = None):
    """One-sided periodogram of a real sequence with its mean removed.

    Returns ``(freqs, power)`` without the DC bin. Normalized so that
    ``power.sum() * df`` equals the variance of ``x`` (exactly, for
    ``window=None``). ``window="hann"`` applies a Hann taper with
    power-preserving normalization.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    y = x - x.mean()
    if window == "hann":
        w = np.hanning(n)
        y = y * w / math.sqrt(np.mean(w**2))
    elif window is not None:
        raise ValueError(f"unknown window {window!r}")
    spec = np.fft.rfft(y)
    power = 2 * dt / n * np.abs(spec) ** 2
    if n % 2 == 0:
        power[-1] /= 2
    freqs = np.fft.rfftfreq(n, dt)
    return freqs[1:], power[1:]


# ---------------------------------------------------------------------------
# Random streams


@dataclass(frozen=True)
class RngStream:
    """Seed handle for one reproducible random stream.

    ``(seed, stream)`` fully determines the output; distinct stream indices
    come from ``SeedSequence`` spawn keys and do not overlap.
    """

    seed: int
    stream: int = 0
    algorithm: str = "PCG64"

    def generator(self) -> np.random.Generator:
        if self.algorithm != "PCG64":
            raise ValueError(f"unsupported algorithm {self.algorithm}")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def rng_streams(seed: int, n: int) -> list[RngStream]:
    """Return ``n`` independent, reproducible stream handles."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return [RngStream(seed, i) for i in range(n)]
