"""Real Lambert W function on its two real branches.

``W(x)`` solves ``w * exp(w) = x``. For real ``x`` there are two real
branches: the principal branch ``W0`` (``x >= -1/e``, ``w >= -1``) and the
lower branch ``W-1`` (``-1/e <= x < 0``, ``w <= -1``). Values are obtained
with Halley's method started from series or asymptotic guesses (Corless et
al., 1996). Away from the branch point the iteration runs on the logarithmic
form ``w + ln|w| = ln|x|``, which cannot overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "Branch",
    "WResult",
    "BRANCH_POINT",
    "w_eval",
    "w_derivative",
    "lambertw",
    "lambertw_negexp",
]

BRANCH_POINT = -math.exp(-1.0)
MAX_ITER = 100
_BRANCH_SNAP = 1e-12
_EPS = np.finfo(float).eps


class Branch(enum.IntEnum):
    """Real branch selector, numbered as in the usual ``W_k`` notation."""

    PRINCIPAL = 0
    LOWER = -1

    @classmethod
    def coerce(cls, value: "Branch | int | str") -> "Branch":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            aliases = {"0": cls.PRINCIPAL, "principal": cls.PRINCIPAL, "w0": cls.PRINCIPAL,
                       "-1": cls.LOWER, "lower": cls.LOWER, "w-1": cls.LOWER}
            if key not in aliases:
                raise ValueError(f"unknown Lambert W branch {value!r}")
            return aliases[key]
        return cls(int(value))


@dataclass(frozen=True)
class WResult:
    """Value of ``W(x)`` with iteration diagnostics."""

    value: float
    iterations: int
    residual: float


def _tolerance(x: float) -> float:
    return 1e-12 * max(1.0, abs(x))


def _check_domain(branch: Branch, x: float) -> None:
    if math.isnan(x):
        raise DomainError("Lambert W argument is NaN")
    if x < BRANCH_POINT:
        raise DomainError(f"x = {x!r} < -1/e: no real Lambert W value")
    if branch is Branch.LOWER and x >= 0.0:
        raise DomainError(f"lower branch W-1 requires -1/e <= x < 0, got {x!r}")
    if branch is Branch.PRINCIPAL and math.isinf(x):
        raise DomainError("Lambert W argument is infinite")


def _branch_point_guess(x: float, branch: Branch) -> float:
    # series in p = sqrt(2(e x + 1)) about w = -1
    p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
    if branch is Branch.LOWER:
        p = -p
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3


def _halley_direct(w: float, x: float) -> tuple[float, int]:
    for it in range(1, MAX_ITER + 1):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w, it
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4.0 * _EPS * (1.0 + abs(w)):
            return w, it
    return w, MAX_ITER


def _halley_log(w: float, log_abs_x: float) -> tuple[float, int]:
    # g(w) = w + ln|w| - ln|x|, valid while w stays on one side of 0
    for it in range(1, MAX_ITER + 1):
        g = w + math.log(abs(w)) - log_abs_x
        gp = 1.0 + 1.0 / w
        gpp = -1.0 / (w * w)
        dw = g / (gp - g * gpp / (2.0 * gp))
        w -= dw
        if abs(dw) <= 4.0 * _EPS * (1.0 + abs(w)):
            return w, it
    return w, MAX_ITER


def w_eval(branch: Branch | int, x: float) -> WResult:
    """Evaluate ``W(x)`` on the requested real branch.

    Raises
    ------
    DomainError
        If ``x < -1/e`` or ``x >= 0`` on the lower branch.
    ConvergenceError
        If the residual ``|w e^w - x|`` exceeds ``1e-12 * max(1, |x|)``.
    """
    branch = Branch.coerce(branch)
    x = float(x)
    if abs(x - BRANCH_POINT) < _BRANCH_SNAP:
        return WResult(-1.0, 0, abs(-math.exp(-1.0) - x))
    _check_domain(branch, x)
    if x == 0.0:
        return WResult(0.0, 0, 0.0)

    near_bp = math.e * x + 1.0 < 0.5
    if branch is Branch.PRINCIPAL:
        if near_bp:
            w, it = _halley_direct(_branch_point_guess(x, branch), x)
        elif x <= 3.0:
            w, it = _halley_direct(math.log1p(x), x)
        else:
            l1 = math.log(x)
            l2 = math.log(l1)
            w, it = _halley_log(l1 - l2 + l2 / l1, l1)
        w = max(w, -1.0)
    else:
        if near_bp:
            w, it = _halley_direct(_branch_point_guess(x, branch), x)
        else:
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w, it = _halley_log(l1 - l2 + l2 / l1, l1)
        w = min(w, -1.0)

    residual = abs(w * math.exp(w) - x)
    if not residual <= _tolerance(x):
        raise ConvergenceError(
            f"Lambert W branch {int(branch)} at x={x!r}: residual {residual:.3e} "
            f"after {it} iterations"
        )
    return WResult(w, it, residual)


def w_derivative(branch: Branch | int, x: float) -> float:
    """``dW/dx = W / (x (1 + W))``, with ``W0'(0) = 1``.

    The derivative is unbounded at the branch point, which raises
    :class:`DomainError`.
    """
    branch = Branch.coerce(branch)
    x = float(x)
    if abs(x - BRANCH_POINT) < _BRANCH_SNAP:
        raise DomainError("dW/dx is unbounded at the branch point x = -1/e")
    if x == 0.0 and branch is Branch.PRINCIPAL:
        return 1.0
    w = w_eval(branch, x).value
    return w / (x * (1.0 + w))


def lambertw(x, branch: Branch | int = Branch.PRINCIPAL):
    """Array-friendly wrapper returning only the value of ``W``."""
    branch = Branch.coerce(branch)
    if np.ndim(x) == 0:
        return w_eval(branch, float(x)).value
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    for idx, xi in np.ndenumerate(arr):
        out[idx] = w_eval(branch, xi).value
    return out


def lambertw_negexp(log_neg_x: float, branch: Branch | int) -> float:
    """``W(-exp(s))`` for ``s <= -1``, given ``s = ln(-x)``.

    Evaluating from the logarithm keeps the lower branch finite when ``-x``
    underflows (``s`` below about -745), which happens for radii many
    hundreds of times the length scale ``A / 2B``.
    """
    branch = Branch.coerce(branch)
    s = float(log_neg_x)
    if math.isnan(s):
        raise DomainError("Lambert W log-argument is NaN")
    if abs(s + 1.0) < _BRANCH_SNAP:
        return -1.0
    if s > -1.0:
        raise DomainError(f"-exp({s!r}) < -1/e: no real Lambert W value")
    if s > -1.7:
        return w_eval(branch, -math.exp(s)).value
    if branch is Branch.PRINCIPAL:
        x = -math.exp(s)
        if x == 0.0:
            return x
        return w_eval(branch, x).value
    l2 = math.log(-s)
    w, it = _halley_log(s - l2 + l2 / s, s)
    if not abs(w + math.log(-w) - s) <= 1e-12 * max(1.0, abs(s)):
        raise ConvergenceError(f"lower branch at ln(-x)={s!r} did not converge")
    return min(w, -1.0)
