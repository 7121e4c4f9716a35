"""Extended real arithmetic.

Values are plain Python floats restricted to the reals plus ``inf`` and
``-inf``; NaN never appears. Addition is the *upper* convention
``+inf + -inf = +inf`` and multiplication uses ``0 * (+-inf) = 0``, so every
operation below is total.
"""

from __future__ import annotations

import math
from collections.abc import Iterable

ExtReal = float

INF: ExtReal = math.inf
NEG_INF: ExtReal = -math.inf

#: absolute tolerance used when comparing finite values
DEFAULT_TOL = 1e-9


def ext(x: object) -> ExtReal:
    """Coerce ``x`` to an extended real, rejecting NaN.

    Accepts numbers and the strings ``"inf"``, ``"+inf"``, ``"-inf"``.
    """
    if isinstance(x, str):
        key = x.strip().lower()
        if key in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        if key in ("-inf", "-infinity"):
            return NEG_INF
        raise ValueError(f"not an extended real: {x!r}")
    if isinstance(x, bool):
        raise TypeError("booleans are not extended reals")
    v = float(x)  # type: ignore[arg-type]
    if math.isnan(v):
        raise ValueError("NaN is not an extended real")
    return v


def is_finite(x: ExtReal) -> bool:
    return -math.inf < x < math.inf


def ext_add(a: ExtReal, b: ExtReal) -> ExtReal:
    if a == INF or b == INF:
        return INF
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def ext_sum(values: Iterable[ExtReal]) -> ExtReal:
    """Left fold of :func:`ext_add`; the empty sum is 0."""
    total = 0.0
    saw_neg_inf = False
    for v in values:
        if v == INF:
            return INF
        if v == NEG_INF:
            saw_neg_inf = True
        elif not saw_neg_inf:
            total += v
    return NEG_INF if saw_neg_inf else total


def ext_neg(a: ExtReal) -> ExtReal:
    return -a + 0.0


def ext_sub(a: ExtReal, b: ExtReal) -> ExtReal:
    """``a - b`` read as ``a + (-b)``, so ``inf - inf = inf``."""
    return ext_add(a, ext_neg(b))


def ext_mul(lam: ExtReal, a: ExtReal) -> ExtReal:
    if lam == 0.0 or a == 0.0:
        return 0.0
    if is_finite(lam) and is_finite(a):
        return lam * a
    return INF if (lam > 0) == (a > 0) else NEG_INF


def ext_le(a: ExtReal, b: ExtReal, tol: float = DEFAULT_TOL) -> bool:
    """``a <= b`` with absolute slack ``tol`` on finite values."""
    if a <= b:
        return True
    return is_finite(a) and is_finite(b) and a - b <= tol


def ext_close(a: ExtReal, b: ExtReal, tol: float = DEFAULT_TOL) -> bool:
    if a == b:
        return True
    return is_finite(a) and is_finite(b) and abs(a - b) <= tol


def to_json(x: ExtReal) -> float | str:
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return x


def from_json(x: object) -> ExtReal:
    return ext(x)


def format_value(x: ExtReal, digits: int = 12) -> str:
    if x == INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return f"{x:.{digits}g}"
