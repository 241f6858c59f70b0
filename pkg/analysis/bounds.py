# analysis/bounds.py - Expected-error bound for separable two-chain systems

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional

from model.two_chain import TwoChainSystem
from probability.tables import Cpd

logger = logging.getLogger(__name__)

TYPO_READINGS = ("as-printed", "symmetric")


@dataclass(frozen=True)
class BoundQuantities:
    """
    Parent-influence coefficients of a two-chain system and the bound's intermediate terms.

    lambda_A_B is the influence of the previous B on A; lambda_Z is how
    informative Z is about Y.
    """
    lambda_X_X: float
    lambda_X_Y: float
    lambda_Y_X: float
    lambda_Y_Y: float
    lambda_Z: float
    lambda_XY_X: float
    lambda_XY_Y: float
    zeta_X: float
    zeta_Y: float
    H: float
    J: float
    K: float
    L: float
    M: float
    N: float
    O: float
    P: float
    applicable: bool
    typo_reading: str

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class ErrorBound:
    """Bounds on E[delta], E[delta_X], E[delta_Y]; None when the bound does not apply"""
    H: Optional[float]
    J: Optional[float]
    K: Optional[float]
    applicable: bool
    quantities: BoundQuantities


def _p_true(cpd: Cpd):
    """P(child = T | parent = F), P(child = T | parent = T)"""
    return cpd.table[0, 1], cpd.table[1, 1]


def _influence(cpd: Cpd) -> float:
    low, high = _p_true(cpd)
    return abs(float(high - low))


def bound_quantities(system: TwoChainSystem, typo_reading: str = "as-printed") -> BoundQuantities:
    """
    Influence coefficients and the terms of the expected-error bound

    Values are indexed (F, T) = (x1, x2), so lambda_X_X is
    |P_X_X(T | T) - P_X_X(T | F)|. The two readings differ only in zeta_Y:
    "as-printed" repeats lambda_Y_Y in its last term, "symmetric" mirrors
    zeta_X and uses lambda_X_Y. lambda_XY_Y reads the same cells under both.

    Args:
        system: Separable two-chain system
        typo_reading: "as-printed" or "symmetric"

    Returns:
        BoundQuantities; `applicable` is False when N <= 0 or
        1 - (1 - lambda_Z^2) M <= 0, and H, J, K are then NaN

    Raises:
        ValueError: For an unknown reading
    """
    if typo_reading not in TYPO_READINGS:
        raise ValueError(f"Unknown typo reading {typo_reading!r}; expected one of {', '.join(TYPO_READINGS)}")

    l_xx = _influence(system.P_X_X)
    l_xy = _influence(system.P_X_Y)
    l_yx = _influence(system.P_Y_X)
    l_yy = _influence(system.P_Y_Y)
    l_z = _influence(system.P_Z)

    xx_low, xx_high = _p_true(system.P_X_X)
    yx_low, yx_high = _p_true(system.P_Y_X)
    xy_low, xy_high = _p_true(system.P_X_Y)
    yy_low, yy_high = _p_true(system.P_Y_Y)
    l_xy_x = abs(float(xx_high * yx_high - xx_low * yx_low))
    l_xy_y = abs(float(xy_high * yy_high - xy_low * yy_low))

    zeta_x = max(l_xx, l_z * (l_xx - 2.0 * l_xy_x + 2.0 * l_yx))
    last = l_yy if typo_reading == "as-printed" else l_xy
    zeta_y = max(l_yy, l_z * (l_yy - 2.0 * l_xy_y + 2.0 * last))

    g_x, g_y = system.gamma_X, system.gamma_Y
    L = g_x * g_y * l_xx * l_yx + (1 - g_x) * (1 - g_y) * l_xy * l_yy
    M = g_x * (1 - g_y) * l_xx * l_yy + (1 - g_x) * g_y * l_xy * l_yx
    O = g_y * zeta_x + (1 - g_y) * l_xx
    P = g_y * l_xy + (1 - g_y) * zeta_y
    N = (1 - (1 - g_y) * l_yy) * (1 - g_x * O) - (1 - g_x) * g_y * l_yx * P

    forget = 1.0 - l_z ** 2
    denominator = 1.0 - forget * M
    applicable = N > 0.0 and denominator > 0.0
    if applicable:
        H = forget * L / (4.0 * denominator)
        J = 2.0 * H * (1 - (1 - g_y) * l_yy) * l_z * M / N
        K = 2.0 * H * g_y * l_yx * l_z * M / N
    else:
        H = J = K = float("nan")
        logger.debug(f"bound inapplicable: N = {N:.4g}, 1 - (1 - lambda_Z^2) M = {denominator:.4g}")

    return BoundQuantities(
        lambda_X_X=l_xx, lambda_X_Y=l_xy, lambda_Y_X=l_yx, lambda_Y_Y=l_yy, lambda_Z=l_z,
        lambda_XY_X=l_xy_x, lambda_XY_Y=l_xy_y, zeta_X=zeta_x, zeta_Y=zeta_y,
        H=H, J=J, K=K, L=L, M=M, N=N, O=O, P=P,
        applicable=applicable, typo_reading=typo_reading,
    )


def theorem61_bound(system: TwoChainSystem, typo_reading: str = "as-printed") -> ErrorBound:
    """
    Bounds H >= E[delta], J >= E[delta_X], K >= E[delta_Y] at every time point

    Returns:
        ErrorBound with applicable False (and None bounds) when the
        bound's denominators are not positive
    """
    q = bound_quantities(system, typo_reading)
    if not q.applicable:
        return ErrorBound(None, None, None, False, q)
    return ErrorBound(q.H, q.J, q.K, True, q)
