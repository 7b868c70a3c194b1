"""Known analytic results for particular transformed copulas.

The registry maps a (base family, generator kinds, parameter relation) to the
diagonal singular component ``S(u, v) = s(min(u, v))`` and its total mass.
These are used as regression oracles for the quadrature route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from tfcopula.core import Copula
from tfcopula.families import FGM, CuadrasAuge, Independence

TF_FGM_POWER_HALF = "TF_FGM_PowerHalf"
TF_CA_BETA_ALPHA = "TF_CA_BetaAlpha"
CA_FROM_PRODUCT = "CA_FromProduct"


@dataclass(frozen=True)
class ClosedForm:
    tag: str
    mass: float
    singular_cdf: Callable[[np.ndarray], np.ndarray]  # s(m), with S(u,v) = s(min(u,v))

    def singular_part(self, u, v):
        return self.singular_cdf(np.minimum(u, v))


def fgm_power_cdf(u, v, theta: float, beta: float, gamma: float):
    """TF-FGM with ``phi = t**beta`` and ``psi = t**gamma`` in closed form."""
    m, mx = np.minimum(u, v), np.maximum(u, v)
    return m * mx ** (gamma / beta) * (1.0 + theta * (1.0 - m**beta) * (1.0 - mx**gamma)) ** (1.0 / beta)


def ca_power_cdf(u, v, alpha: float, beta: float, gamma: float):
    """TF-Cuadras-Augé with ``phi = t**beta``, ``psi = t**beta (2 - t**gamma)``."""
    m, mx = np.minimum(u, v), np.maximum(u, v)
    return m * mx**alpha * (2.0 - mx**gamma) ** (alpha / beta)


def fgm_half_singular(theta: float) -> Callable:
    def s(m):
        return m**1.5 * (5.0 + theta * (5.0 - 9.0 * m + 5.0 * m**1.5)) / 15.0
    return s


def fgm_half_ac(u, v, theta: float):
    """Absolutely continuous part of TF-FGM (``beta = 1``, ``gamma = 1/2``)."""
    m, mx = np.minimum(u, v), np.maximum(u, v)
    return (m * np.sqrt(mx) * (1.0 + theta * (1.0 - m) * (1.0 - np.sqrt(mx)))
            - m**1.5 * (5.0 + theta * (5.0 - 9.0 * m + 5.0 * m**1.5)) / 15.0)


def ca_beta_alpha_singular(alpha: float, gamma: float) -> Callable:
    def s(m):
        return m ** (1.0 + alpha) * (
            4.0 / (1.0 + alpha) - m**gamma * (1.0 - alpha - gamma) / (1.0 + alpha + gamma) - 2.0
        )
    return s


def ca_beta_alpha_mass(alpha: float, gamma: float) -> float:
    return 4.0 / (1.0 + alpha) - (1.0 - alpha - gamma) / (1.0 + alpha + gamma) - 2.0


def cuadras_auge_mass(alpha: float) -> float:
    return (1.0 - alpha) / (1.0 + alpha)


def _is(desc: dict | None, kind: str, **params) -> bool:
    if not desc or desc.get("kind") != kind:
        return False
    return all(np.isclose(desc.get(k, np.nan), v, rtol=0, atol=1e-12) for k, v in params.items())


def lookup(base: Copula, phi_desc: dict | None, psi_desc: dict | None) -> ClosedForm | None:
    """Closed form registered for this configuration, if any."""
    if isinstance(base, FGM) and 0.0 <= base.theta <= 1.0:
        if _is(phi_desc, "power", beta=1.0) and _is(psi_desc, "power", beta=0.5):
            th = base.theta
            return ClosedForm(TF_FGM_POWER_HALF, (5.0 + th) / 15.0, fgm_half_singular(th))
    if isinstance(base, CuadrasAuge) and base.alpha > 0:
        a = base.alpha
        if _is(phi_desc, "power", beta=a) and _is(psi_desc, "ca", beta=a):
            g = psi_desc["gamma"]
            if 0.0 <= g <= a:
                return ClosedForm(TF_CA_BETA_ALPHA, ca_beta_alpha_mass(a, g),
                                  ca_beta_alpha_singular(a, g))
    if isinstance(base, Independence) and _is(phi_desc, "power", beta=1.0):
        if psi_desc and psi_desc.get("kind") == "power" and 0.0 < psi_desc["beta"] <= 1.0:
            a = psi_desc["beta"]
            return ClosedForm(CA_FROM_PRODUCT, cuadras_auge_mass(a),
                              lambda m: (1.0 - a) * m ** (1.0 + a) / (1.0 + a))
    return None
