"""Coupling parameters, regime classification and the damped envelope functions.

Two laser-engineered couplings drive the ion-cavity system: a beam-splitter
rate omega1 and a two-mode-parametric rate omega2; the cavity loses energy
at rate gamma.  Every time dependence of the model is carried by three
scalar envelopes

    f(t) = (cos(L t) + (gamma/4L) sin(L t)) exp(-gamma t/4)
    g(t) = (omega2/L) sin(L t) exp(-gamma t/4)
    h(t) = (cos(L t) - (gamma/4L) sin(L t)) exp(-gamma t/4)

with L^2 = omega1^2 - omega2^2 - gamma^2/16.  For L^2 < 0 the trig functions
continue analytically to cosh/sinh (evaluated in exponential form so the
values stay real and never overflow while decaying), and the L -> 0 limit is
taken explicitly.  All three satisfy y'' + (gamma/2) y' + (omega1^2 -
omega2^2) y = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "Regime",
    "LabParams",
    "CouplingParams",
    "EnvelopeValues",
    "classify_regime",
    "from_lab_params",
    "envelope",
    "sin_ratio",
]

#: relative threshold on |omega1 - omega2| below which the couplings are
#: treated as exactly equal (separate closed forms apply there)
EQUAL_COUPLING_RTOL = 1e-9

#: |L^2| <= DEGENERATE_ATOL * omega1^2 selects the L -> 0 limit branch;
#: chosen at the double-precision noise floor of the L^2 subtraction
DEGENERATE_ATOL = 1e-12

#: exp(-x) leaves the normal float range past this; decaying envelopes are
#: reported as exactly zero (the steady-state values) instead of denormals
_UNDERFLOW_EXPONENT = 708.0

ArrayLike = Union[float, np.ndarray]


class Regime(Enum):
    OSCILLATORY = "oscillatory"
    DEGENERATE = "degenerate"
    OVERDAMPED = "overdamped"
    EQUAL_COUPLING = "equal_coupling"


@dataclass(frozen=True)
class LabParams:
    """Laboratory parameters of the ion-laser-cavity setup.

    Attributes
    ----------
    eta_c : float
        Lamb-Dicke parameter of the cavity mode (dimensionless, > 0).
    g1, g2 : float
        Couplings of the ion to the two driving lasers (angular rates, >= 0).
    gc : float
        Ion-cavity coupling (angular rate, >= 0).
    delta : float
        Detuning between the electronic transition and the cavity (!= 0).
    """

    eta_c: float
    g1: float
    g2: float
    gc: float
    delta: float

    def __post_init__(self):
        if not self.eta_c > 0:
            raise ValueError(f"eta_c must be > 0, got {self.eta_c}")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        for name in ("g1", "g2", "gc"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class CouplingParams:
    """The three rates of the effective model plus derived quantities.

    ``q = omega1/omega2`` is stored as ``inf`` when omega2 == 0; operations
    that need a finite q must either reject that case or use the explicit
    omega2 -> 0 limit.
    """

    omega1: float
    omega2: float
    gamma: float
    q: float = field(init=False)
    lambda_sq: float = field(init=False)
    lambda0_sq: float = field(init=False)
    regime: Regime = field(init=False)

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError(f"omega1 must be > 0, got {self.omega1}")
        if self.omega2 < 0:
            raise ValueError(f"omega2 must be >= 0, got {self.omega2}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        o1, o2, g = self.omega1, self.omega2, self.gamma
        object.__setattr__(self, "q", o1 / o2 if o2 > 0 else math.inf)
        lam_sq = o1 * o1 - o2 * o2 - g * g / 16.0
        lam0_sq = o1 * o1 - o2 * o2
        object.__setattr__(self, "lambda_sq", lam_sq)
        object.__setattr__(self, "lambda0_sq", lam0_sq)
        if abs(o1 - o2) <= EQUAL_COUPLING_RTOL * o1:
            regime = Regime.EQUAL_COUPLING
        elif lam_sq > DEGENERATE_ATOL * o1 * o1:
            regime = Regime.OSCILLATORY
        elif lam_sq < -DEGENERATE_ATOL * o1 * o1:
            regime = Regime.OVERDAMPED
        else:
            regime = Regime.DEGENERATE
        object.__setattr__(self, "regime", regime)


@dataclass(frozen=True)
class EnvelopeValues:
    """The envelope triple at one time (or elementwise over an array of times).

    At t = 0, (f, g, h) = (1, 0, 1), and for omega2 > 0 the triple obeys
    f h + (q^2 - 1) g^2 = exp(-gamma t / 2).
    """

    f: ArrayLike
    g: ArrayLike
    h: ArrayLike
    t: ArrayLike


def classify_regime(omega1: float, omega2: float, gamma: float) -> CouplingParams:
    """Build fully derived coupling parameters with the regime tag."""
    return CouplingParams(omega1=omega1, omega2=omega2, gamma=gamma)


def from_lab_params(lab: LabParams, gamma: float) -> CouplingParams:
    """Convert laboratory parameters to effective coupling rates.

    omega1 = eta_c g1 gc / |delta| and omega2 = eta_c g2 gc / |delta|; the
    cavity decay rate is not derived from the lab parameters and is passed
    through by the caller.
    """
    scale = lab.eta_c * lab.gc / abs(lab.delta)
    return classify_regime(scale * lab.g1, scale * lab.g2, gamma)


def _trig_parts(params: CouplingParams, t: np.ndarray):
    """Return (cos_like, sin_over_lambda) for the regime of ``params``.

    cos_like ~ cos(L t) and sin_over_lambda ~ sin(L t)/L, analytically
    continued across the three L^2 branches.  Only used for L^2 >= 0; the
    overdamped branch is handled separately in exponential form.
    """
    lam_sq = params.lambda_sq
    if lam_sq > DEGENERATE_ATOL * params.omega1 ** 2:
        lam = math.sqrt(lam_sq)
        return np.cos(lam * t), np.sin(lam * t) / lam
    return np.ones_like(t), t.astype(float)


def envelope(params: CouplingParams, t: ArrayLike) -> EnvelopeValues:
    """Evaluate the envelope triple (f, g, h) at time(s) ``t >= 0``.

    Accepts a scalar or an ndarray of times; the fields of the result have
    the same shape.  Values are always real:

    * oscillatory branch: damped cos/sin with L = sqrt(L^2);
    * overdamped branch (includes equal coupling with gamma > 0): the
      analytic continuation, evaluated as a sum of two real exponentials
      exp((+-|L| - gamma/4) t) so that decaying envelopes neither overflow
      nor lose their sign structure;
    * degenerate branch (L -> 0): f = (1 + gamma t/4) e^{-gamma t/4},
      g = omega2 t e^{-gamma t/4}, h = (1 - gamma t/4) e^{-gamma t/4}.

    Once exp(-gamma t/4) underflows (only reachable in the decaying regimes)
    the exact steady-state values (0, 0, 0) are returned.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    o1, o2, g = params.omega1, params.omega2, params.gamma
    lam_sq = params.lambda_sq

    if lam_sq < -DEGENERATE_ATOL * o1 * o1:
        lam = math.sqrt(-lam_sq)
        ep = np.exp((lam - g / 4.0) * t_arr)
        em = np.exp((-lam - g / 4.0) * t_arr)
        r = g / (4.0 * lam)
        f = 0.5 * ((1.0 + r) * ep + (1.0 - r) * em)
        gg = o2 / (2.0 * lam) * (ep - em)
        h = 0.5 * ((1.0 - r) * ep + (1.0 + r) * em)
    else:
        c, s = _trig_parts(params, t_arr)
        damp = np.exp(-g * t_arr / 4.0)
        f = (c + (g / 4.0) * s) * damp
        gg = o2 * s * damp
        h = (c - (g / 4.0) * s) * damp
        if g > 0:
            dead = g * t_arr / 4.0 > _UNDERFLOW_EXPONENT
            if np.any(dead):
                f = np.where(dead, 0.0, f)
                gg = np.where(dead, 0.0, gg)
                h = np.where(dead, 0.0, h)

    if scalar:
        return EnvelopeValues(f=float(f[0]), g=float(gg[0]), h=float(h[0]), t=float(t_arr[0]))
    return EnvelopeValues(f=f, g=gg, h=h, t=t_arr)


def sin_ratio(params: CouplingParams, t: ArrayLike) -> ArrayLike:
    """Damped sine ratio sin(L t) e^{-gamma t/4} / L across all branches.

    Equals g(t)/omega2 for omega2 > 0 and remains finite as omega2 -> 0;
    displacement trajectories use it to take the (omega1/omega2) g(t) terms
    to their analytic limit.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    o1, g = params.omega1, params.gamma
    lam_sq = params.lambda_sq
    if lam_sq < -DEGENERATE_ATOL * o1 * o1:
        lam = math.sqrt(-lam_sq)
        out = (np.exp((lam - g / 4.0) * t_arr) - np.exp((-lam - g / 4.0) * t_arr)) / (2.0 * lam)
    else:
        _, s = _trig_parts(params, t_arr)
        out = s * np.exp(-g * t_arr / 4.0)
        if g > 0:
            out = np.where(g * t_arr / 4.0 > _UNDERFLOW_EXPONENT, 0.0, out)
    return float(out[0]) if np.ndim(t) == 0 else out
