"""Closed-form observables: squeezed-thermal mode parameters, quadrature
variances, revival schedules, displacement trajectories and the lossless
pure-state solution.

Each reduced state of the damped two-mode solution is a squeezed thermal
state.  Its parameters derive from the assembly weights

    zeta = f g,   mu_c = q g^2,   nu_c = g^2,
    nu_v = (1 - f^2)/(q^2 - 1),   mu_v = -q nu_v,

via  n_bar = -1/2 + sqrt((nu + 1/2)^2 - mu^2)  and
     xi    = (1/4) ln((nu + 1/2 - mu)/(nu + 1/2 + mu)),

which places the sign convention (xi_c <= 0, xi_v >= 0) automatically.  The
quadrature variances are linear in the weights: Var X = nu + 1/2 + mu and
Var P = nu + 1/2 - mu.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import RegimeError, ValidityError
from .params import CouplingParams, Regime, envelope, sin_ratio

__all__ = [
    "ModeSpec",
    "RevivalSchedule",
    "QuadTuple",
    "LosslessSpec",
    "assembly_weights",
    "mode_spec",
    "steady_squeeze",
    "nbar_max",
    "revival_schedule",
    "quad_variances",
    "displacement_trajectory",
    "lossless_spec",
]

#: tolerated numerical slack below the exact lower bound 1/4 of the
#: square-root argument in the n_bar formula
_ROOT_SLACK = 1e-12


@dataclass(frozen=True)
class ModeSpec:
    """Squeezed-thermal description of one mode at one time.

    ``zeta = f g`` is the entangling weight of the joint expansion; ``mu``
    and ``nu`` are the per-mode assembly weights the (n_bar, xi) pair is
    derived from.
    """

    mode: str  # "c" or "v"
    n_bar: float
    xi: float
    zeta: float
    mu: float
    nu: float


@dataclass(frozen=True)
class RevivalSchedule:
    """Motion revival times tau_n and cavity revival times tau'_n <= horizon.

    Both lists are strictly increasing with exact spacing pi/L; the cavity
    list starts at tau'_0 = 0.
    """

    tau_motion: Tuple[float, ...]
    tau_cavity: Tuple[float, ...]
    horizon: float


@dataclass(frozen=True)
class QuadTuple:
    """Quadrature means and variances of both modes at one time."""

    var_xc: float
    var_pc: float
    var_xv: float
    var_pv: float
    mean_xc: float = 0.0
    mean_pc: float = 0.0
    mean_xv: float = 0.0
    mean_pv: float = 0.0


@dataclass(frozen=True)
class LosslessSpec:
    """Parameters of the pure two-mode state when dissipation is absent.

    ``product_state`` is 1..4 when t coincides (to 1e-9 relative) with a
    disentangling time t_m = m pi/(2 L0), cycling psi_1 -> psi_2 -> psi_3 ->
    psi_4 for m = 0..3 mod 4; None otherwise.
    """

    n_bar0: float
    xi0: float
    u0: complex
    v0: complex
    alpha_bar: complex
    beta_bar: complex
    product_state: Optional[int] = None


def assembly_weights(params: CouplingParams, t: float):
    """Return (zeta, (mu_c, nu_c), (mu_v, nu_v)) at time t.

    Requires omega2 > 0 and omega1 != omega2 (the mode-v weights are
    singular at equal coupling).
    """
    if params.omega2 == 0:
        raise RegimeError("assembly weights need omega2 > 0")
    if params.regime is Regime.EQUAL_COUPLING:
        raise RegimeError("mode-v assembly weights are singular at equal coupling")
    env = envelope(params, t)
    q = params.q
    zeta = env.f * env.g
    nu_c = env.g * env.g
    mu_c = q * nu_c
    nu_v = (1.0 - env.f * env.f) / (q * q - 1.0)
    mu_v = -q * nu_v
    return zeta, (mu_c, nu_c), (mu_v, nu_v)


def _squeezed_thermal_from_weights(mu: float, nu: float, context: str) -> Tuple[float, float]:
    """Map assembly weights (mu, nu) to (n_bar, xi), guarding validity.

    The square-root argument must stay >= 1/4 (up to numerical slack) and
    both logarithm arguments must be positive; violations raise
    ValidityError naming the offending point rather than clamping.
    """
    if not (math.isfinite(mu) and math.isfinite(nu)):
        raise ValidityError(f"non-finite assembly weights (mu={mu}, nu={nu}) at {context}")
    root_arg = (nu + 0.5) ** 2 - mu * mu
    if root_arg < 0.25 - _ROOT_SLACK:
        raise ValidityError(
            f"square-root argument {root_arg} < 1/4 (mu={mu}, nu={nu}) at {context}"
        )
    n_bar = max(0.0, -0.5 + math.sqrt(max(root_arg, 0.0)))
    num = nu + 0.5 - mu
    den = nu + 0.5 + mu
    if num <= 0 or den <= 0:
        raise ValidityError(
            f"log argument out of range (num={num}, den={den}, mu={mu}, nu={nu}) at {context}"
        )
    xi = 0.25 * math.log(num / den)
    return n_bar, xi


def mode_spec(params: CouplingParams, t: float, mode: str) -> ModeSpec:
    """Squeezed-thermal parameters (n_bar, xi) of one mode at time t.

    For omega2 == 0 the state stays vacuum and all fields are zero.  Mode
    "v" is rejected at equal coupling, where the closed form is singular;
    use the equal-coupling branch of :func:`quad_variances` instead.
    """
    if mode not in ("c", "v"):
        raise ValueError(f"mode must be 'c' or 'v', got {mode!r}")
    if params.omega2 == 0:
        return ModeSpec(mode=mode, n_bar=0.0, xi=0.0, zeta=0.0, mu=0.0, nu=0.0)
    if params.regime is Regime.EQUAL_COUPLING:
        if mode == "v":
            raise RegimeError(
                "mode-v squeezed-thermal form is singular at equal coupling; "
                "use the equal-coupling branch of quad_variances"
            )
        env = envelope(params, t)
        nu_c = env.g * env.g
        mu_c = nu_c  # q = 1
        n_bar, xi = _squeezed_thermal_from_weights(mu_c, nu_c, f"(mode c, t={t})")
        return ModeSpec(mode="c", n_bar=n_bar, xi=xi, zeta=env.f * env.g, mu=mu_c, nu=nu_c)
    zeta, wc, wv = assembly_weights(params, t)
    mu, nu = wc if mode == "c" else wv
    context = f"(omega1={params.omega1}, omega2={params.omega2}, gamma={params.gamma}, t={t}, mode={mode})"
    n_bar, xi = _squeezed_thermal_from_weights(mu, nu, context)
    return ModeSpec(mode=mode, n_bar=n_bar, xi=xi, zeta=zeta, mu=mu, nu=nu)


def steady_squeeze(params: CouplingParams) -> float:
    """Steady-state squeeze parameter xi_bar = (1/2) ln((o1+o2)/|o1-o2|)."""
    if params.regime is Regime.EQUAL_COUPLING:
        raise RegimeError("steady squeeze diverges at equal coupling")
    o1, o2 = params.omega1, params.omega2
    return 0.5 * math.log((o1 + o2) / abs(o1 - o2))


def nbar_max(params: CouplingParams) -> float:
    """Upper bound on the thermal occupation of either mode (omega1 > omega2).

    Exact as a bound over the undamped envelope; attained on a time grid in
    the gamma -> 0 limit.
    """
    if params.omega2 >= params.omega1:
        raise RegimeError("nbar_max requires omega2 < omega1")
    r = params.omega2 / params.omega1
    return 0.5 * (1.0 / math.sqrt(1.0 - r * r) - 1.0)


def revival_schedule(params: CouplingParams, horizon: float) -> RevivalSchedule:
    """Revival times up to ``horizon`` in the oscillatory regime.

    tau_n = arccos(-(gamma/4)/sqrt(omega1^2 - omega2^2))/L + n pi/L with the
    arccos branch in [pi/2, pi);  tau'_n = n pi/L.  The base root tau_0 is
    polished with one Newton step on f (using f' = -(L0^2/L) sin(L t)
    e^{-gamma t/4}); the step must move it by less than 1e-9.
    """
    if params.regime is not Regime.OSCILLATORY:
        raise RegimeError(
            f"no revivals in the {params.regime.value} regime "
            "(requires omega1^2 > omega2^2 + gamma^2/16)"
        )
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    lam = math.sqrt(params.lambda_sq)
    spacing = math.pi / lam
    tau0 = math.acos(-(params.gamma / 4.0) / math.sqrt(params.lambda0_sq)) / lam

    env = envelope(params, tau0)
    fprime = -(params.lambda0_sq / lam) * math.sin(lam * tau0) * math.exp(-params.gamma * tau0 / 4.0)
    polished = tau0 - env.f / fprime
    if abs(polished - tau0) > 1e-9:
        raise ValidityError(
            f"Newton polish moved tau_0 by {abs(polished - tau0):.3e} (> 1e-9); "
            "closed-form root is inconsistent with the envelope"
        )
    tau0 = polished

    tau_motion = []
    n = 0
    while tau0 + n * spacing <= horizon:
        tau_motion.append(tau0 + n * spacing)
        n += 1
    tau_cavity = []
    n = 0
    while n * spacing <= horizon:
        tau_cavity.append(n * spacing)
        n += 1
    return RevivalSchedule(
        tau_motion=tuple(tau_motion), tau_cavity=tuple(tau_cavity), horizon=horizon
    )


def _equal_coupling_growth(omega: float, gamma: float, t: float) -> float:
    """The growth term (16 omega^2/gamma^2)(gamma t/2 + e^{-gamma t/2} - 1).

    Evaluated with expm1 for small gamma t; the gamma -> 0 limit is
    2 omega^2 t^2.
    """
    if gamma == 0:
        return 2.0 * omega * omega * t * t
    x = gamma * t / 2.0
    return (16.0 * omega * omega / (gamma * gamma)) * (math.expm1(-x) + x)


def quad_variances(
    params: CouplingParams, t: float, alpha: complex = 0j, beta: complex = 0j
) -> QuadTuple:
    """Quadrature variances and means of both modes at time t.

    Variances do not depend on the coherent displacements (alpha, beta);
    the means are sqrt(2) Re/Im of the displacement trajectory (u, v).

    Generic branch (omega1 != omega2, omega2 > 0):

        Var X_c = 1/2 + ((o1+o2)/o2) g^2     Var P_c = 1/2 - ((o1-o2)/o2) g^2
        Var X_v = 1/2 - (o2/(o1+o2))(1-f^2)  Var P_v = 1/2 + (o2/(o1-o2))(1-f^2)

    At equal coupling Var P_c = Var X_v = 1/2 exactly, Var X_c = 1/2 + 2 g^2
    and Var P_v = 1/2 + (16 O^2/gamma^2)(gamma t/2 + e^{-gamma t/2} - 1).
    The latter is the master-equation result; it is the equal-coupling limit
    of the generic Var P_v and is reproduced by the numerical integrator.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    u, v = displacement_trajectory(params, alpha, beta, t)
    means = dict(
        mean_xc=math.sqrt(2.0) * u.real,
        mean_pc=math.sqrt(2.0) * u.imag,
        mean_xv=math.sqrt(2.0) * v.real,
        mean_pv=math.sqrt(2.0) * v.imag,
    )
    o1, o2 = params.omega1, params.omega2
    if o2 == 0:
        return QuadTuple(var_xc=0.5, var_pc=0.5, var_xv=0.5, var_pv=0.5, **means)
    env = envelope(params, t)
    g2 = env.g * env.g
    if params.regime is Regime.EQUAL_COUPLING:
        return QuadTuple(
            var_xc=0.5 + 2.0 * g2,
            var_pc=0.5,
            var_xv=0.5,
            var_pv=0.5 + _equal_coupling_growth(o1, params.gamma, t),
            **means,
        )
    one_mf2 = 1.0 - env.f * env.f
    return QuadTuple(
        var_xc=0.5 + (o1 + o2) / o2 * g2,
        var_pc=0.5 - (o1 - o2) / o2 * g2,
        var_xv=0.5 - o2 / (o1 + o2) * one_mf2,
        var_pv=0.5 + o2 / (o1 - o2) * one_mf2,
        **means,
    )


def displacement_trajectory(
    params: CouplingParams, alpha: complex, beta: complex, t: float
) -> Tuple[complex, complex]:
    """First-moment trajectory (u, v) = (<a>, <b>) for a coherent start.

        u = alpha h + (beta q + beta*) g
        v = (-alpha q + alpha*) g + beta f

    The (q g) products are evaluated as omega1 sin(L t) e^{-gamma t/4}/L,
    which stays finite in the omega2 -> 0 limit.
    """
    env = envelope(params, t)
    qg = params.omega1 * sin_ratio(params, t)
    u = alpha * env.h + (beta * qg + np.conj(beta) * env.g)
    v = (-alpha * qg + np.conj(alpha) * env.g) + beta * env.f
    return complex(u), complex(v)


def lossless_spec(
    params: CouplingParams, alpha: complex, beta: complex, t: float
) -> LosslessSpec:
    """Parameters of the exact pure-state solution when gamma = 0.

    Requires lambda0^2 = omega1^2 - omega2^2 > 0.  All quantities are
    periodic in t with period 2 pi/L0.
    """
    if params.gamma != 0:
        raise RegimeError("lossless solution requires gamma = 0")
    if params.lambda0_sq <= 0:
        raise RegimeError("lossless solution requires omega1 > omega2")
    o1, o2 = params.omega1, params.omega2
    lam0 = math.sqrt(params.lambda0_sq)
    alpha = complex(alpha)
    beta = complex(beta)
    alpha_bar = (np.conj(beta) * o2 + beta * o1) / lam0
    beta_bar = (np.conj(alpha) * o2 - alpha * o1) / lam0
    c2, s2 = math.cos(2 * lam0 * t), math.sin(2 * lam0 * t)
    n_bar0 = 0.5 * (math.sqrt(1.0 + (o2 * o2 / params.lambda0_sq) * s2 * s2) - 1.0)
    xi0 = 0.25 * math.log(((o1 + o2) * (o1 - o2 * c2)) / ((o1 - o2) * (o1 + o2 * c2)))
    c, s = math.cos(lam0 * t), math.sin(lam0 * t)
    u0 = alpha * c + alpha_bar * s
    v0 = beta * c + beta_bar * s

    product_state = None
    m_float = t * 2.0 * lam0 / math.pi
    m = round(m_float)
    if abs(m_float - m) <= 1e-9 * max(1.0, abs(m_float)):
        product_state = (m % 4) + 1
    return LosslessSpec(
        n_bar0=n_bar0,
        xi0=xi0,
        u0=complex(u0),
        v0=complex(v0),
        alpha_bar=complex(alpha_bar),
        beta_bar=complex(beta_bar),
        product_state=product_state,
    )
