"""Command-line front end.

Four subcommands: ``simulate`` (time-series CSV of variances, mode
parameters and envelopes), ``revivals`` (revival-time report), ``validate``
(analytic-vs-integrator cross-check suite) and ``sweep-ratio`` (vibrational
X-variance versus omega2/omega1).

Rates from the command line or config file are normalized internally so
that omega1 = 1; all times are then in units of omega1 t.  Config files are
flat JSON objects whose keys are the RunConfig field names; command-line
flags override file values.  CSV output is UTF-8 with LF line endings and
15 significant digits, written to a temporary file and renamed on success
so no partial files are left behind.

Exit codes: 0 success; 1 validation tolerance breach or integrator failure;
2 invalid configuration; 3 formula-validity guard tripped; 4 no revivals in
this regime.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields, replace
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    IntegrationError,
    IonCavityError,
    RegimeError,
    TruncationError,
    ValidityError,
)
from .fock import (
    AssemblyBudget,
    FockDensity,
    FockKet,
    assemble_joint_density,
    lossless_ket,
    partial_trace,
    quad_stats,
    reduced_density,
    state_metrics,
)
from .lindblad import IntegratorConfig, evolve_pure, evolve_trajectory
from .observables import mode_spec, quad_variances, revival_schedule
from .params import CouplingParams, Regime, classify_regime, envelope

__all__ = ["RunConfig", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_NO_REVIVALS = 4

#: validate refuses joint dimensions beyond desk scale
MAX_VALIDATE_DIM = 1024

#: cross-check tolerances of cmd_validate
TD_TOL = 1e-4
FID_DEFICIT_TOL = 1e-6
QUAD_TOL = 1e-4

CSV_HEADER = "t,var_xc,var_pc,var_xv,var_pv,nbar_c,nbar_v,xi_c,xi_v,f,g,h"


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration; field names double as config keys and flags."""

    omega1: float = 1.0
    omega2: float = 0.6
    gamma: float = 0.4
    alpha_re: float = 0.0
    alpha_im: float = 0.0
    beta_re: float = 0.0
    beta_im: float = 0.0
    nc: int = 15
    nv: int = 15
    t_max: float = 25.0
    t_step: float = 0.01
    dt_int: float = 1e-3
    series_tol: float = 1e-12
    out_path: Optional[str] = None

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def beta(self) -> complex:
        return complex(self.beta_re, self.beta_im)

    def normalized(self) -> "RunConfig":
        """Rescale rates to omega1 = 1 (times are already omega1-units)."""
        if not self.omega1 > 0:
            raise ConfigError(f"omega1 must be > 0, got {self.omega1}")
        o1 = self.omega1
        return replace(self, omega1=1.0, omega2=self.omega2 / o1, gamma=self.gamma / o1)

    def params(self) -> CouplingParams:
        try:
            return classify_regime(self.omega1, self.omega2, self.gamma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def check(self) -> None:
        if self.nc < 2 or self.nv < 2:
            raise ConfigError("nc and nv must be >= 2")
        if self.t_max < 0 or not self.t_step > 0:
            raise ConfigError("need t_max >= 0 and t_step > 0")
        if not self.dt_int > 0:
            raise ConfigError("dt_int must be > 0")
        if not self.series_tol > 0:
            raise ConfigError("series_tol must be > 0")
        self.params()


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.check()
    return cfg


def _mode_v_params_equal_coupling(var_xv: float, var_pv: float):
    """Squeezed-thermal (n_bar, xi) of mode v from its variances.

    Inverts Var X = (n_bar + 1/2) e^{-2 xi}, Var P = (n_bar + 1/2) e^{2 xi};
    used where the direct closed form is singular (equal coupling).
    """
    n_bar = math.sqrt(var_xv * var_pv) - 0.5
    xi = 0.25 * math.log(var_pv / var_xv)
    return n_bar, xi


def cmd_simulate(cfg: RunConfig) -> int:
    if not cfg.out_path:
        raise ConfigError("simulate needs out_path (--out_path or config key)")
    params = cfg.params()
    steps = int(math.floor(cfg.t_max / cfg.t_step + 1e-9))
    lines = [CSV_HEADER]
    equal = params.regime is Regime.EQUAL_COUPLING
    for i in range(steps + 1):
        t = i * cfg.t_step
        qv = quad_variances(params, t, cfg.alpha, cfg.beta)
        env = envelope(params, t)
        if params.omega2 == 0:
            nb_c = xi_c = nb_v = xi_v = 0.0
        elif equal:
            sc = mode_spec(params, t, "c")
            nb_c, xi_c = sc.n_bar, sc.xi
            nb_v, xi_v = _mode_v_params_equal_coupling(qv.var_xv, qv.var_pv)
        else:
            sc = mode_spec(params, t, "c")
            sv = mode_spec(params, t, "v")
            nb_c, xi_c = sc.n_bar, sc.xi
            nb_v, xi_v = sv.n_bar, sv.xi
        row = [t, qv.var_xc, qv.var_pc, qv.var_xv, qv.var_pv,
               nb_c, nb_v, xi_c, xi_v, env.f, env.g, env.h]
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(cfg.out_path, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_revivals(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    params = cfg.params()
    schedule = revival_schedule(params, cfg.t_max)
    lam = math.sqrt(params.lambda_sq)
    print(f"# revival schedule up to t = {_fmt(cfg.t_max)} (spacing pi/Lambda = {_fmt(math.pi / lam)})",
          file=stream)
    print("# kind  n  time  residual", file=stream)
    for n, tau in enumerate(schedule.tau_motion):
        res = abs(envelope(params, tau).f)
        print(f"motion  {n}  {_fmt(tau)}  {res:.3e}", file=stream)
    for n, tau in enumerate(schedule.tau_cavity):
        res = abs(envelope(params, tau).g)
        print(f"cavity  {n}  {_fmt(tau)}  {res:.3e}", file=stream)
    return EXIT_OK


def _vacuum_joint(nc: int, nv: int) -> FockDensity:
    rho = np.zeros((nc * nv, nc * nv), dtype=complex)
    rho[0, 0] = 1.0
    return FockDensity(entries=rho, dims=(nc, nv))


def _coherent_joint(alpha: complex, beta: complex, nc: int, nv: int) -> FockDensity:
    from .fock import displacement_op

    psi = np.zeros(nc * nv, dtype=complex)
    psi[0] = 1.0
    D = np.kron(displacement_op(alpha, nc).entries, displacement_op(beta, nv).entries)
    psi = D @ psi
    return FockDensity(entries=np.outer(psi, psi.conj()), dims=(nc, nv))


def cmd_validate(cfg: RunConfig, times: Sequence[float], stream=None) -> int:
    stream = stream or sys.stdout
    if cfg.nc * cfg.nv > MAX_VALIDATE_DIM:
        raise ConfigError(f"validate needs nc*nv <= {MAX_VALIDATE_DIM}, got {cfg.nc * cfg.nv}")
    params = cfg.params()
    budget = AssemblyBudget(dims=(cfg.nc, cfg.nv), series_tol=cfg.series_tol)
    config = IntegratorConfig(dt=cfg.dt_int, t_max=max(cfg.t_max, max(times) if times else 0.0))
    failures: List[str] = []

    def report(label: str, value: float, tol: float) -> None:
        ok = value <= tol
        print(f"{label}: {value:.3e} (tol {tol:.1e}) {'ok' if ok else 'FAIL'}", file=stream)
        if not ok:
            failures.append(label)

    try:
        rho0 = (
            _vacuum_joint(cfg.nc, cfg.nv)
            if cfg.alpha == 0 and cfg.beta == 0
            else _coherent_joint(cfg.alpha, cfg.beta, cfg.nc, cfg.nv)
        )
        oracle_states = evolve_trajectory(params, rho0, list(times), config)
        for t, rho_num in zip(times, oracle_states):
            rho_ana = assemble_joint_density(params, t, cfg.alpha, cfg.beta, budget)
            metrics = state_metrics(rho_ana, rho_num)
            report(f"t={t:g} joint trace distance", metrics.trace_distance, TD_TOL)
            for mode in ("c", "v"):
                N = cfg.nc if mode == "c" else cfg.nv
                red_ana = reduced_density(params, t, mode, cfg.alpha, cfg.beta, N)
                red_num = partial_trace(rho_num, mode)
                fid = state_metrics(red_ana, red_num).fidelity
                report(f"t={t:g} mode-{mode} fidelity deficit", 1.0 - fid, FID_DEFICIT_TOL)
            qn = quad_stats(rho_num)
            qa = quad_variances(params, t, cfg.alpha, cfg.beta)
            delta = max(
                abs(qn.var_xc - qa.var_xc), abs(qn.var_pc - qa.var_pc),
                abs(qn.var_xv - qa.var_xv), abs(qn.var_pv - qa.var_pv),
            )
            report(f"t={t:g} quadrature delta", delta, QUAD_TOL)

        if params.gamma == 0:
            psi0 = lossless_ket(params, cfg.alpha, cfg.beta, 0.0, (cfg.nc, cfg.nv))
            for t in times:
                psi_num = evolve_pure(params, psi0, t, config)
                psi_ana = lossless_ket(params, cfg.alpha, cfg.beta, t, (cfg.nc, cfg.nv))
                overlap = abs(np.vdot(psi_ana.entries, psi_num.entries)) ** 2
                norms = (np.linalg.norm(psi_ana.entries) * np.linalg.norm(psi_num.entries)) ** 2
                report(f"t={t:g} lossless fidelity deficit", 1.0 - overlap / norms, FID_DEFICIT_TOL)
    except (IntegrationError, TruncationError) as exc:
        print(f"validation aborted: {exc}", file=stream)
        return EXIT_VALIDATION

    if failures:
        print(f"FAILED: {len(failures)} check(s): {'; '.join(failures)}", file=stream)
        return EXIT_VALIDATION
    print("all validation checks passed", file=stream)
    return EXIT_OK


def cmd_sweep_ratio(cfg: RunConfig, times: Sequence[float]) -> int:
    if not cfg.out_path:
        raise ConfigError("sweep-ratio needs out_path (--out_path or config key)")
    labels = [f"var_xv_t{t:g}" for t in times]
    lines = ["ratio," + ",".join(labels)]
    for k in range(10, 151):  # ratio grid [0.1, 1.5] in exact 0.01 steps
        ratio = k / 100.0
        params = classify_regime(1.0, ratio, cfg.gamma)
        row = [ratio]
        for t in times:
            row.append(quad_variances(params, t).var_xv)
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(cfg.out_path, "\n".join(lines) + "\n")
    return EXIT_OK


def _parse_times(text: str) -> List[float]:
    try:
        times = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad times list {text!r}") from exc
    if not times or any(t < 0 for t in times) or sorted(times) != times:
        raise ConfigError("times must be a nondecreasing, nonnegative list")
    return times


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ioncavity",
        description="Damped ion-cavity two-mode dynamics: closed forms and validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file (keys = RunConfig fields)")
        for f in fields(RunConfig):
            if f.name == "out_path":
                p.add_argument("--out_path", type=str, default=None)
            elif f.name in ("nc", "nv"):
                p.add_argument(f"--{f.name}", type=int, default=None)
            else:
                p.add_argument(f"--{f.name}", type=float, default=None)

    add_common(sub.add_parser("simulate", help="emit a time-series CSV"))
    add_common(sub.add_parser("revivals", help="print the revival schedule"))
    p_val = sub.add_parser("validate", help="run the analytic-vs-integrator suite")
    add_common(p_val)
    p_val.add_argument("--times", default="0.5,1,2,4", help="comma-separated checkpoints")
    p_val.set_defaults(omega2_default=0.3)
    p_sweep = sub.add_parser("sweep-ratio", help="CSV of Var X_v over omega2/omega1")
    add_common(p_sweep)
    p_sweep.add_argument("--times", default="1,5,10", help="comma-separated output times")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        # validate's documented default drive is omega2/omega1 = 0.3
        if args.command == "validate" and args.omega2 is None and not getattr(args, "config", None):
            args.omega2 = args.omega2_default
        cfg = _load_config(args).normalized()
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "revivals":
            return cmd_revivals(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, _parse_times(args.times))
        if args.command == "sweep-ratio":
            return cmd_sweep_ratio(cfg, _parse_times(args.times))
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidityError as exc:
        print(f"error: formula validity guard: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except RegimeError as exc:
        if args.command == "revivals":
            print(f"no revivals in this regime: {exc}", file=sys.stderr)
            return EXIT_NO_REVIVALS
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IonCavityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
