"""``neumann`` command line: simulate, verify, reduce and scan.

Every run is driven by one flat JSON config; flags override file values.
Exit codes: 0 success, 2 bad config, 3 integration failure, 4 failed
verification.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import bifurcation, dynamics, integrals, lax, reduction
from .errors import DomainError, IntegrationError, NeumannError
from .svg import render_scan

log = logging.getLogger("neumann")

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_VERIFY = 0, 2, 3, 4

THRESHOLDS = {
    "relation": 1e-12,
    "bracket": 1e-10,
    "lax": 1e-12,
    "curve": 1e-9,
    "node": 1e-12,
    "isospectral": 1e-7,
}


class ConfigError(NeumannError, ValueError):
    pass


@dataclass
class RunConfig:
    eigenvalues: list = field(default_factory=lambda: [1.0, 2.0, 2.0])
    q0: list | None = None
    p0: list | None = None
    h: float = 1e-3
    t_end: float = 10.0
    stride: int = 1
    order: int = 4
    ctol: float = dynamics.DEFAULT_CTOL
    h_tol: float = bifurcation.DEFAULT_H_TOL
    seed: int = 0
    out: str = "."
    n_points: int = 100
    n_lambda: int = 5
    broken_wedge: bool = False
    k_axis: list = field(default_factory=lambda: [-2.0, 2.0, 200])
    h2_axis: list = field(default_factory=lambda: [0.0, 5.0, 200])

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def validate(self):
        if len(self.eigenvalues) < 3:
            raise ConfigError("eigenvalues: need at least 3 entries")
        if not (self.h > 0 and self.t_end > 0):
            raise ConfigError("h and t_end must be positive")
        if int(self.stride) < 1:
            raise ConfigError("stride must be >= 1")
        if self.order not in (2, 4):
            raise ConfigError("order must be 2 or 4")
        for name in ("k_axis", "h2_axis"):
            ax = getattr(self, name)
            if len(ax) != 3 or int(ax[2]) < 0:
                raise ConfigError(f"{name} must be [min, max, count] with count >= 0")
        if (self.q0 is None) != (self.p0 is None):
            raise ConfigError("give both q0 and p0 or neither")
        if self.q0 is not None and len(self.q0) != len(self.eigenvalues):
            raise ConfigError("q0 length must match eigenvalues")
        if self.p0 is not None and len(self.p0) != len(self.eigenvalues):
            raise ConfigError("p0 length must match eigenvalues")
        try:
            self.potential()
        except DomainError as exc:
            raise ConfigError(f"eigenvalues: {exc}") from exc

    def potential(self) -> dynamics.PotentialSpec:
        return dynamics.PotentialSpec.from_eigenvalues(self.eigenvalues)

    def initial_point(self) -> dynamics.PhasePoint:
        if self.q0 is None:
            rng = np.random.default_rng(self.seed)
            return dynamics.random_phase_point(rng, len(self.eigenvalues))
        try:
            return dynamics.project_to_manifold(self.q0, self.p0, ctol=self.ctol)
        except DomainError as exc:
            raise ConfigError(f"initial point: {exc}") from exc


def fmt(x) -> str:
    """Shortest round-trip decimal, at most 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, str):
        return x
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _integral_columns(pot: dynamics.PotentialSpec):
    if pot.confluent:
        return [f"F{i + 1}" for i in range(pot.n)] + ["K"]
    return [f"F{i + 1}" for i in range(pot.dim)]


def _integral_values(pt, pot) -> list[float]:
    if pot.confluent:
        iv = integrals.confluent_integrals(pt, pot)
        return list(iv.F) + [iv.K]
    return list(integrals.uhlenbeck_generic(pt, pot))


def cmd_simulate(cfg: RunConfig) -> int:
    pot = cfg.potential()
    pt = cfg.initial_point()
    traj = dynamics.integrate(pt, pot, cfg.h, cfg.t_end, order=cfg.order)
    out = Path(cfg.out)
    dim = pot.dim
    int_cols = _integral_columns(pot)
    head = ["t"] + [f"q{i + 1}" for i in range(dim)] + [f"p{i + 1}" for i in range(dim)]
    traj_rows, int_rows = [], []
    first = None
    norm, tan = traj.constraint_residuals()
    for i in range(0, len(traj), int(cfg.stride)):
        x = traj.point(i)
        H = dynamics.hamiltonian(x, pot)
        vals = [H] + _integral_values(x, pot)
        first = first or vals
        drift = max(abs(v - v0) / max(abs(v0), 1.0) for v, v0 in zip(vals, first))
        t = traj.t[i]
        traj_rows.append([t, *traj.q[i], *traj.p[i], *vals, norm[i], tan[i]])
        int_rows.append([t, *vals, drift])
    _write_csv(out / "trajectory.csv", head + ["H"] + int_cols + ["norm_residual", "tangency_residual"], traj_rows)
    _write_csv(out / "integrals.csv", ["t", "H"] + int_cols + ["max_drift"], int_rows)
    log.info("wrote %d samples to %s", len(traj_rows), out)
    return EXIT_OK


def verification_report(cfg: RunConfig) -> dict:
    pot = cfg.potential()
    if not pot.confluent:
        raise ConfigError("verify needs a confluent potential (last two eigenvalues equal)")
    rng = np.random.default_rng(cfg.seed)
    pts = [dynamics.random_phase_point(rng, pot.dim) for _ in range(int(cfg.n_points))]
    lams = rng.uniform(0.3, 1.5, int(cfg.n_lambda)) * np.exp(1j * rng.uniform(0, 2 * np.pi, int(cfg.n_lambda)))

    sum_res = energy_res = bracket = lax_res = curve_res = node_res = 0.0
    for x in pts:
        r1, r2 = integrals.relation_residuals(x, pot)
        sum_res, energy_res = max(sum_res, r1), max(energy_res, r2)
        g = integrals.integral_gradients(x, pot)
        bracket = max(bracket, max(abs(integrals.poisson_bracket(u, v)) for u in g for v in g))
        for lam in lams:
            lax_res = max(lax_res, lax.lax_residual(x, pot, lam, broken_wedge=cfg.broken_wedge))
            curve_res = max(curve_res, lax.eigen_curve_check(x, pot, lam))
        node_res = max(node_res, lax.node_identity_residual(x, pot))

    start = cfg.initial_point()
    traj = dynamics.integrate(start, pot, cfg.h, cfg.t_end, order=cfg.order)
    picks = np.unique(np.linspace(0, len(traj) - 1, 6).astype(int))
    drift = lax.isospectral_drift([lax.spectral_poly(traj.point(i), pot) for i in picks])

    measured = {
        "relation": max(sum_res, energy_res),
        "bracket": bracket,
        "lax": lax_res,
        "curve": curve_res,
        "node": node_res,
        "isospectral": drift,
    }
    failed = sorted(k for k, v in measured.items() if not v <= THRESHOLDS[k])
    return {
        "eigenvalues": [float(a) for a in pot.eigenvalues],
        "n_points": int(cfg.n_points),
        "n_lambda": int(cfg.n_lambda),
        "seed": int(cfg.seed),
        "broken_wedge": bool(cfg.broken_wedge),
        "max_bracket": bracket,
        "max_lax_residual": lax_res,
        "max_curve_residual": curve_res,
        "max_node_residual": node_res,
        "relation_residuals": {"sum_F_minus_1": sum_res, "energy": energy_res},
        "isospectral_drift": drift,
        "thresholds": dict(THRESHOLDS),
        "failed": failed,
        "passed": not failed,
    }


def cmd_verify(cfg: RunConfig) -> int:
    report = verification_report(cfg)
    path = Path(cfg.out) / "verify.json"
    path.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if not report["passed"]:
        log.error("verification failed: %s", ", ".join(report["failed"]))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_reduce(cfg: RunConfig) -> int:
    pot = cfg.potential()
    if not pot.confluent:
        raise ConfigError("reduce needs a confluent potential")
    pt = cfg.initial_point()
    try:
        reduction.reduce(pt, pot)
    except DomainError as exc:
        raise ConfigError(f"initial point: {exc}") from exc
    traj = dynamics.integrate(pt, pot, cfg.h, cfg.t_end, order=cfg.order)
    n = pot.n
    head = ["t"] + [f"q_hat{i + 1}" for i in range(n)] + [f"p_hat{i + 1}" for i in range(n)]
    head += ["k", "H_r", "energy_gap"]
    rows = []
    for i in range(0, len(traj), int(cfg.stride)):
        x = traj.point(i)
        rp = reduction.reduce(x, pot)
        Hr = reduction.reduced_hamiltonian(rp, pot)
        rows.append([traj.t[i], *rp.q_hat, *rp.p_hat, rp.k, Hr, dynamics.hamiltonian(x, pot) - Hr])
    _write_csv(Path(cfg.out) / "reduced.csv", head, rows)
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    pot = cfg.potential()
    if not pot.confluent or pot.n != 2:
        raise ConfigError("scan draws the (K, 2H) plane and needs eigenvalues [a1, a2, a2]")
    grid = bifurcation.scan(pot, cfg.k_axis, cfg.h2_axis, h_tol=cfg.h_tol)
    out = Path(cfg.out)
    rows = ([k, h2, reg, real, ";".join(sorted(reasons))] for k, h2, reg, real, reasons in grid.rows())
    _write_csv(out / "scan.csv", ["k", "two_h", "regular", "realizable", "reasons"], rows)
    a = pot.eigenvalues
    title = f"A = diag({a[0]:g}, {a[1]:g}, {a[2]:g})"
    (out / "scan.svg").write_text(render_scan(grid, title), encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "reduce": cmd_reduce,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neumann", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--h-tol", type=float, dest="h_tol")
    parser.add_argument("--ctol", type=float)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    for key in ("out", "seed", "h_tol", "ctol"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = value
    try:
        return RunConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"neumann: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"neumann: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
