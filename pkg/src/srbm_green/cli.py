"""Command-line interface: configuration files, subcommands and the ``validate`` battery."""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import bvp, dim1, montecarlo
from .curve import contour_grid
from .errors import SRBMError
from .gluing import GluingMap
from .kernel import CSV_HEADER, branch_points, gamma, theta2_branch
from .model import ModelParams, Regime, classify
from .montecarlo import SimConfig

MODEL_KEYS = ("sigma11", "sigma12", "sigma22", "mu1", "mu2", "r12", "r21", "x1", "x2")
RUN_KEYS = ("quadratureNodes", "quadratureTol", "dt", "tMax", "paths", "seed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    quadrature_nodes: int = 512
    quadrature_tol: float = 1e-8
    sim: SimConfig = field(default_factory=SimConfig)

    def echo(self):
        out = dict(self.model.as_dict())
        out.update(
            quadratureNodes=self.quadrature_nodes,
            quadratureTol=self.quadrature_tol,
            dt=self.sim.dt,
            tMax=self.sim.t_max,
            paths=self.sim.paths,
            seed=self.sim.seed,
        )
        return out


def _number(key, text, where):
    try:
        if key in ("quadratureNodes", "paths", "seed"):
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: value {text!r} for {key} is not a valid number") from None


def _parse_lines(lines, where="line"):
    vals, unknown = {}, []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{where} {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in MODEL_KEYS and key not in RUN_KEYS:
            unknown.append(f"{key} ({where} {lineno})")
            continue
        if key in vals:
            raise ConfigError(f"{where} {lineno}: duplicate key {key}")
        vals[key] = _number(key, value, f"{where} {lineno}")
    if unknown:
        raise ConfigError("unknown keys: " + ", ".join(unknown))
    return vals


def parse_config(text: str, overrides=()) -> RunConfig:
    """Parse ``key = value`` lines (``#`` comments allowed) into a :class:`RunConfig`.

    ``overrides`` are further ``key=value`` strings applied on top.
    """
    vals = _parse_lines(text.splitlines())
    vals.update(_parse_lines(overrides, "--set"))
    return _build(vals)


def _build(vals):
    model = ModelParams(**{k: vals[k] for k in MODEL_KEYS if k in vals})
    sim = SimConfig(
        dt=vals.get("dt", 1e-3),
        t_max=vals.get("tMax", 30.0),
        paths=vals.get("paths", 100_000),
        seed=vals.get("seed", 42),
    )
    return RunConfig(model, vals.get("quadratureNodes", 512), vals.get("quadratureTol", 1e-8), sim)


def header(cfg: RunConfig) -> str:
    return f"# srbm-green v{__version__} seed={cfg.sim.seed} nodes={cfg.quadrature_nodes}"


def _fmt(v):
    return repr(float(v))


# ----------------------------------------------------------------------------
# validate battery


@dataclass
class Check:
    name: str
    status: str
    value: float
    tolerance: float

    def row(self):
        return f"{self.name},{self.status},{_fmt(self.value)},{_fmt(self.tolerance)}"


def _check(name, value, tol):
    ok = value <= tol
    return Check(name, "PASS" if ok else "FAIL", value, tol)


def _kernel_checks(p):
    k = branch_points(p)
    gm = GluingMap.from_model(p, k)
    rng = np.random.default_rng(0)
    t1 = k.theta1_minus - rng.exponential(3.0, 10_000) + 1j * 0.0
    worst = 0.0
    for s in (1, -1):
        t2 = theta2_branch(p, t1, s, k)
        worst = max(worst, float(np.max(np.abs(gamma(p, (t1, t2))) / (1 + np.abs(t1) ** 2))))
    zc = theta2_branch(p, t1[:200], -1, k)
    glue = float(np.max(np.abs(gm.w(zc) - gm.w(np.conj(zc))) / (1 + np.abs(gm.w(zc)))))
    wv = abs(gm.w(gm.vertex()) + 1)
    pts = gm.vertex() - 0.3 - rng.uniform(0, 3, 20) + 1j * rng.uniform(-2, 2, 20)
    h = 1e-6
    fd = (gm.w(pts + h) - gm.w(pts - h)) / (2 * h)
    dev = float(np.max(np.abs(fd - gm.w_prime(pts)) / np.abs(gm.w_prime(pts))))
    return [
        _check("kernel_branch_residual", worst, 1e-10),
        _check("gluing_identity", glue, 1e-10),
        _check("gluing_vertex", wv, 1e-10),
        _check("gluing_derivative_fd", dev, 1e-6),
    ]


def _transform_checks(cfg: RunConfig):
    p, n, tol = cfg.model, cfg.quadrature_nodes, cfg.quadrature_tol
    s = bvp.solver(p, n, tol)
    k = s.s1.k
    out = []
    chi = bvp.index_chi(p, k)
    out.append(_check("index_chi_in_0_1", 0.0 if chi in (0, 1) else 1.0, 0.0))
    # exact anchors
    (a1, a2), (b1, b2) = k.theta_star, k.theta_star_star
    if not k.star_star_degenerate:
        exact = -math.exp(b1 * p.x1 + b2 * p.x2) / (b1 + p.r21 * b2)
        out.append(_check("psi1_anchor_rel", abs(s.psi1(b2) - exact) / abs(exact), 1e-6))
    if not k.star_degenerate:
        exact = -math.exp(a1 * p.x1 + a2 * p.x2) / (p.r12 * a1 + a2)
        out.append(_check("psi2_anchor_rel", abs(s.psi2(a1) - exact) / abs(exact), 1e-6))
    # kernel relation on the real ellipse
    worst = 0.0
    for t1, t2 in bvp.ellipse_arc_points(p, k):
        r = (t1 + p.r21 * t2) * s.psi1(t2) + (p.r12 * t1 + t2) * s.psi2(t1) + math.exp(t1 * p.x1 + t2 * p.x2)
        worst = max(worst, abs(r) / math.exp(t1 * p.x1 + t2 * p.x2))
    out.append(_check("kernel_relation_residual", worst, 1e-6))
    # boundary condition with limits taken from the domain
    g = s.s1.grid
    idx = np.linspace(3, g.node_count - 40, 50).astype(int)
    worst = 0.0
    for i in idx:
        z = g.z[i]
        eps = 1e-6 * (1 + abs(z))
        a = s.psi1(z - eps)
        b = s.psi1(np.conj(z) - eps)
        worst = max(worst, abs(b - s.s1.bd.G[i] * a - s.s1.bd.g[i]) / (1 + abs(a)))
    out.append(_check("boundary_condition_residual", worst, 1e-5))
    # symmetry and convergence
    pts = [k.theta2_minus - 0.5 + 1j, -1.5 - 0.7j, k.theta2_minus - 2 + 0.2j]
    conj = max(abs(s.psi1(np.conj(t)) - np.conj(s.psi1(t))) / abs(s.psi1(t)) for t in pts)
    out.append(_check("conjugate_symmetry", conj, 1e-10))
    fine = bvp.solver(p, 2 * n, tol)
    conv = max(abs(s.psi1(t) - fine.psi1(t)) / abs(fine.psi1(t)) for t in pts)
    out.append(_check("grid_convergence", conv, 1e-7))
    if p.r12 == 0 and p.r21 == 0:
        # R = I: F = 1/theta2 decouples
        F = bvp.RationalFunction(poles=(0.0,))
        t = -1.5 if bvp.in_domain(p, k, -1.5) else k.theta2_minus - 0.5
        dev = abs(bvp.psi1_decoupled(p, None, F, t, n, tol) - s.psi1(t)) / abs(s.psi1(t))
        out.append(_check("decoupled_formula", dev, 1e-6))
    else:
        out.append(Check("decoupled_formula", "SKIPPED", float("nan"), 1e-6))
    return out


def _dim1_checks():
    from scipy.integrate import quad

    q = dim1.Dim1Params(1.0, 1.0, 1.0)
    worst = 0.0
    for th in (-0.3, -0.7, -1.0, -2.5):
        num = quad(lambda x: math.exp(th * x) * dim1.green_1d(q, x), 0, 1, epsabs=1e-14)[0]
        num += quad(lambda x: math.exp(th * x) * dim1.green_1d(q, x), 1, math.inf, epsabs=1e-14)[0]
        worst = max(worst, abs(num - dim1.psi_1d(q, th).real))
    return [_check("dim1_transform_quadrature", worst, 1e-10)]


_TRANSFORM_NAMES = (
    "index_chi_in_0_1",
    "psi1_anchor_rel",
    "psi2_anchor_rel",
    "kernel_relation_residual",
    "boundary_condition_residual",
    "conjugate_symmetry",
    "grid_convergence",
    "decoupled_formula",
)


def run_validate(cfg: RunConfig):
    """Run the invariant battery; returns a list of :class:`Check`."""
    checks = _kernel_checks(cfg.model)
    if classify(cfg.model).regime is Regime.TRANSIENT:
        checks += _transform_checks(cfg)
    else:
        checks += [Check(n, "SKIPPED", float("nan"), 0.0) for n in _TRANSFORM_NAMES]
    checks += _dim1_checks()
    return checks


# ----------------------------------------------------------------------------
# subcommands


def _pair(text, n=2):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _cplx(text):
    a, b = _pair(text)
    return complex(a, b)


def _value_rows(value, err):
    return ["re,im,abs_err_estimate", f"{_fmt(value.real)},{_fmt(value.imag)},{_fmt(err)}"]


def _cmd_psi(cfg, which, arg):
    p, n, tol = cfg.model, cfg.quadrature_nodes, cfg.quadrature_tol
    coarse, fine = bvp.solver(p, n, tol), bvp.solver(p, 2 * n, tol)
    if which == "psi1":
        f = lambda s: s.psi1(arg)  # noqa: E731
    elif which == "psi2":
        f = lambda s: s.psi2(arg)  # noqa: E731
    else:
        f = lambda s: s.psi(arg)  # noqa: E731
    v = f(coarse)
    return _value_rows(v, abs(v - f(fine)))


def _cmd_mc(cfg, args):
    p = cfg.model
    sim = replace(
        cfg.sim,
        paths=args.paths if args.paths is not None else cfg.sim.paths,
        dt=args.dt if args.dt is not None else cfg.sim.dt,
        t_max=args.tmax if args.tmax is not None else cfg.sim.t_max,
        seed=args.seed if args.seed is not None else cfg.sim.seed,
    )
    meta = f"{sim.paths},{_fmt(sim.dt)},{_fmt(sim.t_max)},{sim.seed}"
    if args.hist:
        x0, x1, y0, y1, nx, ny = args.hist
        grid = montecarlo.occupation_histogram(p, None, (x0, x1, y0, y1, int(nx), int(ny)), sim)
        rows = ["i,j,mean,stderr"]
        for i in range(grid.shape[0]):
            for j in range(grid.shape[1]):
                rows.append(f"{i},{j},{_fmt(grid[i, j].mean)},{_fmt(grid[i, j].stderr)}")
        return rows, sim
    if args.face:
        if args.theta is None or len(args.theta) != 2:
            raise SystemExit("--face needs --theta a,b (the other coordinate's variable)")
        est = montecarlo.estimate_psi_boundary(p, None, args.face, complex(*args.theta), sim)
    else:
        if args.theta is None or len(args.theta) != 4:
            raise SystemExit("mc needs --theta a,b,c,d, --face i --theta a,b, or --hist")
        t = args.theta
        est = montecarlo.estimate_psi(p, None, (complex(t[0], t[1]), complex(t[2], t[3])), sim)
    m = complex(est.mean)
    return ["mean_re,mean_im,stderr,paths,dt,tmax,seed",
            f"{_fmt(m.real)},{_fmt(m.imag)},{_fmt(est.stderr)},{meta}"], sim


def _floats(text):
    return [float(v) for v in text.split(",")]


def build_parser():
    ap = argparse.ArgumentParser(prog="srbm-green", description=__doc__)
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a configuration key (repeatable)")
    ap.add_argument("-o", "--output", help="write CSV here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("classify")
    sub.add_parser("kernel")
    sub.add_parser("curve")
    g = sub.add_parser("glue")
    g.add_argument("--theta2", type=_cplx, required=True)
    g = sub.add_parser("psi1")
    g.add_argument("--theta2", type=_cplx, required=True)
    g = sub.add_parser("psi2")
    g.add_argument("--theta1", type=_cplx, required=True)
    g = sub.add_parser("psi")
    g.add_argument("--theta", type=lambda s: _pair(s, 4), required=True)
    g = sub.add_parser("mc")
    g.add_argument("--paths", type=int)
    g.add_argument("--dt", type=float)
    g.add_argument("--tmax", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--theta", type=_floats)
    g.add_argument("--face", type=int, choices=(1, 2))
    g.add_argument("--hist", type=lambda s: _pair(s, 6))
    g = sub.add_parser("dim1")
    g.add_argument("--sigma2", type=float, default=1.0)
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--x0", type=float, default=0.0)
    g.add_argument("--x", type=float)
    g.add_argument("--theta", type=_cplx)
    sub.add_parser("validate")
    g = sub.add_parser("plot-data")
    g.add_argument("--start", type=_cplx, required=True)
    g.add_argument("--end", type=_cplx, required=True)
    g.add_argument("--n", type=int, default=50)
    return ap


def load_config(args) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    return parse_config(text, args.set)


def dispatch(args, cfg: RunConfig):
    """Return ``(csv_lines, exit_status)``."""
    p = cfg.model
    cmd = args.command
    status = 0
    if cmd == "classify":
        cl = classify(p)
        rows = ["exists,regime,drift_sign_case",
                f"{cl.exists},{cl.regime.value if cl.regime else 'None'},{cl.drift_sign_case.value}"]
    elif cmd == "kernel":
        rows = [CSV_HEADER, branch_points(p).csv_row()]
    elif cmd == "curve":
        grid = contour_grid(p, None, cfg.quadrature_nodes, cfg.quadrature_tol)
        rows = ["theta1,re_theta2,im_theta2,weight", *grid.csv_rows()]
    elif cmd == "glue":
        gm = GluingMap.from_model(p)
        w, wp = complex(gm.w(args.theta2)), complex(gm.w_prime(args.theta2))
        rows = ["re_w,im_w,re_wprime,im_wprime", f"{_fmt(w.real)},{_fmt(w.imag)},{_fmt(wp.real)},{_fmt(wp.imag)}"]
    elif cmd == "psi1":
        rows = _cmd_psi(cfg, "psi1", args.theta2)
    elif cmd == "psi2":
        rows = _cmd_psi(cfg, "psi2", args.theta1)
    elif cmd == "psi":
        t = args.theta
        rows = _cmd_psi(cfg, "psi", (complex(t[0], t[1]), complex(t[2], t[3])))
    elif cmd == "mc":
        rows, sim = _cmd_mc(cfg, args)
        cfg = replace(cfg, sim=sim)
    elif cmd == "dim1":
        q = dim1.Dim1Params(args.sigma2, args.mu, args.x0)
        if args.x is not None:
            rows = ["x,green", f"{_fmt(args.x)},{_fmt(dim1.green_1d(q, args.x))}"]
        elif args.theta is not None:
            v = dim1.psi_1d(q, args.theta)
            rows = ["re,im", f"{_fmt(v.real)},{_fmt(v.imag)}"]
        else:
            raise SystemExit("dim1 needs --x or --theta")
    elif cmd == "validate":
        checks = run_validate(cfg)
        rows = ["check_name,status,value,tolerance", *(c.row() for c in checks)]
        status = 1 if any(c.status == "FAIL" for c in checks) else 0
    elif cmd == "plot-data":
        s = bvp.solver(p, cfg.quadrature_nodes, cfg.quadrature_tol)
        rows = ["re_theta2,im_theta2,re_psi1,im_psi1"]
        for f in np.linspace(0.0, 1.0, args.n):
            t = args.start + f * (args.end - args.start)
            v = s.psi1(t)
            rows.append(f"{_fmt(t.real)},{_fmt(t.imag)},{_fmt(v.real)},{_fmt(v.imag)}")
    else:  # pragma: no cover - argparse rejects unknown commands
        raise SystemExit(f"unknown command {cmd}")
    return [header(cfg), *rows], status


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        rows, status = dispatch(args, cfg)
    except (SRBMError, ConfigError, ValueError) as exc:
        print(f"srbm-green: error: {exc}", file=sys.stderr)
        return 2
    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
