"""Command-line front end: configuration resolution, dispatch to the
samplers, dynamics, kernels, and verification suites, and atomic CSV
emission.

Configuration precedence: explicit flag > key=value config file >
PERIODIC_PITMAN_SEED environment variable (seed only) > built-in default.
All randomness flows from one seed through named substreams, so identical
invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import cyclic as cy
from . import dynamics as dy
from . import kernels as kn
from . import samplers as sp
from . import verify as vf
from .cyclic import SlopedFamily
from .samplers import RngStream

__all__ = ["RunConfig", "parse_args", "dispatch", "main"]

PROG = "periodic-pitman"
ENV_SEED = "PERIODIC_PITMAN_SEED"

VERIFY_SUITES = ("algebra", "burke", "chain-invariance", "sde-invariance",
                 "duality", "kernels", "jacobian")
# fixed per-suite substream so a suite's rows match whether it runs alone
# or inside `verify all`
SUITE_STREAM = {name: i + 1 for i, name in enumerate(VERIFY_SUITES)}

CSV_SCHEMAS = {
    ("sample", "nu"): "sample,site,value",
    ("sample", "mu"): "sample,slope,site,value",
    ("sample", "bridge"): "sample,slope,x,value",
    ("sample", "horizon"): "sample,slope,x,value",
    ("evolve", "sde"): "sample,slope,site,value",
    ("evolve", "dual"): "sample,slope,site,value",
    ("evolve", "chain"): "sample,slope,site,value",
    ("evolve", "multiline"): "sample,line,site,value",
    ("estimate", "sigma2"): "beta,sigma2_hat,stderr",
    ("estimate", "r-covariance"): "theta,R_hat,stderr",
    ("kernels", "table"): "n_period,t,y,pn,rho,abs_err",
    ("verify", None): "suite,check,statistic,threshold,pass",
}


@dataclass
class RunConfig:
    command: str
    sub: str
    n: int = 2
    slopes: tuple = (0.0, 1.0)
    beta: float = 1.0
    m_grid: int = 1024
    dt: float = 1e-3
    t_horizon: float = 1.0
    samples: int = 1
    steps: int = 1
    seed: int = 0
    theta: float = 0.0
    theta_grid: tuple = (0.0, 0.5, 1.0, 1.5, 2.0)
    gamma: float = 2.0
    alpha: float = 0.0
    mode: str = "iid-lig"
    workers: int = 0
    out: str = ""

    @property
    def k(self) -> int:
        return len(self.slopes)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: str, header: str, rows) -> None:
    """Write rows atomically: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    text = header + "\n" + "".join(
        ",".join(_fmt(v) for v in row) + "\n" for row in rows
    )
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument parsing


def parse_float_list(text: str):
    try:
        vals = tuple(float(tok) for tok in text.split(",") if tok != "")
    except ValueError:
        raise UsageError(f"not a comma-separated number list: {text!r}")
    if not vals:
        raise UsageError(f"empty number list: {text!r}")
    return vals


def parse_grid(text: str):
    """start:end:step, endpoints inclusive within half a step."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:end:step, got {text!r}")
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"grid must be numeric, got {text!r}")
    if step <= 0:
        raise UsageError("grid step must be positive")
    if end < start:
        raise UsageError("grid end must not precede start")
    vals = []
    i = 0
    while start + i * step <= end + step / 2:
        vals.append(start + i * step)
        i += 1
    return tuple(vals)


def _merge_negative_values(argv):
    """Join `--flag -1,0,1` into `--flag=-1,0,1` so argparse does not read
    the negative-number value as an option."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (tok.startswith("--") and "=" not in tok and nxt is not None
                and len(nxt) > 1 and nxt[0] == "-"
                and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _read_config_file(path: str) -> dict:
    entries = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise UsageError(
                        f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                entries[key.strip().replace("-", "_")] = value.strip()
        return entries
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Periodic Pitman transform toolkit: samplers, flows, "
                    "verification suites, and covariance estimators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False):
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (default: ${ENV_SEED} or 0)")
        p.add_argument("--config", default=None,
                       help="key=value config file; flags take precedence")
        p.add_argument("--out", default=None, help="output CSV path")
        p.add_argument("--beta", type=float, default=None,
                       help="noise scale > 0 (default 1)")
        if grid:
            p.add_argument("--n-grid", type=int, default=None,
                           help="grid resolution M (default 1024)")

    ps = sub.add_parser("sample", help="draw from the invariant constructions")
    pss = ps.add_subparsers(dest="sub", required=True)
    p = pss.add_parser("nu", help="single hyperplane-conditioned vector",
                       epilog="CSV columns: sample,site,value")
    common(p)
    p.add_argument("--n", type=int, default=None, help="ring size (default 2)")
    p.add_argument("--theta", type=float, default=None, help="slope (default 0)")
    p.add_argument("--samples", type=int, default=None)
    p = pss.add_parser("mu", help="jointly invariant stacked family",
                       epilog="CSV columns: sample,slope,site,value")
    common(p)
    p.add_argument("--n", type=int, default=None, help="ring size (default 2)")
    p.add_argument("--slopes", type=parse_float_list, default=None,
                   help="comma-separated slopes, e.g. -1,0,1")
    p.add_argument("--samples", type=int, default=None)
    p = pss.add_parser("bridge", help="pinned sloped bridge path",
                       epilog="CSV columns: sample,slope,x,value")
    common(p, grid=True)
    p.add_argument("--theta", type=float, default=None, help="endpoint slope")
    p.add_argument("--samples", type=int, default=None)
    p = pss.add_parser("horizon", help="jointly invariant bridge family",
                       epilog="CSV columns: sample,slope,x,value")
    common(p, grid=True)
    p.add_argument("--slopes", type=parse_float_list, default=None)
    p.add_argument("--samples", type=int, default=None)

    pe = sub.add_parser("evolve", help="run a flow or chain from equilibrium")
    pes = pe.add_subparsers(dest="sub", required=True)
    for name, hlp in (("sde", "coupled Euler-Maruyama flow"),
                      ("dual", "dual-drift flow on independent components"),
                      ("chain", "discrete coupled chain"),
                      ("multiline", "multiline update with carried weights")):
        p = pes.add_parser(name, help=hlp,
                           epilog="CSV columns: "
                           + CSV_SCHEMAS[("evolve", name)])
        common(p)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--slopes", type=parse_float_list, default=None)
        p.add_argument("--samples", type=int, default=None)
        if name in ("sde", "dual"):
            p.add_argument("--dt", type=float, default=None)
            p.add_argument("--t-horizon", type=float, default=None)
        else:
            p.add_argument("--steps", type=int, default=None)
            p.add_argument("--mode", choices=("iid-lig", "conditioned"),
                           default=None)
            p.add_argument("--gamma", type=float, default=None,
                           help="shape for iid-lig weights (default 2)")
            p.add_argument("--alpha", type=float, default=None,
                           help="slope for conditioned weights (default 0)")

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=VERIFY_SUITES + ("all",))
    common(pv)
    pv.add_argument("--samples", type=int, default=None,
                    help="override the suite's default sample count")
    pv.add_argument("--workers", type=int, default=None,
                    help="parallel suites in `verify all` "
                         "(default: available cores)")

    pt = sub.add_parser("estimate", help="Monte Carlo covariance estimators")
    pts = pt.add_subparsers(dest="sub", required=True)
    p = pts.add_parser("sigma2", help="three-bridge variance constant",
                       epilog="CSV columns: beta,sigma2_hat,stderr")
    common(p, grid=True)
    p.add_argument("--samples", type=int, default=None)
    p = pts.add_parser("r-covariance", help="covariance curve over slopes",
                       epilog="CSV columns: theta,R_hat,stderr")
    common(p, grid=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--theta-grid", type=parse_grid, default=None,
                   help="start:end:step, endpoints inclusive (default 0:2:0.5)")

    pk = sub.add_parser("kernels", help="kernel tables")
    pks = pk.add_subparsers(dest="sub", required=True)
    p = pks.add_parser("table", help="discrete vs continuum kernel grid",
                       epilog="CSV columns: n_period,t,y,pn,rho,abs_err")
    common(p)

    return parser


DEFAULTS = RunConfig("", "")


def parse_args(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(_merge_negative_values(list(argv)))
    file_cfg = _read_config_file(ns.config) if getattr(ns, "config", None) else {}

    def resolve(key, cast, default):
        flag = getattr(ns, key, None)
        if flag is not None:
            return flag
        if key in file_cfg:
            try:
                return cast(file_cfg[key])
            except (ValueError, UsageError):
                raise UsageError(f"config key {key}: bad value {file_cfg[key]!r}")
        return default

    seed_default = 0
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        try:
            seed_default = int(env_seed)
        except ValueError:
            raise UsageError(f"${ENV_SEED} must be an integer, got {env_seed!r}")

    command = ns.command
    sub = getattr(ns, "sub", None) or getattr(ns, "suite", "")
    cfg = RunConfig(
        command=command,
        sub=sub,
        n=resolve("n", int, DEFAULTS.n),
        slopes=tuple(resolve("slopes", parse_float_list, DEFAULTS.slopes)),
        beta=resolve("beta", float, DEFAULTS.beta),
        m_grid=resolve("n_grid", int, DEFAULTS.m_grid),
        dt=resolve("dt", float, DEFAULTS.dt),
        t_horizon=resolve("t_horizon", float, DEFAULTS.t_horizon),
        samples=resolve("samples", int, 0),
        steps=resolve("steps", int, DEFAULTS.steps),
        seed=resolve("seed", int, seed_default),
        theta=resolve("theta", float, DEFAULTS.theta),
        theta_grid=tuple(resolve("theta_grid", parse_grid, DEFAULTS.theta_grid)),
        gamma=resolve("gamma", float, DEFAULTS.gamma),
        alpha=resolve("alpha", float, DEFAULTS.alpha),
        mode=resolve("mode", str, DEFAULTS.mode),
        workers=resolve("workers", int, os.cpu_count() or 1),
        out=resolve("out", str, ""),
    )
    if cfg.samples == 0:
        cfg.samples = 1
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.beta <= 0:
        raise UsageError("--beta must be positive")
    if cfg.n < 1:
        raise UsageError("--n must be at least 1")
    if cfg.m_grid < 2:
        raise UsageError("--n-grid must be at least 2")
    if cfg.samples < 1:
        raise UsageError("--samples must be at least 1")
    if cfg.steps < 0:
        raise UsageError("--steps must be nonnegative")
    if cfg.dt <= 0:
        raise UsageError("--dt must be positive")
    if cfg.t_horizon < 0:
        raise UsageError("--t-horizon must be nonnegative")
    if cfg.workers < 1:
        raise UsageError("--workers must be at least 1")
    if cfg.mode not in ("iid-lig", "conditioned"):
        raise UsageError(f"--mode must be iid-lig or conditioned, got {cfg.mode}")
    if not cfg.slopes:
        raise UsageError("--slopes must not be empty")


# ---------------------------------------------------------------------------
# command bodies


def _default_out(cfg: RunConfig) -> str:
    return cfg.out or f"{cfg.command}_{cfg.sub.replace('-', '_')}.csv"


def _long_rows_sites(arr, labels):
    """(k, samples, n) array to rows (sample, label_r, site, value)."""
    k, samples, n = arr.shape
    rows = []
    for s in range(samples):
        for r in range(k):
            for i in range(n):
                rows.append((s, labels[r], i, arr[r, s, i]))
    return rows


def _long_rows_grid(arr, labels, m):
    """(k, samples, m+1) array to rows (sample, label_r, x_j, value)."""
    k, samples, _ = arr.shape
    xs = np.arange(m + 1) / m
    rows = []
    for s in range(samples):
        for r in range(k):
            for j in range(m + 1):
                rows.append((s, labels[r], xs[j], arr[r, s, j]))
    return rows


def _cmd_sample(cfg: RunConfig) -> int:
    rng = RngStream(cfg.seed)
    if cfg.sub == "nu":
        draws = sp.sample_nu(rng, cfg.n, cfg.theta, cfg.beta, size=cfg.samples)
        rows = [(s, i, draws[s, i])
                for s in range(cfg.samples) for i in range(cfg.n)]
        write_csv(_default_out(cfg), CSV_SCHEMAS[("sample", "nu")], rows)
    elif cfg.sub == "mu":
        fam = sp.sample_mu(rng, cfg.n, cfg.slopes, cfg.beta, size=cfg.samples)
        rows = _long_rows_sites(fam.vectors, cfg.slopes)
        write_csv(_default_out(cfg), CSV_SCHEMAS[("sample", "mu")], rows)
    elif cfg.sub == "bridge":
        path = sp.sample_bridge(rng, cfg.m_grid, cfg.beta, cfg.theta,
                                size=cfg.samples)
        rows = _long_rows_grid(path.values[None], [cfg.theta], cfg.m_grid)
        write_csv(_default_out(cfg), CSV_SCHEMAS[("sample", "bridge")], rows)
    else:
        fam = sp.sample_horizon(rng, cfg.m_grid, cfg.beta, cfg.slopes,
                                size=cfg.samples)
        rows = _long_rows_grid(fam.paths, cfg.slopes, cfg.m_grid)
        write_csv(_default_out(cfg), CSV_SCHEMAS[("sample", "horizon")], rows)
    return 0


def _equilibrium_family(cfg: RunConfig, rng: RngStream, stacked: bool):
    slopes = np.asarray(cfg.slopes, dtype=float)
    raw = np.stack([
        sp.sample_nu(rng.child(r), cfg.n, slopes[r], cfg.beta, size=cfg.samples)
        for r in range(len(slopes))
    ])
    vecs = cy.dk_stack(raw) if stacked else raw
    return SlopedFamily(vecs, slopes)


def _cmd_evolve(cfg: RunConfig) -> int:
    rng = RngStream(cfg.seed)
    out = _default_out(cfg)
    if cfg.sub in ("sde", "dual"):
        stacked = cfg.sub == "sde"
        fam = _equilibrium_family(cfg, rng, stacked=stacked)
        step = dy.em_step_sbe if cfg.sub == "sde" else dy.em_step_dual
        state = dy.SdeState(fam, beta=cfg.beta)
        final, _ = dy.evolve(state, cfg.dt, cfg.t_horizon, rng.child(1000),
                             step=step)
        rows = _long_rows_sites(final.family.vectors, cfg.slopes)
        write_csv(out, CSV_SCHEMAS[("evolve", cfg.sub)], rows)
    elif cfg.sub == "chain":
        fam = _equilibrium_family(cfg, rng, stacked=True)
        for s in range(cfg.steps):
            fam = dy.chain_step(fam, rng.child(1000 + s), mode=cfg.mode,
                                beta=cfg.beta, gamma=cfg.gamma, alpha=cfg.alpha)
        rows = _long_rows_sites(fam.vectors, cfg.slopes)
        write_csv(out, CSV_SCHEMAS[("evolve", "chain")], rows)
    else:
        fam = _equilibrium_family(cfg, rng, stacked=True)
        vecs = fam.vectors
        for s in range(cfg.steps):
            wrng = rng.child(1000 + s)
            if cfg.mode == "iid-lig":
                w = sp.log_inv_gamma(wrng, cfg.gamma, cfg.beta**-2,
                                     size=vecs.shape[1:])
            else:
                w = sp.sample_nu(wrng, cfg.n, cfg.alpha, cfg.beta,
                                 size=cfg.samples)
            vecs, _ = cy.multiline_step(w, vecs)
        rows = _long_rows_sites(vecs, list(range(1, len(cfg.slopes) + 1)))
        write_csv(out, CSV_SCHEMAS[("evolve", "multiline")], rows)
    return 0


def _run_suite(name: str, cfg: RunConfig):
    rng = RngStream(cfg.seed, stream=SUITE_STREAM[name])
    n_override = None if cfg.samples <= 1 else cfg.samples
    if name == "algebra":
        return vf.algebra_suite(rng, families_per_combo=n_override or 1000)
    if name == "burke":
        return vf.burke_test(3, 2.0, 2.0, 1.0, n_override or 100000, rng)
    if name == "chain-invariance":
        return vf.invariance_chain_test(2, (0.0, 1.0), 1.0, "conditioned", 1,
                                        n_override or 100000, rng, alpha=-1.0)
    if name == "sde-invariance":
        return vf.invariance_sde_test(2, (0.0, 1.0), 1.0, 1e-3, 1.0,
                                      n_override or 10000, rng)
    if name == "duality":
        return vf.duality_order_test(3, (0.0, 1.0), 1.0, (4e-3, 2e-3, 1e-3),
                                     0.5, n_override or 100, rng)
    if name == "kernels":
        return vf.kernels_suite()
    return vf.jacobian_suite(rng, points=n_override or 100)


def _cmd_verify(cfg: RunConfig) -> int:
    suites = VERIFY_SUITES if cfg.sub == "all" else (cfg.sub,)
    t0 = time.time()
    if len(suites) > 1 and cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(lambda s: _run_suite(s, cfg), suites))
    else:
        reports = [_run_suite(s, cfg) for s in suites]
    for rep in reports:
        print("\n".join(rep.summary_lines()))
    overall = all(rep.passed for rep in reports)
    if len(suites) > 1:
        n_pass = sum(rep.passed for rep in reports)
        print(f"[{'PASS' if overall else 'FAIL'}] all: "
              f"{n_pass}/{len(suites)} suites")
    print(f"wall time {time.time() - t0:.2f}s", file=sys.stderr)
    if cfg.out:
        rows = [(rep.suite, c.name, c.statistic, c.threshold, c.passed)
                for rep in reports for c in rep.checks]
        write_csv(cfg.out, CSV_SCHEMAS[("verify", None)], rows)
    return 0 if overall else 1


def _cmd_estimate(cfg: RunConfig) -> int:
    samples = cfg.samples if cfg.samples > 1 else 10000
    rng = RngStream(cfg.seed)
    if cfg.sub == "sigma2":
        value, stderr = vf.estimate_sigma2(cfg.beta, cfg.m_grid, samples, rng)
        rows = [(cfg.beta, value, stderr)]
        write_csv(_default_out(cfg), CSV_SCHEMAS[("estimate", "sigma2")], rows)
    else:
        rows = []
        for i, theta in enumerate(cfg.theta_grid):
            value, stderr = vf.estimate_R(theta, cfg.beta, cfg.m_grid,
                                          samples, rng.child(i))
            rows.append((theta, value, stderr))
        write_csv(_default_out(cfg), CSV_SCHEMAS[("estimate", "r-covariance")],
                  rows)
    return 0


def _cmd_kernels(cfg: RunConfig) -> int:
    rows = []
    for n in (100, 300, 1000):
        for t in np.linspace(0.25, 2.0, 5):
            for y in np.linspace(-1.0, 1.0, 5):
                pn = kn.pn_kernel(n, t, y, 0.0, 0.0)
                rho = kn.gauss_kernel(t, y)
                rows.append((n, t, y, pn, rho, abs(pn - rho)))
    write_csv(_default_out(cfg), CSV_SCHEMAS[("kernels", "table")], rows)
    return 0


def dispatch(cfg: RunConfig) -> int:
    body = {"sample": _cmd_sample, "evolve": _cmd_evolve,
            "verify": _cmd_verify, "estimate": _cmd_estimate,
            "kernels": _cmd_kernels}[cfg.command]
    try:
        return body(cfg)
    except OSError as exc:
        print(f"{PROG}: i/o error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, cy.DomainError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
