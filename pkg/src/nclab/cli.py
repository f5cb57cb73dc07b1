"""Command-line experiment runner.

Usage::

    nclab <command> --config <path> [--seed <u64>] [--out <prefix>]

Commands: character-check, heat-fit, zeta-residue, props. Each writes one
CSV table (to ``<prefix>_<command>.csv`` or stdout) whose ``#`` header lines
carry the config hash, the truncation N, the grid specs and the seed.

Exit codes: 0 success, 1 check failed, 2 config error, 3 truncation error,
4 chain is not a cycle, 5 ill-conditioned fit.
"""

import argparse
import io
import os
import sys
import warnings

import numpy as np

from . import asym, hochschild as hs, ideals, props, triples
from .config import ConfigError, load_config
from .exceptions import IllConditioned, InsufficientData, NclabError, TruncationError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_TRUNC, EXIT_CYCLE, EXIT_COND = range(6)

COLUMNS = {
    "character-check": ["quantity", "n", "value_re", "value_im"],
    "heat-fit": ["quantity", "s", "value_re", "value_im"],
    "zeta-residue": ["quantity", "z_re", "z_im", "value_re", "value_im"],
    "props": ["property", "trials", "measured", "threshold", "margin", "status"],
}


class Table:
    def __init__(self, command, cfg, seed):
        self.command = command
        self.cfg = cfg
        self.seed = seed
        self.rows = []
        self.notes = []

    def add(self, *values):
        self.rows.append(values)

    def note(self, text):
        self.notes.append(text)

    def render(self, code):
        out = io.StringIO()
        cfg = self.cfg
        grids = "; ".join(f"{k}={g.describe()}" for k, g in sorted(cfg.grids.items()))
        out.write(f"# command: {self.command}\n")
        out.write(f"# config_sha256: {cfg.sha256}\n")
        out.write(f"# model: {cfg.model.get('name')}\n")
        out.write(f"# N: {cfg.model.get('N', '')}\n")
        out.write(f"# grids: {grids}\n")
        out.write(f"# seed: {self.seed}\n")
        for n in self.notes:
            out.write(f"# note: {n}\n")
        out.write(f"# exit_code: {code}\n")
        out.write(",".join(COLUMNS[self.command]) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        return out.getvalue()


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    return str(v)


def _cplx(v):
    v = complex(v)
    return v.real, v.imag


# --------------------------------------------------------------------------
# model and chain construction


def build_model(cfg, N=None):
    mc = cfg.model
    name = mc["name"]
    N = int(mc["N"] if N is None else N)
    if name == "circle":
        return triples.build_circle(N, mc.get("labels", [1, -1]))
    if name == "torus2":
        return triples.build_torus2(N)
    if name == "moyal":
        return triples.build_moyal_lattice(
            N, int(mc.get("p", 2)), np.asarray(mc.get("theta", [[0, 0], [0, 0]]), float),
            float(mc.get("spacing", 1.0)),
        )
    raise ConfigError(f"model {name!r} cannot be built here")


def _factor(m, label):
    ops = [m.generator(part.strip()) for part in str(label).split(".")]
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def _coef(c):
    if isinstance(c, list):
        if len(c) != 2:
            raise ConfigError(f"complex coefficient must be [re, im], got {c!r}")
        return complex(c[0], c[1])
    return complex(c)


def build_chain(cfg, m):
    """Chain from ``[[coef, [label, ...]], ...]``.

    ``coef`` is a number or ``[re, im]``; a label ``"a.b"`` is the product ab.
    """
    if not cfg.chain:
        return hs.TensorChain(m.p)
    try:
        terms = tuple(
            (_coef(c), tuple(_factor(m, lab) for lab in labels)) for c, labels in cfg.chain
        )
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    chain = hs.TensorChain(len(terms[0][1]) - 1, terms)
    if chain.degree != m.p:
        raise ConfigError(f"chain degree {chain.degree} differs from model p={m.p}")
    return chain


def _cycle_gate(table, cfg, c, m):
    bnorm = hs.chain_norm(hs.boundary(c).collect(), mask=m.interior_all) if c.terms else 0.0
    table.add("boundary_norm", None, *_cplx(bnorm))
    if bnorm > cfg.tol("cycle", 1e-8):
        table.note(f"warning: chain is not a cycle, interior boundary norm {bnorm:.3e}")
        return False
    return True


# --------------------------------------------------------------------------
# commands


def cmd_character_check(cfg, seed=0):
    """Compare ``Ch(c)`` with the log-sum coefficient of ``Omega(c)(1+D^2)^{-p/2}``."""
    table = Table("character-check", cfg, seed)
    m = build_model(cfg)
    c = build_chain(cfg, m)
    if not _cycle_gate(table, cfg, c, m):
        return EXIT_CYCLE, table
    ch = hs.chern(c, m, cycle_tol=None)
    X = hs.omega_map(c, m) @ m.func(lambda t: (1.0 + t * t) ** (-m.p / 2.0))
    if "n" in cfg.grids:
        ns = np.unique(cfg.grid("n").values().astype(int))
    else:
        ns = np.unique(np.geomspace(1, m.dim_H - 1, 48).astype(int))
    ns, sums = ideals.eigen_partial_sums(X, ns)
    fit = ideals.measurability_fit(zip(ns, sums))
    diff = fit.c - ch
    table.add("chern", None, *_cplx(ch))
    table.add("fit_c", None, *_cplx(fit.c))
    table.add("difference", None, *_cplx(diff))
    table.add("remainder_sup", None, fit.remainder_sup, 0.0)
    table.add("remainder_trend", None, fit.trend, 0.0)
    table.add("window_lo", fit.window[0], 0.0, 0.0)
    table.add("window_hi", fit.window[1], 0.0, 0.0)
    for n, s in zip(ns, sums):
        table.add("partial_sum", int(n), *_cplx(s))
    ok = abs(diff) <= cfg.tol("character", 0.05) * abs(ch) + cfg.tol("character_abs", 1e-9)
    return (EXIT_OK if ok else EXIT_FAIL), table


def cmd_heat_fit(cfg, seed=0):
    """Fit the heat trace of ``Omega(c)`` and compare c_{-2} with ``(p/2) Ch(c)``."""
    table = Table("heat-fit", cfg, seed)
    s_grid = cfg.grid("s").values()
    exps = cfg.fit.get("exponents", [-2, -1, 0])
    if cfg.model["name"] == "synthetic":
        coefs = cfg.model.get("coefficients", [1.0, 0.0, 0.0])
        samples = [(s, sum(a * s**e for a, e in zip(coefs, exps))) for s in s_grid]
        target = coefs[exps.index(-2)]
    else:
        m = build_model(cfg)
        c = build_chain(cfg, m)
        if not _cycle_gate(table, cfg, c, m):
            return EXIT_CYCLE, table
        ch = hs.chern(c, m, cycle_tol=None)
        X = hs.omega_map(c, m)
        samples = [(s, asym.heat_trace(m, X, s)) for s in s_grid]
        target = 0.5 * m.p * ch
    for s, v in samples:
        table.add("heat_trace", s, *_cplx(v))
    fit = asym.fit_power(samples, exps, max_cond=cfg.tol("max_cond", 1e10))
    for e, a in zip(fit.exponents, fit.coefficients):
        table.add(f"c_{e:g}", None, *_cplx(a))
    c2 = fit.coef(-2)
    gap = abs(c2 - target) / max(abs(target), 1e-300)
    table.add("target", None, *_cplx(target))
    table.add("rel_gap", None, gap, 0.0)
    table.add("residual_sup", None, fit.residual_sup, 0.0)
    table.add("condition", None, fit.cond, 0.0)
    ok = gap <= cfg.tol("heat", 0.02)
    return (EXIT_OK if ok else EXIT_FAIL), table


def zeta_samples(cfg, m, c, zs):
    """Zeta values of ``Omega(c)``, tail-extrapolated in N when configured."""
    X = hs.omega_map(c, m)
    vals = np.array([asym.zeta(m, X, z) for z in zs])
    if not cfg.fit.get("richardson", True):
        return vals
    mh = build_model(cfg, N=m.trunc // 2)
    ch = build_chain(cfg, mh)
    Xh = hs.omega_map(ch, mh)
    half = np.array([asym.zeta(mh, Xh, z) for z in zs])
    return np.array([asym.richardson_tail(a, b, z - m.p) for a, b, z in zip(vals, half, zs)])


def cmd_zeta_residue(cfg, seed=0):
    """Residue of the zeta function of ``Omega(c)`` against ``p Ch(c)``."""
    table = Table("zeta-residue", cfg, seed)
    offsets = cfg.grid("z_offset").values()
    degree = int(cfg.fit.get("residue_degree", 2))
    if cfg.model["name"] == "synthetic":
        p = float(cfg.model.get("p", 1))
        r0 = complex(cfg.model.get("residue", 1.0))
        const = complex(cfg.model.get("constant", 0.0))
        zs = p + offsets
        vals = r0 / (zs - p) + const
        target = r0
    else:
        m = build_model(cfg)
        c = build_chain(cfg, m)
        if not _cycle_gate(table, cfg, c, m):
            return EXIT_CYCLE, table
        p = m.p
        zs = p + offsets
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            vals = zeta_samples(cfg, m, c, zs)
        target = p * hs.chern(c, m, cycle_tol=None)
    for z, v in zip(zs, vals):
        table.add("zeta", *_cplx(z), *_cplx(v))
    r = asym.residue_estimate(zip(zs, vals), p, degree=degree)
    gap = abs(r - target) / max(abs(target), 1e-300)
    table.add("residue", None, None, *_cplx(r))
    table.add("target", None, None, *_cplx(target))
    table.add("rel_gap", None, None, gap, 0.0)
    ok = gap <= cfg.tol("zeta", 0.05)
    return (EXIT_OK if ok else EXIT_FAIL), table


def cmd_props(cfg, seed=0):
    """Run the seeded property suite."""
    table = Table("props", cfg, seed)
    scale = float(cfg.props.get("tolerance_scale", 1.0))
    names = cfg.props.get("only")
    if names is not None:
        unknown = set(names) - set(props.PROPERTIES)
        if unknown:
            raise ConfigError(f"[props] only: unknown properties {sorted(unknown)}")
    failed = False
    for name, trials, measured, thr, ok in props.run_properties(seed, scale, names):
        table.add(name, trials, measured, thr, thr - measured, ok)
        failed |= not ok
    return (EXIT_FAIL if failed else EXIT_OK), table


COMMANDS = {
    "character-check": cmd_character_check,
    "heat-fit": cmd_heat_fit,
    "zeta-residue": cmd_zeta_residue,
    "props": cmd_props,
}


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _parser():
    ap = argparse.ArgumentParser(prog="nclab", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="INI experiment configuration")
    ap.add_argument("--seed", type=_seed, default=0, help="PCG64 seed (default 0)")
    ap.add_argument("--out", default=None, help="output path prefix; stdout if absent")
    return ap


def _thread_limit():
    raw = os.environ.get("NCLAB_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"NCLAB_THREADS must be an integer, got {raw!r}") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(n, 1))


def run(command, cfg, seed=0, out=None):
    """Run one command; returns ``(exit_code, csv_text)``."""
    code, table = COMMANDS[command](cfg, seed)
    text = table.render(code)
    prefix = out if out is not None else cfg.output.get("prefix")
    if prefix:
        path = f"{prefix}_{command.replace('-', '_')}.csv"
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(path, file=sys.stderr)
    else:
        sys.stdout.write(text)
    return code, text


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        limiter = _thread_limit()
        cfg = load_config(args.config)
        try:
            code, _ = run(args.command, cfg, args.seed, args.out)
        finally:
            if limiter is not None:
                limiter.restore_original_limits()
    except (ConfigError, InsufficientData) as exc:
        print(f"nclab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"nclab: truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNC
    except IllConditioned as exc:
        print(f"nclab: ill-conditioned fit: {exc}", file=sys.stderr)
        return EXIT_COND
    except NclabError as exc:
        print(f"nclab: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return code


if __name__ == "__main__":
    sys.exit(main())
