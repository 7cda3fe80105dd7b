"""Command-line harness: ``pwdgcond <subcommand> [flags]``.

Subcommands write CSV to ``--out`` (stdout if omitted). Settings may also
come from a ``--config`` file of ``key = value`` lines, keys spelled like the
long flags without dashes (``p-range`` or ``p_range``); flags win.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (partial
output is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from .assembly import dump_system
from .mesh import MESH_KINDS, DEFAULT_POLY_SEED, read_mesh, unit_square_mesh, write_mesh

logger = logging.getLogger("pwdgcond")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
PRECISION_TOKENS = {"f32": "binary32", "f64": "binary64"}

DEFAULTS = {
    "cond-shape": {"k": 10.0, "h": 1.0, "p-range": "1:15:2", "n-range": "3:64:1", "aspect-range": "1:16:1",
                   "polygon-size": "circumdiameter"},
    "fit-check": {"h-range": "0.5,0.25,0.125,0.0625,0.03125", "k-range": "5:30:1", "p-range": "5:23:2",
                  "convention": "side"},
    "solve": {"k": 10.0, "p-range": "3:25:2", "mesh": "poly", "m": 8, "precision": "f64",
              "congruence": "hermitian"},
    "gmres-table": {"k": 10.0, "p-range": "5:15:2", "mesh": "poly", "m": 8, "precision": "f64",
                    "congruence": "hermitian"},
    "mesh-gen": {"mesh": "poly", "m": 8},
}


class ConfigError(ValueError):
    pass


def parse_range(text: str, kind=int) -> list:
    """``A:B:S`` (inclusive of B) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = kind(parts[0]), kind(parts[1])
            s = kind(parts[2]) if len(parts) == 3 else kind(1)
            if s <= 0 or b < a:
                raise ValueError
            out = []
            i = 0
            while a + i * s <= b + (1e-12 if kind is float else 0):
                out.append(a + i * s)
                i += 1
            return out
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}; use A:B:S or a,b,c") from None


def read_config(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (t.strip() for t in line.split("=", 1))
                out[key.replace("_", "-")] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwdgcond", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=None, help="seed for poly meshes")

    def mesh_flags(sp):
        sp.add_argument("--mesh", choices=MESH_KINDS, default=None)
        sp.add_argument("--m", type=int, default=None)
        sp.add_argument("--mesh-file", default=None, help="read the mesh from a file instead")

    def solver_flags(sp):
        sp.add_argument("--k", type=float, default=None)
        sp.add_argument("--p", type=int, default=None, help="single p (overrides --p-range)")
        sp.add_argument("--p-range", default=None, help="A:B:S")
        sp.add_argument("--precision", choices=sorted(PRECISION_TOKENS), default=None)
        sp.add_argument("--congruence", choices=("hermitian", "transpose"), default=None)
        sp.add_argument("--theta0", type=float, default=None)
        sp.add_argument("--dump-system", default=None, help="write (A, b) per p to this path")

    sp = sub.add_parser("cond-shape", help="mass-matrix conditioning on n-gons and rectangles")
    common(sp)
    sp.add_argument("--k", type=float, default=None)
    sp.add_argument("--h", type=float, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--p-range", default=None)
    sp.add_argument("--n-range", default=None)
    sp.add_argument("--aspect-range", default=None)
    sp.add_argument("--polygon-size", choices=("diameter", "circumdiameter"), default=None)
    sp.add_argument("--theta0", type=float, default=None)

    sp = sub.add_parser("fit-check", help="cond_2(M_K) against the empirical law on a square")
    common(sp)
    sp.add_argument("--h-range", default=None)
    sp.add_argument("--k-range", default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--p-range", default=None)
    sp.add_argument("--convention", choices=("side", "diameter"), default=None)
    sp.add_argument("--theta0", type=float, default=None)

    sp = sub.add_parser("solve", help="direct solves, original vs orthogonalised basis")
    common(sp)
    mesh_flags(sp)
    solver_flags(sp)

    sp = sub.add_parser("gmres-table", help="Hermitian-part eigenvalues and GMRES counts")
    common(sp)
    mesh_flags(sp)
    solver_flags(sp)

    sp = sub.add_parser("mesh-gen", help="write a unit-square mesh file")
    common(sp)
    mesh_flags(sp)
    return parser


def _settings(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        file_cfg = read_config(args.config)
        cfg.update(file_cfg)
    for key, value in vars(args).items():
        if value is None or key in ("command", "config", "verbose"):
            continue
        cfg[key.replace("_", "-")] = value
    return cfg


def _get(cfg: dict, key: str, kind):
    try:
        return kind(cfg[key])
    except KeyError:
        raise ConfigError(f"missing setting {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r}") from None


def _ps(cfg: dict) -> list[int]:
    if cfg.get("p") is not None:
        ps = [_get(cfg, "p", int)]
    else:
        ps = parse_range(cfg["p-range"], int)
    if not ps or min(ps) < 1:
        raise ConfigError("p values must be >= 1")
    return ps


def _mesh(cfg: dict):
    if cfg.get("mesh-file"):
        try:
            return read_mesh(cfg["mesh-file"])
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read mesh file: {exc}") from None
    kind = cfg.get("mesh", "poly")
    if kind not in MESH_KINDS:
        raise ConfigError(f"mesh must be one of {MESH_KINDS}")
    m = _get(cfg, "m", int)
    if m < 1:
        raise ConfigError("m must be >= 1")
    seed = _get(cfg, "seed", int) if cfg.get("seed") is not None else DEFAULT_POLY_SEED
    return unit_square_mesh(kind, m, seed=seed)


def _positive(cfg, key) -> float:
    v = _get(cfg, key, float)
    if not v > 0:
        raise ConfigError(f"{key} must be positive")
    return v


def _dumper(cfg: dict, ps: list[int]):
    target = cfg.get("dump-system")
    if not target:
        return None
    path = Path(target)

    def dump(p, system):
        out = path if len(ps) == 1 else path.with_name(f"{path.stem}.p{p}{path.suffix}")
        dump_system(system, out)

    return dump


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    status = EXIT_OK
    summary: list[str] = []
    try:
        cfg = _settings(args)
        cmd = args.command
        if cmd == "cond-shape":
            text = rows_to_csv(
                ex.cond_shape_rows(
                    ns=parse_range(cfg["n-range"], int),
                    aspects=parse_range(cfg["aspect-range"], float),
                    ps=_ps(cfg),
                    h=_positive(cfg, "h"),
                    k=_positive(cfg, "k"),
                    theta0=_get(cfg, "theta0", float) if "theta0" in cfg else 0.0,
                    polygon_size=cfg["polygon-size"],
                ),
                ex.COND_SHAPE_COLUMNS,
            )
        elif cmd == "fit-check":
            rows = ex.fit_check_rows(
                parse_range(cfg["h-range"], float),
                parse_range(cfg["k-range"], float),
                _ps(cfg),
                convention=cfg["convention"],
                theta0=_get(cfg, "theta0", float) if "theta0" in cfg else 0.0,
            )
            text = rows_to_csv(rows, ex.FIT_CHECK_COLUMNS)
            if rows:
                ratios = [r["ratio"] for r in rows]
                inside = sum(1.0 <= r <= 10.0 for r in ratios)
                summary.append(
                    f"# {len(rows)} admissible points, ratio min {min(ratios):.6g} max {max(ratios):.6g}, "
                    f"{inside}/{len(rows)} in [1, 10] ({cfg['convention']} convention)"
                )
            else:
                summary.append("# no admissible points")
        elif cmd in ("solve", "gmres-table"):
            mesh = _mesh(cfg)
            k = _positive(cfg, "k")
            ps = _ps(cfg)
            precision = PRECISION_TOKENS.get(cfg["precision"])
            if precision is None:
                raise ConfigError(f"precision must be one of {sorted(PRECISION_TOKENS)}")
            congruence = cfg["congruence"]
            if congruence not in ("hermitian", "transpose"):
                raise ConfigError("congruence must be hermitian or transpose")
            theta0 = _get(cfg, "theta0", float) if "theta0" in cfg else 0.0
            log = ex.RunLog()
            if cmd == "solve":
                rows = ex.solve_rows(mesh, k, ps, precision, congruence, theta0, log, _dumper(cfg, ps))
                text = rows_to_csv(rows, ex.SOLVE_COLUMNS)
            else:
                rows = ex.gmres_table_rows(mesh, k, ps, congruence, precision, theta0, log=log,
                                           dump=_dumper(cfg, ps))
                text = rows_to_csv(rows, ex.GMRES_TABLE_COLUMNS)
                bad = [b for b in log.bound_checks if b[2] > 0]
                summary.append(
                    f"# contraction bound checked on {len(log.bound_checks)} runs, {len(bad)} with violations"
                )
            summary += [f"# note: {n}" for n in log.notes]
            if log.failures:
                summary += [f"# failure: {f}" for f in log.failures]
                status = EXIT_NUMERIC
        else:
            mesh = _mesh(cfg)
            if not cfg.get("out"):
                raise ConfigError("mesh-gen needs --out")
            write_mesh(mesh, cfg["out"])
            print(f"# wrote {mesh.n_elements} elements, {len(mesh.edges)} edges to {cfg['out']}")
            return EXIT_OK
    except ConfigError as exc:
        print(f"pwdgcond: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.get("out")
    if out:
        Path(out).write_text(text)
        for line in summary:
            print(line)
    else:
        sys.stdout.write(text)
        for line in summary:
            print(line, file=sys.stderr)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
