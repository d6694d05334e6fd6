"""Command-line front end: ``lgcluster {seeds,mutate,verify,markov,export}``.

Sequences are comma-separated 1-based indices (``-q 2,4``); everything
inside the library is 0-based.  Exit codes: 0 success, 1 a verification
failed, 2 usage error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .clusterkit import BMatrix, quiver_from_b
from .comparison import (
    MainVerifier,
    VerificationReport,
    b_from_seed,
    check_b_compat,
    check_initial_identity,
    check_phi_compat,
    markov_bfs,
    random_vectors,
    repetition_free_sequences,
)
from .exactalg import (
    DEFAULT_PRIME,
    EXACT,
    ExponentOverflow,
    Mode,
    RetryBudgetExhausted,
    is_probable_prime,
)
from .lgseed import LGSeed, NotLaurent, RepetitionRejected, SurfaceId, check_sequence, initial_seed, iterate
from .repchar import virtual_char_data

PRIME_ENV = "LGCLUSTER_PRIME"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    surfaces: tuple[SurfaceId, ...]
    sequence: tuple[int, ...] | None  # 0-based; None when not given
    mode: Mode
    fmt: str
    allow_repeats: bool
    cache_dir: Path | None


def parse_sequence(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    text = text.strip()
    if not text:
        return ()
    try:
        seq = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"bad sequence {text!r}: expected comma-separated integers") from None
    if any(i < 1 for i in seq):
        raise UsageError("sequence indices are 1-based")
    return tuple(i - 1 for i in seq)


def resolve_prime(flag: int | None, env: dict | None = None) -> int:
    """``--prime`` beats ``$LGCLUSTER_PRIME`` beats the built-in default."""
    env = os.environ if env is None else env
    if flag is not None:
        p = flag
    elif env.get(PRIME_ENV):
        try:
            p = int(env[PRIME_ENV])
        except ValueError:
            raise UsageError(f"{PRIME_ENV} is not an integer") from None
    else:
        p = DEFAULT_PRIME
    if p <= 2 or not is_probable_prime(p):
        raise UsageError(f"{p} is not an odd prime")
    return p


def make_config(args: argparse.Namespace) -> CliConfig:
    try:
        surfaces = (SurfaceId.parse(args.surface),) if getattr(args, "surface", None) \
            else tuple(SurfaceId)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    seq = parse_sequence(getattr(args, "sequence", None))
    mode = EXACT
    if getattr(args, "mode", "exact") == "modp":
        if args.trials < 1:
            raise UsageError("--trials must be at least 1")
        mode = Mode.modp(args.trials, args.rng_seed, resolve_prime(args.prime))
    fmt = "json" if getattr(args, "json", False) else getattr(args, "format", "text")
    cache = getattr(args, "cache_dir", None)
    return CliConfig(surfaces, seq, mode, fmt, getattr(args, "allow_repeats", False),
                     Path(cache) if cache else None)


def _validate_sequence(seq: Sequence[int], n: int, allow_repeats: bool) -> tuple[int, ...]:
    try:
        return check_sequence(seq, n, allow_repeats)
    except IndexError as exc:
        raise UsageError(str(exc)) from None


# seeds --------------------------------------------------------------------


def seed_json(surface: SurfaceId, seq: Sequence[int], seed: LGSeed) -> dict:
    return {"surface": surface.value, "sequence": [i + 1 for i in seq], **seed.to_json()}


def seed_from_json(data: dict) -> tuple[SurfaceId, tuple[int, ...], LGSeed]:
    return (SurfaceId.parse(data["surface"]), tuple(i - 1 for i in data["sequence"]),
            LGSeed.from_json(data))


def dump_json(obj) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _cache_path(cache_dir: Path, surface: SurfaceId, seq: Sequence[int]) -> Path:
    tag = "-".join(str(i + 1) for i in seq) or "initial"
    return cache_dir / f"{surface.value}_{tag}.json"


def mutated_seed_json(surface: SurfaceId, seq: tuple[int, ...], allow_repeats: bool,
                      cache_dir: Path | None) -> dict:
    """Seed JSON of the iterated seed, through the file cache when one is given."""
    if cache_dir is not None:
        path = _cache_path(cache_dir, surface, seq)
        try:
            data = json.loads(path.read_text())
            if data.get("surface") == surface.value and data.get("sequence") == [i + 1 for i in seq]:
                seed_from_json(data)
                return data
        except (OSError, ValueError, KeyError, TypeError):
            pass
    data = seed_json(surface, seq, iterate(initial_seed(surface), seq, allow_repeats))
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(dump_json(data))
        tmp.replace(path)
    return data


def render_seed_text(data: dict) -> str:
    surface, seq, seed = seed_from_json(data)
    B = b_from_seed(seed)
    Q = quiver_from_b(B)
    lines = [
        f"surface: {surface.value}",
        f"sequence: {','.join(str(i + 1) for i in seq) or '-'}",
        f"potential: {seed.potential.to_text('z')}",
        "directions: " + " ".join(f"({a},{b})" for a, b in seed.directions),
        "B-matrix:",
        *("  " + row for row in str(B).splitlines()),
        "quiver:",
        *(f"  {i + 1} -> {j + 1} x{m}" for i, j, m in Q.arrows()),
    ]
    return "\n".join(lines) + "\n"


def render_seed(data: dict, fmt: str) -> str:
    if fmt == "json":
        return dump_json(data)
    if fmt == "dot":
        surface, _, seed = seed_from_json(data)
        return quiver_from_b(b_from_seed(seed)).to_dot(surface.value)
    return render_seed_text(data)


def cmd_seeds_list(cfg: CliConfig) -> tuple[str, int]:
    items = [seed_json(X, (), initial_seed(X)) for X in cfg.surfaces]
    if cfg.fmt == "json":
        return dump_json(items), EXIT_OK
    return "".join(render_seed(d, cfg.fmt) + ("" if cfg.fmt == "dot" else "\n")
                   for d in items), EXIT_OK


def cmd_mutate(cfg: CliConfig) -> tuple[str, int]:
    if len(cfg.surfaces) != 1:
        raise UsageError("mutate needs a surface (-s)")
    surface = cfg.surfaces[0]
    seq = _validate_sequence(cfg.sequence or (), initial_seed(surface).n, cfg.allow_repeats)
    data = mutated_seed_json(surface, seq, cfg.allow_repeats, cfg.cache_dir)
    return render_seed(data, cfg.fmt), EXIT_OK


# verification -------------------------------------------------------------


def _reports_for(check: str, surface: SurfaceId, cfg: CliConfig,
                 vectors: int) -> list[VerificationReport]:
    s0 = initial_seed(surface)
    n = s0.n
    if check == "initial":
        return [check_initial_identity(surface)]
    if check == "main":
        verifier = MainVerifier(surface, cfg.mode, cfg.allow_repeats)
        if cfg.sequence is not None:
            seqs = [_validate_sequence(cfg.sequence, n, cfg.allow_repeats)]
        else:
            seqs = repetition_free_sequences(n, include_empty=True)
        return [verifier.run(seq) for seq in seqs]
    prefix = _validate_sequence(cfg.sequence or (), n, cfg.allow_repeats)
    s = iterate(s0, prefix, cfg.allow_repeats)
    dirs = [i for i in range(n) if cfg.allow_repeats or i not in prefix]
    if check == "bmat":
        return [check_b_compat(s, i, surface=surface, sequence=[j + 1 for j in prefix])
                for i in dirs]
    vs = random_vectors(vectors, 5, cfg.mode.rng_seed)
    return [check_phi_compat(s, i, vs, cfg.mode, surface=surface,
                             sequence=[j + 1 for j in prefix]) for i in dirs]


def cmd_verify(cfg: CliConfig, which: str, vectors: int = 200) -> tuple[str, int]:
    checks = ("initial", "bmat", "compat", "main") if which == "all" else (which,)
    reports: list[VerificationReport] = []
    for surface in cfg.surfaces:
        for check in checks:
            reports.extend(_reports_for(check, surface, cfg, vectors))
    order = {c: k for k, c in enumerate(("initial", "bmat", "compat", "main"))}
    reports.sort(key=lambda r: ([X.value for X in SurfaceId].index(r.surface),
                                order[r.check], len(r.sequence), r.sequence))
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    if cfg.fmt == "json":
        return dump_json([r.to_json() for r in reports]), code
    passed = sum(r.passed for r in reports)
    lines = [r.line() for r in reports]
    lines.append(f"{passed}/{len(reports)} checks passed")
    return "\n".join(lines) + "\n", code


# markov / export ------------------------------------------------------------


def cmd_markov(depth: int, fmt: str) -> tuple[str, int]:
    if depth < 0:
        raise UsageError("--depth must be >= 0")
    found = sorted(markov_bfs(depth).items(), key=lambda kv: (kv[1], kv[0]))
    if fmt == "json":
        return dump_json([{"triple": list(t), "depth": d} for t, d in found]), EXIT_OK
    return "".join(f"({a}, {b}, {c})  depth {d}\n" for (a, b, c), d in found), EXIT_OK


def cmd_export(cfg: CliConfig, what: str) -> tuple[str, int]:
    if len(cfg.surfaces) != 1:
        raise UsageError("export needs a surface (-s)")
    surface = cfg.surfaces[0]
    seq = _validate_sequence(cfg.sequence or (), initial_seed(surface).n, cfg.allow_repeats)
    if what == "fpoly":
        if seq:
            raise UsageError("F-polynomials are exported for initial seeds only")
        data = virtual_char_data(surface)
        if cfg.fmt == "json":
            return dump_json({"surface": surface.value, **data.to_json()}), EXIT_OK
        return (f"F = {data.f_poly.to_text('u')}\n"
                f"g = ({', '.join(str(x) for x in data.g)})\n"), EXIT_OK
    data = mutated_seed_json(surface, seq, cfg.allow_repeats, cfg.cache_dir)
    if what == "seed":
        return render_seed(data, cfg.fmt), EXIT_OK
    B: BMatrix = b_from_seed(seed_from_json(data)[2])
    if what == "bmatrix":
        if cfg.fmt == "json":
            return dump_json(B.to_json()), EXIT_OK
        return str(B) + "\n", EXIT_OK
    Q = quiver_from_b(B)
    if cfg.fmt == "json":
        return dump_json([list(r) for r in Q.mult]), EXIT_OK
    return Q.to_dot(surface.value), EXIT_OK


# argument parsing -----------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, surface_required: bool = False,
                formats=("text", "json")) -> None:
    p.add_argument("-s", "--surface", required=surface_required,
                   help="CP2, CP1xCP1, Bl1CP2, Bl2CP2 or Bl3CP2 (case-insensitive)")
    p.add_argument("--format", choices=formats, default="text")
    p.add_argument("--json", action="store_true", help="same as --format json")


def _add_mode(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("exact", "modp"), default="exact")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--prime", type=int, default=None,
                   help=f"default: ${PRIME_ENV} or 2^61-1")
    p.add_argument("--rng-seed", type=int, default=0)


def _add_sequence(p: argparse.ArgumentParser) -> None:
    p.add_argument("-q", "--sequence", default=None,
                   help="comma-separated 1-based mutation indices, first acts first")
    p.add_argument("--allow-repeats", action="store_true",
                   help="accept sequences that repeat an index")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgcluster",
                                     description="LG seeds, cluster characters and their comparison")
    sub = parser.add_subparsers(dest="command", required=True)

    seeds = sub.add_parser("seeds", help="initial seeds")
    seeds_sub = seeds.add_subparsers(dest="action", required=True)
    lst = seeds_sub.add_parser("list", help="print all initial seeds")
    _add_common(lst, formats=("text", "json", "dot"))

    mut = sub.add_parser("mutate", help="iterate seed mutation")
    _add_common(mut, surface_required=True, formats=("text", "json", "dot"))
    _add_sequence(mut)
    mut.add_argument("--cache-dir", default=None)

    ver = sub.add_parser("verify", help="run verification checks")
    ver.add_argument("which", choices=("initial", "compat", "bmat", "main", "all"))
    _add_common(ver)
    _add_sequence(ver)
    _add_mode(ver)
    ver.add_argument("--vectors", type=int, default=200,
                     help="random monomials per direction for compat")

    mk = sub.add_parser("markov", help="Markov triples of the CP2 mutation class")
    mk.add_argument("--depth", type=int, default=6)
    mk.add_argument("--format", choices=("text", "json"), default="text")
    mk.add_argument("--json", action="store_true")

    ex = sub.add_parser("export", help="write a seed, matrix, quiver or F-polynomial")
    ex.add_argument("what", choices=("seed", "bmatrix", "quiver", "fpoly"))
    _add_common(ex, surface_required=True, formats=("text", "json", "dot"))
    _add_sequence(ex)
    ex.add_argument("--cache-dir", default=None)
    ex.add_argument("-o", "--output", default=None, help="file to write instead of stdout")
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[str, str, int]:
    """Run the CLI; returns ``(stdout, stderr, exit code)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return "", "", int(exc.code or 0)
    try:
        if args.command == "markov":
            fmt = "json" if args.json else args.format
            out, code = cmd_markov(args.depth, fmt)
        else:
            cfg = make_config(args)
            if args.command == "seeds":
                out, code = cmd_seeds_list(cfg)
            elif args.command == "mutate":
                out, code = cmd_mutate(cfg)
            elif args.command == "verify":
                if args.vectors < 1:
                    raise UsageError("--vectors must be at least 1")
                out, code = cmd_verify(cfg, args.which, args.vectors)
            else:
                if cfg.fmt == "dot" and args.what in ("bmatrix", "fpoly"):
                    raise UsageError(f"no dot form for {args.what}")
                out, code = cmd_export(cfg, args.what)
                if args.output:
                    Path(args.output).write_text(out)
                    out = ""
    except (UsageError, RepetitionRejected) as exc:
        return "", f"lgcluster: error: {exc}\n", EXIT_USAGE
    except NotLaurent as exc:
        where = f" at step {exc.step + 1}" if exc.step is not None else ""
        return "", f"lgcluster: not Laurent{where}: {exc}\n", EXIT_COMPUTE
    except (ExponentOverflow, RetryBudgetExhausted, ArithmeticError) as exc:
        return "", f"lgcluster: computation error: {exc}\n", EXIT_COMPUTE
    return out, "", code


def main(argv: Sequence[str] | None = None) -> int:
    out, err, code = run(argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
