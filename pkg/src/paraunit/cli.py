"""Command line front-end.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage or input
errors.  Output depends only on the inputs and flags, never on --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .functions import (
    QArray,
    QSequence,
    format_anf,
    is_cas,
    is_ccc,
    is_css,
    pmepr,
    read_sequences_csv,
    write_sequences_csv,
)
from .genseed import GenSeedSpec, build_generalized_seed, enumerate_boolean_family
from .hadamard import PhaseMatrix, are_equivalent, canonical_form, catalog, is_bh, load_phase_matrix
from .polymatrix import FunctionMatrix, PolyMatrix
from .recursive import PlanError, evaluate_plan
from .seedpu import GuardExceeded, SeedSpec, build_seed, compute_SQ, enumerate_S

KINDS = ("CSS", "CCC", "CAS", "CCA")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# family files
# ---------------------------------------------------------------------------


@dataclass
class FamilyFile:
    """A set (CSS, CAS) or grid (CCC, CCA) of q-ary members on Z_p^m.

    Sequence kinds store each member as its length p^m evaluation; array
    kinds store the flat table with y_0 varying fastest.  Both are the same
    list of integers, so the kind alone decides which correlation is checked.
    """

    kind: str
    q: int
    N: int
    p: int
    m: int
    members: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        L = self.p**self.m
        rows = self.members if self.is_grid else [self.members]
        if len(rows) != (self.N if self.is_grid else 1):
            raise ValueError(f"{self.kind} needs {self.N} rows")
        for row in rows:
            if len(row) != self.N:
                raise ValueError(f"expected {self.N} members per row, got {len(row)}")
            for member in row:
                if len(member) != L:
                    raise ValueError(f"member length {len(member)} differs from p^m = {L}")
                if any(not 0 <= int(v) < self.q for v in member):
                    raise ValueError(f"phases must lie in [0, {self.q})")

    @property
    def is_grid(self) -> bool:
        return self.kind in ("CCC", "CCA")

    def _wrap(self, member):
        if self.kind in ("CSS", "CCC"):
            return QSequence(self.q, member)
        return QArray(self.q, self.p, self.m, member)

    def objects(self):
        if self.is_grid:
            return [[self._wrap(x) for x in row] for row in self.members]
        return [self._wrap(x) for x in self.members]

    def sequences(self) -> list[QSequence]:
        flat = [x for row in self.members for x in row] if self.is_grid else self.members
        return [QSequence(self.q, x) for x in flat]

    def verify(self, threads: int = 1) -> bool:
        objs = self.objects()
        if self.kind == "CSS":
            return is_css(objs)
        if self.kind == "CAS":
            return is_cas(objs)
        return is_ccc(objs, threads=threads)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "q": self.q,
            "N": self.N,
            "p": self.p,
            "m": self.m,
            "members": self.members,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> FamilyFile:
        try:
            return cls(
                obj["kind"], int(obj["q"]), int(obj["N"]), int(obj["p"]), int(obj["m"]),
                obj["members"], obj.get("provenance", {}),
            )
        except KeyError as exc:
            raise ValueError(f"family file lacks field {exc}") from None

    @classmethod
    def from_function_matrix(cls, fm: FunctionMatrix, kind: str, provenance: dict) -> FamilyFile:
        grid = [[[int(v) for v in fm.phases[i, j]] for j in range(fm.N)] for i in range(fm.N)]
        members = grid if kind in ("CCC", "CCA") else [grid[i][0] for i in range(fm.N)]
        return cls(kind, fm.q, fm.N, fm.p, fm.m, members, provenance)


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def load_family(path: str) -> FamilyFile:
    try:
        with open(path) as fh:
            return FamilyFile.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read family {path}: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"invalid family {path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _family_output(fm: FunctionMatrix, args, provenance: dict) -> None:
    kind = args.kind
    if kind in ("CSS", "CCC"):
        provenance = dict(provenance, evaluation="t = sum_k y_k p^k")
    fam = FamilyFile.from_function_matrix(fm, kind, provenance)
    _emit(_dumps(fam.to_json()), args.out)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _phase_matrices(args, q: int, N: int, count: int) -> list[PhaseMatrix]:
    if args.hs:
        hs = [load_phase_matrix(p) for p in args.hs]
        if len(hs) == 1:
            hs = hs * count
        if len(hs) != count:
            raise UsageError(f"need 1 or {count} phase matrices, got {len(hs)}")
        return hs
    if args.random_seed is not None:
        from .hadamard import random_bh

        rng = np.random.default_rng(args.random_seed)
        return [random_bh(q, N, rng) for _ in range(count)]
    return [catalog(q, N)[0]] * count


def _apply_perm(fm: FunctionMatrix, perm: list[int] | None) -> FunctionMatrix:
    return fm if perm is None else fm.permute_vars(perm)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_seed_gen(args) -> int:
    hs = _phase_matrices(args, args.q, args.N, args.m + 1)
    M = build_seed(SeedSpec(args.q, args.N, args.m, hs))
    if args.matrix_out:
        Path(args.matrix_out).write_text(M.dumps() + "\n")
    fm = _apply_perm(M.extract_function_matrix(args.N), args.perm)
    prov = {"construction": "seed", "hs": [h.to_json()["phases"] for h in hs], "perm": args.perm}
    _family_output(fm, args, prov)
    return 0


def cmd_seed_sq(args) -> int:
    classes = compute_SQ(args.q, args.N)
    for h in classes:
        print(_dumps(h.table.tolist()))
    print(f"count {len(classes)}")
    return 0


def _enum(args) -> int:
    if args.generalized:
        n = args.N.bit_length() - 1
        if 1 << n != args.N:
            raise UsageError("--generalized needs N a power of two")
        res = enumerate_boolean_family(args.q, n, args.m)
        rows, generated, predicted = res.sequences, res.generated, None
    else:
        res = enumerate_S(args.q, args.N, args.m, threads=args.threads)
        rows, generated, predicted = res.sequences, res.generated, res.predicted
    if args.count_only:
        print(len(rows))
        return 0
    if args.out:
        seqs = [QSequence(args.q, r) for r in rows]
        write_sequences_csv(args.out, seqs)
    print(f"distinct {len(rows)}")
    print(f"generated {generated}")
    if predicted is not None:
        print(f"predicted {predicted}")
    return 0


def cmd_genseed_gen(args) -> int:
    N = 1 << args.n
    hs = _phase_matrices(args, args.q, N, args.m + 1)
    M = build_generalized_seed(GenSeedSpec(args.q, args.n, args.m, hs))
    if args.matrix_out:
        Path(args.matrix_out).write_text(M.dumps() + "\n")
    fm = _apply_perm(M.extract_function_matrix(2), args.perm)
    prov = {"construction": "generalized-seed", "n": args.n, "hs": [h.to_json()["phases"] for h in hs], "perm": args.perm}
    _family_output(fm, args, prov)
    return 0


def cmd_recur_build(args) -> int:
    try:
        with open(args.plan) as fh:
            plan = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read plan {args.plan}: {exc}") from None
    try:
        M = evaluate_plan(plan)
    except PlanError as exc:
        raise UsageError(f"bad plan: {exc}") from None
    if isinstance(M, PhaseMatrix):
        M = PolyMatrix.constant(M.q, M.phases, 0)
    c = M.is_paraunitary()
    if c is None or not M.is_desired():
        print("plan output is not a desired para-unitary matrix", file=sys.stderr)
        return 1
    if args.matrix_out:
        Path(args.matrix_out).write_text(M.dumps() + "\n")
    _family_output(M.extract_function_matrix(2), args, {"construction": "plan", "plan": plan, "pu_constant": str(c)})
    return 0


def cmd_verify(args) -> int:
    fam = load_family(args.family)
    ok = fam.verify(threads=args.threads)
    print(f"{fam.kind} q={fam.q} N={fam.N} length={fam.p ** fam.m}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_pmepr(args) -> int:
    if args.oversample < 1:
        raise UsageError("--oversample must be positive")
    if args.family.endswith(".csv"):
        try:
            ids, seqs = read_sequences_csv(args.family)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read {args.family}: {exc}") from None
    else:
        seqs = load_family(args.family).sequences()
        ids = [str(k) for k in range(len(seqs))]
    worst = 0.0
    for ident, s in zip(ids, seqs):
        v = pmepr(s, args.oversample)
        worst = max(worst, v)
        print(f"{ident},{v:.6f}")
    print(f"max,{worst:.6f}")
    if args.bound is not None and worst > args.bound:
        return 1
    return 0


def cmd_bh_list(args) -> int:
    try:
        reps = catalog(args.q, args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for h in reps:
        print(h.dumps())
    return 0


def cmd_bh_check(args) -> int:
    h = _load_bh(args.matrix)
    ok = is_bh(h)
    print(f"q={h.q} N={h.N}: {'Butson Hadamard' if ok else 'not Butson Hadamard'}")
    if ok and args.canonical:
        print(_dumps([list(r) for r in canonical_form(h)]))
    return 0 if ok else 1


def cmd_bh_equiv(args) -> int:
    a, b = _load_bh(args.first), _load_bh(args.second)
    if (a.q, a.N) != (b.q, b.N):
        print("different (q, N)")
        return 1
    ok = are_equivalent(a, b)
    print("equivalent" if ok else "inequivalent")
    return 0 if ok else 1


def _load_bh(path: str) -> PhaseMatrix:
    try:
        return load_phase_matrix(path)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read phase matrix {path}: {exc}") from None


def cmd_export(args) -> int:
    fam = load_family(args.family)
    if args.format == "csv":
        if not args.out:
            raise UsageError("csv export needs --out")
        seqs = fam.sequences()
        n = len(seqs)
        ids = [f"{k // fam.N}.{k % fam.N}" for k in range(n)] if fam.is_grid else [str(k) for k in range(n)]
        write_sequences_csv(args.out, seqs, ids)
        return 0
    if args.format == "anf":
        if fam.p != 2:
            raise UsageError("anf export needs p = 2")
        flat = [x for row in fam.members for x in row] if fam.is_grid else fam.members
        lines = [format_anf(QArray(fam.q, 2, fam.m, x)) for x in flat]
        _emit("\n".join(lines), args.out)
        return 0
    _emit(_dumps(fam.to_json()), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")

    family_out = argparse.ArgumentParser(add_help=False)
    family_out.add_argument("--kind", choices=KINDS, default="CCA")
    family_out.add_argument("--out", help="family JSON path (default stdout)")
    family_out.add_argument("--matrix-out", help="also write the polynomial matrix JSON here")

    bh_source = argparse.ArgumentParser(add_help=False)
    bh_source.add_argument("--hs", nargs="+", help="phase matrix JSON files (one shared or m + 1)")
    bh_source.add_argument("--random-seed", type=int, help="draw random catalog members with this seed")
    bh_source.add_argument("--perm", type=_int_list, help="variable permutation, e.g. 2,0,1")

    parser = argparse.ArgumentParser(prog="paraunit", description="Complementary sets from para-unitary matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top = parser.add_subparsers(dest="command", required=True)

    seed = top.add_parser("seed", help="seed matrices").add_subparsers(dest="action", required=True)
    p = seed.add_parser("gen", parents=[common, family_out, bh_source], help="build a seed matrix and its family")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_seed_gen)
    p = seed.add_parser("sq", parents=[common], help="canonical quadratic classes")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_seed_sq)
    p = seed.add_parser("enum", parents=[common], help="enumerate distinct sequences")
    _enum_args(p)

    gen = top.add_parser("genseed", help="generalized seed matrices").add_subparsers(dest="action", required=True)
    p = gen.add_parser("gen", parents=[common, family_out, bh_source], help="build a generalized seed and its Boolean family")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True, help="order is 2^n")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_genseed_gen)

    rec = top.add_parser("recur", help="recursive compositions").add_subparsers(dest="action", required=True)
    p = rec.add_parser("build", parents=[common, family_out], help="evaluate a JSON plan")
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_recur_build)

    p = top.add_parser("verify", parents=[common], help="check a family file from its raw values")
    p.add_argument("--family", required=True)
    p.set_defaults(func=cmd_verify)

    p = top.add_parser("enum", parents=[common], help="enumerate distinct sequences")
    _enum_args(p)

    p = top.add_parser("pmepr", parents=[common], help="PMEPR of every member")
    p.add_argument("--family", required=True, help="family JSON or sequence CSV")
    p.add_argument("--oversample", type=int, default=64)
    p.add_argument("--bound", type=float, help="exit 1 if any value exceeds this")
    p.set_defaults(func=cmd_pmepr)

    bh = top.add_parser("bh", help="Butson Hadamard catalog").add_subparsers(dest="action", required=True)
    p = bh.add_parser("list", parents=[common])
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_bh_list)
    p = bh.add_parser("check", parents=[common])
    p.add_argument("--matrix", required=True)
    p.add_argument("--canonical", action="store_true", help="also print the canonical form")
    p.set_defaults(func=cmd_bh_check)
    p = bh.add_parser("equiv", parents=[common])
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_bh_equiv)

    p = top.add_parser("export", parents=[common], help="convert a family file")
    p.add_argument("--family", required=True)
    p.add_argument("--format", choices=("json", "csv", "anf"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def _enum_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--generalized", action="store_true", help="Boolean family of the generalized seed (N = 2^n)")
    p.add_argument("--out", help="write the sequences as CSV")
    p.set_defaults(func=_enum)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if getattr(args, "threads", 1) < 1:
        print("paraunit: --threads must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"paraunit: {exc}", file=sys.stderr)
        return 2
    except GuardExceeded as exc:
        print(f"paraunit: {exc} (raise PARAUNIT_GUARD to allow)", file=sys.stderr)
        return 2
    except (ValueError, OverflowError) as exc:
        print(f"paraunit: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
