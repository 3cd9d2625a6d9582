"""Height-bounded parameter sweeps, witnesses and the coverage store.

A sweep walks every admissible parameter tuple of one family with
1 < max height <= M, keys each closed-form coefficient by its fourth-power
class, and keeps, for every (target, mode), the canonically first parameter
tuple whose witness survives the triviality and zero-component policy.
Because only that minimum is kept, shards and worker slots combine by a
plain min and the merged store is independent of how the work was split.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Optional

import numpy as np

from . import __version__
from .classhash import integer_key, neg, ratio_keys
from .exactnum import DIRECT, INDIRECT, coverage_modes, height, parse_rat, rat_str
from .identity import DegenerateError, Quartet, integerize, invert, is_trivial, negate, scale
from .nests import FAMILY_IDS, NestPoint, closed_form_a, domain_ok, evaluate, get_family

log = logging.getLogger(__name__)

MODES = (DIRECT, INDIRECT)
_FAMILY_RANK = {f: i for i, f in enumerate(FAMILY_IDS)}
_PAIR_BLOCK = 1 << 21


class WitnessRejected(ValueError):
    def __init__(self, reason: str, quartet: Optional[Quartet] = None):
        super().__init__(reason)
        self.reason = reason
        self.quartet = quartet


class StoreFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    family: str
    max_height: int
    targets: tuple[int, int] = (1, 1000)
    include_negative: bool = True
    min_height_exclusive: int = 1
    allow_zero_components: bool = False
    shard: tuple[int, int] = (1, 1)
    threads: int = 1
    output_path: Optional[str] = None

    def __post_init__(self):
        get_family(self.family)
        if self.max_height < 2:
            raise ValueError("max height must be at least 2")
        lo, hi = self.targets
        if not 1 <= lo <= hi:
            raise ValueError(f"bad target range {lo}..{hi}")
        i, n = self.shard
        if not 1 <= i <= n:
            raise ValueError(f"bad shard {i}/{n}")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.min_height_exclusive < 0:
            raise ValueError("min height must be nonnegative")

    def run_meta(self) -> dict:
        return {
            "family": self.family,
            "max_height": self.max_height,
            "targets": list(self.targets),
            "include_negative": self.include_negative,
            "min_height_exclusive": self.min_height_exclusive,
            "allow_zero_components": self.allow_zero_components,
            "shard": list(self.shard),
        }


@dataclass(frozen=True)
class CoverageRecord:
    n: int
    family: str
    params: tuple
    alpha: Fraction
    mode: str
    k: Fraction
    witness: Quartet
    flags: tuple = ()

    @property
    def key(self) -> tuple:
        return (self.n, self.family, self.mode)

    def sort_key(self) -> tuple:
        return (self.n, _FAMILY_RANK[self.family], self.mode) + param_key(self.params)

    def to_json(self) -> str:
        w = self.witness
        obj = {
            "n": self.n,
            "family": self.family,
            "params": [rat_str(x) for x in self.params],
            "alpha": rat_str(self.alpha),
            "mode": self.mode,
            "k": rat_str(self.k),
            "witness": {name: rat_str(getattr(w, name)) for name in ("a", "A", "B", "C", "D")},
            "flags": list(self.flags),
        }
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_obj(cls, obj: dict) -> "CoverageRecord":
        w = obj["witness"]
        mode = obj["mode"]
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        family = get_family(obj["family"]).id
        n = obj["n"]
        if not isinstance(n, int) or n <= 0:
            raise ValueError(f"bad target {n!r}")
        return cls(
            n=n,
            family=family,
            params=tuple(parse_rat(x) for x in obj["params"]),
            alpha=parse_rat(obj["alpha"]),
            mode=mode,
            k=parse_rat(obj["k"]),
            witness=Quartet(*(parse_rat(w[name]) for name in ("a", "A", "B", "C", "D"))),
            flags=tuple(obj.get("flags", ())),
        )


def param_key(params: tuple) -> tuple:
    """Canonical order: max height, then each parameter by (height, |value|, sign).

    The per-parameter part matches the position order of ``rational_arrays``,
    which the sweep relies on when it ranks candidates by array index.
    """
    return (max(height(x) for x in params),) + tuple((height(x), abs(x), x < 0) for x in params)


# --- enumeration ------------------------------------------------------------


def rational_arrays(max_height: int, include_negative: bool = True):
    """(num, den, height) arrays of all reduced i/j with height <= M, canonical order.

    Canonical order is by height, then |value|, positive before negative.
    """
    if max_height < 1:
        raise ValueError("max height must be positive")
    r = np.arange(1, max_height + 1, dtype=np.int64)
    i, j = np.meshgrid(r, r, indexing="ij")
    i, j = i.ravel(), j.ravel()
    keep = np.gcd(i, j) == 1
    i, j = i[keep], j[keep]
    if include_negative:
        i = np.concatenate([i, -i])
        j = np.concatenate([j, j])
    h = np.maximum(np.abs(i), j)
    order = np.lexsort((i < 0, np.abs(i) / j, h))
    return i[order], j[order], h[order]


def rationals_up_to(max_height: int, include_negative: bool = True) -> Iterator[Fraction]:
    i, j, _ = rational_arrays(max_height, include_negative)
    for a, b in zip(i.tolist(), j.tolist()):
        yield Fraction(a, b)


# --- witnesses --------------------------------------------------------------


def witness_for(n: int, point: NestPoint, mode: str, k, allow_zero_components: bool = False) -> Quartet:
    """Turn a covering nest point into an integer quartet with coefficient n."""
    sol = point.quartet
    if sol.a < 0:
        sol = negate(sol)
    if mode == INDIRECT:
        sol = invert(sol)
    elif mode != DIRECT:
        raise ValueError(f"unknown mode {mode!r}")
    sol = integerize(scale(sol, k))
    if sol.a != n:
        raise DegenerateError(f"witness coefficient {sol.a} != {n}")
    if sol.residual() != 0:
        raise DegenerateError(f"witness residual {sol.residual()}")
    if is_trivial(sol.a, sol.terms):
        raise WitnessRejected("trivial", sol)
    if not allow_zero_components and any(x == 0 for x in sol.terms):
        raise WitnessRejected("zero-component", sol)
    return sol


def make_record(n: int, point: NestPoint, mode: str, k, allow_zero_components: bool = False) -> CoverageRecord:
    w = witness_for(n, point, mode, k, allow_zero_components)
    flags = ("zero-component",) if any(x == 0 for x in w.terms) else ()
    return CoverageRecord(n, point.family, point.params, point.a, mode, Fraction(k), w, flags)


def verify_record(rec: CoverageRecord) -> list[str]:
    """Problems found re-checking a stored record; empty when it is sound."""
    problems = []
    w = rec.witness
    if w.a != rec.n:
        problems.append(f"witness coefficient {w.a} != n")
    if not w.is_integral():
        problems.append("witness not integral")
    else:
        g = 0
        for x in w.terms:
            g = gcd(g, int(x))
        if g != 1:
            problems.append(f"witness gcd {g}")
    if w.residual() != 0:
        problems.append(f"residual {w.residual()}")
    if is_trivial(w.a, w.terms):
        problems.append("trivial witness")
    if any(x == 0 for x in w.terms) and "zero-component" not in rec.flags:
        problems.append("unflagged zero component")
    try:
        alpha = closed_form_a(rec.family, *rec.params)
    except (DegenerateError, ValueError, ZeroDivisionError) as exc:
        problems.append(f"parameters invalid: {exc}")
        alpha = None
    if alpha is not None and alpha != rec.alpha:
        problems.append(f"alpha {rec.alpha} != closed form {alpha}")
    mag = abs(rec.alpha)
    if mag == 0:
        problems.append("zero alpha")
    elif rec.mode == DIRECT and rec.n != mag * rec.k**4:
        problems.append("direct relation n = |alpha| k^4 fails")
    elif rec.mode == INDIRECT and rec.n * mag != rec.k**4:
        problems.append("indirect relation n |alpha| = k^4 fails")
    return problems


# --- the sweep --------------------------------------------------------------


@dataclass
class CoverageStore:
    runs: list = field(default_factory=list)
    records: list = field(default_factory=list)

    def sorted(self) -> "CoverageStore":
        return CoverageStore(canonical_runs(self.runs), sorted(self.records, key=CoverageRecord.sort_key))

    def header(self) -> dict:
        return {"kind": "header", "tool": "quartnest", "version": __version__, "runs": canonical_runs(self.runs)}

    def dumps(self) -> str:
        s = self.sorted()
        lines = [json.dumps(s.header(), separators=(",", ":"), sort_keys=True)]
        lines += [r.to_json() for r in s.records]
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    def covered(self, family: Optional[str] = None) -> dict[str, set]:
        out = {DIRECT: set(), INDIRECT: set()}
        for r in self.records:
            if family is None or r.family == family:
                out[r.mode].add(r.n)
        return out


def canonical_runs(runs: Iterable[dict]) -> list:
    """Fold shard entries of otherwise identical runs; drop shard info when complete."""
    groups: dict[str, dict] = {}
    for run in runs:
        run = dict(run)
        shard = run.pop("shard", None)
        shards = run.pop("shards", None)
        base = json.dumps(run, sort_keys=True)
        g = groups.setdefault(base, {"run": run, "count": None, "seen": set(), "complete": False})
        if shard is None and shards is None:
            g["complete"] = True
            continue
        if shard is not None:
            idx, count = shard
            seen = [idx]
        else:
            count, seen = shards
        if g["count"] not in (None, count):
            # differently sharded partial runs of the same sweep; keep the finer view
            g["count"] = max(g["count"], count)
        else:
            g["count"] = count
        g["seen"].update(seen)
    out = []
    for g in groups.values():
        run = dict(g["run"])
        complete = g["complete"] or (g["count"] is not None and g["seen"] >= set(range(1, g["count"] + 1)))
        if not complete:
            run["shards"] = [g["count"], sorted(g["seen"])]
        out.append(run)
    return sorted(out, key=lambda r: json.dumps(r, sort_keys=True))


def _target_table(targets: tuple[int, int]):
    table: dict[tuple[int, int], list] = {}
    for n in range(targets[0], targets[1] + 1):
        key = integer_key(n)
        table.setdefault(key, []).append((n, DIRECT))
        table.setdefault(neg(key), []).append((n, INDIRECT))
    los = np.array(sorted({k[0] for k in table}), dtype=np.uint64)
    return table, los


def _candidates(fam, table, los, i, j, k=None, l=None, shape=None):
    """Yield (flat index, n, mode) for elements whose class matches a target."""
    num, den = fam.forms_fn(i, j, k, l)
    lo, hi, ok, nonzero = ratio_keys(num, den, shape)
    hit = nonzero & ok & np.isin(lo, los)
    for pos in np.nonzero(hit)[0].tolist():
        for n, mode in table.get((int(lo[pos]), int(hi[pos])), ()):
            yield pos, n, mode
    for pos in np.nonzero(nonzero & ~ok)[0].tolist():
        yield pos, None, None  # unfactorable: exact pairwise fallback


def _sweep_slice(cfg: SweepConfig, slot: int, nslots: int) -> dict:
    fam = get_family(cfg.family)
    table, los = _target_table(cfg.targets)
    i_all, j_all, h_all = rational_arrays(cfg.max_height, cfg.include_negative)
    shard_idx, shard_cnt = cfg.shard
    pos = np.arange(len(i_all))
    mine = (pos % shard_cnt == shard_idx - 1) & ((pos // shard_cnt) % nslots == slot)
    minh = cfg.min_height_exclusive
    # candidates are keyed by (max height, position of u[, position of v]);
    # positions follow the canonical order, so integer sorting is canonical
    cand: dict[tuple, list] = {}

    def params_of(key):
        return tuple(Fraction(int(i_all[q]), int(j_all[q])) for q in key[1:])

    def push(key, n, mode):
        if n is None:
            try:
                alpha = closed_form_a(fam, *params_of(key))
            except (DegenerateError, ZeroDivisionError):
                return
            if alpha == 0:
                return
            for t in range(cfg.targets[0], cfg.targets[1] + 1):
                for m in coverage_modes(t, alpha):
                    cand.setdefault((t, m), []).append(key)
        else:
            cand.setdefault((n, mode), []).append(key)

    if fam.nparams == 1:
        upos = pos[mine & (h_all > minh)]
        for p, n, mode in _candidates(fam, table, los, i_all[upos], j_all[upos], shape=upos.shape):
            q = int(upos[p])
            push((int(h_all[q]), q), n, mode)
    else:
        upos = pos[mine]
        vh = h_all
        block = max(1, _PAIR_BLOCK // max(1, len(pos)))
        for start in range(0, len(upos), block):
            bp = upos[start : start + block]
            bi, bj, bh = i_all[bp, None], j_all[bp, None], h_all[bp, None]
            shape = (len(bp), len(pos))
            maxh = np.maximum(bh, vh[None, :]).ravel()
            for p, n, mode in _candidates(fam, table, los, bi, bj, i_all[None, :], j_all[None, :], shape):
                if maxh[p] <= minh:
                    continue
                a, b = divmod(p, shape[1])
                push((int(maxh[p]), int(bp[a]), b), n, mode)
            if start and start % (block * 64) == 0:
                log.info("%s slot %d: %d/%d outer values", cfg.family, slot, start, len(upos))
    return _resolve(fam, cfg, cand, params_of)


def _resolve(fam, cfg: SweepConfig, cand: dict, params_of) -> dict:
    """Pick the canonically first valid witness for every (n, mode)."""
    best = {}
    modes_cache: dict[Fraction, dict] = {}
    # triviality and zero components survive scale/invert/negate, so a
    # rejection holds for every target reached from the same parameters
    rejected: set = set()
    for (n, mode), keys in sorted(cand.items()):
        for key in sorted(set(keys)):
            if key in rejected:
                continue
            params = params_of(key)
            if not domain_ok(fam, *params):
                rejected.add(key)
                continue
            alpha = closed_form_a(fam, *params)
            per_n = modes_cache.setdefault(abs(alpha), {})
            if n not in per_n:
                per_n[n] = coverage_modes(n, alpha)
            k = per_n[n].get(mode)
            if k is None:
                continue  # key collision; the exact test is authoritative
            point = evaluate(fam, *params)
            try:
                rec = make_record(n, point, mode, k, cfg.allow_zero_components)
            except WitnessRejected:
                rejected.add(key)
                continue
            best[(n, fam.id, mode)] = rec
            break
    return best


def _run_slot(args):
    cfg, slot, nslots = args
    return _sweep_slice(cfg, slot, nslots)


def _combine(into: dict, other: dict) -> None:
    for key, rec in other.items():
        cur = into.get(key)
        if cur is None or rec.sort_key() < cur.sort_key():
            into[key] = rec


@dataclass
class SweepSummary:
    targets: tuple[int, int]
    status: dict
    direct: int
    indirect: int

    @property
    def unique(self) -> int:
        return self.direct + self.indirect

    def covered(self) -> list[int]:
        return sorted(n for n, s in self.status.items() if s is not None)


def summarize(records: Iterable[CoverageRecord], targets: tuple[int, int], family=None) -> SweepSummary:
    """Per-target status with Direct precedence."""
    fams = None if family is None else ({family} if isinstance(family, str) else set(family))
    status = {n: None for n in range(targets[0], targets[1] + 1)}
    for r in records:
        if r.n not in status or (fams is not None and r.family not in fams):
            continue
        if r.mode == DIRECT or status[r.n] is None:
            status[r.n] = r.mode
    d = sum(1 for s in status.values() if s == DIRECT)
    i = sum(1 for s in status.values() if s == INDIRECT)
    return SweepSummary(targets, status, d, i)


def sweep(cfg: SweepConfig) -> tuple[CoverageStore, SweepSummary]:
    log.info("sweep %s M=%d targets %d..%d shard %d/%d", cfg.family, cfg.max_height, *cfg.targets, *cfg.shard)
    best: dict = {}
    if cfg.threads == 1:
        best = _sweep_slice(cfg, 0, 1)
    else:
        jobs = [(cfg, s, cfg.threads) for s in range(cfg.threads)]
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for part in pool.map(_run_slot, jobs):
                _combine(best, part)
    store = CoverageStore([cfg.run_meta()], list(best.values())).sorted()
    summary = summarize(store.records, cfg.targets)
    if cfg.output_path:
        store.write(cfg.output_path)
    return store, summary


# --- store files ------------------------------------------------------------


def read_store(path) -> CoverageStore:
    runs, records = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if obj.get("kind") == "header":
                    runs.extend(obj["runs"])
                else:
                    records.append(CoverageRecord.from_obj(obj))
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise StoreFormatError(f"{path}:{lineno}: corrupt record ({exc})") from exc
    return CoverageStore(runs, records)


def merge_stores(stores: Iterable[CoverageStore]) -> CoverageStore:
    runs, best = [], {}
    seen_exact: dict = {}
    for st in stores:
        runs.extend(st.runs)
        for rec in st.records:
            exact = rec.key + (rec.params,)
            prior = seen_exact.get(exact)
            if prior is not None and prior != rec:
                raise ValueError(f"conflicting records for {exact}")
            seen_exact[exact] = rec
            _combine(best, {rec.key: rec})
    return CoverageStore(runs, list(best.values())).sorted()


def merge_runs(paths: Iterable) -> CoverageStore:
    return merge_stores(read_store(p) for p in paths)


def shard_configs(cfg: SweepConfig, count: int) -> list[SweepConfig]:
    return [replace(cfg, shard=(i, count), output_path=None) for i in range(1, count + 1)]


def default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))
