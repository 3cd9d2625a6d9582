"""Coverage accounting over verified stores: count tables, Venn regions, fallout."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exactnum import DIRECT
from .nests import get_family
from .sweep import CoverageStore, merge_stores

# row order of the published count table; "+" joins families reported together
DEFAULT_ORDER = ("A1", "A11", "B1", "B11", "B12+B13", "B14", "B15", "B2", "B21")
# subtotal groups: each tier-1 family with the tier-2 families nested in it
GROUPS = (("A1", "A11"), ("B1", "B11", "B12", "B13", "B14", "B15"), ("B2", "B21"))

TABLE_FIELDS = ("family", "a_form", "M", "D", "I", "D+I", "GroupTot", "Cum")


@dataclass
class CoverageLedger:
    nmax: int
    order: list
    direct: dict
    indirect: dict

    def covered(self, family: str) -> set:
        return self.direct.get(family, set()) | self.indirect.get(family, set())

    def to_obj(self) -> dict:
        return {
            "nmax": self.nmax,
            "order": list(self.order),
            "covered": {
                f: {"direct": sorted(self.direct.get(f, ())), "indirect": sorted(self.indirect.get(f, ()))}
                for f in sorted(set(self.direct) | set(self.indirect))
            },
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "CoverageLedger":
        cov = obj["covered"]
        return cls(
            obj["nmax"],
            list(obj["order"]),
            {f: set(v["direct"]) for f, v in cov.items() if v["direct"]},
            {f: set(v["indirect"]) for f, v in cov.items() if v["indirect"]},
        )


def build_ledger(stores: Iterable[CoverageStore], nmax: int = 1000, order: Sequence[str] = DEFAULT_ORDER) -> CoverageLedger:
    merged = merge_stores(stores)
    direct: dict = {}
    indirect: dict = {}
    for r in merged.records:
        if 1 <= r.n <= nmax:
            (direct if r.mode == DIRECT else indirect).setdefault(r.family, set()).add(r.n)
    return CoverageLedger(nmax, list(order), direct, indirect)


def _row_families(row: str) -> list[str]:
    return [get_family(f).id for f in row.split("+")]


def _max_heights(stores: Sequence[CoverageStore]) -> dict:
    out: dict = {}
    for st in stores:
        for run in st.runs:
            fam = run.get("family")
            if fam is not None:
                out[fam] = max(out.get(fam, 0), run.get("max_height", 0))
    return out


@dataclass
class TableRow:
    family: str
    a_form: str
    M: str
    D: int
    I: int
    DI: int
    GroupTot: str
    Cum: int

    def values(self) -> list:
        return [self.family, self.a_form, self.M, self.D, self.I, self.DI, self.GroupTot, self.Cum]


def coverage_table(stores: Sequence[CoverageStore], order: Sequence[str] = DEFAULT_ORDER, nmax: int = 1000) -> list[TableRow]:
    """Per-row D / I / D+I, cumulative union, and group subtotals.

    D counts targets with a direct witness in the row's families; I those with
    only indirect ones.  GroupTot is filled on the last row of each family
    group present, with the union over that group.
    """
    stores = list(stores)
    ledger = build_ledger(stores, nmax, order)
    heights = _max_heights(stores)
    rows = []
    cum: set = set()
    row_fams = [_row_families(r) for r in order]
    group_of = {f: gi for gi, g in enumerate(GROUPS) for f in g}
    for ri, (label, fams) in enumerate(zip(order, row_fams)):
        d = set().union(*(ledger.direct.get(f, set()) for f in fams))
        i = set().union(*(ledger.indirect.get(f, set()) for f in fams)) - d
        cum |= d | i
        gid = group_of.get(fams[-1])
        later = [group_of.get(g[-1]) for g in row_fams[ri + 1 :]]
        tot = ""
        if gid is not None and gid not in later:
            members = [f for g in row_fams for f in g if group_of.get(f) == gid]
            tot = str(len(set().union(*(ledger.covered(f) for f in members))))
        ms = sorted({heights[f] for f in fams if f in heights})
        rows.append(
            TableRow(
                label,
                " | ".join(dict.fromkeys(get_family(f).a_form for f in fams)),
                ";".join(map(str, ms)),
                len(d),
                len(i),
                len(d | i),
                tot,
                len(cum),
            )
        )
    return rows


REGION_NAMES = {
    0: "none",
    1: "A1 only",
    2: "B1 only",
    3: "A1&B1",
    4: "B2 only",
    5: "A1&B2",
    6: "B1&B2",
    7: "A1&B1&B2",
}


def venn(stores: Sequence[CoverageStore], targets: tuple[int, int] = (1, 1000)) -> dict:
    """Tier-1 region counts (8 regions) plus per-family tier-2 membership counts."""
    lo, hi = targets
    ledger = build_ledger(stores, hi)
    tier1 = [ledger.covered(f) for f in ("A1", "B1", "B2")]
    regions = {name: 0 for name in REGION_NAMES.values()}
    members = {name: [] for name in REGION_NAMES.values()}
    for n in range(lo, hi + 1):
        mask = sum(1 << b for b, s in enumerate(tier1) if n in s)
        regions[REGION_NAMES[mask]] += 1
        members[REGION_NAMES[mask]].append(n)
    tier2 = {}
    for f in ("A11", "B11", "B12", "B13", "B14", "B15", "B21"):
        tier2[f] = sum(1 for n in ledger.covered(f) if lo <= n <= hi)
    return {"regions": regions, "tier2": tier2, "members": members}


def fallout(stores: Sequence[CoverageStore], targets: tuple[int, int] = (1, 1000)) -> list[int]:
    lo, hi = targets
    covered = set()
    for st in stores:
        covered.update(r.n for r in st.records)
    return [n for n in range(lo, hi + 1) if n not in covered]


# --- export -----------------------------------------------------------------


def table_csv(rows: Sequence[TableRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_FIELDS)
    for r in rows:
        w.writerow(r.values())
    return buf.getvalue()


def table_json(rows: Sequence[TableRow]) -> str:
    objs = [dict(zip(TABLE_FIELDS, r.values())) for r in rows]
    return json.dumps({"table": objs}, indent=2) + "\n"


def table_text(rows: Sequence[TableRow]) -> str:
    cells = [list(TABLE_FIELDS)] + [[str(v) for v in r.values()] for r in rows]
    widths = [max(len(row[c]) for row in cells) for c in range(len(TABLE_FIELDS))]
    lines = []
    for ri, row in enumerate(cells):
        parts = [row[c].ljust(widths[c]) if c < 2 else row[c].rjust(widths[c]) for c in range(len(row))]
        lines.append("  ".join(parts).rstrip())
        if ri == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


_TABLE_FORMATS = {"csv": table_csv, "json": table_json, "text": table_text}


def render(obj, fmt: str) -> str:
    if isinstance(obj, CoverageLedger):
        if fmt != "json":
            raise ValueError("ledgers export as json only")
        return json.dumps(obj.to_obj(), sort_keys=True, indent=2) + "\n"
    try:
        return _TABLE_FORMATS[fmt](obj)
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}") from None


def export(obj, fmt: str, path) -> None:
    text = render(obj, fmt)
    with open(path, "w") as fh:
        fh.write(text)


def load_ledger(path) -> CoverageLedger:
    with open(path) as fh:
        return CoverageLedger.from_obj(json.load(fh))


def rows_from_dicts(objs) -> list[TableRow]:
    return [TableRow(*(o[f] for f in TABLE_FIELDS)) for o in objs]

