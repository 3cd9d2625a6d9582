import itertools
import json
import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

from quartnest.exactnum import DIRECT, INDIRECT
from quartnest.identity import Quartet
from quartnest.nests import evaluate
from quartnest.report import (
    DEFAULT_ORDER,
    TABLE_FIELDS,
    build_ledger,
    coverage_table,
    export,
    fallout,
    load_ledger,
    render,
    rows_from_dicts,
    table_csv,
    venn,
)
from quartnest.sweep import CoverageRecord, CoverageStore, SweepConfig, make_record, sweep


def fake(n, family, mode=DIRECT, tag=1):
    """Placeholder record; report logic never looks inside the witness."""
    params = (F(tag), F(1)) if family in ("A1", "B1", "B2") else (F(tag),)
    return CoverageRecord(n, family, params, F(n), mode, F(1), Quartet(n, 1, 2, 3, 4))


def store_of(*recs, family=None, M=10):
    runs = [{"family": family or recs[0].family, "max_height": M}] if recs or family else []
    return CoverageStore(runs, list(recs))


def test_single_store_row():
    rec = make_record(6, evaluate("A11", 3), DIRECT, 1)
    rows = coverage_table([store_of(rec)], ["A11"])
    assert (rows[0].D, rows[0].I, rows[0].DI, rows[0].Cum) == (1, 0, 1, 1)


def test_cumulative_union():
    a11 = store_of(make_record(6, evaluate("A11", 3), DIRECT, 1), make_record(13, evaluate("A11", 4), DIRECT, 1))
    b12 = store_of(make_record(6, evaluate("B12", 2), DIRECT, 1))
    rows = coverage_table([a11, b12], ["B12", "A11"])
    assert [r.Cum for r in rows] == [1, 2]
    assert [r.DI for r in rows] == [1, 2]


def test_indirect_only_counts():
    s = store_of(fake(5, "B14", INDIRECT), fake(7, "B14", INDIRECT), fake(7, "B14", DIRECT, tag=2))
    (row,) = coverage_table([s], ["B14"])
    assert (row.D, row.I, row.DI) == (1, 1, 2)


def test_b21_adds_nothing_beyond_b11():
    b11, _ = sweep(SweepConfig("B11", 40))
    b21, _ = sweep(SweepConfig("B21", 40))
    rows = coverage_table([b11, b21], ["B11", "B21"])
    assert rows[1].DI == rows[0].DI and rows[1].Cum == rows[0].Cum


def test_group_subtotals():
    stores = [store_of(fake(1, "A1")), store_of(fake(2, "A11")), store_of(fake(3, "B1")), store_of(fake(3, "B14"), fake(4, "B14"))]
    rows = {r.family: r for r in coverage_table(stores, DEFAULT_ORDER)}
    assert rows["A11"].GroupTot == "2"
    assert rows["B15"].GroupTot == "2"
    assert rows["A1"].GroupTot == ""


def test_conflicting_witnesses_error():
    a = fake(6, "A11")
    b = replace(a, witness=Quartet(6, 34, 22, 2, 26))
    with pytest.raises(ValueError):
        coverage_table([store_of(a), store_of(b)], ["A11"])


def test_table_properties():
    rng = random.Random(0)
    fams = ["A1", "A11", "B1", "B11", "B14"]
    stores = []
    for f in fams:
        recs = {}
        for _ in range(40):
            n = rng.randint(1, 60)
            mode = rng.choice((DIRECT, INDIRECT))
            recs[(n, mode)] = fake(n, f, mode)
        stores.append(store_of(*recs.values()))
    finals = set()
    ledger = build_ledger(stores, 1000)
    for order in itertools.islice(itertools.permutations(fams), 0, 120, 7):
        rows = coverage_table(stores, order)
        cums = [r.Cum for r in rows]
        assert cums == sorted(cums)
        finals.add(cums[-1])
        for r in rows:
            assert r.D + r.I == r.DI == len(ledger.covered(r.family))
    assert len(finals) == 1


def test_venn_examples():
    v = venn([], (1, 50))
    assert v["regions"]["none"] == 50 and sum(v["regions"].values()) == 50
    stores = [store_of(fake(1, "A1"), fake(2, "A1")), store_of(fake(2, "B1"))]
    v = venn(stores, (1, 10))
    assert v["members"]["A1 only"] == [1]
    assert v["members"]["A1&B1"] == [2]
    assert v["regions"]["none"] == 8
    assert sum(v["regions"].values()) == 10


def test_venn_partitions_and_tier2_counts():
    stores = [sweep(SweepConfig(f, 8, (1, 200)))[0] for f in ("A1", "B1", "B2")]
    stores.append(sweep(SweepConfig("B12", 30, (1, 200)))[0])
    v = venn(stores, (1, 200))
    seen = sorted(n for m in v["members"].values() for n in m)
    assert seen == list(range(1, 201))
    assert v["tier2"]["B12"] == len(stores[-1].covered()[DIRECT] | stores[-1].covered()[INDIRECT])


def test_fallout_examples():
    assert fallout([], (1, 3)) == [1, 2, 3]
    recs = [fake(n, "B1") for n in range(1, 1001) if n not in (214, 830)]
    assert fallout([store_of(*recs)], (1, 1000)) == [214, 830]
    stores = [sweep(SweepConfig("B14", 30, (1, 300)))[0]]
    left = set(fallout(stores, (1, 300)))
    covered = {r.n for r in stores[0].records}
    assert left.isdisjoint(covered) and left | covered == set(range(1, 301))


def test_export_formats(tmp_path):
    assert table_csv([]) == ",".join(TABLE_FIELDS) + "\n"
    stores = [store_of(fake(6, "A11")), store_of(fake(6, "B12"), fake(9, "B13", INDIRECT))]
    rows = coverage_table(stores, ["A11", "B12+B13"])
    csv_text = render(rows, "csv")
    assert csv_text.splitlines()[0].split(",") == list(TABLE_FIELDS)
    assert '"' not in csv_text
    assert csv_text.splitlines()[2].startswith("B12+B13,u^2 + 2,10,1,1,2,")
    back = rows_from_dicts(json.loads(render(rows, "json"))["table"])
    assert back == rows
    text = render(rows, "text")
    assert text.splitlines()[0].split() == list(TABLE_FIELDS)
    export(rows, "csv", tmp_path / "t.csv")
    export(rows, "csv", tmp_path / "u.csv")
    assert (tmp_path / "t.csv").read_bytes() == (tmp_path / "u.csv").read_bytes()
    with pytest.raises(ValueError):
        render(rows, "xml")


def test_ledger_json_roundtrip(tmp_path):
    stores = [store_of(fake(6, "A11"), fake(7, "A11", INDIRECT)), store_of(fake(6, "B12"))]
    ledger = build_ledger(stores, 100)
    export(ledger, "json", tmp_path / "l.json")
    assert load_ledger(tmp_path / "l.json") == ledger
    with pytest.raises(ValueError):
        render(ledger, "csv")
