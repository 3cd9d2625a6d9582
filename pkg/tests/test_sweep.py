import json
from dataclasses import replace
from fractions import Fraction as F
from math import gcd

import pytest

from quartnest.exactnum import DIRECT, INDIRECT, covers
from quartnest.identity import Quartet, is_trivial
from quartnest.nests import evaluate
from quartnest.sweep import (
    CoverageRecord,
    CoverageStore,
    StoreFormatError,
    SweepConfig,
    WitnessRejected,
    make_record,
    merge_runs,
    merge_stores,
    rationals_up_to,
    read_store,
    shard_configs,
    summarize,
    sweep,
    verify_record,
    witness_for,
)


def test_rationals_up_to_examples():
    assert sorted(rationals_up_to(1)) == [-1, 1]
    pos3 = list(rationals_up_to(3, include_negative=False))
    assert set(pos3) == {F(1), F(1, 2), F(2), F(1, 3), F(3), F(2, 3), F(3, 2)}
    assert len(pos3) == 7
    assert len(list(rationals_up_to(5, include_negative=False))) == 19


@pytest.mark.parametrize("M", [1, 2, 7, 12, 30])
def test_rationals_up_to_brute_force(M):
    brute = {F(i, j) for i in range(-M, M + 1) for j in range(1, M + 1) if i}
    got = list(rationals_up_to(M))
    assert len(got) == len(set(got)) == len(brute)
    assert set(got) == brute
    assert all(max(abs(q.numerator), q.denominator) <= M for q in got)


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig("A11", 1)
    with pytest.raises(ValueError):
        SweepConfig("A11", 5, shard=(3, 2))
    with pytest.raises(ValueError):
        SweepConfig("Q9", 5)


def test_a11_small_sweep():
    store, summary = sweep(SweepConfig("A11", 4, (1, 10)))
    assert summary.covered() == [6]
    # u = +-2 gives a = 1 only through a trivial quartet
    pt = evaluate("A11", 2)
    assert pt.a == 1 and is_trivial(1, pt.quartet.terms)


def test_a11_covers_one():
    store, summary = sweep(SweepConfig("A11", 7, (1, 1)))
    direct = [r for r in store.records if r.mode == DIRECT]
    assert summary.covered() == [1] and summary.direct == 1
    rec = direct[0]
    assert rec.params == (F(7, 4),) and rec.k == 2
    assert rec.witness == Quartet(1, 542, 103, -514, 359)


def test_a1_target_189():
    store, summary = sweep(SweepConfig("A1", 4, (189, 189)))
    assert summary.covered() == [189]
    modes = {r.mode: r for r in store.records}
    # an indirect witness exists, but a direct one also does, and wins
    assert set(modes) == {DIRECT, INDIRECT}
    assert summary.direct == 1 and summary.indirect == 0
    assert covers(189, F(3, 7)).mode == INDIRECT
    for rec in store.records:
        assert verify_record(rec) == []


def test_witness_examples():
    w = witness_for(189, evaluate("A1", 4, 2), INDIRECT, 3)
    assert w == Quartet(189, 3, 11, 39, 7)
    assert 81 + 189 * 11**4 == 39**4 + 189 * 7**4 == 2767230
    with pytest.raises(WitnessRejected) as exc:
        witness_for(175, evaluate("A1", 3, 2), DIRECT, 5)
    assert exc.value.reason == "zero-component"
    w = witness_for(175, evaluate("A1", 3, 2), DIRECT, 5, allow_zero_components=True)
    assert w == Quartet(175, 4, 0, 3, 1) and w.is_verified()
    assert witness_for(1, evaluate("A11", F(7, 4)), DIRECT, 2) == Quartet(1, 542, 103, -514, 359)


def test_witness_rejects_trivial():
    with pytest.raises(WitnessRejected) as exc:
        witness_for(1, evaluate("A11", 2), DIRECT, 1)
    assert exc.value.reason == "trivial"


def _check_store(store, cfg):
    lo, hi = cfg.targets
    seen = set()
    for rec in store.records:
        assert verify_record(rec) == []
        w = rec.witness
        assert w.a == rec.n and w.is_verified() and w.is_integral()
        g = 0
        for x in w.terms:
            g = gcd(g, int(x))
        assert g == 1
        assert not is_trivial(w.a, w.terms)
        assert all(x != 0 for x in w.terms)
        assert lo <= rec.n <= hi
        assert rec.key not in seen
        seen.add(rec.key)


@pytest.mark.parametrize("family", ["A1", "B1", "B2", "A11", "B14", "B15"])
def test_store_witnesses_reverify(family):
    cfg = SweepConfig(family, 10 if family in ("A1", "B1", "B2") else 40)
    store, summary = sweep(cfg)
    _check_store(store, cfg)
    assert summary.unique == len(summary.covered())


def test_monotone_in_height():
    prev = set()
    for M in (4, 8, 12, 16):
        _, summary = sweep(SweepConfig("B1", M))
        cur = set(summary.covered())
        assert prev <= cur
        prev = cur


@pytest.mark.parametrize("count", [2, 3, 8])
def test_shard_invariance(tmp_path, count):
    base = SweepConfig("A1", 10)
    whole, _ = sweep(base)
    paths = []
    for cfg in shard_configs(base, count):
        path = tmp_path / f"s{cfg.shard[0]}.jsonl"
        sweep(replace(cfg, output_path=str(path)))
        paths.append(path)
    merged = merge_runs(paths)
    assert merged.dumps() == whole.dumps()
    assert merge_runs(reversed(paths)).dumps() == whole.dumps()


def test_thread_invariance():
    a, _ = sweep(SweepConfig("B1", 12, threads=1))
    b, _ = sweep(SweepConfig("B1", 12, threads=3))
    assert a.dumps() == b.dumps()


def test_positive_only_is_a_subset():
    _, signed = sweep(SweepConfig("B14", 30))
    _, positive = sweep(SweepConfig("B14", 30, include_negative=False))
    assert set(positive.covered()) <= set(signed.covered())


def test_store_roundtrip_and_merge_laws(tmp_path):
    a, _ = sweep(SweepConfig("B12", 30, output_path=str(tmp_path / "a.jsonl")))
    b, _ = sweep(SweepConfig("B13", 30, output_path=str(tmp_path / "b.jsonl")))
    ra = read_store(tmp_path / "a.jsonl")
    assert ra.dumps() == a.dumps() == (tmp_path / "a.jsonl").read_text()
    assert merge_stores([ra]).dumps() == ra.dumps()
    ab = merge_runs([tmp_path / "a.jsonl", tmp_path / "b.jsonl"])
    ba = merge_runs([tmp_path / "b.jsonl", tmp_path / "a.jsonl"])
    assert ab.dumps() == ba.dumps()
    assert merge_stores([ab, ab]).dumps() == ab.dumps()
    header = json.loads((tmp_path / "a.jsonl").read_text().splitlines()[0])
    assert header["kind"] == "header" and header["runs"][0]["family"] == "B12"


def test_corrupt_store_reports_line(tmp_path):
    sweep(SweepConfig("A11", 7, (1, 1), output_path=str(tmp_path / "w.jsonl")))
    lines = (tmp_path / "w.jsonl").read_text().splitlines()
    lines[2] = lines[2].replace('"mode":"', '"mode":"x')
    (tmp_path / "bad.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(StoreFormatError, match=r"bad.jsonl:3"):
        read_store(tmp_path / "bad.jsonl")
    (tmp_path / "junk.jsonl").write_text(lines[0] + "\n{not json\n")
    with pytest.raises(StoreFormatError, match=r"junk.jsonl:2"):
        read_store(tmp_path / "junk.jsonl")


def test_verify_record_flags_tampering():
    rec = make_record(1, evaluate("A11", F(7, 4)), DIRECT, 2)
    assert verify_record(rec) == []
    bad = replace(rec, witness=Quartet(1, 542, 103, -514, 360))
    assert verify_record(bad)
    assert verify_record(replace(rec, n=2))
    doubled = replace(rec, witness=Quartet(1, 1084, 206, -1028, 718))
    assert verify_record(doubled)


def test_record_json_roundtrip():
    rec = make_record(189, evaluate("A1", 4, 2), INDIRECT, 3)
    back = CoverageRecord.from_obj(json.loads(rec.to_json()))
    assert back == rec


def test_summarize_prefers_direct():
    d = make_record(189, evaluate("A1", F(1, 2), F(-1, 4)), DIRECT, 3)
    i = make_record(189, evaluate("A1", 4, 2), INDIRECT, 3)
    s = summarize([i, d], (1, 1000))
    assert (s.direct, s.indirect, s.unique) == (1, 0, 1)
    s = summarize([i], (1, 1000))
    assert (s.direct, s.indirect) == (0, 1)


def test_empty_store_dumps_header_only():
    text = CoverageStore().dumps()
    assert len(text.splitlines()) == 1
