"""Connection-test suite: nested-loop and path-enumeration oracles, gating,
evidence soundness, ranking rules, and config loading."""

from __future__ import annotations

import json
import random

import pytest

from kgrec.rdf_store import RDF_TYPE, Term, TripleStore
from kgrec.semantic_filter import (
    CRM,
    DEFAULT_ALLOWED_CLASSES,
    E21_PERSON,
    E39_ACTOR,
    Evidence,
    FilterError,
    FilterSpec,
    PathStep,
    Recommendation,
    builtin_filters,
    compact_iri,
    evidence_is_sound,
    expand_iri,
    filter_candidates,
    format_path,
    load_filter_config,
    parse_path,
    path_value_test,
    shared_value_test,
    temporal_proximity_test,
    type_gate,
)

EX = "http://example.org/"


def iri(local: str) -> Term:
    return Term.iri(EX + local)


def build_store(triples) -> TripleStore:
    store = TripleStore()
    for s, p, o in triples:
        store.add(s, p, o)
    return store


def tid(store: TripleStore, term: Term) -> int:
    got = store.lookup(term)
    assert got is not None, f"term not in store: {term}"
    return got


# ---------------------------------------------------------------------------
# Paths, IRIs, and spec validation
# ---------------------------------------------------------------------------


def test_expand_and_compact_iri():
    assert expand_iri("crm:E21_Person") == CRM + "E21_Person"
    assert expand_iri("<http://example.org/x>") == "http://example.org/x"
    assert expand_iri("http://example.org/x") == "http://example.org/x"
    assert compact_iri(CRM + "P7_took_place_at") == "crm:P7_took_place_at"
    assert compact_iri("http://example.org/x") == "<http://example.org/x>"
    with pytest.raises(FilterError):
        expand_iri("nope:thing")


def test_parse_path_forms():
    path = parse_path("crm:P98i_was_born/crm:P7_took_place_at")
    assert path == (
        PathStep(CRM + "P98i_was_born"),
        PathStep(CRM + "P7_took_place_at"),
    )
    inv = parse_path("^crm:P67_refers_to")
    assert inv == (PathStep(CRM + "P67_refers_to", inverse=True),)
    angled = parse_path("<http://example.org/a/b>/crm:P2_has_type")
    assert angled[0].predicate == "http://example.org/a/b"
    assert format_path(inv) == "^crm:P67_refers_to"
    assert format_path(angled) == "<http://example.org/a/b>/crm:P2_has_type"


def test_parse_path_rejects_bad_shapes():
    with pytest.raises(FilterError):
        parse_path("")
    with pytest.raises(FilterError):
        parse_path("crm:a//crm:b")
    with pytest.raises(FilterError):
        parse_path("crm:a/crm:b/crm:c/crm:d")


def test_filter_spec_validation():
    p1 = (PathStep(EX + "p"),)
    p2 = (PathStep(EX + "p"), PathStep(EX + "q"))
    with pytest.raises(FilterError):
        FilterSpec(name="", kind="SharedValue", properties=(p1,))
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="Nope", properties=(p1,))
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="SharedValue", properties=())
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="SharedValue", properties=(p2,))
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="TemporalProximity", properties=(p1,))
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="TemporalProximity", properties=(p1,), threshold_years=0)
    with pytest.raises(FilterError):
        FilterSpec(name="f", kind="SharedValue", properties=(p1,), threshold_years=5)
    FilterSpec(name="f", kind="SharedPathValue", properties=(p2,))


def test_builtin_filters_shape():
    specs = builtin_filters()
    assert len(specs) == 9
    by_name = {s.name: s for s in specs}
    assert set(by_name) == {
        "same_objects_connection",
        "same_location",
        "same_events",
        "same_identification",
        "same_production",
        "same_occurs_in",
        "close_birth_dates",
        "close_death_dates",
        "same_place_of_birth",
    }
    events = by_name["same_events"]
    preds = {path[0].predicate for path in events.properties}
    assert CRM + "P11i_participated_in" in preds
    assert CRM + "P12i_was_present_at" in preds
    assert CRM + "P14i_performed" in preds
    birth = by_name["close_birth_dates"]
    assert birth.kind == "TemporalProximity"
    assert birth.threshold_years == 10
    assert len(by_name["same_place_of_birth"].properties[0]) == 2
    assert by_name["same_production"].value_type == CRM + "E12_Production"


# ---------------------------------------------------------------------------
# type_gate
# ---------------------------------------------------------------------------


def person_graph():
    rdf_type = Term.iri(RDF_TYPE)
    person = Term.iri(E21_PERSON)
    actor = Term.iri(E39_ACTOR)
    place = Term.iri(CRM + "E53_Place")
    return build_store(
        [
            (iri("alice"), rdf_type, person),
            (iri("bob"), rdf_type, actor),
            (iri("krakow"), rdf_type, place),
        ]
    )


def test_type_gate_keeps_allowed_and_preserves_order():
    store = person_graph()
    cands = [
        (tid(store, iri("krakow")), 0.99),
        (tid(store, iri("alice")), 0.9),
        (tid(store, iri("bob")), 0.5),
    ]
    kept = type_gate(store, cands)
    assert kept == [
        (tid(store, iri("alice")), 0.9),
        (tid(store, iri("bob")), 0.5),
    ]
    assert type_gate(store, []) == []
    only_persons = type_gate(store, cands, allowed_classes=[E21_PERSON])
    assert only_persons == [(tid(store, iri("alice")), 0.9)]


# ---------------------------------------------------------------------------
# shared_value_test and the nested-loop oracle
# ---------------------------------------------------------------------------


def test_shared_value_basic_and_empty():
    p11 = Term.iri(CRM + "P11i_participated_in")
    store = build_store(
        [
            (iri("t"), p11, iri("event1")),
            (iri("c1"), p11, iri("event1")),
            (iri("c2"), p11, iri("event2")),
        ]
    )
    t = tid(store, iri("t"))
    c1, c2 = tid(store, iri("c1")), tid(store, iri("c2"))
    got = shared_value_test(store, t, [c1, c2], [CRM + "P11i_participated_in"])
    assert set(got) == {c1}
    ev = got[c1][0]
    assert ev.shared_value == Term.iri(EX + "event1")
    assert len(ev.witness_triples) == 2
    subjects = {store.resolve(w.s).lexical for w in ev.witness_triples}
    assert subjects == {EX + "t", EX + "c1"}
    assert shared_value_test(store, t, [c2], [CRM + "P11i_participated_in"]) == {}


def shared_value_oracle(store, target, candidates, properties):
    """Nested-loop reference: for every candidate, property, and target value,
    test candidate assertion directly; rows ordered by (candidate, property,
    value) N3 term order, distinct."""
    rows = []
    for c in candidates:
        if c == target:
            continue
        for prop in properties:
            pid = store.lookup_iri(prop)
            if pid is None:
                continue
            target_triples = list(store.match(target, pid, None))
            for tt in target_triples:
                for ct in store.match(c, pid, None):
                    if ct.o == tt.o:
                        rows.append((c, pid, ct.o, tt, ct))
    rows.sort(
        key=lambda r: (
            store.resolve(r[0]).n3(),
            store.resolve(r[1]).n3(),
            store.resolve(r[2]).n3(),
        )
    )
    out = {}
    seen = set()
    for c, pid, v, tt, ct in rows:
        if (c, pid, v) in seen:
            continue
        seen.add((c, pid, v))
        out.setdefault(c, []).append((pid, v, tt, ct))
    return out


def random_store(seed: int, n_entities: int, n_preds: int, n_triples: int):
    rng = random.Random(seed)
    entities = [iri(f"e{i}") for i in range(n_entities)]
    preds = [iri(f"p{i}") for i in range(n_preds)]
    store = TripleStore()
    for _ in range(n_triples):
        store.add(rng.choice(entities), rng.choice(preds), rng.choice(entities))
    return store, entities, preds


@pytest.mark.parametrize("seed", range(8))
def test_shared_value_equals_nested_loop_oracle(seed):
    rng = random.Random(1000 + seed)
    store, entities, preds = random_store(seed, 50, 6, 600)
    target = tid(store, rng.choice(entities))
    candidates = [tid(store, e) for e in rng.sample(entities, 25)]
    properties = [p.lexical for p in rng.sample(preds, 3)]
    got = shared_value_test(store, target, candidates, properties)
    want = shared_value_oracle(store, target, candidates, properties)
    assert list(got) == list(want)
    for c in want:
        got_rows = [
            (store.lookup(ev.shared_value), ev.witness_triples) for ev in got[c]
        ]
        want_rows = [(v, (tt, ct)) for _, v, tt, ct in want[c]]
        assert [r[0] for r in got_rows] == [r[0] for r in want_rows]
        assert [set(r[1]) for r in got_rows] == [set(r[1]) for r in want_rows]


def test_shared_value_value_type_restriction():
    rdf_type = Term.iri(RDF_TYPE)
    p = iri("made")
    store = build_store(
        [
            (iri("t"), p, iri("vase")),
            (iri("c"), p, iri("vase")),
            (iri("t"), p, iri("song")),
            (iri("c"), p, iri("song")),
            (iri("vase"), rdf_type, Term.iri(CRM + "E22_Man-Made_Object")),
        ]
    )
    t, c = tid(store, iri("t")), tid(store, iri("c"))
    got = shared_value_test(
        store, t, [c], [EX + "made"], value_type=CRM + "E22_Man-Made_Object"
    )
    assert [ev.shared_value.lexical for ev in got[c]] == [EX + "vase"]


def test_value_type_accepts_prefixed_names():
    rdf_type = Term.iri(RDF_TYPE)
    p = iri("made")
    store = build_store(
        [
            (iri("t"), p, iri("vase")),
            (iri("c"), p, iri("vase")),
            (iri("vase"), rdf_type, Term.iri(CRM + "E22_Man-Made_Object")),
        ]
    )
    t, c = tid(store, iri("t")), tid(store, iri("c"))
    expanded = shared_value_test(
        store, t, [c], [EX + "made"], value_type=CRM + "E22_Man-Made_Object"
    )
    prefixed = shared_value_test(
        store, t, [c], [EX + "made"], value_type="crm:E22_Man-Made_Object"
    )
    assert prefixed == expanded and c in prefixed

    via_path = path_value_test(
        store, t, [c], f"<{EX}made>", value_type="crm:E22_Man-Made_Object"
    )
    assert store.lookup(via_path[c].shared_value) == tid(store, iri("vase"))


# ---------------------------------------------------------------------------
# path_value_test and the path-enumeration oracle
# ---------------------------------------------------------------------------


def test_path_length_one_reduces_to_shared_value():
    rng = random.Random(7)
    store, entities, preds = random_store(7, 30, 4, 250)
    target = tid(store, rng.choice(entities))
    candidates = [tid(store, e) for e in rng.sample(entities, 15)]
    pred = preds[0].lexical
    via_path = path_value_test(store, target, candidates, parse_path(f"<{pred}>"))
    via_shared = shared_value_test(store, target, candidates, [pred])
    assert set(via_path) == set(via_shared)
    for c, ev in via_path.items():
        assert store.lookup(ev.shared_value) in {
            store.lookup(e.shared_value) for e in via_shared[c]
        }


def test_birthplace_two_hop_fixture():
    born = Term.iri(CRM + "P98i_was_born")
    took = Term.iri(CRM + "P7_took_place_at")
    store = build_store(
        [
            (iri("t"), born, iri("birth_t")),
            (iri("birth_t"), took, iri("krakow")),
            (iri("c"), born, iri("birth_c")),
            (iri("birth_c"), took, iri("krakow")),
            (iri("other"), born, iri("birth_o")),
            (iri("birth_o"), took, iri("warsaw")),
        ]
    )
    t = tid(store, iri("t"))
    c, other = tid(store, iri("c")), tid(store, iri("other"))
    got = path_value_test(
        store, t, [c, other], "crm:P98i_was_born/crm:P7_took_place_at"
    )
    assert set(got) == {c}
    ev = got[c]
    assert ev.shared_value == Term.iri(EX + "krakow")
    assert len(ev.witness_triples) == 4
    assert evidence_is_sound(store, ev)


def test_inverse_step_traverses_object_to_subject():
    refers = Term.iri(CRM + "P67_refers_to")
    store = build_store(
        [
            (iri("doc"), refers, iri("t")),
            (iri("doc"), refers, iri("c")),
            (iri("doc2"), refers, iri("lonely")),
        ]
    )
    t = tid(store, iri("t"))
    c, lonely = tid(store, iri("c")), tid(store, iri("lonely"))
    got = path_value_test(store, t, [c, lonely], "^crm:P67_refers_to")
    assert set(got) == {c}
    assert got[c].shared_value == Term.iri(EX + "doc")


def enumerate_chains(store, source, path):
    """Exhaustive reference: every (terminal value, chain) reachable via path."""
    states = [(source, ())]
    for step in path:
        pid = store.lookup_iri(step.predicate)
        nxt = []
        if pid is None:
            return []
        for node, chain in states:
            if store.is_literal(node):
                continue
            if step.inverse:
                nxt.extend((t.s, chain + (t,)) for t in store.match(None, pid, node))
            else:
                nxt.extend((t.o, chain + (t,)) for t in store.match(node, pid, None))
        states = nxt
    return states


@pytest.mark.parametrize("seed", range(6))
def test_path_value_equals_enumeration_oracle(seed):
    rng = random.Random(2000 + seed)
    store, entities, preds = random_store(seed + 50, 25, 4, 300)
    target = tid(store, rng.choice(entities))
    candidates = [tid(store, e) for e in rng.sample(entities, 12)]
    steps = tuple(
        PathStep(rng.choice(preds).lexical, inverse=rng.random() < 0.4)
        for _ in range(rng.randint(1, 3))
    )
    got = path_value_test(store, target, candidates, steps)
    target_vals = {v for v, _ in enumerate_chains(store, target, steps)}
    for c in candidates:
        if c == target:
            continue
        cand_vals = {v for v, _ in enumerate_chains(store, c, steps)}
        common = target_vals & cand_vals
        assert (c in got) == bool(common)
        if common:
            ev = got[c]
            value = store.lookup(ev.shared_value)
            assert value == min(common, key=lambda v: store.resolve(v).n3())
            assert evidence_is_sound(store, ev)
            n = len(steps)
            t_chain, c_chain = ev.witness_triples[:n], ev.witness_triples[n:]
            assert [v for v, ch in enumerate_chains(store, target, steps) if ch == t_chain] == [value]
            assert [v for v, ch in enumerate_chains(store, c, steps) if ch == c_chain] == [value]


# ---------------------------------------------------------------------------
# temporal_proximity_test
# ---------------------------------------------------------------------------


def date_graph(target_year: str, cand_years: dict[str, str]):
    born = Term.iri(CRM + "P98i_was_born")
    span = Term.iri(CRM + "P4_has_time-span")
    begin = Term.iri(CRM + "P82a_begin_of_the_begin")
    triples = [
        (iri("t"), born, iri("birth_t")),
        (iri("birth_t"), span, iri("span_t")),
        (iri("span_t"), begin, Term.literal(target_year)),
    ]
    for name, year in cand_years.items():
        triples += [
            (iri(name), born, iri(f"birth_{name}")),
            (iri(f"birth_{name}"), span, iri(f"span_{name}")),
            (iri(f"span_{name}"), begin, Term.literal(year)),
        ]
    return build_store(triples)


def birth_spec() -> FilterSpec:
    return [s for s in builtin_filters() if s.name == "close_birth_dates"][0]


def test_temporal_match_and_delta():
    store = date_graph("1473", {"c1": "1480", "c2": "1600"})
    t = tid(store, iri("t"))
    c1, c2 = tid(store, iri("c1")), tid(store, iri("c2"))
    got = temporal_proximity_test(store, t, [c1, c2], birth_spec())
    assert set(got) == {c1}
    assert got[c1].shared_value == ("1473", "1480", 7)
    assert len(got[c1].witness_triples) == 6
    assert evidence_is_sound(store, got[c1])


def test_temporal_threshold_boundary_inclusive():
    store = date_graph("1470", {"edge": "1480", "past": "1481"})
    t = tid(store, iri("t"))
    edge, past = tid(store, iri("edge")), tid(store, iri("past"))
    got = temporal_proximity_test(store, t, [edge, past], birth_spec())
    assert set(got) == {edge}
    assert got[edge].shared_value[2] == 10


def test_temporal_parses_full_dates_and_negative_years():
    store = date_graph("1473-02-19", {"c": "-44-03-15"})
    t, c = tid(store, iri("t")), tid(store, iri("c"))
    spec = FilterSpec(
        name="wide",
        kind="TemporalProximity",
        properties=birth_spec().properties,
        threshold_years=2000,
    )
    got = temporal_proximity_test(store, t, [c], spec)
    assert got[c].shared_value == ("1473-02-19", "-44-03-15", 1517)


def test_temporal_unparseable_candidate_skipped():
    store = date_graph("1473", {"c1": "circa 1470", "c2": "1474"})
    t = tid(store, iri("t"))
    c1, c2 = tid(store, iri("c1")), tid(store, iri("c2"))
    skipped: list[int] = []
    got = temporal_proximity_test(store, t, [c1, c2], birth_spec(), skipped=skipped)
    assert set(got) == {c2}
    assert skipped == [c1]


def test_temporal_unparseable_target_yields_no_matches():
    store = date_graph("unknown", {"c": "1474"})
    t, c = tid(store, iri("t")), tid(store, iri("c"))
    skipped: list[int] = []
    got = temporal_proximity_test(store, t, [c], birth_spec(), skipped=skipped)
    assert got == {}
    assert skipped == [c]


def test_temporal_rejects_wrong_kind():
    store = date_graph("1473", {})
    t = tid(store, iri("t"))
    spec = FilterSpec(name="sv", kind="SharedValue", properties=((PathStep(EX + "p"),),))
    with pytest.raises(FilterError):
        temporal_proximity_test(store, t, [], spec)


# ---------------------------------------------------------------------------
# filter_candidates
# ---------------------------------------------------------------------------


def toy_people_graph():
    """20 persons; communities share events, productions, docs, birthplaces."""
    rdf_type = Term.iri(RDF_TYPE)
    person_cls = Term.iri(E21_PERSON)
    p11 = Term.iri(CRM + "P11i_participated_in")
    p14 = Term.iri(CRM + "P14i_performed")
    refers = Term.iri(CRM + "P67_refers_to")
    born = Term.iri(CRM + "P98i_was_born")
    took = Term.iri(CRM + "P7_took_place_at")
    span = Term.iri(CRM + "P4_has_time-span")
    begin = Term.iri(CRM + "P82a_begin_of_the_begin")
    prod_cls = Term.iri(CRM + "E12_Production")
    rng = random.Random(99)
    triples = []
    for i in range(20):
        p = iri(f"person{i}")
        triples.append((p, rdf_type, person_cls))
        triples.append((p, p11, iri(f"event{i % 4}")))
        if i % 3 == 0:
            triples.append((p, p14, iri(f"prod{i % 2}")))
        if i % 5 != 1:
            triples.append((iri(f"doc{i % 3}"), refers, p))
        triples.append((p, born, iri(f"birth{i}")))
        triples.append((iri(f"birth{i}"), took, iri(f"place{i % 5}")))
        triples.append((iri(f"birth{i}"), span, iri(f"span{i}")))
        triples.append((iri(f"span{i}"), begin, Term.literal(str(1400 + rng.randrange(120)))))
    for j in range(2):
        triples.append((iri(f"prod{j}"), rdf_type, prod_cls))
    return build_store(triples)


def full_evaluation_oracle(store, target, candidates, specs):
    """Independent survivor set: run every spec per candidate in isolation."""
    survivors = set()
    for c, _ in candidates:
        if c == target:
            continue
        if not type_gate(store, [(c, 0.0)]):
            continue
        for spec in specs:
            hit = False
            if spec.kind == "SharedValue":
                for path in spec.properties:
                    single = path[0]
                    pid = store.lookup_iri(single.predicate)
                    if pid is None:
                        continue
                    if single.inverse:
                        tv = {t.s for t in store.match(None, pid, target)}
                        cv = {t.s for t in store.match(None, pid, c)}
                    else:
                        tv = {t.o for t in store.match(target, pid, None)}
                        cv = {t.o for t in store.match(c, pid, None)}
                    common = tv & cv
                    if spec.value_type:
                        cls = store.lookup_iri(spec.value_type)
                        rt = store.lookup_iri(RDF_TYPE)
                        common = {
                            v
                            for v in common
                            if cls is not None
                            and not store.is_literal(v)
                            and next(iter(store.match(v, rt, cls)), None) is not None
                        }
                    if common:
                        hit = True
            elif spec.kind == "SharedPathValue":
                for path in spec.properties:
                    tvals = {v for v, _ in enumerate_chains(store, target, path)}
                    cvals = {v for v, _ in enumerate_chains(store, c, path)}
                    if tvals & cvals:
                        hit = True
            else:
                got = temporal_proximity_test(store, target, [c], spec)
                hit = c in got
            if hit:
                survivors.add(c)
                break
    return survivors


def test_filter_candidates_equals_full_evaluation_oracle():
    store = toy_people_graph()
    specs = builtin_filters()
    rng = random.Random(5)
    target = tid(store, iri("person0"))
    candidates = [
        (tid(store, iri(f"person{i}")), round(rng.uniform(0.1, 0.99), 6))
        for i in range(1, 20)
    ]
    got = filter_candidates(store, target, candidates, specs)
    want = full_evaluation_oracle(store, target, candidates, specs)
    assert {r.candidate for r in got} == want
    sims = dict(candidates)
    assert [r.candidate for r in got] == sorted(
        (r.candidate for r in got),
        key=lambda c: (-sims[c], -len([x for x in got if x.candidate == c][0].evidence), c),
    )
    assert [r.rank for r in got] == list(range(1, len(got) + 1))
    for r in got:
        assert r.evidence
        for ev in r.evidence:
            assert evidence_is_sound(store, ev)


def test_filter_candidates_ordering_and_ranks():
    p11 = Term.iri(CRM + "P11i_participated_in")
    rdf_type = Term.iri(RDF_TYPE)
    person_cls = Term.iri(E21_PERSON)
    store = build_store(
        [
            (iri("t"), p11, iri("e")),
            (iri("hi"), p11, iri("e")),
            (iri("lo"), p11, iri("e")),
            (iri("t"), rdf_type, person_cls),
            (iri("hi"), rdf_type, person_cls),
            (iri("lo"), rdf_type, person_cls),
        ]
    )
    t = tid(store, iri("t"))
    hi, lo = tid(store, iri("hi")), tid(store, iri("lo"))
    got = filter_candidates(store, t, [(hi, 0.9), (lo, 0.5)], builtin_filters())
    assert [(r.candidate, r.rank) for r in got] == [(hi, 1), (lo, 2)]


def test_filter_candidates_tie_breaks_by_evidence_then_id():
    p11 = Term.iri(CRM + "P11i_participated_in")
    p14 = Term.iri(CRM + "P14i_performed")
    rdf_type = Term.iri(RDF_TYPE)
    person_cls = Term.iri(E21_PERSON)
    store = build_store(
        [
            (iri("t"), p11, iri("e")),
            (iri("t"), p14, iri("act")),
            (iri("one"), p11, iri("e")),
            (iri("two"), p11, iri("e")),
            (iri("two"), p14, iri("act")),
            (iri("t"), rdf_type, person_cls),
            (iri("one"), rdf_type, person_cls),
            (iri("two"), rdf_type, person_cls),
        ]
    )
    t = tid(store, iri("t"))
    one, two = tid(store, iri("one")), tid(store, iri("two"))
    got = filter_candidates(store, t, [(one, 0.7), (two, 0.7)], builtin_filters())
    assert [r.candidate for r in got] == [two, one]
    participated_only = FilterSpec(
        name="participated",
        kind="SharedValue",
        properties=(parse_path("crm:P11i_participated_in"),),
    )
    got2 = filter_candidates(store, t, [(one, 0.7), (two, 0.7)], [participated_only])
    assert [r.candidate for r in got2] == [min(one, two), max(one, two)]


def test_filter_candidates_drops_unconnected_and_self():
    store = toy_people_graph()
    rdf_type = store.lookup_iri(RDF_TYPE)
    person_cls = store.lookup_iri(E21_PERSON)
    hermit = iri("hermit")
    store.add(hermit, Term.iri(RDF_TYPE), Term.iri(E21_PERSON))
    t = tid(store, iri("person0"))
    h = tid(store, hermit)
    got = filter_candidates(store, t, [(h, 0.99), (t, 1.0)], builtin_filters())
    assert got == []
    assert rdf_type is not None and person_cls is not None


def test_filter_candidates_errors_on_unknown_target():
    store = toy_people_graph()
    with pytest.raises(FilterError):
        filter_candidates(store, 10**9, [], builtin_filters())


def test_filters_are_disjunctive_monotonic():
    store = toy_people_graph()
    rng = random.Random(17)
    specs = builtin_filters()
    target = tid(store, iri("person3"))
    candidates = [
        (tid(store, iri(f"person{i}")), round(rng.uniform(0.1, 0.99), 6))
        for i in range(20)
        if i != 3
    ]
    for trial in range(6):
        subset = rng.sample(specs, rng.randint(1, len(specs) - 1))
        extra = rng.choice([s for s in specs if s not in subset])
        before = {r.candidate for r in filter_candidates(store, target, candidates, subset)}
        after = {
            r.candidate
            for r in filter_candidates(store, target, candidates, subset + [extra])
        }
        assert before <= after


def test_survivor_order_is_input_order_when_sims_distinct():
    store = toy_people_graph()
    target = tid(store, iri("person0"))
    candidates = [
        (tid(store, iri(f"person{i}")), 0.99 - i * 0.01) for i in range(1, 20)
    ]
    got = filter_candidates(store, target, candidates, builtin_filters())
    kept = {r.candidate for r in got}
    assert [r.candidate for r in got] == [c for c, _ in candidates if c in kept]


def test_evidence_and_recommendation_validation():
    with pytest.raises(FilterError):
        Evidence(filter_name="", property_path=(PathStep(EX + "p"),),
                 shared_value=Term.iri(EX + "v"), witness_triples=(Triple_stub(),))
    with pytest.raises(FilterError):
        Evidence(filter_name="f", property_path=(PathStep(EX + "p"),),
                 shared_value=Term.iri(EX + "v"), witness_triples=())
    ev = Evidence(filter_name="f", property_path=(PathStep(EX + "p"),),
                  shared_value=Term.iri(EX + "v"), witness_triples=(Triple_stub(),))
    with pytest.raises(FilterError):
        Recommendation(candidate=1, similarity=0.5, evidence=(), rank=1)
    with pytest.raises(FilterError):
        Recommendation(candidate=1, similarity=0.5, evidence=(ev,), rank=0)


def Triple_stub():
    from kgrec.rdf_store import Triple

    return Triple(0, 1, 2)


def test_evidence_is_sound_detects_fabrication():
    p11 = Term.iri(CRM + "P11i_participated_in")
    store = build_store([(iri("t"), p11, iri("e"))])
    from kgrec.rdf_store import Triple

    real = Evidence(
        filter_name="f",
        property_path=(PathStep(CRM + "P11i_participated_in"),),
        shared_value=Term.iri(EX + "e"),
        witness_triples=(Triple(tid(store, iri("t")), tid(store, p11), tid(store, iri("e"))),),
    )
    fake = Evidence(
        filter_name="f",
        property_path=(PathStep(CRM + "P11i_participated_in"),),
        shared_value=Term.iri(EX + "e"),
        witness_triples=(Triple(tid(store, iri("e")), tid(store, p11), tid(store, iri("t"))),),
    )
    assert evidence_is_sound(store, real)
    assert not evidence_is_sound(store, fake)


# ---------------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------------


def test_load_filter_config_round_trip(tmp_path):
    cfg = [
        {
            "name": "my_events",
            "kind": "SharedValue",
            "paths": ["crm:P11i_participated_in", "crm:P14i_performed"],
        },
        {
            "name": "my_birth",
            "kind": "TemporalProximity",
            "paths": ["crm:P98i_was_born/crm:P4_has_time-span/crm:P82a_begin_of_the_begin"],
            "threshold_years": 25,
        },
        {
            "name": "my_place",
            "kind": "SharedPathValue",
            "paths": ["crm:P98i_was_born/crm:P7_took_place_at"],
            "value_type": "crm:E53_Place",
        },
    ]
    path = tmp_path / "filters.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    specs = load_filter_config(path)
    assert [s.name for s in specs] == ["my_events", "my_birth", "my_place"]
    assert specs[1].threshold_years == 25
    assert specs[2].value_type == CRM + "E53_Place"
    assert specs[0].properties[0][0].predicate == CRM + "P11i_participated_in"


@pytest.mark.parametrize(
    "payload,msg",
    [
        ({"name": "x", "kind": "SharedValue", "paths": ["crm:P1_is_identified_by"], "bogus": 1}, "unknown keys"),
        ({"kind": "SharedValue", "paths": ["crm:P1_is_identified_by"]}, "missing"),
        ({"name": "x", "kind": "SharedValue", "paths": "crm:P1_is_identified_by"}, "list of strings"),
    ],
)
def test_load_filter_config_rejects_bad_entries(tmp_path, payload, msg):
    path = tmp_path / "filters.json"
    path.write_text(json.dumps([payload]), encoding="utf-8")
    with pytest.raises(FilterError, match=msg):
        load_filter_config(path)


def test_load_filter_config_rejects_bad_json_and_shape(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope", encoding="utf-8")
    with pytest.raises(FilterError, match="invalid JSON"):
        load_filter_config(path)
    path.write_text("{}", encoding="utf-8")
    with pytest.raises(FilterError, match="must be a list"):
        load_filter_config(path)
