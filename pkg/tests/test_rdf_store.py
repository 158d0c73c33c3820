"""Parser, dictionary, index, and split behavior of the triple store."""

import io
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgrec.rdf_store import (
    RDF_TYPE,
    NTriplesError,
    ParseStats,
    StoreError,
    Term,
    TermKind,
    Triple,
    TripleStore,
    parse_ntriples,
    parse_term,
    split_triples,
)

EX = "http://example.org/"


def iri(name):
    return Term.iri(EX + name)


def test_parse_basic_statement():
    line = f"<{EX}s> <{EX}p> <{EX}o> .\n"
    [(s, p, o)] = list(parse_ntriples(line))
    assert s == iri("s") and p == iri("p") and o == iri("o")


def test_parse_all_object_shapes():
    text = "\n".join(
        [
            f'<{EX}s> <{EX}p> "plain" .',
            f'<{EX}s> <{EX}p> "tagged"@en .',
            f'<{EX}s> <{EX}p> "42"^^<http://www.w3.org/2001/XMLSchema#integer> .',
            f"<{EX}s> <{EX}p> _:b0 .",
            f"_:b1 <{EX}p> <{EX}o> .",
        ]
    )
    triples = list(parse_ntriples(text))
    assert triples[0][2] == Term.literal("plain")
    assert triples[1][2] == Term.literal("tagged", language="en")
    assert triples[2][2] == Term.literal("42", datatype="http://www.w3.org/2001/XMLSchema#integer")
    assert triples[3][2] == Term.blank("b0")
    assert triples[4][0] == Term.blank("b1")


def test_parse_string_escapes():
    text = f'<{EX}s> <{EX}p> "a\\tb\\nc\\"d\\\\e\\u00E9\\U0001F600" .'
    [(_, _, o)] = list(parse_ntriples(text))
    assert o.lexical == 'a\tb\nc"d\\eé\U0001f600'


def test_parse_iri_unicode_escape():
    text = f"<{EX}caf\\u00E9> <{EX}p> <{EX}o> ."
    [(s, _, _)] = list(parse_ntriples(text))
    assert s.lexical == EX + "café"


def test_comments_and_blank_lines_skipped():
    text = f"# header\n\n<{EX}s> <{EX}p> <{EX}o> . # trailing comment\n   \n"
    stats = ParseStats()
    triples = list(parse_ntriples(text, stats=stats))
    assert len(triples) == 1
    assert stats.lines == 4
    assert stats.statements == 1


@pytest.mark.parametrize(
    "bad",
    [
        f"<{EX}s> <{EX}p> <{EX}o>",  # missing terminating dot
        f'"literal" <{EX}p> <{EX}o> .',  # literal subject
        f"<{EX}s> _:b <{EX}o> .",  # blank predicate
        f'<{EX}s> "lit" <{EX}o> .',  # literal predicate
        f"<{EX}s> <{EX}p> <unterminated .",
        f'<{EX}s> <{EX}p> "unterminated .',
        f'<{EX}s> <{EX}p> "bad\\q" .',  # unknown escape
        f"<{EX}s> <{EX}p> <{EX}o> . extra",
        f"<{EX}s> <{EX}p> .",  # missing object
        "<> <p> <o> .",  # empty IRI
    ],
)
def test_strict_mode_raises(bad):
    with pytest.raises(NTriplesError):
        list(parse_ntriples(bad))


def test_error_carries_line_number():
    text = f"<{EX}s> <{EX}p> <{EX}o> .\nnot a triple\n"
    with pytest.raises(NTriplesError) as exc:
        list(parse_ntriples(text))
    assert exc.value.line_no == 2
    assert "line 2" in str(exc.value)


def test_lenient_mode_skips_and_counts():
    text = f"<{EX}a> <{EX}p> <{EX}b> .\nbroken line\n<{EX}c> <{EX}p> <{EX}d> .\n"
    stats = ParseStats()
    triples = list(parse_ntriples(text, strict=False, stats=stats))
    assert len(triples) == 2
    assert stats.skipped == 1
    assert stats.errors[0][0] == 2


def test_parse_from_path_and_stream(tmp_path):
    f = tmp_path / "g.nt"
    f.write_text(f"<{EX}s> <{EX}p> <{EX}o> .\n", encoding="utf-8")
    assert len(list(parse_ntriples(f))) == 1
    assert len(list(parse_ntriples(str(f)))) == 1
    with open(f, "r", encoding="utf-8") as fh:
        assert len(list(parse_ntriples(fh))) == 1
    assert len(list(parse_ntriples(f.read_bytes()))) == 1


def test_term_validation():
    with pytest.raises(StoreError):
        Term.iri("")
    with pytest.raises(StoreError):
        Term.iri("has space")
    with pytest.raises(StoreError):
        Term.literal("x", datatype=EX + "dt", language="en")
    with pytest.raises(StoreError):
        Term.blank("bad label")
    with pytest.raises(StoreError):
        Term(TermKind.IRI, EX + "x", datatype=EX + "dt")


def test_store_dedup_and_counts():
    store = TripleStore()
    assert store.add(iri("a"), iri("p"), iri("b")) is True
    assert store.add(iri("a"), iri("p"), iri("b")) is False
    assert store.n_triples == 1
    assert store.n_duplicates == 1


def test_same_lexical_different_datatype_is_distinct():
    store = TripleStore()
    store.add(iri("a"), iri("p"), Term.literal("1800"))
    store.add(iri("a"), iri("p"), Term.literal("1800", datatype="http://www.w3.org/2001/XMLSchema#gYear"))
    store.add(iri("a"), iri("p"), Term.literal("1800", language="en"))
    assert store.n_triples == 3


def test_intern_is_idempotent():
    store = TripleStore()
    t1 = store.intern(iri("x"))
    t2 = store.intern(iri("x"))
    assert t1 == t2
    assert store.resolve(t1) == iri("x")
    assert store.lookup(iri("y")) is None


def test_literal_subject_rejected():
    store = TripleStore()
    with pytest.raises(StoreError):
        store.add(Term.literal("x"), iri("p"), iri("o"))
    with pytest.raises(StoreError):
        store.add(iri("s"), Term.blank("b"), iri("o"))


def _demo_store():
    store = TripleStore()
    rows = [
        ("a", "p", "b"),
        ("a", "p", "c"),
        ("a", "q", "b"),
        ("b", "p", "c"),
        ("c", "q", "a"),
    ]
    for s, p, o in rows:
        store.add(iri(s), iri(p), iri(o))
    return store


def test_match_patterns_against_linear_scan():
    store = _demo_store()
    everything = set(store.triples())
    ids = [None] + sorted({x for t in everything for x in t})
    for s in ids:
        for p in ids:
            for o in ids:
                got = list(store.match(s=s, p=p, o=o))
                expected = {
                    t
                    for t in everything
                    if (s is None or t.s == s) and (p is None or t.p == p) and (o is None or t.o == o)
                }
                assert set(got) == expected
                assert len(got) == len(expected)


def test_match_unknown_id_is_empty():
    store = _demo_store()
    assert list(store.match(s=10_000)) == []


def test_match_is_sorted_and_indexes_consistent():
    store = _demo_store()
    rows = list(store.match())
    assert rows == sorted(rows)
    assert store.index_sizes() == (store.n_triples,) * 3


def test_mutation_after_match_rebuilds_indexes():
    store = _demo_store()
    before = len(list(store.match(p=store.lookup(iri("p")))))
    store.add(iri("z"), iri("p"), iri("a"))
    after = len(list(store.match(p=store.lookup(iri("p")))))
    assert after == before + 1


def test_instances_of_no_inference():
    store = TripleStore()
    store.add(iri("alice"), Term.iri(RDF_TYPE), iri("Person"))
    store.add(iri("bob"), Term.iri(RDF_TYPE), iri("Painter"))
    # Painter rdfs:subClassOf Person is asserted but must not be expanded.
    store.add(iri("Painter"), Term.iri("http://www.w3.org/2000/01/rdf-schema#subClassOf"), iri("Person"))
    person = store.lookup(iri("Person"))
    got = store.instances_of({person})
    assert got == {store.lookup(iri("alice"))}


def test_instances_of_without_rdf_type():
    store = _demo_store()
    assert store.instances_of({0}) == set()


def test_entity_ids_exclude_literals():
    store = TripleStore()
    store.add(iri("a"), iri("p"), Term.literal("text"))
    store.add(iri("a"), iri("q"), Term.blank("b"))
    ents = {store.resolve(t) for t in store.entity_ids()}
    assert ents == {iri("a"), Term.blank("b")}
    assert store.relation_ids() == sorted([store.lookup(iri("p")), store.lookup(iri("q"))])


def test_roundtrip_preserves_triples(tmp_path):
    store = TripleStore()
    store.add(iri("s"), iri("p"), Term.literal('tricky "quote"\nnewline\ttab\\slash'))
    store.add(iri("s"), iri("p"), Term.literal("1942", datatype="http://www.w3.org/2001/XMLSchema#gYear"))
    store.add(Term.blank("b1"), iri("p"), Term.literal("hei", language="no"))
    out = tmp_path / "round.nt"
    store.to_ntriples(out)
    back = TripleStore.from_ntriples(out)
    original = {tuple(map(store.resolve, t)) for t in store.triples()}
    reparsed = {tuple(map(back.resolve, t)) for t in back.triples()}
    assert original == reparsed


def test_parse_term_roundtrip():
    terms = [
        iri("x"),
        Term.literal("a b", language="en-GB"),
        Term.literal("1", datatype="http://www.w3.org/2001/XMLSchema#int"),
        Term.blank("node7"),
        Term.literal('esc"\\\n'),
    ]
    for t in terms:
        assert parse_term(t.n3()) == t


def test_dump_dictionary_format(tmp_path):
    store = TripleStore()
    store.add(iri("s"), iri("p"), Term.literal("v"))
    buf = io.StringIO()
    store.dump_dictionary(buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 3
    first = lines[0].split("\t")
    assert first[0] == "0"
    assert first[1] in {"IRI", "Literal", "BlankNode"}


# -- property tests ------------------------------------------------------

_names = st.sampled_from(["a", "b", "c", "d", "e"])
_preds = st.sampled_from(["p", "q"])
_objects = st.one_of(
    _names.map(lambda n: Term.iri(EX + n)),
    st.sampled_from(["x", "y"]).map(Term.blank),
    st.sampled_from(["1", "2"]).map(lambda v: Term.literal(v)),
)
_triple = st.tuples(_names.map(lambda n: Term.iri(EX + n)), _preds.map(lambda n: Term.iri(EX + n)), _objects)


@settings(max_examples=60, deadline=None)
@given(st.lists(_triple, max_size=40))
def test_match_oracle_property(rows):
    store = TripleStore.from_triples(rows)
    everything = set(store.triples())
    assert store.n_triples == len(everything)
    ids = sorted({x for t in everything for x in t})
    patterns = [(None, None, None)]
    for tid in ids[:6]:
        patterns += [(tid, None, None), (None, tid, None), (None, None, tid), (tid, tid, None), (tid, None, tid)]
    for s, p, o in patterns:
        got = list(store.match(s=s, p=p, o=o))
        expected = {
            t for t in everything if (s is None or t.s == s) and (p is None or t.p == p) and (o is None or t.o == o)
        }
        assert set(got) == expected and len(got) == len(expected)


_safe_iri = st.text(
    alphabet=st.characters(min_codepoint=0x21, max_codepoint=0x7E, exclude_characters="<>\"{}|^`\\"),
    min_size=1,
    max_size=12,
).map(lambda s: Term.iri(EX + s))
_any_literal = st.builds(
    lambda lex, suffix: Term.literal(lex, **suffix),
    st.text(max_size=16),
    st.one_of(
        st.just({}),
        st.just({"language": "en"}),
        st.just({"datatype": "http://www.w3.org/2001/XMLSchema#string"}),
    ),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_safe_iri, _safe_iri, st.one_of(_safe_iri, _any_literal)), max_size=20))
def test_serialization_roundtrip_property(rows):
    store = TripleStore.from_triples(rows)
    buf = io.StringIO()
    store.to_ntriples(buf)
    back = TripleStore.from_ntriples(buf.getvalue() + "\n")
    original = {tuple(map(store.resolve, t)) for t in store.triples()}
    reparsed = {tuple(map(back.resolve, t)) for t in back.triples()}
    assert original == reparsed


# -- splits --------------------------------------------------------------


def _dense_ten_triple_store():
    store = TripleStore()
    rows = [
        ("a", "p", "b"), ("b", "p", "c"), ("c", "p", "d"), ("d", "p", "e"), ("e", "p", "a"),
        ("a", "q", "c"), ("b", "q", "d"), ("c", "q", "e"), ("d", "q", "a"), ("e", "q", "b"),
    ]
    for s, p, o in rows:
        store.add(iri(s), iri(p), iri(o))
    return store


def test_split_sizes_on_dense_store():
    # Every entity occurs four times and each predicate five times, so removing
    # any two triples cannot break coverage and sizes stay at floor values.
    store = _dense_ten_triple_store()
    train, valid, test = split_triples(store, (0.8, 0.1, 0.1), seed=7)
    assert (len(train), len(valid), len(test)) == (8, 1, 1)


def test_split_is_deterministic_and_partitions():
    store = _dense_ten_triple_store()
    a = split_triples(store, (0.8, 0.1, 0.1), seed=3)
    b = split_triples(store, (0.8, 0.1, 0.1), seed=3)
    assert a == b
    train, valid, test = a
    parts = [set(train), set(valid), set(test)]
    assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])
    assert parts[0] | parts[1] | parts[2] == set(store.triples())


def test_split_coverage_property():
    store = TripleStore()
    # Star graph: leaves occur once, so held-out leaf triples must migrate.
    for i in range(30):
        store.add(iri("hub"), iri("p"), iri(f"leaf{i}"))
    for seed in range(5):
        train, valid, test = split_triples(store, (0.8, 0.1, 0.1), seed=seed)
        covered = set()
        for s, p, o in train:
            covered |= {s, p, o}
        for t in valid + test:
            assert t.s in covered and t.p in covered
            if not store.is_literal(t.o):
                assert t.o in covered


def test_split_validation_errors():
    store = _dense_ten_triple_store()
    with pytest.raises(StoreError):
        split_triples(store, (0.5, 0.5), seed=0)
    with pytest.raises(StoreError):
        split_triples(store, (0.7, 0.2, 0.2), seed=0)
    with pytest.raises(StoreError):
        split_triples(store, (0.98, 0.01, 0.01), seed=0)  # floor sizes hit zero
