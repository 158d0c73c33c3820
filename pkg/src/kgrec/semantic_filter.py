"""Stage three: type-gate candidates, test graph connections, attach evidence.

Candidates arriving from vector search are first restricted to allowed
ontology classes (actors and persons by default), then tested against the
target with a set of declarative connection tests. Three kinds exist:

- SharedValue: target and candidate assert the same value on one predicate
  (forward or inverse); every shared (property, value) pair becomes one
  Evidence item, with the two asserting triples as witnesses. Output rows are
  ordered by (candidate, property, value) in N3 term order, and duplicate
  rows are collapsed, matching a SELECT DISTINCT ... ORDER BY over the union
  of both assertion patterns.
- SharedPathValue: both sides reach a common terminal value over a property
  path of one to three steps (each step forward or inverse); the witnesses
  are one full chain of triples per side.
- TemporalProximity: both sides reach a date literal over the spec's path;
  the leading year is parsed (YYYY, YYYY-MM-DD, and negative years) and the
  candidate matches when |year_target - year_candidate| <= threshold_years.

Tests are disjunctive: one passing test suffices to retain a candidate. The
retained candidates are ranked by vector similarity descending, ties broken
by more evidence first, then ascending candidate id. Every Evidence witness
is a triple that exists in the store, re-checkable at any time.

Filter configs load from JSON: a list of objects with `name`, `kind`,
`paths` (strings like "crm:P11i_participated_in" or
"^crm:P67_refers_to/crm:P2_has_type"; `^` marks an inverse step), optional
`value_type` (rdf:type required of the shared value), and
`threshold_years` (TemporalProximity only). Unknown keys are rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from kgrec.rdf_store import RDF_TYPE, Term, TermId, Triple, TripleStore

CRM = "http://www.cidoc-crm.org/cidoc-crm/"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

PREFIXES: Mapping[str, str] = {
    "crm": CRM,
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "xsd": XSD_NS,
}

E39_ACTOR = CRM + "E39_Actor"
E21_PERSON = CRM + "E21_Person"
E12_PRODUCTION = CRM + "E12_Production"
E22_OBJECT = CRM + "E22_Man-Made_Object"

DEFAULT_ALLOWED_CLASSES = (E39_ACTOR, E21_PERSON)
DEFAULT_THRESHOLD_YEARS = 10

SHARED_VALUE = "SharedValue"
TEMPORAL_PROXIMITY = "TemporalProximity"
SHARED_PATH_VALUE = "SharedPathValue"
_KINDS = (SHARED_VALUE, TEMPORAL_PROXIMITY, SHARED_PATH_VALUE)

_YEAR_RE = re.compile(r"^\s*(-?\d+)")

# (TermId, similarity) pairs, best first, as produced by vector search.
CandidateSet = Sequence[tuple[TermId, float]]


class FilterError(ValueError):
    """Invalid filter spec, config file, or target."""


@dataclass(frozen=True)
class PathStep:
    predicate: str  # full predicate IRI
    inverse: bool = False

    def __post_init__(self):
        if not self.predicate:
            raise FilterError("path step predicate must be non-empty")

    def __str__(self) -> str:
        return ("^" if self.inverse else "") + compact_iri(self.predicate)


PropertyPath = tuple[PathStep, ...]


def expand_iri(text: str) -> str:
    """Accept `<iri>`, a full IRI, or a `prefix:local` form."""
    if text.startswith("<") and text.endswith(">"):
        return text[1:-1]
    if "://" in text:
        return text
    prefix, sep, local = text.partition(":")
    if sep and prefix in PREFIXES:
        return PREFIXES[prefix] + local
    raise FilterError(f"cannot expand IRI {text!r}: unknown prefix")


def compact_iri(iri: str) -> str:
    for prefix, ns in PREFIXES.items():
        if iri.startswith(ns):
            return f"{prefix}:{iri[len(ns):]}"
    return f"<{iri}>"


def parse_path(text: str) -> PropertyPath:
    """Parse "step/step/step"; `^` marks inverse; `/` inside <...> is literal."""
    segments: list[str] = []
    current: list[str] = []
    in_angle = False
    for ch in text:
        if ch == "<":
            in_angle = True
        elif ch == ">":
            in_angle = False
        if ch == "/" and not in_angle:
            segments.append("".join(current))
            current = []
        else:
            current.append(ch)
    segments.append("".join(current))
    steps = []
    for seg in segments:
        seg = seg.strip()
        if not seg:
            raise FilterError(f"empty step in path {text!r}")
        inverse = seg.startswith("^")
        steps.append(PathStep(expand_iri(seg[1:] if inverse else seg), inverse))
    if not 1 <= len(steps) <= 3:
        raise FilterError(f"path {text!r} must have 1..3 steps, got {len(steps)}")
    return tuple(steps)


def format_path(path: PropertyPath) -> str:
    return "/".join(str(step) for step in path)


@dataclass(frozen=True)
class FilterSpec:
    name: str
    kind: str
    properties: tuple[PropertyPath, ...]
    value_type: str | None = None
    threshold_years: int | None = None

    def __post_init__(self):
        if not self.name:
            raise FilterError("filter name must be non-empty")
        if self.kind not in _KINDS:
            raise FilterError(f"unknown filter kind {self.kind!r}")
        if not self.properties:
            raise FilterError(f"filter {self.name}: properties must be non-empty")
        for path in self.properties:
            if not 1 <= len(path) <= 3:
                raise FilterError(f"filter {self.name}: paths must have 1..3 steps")
        if self.kind == SHARED_VALUE and any(len(p) != 1 for p in self.properties):
            raise FilterError(f"filter {self.name}: SharedValue paths must have length 1")
        if self.kind == TEMPORAL_PROXIMITY:
            if not isinstance(self.threshold_years, int) or self.threshold_years < 1:
                raise FilterError(f"filter {self.name}: threshold_years must be a positive integer")
        elif self.threshold_years is not None:
            raise FilterError(f"filter {self.name}: threshold_years only applies to TemporalProximity")


@dataclass(frozen=True)
class Evidence:
    """Machine-checkable proof that one connection test passed.

    `shared_value` is the common Term for SharedValue/SharedPathValue tests,
    or a (target_date, candidate_date, delta_years) tuple for
    TemporalProximity. `witness_triples` all exist in the source store.
    """

    filter_name: str
    property_path: PropertyPath
    shared_value: Term | tuple[str, str, int]
    witness_triples: tuple[Triple, ...]

    def __post_init__(self):
        if not self.filter_name:
            raise FilterError("evidence filter_name must be non-empty")
        if not self.witness_triples:
            raise FilterError("evidence must carry at least one witness triple")


@dataclass(frozen=True)
class Recommendation:
    candidate: TermId
    similarity: float
    evidence: tuple[Evidence, ...]
    rank: int

    def __post_init__(self):
        if not self.evidence:
            raise FilterError("recommendation must carry evidence")
        if self.rank < 1:
            raise FilterError("rank must be >= 1")


def builtin_filters() -> list[FilterSpec]:
    """The nine default connection tests, overridable via config files."""

    def shared(name: str, *paths: str, value_type: str | None = None) -> FilterSpec:
        return FilterSpec(
            name=name,
            kind=SHARED_VALUE,
            properties=tuple(parse_path(p) for p in paths),
            value_type=expand_iri(value_type) if value_type else None,
        )

    def shared_path(name: str, path: str) -> FilterSpec:
        return FilterSpec(name=name, kind=SHARED_PATH_VALUE, properties=(parse_path(path),))

    def temporal(name: str, path: str) -> FilterSpec:
        return FilterSpec(
            name=name,
            kind=TEMPORAL_PROXIMITY,
            properties=(parse_path(path),),
            threshold_years=DEFAULT_THRESHOLD_YEARS,
        )

    return [
        shared(
            "same_objects_connection",
            "crm:P12i_was_present_at",
            "^crm:P67_refers_to",
            value_type="crm:E22_Man-Made_Object",
        ),
        shared("same_location", "crm:P74_has_current_or_former_residence"),
        shared(
            "same_events",
            "crm:P11i_participated_in",
            "crm:P12i_was_present_at",
            "crm:P14i_performed",
        ),
        shared("same_identification", "crm:P1_is_identified_by"),
        shared("same_production", "crm:P14i_performed", value_type="crm:E12_Production"),
        shared("same_occurs_in", "^crm:P67_refers_to"),
        temporal(
            "close_birth_dates",
            "crm:P98i_was_born/crm:P4_has_time-span/crm:P82a_begin_of_the_begin",
        ),
        temporal(
            "close_death_dates",
            "crm:P100i_died_in/crm:P4_has_time-span/crm:P82b_end_of_the_end",
        ),
        shared_path("same_place_of_birth", "crm:P98i_was_born/crm:P7_took_place_at"),
    ]


def load_filter_config(path: str | Path) -> list[FilterSpec]:
    """Load a JSON list of filter specs; unknown keys are rejected."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FilterError(f"filter config {path}: invalid JSON ({exc})") from exc
    if not isinstance(data, list):
        raise FilterError(f"filter config {path}: top level must be a list")
    allowed = {"name", "kind", "paths", "value_type", "threshold_years"}
    specs = []
    for i, item in enumerate(data):
        if not isinstance(item, dict):
            raise FilterError(f"filter config {path}: entry {i} must be an object")
        unknown = set(item) - allowed
        if unknown:
            raise FilterError(f"filter config {path}: entry {i} has unknown keys {sorted(unknown)}")
        for key in ("name", "kind", "paths"):
            if key not in item:
                raise FilterError(f"filter config {path}: entry {i} missing {key!r}")
        paths = item["paths"]
        if not isinstance(paths, list) or not all(isinstance(p, str) for p in paths):
            raise FilterError(f"filter config {path}: entry {i} paths must be a list of strings")
        value_type = item.get("value_type")
        specs.append(
            FilterSpec(
                name=item["name"],
                kind=item["kind"],
                properties=tuple(parse_path(p) for p in paths),
                value_type=expand_iri(value_type) if value_type else None,
                threshold_years=item.get("threshold_years"),
            )
        )
    return specs


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _term_key(store: TripleStore, tid: TermId) -> str:
    return store.resolve(tid).n3()


def _type_ok(store: TripleStore, tid: TermId, rdf_type: TermId | None, class_id: TermId | None) -> bool:
    if class_id is None:
        return True
    if rdf_type is None or store.is_literal(tid):
        return False
    return next(iter(store.match(tid, rdf_type, class_id)), None) is not None


def _reachable(
    store: TripleStore,
    source: TermId,
    path: PropertyPath,
    value_type: str | None = None,
) -> dict[TermId, tuple[Triple, ...]]:
    """Terminal values reachable from source via path, with one witness chain.

    When several chains reach the same value, the first in ascending
    (node id, triple order) enumeration wins, which is deterministic.
    """
    frontier: dict[TermId, tuple[Triple, ...]] = {source: ()}
    for step in path:
        pred = store.lookup_iri(step.predicate)
        if pred is None:
            return {}
        nxt: dict[TermId, tuple[Triple, ...]] = {}
        for node in sorted(frontier):
            chain = frontier[node]
            if store.is_literal(node):
                continue
            if step.inverse:
                found = ((t.s, t) for t in store.match(None, pred, node))
            else:
                found = ((t.o, t) for t in store.match(node, pred, None))
            for endpoint, triple in found:
                if endpoint not in nxt:
                    nxt[endpoint] = chain + (triple,)
        frontier = nxt
        if not frontier:
            break
    if value_type is not None:
        rdf_type = store.lookup_iri(RDF_TYPE)
        class_id = store.lookup_iri(value_type)
        if class_id is None:
            return {}
        frontier = {
            v: chain for v, chain in frontier.items() if _type_ok(store, v, rdf_type, class_id)
        }
    return frontier


def _dedup_candidates(target: TermId, candidates: Iterable[TermId]) -> list[TermId]:
    return [c for c in dict.fromkeys(candidates) if c != target]


def _shared_value_rows(
    store: TripleStore,
    target: TermId,
    candidates: Sequence[TermId],
    path: PropertyPath,
    value_type: str | None,
    filter_name: str,
) -> list[tuple[TermId, Evidence]]:
    """All (candidate, Evidence) pairs for one single-step shared-value path.

    Enumerates every shared (property, value) pair, ordered by
    (candidate, value) in N3 term order.
    """
    step = path[0]
    pred = store.lookup_iri(step.predicate)
    if pred is None:
        return []
    rdf_type = store.lookup_iri(RDF_TYPE)
    class_id = store.lookup_iri(value_type) if value_type else None
    if value_type and class_id is None:
        return []
    if step.inverse:
        target_side = {t.s: t for t in store.match(None, pred, target)}
    else:
        target_side = {t.o: t for t in store.match(target, pred, None)}
    if value_type:
        target_side = {
            v: t for v, t in target_side.items() if _type_ok(store, v, rdf_type, class_id)
        }
    if not target_side:
        return []
    rows = []
    for c in candidates:
        if step.inverse:
            cand_matches = ((t.s, t) for t in store.match(None, pred, c))
        else:
            cand_matches = ((t.o, t) for t in store.match(c, pred, None))
        for value, triple in cand_matches:
            if value in target_side:
                rows.append(
                    (
                        c,
                        Evidence(
                            filter_name=filter_name,
                            property_path=path,
                            shared_value=store.resolve(value),
                            witness_triples=(target_side[value], triple),
                        ),
                    )
                )
    rows.sort(key=lambda r: (_term_key(store, r[0]), r[1].shared_value.n3()))
    return rows


def shared_value_test(
    store: TripleStore,
    target: TermId,
    candidates: Iterable[TermId],
    properties: Iterable[str],
    filter_name: str = "shared_value",
    value_type: str | None = None,
) -> dict[TermId, list[Evidence]]:
    """Candidates sharing a value with the target on any given predicate.

    For each property p and each value v asserted by the target, every
    candidate asserting (candidate, p, v) gains one Evidence whose witnesses
    are the two asserting triples. The result maps candidates (in ascending
    N3 term order) to evidence lists ordered by (property, value) term order,
    with duplicates collapsed.
    """
    cands = _dedup_candidates(target, candidates)
    preds = list(dict.fromkeys(expand_iri(p) for p in properties))
    if not preds:
        raise FilterError("shared_value_test requires at least one property")
    if value_type is not None:
        value_type = expand_iri(value_type)
    rows: list[tuple[str, str, str, TermId, Evidence]] = []
    for iri in preds:
        path = (PathStep(iri),)
        for c, ev in _shared_value_rows(store, target, cands, path, value_type, filter_name):
            rows.append(
                (_term_key(store, c), Term.iri(iri).n3(), ev.shared_value.n3(), c, ev)
            )
    rows.sort(key=lambda r: r[:3])
    out: dict[TermId, list[Evidence]] = {}
    seen: set[tuple[str, str, str]] = set()
    for ckey, pkey, vkey, c, ev in rows:
        if (ckey, pkey, vkey) in seen:
            continue
        seen.add((ckey, pkey, vkey))
        out.setdefault(c, []).append(ev)
    return out


def path_value_test(
    store: TripleStore,
    target: TermId,
    candidates: Iterable[TermId],
    path: PropertyPath | str,
    value_type: str | None = None,
    filter_name: str = "shared_path_value",
) -> dict[TermId, Evidence]:
    """Candidates reaching a terminal value the target also reaches via path.

    Each matching candidate maps to one Evidence for the smallest common
    value in N3 term order; witnesses are the two full chains.
    """
    if isinstance(path, str):
        path = parse_path(path)
    if value_type is not None:
        value_type = expand_iri(value_type)
    target_reach = _reachable(store, target, path, value_type)
    out: dict[TermId, Evidence] = {}
    if not target_reach:
        return out
    for c in _dedup_candidates(target, candidates):
        cand_reach = _reachable(store, c, path, value_type)
        common = set(target_reach) & set(cand_reach)
        if not common:
            continue
        value = min(common, key=lambda v: _term_key(store, v))
        out[c] = Evidence(
            filter_name=filter_name,
            property_path=path,
            shared_value=store.resolve(value),
            witness_triples=target_reach[value] + cand_reach[value],
        )
    return out


def _year_of(
    store: TripleStore, node: TermId, paths: Sequence[PropertyPath]
) -> tuple[int, str, tuple[Triple, ...]] | None:
    """First parseable (year, lexical form, witness chain) over the paths."""
    for path in paths:
        reach = _reachable(store, node, path)
        for value in sorted(reach, key=lambda v: _term_key(store, v)):
            term = store.resolve(value)
            if not term.is_literal():
                continue
            m = _YEAR_RE.match(term.lexical)
            if m:
                return int(m.group(1)), term.lexical, reach[value]
    return None


def temporal_proximity_test(
    store: TripleStore,
    target: TermId,
    candidates: Iterable[TermId],
    spec: FilterSpec,
    skipped: list[TermId] | None = None,
) -> dict[TermId, Evidence]:
    """Candidates whose date is within spec.threshold_years of the target's.

    Candidates (or the target) without a parseable date are skipped, not
    errors; their ids are appended to `skipped` when a list is supplied.
    """
    if spec.kind != TEMPORAL_PROXIMITY:
        raise FilterError(f"spec {spec.name} is not a TemporalProximity filter")
    cands = _dedup_candidates(target, candidates)
    target_date = _year_of(store, target, spec.properties)
    out: dict[TermId, Evidence] = {}
    if target_date is None:
        if skipped is not None:
            skipped.extend(cands)
        return out
    t_year, t_lex, t_chain = target_date
    for c in cands:
        cand_date = _year_of(store, c, spec.properties)
        if cand_date is None:
            if skipped is not None:
                skipped.append(c)
            continue
        c_year, c_lex, c_chain = cand_date
        delta = abs(t_year - c_year)
        if delta <= spec.threshold_years:
            out[c] = Evidence(
                filter_name=spec.name,
                property_path=spec.properties[0],
                shared_value=(t_lex, c_lex, delta),
                witness_triples=t_chain + c_chain,
            )
    return out


def type_gate(
    store: TripleStore,
    candidates: CandidateSet,
    allowed_classes: Iterable[str] | None = None,
) -> list[tuple[TermId, float]]:
    """Keep candidates with an asserted rdf:type among the allowed classes."""
    classes = tuple(allowed_classes) if allowed_classes is not None else DEFAULT_ALLOWED_CLASSES
    class_ids = [cid for cid in (store.lookup_iri(expand_iri(c)) for c in classes) if cid is not None]
    members = store.instances_of(class_ids)
    return [(c, sim) for c, sim in candidates if c in members]


def _spec_evidence(
    store: TripleStore,
    target: TermId,
    candidates: Sequence[TermId],
    spec: FilterSpec,
    skipped: list[TermId] | None = None,
) -> list[tuple[TermId, Evidence]]:
    """All (candidate, Evidence) pairs one spec yields, in deterministic order."""
    rows: list[tuple[TermId, Evidence]] = []
    if spec.kind == SHARED_VALUE:
        for path in spec.properties:
            rows.extend(
                _shared_value_rows(store, target, candidates, path, spec.value_type, spec.name)
            )
    elif spec.kind == SHARED_PATH_VALUE:
        for path in spec.properties:
            found = path_value_test(store, target, candidates, path, spec.value_type, spec.name)
            rows.extend(sorted(found.items(), key=lambda kv: _term_key(store, kv[0])))
    else:
        found = temporal_proximity_test(store, target, candidates, spec, skipped)
        rows.extend(sorted(found.items(), key=lambda kv: _term_key(store, kv[0])))
    return rows


def filter_candidates(
    store: TripleStore,
    target: TermId,
    candidates: CandidateSet,
    specs: Sequence[FilterSpec] | None = None,
    allowed_classes: Iterable[str] | None = None,
    skipped_dates: list[TermId] | None = None,
) -> list[Recommendation]:
    """Gate, test, and rank candidates; only evidence-backed ones survive.

    Survivors are ordered by similarity descending, then evidence count
    descending, then ascending candidate id, and receive 1-based ranks.
    """
    try:
        store.resolve(target)
    except Exception as exc:
        raise FilterError(f"target {target} is not in the store") from exc
    if specs is None:
        specs = builtin_filters()
    deduped: list[tuple[TermId, float]] = []
    seen: set[TermId] = set()
    for c, sim in candidates:
        if c != target and c not in seen:
            seen.add(c)
            deduped.append((c, float(sim)))
    gated = type_gate(store, deduped, allowed_classes)
    order = [c for c, _ in gated]
    sims = dict(gated)
    evidence: dict[TermId, list[Evidence]] = {}
    for spec in specs:
        for c, ev in _spec_evidence(store, target, order, spec, skipped_dates):
            evidence.setdefault(c, []).append(ev)
    survivors = [c for c in order if evidence.get(c)]
    survivors.sort(key=lambda c: (-sims[c], -len(evidence[c]), c))
    return [
        Recommendation(candidate=c, similarity=sims[c], evidence=tuple(evidence[c]), rank=i + 1)
        for i, c in enumerate(survivors)
    ]


def evidence_is_sound(store: TripleStore, ev: Evidence) -> bool:
    """True iff every witness triple exists in the store."""
    for s, p, o in ev.witness_triples:
        try:
            if next(iter(store.match(s, p, o)), None) is None:
                return False
        except Exception:
            return False
    return True
