"""Synthetic cultural-heritage graph generator with planted communities.

Builds a person-centric graph shaped like CIDOC-CRM museum data: persons
typed E21_Person with labels, births and deaths carrying time-spans (year
literals) and places, appellations, and community-shared structure. Persons
are partitioned into communities whose members share events (participated
in / was present at), a production, a man-made object, a document referring
to them, a residence, a family appellation, and a birth place, and whose
birth and death years cluster around a community base year. Those shared
nodes make community co-membership both learnable by the embedding stage
and provable by the connection tests, so the community partition doubles as
ground truth for end-to-end evaluation.

A fraction of persons additionally attends one random event of another
community (noise), which keeps the graph connected and the task non-trivial.
Generation is fully deterministic under the spec seed, and the written
N-Triples file (SPO-sorted) plus its ground-truth JSON sidecar are
byte-stable across runs.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

from kgrec.rdf_store import RDF_TYPE, RDFS_LABEL, Term, TripleStore
from kgrec.semantic_filter import CRM

BASE = "http://example.org/heritage/"

E5_EVENT = CRM + "E5_Event"
E21_PERSON = CRM + "E21_Person"
E12_PRODUCTION = CRM + "E12_Production"
E22_OBJECT = CRM + "E22_Man-Made_Object"
E31_DOCUMENT = CRM + "E31_Document"
E41_APPELLATION = CRM + "E41_Appellation"
E53_PLACE = CRM + "E53_Place"
E67_BIRTH = CRM + "E67_Birth"
E69_DEATH = CRM + "E69_Death"

P1_IDENTIFIED_BY = CRM + "P1_is_identified_by"
P4_TIMESPAN = CRM + "P4_has_time-span"
P7_TOOK_PLACE_AT = CRM + "P7_took_place_at"
P11I_PARTICIPATED = CRM + "P11i_participated_in"
P12I_PRESENT = CRM + "P12i_was_present_at"
P14I_PERFORMED = CRM + "P14i_performed"
P67_REFERS_TO = CRM + "P67_refers_to"
P74_RESIDENCE = CRM + "P74_has_current_or_former_residence"
P82A_BEGIN = CRM + "P82a_begin_of_the_begin"
P82B_END = CRM + "P82b_end_of_the_end"
P98I_BORN = CRM + "P98i_was_born"
P100I_DIED = CRM + "P100i_died_in"


class SynthError(ValueError):
    """Invalid generator parameters."""


@dataclass(frozen=True)
class SynthSpec:
    n_persons: int = 1000
    community_size: int = 10
    events_per_community: int = 2
    noise_fraction: float = 0.05
    base_year_low: int = 1400
    base_year_high: int = 1600
    year_jitter: int = 3
    lifespan_years: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.n_persons < 0:
            raise SynthError("n_persons must be >= 0")
        if self.community_size < 1:
            raise SynthError("community_size must be >= 1")
        if self.events_per_community < 1:
            raise SynthError("events_per_community must be >= 1")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise SynthError("noise_fraction must lie in [0, 1]")
        if self.base_year_low > self.base_year_high:
            raise SynthError("base_year_low must not exceed base_year_high")
        if self.year_jitter < 0:
            raise SynthError("year_jitter must be >= 0")
        if self.lifespan_years < 1:
            raise SynthError("lifespan_years must be >= 1")

    @property
    def n_communities(self) -> int:
        return math.ceil(self.n_persons / self.community_size)


@dataclass(frozen=True)
class SynthResult:
    store: TripleStore
    communities: tuple[tuple[str, ...], ...]  # person IRIs per community

    @property
    def person_iris(self) -> list[str]:
        return [p for group in self.communities for p in group]


def _iri(kind: str, idx: int) -> Term:
    return Term.iri(f"{BASE}{kind}/{idx:04d}")


def generate(spec: SynthSpec) -> SynthResult:
    """Build the graph in memory; deterministic under spec.seed."""
    rng = random.Random(spec.seed)
    store = TripleStore()
    rdf_type = Term.iri(RDF_TYPE)
    label = Term.iri(RDFS_LABEL)

    persons = [_iri("person", i) for i in range(spec.n_persons)]
    communities = [
        tuple(p.lexical for p in persons[k * spec.community_size : (k + 1) * spec.community_size])
        for k in range(spec.n_communities)
    ]

    # Community-level shared nodes first, so noise can draw from all events.
    events: list[list[Term]] = []
    productions: list[Term] = []
    objects: list[Term] = []
    documents: list[Term] = []
    birth_places: list[Term] = []
    residences: list[Term] = []
    family_names: list[Term] = []
    base_years: list[int] = []
    for k in range(spec.n_communities):
        group_events = [
            _iri("event", k * spec.events_per_community + j)
            for j in range(spec.events_per_community)
        ]
        for e in group_events:
            store.add(e, rdf_type, Term.iri(E5_EVENT))
        events.append(group_events)
        productions.append(_iri("production", k))
        store.add(productions[k], rdf_type, Term.iri(E12_PRODUCTION))
        objects.append(_iri("object", k))
        store.add(objects[k], rdf_type, Term.iri(E22_OBJECT))
        documents.append(_iri("document", k))
        store.add(documents[k], rdf_type, Term.iri(E31_DOCUMENT))
        birth_places.append(_iri("place", 2 * k))
        residences.append(_iri("place", 2 * k + 1))
        for place in (birth_places[k], residences[k]):
            store.add(place, rdf_type, Term.iri(E53_PLACE))
        family_names.append(_iri("appellation", spec.n_persons + k))
        store.add(family_names[k], rdf_type, Term.iri(E41_APPELLATION))
        base_years.append(rng.randint(spec.base_year_low, spec.base_year_high))

    all_events = [e for group in events for e in group]

    for i, person in enumerate(persons):
        k = i // spec.community_size
        store.add(person, rdf_type, Term.iri(E21_PERSON))
        store.add(person, label, Term.literal(f"Person {i:04d}"))

        own_name = _iri("appellation", i)
        store.add(own_name, rdf_type, Term.iri(E41_APPELLATION))
        store.add(person, Term.iri(P1_IDENTIFIED_BY), own_name)
        store.add(person, Term.iri(P1_IDENTIFIED_BY), family_names[k])
        store.add(person, Term.iri(P74_RESIDENCE), residences[k])

        for e in events[k]:
            store.add(person, Term.iri(P11I_PARTICIPATED), e)
        store.add(person, Term.iri(P12I_PRESENT), objects[k])
        store.add(person, Term.iri(P14I_PERFORMED), productions[k])
        store.add(documents[k], Term.iri(P67_REFERS_TO), person)

        birth_year = base_years[k] + rng.randint(-spec.year_jitter, spec.year_jitter)
        death_year = birth_year + spec.lifespan_years + rng.randint(-spec.year_jitter, spec.year_jitter)
        birth = _iri("birth", i)
        death = _iri("death", i)
        birth_span = _iri("timespan", 2 * i)
        death_span = _iri("timespan", 2 * i + 1)
        store.add(birth, rdf_type, Term.iri(E67_BIRTH))
        store.add(death, rdf_type, Term.iri(E69_DEATH))
        store.add(person, Term.iri(P98I_BORN), birth)
        store.add(birth, Term.iri(P4_TIMESPAN), birth_span)
        store.add(birth_span, Term.iri(P82A_BEGIN), Term.literal(str(birth_year)))
        store.add(birth, Term.iri(P7_TOOK_PLACE_AT), birth_places[k])
        store.add(person, Term.iri(P100I_DIED), death)
        store.add(death, Term.iri(P4_TIMESPAN), death_span)
        store.add(death_span, Term.iri(P82B_END), Term.literal(str(death_year)))
        store.add(death, Term.iri(P7_TOOK_PLACE_AT), rng.choice(birth_places))

        if len(all_events) > spec.events_per_community and rng.random() < spec.noise_fraction:
            foreign = [e for g, group in enumerate(events) if g != k for e in group]
            store.add(person, Term.iri(P11I_PARTICIPATED), rng.choice(foreign))

    return SynthResult(store=store, communities=tuple(communities))


def write_synthetic_graph(
    spec: SynthSpec,
    graph_path: str | Path,
    truth_path: str | Path | None = None,
) -> SynthResult:
    """Generate, write the N-Triples file, and write the ground-truth sidecar.

    The sidecar (default: graph path + ".truth.json") records the spec knobs
    and the planted community partition as lists of person IRIs.
    """
    result = generate(spec)
    graph_path = Path(graph_path)
    result.store.to_ntriples(graph_path)
    sidecar = Path(truth_path) if truth_path is not None else Path(str(graph_path) + ".truth.json")
    payload = {
        "seed": spec.seed,
        "n_persons": spec.n_persons,
        "community_size": spec.community_size,
        "events_per_community": spec.events_per_community,
        "noise_fraction": spec.noise_fraction,
        "communities": [list(group) for group in result.communities],
    }
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return result
