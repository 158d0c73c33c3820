"""Parse an N-Triples document, query it by pattern, and split it for evaluation.

The store dictionary-encodes every term (IRI, literal, blank node) to an
integer id and answers (s, p, o) patterns with any combination of wildcards
from three sorted indexes. Everything downstream — embeddings, retrieval,
filtering — speaks these integer ids and converts back to terms only at the
edges.

Run:  python3 demos/01_parse_and_query.py
"""

import io

from kgrec.rdf_store import TripleStore, split_triples

CRM = "http://www.cidoc-crm.org/cidoc-crm/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

# A miniature museum graph: two painters, one shared residence, one work.
DOCUMENT = f"""\
<http://museum.example/person/rembrandt> <{RDF_TYPE}> <{CRM}E21_Person> .
<http://museum.example/person/rembrandt> <{RDFS_LABEL}> "Rembrandt van Rijn" .
<http://museum.example/person/lievens> <{RDF_TYPE}> <{CRM}E21_Person> .
<http://museum.example/person/lievens> <{RDFS_LABEL}> "Jan Lievens" .
<http://museum.example/person/rembrandt> <{CRM}P74_has_current_or_former_residence> <http://museum.example/place/leiden> .
<http://museum.example/person/lievens> <{CRM}P74_has_current_or_former_residence> <http://museum.example/place/leiden> .
<http://museum.example/place/leiden> <{RDFS_LABEL}> "Leiden" .
<http://museum.example/object/nightwatch> <{RDF_TYPE}> <{CRM}E22_Man-Made_Object> .
<http://museum.example/object/nightwatch> <{RDFS_LABEL}> "The Night Watch"@en .
<http://museum.example/object/nightwatch> <{CRM}P62_depicts> <http://museum.example/person/rembrandt> .
<http://museum.example/object/nightwatch> <{CRM}P62_depicts> <http://museum.example/person/rembrandt> .
"""


def main():
    store = TripleStore.from_ntriples(DOCUMENT)
    print(f"parsed {store.n_triples} triples over {store.n_terms} distinct terms "
          f"({store.n_duplicates} duplicate statement dropped)")

    # Pattern matching: fix any subset of (s, p, o), wildcard the rest.
    print("\neverything known about Rembrandt:")
    rembrandt = store.lookup_iri("http://museum.example/person/rembrandt")
    for t in store.match(s=rembrandt):
        print(f"  {store.resolve(t.p).n3()}  ->  {store.resolve(t.o).n3()}")

    print("\nwho lives in Leiden (object fixed, subject wildcarded):")
    residence = store.lookup_iri(CRM + "P74_has_current_or_former_residence")
    leiden = store.lookup_iri("http://museum.example/place/leiden")
    for t in store.match(p=residence, o=leiden):
        print(f"  {store.resolve(t.s).n3()}")

    print("\nall literals in the graph:")
    for t in store.match():
        if store.is_literal(t.o):
            print(f"  {store.resolve(t.s).n3()}  {store.resolve(t.o).n3()}")

    # A deterministic train/valid/test split for link-prediction work.
    # Every entity and relation in valid/test is guaranteed to appear in
    # train, so a model never has to rank terms it has not seen.
    train, valid, test = split_triples(store, ratios=(0.8, 0.1, 0.1), seed=7)
    print(f"\nbenchmark split: {len(train)} train / {len(valid)} valid / {len(test)} test")

    # The store serializes back to canonical N-Triples (SPO index order).
    buffer = io.StringIO()
    store.to_ntriples(buffer)
    print("\nfirst three lines of the canonical serialization:")
    for line in buffer.getvalue().splitlines()[:3]:
        print(f"  {line}")


if __name__ == "__main__":
    main()
