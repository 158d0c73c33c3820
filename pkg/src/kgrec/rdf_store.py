"""N-Triples parsing and an in-memory, index-backed RDF triple store.

Terms (IRIs, literals, blank nodes) are interned into a dictionary that maps
each distinct term to a dense integer id; triples are stored as id tuples and
served from three sorted permutation indexes (SPO, POS, OSP) so that every
bound prefix of a match pattern is answered by a binary-searched range scan.
No RDFS/OWL inference is performed: the store answers exactly what was
asserted.
"""

from __future__ import annotations

import io
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple, Sequence

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"

TermId = int


class StoreError(ValueError):
    """Raised for invalid store operations or malformed inputs."""


class NTriplesError(StoreError):
    """Syntax error in N-Triples input, tagged with the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.reason = message


class TermKind(Enum):
    IRI = "IRI"
    LITERAL = "Literal"
    BLANK = "BlankNode"


_BLANK_OK = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-.")


@dataclass(frozen=True)
class Term:
    """An RDF term. Literals carry at most one of datatype IRI or language tag."""

    kind: TermKind
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.kind is TermKind.IRI:
            if not self.lexical:
                raise StoreError("IRI must be non-empty")
            if any(c.isspace() for c in self.lexical):
                raise StoreError(f"IRI contains whitespace: {self.lexical!r}")
            if self.datatype is not None or self.language is not None:
                raise StoreError("IRI cannot carry datatype or language")
        elif self.kind is TermKind.BLANK:
            if not self.lexical or not all(c in _BLANK_OK for c in self.lexical):
                raise StoreError(f"invalid blank node label: {self.lexical!r}")
            if self.datatype is not None or self.language is not None:
                raise StoreError("blank node cannot carry datatype or language")
        else:
            if self.datatype is not None and self.language is not None:
                raise StoreError("literal cannot have both datatype and language")
            if self.datatype is not None and not self.datatype:
                raise StoreError("literal datatype IRI must be non-empty")
            if self.language is not None and not self.language:
                raise StoreError("literal language tag must be non-empty")

    @staticmethod
    def iri(value: str) -> "Term":
        return Term(TermKind.IRI, value)

    @staticmethod
    def literal(lexical: str, datatype: str | None = None, language: str | None = None) -> "Term":
        return Term(TermKind.LITERAL, lexical, datatype, language)

    @staticmethod
    def blank(label: str) -> "Term":
        return Term(TermKind.BLANK, label)

    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    def n3(self) -> str:
        """Serialize to N-Triples syntax."""
        if self.kind is TermKind.IRI:
            return f"<{_escape_iri(self.lexical)}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        out = f'"{_escape_literal(self.lexical)}"'
        if self.language is not None:
            return f"{out}@{self.language}"
        if self.datatype is not None:
            return f"{out}^^<{_escape_iri(self.datatype)}>"
        return out


class Triple(NamedTuple):
    s: TermId
    p: TermId
    o: TermId


@dataclass
class ParseStats:
    """Counters filled while parsing; `errors` holds (line_no, message) pairs."""

    lines: int = 0
    statements: int = 0
    skipped: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    def record(self, line_no: int, message: str):
        self.skipped += 1
        if len(self.errors) < 1000:
            self.errors.append((line_no, message))


_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}

# Characters that must be \u-escaped when writing an IRI.
_IRI_BAD = set('<>"{}|^`\\') | {chr(c) for c in range(0x21)}


def _escape_iri(value: str) -> str:
    if not any(c in _IRI_BAD for c in value):
        return value
    out = []
    for c in value:
        if c in _IRI_BAD:
            cp = ord(c)
            out.append(f"\\u{cp:04X}" if cp <= 0xFFFF else f"\\U{cp:08X}")
        else:
            out.append(c)
    return "".join(out)


def _escape_literal(value: str) -> str:
    out = []
    for c in value:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20:
            out.append(f"\\u{ord(c):04X}")
        else:
            out.append(c)
    return "".join(out)


class _Scanner:
    """Single-line cursor over one N-Triples statement."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> NTriplesError:
        return NTriplesError(self.line_no, message)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r} at column {self.pos + 1}")
        self.pos += 1

    def _unescape_codepoint(self, width: int) -> str:
        hexpart = self.text[self.pos : self.pos + width]
        if len(hexpart) != width or any(c not in "0123456789abcdefABCDEF" for c in hexpart):
            raise self.error(f"bad \\{'u' if width == 4 else 'U'} escape")
        self.pos += width
        cp = int(hexpart, 16)
        if cp > 0x10FFFF:
            raise self.error(f"code point U+{cp:X} out of range")
        return chr(cp)

    def read_iri(self) -> str:
        self.expect("<")
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated IRI")
            c = self.text[self.pos]
            self.pos += 1
            if c == ">":
                break
            if c == "\\":
                esc = self.peek()
                self.pos += 1
                if esc == "u":
                    out.append(self._unescape_codepoint(4))
                elif esc == "U":
                    out.append(self._unescape_codepoint(8))
                else:
                    raise self.error(f"invalid IRI escape \\{esc}")
            elif c in " \t<":
                raise self.error(f"illegal character {c!r} in IRI")
            else:
                out.append(c)
        value = "".join(out)
        if not value:
            raise self.error("empty IRI")
        return value

    def read_string(self) -> str:
        self.expect('"')
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            c = self.text[self.pos]
            self.pos += 1
            if c == '"':
                return "".join(out)
            if c == "\\":
                esc = self.peek()
                self.pos += 1
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                elif esc == "u":
                    out.append(self._unescape_codepoint(4))
                elif esc == "U":
                    out.append(self._unescape_codepoint(8))
                else:
                    raise self.error(f"invalid string escape \\{esc}")
            else:
                out.append(c)

    def read_term(self, position: str) -> Term:
        c = self.peek()
        if c == "<":
            return Term.iri(self.read_iri())
        if c == "_":
            if position == "predicate":
                raise self.error("predicate must be an IRI")
            if self.text[self.pos : self.pos + 2] != "_:":
                raise self.error("expected '_:' blank node prefix")
            self.pos += 2
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos] in _BLANK_OK:
                self.pos += 1
            label = self.text[start : self.pos]
            # A trailing dot belongs to the statement terminator, not the label.
            while label.endswith("."):
                label = label[:-1]
                self.pos -= 1
            if not label:
                raise self.error("empty blank node label")
            return Term.blank(label)
        if c == '"':
            if position != "object":
                raise self.error(f"literal not allowed as {position}")
            lexical = self.read_string()
            if self.peek() == "@":
                self.pos += 1
                start = self.pos
                while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "-"):
                    self.pos += 1
                tag = self.text[start : self.pos]
                if not tag or tag.startswith("-") or tag.endswith("-"):
                    raise self.error(f"invalid language tag {tag!r}")
                return Term.literal(lexical, language=tag)
            if self.text[self.pos : self.pos + 2] == "^^":
                self.pos += 2
                return Term.literal(lexical, datatype=self.read_iri())
            return Term.literal(lexical)
        if c == "":
            raise self.error(f"unexpected end of statement, expected {position}")
        raise self.error(f"unexpected character {c!r}, expected {position}")


def parse_ntriples(
    source: str | bytes | Path | IO,
    strict: bool = True,
    stats: ParseStats | None = None,
) -> Iterator[tuple[Term, Term, Term]]:
    """Yield (subject, predicate, object) Term triples from N-Triples input.

    `source` may be a path, an open text/binary stream, or raw N-Triples
    content (str/bytes containing a newline or starting with a term opener).
    In strict mode the first syntax error raises NTriplesError; in lenient
    mode bad lines are counted in `stats` and skipped.
    """
    if stats is None:
        stats = ParseStats()
    for line_no, line in enumerate(_iter_lines(source), start=1):
        stats.lines += 1
        try:
            triple = _parse_statement(line, line_no)
        except NTriplesError as exc:
            if strict:
                raise
            stats.record(exc.line_no, exc.reason)
            continue
        if triple is None:
            continue
        stats.statements += 1
        yield triple


def _iter_lines(source: str | bytes | Path | IO) -> Iterator[str]:
    if isinstance(source, Path):
        with source.open("r", encoding="utf-8") as fh:
            yield from fh
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8")).readlines()
        return
    if isinstance(source, str):
        # A filesystem path unless it looks like inline N-Triples content.
        looks_inline = "\n" in source or source.lstrip()[:1] in ("<", "_", '"', "#", "")
        if not looks_inline:
            with open(source, "r", encoding="utf-8") as fh:
                yield from fh
            return
        yield from io.StringIO(source).readlines()
        return
    first = source.read(0)
    if isinstance(first, bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")
    yield from source


def _parse_statement(line: str, line_no: int) -> tuple[Term, Term, Term] | None:
    sc = _Scanner(line.rstrip("\n").rstrip("\r"), line_no)
    sc.skip_ws()
    if sc.at_end() or sc.peek() == "#":
        return None
    s = sc.read_term("subject")
    sc.skip_ws()
    p = sc.read_term("predicate")
    sc.skip_ws()
    o = sc.read_term("object")
    sc.skip_ws()
    sc.expect(".")
    sc.skip_ws()
    if not sc.at_end() and sc.peek() != "#":
        raise sc.error("trailing content after '.'")
    return (s, p, o)


def parse_term(text: str) -> Term:
    """Parse a single N-Triples term (used when reading terms back from reports)."""
    sc = _Scanner(text.strip(), 1)
    term = sc.read_term("object")
    sc.skip_ws()
    if not sc.at_end():
        raise sc.error("trailing content after term")
    return term


# Index orderings and the converter back to (s, p, o).
_SPO = 0
_POS = 1
_OSP = 2


class TripleStore:
    """Dictionary-encoded triple store with SPO/POS/OSP sorted indexes.

    Adding triples marks the indexes dirty; they are rebuilt lazily on the
    first match after a mutation. Duplicate asserts are dropped and counted.
    """

    def __init__(self):
        self._terms: list[Term] = []
        self._ids: dict[Term, TermId] = {}
        self._triples: set[Triple] = set()
        self._indexes: list[list[tuple[int, int, int]]] = [[], [], []]
        self._dirty = False
        self.n_duplicates = 0
        self.parse_stats: ParseStats | None = None

    # -- dictionary ------------------------------------------------------

    def intern(self, term: Term) -> TermId:
        tid = self._ids.get(term)
        if tid is None:
            tid = len(self._terms)
            self._terms.append(term)
            self._ids[term] = tid
        return tid

    def lookup(self, term: Term) -> TermId | None:
        return self._ids.get(term)

    def lookup_iri(self, iri: str) -> TermId | None:
        return self._ids.get(Term.iri(iri))

    def resolve(self, tid: TermId) -> Term:
        if not 0 <= tid < len(self._terms):
            raise StoreError(f"unknown term id {tid}")
        return self._terms[tid]

    def is_literal(self, tid: TermId) -> bool:
        return self.resolve(tid).is_literal()

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    @property
    def n_triples(self) -> int:
        return len(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: tuple[TermId, TermId, TermId]) -> bool:
        return Triple(*triple) in self._triples

    # -- mutation --------------------------------------------------------

    def add(self, s: Term, p: Term, o: Term) -> bool:
        """Intern terms and add the triple. Returns False for duplicates."""
        if s.is_literal():
            raise StoreError("subject cannot be a literal")
        if p.kind is not TermKind.IRI:
            raise StoreError("predicate must be an IRI")
        return self.add_ids(self.intern(s), self.intern(p), self.intern(o))

    def add_ids(self, s: TermId, p: TermId, o: TermId) -> bool:
        triple = Triple(s, p, o)
        if triple in self._triples:
            self.n_duplicates += 1
            return False
        self._triples.add(triple)
        self._dirty = True
        return True

    # -- construction ----------------------------------------------------

    @classmethod
    def from_ntriples(cls, source, strict: bool = True) -> "TripleStore":
        store = cls()
        stats = ParseStats()
        for s, p, o in parse_ntriples(source, strict=strict, stats=stats):
            store.add(s, p, o)
        store.parse_stats = stats
        return store

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[Term, Term, Term]]) -> "TripleStore":
        store = cls()
        for s, p, o in triples:
            store.add(s, p, o)
        return store

    # -- indexes and matching --------------------------------------------

    def _ensure_indexes(self):
        if not self._dirty and self._indexes[_SPO]:
            return
        if not self._dirty and not self._triples:
            return
        spo = sorted(self._triples)
        self._indexes[_SPO] = spo
        self._indexes[_POS] = sorted((p, o, s) for s, p, o in spo)
        self._indexes[_OSP] = sorted((o, s, p) for s, p, o in spo)
        self._dirty = False

    def _scan(self, which: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, int, int]]:
        index = self._indexes[which]
        lo = bisect_left(index, prefix)
        width = len(prefix)
        for i in range(lo, len(index)):
            row = index[i]
            if row[:width] != prefix:
                break
            yield row

    def match(
        self,
        s: TermId | None = None,
        p: TermId | None = None,
        o: TermId | None = None,
    ) -> Iterator[Triple]:
        """Yield triples matching the bound components, in index order.

        Every bound combination is a prefix of one of the three indexes, so
        no post-filtering is needed:
        s-bound patterns use SPO, (p)/(p,o) use POS, (o)/(o,s) use OSP.
        """
        self._ensure_indexes()
        if s is not None:
            if p is not None:
                prefix = (s, p, o) if o is not None else (s, p)
                for row in self._scan(_SPO, prefix):
                    yield Triple(*row)
            elif o is not None:
                for o_, s_, p_ in self._scan(_OSP, (o, s)):
                    yield Triple(s_, p_, o_)
            else:
                for row in self._scan(_SPO, (s,)):
                    yield Triple(*row)
        elif p is not None:
            prefix = (p, o) if o is not None else (p,)
            for p_, o_, s_ in self._scan(_POS, prefix):
                yield Triple(s_, p_, o_)
        elif o is not None:
            for o_, s_, p_ in self._scan(_OSP, (o,)):
                yield Triple(s_, p_, o_)
        else:
            for row in self._indexes[_SPO]:
                yield Triple(*row)

    def triples(self) -> Iterator[Triple]:
        return self.match()

    def terms(self) -> Iterator[tuple[TermId, Term]]:
        return iter(enumerate(self._terms))

    def index_sizes(self) -> tuple[int, int, int]:
        self._ensure_indexes()
        return tuple(len(ix) for ix in self._indexes)

    # -- derived views ---------------------------------------------------

    def instances_of(self, class_ids: Iterable[TermId]) -> set[TermId]:
        """Subjects with an asserted rdf:type among `class_ids`. No inference."""
        rdf_type = self.lookup_iri(RDF_TYPE)
        if rdf_type is None:
            return set()
        out: set[TermId] = set()
        for cid in class_ids:
            out.update(t.s for t in self.match(p=rdf_type, o=cid))
        return out

    def entity_ids(self) -> list[TermId]:
        """Sorted ids of graph entities: all subjects plus non-literal objects."""
        ents: set[TermId] = set()
        for s, _, o in self._triples:
            ents.add(s)
            if not self.is_literal(o):
                ents.add(o)
        return sorted(ents)

    def relation_ids(self) -> list[TermId]:
        return sorted({p for _, p, _ in self._triples})

    # -- serialization ---------------------------------------------------

    def to_ntriples(self, out: str | Path | IO):
        """Write all triples in SPO index order, one statement per line."""
        close = False
        if isinstance(out, (str, Path)):
            out = open(out, "w", encoding="utf-8")
            close = True
        try:
            for s, p, o in self.match():
                out.write(f"{self.resolve(s).n3()} {self.resolve(p).n3()} {self.resolve(o).n3()} .\n")
        finally:
            if close:
                out.close()

    def dump_dictionary(self, out: str | Path | IO):
        """Write the term dictionary as `id<TAB>kind<TAB>lexical` lines."""
        close = False
        if isinstance(out, (str, Path)):
            out = open(out, "w", encoding="utf-8")
            close = True
        try:
            for tid, term in self.terms():
                lex = term.lexical.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
                out.write(f"{tid}\t{term.kind.value}\t{lex}\n")
        finally:
            if close:
                out.close()


def split_triples(
    store: TripleStore,
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[list[Triple], list[Triple], list[Triple]]:
    """Shuffle-split triples into train/valid/test with train-side coverage.

    Sizes are floor(n * ratio) for valid and test with the remainder in train.
    After the split, any valid/test triple whose subject, predicate, or
    non-literal object never occurs in train is moved to train, so models fit
    on the train split can score every held-out triple.
    """
    if len(ratios) != 3:
        raise StoreError("ratios must have three components")
    if any(r < 0 for r in ratios) or ratios[0] <= 0:
        raise StoreError("ratios must be positive with a non-zero train share")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise StoreError(f"ratios must sum to 1, got {sum(ratios)!r}")
    n = store.n_triples
    n_valid = int(n * ratios[1])
    n_test = int(n * ratios[2])
    if (ratios[1] > 0 and n_valid == 0) or (ratios[2] > 0 and n_test == 0):
        raise StoreError(f"store too small to split {n} triples with ratios {tuple(ratios)}")
    n_train = n - n_valid - n_test
    if n_train <= 0:
        raise StoreError("train split is empty")

    order = sorted(store.triples())
    random.Random(seed).shuffle(order)
    train = order[:n_train]
    valid = order[n_train : n_train + n_valid]
    test = order[n_train + n_valid :]

    covered: set[int] = set()
    for s, p, o in train:
        covered.add(s)
        covered.add(p)
        if not store.is_literal(o):
            covered.add(o)

    def sweep(split: list[Triple]) -> list[Triple]:
        kept = []
        for t in split:
            needs = [t.s, t.p] + ([] if store.is_literal(t.o) else [t.o])
            if all(x in covered for x in needs):
                kept.append(t)
            else:
                train.append(t)
                covered.update(needs)
        return kept

    valid = sweep(valid)
    test = sweep(test)
    return train, valid, test
