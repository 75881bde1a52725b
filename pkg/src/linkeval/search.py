"""Token index over record labels with single-edit typo tolerance.

Stands in for an external search engine during labeling: labelers look up
candidate matches by name fragments. Matching is per case-folded token,
with a fallback that accepts vocabulary tokens within one character edit of
a query token.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from .model import AttributeTable, RecordId


def tokenize(text: str) -> list[str]:
    return [t for t in text.casefold().split() if t]


def within_one_edit(a: str, b: str) -> bool:
    """True when a and b are one typo apart.

    A typo is a substitution, insertion, deletion, or adjacent
    transposition (so "jonhge" reaches "jonghe").
    """
    if a == b:
        return True
    la, lb = len(a), len(b)
    if abs(la - lb) > 1:
        return False
    if la == lb:
        diffs = [i for i in range(la) if a[i] != b[i]]
        if len(diffs) == 1:
            return True
        if len(diffs) == 2:
            i, j = diffs
            return j == i + 1 and a[i] == b[j] and a[j] == b[i]
        return False
    if la > lb:
        a, b, la, lb = b, a, lb, la
    # b is one character longer: skip its extra character
    i = 0
    while i < la and a[i] == b[i]:
        i += 1
    return a[i:] == b[i + 1 :]


class TokenIndex:
    """Inverted index from label tokens to record ids."""

    def __init__(self) -> None:
        self._postings: dict[str, set[RecordId]] = defaultdict(set)

    @classmethod
    def build(cls, attrs: AttributeTable, records: Iterable[RecordId] | None = None) -> "TokenIndex":
        index = cls()
        ids = attrs.labels.keys() if records is None else records
        for rid in ids:
            for token in tokenize(attrs.label_of(rid)):
                index._postings[token].add(rid)
        return index

    def add(self, record_id: RecordId, label: str) -> None:
        for token in tokenize(label):
            self._postings[token].add(record_id)

    def vocabulary(self) -> list[str]:
        return sorted(self._postings)

    def lookup(self, token: str, fuzzy: bool = True) -> set[RecordId]:
        """Records whose label contains the token (or a 1-edit variant)."""
        token = token.casefold()
        hits = set(self._postings.get(token, ()))
        if fuzzy and not hits:
            for vocab_token, ids in self._postings.items():
                if within_one_edit(token, vocab_token):
                    hits.update(ids)
        return hits

    def search(self, query: str, limit: int = 20, fuzzy: bool = True) -> list[tuple[RecordId, int]]:
        """Rank records by how many query tokens they match.

        Exact token hits are preferred; a token with no exact hits falls
        back to its one-edit neighborhood. Ties break on record id.
        Returns (record_id, matched_token_count) pairs.
        """
        tokens = tokenize(query)
        if not tokens:
            raise ValueError("empty search query")
        scores: dict[RecordId, int] = defaultdict(int)
        for token in tokens:
            for rid in self.lookup(token, fuzzy=fuzzy):
                scores[rid] += 1
        ranked = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:limit]


def search_records(
    attrs: AttributeTable,
    query: str,
    limit: int = 20,
    index: TokenIndex | None = None,
) -> list[RecordId]:
    """Convenience wrapper returning ranked record ids for a query."""
    if index is None:
        index = TokenIndex.build(attrs)
    return [rid for rid, _ in index.search(query, limit=limit)]
