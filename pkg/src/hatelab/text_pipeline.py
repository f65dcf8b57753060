"""Social-media text normalization pipeline.

Raw posts arrive full of contractions, emoticons, hashtags, @-mentions and
misspellings. The pipeline maps all of that onto a flat sequence of lowercase
ASCII tokens: emoticons first (they are made of punctuation and would not
survive stripping), then contractions, hashtag segmentation, punctuation
removal, and finally misspelling expansion.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

_WORD_RE = re.compile(r"^[a-z0-9]+$")
_STRIP_RE = re.compile(r"[^a-z0-9#@\s]")

# Longest segmentation word considered by the DP; longer spans are forced
# to split, which is fine since unknown-word probability decays with length.
_MAX_SEG_WORD = 20


@dataclass(frozen=True)
class SegLexicon:
    """Unigram frequency table backing hashtag segmentation."""

    counts: dict[str, int]
    total: int

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "SegLexicon":
        if not counts:
            raise ValueError("segmentation lexicon is empty")
        for word, count in counts.items():
            if count < 1:
                raise ValueError(f"non-positive count for {word!r}")
        return cls(counts=dict(counts), total=sum(counts.values()))

    @classmethod
    def from_file(cls, path: str | Path) -> "SegLexicon":
        counts: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                word, count = line.split("\t")
                counts[word] = int(count)
        return cls.from_counts(counts)

    def logprob(self, word: str) -> float:
        """Log-probability of a word; unknown words get a length-penalized
        smoothing mass of 10 / (total * 10**len(word))."""
        count = self.counts.get(word)
        if count is not None:
            return math.log(count) - math.log(self.total)
        return math.log(10.0) - math.log(self.total) - len(word) * math.log(10.0)


@dataclass
class PipelineTables:
    """All fixture tables the pipeline needs, loaded once and reused."""

    contractions: dict[str, str]
    emoticons: dict[str, str]
    misspellings: dict[str, str]
    lexicon: SegLexicon


@dataclass
class PreprocessStats:
    """Counters for user-facing pipeline reporting."""

    contractions_expanded: int = 0
    emoticons_mapped: int = 0
    hashtags_segmented: int = 0

    def merge(self, other: "PreprocessStats") -> None:
        self.contractions_expanded += other.contractions_expanded
        self.emoticons_mapped += other.emoticons_mapped
        self.hashtags_segmented += other.hashtags_segmented


def load_table(path: str | Path) -> dict[str, str]:
    """Read a key<TAB>value fixture file; '#'-prefixed lines are comments."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            key, value = line.split("\t")
            if not value:
                raise ValueError(f"empty replacement for {key!r} in {path}")
            if key in table:
                raise ValueError(f"duplicate key {key!r} in {path}")
            table[key] = value
    return table


def default_fixtures_dir() -> Path:
    """Bundled fixture directory, overridable via HATELAB_FIXTURES."""
    env = os.environ.get("HATELAB_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).parent / "fixtures"


def load_tables(fixtures_dir: str | Path | None = None) -> PipelineTables:
    base = Path(fixtures_dir) if fixtures_dir is not None else default_fixtures_dir()
    return PipelineTables(
        contractions=load_table(base / "contractions.tsv"),
        emoticons=load_table(base / "emoticons.tsv"),
        misspellings=load_table(base / "misspellings.tsv"),
        lexicon=SegLexicon.from_file(base / "seg_unigrams.tsv"),
    )


def _expand_contractions(text: str, table: dict[str, str]) -> tuple[str, int]:
    out = []
    expanded = 0
    for tok in text.split():
        unified = tok.replace("’", "'")
        replacement = table.get(unified.lower())
        if replacement is not None:
            out.append(replacement)
            expanded += 1
        elif "'" in unified:
            out.append(unified.replace("'", ""))
        else:
            out.append(tok)
    return " ".join(out), expanded


def expand_contractions(text: str, table: dict[str, str]) -> str:
    """Replace whole-token contractions via the table; any other token
    containing an apostrophe has the apostrophe dropped."""
    return _expand_contractions(text, table)[0]


def _map_emoticons(text: str, table: dict[str, str]) -> tuple[str, int]:
    if not table:
        return text, 0
    # Longest-first alternation so ":-(" wins over ":-".
    pattern = re.compile(
        "|".join(re.escape(k) for k in sorted(table, key=len, reverse=True))
    )
    count = 0

    def _sub(match: re.Match) -> str:
        nonlocal count
        count += 1
        return f" {table[match.group(0)]} "

    replaced = pattern.sub(_sub, text)
    if count:
        replaced = re.sub(r" {2,}", " ", replaced).strip()
    return replaced, count


def map_emoticons(text: str, table: dict[str, str]) -> str:
    """Replace each emoticon occurrence with its word token."""
    return _map_emoticons(text, table)[0]


def segment_hashtag(tag: str, lex: SegLexicon) -> list[str]:
    """Split a '#'-prefixed tag into the maximum-likelihood word sequence
    under the unigram lexicon; ties break toward fewer words."""
    if not tag.startswith("#"):
        raise ValueError(f"hashtag must start with '#': {tag!r}")
    body = tag[1:].lower()
    n = len(body)
    if n == 0:
        return []
    neg_inf = float("-inf")
    # best[i]: (logprob, -word_count) of the best split of body[:i]
    best: list[tuple[float, int]] = [(neg_inf, 0)] * (n + 1)
    best[0] = (0.0, 0)
    back = [0] * (n + 1)
    for i in range(1, n + 1):
        for j in range(max(0, i - _MAX_SEG_WORD), i):
            if best[j][0] == neg_inf:
                continue
            cand = (best[j][0] + lex.logprob(body[j:i]), best[j][1] - 1)
            if cand > best[i]:
                best[i] = cand
                back[i] = j
    words: list[str] = []
    i = n
    while i > 0:
        words.append(body[back[i]:i])
        i = back[i]
    words.reverse()
    return words


def normalize(text: str) -> str:
    """Lowercase and keep only ASCII letters, digits, whitespace, '#' and '@';
    everything else becomes a space, runs of whitespace collapse."""
    return " ".join(_STRIP_RE.sub(" ", text.lower()).split())


def _preprocess(text: str, tables: PipelineTables) -> tuple[list[str], PreprocessStats]:
    stats = PreprocessStats()
    staged, stats.emoticons_mapped = _map_emoticons(text, tables.emoticons)
    staged, stats.contractions_expanded = _expand_contractions(
        staged, tables.contractions
    )
    parts: list[str] = []
    for tok in staged.split():
        if tok.startswith("#") and len(tok) > 1:
            parts.extend(segment_hashtag(tok, tables.lexicon))
            stats.hashtags_segmented += 1
        else:
            parts.append(tok)
    staged = normalize(" ".join(parts))
    # Mentions keep the bare handle word; stray '#'/'@' marks are dropped.
    staged = staged.replace("#", " ").replace("@", " ")
    tokens: list[str] = []
    for tok in staged.split():
        replacement = tables.misspellings.get(tok)
        if replacement is not None:
            tokens.extend(replacement.split())
        else:
            tokens.append(tok)
    return tokens, stats


def preprocess(text: str, tables: PipelineTables) -> list[str]:
    """Full pipeline: emoticons -> contractions -> hashtag segmentation ->
    normalization/mention stripping -> misspelling expansion -> tokens."""
    return _preprocess(text, tables)[0]


def preprocess_with_stats(
    text: str, tables: PipelineTables
) -> tuple[list[str], PreprocessStats]:
    return _preprocess(text, tables)


def is_clean_token(token: str) -> bool:
    return bool(_WORD_RE.match(token))
