"""Sequence-length accounting and dictionary token compression.

The baseline tokenizer splits text into maximal letter/underscore runs,
signed decimal numbers, and single remaining characters - a deterministic,
language-neutral stand-in for a subword vocabulary on JSON.

Compression substitutes dictionary surfaces with single special tokens via
leftmost-longest matching. Key and value-literal entries carry their
surrounding quotes (e.g. ``"curvature"``), so a match is always an exact
quoted string - in schema documents that is a key position or a whole
enumerated value, never a fragment of free text; the remaining entries are
high-frequency punctuation runs. Substitution never crosses a surface
boundary, so decompression is a plain concatenation and is lossless for
arbitrary input, schema or not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

_PLAIN_RE = re.compile(r"[A-Za-z_]+|-?[0-9]+(?:\.[0-9]+)?|.", re.DOTALL)

MAX_DICT_ENTRIES = 1391


def plain_tokens(text: str) -> list[str]:
    return _PLAIN_RE.findall(text)


def plain_token_count(text: str) -> int:
    return len(plain_tokens(text))


@dataclass(frozen=True)
class Token:
    """One sequence atom. ``surface`` is the exact text span it stands for."""

    text: str
    surface: str
    special: bool


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[Token, ...]
    source_text: str


class CompressionDict:
    """Ordered surface -> symbol table with a compiled leftmost-longest scanner."""

    def __init__(self, entries: dict[str, str]):
        if len(entries) > MAX_DICT_ENTRIES:
            raise ValueError(f"dictionary exceeds {MAX_DICT_ENTRIES} entries")
        surfaces = list(entries)
        symbols = list(entries.values())
        if len(set(symbols)) != len(symbols):
            raise ValueError("dictionary symbols must be unique")
        for s in surfaces:
            if not s:
                raise ValueError("empty surface")
        ordered = sorted(surfaces)
        for a, b in zip(ordered, ordered[1:]):
            if b.startswith(a):
                raise ValueError(f"ambiguous entries: {a!r} is a prefix of {b!r}")
        self.entries = dict(entries)
        if entries:
            alternation = "|".join(
                re.escape(s) for s in sorted(surfaces, key=len, reverse=True)
            )
            self._scanner = re.compile(alternation)
        else:
            self._scanner = None

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_lines(cls, lines) -> "CompressionDict":
        entries: dict[str, str] = {}
        for n, raw in enumerate(lines, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                surface, symbol = line.split("\t")
            except ValueError:
                raise ValueError(f"line {n}: expected <surface>\\t<symbol>") from None
            if surface in entries:
                raise ValueError(f"line {n}: duplicate surface {surface!r}")
            entries[surface] = symbol
        return cls(entries)

    @classmethod
    def from_file(cls, path) -> "CompressionDict":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def empty(cls) -> "CompressionDict":
        return cls({})


def default_dict() -> CompressionDict:
    data = resources.files("floorkit").joinpath("data/compression_dict.tsv")
    return CompressionDict.from_lines(data.read_text(encoding="utf-8").splitlines())


def compress(text: str, cdict: CompressionDict) -> TokenSequence:
    """Substitute dictionary surfaces, plain-tokenizing the gaps."""
    if cdict._scanner is None:
        toks = tuple(Token(t, t, False) for t in plain_tokens(text))
        return TokenSequence(toks, text)
    out: list[Token] = []
    pos = 0
    for m in cdict._scanner.finditer(text):
        if m.start() > pos:
            out.extend(Token(t, t, False) for t in plain_tokens(text[pos : m.start()]))
        surface = m.group(0)
        out.append(Token(cdict.entries[surface], surface, True))
        pos = m.end()
    if pos < len(text):
        out.extend(Token(t, t, False) for t in plain_tokens(text[pos:]))
    return TokenSequence(tuple(out), text)


def decompress(seq: TokenSequence) -> str:
    return "".join(t.surface for t in seq.tokens)


def token_count(seq: TokenSequence) -> int:
    return len(seq.tokens)


def reduction_percent(text: str, cdict: CompressionDict) -> float:
    """Relative sequence-length saving of compression over plain tokenization."""
    plain = plain_token_count(text)
    if plain == 0:
        return 0.0
    return 100.0 * (plain - token_count(compress(text, cdict))) / plain
