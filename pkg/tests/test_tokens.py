from __future__ import annotations

import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorkit.generator import GenSpec, corpus_documents
from floorkit.schema_io import emit
from floorkit.tokens import (
    CompressionDict,
    compress,
    decompress,
    default_dict,
    plain_token_count,
    plain_tokens,
    token_count,
)

from conftest import square_plan


def test_plain_tokenizer_basics():
    assert plain_tokens("{}") == ["{", "}"]
    assert plain_tokens("") == []
    assert plain_tokens("-12.5,ab_c") == ["-12.5", ",", "ab_c"]
    assert plain_tokens("wall_3") == ["wall_", "3"]
    # a dash not introducing a number stays punctuation
    assert plain_tokens("a-b") == ["a", "-", "b"]


@given(st.text(max_size=300))
@settings(max_examples=300, deadline=None)
def test_plain_tokenizer_lossless(text):
    assert "".join(plain_tokens(text)) == text


@given(st.text(max_size=300))
@settings(max_examples=300, deadline=None)
def test_compress_lossless_any_text(text):
    cd = default_dict()
    seq = compress(text, cd)
    assert decompress(seq) == text
    assert token_count(seq) <= plain_token_count(text)


def test_empty_dictionary_is_plain_tokenization():
    cd = CompressionDict.empty()
    text = emit(square_plan())
    seq = compress(text, cd)
    assert token_count(seq) == plain_token_count(text)
    assert decompress(seq) == text


def test_token_count_trivia():
    cd = CompressionDict.empty()
    assert token_count(compress("", cd)) == 0
    assert token_count(compress("{}", cd)) == 2


def test_token_count_hand_counted_fixture():
    # {"label":"a","walls":["wall_1"]}
    # plain atoms: { " label " : " a " , " walls " : [ " wall_ 1 " ] }  -> 20
    text = '{"label":"a","walls":["wall_1"]}'
    assert plain_token_count(text) == 20
    # with the dictionary: { <lb> : " a " , <wl> : [ " wall_ 1 " ] }  -> 16
    seq = compress(text, default_dict())
    assert token_count(seq) == 16
    assert [t.text for t in seq.tokens][:3] == ["{", "<lb>", ":"]


def test_dictionary_invariants():
    cd = default_dict()
    assert len(cd) <= 1391
    surfaces = sorted(cd.entries)
    for a, b in zip(surfaces, surfaces[1:]):
        assert not b.startswith(a)


def test_dictionary_rejects_prefix_ambiguity():
    with pytest.raises(ValueError):
        CompressionDict({"]}": "<a>", "]},{": "<b>"})
    with pytest.raises(ValueError):
        CompressionDict({"x": "<a>", "y": "<a>"})


def test_longest_match_wins():
    cd = CompressionDict({"],": "<a>", "]},{": "<b>"})
    seq = compress("]},{],", cd)
    assert [t.text for t in seq.tokens] == ["<b>", "<a>"]


def test_corpus_reduction_band():
    docs = [t for t, _ in corpus_documents(GenSpec(seed=11), 100)]
    cd = default_dict()
    reductions = []
    for text in docs:
        plain = plain_token_count(text)
        reductions.append(100.0 * (plain - token_count(compress(text, cd))) / plain)
    assert 15.0 <= statistics.mean(reductions) <= 35.0
