
from hypothesis import given
from hypothesis import strategies as st

from slidescribe.textnorm import NormalizationPolicy, join, normalize

NO_NORM = NormalizationPolicy(lowercase=False, strip_edge_punctuation=False)


def test_basic_lowercase_and_split():
    assert normalize("Hello World") == ["hello", "world"]


def test_edge_punctuation_stripped():
    assert normalize("Hello, world!") == ["hello", "world"]
    assert normalize('"quoted"') == ["quoted"]


def test_inner_punctuation_kept():
    # hyphenated and dotted terms are single tokens
    assert normalize("pre-trained e.g. KinyaBERT.") == ["pre-trained", "e.g", "kinyabert"]


def test_pure_punctuation_token_dropped():
    assert normalize("a -- b") == ["a", "b"]


def test_empty_and_whitespace():
    assert normalize("") == []
    assert normalize("   \t\n ") == []


def test_policy_switches():
    assert normalize("Hello, World!", NO_NORM) == ["Hello,", "World!"]
    keep_case = NormalizationPolicy(lowercase=False)
    assert normalize("KinyaBERT rocks", keep_case) == ["KinyaBERT", "rocks"]


def test_unicode_nfc_applied():
    # e + combining acute composes to the single code point
    decomposed = "café"
    assert normalize(decomposed) == ["café"]


def test_join_inverts_on_clean_tokens():
    tokens = normalize("the quick brown fox")
    assert join(tokens) == "the quick brown fox"


@given(st.text())
def test_normalize_never_emits_empty_tokens(text):
    assert all(token for token in normalize(text))


@given(st.text())
def test_normalize_idempotent(text):
    once = normalize(text)
    assert normalize(join(once)) == once


@given(st.text())
def test_tokens_contain_no_whitespace(text):
    for token in normalize(text):
        assert not any(ch.isspace() for ch in token)


@given(st.text())
def test_lowercasing_applied(text):
    for token in normalize(text):
        assert token == token.casefold()
