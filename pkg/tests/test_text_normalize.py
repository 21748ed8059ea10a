"""Tests for tokenization, stopword removal and stemming"""

import pytest

from errors import ConfigurationError
from tests.conftest import REPO_DIR, make_sentences
from text_normalize import (TextNormalizer, Token, contains_phrase, load_stopwords, normalize_phrase,
                            remove_stopwords, stem, tokenize)


@pytest.mark.parametrize("text, expected", [
    ("The controller shall not process data.", ["the", "controller", "shall", "not", "process", "data"]),
    ("Member States' supervisory authorities", ["member", "states", "supervisory", "authorities"]),
    ("Article 6(1)(a) applies", ["article", "6", "1", "a", "applies"]),
    ("cross-border processing", ["cross-border", "processing"]),
    ("", []),
    ("... ; !", []),
])
def test_tokenize_examples(text, expected):
    assert [token.text for token in tokenize(text)] == expected


def test_tokenize_positions_are_sequential():
    tokens = tokenize("Controllers shall, where possible, inform")
    assert [token.position for token in tokens] == list(range(len(tokens)))


def test_remove_stopwords_keeps_order():
    tokens = tokenize("the data subject shall have the right")
    kept = remove_stopwords(tokens, {"the", "have"})
    assert [token.text for token in kept] == ["data", "subject", "shall", "right"]
    assert [token.position for token in kept] == [1, 2, 3, 6]


def test_remove_stopwords_all_stopwords():
    assert remove_stopwords([Token("the", 0), Token("of", 1)], {"the", "of"}) == []


@pytest.mark.parametrize("word, expected", [
    ("caresses", "caress"),
    ("ponies", "poni"),
    ("cats", "cat"),
    ("feed", "feed"),
    ("plastered", "plaster"),
    ("motoring", "motor"),
    ("sing", "sing"),
    ("hopping", "hop"),
    ("processing", "process"),
    ("processed", "process"),
    ("2016", "2016"),
    ("679", "679"),
])
def test_stem_examples(word, expected):
    assert stem(word) == expected


def test_normalize_phrase():
    assert normalize_phrase("member state") == ("member", "state")
    assert normalize_phrase("data subject") == ("data", "subject")
    assert normalize_phrase("right to object") == ("right", "to", "object")
    assert normalize_phrase("controller") == (stem("controller"),)


def test_normalize_phrase_empty_is_rejected():
    with pytest.raises(ConfigurationError):
        normalize_phrase("...")


def test_plural_invariance():
    """Singular and plural keyword forms normalize to the same stems"""
    for singular, plural in [("member state", "member states"), ("controller", "controllers"),
                             ("natural person", "natural persons"), ("data subject", "data subjects")]:
        assert normalize_phrase(singular) == normalize_phrase(plural)


def test_contains_phrase():
    stems = [stem(token.text) for token in tokenize("Member States shall provide for a derogation")]
    assert contains_phrase(stems, normalize_phrase("member state"))
    assert not contains_phrase(stems, normalize_phrase("state member"))
    assert not contains_phrase(stems, ())
    assert not contains_phrase([], normalize_phrase("member"))


def test_every_profile_phrase_matches_itself(gdpr_profile):
    for group in gdpr_profile["grouping"]["keyword_groups"]:
        for phrase in group["phrases"]:
            stems = [stem(token.text) for token in tokenize(phrase)]
            assert contains_phrase(stems, normalize_phrase(phrase))


def test_load_stopwords_skips_comments(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# header\nThe\nof  # inline\n\n", encoding="utf-8")
    assert load_stopwords(path) == {"the", "of"}


def test_load_stopwords_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_stopwords(tmp_path / "missing.txt")


def test_bundled_stopwords_exclude_modals(default_stopwords):
    assert {"the", "of", "whether", "further"} <= default_stopwords
    assert not {"shall", "should", "must", "may", "will"} & default_stopwords
    assert all(" " not in word for word in default_stopwords)


def test_normalizer_content_stems(default_stopwords):
    sentence = make_sentences(["The data subject shall have the right to object."])[0]
    tokenized = TextNormalizer(default_stopwords).normalize(sentence)

    assert tokenized.sentence_id == sentence.sentence_id
    assert len(tokenized.raw_stems) == len(tokenized.raw_tokens) == 9
    assert tokenized.content_stems == ("data", "subject", "shall", "right", "object")
    assert tokenized.content_positions == (1, 2, 3, 6, 8)
    for stem_value, position in zip(tokenized.content_stems, tokenized.content_positions):
        assert tokenized.raw_stems[position] == stem_value
    assert tokenized.stem_multiset["data"] == 1


def test_normalizer_is_deterministic(default_stopwords):
    sentences = make_sentences(["The controller shall keep records.", "Processors must assist."])
    normalizer = TextNormalizer(default_stopwords)
    assert normalizer.normalize_all(sentences) == normalizer.normalize_all(sentences)


def test_bundled_stopword_path_exists():
    assert (REPO_DIR / "config" / "stopwords.txt").is_file()
