import numpy as np
import pytest
from src.core.metrics import normalized_erasure
from src.core.ptl import (PrefixTranslationList, SentencePair, is_append_only, lcp_len, merge_ptl, merge_subwords,
                          to_tokens, validate_ptl)
from src.utils.exceptions import InvalidTokensException, ValidationException


REVISION_EXAMPLE_SOURCE = 'Neue Arzneimittel könnten Lungen- und Eierstockkrebs verlangsamen .'.split()[:7]
REVISION_EXAMPLE_OUTPUTS = [
    'New',
    'New Medicines',
    'New Medicines',
    'New drugs may be lung',
    'New drugs could be lung and',
    'New drugs may be lung and ovarian cancer',
    'New drugs may slow lung and ovarian cancer',
]


@pytest.fixture
def revision_example_ptl():
    return PrefixTranslationList(source=REVISION_EXAMPLE_SOURCE, outputs=[o.split() for o in REVISION_EXAMPLE_OUTPUTS], sentence_id='t1')


def random_sequence(rng, max_len=6, vocab=('a', 'b', 'c@@', 'd@@')):
    return [str(t) for t in rng.choice(vocab, size=rng.integers(0, max_len + 1))]


def test__to_tokens__rejects_whitespace_and_empty():
    assert to_tokens(['a', 'b']) == ('a', 'b')
    with pytest.raises(InvalidTokensException):
        to_tokens(['a b'])
    with pytest.raises(InvalidTokensException):
        to_tokens([''])


def test__sentence_pair__requires_both_sides():
    with pytest.raises(ValidationException):
        SentencePair(source=['a'], target=[])


def test__merge_subwords__examples():
    assert merge_subwords(['Arz@@', 'neimittel']) == ('Arzneimittel',)
    assert merge_subwords(['New', 'drugs']) == ('New', 'drugs')
    assert merge_subwords(['a@@', 'b@@', 'c', 'd']) == ('abc', 'd')


def test__merge_subwords__custom_marker():
    assert merge_subwords(['Arz##', 'neimittel'], marker='##') == ('Arzneimittel',)
    with pytest.raises(ValidationException):
        merge_subwords(['a'], marker='')


def test__merge_subwords__trailing_continuation(caplog):
    assert merge_subwords(['New', 'Arz@@']) == ('New', 'Arz')
    assert 'Trailing subword continuation' in caplog.text


def test__merge_subwords__idempotent():
    rng = np.random.default_rng(7)
    for _ in range(500):
        seq = random_sequence(rng)
        once = merge_subwords(seq)
        assert merge_subwords(once) == once


def test__merge_ptl__keeps_source_shape():
    ptl = PrefixTranslationList(source=['x', 'y'], outputs=[['Arz@@'], ['Arz@@', 'neimittel']])
    merged = merge_ptl(ptl)
    assert merged.source == ('x', 'y')
    assert merged.outputs == (('Arz',), ('Arzneimittel',))


def test__merge_ptl__warns_only_for_final_output(caplog):
    outputs = [['Arz@@'], ['Arz@@', 'nei@@'], ['Arz@@', 'neimittel']]
    merge_ptl(PrefixTranslationList(source=['x', 'y', 'z'], outputs=outputs))
    assert 'Trailing subword continuation' not in caplog.text

    merge_ptl(PrefixTranslationList(source=['x', 'y'], outputs=[['Arz@@'], ['New', 'Arz@@']]))
    assert caplog.text.count('Trailing subword continuation') == 1


def test__lcp_len__examples():
    assert lcp_len(['New', 'drugs', 'may'], ['New', 'drugs', 'could']) == 2
    assert lcp_len(['a', 'b'], ['a', 'b']) == 2
    assert lcp_len([], ['a']) == 0


def test__lcp_len__symmetric_and_bounded():
    rng = np.random.default_rng(11)
    for _ in range(500):
        a, b = random_sequence(rng), random_sequence(rng)
        assert lcp_len(a, b) == lcp_len(b, a)
        assert lcp_len(a, b) <= min(len(a), len(b))


def test__validate_ptl__revision_example(revision_example_ptl):
    report = validate_ptl(revision_example_ptl)
    assert report.valid
    assert not report.append_only
    assert report.violations == []


def test__validate_ptl__append_only():
    report = validate_ptl(PrefixTranslationList(source=['x', 'y'], outputs=[['a'], ['a', 'b']]))
    assert report.valid and report.append_only


def test__validate_ptl__length_mismatch():
    report = validate_ptl(PrefixTranslationList(source=['x', 'y', 'z'], outputs=[['a'], ['a', 'b']]))
    assert not report.valid
    assert '3 source tokens but 2 outputs' in report.violations[0]


def test__validate_ptl__empty_source():
    report = validate_ptl(PrefixTranslationList(source=[], outputs=[]))
    assert not report.valid


def test__is_append_only__agrees_with_zero_erasure():
    rng = np.random.default_rng(3)
    for _ in range(500):
        I = int(rng.integers(1, 6))
        outputs = [random_sequence(rng, max_len=4, vocab=('a', 'b')) for _ in range(I)]
        ptl = PrefixTranslationList(source=['s'] * I, outputs=outputs)
        if ptl.J == 0 and not is_append_only(outputs):
            continue
        assert is_append_only(outputs) == (normalized_erasure(ptl) == 0)
