import numpy as np
import pytest
from src.core.models import EOS, LexicalTableModel, SeededRandomModel, is_valid_distribution
from src.utils.exceptions import InvalidConfigException


TABLES = {
    'Neue': {'New': 3.0, 'Novel': 1.0},
    'Arzneimittel': {'drugs': 1.0},
}


@pytest.fixture
def table_model():
    return LexicalTableModel(TABLES)


def test__lexical_table__normalizes_rows(table_model):
    assert table_model.next_distribution(('Neue',), ()) == {'New': 0.75, 'Novel': 0.25}
    assert table_model.vocabulary == frozenset({'New', 'Novel', 'drugs'})


def test__lexical_table__copies_unknown_tokens(table_model):
    assert table_model.next_distribution(('Berlin',), ()) == {'Berlin': 1.0}


def test__lexical_table__eos_once_covered(table_model):
    assert table_model.next_distribution(('Neue',), ('New',)) == {EOS: 1.0}


def test__lexical_table__uniform_once_covered():
    model = LexicalTableModel(TABLES, eos_when_covered=False)
    dist = model.next_distribution(('Neue',), ('New',))
    assert set(dist) == {'New', 'Novel', 'drugs', EOS}
    assert is_valid_distribution(dist)


def test__lexical_table__rejects_bad_tables():
    with pytest.raises(InvalidConfigException):
        LexicalTableModel({'a': {EOS: 1.0}})
    with pytest.raises(InvalidConfigException):
        LexicalTableModel({'a': {'b': -1.0}})
    with pytest.raises(InvalidConfigException):
        LexicalTableModel({'a': {'b': 0.0}})


def test__lexical_table__from_config():
    model = LexicalTableModel.from_config({'tables': TABLES, 'eos_when_covered': False})
    assert not model.eos_when_covered
    with pytest.raises(InvalidConfigException):
        LexicalTableModel.from_config({'seed': 1})


def test__seeded_random__deterministic_and_valid():
    model = SeededRandomModel(seed=4, vocab=['a', 'b', 'c'])
    again = SeededRandomModel(seed=4, vocab=['c', 'b', 'a'])
    rng = np.random.default_rng(0)
    for _ in range(200):
        source = tuple(str(t) for t in rng.choice(['x', 'y', 'z'], size=rng.integers(1, 6)))
        target = tuple(str(t) for t in rng.choice(['a', 'b', 'c'], size=rng.integers(0, 6)))
        dist = model.next_distribution(source, target)
        assert set(dist) == {'a', 'b', 'c', EOS}
        assert is_valid_distribution(dist)
        assert dist == again.next_distribution(source, target)


def test__seeded_random__seed_changes_distribution():
    first = SeededRandomModel(seed=1, vocab=['a', 'b']).next_distribution(('x',), ())
    second = SeededRandomModel(seed=2, vocab=['a', 'b']).next_distribution(('x',), ())
    assert first != second


def test__seeded_random__eos_grows_with_target_length():
    model = SeededRandomModel(seed=0, vocab=['a'], temperature=0.0, eos_slope=1.0)
    short = model.next_distribution(('x', 'y'), ())
    long = model.next_distribution(('x', 'y'), ('a', 'a', 'a', 'a'))
    assert long[EOS] > short[EOS]


def test__seeded_random__rejects_bad_vocab():
    with pytest.raises(InvalidConfigException):
        SeededRandomModel(seed=0, vocab=[])
    with pytest.raises(InvalidConfigException):
        SeededRandomModel(seed=0, vocab=['a', EOS])


def test__is_valid_distribution():
    assert is_valid_distribution({'a': 0.5, EOS: 0.5})
    assert not is_valid_distribution({'a': 0.5})
    assert not is_valid_distribution({'a': 1.5, EOS: -0.5})
