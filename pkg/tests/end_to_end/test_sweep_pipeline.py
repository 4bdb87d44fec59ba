import json
import numpy as np
import pytest
from src.core.frontier import default_grid
from src.main import EXIT_OK, main
from src.utils.io import read_sweep_csv


VOCAB = ['the', 'new', 'drugs', 'may', 'could', 'slow', 'lung', 'and', 'ovarian', 'cancer']
N_SENTENCES = 20


def write_corpus(path, rng, prefix, n=N_SENTENCES):
    lines = [' '.join('%s%d' % (prefix, t) for t in rng.integers(0, 50, size=rng.integers(5, 11))) for _ in range(n)]
    path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')
    return str(path)


@pytest.fixture
def sweep_inputs(tmp_path):
    rng = np.random.default_rng(500)
    model = tmp_path / 'model.json'
    model.write_text(json.dumps({'seed': 29, 'vocab': VOCAB, 'eos_slope': 3.0}), encoding='utf-8')
    return {
        'model': str(model),
        'dev_src': write_corpus(tmp_path / 'dev.src', rng, 'd'),
        'dev_ref': write_corpus(tmp_path / 'dev.ref', rng, 'r'),
        'test_src': write_corpus(tmp_path / 'test.src', rng, 't'),
        'test_ref': write_corpus(tmp_path / 'test.ref', rng, 'r'),
    }


def run_sweep_cli(inputs, out, concurrency):
    return main(['-c', str(concurrency), 'sweep', '--model', inputs['model'],
                 '--dev-src', inputs['dev_src'], '--dev-ref', inputs['dev_ref'],
                 '--test-src', inputs['test_src'], '--test-ref', inputs['test_ref'],
                 '--out', out, '--frontier-out', out + '.frontier.json'])


def test__default_sweep__reproducible(tmp_path, sweep_inputs):
    first, second = str(tmp_path / 'first.csv'), str(tmp_path / 'second.csv')
    assert run_sweep_cli(sweep_inputs, first, concurrency=1) == EXIT_OK
    assert run_sweep_cli(sweep_inputs, second, concurrency=4) == EXIT_OK

    assert (tmp_path / 'first.csv').read_bytes() == (tmp_path / 'second.csv').read_bytes()
    assert (tmp_path / 'first.csv.frontier.json').read_bytes() == (tmp_path / 'second.csv.frontier.json').read_bytes()


def test__default_sweep__covers_grid(tmp_path, sweep_inputs):
    out = str(tmp_path / 'sweep.csv')
    assert run_sweep_cli(sweep_inputs, out, concurrency=2) == EXIT_OK

    points = read_sweep_csv(out)
    assert len(points) == 2 * len(default_grid()) == 108
    assert all(p.ne == 0 for p in points if p.beta == 1.0)
    assert all(0 <= p.bleu <= 100 and p.dal >= 0 and p.ne >= 0 for p in points)

    with open(out + '.frontier.json', 'r', encoding='utf-8') as f:
        frontier = json.load(f)
    assert set(frontier['curves']) == {'low_revision', 'no_revision'}
    for rows in frontier['curves'].values():
        dals = [row['dev']['dal'] for row in rows]
        bleus = [row['dev']['bleu'] for row in rows]
        assert dals == sorted(dals) and bleus == sorted(bleus)
