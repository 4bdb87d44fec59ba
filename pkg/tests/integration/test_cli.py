import json
import sys
import pytest
from src.core.ptl import validate_ptl
from src.main import EXIT_OK, EXIT_PROTOCOL, EXIT_VALIDATION, main
from src.utils.io import MANIFEST_SUFFIX, read_ptl_file, write_ptl_file
from tests.integration.test_scorer_process import ECHO_SCORER


REVISION_EXAMPLE_SOURCE = 'Neue Arzneimittel könnten Lungen- und Eierstockkrebs verlangsamen'.split()
REVISION_EXAMPLE_OUTPUTS = [
    'New',
    'New Medicines',
    'New Medicines',
    'New drugs may be lung',
    'New drugs could be lung and',
    'New drugs may be lung and ovarian cancer',
    'New drugs may slow lung and ovarian cancer',
]
REVISION_EXAMPLE_REFERENCE = 'New drugs may slow lung , ovarian cancer'

PREFIX_EXAMPLE_SOURCE = ('Die Führungskräfte der Republikaner rechtfertigen ihre Politik mit der Notwendigkeit , '
                 'den Wahlbetrug zu bekämpfen')
PREFIX_EXAMPLE_TARGET = 'Republican leaders justified their policy by the need to combat electoral fraud'

VOCAB = ['the', 'a', 'drugs', 'may', 'slow', 'cancer', 'new', 'lung']


def write_lines(path, lines):
    path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')
    return str(path)


@pytest.fixture
def revision_example_files(tmp_path):
    record = {'id': 't1', 'source': REVISION_EXAMPLE_SOURCE, 'outputs': [o.split() for o in REVISION_EXAMPLE_OUTPUTS]}
    ptl_file = write_lines(tmp_path / 'revision_example.jsonl', [json.dumps(record, ensure_ascii=False)])
    ref_file = write_lines(tmp_path / 'revision_example.ref', [REVISION_EXAMPLE_REFERENCE])
    return ptl_file, ref_file


@pytest.fixture
def seeded_model(tmp_path):
    path = tmp_path / 'model.json'
    path.write_text(json.dumps({'seed': 11, 'vocab': VOCAB, 'eos_slope': 3.0}), encoding='utf-8')
    return str(path)


@pytest.fixture
def source_file(tmp_path):
    return write_lines(tmp_path / 'src.txt', ['s%d ' % n * (n % 6 + 1) for n in range(12)])


@pytest.fixture
def parallel_files(tmp_path):
    sources = [' '.join('w%d' % (n + i) for i in range(n % 7 + 2)) for n in range(100)]
    targets = [' '.join('v%d' % (n + j) for j in range(n % 5 + 1)) for n in range(100)]
    return write_lines(tmp_path / 'train.src', sources), write_lines(tmp_path / 'train.tgt', targets)


def read_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def test__evaluate__revision_example_report(tmp_path, revision_example_files, capsys):
    report_path = str(tmp_path / 'report.json')
    assert main(['evaluate', *revision_example_files, '--report', report_path]) == EXIT_OK

    report = read_json(report_path)
    assert report['ne'] == 1.625
    assert report['dal'] == 3.78125
    assert report['sentences'][0]['erasure'] == 13
    assert 'NE         1.625000' in capsys.readouterr().out
    assert read_json(report_path + MANIFEST_SUFFIX)['command'] == 'evaluate'


def test__evaluate__malformed_line(tmp_path):
    line = json.dumps({'id': 'a', 'source': ['x'], 'outputs': [['y']]})
    ptl_file = write_lines(tmp_path / 'bad.jsonl', [line, line, '{"id": "c", "source": ["x"], "outputs": [["y"]'])
    ref_file = write_lines(tmp_path / 'bad.ref', ['y', 'y', 'y'])
    assert main(['evaluate', ptl_file, ref_file]) == EXIT_VALIDATION


def test__evaluate__invalid_utf8(tmp_path, caplog):
    line = json.dumps({'id': 'a', 'source': ['x'], 'outputs': [['y']]}).encode('utf-8')
    ptl_file = tmp_path / 'latin1.jsonl'
    ptl_file.write_bytes(line + b'\n' + line.replace(b'"y"', b'"\xff"') + b'\n')
    ref_file = write_lines(tmp_path / 'bad.ref', ['y', 'y'])
    assert main(['evaluate', str(ptl_file), ref_file]) == EXIT_VALIDATION
    assert 'line 2: invalid UTF-8' in caplog.text


def test__evaluate__count_mismatch(revision_example_files, tmp_path):
    ref_file = write_lines(tmp_path / 'two.ref', [REVISION_EXAMPLE_REFERENCE, REVISION_EXAMPLE_REFERENCE])
    assert main(['evaluate', revision_example_files[0], ref_file]) == EXIT_VALIDATION


def test__evaluate__missing_file(tmp_path, revision_example_files):
    assert main(['evaluate', str(tmp_path / 'absent.jsonl'), revision_example_files[1]]) == EXIT_PROTOCOL


def test__validate__exit_codes(tmp_path, revision_example_files, capsys):
    assert main(['validate', revision_example_files[0]]) == EXIT_OK
    assert 't1\tvalid\trevising' in capsys.readouterr().out

    mismatch = json.dumps({'id': 'm', 'source': ['x', 'y'], 'outputs': [['a']]})
    bad_file = write_lines(tmp_path / 'mismatch.jsonl', [mismatch])
    assert main(['validate', bad_file]) == EXIT_VALIDATION
    assert 'm\tINVALID' in capsys.readouterr().out


def test__simulate__stream_is_append_only(tmp_path, seeded_model, source_file):
    out = str(tmp_path / 'stream.jsonl')
    assert main(['simulate', source_file, '--model', seeded_model, '--policy', 'stream', '--k', '2',
                 '--out', out]) == EXIT_OK

    ptls = read_ptl_file(out)
    assert len(ptls) == 12
    assert all(validate_ptl(ptl).append_only for ptl in ptls)
    manifest = read_json(out + MANIFEST_SUFFIX)
    assert (manifest['policy'], manifest['k'], manifest['seed']) == ('stream', 2, 11)


def test__simulate__beta_one_has_zero_erasure(tmp_path, seeded_model, source_file):
    out = str(tmp_path / 'retranslate.jsonl')
    assert main(['-c', '3', 'simulate', source_file, '--model', seeded_model, '--beta', '1', '--k', '1',
                 '--out', out]) == EXIT_OK

    # Only NE matters here, so the finals double as references
    ptls = [ptl for ptl in read_ptl_file(out) if ptl.final]
    assert len(ptls) > 0
    scored = str(tmp_path / 'scored.jsonl')
    write_ptl_file(scored, ptls)
    ref_file = write_lines(tmp_path / 'refs.txt', [' '.join(ptl.final) for ptl in ptls])

    report_path = str(tmp_path / 'report.json')
    assert main(['evaluate', scored, ref_file, '--report', report_path]) == EXIT_OK
    assert read_json(report_path)['ne'] == 0.0


def test__simulate__deterministic(tmp_path, seeded_model, source_file):
    first, second = str(tmp_path / 'first.jsonl'), str(tmp_path / 'second.jsonl')
    for out, threads in [(first, '1'), (second, '4')]:
        assert main(['-c', threads, 'simulate', source_file, '--model', seeded_model, '--beta', '0.3',
                     '--k', '2', '--beam', '3', '--out', out]) == EXIT_OK
    assert (tmp_path / 'first.jsonl').read_bytes() == (tmp_path / 'second.jsonl').read_bytes()


def test__simulate__scorer_failure(tmp_path, source_file):
    config = tmp_path / 'scorer.json'
    config.write_text(json.dumps({'command': [sys.executable, ECHO_SCORER, 'exit']}), encoding='utf-8')
    out = str(tmp_path / 'out.jsonl')
    assert main(['simulate', source_file, '--model', str(config), '--out', out]) == EXIT_PROTOCOL


def test__simulate__empty_source_line(tmp_path, seeded_model):
    source_file = write_lines(tmp_path / 'src.txt', ['a b', '', 'c'])
    assert main(['simulate', source_file, '--model', seeded_model, '--out', str(tmp_path / 'o.jsonl')]) == \
        EXIT_VALIDATION


def test__simulate__unknown_policy(tmp_path, seeded_model, source_file, capsys):
    assert main(['simulate', source_file, '--model', seeded_model, '--policy', 'offline',
                 '--out', str(tmp_path / 'o.jsonl')]) == EXIT_VALIDATION
    assert 'invalid choice' in capsys.readouterr().err


def test__simulate__missing_model(tmp_path, source_file):
    assert main(['simulate', source_file, '--out', str(tmp_path / 'o.jsonl')]) == EXIT_VALIDATION


def test__version_exits_cleanly(capsys):
    assert main(['--version']) == EXIT_OK


def test__augment__duplicate_doubles_corpus(tmp_path, parallel_files):
    out_src, out_tgt = tmp_path / 'aug.src', tmp_path / 'aug.tgt'
    assert main(['augment', *parallel_files, '--mix', 'duplicate', '--seed', '3',
                 '--out-src', str(out_src), '--out-tgt', str(out_tgt)]) == EXIT_OK

    src_lines = out_src.read_text(encoding='utf-8').splitlines()
    tgt_lines = out_tgt.read_text(encoding='utf-8').splitlines()
    assert len(src_lines) == len(tgt_lines) == 200
    with open(parallel_files[0], 'r', encoding='utf-8') as f:
        assert src_lines[0::2] == f.read().splitlines()


def test__augment__prefix_example_forced_length(tmp_path):
    src = write_lines(tmp_path / 'train.src', [PREFIX_EXAMPLE_SOURCE])
    tgt = write_lines(tmp_path / 'train.tgt', [PREFIX_EXAMPLE_TARGET])
    out_src, out_tgt = tmp_path / 'aug.src', tmp_path / 'aug.tgt'
    assert main(['augment', src, tgt, '--prob', '1', '--force-ls', '5',
                 '--out-src', str(out_src), '--out-tgt', str(out_tgt)]) == EXIT_OK
    assert out_src.read_text(encoding='utf-8') == 'Die Führungskräfte der Republikaner rechtfertigen\n'
    assert out_tgt.read_text(encoding='utf-8') == 'Republican leaders justified their\n'


def test__augment__same_seed_same_bytes(tmp_path, parallel_files):
    outputs = []
    for run in ('first', 'second'):
        out_src, out_tgt = tmp_path / f'{run}.src', tmp_path / f'{run}.tgt'
        assert main(['augment', *parallel_files, '--seed', '9', '--prob', '0.3',
                     '--out-src', str(out_src), '--out-tgt', str(out_tgt)]) == EXIT_OK
        outputs.append((out_src.read_bytes(), out_tgt.read_bytes()))
    assert outputs[0] == outputs[1]


def test__augment__aligned_mode_needs_alignments(tmp_path, parallel_files):
    assert main(['augment', *parallel_files, '--mode', 'aligned',
                 '--out-src', str(tmp_path / 'a.src'), '--out-tgt', str(tmp_path / 'a.tgt')]) == EXIT_VALIDATION


def test__augment__alignment_out_of_bounds(tmp_path):
    src = write_lines(tmp_path / 'train.src', ['a b'])
    tgt = write_lines(tmp_path / 'train.tgt', ['x'])
    align = write_lines(tmp_path / 'train.align', ['0-0 1-3'])
    assert main(['augment', src, tgt, '--mode', 'aligned', '--align', align,
                 '--out-src', str(tmp_path / 'a.src'), '--out-tgt', str(tmp_path / 'a.tgt')]) == EXIT_VALIDATION


def test__sweep_and_frontier__same_dev_and_test(tmp_path, seeded_model, capsys):
    sources = [' '.join('%s%d' % (w, n) for w in 'stuvw') for n in range(6)]
    refs = ['the new drugs may slow cancer'] * 6
    src = write_lines(tmp_path / 'dev.src', sources)
    ref = write_lines(tmp_path / 'dev.ref', refs)
    sweep_csv = str(tmp_path / 'sweep.csv')
    frontier_json = str(tmp_path / 'frontier.json')

    assert main(['sweep', '--model', seeded_model, '--dev-src', src, '--dev-ref', ref, '--test-src', src,
                 '--test-ref', ref, '--grid', 'beta=0,0.5,1;k=1,2;beam=1', '--out', sweep_csv,
                 '--frontier-out', frontier_json]) == EXIT_OK

    with open(sweep_csv, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == 'beta,k,beam,split,bleu,dal,ne'
    assert len(lines) == 1 + 3 * 2 * 2
    assert 'NE stability (mean |dev NE - test NE|): 0.000000' in capsys.readouterr().out

    rebuilt = str(tmp_path / 'rebuilt.json')
    assert main(['frontier', sweep_csv, '--ne-threshold', '0.2', '--out', rebuilt]) == EXIT_OK
    frontier = read_json(rebuilt)
    assert frontier['ne_stability'] == 0.0
    assert frontier['ne_threshold'] == 0.2
    for rows in frontier['curves'].values():
        for row in rows:
            assert row['dev'] == row['test']
    assert all(row['beta'] == 1.0 for row in frontier['curves']['no_revision'])
    assert all(row['dev']['ne'] < 0.2 for row in frontier['curves']['low_revision'])


def test__sweep__bad_grid(tmp_path, seeded_model):
    src = write_lines(tmp_path / 'dev.src', ['a'])
    assert main(['sweep', '--model', seeded_model, '--dev-src', src, '--dev-ref', src, '--test-src', src,
                 '--test-ref', src, '--grid', 'beta=high', '--out', str(tmp_path / 's.csv')]) == EXIT_VALIDATION


def test__frontier__malformed_csv(tmp_path):
    path = write_lines(tmp_path / 'sweep.csv', ['beta,k,beam,split,bleu,dal,ne', '0.0,1,1,train,1,1,0'])
    assert main(['frontier', path, '--out', str(tmp_path / 'f.json')]) == EXIT_VALIDATION
