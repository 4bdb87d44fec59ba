"""Readers and writers for the toolkit's file formats.

All files are UTF-8 with LF line endings:

- corpora: one whitespace-tokenized sentence per line
- PTLs: JSON lines ``{"id": str, "source": [tokens], "outputs": [[tokens], ...]}``
- alignments: Pharaoh ``i-j`` links per line, 0-based
- sweeps: CSV ``beta,k,beam,split,bleu,dal,ne``
- model configs: a JSON object
"""


import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence
import numpy as np
import pandas as pd
from src.core.augment import AlignmentSet
from src.core.frontier import FrontierCurve, SWEEP_COLUMNS, SWEEP_DTYPES, SPLITS, frame_to_points, points_to_frame
from src.core.metrics import EvalReport
from src.core.models import LexicalTableModel, ScoringModel, SeededRandomModel
from src.core.ptl import PrefixTranslationList, SentencePair, TokenSeq, is_valid_token
from src.utils.exceptions import CountMismatchException, InvalidConfigException, ParseException
from src.utils.misc import file_digest, prepare_directory, render_template_file
from src.utils.scorer import ExternalScorerModel
from src import __version__, logger


MANIFEST_SUFFIX = '.manifest.json'


def _open_for_writing(path):
    prepare_directory(path)
    return open(path, 'w', encoding='utf-8', newline='\n')


def read_text_lines(path: str) -> List[str]:
    """Reads the lines of a UTF-8 file without their LF terminators.

    A single trailing newline ends the last line. A line that is not valid
    UTF-8 raises ParseException with its line number.
    """

    with open(path, 'rb') as f:
        raw_lines = f.read().split(b'\n')
    if raw_lines and raw_lines[-1] == b'':
        raw_lines.pop()

    lines = []
    for line_number, raw in enumerate(raw_lines, start=1):
        try:
            lines.append(raw.decode('utf-8'))
        except UnicodeDecodeError:
            raise ParseException(path, line_number, 'invalid UTF-8')
    return lines


def read_token_lines(path: str) -> List[TokenSeq]:
    """Reads one whitespace-tokenized sentence per line; blank lines give empty sequences."""
    return [tuple(line.split()) for line in read_text_lines(path)]


def write_token_lines(path: str, sequences: Sequence[Sequence[str]]) -> None:
    with _open_for_writing(path) as f:
        for seq in sequences:
            f.write(' '.join(seq) + '\n')


def read_corpus(source_path: str, target_path: str) -> List[SentencePair]:
    """Reads a parallel corpus from two line-aligned files.

    Parameters
    ----------
    source_path, target_path : str
        Source and target files.

    Returns
    -------
    corpus : list of SentencePair

    Raises
    ------
    CountMismatchException
        If the files have different line counts.

    ParseException
        If a line on either side is empty.

    """

    sources = read_token_lines(source_path)
    targets = read_token_lines(target_path)
    if len(sources) != len(targets):
        raise CountMismatchException(source_path, len(sources), target_path, len(targets))

    corpus = []
    for line_number, (source, target) in enumerate(zip(sources, targets), start=1):
        if len(source) == 0:
            raise ParseException(source_path, line_number, 'empty sentence')
        if len(target) == 0:
            raise ParseException(target_path, line_number, 'empty sentence')
        corpus.append(SentencePair(source, target))

    return corpus


def ptl_to_json(ptl: PrefixTranslationList) -> str:
    return json.dumps({'id': ptl.sentence_id,
                       'source': list(ptl.source),
                       'outputs': [list(o) for o in ptl.outputs]}, ensure_ascii=False)


def _token_list(value, what: str, path: str, line_number: int) -> TokenSeq:
    if not isinstance(value, list):
        raise ParseException(path, line_number, f'{what} must be a list of tokens')
    for token in value:
        if not isinstance(token, str) or not is_valid_token(token):
            raise ParseException(path, line_number, f'invalid token {token!r} in {what}')
    return tuple(value)


def parse_ptl_line(line: str, path: str = '<string>', line_number: int = 1,
                   check_shape: bool = True) -> PrefixTranslationList:
    """Parses one PTL JSON line.

    The ``id`` field is required. Every parse failure cites
    ``path`` and ``line_number``. With ``check_shape`` an empty source or a
    source/outputs length mismatch is a parse failure too; without it such
    PTLs are returned for ``validate_ptl`` to report.
    """

    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise ParseException(path, line_number, f'malformed JSON ({e.msg})')

    if not isinstance(record, dict):
        raise ParseException(path, line_number, 'expected a JSON object')

    if 'id' not in record:
        raise ParseException(path, line_number, "missing 'id'")
    sentence_id = record['id']
    if not isinstance(sentence_id, str):
        raise ParseException(path, line_number, "'id' must be a string")

    source = _token_list(record.get('source'), 'source', path, line_number)
    if check_shape and len(source) == 0:
        raise ParseException(path, line_number, 'source is empty')

    outputs = record.get('outputs')
    if not isinstance(outputs, list):
        raise ParseException(path, line_number, "'outputs' must be a list of token lists")
    outputs = [_token_list(o, f'output {n + 1}', path, line_number) for n, o in enumerate(outputs)]
    if check_shape and len(outputs) != len(source):
        raise ParseException(path, line_number, f'{len(source)} source tokens but {len(outputs)} outputs')

    return PrefixTranslationList(source=source, outputs=outputs, sentence_id=sentence_id)


def read_ptl_file(path: str, check_shape: bool = True) -> List[PrefixTranslationList]:
    ptls = []
    for line_number, line in enumerate(read_text_lines(path), start=1):
        if not line.strip():
            raise ParseException(path, line_number, 'blank line')
        ptls.append(parse_ptl_line(line, path, line_number, check_shape))

    logger.info(f'Read {len(ptls)} PTLs from {path}')
    return ptls


def write_ptl_file(path: str, ptls: Sequence[PrefixTranslationList]) -> None:
    with _open_for_writing(path) as f:
        for ptl in ptls:
            f.write(ptl_to_json(ptl) + '\n')
    logger.info(f'Wrote {len(ptls)} PTLs to {path}')


def parse_alignment_line(line: str, path: str = '<string>', line_number: int = 1) -> AlignmentSet:
    links = []
    for item in line.split():
        parts = item.split('-')
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise ParseException(path, line_number, f"alignment link {item!r} is not of the form 'i-j'")
        links.append((int(parts[0]), int(parts[1])))
    return AlignmentSet(links)


def read_alignment_file(path: str) -> List[AlignmentSet]:
    """Reads Pharaoh alignments; a blank line is a pair without links."""
    return [parse_alignment_line(line, path, line_number)
            for line_number, line in enumerate(read_text_lines(path), start=1)]


def write_alignment_file(path: str, alignments: Sequence[AlignmentSet]) -> None:
    with _open_for_writing(path) as f:
        for alignment in alignments:
            f.write(' '.join(f'{i}-{j}' for i, j in sorted(alignment.links)) + '\n')


def write_sweep_csv(path: str, points) -> None:
    """Writes sweep points with six-decimal metrics, ordered by (beta, k, beam, split)."""

    df = points_to_frame(points)
    df['split_order'] = df['split'].map({split: n for n, split in enumerate(SPLITS)})
    df = df.sort_values(['beta', 'k', 'beam', 'split_order'], kind='mergesort').drop(columns='split_order')

    prepare_directory(path)
    df.to_csv(path, index=False, float_format='%.6f', lineterminator='\n', encoding='utf-8')
    logger.info(f'Wrote {df.shape[0]} sweep points to {path}')


def read_sweep_csv(path: str):
    """Reads a sweep CSV back into SweepPoints.

    Raises
    ------
    ParseException
        On a wrong header, an unknown split, non-finite metrics or a
        repeated (beta, k, beam, split).

    """

    read_text_lines(path)
    try:
        df = pd.read_csv(path, dtype={'split': 'object'}, encoding='utf-8')
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseException(path, 1, f'unreadable CSV ({e})')

    if list(df.columns) != SWEEP_COLUMNS:
        raise ParseException(path, 1, f"expected header {','.join(SWEEP_COLUMNS)}")

    # Data rows start on line 2
    unknown_split = ~df['split'].isin(SPLITS)
    if unknown_split.any():
        n = int(unknown_split.to_numpy().argmax())
        raise ParseException(path, n + 2, f"unknown split {df['split'].iloc[n]!r}")

    numeric = df[[c for c in SWEEP_COLUMNS if c != 'split']].apply(pd.to_numeric, errors='coerce').to_numpy(dtype=float)
    bad_value = ~np.isfinite(numeric).all(axis=1)
    bad_value |= (numeric[:, 1] % 1 != 0) | (numeric[:, 2] % 1 != 0)
    if bad_value.any():
        raise ParseException(path, int(bad_value.argmax()) + 2, 'non-finite, missing or non-integral value')

    duplicated = df.duplicated(subset=['beta', 'k', 'beam', 'split'])
    if duplicated.any():
        raise ParseException(path, int(duplicated.to_numpy().argmax()) + 2, 'repeated (beta, k, beam, split)')

    return frame_to_points(df.astype(SWEEP_DTYPES))


def write_eval_report(path: str, report: EvalReport) -> None:
    with _open_for_writing(path) as f:
        f.write(render_eval_report(report))
    logger.info(f'Wrote evaluation report to {path}')


def render_eval_report(report: EvalReport) -> str:
    return render_template_file('eval_report.json.j2', {'report': report})


def render_eval_summary(report: EvalReport) -> str:
    return render_template_file('eval_summary.txt.j2', {'report': report})


def write_frontier_json(path: str, curves: Dict[str, FrontierCurve], ne_threshold: float,
                        ne_stability: Optional[float]) -> None:
    """Writes named frontier curves with their dev and test metrics."""

    parameters = {
        'curves': [(name, list(zip(curve.dev, curve.test))) for name, curve in curves.items()],
        'ne_threshold': ne_threshold if math.isfinite(ne_threshold) else None,
        'ne_stability': ne_stability,
    }
    with _open_for_writing(path) as f:
        f.write(render_template_file('frontier.json.j2', parameters))
    logger.info(f'Wrote frontier curves to {path}')


def load_model(path: str) -> ScoringModel:
    """Builds a ScoringModel from a JSON config file.

    ``command`` selects the external scorer, ``tables`` the lexical table
    model and ``seed`` the seeded random model.
    """

    with open(path, 'rb') as f:
        raw = f.read()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise ParseException(path, raw[:e.start].count(b'\n') + 1, 'invalid UTF-8')
    try:
        config = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseException(path, e.lineno, f'malformed JSON ({e.msg})')

    if not isinstance(config, dict):
        raise InvalidConfigException(f'Model config {path} must be a JSON object.')

    if 'command' in config:
        model = ExternalScorerModel.from_config(config)
    elif 'tables' in config:
        model = LexicalTableModel.from_config(config)
    elif 'seed' in config:
        model = SeededRandomModel.from_config(config)
    else:
        raise InvalidConfigException(f"Model config {path} needs one of 'command', 'tables' or 'seed'.")

    logger.info(f"Loaded {model.describe()['type']} model from {path}")
    return model


@dataclass
class RunManifest:
    """Everything needed to re-run a command and get the same bytes."""

    command: str
    config: dict = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    version: str = __version__

    @classmethod
    def for_inputs(cls, command: str, config: dict, input_paths: Sequence[str],
                   seed: Optional[int] = None) -> 'RunManifest':
        return cls(command=command, config=config, seed=seed,
                   inputs={p: file_digest(p) for p in input_paths if p})

    def to_dict(self) -> dict:
        # Config keys sit at the top level, next to the bookkeeping fields
        record = dict(self.config)
        record.update({'command': self.command, 'inputs': self.inputs, 'seed': self.seed,
                       'version': self.version})
        return record

    def write(self, output_path: str) -> str:
        manifest_path = output_path + MANIFEST_SUFFIX
        with _open_for_writing(manifest_path) as f:
            f.write(json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + '\n')
        return manifest_path
