"""Evaluation and validation of recorded PTL files"""


from os import environ
from typing import List, Optional
from dotenv import load_dotenv
from src.core.metrics import EvalReport, evaluate_corpus
from src.core.ptl import DEFAULT_SUBWORD_MARKER, ValidationReport, merge_ptl, merge_subwords, validate_ptl
from src.utils.exceptions import CountMismatchException
from src.utils.io import RunManifest, read_ptl_file, read_token_lines, render_eval_summary, write_eval_report
from src import logger


load_dotenv('.env')

SUBWORD_MARKER = environ.get('SUBWORD_MARKER', DEFAULT_SUBWORD_MARKER)


def evaluate(ptl_file: str, ref_file: str, subword_marker: str = SUBWORD_MARKER,
             report_path: Optional[str] = None, num_threads: int = 1) -> EvalReport:
    """Scores a PTL file against a reference file.

    Parameters
    ----------
    ptl_file : str
        PTL JSON lines, one per sentence.

    ref_file : str
        References, one tokenized sentence per line.

    subword_marker : str, default SUBWORD_MARKER
        Continuation marker merged out of outputs and references before
        scoring; an empty string disables merging.

    report_path : str, default None
        Where to write the JSON report and its manifest.

    num_threads : int, default 1
        Worker threads for per-sentence metrics.

    Returns
    -------
    report : EvalReport

    """

    ptls = read_ptl_file(ptl_file)
    references = read_token_lines(ref_file)
    if len(ptls) != len(references):
        raise CountMismatchException(ptl_file, len(ptls), ref_file, len(references))

    if subword_marker:
        ptls = [merge_ptl(ptl, subword_marker) for ptl in ptls]
        references = [merge_subwords(ref, subword_marker) for ref in references]

    report = evaluate_corpus(ptls, references, num_threads=num_threads)
    print(render_eval_summary(report), end='')

    if report_path:
        write_eval_report(report_path, report)
        RunManifest.for_inputs('evaluate', {'subword_marker': subword_marker},
                               [ptl_file, ref_file]).write(report_path)

    return report


def validate(ptl_file: str) -> List[ValidationReport]:
    """Prints one validation line per PTL; returns the reports."""

    reports = [validate_ptl(ptl) for ptl in read_ptl_file(ptl_file, check_shape=False)]
    for report in reports:
        status = 'valid' if report.valid else 'INVALID'
        mode = 'append-only' if report.append_only else 'revising'
        details = f"  {'; '.join(report.violations)}" if report.violations else ''
        print(f'{report.sentence_id}\t{status}\t{mode}{details}')

    n_invalid = sum(not r.valid for r in reports)
    if n_invalid:
        logger.warning(f'{n_invalid} of {len(reports)} PTLs are invalid.')
    else:
        logger.info(f'All {len(reports)} PTLs are valid.')

    return reports
