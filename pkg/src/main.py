"""Command-line entry point for the simultaneous translation toolkit"""


import argparse
import sys
from os import environ
from typing import List, Optional
from dotenv import load_dotenv

from src import logger, __version__

from src.core.augment import AugmentConfig, MIXES, MODES, PROPORTIONAL, STOCHASTIC
from src.core.decode import DEFAULT_MAX_LEN_FACTOR, DEFAULT_MAX_LEN_SLACK
from src.core.frontier import DEFAULT_NE_THRESHOLD
from src.core.simulate import POLICIES, RETRANSLATE
from src.jobs.augmentation import augment
from src.jobs.evaluation import SUBWORD_MARKER, evaluate, validate
from src.jobs.serving import serve
from src.jobs.simulation import simulate
from src.jobs.sweeps import build_frontier, run_sweep
from src.utils.exceptions import ProtocolException, ValidationException
from src.utils.scorer import SCORER_TOP_N


load_dotenv('.env')

NUM_THREADS = int(environ.get('NUM_THREADS', 1))

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROTOCOL = 2


class CommandLineParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the validation status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f'{self.prog}: error: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(description='Simultaneous translation policy simulation and evaluation')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('--concurrency', '-c', default=NUM_THREADS, type=int, help="The number of threads in parallel to use.")
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('evaluate', help='Score a PTL file against references.')
    p.add_argument('ptl_file')
    p.add_argument('ref_file')
    p.add_argument('--subword-marker', default=SUBWORD_MARKER, help="Continuation marker to merge; '' disables merging.")
    p.add_argument('--report', default=None, help='Write the JSON report here.')

    p = commands.add_parser('validate', help='Check the structure of every PTL in a file.')
    p.add_argument('ptl_file')

    p = commands.add_parser('simulate', help='Run a policy over a source file and write PTLs.')
    p.add_argument('src_file')
    p.add_argument('--model', required=True, help='Model config JSON.')
    p.add_argument('--policy', default=RETRANSLATE, choices=POLICIES)
    p.add_argument('--beta', default=0.0, type=float)
    p.add_argument('--k', default=0, type=int)
    p.add_argument('--beam', default=1, type=int)
    p.add_argument('--max-len-factor', default=DEFAULT_MAX_LEN_FACTOR, type=float)
    p.add_argument('--max-len-slack', default=DEFAULT_MAX_LEN_SLACK, type=int)
    p.add_argument('--out', required=True, help='Output PTL JSONL file.')

    p = commands.add_parser('augment', help='Mix prefix pairs into a parallel corpus.')
    p.add_argument('src_file')
    p.add_argument('tgt_file')
    p.add_argument('--mode', default=PROPORTIONAL, choices=MODES)
    p.add_argument('--mix', default=STOCHASTIC, choices=MIXES)
    p.add_argument('--seed', default=0, type=int)
    p.add_argument('--prob', default=0.5, type=float, help='Truncation probability of the stochastic mix.')
    p.add_argument('--align', default=None, help='Pharaoh alignment file (aligned mode).')
    p.add_argument('--force-ls', default=None, type=int, help='Fix the source prefix length.')
    p.add_argument('--out-src', required=True)
    p.add_argument('--out-tgt', required=True)

    p = commands.add_parser('sweep', help='Evaluate re-translation over a (beta, k, beam) grid on dev and test.')
    p.add_argument('--model', required=True, help='Model config JSON.')
    p.add_argument('--dev-src', required=True)
    p.add_argument('--dev-ref', required=True)
    p.add_argument('--test-src', required=True)
    p.add_argument('--test-ref', required=True)
    p.add_argument('--grid', default='', help="e.g. 'beta=0,0.5,1;k=1,4;beam=1'; default is the full grid.")
    p.add_argument('--max-len-factor', default=DEFAULT_MAX_LEN_FACTOR, type=float)
    p.add_argument('--max-len-slack', default=DEFAULT_MAX_LEN_SLACK, type=int)
    p.add_argument('--ne-threshold', default=DEFAULT_NE_THRESHOLD, type=float)
    p.add_argument('--frontier-out', default=None, help='Also write the frontier JSON here.')
    p.add_argument('--out', required=True, help='Sweep CSV file.')

    p = commands.add_parser('frontier', help='Frontier curves and NE stability from a sweep CSV.')
    p.add_argument('sweep_csv')
    p.add_argument('--ne-threshold', default=DEFAULT_NE_THRESHOLD, type=float)
    p.add_argument('--out', required=True, help='Frontier JSON file.')

    p = commands.add_parser('serve', help='Answer scorer protocol requests on stdin/stdout.')
    p.add_argument('--model', required=True, help='Model config JSON.')
    p.add_argument('--top', default=SCORER_TOP_N, type=int, help='Default number of items per response; 0 for all.')

    return parser


def run(args: argparse.Namespace) -> int:
    if args.command == 'evaluate':
        evaluate(args.ptl_file, args.ref_file, subword_marker=args.subword_marker, report_path=args.report,
                 num_threads=args.concurrency)

    elif args.command == 'validate':
        reports = validate(args.ptl_file)
        if not all(r.valid for r in reports):
            return EXIT_VALIDATION

    elif args.command == 'simulate':
        simulate(args.src_file, args.model, args.policy, args.out, beta=args.beta, k=args.k, beam=args.beam,
                 max_len_factor=args.max_len_factor, max_len_slack=args.max_len_slack,
                 num_threads=args.concurrency)

    elif args.command == 'augment':
        config = AugmentConfig(mode=args.mode, mix=args.mix, p=args.prob, seed=args.seed,
                               force_source_len=args.force_ls)
        augment(args.src_file, args.tgt_file, args.out_src, args.out_tgt, config, align_file=args.align)

    elif args.command == 'sweep':
        run_sweep(args.model, args.dev_src, args.dev_ref, args.test_src, args.test_ref, args.out,
                  grid_spec=args.grid, frontier_out=args.frontier_out, ne_threshold=args.ne_threshold,
                  max_len_factor=args.max_len_factor, max_len_slack=args.max_len_slack,
                  num_threads=args.concurrency)

    elif args.command == 'frontier':
        build_frontier(args.sweep_csv, args.out, ne_threshold=args.ne_threshold)

    elif args.command == 'serve':
        serve(args.model, top=args.top)

    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Parses ``argv``, runs the command and returns its exit status.

    0 on success, 1 for usage, validation and parse errors, 2 for scorer
    protocol and I/O errors.
    """

    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help, --version and usage errors
        return e.code if isinstance(e.code, int) else EXIT_VALIDATION

    logger.info(f"Input args: command='{args.command}', concurrency='{args.concurrency}'")

    try:
        return run(args)
    except ValidationException as e:
        logger.error(str(e))
        return EXIT_VALIDATION
    except ProtocolException as e:
        logger.error(str(e))
        return EXIT_PROTOCOL
    except OSError as e:
        logger.error(f'I/O error: {e}')
        return EXIT_PROTOCOL


if __name__ == '__main__':
    sys.exit(main())
