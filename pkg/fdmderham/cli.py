'''
Command line driver: fdmderham <basis|spy|riesz|sweep|hodge|complexity|mesh>
'''
import argparse
import logging
import sys

from .config import ExperimentConfig
from .errors import (ConfigError, InvalidArgument, InvalidData, InvalidStructure,
                     NumericalFailure, ParseError)
from .experiments import (dump_basis, run_complexity, run_hodge, run_riesz_series,
                          run_spy, run_sweep)
from .helper.label import config2label
from .helper.log import get_messages, init_collector, remove_collector
from .helper.markdown import render_report, write_csv
from .helper.params import get_params_str
from .mesh import Distortion, build_box_mesh, refine_uniform
from .meshio import read_mesh, write_mesh
from .tables import get_table
from .version import __version__

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_INVALID = 4
EXIT_NUMERICAL = 5
EXIT_DATA = 6

# command line option -> configuration key
OPTION_KEYS = {
    'k': 'k', 'level': 'level', 'nx': 'nx', 'ny': 'ny', 'nz': 'nz',
    'mesh_file': 'mesh_file', 'distort': 'distortion', 'amplitude': 'amplitude',
    'seed': 'seed', 'dirichlet': 'dirichlet', 'alpha': 'alpha', 'beta': 'beta',
    'decomposition': 'decomposition', 'factorization': 'factorization',
    'damping': 'damping', 'rtol': 'rtol', 'maxit': 'maxit', 'jump': 'jump',
    'output': 'output', 'markdown': 'markdown',
}


def _add_common(parser):
    parser.add_argument('--config', help='key = value configuration file')
    parser.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                        help='override a configuration key (repeatable)')
    parser.add_argument('-k', type=int, help='form degree 0..3')
    parser.add_argument('-p', help='polynomial degree or comma separated list')
    parser.add_argument('--level', type=int, help='uniform refinements')
    parser.add_argument('--nx', type=int)
    parser.add_argument('--ny', type=int)
    parser.add_argument('--nz', type=int)
    parser.add_argument('--mesh-file', help='hexmesh v1 file instead of the unit box')
    parser.add_argument('--distort', choices=('none', 'smooth', 'jitter'))
    parser.add_argument('--amplitude', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--dirichlet', choices=('all', 'none'))
    parser.add_argument('--alpha', help='number, jump:<axis>:<low>:<high>, checker or smooth')
    parser.add_argument('--beta', help='number, jump:<axis>:<low>:<high>, checker or smooth')
    parser.add_argument('--decomposition', choices=('pafw', 'ph', 'sc_pafw', 'sc_ph'))
    parser.add_argument('--factorization', choices=('chol', 'icc_sc'))
    parser.add_argument('--damping', type=float, help='fixed smoother weight, 0 for automatic')
    parser.add_argument('--rtol', type=float)
    parser.add_argument('--maxit', type=int)
    parser.add_argument('--output', help='CSV output path (default stdout)')
    parser.add_argument('--markdown', help='Markdown report path')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fdmderham',
        description='Sparse preconditioners for Riesz maps of the de Rham complex')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    cmd = sub.add_parser('basis', help='dump the 1D FDM basis matrices')
    cmd.add_argument('-p', type=int, required=True)
    cmd.add_argument('--output')

    cmd = sub.add_parser('spy', help='write patch matrix and factor patterns')
    _add_common(cmd)
    cmd.add_argument('--outdir', required=True)

    for name, text in (('riesz', 'solve Riesz maps with CG'),
                       ('sweep', 'coefficient sweep'),
                       ('hodge', 'solve mixed Hodge Laplacians with MINRES'),
                       ('complexity', 'nnz, flop and memory counters')):
        cmd = sub.add_parser(name, help=text)
        _add_common(cmd)
        if name == 'sweep':
            cmd.add_argument('--jump', type=float, help='beta jump ratio of an extra row')

    cmd = sub.add_parser('mesh', help='generate or check a hexmesh file')
    cmd.add_argument('--nx', type=int, default=2)
    cmd.add_argument('--ny', type=int, default=2)
    cmd.add_argument('--nz', type=int, default=2)
    cmd.add_argument('--distort', choices=('none', 'smooth', 'jitter'), default='none')
    cmd.add_argument('--amplitude', type=float, default=0.0)
    cmd.add_argument('--seed', type=int)
    cmd.add_argument('--refine', type=int, default=0)
    cmd.add_argument('--output')
    cmd.add_argument('--check', metavar='FILE')
    return parser


def load_config(args, command):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if command == 'hodge' and not args.config:
        cfg.dirichlet = 'none'
        cfg.k = 3
    cfg.update(args.set)
    for option, key in OPTION_KEYS.items():
        value = getattr(args, option, None)
        if value is not None:
            cfg.set(key, str(value))
    if args.p is not None:
        cfg.set('ps', args.p)
        cfg.p = cfg.ps[0] if cfg.ps else cfg.p
    return cfg.validate()


def _emit(name, rows, cfg):
    title, cols = get_table(name, rows)
    if cfg.output:
        write_csv(name, cols, cfg.output)
    else:
        write_csv(name, cols, sys.stdout)
    if cfg.markdown:
        text = render_report([(title, cols)], title=config2label(cfg),
                             params=get_params_str(cfg), messages=get_messages())
        with open(cfg.markdown, 'w') as fh:
            fh.write(text)
    if not all(row.get('converged', True) for row in rows):
        _logger.warning('at least one solve did not converge')
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_basis(args):
    if args.p < 1:
        raise InvalidArgument(f'polynomial degree must be >= 1, got {args.p}')
    if args.output:
        with open(args.output, 'w') as fh:
            dump_basis(args.p, fh)
    else:
        dump_basis(args.p, sys.stdout)
    return EXIT_OK


def cmd_spy(args):
    cfg = load_config(args, 'spy')
    for path in run_spy(cfg, args.outdir):
        print(path)
    return EXIT_OK


def cmd_riesz(args):
    cfg = load_config(args, 'riesz')
    return _emit('riesz', [run.row for run in run_riesz_series(cfg)], cfg)


def cmd_sweep(args):
    cfg = load_config(args, 'sweep')
    return _emit('sweep', run_sweep(cfg), cfg)


def cmd_hodge(args):
    cfg = load_config(args, 'hodge')
    return _emit('hodge', run_hodge(cfg), cfg)


def cmd_complexity(args):
    cfg = load_config(args, 'complexity')
    return _emit('complexity', run_complexity(cfg), cfg)


def cmd_mesh(args):
    if args.check:
        mesh = read_mesh(args.check)
        print(f'cells {mesh.ncells}')
        for dim, name in enumerate(('vertices', 'edges', 'faces')):
            print(f'{name} {mesh.count(dim)}')
        print(f'kind {mesh.distortion.label}')
        print(f'min_detJ {mesh.min_jacobian():.6g}')
        return EXIT_OK
    if not args.output:
        raise ConfigError('mesh generation needs --output')
    mesh = build_box_mesh(args.nx, args.ny, args.nz,
                          Distortion(args.distort, args.amplitude, args.seed))
    for _ in range(args.refine):
        mesh = refine_uniform(mesh)
    write_mesh(mesh, args.output)
    return EXIT_OK


COMMANDS = {
    'basis': cmd_basis,
    'spy': cmd_spy,
    'riesz': cmd_riesz,
    'sweep': cmd_sweep,
    'hodge': cmd_hodge,
    'complexity': cmd_complexity,
    'mesh': cmd_mesh,
}


def _setup_logging(args):
    if args.quiet:
        level = logging.ERROR
    else:
        level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args)
    init_collector(['fdmderham'])
    try:
        return COMMANDS[args.command](args)
    except (ParseError, InvalidData, InvalidStructure) as e:
        _logger.error(str(e))
        return EXIT_DATA
    except InvalidArgument as e:
        _logger.error(str(e))
        return EXIT_INVALID
    except NumericalFailure as e:
        _logger.error(str(e))
        return EXIT_NUMERICAL
    except OSError as e:
        _logger.error(str(e))
        return EXIT_INVALID
    finally:
        remove_collector(['fdmderham'])
