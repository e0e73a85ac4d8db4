#!/usr/bin/env python

import argparse
import os
import sys

import numpy as np

import hqcp.logging_config as logging_config
from hqcp.config import *
from hqcp import enums
from hqcp.enums import SOLVERS, SOLVER_HQ_ADMM, NORMALIZATIONS, FOREGROUND_MODES
from hqcp.hqadmm import SolverConfig, SolverException, write_trace_csv
from hqcp.loss import LossException, loss_table
from hqcp.pgm import PgmException
from hqcp.rcpd import (RcpdException, read_tensor, write_tensor, write_model)
from hqcp.synth import (SynthException, BenchCase, NOISE_KINDS, TABLE_GRIDS,
                        make_noise, gen_ground_truth, add_noise, err_metric,
                        run_solver, run_bench, write_bench_csv, table_cases,
                        format_summary, normalize)
from hqcp.tensor import DenseTensor, TensorException
from hqcp import video

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MAX_ITERATIONS = 3
EXIT_NUMERICAL = 4
EXIT_PARSE = 5
EXIT_IO = 6
EXIT_DOMAIN = 7

MANIFEST_FILE = 'manifest.txt'


def write_manifest(directory, subcommand, args, **extra):
    """ Save run parameters as key=value lines, sorted by key.
    :param directory: output directory, created if missing.
    :param subcommand: name of the command.
    :param args: parsed arguments.
    :param extra: additional values.
    :return: file name.
    """
    os.makedirs(directory, exist_ok=True)
    values = {k: v for k, v in vars(args).items() if k != 'func'}
    values.update(extra)
    values['subcommand'] = subcommand
    path = os.path.join(directory, MANIFEST_FILE)
    with open(path, 'w') as f:
        for k in sorted(values):
            v = values[k]
            if isinstance(v, (list, tuple)):
                v = ' '.join(str(i) for i in v)
            f.write('{}={}\n'.format(k, v))
    return path


def solver_config(args):
    return SolverConfig(tau=args.tau, alpha=args.alpha, delta=args.delta,
                        max_iter=args.max_iter, tol=args.tol, seed=args.seed,
                        diagnostics_on=getattr(args, 'diagnostics', False))


def cmd_decompose(args):
    A = read_tensor(args.input)
    solver = enums.parse(SOLVERS, args.solver)
    config = solver_config(args)
    write_manifest(args.output, 'decompose', args, dims=A.dims)
    res = run_solver(solver, A, args.rank, args.t, config,
                     np.random.default_rng(config.seed))
    write_model(args.output, res.model)
    write_trace_csv(res.trace, os.path.join(args.output, 'trace.csv'))
    print('{} iterations {} fit {:.6E} converged {}'.format(
        solver, res.iterations, res.final_fit, res.converged))
    if args.truth:
        A0 = read_tensor(args.truth)
        print('err {:.6E}'.format(err_metric(A0, res.model)))
    return EXIT_OK if res.converged else EXIT_MAX_ITERATIONS


def cmd_synth(args):
    dims = args.dims
    noise = make_noise(args.noise, args.scale, args.beta, args.density,
                       args.low, args.high)
    write_manifest(args.output, 'synth', args, **noise.as_dict())
    rng = np.random.default_rng(args.seed)
    model, A0 = gen_ground_truth(dims, args.t, args.rank, rng)
    A = add_noise(A0, noise, rng)
    write_tensor(os.path.join(args.output, 'tensor.rcpd'), A)
    write_tensor(os.path.join(args.output, 'clean.rcpd'), normalize(A0))
    truth = os.path.join(args.output, 'truth')
    os.makedirs(truth, exist_ok=True)
    write_model(truth, model)
    print('written {} tensor {} to {}'.format(noise, A.dims, args.output))
    return EXIT_OK


def cmd_bench(args):
    noise = None
    if args.noise is not None:
        noise = make_noise(args.noise, args.scale, args.beta, args.density,
                           args.low, args.high)
    cases = []
    if args.table:
        cases.extend(table_cases(args.table, args.instances, args.seed, noise))
    for n in args.n:
        cases.append(BenchCase(n, args.d, args.t, args.rank, noise,
                               args.instances, args.seed))
    solvers = [enums.parse(SOLVERS, s) for s in args.solvers]
    directory = os.path.dirname(os.path.abspath(args.output))
    write_manifest(directory, 'bench', args, cases=len(cases))
    results = run_bench(cases, solvers, solver_config(args), args.jobs)
    write_bench_csv(results, args.output)
    if results:
        print(format_summary(results))
    return EXIT_OK


def cmd_video(args):
    if args.ratio_table:
        if args.dims:
            l, m, n = args.dims
        elif args.frames:
            v = video.load_frames(args.frames)
            l, m, n = v.frames, v.height, v.width
        else:
            raise video.VideoException("--ratio-table needs --dims or frames")
        for rank, percent in video.compression_table(l, m, n):
            print('R={} {}'.format(rank, percent))
        return EXIT_OK
    if not args.frames or not args.output:
        raise video.VideoException("frames directory and --output are"
                                   " required")
    normalization = enums.parse(NORMALIZATIONS, args.normalization)
    foreground = enums.parse(FOREGROUND_MODES, args.foreground)
    write_manifest(args.output, 'video', args)
    v = video.load_frames(args.frames, normalization)
    result = video.extract(v, args.rank, solver_config(args))
    video.export_frames(result, args.output, foreground)
    for name, m in (('D', result.D), ('U', result.U), ('V', result.V)):
        write_tensor(os.path.join(args.output, name + '.rcpd'),
                     DenseTensor.from_array(m))
    res = result.solve_result
    print('frames {} size {}x{} rank {} iterations {} compression {:.2f}%'
          .format(v.frames, v.height, v.width, args.rank, res.iterations,
                  video.compression_percent(v.frames, v.height, v.width,
                                            args.rank)))
    return EXIT_OK if res.converged else EXIT_MAX_ITERATIONS


def cmd_video_gen(args):
    write_manifest(args.output, 'video-gen', args)
    v, mask, background = video.gen_synthetic_video(
        args.frames, args.height, args.width, args.bg_rank, args.block,
        contrast=args.contrast, rng=np.random.default_rng(args.seed))
    video.write_frames(v, args.output)
    write_tensor(os.path.join(args.output, 'mask.rcpd'),
                 DenseTensor.from_array(mask.astype(np.float64)))
    write_tensor(os.path.join(args.output, 'background.rcpd'),
                 DenseTensor.from_array(background))
    print('written {} frames {}x{} to {}'.format(args.frames, args.height,
                                                 args.width, args.output))
    return EXIT_OK


def cmd_loss(args):
    ts = np.linspace(args.t_min, args.t_max, args.points)
    rows = loss_table(ts, args.deltas)
    lines = ['delta,t,phi,phi_prime,weight']
    lines.extend(','.join(repr(v) for v in r) for r in rows)
    if args.output:
        write_manifest(os.path.dirname(os.path.abspath(args.output)), 'loss',
                       args)
        with open(args.output, 'w') as f:
            f.write('\n'.join(lines) + '\n')
    else:
        print('\n'.join(lines))
    return EXIT_OK


def add_solver_args(parser):
    parser.add_argument('--tau', type=float, default=TAU)
    parser.add_argument('--alpha', type=float, default=ALPHA)
    parser.add_argument('--delta', type=float, default=DELTA)
    parser.add_argument('--max-iter', type=int, default=MAX_ITERATIONS)
    parser.add_argument('--tol', type=float, default=TOLERANCE)
    parser.add_argument('--seed', type=int, default=SEED)


def add_noise_args(parser, default):
    parser.add_argument('--noise', choices=NOISE_KINDS, default=default)
    parser.add_argument('--scale', type=float, help='cauchy scale')
    parser.add_argument('--beta', type=float, help='noise level')
    parser.add_argument('--density', type=float, help='outlier density')
    parser.add_argument('--low', type=float, help='outlier lower bound')
    parser.add_argument('--high', type=float, help='outlier upper bound')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pyhqcp',
        description='Robust orthogonal CP approximation with Cauchy loss.')
    parser.add_argument('--verbose', action='store_true')
    parser.add_argument('--debug', action='store_true')
    sub = parser.add_subparsers(dest='command')
    sub.required = True
    solver_names = [str(s) for s in SOLVERS]

    p = sub.add_parser('decompose', help='decompose RCPD1 tensor file')
    p.add_argument('input')
    p.add_argument('--rank', '-R', type=int, required=True)
    p.add_argument('--t', type=int, default=1,
                   help='number of trailing orthonormal modes')
    p.add_argument('--solver', choices=solver_names,
                   default=str(SOLVER_HQ_ADMM))
    p.add_argument('--output', '-o', required=True)
    p.add_argument('--truth', help='clean tensor to report err against')
    p.add_argument('--no-diagnostics', dest='diagnostics',
                   action='store_false')
    add_solver_args(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser('synth', help='generate noisy synthetic tensor')
    p.add_argument('--dims', type=int, nargs='+', required=True)
    p.add_argument('--rank', '-R', type=int, default=BENCH_RANK)
    p.add_argument('--t', type=int, default=1)
    p.add_argument('--seed', type=int, default=SEED)
    p.add_argument('--output', '-o', required=True)
    add_noise_args(p, 'cauchy')
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('bench', help='compare solvers on synthetic data')
    p.add_argument('--table', choices=sorted(TABLE_GRIDS))
    p.add_argument('--n', type=int, nargs='*', default=[])
    p.add_argument('--d', type=int, default=3)
    p.add_argument('--t', type=int, default=1)
    p.add_argument('--rank', '-R', type=int, default=BENCH_RANK)
    p.add_argument('--instances', type=int, default=BENCH_INSTANCES)
    p.add_argument('--jobs', type=int, default=1)
    p.add_argument('--solvers', nargs='+', choices=solver_names,
                   default=solver_names)
    p.add_argument('--output', '-o', required=True, help='CSV file')
    add_noise_args(p, None)
    add_solver_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('video', help='extract background and foreground')
    p.add_argument('frames', nargs='?', help='directory with P5 frames')
    p.add_argument('--rank', '-R', type=int, default=VIDEO_RANK)
    p.add_argument('--output', '-o')
    p.add_argument('--normalization', choices=[str(n) for n in NORMALIZATIONS],
                   default=str(NORMALIZATIONS[0]))
    p.add_argument('--foreground', choices=[str(f) for f in FOREGROUND_MODES],
                   default=str(FOREGROUND_MODES[0]))
    p.add_argument('--ratio-table', action='store_true')
    p.add_argument('--dims', type=int, nargs=3, metavar=('L', 'M', 'N'))
    add_solver_args(p)
    p.set_defaults(func=cmd_video)

    p = sub.add_parser('video-gen', help='generate synthetic video')
    p.add_argument('--frames', type=int, default=100)
    p.add_argument('--height', type=int, default=48)
    p.add_argument('--width', type=int, default=64)
    p.add_argument('--bg-rank', type=int, default=3)
    p.add_argument('--block', type=int, default=8)
    p.add_argument('--contrast', type=float, default=0.8)
    p.add_argument('--seed', type=int, default=SEED)
    p.add_argument('--output', '-o', required=True)
    p.set_defaults(func=cmd_video_gen)

    p = sub.add_parser('loss', help='tabulate Cauchy loss')
    p.add_argument('--deltas', type=float, nargs='+', default=[DELTA])
    p.add_argument('--t-min', type=float, default=-1.0)
    p.add_argument('--t-max', type=float, default=1.0)
    p.add_argument('--points', type=int, default=21)
    p.add_argument('--output', '-o')
    p.set_defaults(func=cmd_loss)
    return parser


def fail(code, e):
    print('ERROR ' + str(e), file=sys.stderr)
    return code


def main(argv=None):
    """ Run command line interface.
    :param argv: arguments without program name, sys.argv if None.
    :return: exit code.
    """
    args = build_parser().parse_args(argv)
    if args.debug:
        logging_config.debug_enable()
    elif args.verbose:
        logging_config.info_enable()
    else:
        logging_config.warning_enable()
    try:
        return args.func(args)
    except (RcpdException, PgmException) as e:
        return fail(EXIT_PARSE, e)
    except SolverException as e:
        return fail(EXIT_DOMAIN if e.iteration is None else EXIT_NUMERICAL, e)
    except np.linalg.LinAlgError as e:
        return fail(EXIT_NUMERICAL, e)
    except (TensorException, LossException, SynthException,
            video.VideoException, ValueError) as e:
        return fail(EXIT_DOMAIN, e)
    except (IOError, OSError) as e:
        return fail(EXIT_IO, e)


if __name__ == "__main__":
    sys.exit(main())
