#!/usr/bin/env python3
"""
Command line entry point.

    python main.py pi --formula 163 --digits 1000
    python main.py table --output structured
    python main.py verify --suite clausen,divpoly
    python main.py bench --ladder 1000,10000

Exit codes: 0 success, 1 verification or recognition failure, 2 usage error.
"""

import argparse
import logging
import sys
import time
from typing import List, Literal, Optional, Sequence

import mpmath
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator

from cmcoeffs import approx_listing, cm_point, coefficient_table
from errors import ChudPiError
from mpnum import PrecisionCtx
from piengine import compute_pi, formula_catalog, formula_for, planned_terms
from settings import Settings, get_settings
from verify_suites import VerificationRunner, print_report

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_LADDER = (1000, 10000, 100000)
SUITE_NAMES = (
    'catalog', 'bounds', 'clausen', 'odes', 'kummer', 'picard-fuchs', 'weierstrass',
    'divpoly', 'appendixB', 'main-theorem', 'engine-equivalence', 'scaling',
)
CATALOG_N = tuple(spec.N for spec in formula_catalog())


class CliConfig(BaseModel):
    """Validated command line options."""
    command: Literal['pi', 'table', 'verify', 'bench']
    formula_N: int = 163
    digits: int = Field(100, ge=1)
    method: Literal['bs', 'naive'] = 'bs'
    precision: Optional[int] = Field(None, ge=64)
    output: Literal['plain', 'structured'] = 'plain'
    suites: Optional[List[str]] = None
    ladder: List[int] = list(DEFAULT_LADDER)
    workers: int = Field(1, ge=1)

    @field_validator('formula_N')
    @classmethod
    def _in_catalog(cls, value: int) -> int:
        if value not in CATALOG_N:
            raise ValueError(f"no formula for N={value}, expected one of {CATALOG_N}")
        return value

    @field_validator('suites')
    @classmethod
    def _known_suites(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is None:
            return value
        unknown = [name for name in value if name not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suite(s) {unknown}, expected some of {list(SUITE_NAMES)}")
        return value

    @field_validator('ladder')
    @classmethod
    def _positive_ladder(cls, value: List[int]) -> List[int]:
        if not value or any(d < 1 for d in value):
            raise ValueError("ladder needs positive digit counts")
        return value


class PiRecord(BaseModel):
    formula: int
    digits: int
    method: str
    pi: str


class TableRecord(BaseModel):
    """One row of the coefficient table with its approximant columns."""
    N: int
    tau: str
    j1728: int
    c: int
    b: int
    a: int
    s2: str
    frac: str
    j_radius: float
    a_radius: float
    J1728_approx: str
    s2_approx: str


class BenchRecord(BaseModel):
    formula: int
    digits: int
    method: str
    seconds: float
    terms: int


def _comma_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(',') if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='chudpi', description='Chudnovsky-type series for pi')
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument('--precision', type=int, default=None, help='working precision in bits')
        p.add_argument('--output', choices=('plain', 'structured'), default='plain')

    pi = sub.add_parser('pi', help='print pi to the requested digits')
    pi.add_argument('--formula', type=int, default=163, dest='formula_N')
    pi.add_argument('--digits', type=int, default=100)
    pi.add_argument('--method', choices=('bs', 'naive'), default='bs')
    pi.add_argument('--workers', type=int, default=None)
    common(pi)

    table = sub.add_parser('table', help='recognise the exact coefficient table')
    common(table)

    verify = sub.add_parser('verify', help='run verification suites')
    verify.add_argument('--suite', type=_comma_list, default=None, dest='suites',
                        help=f"comma separated, from {', '.join(SUITE_NAMES)}")
    common(verify)

    bench = sub.add_parser('bench', help='time bs against naive summation')
    bench.add_argument('--formula', type=int, default=163, dest='formula_N')
    bench.add_argument('--ladder', type=lambda s: [int(x) for x in _comma_list(s)],
                       default=list(DEFAULT_LADDER))
    bench.add_argument('--workers', type=int, default=None)
    common(bench)
    return parser


def _emit(records: Sequence[BaseModel], cfg: CliConfig) -> None:
    if cfg.output == 'structured':
        for record in records:
            print(record.model_dump_json())
    else:
        print(pd.DataFrame([r.model_dump() for r in records]).to_string(index=False))


def run_pi(cfg: CliConfig) -> int:
    spec = formula_for(cfg.formula_N)
    digits = compute_pi(spec, cfg.digits, method=cfg.method, workers=cfg.workers)
    if cfg.output == 'structured':
        print(PiRecord(formula=spec.N, digits=cfg.digits, method=cfg.method, pi=digits).model_dump_json())
    else:
        print(digits)
    return 0


def run_table(cfg: CliConfig, settings: Settings) -> int:
    ctx = PrecisionCtx.from_settings(settings)
    rows = coefficient_table(ctx)
    listing = approx_listing(ctx).set_index('N')
    records = []
    for row in rows:
        with ctx.scope():
            tau = mpmath.nstr(cm_point(row.N, ctx).tau, 12)
        records.append(TableRecord(
            N=row.N, tau=tau, j1728=row.j, c=row.c, b=row.b, a=row.a,
            s2=str(row.s2), frac=str(row.frac),
            j_radius=row.j_radius, a_radius=row.a_radius,
            J1728_approx=listing.loc[row.N, 'J1728_approx'],
            s2_approx=listing.loc[row.N, 's2_approx'],
        ))
    _emit(records, cfg)
    return 0


def run_verify(cfg: CliConfig, settings: Settings) -> int:
    runner = VerificationRunner(PrecisionCtx.from_settings(settings), settings)
    results = runner.run(cfg.suites)
    if cfg.output == 'structured':
        for r in results:
            print(r.model_dump_json())
    else:
        print_report(results)
        failed = sum(1 for r in results if not r.passed)
        print("\n" + "=" * 50)
        print(f"{'✅' if not failed else '❌'} {len(results) - failed}/{len(results)} checks passed")
    return 0 if runner.passed else 1


def run_bench(cfg: CliConfig) -> int:
    spec = formula_for(cfg.formula_N)
    records = []
    for digits in cfg.ladder:
        outputs = {}
        for method in ('bs', 'naive'):
            start = time.perf_counter()
            outputs[method] = compute_pi(spec, digits, method=method, workers=cfg.workers)
            seconds = time.perf_counter() - start
            records.append(BenchRecord(formula=spec.N, digits=digits, method=method,
                                       seconds=round(seconds, 6), terms=planned_terms(spec, digits)))
        if outputs['bs'] != outputs['naive']:
            logger.error("bs and naive disagree at %d digits", digits)
            _emit(records, cfg)
            return 1
    _emit(records, cfg)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        settings = get_settings(args.precision)
        logging.basicConfig(level=settings.log_level, format=LOG_FORMAT, stream=sys.stderr)
        options = {k: v for k, v in vars(args).items() if v is not None}
        options.setdefault('workers', settings.workers)
        cfg = CliConfig(**options)
    except ValidationError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2

    try:
        if cfg.command == 'pi':
            return run_pi(cfg)
        if cfg.command == 'table':
            return run_table(cfg, settings)
        if cfg.command == 'verify':
            return run_verify(cfg, settings)
        return run_bench(cfg)
    except ChudPiError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
