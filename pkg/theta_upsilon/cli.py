import argparse
import json
import logging
import sys
from dataclasses import replace
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, List, Optional, TextIO

from .errors import UpsilonError
from .graph_core import (
    LabeledGraph,
    WeightVector,
    enumerate_matchings,
    parse_weight_vector,
    read_json,
    validate_graph,
)
from .matching_polytope import (
    build_delta_complex,
    decompose_to_matchings,
    solution_polytope,
    vertex_weights,
)
from .selftest import run_selftest
from .settings import DEFAULT_CONFIG_PATH, Settings, load_settings, setup_logging
from .t_homology import d_invariant, homology_at
from .tangle_complex import (
    TangleComplex,
    dump_complex,
    ensure_valid,
    from_knot_cfk,
    glue,
    load_cfk,
    load_complex,
    stabilize,
    tensor,
)
from .upsilon_pl import (
    PLFunction,
    SegmentOptions,
    f_i_components,
    jump_delta_i,
    reconstruct_segment,
    sample_rows,
    tau_matrix,
    theta_size,
)

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "plot")
PLOT_DIGITS = 20


class _Parser(argparse.ArgumentParser):
    """사용법 오류를 E_USAGE 로 올린다 (exit 2)"""

    def error(self, message: str):
        raise UpsilonError("E_USAGE", message, {'usage': self.format_usage().strip()})


def _weight_vector(text: str) -> WeightVector:
    try:
        return parse_weight_vector(text)
    except UpsilonError as e:
        raise argparse.ArgumentTypeError(e.message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"유리수가 아님: {text!r}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"정수가 아님: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"양의 정수여야 함: {value}")
    return value


def _decimal(value: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = PLOT_DIGITS
        return str(Decimal(value.numerator) / Decimal(value.denominator))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="json", help="출력 형식")
    common.add_argument("--out", metavar="FILE", help="출력 파일 (기본: stdout)")
    common.add_argument("--max-depth", type=_positive_int, help="구간 재구성 최대 깊이")
    common.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="설정 파일 경로")

    parser = _Parser(prog="theta-upsilon", description="Θ-그래프 복합체의 Upsilon 불변량 계산")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("matchings", "polytope", "delta-complex"):
        sub = commands.add_parser(name, parents=[common])
        sub.add_argument("input", help="그래프 또는 복합체 JSON")

    sub = commands.add_parser("decompose", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--t", type=_weight_vector, required=True)

    for name in ("validate", "import-cfk"):
        sub = commands.add_parser(name, parents=[common])
        sub.add_argument("input")

    for name in ("tensor", "glue"):
        sub = commands.add_parser(name, parents=[common])
        sub.add_argument("first")
        sub.add_argument("second")

    sub = commands.add_parser("stabilize", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--slot", type=int, required=True)
    sub.add_argument("--extra", type=int, default=1)

    upsilon = commands.add_parser("upsilon").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sub = upsilon.add_parser("eval", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--t", type=_weight_vector, required=True)
    sub = upsilon.add_parser("segment", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--from", dest="start", type=_weight_vector, required=True)
    sub.add_argument("--to", dest="end", type=_weight_vector, required=True)
    sub.add_argument("--samples", type=int, default=0, help="균등 표본점 개수 (csv/plot)")

    invariants = commands.add_parser("invariants").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("tau", "d"):
        sub = invariants.add_parser(name, parents=[common])
        sub.add_argument("input")
    sub = invariants.add_parser("jumps", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--i", type=_positive_int, help="변 번호 (기본: 전부)")
    sub.add_argument("--a", type=_rational, help="l_i 위의 매개변수 (기본: 모든 꺾임점)")
    sub = invariants.add_parser("fi", parents=[common])
    sub.add_argument("input")
    sub.add_argument("--i", type=_positive_int, default=1)
    sub.add_argument("--k", type=_positive_int, default=5)

    sub = commands.add_parser("selftest", parents=[common])
    sub.add_argument("--seed", type=int)

    return parser


class UpsilonRunner:
    """CLI 명령 실행기"""

    def __init__(self, settings: Settings, output: Optional[TextIO] = None, fmt: str = "json"):
        """
        Args:
            settings: 실행 설정
            output: 결과를 쓸 스트림 (기본: stdout)
            fmt: json | csv | plot
        """
        self.settings = settings
        self.output = output or sys.stdout
        self.fmt = fmt
        self.options = SegmentOptions.from_settings(settings)
        logger.debug(f"실행기 초기화: threads={settings.threads}, max_depth={settings.max_depth}")

    # --- 입력 -----------------------------------------------------------------

    @staticmethod
    def load_graph(path: str) -> LabeledGraph:
        """그래프 JSON 또는 복합체 JSON 의 graph 부분"""
        raw = read_json(path)
        if isinstance(raw, dict) and 'graph' in raw:
            raw = raw['graph']
        return validate_graph(raw)

    # --- 명령 -----------------------------------------------------------------

    def matchings(self, path: str) -> List[str]:
        return [m.canonical_id for m in enumerate_matchings(self.load_graph(path))]

    def polytope(self, path: str) -> Dict:
        g = self.load_graph(path)
        vertices, dimension = solution_polytope(g)
        return {'vertices': [v.to_strings() for v in vertices], 'dimension': dimension}

    def decompose(self, path: str, t: WeightVector) -> Dict:
        combination = decompose_to_matchings(self.load_graph(path), t)
        return {'t': t.to_strings(), 'terms': combination.to_dict()}

    def delta_complex(self, path: str) -> Dict:
        return build_delta_complex(self.load_graph(path)).to_dict()

    def validate(self, path: str) -> Dict:
        c = load_complex(path)
        return {'valid': True, 'generators': len(c.generators), 'arrows': len(c.arrows)}

    def import_cfk(self, path: str) -> Dict:
        return dump_complex(from_knot_cfk(load_cfk(path)))

    def tensor(self, first: str, second: str) -> Dict:
        return dump_complex(ensure_valid(tensor(load_complex(first), load_complex(second))))

    def glue(self, first: str, second: str) -> Dict:
        return dump_complex(ensure_valid(glue(load_complex(first), load_complex(second))))

    def stabilize(self, path: str, slot: int, extra: int) -> Dict:
        return dump_complex(ensure_valid(stabilize(load_complex(path), slot, extra)))

    def upsilon_eval(self, path: str, t: WeightVector) -> Dict:
        structure = homology_at(load_complex(path), t).to_dict()
        return {
            't': t.to_strings(),
            'upsilon': structure['free'],
            'free_rank': structure['free_rank'],
            'torsion': structure['torsion'],
        }

    def upsilon_segment(self, path: str, start: WeightVector, end: WeightVector) -> List[PLFunction]:
        return reconstruct_segment(load_complex(path), start, end, self.options)

    def tau(self, path: str) -> Dict:
        matrix = tau_matrix(load_complex(path), self.options)
        return {
            'slopes': [[None if v is None else str(v) for v in row] for row in matrix],
            'tau': [[None if v is None else str(-v) for v in row] for row in matrix],
        }

    def d(self, path: str) -> Dict:
        return {'d': str(d_invariant(load_complex(path)))}

    def jumps(self, path: str, i: Optional[int], a: Optional[Fraction]) -> List[Dict]:
        c = load_complex(path)
        if a is not None:
            return [jump_delta_i(c, i or 1, a, self.options).to_dict()]

        n = theta_size(c)
        length = Fraction(2, n - 1)
        found = []
        for edge in ([i] if i else range(1, n + 1)):
            line = reconstruct_segment(c, vertex_weights(n, edge, 0), vertex_weights(n, edge, length), self.options)
            for s in line[0].interior_breakpoints():
                found.append(jump_delta_i(c, edge, s * length, self.options).to_dict())
        return found

    def fi(self, path: str, i: int, count: int) -> Dict:
        components = f_i_components(load_complex(path), i, count, self.options)
        return {
            'i': i,
            'components': [str(v) for v in components],
            'integral': all(v.denominator == 1 for v in components),
        }

    def selftest(self, seed: Optional[int]) -> Dict:
        logger.info("=" * 50)
        logger.info("selftest 시작")
        report = run_selftest(self.settings, seed)
        logger.info(f"{'✅ 전체 통과' if report.passed else '❌ 실패 있음'}")
        return report.to_dict()

    # --- 출력 -----------------------------------------------------------------

    def emit(self, payload):
        self.output.write(json.dumps(payload, ensure_ascii=False, indent=2) + "\n")

    def emit_segment(self, functions: List[PLFunction], samples: int = 0):
        if self.fmt == "json":
            self.emit({
                'from': functions[0].segment[0].to_strings(),
                'to': functions[0].segment[1].to_strings(),
                'functions': [f.to_dict() for f in functions],
            })
            return

        rows = sample_rows(functions, samples)
        if self.fmt == "csv":
            self.output.write(",".join(["s"] + [f"upsilon_{k}" for k in range(1, len(functions) + 1)]) + "\n")
            for s, values in rows:
                self.output.write(",".join(str(x) for x in [s] + values) + "\n")
        else:
            self.output.write("# s " + " ".join(f"upsilon_{k}" for k in range(1, len(functions) + 1)) + "\n")
            for s, values in rows:
                self.output.write(" ".join(_decimal(x) for x in [s] + values) + "\n")

    def run(self, args: argparse.Namespace) -> int:
        """명령 실행, 종료 코드 반환"""
        command = args.command
        if command == "upsilon" and args.action == "segment":
            self.emit_segment(self.upsilon_segment(args.input, args.start, args.end), args.samples)
            return 0
        if self.fmt != "json":
            raise UpsilonError("E_USAGE", f"--format {self.fmt} 는 upsilon segment 에서만 지원")

        if command == "matchings":
            self.emit(self.matchings(args.input))
        elif command == "polytope":
            self.emit(self.polytope(args.input))
        elif command == "decompose":
            self.emit(self.decompose(args.input, args.t))
        elif command == "delta-complex":
            self.emit(self.delta_complex(args.input))
        elif command == "validate":
            self.emit(self.validate(args.input))
        elif command == "import-cfk":
            self.emit(self.import_cfk(args.input))
        elif command == "tensor":
            self.emit(self.tensor(args.first, args.second))
        elif command == "glue":
            self.emit(self.glue(args.first, args.second))
        elif command == "stabilize":
            self.emit(self.stabilize(args.input, args.slot, args.extra))
        elif command == "upsilon":
            self.emit(self.upsilon_eval(args.input, args.t))
        elif command == "invariants":
            if args.action == "tau":
                self.emit(self.tau(args.input))
            elif args.action == "d":
                self.emit(self.d(args.input))
            elif args.action == "jumps":
                self.emit(self.jumps(args.input, args.i, args.a))
            else:
                self.emit(self.fi(args.input, args.i, args.k))
        elif command == "selftest":
            report = self.selftest(args.seed)
            self.emit(report)
            return 0 if report['passed'] else 1
        return 0


def _report(error: UpsilonError, stream: TextIO):
    stream.write(json.dumps(error.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI 진입점

    Returns:
        0 성공, 1 도메인 오류 (E_*), 2 사용법 오류
    """
    try:
        args = build_parser().parse_args(argv)
        settings = load_settings(args.config)
        if args.max_depth:
            settings = replace(settings, max_depth=args.max_depth)
        setup_logging(settings.log_level, settings.log_file)

        if args.out:
            with open(args.out, 'w', encoding='utf-8') as f:
                return UpsilonRunner(settings, f, args.format).run(args)
        return UpsilonRunner(settings, sys.stdout, args.format).run(args)

    except UpsilonError as e:
        _report(e, sys.stderr)
        return 2 if e.code == "E_USAGE" else 1
    except OSError as e:
        _report(UpsilonError("E_IO", str(e)), sys.stderr)
        return 1
    except Exception as e:
        logger.exception(f"예상치 못한 오류: {e}")
        _report(UpsilonError("E_INTERNAL", str(e)), sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
