"""의존성 추정 / DRN 학습 도구 - CLI 진입점.

사용법:
    python main.py estimate --input pairs.csv --method lsmi [--config run.cfg]
    python main.py benchmark --rhos 0,0.5,0.8 --ns 2000 --seeds 10 --out sweep.csv [--notebook report.ipynb]
    python main.py train --dataset two_moons --config run.cfg --out-dir output/run1
    python main.py gradcheck --target total

종료 코드: 0 성공, 2 사용법/설정 오류, 3 입력 데이터 오류, 4 학습 중 수치 오류, 5 기울기 검사 실패
"""

import argparse
import logging
import sys
from pathlib import Path

import config
from data_generator import (
    DatasetSpec,
    load_paired_csv,
    make_labeled_dataset,
    split_dataset,
    write_benchmark_csv,
    write_metrics_csv,
)
from data_generator.csv_io import format_float
from drn_trainer import GRADCHECK_TARGETS, run_gradcheck, save_checkpoint, train
from errors import ConfigError, DataFormatError, NumericError, TrainingDivergedError
from lsmi_estimator import kde_mi, ksg_mi, lsmi_estimate
from lsmi_estimator.benchmark import BENCHMARK_METHODS, run_sweep
from lsmi_estimator.oracles import silverman_bandwidth
from report_builder import build_benchmark_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_GRADCHECK = 5

ESTIMATE_METHODS = ("lsmi", "ksg", "kde")


def _list_of(kind):
    def parse(text: str):
        try:
            return tuple(kind(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"쉼표로 구분된 목록이어야 합니다: {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="LSMI 의존성 추정과 이중 역할 네트워크(DRN) 학습을 배치 실행합니다.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="진단 로그(INFO)를 표준 오류로 출력")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="짝 샘플 CSV 하나의 의존성을 추정")
    p.add_argument("--input", required=True, help="짝 샘플 CSV (s_0..,t_0..)")
    p.add_argument("--method", choices=ESTIMATE_METHODS, default="lsmi", help="추정 방법 (기본: lsmi)")
    p.add_argument("--config", default=None, help="설정 파일 (key = value)")

    p = sub.add_parser("benchmark", help="가우시안 쌍에서 추정기 비교 스윕")
    p.add_argument("--rhos", type=_list_of(float), default=config.DEFAULT_BENCHMARK_RHOS,
                   help="상관계수 목록 (예: 0,0.5,0.8)")
    p.add_argument("--ns", type=_list_of(int), default=config.DEFAULT_BENCHMARK_NS,
                   help="표본 크기 목록 (예: 500,2000)")
    p.add_argument("--seeds", type=int, default=config.DEFAULT_BENCHMARK_SEEDS,
                   help=f"셀마다 반복할 시드 수 (기본: {config.DEFAULT_BENCHMARK_SEEDS})")
    p.add_argument("--methods", type=_list_of(str), default=BENCHMARK_METHODS,
                   help="비교할 방법 (기본: lsmi,ksg,kde)")
    p.add_argument("--out", required=True, help="결과 CSV 경로")
    p.add_argument("--notebook", default=None, help="요약 보고서 노트북 경로 (.ipynb)")
    p.add_argument("--timing", action="store_true", help="wall_time 열을 채움 (출력이 실행마다 달라짐)")
    p.add_argument("--workers", type=int, default=1, help="병렬 작업 수")
    p.add_argument("--config", default=None, help="설정 파일 (key = value)")
    p.add_argument("--quiet", action="store_true", help="진행 표시 끄기")

    p = sub.add_parser("train", help="DRN 학습")
    p.add_argument("--dataset", choices=config.TRAIN_DATASETS, default="two_moons", help="데이터셋 종류")
    p.add_argument("--input", default=None, help="--dataset csv일 때 레이블 CSV (x_0..,label)")
    p.add_argument("--config", default=None, help="설정 파일 (key = value)")
    p.add_argument("--out-dir", default=config.DEFAULT_OUT_DIR, help="metrics.csv와 체크포인트를 저장할 폴더")
    p.add_argument("--quiet", action="store_true", help="진행 표시 끄기")

    p = sub.add_parser("gradcheck", help="해석적 기울기와 유한차분 비교")
    p.add_argument("--target", choices=GRADCHECK_TARGETS, required=True, help="검사 대상")
    p.add_argument("--seed", type=int, default=0, help="픽스처 시드")
    return parser


def _progress(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message, file=sys.stderr)


def cmd_estimate(args, run_cfg: config.RunConfig) -> int:
    Ps, Pt = load_paired_csv(args.input)
    n, d = Ps.shape
    sigma_s = sigma_t = delta = None
    if args.method == "lsmi":
        est = lsmi_estimate(Ps, Pt, run_cfg.lsmi)
        value = est.value
        sigma_s, sigma_t, delta = est.chosen_sigma_s, est.chosen_sigma_t, est.chosen_delta
    elif args.method == "ksg":
        value = ksg_mi(Ps, Pt, run_cfg.ksg_k).value
    else:
        value = kde_mi(Ps, Pt, silverman_bandwidth(Ps), silverman_bandwidth(Pt)).value
    fields = [args.method, format_float(value), str(n), str(d),
              format_float(sigma_s), format_float(sigma_t), format_float(delta)]
    print(",".join(fields))
    return EXIT_OK


def cmd_benchmark(args, run_cfg: config.RunConfig, parser: argparse.ArgumentParser) -> int:
    for method in args.methods:
        if method not in BENCHMARK_METHODS:
            parser.error(f"알 수 없는 방법입니다: {method} (가능: {','.join(BENCHMARK_METHODS)})")
    if any(not abs(r) < 1.0 for r in args.rhos):
        parser.error(f"rho는 (-1, 1) 범위여야 합니다: {args.rhos}")
    if any(n < 2 for n in args.ns) or args.seeds < 1 or args.workers < 1:
        parser.error("ns >= 2, seeds >= 1, workers >= 1 이어야 합니다.")

    total = 2 if args.notebook else 1
    _progress(args, f"[1/{total}] 스윕 실행: {len(args.methods)}개 방법 x {len(args.rhos)}개 rho "
                    f"x {len(args.ns)}개 n x {args.seeds}개 시드")
    rows = run_sweep(args.methods, args.rhos, args.ns, args.seeds, run_cfg.lsmi, run_cfg.ksg_k,
                     workers=args.workers, timing=args.timing, quiet=args.quiet)
    write_benchmark_csv(args.out, rows)
    _progress(args, f"  저장 완료: {args.out} ({len(rows)}행)")

    if args.notebook:
        _progress(args, f"[2/{total}] 보고서 노트북을 생성합니다...")
        build_benchmark_report(rows, csv_path=args.out, output_path=args.notebook)
        _progress(args, f"  저장 완료: {args.notebook}")
    return EXIT_OK


def _load_train_data(args, run_cfg: config.RunConfig, parser: argparse.ArgumentParser):
    data, seed = run_cfg.data, run_cfg.train.seed
    if args.dataset == "csv":
        if not args.input:
            parser.error("--dataset csv에는 --input이 필요합니다.")
        dataset = make_labeled_dataset(DatasetSpec("csv", 1, seed, {"path": args.input}))
        return split_dataset(dataset, data.val_fraction, seed)
    params = {"noise": data.noise, "n_classes": data.n_classes, "spread": data.spread}
    train_set = make_labeled_dataset(DatasetSpec(args.dataset, data.n_train, seed, params))
    # 검증 세트는 학습 세트와 다른 시드 스트림에서 뽑는다
    val_set = make_labeled_dataset(DatasetSpec(args.dataset, data.n_val, seed + 1_000_003, params))
    return train_set, val_set


def cmd_train(args, run_cfg: config.RunConfig, parser: argparse.ArgumentParser) -> int:
    cfg = run_cfg.train
    out_dir = Path(args.out_dir)

    _progress(args, f"[1/3] 데이터 준비: {args.dataset}")
    train_set, val_set = _load_train_data(args, run_cfg, parser)
    _progress(args, f"  학습 {len(train_set)}개, 검증 {len(val_set)}개")

    _progress(args, f"[2/3] {cfg.variant} 학습 (seed {cfg.seed}, 최대 {cfg.epochs} 에폭)...")
    best, history = train(cfg, train_set, val_set, quiet=args.quiet)

    _progress(args, "[3/3] 결과 저장...")
    write_metrics_csv(out_dir / "metrics.csv", history)
    tensors = {f"student.{k}": v for k, v in best.theta_s.items()}
    tensors.update({f"teacher.{k}": v for k, v in best.theta_t.items()})
    save_checkpoint(out_dir / "best.ckpt", tensors)
    _progress(args, f"  저장 완료: {out_dir}")

    best_f1 = history[best.epoch].val_macro_f1
    print(f"{cfg.variant},{cfg.seed},{format_float(best_f1)}")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    report = run_gradcheck(args.target, args.seed)
    print("block,size,max_rel_error")
    for block in report.blocks:
        print(f"{block.name},{block.size},{format_float(block.max_rel_error)}")
    status = "통과" if report.passed else "실패"
    print(f"{args.target}: 최대 상대오차 {report.max_error:.3e} (허용 {report.tolerance:g}) {status}",
          file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_GRADCHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.command == "gradcheck":
            return cmd_gradcheck(args)
        try:
            run_cfg = config.load_run_config(args.config)
        except FileNotFoundError as e:
            raise ConfigError("--config", str(e)) from None
        if args.command == "estimate":
            return cmd_estimate(args, run_cfg)
        if args.command == "benchmark":
            return cmd_benchmark(args, run_cfg, parser)
        return cmd_train(args, run_cfg, parser)
    except ConfigError as e:
        print(f"오류: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingDivergedError, NumericError) as e:
        print(f"오류: 수치 계산 실패 - {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FileNotFoundError, DataFormatError, ValueError) as e:
        print(f"오류: 입력 데이터 - {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
