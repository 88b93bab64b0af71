"""
명령행 진입점
합성 데이터 생성, 학습, 평가, 앙상블, 정제, Grad-CAM, 그래디언트 검증

사용 예:
    python -m src gen-synth --classes 3 --per-class 100 --size 16 --seed 7 --out data/
    python -m src train --arch fusion --manifest data/manifest.csv --out runs/fusion --train.lr0 0.001
    python -m src eval --checkpoint runs/fusion/best.ckpt --manifest data/manifest.csv --out runs/fusion/eval/report.json
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from . import __version__
from .data import (
    BatchLoader,
    SPLITS,
    STRATEGIES,
    RefineSummary,
    attach_annotations,
    class_distribution,
    generate_synthetic,
    linear_probe_accuracy,
    load_manifest,
    normalize,
    read_ppm,
    refine,
    resize,
    save_manifest,
)
from .errors import ConfigurationError, ManifestError, PestLabError, ShapeError
from .evaluation import (
    VOTING_MODES,
    EvaluationReport,
    read_predictions,
    read_truth,
    search_ensembles,
    vote,
    write_predictions,
    write_truth,
)
from .gradient_suite import TOLERANCE, print_results, run_suite
from .models import ARCHITECTURES, build_model, grad_cam, save_heatmap
from .training import Trainer, evaluate, load_model
from .utils import Config, Visualizer, split_overrides

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _setup_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def _load_config(args: argparse.Namespace) -> Config:
    config = Config(args.config)
    if args.overrides:
        config.apply_overrides(args.overrides)
    if args.workers is not None:
        config.set("data.workers", args.workers)
    return config


# ----------------------------------------------------------------------
# 명령 구현
# ----------------------------------------------------------------------
def cmd_gen_synth(args: argparse.Namespace) -> int:
    config = _load_config(args).validate()
    data = config.get_data_config()
    out = Path(args.out)
    manifest = generate_synthetic(
        out,
        num_classes=args.classes,
        per_class=args.per_class,
        size=args.size,
        seed=args.seed,
        ratios=data.split_ratios,
    )
    config.write_resolved(out)
    manifest.print_summary("합성 데이터셋")
    print(class_distribution(manifest).to_string())
    if args.probe:
        print(f"\n{'선형 프로브 정확도 (train)':.<30} {linear_probe_accuracy(manifest):>10.4f}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.arch:
        config.set("model.arch", args.arch)
    if args.manifest:
        config.set("data.manifest", args.manifest)
    config.validate()

    data = config.get_data_config()
    if not data.manifest:
        raise ConfigurationError("매니페스트 경로가 필요합니다 (--manifest 또는 data.manifest)")
    manifest = load_manifest(data.manifest)
    train_config = config.get_train_config()
    # 모델 입력/클래스 수는 데이터에서, 초기화 시드는 학습 시드에서 정한다
    config.set("model.num_classes", manifest.num_classes)
    config.set("model.height", data.image_size)
    config.set("model.width", data.image_size)
    config.set("model.seed", train_config.seed)
    config.validate()
    spec = config.get_model_spec()
    augment_spec = config.get_augment_spec()

    out = Path(args.out)
    config.write_resolved(out)
    image_size = (data.image_size, data.image_size)
    train_loader = BatchLoader(
        manifest,
        "train",
        batch_size=train_config.batch_size,
        image_size=image_size,
        augment_spec=augment_spec,
        seed=train_config.seed,
        shuffle=True,
        workers=data.workers,
    )
    val_loader = BatchLoader(
        manifest,
        "val",
        batch_size=train_config.batch_size,
        image_size=image_size,
        augment_spec=augment_spec if augment_spec.apply_to_validation else None,
        seed=train_config.seed,
        workers=data.workers,
    )

    model = build_model(spec)
    trainer = Trainer(model, train_loader, val_loader, train_config, out_dir=out)
    if args.resume:
        trainer.resume(args.resume)
    elif args.init:
        trainer.warm_start(args.init)
    result = trainer.fit()
    result.print_summary()

    if args.plot:
        Visualizer().plot_training_history(trainer.history_frame(), out / "training_history.png")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args).validate()
    data = config.get_data_config()
    train_config = config.get_train_config()
    manifest_path = args.manifest or data.manifest
    if not manifest_path:
        raise ConfigurationError("매니페스트 경로가 필요합니다 (--manifest 또는 data.manifest)")

    model = load_model(args.checkpoint)
    spec = model.spec
    manifest = load_manifest(manifest_path, num_classes=spec.num_classes)
    loader = BatchLoader(
        manifest,
        args.split,
        batch_size=train_config.batch_size,
        image_size=(spec.height, spec.width),
        workers=data.workers,
    )
    accuracy, probabilities = evaluate(model, loader)
    logger.info(f"{args.split} 정확도: {accuracy:.4f}")

    out = Path(args.out)
    out_dir = out.parent
    report = EvaluationReport.from_labels(
        loader.labels, probabilities.argmax(axis=1), spec.num_classes, title=f"평가 리포트 ({args.split})"
    )
    report.save_json(out)
    write_predictions(out_dir / "predictions.csv", loader.sample_ids, probabilities)
    write_truth(out_dir / "truth.csv", loader.sample_ids, loader.labels)
    config.write_resolved(out_dir)
    report.print_report()

    if args.plot:
        Visualizer().plot_confusion_matrix(
            report.report.confusion_matrix, out_dir / "confusion_matrix.png", normalize=True
        )
    return EXIT_OK


def _model_names(paths: Sequence[str]) -> List[str]:
    stems = [Path(p).stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [Path(p).as_posix() for p in paths]


def cmd_ensemble(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.mode:
        config.set("ensemble.mode", args.mode)
    config.validate()
    ensemble = config.get_ensemble_config()

    loaded = [read_predictions(path) for path in args.pred]
    sample_ids, first = loaded[0]
    for path, (ids, probabilities) in zip(args.pred[1:], loaded[1:]):
        if probabilities.shape[0] != first.shape[0]:
            raise ShapeError(
                f"예측 파일 행 수가 다릅니다: {args.pred[0]}, {path}", first.shape, probabilities.shape
            )
        if ids != sample_ids:
            raise ManifestError(f"예측 파일의 sample_id 순서가 다릅니다: {args.pred[0]}, {path}")
    predictions = [probabilities for _, probabilities in loaded]
    truth = read_truth(args.truth, sample_ids)
    num_classes = first.shape[1]

    out = Path(args.out)
    fused, labels = vote(predictions, ensemble.mode)
    report = EvaluationReport.from_labels(
        truth, labels, num_classes, title=f"앙상블 리포트 ({ensemble.mode}, 모델 {len(predictions)}개)"
    )
    report.save_json(out / "report.json")
    write_predictions(out / "predictions.csv", sample_ids, fused)
    config.write_resolved(out)
    report.print_report()

    if args.search:
        named = dict(zip(_model_names(args.pred), predictions))
        ranking = search_ensembles(named, truth, min_size=ensemble.min_size, mode=ensemble.mode)
        ranking.to_csv(out / "ensemble_search.csv", index=False, float_format="%.17g")
        print("\n" + "=" * 60)
        print(f"앙상블 조합 순위 ({ensemble.mode})")
        print("=" * 60)
        for row in ranking.head(10).itertuples(index=False):
            print(f"{row.models:.<45} {row.accuracy * 100:>10.2f}%")
        print("=" * 60 + "\n")
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if args.threshold is not None:
        config.set("data.confidence_threshold", args.threshold)
    config.validate()
    data = config.get_data_config()

    manifest_path = Path(args.manifest)
    ann_dir = Path(args.ann_dir) if args.ann_dir else manifest_path.parent / "annotations"
    manifest = attach_annotations(load_manifest(manifest_path), ann_dir)
    refined = refine(manifest, args.strategy, data.confidence_threshold)

    out = Path(args.out)
    save_manifest(refined, out)
    config.write_resolved(out.parent)
    RefineSummary(args.strategy, manifest.counts(), refined.counts()).print_summary()
    print(class_distribution(refined).to_string())
    return EXIT_OK


def cmd_gradcam(args: argparse.Namespace) -> int:
    config = _load_config(args).validate()
    model = load_model(args.checkpoint)
    spec = model.spec
    image = resize(read_ppm(args.image), spec.height, spec.width)
    heatmap = grad_cam(model, normalize(image), args.target_class, args.layer)

    out = Path(args.out)
    save_heatmap(heatmap, out)
    config.write_resolved(out.parent)
    if args.plot:
        Visualizer().plot_gradcam_overlay(
            image, heatmap.data, out.with_suffix(".png"), title=f"class {args.target_class} @ {args.layer}"
        )
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    results = run_suite(seed=args.seed, tolerance=args.tolerance, only=args.only)
    if results.empty:
        raise ConfigurationError(f"선택된 연산이 없습니다: {', '.join(args.only)}")
    print_results(results, args.tolerance)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        results.to_csv(out / "gradcheck.csv", index=False, float_format="%.17g")
        _load_config(args).validate().write_resolved(out)
    failed = results.loc[~results["passed"], "op"].tolist()
    if failed:
        logger.error(f"그래디언트 검증 실패: {', '.join(failed)}")
        return EXIT_FAILURE
    return EXIT_OK


# ----------------------------------------------------------------------
# 파서
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML 설정 파일 (기본: 프로젝트 루트 config.yaml)")
    common.add_argument("--workers", type=int, default=None, help="병렬 이미지 디코딩 스레드 수")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="DEBUG 로그 출력")
    verbosity.add_argument("--quiet", action="store_true", help="경고 이상만 출력")

    parser = argparse.ArgumentParser(
        prog="pestlab",
        description="해충 이미지 분류 실험 도구",
        epilog="설정 재정의: --section.key value (예: --train.lr0 0.001, --augment.shear 0)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, func: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("gen-synth", cmd_gen_synth, "합성 데이터셋 생성")
    p.add_argument("--classes", type=int, default=3, help="클래스 수")
    p.add_argument("--per-class", type=int, default=100, help="클래스당 샘플 수")
    p.add_argument("--size", type=int, default=16, help="이미지 한 변 크기")
    p.add_argument("--seed", type=int, default=0, help="난수 시드")
    p.add_argument("--probe", action="store_true", help="선형 프로브 정확도 출력")
    p.add_argument("--out", required=True, help="출력 디렉토리")

    p = add("train", cmd_train, "모델 학습")
    p.add_argument("--arch", choices=ARCHITECTURES + ("fpn-classifier",), default=None, help="아키텍처")
    p.add_argument("--manifest", default=None, help="매니페스트 CSV (기본: data.manifest)")
    p.add_argument("--out", required=True, help="출력 디렉토리")
    start = p.add_mutually_exclusive_group()
    start.add_argument("--resume", default=None, help="학습을 이어갈 체크포인트")
    start.add_argument("--init", default=None, help="파라미터만 불러올 체크포인트")
    p.add_argument("--plot", action="store_true", help="학습 곡선 그림 저장")

    p = add("eval", cmd_eval, "체크포인트 평가")
    p.add_argument("--checkpoint", required=True, help="체크포인트 파일")
    p.add_argument("--manifest", default=None, help="매니페스트 CSV (기본: data.manifest)")
    p.add_argument("--split", choices=SPLITS, default="test", help="평가 split")
    p.add_argument("--out", required=True, help="리포트 JSON 경로 (옆에 predictions.csv, truth.csv 기록)")
    p.add_argument("--plot", action="store_true", help="혼동 행렬 그림 저장")

    p = add("ensemble", cmd_ensemble, "예측 파일 앙상블 투표")
    p.add_argument("--pred", nargs="+", required=True, help="예측 CSV 목록")
    p.add_argument("--truth", required=True, help="정답 CSV")
    p.add_argument("--mode", choices=VOTING_MODES, default=None, help="투표 방식 (기본: ensemble.mode)")
    p.add_argument("--search", action="store_true", help="모든 모델 조합 순위 계산")
    p.add_argument("--out", required=True, help="출력 디렉토리")

    p = add("refine", cmd_refine, "검출 박스 기반 데이터셋 정제")
    p.add_argument("--manifest", required=True, help="입력 매니페스트 CSV")
    p.add_argument("--ann-dir", default=None, help="주석 디렉토리 (기본: 매니페스트 옆 annotations/)")
    p.add_argument("--strategy", choices=STRATEGIES, required=True, help="정제 전략")
    p.add_argument(
        "--threshold", type=float, default=None, help="검출 신뢰도 기준 (기본: data.confidence_threshold)"
    )
    p.add_argument("--out", required=True, help="출력 매니페스트 CSV")

    p = add("gradcam", cmd_gradcam, "Grad-CAM 히트맵 생성")
    p.add_argument("--checkpoint", required=True, help="체크포인트 파일")
    p.add_argument("--image", required=True, help="입력 PPM 이미지")
    p.add_argument("--class", dest="target_class", type=int, required=True, help="목표 클래스")
    p.add_argument("--layer", required=True, help="특징 맵 이름 (예: block2)")
    p.add_argument("--out", required=True, help="출력 PGM 경로")
    p.add_argument("--plot", action="store_true", help="이미지 위 히트맵 그림 저장")

    p = add("gradcheck", cmd_gradcheck, "전체 연산 그래디언트 검증")
    p.add_argument("--seed", type=int, default=0, help="입력 생성 시드")
    p.add_argument("--tolerance", type=float, default=TOLERANCE, help="최대 상대 오차 기준")
    p.add_argument("--only", nargs="+", default=None, help="연산 이름 접두사 필터")
    p.add_argument("--out", default=None, help="결과 CSV 출력 디렉토리")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI 실행

    Returns:
        int: 종료 코드 (0 성공, 1 실행 오류, 2 설정/검증 오류)
    """
    arguments = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        overrides, rest = split_overrides(arguments)
    except ConfigurationError as e:
        parser.error(str(e))
    args = parser.parse_args(rest)
    args.overrides = overrides
    _setup_logging(args.verbose, args.quiet)

    try:
        return args.func(args)
    except ConfigurationError as e:
        print(f"[{args.command}] 설정 오류: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PestLabError as e:
        print(f"[{args.command}] 오류: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"[{args.command}] 파일 오류: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
